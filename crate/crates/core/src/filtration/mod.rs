//! ℕ-filtrations of section spaces and the monomial-ideal machinery behind them.

pub mod ideal;
pub mod sandwich;
pub mod weights;

pub use ideal::{
    base_ideal_sequence, gord_stabilize, lct_graded_sequence, lct_monomial, parse_ideal, Certificate,
    GradedIdealSequence, MonomialIdeal, StabilizationSearch,
};
pub use sandwich::{delta_hat_sandwich_check, SandwichReport};
pub use weights::{weight_table_csv, ExtendedFiltration, GradedWeights, RationalWeights};
