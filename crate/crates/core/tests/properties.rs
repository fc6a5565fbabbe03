use proptest::prelude::*;

use kstab_core::filtration::{gord_stabilize, lct_monomial, MonomialIdeal, RationalWeights, StabilizationSearch};
use kstab_core::geometry::AffineFunctional;
use kstab_core::invariants::{alpha, delta, ray_invariants, SectionBasis};
use kstab_core::rational::{floor_int, int, rat, Rational};
use kstab_core::toric::corpus;
use kstab_core::{config, Budget, MPoint, NVector, ToricPair, ToricPairSpec};

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (0i64..5, 1i64..7).prop_map(|(n, d)| rat(n.min(d - 1), d))
}

/// Valid log Fano surface pairs with up to six rays.
fn surface_pair() -> impl Strategy<Value = ToricPair> {
    prop::collection::btree_set((-3i64..=3, -3i64..=3), 3..=6)
        .prop_flat_map(|rays| {
            let n = rays.len();
            (Just(rays), prop::collection::vec(small_rational(), n))
        })
        .prop_filter_map("not a valid log Fano pair", |(rays, boundary)| {
            if rays.iter().any(|&(x, y)| gcd(x, y) != 1) {
                return None;
            }
            let rays = rays.into_iter().map(|(x, y)| NVector::new([x, y])).collect();
            ToricPairSpec::log_fano(rays, boundary).validate().ok()
        })
}

fn ideal_strategy() -> impl Strategy<Value = MonomialIdeal> {
    (1usize..=3).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(0u32..=4, n), 1..=4).prop_filter_map(
            "unit or zero ideal",
            move |gens| {
                let gens: Vec<Vec<u32>> = gens.into_iter().filter(|g| g.iter().any(|&e| e > 0)).collect();
                (!gens.is_empty()).then(|| MonomialIdeal::new(n, gens).unwrap())
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integral_of_ray_functional_is_volume_times_s(pair in surface_pair()) {
        let p = pair.moment_polytope();
        let vol = p.volume().unwrap();
        let inv = ray_invariants(&pair).unwrap();
        for (r, c) in inv.rays.iter().zip(pair.polarization()) {
            let lhs = p.integrate_linear(&AffineFunctional::from_ray(&r.ray, c)).unwrap();
            prop_assert_eq!(lhs, &vol * &r.expected_vanishing);
        }
    }

    #[test]
    fn triangulation_choice_does_not_matter(pair in surface_pair(), seed in any::<u64>()) {
        let p = pair.moment_polytope();
        let k = p.vertices().unwrap().len();
        let mut order: Vec<usize> = (0..k).collect();
        let rot = (seed as usize) % k;
        order.rotate_left(rot);
        if seed % 2 == 1 {
            order.reverse();
        }
        let simplices = p.triangulation_with_order(&order).unwrap();
        prop_assert_eq!(p.volume_from(&simplices).unwrap(), p.volume().unwrap());
        prop_assert_eq!(p.barycenter_from(&simplices).unwrap(), p.barycenter().unwrap());
    }

    #[test]
    fn affine_images_are_equivariant(pair in surface_pair(), s in 1i64..5, d in 1i64..5, a in -3i64..3, b in -3i64..3) {
        let p = pair.moment_polytope();
        let scale = rat(s, d);
        let shift = MPoint(vec![rat(a, d), rat(b, 2)]);
        let img = p.affine_image(&scale, &shift).unwrap();
        prop_assert_eq!(img.volume().unwrap(), p.volume().unwrap() * &scale * &scale);
        prop_assert_eq!(img.barycenter().unwrap(), p.barycenter().unwrap().scale(&scale).add(&shift));
    }

    #[test]
    fn scaling_the_polarization(pair in surface_pair(), k in 1i64..6, d in 1i64..4) {
        let k = rat(k, d);
        let scaled = pair.with_scaled_polarization(&k).unwrap();
        prop_assert_eq!(delta(&scaled).unwrap(), delta(&pair).unwrap() / &k);
        prop_assert_eq!(alpha(&scaled).unwrap(), alpha(&pair).unwrap() / &k);
    }

    #[test]
    fn alpha_delta_bounds(pair in surface_pair()) {
        let a = alpha(&pair).unwrap();
        let d = delta(&pair).unwrap();
        prop_assert!(a <= d);
        prop_assert!(d <= int(3) * &a);
    }

    #[test]
    fn ray_filtrations_satisfy_s_le_t_and_superadditivity(pair in surface_pair(), m1 in 1u64..4, m2 in 1u64..4) {
        for ray in 0..pair.num_rays() {
            let t = |m: u64| {
                let basis = SectionBasis::new(&pair, m).unwrap();
                let f = RationalWeights::from_ray(&pair, &basis, ray, &int(1)).unwrap();
                prop_assert!(f.s_m() <= f.t_m());
                Ok(f.t_m())
            };
            let (t1, t2, t12) = (t(m1)?, t(m2)?, t(m1 + m2)?);
            let avg = (int(m1 as i64) * t1 + int(m2 as i64) * t2) / int((m1 + m2) as i64);
            prop_assert!(t12 >= avg);
        }
    }

    #[test]
    fn rounding_identities(m in 1u64..15, w in prop::collection::vec((0i64..80, 1i64..17), 1..30)) {
        let f = RationalWeights::new(m, w.into_iter().map(|(n, d)| rat(n, d)).collect()).unwrap();
        let r = f.round_to_n().unwrap();
        let mi = int(m as i64);
        prop_assert_eq!(r.t_m(), Rational::from_integer(floor_int(&(&mi * f.t_m()))) / &mi);
        prop_assert!(r.s_m() <= f.s_m());
        prop_assert!(f.s_m() - rat(1, m as i64) <= r.s_m());
    }

    #[test]
    fn lct_is_homogeneous(a in ideal_strategy(), k in 1u32..=5) {
        let b = vec![int(0); a.nvars()];
        let ak = a.power(k, &mut Budget::unlimited()).unwrap();
        prop_assert_eq!(
            lct_monomial(&ak, &b).unwrap(),
            lct_monomial(&a, &b).unwrap().scale(&rat(1, k as i64))
        );
    }

    #[test]
    fn ideal_inclusion_matches_generators(a in ideal_strategy(), b in ideal_strategy()) {
        prop_assume!(a.nvars() == b.nvars());
        let s = a.sum(&b);
        prop_assert!(a.is_subset_of(&s) && b.is_subset_of(&s));
        let p = a.product(&b, &mut Budget::unlimited()).unwrap();
        prop_assert!(p.is_subset_of(&a) && p.is_subset_of(&b));
        prop_assert_eq!(a.is_subset_of(&b) && b.is_subset_of(&a), a == b);
    }

    #[test]
    fn certificates_are_sound(ideals in prop::collection::vec(ideal_strategy(), 1..=3)) {
        let n = ideals[0].nvars();
        prop_assume!(ideals.iter().all(|i| i.nvars() == n));
        let search = StabilizationSearch { p_max: 3, max_n: 6 };
        let mut budget = Budget::new(2_000_000);
        if let Ok(seq) = gord_stabilize(&ideals, search, &mut budget) {
            let cert = seq.certificate().unwrap();
            let base = seq.term(cert.n).unwrap().clone();
            for p in 1..=cert.p_max {
                let pw = base.power(p as u32, &mut Budget::unlimited()).unwrap();
                prop_assert_eq!(seq.term(cert.n * p).unwrap(), &pw);
            }
        }
    }

    #[test]
    fn documents_round_trip(pair in surface_pair()) {
        let spec = pair.spec().clone();
        for format in [config::Format::Toml, config::Format::Json] {
            let text = config::emit_spec(&spec, format).unwrap();
            prop_assert_eq!(config::parse_spec(&text, format).unwrap(), spec.clone());
        }
    }
}

#[test]
fn plane_ehrhart_count() {
    let p2 = corpus::p2().validate().unwrap();
    for m in 1..=10i64 {
        let n = SectionBasis::new(&p2, m as u64).unwrap().len() as i64;
        assert_eq!(n, (3 * m + 1) * (3 * m + 2) / 2, "m = {m}");
    }
}
