//! Property tests for the structural invariants of the coefficient algebra
//! and the uncertainty products.

use num_complex::Complex64;
use proptest::prelude::*;

use uptorus::lattice::{CoeffMap, Direction, LatticeIndex};
use uptorus::uncertainty::{up_directional, up_gg, UpStatus};

const DIM: usize = 2;

fn arb_entry() -> impl Strategy<Value = (Vec<i64>, f64, f64)> {
    (
        prop::collection::vec(-6i64..=6, DIM),
        -2.0f64..2.0,
        -2.0f64..2.0,
    )
}

fn arb_map() -> impl Strategy<Value = CoeffMap> {
    prop::collection::vec(arb_entry(), 1..24).prop_map(|entries| {
        CoeffMap::from_entries(
            DIM,
            entries
                .into_iter()
                .map(|(k, re, im)| (LatticeIndex::new(k), Complex64::new(re, im))),
        )
        .unwrap()
    })
}

fn arb_direction() -> impl Strategy<Value = Direction> {
    prop::collection::vec(-3i64..=3, DIM)
        .prop_filter("nonzero", |v| v.iter().any(|&x| x != 0))
        .prop_map(|v| Direction::new(v).unwrap())
}

proptest! {
    #[test]
    fn parseval_consistency(f in arb_map()) {
        prop_assume!(!f.is_empty());
        let ip = f.inner(&f).unwrap();
        prop_assert!(ip.im.abs() <= 1e-15 * ip.re.max(1.0));
        prop_assert!(ip.re >= 0.0);
        prop_assert!((ip.re - f.squared_norm()).abs() <= 1e-12 * ip.re.max(1.0));
    }

    #[test]
    fn inner_conjugate_symmetry(f in arb_map(), g in arb_map()) {
        let a = f.inner(&g).unwrap();
        let b = g.inner(&f).unwrap();
        let scale = a.norm().max(1.0);
        prop_assert!((a - b.conj()).norm() <= 1e-12 * scale);
    }

    #[test]
    fn modulation_preserves_norm(f in arb_map(), l in arb_direction()) {
        prop_assume!(!f.is_empty());
        let g = f.modulate(&l).unwrap();
        let a = f.squared_norm();
        let b = g.squared_norm();
        prop_assert!((a - b).abs() <= 1e-14 * a.max(1.0));
    }

    #[test]
    fn commutator_identity_entrywise(f in arb_map(), l in arb_direction()) {
        prop_assume!(!f.is_empty());
        let ab = f.derivative_along(&l).unwrap().modulate(&l).unwrap();
        let ba = f.modulate(&l).unwrap().derivative_along(&l).unwrap();
        let af = f.modulate(&l).unwrap();
        let lsq = l.norm_sq() as f64;
        for (k, _) in af.iter() {
            let lhs = ab.get(&k.coords) - ba.get(&k.coords);
            let rhs = lsq * af.get(&k.coords);
            // machine precision: the two routes multiply by <L,k> and
            // <L,k-L> separately before subtracting
            prop_assert!(
                (lhs - rhs).norm() <= 1e-14 * rhs.norm().max(1.0),
                "entry {:?}: {lhs} vs {rhs}", k
            );
        }
    }

    #[test]
    fn up_lower_bound(f in arb_map(), l in arb_direction()) {
        prop_assume!(!f.is_empty());
        let rep = up_directional(&f, &l).unwrap();
        if rep.status == UpStatus::Finite {
            prop_assert!(rep.up.unwrap() >= 0.25 - 1e-12, "up = {:?}", rep.up);
        }
        let rep = up_gg(&f).unwrap();
        if rep.status == UpStatus::Finite {
            prop_assert!(rep.up.unwrap() >= 0.25 - 1e-12, "gg up = {:?}", rep.up);
        }
    }

    #[test]
    fn shift_modulate_invariance(
        f in arb_map(),
        l in arb_direction(),
        shift in prop::collection::vec(-5i64..=5, DIM),
        x0 in prop::collection::vec(-1.0f64..1.0, DIM),
        a in prop_oneof![0.1f64..3.0, -3.0f64..-0.1],
    ) {
        prop_assume!(!f.is_empty());
        let before = up_directional(&f, &l).unwrap();
        prop_assume!(before.status == UpStatus::Finite);
        let g = f.shift_modulate(&LatticeIndex::new(shift), &x0, a).unwrap();
        let after = up_directional(&g, &l).unwrap();
        let (u, v) = (before.up.unwrap(), after.up.unwrap());
        prop_assert!((u - v).abs() <= 1e-10 * u.max(1.0), "{u} vs {v}");
    }

    #[test]
    fn json_round_trip(f in arb_map()) {
        prop_assume!(!f.is_empty());
        let s = f.to_json_string();
        let g = CoeffMap::from_json_str(&s).unwrap();
        prop_assert!(g == f);
    }

    #[test]
    fn discrete_signal_round_trip(
        data in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 12)
    ) {
        let shape = [3usize, 4];
        let data: Vec<Complex64> = data.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        let f = CoeffMap::from_discrete_signal(&shape, &data).unwrap();
        prop_assert_eq!(f.to_discrete_signal(&shape).unwrap(), data);
    }
}
