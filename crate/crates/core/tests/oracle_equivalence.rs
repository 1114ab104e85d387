use proptest::prelude::*;

use bfl::characteristics::a_pq;
use bfl::grid::{make_grid, ExponentConfig, Factor, FamilyMode, Field, Grid, RectFamily};
use bfl::operators::{g_transform, maximal_1, maximal_2, strong_maximal};
use bfl::oracle::{
    brute_averaged_characteristic, brute_g_transform, brute_partial_maximal, brute_reverse_doubling, brute_strong_maximal,
};
use bfl::weights::{reverse_doubling_epsilon, WeightPair};

fn mode() -> impl Strategy<Value = FamilyMode> {
    prop_oneof![
        Just(FamilyMode::Dyadic),
        Just(FamilyMode::DyadicShifted),
        Just(FamilyMode::All)
    ]
}

/// A small grid with 1 or 2 dimensions per factor and a field of mixed scales with zeros.
fn grid_and_values() -> impl Strategy<Value = (Grid, Vec<f64>)> {
    (1usize..=2, 1usize..=2, 0u32..=2, 0u32..=2)
        .prop_flat_map(|(n, m, a, b)| {
            let c1 = if n == 2 { 1 << (a.min(1) + 1) } else { 1 << (a + 1) };
            let c2 = if m == 2 { 1 << (b.min(1) + 1) } else { 1 << (b + 1) };
            let g = make_grid([n, m], [1.0, 2.0], [c1, c2]).unwrap();
            let len = g.cell_count();
            let value = prop_oneof![Just(0.0), 1e-6f64..1e6, 0.0f64..1.0];
            (Just(g), prop::collection::vec(value, len))
        })
}

fn positive(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| if v > 0.0 { v } else { 0.25 }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn maximal_operators_are_bit_exact((g, v) in grid_and_values(), mode in mode()) {
        let f = Field::from_values(&g, v).unwrap();
        let fam = RectFamily::new(&g, mode).unwrap();
        let strong = strong_maximal(&f, &fam).unwrap();
        let m1 = maximal_1(&f, &fam).unwrap();
        let m2 = maximal_2(&f, &fam).unwrap();
        let bs = brute_strong_maximal(&f, mode);
        let b1 = brute_partial_maximal(&f, mode, Factor::First);
        let b2 = brute_partial_maximal(&f, mode, Factor::Second);
        prop_assert_eq!(strong.values(), &bs[..]);
        prop_assert_eq!(m1.values(), &b1[..]);
        prop_assert_eq!(m2.values(), &b2[..]);
    }

    #[test]
    fn g_transform_matches((g, v) in grid_and_values(), mode in mode(), p in 1.2f64..4.0) {
        let f = Field::from_values(&g, v.clone()).unwrap();
        let sigma = Field::from_values(&g, positive(&v).into_iter().rev().collect()).unwrap();
        let fam = RectFamily::new(&g, mode).unwrap();
        let fast = g_transform(&f, &sigma, p, &fam).unwrap();
        let slow = brute_g_transform(&f, &sigma, p, mode);
        for (a, b) in fast.field.values().iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(b.abs()));
        }
        prop_assert!(fast.fubini_residual(p).unwrap() <= 1e-10);
    }

    #[test]
    fn a_pq_matches((g, v) in grid_and_values(), mode in mode()) {
        let [n, m] = g.dims();
        let c = ExponentConfig::balanced(n, m, 2.0, 4.0).unwrap();
        let w = positive(&v);
        let omega = Field::from_values(&g, w.clone()).unwrap();
        let sigma = Field::from_values(&g, w.into_iter().rev().collect()).unwrap();
        let pair = WeightPair::new(omega, sigma, c).unwrap();
        let fam = RectFamily::new(&g, mode).unwrap();
        let fast = a_pq(&pair, &fam).unwrap().value;
        let slow = brute_averaged_characteristic(pair.omega_q(), pair.dual(), c.q(), c.dual_p(), mode);
        prop_assert!((fast - slow).abs() <= 1e-13 * slow);
    }

    #[test]
    fn reverse_doubling_matches((g, v) in grid_and_values(), mode in mode()) {
        let w = Field::from_values(&g, positive(&v)).unwrap();
        let fam = RectFamily::new(&g, mode).unwrap();
        let fast = reverse_doubling_epsilon(&w, &fam).ok().map(|d| d.epsilon);
        match (fast, brute_reverse_doubling(&w, mode)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
            (None, None) => {}
            (a, b) => prop_assert!(false, "fast {:?} vs brute {:?}", a, b),
        }
    }
}
