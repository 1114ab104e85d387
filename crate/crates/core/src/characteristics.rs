//! Rectangle-supremum characteristics of a weight pair and their pointwise consequences.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Factor, Field, Rect, RectFamily, RectSums};
use crate::operators::rectangle_averages;
use crate::weights::WeightPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CharacteristicKind {
    AAlphaBetaPq,
    APq,
    AMPq,
    APCross,
}

impl CharacteristicKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CharacteristicKind::AAlphaBetaPq => "A_alphabeta_pq",
            CharacteristicKind::APq => "A_pq",
            CharacteristicKind::AMPq => "A_M_pq",
            CharacteristicKind::APCross => "A_p_cross",
        }
    }
}

impl fmt::Display for CharacteristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacteristicResult {
    pub kind: CharacteristicKind,
    pub value: f64,
    pub maximizer: Rect,
}

/// Largest `f(k)` for k < len, ties going to the smallest k.
pub fn best_over<F>(len: usize, f: F) -> (f64, usize)
where
    F: Fn(usize) -> f64 + Sync,
{
    (0..len)
        .into_par_iter()
        .map(|k| (f(k), k))
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("empty rectangle family")
}

fn result(kind: CharacteristicKind, family: &RectFamily, (value, index): (f64, usize)) -> CharacteristicResult {
    CharacteristicResult {
        kind,
        value,
        maximizer: family.rect(index),
    }
}

/// max |Q|^{α/n−1}|P|^{β/m−1} (∫ω^q)^{1/q} (∫σ^{−p′})^{1/p′}.
pub fn a_alphabeta_pq(pair: &WeightPair, family: &RectFamily) -> Result<CharacteristicResult> {
    let grid = pair.grid();
    if family.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let c = pair.config();
    let (q, dp) = (c.q(), c.dual_p());
    let ex = c.alpha() / c.n() as f64 - 1.0;
    let ey = c.beta() / c.m() as f64 - 1.0;
    let wq = RectSums::new(pair.omega_q());
    let sd = RectSums::new(pair.dual());
    let (g1, g2) = (grid.first(), grid.second());
    let best = best_over(family.len(), |k| {
        let r = family.rect(k);
        let (vq, vp) = (r.x.volume(g1), r.y.volume(g2));
        vq.powf(ex) * vp.powf(ey) * wq.integral(&r).powf(1.0 / q) * sd.integral(&r).powf(1.0 / dp)
    });
    Ok(result(CharacteristicKind::AAlphaBetaPq, family, best))
}

fn averaged(pair: &WeightPair, family: &RectFamily, dual: &Field, kind: CharacteristicKind) -> Result<CharacteristicResult> {
    if family.grid() != pair.grid() {
        return Err(Error::GridMismatch);
    }
    let c = pair.config();
    let (q, dp) = (c.q(), c.dual_p());
    let aw = rectangle_averages(&RectSums::new(pair.omega_q()), family);
    let ad = rectangle_averages(&RectSums::new(dual), family);
    let best = best_over(aw.len(), |k| aw[k].powf(1.0 / q) * ad[k].powf(1.0 / dp));
    Ok(result(kind, family, best))
}

/// max (avg ω^q)^{1/q} (avg σ^{−p′})^{1/p′}.
pub fn a_pq(pair: &WeightPair, family: &RectFamily) -> Result<CharacteristicResult> {
    averaged(pair, family, pair.dual(), CharacteristicKind::APq)
}

/// max (avg ω^q)^{1/q} (avg M(σ^{−p′}))^{1/p′}, with M over `maximal_family`.
pub fn a_m_pq(pair: &WeightPair, family: &RectFamily, maximal_family: &RectFamily) -> Result<CharacteristicResult> {
    let m = pair.maximal_dual(maximal_family)?;
    averaged(pair, family, &m, CharacteristicKind::AMPq)
}

fn require_single_cells(family: &RectFamily) -> Result<()> {
    if family.contains_single_cells() {
        Ok(())
    } else {
        Err(Error::MissingSingleCells)
    }
}

/// ω·(M(σ^{−p′}))^{1/p′} / A^M at every cell; at most 1 when single cells belong to both families.
pub fn crucial_pointwise(pair: &WeightPair, a_m: &CharacteristicResult, maximal_family: &RectFamily) -> Result<Field> {
    require_single_cells(maximal_family)?;
    let m = pair.maximal_dual(maximal_family)?;
    let dp = pair.config().dual_p();
    pair.omega()
        .zip_map(&m, |w, md| w * md.powf(1.0 / dp) / a_m.value)
}

/// ω / (A^M σ) at every cell.
pub fn weights_compare(pair: &WeightPair, a_m: &CharacteristicResult) -> Result<Field> {
    pair.omega().zip_map(pair.sigma(), |w, s| w / (a_m.value * s))
}

/// The maximizer's extent as `(x_lo, x_hi, y_lo, y_hi)` along the first axis of each factor.
pub fn maximizer_bounds(r: &CharacteristicResult) -> (usize, usize, usize, usize) {
    let (xl, xh) = r.maximizer.cube(Factor::First).range(0);
    let (yl, yh) = r.maximizer.cube(Factor::Second).range(0);
    (xl, xh, yl, yh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, ExponentConfig, FamilyMode, Grid};
    use crate::weights::{counterexample_omega, counterexample_sigma, power_weight, WeightFn};

    fn grid() -> Grid {
        make_grid([1, 1], [2.0, 2.0], [16, 16]).unwrap()
    }

    #[test]
    fn unit_weights() {
        let g = grid();
        let c = ExponentConfig::balanced(1, 1, 2.0, 4.0).unwrap();
        let pair = WeightPair::from_fns(&g, &WeightFn::Constant(1.0), &WeightFn::Constant(1.0), c).unwrap();
        let fam = RectFamily::new(&g, FamilyMode::DyadicShifted).unwrap();
        let ab = a_alphabeta_pq(&pair, &fam).unwrap();
        assert!((ab.value - 1.0).abs() < 1e-14);
        assert_eq!(a_pq(&pair, &fam).unwrap().value, 1.0);
        let am = a_m_pq(&pair, &fam, &fam).unwrap();
        assert_eq!(am.value, 1.0);
        assert!(crucial_pointwise(&pair, &am, &fam).unwrap().values().iter().all(|&v| v == 1.0));
        assert!(weights_compare(&pair, &am).unwrap().values().iter().all(|&v| v == 1.0));
        let two = WeightPair::from_fns(&g, &WeightFn::Constant(2.0), &WeightFn::Constant(1.0), c).unwrap();
        assert_eq!(a_pq(&two, &fam).unwrap().value, 2.0);
    }

    #[test]
    fn unbalanced_unit_weights_peak_at_an_extreme_size() {
        let g = grid();
        let c = ExponentConfig::new(1, 1, 2.0, 4.0, 0.5, 0.125).unwrap();
        let pair = WeightPair::from_fns(&g, &WeightFn::Constant(1.0), &WeightFn::Constant(1.0), c).unwrap();
        let fam = RectFamily::new(&g, FamilyMode::Dyadic).unwrap();
        let r = a_alphabeta_pq(&pair, &fam).unwrap();
        // |Q|^{1/4} grows, |P|^{-1/8} shrinks: full first factor, single cell in the second
        assert_eq!(r.maximizer.x.side(), 16);
        assert_eq!(r.maximizer.y.side(), 1);
        let expected = 4f64.powf(0.25) * 0.25f64.powf(-0.125);
        assert!((r.value - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn crucial_pointwise_needs_single_cells() {
        let g = make_grid([1, 1], [1.0, 1.0], [4, 4]).unwrap();
        let c = ExponentConfig::balanced(1, 1, 2.0, 4.0).unwrap();
        let pair = WeightPair::from_fns(&g, &WeightFn::Constant(1.0), &power_weight(0.3, 0.2), c).unwrap();
        let fam = RectFamily::new(&g, FamilyMode::Dyadic).unwrap();
        let am = a_m_pq(&pair, &fam, &fam).unwrap();
        let x: Vec<_> = fam.cubes(Factor::First).iter().copied().filter(|q| q.side() > 1).collect();
        let y = fam.cubes(Factor::Second).to_vec();
        let coarse = RectFamily::from_cubes(&g, FamilyMode::Dyadic, x, y);
        assert!(matches!(crucial_pointwise(&pair, &am, &coarse), Err(Error::MissingSingleCells)));
    }

    #[test]
    fn counterexample_pair_relations() {
        let g = grid();
        let c = ExponentConfig::balanced(1, 1, 2.0, 4.0).unwrap();
        let pair = WeightPair::from_fns(&g, &counterexample_omega(&c), &counterexample_sigma(&c), c).unwrap();
        let fam = RectFamily::new(&g, FamilyMode::DyadicShifted).unwrap();
        let ab = a_alphabeta_pq(&pair, &fam).unwrap();
        let apq = a_pq(&pair, &fam).unwrap();
        let am = a_m_pq(&pair, &fam, &fam).unwrap();
        assert!((ab.value - apq.value).abs() <= 1e-12 * apq.value);
        assert!(apq.value <= am.value);
        assert!(crucial_pointwise(&pair, &am, &fam).unwrap().max() <= 1.0 + 1e-12);
        assert!(weights_compare(&pair, &am).unwrap().max() <= 1.0 + 1e-12);
        let half = WeightPair::new(pair.sigma().scale(0.5).unwrap(), pair.sigma().clone(), c).unwrap();
        let am_half = a_m_pq(&half, &fam, &fam).unwrap();
        let wc = weights_compare(&half, &am_half).unwrap();
        assert!(wc.values().iter().all(|&v| (v - 0.5 / am_half.value).abs() < 1e-15));
    }
}
