//! Brute-force reference implementations for small grids.
//!
//! Nothing here shares code with the fast paths beyond the grid layout: sums
//! are formed in exact rational arithmetic, rectangle families are enumerated
//! from their membership rules, and every supremum is an exhaustive scan.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::grid::{ExponentConfig, Factor, FactorGrid, FamilyMode, Field, Grid};

/// A cube as (origin per axis, side).
pub type BruteCube = (Vec<usize>, usize);

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite value")
}

/// Correctly rounded sum through a common power-of-two denominator.
pub fn rational_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let vals: Vec<f64> = values.into_iter().collect();
    let parts: Vec<(BigInt, i32)> = vals
        .iter()
        .filter(|v| **v != 0.0)
        .map(|&v| {
            let r = exact(v);
            let den = r.denom().bits() as i32 - 1;
            (r.numer().clone(), den)
        })
        .collect();
    let Some(scale) = parts.iter().map(|p| p.1).max() else {
        return 0.0;
    };
    let mut total = BigInt::zero();
    for (num, den) in parts {
        total += num << (scale - den) as usize;
    }
    BigRational::new(total, BigInt::from(1) << scale as usize)
        .to_f64()
        .expect("representable sum")
}

fn in_family(mode: FamilyMode, origin: &[usize], side: usize) -> bool {
    match mode {
        FamilyMode::All => true,
        FamilyMode::Dyadic => side.is_power_of_two() && origin.iter().all(|o| o % side == 0),
        FamilyMode::DyadicShifted => {
            let step = (side / 2).max(1);
            side.is_power_of_two() && origin.iter().all(|o| o % step == 0)
        }
    }
}

/// Every cube of a factor grid belonging to `mode`, by exhaustive candidate filtering.
pub fn brute_cubes(grid: &FactorGrid, mode: FamilyMode) -> Vec<BruteCube> {
    let n = grid.cells_per_axis();
    let d = grid.dim();
    let mut out = Vec::new();
    for side in 1..=n {
        let per_axis = n - side + 1;
        for k in 0..per_axis.pow(d as u32) {
            let mut origin = vec![0; d];
            let mut rest = k;
            for o in origin.iter_mut().rev() {
                *o = rest % per_axis;
                rest /= per_axis;
            }
            if in_family(mode, &origin, side) {
                out.push((origin, side));
            }
        }
    }
    out
}

fn cube_holds(grid: &FactorGrid, cube: &BruteCube, cell: usize) -> bool {
    let idx = grid.unflatten(cell);
    cube.0.iter().enumerate().all(|(a, &o)| idx[a] >= o && idx[a] < o + cube.1)
}

fn cube_cells(grid: &FactorGrid, cube: &BruteCube) -> Vec<usize> {
    (0..grid.cell_count()).filter(|&c| cube_holds(grid, cube, c)).collect()
}

fn average(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    rational_sum(v.iter().copied()) / v.len() as f64
}

/// Averages over every product rectangle, in (first cube, second cube) order.
fn all_rect_averages(f: &Field, xs: &[Vec<usize>], ys: &[Vec<usize>]) -> Vec<f64> {
    let g = f.grid();
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for cx in xs {
        for cy in ys {
            out.push(average(cx.iter().flat_map(|&i| cy.iter().map(move |&j| f.values()[g.index(i, j)]))));
        }
    }
    out
}

/// Strong maximal function by scanning every rectangle for every cell.
pub fn brute_strong_maximal(f: &Field, mode: FamilyMode) -> Vec<f64> {
    let g = f.grid();
    let xq = brute_cubes(g.first(), mode);
    let yq = brute_cubes(g.second(), mode);
    let xs: Vec<Vec<usize>> = xq.iter().map(|c| cube_cells(g.first(), c)).collect();
    let ys: Vec<Vec<usize>> = yq.iter().map(|c| cube_cells(g.second(), c)).collect();
    let avg = all_rect_averages(f, &xs, &ys);
    let mut out = vec![0.0; g.cell_count()];
    for (cell, o) in out.iter_mut().enumerate() {
        let (i, j) = g.split_index(cell);
        let mut best = f64::NEG_INFINITY;
        for (a, cx) in xq.iter().enumerate() {
            for (b, cy) in yq.iter().enumerate() {
                if cube_holds(g.first(), cx, i) && cube_holds(g.second(), cy, j) {
                    best = best.max(avg[a * yq.len() + b]);
                }
            }
        }
        *o = best;
    }
    out
}

/// One-factor maximal function with the other coordinate frozen.
pub fn brute_partial_maximal(f: &Field, mode: FamilyMode, factor: Factor) -> Vec<f64> {
    let g = f.grid();
    let fg = g.factor(factor);
    let cubes = brute_cubes(fg, mode);
    let mut out = vec![0.0; g.cell_count()];
    for (cell, o) in out.iter_mut().enumerate() {
        let (i, j) = g.split_index(cell);
        let (own, frozen) = match factor {
            Factor::First => (i, j),
            Factor::Second => (j, i),
        };
        let mut best = f64::NEG_INFINITY;
        for c in cubes.iter().filter(|c| cube_holds(fg, c, own)) {
            let vals = cube_cells(fg, c).into_iter().map(|k| match factor {
                Factor::First => f.values()[g.index(k, frozen)],
                Factor::Second => f.values()[g.index(frozen, k)],
            });
            best = best.max(average(vals));
        }
        *o = best;
    }
    out
}

/// Slice norms and Gf assembled from the brute-force partial maximal functions.
pub fn brute_g_transform(f: &Field, sigma: &Field, p: f64, mode: FamilyMode) -> Vec<f64> {
    let g = f.grid();
    let m1 = brute_partial_maximal(f, mode, Factor::First);
    let m2 = brute_partial_maximal(f, mode, Factor::Second);
    let (c1, c2) = (g.first().cell_count(), g.second().cell_count());
    let s = sigma.values();
    let norm1: Vec<f64> = (0..c1)
        .map(|i| {
            let terms = (0..c2).map(|j| (m1[g.index(i, j)] * s[g.index(i, j)]).powf(p));
            (rational_sum(terms) * g.second().cell_volume()).powf(1.0 / p)
        })
        .collect();
    let norm2: Vec<f64> = (0..c2)
        .map(|j| {
            let terms = (0..c1).map(|i| (m2[g.index(i, j)] * s[g.index(i, j)]).powf(p));
            (rational_sum(terms) * g.first().cell_volume()).powf(1.0 / p)
        })
        .collect();
    let mut out = Vec::with_capacity(c1 * c2);
    for a in &norm1 {
        out.extend(norm2.iter().map(|b| a * b));
    }
    out
}

/// Largest avg(w)·avg(w^{−1/(p−1)})^{p−1} over every rectangle of `mode`, for p > 1.
pub fn brute_a_p_cross(w: &Field, p: f64, mode: FamilyMode) -> f64 {
    let g = w.grid();
    let xs: Vec<Vec<usize>> = brute_cubes(g.first(), mode).iter().map(|c| cube_cells(g.first(), c)).collect();
    let ys: Vec<Vec<usize>> = brute_cubes(g.second(), mode).iter().map(|c| cube_cells(g.second(), c)).collect();
    let dual = w.map(|v| v.powf(-1.0 / (p - 1.0))).unwrap();
    let a = all_rect_averages(w, &xs, &ys);
    let b = all_rect_averages(&dual, &xs, &ys);
    a.iter().zip(&b).map(|(x, y)| x * y.powf(p - 1.0)).fold(f64::NEG_INFINITY, f64::max)
}

/// Largest (avg ω^q)^{1/q}(avg d)^{1/p′} over every rectangle, for a given dual field d.
pub fn brute_averaged_characteristic(omega_q: &Field, dual: &Field, q: f64, dp: f64, mode: FamilyMode) -> f64 {
    let g = omega_q.grid();
    let xs: Vec<Vec<usize>> = brute_cubes(g.first(), mode).iter().map(|c| cube_cells(g.first(), c)).collect();
    let ys: Vec<Vec<usize>> = brute_cubes(g.second(), mode).iter().map(|c| cube_cells(g.second(), c)).collect();
    let a = all_rect_averages(omega_q, &xs, &ys);
    let b = all_rect_averages(dual, &xs, &ys);
    a.iter()
        .zip(&b)
        .map(|(x, y)| x.powf(1.0 / q) * y.powf(1.0 / dp))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Fraction of cell k (along one axis) covered by [2·lo, 2·hi) in half-cell units.
fn coverage(k: usize, lo2: i64, hi2: i64) -> BigRational {
    let (a, b) = (2 * k as i64, 2 * k as i64 + 2);
    let len = (hi2.min(b) - lo2.max(a)).max(0);
    BigRational::new(BigInt::from(len), BigInt::from(2))
}

/// Smallest log₂(∫_{2Q}w/∫_Q w)/d over cubes whose centered double stays inside.
pub fn brute_reverse_doubling(w: &Field, mode: FamilyMode) -> Option<f64> {
    let g = w.grid();
    let mut best: Option<f64> = None;
    for factor in [Factor::First, Factor::Second] {
        let fg = g.factor(factor);
        let other = g.factor(factor.other()).cell_count();
        let n = fg.cells_per_axis() as i64;
        let d = fg.dim();
        for (origin, side) in brute_cubes(fg, mode) {
            let s = side as i64;
            // 2Q spans [o − s/2, o + 3s/2) on every axis; doubled to stay integral
            let bounds: Vec<(i64, i64)> = origin.iter().map(|&o| (2 * o as i64 - s, 2 * o as i64 + 3 * s)).collect();
            if bounds.iter().any(|&(lo, hi)| lo < 0 || hi > 2 * n) {
                continue;
            }
            for slice in 0..other {
                let mut inner = BigRational::zero();
                let mut outer = BigRational::zero();
                for k in 0..fg.cell_count() {
                    let v = match factor {
                        Factor::First => w.values()[g.index(k, slice)],
                        Factor::Second => w.values()[g.index(slice, k)],
                    };
                    let idx = fg.unflatten(k);
                    let mut cov = BigRational::from_integer(BigInt::from(1));
                    for a in 0..d {
                        cov *= coverage(idx[a], bounds[a].0, bounds[a].1);
                    }
                    let ev = exact(v);
                    outer += &cov * &ev;
                    if (0..d).all(|a| idx[a] >= origin[a] && idx[a] < origin[a] + side) {
                        inner += ev;
                    }
                }
                if inner.is_zero() {
                    continue;
                }
                let ratio = (outer / inner).to_f64().unwrap();
                let eps = ratio.log2() / d as f64;
                best = Some(best.map_or(eps, |b: f64| b.min(eps)));
            }
        }
    }
    best
}

/// Closed-form I_{αβ} of the indicator of [a₁,b₁]×[a₂,b₂] at (x, y), for n = m = 1.
pub fn indicator_fractional_integral(config: &ExponentConfig, x: f64, y: f64, bx: [f64; 2], by: [f64; 2]) -> f64 {
    let one = |t: f64, [lo, hi]: [f64; 2], a: f64| {
        let f = |u: f64| (u - t).signum() * (u - t).abs().powf(a) / a;
        f(hi) - f(lo)
    };
    one(x, bx, config.alpha()) * one(y, by, config.beta())
}

/// Bundled fixture grids for the oracle suite: every grid has at most 16 cells per axis.
pub fn fixture_grids() -> Vec<Grid> {
    [
        ([1, 1], [1.0, 1.0], [4, 4]),
        ([1, 1], [2.0, 1.0], [8, 4]),
        ([1, 1], [1.0, 1.0], [8, 8]),
        ([1, 1], [2.0, 2.0], [16, 16]),
        ([1, 2], [1.0, 1.0], [4, 4]),
        ([2, 1], [1.0, 1.0], [4, 2]),
    ]
    .into_iter()
    .map(|(d, l, c)| Grid::new(d, l, c).expect("fixture grid"))
    .collect()
}

/// Deterministic nonnegative fixture fields on a grid: a spike, a smooth bump,
/// a field with heavy cancellation risk and one with zeros.
pub fn fixture_fields(grid: &Grid) -> Vec<Field> {
    let spike = {
        let mut v = vec![0.0; grid.cell_count()];
        v[grid.cell_count() / 3] = 1.0;
        Field::from_values(grid, v).unwrap()
    };
    let smooth = Field::sample(grid, |x, y| (-(x[0] - 0.3).powi(2) - x[1] * x[1] - y[0] * y[0] - y[1] * y[1]).exp()).unwrap();
    let wide = Field::from_values(
        grid,
        (0..grid.cell_count())
            .map(|k| {
                let e = ((k * 7919) % 61) as i32 - 30;
                (1.0 + ((k * 104729) % 1000) as f64 / 997.0) * 10f64.powi(e / 3)
            })
            .collect(),
    )
    .unwrap();
    let sparse = Field::from_values(
        grid,
        (0..grid.cell_count()).map(|k| if k % 5 == 0 { 0.1 * k as f64 } else { 0.0 }).collect(),
    )
    .unwrap();
    vec![spike, smooth, wide, sparse]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_sum;
    use crate::grid::make_grid;
    use proptest::prelude::*;

    #[test]
    fn brute_family_sizes() {
        let axis = FactorGrid::new(1, 1.0, 4).unwrap();
        assert_eq!(brute_cubes(&axis, FamilyMode::Dyadic).len(), 7);
        assert_eq!(brute_cubes(&axis, FamilyMode::All).len(), 10);
    }

    #[test]
    fn brute_examples() {
        let g = make_grid([1, 1], [2.0, 2.0], [4, 4]).unwrap();
        let mut v = vec![0.0; 16];
        v[g.index(0, 1)] = 1.0;
        let f = Field::from_values(&g, v).unwrap();
        let m = brute_strong_maximal(&f, FamilyMode::All);
        assert_eq!(m[g.index(0, 1)], 1.0);
        assert_eq!(m[g.index(3, 1)], 0.25);
        let row = Field::from_values(&g, [0.0, 0.0, 4.0, 0.0].iter().flat_map(|&a| [a; 4]).collect()).unwrap();
        assert_eq!(brute_partial_maximal(&row, FamilyMode::All, Factor::First)[g.index(0, 2)], 4.0 / 3.0);
    }

    #[test]
    fn closed_form_indicator() {
        let c = ExponentConfig::new(1, 1, 2.0, 4.0, 0.5, 0.5).unwrap();
        let v = indicator_fractional_integral(&c, 2.0, 2.0, [0.0, 1.0], [0.0, 1.0]);
        assert!((v - 4.0 * (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn rational_sum_is_correctly_rounded(v in prop::collection::vec(-1e6f64..1e6, 0..40)) {
            prop_assert_eq!(rational_sum(v.iter().copied()), exact_sum(v.iter().copied()));
        }
    }
}
