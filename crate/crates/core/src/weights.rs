//! Weight constructors, weight pairs, the A_p×A_p characteristic and reverse doubling.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rayon::prelude::*;

use crate::characteristics::{best_over, CharacteristicKind, CharacteristicResult};
use crate::error::{Error, Result};
use crate::grid::{Coords, Cube, ExponentConfig, Factor, FamilyMode, Field, Grid, Rect, RectFamily, RectSums};
use crate::operators::{rectangle_averages, strong_maximal};

fn norm(x: &Coords) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// A pointwise weight w(x, y) on ℝⁿ × ℝᵐ.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightFn {
    Constant(f64),
    /// |x|^a |y|^b.
    Power { a: f64, b: f64 },
    /// (1+|x|)^a (1+|y|)^b.
    Bracket { a: f64, b: f64 },
    /// 2^{amp · sin(f₁|x| + φ₁) · cos(f₂|y| + φ₂)}, bounded in [2^{−amp}, 2^{amp}].
    Perturbation { amp: f64, freq: [f64; 2], phase: [f64; 2] },
    Product(Box<WeightFn>, Box<WeightFn>),
}

impl WeightFn {
    pub fn eval(&self, x: &Coords, y: &Coords) -> f64 {
        match self {
            WeightFn::Constant(c) => *c,
            WeightFn::Power { a, b } => norm(x).powf(*a) * norm(y).powf(*b),
            WeightFn::Bracket { a, b } => (1.0 + norm(x)).powf(*a) * (1.0 + norm(y)).powf(*b),
            WeightFn::Perturbation { amp, freq, phase } => {
                let s = (freq[0] * norm(x) + phase[0]).sin() * (freq[1] * norm(y) + phase[1]).cos();
                (amp * s).exp2()
            }
            WeightFn::Product(u, v) => u.eval(x, y) * v.eval(x, y),
        }
    }

    pub fn times(self, other: WeightFn) -> WeightFn {
        WeightFn::Product(Box::new(self), Box::new(other))
    }

    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        Field::sample(grid, |x, y| self.eval(x, y))
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFn::Constant(c) => write!(f, "{c}"),
            WeightFn::Power { a, b } => write!(f, "|x|^{a}|y|^{b}"),
            WeightFn::Bracket { a, b } => write!(f, "(1+|x|)^{a}(1+|y|)^{b}"),
            WeightFn::Perturbation { amp, freq, phase } => write!(
                f,
                "2^({amp}sin({}|x|+{})cos({}|y|+{}))",
                freq[0], phase[0], freq[1], phase[1]
            ),
            WeightFn::Product(u, v) => write!(f, "{u}*{v}"),
        }
    }
}

/// (1+|x|)^{−n}(1+|y|)^{−m}.
pub fn counterexample_omega(config: &ExponentConfig) -> WeightFn {
    WeightFn::Bracket {
        a: -(config.n() as f64),
        b: -(config.m() as f64),
    }
}

/// |x|^{−n/q}|y|^{−m/q}.
pub fn counterexample_sigma(config: &ExponentConfig) -> WeightFn {
    WeightFn::Power {
        a: -(config.n() as f64) / config.q(),
        b: -(config.m() as f64) / config.q(),
    }
}

pub fn power_weight(a: f64, b: f64) -> WeightFn {
    WeightFn::Power { a, b }
}

fn random_perturbation<R: Rng>(rng: &mut R) -> WeightFn {
    WeightFn::Perturbation {
        amp: rng.gen_range(0.0..0.5),
        freq: [rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0)],
        phase: [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)],
    }
}

/// σ = |x|^a|y|^b times a bounded perturbation, with 0 ≤ a < 0.8·n/p′ and 0 ≤ b < 0.8·m/p′.
///
/// These exponents keep σ^p in A_p×A_p and keep σ^{−p′} locally integrable.
pub fn random_sigma<R: Rng>(rng: &mut R, config: &ExponentConfig) -> WeightFn {
    let dp = config.dual_p();
    let a = rng.gen_range(0.0..0.8 * config.n() as f64 / dp);
    let b = rng.gen_range(0.0..0.8 * config.m() as f64 / dp);
    power_weight(a, b).times(random_perturbation(rng))
}

/// ω = σ·(1+|x|)^c(1+|y|)^c′ times a bounded perturbation, with c, c′ ∈ [−1, 0].
pub fn random_omega<R: Rng>(rng: &mut R, sigma: &WeightFn) -> WeightFn {
    let bracket = WeightFn::Bracket {
        a: rng.gen_range(-1.0..=0.0),
        b: rng.gen_range(-1.0..=0.0),
    };
    sigma.clone().times(bracket).times(random_perturbation(rng))
}

/// Sampled (ω, σ) with the exponent configuration they are tested against.
#[derive(Debug)]
pub struct WeightPair {
    omega: Field,
    sigma: Field,
    config: ExponentConfig,
    omega_q: Field,
    dual: Field,
    maximal_dual: Mutex<HashMap<FamilyMode, Arc<Field>>>,
}

impl Clone for WeightPair {
    fn clone(&self) -> Self {
        WeightPair {
            omega: self.omega.clone(),
            sigma: self.sigma.clone(),
            config: self.config,
            omega_q: self.omega_q.clone(),
            dual: self.dual.clone(),
            maximal_dual: Mutex::new(self.maximal_dual.lock().unwrap().clone()),
        }
    }
}

impl WeightPair {
    pub fn new(omega: Field, sigma: Field, config: ExponentConfig) -> Result<Self> {
        omega.check_same_grid(&sigma)?;
        let [gn, gm] = omega.grid().dims();
        if gn != config.n() || gm != config.m() {
            return Err(Error::DimensionMismatch {
                grid_n: gn,
                grid_m: gm,
                n: config.n(),
                m: config.m(),
            });
        }
        omega.require_positive()?;
        sigma.require_positive()?;
        let omega_q = omega.powf(config.q())?;
        let dual = sigma.powf(-config.dual_p())?;
        Ok(WeightPair {
            omega,
            sigma,
            config,
            omega_q,
            dual,
            maximal_dual: Mutex::new(HashMap::new()),
        })
    }

    pub fn from_fns(grid: &Grid, omega: &WeightFn, sigma: &WeightFn, config: ExponentConfig) -> Result<Self> {
        WeightPair::new(omega.sample(grid)?, sigma.sample(grid)?, config)
    }

    pub fn omega(&self) -> &Field {
        &self.omega
    }

    pub fn sigma(&self) -> &Field {
        &self.sigma
    }

    pub fn config(&self) -> &ExponentConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        self.omega.grid()
    }

    /// ω^q.
    pub fn omega_q(&self) -> &Field {
        &self.omega_q
    }

    /// The dual weight σ^{−p′}.
    pub fn dual(&self) -> &Field {
        &self.dual
    }

    /// M(σ^{−p′}) over `family`, computed once per family mode.
    pub fn maximal_dual(&self, family: &RectFamily) -> Result<Arc<Field>> {
        if family.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        if let Some(m) = self.maximal_dual.lock().unwrap().get(&family.mode()) {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(strong_maximal(&self.dual, family)?);
        self.maximal_dual
            .lock()
            .unwrap()
            .insert(family.mode(), Arc::clone(&m));
        Ok(m)
    }

    /// The same pair with ω replaced by c·ω.
    pub fn scale_omega(&self, c: f64) -> Result<Self> {
        WeightPair::new(self.omega.scale(c)?, self.sigma.clone(), self.config)
    }

    /// The same pair with σ replaced by c·σ.
    pub fn scale_sigma(&self, c: f64) -> Result<Self> {
        WeightPair::new(self.omega.clone(), self.sigma.scale(c)?, self.config)
    }
}

/// A_p×A_p characteristic of a single weight over `family`.
///
/// For p > 1 this is the largest avg(w)·avg(w^{−1/(p−1)})^{p−1}; for p = 1 it is
/// the largest Mw/w over cells, reported with the single-cell maximizer.
pub fn a_p_cross_characteristic(w: &Field, p: f64, family: &RectFamily) -> Result<CharacteristicResult> {
    w.require_positive()?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponents(format!("need p >= 1, got {p}")));
    }
    if p == 1.0 {
        let m = strong_maximal(w, family)?;
        let ratios: Vec<f64> = m.values().iter().zip(w.values()).map(|(a, b)| a / b).collect();
        let (value, cell) = best_over(ratios.len(), |k| ratios[k]);
        let (i, j) = w.grid().split_index(cell);
        return Ok(CharacteristicResult {
            kind: CharacteristicKind::APCross,
            value,
            maximizer: Rect::single_cell(w.grid(), i, j),
        });
    }
    let e = -1.0 / (p - 1.0);
    let avg_w = rectangle_averages(&RectSums::new(w), family);
    let avg_d = rectangle_averages(&RectSums::new(&w.powf(e)?), family);
    let (value, index) = best_over(avg_w.len(), |k| avg_w[k] * avg_d[k].powf(p - 1.0));
    Ok(CharacteristicResult {
        kind: CharacteristicKind::APCross,
        value,
        maximizer: family.rect(index),
    })
}

/// Outcome of the reverse-doubling scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoublingResult {
    /// Largest ε with ∫_Q w ≤ 2^{−εd} ∫_{2Q} w on every tested slice.
    pub epsilon: f64,
    /// Q times the single-cell slice attaining the minimum.
    pub witness: Rect,
    /// Factor on which Q lives.
    pub axis: Factor,
}

impl DoublingResult {
    pub fn holds(&self) -> bool {
        self.epsilon > 0.0
    }
}

/// Masses of w on Q and on its centered double 2Q, along the slice `slice` of the
/// other factor. Returns None when 2Q leaves the domain.
///
/// For odd sides 2Q covers half of a cell at each end of every axis; the
/// covered mass is then the mean of the 2^d integer cubes of side 2s that
/// include one of the two half cells on each axis.
pub fn doubling_masses(sums: &RectSums, factor: Factor, cube: &Cube, slice: usize) -> Option<(f64, f64)> {
    let grid = *sums.grid();
    let fg = grid.factor(factor);
    let other = Cube::single(grid.factor(factor.other()), slice);
    let d = fg.dim();
    let n = fg.cells_per_axis();
    let s = cube.side();
    let rect = |c: Cube| match factor {
        Factor::First => Rect::new(c, other),
        Factor::Second => Rect::new(other, c),
    };
    let inner = sums.sum(&rect(*cube));
    let outer = if s.is_multiple_of(2) {
        let lo: Vec<usize> = cube.origin().iter().map(|&o| o.checked_sub(s / 2)).collect::<Option<_>>()?;
        let big = Cube::new(d, &lo, 2 * s);
        if !big.fits(fg) {
            return None;
        }
        sums.sum(&rect(big))
    } else {
        // full cells [o − (s−1)/2, o + s − 1 + (s−1)/2] plus a half cell on each side
        let half = (s - 1) / 2;
        let mut lo = Vec::with_capacity(d);
        for &o in cube.origin() {
            let l = o.checked_sub(half + 1)?;
            if o + s + half >= n {
                return None;
            }
            lo.push(l);
        }
        let mut total = 0.0;
        for choice in 0..(1usize << d) {
            let origin: Vec<usize> = (0..d).map(|a| lo[a] + (choice >> a & 1)).collect();
            total += sums.sum(&rect(Cube::new(d, &origin, 2 * s)));
        }
        total / (1usize << d) as f64
    };
    let vol = grid.cell_volume();
    Some((inner * vol, outer * vol))
}

/// Smallest log₂(∫_{2Q} w / ∫_Q w)/d over every cube of the family whose double
/// stays in the domain, every slice of the other factor, and both factors.
pub fn reverse_doubling_epsilon(w: &Field, family: &RectFamily) -> Result<DoublingResult> {
    if family.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let sums = RectSums::new(w);
    let grid = *w.grid();
    let mut best: Option<DoublingResult> = None;
    for factor in [Factor::First, Factor::Second] {
        let d = grid.factor(factor).dim() as f64;
        let slices = grid.factor(factor.other()).cell_count();
        let cubes = family.cubes(factor);
        let found = cubes
            .par_iter()
            .enumerate()
            .flat_map_iter(|(qi, cube)| {
                let sums = &sums;
                (0..slices).filter_map(move |k| {
                    let (inner, outer) = doubling_masses(sums, factor, cube, k)?;
                    if inner <= 0.0 {
                        return None;
                    }
                    Some(((outer / inner).log2() / d, qi * slices + k))
                })
            })
            .reduce_with(|a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        if let Some((epsilon, key)) = found {
            if best.is_none_or(|b| epsilon < b.epsilon) {
                let cube = cubes[key / slices];
                let other = Cube::single(grid.factor(factor.other()), key % slices);
                let witness = match factor {
                    Factor::First => Rect::new(cube, other),
                    Factor::Second => Rect::new(other, cube),
                };
                best = Some(DoublingResult {
                    epsilon,
                    witness,
                    axis: factor,
                });
            }
        }
    }
    best.ok_or(Error::NoTestableRectangles)
}
