use rayon::prelude::*;

use crate::characteristics::{a_alphabeta_pq, a_m_pq, a_pq, CharacteristicKind};
use crate::error::{Error, Result};
use crate::grid::{Coords, FactorGrid, Field, Grid, RectFamily};
use crate::hedberg::HedbergContext;
use crate::operators::{fractional_integral, g_transform, SeparableKernel};
use crate::weights::{counterexample_omega, counterexample_sigma, reverse_doubling_epsilon, WeightFn, WeightPair};

use super::config::{ExperimentConfig, Mode};
use super::report::{Cell, ExperimentReport};
use super::trials::{trial_sample, TrialSample};

/// Fubini factorization tolerance; a larger residual means a bug, not a mathematical failure.
pub const FUBINI_TOLERANCE: f64 = 1e-10;

pub const THEOREM_COLUMNS: &[&str] = &[
    "trial",
    "seed",
    "L",
    "cells",
    "p",
    "q",
    "alpha",
    "beta",
    "characteristic_kind",
    "characteristic",
    "lhs",
    "rhs",
    "ratio",
    "degenerate",
    "accepted",
];

pub const GF_COLUMNS: &[&str] = &[
    "trial",
    "seed",
    "L",
    "cells",
    "p",
    "lhs",
    "rhs",
    "ratio",
    "fubini_residual",
    "degenerate",
];

pub const COUNTEREXAMPLE_COLUMNS: &[&str] = &[
    "L",
    "cells",
    "p",
    "q",
    "alpha",
    "beta",
    "a_pq",
    "proxy",
    "proxy_control",
    "best_test_function",
    "best_control_function",
];

pub const HEDBERG_COLUMNS: &[&str] = &[
    "trial",
    "seed",
    "cells",
    "cx",
    "cy",
    "case",
    "rho",
    "lambda",
    "v1",
    "v2",
    "v3",
    "v4",
    "b1",
    "b2",
    "b3",
    "b4",
    "final_value",
    "final_bound",
    "measured_constant",
    "omega_form_constant",
    "partition_residual",
    "degenerate",
];

fn metadata(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    cfg.entries.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
}

fn expect_mode(cfg: &ExperimentConfig, modes: &[Mode]) -> Result<()> {
    if modes.contains(&cfg.mode) {
        Ok(())
    } else {
        Err(Error::Config(format!("runner does not handle mode `{}`", cfg.mode)))
    }
}

/// Grid and families of every refinement level.
struct Level {
    grid: Grid,
    characteristic: RectFamily,
    maximal: RectFamily,
}

fn levels(cfg: &ExperimentConfig) -> Result<Vec<Level>> {
    (0..cfg.refine_levels)
        .map(|k| {
            let grid = cfg.grid(k)?;
            Ok(Level {
                characteristic: RectFamily::new(&grid, cfg.characteristic_family)?,
                maximal: RectFamily::new(&grid, cfg.maximal_family)?,
                grid,
            })
        })
        .collect()
}

fn samples(cfg: &ExperimentConfig) -> Result<Vec<TrialSample>> {
    (0..cfg.trials).map(|t| trial_sample(cfg, t)).collect()
}

/// Runs `per_trial` on every sample in parallel and concatenates rows in trial order.
fn collect_rows<F>(cfg: &ExperimentConfig, per_trial: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(&TrialSample) -> Result<Vec<Vec<Cell>>> + Sync + Send,
{
    let chunks: Vec<Vec<Vec<Cell>>> = samples(cfg)?.par_iter().map(&per_trial).collect::<Result<_>>()?;
    Ok(chunks.concat())
}

fn half_width(grid: &Grid) -> f64 {
    grid.first().half_width()
}

fn cells(grid: &Grid) -> usize {
    grid.first().cells_per_axis()
}

fn theorem_row(cfg: &ExperimentConfig, s: &TrialSample, level: &Level) -> Result<Vec<Cell>> {
    let c = &cfg.exponents;
    let grid = &level.grid;
    let pair = WeightPair::from_fns(grid, &s.omega, &s.sigma, *c)?;
    let f = s.input.sample(grid)?.map(f64::abs)?;
    let (kind, value, accepted) = match cfg.mode {
        Mode::TheoremA => {
            let doubling = |w: &Field| match reverse_doubling_epsilon(w, &level.characteristic) {
                Ok(d) => Ok(d.holds()),
                Err(Error::NoTestableRectangles) => Ok(false),
                Err(e) => Err(e),
            };
            let accepted = doubling(pair.omega_q())? && doubling(pair.dual())?;
            let a = a_alphabeta_pq(&pair, &level.characteristic)?;
            (CharacteristicKind::AAlphaBetaPq, a.value, accepted)
        }
        _ => {
            let a = a_m_pq(&pair, &level.characteristic, &level.maximal)?;
            (CharacteristicKind::AMPq, a.value, true)
        }
    };
    let lhs = fractional_integral(&f, c)?.lp_norm(c.q(), Some(pair.omega()))?;
    let rhs = value * f.lp_norm(c.p(), Some(pair.sigma()))?;
    let degenerate = rhs == 0.0;
    let ratio = if degenerate { 0.0 } else { lhs / rhs };
    Ok(vec![
        s.trial.into(),
        s.seed.into(),
        half_width(grid).into(),
        cells(grid).into(),
        c.p().into(),
        c.q().into(),
        c.alpha().into(),
        c.beta().into(),
        kind.as_str().into(),
        value.into(),
        lhs.into(),
        rhs.into(),
        ratio.into(),
        degenerate.into(),
        accepted.into(),
    ])
}

/// ‖ωI f‖_q against the characteristic times ‖fσ‖_p, per trial and resolution.
pub fn run_theorem_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_mode(cfg, &[Mode::TheoremOne, Mode::TheoremA])?;
    let levels = levels(cfg)?;
    let rows = collect_rows(cfg, |s| levels.iter().map(|l| theorem_row(cfg, s, l)).collect())?;
    ExperimentReport::new(cfg.mode, metadata(cfg), THEOREM_COLUMNS, rows)
}

fn gf_row(cfg: &ExperimentConfig, s: &TrialSample, level: &Level) -> Result<Vec<Cell>> {
    let p = cfg.exponents.p();
    let grid = &level.grid;
    let sigma = s.sigma.sample(grid)?;
    sigma.require_positive()?;
    let f = s.input.sample(grid)?.map(f64::abs)?;
    let g = g_transform(&f, &sigma, p, &level.maximal)?;
    let residual = g.fubini_residual(p)?;
    if residual.is_nan() || residual > FUBINI_TOLERANCE {
        return Err(Error::Assertion(format!(
            "Fubini factorization residual {residual:e} on trial {} at {} cells",
            s.trial,
            cells(grid)
        )));
    }
    let lhs = g.field.lp_norm(p, None)?;
    let rhs = f.lp_norm(p, Some(&sigma))?.powi(2);
    let degenerate = rhs == 0.0;
    let ratio = if degenerate { 0.0 } else { lhs / rhs };
    Ok(vec![
        s.trial.into(),
        s.seed.into(),
        half_width(grid).into(),
        cells(grid).into(),
        p.into(),
        lhs.into(),
        rhs.into(),
        ratio.into(),
        residual.into(),
        degenerate.into(),
    ])
}

/// C = ‖Gf‖_p / ‖fσ‖_p² per trial and resolution, asserting the Fubini factorization.
pub fn run_gf_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_mode(cfg, &[Mode::GfBound])?;
    let levels = levels(cfg)?;
    let rows = collect_rows(cfg, |s| levels.iter().map(|l| gf_row(cfg, s, l)).collect())?;
    ExperimentReport::new(cfg.mode, metadata(cfg), GF_COLUMNS, rows)
}

/// Test functions supported on [1, R]ⁿ × [1, R]ᵐ for dyadic R ≤ L: the indicator and
/// the profile |x|^{−n/p}|y|^{−m/p}, whose L^p norm grows like log R in each factor.
pub fn counterexample_tests(half_width: f64, n: usize, m: usize, p: f64) -> Vec<(String, WeightFn, f64)> {
    let mut out = Vec::new();
    let mut r = 2.0;
    while r <= half_width {
        out.push((format!("indicator_R{r}"), WeightFn::Constant(1.0), r));
        out.push((
            format!("profile_R{r}"),
            WeightFn::Power {
                a: -(n as f64) / p,
                b: -(m as f64) / p,
            },
            r,
        ));
        r *= 2.0;
    }
    out
}

fn in_box(x: &Coords, dim: usize, r: f64) -> bool {
    x[..dim].iter().all(|&t| (1.0..=r).contains(&t))
}

fn sample_test(grid: &Grid, shape: &WeightFn, r: f64) -> Result<Field> {
    let (n, m) = (grid.first().dim(), grid.second().dim());
    Field::sample(grid, |x, y| {
        if in_box(x, n, r) && in_box(y, m, r) {
            shape.eval(x, y)
        } else {
            0.0
        }
    })
}

fn ratio(kernel: &SeparableKernel, omega: &Field, scale: &Field, h: &Field, q: f64, p: f64) -> Result<f64> {
    let den = h.lp_norm(p, None)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(kernel.apply(&h.mul(scale)?)?.lp_norm(q, Some(omega))? / den)
}

/// Iteration cap and relative stopping tolerance of the extremal search.
pub const EXTREMAL_ITERATIONS: usize = 400;
pub const EXTREMAL_TOLERANCE: f64 = 1e-12;

/// Maximizer of ‖ω·K(s·h)‖_q / ‖h‖_p over nonnegative h by the nonlinear power iteration
/// h ← (s·Kᵀ(ω·(ωK(s·h))^{q−1}))^{1/(p−1)}, which increases the ratio monotonically for p ≤ q.
pub fn extremal_ratio(kernel: &SeparableKernel, omega: &Field, scale: &Field, p: f64, q: f64) -> Result<(f64, Field)> {
    let adjoint = kernel.transposed();
    let grid = omega.grid();
    let normalize = |h: Field| -> Result<Field> {
        let n = h.lp_norm(p, None)?;
        h.scale(1.0 / n)
    };
    let mut h = normalize(Field::constant(grid, 1.0))?;
    let mut value = ratio(kernel, omega, scale, &h, q, p)?;
    for _ in 0..EXTREMAL_ITERATIONS {
        let u = kernel.apply(&h.mul(scale)?)?.mul(omega)?;
        let g = u.powf(q - 1.0)?.mul(omega)?;
        let next = normalize(adjoint.apply(&g)?.mul(scale)?.powf(1.0 / (p - 1.0))?)?;
        let v = ratio(kernel, omega, scale, &next, q, p)?;
        h = next;
        let done = v - value <= EXTREMAL_TOLERANCE * v;
        value = value.max(v);
        if done {
            break;
        }
    }
    Ok((value, h))
}

/// Largest ratio over the fixed test functions and the extremal search, with the maximizer's name.
fn proxy(kernel: &SeparableKernel, omega: &Field, scale: &Field, tests: &[(String, Field)], q: f64, p: f64) -> Result<(f64, String)> {
    let ratios: Vec<f64> = tests
        .par_iter()
        .map(|(_, h)| ratio(kernel, omega, scale, h, q, p))
        .collect::<Result<_>>()?;
    let (mut best, mut name) = (0.0, String::new());
    for (k, &v) in ratios.iter().enumerate() {
        if v > best {
            best = v;
            name = tests[k].0.clone();
        }
    }
    let (v, _) = extremal_ratio(kernel, omega, scale, p, q)?;
    if v > best {
        best = v;
        name = "extremal".into();
    }
    Ok((best, name))
}

/// A_pq of the counterexample pair and the operator-ratio proxy for each truncation.
pub fn run_counterexample_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_mode(cfg, &[Mode::Counterexample])?;
    let c = &cfg.exponents;
    let (p, q) = (c.p(), c.q());
    let mut rows = Vec::new();
    for &l in &cfg.truncations {
        let grid = cfg.truncation_grid(l)?;
        let family = RectFamily::new(&grid, cfg.characteristic_family)?;
        let pair = WeightPair::from_fns(&grid, &counterexample_omega(c), &counterexample_sigma(c), *c)?;
        let a = a_pq(&pair, &family)?;
        let kernel = SeparableKernel::new(&grid, c)?;
        let tests: Vec<(String, Field)> = counterexample_tests(l, c.n(), c.m(), p)
            .into_iter()
            .map(|(name, shape, r)| Ok((name, sample_test(&grid, &shape, r)?)))
            .collect::<Result<_>>()?;
        if tests.is_empty() {
            return Err(Error::Config(format!("truncation {l} leaves no test function (need L >= 2)")));
        }
        let inverse_sigma = pair.sigma().map(f64::recip)?;
        let (value, best) = proxy(&kernel, pair.omega(), &inverse_sigma, &tests, q, p)?;
        let unit = Field::constant(&grid, 1.0);
        let (control, best_control) = proxy(&kernel, pair.omega(), &unit, &tests, q, p)?;
        rows.push(vec![
            l.into(),
            cells(&grid).into(),
            p.into(),
            q.into(),
            c.alpha().into(),
            c.beta().into(),
            a.value.into(),
            value.into(),
            control.into(),
            best.into(),
            best_control.into(),
        ]);
    }
    ExperimentReport::new(cfg.mode, metadata(cfg), COUNTEREXAMPLE_COLUMNS, rows)
}

/// Cells whose per-axis indices are multiples of `stride` coarse cells, mapped to the fine grid.
pub fn center_subsample(coarse: &FactorGrid, fine: &FactorGrid, stride: usize) -> Vec<usize> {
    let factor = fine.cells_per_axis() / coarse.cells_per_axis();
    (0..coarse.cell_count())
        .filter(|&cell| coarse.unflatten(cell)[..coarse.dim()].iter().all(|i| i % stride == 0))
        .map(|cell| {
            let idx = coarse.unflatten(cell);
            let scaled: Vec<usize> = idx[..coarse.dim()].iter().map(|i| i * factor).collect();
            fine.flatten(&scaled)
        })
        .collect()
}

fn hedberg_rows(cfg: &ExperimentConfig, s: &TrialSample, level: &Level, coarse: &Grid) -> Result<Vec<Vec<Cell>>> {
    let grid = &level.grid;
    let pair = WeightPair::from_fns(grid, &s.omega, &s.sigma, cfg.exponents)?;
    let f = s.input.sample(grid)?.map(f64::abs)?;
    let ctx = HedbergContext::new(&f, &pair, &level.characteristic, &level.maximal)?;
    let xs = center_subsample(coarse.first(), grid.first(), cfg.center_stride);
    let ys = center_subsample(coarse.second(), grid.second(), cfg.center_stride);
    let centers: Vec<(usize, usize)> = xs.iter().flat_map(|&i| ys.iter().map(move |&j| (i, j))).collect();
    centers
        .par_iter()
        .map(|&center| {
            let r = ctx.report(center)?;
            let mut row: Vec<Cell> = vec![
                s.trial.into(),
                s.seed.into(),
                cells(grid).into(),
                center.0.into(),
                center.1.into(),
                r.case.as_str().into(),
                r.rho.into(),
                r.lambda.into(),
            ];
            row.extend(r.region_values.iter().map(|&v| Cell::from(v)));
            row.extend(r.region_bounds.iter().map(|&v| Cell::from(v)));
            row.extend([
                r.final_value.into(),
                r.final_bound.into(),
                r.measured_constant.into(),
                r.omega_form_constant.into(),
                r.partition_residual.into(),
                r.degenerate.into(),
            ]);
            Ok(row)
        })
        .collect()
}

/// One Hedberg report per trial, resolution and subsampled center.
pub fn run_hedberg_sweep(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_mode(cfg, &[Mode::HedbergSweep])?;
    let levels = levels(cfg)?;
    let coarse = cfg.grid(0)?;
    let rows = collect_rows(cfg, |s| {
        let mut out = Vec::new();
        for l in &levels {
            out.extend(hedberg_rows(cfg, s, l, &coarse)?);
        }
        Ok(out)
    })?;
    ExperimentReport::new(cfg.mode, metadata(cfg), HEDBERG_COLUMNS, rows)
}

/// Dispatches on the configured mode.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.mode {
        Mode::TheoremOne | Mode::TheoremA => run_theorem_experiment(cfg),
        Mode::GfBound => run_gf_experiment(cfg),
        Mode::Counterexample => run_counterexample_experiment(cfg),
        Mode::HedbergSweep => run_hedberg_sweep(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn zero_input_gives_zero_ratios() {
        let r = run(&config("mode = theoremOne\ncells = 8\nf.kind = zero\ntrials = 2")).unwrap();
        assert_eq!(r.floats("ratio").unwrap(), vec![0.0, 0.0]);
        let r = run(&config("mode = gf_bound\ncells = 8\nf.kind = zero")).unwrap();
        assert_eq!(r.floats("ratio").unwrap(), vec![0.0]);
        let r = run(&config("mode = hedberg_sweep\ncells = 8\nf.kind = zero\ncenter_stride = 2")).unwrap();
        assert_eq!(r.rows.len(), 16);
        assert!(r.rows.iter().all(|row| row[21] == Cell::Bool(true)));
    }

    #[test]
    fn constant_gf_constant_is_one() {
        let cfg = config(
            "mode = gf_bound\nhalf_width = 1\ncells = 8\nsigma.kind = constant\nf.kind = constant\nmaximal_family = dyadic",
        );
        let r = run(&cfg).unwrap();
        assert!((r.floats("lhs").unwrap()[0] - 4.0).abs() < 1e-14);
        assert!((r.floats("rhs").unwrap()[0] - 4.0).abs() < 1e-14);
        assert!((r.floats("ratio").unwrap()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_hedberg_partition() {
        let cfg = config(
            "mode = hedberg_sweep\nhalf_width = 1\ncells = 8\ncenter_stride = 1\nomega.kind = constant\nsigma.kind = constant\nf.kind = constant",
        );
        let r = run(&cfg).unwrap();
        assert_eq!(r.rows.len(), 64);
        assert!(r.floats("partition_residual").unwrap().iter().all(|&v| v <= 1e-10));
    }

    #[test]
    fn theorem_a_accepts_positive_weights() {
        let r = run(&config("mode = theoremA\ncells = 8\ntrials = 3\nseed = 2")).unwrap();
        assert_eq!(r.summary_value("rejected"), Some(&Cell::Int(0)));
        assert!(r.floats("ratio").unwrap().iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn subsample_maps_to_refined_cells() {
        let coarse = FactorGrid::new(1, 1.0, 8).unwrap();
        let fine = FactorGrid::new(1, 1.0, 16).unwrap();
        assert_eq!(center_subsample(&coarse, &fine, 4), vec![0, 8]);
        let c2 = FactorGrid::new(2, 1.0, 4).unwrap();
        let f2 = FactorGrid::new(2, 1.0, 8).unwrap();
        assert_eq!(center_subsample(&c2, &f2, 2), vec![0, 4, 32, 36]);
    }

    #[test]
    fn extremal_ratio_matches_the_top_singular_value_for_p_equal_q() {
        let g = Grid::new([1, 1], [2.0, 2.0], [4, 4]).unwrap();
        let c = crate::grid::ExponentConfig::balanced(1, 1, 2.0, 4.0).unwrap();
        let kernel = SeparableKernel::new(&g, &c).unwrap();
        let omega = Field::sample(&g, |x, y| 1.0 / (1.0 + x[0].abs() + y[0] * y[0])).unwrap();
        let scale = Field::sample(&g, |x, y| (x[0].abs() * y[0].abs()).powf(0.25)).unwrap();
        let (v, h) = extremal_ratio(&kernel, &omega, &scale, 2.0, 2.0).unwrap();
        // dense A[(i,j),(k,l)] = ω(i,j) K1[i,k] K2[j,l] s(k,l); top eigenvalue of AᵀA by repeated squaring
        let k1 = kernel.matrix(crate::grid::Factor::First);
        let k2 = kernel.matrix(crate::grid::Factor::Second);
        let n = 16;
        let a: Vec<f64> = (0..n * n)
            .map(|e| {
                let (r, col) = (e / n, e % n);
                let (i, j, k, l) = (r / 4, r % 4, col / 4, col % 4);
                omega.get(i, j) * k1[i * 4 + k] * k2[j * 4 + l] * scale.get(k, l)
            })
            .collect();
        let mut m: Vec<f64> = (0..n * n)
            .map(|e| (0..n).map(|r| a[r * n + e / n] * a[r * n + e % n]).sum())
            .collect();
        let mut log_scale = 0.0;
        for _ in 0..12 {
            let sq: Vec<f64> = (0..n * n)
                .map(|e| (0..n).map(|t| m[(e / n) * n + t] * m[t * n + e % n]).sum())
                .collect();
            let norm = sq.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            m = sq.iter().map(|v| v / norm).collect();
            log_scale = 2.0 * log_scale + norm.ln();
        }
        // M = (AᵀA)^{4096}/e^{log_scale}; its trace ≈ λ_max^{4096}/e^{log_scale}
        let trace: f64 = (0..n).map(|t| m[t * n + t]).sum();
        let lambda = ((trace.ln() + log_scale) / 4096.0).exp();
        assert!((v - lambda.sqrt()).abs() < 1e-9 * v);
        assert!(h.values().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn counterexample_single_truncation() {
        let r = run(&config("mode = counterexample\ntruncations = 2\ncell_size = 0.25")).unwrap();
        assert_eq!(r.rows.len(), 1);
        let v = r.floats("proxy").unwrap()[0];
        assert!(v.is_finite() && v > 0.0);
    }
}
