//! Four-region splitting of the fractional integral around a point, with the
//! radius choices, region bounds and concluding pointwise bounds.

use std::fmt;

use crate::characteristics::{a_m_pq, CharacteristicResult};
use crate::error::{Error, Result};
use crate::grid::{ExponentConfig, Factor, FactorGrid, Field, Grid, RectFamily};
use crate::operators::{g_transform, kernel_row, sphere_area, strong_maximal, GTransform, SeparableKernel};
use crate::weights::WeightPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    /// near in both factors
    I,
    /// far in both factors
    II,
    /// near in the first factor, far in the second
    III,
    /// far in the first factor, near in the second
    IV,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::I, Region::II, Region::III, Region::IV];

    pub fn from_nearness(near_x: bool, near_y: bool) -> Region {
        match (near_x, near_y) {
            (true, true) => Region::I,
            (false, false) => Region::II,
            (true, false) => Region::III,
            (false, true) => Region::IV,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Region membership around `center`, decided at cell centers.
#[derive(Clone, Debug)]
pub struct RegionSplit {
    pub center: (usize, usize),
    pub rho: f64,
    pub lambda: f64,
    grid: Grid,
    near_x: Vec<bool>,
    near_y: Vec<bool>,
}

impl RegionSplit {
    pub fn region_of(&self, i: usize, j: usize) -> Region {
        Region::from_nearness(self.near_x[i], self.near_y[j])
    }

    /// Indicator of `region` over all cells.
    pub fn mask(&self, region: Region) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.grid.cell_count());
        for &nx in &self.near_x {
            out.extend(self.near_y.iter().map(|&ny| Region::from_nearness(nx, ny) == region));
        }
        out
    }

    pub fn count(&self, region: Region) -> usize {
        let nx = self.near_x.iter().filter(|&&b| b).count();
        let ny = self.near_y.iter().filter(|&&b| b).count();
        let (fx, fy) = (self.near_x.len() - nx, self.near_y.len() - ny);
        match region {
            Region::I => nx * ny,
            Region::II => fx * fy,
            Region::III => nx * fy,
            Region::IV => fx * ny,
        }
    }

    pub fn near(&self, factor: Factor) -> &[bool] {
        match factor {
            Factor::First => &self.near_x,
            Factor::Second => &self.near_y,
        }
    }
}

pub fn region_split(grid: &Grid, center: (usize, usize), rho: f64, lambda: f64) -> RegionSplit {
    let near = |g: &FactorGrid, c: usize, r: f64| (0..g.cell_count()).map(|k| g.distance(c, k) <= r).collect();
    RegionSplit {
        center,
        rho,
        lambda,
        grid: *grid,
        near_x: near(grid.first(), center.0, rho),
        near_y: near(grid.second(), center.1, lambda),
    }
}

/// All four masked kernel integrals of f at the split's center, indexed by `Region::index`.
pub fn region_integrals(f: &Field, split: &RegionSplit, kernel: &SeparableKernel) -> [f64; 4] {
    let (i, j) = split.center;
    let r1 = kernel.row(Factor::First, i);
    let r2 = kernel.row(Factor::Second, j);
    let c2 = r2.len();
    let mut out = [0.0; 4];
    for (k, row) in f.values().chunks(c2).enumerate() {
        let mut near = 0.0;
        let mut far = 0.0;
        for ((&v, &w), &ny) in row.iter().zip(r2).zip(&split.near_y) {
            if ny {
                near += v * w;
            } else {
                far += v * w;
            }
        }
        let (rn, rf) = if split.near_x[k] {
            (Region::I, Region::III)
        } else {
            (Region::IV, Region::II)
        };
        out[rn.index()] += r1[k] * near;
        out[rf.index()] += r1[k] * far;
    }
    out
}

pub fn region_integral(f: &Field, split: &RegionSplit, region: Region, kernel: &SeparableKernel) -> f64 {
    region_integrals(f, split, kernel)[region.index()]
}

/// Discrete Hölder bound for region II: ‖fσ‖_p times the p′-norm of kernel/σ over region II.
pub fn region_two_holder_bound(
    f: &Field,
    sigma: &Field,
    split: &RegionSplit,
    kernel: &SeparableKernel,
    p: f64,
) -> Result<f64> {
    let (i, j) = split.center;
    let grid = f.grid();
    let (v1, v2) = (grid.first().cell_volume(), grid.second().cell_volume());
    let r1 = kernel.row(Factor::First, i);
    let r2 = kernel.row(Factor::Second, j);
    let dp = p / (p - 1.0);
    let c2 = r2.len();
    let mut acc = 0.0;
    for (k, srow) in sigma.values().chunks(c2).enumerate() {
        if split.near_x[k] {
            continue;
        }
        let a = r1[k] / v1;
        for l in (0..c2).filter(|&l| !split.near_y[l]) {
            acc += (a * r2[l] / v2 / srow[l]).powf(dp);
        }
    }
    let dual = (acc * grid.cell_volume()).powf(1.0 / dp);
    Ok(f.lp_norm(p, Some(sigma))? * dual)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerSide {
    Inside,
    Outside,
}

/// Closed-form and grid values of a radial kernel mass in one factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerCakeEstimate {
    pub side: LayerSide,
    pub axis: Factor,
    pub radius: f64,
    /// Order α of the kernel inside; decay exponent s = (d−α)p′ of the dual kernel outside.
    pub exponent: f64,
    pub exact_value: f64,
    pub discrete_value: f64,
}

/// Inside: ∫_{|t|≤r} |t|^{α−d} dt. Outside: ∫_{|t|>r} |t|^{−s} dt with s = (d−α)p′.
/// The grid value is taken at the origin of the factor grid.
pub fn layer_cake_bound(
    side: LayerSide,
    axis: Factor,
    radius: f64,
    config: &ExponentConfig,
    grid: &FactorGrid,
) -> Result<LayerCakeEstimate> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::NonPositiveInput("radius"));
    }
    let d = config.dim(axis);
    if d != grid.dim() {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    let a = config.order(axis);
    let area = sphere_area(d);
    let df = d as f64;
    let origin = [0.0; 3];
    let norm = |cell: usize| {
        let c = grid.center(cell);
        (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
    };
    let (exponent, exact_value, discrete_value) = match side {
        LayerSide::Inside => {
            let row = kernel_row(grid, a, &origin);
            let disc = (0..grid.cell_count()).filter(|&k| norm(k) <= radius).map(|k| row[k]).sum();
            (a, area * radius.powf(a) / a, disc)
        }
        LayerSide::Outside => {
            let s = (df - a) * config.dual_p();
            if s.is_nan() || s <= df {
                return Err(Error::ExponentCondition(format!(
                    "dual kernel exponent {s} must exceed the dimension {d}"
                )));
            }
            let disc = (0..grid.cell_count())
                .map(norm)
                .filter(|&t| t > radius)
                .map(|t| t.powf(-s) * grid.cell_volume())
                .sum();
            (s, area * radius.powf(df - s) / (s - df), disc)
        }
    };
    Ok(LayerCakeEstimate {
        side,
        axis,
        radius,
        exponent,
        exact_value,
        discrete_value,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    One,
    Two,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::One => "one",
            Case::Two => "two",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Two iff Gf > ωMf·‖fσ‖_p.
pub fn case_select(gf: f64, omega_mf: f64, f_sigma_norm: f64) -> Case {
    if gf > omega_mf * f_sigma_norm {
        Case::Two
    } else {
        Case::One
    }
}

fn require_positive(v: f64, what: &'static str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveInput(what))
    }
}

/// ρ, λ from ρ^{−n/p} = (r·norm1/norm2)^{1/2} and λ^{−m/p} = (r·norm2/norm1)^{1/2}.
fn solve_with_ratio(r: f64, norm1: f64, norm2: f64, config: &ExponentConfig) -> (f64, f64) {
    let p = config.p();
    let a = (r * norm1 / norm2).sqrt();
    let b = (r * norm2 / norm1).sqrt();
    (a.powf(-p / config.n() as f64), b.powf(-p / config.m() as f64))
}

/// Radii with ρ^{−n/p}λ^{−m/p} = ωMf/‖fσ‖ and ρ^{−n/p}/λ^{−m/p} = norm1/norm2.
pub fn solve_rho_lambda_case1(
    omega_mf: f64,
    f_sigma_norm: f64,
    norm1: f64,
    norm2: f64,
    config: &ExponentConfig,
) -> Result<(f64, f64)> {
    require_positive(omega_mf, "omega_mf")?;
    require_positive(f_sigma_norm, "f_sigma_norm")?;
    require_positive(norm1, "norm1")?;
    require_positive(norm2, "norm2")?;
    Ok(solve_with_ratio(omega_mf / f_sigma_norm, norm1, norm2, config))
}

/// Radii with ρ^{−n/p}λ^{−m/p} = Gf/‖fσ‖² and ρ^{−n/p}/λ^{−m/p} = norm1/norm2.
pub fn solve_rho_lambda_case2(
    gf: f64,
    f_sigma_norm: f64,
    norm1: f64,
    norm2: f64,
    config: &ExponentConfig,
) -> Result<(f64, f64)> {
    require_positive(gf, "gf")?;
    require_positive(f_sigma_norm, "f_sigma_norm")?;
    require_positive(norm1, "norm1")?;
    require_positive(norm2, "norm2")?;
    Ok(solve_with_ratio(gf / (f_sigma_norm * f_sigma_norm), norm1, norm2, config))
}

/// Everything measured at one center.
#[derive(Clone, Debug, PartialEq)]
pub struct HedbergReport {
    pub center: (usize, usize),
    pub case: Case,
    pub rho: f64,
    pub lambda: f64,
    pub mf: f64,
    pub omega_mf: f64,
    pub gf: f64,
    pub f_sigma_norm: f64,
    pub norm1: f64,
    pub norm2: f64,
    pub region_values: [f64; 4],
    pub region_bounds: [f64; 4],
    pub final_value: f64,
    pub final_bound: f64,
    pub measured_constant: f64,
    /// final_value over A^M (ωMf)^{p/q} ‖fσ‖^{1−p/q} ω^{−1}.
    pub omega_form_constant: f64,
    pub partition_residual: f64,
    pub degenerate: bool,
}

/// Precomputed transforms shared by every center of one (f, ω, σ) trial.
pub struct HedbergContext<'a> {
    f: &'a Field,
    pair: &'a WeightPair,
    kernel: SeparableKernel,
    integral: Field,
    mf: Field,
    g: GTransform,
    f_sigma_norm: f64,
    a_m: CharacteristicResult,
}

impl<'a> HedbergContext<'a> {
    pub fn new(
        f: &'a Field,
        pair: &'a WeightPair,
        family: &RectFamily,
        maximal_family: &RectFamily,
    ) -> Result<Self> {
        let kernel = SeparableKernel::new(f.grid(), pair.config())?;
        Self::with_kernel(f, pair, kernel, family, maximal_family)
    }

    pub fn with_kernel(
        f: &'a Field,
        pair: &'a WeightPair,
        kernel: SeparableKernel,
        family: &RectFamily,
        maximal_family: &RectFamily,
    ) -> Result<Self> {
        f.check_same_grid(pair.omega())?;
        f.require_nonnegative()?;
        let p = pair.config().p();
        Ok(HedbergContext {
            integral: kernel.apply(f)?,
            mf: strong_maximal(f, maximal_family)?,
            g: g_transform(f, pair.sigma(), p, maximal_family)?,
            f_sigma_norm: f.lp_norm(p, Some(pair.sigma()))?,
            a_m: a_m_pq(pair, family, maximal_family)?,
            kernel,
            f,
            pair,
        })
    }

    pub fn a_m(&self) -> &CharacteristicResult {
        &self.a_m
    }

    pub fn integral(&self) -> &Field {
        &self.integral
    }

    pub fn kernel(&self) -> &SeparableKernel {
        &self.kernel
    }

    pub fn f_sigma_norm(&self) -> f64 {
        self.f_sigma_norm
    }

    pub fn g(&self) -> &GTransform {
        &self.g
    }

    pub fn split(&self, center: (usize, usize), rho: f64, lambda: f64) -> RegionSplit {
        region_split(self.f.grid(), center, rho, lambda)
    }

    pub fn report(&self, center: (usize, usize)) -> Result<HedbergReport> {
        let (i, j) = center;
        let grid = self.f.grid();
        if i >= grid.first().cell_count() || j >= grid.second().cell_count() {
            return Err(Error::SliceOutOfRange {
                index: i.max(j),
                len: grid.first().cell_count().min(grid.second().cell_count()),
            });
        }
        let c = self.pair.config();
        let (p, q) = (c.p(), c.q());
        let (alpha, beta) = (c.alpha(), c.beta());
        let (n, m) = (c.n() as f64, c.m() as f64);
        let omega = self.pair.omega().get(i, j);
        let sigma = self.pair.sigma().get(i, j);
        let mf = self.mf.get(i, j);
        let omega_mf = omega * mf;
        let gf = self.g.field.get(i, j);
        let (norm1, norm2) = (self.g.norm1[i], self.g.norm2[j]);
        let fsn = self.f_sigma_norm;
        let a_m = self.a_m.value;
        let final_value = self.integral.get(i, j);
        let case = case_select(gf, omega_mf, fsn);

        if mf == 0.0 || norm1 == 0.0 || norm2 == 0.0 || fsn == 0.0 {
            return Ok(HedbergReport {
                center,
                case,
                rho: 0.0,
                lambda: 0.0,
                mf,
                omega_mf,
                gf,
                f_sigma_norm: fsn,
                norm1,
                norm2,
                region_values: [0.0; 4],
                region_bounds: [0.0; 4],
                final_value,
                final_bound: 0.0,
                measured_constant: 0.0,
                omega_form_constant: 0.0,
                partition_residual: 0.0,
                degenerate: true,
            });
        }

        let (rho, lambda) = match case {
            Case::One => solve_rho_lambda_case1(omega_mf, fsn, norm1, norm2, c)?,
            Case::Two => solve_rho_lambda_case2(gf, fsn, norm1, norm2, c)?,
        };
        let split = self.split(center, rho, lambda);
        let region_values = region_integrals(self.f, &split, &self.kernel);
        let region_bounds = [
            rho.powf(alpha) * lambda.powf(beta) * mf,
            a_m * rho.powf(alpha - n / p) * lambda.powf(beta - m / p) * fsn / omega,
            a_m * rho.powf(alpha) * lambda.powf(beta - m / p) * norm1 / omega,
            a_m * rho.powf(alpha - n / p) * lambda.powf(beta) * norm2 / omega,
        ];
        let r = p / q;
        let omega_form = a_m * omega_mf.powf(r) * fsn.powf(1.0 - r) / omega;
        let final_bound = match case {
            Case::One => a_m * (sigma * mf).powf(r) * fsn.powf(1.0 - r) / omega,
            Case::Two => a_m * gf.powf(r) * fsn.powf(1.0 - 2.0 * r) / omega,
        };
        let total: f64 = region_values.iter().sum();
        let partition_residual = if final_value == 0.0 {
            total.abs()
        } else {
            (total - final_value).abs() / final_value.abs()
        };
        Ok(HedbergReport {
            center,
            case,
            rho,
            lambda,
            mf,
            omega_mf,
            gf,
            f_sigma_norm: fsn,
            norm1,
            norm2,
            region_values,
            region_bounds,
            final_value,
            final_bound,
            measured_constant: final_value / final_bound,
            omega_form_constant: final_value / omega_form,
            partition_residual,
            degenerate: false,
        })
    }
}

/// Convenience wrapper building a context for a single center.
pub fn pointwise_bound_report(
    f: &Field,
    pair: &WeightPair,
    center: (usize, usize),
    family: &RectFamily,
    maximal_family: &RectFamily,
) -> Result<HedbergReport> {
    HedbergContext::new(f, pair, family, maximal_family)?.report(center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, FamilyMode};
    use crate::weights::WeightFn;
    use proptest::prelude::*;

    fn cfg() -> ExponentConfig {
        ExponentConfig::balanced(1, 1, 2.0, 4.0).unwrap()
    }

    #[test]
    fn split_extremes() {
        let g = make_grid([1, 1], [2.0, 2.0], [4, 4]).unwrap();
        let big = region_split(&g, (1, 2), 100.0, 100.0);
        assert_eq!(big.count(Region::I), 16);
        let small = region_split(&g, (1, 2), 0.1, 0.1);
        assert_eq!(small.count(Region::I), 1);
        assert_eq!(small.region_of(1, 2), Region::I);
        assert_eq!(small.count(Region::II), 9);
        assert_eq!(small.count(Region::III), 3);
        assert_eq!(small.count(Region::IV), 3);
        let corner = region_split(&g, (0, 0), 1.5, 1.5);
        for r in Region::ALL {
            assert_eq!(corner.count(r), 4);
            assert_eq!(corner.mask(r).iter().filter(|&&b| b).count(), 4);
        }
    }

    #[test]
    fn layer_cake_closed_forms() {
        let g = FactorGrid::new(1, 8.0, 256).unwrap();
        let c = ExponentConfig::new(1, 1, 2.0, 4.0, 0.5, 0.25).unwrap();
        let inside = layer_cake_bound(LayerSide::Inside, Factor::First, 1.0, &c, &g).unwrap();
        assert!((inside.exact_value - 4.0).abs() < 1e-15);
        let doubled = layer_cake_bound(LayerSide::Inside, Factor::First, 2.0, &c, &g).unwrap();
        assert!((doubled.exact_value / inside.exact_value - 2f64.sqrt()).abs() < 1e-15);
        let outside = layer_cake_bound(LayerSide::Outside, Factor::Second, 1.0, &c, &g).unwrap();
        assert_eq!(outside.exponent, 1.5);
        assert!((outside.exact_value - 4.0).abs() < 1e-15);
        assert!((inside.discrete_value / inside.exact_value - 1.0).abs() < 0.02);
        let bad = ExponentConfig::new(1, 1, 2.0, 4.0, 0.75, 0.25).unwrap();
        assert!(matches!(
            layer_cake_bound(LayerSide::Outside, Factor::First, 1.0, &bad, &g),
            Err(Error::ExponentCondition(_))
        ));
    }

    #[test]
    fn case_selection() {
        assert_eq!(case_select(2.0, 1.0, 1.0), Case::Two);
        assert_eq!(case_select(1.0, 1.0, 1.0), Case::One);
        assert_eq!(case_select(0.0, 5.0, 3.0), Case::One);
    }

    #[test]
    fn solver_examples() {
        let c = cfg();
        let (r, l) = solve_rho_lambda_case1(1.0, 1.0, 3.0, 3.0, &c).unwrap();
        assert!((r - 1.0).abs() < 1e-15 && (l - 1.0).abs() < 1e-15);
        let (r, l) = solve_rho_lambda_case1(4.0, 1.0, 4.0, 1.0, &c).unwrap();
        assert!((r - 1.0 / 16.0).abs() < 1e-15 && (l - 1.0).abs() < 1e-15);
        let (r, l) = solve_rho_lambda_case2(1.0, 1.0, 2.0, 0.5, &c).unwrap();
        assert!((r - 0.25).abs() < 1e-15 && (l - 4.0).abs() < 1e-15);
        assert!(solve_rho_lambda_case1(0.0, 1.0, 1.0, 1.0, &c).is_err());
        assert!(solve_rho_lambda_case2(1.0, 1.0, -1.0, 1.0, &c).is_err());
    }

    #[test]
    fn zero_input_is_degenerate() {
        let g = make_grid([1, 1], [1.0, 1.0], [8, 8]).unwrap();
        let pair = WeightPair::from_fns(&g, &WeightFn::Constant(1.0), &WeightFn::Constant(1.0), cfg()).unwrap();
        let fam = RectFamily::new(&g, FamilyMode::DyadicShifted).unwrap();
        let zero = Field::zeros(&g);
        let ctx = HedbergContext::new(&zero, &pair, &fam, &fam).unwrap();
        for i in 0..8 {
            let r = ctx.report((i, 7 - i)).unwrap();
            assert!(r.degenerate);
            assert_eq!(r.final_value, 0.0);
            assert_eq!(r.region_values, [0.0; 4]);
        }
    }

    #[test]
    fn constant_input_partitions() {
        let g = make_grid([1, 1], [1.0, 1.0], [8, 8]).unwrap();
        let pair = WeightPair::from_fns(&g, &WeightFn::Constant(1.0), &WeightFn::Constant(1.0), cfg()).unwrap();
        let fam = RectFamily::new(&g, FamilyMode::DyadicShifted).unwrap();
        let one = Field::constant(&g, 1.0);
        let ctx = HedbergContext::new(&one, &pair, &fam, &fam).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let r = ctx.report((i, j)).unwrap();
                assert!(!r.degenerate);
                assert!(r.partition_residual <= 1e-10);
                assert!(r.measured_constant.is_finite() && r.measured_constant > 0.0);
            }
        }
    }

    #[test]
    fn far_cell_in_region_two() {
        let g = make_grid([1, 1], [2.0, 2.0], [8, 8]).unwrap();
        let c = cfg();
        let kernel = SeparableKernel::new(&g, &c).unwrap();
        let mut v = vec![0.0; 64];
        v[g.index(7, 6)] = 3.0;
        let f = Field::from_values(&g, v).unwrap();
        let split = region_split(&g, (1, 0), 1.0, 1.0);
        assert_eq!(split.region_of(7, 6), Region::II);
        let vals = region_integrals(&f, &split, &kernel);
        let h = 0.5f64;
        let one_dim = |d: f64, a: f64| ((d + h / 2.0).powf(a) - (d - h / 2.0).powf(a)) / a;
        let expected = 3.0 * one_dim(6.0 * h, c.alpha()) * one_dim(6.0 * h, c.beta());
        assert!((vals[Region::II.index()] - expected).abs() < 1e-14 * expected);
        assert_eq!(vals[Region::I.index()], 0.0);
    }

    proptest! {
        #[test]
        fn solver_identities(a in 1e-6f64..1e6, b in 1e-6f64..1e6, n1 in 1e-6f64..1e6, n2 in 1e-6f64..1e6,
                             p in 1.1f64..4.0, gap in 0.05f64..0.9) {
            let q = 1.0 / (1.0 / p * (1.0 - gap));
            let c = ExponentConfig::balanced(1, 2, p, q).unwrap();
            let (n, m) = (c.n() as f64, c.m() as f64);
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs();
            let (r, l) = solve_rho_lambda_case1(a, b, n1, n2, &c).unwrap();
            let (u, v) = (r.powf(-n / p), l.powf(-m / p));
            prop_assert!(close(u * v, a / b));
            prop_assert!(close(u / v, n1 / n2));
            let gf = n1 * n2;
            let (r, l) = solve_rho_lambda_case2(gf, b, n1, n2, &c).unwrap();
            let (u, v) = (r.powf(-n / p), l.powf(-m / p));
            prop_assert!(close(u * v, gf / (b * b)));
            prop_assert!(close(u / v, n1 / n2));
            prop_assert!(close(r, (n1 / b).powf(-p / n)));
            prop_assert!(close(l, (n2 / b).powf(-p / m)));
        }

        #[test]
        fn solvers_ignore_scaling_of_f(a in 1e-3f64..1e3, b in 1e-3f64..1e3, n1 in 1e-3f64..1e3, n2 in 1e-3f64..1e3, k in -20i32..20) {
            let c = cfg();
            let s = 2f64.powi(k);
            let (r, l) = solve_rho_lambda_case1(a, b, n1, n2, &c).unwrap();
            let (rs, ls) = solve_rho_lambda_case1(a * s, b * s, n1 * s, n2 * s, &c).unwrap();
            prop_assert!((r - rs).abs() <= 1e-12 * r && (l - ls).abs() <= 1e-12 * l);
            prop_assert_eq!(case_select(n1 * n2, a, b), case_select(n1 * n2 * s * s, a * s, b * s));
        }
    }
}
