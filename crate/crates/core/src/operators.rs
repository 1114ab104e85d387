//! Strong fractional integral, strong and partial maximal operators, and the G transform.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{
    Coords, Cube, ExponentConfig, Factor, FactorGrid, Field, Grid, Rect, RectFamily, RectSums, Slice,
};

/// Surface area of the unit sphere in ℝ^d (ω₀ = 2 counts the two endpoints of an interval).
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension {d}"),
    }
}

/// sign(t)|t|^a / a, an antiderivative of |t|^{a−1}.
fn antiderivative(t: f64, a: f64) -> f64 {
    t.signum() * t.abs().powf(a) / a
}

/// Kernel mass of the cell `cell` seen from the point `x`, for |x − u|^{order − d}.
///
/// In one dimension this is the exact integral over the cell. In higher
/// dimensions the cell holding `x` is replaced by the ball of equal volume
/// centered at `x`; every other cell uses the midpoint rule.
fn cell_weight(grid: &FactorGrid, order: f64, x: &Coords, cell: usize) -> f64 {
    let d = grid.dim();
    let h = grid.cell_size();
    if d == 1 {
        let left = grid.axis_edge(cell) - x[0];
        return antiderivative(left + h, order) - antiderivative(left, order);
    }
    let c = grid.center(cell);
    let idx = grid.unflatten(cell);
    let inside = (0..d).all(|a| {
        let lo = grid.axis_edge(idx[a]);
        x[a] >= lo && x[a] < lo + h
    });
    if inside {
        let area = sphere_area(d);
        let volume = area / d as f64;
        let radius = (grid.cell_volume() / volume).powf(1.0 / d as f64);
        return area * radius.powf(order) / order;
    }
    let dist = (0..d).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>().sqrt();
    dist.powf(order - d as f64) * grid.cell_volume()
}

/// Row of kernel masses for one evaluation point.
pub fn kernel_row(grid: &FactorGrid, order: f64, x: &Coords) -> Vec<f64> {
    (0..grid.cell_count())
        .map(|cell| cell_weight(grid, order, x, cell))
        .collect()
}

/// Square matrix of kernel masses between cell centers (row = evaluation cell).
pub fn axis_matrix(grid: &FactorGrid, order: f64) -> Vec<f64> {
    let c = grid.cell_count();
    let mut k = vec![0.0; c * c];
    k.par_chunks_mut(c).enumerate().for_each(|(i, row)| {
        let x = grid.center(i);
        for (j, e) in row.iter_mut().enumerate() {
            *e = cell_weight(grid, order, &x, j);
        }
    });
    k
}

/// Product kernel |x−u|^{α−n}|y−v|^{β−m} discretized as two axis matrices.
#[derive(Clone, Debug)]
pub struct SeparableKernel {
    alpha: f64,
    beta: f64,
    c1: usize,
    c2: usize,
    k1: Vec<f64>,
    k2: Vec<f64>,
}

fn check_dims(grid: &Grid, config: &ExponentConfig) -> Result<()> {
    let [gn, gm] = grid.dims();
    if gn != config.n() || gm != config.m() {
        return Err(Error::DimensionMismatch {
            grid_n: gn,
            grid_m: gm,
            n: config.n(),
            m: config.m(),
        });
    }
    Ok(())
}

impl SeparableKernel {
    pub fn new(grid: &Grid, config: &ExponentConfig) -> Result<Self> {
        check_dims(grid, config)?;
        Ok(SeparableKernel {
            alpha: config.alpha(),
            beta: config.beta(),
            c1: grid.first().cell_count(),
            c2: grid.second().cell_count(),
            k1: axis_matrix(grid.first(), config.alpha()),
            k2: axis_matrix(grid.second(), config.beta()),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn matrix(&self, factor: Factor) -> &[f64] {
        match factor {
            Factor::First => &self.k1,
            Factor::Second => &self.k2,
        }
    }

    /// Row of the axis matrix for evaluation cell `cell`.
    pub fn row(&self, factor: Factor, cell: usize) -> &[f64] {
        let c = match factor {
            Factor::First => self.c1,
            Factor::Second => self.c2,
        };
        &self.matrix(factor)[cell * c..(cell + 1) * c]
    }

    /// The adjoint kernel, with both axis matrices transposed.
    pub fn transposed(&self) -> SeparableKernel {
        let t = |k: &[f64], c: usize| {
            let mut out = vec![0.0; c * c];
            for i in 0..c {
                for j in 0..c {
                    out[j * c + i] = k[i * c + j];
                }
            }
            out
        };
        SeparableKernel {
            k1: t(&self.k1, self.c1),
            k2: t(&self.k2, self.c2),
            ..*self
        }
    }

    /// K1 · F · K2ᵀ, with F the cell values in row-major (i, j) order.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        let (c1, c2) = (self.c1, self.c2);
        if f.values().len() != c1 * c2 {
            return Err(Error::GridMismatch);
        }
        let fv = f.values();
        // T = F · K2ᵀ
        let mut t = vec![0.0; c1 * c2];
        t.par_chunks_mut(c2).enumerate().for_each(|(i, trow)| {
            let frow = &fv[i * c2..(i + 1) * c2];
            for (j, out) in trow.iter_mut().enumerate() {
                let krow = &self.k2[j * c2..(j + 1) * c2];
                *out = frow.iter().zip(krow).map(|(a, b)| a * b).sum();
            }
        });
        // out = K1 · T
        let mut out = vec![0.0; c1 * c2];
        out.par_chunks_mut(c2).enumerate().for_each(|(i, orow)| {
            let krow = &self.k1[i * c1..(i + 1) * c1];
            for (k, &w) in krow.iter().enumerate() {
                let trow = &t[k * c2..(k + 1) * c2];
                for (o, &v) in orow.iter_mut().zip(trow) {
                    *o += w * v;
                }
            }
        });
        Field::from_values(f.grid(), out)
    }
}

/// I_{αβ} f at every cell center.
pub fn fractional_integral(f: &Field, config: &ExponentConfig) -> Result<Field> {
    SeparableKernel::new(f.grid(), config)?.apply(f)
}

/// I_{αβ} f at an arbitrary point (x, y) of the domain.
pub fn fractional_integral_at(f: &Field, config: &ExponentConfig, x: &Coords, y: &Coords) -> Result<f64> {
    let grid = f.grid();
    check_dims(grid, config)?;
    let r1 = kernel_row(grid.first(), config.alpha(), x);
    let r2 = kernel_row(grid.second(), config.beta(), y);
    let c2 = r2.len();
    Ok(f.values()
        .chunks(c2)
        .zip(&r1)
        .map(|(row, &w)| w * row.iter().zip(&r2).map(|(a, b)| a * b).sum::<f64>())
        .sum())
}

/// Averages of `f` over every rectangle of the family, in family index order.
pub fn rectangle_averages(sums: &RectSums, family: &RectFamily) -> Vec<f64> {
    let y = family.cubes(Factor::Second);
    family
        .cubes(Factor::First)
        .par_iter()
        .flat_map_iter(|&qx| y.iter().map(move |&py| sums.average(&Rect::new(qx, py))))
        .collect()
}

/// Uncentered strong maximal function over the rectangles of `family`.
pub fn strong_maximal(f: &Field, family: &RectFamily) -> Result<Field> {
    let grid = f.grid();
    if family.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let sums = RectSums::new(f);
    let avg = rectangle_averages(&sums, family);
    let ny = family.cubes(Factor::Second).len();
    let c2 = grid.second().cell_count();
    let mut out = vec![0.0; grid.cell_count()];
    out.par_chunks_mut(c2).enumerate().for_each(|(i, row)| {
        let xs = family.containing(Factor::First, i);
        for (j, o) in row.iter_mut().enumerate() {
            let ys = family.containing(Factor::Second, j);
            let mut best = f64::NEG_INFINITY;
            for &qi in xs {
                let base = qi as usize * ny;
                for &pj in ys {
                    best = best.max(avg[base + pj as usize]);
                }
            }
            *o = best;
        }
    });
    Field::from_values(grid, out)
}

/// Maximal function along one factor with the other coordinate frozen.
pub fn partial_maximal(f: &Field, family: &RectFamily, factor: Factor) -> Result<Field> {
    let grid = f.grid();
    if family.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let sums = RectSums::new(f);
    let cubes = family.cubes(factor);
    let other = grid.factor(factor.other());
    let c2 = grid.second().cell_count();
    let mut out = vec![0.0; grid.cell_count()];
    out.par_chunks_mut(c2).enumerate().for_each(|(i, row)| {
        for (j, o) in row.iter_mut().enumerate() {
            let (cell, frozen) = match factor {
                Factor::First => (i, j),
                Factor::Second => (j, i),
            };
            let slice = Cube::single(other, frozen);
            let mut best = f64::NEG_INFINITY;
            for &k in family.containing(factor, cell) {
                let cube = cubes[k as usize];
                let rect = match factor {
                    Factor::First => Rect::new(cube, slice),
                    Factor::Second => Rect::new(slice, cube),
                };
                best = best.max(sums.average(&rect));
            }
            *o = best;
        }
    });
    Field::from_values(grid, out)
}

/// M₁: maximal function over first-factor cubes.
pub fn maximal_1(f: &Field, family: &RectFamily) -> Result<Field> {
    partial_maximal(f, family, Factor::First)
}

/// M₂: maximal function over second-factor cubes.
pub fn maximal_2(f: &Field, family: &RectFamily) -> Result<Field> {
    partial_maximal(f, family, Factor::Second)
}

/// Gf together with the slice norms it is built from.
#[derive(Clone, Debug)]
pub struct GTransform {
    /// Gf(i, j) = norm1[i] · norm2[j].
    pub field: Field,
    /// ‖σ M₁f(x_i, ·)‖_p for every first-factor cell i.
    pub norm1: Vec<f64>,
    /// ‖σ M₂f(·, y_j)‖_p for every second-factor cell j.
    pub norm2: Vec<f64>,
    /// ‖σ M₁f‖_p over the whole domain.
    pub total1: f64,
    /// ‖σ M₂f‖_p over the whole domain.
    pub total2: f64,
}

impl GTransform {
    /// Relative gap between ‖Gf‖_p^p and ‖σM₁f‖_p^p · ‖σM₂f‖_p^p.
    pub fn fubini_residual(&self, p: f64) -> Result<f64> {
        let lhs = self.field.lp_norm(p, None)?.powf(p);
        let rhs = self.total1.powf(p) * self.total2.powf(p);
        if lhs == 0.0 && rhs == 0.0 {
            return Ok(0.0);
        }
        Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()))
    }
}

pub fn g_transform(f: &Field, sigma: &Field, p: f64, family: &RectFamily) -> Result<GTransform> {
    f.check_same_grid(sigma)?;
    let grid = f.grid();
    let m1 = maximal_1(f, family)?;
    let m2 = maximal_2(f, family)?;
    let norm1: Vec<f64> = (0..grid.first().cell_count())
        .into_par_iter()
        .map(|i| m1.partial_lp_norm(p, sigma, Slice::at_first(i)))
        .collect::<Result<_>>()?;
    let norm2: Vec<f64> = (0..grid.second().cell_count())
        .into_par_iter()
        .map(|j| m2.partial_lp_norm(p, sigma, Slice::at_second(j)))
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(grid.cell_count());
    for &a in &norm1 {
        values.extend(norm2.iter().map(|&b| a * b));
    }
    Ok(GTransform {
        field: Field::from_values(grid, values)?,
        total1: m1.lp_norm(p, Some(sigma))?,
        total2: m2.lp_norm(p, Some(sigma))?,
        norm1,
        norm2,
    })
}
