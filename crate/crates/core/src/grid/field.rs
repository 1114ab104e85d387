use super::exponents::Factor;
use super::family::Rect;
use super::layout::{Coords, Grid};
use crate::error::{Error, Result};
use crate::exact::{exact_sum, ExactSum};

/// Piecewise-constant sampled function: one value per cell of a product grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    nonnegative: bool,
}

/// Fixes one factor at a given cell, leaving a one-factor slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slice {
    pub fixed: Factor,
    pub index: usize,
}

impl Slice {
    /// The slice {x = x_i}, running over the second factor.
    pub fn at_first(index: usize) -> Self {
        Slice {
            fixed: Factor::First,
            index,
        }
    }

    /// The slice {y = y_j}, running over the first factor.
    pub fn at_second(index: usize) -> Self {
        Slice {
            fixed: Factor::Second,
            index,
        }
    }
}

impl Field {
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::GridMismatch);
        }
        if let Some((cell, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteSample { cell, value });
        }
        let nonnegative = values.iter().all(|&v| v >= 0.0);
        Ok(Field {
            grid: *grid,
            values,
            nonnegative,
        })
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Field::from_values(grid, vec![c; grid.cell_count()]).expect("finite constant")
    }

    pub fn zeros(grid: &Grid) -> Self {
        Field::constant(grid, 0.0)
    }

    /// Evaluates `expr(x, y)` at every cell center.
    pub fn sample<F>(grid: &Grid, expr: F) -> Result<Self>
    where
        F: Fn(&Coords, &Coords) -> f64,
    {
        let (g1, g2) = (grid.first(), grid.second());
        let ys: Vec<Coords> = (0..g2.cell_count()).map(|j| g2.center(j)).collect();
        let mut values = Vec::with_capacity(grid.cell_count());
        for i in 0..g1.cell_count() {
            let x = g1.center(i);
            values.extend(ys.iter().map(|y| expr(&x, y)));
        }
        Field::from_values(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Field> {
        Field::from_values(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Result<Field> {
        self.check_same_grid(other)?;
        Field::from_values(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Result<Field> {
        self.map(|v| c * v)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn powf(&self, e: f64) -> Result<Field> {
        self.map(|v| v.powf(e))
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Errors unless every value is strictly positive.
    pub fn require_positive(&self) -> Result<()> {
        match self.values.iter().enumerate().find(|(_, &v)| v.is_nan() || v <= 0.0) {
            Some((cell, &value)) => Err(Error::NonPositiveWeight { cell, value }),
            None => Ok(()),
        }
    }

    pub fn require_nonnegative(&self) -> Result<()> {
        match self.values.iter().enumerate().find(|(_, &v)| v < 0.0) {
            Some((cell, &value)) => Err(Error::NegativeValue { cell, value }),
            None => Ok(()),
        }
    }

    /// Midpoint-rule integral over a rectangle (correctly rounded cell sum times cell volume).
    pub fn integrate(&self, rect: &Rect) -> Result<f64> {
        if !rect.fits(&self.grid) {
            return Err(Error::RectOutOfBounds);
        }
        let (g1, g2) = (self.grid.first(), self.grid.second());
        let mut acc = ExactSum::new();
        for i in rect.x.cells(g1) {
            let row = &self.values[self.grid.index(i, 0)..];
            acc.extend(rect.y.cells(g2).map(|j| row[j]));
        }
        Ok(acc.value() * self.grid.cell_volume())
    }

    pub fn integrate_all(&self) -> f64 {
        exact_sum(self.values.iter().copied()) * self.grid.cell_volume()
    }

    /// (Σ |f·w|^p · cell volume)^{1/p} over the whole grid; `weight` defaults to 1.
    pub fn lp_norm(&self, p: f64, weight: Option<&Field>) -> Result<f64> {
        let sum = match weight {
            Some(w) => {
                self.check_same_grid(w)?;
                exact_sum(self.values.iter().zip(&w.values).map(|(&f, &w)| (f * w).abs().powf(p)))
            }
            None => exact_sum(self.values.iter().map(|&f| f.abs().powf(p))),
        };
        Ok((sum * self.grid.cell_volume()).powf(1.0 / p))
    }

    /// One-factor L^p norm of f·w along the free factor of `slice`.
    pub fn partial_lp_norm(&self, p: f64, weight: &Field, slice: Slice) -> Result<f64> {
        self.check_same_grid(weight)?;
        let fixed = self.grid.factor(slice.fixed);
        let free = self.grid.factor(slice.fixed.other());
        if slice.index >= fixed.cell_count() {
            return Err(Error::SliceOutOfRange {
                index: slice.index,
                len: fixed.cell_count(),
            });
        }
        let cell = |k: usize| match slice.fixed {
            Factor::First => self.grid.index(slice.index, k),
            Factor::Second => self.grid.index(k, slice.index),
        };
        let sum = exact_sum((0..free.cell_count()).map(|k| {
            let c = cell(k);
            (self.values[c] * weight.values[c]).abs().powf(p)
        }));
        Ok((sum * free.cell_volume()).powf(1.0 / p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Cube};
    use proptest::prelude::*;

    fn unit_grid(cells: usize) -> Grid {
        make_grid([1, 1], [1.0, 1.0], [cells, cells]).unwrap()
    }

    #[test]
    fn sampling_at_centers() {
        let g = unit_grid(2);
        let f = Field::sample(&g, |x, _| x[0].abs()).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.5));
        assert!(f.is_nonnegative());
        let bad = Field::sample(&g, |x, _| 1.0 / (x[0] + 0.5));
        assert!(matches!(bad, Err(Error::NonFiniteSample { .. })));
    }

    #[test]
    fn integrals() {
        let g = unit_grid(2);
        let f = Field::sample(&g, |x, _| x[0].abs()).unwrap();
        assert_eq!(f.integrate(&Rect::full(&g)).unwrap(), 2.0);
        let g4 = unit_grid(4);
        let three = Field::constant(&g4, 3.0);
        assert_eq!(three.integrate(&Rect::single_cell(&g4, 1, 2)).unwrap(), 0.75);
        let one = Field::constant(&make_grid([1, 1], [0.5, 0.5], [4, 4]).unwrap(), 1.0);
        assert_eq!(one.integrate(&Rect::full(one.grid())).unwrap(), 1.0);
    }

    #[test]
    fn norms() {
        let g = make_grid([1, 1], [0.5, 0.5], [2, 2]).unwrap();
        assert_eq!(Field::constant(&g, 3.0).lp_norm(2.0, None).unwrap(), 3.0);
        assert_eq!(Field::zeros(&g).lp_norm(2.0, None).unwrap(), 0.0);
        let bump = Field::from_values(&g, vec![2.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(bump.lp_norm(2.0, None).unwrap(), 1.0);
    }

    #[test]
    fn slice_norms() {
        let g = unit_grid(4);
        let ones = Field::constant(&g, 1.0);
        let c = Field::constant(&g, 1.5);
        let n = c.partial_lp_norm(2.0, &ones, Slice::at_first(3)).unwrap();
        assert!((n - 1.5 * 2f64.sqrt()).abs() < 1e-15);
        let g2 = unit_grid(2);
        let f = Field::from_values(&g2, vec![1.0, 2.0, 5.0, 7.0]).unwrap();
        let w = Field::constant(&g2, 1.0);
        assert_eq!(f.partial_lp_norm(1.0, &w, Slice::at_first(0)).unwrap(), 3.0);
        assert_eq!(f.partial_lp_norm(1.0, &w, Slice::at_second(1)).unwrap(), 9.0);
        assert!(matches!(
            f.partial_lp_norm(1.0, &w, Slice::at_second(2)),
            Err(Error::SliceOutOfRange { index: 2, len: 2 })
        ));
    }

    proptest! {
        #[test]
        fn integral_is_additive(vals in prop::collection::vec(0.0f64..10.0, 64), cut in 1usize..8) {
            let g = unit_grid(8);
            let f = Field::from_values(&g, vals).unwrap();
            let full = Cube::interval(0, 7);
            let left = Rect::new(Cube::interval(0, cut - 1), full);
            let right = Rect::new(Cube::interval(cut, 7), full);
            let whole = f.integrate(&Rect::full(&g)).unwrap();
            let parts = f.integrate(&left).unwrap() + f.integrate(&right).unwrap();
            prop_assert!((whole - parts).abs() <= 1e-13 * whole.max(1.0));
        }

        #[test]
        fn norm_is_homogeneous(vals in prop::collection::vec(-5.0f64..5.0, 16), c in -4.0f64..4.0, p in 1.0f64..5.0) {
            let g = unit_grid(4);
            let f = Field::from_values(&g, vals).unwrap();
            let a = f.scale(c).unwrap().lp_norm(p, None).unwrap();
            let b = c.abs() * f.lp_norm(p, None).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }

        #[test]
        fn norm_is_monotone(vals in prop::collection::vec(0.0f64..5.0, 16), bumps in prop::collection::vec(0.0f64..1.0, 16)) {
            let g = unit_grid(4);
            let f = Field::from_values(&g, vals.clone()).unwrap();
            let h = Field::from_values(&g, vals.iter().zip(&bumps).map(|(a, b)| a + b).collect()).unwrap();
            prop_assert!(f.lp_norm(3.0, None).unwrap() <= h.lp_norm(3.0, None).unwrap());
        }
    }
}
