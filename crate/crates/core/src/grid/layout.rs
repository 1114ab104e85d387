use super::exponents::Factor;
use crate::error::{Error, Result};

/// Largest supported dimension of a single factor.
pub const MAX_DIM: usize = 3;

/// Coordinates of a point in one factor; only the first `dim` entries are used.
pub type Coords = [f64; MAX_DIM];

/// Uniform tensor grid on the cube [−L, L]^d of one factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorGrid {
    dim: usize,
    half_width: f64,
    cells_per_axis: usize,
    cell_size: f64,
}

impl FactorGrid {
    pub fn new(dim: usize, half_width: f64, cells_per_axis: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::NonPositiveHalfWidth(half_width));
        }
        if !cells_per_axis.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(cells_per_axis));
        }
        Ok(FactorGrid {
            dim,
            half_width,
            cells_per_axis,
            cell_size: 2.0 * half_width / cells_per_axis as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_size.powi(self.dim as i32)
    }

    /// Center of the k-th cell along any axis; always an odd multiple of h/2.
    pub fn axis_center(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.cell_size
    }

    /// Left edge of the k-th cell along any axis.
    pub fn axis_edge(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.cell_size
    }

    /// Per-axis indices of a flattened (row-major) cell index.
    pub fn unflatten(&self, cell: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rest = cell;
        for a in (0..self.dim).rev() {
            idx[a] = rest % self.cells_per_axis;
            rest /= self.cells_per_axis;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx[..self.dim]
            .iter()
            .fold(0, |acc, &k| acc * self.cells_per_axis + k)
    }

    pub fn center(&self, cell: usize) -> Coords {
        let idx = self.unflatten(cell);
        let mut c = [0.0; MAX_DIM];
        for a in 0..self.dim {
            c[a] = self.axis_center(idx[a]);
        }
        c
    }

    /// Euclidean distance between two cell centers.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (ia, ib) = (self.unflatten(a), self.unflatten(b));
        let mut s = 0.0;
        for k in 0..self.dim {
            let d = (ia[k] as f64 - ib[k] as f64) * self.cell_size;
            s += d * d;
        }
        s.sqrt()
    }

    /// Axis index of the cell containing coordinate `x`, if inside the domain.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let t = (x + self.half_width) / self.cell_size;
        if t < 0.0 || t >= self.cells_per_axis as f64 {
            None
        } else {
            Some(t as usize)
        }
    }
}

/// Product grid [−L₁, L₁]ⁿ × [−L₂, L₂]ᵐ. Cell (i, j) has flat index i·c₂ + j.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    first: FactorGrid,
    second: FactorGrid,
}

impl Grid {
    pub fn new(dims: [usize; 2], half_widths: [f64; 2], cells_per_axis: [usize; 2]) -> Result<Self> {
        Ok(Grid {
            first: FactorGrid::new(dims[0], half_widths[0], cells_per_axis[0])?,
            second: FactorGrid::new(dims[1], half_widths[1], cells_per_axis[1])?,
        })
    }

    pub fn from_factors(first: FactorGrid, second: FactorGrid) -> Self {
        Grid { first, second }
    }

    pub fn factor(&self, factor: Factor) -> &FactorGrid {
        match factor {
            Factor::First => &self.first,
            Factor::Second => &self.second,
        }
    }

    pub fn first(&self) -> &FactorGrid {
        &self.first
    }

    pub fn second(&self) -> &FactorGrid {
        &self.second
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.first.dim, self.second.dim]
    }

    pub fn cell_count(&self) -> usize {
        self.first.cell_count() * self.second.cell_count()
    }

    pub fn cell_volume(&self) -> f64 {
        self.first.cell_volume() * self.second.cell_volume()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.second.cell_count() + j
    }

    pub fn split_index(&self, cell: usize) -> (usize, usize) {
        let c2 = self.second.cell_count();
        (cell / c2, cell % c2)
    }

    /// The same domain with every axis refined by `factor` (a power of two).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Grid::new(
            self.dims(),
            [self.first.half_width, self.second.half_width],
            [
                self.first.cells_per_axis * factor,
                self.second.cells_per_axis * factor,
            ],
        )
    }
}

/// Builds the product grid; errors on non-power-of-two counts or nonpositive widths.
pub fn make_grid(dims: [usize; 2], half_widths: [f64; 2], cells_per_axis: [usize; 2]) -> Result<Grid> {
    Grid::new(dims, half_widths, cells_per_axis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_sizes_and_centers() {
        let g = FactorGrid::new(1, 1.0, 2).unwrap();
        assert_eq!(g.cell_size(), 1.0);
        assert_eq!(g.axis_center(0), -0.5);
        assert_eq!(g.axis_center(1), 0.5);
        assert_eq!(FactorGrid::new(1, 1.0, 4).unwrap().cell_size(), 0.5);
        let g = FactorGrid::new(1, 2.0, 8).unwrap();
        assert_eq!(g.cell_size(), 0.5);
        assert_eq!(g.axis_center(0), -1.75);
        assert_eq!(g.cell_size() * g.cells_per_axis() as f64, 2.0 * g.half_width());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(make_grid([1, 1], [1.0, 1.0], [3, 4]), Err(Error::NotPowerOfTwo(3))));
        assert!(matches!(make_grid([1, 1], [1.0, 1.0], [0, 4]), Err(Error::NotPowerOfTwo(0))));
        assert!(matches!(
            make_grid([1, 1], [0.0, 1.0], [4, 4]),
            Err(Error::NonPositiveHalfWidth(_))
        ));
        assert!(make_grid([4, 1], [1.0, 1.0], [4, 4]).is_err());
    }

    #[test]
    fn centers_avoid_hyperplanes() {
        let g = FactorGrid::new(2, 3.0, 16).unwrap();
        for cell in 0..g.cell_count() {
            let c = g.center(cell);
            assert!(c[0] != 0.0 && c[1] != 0.0);
        }
    }

    #[test]
    fn flatten_round_trip() {
        let g = FactorGrid::new(3, 1.0, 4).unwrap();
        for cell in 0..g.cell_count() {
            assert_eq!(g.flatten(&g.unflatten(cell)), cell);
        }
        assert_eq!(g.unflatten(1), [0, 0, 1]);
    }
}
