use std::fmt;
use std::str::FromStr;

use super::exponents::Factor;
use super::layout::{FactorGrid, Grid, MAX_DIM};
use crate::error::{Error, Result};

/// Largest cells-per-axis count for which the exhaustive family is allowed.
pub const ALL_FAMILY_LIMIT: usize = 16;

/// Axis-aligned cube of cells in one factor: `side` cells along every axis,
/// starting at `origin`. In one dimension this is an inclusive index interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cube {
    dim: usize,
    origin: [usize; MAX_DIM],
    side: usize,
}

impl Cube {
    pub fn new(dim: usize, origin: &[usize], side: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim) && side >= 1);
        let mut o = [0; MAX_DIM];
        o[..dim].copy_from_slice(&origin[..dim]);
        Cube { dim, origin: o, side }
    }

    /// Inclusive one-dimensional interval [lo, hi].
    pub fn interval(lo: usize, hi: usize) -> Self {
        assert!(hi >= lo);
        Cube::new(1, &[lo], hi - lo + 1)
    }

    /// The cube made of a single cell.
    pub fn single(grid: &FactorGrid, cell: usize) -> Self {
        Cube::new(grid.dim(), &grid.unflatten(cell), 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> &[usize] {
        &self.origin[..self.dim]
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Inclusive index range along `axis`.
    pub fn range(&self, axis: usize) -> (usize, usize) {
        (self.origin[axis], self.origin[axis] + self.side - 1)
    }

    pub fn cell_count(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn fits(&self, grid: &FactorGrid) -> bool {
        self.dim == grid.dim()
            && self.origin[..self.dim]
                .iter()
                .all(|&o| o + self.side <= grid.cells_per_axis())
    }

    pub fn contains(&self, grid: &FactorGrid, cell: usize) -> bool {
        let idx = grid.unflatten(cell);
        (0..self.dim).all(|a| idx[a] >= self.origin[a] && idx[a] < self.origin[a] + self.side)
    }

    /// Flattened indices of the cells of the cube, in increasing order.
    pub fn cells<'a>(&self, grid: &'a FactorGrid) -> impl Iterator<Item = usize> + 'a {
        let cube = *self;
        (0..cube.cell_count()).map(move |k| {
            let mut idx = [0; MAX_DIM];
            let mut rest = k;
            for a in (0..cube.dim).rev() {
                idx[a] = cube.origin[a] + rest % cube.side;
                rest /= cube.side;
            }
            grid.flatten(&idx)
        })
    }

    /// Lebesgue measure of the cube.
    pub fn volume(&self, grid: &FactorGrid) -> f64 {
        self.cell_count() as f64 * grid.cell_volume()
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in 0..self.dim {
            if a > 0 {
                write!(f, "x")?;
            }
            let (lo, hi) = self.range(a);
            write!(f, "[{lo}..{hi}]")?;
        }
        Ok(())
    }
}

/// Rectangle Q × P of the product grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: Cube,
    pub y: Cube,
}

impl Rect {
    pub fn new(x: Cube, y: Cube) -> Self {
        Rect { x, y }
    }

    pub fn cube(&self, factor: Factor) -> &Cube {
        match factor {
            Factor::First => &self.x,
            Factor::Second => &self.y,
        }
    }

    pub fn single_cell(grid: &Grid, i: usize, j: usize) -> Self {
        Rect {
            x: Cube::single(grid.first(), i),
            y: Cube::single(grid.second(), j),
        }
    }

    /// The whole domain.
    pub fn full(grid: &Grid) -> Self {
        let f = grid.first();
        let s = grid.second();
        Rect {
            x: Cube::new(f.dim(), &[0; MAX_DIM], f.cells_per_axis()),
            y: Cube::new(s.dim(), &[0; MAX_DIM], s.cells_per_axis()),
        }
    }

    pub fn cell_count(&self) -> usize {
        self.x.cell_count() * self.y.cell_count()
    }

    pub fn fits(&self, grid: &Grid) -> bool {
        self.x.fits(grid.first()) && self.y.fits(grid.second())
    }

    pub fn contains(&self, grid: &Grid, i: usize, j: usize) -> bool {
        self.x.contains(grid.first(), i) && self.y.contains(grid.second(), j)
    }

    pub fn volume(&self, grid: &Grid) -> f64 {
        self.x.volume(grid.first()) * self.y.volume(grid.second())
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.x, self.y)
    }
}

/// Which rectangles a supremum or maximal function ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyMode {
    /// Aligned power-of-two cubes in each factor.
    Dyadic,
    /// Dyadic cubes plus copies shifted by half a side.
    DyadicShifted,
    /// Every cube; oracle grids only.
    All,
}

impl FamilyMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyMode::Dyadic => "dyadic",
            FamilyMode::DyadicShifted => "dyadic_shifted",
            FamilyMode::All => "all",
        }
    }
}

impl fmt::Display for FamilyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dyadic" => Ok(FamilyMode::Dyadic),
            "dyadic_shifted" => Ok(FamilyMode::DyadicShifted),
            "all" => Ok(FamilyMode::All),
            other => Err(Error::Config(format!("unknown family mode `{other}`"))),
        }
    }
}

/// All cubes of one factor for the given mode, ordered by side then origin.
pub fn factor_family(grid: &FactorGrid, mode: FamilyMode) -> Result<Vec<Cube>> {
    let n = grid.cells_per_axis();
    if mode == FamilyMode::All && n > ALL_FAMILY_LIMIT {
        return Err(Error::FamilyTooLarge(n));
    }
    let sides: Vec<usize> = match mode {
        FamilyMode::All => (1..=n).collect(),
        _ => (0..=n.trailing_zeros()).map(|k| 1usize << k).collect(),
    };
    let d = grid.dim();
    let mut cubes = Vec::new();
    for side in sides {
        let step = match mode {
            FamilyMode::Dyadic => side,
            FamilyMode::DyadicShifted => (side / 2).max(1),
            FamilyMode::All => 1,
        };
        let starts: Vec<usize> = (0..=n - side).step_by(step).collect();
        let total = starts.len().pow(d as u32);
        for k in 0..total {
            let mut origin = [0; MAX_DIM];
            let mut rest = k;
            for a in (0..d).rev() {
                origin[a] = starts[rest % starts.len()];
                rest /= starts.len();
            }
            cubes.push(Cube::new(d, &origin, side));
        }
    }
    Ok(cubes)
}

/// Product family of rectangles Q × P. Rectangle index = qi · |P-family| + pj.
#[derive(Clone, Debug)]
pub struct RectFamily {
    mode: FamilyMode,
    grid: Grid,
    x: Vec<Cube>,
    y: Vec<Cube>,
    x_containing: Vec<Vec<u32>>,
    y_containing: Vec<Vec<u32>>,
}

fn containing_lists(grid: &FactorGrid, cubes: &[Cube]) -> Vec<Vec<u32>> {
    let mut lists = vec![Vec::new(); grid.cell_count()];
    for (k, cube) in cubes.iter().enumerate() {
        for cell in cube.cells(grid) {
            lists[cell].push(k as u32);
        }
    }
    lists
}

impl RectFamily {
    pub fn new(grid: &Grid, mode: FamilyMode) -> Result<Self> {
        let x = factor_family(grid.first(), mode)?;
        let y = factor_family(grid.second(), mode)?;
        Ok(Self::from_cubes(grid, mode, x, y))
    }

    pub fn from_cubes(grid: &Grid, mode: FamilyMode, x: Vec<Cube>, y: Vec<Cube>) -> Self {
        let x_containing = containing_lists(grid.first(), &x);
        let y_containing = containing_lists(grid.second(), &y);
        RectFamily {
            mode,
            grid: *grid,
            x,
            y,
            x_containing,
            y_containing,
        }
    }

    pub fn mode(&self) -> FamilyMode {
        self.mode
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cubes(&self, factor: Factor) -> &[Cube] {
        match factor {
            Factor::First => &self.x,
            Factor::Second => &self.y,
        }
    }

    /// Indices (into `cubes(factor)`) of the cubes containing `cell`.
    pub fn containing(&self, factor: Factor, cell: usize) -> &[u32] {
        match factor {
            Factor::First => &self.x_containing[cell],
            Factor::Second => &self.y_containing[cell],
        }
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rect(&self, index: usize) -> Rect {
        let ny = self.y.len();
        Rect::new(self.x[index / ny], self.y[index % ny])
    }

    pub fn rects(&self) -> impl Iterator<Item = Rect> + '_ {
        self.x
            .iter()
            .flat_map(move |&qx| self.y.iter().map(move |&py| Rect::new(qx, py)))
    }

    /// Whether every single-cell rectangle belongs to the family.
    pub fn contains_single_cells(&self) -> bool {
        let has = |grid: &FactorGrid, cubes: &[Cube]| {
            cubes.iter().filter(|c| c.side() == 1).count() == grid.cell_count()
        };
        has(self.grid.first(), &self.x) && has(self.grid.second(), &self.y)
    }
}

/// Every rectangle of the requested family, in index order.
pub fn rectangle_family(grid: &Grid, mode: FamilyMode) -> Result<Vec<Rect>> {
    Ok(RectFamily::new(grid, mode)?.rects().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn axis(n: usize) -> FactorGrid {
        FactorGrid::new(1, 1.0, n).unwrap()
    }

    #[test]
    fn dyadic_intervals_on_four_cells() {
        let fam = factor_family(&axis(4), FamilyMode::Dyadic).unwrap();
        let expected = [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (2, 3), (0, 3)];
        let got: Vec<_> = fam.iter().map(|c| c.range(0)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn family_counts() {
        assert_eq!(factor_family(&axis(4), FamilyMode::All).unwrap().len(), 10);
        let g = make_grid([1, 1], [1.0, 1.0], [2, 2]).unwrap();
        assert_eq!(rectangle_family(&g, FamilyMode::Dyadic).unwrap().len(), 9);
        let shifted = factor_family(&axis(4), FamilyMode::DyadicShifted).unwrap();
        assert_eq!(shifted.len(), 8);
    }

    #[test]
    fn all_family_is_limited() {
        let g = make_grid([1, 1], [1.0, 1.0], [32, 4]).unwrap();
        assert!(matches!(RectFamily::new(&g, FamilyMode::All), Err(Error::FamilyTooLarge(32))));
    }

    #[test]
    fn families_are_nested_and_hold_single_cells() {
        for (dims, cells) in [([1, 1], [16, 8]), ([1, 2], [8, 4]), ([2, 2], [4, 4])] {
            let g = make_grid(dims, [1.0, 1.0], cells).unwrap();
            let fams: Vec<RectFamily> = [FamilyMode::Dyadic, FamilyMode::DyadicShifted, FamilyMode::All]
                .iter()
                .map(|&m| RectFamily::new(&g, m).unwrap())
                .collect();
            for f in &fams {
                assert!(f.contains_single_cells());
                assert!(f.rects().all(|r| r.fits(&g)));
            }
            for w in fams.windows(2) {
                let big: std::collections::HashSet<Rect> = w[1].rects().collect();
                assert!(w[0].rects().all(|r| big.contains(&r)));
            }
        }
    }

    #[test]
    fn cube_cells_in_two_dimensions() {
        let g = FactorGrid::new(2, 1.0, 4).unwrap();
        let c = Cube::new(2, &[1, 2], 2);
        let cells: Vec<_> = c.cells(&g).collect();
        assert_eq!(cells, vec![6, 7, 10, 11]);
        assert!(cells.iter().all(|&k| c.contains(&g, k)));
        assert_eq!(c.to_string(), "[1..2]x[2..3]");
    }
}
