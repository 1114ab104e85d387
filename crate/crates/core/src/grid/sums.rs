use super::family::Rect;
use super::field::Field;
use super::layout::{Grid, MAX_DIM};
use crate::exact::{add_assign, sub_assign, FixedFormat, MAX_LIMBS};

const MAX_AXES: usize = 2 * MAX_DIM;

/// Summed-area table over all axes of a product grid, held in exact fixed point.
///
/// Rectangle sums are correctly rounded, so they agree bit for bit with a
/// direct exact summation over the cells of the rectangle.
#[derive(Clone, Debug)]
pub struct RectSums {
    grid: Grid,
    format: FixedFormat,
    axes: usize,
    /// Table extent along each axis (cells + 1).
    extent: usize,
    strides: [usize; MAX_AXES],
    table: Vec<u64>,
}

impl RectSums {
    pub fn new(field: &Field) -> Self {
        let grid = *field.grid();
        let [n, m] = grid.dims();
        let (n1, n2) = (grid.first().cells_per_axis(), grid.second().cells_per_axis());
        // one extent for all axes keeps indexing simple; unused slack only when n1 != n2
        let extent = n1.max(n2) + 1;
        let axes = n + m;
        let mut strides = [0; MAX_AXES];
        let mut s = 1;
        for a in (0..axes).rev() {
            strides[a] = s;
            s *= extent;
        }
        let format = FixedFormat::for_values(field.values(), field.values().len());
        let l = format.limbs();
        let mut table = vec![0u64; s * l];

        let mut cell = vec![0u64; l];
        for (k, &v) in field.values().iter().enumerate() {
            let (i, j) = grid.split_index(k);
            let ix = grid.first().unflatten(i);
            let jx = grid.second().unflatten(j);
            let mut pos = 0;
            for a in 0..n {
                pos += (ix[a] + 1) * strides[a];
            }
            for b in 0..m {
                pos += (jx[b] + 1) * strides[n + b];
            }
            format.encode(v, &mut cell);
            table[pos * l..(pos + 1) * l].copy_from_slice(&cell);
        }

        // cumulate along each axis in turn
        let mut prev = vec![0u64; l];
        for &stride in strides.iter().take(axes) {
            for pos in 0..s {
                if (pos / stride) % extent == 0 {
                    continue;
                }
                let src = pos - stride;
                prev.copy_from_slice(&table[src * l..(src + 1) * l]);
                add_assign(&mut table[pos * l..(pos + 1) * l], &prev);
            }
        }

        RectSums {
            grid,
            format,
            axes,
            extent,
            strides,
            table,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Correctly rounded sum of the cell values in `rect`.
    pub fn sum(&self, rect: &Rect) -> f64 {
        let [n, _] = self.grid.dims();
        let mut lo = [0usize; MAX_AXES];
        let mut hi = [0usize; MAX_AXES];
        for a in 0..self.axes {
            let (l, h) = if a < n {
                rect.x.range(a)
            } else {
                rect.y.range(a - n)
            };
            debug_assert!(h + 1 < self.extent);
            lo[a] = l;
            hi[a] = h + 1;
        }
        let l = self.format.limbs();
        let mut acc = [0u64; MAX_LIMBS];
        let acc = &mut acc[..l];
        for corner in 0..(1usize << self.axes) {
            let mut pos = 0;
            for a in 0..self.axes {
                let k = if corner >> a & 1 == 1 { lo[a] } else { hi[a] };
                pos += k * self.strides[a];
            }
            let entry = &self.table[pos * l..(pos + 1) * l];
            if corner.count_ones() % 2 == 0 {
                add_assign(acc, entry);
            } else {
                sub_assign(acc, entry);
            }
        }
        self.format.decode(acc)
    }

    /// Cell-count average: the correctly rounded sum divided by the number of cells.
    pub fn average(&self, rect: &Rect) -> f64 {
        self.sum(rect) / rect.cell_count() as f64
    }

    /// Midpoint-rule integral over `rect`.
    pub fn integral(&self, rect: &Rect) -> f64 {
        self.sum(rect) * self.grid.cell_volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_sum;
    use crate::grid::{make_grid, rectangle_family, FamilyMode};
    use proptest::prelude::*;

    fn direct_sum(field: &Field, rect: &Rect) -> f64 {
        let g = field.grid();
        let mut vals = Vec::new();
        for i in rect.x.cells(g.first()) {
            for j in rect.y.cells(g.second()) {
                vals.push(field.get(i, j));
            }
        }
        exact_sum(vals)
    }

    #[test]
    fn mixed_dimensions_match_direct_sums() {
        for (dims, cells) in [([1, 1], [8, 4]), ([1, 2], [4, 4]), ([2, 1], [2, 4]), ([2, 2], [4, 2])] {
            let g = make_grid(dims, [1.0, 2.0], cells).unwrap();
            let f = Field::sample(&g, |x, y| (1.3 + x[0]).powi(3) * (2.1 - y[0] + x[1] * y[1]).exp()).unwrap();
            let sums = RectSums::new(&f);
            for r in rectangle_family(&g, FamilyMode::All).unwrap() {
                assert_eq!(sums.sum(&r), direct_sum(&f, &r), "{r}");
            }
        }
    }

    proptest! {
        #[test]
        fn prefix_sums_are_bit_exact(vals in prop::collection::vec(
            prop_oneof![Just(0.0), 1e-8f64..1e-3, 0.1f64..10.0, 1e3f64..1e8], 64)) {
            let g = make_grid([1, 1], [1.0, 1.0], [8, 8]).unwrap();
            let f = Field::from_values(&g, vals).unwrap();
            let sums = RectSums::new(&f);
            for r in rectangle_family(&g, FamilyMode::All).unwrap() {
                prop_assert_eq!(sums.sum(&r), direct_sum(&f, &r));
            }
        }
    }
}
