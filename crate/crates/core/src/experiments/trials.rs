use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{Coords, FactorGrid, Field, Grid};
use crate::weights::{random_omega, random_sigma, WeightFn};

use super::config::{ExperimentConfig, InputSpec, WeightSpec};

/// Seed of trial `trial`: the first draw of stream `trial` of the base generator.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(trial as u64);
    rng.next_u64()
}

/// `height` on the box `lo ≤ x < hi`, `lo ≤ y < hi` (per axis), zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub lo: [Coords; 2],
    pub hi: [Coords; 2],
    pub height: f64,
}

impl Bump {
    fn contains(&self, x: &Coords, y: &Coords) -> bool {
        (0..3).all(|d| {
            self.lo[0][d] <= x[d] && x[d] < self.hi[0][d] && self.lo[1][d] <= y[d] && y[d] < self.hi[1][d]
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InputFn {
    Constant(f64),
    Bumps(Vec<Bump>),
}

impl InputFn {
    pub fn eval(&self, x: &Coords, y: &Coords) -> f64 {
        match self {
            InputFn::Constant(c) => *c,
            InputFn::Bumps(bs) => bs.iter().filter(|b| b.contains(x, y)).map(|b| b.height).sum(),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        Field::sample(grid, |x, y| self.eval(x, y))
    }
}

fn random_box<R: Rng>(rng: &mut R, g: &FactorGrid) -> (Coords, Coords) {
    let n = g.cells_per_axis();
    let (mut lo, mut hi) = ([0.0; 3], [0.0; 3]);
    for d in 0..3 {
        if d < g.dim() {
            let len = rng.gen_range(1..=(n / 2).max(1));
            let start = rng.gen_range(0..=n - len);
            lo[d] = g.axis_edge(start);
            hi[d] = g.axis_edge(start + len);
        } else {
            lo[d] = f64::NEG_INFINITY;
            hi[d] = f64::INFINITY;
        }
    }
    (lo, hi)
}

/// 1 to 5 bumps with edges on cell boundaries of `coarse` and heights log-uniform in [1e−2, 1e2].
pub fn random_input<R: Rng>(rng: &mut R, coarse: &Grid) -> InputFn {
    let count = rng.gen_range(1..=5);
    let bumps = (0..count)
        .map(|_| {
            let (x0, x1) = random_box(rng, coarse.first());
            let (y0, y1) = random_box(rng, coarse.second());
            Bump {
                lo: [x0, y0],
                hi: [x1, y1],
                height: 10f64.powf(rng.gen_range(-2.0..=2.0)),
            }
        })
        .collect();
    InputFn::Bumps(bumps)
}

/// Everything a trial draws, as functions independent of the resolution.
#[derive(Clone, Debug)]
pub struct TrialSample {
    pub trial: usize,
    pub seed: u64,
    pub omega: WeightFn,
    pub sigma: WeightFn,
    pub input: InputFn,
}

pub fn trial_sample(cfg: &ExperimentConfig, trial: usize) -> Result<TrialSample> {
    let seed = trial_seed(cfg.seed, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = match &cfg.sigma {
        WeightSpec::Random => random_sigma(&mut rng, &cfg.exponents),
        WeightSpec::Fixed(w) => w.clone(),
    };
    let omega = match &cfg.omega {
        WeightSpec::Random => random_omega(&mut rng, &sigma),
        WeightSpec::Fixed(w) => w.clone(),
    };
    let input = match cfg.input {
        InputSpec::Random => random_input(&mut rng, &cfg.grid(0)?),
        InputSpec::Constant(c) => InputFn::Constant(c),
    };
    Ok(TrialSample {
        trial,
        seed,
        omega,
        sigma,
        input,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn seeds_differ_per_trial_and_repeat() {
        assert_eq!(trial_seed(5, 3), trial_seed(5, 3));
        assert_ne!(trial_seed(5, 3), trial_seed(5, 4));
        assert_ne!(trial_seed(5, 3), trial_seed(6, 3));
    }

    #[test]
    fn bumps_are_constant_on_coarse_cells() {
        let coarse = make_grid([1, 1], [4.0, 4.0], [8, 8]).unwrap();
        let fine = coarse.refined(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let f = random_input(&mut rng, &coarse);
            let InputFn::Bumps(bs) = &f else { unreachable!() };
            assert!((1..=5).contains(&bs.len()));
            assert!(bs.iter().all(|b| (1e-2..=1e2).contains(&b.height)));
            let v = f.sample(&fine).unwrap();
            assert!(v.max() > 0.0);
            for i in 0..32 {
                for j in 0..32 {
                    assert_eq!(v.get(i, j), v.get(i / 4 * 4, j / 4 * 4));
                }
            }
        }
    }

    #[test]
    fn multi_dimensional_boxes() {
        let coarse = make_grid([2, 1], [1.0, 1.0], [4, 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_input(&mut rng, &coarse);
        assert!(f.sample(&coarse).unwrap().max() > 0.0);
    }
}
