use crate::characteristics::{a_m_pq, a_pq};
use crate::error::{Error, Result};
use crate::grid::{ExponentConfig, Factor, FamilyMode, Field, Grid, RectFamily, RectSums};
use crate::hedberg::HedbergContext;
use crate::operators::{g_transform, maximal_1, maximal_2, strong_maximal};
use crate::oracle::{
    brute_a_p_cross, brute_averaged_characteristic, brute_cubes, brute_g_transform, brute_partial_maximal,
    brute_reverse_doubling, brute_strong_maximal, fixture_fields, fixture_grids, rational_sum,
};
use crate::weights::{a_p_cross_characteristic, reverse_doubling_epsilon, WeightPair};

pub const MODULES: &[&str] = &["grid", "operators", "weights", "characteristics", "hedberg"];

const MODES: [FamilyMode; 3] = [FamilyMode::Dyadic, FamilyMode::DyadicShifted, FamilyMode::All];

/// Pass count of one named cross-check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleCheck {
    pub name: String,
    pub passed: usize,
    pub total: usize,
}

impl OracleCheck {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Default)]
struct Tally(Vec<OracleCheck>);

impl Tally {
    fn record(&mut self, name: &str, pass: bool) {
        let entry = match self.0.iter().position(|c| c.name == name) {
            Some(k) => &mut self.0[k],
            None => {
                self.0.push(OracleCheck {
                    name: name.to_string(),
                    passed: 0,
                    total: 0,
                });
                self.0.last_mut().unwrap()
            }
        };
        entry.total += 1;
        entry.passed += usize::from(pass);
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn cases() -> Vec<(Grid, Field)> {
    fixture_grids()
        .into_iter()
        .flat_map(|g| fixture_fields(&g).into_iter().map(move |f| (g, f)))
        .collect()
}

fn positive(f: &Field) -> Result<Field> {
    f.map(|v| if v > 0.0 { v } else { 0.5 })
}

fn grid_checks(t: &mut Tally) -> Result<()> {
    for (g, f) in cases() {
        let sums = RectSums::new(&f);
        for mode in MODES {
            let fam = RectFamily::new(&g, mode)?;
            let bx = brute_cubes(g.first(), mode).len();
            let by = brute_cubes(g.second(), mode).len();
            t.record("family_size", fam.len() == bx * by);
            let ok = fam.rects().all(|r| {
                let direct = rational_sum(r.x.cells(g.first()).flat_map(|i| {
                    let f = &f;
                    let g = &g;
                    r.y.cells(g.second()).map(move |j| f.get(i, j))
                }));
                sums.sum(&r) == direct
            });
            t.record("rectangle_sums", ok);
        }
    }
    Ok(())
}

fn operator_checks(t: &mut Tally) -> Result<()> {
    for (g, f) in cases() {
        let sigma = positive(&fixture_fields(&g)[1])?;
        for mode in MODES {
            let fam = RectFamily::new(&g, mode)?;
            t.record("strong_maximal", strong_maximal(&f, &fam)?.values() == brute_strong_maximal(&f, mode).as_slice());
            t.record(
                "maximal_1",
                maximal_1(&f, &fam)?.values() == brute_partial_maximal(&f, mode, Factor::First).as_slice(),
            );
            t.record(
                "maximal_2",
                maximal_2(&f, &fam)?.values() == brute_partial_maximal(&f, mode, Factor::Second).as_slice(),
            );
            let fast = g_transform(&f, &sigma, 2.0, &fam)?;
            let slow = brute_g_transform(&f, &sigma, 2.0, mode);
            t.record(
                "g_transform",
                fast.field.values().iter().zip(&slow).all(|(a, b)| close(*a, *b, 1e-14)),
            );
        }
    }
    Ok(())
}

fn weight_checks(t: &mut Tally) -> Result<()> {
    for (g, f) in cases() {
        let w = positive(&f)?;
        for mode in MODES {
            let fam = RectFamily::new(&g, mode)?;
            for p in [1.5, 2.0, 3.0] {
                let fast = a_p_cross_characteristic(&w, p, &fam)?.value;
                t.record("a_p_cross", close(fast, brute_a_p_cross(&w, p, mode), 1e-12));
            }
            let fast = match reverse_doubling_epsilon(&w, &fam) {
                Ok(d) => Some(d.epsilon),
                Err(Error::NoTestableRectangles) => None,
                Err(e) => return Err(e),
            };
            let slow = brute_reverse_doubling(&w, mode);
            let ok = match (fast, slow) {
                (Some(a), Some(b)) => (a - b).abs() <= 1e-12,
                (None, None) => true,
                _ => false,
            };
            t.record("reverse_doubling", ok);
        }
    }
    Ok(())
}

fn characteristic_checks(t: &mut Tally) -> Result<()> {
    for (g, f) in cases() {
        let fields = fixture_fields(&g);
        let omega = positive(&f)?;
        let sigma = positive(&fields[1])?;
        let [n, m] = g.dims();
        let c = ExponentConfig::balanced(n, m, 2.0, 4.0)?;
        let pair = WeightPair::new(omega, sigma, c)?;
        let (q, dp) = (c.q(), c.dual_p());
        for mode in MODES {
            let fam = RectFamily::new(&g, mode)?;
            let slow = brute_averaged_characteristic(pair.omega_q(), pair.dual(), q, dp, mode);
            t.record("a_pq", close(a_pq(&pair, &fam)?.value, slow, 1e-13));
            let md = Field::from_values(&g, brute_strong_maximal(pair.dual(), mode))?;
            let slow = brute_averaged_characteristic(pair.omega_q(), &md, q, dp, mode);
            t.record("a_m_pq", close(a_m_pq(&pair, &fam, &fam)?.value, slow, 1e-13));
        }
    }
    Ok(())
}

fn hedberg_checks(t: &mut Tally) -> Result<()> {
    for (g, f) in cases() {
        let [n, m] = g.dims();
        let c = ExponentConfig::balanced(n, m, 2.0, 4.0)?;
        let fields = fixture_fields(&g);
        let pair = WeightPair::new(positive(&fields[2])?, positive(&fields[1])?, c)?;
        let fam = RectFamily::new(&g, FamilyMode::DyadicShifted)?;
        let ctx = HedbergContext::new(&f, &pair, &fam, &fam)?;
        for i in 0..g.first().cell_count() {
            for j in 0..g.second().cell_count() {
                let r = ctx.report((i, j))?;
                t.record("partition_identity", r.degenerate || r.partition_residual <= 1e-10);
            }
        }
    }
    Ok(())
}

/// Runs the brute-force cross-checks of `module` on the bundled fixtures.
pub fn run_oracles(module: &str) -> Result<Vec<OracleCheck>> {
    let mut t = Tally::default();
    match module {
        "grid" => grid_checks(&mut t)?,
        "operators" => operator_checks(&mut t)?,
        "weights" => weight_checks(&mut t)?,
        "characteristics" => characteristic_checks(&mut t)?,
        "hedberg" => hedberg_checks(&mut t)?,
        "all" => {
            grid_checks(&mut t)?;
            operator_checks(&mut t)?;
            weight_checks(&mut t)?;
            characteristic_checks(&mut t)?;
            hedberg_checks(&mut t)?;
        }
        other => {
            return Err(Error::Config(format!(
                "unknown oracle module `{other}` (expected one of {}, all)",
                MODULES.join(", ")
            )))
        }
    }
    Ok(t.0)
}
