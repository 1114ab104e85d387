use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{ExponentConfig, FamilyMode, Grid};
use crate::weights::{counterexample_omega, counterexample_sigma, WeightFn};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    TheoremOne,
    TheoremA,
    Counterexample,
    GfBound,
    HedbergSweep,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::TheoremOne => "theoremOne",
            Mode::TheoremA => "theoremA",
            Mode::Counterexample => "counterexample",
            Mode::GfBound => "gf_bound",
            Mode::HedbergSweep => "hedberg_sweep",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "theoremOne" => Mode::TheoremOne,
            "theoremA" => Mode::TheoremA,
            "counterexample" => Mode::Counterexample,
            "gf_bound" => Mode::GfBound,
            "hedberg_sweep" => Mode::HedbergSweep,
            other => return Err(Error::Config(format!("unknown mode `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// How a weight is chosen per trial.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    /// Drawn from the admissible generator for every trial.
    Random,
    Fixed(WeightFn),
}

/// How the input function is chosen per trial.
#[derive(Clone, Debug, PartialEq)]
pub enum InputSpec {
    /// Sum of 1 to 5 positive rectangle bumps.
    Random,
    Constant(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub exponents: ExponentConfig,
    pub half_width: [f64; 2],
    /// Cells per axis at the coarsest resolution.
    pub cells: [usize; 2],
    /// Number of resolutions, each doubling the previous one.
    pub refine_levels: usize,
    pub trials: usize,
    pub seed: u64,
    pub characteristic_family: FamilyMode,
    pub maximal_family: FamilyMode,
    /// Half-widths for the counterexample schedule.
    pub truncations: Vec<f64>,
    /// Fixed cell size for the counterexample schedule.
    pub cell_size: f64,
    /// Spacing of Hedberg centers, in coarsest-grid cells.
    pub center_stride: usize,
    pub omega: WeightSpec,
    pub sigma: WeightSpec,
    pub input: InputSpec,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// The parsed key-value pairs, echoed into report metadata.
    pub entries: BTreeMap<String, String>,
}

const KEYS: &[&str] = &[
    "mode",
    "n",
    "m",
    "p",
    "q",
    "alpha",
    "beta",
    "balanced",
    "half_width",
    "cells",
    "refine_levels",
    "trials",
    "seed",
    "characteristic_family",
    "maximal_family",
    "truncations",
    "cell_size",
    "center_stride",
    "omega.kind",
    "omega.value",
    "omega.a",
    "omega.b",
    "sigma.kind",
    "sigma.value",
    "sigma.a",
    "sigma.b",
    "f.kind",
    "f.value",
    "output",
    "format",
];

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{raw}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',').map(|s| parse_value(key, s)).collect()
}

fn parse_pair<T: FromStr + Copy>(key: &str, raw: &str) -> Result<[T; 2]> {
    match parse_list::<T>(key, raw)?.as_slice() {
        [a] => Ok([*a, *a]),
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::Config(format!("`{key}` takes one or two values"))),
    }
}

/// Splits `key = value` lines, dropping `#` comments and blank lines.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key `{k}`", lineno + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_entries(parse_entries(text)?)
    }

    pub fn from_entries(entries: BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| entries.get(k).map(String::as_str);
        let mode: Mode = parse_value("mode", get("mode").ok_or_else(|| Error::Config("missing `mode`".into()))?)?;
        let num = |k: &str, default: f64| get(k).map_or(Ok(default), |v| parse_value(k, v));
        let int = |k: &str, default: usize| get(k).map_or(Ok(default), |v| parse_value(k, v));

        let n = int("n", 1)?;
        let m = int("m", 1)?;
        let p = num("p", 2.0)?;
        let q = num("q", 4.0)?;
        let balanced = get("balanced").map_or(Ok(true), |v| parse_value::<bool>("balanced", v))?;
        let exponents = match (get("alpha"), get("beta")) {
            (None, None) if balanced => ExponentConfig::balanced(n, m, p, q),
            (Some(a), Some(b)) => {
                let c = ExponentConfig::new(n, m, p, q, parse_value("alpha", a)?, parse_value("beta", b)?)
                    .map_err(|e| Error::Config(e.to_string()))?;
                if get("balanced").is_some() && balanced && !c.is_balanced() {
                    return Err(Error::Config("alpha, beta do not satisfy the balance relation".into()));
                }
                Ok(c)
            }
            _ => return Err(Error::Config("give both `alpha` and `beta`, or neither with balanced = true".into())),
        }
        .map_err(|e| Error::Config(e.to_string()))?;

        let weight = |prefix: &str, counter: fn(&ExponentConfig) -> WeightFn| -> Result<WeightSpec> {
            let key = format!("{prefix}.kind");
            let sub = |name: &str, default: f64| {
                let k = format!("{prefix}.{name}");
                get(&k).map_or(Ok(default), |v| parse_value(&k, v))
            };
            Ok(match get(&key).unwrap_or("random") {
                "random" => WeightSpec::Random,
                "constant" => WeightSpec::Fixed(WeightFn::Constant(sub("value", 1.0)?)),
                "power" => WeightSpec::Fixed(WeightFn::Power {
                    a: sub("a", 0.0)?,
                    b: sub("b", 0.0)?,
                }),
                "bracket" => WeightSpec::Fixed(WeightFn::Bracket {
                    a: sub("a", 0.0)?,
                    b: sub("b", 0.0)?,
                }),
                k if k == format!("counterexample_{prefix}") => WeightSpec::Fixed(counter(&exponents)),
                other => return Err(Error::Config(format!("unknown `{key}` value `{other}`"))),
            })
        };
        let omega = weight("omega", counterexample_omega)?;
        let sigma = weight("sigma", counterexample_sigma)?;
        let input = match get("f.kind").unwrap_or("random") {
            "random" => InputSpec::Random,
            "constant" => InputSpec::Constant(num("f.value", 1.0)?),
            "zero" => InputSpec::Constant(0.0),
            other => return Err(Error::Config(format!("unknown `f.kind` value `{other}`"))),
        };
        let family = |k: &str| get(k).map_or(Ok(FamilyMode::DyadicShifted), |v| parse_value::<FamilyMode>(k, v));

        let cfg = ExperimentConfig {
            mode,
            exponents,
            half_width: get("half_width").map_or(Ok([4.0, 4.0]), |v| parse_pair("half_width", v))?,
            cells: get("cells").map_or(Ok([32, 32]), |v| parse_pair("cells", v))?,
            refine_levels: int("refine_levels", 1)?,
            trials: int("trials", 1)?,
            seed: get("seed").map_or(Ok(0), |v| parse_value("seed", v))?,
            characteristic_family: family("characteristic_family")?,
            maximal_family: family("maximal_family")?,
            truncations: get("truncations").map_or(Ok(vec![4.0, 8.0, 16.0]), |v| parse_list("truncations", v))?,
            cell_size: num("cell_size", 0.25)?,
            center_stride: int("center_stride", 4)?,
            omega,
            sigma,
            input,
            output: get("output").map(PathBuf::from),
            format: get("format").map_or(Ok(Format::Csv), parse_value_format)?,
            entries: entries.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.refine_levels == 0 || self.center_stride == 0 {
            return Err(Error::Config("`refine_levels` and `center_stride` must be positive".into()));
        }
        for k in 0..self.refine_levels {
            self.grid(k).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.mode == Mode::Counterexample {
            if !self.exponents.is_balanced() {
                return Err(Error::Config("the counterexample needs balanced exponents".into()));
            }
            if self.truncations.is_empty() {
                return Err(Error::Config("`truncations` must not be empty".into()));
            }
            for &l in &self.truncations {
                self.truncation_grid(l).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Grid at refinement level `level` (cells doubled `level` times).
    pub fn grid(&self, level: usize) -> Result<Grid> {
        let f = 1usize << level;
        Grid::new(
            [self.exponents.n(), self.exponents.m()],
            self.half_width,
            [self.cells[0] * f, self.cells[1] * f],
        )
    }

    /// Grid on [−L, L] with the configured cell size.
    pub fn truncation_grid(&self, half_width: f64) -> Result<Grid> {
        let cells = (2.0 * half_width / self.cell_size).round();
        if (cells * self.cell_size - 2.0 * half_width).abs() > 1e-9 * half_width {
            return Err(Error::Config(format!(
                "cell size {} does not divide the width of [-{half_width}, {half_width}]",
                self.cell_size
            )));
        }
        let c = cells as usize;
        Grid::new([self.exponents.n(), self.exponents.m()], [half_width; 2], [c, c])
    }

    /// Overrides from command-line flags; the echoed entries follow.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.entries.insert("seed".into(), seed.to_string());
    }

    pub fn set_cells(&mut self, cells: [usize; 2]) -> Result<()> {
        self.cells = cells;
        self.entries.insert("cells".into(), format!("{}, {}", cells[0], cells[1]));
        self.validate()
    }

    pub fn set_format(&mut self, format: Format) {
        self.format = format;
    }
}

fn parse_value_format(v: &str) -> Result<Format> {
    v.parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = "
            # theorem run
            mode = theoremOne
            p = 2
            q = 4
            half_width = 4
            cells = 16, 32
            refine_levels = 2   # 16 and 32
            trials = 3
            seed = 11
            omega.kind = constant
            omega.value = 2.5
            sigma.kind = power
            sigma.a = 0.1
            f.kind = constant
        ";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.mode, Mode::TheoremOne);
        assert!(c.exponents.is_balanced());
        assert_eq!(c.cells, [16, 32]);
        assert_eq!(c.grid(1).unwrap().second().cells_per_axis(), 64);
        assert_eq!(c.omega, WeightSpec::Fixed(WeightFn::Constant(2.5)));
        assert_eq!(c.sigma, WeightSpec::Fixed(WeightFn::Power { a: 0.1, b: 0.0 }));
        assert_eq!(c.input, InputSpec::Constant(1.0));
        assert_eq!(c.characteristic_family, FamilyMode::DyadicShifted);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("p = 2").is_err());
        assert!(ExperimentConfig::parse("mode = nope").is_err());
        assert!(ExperimentConfig::parse("mode = gf_bound\nbogus = 1").is_err());
        assert!(ExperimentConfig::parse("mode = gf_bound\ncells = 12").is_err());
        assert!(ExperimentConfig::parse("mode = gf_bound\np = 5\nq = 4").is_err());
        assert!(ExperimentConfig::parse("mode = gf_bound\nalpha = 0.3").is_err());
        assert!(ExperimentConfig::parse("mode = gf_bound\nomega.kind = counterexample_sigma").is_err());
        assert!(ExperimentConfig::parse("mode = counterexample\ncell_size = 0.3").is_err());
    }

    #[test]
    fn counterexample_weights() {
        let c = ExperimentConfig::parse("mode = counterexample\nomega.kind = counterexample_omega\nsigma.kind = counterexample_sigma").unwrap();
        assert_eq!(c.sigma, WeightSpec::Fixed(WeightFn::Power { a: -0.25, b: -0.25 }));
        assert_eq!(c.truncation_grid(8.0).unwrap().first().cells_per_axis(), 64);
    }
}
