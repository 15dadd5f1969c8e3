//! Layered run configuration: built-in defaults, then an INI file, then
//! command-line overrides. The resolved table is echoed next to every output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use heavyclip::rng::{stream_rng, CALIBRATION_STREAM};
use heavyclip::{Algorithm, NoiseModel, NormedSpace, Problem, WarmupMode};
use ini::Ini;

use crate::error::{io_err, HarnessError, Result};

/// Sections, keys and default values, in echo order.
pub const DEFAULTS: &[(&str, &[(&str, &str)])] = &[
    (
        "run",
        &[
            ("algo", "nsgd"),
            ("T", "10000"),
            ("b", "1"),
            ("s", "1"),
            ("delta", "0.1"),
            ("seed", "0"),
            ("seeds", "1"),
            ("warmup", "none"),
            ("hold_steps", "auto"),
            ("out", "heavyclip-out"),
            ("safety", "1.5"),
            ("calibration_samples", "10000"),
            ("t_grid", "1000,10000,100000"),
            ("plots", "false"),
        ],
    ),
    (
        "problem",
        &[
            ("kind", "cosine_sum"),
            ("dim", "10"),
            ("amplitude", "1"),
            ("eigenvalues", "1"),
            ("optimum", "0"),
            ("init", "auto"),
        ],
    ),
    ("noise", &[("p_moment", "1.5"), ("tail", "1.8"), ("scale", "1")]),
    ("norm", &[("q", "2")]),
];

/// Raw `section.key → value` table.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    values: BTreeMap<(String, String), String>,
}

impl Default for Settings {
    fn default() -> Self {
        let mut values = BTreeMap::new();
        for (section, keys) in DEFAULTS {
            for (key, value) in *keys {
                values.insert((section.to_string(), key.to_string()), value.to_string());
            }
        }
        Self { values }
    }
}

fn is_known(section: &str, key: &str) -> bool {
    DEFAULTS
        .iter()
        .any(|(s, keys)| *s == section && keys.iter().any(|(k, _)| *k == key))
}

impl Settings {
    /// Overlays an INI document. Unknown sections or keys are rejected.
    pub fn merge_ini(&mut self, ini: &Ini) -> Result<()> {
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(HarnessError::config(key, "keys must sit inside a section"));
                }
                continue;
            };
            for (key, value) in props.iter() {
                self.set(section, key, value)?;
            }
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let ini = Ini::load_from_file(path)
            .map_err(|e| HarnessError::config("config", format!("{}: {e}", path.display())))?;
        self.merge_ini(&ini)
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        if !is_known(section, key) {
            return Err(HarnessError::config(format!("{section}.{key}"), "unknown setting"));
        }
        self.values
            .insert((section.to_string(), key.to_string()), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, section: &str, key: &str) -> &str {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(String::as_str)
            .expect("every known key has a default")
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(section, key);
        raw.parse()
            .map_err(|e| HarnessError::config(format!("{section}.{key}"), format!("cannot parse `{raw}`: {e}")))
    }

    fn parse_list(&self, section: &str, key: &str) -> Result<Vec<f64>> {
        let raw = self.get(section, key);
        raw.split(',')
            .map(|part| {
                part.trim().parse::<f64>().map_err(|e| {
                    HarnessError::config(format!("{section}.{key}"), format!("cannot parse `{raw}`: {e}"))
                })
            })
            .collect()
    }

    /// The table as an INI document, sections and keys in default order.
    pub fn to_ini(&self) -> Ini {
        let mut ini = Ini::new();
        for (section, keys) in DEFAULTS {
            for (key, _) in *keys {
                ini.with_section(Some(*section)).set(*key, self.get(section, key));
            }
        }
        ini
    }

    pub fn write_echo(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("config.ini");
        self.to_ini().write_to_file(&path).map_err(io_err(&path))?;
        Ok(path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemConfig {
    Quadratic {
        dim: usize,
        eigenvalues: Vec<f64>,
        optimum: Vec<f64>,
        init: Vec<f64>,
    },
    CosineSum {
        dim: usize,
        amplitude: f64,
        init: Vec<f64>,
    },
}

/// Fully parsed configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub horizon: usize,
    pub b: f64,
    pub s: f64,
    pub delta: f64,
    pub seed: u64,
    pub seeds: usize,
    pub warmup: WarmupMode,
    pub hold_steps: Option<usize>,
    pub out: PathBuf,
    pub safety: f64,
    pub calibration_samples: usize,
    pub t_grid: Vec<usize>,
    pub plots: bool,
    pub problem: ProblemConfig,
    pub p_moment: f64,
    pub tail: f64,
    pub scale: f64,
    pub q: f64,
}

fn broadcast(values: Vec<f64>, dim: usize, field: &str) -> Result<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; dim]),
        n if n == dim => Ok(values),
        n => Err(HarnessError::config(field, format!("expected 1 or {dim} values, got {n}"))),
    }
}

fn core_field(field: &str) -> impl Fn(heavyclip::Error) -> HarnessError + '_ {
    move |e| HarnessError::config(field, e.to_string())
}

impl RunConfig {
    pub fn from_settings(st: &Settings) -> Result<Self> {
        let algorithm: Algorithm = st
            .get("run", "algo")
            .parse()
            .map_err(core_field("run.algo"))?;
        let warmup: WarmupMode = st
            .get("run", "warmup")
            .parse()
            .map_err(core_field("run.warmup"))?;
        let hold_steps = match st.get("run", "hold_steps") {
            "auto" => None,
            _ => Some(st.parse("run", "hold_steps")?),
        };
        let mut t_grid = Vec::new();
        for t in st.get("run", "t_grid").split(',') {
            t_grid.push(t.trim().parse::<usize>().map_err(|e| {
                HarnessError::config("run.t_grid", format!("cannot parse `{t}`: {e}"))
            })?);
        }
        let dim: usize = st.parse("problem", "dim")?;
        if dim == 0 {
            return Err(HarnessError::config("problem.dim", "must be at least 1"));
        }
        let kind = st.get("problem", "kind");
        let init = |default: f64| -> Result<Vec<f64>> {
            match st.get("problem", "init") {
                "auto" => Ok(vec![default; dim]),
                _ => broadcast(st.parse_list("problem", "init")?, dim, "problem.init"),
            }
        };
        let problem = match kind {
            "quadratic" => ProblemConfig::Quadratic {
                dim,
                eigenvalues: broadcast(st.parse_list("problem", "eigenvalues")?, dim, "problem.eigenvalues")?,
                optimum: broadcast(st.parse_list("problem", "optimum")?, dim, "problem.optimum")?,
                init: init(1.0)?,
            },
            "cosine_sum" => ProblemConfig::CosineSum {
                dim,
                amplitude: st.parse("problem", "amplitude")?,
                init: init(2.0)?,
            },
            other => {
                return Err(HarnessError::config(
                    "problem.kind",
                    format!("expected quadratic or cosine_sum, got `{other}`"),
                ))
            }
        };
        let cfg = Self {
            algorithm,
            horizon: st.parse("run", "T")?,
            b: st.parse("run", "b")?,
            s: st.parse("run", "s")?,
            delta: st.parse("run", "delta")?,
            seed: st.parse("run", "seed")?,
            seeds: st.parse("run", "seeds")?,
            warmup,
            hold_steps,
            out: PathBuf::from(st.get("run", "out")),
            safety: st.parse("run", "safety")?,
            calibration_samples: st.parse("run", "calibration_samples")?,
            t_grid,
            plots: st.parse("run", "plots")?,
            problem,
            p_moment: st.parse("noise", "p_moment")?,
            tail: st.parse("noise", "tail")?,
            scale: st.parse("noise", "scale")?,
            q: st.parse("norm", "q")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every precondition that does not need a computation.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(HarnessError::config("run.T", "must be at least 1"));
        }
        if self.seeds == 0 {
            return Err(HarnessError::config("run.seeds", "must be at least 1"));
        }
        for (field, v) in [("run.b", self.b), ("run.s", self.s)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(HarnessError::config(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(HarnessError::config("run.delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if self.t_grid.len() < 3 || self.t_grid.windows(2).any(|w| w[0] >= w[1]) || self.t_grid[0] == 0 {
            return Err(HarnessError::config(
                "run.t_grid",
                "needs at least 3 strictly increasing positive horizons",
            ));
        }
        self.space()?;
        self.noise_model()?;
        self.build_problem()?;
        if self.calibration_samples < NoiseModel::MIN_CALIBRATION_SAMPLES {
            return Err(HarnessError::config(
                "run.calibration_samples",
                format!("need at least {}", NoiseModel::MIN_CALIBRATION_SAMPLES),
            ));
        }
        if !(self.safety.is_finite() && self.safety >= 1.0) {
            return Err(HarnessError::config("run.safety", "must be at least 1"));
        }
        Ok(())
    }

    pub fn space(&self) -> Result<NormedSpace> {
        let dim = match &self.problem {
            ProblemConfig::Quadratic { dim, .. } | ProblemConfig::CosineSum { dim, .. } => *dim,
        };
        NormedSpace::new(dim, self.q).map_err(core_field("norm.q"))
    }

    pub fn build_problem(&self) -> Result<Problem> {
        let space = self.space()?;
        match &self.problem {
            ProblemConfig::Quadratic {
                eigenvalues,
                optimum,
                init,
                ..
            } => Problem::quadratic(space, eigenvalues.clone(), optimum.clone(), init.clone())
                .map_err(core_field("problem.eigenvalues")),
            ProblemConfig::CosineSum { amplitude, init, .. } => {
                Problem::cosine_sum(space, *amplitude, init.clone()).map_err(core_field("problem.amplitude"))
            }
        }
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        NoiseModel::new(self.p_moment, self.tail, self.scale).map_err(|e| match &e {
            heavyclip::Error::InvalidParameter { name, reason } => {
                let field = match *name {
                    "p_moment" => "noise.p_moment",
                    "tail" => "noise.tail",
                    _ => "noise.scale",
                };
                HarnessError::config(field, reason.clone())
            }
            _ => HarnessError::Core(e),
        })
    }

    /// Problem plus a noise model calibrated once on the reserved stream of
    /// the base seed, so every seed shares the same `G`.
    pub fn calibrated(&self) -> Result<(Problem, NoiseModel, heavyclip::problems::Calibration)> {
        let problem = self.build_problem()?;
        let mut noise = self.noise_model()?;
        let mut rng = stream_rng(self.seed, CALIBRATION_STREAM);
        let cal = noise.calibrate(&problem, self.calibration_samples, self.safety, &mut rng)?;
        Ok((problem, noise, cal))
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|i| self.seed + i).collect()
    }
}
