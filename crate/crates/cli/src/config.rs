//! Run configuration: defaults per test preset, optional `key = value`
//! config file, command-line overrides on top.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use mfgsl_core::{default_epsilon, test_problem, Grid, MfgProblem};

/// Which tables a run writes next to `summary.json`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitFlags {
    pub density: bool,
    pub value: bool,
    pub drift: bool,
    pub errors: bool,
    pub moments: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        EmitFlags {
            density: true,
            value: true,
            drift: true,
            errors: true,
            moments: true,
        }
    }
}

impl EmitFlags {
    pub fn parse(spec: &str) -> Result<Self, String> {
        let mut flags = EmitFlags {
            density: false,
            value: false,
            drift: false,
            errors: false,
            moments: false,
        };
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "density" => flags.density = true,
                "value" => flags.value = true,
                "drift" => flags.drift = true,
                "errors" => flags.errors = true,
                "moments" => flags.moments = true,
                "all" => flags = EmitFlags::default(),
                other => return Err(format!("unknown emit item `{other}`")),
            }
        }
        Ok(flags)
    }
}

/// Fully resolved parameters of one solver run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub test_id: u8,
    pub rho: f64,
    pub h: f64,
    /// Mollification width; `None` resolves to the preset default
    /// (0.15 for the deterministic test, `2 sqrt(h)` otherwise).
    pub epsilon: Option<f64>,
    pub delta: f64,
    pub tau: f64,
    pub max_iters: usize,
    pub damping: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub emit: EmitFlags,
}

/// Unresolved values accumulated from the config file and the flags.
#[derive(Debug, Default, Clone)]
pub struct ConfigOverlay {
    pub test_id: Option<u8>,
    pub rho: Option<f64>,
    pub h: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub tau: Option<f64>,
    pub max_iters: Option<usize>,
    pub damping: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub emit: Option<EmitFlags>,
}

impl ConfigOverlay {
    /// Parses a plain `key = value` file; `#` starts a comment. Unknown
    /// keys are rejected by name.
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut overlay = ConfigOverlay::default();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(format!("line {}: duplicate key `{key}`", lineno + 1));
            }
            let parse_f64 = |v: &str| -> Result<f64, String> {
                v.parse::<f64>().map_err(|_| {
                    format!("line {}: `{key}` must be a number, got `{v}`", lineno + 1)
                })
            };
            match key {
                "test" => {
                    overlay.test_id = Some(value.parse::<u8>().map_err(|_| {
                        format!(
                            "line {}: `test` must be 1, 2 or 3, got `{value}`",
                            lineno + 1
                        )
                    })?)
                }
                "rho" => overlay.rho = Some(parse_f64(value)?),
                "h" => overlay.h = Some(parse_f64(value)?),
                "epsilon" | "eps" => overlay.epsilon = Some(parse_f64(value)?),
                "delta" => overlay.delta = Some(parse_f64(value)?),
                "tau" => overlay.tau = Some(parse_f64(value)?),
                "max_iters" => {
                    overlay.max_iters = Some(value.parse::<usize>().map_err(|_| {
                        format!(
                            "line {}: `max_iters` must be a count, got `{value}`",
                            lineno + 1
                        )
                    })?)
                }
                "damping" => overlay.damping = Some(parse_f64(value)?),
                "out" | "out_dir" => overlay.out_dir = Some(PathBuf::from(value)),
                "seed" => {
                    overlay.seed = Some(value.parse::<u64>().map_err(|_| {
                        format!(
                            "line {}: `seed` must be an integer, got `{value}`",
                            lineno + 1
                        )
                    })?)
                }
                "emit" => overlay.emit = Some(EmitFlags::parse(value)?),
                other => {
                    return Err(format!(
                        "line {}: unknown key `{other}` (known: test, rho, h, epsilon, delta, \
                         tau, max_iters, damping, out, seed, emit)",
                        lineno + 1
                    ))
                }
            }
        }
        Ok(overlay)
    }

    /// Later overlays win field by field.
    pub fn merged_with(mut self, later: ConfigOverlay) -> ConfigOverlay {
        macro_rules! take {
            ($f:ident) => {
                if later.$f.is_some() {
                    self.$f = later.$f;
                }
            };
        }
        take!(test_id);
        take!(rho);
        take!(h);
        take!(epsilon);
        take!(delta);
        take!(tau);
        take!(max_iters);
        take!(damping);
        take!(out_dir);
        take!(seed);
        take!(emit);
        self
    }

    /// Fills preset defaults and validates every parameter.
    pub fn resolve(self) -> Result<RunConfig, String> {
        let test_id = self
            .test_id
            .ok_or("missing required key `test` (1, 2 or 3)")?;
        if !(1..=3).contains(&test_id) {
            return Err(format!("test must be 1, 2 or 3, got {test_id}"));
        }
        // reference spacings: the published runs use rho = h = 3.12e-3 for
        // the deterministic test and 6.35e-3 for the diffusive ones
        let preset_rho = if test_id == 1 { 3.12e-3 } else { 6.35e-3 };
        let rho = self.rho.unwrap_or(preset_rho);
        let h = self.h.unwrap_or(rho);
        let config = RunConfig {
            test_id,
            rho,
            h,
            epsilon: self.epsilon,
            delta: self.delta.unwrap_or(0.2),
            tau: self.tau.unwrap_or(1e-3),
            max_iters: self.max_iters.unwrap_or(20),
            damping: self.damping.unwrap_or(0.0),
            out_dir: self.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            seed: self.seed.unwrap_or(0),
            emit: self.emit.unwrap_or_default(),
        };
        for (name, v) in [
            ("rho", config.rho),
            ("h", config.h),
            ("delta", config.delta),
            ("tau", config.tau),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some(eps) = config.epsilon {
            if !eps.is_finite() || eps <= 0.0 {
                return Err(format!("epsilon must be positive, got {eps}"));
            }
        }
        if config.max_iters == 0 {
            return Err("max_iters must be at least 1".into());
        }
        if !(0.0..1.0).contains(&config.damping) {
            return Err(format!(
                "damping must lie in [0, 1), got {}",
                config.damping
            ));
        }
        Ok(config)
    }
}

impl RunConfig {
    /// Problem, grid and effective mollification width of this run.
    pub fn instantiate(&self) -> Result<(MfgProblem, Grid, f64), String> {
        let mut problem = test_problem(self.test_id).map_err(|e| e.to_string())?;
        if (self.delta - problem.interaction_delta).abs() > 0.0 {
            problem.interaction_delta = self.delta;
            problem.interaction_weight = self.delta * self.delta;
        }
        let grid = problem
            .grid_with(self.rho, self.h)
            .map_err(|e| e.to_string())?;
        let epsilon = self.epsilon.unwrap_or_else(|| {
            if self.test_id == 1 {
                0.15
            } else {
                default_epsilon(grid.h())
            }
        });
        Ok((problem, grid, epsilon))
    }
}
