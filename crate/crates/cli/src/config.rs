//! Experiment configuration: parsing, defaults and validation.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use dwinv_core::{DampingField, DomainMesh, TimeGrid};
use serde::{Deserialize, Serialize};

/// A configuration problem, reported with the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {msg}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub damping: DampingSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub reconstruct: ReconstructSpec,
    /// Where and how much to write; not part of the experiment itself.
    #[serde(default, skip_serializing)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    /// 1 for the unit interval, 2 for the unit square.
    pub dim: usize,
    pub cells: usize,
    /// Cells along `y` on the square; defaults to `cells`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells_y: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Courant factor; defaults to 0.9 on the interval and 0.6 on the square.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
}

fn default_tau() -> f64 {
    2.0
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            tau: default_tau(),
            cfl: None,
        }
    }
}

/// Damping direction `b` on Γ₁, as a function of the tangential coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "lowercase", deny_unknown_fields)]
pub enum DampingSpec {
    Constant {
        value: f64,
    },
    /// `base + amplitude · ½(1 + cos(π (y - center) / width))` on `|y - center| < width`.
    Bump {
        #[serde(default)]
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `values[i]` on the i-th interval cut out by `breaks`.
    Piecewise {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    /// `base + amplitude · sin(π y)`.
    Sine {
        base: f64,
        amplitude: f64,
    },
}

impl Default for DampingSpec {
    fn default() -> Self {
        Self::Constant { value: 0.5 }
    }
}

impl DampingSpec {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Bump {
                base,
                amplitude,
                center,
                width,
            } => {
                let r = (y - center) / width;
                if r.abs() < 1.0 {
                    base + amplitude * 0.5 * (1.0 + (PI * r).cos())
                } else {
                    *base
                }
            }
            Self::Piecewise { breaks, values } => {
                values[breaks.iter().filter(|&&c| y >= c).count()]
            }
            Self::Sine { base, amplitude } => base + amplitude * (PI * y).sin(),
        }
    }

    pub fn field(&self, mesh: &DomainMesh) -> DampingField {
        DampingField::from_fn(mesh, |y| self.eval(y))
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let nonneg = |field: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(bad(
                    field,
                    format!("must be finite and nonnegative, got {v}"),
                ))
            }
        };
        match self {
            Self::Constant { value } => nonneg("damping.value", *value),
            Self::Bump {
                base,
                amplitude,
                center,
                width,
            } => {
                nonneg("damping.base", *base)?;
                nonneg("damping.amplitude", *amplitude)?;
                if !(*width > 0.0) {
                    return Err(bad(
                        "damping.width",
                        format!("must be positive, got {width}"),
                    ));
                }
                if !(center - width > 0.0 && center + width < 1.0) {
                    return Err(bad(
                        "damping.center",
                        format!(
                            "support [{}, {}] must lie strictly inside (0, 1)",
                            center - width,
                            center + width
                        ),
                    ));
                }
                Ok(())
            }
            Self::Piecewise { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(bad(
                        "damping.values",
                        format!(
                            "expected {} values for {} breaks, got {}",
                            breaks.len() + 1,
                            breaks.len(),
                            values.len()
                        ),
                    ));
                }
                if breaks.iter().any(|c| !(*c > 0.0 && *c < 1.0))
                    || breaks.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(bad(
                        "damping.breaks",
                        "must be strictly increasing inside (0, 1)",
                    ));
                }
                for v in values {
                    nonneg("damping.values", *v)?;
                }
                Ok(())
            }
            Self::Sine { base, amplitude } => {
                nonneg("damping.base", *base)?;
                if !amplitude.is_finite() || base + amplitude.min(0.0) < 0.0 {
                    return Err(bad(
                        "damping.amplitude",
                        "base + amplitude · sin(πy) must stay nonnegative",
                    ));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// Eigenmode used as initial displacement.
    #[serde(default)]
    pub mode: usize,
    /// Number of eigenpairs tabulated by `eigen`.
    #[serde(default = "default_modes")]
    pub modes: usize,
}

fn default_modes() -> usize {
    6
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            mode: 0,
            modes: default_modes(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Strictly decreasing values in (0, 1]; defaults to 0.1 · 2⁻ⁱ, i < 8.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructSpec {
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Noise amplitude relative to the largest measured trace value.
    #[serde(default)]
    pub noise: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub ridge: f64,
    /// Decades of ρ covered by the error scan (10⁻¹ down to 10⁻ⁿ).
    #[serde(default = "default_decades")]
    pub scan_decades: u32,
}

fn default_rho() -> f64 {
    0.01
}

fn default_seed() -> u64 {
    42
}

fn default_decades() -> u32 {
    10
}

impl Default for ReconstructSpec {
    fn default() -> Self {
        Self {
            rho: default_rho(),
            noise: 0.0,
            seed: default_seed(),
            ridge: 0.0,
            scan_decades: default_decades(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub dump: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    /// Parses and validates; the result has every default filled in.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.resolve();
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self) {
        if self.domain.dim == 2 && self.domain.cells_y.is_none() {
            self.domain.cells_y = Some(self.domain.cells);
        }
        if self.time.cfl.is_none() {
            self.time.cfl = Some(if self.domain.dim == 2 { 0.6 } else { 0.9 });
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let d = &self.domain;
        if d.dim != 1 && d.dim != 2 {
            return Err(bad("domain.dim", format!("must be 1 or 2, got {}", d.dim)));
        }
        if d.cells < 3 {
            return Err(bad(
                "domain.cells",
                format!("must be at least 3, got {}", d.cells),
            ));
        }
        match (d.dim, d.cells_y) {
            (1, Some(_)) => return Err(bad("domain.cells_y", "only applies when dim = 2")),
            (2, Some(ny)) if ny < 2 => {
                return Err(bad(
                    "domain.cells_y",
                    format!("must be at least 2, got {ny}"),
                ))
            }
            _ => {}
        }
        if !(self.time.tau > 0.0 && self.time.tau.is_finite()) {
            return Err(bad(
                "time.tau",
                format!("must be positive, got {}", self.time.tau),
            ));
        }
        // A Courant factor above the stability limit is accepted here and
        // reported as a numerical failure by the solvers.
        let cfl = self.cfl();
        if !(cfl > 0.0 && cfl.is_finite()) {
            return Err(bad("time.cfl", format!("must be positive, got {cfl}")));
        }
        self.damping.validate()?;
        if self.initial.modes == 0 {
            return Err(bad("initial.modes", "must be at least 1"));
        }
        if self.initial.mode >= self.initial.modes {
            return Err(bad(
                "initial.mode",
                format!(
                    "must be below initial.modes = {}, got {}",
                    self.initial.modes, self.initial.mode
                ),
            ));
        }
        let dofs = match d.dim {
            1 => d.cells,
            _ => (d.cells) * (d.cells_y.unwrap_or(d.cells) - 1),
        };
        if self.initial.modes > dofs {
            return Err(bad(
                "initial.modes",
                format!(
                    "the mesh only has {dofs} degrees of freedom, got {}",
                    self.initial.modes
                ),
            ));
        }
        if let Some(rho) = &self.sweep.rho {
            if rho.is_empty() {
                return Err(bad("sweep.rho", "must not be empty"));
            }
            if rho.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
                return Err(bad("sweep.rho", "values must lie in (0, 1]"));
            }
            if rho.windows(2).any(|w| w[1] >= w[0]) {
                return Err(bad("sweep.rho", "must be strictly decreasing"));
            }
        }
        let r = &self.reconstruct;
        if !(r.rho > 0.0 && r.rho <= 1.0) {
            return Err(bad(
                "reconstruct.rho",
                format!("must lie in (0, 1], got {}", r.rho),
            ));
        }
        if !(r.noise >= 0.0 && r.noise.is_finite()) {
            return Err(bad(
                "reconstruct.noise",
                format!("must be nonnegative, got {}", r.noise),
            ));
        }
        if !(r.ridge >= 0.0 && r.ridge.is_finite()) {
            return Err(bad(
                "reconstruct.ridge",
                format!("must be nonnegative, got {}", r.ridge),
            ));
        }
        if !(1..=15).contains(&r.scan_decades) {
            return Err(bad(
                "reconstruct.scan_decades",
                format!("must lie in 1..=15, got {}", r.scan_decades),
            ));
        }
        Ok(())
    }

    pub fn cfl(&self) -> f64 {
        self.time.cfl.unwrap_or(0.9)
    }

    pub fn mesh(&self) -> dwinv_core::Result<DomainMesh> {
        match self.domain.dim {
            1 => DomainMesh::interval(self.domain.cells),
            _ => DomainMesh::rectangle(
                self.domain.cells,
                self.domain.cells_y.unwrap_or(self.domain.cells),
            ),
        }
    }

    pub fn time_grid(&self, mesh: &DomainMesh) -> dwinv_core::Result<TimeGrid> {
        TimeGrid::for_mesh(mesh, self.time.tau, self.cfl())
    }

    pub fn rho_grid(&self) -> Vec<f64> {
        self.sweep
            .rho
            .clone()
            .unwrap_or_else(dwinv_core::inverse::default_rho_grid)
    }

    /// The experiment part of the configuration as canonical TOML.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[domain]\ndim = 1\ncells = 64\n";

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.time.tau, 2.0);
        assert_eq!(cfg.cfl(), 0.9);
        assert_eq!(cfg.damping, DampingSpec::Constant { value: 0.5 });
        assert_eq!(cfg.rho_grid().len(), 8);
        let sq = ExperimentConfig::parse("[domain]\ndim = 2\ncells = 16\n").unwrap();
        assert_eq!(sq.cfl(), 0.6);
        assert_eq!(sq.domain.cells_y, Some(16));
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = ExperimentConfig::parse(
            "[domain]\ndim = 2\ncells = 8\n[damping]\nprofile = \"piecewise\"\nbreaks = [0.5]\nvalues = [0.2, 0.4]\n[output]\ndump = true\n",
        )
        .unwrap();
        let text = cfg.resolved_toml();
        assert!(!text.contains("dump"));
        let again = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(again.resolved_toml(), text);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("[domain]\ndim = 3\ncells = 8\n", "domain.dim"),
            ("[domain]\ndim = 1\ncells = 8\n[time]\ntau = -1.0\n", "time.tau"),
            ("[domain]\ndim = 1\ncells = 8\n[damping]\nprofile = \"constant\"\nvalue = -0.5\n", "damping.value"),
            (
                "[domain]\ndim = 1\ncells = 8\n[damping]\nprofile = \"bump\"\namplitude = 1.0\ncenter = 0.1\nwidth = 0.2\n",
                "damping.center",
            ),
            ("[domain]\ndim = 1\ncells = 8\n[sweep]\nrho = [0.1, 0.2]\n", "sweep.rho"),
            ("[domain]\ndim = 1\ncells = 8\n[initial]\nmode = 9\nmodes = 9\n", "initial.modes"),
        ];
        for (text, field) in cases {
            let err = ExperimentConfig::parse(text).unwrap_err();
            assert!(err.0.contains(field), "{err} should mention {field}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = ExperimentConfig::parse("[domain]\ndim = 1\ncells = 8\ncels = 3\n").unwrap_err();
        assert!(err.0.contains("cels"), "{err}");
        assert!(err.0.contains("line 4"), "{err}");
        assert!(ExperimentConfig::parse(
            "[domain]\ndim = 1\ncells = 8\n[damping]\nprofile = \"wavy\"\n"
        )
        .is_err());
    }

    #[test]
    fn profiles_evaluate() {
        let bump = DampingSpec::Bump {
            base: 0.1,
            amplitude: 1.0,
            center: 0.5,
            width: 0.25,
        };
        assert!((bump.eval(0.5) - 1.1).abs() < 1e-15);
        assert_eq!(bump.eval(0.2), 0.1);
        let pw = DampingSpec::Piecewise {
            breaks: vec![0.3, 0.6],
            values: vec![1.0, 2.0, 3.0],
        };
        assert_eq!([pw.eval(0.1), pw.eval(0.3), pw.eval(0.9)], [1.0, 2.0, 3.0]);
        let s = DampingSpec::Sine {
            base: 0.3,
            amplitude: 0.2,
        };
        assert!((s.eval(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn courant_factor_above_one_is_left_to_the_solver() {
        let cfg =
            ExperimentConfig::parse("[domain]\ndim = 1\ncells = 8\n[time]\ncfl = 1.5\n").unwrap();
        let mesh = cfg.mesh().unwrap();
        assert!(matches!(
            cfg.time_grid(&mesh),
            Err(dwinv_core::Error::Cfl { .. })
        ));
    }
}
