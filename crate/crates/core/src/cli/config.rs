//! Run configuration, read from TOML with unknown keys rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bloch::{Extrapolation, VerdictConfig};
use crate::error::{Error, Result};
use crate::symbols::{EquationSpec, Nonlinearity};
use crate::wave::SolverOptions;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub equation: EquationConfig,
    #[serde(default)]
    pub nonlinearity: NonlinearityConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed_wave: Option<PathBuf>,
}

fn default_output() -> PathBuf {
    PathBuf::from("modstab-out")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationConfig {
    /// Catalogue name, or any label when `omega` is given.
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Odd polynomial `Ω(q) = Σ ω_j q^{2j+1}`, coefficients `ω_0, ω_1, ...`.
    #[serde(default)]
    pub omega: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    /// `quadratic`, `cubic` or `power-p`.
    #[serde(default)]
    pub name: Option<String>,
    /// Polynomial coefficients of `f`, lowest degree first.
    #[serde(default)]
    pub coeffs: Option<Vec<f64>>,
}

/// A scalar, an explicit list, or `{ start, stop, steps }` (inclusive).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Value(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, steps: usize },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Value(v) => vec![*v],
            Axis::List(v) => v.clone(),
            Axis::Range { start, stop, steps } => match steps {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n)
                    .map(|i| start + (stop - start) * i as f64 / (*n - 1) as f64)
                    .collect(),
            },
        }
    }

    pub fn scalar(&self, what: &str) -> Result<f64> {
        match self.values().as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::InvalidArgument(format!("`{what}` must be a single value here"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub k: Axis,
    #[serde(default)]
    pub amplitude: Option<Axis>,
    #[serde(default)]
    pub mass: Option<Axis>,
    #[serde(default)]
    pub momentum: Option<Axis>,
    /// Mean `ū` of amplitude-parametrized waves.
    #[serde(default)]
    pub mean: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Depth {
    /// Modulation matrix only.
    Formal,
    /// Also Bloch slopes, the spectral verdict and the connection check.
    #[default]
    Rigorous,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub tol_connection: f64,
    /// Classification tolerance.
    pub tol: f64,
    pub tol_identities: f64,
    pub tau_list: Option<Vec<f64>>,
    pub extrapolation: Extrapolation,
    pub depth: Depth,
    /// Target width of boundary brackets after bisection.
    pub boundary_width: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tol_connection: 1e-6,
            tol: 1e-6,
            tol_identities: 1e-7,
            tau_list: None,
            extrapolation: Extrapolation::Even,
            depth: Depth::Rigorous,
            boundary_width: 0.01,
        }
    }
}

impl VerifyConfig {
    pub fn verdict(&self) -> VerdictConfig {
        VerdictConfig {
            tol: self.tol,
            tau_list: self.tau_list.clone(),
            extrapolation: self.extrapolation,
        }
    }
}

/// One grid point: either `(k, a)` on the Stokes branch or `(k, M, P)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridPoint {
    Amplitude { k: f64, amplitude: f64 },
    Conserved { k: f64, mass: f64, momentum: f64 },
}

impl GridPoint {
    pub fn k(&self) -> f64 {
        match self {
            GridPoint::Amplitude { k, .. } | GridPoint::Conserved { k, .. } => *k,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((0, 0));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.solver.modes < 16 {
            return Err(Error::InvalidArgument(format!(
                "modes must be at least 16, got {}",
                self.solver.modes
            )));
        }
        let v = &self.verify;
        for (name, t) in [
            ("tol_connection", v.tol_connection),
            ("tol", v.tol),
            ("tol_identities", v.tol_identities),
            ("boundary_width", v.boundary_width),
        ] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("`{name}` must be positive")));
            }
        }
        self.points()?;
        self.spec()?;
        Ok(())
    }

    pub fn spec(&self) -> Result<EquationSpec> {
        let f = self.nonlinearity.build()?;
        let e = &self.equation;
        match &e.omega {
            Some(coeffs) => {
                if !e.params.is_empty() {
                    return Err(Error::InvalidArgument(
                        "`params` cannot be combined with `omega`".into(),
                    ));
                }
                Ok(EquationSpec::custom_polynomial(&e.name, coeffs.clone())?.with_nonlinearity(f))
            }
            None => EquationSpec::catalogue(&e.name, &e.params, f),
        }
    }

    /// Grid points in row order: `k` outermost.
    pub fn points(&self) -> Result<Vec<GridPoint>> {
        let g = &self.grid;
        let ks = g.k.values();
        let nonempty = |name: &str, v: &[f64]| {
            if v.is_empty() {
                Err(Error::InvalidArgument(format!("`{name}` range is empty")))
            } else if v.iter().any(|x| !x.is_finite()) {
                Err(Error::InvalidArgument(format!("`{name}` has a non-finite value")))
            } else {
                Ok(())
            }
        };
        nonempty("k", &ks)?;
        if ks.iter().any(|k| *k <= 0.0) {
            return Err(Error::InvalidArgument("wavenumbers must be positive".into()));
        }
        let mut out = Vec::new();
        match (&g.amplitude, &g.mass, &g.momentum) {
            (Some(a), None, None) => {
                let amps = a.values();
                nonempty("amplitude", &amps)?;
                if amps.iter().any(|a| *a < 0.0) {
                    return Err(Error::InvalidArgument("amplitudes must be non-negative".into()));
                }
                for &k in &ks {
                    for &amplitude in &amps {
                        out.push(GridPoint::Amplitude { k, amplitude });
                    }
                }
            }
            (None, Some(m), Some(p)) => {
                let (ms, ps) = (m.values(), p.values());
                nonempty("mass", &ms)?;
                nonempty("momentum", &ps)?;
                for &k in &ks {
                    for &mass in &ms {
                        for &momentum in &ps {
                            out.push(GridPoint::Conserved { k, mass, momentum });
                        }
                    }
                }
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "grid needs either `amplitude` or both `mass` and `momentum`".into(),
                ))
            }
        }
        Ok(out)
    }
}

impl NonlinearityConfig {
    pub fn build(&self) -> Result<Nonlinearity> {
        match (&self.name, &self.coeffs) {
            (None, None) => Ok(Nonlinearity::quadratic()),
            (Some(n), None) => Nonlinearity::from_name(n),
            (None, Some(c)) => Ok(Nonlinearity::polynomial(c.clone())),
            (Some(_), Some(_)) => Err(Error::InvalidArgument(
                "give either a nonlinearity name or coefficients, not both".into(),
            )),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}
