use std::path::{Path, PathBuf};

use hflow_core::calculus::PoissonOptions;
use hflow_core::flow::{BetaStrategy, FlowOptions};
use hflow_core::mass::{CertificateOptions, FrameCase, ThetaSpec};
use hflow_core::spacetime::{MetricTable, SpacetimeModel};
use hflow_core::surface::{Harmonic, SurfaceFamily};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_SCHEMA: &str = "hflow-config/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub spacetime: SpacetimeSpec,
    pub surface: SurfaceFamily<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "zero_beta")]
    pub beta: BetaStrategy<f64>,
    #[serde(default)]
    pub flow: FlowParams,
    /// Overrides the frame case and Θ the β strategy would pick.
    #[serde(default)]
    pub certificate: Option<CertificateSpec>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn zero_beta() -> BetaStrategy<f64> {
    BetaStrategy::Zero
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpacetimeSpec {
    Minkowski,
    Schwarzschild {
        mass: f64,
    },
    SchwarzschildIsotropic {
        mass: f64,
    },
    DeSitter {
        hubble_length: f64,
    },
    /// CSV metric table, relative paths resolved against the config file.
    Table {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_theta: 32,
            n_phi: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowParams {
    pub s_max: f64,
    pub ds: f64,
    /// Largest step-to-step decrease of `m_H` still reported as monotone.
    pub monotone_tolerance: f64,
    #[serde(flatten)]
    pub options: FlowOptions,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            s_max: 1.0,
            ds: 1e-2,
            monotone_tolerance: 1e-8,
            options: FlowOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    pub case: FrameCase,
    pub theta: ThetaSpec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub random_surfaces: usize,
    /// Step of the central-difference mass derivative.
    pub fd_step: f64,
    pub dec_trials: usize,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0xC0FFEE,
            random_surfaces: 5,
            fd_step: 1.25e-4,
            dec_trials: 200,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub frame: f64,
    pub perp: f64,
    pub trace: f64,
    pub divergence: f64,
    pub gauss_bonnet: f64,
    pub poisson_eigen: f64,
    pub poisson_residual: f64,
    pub transform_law: f64,
    pub split: f64,
    pub bhms: f64,
    pub u_defect: f64,
    pub certificate: f64,
    pub fd_relative: f64,
    pub fd_absolute: f64,
    pub dec: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            frame: 1e-10,
            perp: 1e-12,
            trace: 1e-10,
            divergence: 1e-10,
            gauss_bonnet: 1e-8,
            poisson_eigen: 1e-6,
            poisson_residual: 1e-8,
            transform_law: 1e-10,
            split: 1e-10,
            bhms: 1e-8,
            u_defect: 1e-9,
            certificate: 1e-8,
            fd_relative: 1e-4,
            fd_absolute: 1e-6,
            dec: 1e-8,
        }
    }
}

impl Tolerances {
    fn named(&self) -> [(&'static str, f64); 15] {
        [
            ("frame", self.frame),
            ("perp", self.perp),
            ("trace", self.trace),
            ("divergence", self.divergence),
            ("gauss_bonnet", self.gauss_bonnet),
            ("poisson_eigen", self.poisson_eigen),
            ("poisson_residual", self.poisson_residual),
            ("transform_law", self.transform_law),
            ("split", self.split),
            ("bhms", self.bhms),
            ("u_defect", self.u_defect),
            ("certificate", self.certificate),
            ("fd_relative", self.fd_relative),
            ("fd_absolute", self.fd_absolute),
            ("dec", self.dec),
        ]
    }
}

/// The configuration `hflow verify` uses without `--config`: a twisted,
/// non-time-symmetric sphere in Schwarzschild.
pub fn default_verify_config() -> RunConfig {
    let base = SurfaceFamily::RadialGraph {
        radius: 4.0,
        harmonics: vec![
            Harmonic::new(2, 1, 0.15),
            Harmonic::new(3, -2, 0.15),
            Harmonic::new(1, 0, 0.075),
        ],
    };
    RunConfig {
        schema: CONFIG_SCHEMA.into(),
        spacetime: SpacetimeSpec::Schwarzschild { mass: 1.0 },
        surface: SurfaceFamily::TimePerturbed {
            base: Box::new(base),
            harmonics: vec![Harmonic::new(2, 2, 0.1), Harmonic::new(1, 1, 0.05)],
        },
        grid: GridSpec {
            n_theta: 48,
            n_phi: 96,
        },
        beta: BetaStrategy::Zero,
        flow: FlowParams::default(),
        certificate: None,
        verify: VerifyConfig::default(),
        out: None,
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// `n = 2^k · f` with `f ∈ {1, 3, 5, 7}`.
fn smooth_size(n: usize) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n;
    while m % 2 == 0 {
        m /= 2;
    }
    matches!(m, 1 | 3 | 5 | 7)
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_error(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        if let SpacetimeSpec::Table { path: table } = &mut config.spacetime {
            if table.is_relative() {
                if let Some(dir) = path.parent() {
                    *table = dir.join(&*table);
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != CONFIG_SCHEMA {
            return Err(config_error(format!(
                "unsupported schema {:?}, expected {CONFIG_SCHEMA:?}",
                self.schema
            )));
        }
        self.surface
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        let GridSpec { n_theta, n_phi } = self.grid;
        if n_theta < 8
            || !smooth_size(n_theta)
            || n_phi < 16
            || n_phi % 2 != 0
            || !smooth_size(n_phi)
        {
            return Err(config_error(format!(
                "grid {n_theta}x{n_phi}: sizes must be 2^k times 1, 3, 5 or 7 with n_theta >= 8 and even n_phi >= 16"
            )));
        }
        match &self.spacetime {
            SpacetimeSpec::Schwarzschild { mass }
            | SpacetimeSpec::SchwarzschildIsotropic { mass } => {
                if !(*mass >= 0.0 && mass.is_finite()) {
                    return Err(config_error(format!("mass must be >= 0, got {mass}")));
                }
            }
            SpacetimeSpec::DeSitter { hubble_length } => positive("hubble_length", *hubble_length)?,
            SpacetimeSpec::Minkowski | SpacetimeSpec::Table { .. } => {}
        }
        let f = &self.flow;
        if !(f.ds != 0.0 && f.ds.is_finite()) {
            return Err(config_error(format!(
                "flow.ds must be nonzero, got {}",
                f.ds
            )));
        }
        if !f.s_max.is_finite() {
            return Err(config_error("flow.s_max must be finite"));
        }
        positive("flow.monotone_tolerance", f.monotone_tolerance)?;
        check_flow_options(&f.options)?;
        for (name, v) in self.verify.tolerances.named() {
            positive(&format!("verify.tolerances.{name}"), v)?;
        }
        positive("verify.fd_step", self.verify.fd_step)?;
        if let Some(c) = &self.certificate {
            c.theta
                .check_monotone(self.flow.options.certificate.monotone_samples)
                .map_err(|e| config_error(e.to_string()))?;
        }
        Ok(())
    }

    pub fn model(&self) -> Result<SpacetimeModel<f64>, CliError> {
        let built = match &self.spacetime {
            SpacetimeSpec::Minkowski => Ok(SpacetimeModel::minkowski()),
            SpacetimeSpec::Schwarzschild { mass } => SpacetimeModel::schwarzschild(*mass),
            SpacetimeSpec::SchwarzschildIsotropic { mass } => {
                SpacetimeModel::schwarzschild_isotropic(*mass)
            }
            SpacetimeSpec::DeSitter { hubble_length } => SpacetimeModel::de_sitter(*hubble_length),
            SpacetimeSpec::Table { path } => {
                MetricTable::from_csv_path(path).map(SpacetimeModel::numeric_table)
            }
        };
        built.map_err(|e| config_error(e.to_string()))
    }

    /// The certificate frame case and Θ for this run.
    pub fn certificate_choice(&self) -> (FrameCase, ThetaSpec<f64>) {
        match &self.certificate {
            Some(c) => (c.case, c.theta.clone()),
            None => self.beta.default_certificate(),
        }
    }
}

fn check_flow_options(o: &FlowOptions) -> Result<(), CliError> {
    positive("flow.ds_max", o.ds_max)?;
    positive("flow.area_step_tolerance", o.area_step_tolerance)?;
    positive("flow.stability_factor", o.stability_factor)?;
    positive("flow.mesh_floor", o.mesh_floor)?;
    if !(o.delta > 0.0 && o.delta < 1.0) {
        return Err(config_error(format!(
            "flow.delta must lie in (0, 1), got {}",
            o.delta
        )));
    }
    let PoissonOptions {
        rel_tol,
        compat_tol,
        ..
    } = o.poisson;
    positive("flow.poisson.rel_tol", rel_tol)?;
    positive("flow.poisson.compat_tol", compat_tol)?;
    let CertificateOptions { tolerance, .. } = o.certificate;
    positive("flow.certificate.tolerance", tolerance)?;
    Ok(())
}
