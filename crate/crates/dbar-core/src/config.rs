//! Run configuration: JSON in, validated structures out. Identical config
//! plus seed must reproduce identical artifacts, so everything the run needs
//! is carried here and echoed into the report.

use crate::fields::{parse_expression, OneForm};
use crate::geometry::{DomainSpec, GridParams};
use crate::lab::{generate_family, ExperimentSpec, FamilySpec};
use crate::solver::{SolveMethod, Tolerances};
use crate::{Complex64, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainConfig {
    Disc,
    /// `psi(zeta) = sum_k psi[k] zeta^{k+1}` as `[re, im]` pairs.
    Conformal { psi: Vec<(f64, f64)> },
}

impl DomainConfig {
    pub fn to_domain(&self) -> Result<DomainSpec> {
        match self {
            DomainConfig::Disc => Ok(DomainSpec::UnitDisc),
            DomainConfig::Conformal { psi } => {
                if psi.is_empty() {
                    return Err(Error::Config("conformal map needs coefficients".into()));
                }
                let coeffs: Vec<Complex64> =
                    psi.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
                let d = DomainSpec::Conformal { psi: coeffs };
                d.check_univalence()?;
                Ok(d)
            }
        }
    }
}

/// The input form: either explicit expressions (one per slot) or a named
/// preset member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exprs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<FamilySpec>,
    #[serde(default)]
    pub member: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeConfig {
    #[serde(default = "default_probe_samples")]
    pub samples: usize,
    #[serde(default = "default_probe_refined")]
    pub refined_samples: usize,
    #[serde(default = "default_probe_eps")]
    pub eps: f64,
}

fn default_probe_samples() -> usize {
    10_000
}

fn default_probe_refined() -> usize {
    40_000
}

fn default_probe_eps() -> f64 {
    0.25
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            samples: default_probe_samples(),
            refined_samples: default_probe_refined(),
            eps: default_probe_eps(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    #[serde(default = "default_conv_scales")]
    pub scales: Vec<f64>,
}

fn default_conv_scales() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            scales: default_conv_scales(),
        }
    }
}

/// Everything one run needs. Defaults match the desk-scale sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub dim: usize,
    #[serde(default)]
    pub grid: GridParams,
    /// grids of the decomposed route; defaults depend on the dimension
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s3_grid: Option<GridParams>,
    #[serde(default = "default_methods")]
    pub methods: Vec<SolveMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// refinement-difference error estimates in solve reports
    #[serde(default)]
    pub error_estimate: bool,
}

fn default_methods() -> Vec<SolveMethod> {
    vec![SolveMethod::Forward, SolveMethod::MonomialOracle]
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Config(format!(
                "dim must be 1, 2 or 3, got {}",
                self.dim
            )));
        }
        self.domain.to_domain().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(f) = &self.field {
            match (&f.exprs, &f.preset) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config(
                        "field: give either exprs or a preset, not both".into(),
                    ))
                }
                (None, None) => {
                    return Err(Error::Config("field: needs exprs or a preset".into()))
                }
                (Some(e), None) if e.len() != self.dim => {
                    return Err(Error::Config(format!(
                        "field: {} expressions for dimension {}",
                        e.len(),
                        self.dim
                    )))
                }
                _ => {}
            }
        }
        if let Some(exp) = &self.experiment {
            exp.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods list is empty".into()));
        }
        Ok(())
    }

    /// Materialize the configured input form.
    pub fn build_form(&self) -> Result<OneForm> {
        let f = self
            .field
            .as_ref()
            .ok_or_else(|| Error::Config("this subcommand needs a field section".into()))?;
        if let Some(exprs) = &f.exprs {
            let comps = exprs
                .iter()
                .map(|e| parse_expression(e, self.dim).map(crate::fields::ScalarField::Monomials))
                .collect::<Result<Vec<_>>>()?;
            return OneForm::new(comps);
        }
        let preset = f.preset.clone().unwrap();
        let spec = ExperimentSpec {
            kind: crate::lab::ExperimentKind::SupRatio,
            family: preset,
            dim: self.dim,
            count: f.member + 1,
            seed: self.seed,
            p_list: vec![3.0],
            alpha_list: vec![],
            delta: 1e-3,
            grid_scales: vec![1.0],
            r_schedule: vec![0.9],
        };
        let family = generate_family(&spec, 0.0, 1e-3)?;
        Ok(family
            .into_iter()
            .nth(f.member)
            .expect("member index within generated count")
            .form)
    }

    /// Apply command-line overrides.
    pub fn with_overrides(mut self, seed: Option<u64>, grid_scale: Option<f64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
            if let Some(e) = &mut self.experiment {
                e.seed = s;
            }
        }
        if let Some(scale) = grid_scale {
            self.grid = GridParams {
                n_r: ((self.grid.n_r as f64 * scale).round() as usize).max(4),
                n_theta: ((self.grid.n_theta as f64 * scale).round() as usize).max(8),
                ..self.grid
            };
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_config() {
        let cfg = RunConfig::from_json(
            r#"{
                "domain": {"type": "disc"},
                "dim": 2,
                "field": {"exprs": ["conj(z2)", "conj(z1)"]}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.grid.n_r, 32);
        let f = cfg.build_form().unwrap();
        assert_eq!(f.dim, 2);
    }

    #[test]
    fn reject_bad_configs() {
        assert!(RunConfig::from_json("{}").is_err());
        assert!(RunConfig::from_json(
            r#"{"domain": {"type": "disc"}, "dim": 5}"#
        )
        .is_err());
        assert!(RunConfig::from_json(
            r#"{"domain": {"type": "disc"}, "dim": 2,
                "field": {"exprs": ["z1"]}}"#
        )
        .is_err());
        // |c| >= 1/2 fails the univalence probe
        assert!(RunConfig::from_json(
            r#"{"domain": {"type": "conformal", "psi": [[1.0, 0.0], [0.6, 0.0]]}, "dim": 1}"#
        )
        .is_err());
    }

    #[test]
    fn preset_field_round_trip() {
        let cfg = RunConfig::from_json(
            r#"{
                "domain": {"type": "disc"},
                "dim": 2,
                "seed": 42,
                "field": {"preset": {"preset": "kerzman", "m": 2}}
            }"#,
        )
        .unwrap();
        let f = cfg.build_form().unwrap();
        assert!(f.monomials().is_some());
    }
}
