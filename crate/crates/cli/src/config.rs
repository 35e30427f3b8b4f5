use qclab::fields::FieldSpec;
use qclab::grid::ComplexGrid;
use qclab::sphere::SpherePoint;
use qclab::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapChoice {
    Negation,
    Doubling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentativeChoice {
    Bumps,
    Solver,
}

/// Everything a run reads. Every field is optional in the file; command-line flags win.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub grid: GridConfig,
    pub tol_scale: f64,
    /// Beltrami coefficient for `solve` and `de-extend`.
    pub field: FieldSpec,
    /// Sup norm of the random two-disk scenario coefficient.
    pub norm: f64,
    /// Möbius map acting on the two-disk set.
    pub map: MapChoice,
    /// Imposes `μ∘(-z) = μ` on the scenario coefficient.
    pub symmetric: bool,
    /// Marked points of the motion; must contain 0, 1 and ∞.
    pub points: Vec<SpherePoint>,
    /// Direction of the `t·μ₀` family.
    pub direction: FieldSpec,
    pub x: Complex64,
    /// Parameters drawn by `render`.
    pub xs: Vec<f64>,
    pub steps: Vec<f64>,
    pub representative: RepresentativeChoice,
    /// Corners of the initial curve; every marked point must be among them.
    pub curve: Vec<SpherePoint>,
    pub per_edge: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let p = SpherePoint::new;
        let bump = |center: Complex64, radius: f64, amplitude: Complex64| qclab::fields::Bump { center, radius, amplitude };
        ExperimentConfig {
            seed: 7,
            grid: GridConfig { half_width: 4.0, n: 512 },
            tol_scale: 1.0,
            field: FieldSpec::Zero,
            norm: 0.3,
            map: MapChoice::Negation,
            symmetric: false,
            points: vec![p(0.0, 0.0), p(1.0, 0.0), SpherePoint::Infinity, p(0.5, 0.3), p(-0.4, 0.6)],
            direction: FieldSpec::Bumps {
                bumps: vec![
                    bump(Complex64::new(0.3, 0.2), 0.8, Complex64::new(0.6, 0.3)),
                    bump(Complex64::new(-0.5, -0.4), 0.6, Complex64::new(-0.2, 0.5)),
                ],
            },
            x: Complex64::new(0.3, 0.0),
            xs: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            steps: vec![0.1, 0.05, 0.025],
            representative: RepresentativeChoice::Bumps,
            curve: vec![
                SpherePoint::Infinity,
                p(-3.0, 0.0),
                p(-0.4, 0.6),
                p(0.0, 0.0),
                p(0.5, 0.3),
                p(1.0, 0.0),
                p(3.0, 0.0),
            ],
            per_edge: 16,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn validate(&self) -> Result<ComplexGrid, String> {
        if !(self.tol_scale > 0.0) {
            return Err(format!("tol_scale must be positive, got {}", self.tol_scale));
        }
        if !(0.0..1.0).contains(&self.norm) {
            return Err(format!("norm must lie in [0, 1), got {}", self.norm));
        }
        if self.steps.is_empty() || self.steps.iter().any(|&h| !(h > 0.0)) {
            return Err("steps must be a non-empty list of positive numbers".into());
        }
        if self.per_edge == 0 {
            return Err("per_edge must be at least 1".into());
        }
        ComplexGrid::new(self.grid.half_width, self.grid.n).map_err(|e| e.to_string())
    }
}
