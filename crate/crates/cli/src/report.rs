use serde::Serialize;
use uirecon_core::{ConvergenceCertificate, EstimatorGains};

use crate::config::ScenarioConfig;

/// Spectrum summary of the error dynamics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub rho: f64,
    pub schur_stable: bool,
    /// `|M_u|_2`.
    pub m_u_norm: f64,
    /// Eigenvalues of `R` as `[re, im]`, largest modulus first.
    pub eigenvalues: Vec<[f64; 2]>,
    pub y_rank: usize,
    pub projector_form_discrepancy: f64,
}

impl CertificateSummary {
    pub fn new(cert: &ConvergenceCertificate, gains: &EstimatorGains, m_u_norm: f64) -> Self {
        Self {
            rho: cert.rho,
            schur_stable: cert.schur_stable,
            m_u_norm,
            eigenvalues: cert
                .eigvals_by_modulus()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
            y_rank: gains.y_rank,
            projector_form_discrepancy: gains.projector_form_discrepancy,
        }
    }

    /// Up to `count` eigenvalues ordered by distance to the unit circle.
    pub fn nearest_unit_circle(&self, count: usize) -> Vec<[f64; 2]> {
        let mut ev = self.eigenvalues.clone();
        let gap = |z: &[f64; 2]| (z[0].hypot(z[1]) - 1.0).abs();
        ev.sort_by(|a, b| gap(a).total_cmp(&gap(b)));
        ev.truncate(count);
        ev
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub config: ScenarioConfig,
    pub system: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    /// Resolved delay.
    #[serde(rename = "L")]
    pub delay: usize,
    /// Hankel columns `T + 1`.
    pub data_columns: usize,
    pub pe_order: usize,
    pub pe_rank: usize,
    /// Time step of the first estimate; entry `j` of every series is step
    /// `estimation_start_step + j`.
    pub estimation_start_step: usize,
    pub crate_version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub metadata: ReportMetadata,
    pub certificate: CertificateSummary,
    pub estimates: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_inputs: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_norms: Option<Vec<f64>>,
    /// `|U_p g - û_past| / max(1, |û_past|)` per step.
    pub residual_norms: Vec<f64>,
    /// `|Y g - y| / (|Y| |g| + |y|)` per step.
    pub constraint_residuals: Vec<f64>,
}

impl RunReport {
    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }
}
