//! Capacity estimates: optimized single-letter quantities, SDP upper bounds and
//! the analytic certificates for the `N_s` and `M_d` families.

mod bounds;
mod certificates;
mod info;

pub use bounds::{
    beta_bound, default_witnesses, gamma_bound, private_upper_bound, transposition_bound,
    PrivateUpperBound, SdpBound,
};
pub use certificates::{
    verify_certificates, verify_certificates_against, CertificateCheck, CertificateFamily,
    CertificateReport, CheckKind, CERTIFICATE_TOL,
};
pub use info::{
    ea_capacity, effective_ensemble_size, holevo_ensemble, holevo_info, log_singularity_probe,
    private_ensemble, private_info, q1, q1_multiletter, renyi_q1_reduced, state_from_factor,
    subchannel_ordering, ProbeConfig, ProbeReport, Q1Strategy,
};

use crate::channels::ChannelPair;
use crate::error::Result;
use crate::optimize::{OptimConfig, OptimResult};
use crate::sdp::SdpSettings;

/// Slack allowed in the ordering checks of a [`CapacityReport`].
pub const ORDER_SLACK: f64 = 1e-6;

/// How one entry of a report was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub quantity: &'static str,
    pub iterations: usize,
    pub converged: bool,
    /// Duality gap for SDP bounds, function evaluations for searches.
    pub detail: f64,
}

impl Diagnostic {
    fn search(quantity: &'static str, res: &OptimResult) -> Self {
        Diagnostic {
            quantity,
            iterations: res.iterations,
            converged: res.converged,
            detail: res.evaluations as f64,
        }
    }

    fn sdp(quantity: &'static str, b: &SdpBound) -> Self {
        Diagnostic {
            quantity,
            iterations: b.iterations,
            converged: b.status == crate::sdp::SdpStatus::Optimal,
            detail: b.gap,
        }
    }
}

/// Every bound and lower estimate for one channel, in bits per use.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityReport {
    pub q1_lower: f64,
    pub gamma_log: f64,
    pub transposition_log: f64,
    pub beta_log: f64,
    pub holevo_lower: f64,
    /// Distinct states (weight above 1e−4) in the best Holevo ensemble found.
    pub holevo_states: usize,
    pub private_lower: f64,
    pub private_upper: f64,
    pub ea: f64,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Clone, Debug)]
pub struct ReportConfig {
    pub optim: OptimConfig,
    pub sdp: SdpSettings,
    /// Levels of the private upper bound program.
    pub levels: u32,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            optim: OptimConfig::default(),
            sdp: SdpSettings::default(),
            levels: 5,
        }
    }
}

impl CapacityReport {
    pub fn compute(pair: &ChannelPair, config: &ReportConfig) -> Result<Self> {
        let ((q1r, (hol, prv)), (ea, bnds)) = rayon::join(
            || {
                rayon::join(
                    || q1(pair, Q1Strategy::General, &config.optim),
                    || {
                        rayon::join(
                            || holevo_info(pair, &config.optim),
                            || private_info(pair, &config.optim),
                        )
                    },
                )
            },
            || {
                rayon::join(
                    || ea_capacity(pair, &config.optim),
                    || -> Result<_> {
                        let witnesses = default_witnesses(pair.d_in());
                        Ok((
                            gamma_bound(pair, &config.sdp)?,
                            transposition_bound(pair, &config.sdp)?,
                            beta_bound(pair, &config.sdp)?,
                            private_upper_bound(pair, config.levels, &witnesses, &config.sdp)?,
                        ))
                    },
                )
            },
        );
        let (q1r, hol, prv, ea) = (q1r?, hol?, prv?, ea?);
        let (gamma, transposition, beta, upper) = bnds?;
        let diagnostics = vec![
            Diagnostic::search("q1", &q1r),
            Diagnostic::sdp("gamma", &gamma),
            Diagnostic::sdp("transposition", &transposition),
            Diagnostic::sdp("beta", &beta),
            Diagnostic::search("holevo", &hol),
            Diagnostic::search("private", &prv),
            Diagnostic::sdp("private_upper", &upper.program),
            Diagnostic::search("ea", &ea),
        ];
        Ok(CapacityReport {
            q1_lower: q1r.value,
            gamma_log: gamma.log2,
            transposition_log: transposition.log2,
            beta_log: beta.log2,
            holevo_lower: hol.value,
            holevo_states: holevo_ensemble(&hol.argument).map_or(0, |(probs, states)| {
                effective_ensemble_size(&probs, &states, 1e-4)
            }),
            private_lower: prv.value,
            private_upper: upper.value,
            ea: ea.value,
            diagnostics,
        })
    }

    /// Descriptions of every violated ordering between entries.
    pub fn ordering_violations(&self) -> Vec<String> {
        let pairs = [
            (
                "q1_lower",
                self.q1_lower,
                "private_lower",
                self.private_lower,
            ),
            (
                "private_lower",
                self.private_lower,
                "holevo_lower",
                self.holevo_lower,
            ),
            ("holevo_lower", self.holevo_lower, "beta_log", self.beta_log),
            ("q1_lower", self.q1_lower, "gamma_log", self.gamma_log),
            (
                "gamma_log",
                self.gamma_log,
                "transposition_log",
                self.transposition_log,
            ),
            (
                "private_lower",
                self.private_lower,
                "private_upper",
                self.private_upper,
            ),
            ("holevo_lower", self.holevo_lower, "ea", self.ea),
        ];
        pairs
            .iter()
            .filter(|(_, lo, _, hi)| *lo > *hi + ORDER_SLACK)
            .map(|(a, lo, b, hi)| format!("{a} = {lo:.8} exceeds {b} = {hi:.8}"))
            .collect()
    }
}
