//! Steady-state heat and work currents, coherence functionals and machine
//! regimes.
//!
//! Heat is positive when energy flows into the system. Currents are in units
//! of `omega_c^2`.

pub mod coherence;
pub mod currents;
pub mod explicit;
pub mod oracle;
pub mod regime;
pub mod sweep;

pub use coherence::{coherence_metrics, CoherenceMetrics};
pub use currents::{closed_form_currents, heat_local, heat_nonlocal, work_local, work_nonlocal};
pub use oracle::oracle_currents;
pub use regime::{classify_regime, Regime, RegimeReport};

use crate::model::Bath;

/// Current magnitude (units of `omega_c^2`) below which a net flow is
/// treated as vanishing when judging relative errors. The reference
/// currents are of order 1e-3, and net currents are differences of gross
/// flows of order one, so roundoff alone leaves residuals near 1e-15.
pub const CURRENT_FLOOR: f64 = 1e-5;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Currents {
    pub w_loc: f64,
    pub w_nonloc: f64,
    pub q_h_loc: f64,
    pub q_h_nonloc: f64,
    pub q_c_loc: f64,
    pub q_c_nonloc: f64,
}

impl Currents {
    pub fn w(&self) -> f64 {
        self.w_loc + self.w_nonloc
    }

    pub fn q_h(&self) -> f64 {
        self.q_h_loc + self.q_h_nonloc
    }

    pub fn q_c(&self) -> f64 {
        self.q_c_loc + self.q_c_nonloc
    }

    pub fn q(&self, bath: Bath) -> f64 {
        match bath {
            Bath::Hot => self.q_h(),
            Bath::Cold => self.q_c(),
        }
    }

    /// `|W + Q_h + Q_c|`, zero at a steady state.
    pub fn first_law_residual(&self) -> f64 {
        (self.w() + self.q_h() + self.q_c()).abs()
    }

    /// Whether the first law holds to `1e-9` of the current scale, with the
    /// scale floored at [`CURRENT_FLOOR`].
    pub fn first_law_holds(&self) -> bool {
        self.first_law_residual() < 1e-9 * self.scale(CURRENT_FLOOR)
    }

    /// Largest current magnitude, floored at `floor`.
    pub fn scale(&self, floor: f64) -> f64 {
        self.w().abs().max(self.q_h().abs()).max(self.q_c().abs()).max(floor)
    }

    /// `-Q_h/T_h - Q_c/T_c`.
    pub fn entropy_production(&self, t_hot: f64, t_cold: f64) -> f64 {
        -self.q_h() / t_hot - self.q_c() / t_cold
    }

    /// Largest component-wise difference.
    pub fn max_abs_diff(&self, other: &Currents) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn components(&self) -> [f64; 6] {
        [
            self.w_loc,
            self.w_nonloc,
            self.q_h_loc,
            self.q_h_nonloc,
            self.q_c_loc,
            self.q_c_nonloc,
        ]
    }
}

/// Closed-form currents of `rho` and of `rho` with every off-diagonal
/// element in the product energy basis removed.
pub fn dephasing_probe(
    rho: &crate::qmat::DensityMatrix,
    s: &crate::model::Scenario,
) -> crate::Result<(Currents, Currents)> {
    Ok((closed_form_currents(rho, s)?, closed_form_currents(&rho.dephased(), s)?))
}
