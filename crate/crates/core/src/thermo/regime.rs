//! Machine classification from the signs of the currents.

use super::Currents;
use crate::model::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Refrigerator,
    Engine,
    Accelerator,
    Boundary,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Refrigerator => "R",
            Regime::Engine => "E",
            Regime::Accelerator => "A",
            Regime::Boundary => "B",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Efficiency for an engine, COP otherwise; `None` on a boundary.
    pub figure_of_merit: Option<f64>,
    pub carnot_bound: f64,
}

pub const DEFAULT_EPS: f64 = 1e-9;

/// Sign pattern of `(W, Q_h, Q_c)` with a dead band of width `eps`. The
/// figures of merit depend only on the two frequencies.
pub fn classify_regime(c: &Currents, s: &Scenario, eps: f64) -> RegimeReport {
    let (w, qh, qc) = (c.w(), c.q_h(), c.q_c());
    let (wh, wc) = (s.hot().omega, s.cold().omega);
    let carnot_bound = 1.0 - s.cold().temperature / s.hot().temperature;
    let (regime, figure_of_merit) = if w > eps && qh < -eps && qc > eps {
        (Regime::Refrigerator, Some(wc / (wh - wc)))
    } else if w < -eps && qh > eps && qc < -eps {
        (Regime::Engine, Some(1.0 - wc / wh))
    } else if w > eps && qh > eps && qc < -eps {
        (Regime::Accelerator, Some(wh / (wh - wc)))
    } else {
        (Regime::Boundary, None)
    };
    RegimeReport {
        regime,
        figure_of_merit,
        carnot_bound,
    }
}
