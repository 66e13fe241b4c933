//! Frequency sweeps and efficiency at maximum power.

use rayon::prelude::*;

use super::{classify_regime, closed_form_currents, coherence_metrics, CoherenceMetrics, Currents, Regime, RegimeReport};
use crate::liouvillian::{assemble, steady_state};
use crate::model::Scenario;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct SweepPoint {
    /// `omega_h / omega_c`.
    pub ratio: f64,
    pub currents: Currents,
    pub coherence: Option<CoherenceMetrics>,
    pub regime: RegimeReport,
    pub first_law_residual: f64,
    pub entropy_production: f64,
    pub spectral_gap: f64,
    /// Solver failure or kernel degeneracy; currents are zero on failure.
    pub error: Option<String>,
}

/// Steady state and derived quantities with the hot frequency set to
/// `ratio * omega_c`.
pub fn evaluate_point(base: &Scenario, ratio: f64, eps: f64) -> SweepPoint {
    let failed = |msg: String, scenario: &Scenario| SweepPoint {
        ratio,
        currents: Currents::default(),
        coherence: None,
        regime: classify_regime(&Currents::default(), scenario, eps),
        first_law_residual: f64::NAN,
        entropy_production: f64::NAN,
        spectral_gap: f64::NAN,
        error: Some(msg),
    };
    let s = match base.with_hot_omega(ratio * base.cold().omega) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string(), base),
    };
    let computed = assemble(&s).and_then(|l| steady_state(&l)).and_then(|ss| {
        let c = closed_form_currents(&ss.rho, &s)?;
        let coherence = if s.n_sites() == 2 {
            Some(coherence_metrics(&ss.rho, &s)?)
        } else {
            None
        };
        Ok((ss, c, coherence))
    });
    match computed {
        Err(e) => failed(e.to_string(), &s),
        Ok((ss, c, coherence)) => SweepPoint {
            ratio,
            currents: c,
            coherence,
            regime: classify_regime(&c, &s, eps),
            first_law_residual: c.first_law_residual(),
            entropy_production: c.entropy_production(s.hot().temperature, s.cold().temperature),
            spectral_gap: ss.spectral_gap,
            error: ss
                .degenerate
                .then(|| format!("degenerate kernel (gap {:.3e})", ss.spectral_gap)),
        },
    }
}

/// Evaluates every ratio in parallel; output order is input order.
pub fn sweep(base: &Scenario, ratios: &[f64], eps: f64) -> Vec<SweepPoint> {
    ratios
        .par_iter()
        .map(|&r| evaluate_point(base, r, eps))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxPower {
    pub eta_max: f64,
    /// Largest extracted power `-W`, positive.
    pub power_max: f64,
    /// Grid ratio nearest the optimum.
    pub ratio: f64,
    /// True when the optimum came from the three-point fit.
    pub refined: bool,
}

/// `(eta, W)` at each engine point, in sweep order.
pub fn engine_curve(points: &[SweepPoint]) -> Vec<(f64, f64)> {
    points
        .iter()
        .filter(|p| p.regime.regime == Regime::Engine)
        .filter_map(|p| p.regime.figure_of_merit.map(|eta| (eta, p.currents.w())))
        .collect()
}

/// Vertex of the parabola through three points, if it opens downward and
/// lies inside the bracket.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d12 - d01) / (x[2] - x[0]);
    if !(a < 0.0) {
        return None;
    }
    let b = d01 - a * (x[0] + x[1]);
    let xv = -b / (2.0 * a);
    if !(x[0] <= xv && xv <= x[2]) {
        return None;
    }
    let yv = y[0] + d01 * (xv - x[0]) + a * (xv - x[0]) * (xv - x[1]);
    Some((xv, yv))
}

/// Efficiency at the largest extracted power over the engine points, refined
/// by a parabola through the discrete maximum and its two neighbours.
pub fn efficiency_at_max_power(points: &[SweepPoint]) -> Result<MaxPower> {
    let engine: Vec<(usize, f64, f64)> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.regime.regime == Regime::Engine)
        .filter_map(|(i, p)| p.regime.figure_of_merit.map(|eta| (i, eta, -p.currents.w())))
        .collect();
    let best = engine
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .2.total_cmp(&b.1 .2))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::InvalidArgument("no engine points in the sweep".into()))?;
    let (i, eta, power) = engine[best];
    let neighbours = best > 0
        && best + 1 < engine.len()
        && engine[best - 1].0 + 1 == i
        && engine[best + 1].0 == i + 1;
    if neighbours {
        let pts = [engine[best - 1], engine[best], engine[best + 1]];
        if let Some((eta_v, p_v)) = parabola_vertex(pts.map(|p| p.1), pts.map(|p| p.2)) {
            return Ok(MaxPower {
                eta_max: eta_v,
                power_max: p_v,
                ratio: points[i].ratio,
                refined: true,
            });
        }
    }
    Ok(MaxPower {
        eta_max: eta,
        power_max: power,
        ratio: points[i].ratio,
        refined: false,
    })
}
