//! Two-pair work currents written out term by term.
//!
//! These duplicate the generic evaluation in [`super::currents`] for
//! `N = 2` and exist to cross-check it.

use super::currents::check_dim;
use crate::model::{Bath, DissipationMode, Interaction, RateTable, Scenario};
use crate::qmat::{sigma_minus, sigma_plus, sigma_z, trace_of_product, CMatrix, DensityMatrix};
use crate::{Error, Result};

/// Spin operators of a two-pair system with 1-based site labels.
pub(crate) struct Pairs<'a> {
    s: &'a Scenario,
    rho: &'a DensityMatrix,
}

impl<'a> Pairs<'a> {
    pub fn new(s: &'a Scenario, rho: &'a DensityMatrix) -> Result<Self> {
        check_dim(rho, s)?;
        if s.n_sites() != 2 {
            return Err(Error::Unsupported(format!(
                "closed forms are written for two sites per ensemble, got {}",
                s.n_sites()
            )));
        }
        Ok(Self { s, rho })
    }

    fn op(&self, bath: Bath, n: usize, op: CMatrix) -> CMatrix {
        self.s.spin_op(bath, n - 1, &op)
    }

    /// `<sigma^z_{a}>`.
    pub fn z(&self, a: (Bath, usize)) -> f64 {
        trace_of_product(&self.op(a.0, a.1, sigma_z()), self.rho.matrix()).re
    }

    /// `<(sigma+_p sigma-_m)_+>`.
    pub fn pair(&self, p: (Bath, usize), m: (Bath, usize)) -> f64 {
        let op = self.op(p.0, p.1, sigma_plus()) * self.op(m.0, m.1, sigma_minus());
        2.0 * trace_of_product(&op, self.rho.matrix()).re
    }

    /// `Re <sigma+_p sigma-_m>`.
    pub fn re_pair(&self, p: (Bath, usize), m: (Bath, usize)) -> f64 {
        0.5 * self.pair(p, m)
    }

    /// `<sigma^z_z (sigma+_p sigma-_m)_+>`.
    pub fn triple(&self, z: (Bath, usize), p: (Bath, usize), m: (Bath, usize)) -> f64 {
        let op = self.op(z.0, z.1, sigma_z())
            * self.op(p.0, p.1, sigma_plus())
            * self.op(m.0, m.1, sigma_minus());
        2.0 * trace_of_product(&op, self.rho.matrix()).re
    }
}

const H: Bath = Bath::Hot;
const C: Bath = Bath::Cold;

/// `Gamma_{h n, c k}` with 1-based labels.
pub fn gamma_pair(rates: &RateTable, n: usize, k: usize) -> f64 {
    let (n, k) = (n - 1, k - 1);
    rates.minus(H, n, n) + rates.plus(H, n, n) + rates.minus(C, k, k) + rates.plus(C, k, k)
}

fn omega_matrix(s: &Scenario) -> [[f64; 2]; 2] {
    match s.interaction() {
        Interaction::AllToAll(m) => [[m[0][0], m[0][1]], [m[1][0], m[1][1]]],
        Interaction::Pairwise(v) => [[v[0], 0.0], [0.0, v[1]]],
        Interaction::None => [[0.0; 2]; 2],
    }
}

/// Local work for all-to-all exchange.
pub fn work_local_type1(rho: &DensityMatrix, s: &Scenario) -> Result<f64> {
    let p = Pairs::new(s, rho)?;
    let r = s.rate_table()?;
    let o = omega_matrix(s);
    Ok(-0.5
        * (o[0][0] * gamma_pair(&r, 1, 1) * p.pair((H, 1), (C, 1))
            + o[1][1] * gamma_pair(&r, 2, 2) * p.pair((H, 2), (C, 2))
            + o[0][1] * gamma_pair(&r, 1, 2) * p.pair((H, 1), (C, 2))
            + o[1][0] * gamma_pair(&r, 2, 1) * p.pair((H, 2), (C, 1))))
}

/// Local work for pairwise exchange.
pub fn work_local_type2(rho: &DensityMatrix, s: &Scenario) -> Result<f64> {
    let p = Pairs::new(s, rho)?;
    let r = s.rate_table()?;
    let o = omega_matrix(s);
    Ok(-0.5
        * (o[0][0] * gamma_pair(&r, 1, 1) * p.pair((H, 1), (C, 1))
            + o[1][1] * gamma_pair(&r, 2, 2) * p.pair((H, 2), (C, 2))))
}

fn cross_brackets(s: &Scenario) -> Result<(f64, f64)> {
    let r = s.rate_table()?;
    Ok((
        r.minus(H, 0, 1) - r.plus(H, 0, 1),
        r.minus(C, 0, 1) - r.plus(C, 0, 1),
    ))
}

/// Shared-bath non-local work for all-to-all exchange.
pub fn work_nonlocal_common_type1(rho: &DensityMatrix, s: &Scenario) -> Result<f64> {
    let p = Pairs::new(s, rho)?;
    let (bh, bc) = cross_brackets(s)?;
    let o = omega_matrix(s);
    let hot = o[0][0] * p.triple((H, 1), (H, 2), (C, 1))
        + o[0][1] * p.triple((H, 1), (H, 2), (C, 2))
        + o[1][0] * p.triple((H, 2), (H, 1), (C, 1))
        + o[1][1] * p.triple((H, 2), (H, 1), (C, 2));
    let cold = o[0][0] * p.triple((C, 1), (C, 2), (H, 1))
        + o[1][0] * p.triple((C, 1), (C, 2), (H, 2))
        + o[0][1] * p.triple((C, 2), (C, 1), (H, 1))
        + o[1][1] * p.triple((C, 2), (C, 1), (H, 2));
    Ok(0.5 * bh * hot + 0.5 * bc * cold)
}

/// Shared-bath non-local work for pairwise exchange.
pub fn work_nonlocal_common_type2(rho: &DensityMatrix, s: &Scenario) -> Result<f64> {
    let p = Pairs::new(s, rho)?;
    let (bh, bc) = cross_brackets(s)?;
    let o = omega_matrix(s);
    let hot = o[0][0] * p.triple((H, 1), (H, 2), (C, 1)) + o[1][1] * p.triple((H, 2), (H, 1), (C, 2));
    let cold = o[0][0] * p.triple((C, 1), (C, 2), (H, 1)) + o[1][1] * p.triple((C, 2), (C, 1), (H, 2));
    Ok(0.5 * bh * hot + 0.5 * bc * cold)
}

/// Cascaded non-local work for all-to-all exchange.
pub fn work_nonlocal_cascaded_type1(rho: &DensityMatrix, s: &Scenario) -> Result<f64> {
    let p = Pairs::new(s, rho)?;
    let (bh, bc) = cross_brackets(s)?;
    let o = omega_matrix(s);
    let hot = o[1][0] * p.triple((H, 2), (H, 1), (C, 1)) + o[1][1] * p.triple((H, 2), (H, 1), (C, 2));
    let cold = o[0][1] * p.triple((C, 2), (C, 1), (H, 1)) + o[1][1] * p.triple((C, 2), (C, 1), (H, 2));
    Ok(bh * hot + bc * cold)
}

/// Cascaded non-local work for pairwise exchange: only the second pair's
/// strength enters.
pub fn work_nonlocal_cascaded_type2(rho: &DensityMatrix, s: &Scenario) -> Result<f64> {
    let p = Pairs::new(s, rho)?;
    let (bh, bc) = cross_brackets(s)?;
    let o = omega_matrix(s);
    Ok(o[1][1] * bh * p.triple((H, 2), (H, 1), (C, 2)) + o[1][1] * bc * p.triple((C, 2), (C, 1), (H, 2)))
}

/// Term-by-term local and non-local work for the scenario's mode and
/// interaction type.
pub fn work_explicit(rho: &DensityMatrix, s: &Scenario) -> Result<(f64, f64)> {
    let (local, nonlocal) = match (s.interaction(), s.mode()) {
        (Interaction::AllToAll(_), DissipationMode::Common) => (
            work_local_type1(rho, s)?,
            work_nonlocal_common_type1(rho, s)?,
        ),
        (Interaction::AllToAll(_), DissipationMode::Cascaded) => (
            work_local_type1(rho, s)?,
            work_nonlocal_cascaded_type1(rho, s)?,
        ),
        (Interaction::AllToAll(_), DissipationMode::Independent) => (work_local_type1(rho, s)?, 0.0),
        (_, DissipationMode::Common) => (
            work_local_type2(rho, s)?,
            work_nonlocal_common_type2(rho, s)?,
        ),
        (_, DissipationMode::Cascaded) => (
            work_local_type2(rho, s)?,
            work_nonlocal_cascaded_type2(rho, s)?,
        ),
        (_, DissipationMode::Independent) => (work_local_type2(rho, s)?, 0.0),
    };
    Ok((local, nonlocal))
}
