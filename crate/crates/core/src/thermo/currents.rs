//! Closed-form currents as spin expectations on the steady state.
//!
//! Work is evaluated through `F_{i,n} = [H_I, sigma-_{i,n}]`, which holds for
//! any ensemble size and any exchange-type interaction.

use num_complex::Complex64;

use super::Currents;
use crate::model::{Bath, DissipationMode, RateTable, Scenario};
use crate::qmat::{sigma_minus, trace_of_product, CMatrix, DensityMatrix};
use crate::{Error, Result};

pub(crate) fn check_dim(rho: &DensityMatrix, s: &Scenario) -> Result<()> {
    if rho.dim() != s.dim() {
        return Err(Error::Dimension(format!(
            "state has dimension {}, scenario needs {}",
            rho.dim(),
            s.dim()
        )));
    }
    Ok(())
}

/// Spin ladder operators of one ensemble.
pub(crate) struct Ladders {
    pub minus: Vec<CMatrix>,
    pub plus: Vec<CMatrix>,
}

impl Ladders {
    pub fn new(s: &Scenario, bath: Bath) -> Self {
        let minus: Vec<CMatrix> = (0..s.n_sites())
            .map(|n| s.spin_op(bath, n, &sigma_minus()))
            .collect();
        let plus = minus.iter().map(|m| m.adjoint()).collect();
        Self { minus, plus }
    }
}

fn ev(op: &CMatrix, rho: &DensityMatrix) -> Complex64 {
    trace_of_product(op, rho.matrix())
}

/// `<(sigma+_a sigma-_b)_+>` = `<sigma+_a sigma-_b + sigma-_a sigma+_b>`.
pub(crate) fn sym_exchange(a_plus: &CMatrix, b_minus: &CMatrix, rho: &DensityMatrix) -> f64 {
    2.0 * ev(&(a_plus * b_minus), rho).re
}

/// Local heat `[hot, cold]`.
pub fn heat_local(rho: &DensityMatrix, s: &Scenario) -> Result<[f64; 2]> {
    heat_local_with_rates(rho, s, &s.rate_table()?)
}

pub fn heat_local_with_rates(rho: &DensityMatrix, s: &Scenario, rates: &RateTable) -> Result<[f64; 2]> {
    check_dim(rho, s)?;
    let mut out = [0.0; 2];
    for (k, bath) in Bath::BOTH.into_iter().enumerate() {
        let omega = s.ensemble(bath).omega;
        let l = Ladders::new(s, bath);
        let mut acc = 0.0;
        for n in 0..s.n_sites() {
            let ground = ev(&(&l.minus[n] * &l.plus[n]), rho).re;
            let excited = ev(&(&l.plus[n] * &l.minus[n]), rho).re;
            acc += rates.plus(bath, n, n) * ground - rates.minus(bath, n, n) * excited;
        }
        out[k] = omega * acc;
    }
    Ok(out)
}

/// Non-local heat `[hot, cold]`; exactly zero for independent dissipation.
pub fn heat_nonlocal(rho: &DensityMatrix, s: &Scenario) -> Result<[f64; 2]> {
    heat_nonlocal_with_rates(rho, s, &s.rate_table()?)
}

pub fn heat_nonlocal_with_rates(
    rho: &DensityMatrix,
    s: &Scenario,
    rates: &RateTable,
) -> Result<[f64; 2]> {
    check_dim(rho, s)?;
    let mut out = [0.0; 2];
    if s.mode() == DissipationMode::Independent {
        return Ok(out);
    }
    for (k, bath) in Bath::BOTH.into_iter().enumerate() {
        let omega = s.ensemble(bath).omega;
        let l = Ladders::new(s, bath);
        let mut acc = 0.0;
        for n in 0..s.n_sites() {
            for m in 0..s.n_sites() {
                let weight = match s.mode() {
                    DissipationMode::Common if m != n => 0.5,
                    DissipationMode::Cascaded if m > n => 1.0,
                    _ => continue,
                };
                let bracket = rates.plus(bath, n, m) - rates.minus(bath, n, m);
                if bracket != 0.0 {
                    acc += weight * bracket * sym_exchange(&l.plus[n], &l.minus[m], rho);
                }
            }
        }
        out[k] = omega * acc;
    }
    Ok(out)
}

/// `F_{i,n} = [H_I, sigma-_{i,n}]` for every site of `bath`.
pub(crate) fn f_operators(s: &Scenario, bath: Bath, h_i: &CMatrix) -> Vec<CMatrix> {
    Ladders::new(s, bath)
        .minus
        .iter()
        .map(|m| h_i * m - m * h_i)
        .collect()
}

/// `Re{gamma^- <sigma+_n F_m> - gamma^+ <F_m sigma+_n>}`.
fn work_term(
    rates: &RateTable,
    bath: Bath,
    n: usize,
    m: usize,
    plus_n: &CMatrix,
    f_m: &CMatrix,
    rho: &DensityMatrix,
) -> f64 {
    let gm = rates.minus(bath, n, m);
    let gp = rates.plus(bath, n, m);
    let mut acc = Complex64::new(0.0, 0.0);
    if gm != 0.0 {
        acc += ev(&(plus_n * f_m), rho) * gm;
    }
    if gp != 0.0 {
        acc -= ev(&(f_m * plus_n), rho) * gp;
    }
    acc.re
}

pub fn work_local(rho: &DensityMatrix, s: &Scenario) -> Result<f64> {
    work_local_with_rates(rho, s, &s.rate_table()?)
}

pub fn work_local_with_rates(rho: &DensityMatrix, s: &Scenario, rates: &RateTable) -> Result<f64> {
    check_dim(rho, s)?;
    let h_i = s.interaction_hamiltonian();
    let mut total = 0.0;
    for bath in Bath::BOTH {
        let l = Ladders::new(s, bath);
        let f = f_operators(s, bath, &h_i);
        for n in 0..s.n_sites() {
            total += work_term(rates, bath, n, n, &l.plus[n], &f[n], rho);
        }
    }
    Ok(total)
}

pub fn work_nonlocal(rho: &DensityMatrix, s: &Scenario) -> Result<f64> {
    work_nonlocal_with_rates(rho, s, &s.rate_table()?)
}

pub fn work_nonlocal_with_rates(
    rho: &DensityMatrix,
    s: &Scenario,
    rates: &RateTable,
) -> Result<f64> {
    check_dim(rho, s)?;
    if s.mode() == DissipationMode::Independent {
        return Ok(0.0);
    }
    let h_i = s.interaction_hamiltonian();
    let mut total = 0.0;
    for bath in Bath::BOTH {
        let l = Ladders::new(s, bath);
        let f = f_operators(s, bath, &h_i);
        for n in 0..s.n_sites() {
            for m in 0..s.n_sites() {
                let weight = match s.mode() {
                    DissipationMode::Common if m != n => 1.0,
                    DissipationMode::Cascaded if m > n => 2.0,
                    _ => continue,
                };
                total += weight * work_term(rates, bath, n, m, &l.plus[n], &f[m], rho);
            }
        }
    }
    Ok(total)
}

pub fn closed_form_currents(rho: &DensityMatrix, s: &Scenario) -> Result<Currents> {
    closed_form_currents_with_rates(rho, s, &s.rate_table()?)
}

pub fn closed_form_currents_with_rates(
    rho: &DensityMatrix,
    s: &Scenario,
    rates: &RateTable,
) -> Result<Currents> {
    let ql = heat_local_with_rates(rho, s, rates)?;
    let qn = heat_nonlocal_with_rates(rho, s, rates)?;
    Ok(Currents {
        w_loc: work_local_with_rates(rho, s, rates)?,
        w_nonloc: work_nonlocal_with_rates(rho, s, rates)?,
        q_h_loc: ql[0],
        q_h_nonloc: qn[0],
        q_c_loc: ql[1],
        q_c_nonloc: qn[1],
    })
}
