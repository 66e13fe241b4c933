//! Currents from double commutators of the spin-ancilla couplings, evaluated
//! over the steady state times thermal ancillas. Independent of the
//! closed forms in [`super::currents`].

use super::currents::check_dim;
use super::Currents;
use crate::model::{
    ancilla_hamiltonian, build_coupling_ops, system_hamiltonian_kron, Bath, CouplingOp,
    DissipationMode, Scenario,
};
use crate::qmat::{oscillator_cutoff_for_tail, thermal_oscillator_state, truncated_tail_mass, DensityMatrix, KronOp, CUTOFF_TAIL};
use crate::{Error, Result};

/// Tail bound for the oracle's ancillas. The collision policy's 1e-8 leaves
/// errors of a few 1e-6 relative at the largest cutoffs.
pub const ORACLE_TAIL: f64 = 1e-12;

pub fn oracle_currents(rho: &DensityMatrix, s: &Scenario) -> Result<Currents> {
    let cutoffs = [s.hot(), s.cold()].map(|e| oscillator_cutoff_for_tail(e.beta_omega(), ORACLE_TAIL));
    oracle_currents_with_cutoffs(rho, s, cutoffs)
}

/// Oracle on explicit ancilla cutoffs; fails if a cutoff leaves more than
/// [`CUTOFF_TAIL`] of thermal probability outside.

pub fn oracle_currents_with_cutoffs(
    rho: &DensityMatrix,
    s: &Scenario,
    cutoffs: [usize; 2],
) -> Result<Currents> {
    check_dim(rho, s)?;
    let mut ancillas = Vec::with_capacity(2);
    for (slot, bath) in Bath::BOTH.into_iter().enumerate() {
        let bw = s.ensemble(bath).beta_omega();
        let tail = truncated_tail_mass(bw, cutoffs[slot]);
        if tail > CUTOFF_TAIL {
            return Err(Error::InvalidArgument(format!(
                "{} ancilla cutoff {} leaves tail mass {tail:.3e} above {CUTOFF_TAIL:e}",
                bath.tag(),
                cutoffs[slot]
            )));
        }
        ancillas.push(thermal_oscillator_state(bw, cutoffs[slot])?);
    }
    let states = [rho.matrix(), ancillas[0].matrix(), ancillas[1].matrix()];
    let spins = 2 * s.n_sites();
    let mean = |op: &KronOp| op.merge_leading(spins).expectation(&states).re;

    let couplings = build_coupling_ops(s, cutoffs)?;
    let h_sys = system_hamiltonian_kron(s, cutoffs);
    let mut c = Currents::default();
    for bath in Bath::BOTH {
        let v: Vec<&CouplingOp> = couplings.iter().filter(|op| op.bath == bath).collect();
        let h_env = ancilla_hamiltonian(s, bath, cutoffs);
        let h_total = h_sys.clone().add(&h_env);
        // <[V_a, [V_b, X]]>
        let double = |a: usize, b: usize, x: &KronOp| mean(&v[a].op.commutator(&v[b].op.commutator(x)));

        let mut w_loc = 0.0;
        let mut q_loc = 0.0;
        for n in 0..v.len() {
            w_loc -= 0.5 * double(n, n, &h_total);
            q_loc += 0.5 * double(n, n, &h_env);
        }
        let mut w_non = 0.0;
        let mut q_non = 0.0;
        for n in 0..v.len() {
            for m in 0..v.len() {
                match s.mode() {
                    DissipationMode::Common if m != n => {
                        w_non -= 0.5 * double(m, n, &h_total);
                        q_non += 0.5 * double(m, n, &h_env);
                    }
                    DissipationMode::Cascaded if m > n => {
                        w_non -= double(n, m, &h_total);
                        q_non += double(n, m, &h_env);
                    }
                    _ => {}
                }
            }
        }
        c.w_loc += w_loc;
        c.w_nonloc += w_non;
        match bath {
            Bath::Hot => {
                c.q_h_loc = q_loc;
                c.q_h_nonloc = q_non;
            }
            Bath::Cold => {
                c.q_c_loc = q_loc;
                c.q_c_nonloc = q_non;
            }
        }
    }
    Ok(c)
}
