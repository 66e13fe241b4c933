//! Coherence functionals of a two-pair steady state.

use super::explicit::Pairs;
use crate::model::{Bath, DissipationMode, Interaction, Scenario};
use crate::qmat::DensityMatrix;
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceMetrics {
    /// e.g. `com(2)` or `ind(1)`.
    pub variant: String,
    pub c_loc: f64,
    pub c_nonloc: f64,
    /// `c_nonloc` with each expectation split into `<sigma^z> <(...)_+>`.
    pub c_nonloc_factored: f64,
}

const BATHS: [(Bath, Bath); 2] = [(Bath::Hot, Bath::Cold), (Bath::Cold, Bath::Hot)];

/// `(sigma^z site, sigma+ site, sigma- site)` triples summed by each
/// non-local functional. Labels are 1-based.
fn nonlocal_triples(cascaded: bool, all_to_all: bool) -> Vec<((Bath, usize), (Bath, usize), (Bath, usize))> {
    let mut out = Vec::new();
    for (i, j) in BATHS {
        if cascaded {
            let targets: &[usize] = if all_to_all { &[1, 2] } else { &[2] };
            for &k in targets {
                out.push(((i, 2), (i, 1), (j, k)));
            }
        } else {
            for (n, nbar) in [(1, 2), (2, 1)] {
                if all_to_all {
                    for k in [1, 2] {
                        out.push(((i, n), (i, nbar), (j, k)));
                    }
                } else {
                    out.push(((i, n), (i, nbar), (j, n)));
                }
            }
        }
    }
    out
}

/// The local and non-local coherence functionals matching the scenario.
/// Independent dissipation uses the shared-bath forms; a scenario without
/// exchange uses the pairwise forms.
pub fn coherence_metrics(rho: &DensityMatrix, s: &Scenario) -> Result<CoherenceMetrics> {
    let p = Pairs::new(s, rho)?;
    let all_to_all = matches!(s.interaction(), Interaction::AllToAll(_));
    let cascaded = s.mode() == DissipationMode::Cascaded;
    let (h, c) = (Bath::Hot, Bath::Cold);

    let c_loc = if all_to_all {
        let mut acc = 0.0;
        for n in 1..=2 {
            for k in 1..=2 {
                acc += p.re_pair((h, n), (c, k));
            }
        }
        -2.0 * acc
    } else {
        -2.0 * (p.re_pair((h, 1), (c, 1)) + p.re_pair((h, 2), (c, 2)))
    };

    let mut c_nonloc = 0.0;
    let mut factored = 0.0;
    for (z, plus, minus) in nonlocal_triples(cascaded, all_to_all) {
        c_nonloc += p.triple(z, plus, minus);
        factored += p.z(z) * p.pair(plus, minus);
    }

    Ok(CoherenceMetrics {
        variant: format!("{}({})", s.mode().tag(), if all_to_all { 1 } else { 2 }),
        c_loc,
        c_nonloc,
        c_nonloc_factored: factored,
    })
}
