//! Scenario description, Hamiltonian pieces and dissipation rates.

pub mod config;

use crate::qmat::{
    self, bose_occupation, embed_site_op, fock_ops, number_op, re, sigma_minus, sigma_plus,
    CMatrix, HilbertLayout, KronOp,
};
use crate::{Error, Result};

pub use crate::qmat::Bath;

/// One ensemble of identical two-level sites sharing a bath.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub n_sites: usize,
    pub omega: f64,
    pub g: Vec<f64>,
    pub temperature: f64,
}

impl EnsembleSpec {
    pub fn new(omega: f64, g: Vec<f64>, temperature: f64) -> Self {
        Self {
            n_sites: g.len(),
            omega,
            g,
            temperature,
        }
    }

    pub fn beta_omega(&self) -> f64 {
        self.omega / self.temperature
    }

    fn validate(&self, bath: Bath) -> Result<()> {
        let name = match bath {
            Bath::Hot => "hot",
            Bath::Cold => "cold",
        };
        if self.n_sites == 0 {
            return Err(Error::InvalidArgument(format!("{name}: n_sites must be at least 1")));
        }
        if self.g.len() != self.n_sites {
            return Err(Error::InvalidArgument(format!(
                "{name}: g has {} entries, expected n_sites = {}",
                self.g.len(),
                self.n_sites
            )));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{name}: omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{name}: temperature must be positive, got {}",
                self.temperature
            )));
        }
        if let Some(g) = self.g.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name}: couplings must be non-negative, got {g}"
            )));
        }
        Ok(())
    }
}

/// Exchange coupling between the hot and cold ensembles.
#[derive(Clone, Debug, PartialEq)]
pub enum Interaction {
    /// Every hot site couples to every cold site: `omega[n][n']` pairs hot `n`
    /// with cold `n'`.
    AllToAll(Vec<Vec<f64>>),
    /// Hot site `n` couples only to cold site `n`.
    Pairwise(Vec<f64>),
    None,
}

impl Interaction {
    pub fn tag(&self) -> &'static str {
        match self {
            Interaction::AllToAll(_) => "type1",
            Interaction::Pairwise(_) => "type2",
            Interaction::None => "none",
        }
    }

    /// Non-zero `(hot site, cold site, strength)` triples.
    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        match self {
            Interaction::AllToAll(m) => m
                .iter()
                .enumerate()
                .flat_map(|(n, row)| row.iter().enumerate().map(move |(k, &w)| (n, k, w)))
                .filter(|t| t.2 != 0.0)
                .collect(),
            Interaction::Pairwise(v) => v
                .iter()
                .enumerate()
                .map(|(n, &w)| (n, n, w))
                .filter(|t| t.2 != 0.0)
                .collect(),
            Interaction::None => Vec::new(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Interaction::AllToAll(m) => {
                if m.len() != n || m.iter().any(|row| row.len() != n) {
                    let cols = m.first().map_or(0, |r| r.len());
                    return Err(Error::InvalidArgument(format!(
                        "omega_matrix must be {n}x{n}, got {}x{cols}",
                        m.len()
                    )));
                }
                if m.iter().flatten().any(|w| !w.is_finite()) {
                    return Err(Error::InvalidArgument("omega_matrix has non-finite entries".into()));
                }
            }
            Interaction::Pairwise(v) => {
                if v.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "omega_vector must have length {n}, got {}",
                        v.len()
                    )));
                }
                if v.iter().any(|w| !w.is_finite()) {
                    return Err(Error::InvalidArgument("omega_vector has non-finite entries".into()));
                }
            }
            Interaction::None => {}
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DissipationMode {
    Common,
    Cascaded,
    Independent,
}

impl DissipationMode {
    pub const ALL: [DissipationMode; 3] = [
        DissipationMode::Common,
        DissipationMode::Cascaded,
        DissipationMode::Independent,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            DissipationMode::Common => "com",
            DissipationMode::Cascaded => "cas",
            DissipationMode::Independent => "ind",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DissipationMode::Common => "common",
            DissipationMode::Cascaded => "cascaded",
            DissipationMode::Independent => "independent",
        }
    }
}

/// A validated experiment: two ensembles, their coupling and the dissipation
/// model.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    hot: EnsembleSpec,
    cold: EnsembleSpec,
    interaction: Interaction,
    mode: DissipationMode,
    layout: HilbertLayout,
}

impl Scenario {
    pub fn new(
        hot: EnsembleSpec,
        cold: EnsembleSpec,
        interaction: Interaction,
        mode: DissipationMode,
    ) -> Result<Self> {
        hot.validate(Bath::Hot)?;
        cold.validate(Bath::Cold)?;
        if hot.n_sites != cold.n_sites {
            return Err(Error::InvalidArgument(format!(
                "hot and cold ensembles must have the same size, got {} and {}",
                hot.n_sites, cold.n_sites
            )));
        }
        interaction.validate(hot.n_sites)?;
        let layout = HilbertLayout::spins(hot.n_sites);
        Ok(Self {
            hot,
            cold,
            interaction,
            mode,
            layout,
        })
    }

    /// Soft problems that do not prevent a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.hot.temperature <= self.cold.temperature {
            out.push(format!(
                "hot bath temperature {} is not above cold bath temperature {}",
                self.hot.temperature, self.cold.temperature
            ));
        }
        out
    }

    pub fn hot(&self) -> &EnsembleSpec {
        &self.hot
    }

    pub fn cold(&self) -> &EnsembleSpec {
        &self.cold
    }

    pub fn ensemble(&self, bath: Bath) -> &EnsembleSpec {
        match bath {
            Bath::Hot => &self.hot,
            Bath::Cold => &self.cold,
        }
    }

    pub fn interaction(&self) -> &Interaction {
        &self.interaction
    }

    pub fn mode(&self) -> DissipationMode {
        self.mode
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn n_sites(&self) -> usize {
        self.hot.n_sites
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    /// Short label such as `com2` or `ind1`.
    pub fn tag(&self) -> String {
        let kind = match self.interaction {
            Interaction::AllToAll(_) => "1",
            Interaction::Pairwise(_) => "2",
            Interaction::None => "0",
        };
        format!("{}{}", self.mode.tag(), kind)
    }

    pub fn with_mode(&self, mode: DissipationMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn with_interaction(&self, interaction: Interaction) -> Result<Self> {
        Self::new(self.hot.clone(), self.cold.clone(), interaction, self.mode)
    }

    pub fn with_hot_omega(&self, omega: f64) -> Result<Self> {
        let mut hot = self.hot.clone();
        hot.omega = omega;
        Self::new(hot, self.cold.clone(), self.interaction.clone(), self.mode)
    }

    pub fn with_temperatures(&self, t_hot: f64, t_cold: f64) -> Result<Self> {
        let mut hot = self.hot.clone();
        let mut cold = self.cold.clone();
        hot.temperature = t_hot;
        cold.temperature = t_cold;
        Self::new(hot, cold, self.interaction.clone(), self.mode)
    }

    pub fn with_couplings(&self, g_hot: Vec<f64>, g_cold: Vec<f64>) -> Result<Self> {
        let mut hot = self.hot.clone();
        let mut cold = self.cold.clone();
        hot.n_sites = g_hot.len();
        hot.g = g_hot;
        cold.n_sites = g_cold.len();
        cold.g = g_cold;
        Self::new(hot, cold, self.interaction.clone(), self.mode)
    }

    /// Layout position of site `n` (0-based) of the ensemble on `bath`.
    pub fn site(&self, bath: Bath, n: usize) -> usize {
        match bath {
            Bath::Hot => n,
            Bath::Cold => self.n_sites() + n,
        }
    }

    /// `op` on site `(bath, n)` of the spin space.
    pub fn spin_op(&self, bath: Bath, n: usize, op: &CMatrix) -> CMatrix {
        embed_site_op(op, self.site(bath, n), &self.layout).expect("site inside layout")
    }

    /// `sum_i omega_i sum_n sigma+ sigma-`.
    pub fn free_hamiltonian(&self) -> CMatrix {
        let dim = self.dim();
        let mut h = CMatrix::zeros(dim, dim);
        let excited = sigma_plus() * sigma_minus();
        for bath in Bath::BOTH {
            let omega = self.ensemble(bath).omega;
            for n in 0..self.n_sites() {
                h += self.spin_op(bath, n, &excited) * re(omega);
            }
        }
        h
    }

    pub fn interaction_hamiltonian(&self) -> CMatrix {
        let dim = self.dim();
        let mut h = CMatrix::zeros(dim, dim);
        for (n, k, w) in self.interaction.terms() {
            h += self.exchange(n, k) * re(w);
        }
        h
    }

    /// `sigma+_{h,n} sigma-_{c,k} + h.c.`
    pub fn exchange(&self, n: usize, k: usize) -> CMatrix {
        let up = self.spin_op(Bath::Hot, n, &sigma_plus()) * self.spin_op(Bath::Cold, k, &sigma_minus());
        let down = up.adjoint();
        up + down
    }

    pub fn system_hamiltonian(&self) -> CMatrix {
        self.free_hamiltonian() + self.interaction_hamiltonian()
    }

    /// Total excitation number of the spins.
    pub fn excitation_number(&self) -> CMatrix {
        let dim = self.dim();
        let mut n_op = CMatrix::zeros(dim, dim);
        let excited = sigma_plus() * sigma_minus();
        for bath in Bath::BOTH {
            for n in 0..self.n_sites() {
                n_op += self.spin_op(bath, n, &excited);
            }
        }
        n_op
    }

    /// Oscillator levels kept for each ancilla, `[hot, cold]`.
    pub fn ancilla_cutoffs(&self) -> [usize; 2] {
        [
            qmat::oscillator_cutoff(self.hot.beta_omega()),
            qmat::oscillator_cutoff(self.cold.beta_omega()),
        ]
    }

    /// Spins followed by the hot and cold ancillas.
    pub fn joint_layout(&self, cutoffs: [usize; 2]) -> HilbertLayout {
        self.layout.with_ancillas(cutoffs[0], cutoffs[1])
    }

    pub fn rate_table(&self) -> Result<RateTable> {
        rate_table(self)
    }
}

/// `V_{i,n} = g_{i,n}(sigma+ a + sigma- a^dag)` on spins ⊗ ancillas.
#[derive(Clone, Debug)]
pub struct CouplingOp {
    pub bath: Bath,
    pub site: usize,
    pub op: KronOp,
}

/// Coupling operators for every site in layout order, with ancilla cutoffs
/// `[hot, cold]`.
pub fn build_coupling_ops(s: &Scenario, cutoffs: [usize; 2]) -> Result<Vec<CouplingOp>> {
    let layout = s.joint_layout(cutoffs);
    let dims = layout.dims().to_vec();
    let mut out = Vec::with_capacity(2 * s.n_sites());
    for (slot, bath) in Bath::BOTH.into_iter().enumerate() {
        let (a, adag) = fock_ops(cutoffs[slot])?;
        let anc = 2 * s.n_sites() + slot;
        for n in 0..s.n_sites() {
            let g = s.ensemble(bath).g[n];
            let spin = s.site(bath, n);
            let op = KronOp::product(&dims, re(g), vec![(spin, sigma_plus()), (anc, a.clone())]).add(
                &KronOp::product(&dims, re(g), vec![(spin, sigma_minus()), (anc, adag.clone())]),
            );
            out.push(CouplingOp { bath, site: n, op });
        }
    }
    Ok(out)
}

/// `omega_i a^dag a` for the ancilla of `bath` on spins ⊗ ancillas.
pub fn ancilla_hamiltonian(s: &Scenario, bath: Bath, cutoffs: [usize; 2]) -> KronOp {
    let dims = s.joint_layout(cutoffs).dims().to_vec();
    let slot = match bath {
        Bath::Hot => 0,
        Bath::Cold => 1,
    };
    KronOp::local(
        &dims,
        2 * s.n_sites() + slot,
        number_op(cutoffs[slot]),
        re(s.ensemble(bath).omega),
    )
}

/// System Hamiltonian lifted onto spins ⊗ ancillas, one term per piece.
pub fn system_hamiltonian_kron(s: &Scenario, cutoffs: [usize; 2]) -> KronOp {
    let dims = s.joint_layout(cutoffs).dims().to_vec();
    let excited = sigma_plus() * sigma_minus();
    let mut h = KronOp::zero(&dims);
    for bath in Bath::BOTH {
        let omega = s.ensemble(bath).omega;
        for n in 0..s.n_sites() {
            h = h.add(&KronOp::local(&dims, s.site(bath, n), excited.clone(), re(omega)));
        }
    }
    for (n, k, w) in s.interaction().terms() {
        let hs = s.site(Bath::Hot, n);
        let cs = s.site(Bath::Cold, k);
        h = h
            .add(&KronOp::product(&dims, re(w), vec![(hs, sigma_plus()), (cs, sigma_minus())]))
            .add(&KronOp::product(&dims, re(w), vec![(hs, sigma_minus()), (cs, sigma_plus())]));
    }
    h
}

/// Dissipation rates `gamma^-_{i,kl} = g_k g_l (n_i + 1)` and
/// `gamma^+_{i,kl} = g_k g_l n_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    minus: [Vec<Vec<f64>>; 2],
    plus: [Vec<Vec<f64>>; 2],
    occupation: [f64; 2],
}

fn slot(bath: Bath) -> usize {
    match bath {
        Bath::Hot => 0,
        Bath::Cold => 1,
    }
}

impl RateTable {
    pub fn from_ensembles(hot: &EnsembleSpec, cold: &EnsembleSpec) -> Result<Self> {
        let mut minus: [Vec<Vec<f64>>; 2] = Default::default();
        let mut plus: [Vec<Vec<f64>>; 2] = Default::default();
        let mut occupation = [0.0; 2];
        for (k, e) in [hot, cold].into_iter().enumerate() {
            if !(e.temperature > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "temperature must be positive, got {}",
                    e.temperature
                )));
            }
            let nbar = bose_occupation(e.beta_omega());
            occupation[k] = nbar;
            minus[k] = e
                .g
                .iter()
                .map(|gk| e.g.iter().map(|gl| gk * gl * (nbar + 1.0)).collect())
                .collect();
            plus[k] = e
                .g
                .iter()
                .map(|gk| e.g.iter().map(|gl| gk * gl * nbar).collect())
                .collect();
        }
        Ok(Self {
            minus,
            plus,
            occupation,
        })
    }

    pub fn minus(&self, bath: Bath, k: usize, l: usize) -> f64 {
        self.minus[slot(bath)][k][l]
    }

    pub fn plus(&self, bath: Bath, k: usize, l: usize) -> f64 {
        self.plus[slot(bath)][k][l]
    }

    /// Mean thermal occupation of the bath mode.
    pub fn occupation(&self, bath: Bath) -> f64 {
        self.occupation[slot(bath)]
    }

    pub fn n_sites(&self) -> usize {
        self.minus[0].len()
    }

    /// Copy with every `k != l` rate set to zero.
    pub fn with_offdiagonal_zeroed(&self) -> Self {
        let zero = |t: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            t.iter()
                .enumerate()
                .map(|(k, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(l, &v)| if k == l { v } else { 0.0 })
                        .collect()
                })
                .collect()
        };
        Self {
            minus: [zero(&self.minus[0]), zero(&self.minus[1])],
            plus: [zero(&self.plus[0]), zero(&self.plus[1])],
            occupation: self.occupation,
        }
    }
}

pub fn rate_table(s: &Scenario) -> Result<RateTable> {
    RateTable::from_ensembles(&s.hot, &s.cold)
}

/// Parameters of the two-pair reference experiment: `g = [0.5, 0.55]` on
/// both sides, `T_h = 2`, `T_c = 1`, all exchange strengths `0.1`.
pub fn reference_scenario(
    omega_h: f64,
    interaction_kind: u8,
    mode: DissipationMode,
) -> Result<Scenario> {
    let interaction = match interaction_kind {
        1 => Interaction::AllToAll(vec![vec![0.1, 0.1], vec![0.1, 0.1]]),
        2 => Interaction::Pairwise(vec![0.1, 0.1]),
        0 => Interaction::None,
        other => {
            return Err(Error::InvalidArgument(format!(
                "interaction kind must be 0, 1 or 2, got {other}"
            )))
        }
    };
    Scenario::new(
        EnsembleSpec::new(omega_h, vec![0.5, 0.55], 2.0),
        EnsembleSpec::new(1.0, vec![0.5, 0.55], 1.0),
        interaction,
        mode,
    )
}

/// The six (mode, interaction) combinations compared throughout.
pub fn scenario_tags() -> [(&'static str, DissipationMode, u8); 6] {
    [
        ("com1", DissipationMode::Common, 1),
        ("com2", DissipationMode::Common, 2),
        ("cas1", DissipationMode::Cascaded, 1),
        ("cas2", DissipationMode::Cascaded, 2),
        ("ind1", DissipationMode::Independent, 1),
        ("ind2", DissipationMode::Independent, 2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{commutator, hermitian_eigen, max_abs, DensityMatrix, ONE, ZERO};

    fn single_pair(omega_h: f64, omega_c: f64) -> Scenario {
        Scenario::new(
            EnsembleSpec::new(omega_h, vec![0.5], 2.0),
            EnsembleSpec::new(omega_c, vec![0.5], 1.0),
            Interaction::None,
            DissipationMode::Common,
        )
        .unwrap()
    }

    #[test]
    fn free_pair_spectrum() {
        let s = single_pair(1.0, 1.0);
        let (vals, _) = hermitian_eigen(&s.system_hamiltonian());
        for (v, e) in vals.iter().zip([0.0, 1.0, 1.0, 2.0]) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_all_to_all_is_collective_exchange() {
        let s = reference_scenario(1.3, 1, DissipationMode::Common).unwrap();
        let dim = s.dim();
        let mut s_hp = CMatrix::zeros(dim, dim);
        let mut s_cm = CMatrix::zeros(dim, dim);
        for n in 0..2 {
            s_hp += s.spin_op(Bath::Hot, n, &sigma_plus());
            s_cm += s.spin_op(Bath::Cold, n, &sigma_minus());
        }
        let up = &s_hp * &s_cm;
        let collective = (&up + up.adjoint()) * re(0.1);
        assert!(max_abs(&(s.interaction_hamiltonian() - collective)) < 1e-15);
    }

    #[test]
    fn hamiltonian_conserves_excitations() {
        for kind in [1, 2] {
            let s = reference_scenario(1.7, kind, DissipationMode::Common).unwrap();
            let h = s.system_hamiltonian();
            assert_eq!(max_abs(&commutator(&h, &s.excitation_number())), 0.0);
            assert_eq!(qmat::hermiticity_error(&h), 0.0);
        }
    }

    #[test]
    fn coupling_ops_hermitian_and_resonant() {
        let s = reference_scenario(1.0, 2, DissipationMode::Common).unwrap();
        let cutoffs = [8, 8];
        let ops = build_coupling_ops(&s, cutoffs).unwrap();
        assert_eq!(ops.len(), 4);
        for v in &ops {
            let d = v.op.to_dense();
            assert_eq!(qmat::hermiticity_error(&d), 0.0);
        }
        // sum of free energies of one bath's sites plus its ancilla
        let dims = s.joint_layout(cutoffs).dims().to_vec();
        let excited = sigma_plus() * sigma_minus();
        for bath in Bath::BOTH {
            let mut h0 = ancilla_hamiltonian(&s, bath, cutoffs);
            for n in 0..2 {
                h0 = h0.add(&KronOp::local(&dims, s.site(bath, n), excited.clone(), re(s.ensemble(bath).omega)));
            }
            let mut v = KronOp::zero(&dims);
            for c in ops.iter().filter(|c| c.bath == bath) {
                v = v.add(&c.op);
            }
            assert!(max_abs(&h0.commutator(&v).to_dense()) < 1e-10);
        }
    }

    #[test]
    fn coupling_squared_on_excited_vacuum() {
        let s = single_pair(1.0, 1.0);
        let ops = build_coupling_ops(&s, [8, 8]).unwrap();
        let v = ops[0].op.to_dense();
        let excited = DensityMatrix::new(CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO])).unwrap();
        let vac_h = DensityMatrix::new(CMatrix::from_fn(8, 8, |i, j| if i == 0 && j == 0 { ONE } else { ZERO })).unwrap();
        let ground = DensityMatrix::new(CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE])).unwrap();
        let joint = DensityMatrix::product(&[&excited, &ground, &vac_h, &vac_h]);
        let v2 = qmat::expectation(&(&v * &v), &joint).unwrap();
        assert!((v2.re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rate_values() {
        let s = Scenario::new(
            EnsembleSpec::new(1.0, vec![0.5, 0.55], 2.0),
            EnsembleSpec::new(1.0, vec![0.5, 0.55], 1.0),
            Interaction::None,
            DissipationMode::Common,
        )
        .unwrap();
        let r = s.rate_table().unwrap();
        // n = 1/(e^{1/2} - 1), computed independently
        let nbar = 1.0 / (0.5f64.exp() - 1.0);
        assert!((r.occupation(Bath::Hot) - 1.54149).abs() < 1e-5);
        assert!((r.minus(Bath::Hot, 0, 0) - 0.25 * (nbar + 1.0)).abs() < 1e-15);
        assert!((r.minus(Bath::Hot, 0, 0) - 0.63537).abs() < 1e-5);
        assert!((r.plus(Bath::Hot, 0, 0) - 0.38537).abs() < 1e-5);
        assert!((r.plus(Bath::Hot, 0, 0) / r.minus(Bath::Hot, 0, 0) - 0.60653).abs() < 1e-5);
        assert!((r.minus(Bath::Hot, 0, 1) - 0.69891).abs() < 1e-5);
        let z = r.with_offdiagonal_zeroed();
        assert_eq!(z.minus(Bath::Cold, 1, 0), 0.0);
        assert_eq!(z.plus(Bath::Cold, 1, 1), r.plus(Bath::Cold, 1, 1));
    }

    #[test]
    fn validation_errors() {
        let hot = EnsembleSpec::new(1.0, vec![0.5, 0.5], 2.0);
        let cold = EnsembleSpec::new(1.0, vec![0.5], 1.0);
        assert!(Scenario::new(hot.clone(), cold, Interaction::None, DissipationMode::Common).is_err());
        let cold = EnsembleSpec::new(1.0, vec![0.5, 0.5], 1.0);
        let bad = Interaction::AllToAll(vec![vec![0.1, 0.1, 0.1]]);
        let err = Scenario::new(hot.clone(), cold.clone(), bad, DissipationMode::Common).unwrap_err();
        assert!(err.to_string().contains("2x2"), "{err}");
        let neg = EnsembleSpec::new(1.0, vec![-0.5, 0.5], 1.0);
        assert!(Scenario::new(hot.clone(), neg, Interaction::None, DissipationMode::Common).is_err());
        let cold_t0 = EnsembleSpec::new(1.0, vec![0.5, 0.5], 0.0);
        assert!(Scenario::new(hot.clone(), cold_t0, Interaction::None, DissipationMode::Common).is_err());
        let equal = Scenario::new(hot.clone(), EnsembleSpec::new(1.0, vec![0.5, 0.5], 2.0), Interaction::None, DissipationMode::Common).unwrap();
        assert_eq!(equal.warnings().len(), 1);
    }
}
