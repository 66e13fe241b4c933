//! Repeated interactions with fresh thermal oscillator ancillas.
//!
//! The total excitation number of spins plus ancilla quanta is conserved by
//! every Hamiltonian used here, so collision unitaries are built block by
//! block over excitation sectors. A collision is then condensed into a
//! superoperator on the spins plus a few linear functionals for the energy
//! ledger.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::model::config::{CascadeTime, RunSettings};
use crate::model::{Bath, DissipationMode, Scenario};
use crate::qmat::{
    thermal_oscillator_state, thermal_qubit_state, trace_norm_hermitian, trace_of_product, vectorize,
    CMatrix, DensityMatrix, ONE, ZERO,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Elem {
    /// `sigma+ sigma-` on spin `q`.
    Excited(usize),
    /// `sigma+_up sigma-_down`.
    Hop { up: usize, down: usize },
    /// `a^dag a` of ancilla slot 0 (hot) or 1 (cold).
    Quanta(usize),
    /// `sigma+_q a`.
    Absorb { q: usize, slot: usize },
    /// `sigma-_q a^dag`.
    Emit { q: usize, slot: usize },
}

type Terms = Vec<(f64, Elem)>;

/// Spins ⊗ hot ancilla ⊗ cold ancilla, partitioned by excitation number.
struct JointSpace {
    n_spins: usize,
    d: [usize; 2],
    sectors: Vec<Vec<usize>>,
    locate: Vec<(usize, usize)>,
}

impl JointSpace {
    fn new(n_spins: usize, d: [usize; 2]) -> Self {
        let spin_dim = 1usize << n_spins;
        let total = spin_dim * d[0] * d[1];
        let mut sectors = vec![Vec::new(); n_spins + d[0] + d[1] - 1];
        let mut locate = vec![(0, 0); total];
        let mut space = Self {
            n_spins,
            d,
            sectors: Vec::new(),
            locate: Vec::new(),
        };
        for j in 0..total {
            let (s, nh, nc) = space.split(j);
            let k = space.excitations(s) + nh + nc;
            locate[j] = (k, sectors[k].len());
            sectors[k].push(j);
        }
        space.sectors = sectors;
        space.locate = locate;
        space
    }

    fn spin_dim(&self) -> usize {
        1 << self.n_spins
    }

    fn joint(&self, s: usize, nh: usize, nc: usize) -> usize {
        (s * self.d[0] + nh) * self.d[1] + nc
    }

    fn split(&self, j: usize) -> (usize, usize, usize) {
        (j / (self.d[0] * self.d[1]), (j / self.d[1]) % self.d[0], j % self.d[1])
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n_spins - 1 - q)
    }

    /// Index 0 is the excited level, so a set bit means ground.
    fn excited(&self, s: usize, q: usize) -> bool {
        s & self.mask(q) == 0
    }

    fn excitations(&self, s: usize) -> usize {
        self.n_spins - s.count_ones() as usize
    }

    fn act(&self, e: Elem, j: usize) -> Option<(usize, f64)> {
        let (s, nh, nc) = self.split(j);
        let mut n = [nh, nc];
        match e {
            Elem::Excited(q) => self.excited(s, q).then_some((j, 1.0)),
            Elem::Hop { up, down } => {
                if self.excited(s, up) || !self.excited(s, down) {
                    return None;
                }
                let s2 = (s & !self.mask(up)) | self.mask(down);
                Some((self.joint(s2, nh, nc), 1.0))
            }
            Elem::Quanta(slot) => (n[slot] > 0).then_some((j, n[slot] as f64)),
            Elem::Absorb { q, slot } => {
                if self.excited(s, q) || n[slot] == 0 {
                    return None;
                }
                let amp = (n[slot] as f64).sqrt();
                n[slot] -= 1;
                Some((self.joint(s & !self.mask(q), n[0], n[1]), amp))
            }
            Elem::Emit { q, slot } => {
                if !self.excited(s, q) || n[slot] + 1 >= self.d[slot] {
                    return None;
                }
                n[slot] += 1;
                let amp = (n[slot] as f64).sqrt();
                Some((self.joint(s | self.mask(q), n[0], n[1]), amp))
            }
        }
    }

    /// Sparse real operator stored per sector as `(row, col, value)`.
    fn operator(&self, terms: &Terms) -> SectorOp {
        let mut blocks = vec![Vec::new(); self.sectors.len()];
        for (k, members) in self.sectors.iter().enumerate() {
            for (col, &j) in members.iter().enumerate() {
                for &(c, e) in terms {
                    if c == 0.0 {
                        continue;
                    }
                    if let Some((j2, v)) = self.act(e, j) {
                        let (k2, row) = self.locate[j2];
                        debug_assert_eq!(k, k2, "operator leaves its excitation sector");
                        blocks[k].push((row, col, c * v));
                    }
                }
            }
        }
        SectorOp { blocks }
    }

    /// `exp(-i tau H)` block by block.
    fn unitary(&self, h: &SectorOp, tau: f64) -> Blocks {
        self.sectors
            .par_iter()
            .enumerate()
            .map(|(k, members)| {
                let dim = members.len();
                let mut dense = DMatrix::<f64>::zeros(dim, dim);
                for &(r, c, v) in &h.blocks[k] {
                    dense[(r, c)] += v;
                }
                let eig = SymmetricEigen::new(dense);
                let v = &eig.eigenvectors;
                let mut vc = v.clone();
                let mut vs = v.clone();
                for (c, &l) in eig.eigenvalues.iter().enumerate() {
                    vc.column_mut(c).scale_mut((tau * l).cos());
                    vs.column_mut(c).scale_mut(-(tau * l).sin());
                }
                let (re, im) = (vc * v.transpose(), vs * v.transpose());
                CMatrix::from_fn(dim, dim, |r, c| Complex64::new(re[(r, c)], im[(r, c)]))
            })
            .collect()
    }
}

struct SectorOp {
    blocks: Vec<Vec<(usize, usize, f64)>>,
}

impl SectorOp {
    fn apply(&self, k: usize, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::from_element(v.len(), ZERO);
        for &(r, c, x) in &self.blocks[k] {
            out[r] += v[c] * x;
        }
        out
    }
}

type Blocks = Vec<CMatrix>;

fn compose(later: &Blocks, earlier: &Blocks) -> Blocks {
    later.iter().zip(earlier).map(|(a, b)| a * b).collect()
}

/// Thermal ancilla populations and the joint space they live on.
struct Environment {
    space: JointSpace,
    /// `(n_h, n_c, p_h p_c)` for every ancilla configuration.
    configs: Vec<(usize, usize, f64)>,
}

impl Environment {
    fn new(s: &Scenario, cutoffs: [usize; 2]) -> Result<Self> {
        let mut pops = Vec::new();
        for (slot, bath) in Bath::BOTH.into_iter().enumerate() {
            let st = thermal_oscillator_state(s.ensemble(bath).beta_omega(), cutoffs[slot])?;
            pops.push((0..cutoffs[slot]).map(|n| st.matrix()[(n, n)].re).collect::<Vec<_>>());
        }
        let mut configs = Vec::new();
        for nh in 0..cutoffs[0] {
            for nc in 0..cutoffs[1] {
                configs.push((nh, nc, pops[0][nh] * pops[1][nc]));
            }
        }
        Ok(Self {
            space: JointSpace::new(2 * s.n_sites(), cutoffs),
            configs,
        })
    }

    fn column(&self, w: Option<&Blocks>, k: usize, pos: usize) -> DVector<Complex64> {
        match w {
            Some(w) => w[k].column(pos).into_owned(),
            None => {
                let mut e = DVector::from_element(self.space.sectors[k].len(), ZERO);
                e[pos] = ONE;
                e
            }
        }
    }

    /// `Tr_E[(1 ⊗ rho_E) W^dag X W]`, so that `<X>` after `W` is
    /// `Tr(result · rho_S)`.
    fn reduce(&self, x: &SectorOp, w: Option<&Blocks>) -> CMatrix {
        let sp = &self.space;
        let dim = sp.spin_dim();
        self.configs
            .par_iter()
            .fold(
                || CMatrix::zeros(dim, dim),
                |mut out, &(nh, nc, p)| {
                    for s2 in 0..dim {
                        let (k, pos2) = sp.locate[sp.joint(s2, nh, nc)];
                        let phi = x.apply(k, &self.column(w, k, pos2));
                        for s1 in 0..dim {
                            if sp.excitations(s1) != sp.excitations(s2) {
                                continue;
                            }
                            let pos1 = sp.locate[sp.joint(s1, nh, nc)].1;
                            let amp = match w {
                                Some(w) => w[k].column(pos1).dotc(&phi),
                                None => phi[pos1],
                            };
                            out[(s1, s2)] += amp * p;
                        }
                    }
                    out
                },
            )
            .reduce(|| CMatrix::zeros(dim, dim), |a, b| a + b)
    }

    /// Spin channel `rho -> Tr_E[W (rho ⊗ rho_E) W^dag]` on column-stacked
    /// vectors.
    fn channel(&self, w: &Blocks) -> CMatrix {
        let sp = &self.space;
        let dim = sp.spin_dim();
        let n_out = sp.d[0] * sp.d[1];
        let zero = || CMatrix::zeros(dim * dim, dim * dim);
        self.configs
            .par_iter()
            .filter(|c| c.2 > 0.0)
            .fold(
                || (zero(), vec![Vec::new(); n_out]),
                |(mut m, mut kraus): (CMatrix, Vec<Vec<(usize, usize, Complex64)>>), &(nh, nc, p)| {
                    kraus.iter_mut().for_each(Vec::clear);
                    for s in 0..dim {
                        let (k, pos) = sp.locate[sp.joint(s, nh, nc)];
                        for (row, &j) in sp.sectors[k].iter().enumerate() {
                            let v = w[k][(row, pos)];
                            if v == ZERO {
                                continue;
                            }
                            let (a, mh, mc) = sp.split(j);
                            kraus[mh * sp.d[1] + mc].push((a, s, v));
                        }
                    }
                    for list in &kraus {
                        for &(a, s1, v) in list {
                            let pv = v * p;
                            for &(b, s2, u) in list {
                                m[(a + dim * b, s1 + dim * s2)] += pv * u.conj();
                            }
                        }
                    }
                    (m, kraus)
                },
            )
            .map(|(m, _)| m)
            .reduce(zero, |a, b| a + b)
    }
}

/// `M^T` acting on an observable: `Tr(pull_back(M, X) rho) = Tr(X M(rho))`.
fn pull_back(m: &CMatrix, x: &CMatrix) -> CMatrix {
    let d = x.nrows();
    let f = DVector::from_fn(d * d, |i, _| x[(i / d, i % d)]);
    let g = m.transpose() * f;
    CMatrix::from_fn(d, d, |r, c| g[c + d * r])
}

fn apply_channel(m: &CMatrix, rho: &CMatrix) -> CMatrix {
    let d = rho.nrows();
    let v = m * vectorize(rho);
    CMatrix::from_fn(d, d, |r, c| v[r + d * c])
}

/// One collision (or one sweep of sub-collisions) and its energy ledger.
#[derive(Clone, Debug)]
pub struct CollisionStep {
    pub rho_after: DensityMatrix,
    /// Energy taken from the hot ancilla.
    pub dq_h: f64,
    pub dq_c: f64,
    pub dw: f64,
    /// Change of `<H_S>`.
    pub du: f64,
    pub tau: f64,
}

impl CollisionStep {
    /// `|dU - dW - dQ_h - dQ_c|`.
    pub fn first_law_residual(&self) -> f64 {
        (self.du - self.dw - self.dq_h - self.dq_c).abs()
    }
}

/// A collision condensed to a spin channel plus ledger functionals.
#[derive(Clone, Debug)]
pub struct CollisionMap {
    tau: f64,
    elapsed: f64,
    mode: DissipationMode,
    map: CMatrix,
    dq: [CMatrix; 2],
    dw: CMatrix,
    h_sys: CMatrix,
}

struct Pieces {
    system: Terms,
    ancilla: [Terms; 2],
    /// Spin-ancilla coupling of each pair `n`, without the `1/sqrt(tau)`.
    coupling: Vec<Terms>,
    /// Spin part of sub-collision `n`.
    step_system: Vec<Terms>,
    decoupled: [bool; 2],
}

fn pieces(s: &Scenario) -> Pieces {
    let n_sites = s.n_sites();
    let spin = |bath: Bath, n: usize| s.site(bath, n);
    let mut system = Terms::new();
    let mut step_system = vec![Terms::new(); n_sites];
    for bath in Bath::BOTH {
        let omega = s.ensemble(bath).omega;
        for n in 0..n_sites {
            system.push((omega, Elem::Excited(spin(bath, n))));
            step_system[n].push((omega, Elem::Excited(spin(bath, n))));
        }
    }
    for (n, k, w) in s.interaction().terms() {
        let (h, c) = (spin(Bath::Hot, n), spin(Bath::Cold, k));
        let hop = [(w, Elem::Hop { up: h, down: c }), (w, Elem::Hop { up: c, down: h })];
        system.extend(hop);
        step_system[n.max(k)].extend(hop);
    }
    let mut coupling = vec![Terms::new(); n_sites];
    let mut decoupled = [true; 2];
    for (slot, bath) in Bath::BOTH.into_iter().enumerate() {
        for n in 0..n_sites {
            let g = s.ensemble(bath).g[n];
            if g != 0.0 {
                decoupled[slot] = false;
                let q = spin(bath, n);
                coupling[n].push((g, Elem::Absorb { q, slot }));
                coupling[n].push((g, Elem::Emit { q, slot }));
            }
        }
    }
    let ancilla = [0, 1].map(|slot| vec![(s.ensemble(Bath::BOTH[slot]).omega, Elem::Quanta(slot))]);
    Pieces {
        system,
        ancilla,
        coupling,
        step_system,
        decoupled,
    }
}

fn scaled(terms: &Terms, c: f64) -> Terms {
    terms.iter().map(|&(v, e)| (v * c, e)).collect()
}

fn difference(a: &Terms, b: &Terms) -> Terms {
    let mut out = a.clone();
    out.extend(scaled(b, -1.0));
    out
}

impl CollisionMap {
    /// Collision of the given model with the scenario's cutoff policy.
    pub fn new(s: &Scenario, tau: f64, model: DissipationMode, time: CascadeTime) -> Result<Self> {
        Self::with_cutoffs(s, tau, model, time, s.ancilla_cutoffs())
    }

    pub fn with_cutoffs(
        s: &Scenario,
        tau: f64,
        model: DissipationMode,
        time: CascadeTime,
        cutoffs: [usize; 2],
    ) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("collision time must be positive, got {tau}")));
        }
        let env = Environment::new(s, cutoffs)?;
        let sp = &env.space;
        let p = pieces(s);
        let root = tau.sqrt();
        let n_sites = s.n_sites();
        let dim = sp.spin_dim();
        let anc_ops = [sp.operator(&p.ancilla[0]), sp.operator(&p.ancilla[1])];
        let anc_energy = |w: Option<&Blocks>| [0, 1].map(|k| env.reduce(&anc_ops[k], w));
        let mut anc_all = p.ancilla[0].clone();
        anc_all.extend(p.ancilla[1].iter().copied());

        let (map, dq, dw) = match model {
            DissipationMode::Common => {
                let mut h = p.system.clone();
                h.extend(anc_all.iter().copied());
                let mut v = Terms::new();
                for c in &p.coupling {
                    v.extend(c.iter().copied());
                }
                h.extend(scaled(&v, 1.0 / root));
                let w = sp.unitary(&sp.operator(&h), tau);
                let v_op = sp.operator(&v);
                let before = anc_energy(None);
                let after = anc_energy(Some(&w));
                let dw = (env.reduce(&v_op, None) - env.reduce(&v_op, Some(&w))) / Complex64::new(root, 0.0);
                (env.channel(&w), [&before[0] - &after[0], &before[1] - &after[1]], dw)
            }
            DissipationMode::Cascaded | DissipationMode::Independent => {
                let fresh = model == DissipationMode::Independent;
                let mut map = CMatrix::identity(dim * dim, dim * dim);
                let mut prefix: Option<Blocks> = None;
                let mut dq = [CMatrix::zeros(dim, dim), CMatrix::zeros(dim, dim)];
                let mut dw = CMatrix::zeros(dim, dim);
                for n in 0..n_sites {
                    let mut h = p.step_system[n].clone();
                    h.extend(anc_all.iter().copied());
                    h.extend(scaled(&p.coupling[n], 1.0 / root));
                    let u = sp.unitary(&sp.operator(&h), tau);
                    let (before_w, after_w) = if fresh {
                        (None, u)
                    } else {
                        let after = match &prefix {
                            Some(pre) => compose(&u, pre),
                            None => u,
                        };
                        (prefix.take(), after)
                    };
                    let v_op = sp.operator(&p.coupling[n]);
                    let rest = sp.operator(&difference(&p.system, &p.step_system[n]));
                    let b = before_w.as_ref();
                    let a = Some(&after_w);
                    let mut q = [
                        env.reduce(&anc_ops[0], b) - env.reduce(&anc_ops[0], a),
                        env.reduce(&anc_ops[1], b) - env.reduce(&anc_ops[1], a),
                    ];
                    let mut w = (env.reduce(&v_op, b) - env.reduce(&v_op, a)) / Complex64::new(root, 0.0)
                        + env.reduce(&rest, a)
                        - env.reduce(&rest, b);
                    if fresh {
                        // ledger of this sub-collision is a functional of the state it receives
                        q = [pull_back(&map, &q[0]), pull_back(&map, &q[1])];
                        w = pull_back(&map, &w);
                        map = env.channel(&after_w) * &map;
                    } else {
                        prefix = Some(after_w);
                    }
                    dq[0] += &q[0];
                    dq[1] += &q[1];
                    dw += w;
                }
                if let Some(w) = prefix {
                    map = env.channel(&w);
                }
                (map, dq, dw)
            }
        };
        let mut dq = dq;
        for slot in 0..2 {
            // a bath with no coupling keeps its ancilla energy exactly
            if p.decoupled[slot] {
                dq[slot] = CMatrix::zeros(dim, dim);
            }
        }
        let elapsed = match (model, time) {
            (DissipationMode::Common, _) | (_, CascadeTime::Sweep) => tau,
            (_, CascadeTime::Total) => tau * n_sites as f64,
        };
        Ok(Self {
            tau,
            elapsed,
            mode: model,
            map,
            dq,
            dw,
            h_sys: s.system_hamiltonian(),
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Time a collision represents when converting energies to currents.
    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn mode(&self) -> DissipationMode {
        self.mode
    }

    /// Column-stacked spin channel.
    pub fn matrix(&self) -> &CMatrix {
        &self.map
    }

    fn check(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.h_sys.nrows() {
            return Err(Error::Dimension(format!(
                "state has dimension {}, collision acts on {}",
                rho.dim(),
                self.h_sys.nrows()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check(rho)?;
        Ok(DensityMatrix::from_raw(apply_channel(&self.map, rho.matrix())))
    }

    pub fn step(&self, rho: &DensityMatrix) -> Result<CollisionStep> {
        let after = self.apply(rho)?;
        let ev = |x: &CMatrix| trace_of_product(x, rho.matrix()).re;
        Ok(CollisionStep {
            du: trace_of_product(&self.h_sys, after.matrix()).re - ev(&self.h_sys),
            rho_after: after,
            dq_h: ev(&self.dq[0]),
            dq_c: ev(&self.dq[1]),
            dw: ev(&self.dw),
            tau: self.tau,
        })
    }
}

/// Joint unitary collision with both ancillas.
pub fn collide_common(rho: &DensityMatrix, s: &Scenario, tau: f64) -> Result<CollisionStep> {
    CollisionMap::new(s, tau, DissipationMode::Common, CascadeTime::Sweep)?.step(rho)
}

/// Ordered sweep over the pairs, sharing one pair of ancillas.
pub fn collide_cascaded(rho: &DensityMatrix, s: &Scenario, tau: f64) -> Result<CollisionStep> {
    CollisionMap::new(s, tau, DissipationMode::Cascaded, CascadeTime::Sweep)?.step(rho)
}

/// Ordered sweep with a fresh pair of ancillas for every pair of spins.
pub fn collide_independent(rho: &DensityMatrix, s: &Scenario, tau: f64) -> Result<CollisionStep> {
    CollisionMap::new(s, tau, DissipationMode::Independent, CascadeTime::Sweep)?.step(rho)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CycleCurrents {
    pub w: f64,
    pub q_h: f64,
    pub q_c: f64,
}

impl CycleCurrents {
    pub fn components(&self) -> [f64; 3] {
        [self.w, self.q_h, self.q_c]
    }

    fn from_components(c: [f64; 3]) -> Self {
        Self {
            w: c[0],
            q_h: c[1],
            q_c: c[2],
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyCycleResult {
    pub rho_ss: DensityMatrix,
    pub currents: CycleCurrents,
    pub steps_used: usize,
    pub converged: bool,
    /// Trace distance moved by the last single collision.
    pub residual: f64,
    pub tau: f64,
}

/// Product of single-site Gibbs states at the bath temperatures.
pub fn seed_state(s: &Scenario) -> DensityMatrix {
    let mut sites = Vec::new();
    for bath in Bath::BOTH {
        for _ in 0..s.n_sites() {
            sites.push(thermal_qubit_state(s.ensemble(bath).beta_omega()));
        }
    }
    DensityMatrix::product(&sites.iter().collect::<Vec<_>>())
}

const LONGEST_JUMP: u32 = 10;

/// Iterates the collision map of the scenario's mode until one collision
/// moves the state by less than `tol` in trace norm.
pub fn run_to_steady(s: &Scenario, tau: f64, settings: &RunSettings) -> Result<SteadyCycleResult> {
    if !(settings.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", settings.tol)));
    }
    let cm = CollisionMap::new(s, tau, s.mode(), settings.cascade_time)?;
    let mut powers = vec![cm.map.clone()];
    for k in 1..=LONGEST_JUMP as usize {
        powers.push(&powers[k - 1] * &powers[k - 1]);
    }
    let mut rho = seed_state(s).into_matrix();
    let mut steps = 0usize;
    let mut jump = 0usize;
    let (converged, residual) = loop {
        let next = apply_channel(&cm.map, &rho);
        let residual = trace_norm_hermitian(&(&next - &rho));
        if residual < settings.tol {
            break (true, residual);
        }
        if steps >= settings.max_steps {
            break (false, residual);
        }
        // jumps double up to 2^LONGEST_JUMP collisions but never overrun max_steps
        let mut k = jump;
        while k > 0 && steps + (1 << k) > settings.max_steps {
            k -= 1;
        }
        rho = apply_channel(&powers[k], &rho);
        steps += 1 << k;
        jump = (jump + 1).min(LONGEST_JUMP as usize);
    };
    let rho_ss = DensityMatrix::from_hermitized(&rho);
    let last = cm.step(&rho_ss)?;
    let t = cm.elapsed();
    Ok(SteadyCycleResult {
        currents: CycleCurrents {
            w: last.dw / t,
            q_h: last.dq_h / t,
            q_c: last.dq_c / t,
        },
        rho_ss,
        steps_used: steps,
        converged,
        residual,
        tau,
    })
}

/// Least-squares line `y = a + b x`; returns `(a, b, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

/// Slope of `log|y - reference|` against `log x`; `None` if any deviation
/// vanishes.
pub fn convergence_order(x: &[f64], y: &[f64], reference: f64) -> Option<f64> {
    let dev: Vec<f64> = y.iter().map(|v| (v - reference).abs()).collect();
    if dev.iter().any(|&d| !(d > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = dev.iter().map(|v| v.ln()).collect();
    Some(linear_fit(&lx, &ly).1)
}

#[derive(Clone, Debug)]
pub struct Extrapolation {
    pub runs: Vec<SteadyCycleResult>,
    /// Intercept of the linear fit in `tau`.
    pub limit: CycleCurrents,
    pub slope: CycleCurrents,
    pub fit_residual: [f64; 3],
}

/// Runs each `tau` to its steady state and extrapolates the currents
/// linearly to `tau = 0`.
pub fn tau_extrapolate(s: &Scenario, taus: &[f64], settings: &RunSettings) -> Result<Extrapolation> {
    let mut distinct = taus.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "extrapolation needs at least 3 distinct collision times, got {}",
            distinct.len()
        )));
    }
    let runs: Vec<SteadyCycleResult> = taus
        .par_iter()
        .map(|&t| run_to_steady(s, t, settings))
        .collect::<Result<_>>()?;
    if let Some(r) = runs.iter().find(|r| !r.converged) {
        return Err(Error::NotConverged(format!(
            "collision run at tau = {} stopped after {} steps with residual {:.3e}",
            r.tau, r.steps_used, r.residual
        )));
    }
    Ok(extrapolate(runs))
}

fn extrapolate(runs: Vec<SteadyCycleResult>) -> Extrapolation {
    let x: Vec<f64> = runs.iter().map(|r| r.tau).collect();
    let mut limit = [0.0; 3];
    let mut slope = [0.0; 3];
    let mut fit_residual = [0.0; 3];
    for c in 0..3 {
        let y: Vec<f64> = runs.iter().map(|r| r.currents.components()[c]).collect();
        let (a, b, rms) = linear_fit(&x, &y);
        limit[c] = a;
        slope[c] = b;
        fit_residual[c] = rms;
    }
    Extrapolation {
        runs,
        limit: CycleCurrents::from_components(limit),
        slope: CycleCurrents::from_components(slope),
        fit_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::{assemble, steady_state};
    use crate::model::{build_coupling_ops, reference_scenario, EnsembleSpec, Interaction};
    use crate::qmat::{matrix_exp, max_abs};
    use crate::thermo::closed_form_currents;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_state(rng: &mut StdRng, d: usize) -> DensityMatrix {
        let a = CMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::from_hermitized(&(m / tr))
    }

    fn dense(space: &JointSpace, op: &SectorOp) -> CMatrix {
        let total = space.locate.len();
        let mut m = CMatrix::zeros(total, total);
        for (k, entries) in op.blocks.iter().enumerate() {
            for &(r, c, v) in entries {
                m[(space.sectors[k][r], space.sectors[k][c])] += Complex64::new(v, 0.0);
            }
        }
        m
    }

    fn single_pair(mode: DissipationMode) -> Scenario {
        Scenario::new(
            EnsembleSpec::new(1.4, vec![0.5], 2.0),
            EnsembleSpec::new(1.0, vec![0.45], 1.0),
            Interaction::Pairwise(vec![0.1]),
            mode,
        )
        .unwrap()
    }

    #[test]
    fn sector_operators_match_dense_couplings() {
        for kind in [1, 2] {
            let s = reference_scenario(1.5, kind, DissipationMode::Common).unwrap();
            let cut = [3, 4];
            let space = JointSpace::new(4, cut);
            let p = pieces(&s);
            let mut v = Terms::new();
            for c in &p.coupling {
                v.extend(c.iter().copied());
            }
            let mut expected = CMatrix::zeros(16 * 12, 16 * 12);
            for op in build_coupling_ops(&s, cut).unwrap() {
                expected += op.op.to_dense();
            }
            assert!(max_abs(&(dense(&space, &space.operator(&v)) - expected)) < 1e-14);
            let env = Environment::new(&s, cut).unwrap();
            let hs = env.reduce(&space.operator(&p.system), None);
            assert!(max_abs(&(hs - s.system_hamiltonian())) < 1e-14);
        }
    }

    #[test]
    fn sector_unitary_is_unitary() {
        let s = reference_scenario(1.5, 1, DissipationMode::Common).unwrap();
        let space = JointSpace::new(4, [3, 3]);
        let p = pieces(&s);
        let mut h = p.system.clone();
        for c in &p.coupling {
            h.extend(scaled(c, 3.0));
        }
        let op = space.operator(&h);
        let u = space.unitary(&op, 0.3);
        let hd = dense(&space, &op);
        let exact = matrix_exp(&hd, 0.3).unwrap();
        for (k, block) in u.iter().enumerate() {
            let idx = &space.sectors[k];
            for (r, &jr) in idx.iter().enumerate() {
                for (c, &jc) in idx.iter().enumerate() {
                    assert!((block[(r, c)] - exact[(jr, jc)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_nonpositive_tau() {
        let s = single_pair(DissipationMode::Common);
        let rho = DensityMatrix::maximally_mixed(4);
        for tau in [0.0, -0.1, f64::NAN] {
            assert!(matches!(collide_common(&rho, &s, tau), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn fresh_ancillas_have_no_coupling_energy() {
        let s = reference_scenario(1.5, 2, DissipationMode::Common).unwrap();
        let env = Environment::new(&s, [5, 5]).unwrap();
        let p = pieces(&s);
        for c in &p.coupling {
            let v = env.reduce(&env.space.operator(c), None);
            assert!(v.iter().all(|x| *x == ZERO));
        }
    }

    #[test]
    fn decoupled_collision_is_free_evolution() {
        let s = reference_scenario(1.5, 1, DissipationMode::Common)
            .unwrap()
            .with_couplings(vec![0.0, 0.0], vec![0.0, 0.0])
            .unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let rho = random_state(&mut rng, 16);
        let step = collide_common(&rho, &s, 0.1).unwrap();
        let u = matrix_exp(&s.system_hamiltonian(), 0.1).unwrap();
        let expected = &u * rho.matrix() * u.adjoint();
        assert!(max_abs(&(step.rho_after.matrix() - expected)) < 1e-12);
        assert_eq!((step.dq_h, step.dq_c, step.dw), (0.0, 0.0, 0.0));
    }

    #[test]
    fn first_law_per_collision_on_random_states() {
        let mut rng = StdRng::seed_from_u64(11);
        for mode in DissipationMode::ALL {
            for kind in [1, 2] {
                let s = reference_scenario(1.7, kind, mode).unwrap();
                let cm = CollisionMap::new(&s, 0.1, mode, CascadeTime::Sweep).unwrap();
                for _ in 0..5 {
                    let rho = random_state(&mut rng, 16);
                    let st = cm.step(&rho).unwrap();
                    let scale = st.du.abs().max(st.dw.abs()).max(st.dq_h.abs()).max(st.dq_c.abs()).max(1e-12);
                    assert!(st.first_law_residual() < 1e-9 * scale.max(1.0), "{mode:?} {kind}: {st:?}");
                    assert!((st.rho_after.trace().re - 1.0).abs() < 1e-11);
                    assert!(st.rho_after.trace().im.abs() < 1e-11);
                    assert!(st.rho_after.min_eigenvalue() > -1e-9);
                }
            }
        }
    }

    #[test]
    fn single_pair_cascade_equals_joint_collision() {
        let s = single_pair(DissipationMode::Common);
        let a = CollisionMap::new(&s, 0.07, DissipationMode::Common, CascadeTime::Sweep).unwrap();
        let b = CollisionMap::new(&s, 0.07, DissipationMode::Cascaded, CascadeTime::Sweep).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
        assert!(max_abs(&(&a.dw - &b.dw)) < 1e-12);
    }

    #[test]
    fn order_of_collisions_matters() {
        let s = reference_scenario(1.5, 1, DissipationMode::Common).unwrap();
        let rho = seed_state(&s);
        let a = collide_common(&rho, &s, 0.1).unwrap().rho_after;
        let b = collide_cascaded(&rho, &s, 0.1).unwrap().rho_after;
        assert!(a.trace_distance(&b) > 1e-6);
    }

    #[test]
    fn equilibrium_without_exchange_carries_no_current() {
        let s = reference_scenario(1.0, 2, DissipationMode::Common)
            .unwrap()
            .with_interaction(Interaction::None)
            .unwrap()
            .with_temperatures(1.5, 1.5)
            .unwrap();
        let r = run_to_steady(&s, 0.05, &RunSettings::default()).unwrap();
        assert!(r.converged);
        for c in r.currents.components() {
            assert!(c.abs() < 1e-8, "{:?}", r.currents);
        }
    }

    #[test]
    fn independent_baths_leave_no_intra_ensemble_coherence() {
        let s = reference_scenario(1.5, 2, DissipationMode::Independent)
            .unwrap()
            .with_interaction(Interaction::None)
            .unwrap();
        let r = run_to_steady(&s, 0.05, &RunSettings::default()).unwrap();
        assert!(r.converged);
        for bath in Bath::BOTH {
            let op = s.spin_op(bath, 0, &crate::qmat::sigma_plus()) * s.spin_op(bath, 1, &crate::qmat::sigma_minus());
            assert!(trace_of_product(&op, r.rho_ss.matrix()).norm() < 1e-9);
        }
    }

    #[test]
    fn finite_tau_work_is_close_to_master_equation() {
        let s = reference_scenario(1.5, 2, DissipationMode::Cascaded).unwrap();
        let qme = closed_form_currents(&steady_state(&assemble(&s).unwrap()).unwrap().rho, &s).unwrap();
        let r = run_to_steady(&s, 0.01, &RunSettings::default()).unwrap();
        assert!(r.converged);
        let rel = (r.currents.w - qme.w()).abs() / qme.w().abs();
        assert!(rel < 0.05, "{} vs {} ({rel})", r.currents.w, qme.w());
    }

    #[test]
    fn fit_of_constant_data_returns_the_constant() {
        let (a, b, rms) = linear_fit(&[0.02, 0.04, 0.08], &[0.3, 0.3, 0.3]);
        assert!((a - 0.3).abs() < 1e-15 && b.abs() < 1e-12 && rms < 1e-15);
        let (a, b, _) = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        let order = convergence_order(&[0.1, 0.2, 0.4], &[1.01, 1.04, 1.16], 1.0).unwrap();
        assert!((order - 2.0).abs() < 1e-12);
        assert!(convergence_order(&[0.1, 0.2], &[1.0, 2.0], 1.0).is_none());
    }

    #[test]
    fn extrapolation_needs_three_times() {
        let s = single_pair(DissipationMode::Common);
        let err = tau_extrapolate(&s, &[0.02, 0.04, 0.04], &RunSettings::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn pull_back_is_the_adjoint_channel() {
        let mut rng = StdRng::seed_from_u64(3);
        let s = single_pair(DissipationMode::Common);
        let cm = CollisionMap::new(&s, 0.2, DissipationMode::Common, CascadeTime::Sweep).unwrap();
        let rho = random_state(&mut rng, 4);
        let x = random_state(&mut rng, 4).into_matrix();
        let lhs = trace_of_product(&pull_back(cm.matrix(), &x), rho.matrix());
        let rhs = trace_of_product(&x, cm.apply(&rho).unwrap().matrix());
        assert!((lhs - rhs).norm() < 1e-14);
    }
}
