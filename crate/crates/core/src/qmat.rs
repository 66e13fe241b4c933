//! Dense complex linear algebra and quantum-state primitives.
//!
//! Two-level sites use the ordered basis `{|1>, |0>}` (excited first), so
//! `sigma_z = diag(1, -1)` and `sigma_plus = |1><0|` is the `(0, 1)` entry.
//! Composite spaces are ordered with the first factor most significant,
//! matching [`kron`].

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Mass allowed outside a truncated oscillator space.
pub const CUTOFF_TAIL: f64 = 1e-8;
/// Cutoffs never go below this many levels.
pub const MIN_CUTOFF: usize = 8;

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn sigma_plus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

pub fn sigma_minus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn hermiticity_error(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// Product that skips zero entries of `a`; cheap for ladder and spin operators.
pub fn sparse_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let mut out = CMatrix::zeros(a.nrows(), b.ncols());
    for k in 0..a.ncols() {
        for i in 0..a.nrows() {
            let aik = a[(i, k)];
            if aik == ZERO {
                continue;
            }
            for j in 0..b.ncols() {
                let bkj = b[(k, j)];
                if bkj != ZERO {
                    out[(i, j)] += aik * bkj;
                }
            }
        }
    }
    out
}

/// Tr(a b) without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            let aik = a[(i, k)];
            if aik != ZERO {
                acc += aik * b[(k, i)];
            }
        }
    }
    acc
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix. Real
/// symmetric input takes the cheaper real path.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let (values, vectors) = if h.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::<f64>::from_fn(n, n, |i, j| 0.5 * (h[(i, j)].re + h[(j, i)].re));
        let eig = SymmetricEigen::new(real);
        (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors.map(re))
    } else {
        let sym = (h + h.adjoint()) * re(0.5);
        let eig = SymmetricEigen::new(sym);
        (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    (sorted_values, sorted_vectors)
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(a: &CMatrix) -> f64 {
    hermitian_eigen(a).0.iter().map(|v| v.abs()).sum()
}

/// `exp(-i t h)` for Hermitian `h`, via eigendecomposition.
pub fn matrix_exp(h: &CMatrix, t: f64) -> Result<CMatrix> {
    if !h.is_square() {
        return Err(Error::Dimension(format!(
            "matrix_exp needs a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let scale = max_abs(h).max(1.0);
    let dev = hermiticity_error(h);
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian(dev));
    }
    let (values, vectors) = hermitian_eigen(h);
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -t * lambda);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(scaled * vectors.adjoint())
}

/// Truncated ladder operators `(a, a_dagger)` with `<n-1|a|n> = sqrt(n)`.
pub fn fock_ops(cutoff: usize) -> Result<(CMatrix, CMatrix)> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument(format!(
            "oscillator cutoff must be at least 2, got {cutoff}"
        )));
    }
    let mut a = CMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = re((n as f64).sqrt());
    }
    let adag = a.adjoint();
    Ok((a, adag))
}

/// `diag(0, 1, ..., cutoff - 1)`.
pub fn number_op(cutoff: usize) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_fn(cutoff, |n, _| re(n as f64)))
}

/// Mean thermal occupation `1 / (e^{beta omega} - 1)`.
pub fn bose_occupation(beta_omega: f64) -> f64 {
    1.0 / beta_omega.exp_m1()
}

/// Number of oscillator levels kept for a thermal ancilla: the smallest `d`
/// whose geometric tail `e^{-d beta omega}` is below [`CUTOFF_TAIL`], and at
/// least [`MIN_CUTOFF`].
pub fn oscillator_cutoff(beta_omega: f64) -> usize {
    oscillator_cutoff_for_tail(beta_omega, CUTOFF_TAIL)
}

/// Same policy with a caller-chosen tail bound.
pub fn oscillator_cutoff_for_tail(beta_omega: f64, tail: f64) -> usize {
    assert!(beta_omega > 0.0, "cutoff needs a positive beta*omega");
    assert!(tail > 0.0 && tail < 1.0, "tail bound must lie in (0, 1)");
    let mut d = 1usize;
    while (-(d as f64) * beta_omega).exp() >= tail {
        d += 1;
    }
    d.max(MIN_CUTOFF)
}

/// Probability mass a thermal state would place above the truncation.
pub fn truncated_tail_mass(beta_omega: f64, cutoff: usize) -> f64 {
    (-(cutoff as f64) * beta_omega).exp()
}

/// Gibbs state `p(n) ~ e^{-n beta omega}` renormalized on `cutoff` levels.
pub fn thermal_oscillator_state(beta_omega: f64, cutoff: usize) -> Result<DensityMatrix> {
    if !(beta_omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta*omega must be positive, got {beta_omega}"
        )));
    }
    if cutoff < 2 {
        return Err(Error::InvalidArgument(format!(
            "oscillator cutoff must be at least 2, got {cutoff}"
        )));
    }
    let weights: Vec<f64> = (0..cutoff)
        .map(|n| (-(n as f64) * beta_omega).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let diag = nalgebra::DVector::from_iterator(cutoff, weights.iter().map(|w| re(w / z)));
    Ok(DensityMatrix {
        matrix: CMatrix::from_diagonal(&diag),
    })
}

/// Two-level Gibbs state at inverse temperature `beta` for splitting `omega`.
pub fn thermal_qubit_state(beta_omega: f64) -> DensityMatrix {
    let excited = 1.0 / (1.0 + beta_omega.exp());
    DensityMatrix {
        matrix: CMatrix::from_row_slice(2, 2, &[re(excited), ZERO, ZERO, re(1.0 - excited)]),
    }
}

/// Tr(op * state).
pub fn expectation(op: &CMatrix, state: &DensityMatrix) -> Result<Complex64> {
    if op.nrows() != state.dim() || op.ncols() != state.dim() {
        return Err(Error::Dimension(format!(
            "operator is {}x{}, state has dimension {}",
            op.nrows(),
            op.ncols(),
            state.dim()
        )));
    }
    Ok(trace_of_product(op, state.matrix()))
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-12;
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const NEGATIVITY_TOL: f64 = 1e-10;

    /// Validates trace, Hermiticity and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let herm = hermiticity_error(&matrix);
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |rho - rho^dag| = {herm:e})"
            )));
        }
        let min_eig = hermitian_eigen(&matrix).0[0];
        if min_eig < -Self::NEGATIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Symmetrizes, clips eigenvalues in `[-1e-10, 0)` to zero and
    /// renormalizes. Larger negativity is left in place for the caller to see.
    pub fn from_hermitized(matrix: &CMatrix) -> Self {
        let mut sym = (matrix + matrix.adjoint()) * re(0.5);
        let (values, vectors) = hermitian_eigen(&sym);
        if values
            .iter()
            .any(|&v| v < 0.0 && v >= -Self::NEGATIVITY_TOL)
        {
            let clipped: Vec<f64> = values
                .iter()
                .map(|&v| if v < 0.0 && v >= -Self::NEGATIVITY_TOL { 0.0 } else { v })
                .collect();
            let mut scaled = vectors.clone();
            for (j, v) in clipped.iter().enumerate() {
                for i in 0..scaled.nrows() {
                    scaled[(i, j)] *= re(*v);
                }
            }
            sym = scaled * vectors.adjoint();
            sym = (&sym + sym.adjoint()) * re(0.5);
        }
        let tr = sym.trace().re;
        Self {
            matrix: sym * re(1.0 / tr),
        }
    }

    /// Wraps a matrix without validation; for intermediate results whose
    /// deviations are themselves under test.
    pub(crate) fn from_raw(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = v / re(norm);
        Ok(Self {
            matrix: &v * v.adjoint(),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: identity(dim) * re(1.0 / dim as f64),
        }
    }

    pub fn product(states: &[&DensityMatrix]) -> Self {
        let mut m = CMatrix::identity(1, 1);
        for s in states {
            m = kron(&m, &s.matrix);
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.matrix, &self.matrix).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.matrix).0[0]
    }

    /// Zeroes every off-diagonal element in the computational basis.
    pub fn dephased(&self) -> Self {
        let n = self.dim();
        Self {
            matrix: CMatrix::from_fn(n, n, |i, j| if i == j { self.matrix[(i, i)] } else { ZERO }),
        }
    }

    /// Fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
    pub fn fidelity(&self, other: &DensityMatrix) -> f64 {
        let (vals, vecs) = hermitian_eigen(&self.matrix);
        let mut sqrt_rho = vecs.clone();
        for (j, v) in vals.iter().enumerate() {
            let s = v.max(0.0).sqrt();
            for i in 0..sqrt_rho.nrows() {
                sqrt_rho[(i, j)] *= re(s);
            }
        }
        let sqrt_rho = sqrt_rho * vecs.adjoint();
        let inner = &sqrt_rho * &other.matrix * &sqrt_rho;
        let root: f64 = hermitian_eigen(&inner)
            .0
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .sum();
        root * root
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        trace_norm_hermitian(&(&self.matrix - &other.matrix))
    }
}

/// What a tensor factor represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteLabel {
    /// Two-level site `n` (0-based) of the ensemble attached to `bath`.
    Spin { bath: Bath, index: usize },
    /// Oscillator ancilla of `bath`.
    Ancilla(Bath),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bath {
    Hot,
    Cold,
}

impl Bath {
    pub const BOTH: [Bath; 2] = [Bath::Hot, Bath::Cold];

    pub fn other(self) -> Bath {
        match self {
            Bath::Hot => Bath::Cold,
            Bath::Cold => Bath::Hot,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Bath::Hot => "h",
            Bath::Cold => "c",
        }
    }
}

/// Ordered subsystem dimensions with labels: hot spins, cold spins, then any
/// ancillas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertLayout {
    dims: Vec<usize>,
    labels: Vec<SiteLabel>,
}

impl HilbertLayout {
    /// Bare list of dimensions; labels treat every factor as a hot spin, so
    /// use this for generic tensor bookkeeping only.
    pub fn from_dims(dims: Vec<usize>) -> Self {
        let labels = (0..dims.len())
            .map(|index| SiteLabel::Spin {
                bath: Bath::Hot,
                index,
            })
            .collect();
        Self { dims, labels }
    }

    /// `2N` two-level sites: `S_{h,1..N}` then `S_{c,1..N}`.
    pub fn spins(n_sites: usize) -> Self {
        let mut labels = Vec::with_capacity(2 * n_sites);
        for bath in Bath::BOTH {
            for index in 0..n_sites {
                labels.push(SiteLabel::Spin { bath, index });
            }
        }
        Self {
            dims: vec![2; 2 * n_sites],
            labels,
        }
    }

    /// Appends the hot and cold ancillas with the given cutoffs.
    pub fn with_ancillas(&self, hot_cutoff: usize, cold_cutoff: usize) -> Self {
        let mut out = self.clone();
        out.dims.push(hot_cutoff);
        out.labels.push(SiteLabel::Ancilla(Bath::Hot));
        out.dims.push(cold_cutoff);
        out.labels.push(SiteLabel::Ancilla(Bath::Cold));
        out
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[SiteLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: SiteLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Row-major strides; the last factor varies fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn split_index(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        out
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on factor `site`.
pub fn embed_site_op(op: &CMatrix, site: usize, layout: &HilbertLayout) -> Result<CMatrix> {
    if site >= layout.len() {
        return Err(Error::SiteOutOfRange {
            site,
            len: layout.len(),
        });
    }
    let d = layout.dims()[site];
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::Dimension(format!(
            "operator is {}x{} but site {site} has dimension {d}",
            op.nrows(),
            op.ncols()
        )));
    }
    let left: usize = layout.dims()[..site].iter().product();
    let right: usize = layout.dims()[site + 1..].iter().product();
    Ok(kron(&kron(&identity(left), op), &identity(right)))
}

/// Reduced state on the factors in `keep` (kept in layout order).
pub fn partial_trace(
    state: &DensityMatrix,
    layout: &HilbertLayout,
    keep: &[usize],
) -> Result<DensityMatrix> {
    if layout.total_dim() != state.dim() {
        return Err(Error::Dimension(format!(
            "layout dimension {} does not match state dimension {}",
            layout.total_dim(),
            state.dim()
        )));
    }
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set must be non-empty".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::InvalidArgument("keep set has duplicates".into()));
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= layout.len()) {
        return Err(Error::SiteOutOfRange {
            site: bad,
            len: layout.len(),
        });
    }
    let traced: Vec<usize> = (0..layout.len()).filter(|k| !kept.contains(k)).collect();
    let strides = layout.strides();
    let dims = layout.dims();

    let offsets = |sites: &[usize]| -> Vec<usize> {
        let mut offs = vec![0usize];
        for &s in sites {
            let mut next = Vec::with_capacity(offs.len() * dims[s]);
            for &o in &offs {
                for v in 0..dims[s] {
                    next.push(o + v * strides[s]);
                }
            }
            offs = next;
        }
        offs
    };
    let keep_offsets = offsets(&kept);
    let trace_offsets = offsets(&traced);

    let rho = state.matrix();
    let n = keep_offsets.len();
    let mut out = CMatrix::zeros(n, n);
    for (r, &ro) in keep_offsets.iter().enumerate() {
        for (c, &co) in keep_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &trace_offsets {
                acc += rho[(ro + t, co + t)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityMatrix { matrix: out })
}

/// Column-stacked vectorization: `vec(rho)[a + d b] = rho[a, b]`.
pub fn vectorize(m: &CMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &nalgebra::DVector<Complex64>, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// One factor of a [`KronOp`] term; `None` is the identity.
type Factor = Option<CMatrix>;

/// Operator on a tensor-product space stored as a sum of Kronecker products,
/// `sum_k c_k F_k1 ⊗ F_k2 ⊗ …`. Products and expectations over product
/// states never form the full matrix.
#[derive(Clone, Debug)]
pub struct KronOp {
    dims: Vec<usize>,
    terms: Vec<(Complex64, Vec<Factor>)>,
}

impl KronOp {
    pub fn zero(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            terms: Vec::new(),
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            terms: vec![(ONE, vec![None; dims.len()])],
        }
    }

    /// `coeff * (I ⊗ … ⊗ op ⊗ … ⊗ I)`.
    pub fn local(dims: &[usize], slot: usize, op: CMatrix, coeff: Complex64) -> Self {
        Self::product(dims, coeff, vec![(slot, op)])
    }

    /// `coeff * ⊗_k F_k` with the listed factors and identities elsewhere.
    pub fn product(dims: &[usize], coeff: Complex64, factors: Vec<(usize, CMatrix)>) -> Self {
        let mut slots: Vec<Factor> = vec![None; dims.len()];
        for (slot, op) in factors {
            assert_eq!(op.nrows(), dims[slot], "factor dimension mismatch");
            slots[slot] = Some(op);
        }
        Self {
            dims: dims.to_vec(),
            terms: vec![(coeff, slots)],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        for t in &mut self.terms {
            t.0 *= c;
        }
        self
    }

    pub fn add(mut self, other: &KronOp) -> Self {
        assert_eq!(self.dims, other.dims);
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn sub(self, other: &KronOp) -> Self {
        self.add(&other.clone().scaled(-ONE))
    }

    pub fn mul(&self, other: &KronOp) -> Self {
        assert_eq!(self.dims, other.dims);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ca, fa) in &self.terms {
            for (cb, fb) in &other.terms {
                let factors = fa
                    .iter()
                    .zip(fb)
                    .map(|(x, y)| match (x, y) {
                        (None, None) => None,
                        (Some(x), None) => Some(x.clone()),
                        (None, Some(y)) => Some(y.clone()),
                        (Some(x), Some(y)) => Some(sparse_mul(x, y)),
                    })
                    .collect();
                terms.push((ca * cb, factors));
            }
        }
        Self {
            dims: self.dims.clone(),
            terms,
        }
    }

    pub fn commutator(&self, other: &KronOp) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            terms: self
                .terms
                .iter()
                .map(|(c, f)| (c.conj(), f.iter().map(|x| x.as_ref().map(|m| m.adjoint())).collect()))
                .collect(),
        }
    }

    /// `Tr(op · ρ_1 ⊗ ρ_2 ⊗ …)`.
    pub fn expectation(&self, states: &[&CMatrix]) -> Complex64 {
        assert_eq!(states.len(), self.dims.len());
        self.terms
            .iter()
            .map(|(c, factors)| {
                factors
                    .iter()
                    .zip(states)
                    .fold(*c, |acc, (f, rho)| match f {
                        None => acc * rho.trace(),
                        Some(f) => acc * trace_of_product(f, rho),
                    })
            })
            .sum()
    }

    /// Matrix element between composite basis indices given per factor.
    pub fn element(&self, row: &[usize], col: &[usize]) -> Complex64 {
        let mut acc = ZERO;
        'terms: for (c, factors) in &self.terms {
            let mut v = *c;
            for (k, f) in factors.iter().enumerate() {
                match f {
                    None => {
                        if row[k] != col[k] {
                            continue 'terms;
                        }
                    }
                    Some(f) => {
                        let e = f[(row[k], col[k])];
                        if e == ZERO {
                            continue 'terms;
                        }
                        v *= e;
                    }
                }
            }
            acc += v;
        }
        acc
    }

    /// Fuses the first `count` factors into one, e.g. all spins into a single
    /// system factor so expectations over entangled system states factorize.
    pub fn merge_leading(&self, count: usize) -> Self {
        assert!(count >= 1 && count <= self.dims.len());
        let merged_dim: usize = self.dims[..count].iter().product();
        let mut dims = vec![merged_dim];
        dims.extend_from_slice(&self.dims[count..]);
        let terms = self
            .terms
            .iter()
            .map(|(c, factors)| {
                let lead = if factors[..count].iter().all(|f| f.is_none()) {
                    None
                } else {
                    let mut m = CMatrix::identity(1, 1);
                    for (f, &d) in factors[..count].iter().zip(&self.dims) {
                        m = match f {
                            None => kron(&m, &identity(d)),
                            Some(f) => kron(&m, f),
                        };
                    }
                    Some(m)
                };
                let mut out = vec![lead];
                out.extend(factors[count..].iter().cloned());
                (*c, out)
            })
            .collect();
        Self { dims, terms }
    }

    pub fn to_dense(&self) -> CMatrix {
        let total: usize = self.dims.iter().product();
        let mut out = CMatrix::zeros(total, total);
        for (c, factors) in &self.terms {
            let mut m = CMatrix::from_element(1, 1, *c);
            for (f, &d) in factors.iter().zip(&self.dims) {
                m = match f {
                    None => kron(&m, &identity(d)),
                    Some(f) => kron(&m, f),
                };
            }
            out += m;
        }
        out
    }
}
