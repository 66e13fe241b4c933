//! Lindblad generators, steady states and transient propagation.
//!
//! Density matrices are column-stacked: `vec(rho)[a + d b] = rho[a, b]`, so
//! `vec(A rho B) = (B^T ⊗ A) vec(rho)`.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::model::{Bath, DissipationMode, RateTable, Scenario};
use crate::qmat::{self, re, sigma_minus, sigma_plus, CMatrix, DensityMatrix, I, ONE, ZERO};
use crate::{Error, Result};

/// Dense linear map on vectorized `d x d` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != ZERO {
                out.push((i, j, v));
            }
        }
    }
    out
}

impl Superoperator {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::Dimension(format!(
                "superoperator on dimension {dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Adds `rho -> c A rho B`.
    pub fn add_sandwich(&mut self, c: Complex64, a: &CMatrix, b: &CMatrix) {
        let d = self.dim;
        let an = nonzeros(a);
        let bn = nonzeros(b);
        for &(l, j, bv) in &bn {
            for &(i, k, av) in &an {
                self.matrix[(i + d * j, k + d * l)] += c * av * bv;
            }
        }
    }

    /// Adds `rho -> -i [h, rho]`.
    pub fn add_hamiltonian(&mut self, h: &CMatrix) {
        let id = qmat::identity(self.dim);
        self.add_sandwich(-I, h, &id);
        self.add_sandwich(I, &id, h);
    }

    /// Adds `rho -> c (x rho + rho x)`.
    pub fn add_anticommutator(&mut self, c: Complex64, x: &CMatrix) {
        let id = qmat::identity(self.dim);
        self.add_sandwich(c, x, &id);
        self.add_sandwich(c, &id, x);
    }

    /// Adds `rate * D[a]`, `D[a] rho = a rho a^dag - {a^dag a, rho}/2`.
    pub fn add_dissipator(&mut self, rate: f64, a: &CMatrix) {
        if rate == 0.0 {
            return;
        }
        let adag = a.adjoint();
        self.add_sandwich(re(rate), a, &adag);
        self.add_anticommutator(re(-0.5 * rate), &(&adag * a));
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let v = &self.matrix * qmat::vectorize(rho);
        qmat::unvectorize(&v, self.dim)
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Largest entry of `Tr ∘ L`, zero for a trace-preserving generator.
    pub fn trace_leak(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|col| {
                (0..d)
                    .map(|a| self.matrix[(a + d * a, col)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

impl std::ops::Add for &Superoperator {
    type Output = Superoperator;

    fn add(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim);
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl std::ops::Sub for &Superoperator {
    type Output = Superoperator;

    fn sub(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim);
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// `-i[h, .] + sum_k rate_k D[a_k]` for arbitrary operators.
pub fn lindblad(h: &CMatrix, jumps: &[(f64, CMatrix)]) -> Result<Superoperator> {
    if !h.is_square() {
        return Err(Error::Dimension("Hamiltonian must be square".into()));
    }
    let mut l = Superoperator::zero(h.nrows());
    l.add_hamiltonian(h);
    for (rate, a) in jumps {
        if a.nrows() != h.nrows() || a.ncols() != h.ncols() {
            return Err(Error::Dimension(format!(
                "jump operator is {}x{}, Hamiltonian is {}x{}",
                a.nrows(),
                a.ncols(),
                h.nrows(),
                h.ncols()
            )));
        }
        l.add_dissipator(*rate, a);
    }
    Ok(l)
}

pub fn dissipator_local(s: &Scenario) -> Result<Superoperator> {
    Ok(dissipator_local_with_rates(s, &s.rate_table()?))
}

/// Single-site decay and excitation; only diagonal rates are read.
pub fn dissipator_local_with_rates(s: &Scenario, rates: &RateTable) -> Superoperator {
    let mut l = Superoperator::zero(s.dim());
    for bath in Bath::BOTH {
        for n in 0..s.n_sites() {
            l.add_dissipator(rates.minus(bath, n, n), &s.spin_op(bath, n, &sigma_minus()));
            l.add_dissipator(rates.plus(bath, n, n), &s.spin_op(bath, n, &sigma_plus()));
        }
    }
    l
}

fn require(s: &Scenario, mode: DissipationMode) -> Result<()> {
    if s.mode() == mode {
        Ok(())
    } else {
        Err(Error::WrongMode {
            expected: mode.name(),
            actual: s.mode().name(),
        })
    }
}

pub fn dissipator_nonlocal_common(s: &Scenario) -> Result<Superoperator> {
    require(s, DissipationMode::Common)?;
    Ok(common_cross_terms(s, &s.rate_table()?))
}

/// Shared-bath cross terms over ordered pairs `n != n'`.
pub fn common_cross_terms(s: &Scenario, rates: &RateTable) -> Superoperator {
    let mut l = Superoperator::zero(s.dim());
    for bath in Bath::BOTH {
        let sm: Vec<CMatrix> = (0..s.n_sites()).map(|n| s.spin_op(bath, n, &sigma_minus())).collect();
        let sp: Vec<CMatrix> = sm.iter().map(|m| m.adjoint()).collect();
        for n in 0..s.n_sites() {
            for k in (0..s.n_sites()).filter(|&k| k != n) {
                let gm = rates.minus(bath, n, k);
                let gp = rates.plus(bath, n, k);
                if gm != 0.0 {
                    l.add_sandwich(re(gm), &sm[n], &sp[k]);
                    l.add_anticommutator(re(-0.5 * gm), &(&sp[n] * &sm[k]));
                }
                if gp != 0.0 {
                    l.add_sandwich(re(gp), &sp[n], &sm[k]);
                    l.add_anticommutator(re(-0.5 * gp), &(&sm[n] * &sp[k]));
                }
            }
        }
    }
    l
}

pub fn dissipator_nonlocal_cascaded(s: &Scenario) -> Result<Superoperator> {
    require(s, DissipationMode::Cascaded)?;
    Ok(cascaded_cross_terms(s, &s.rate_table()?))
}

/// One-way cross terms: site `n` drives every later site `n' > n`.
pub fn cascaded_cross_terms(s: &Scenario, rates: &RateTable) -> Superoperator {
    let mut l = Superoperator::zero(s.dim());
    let id = qmat::identity(s.dim());
    for bath in Bath::BOTH {
        let sm: Vec<CMatrix> = (0..s.n_sites()).map(|n| s.spin_op(bath, n, &sigma_minus())).collect();
        let sp: Vec<CMatrix> = sm.iter().map(|m| m.adjoint()).collect();
        for n in 0..s.n_sites() {
            for k in n + 1..s.n_sites() {
                // a_n [rho, b_k] + [a_k, rho] b_n for (a, b) = (s-, s+) and (s+, s-)
                for (rate, a, b) in [
                    (rates.minus(bath, n, k), &sm, &sp),
                    (rates.plus(bath, n, k), &sp, &sm),
                ] {
                    if rate == 0.0 {
                        continue;
                    }
                    l.add_sandwich(re(rate), &a[n], &b[k]);
                    l.add_sandwich(re(-rate), &(&a[n] * &b[k]), &id);
                    l.add_sandwich(re(rate), &a[k], &b[n]);
                    l.add_sandwich(re(-rate), &id, &(&a[k] * &b[n]));
                }
            }
        }
    }
    l
}

pub fn assemble(s: &Scenario) -> Result<Superoperator> {
    Ok(assemble_with_rates(s, &s.rate_table()?))
}

/// Full generator for the scenario's mode with an explicit rate table.
pub fn assemble_with_rates(s: &Scenario, rates: &RateTable) -> Superoperator {
    let mut l = dissipator_local_with_rates(s, rates);
    l.add_hamiltonian(&s.system_hamiltonian());
    match s.mode() {
        DissipationMode::Common => &l + &common_cross_terms(s, rates),
        DissipationMode::Cascaded => &l + &cascaded_cross_terms(s, rates),
        DissipationMode::Independent => l,
    }
}

/// Orthonormal Hermitian basis used for real-valued solves. Slot `(a, b)`,
/// stored at `a + d b`, holds `E_aa` on the diagonal, `(E_ab + E_ba)/√2`
/// above it and `i(E_ba - E_ab)/√2` below it (for the transposed pair).
#[derive(Clone, Copy, Debug)]
struct HermitianBasis {
    d: usize,
}

impl HermitianBasis {
    /// Non-zero entries `(row, col, value)` of basis element `k`.
    fn element(&self, k: usize) -> [(usize, usize, Complex64); 2] {
        let (a, b) = (k % self.d, k / self.d);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        if a == b {
            [(a, a, ONE), (a, a, ZERO)]
        } else if a < b {
            [(a, b, re(h)), (b, a, re(h))]
        } else {
            // pair (p, q) = (b, a) with p < q
            [(b, a, Complex64::new(0.0, -h)), (a, b, Complex64::new(0.0, h))]
        }
    }

    fn coords(&self, rho: &CMatrix) -> DVector<f64> {
        let d = self.d;
        let s2 = std::f64::consts::SQRT_2;
        DVector::from_fn(d * d, |k, _| {
            let (a, b) = (k % d, k / d);
            if a == b {
                rho[(a, a)].re
            } else if a < b {
                s2 * rho[(a, b)].re
            } else {
                -s2 * rho[(b, a)].im
            }
        })
    }

    fn matrix(&self, r: &DVector<f64>) -> CMatrix {
        let d = self.d;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMatrix::zeros(d, d);
        for a in 0..d {
            m[(a, a)] = re(r[a + d * a]);
            for b in a + 1..d {
                let x = r[a + d * b];
                let y = r[b + d * a];
                m[(a, b)] = Complex64::new(h * x, -h * y);
                m[(b, a)] = Complex64::new(h * x, h * y);
            }
        }
        m
    }

    /// `R[k, l] = Tr(B_k L(B_l))`, real for Hermiticity-preserving `L`.
    fn real_form(&self, l: &Superoperator) -> DMatrix<f64> {
        let d = self.d;
        let n = d * d;
        let mut out = DMatrix::<f64>::zeros(n, n);
        let lm = l.matrix();
        let elems: Vec<[(usize, usize, Complex64); 2]> = (0..n).map(|k| self.element(k)).collect();
        for (col, bl) in elems.iter().enumerate() {
            for k in 0..n {
                let mut acc = ZERO;
                for &(i, j, bk) in &elems[k] {
                    if bk == ZERO {
                        continue;
                    }
                    // Tr(B_k M) picks M[j, i]
                    let row = j + d * i;
                    for &(p, q, bv) in bl {
                        if bv != ZERO {
                            acc += bk * lm[(row, p + d * q)] * bv;
                        }
                    }
                }
                out[(k, col)] = acc.re;
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// Frobenius norm of `L(rho)`.
    pub residual: f64,
    /// Second-smallest singular value of `L`.
    pub spectral_gap: f64,
    pub sigma_max: f64,
    /// Gap below `DEGENERACY_RATIO * sigma_max`.
    pub degenerate: bool,
}

pub const DEGENERACY_RATIO: f64 = 1e-8;

/// Kernel of `L` in the Hermitian basis. Singular values give the gap; the
/// kernel vector comes from a bordered LU solve with one population equation
/// replaced by the trace. A degenerate or singular case falls back to the
/// right singular vector of the smallest singular value.
pub fn steady_state(l: &Superoperator) -> Result<SteadyState> {
    let d = l.dim();
    let basis = HermitianBasis { d };
    let real = basis.real_form(l);
    let n = d * d;
    let smallest_two = |sv: &DVector<f64>| {
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(f64::total_cmp);
        (s.get(1).copied().unwrap_or(f64::INFINITY), s[n - 1])
    };
    let (gap, sigma_max) = match SVD::try_new(real.clone(), false, false, 1e-15, 10_000) {
        Some(svd) => smallest_two(&svd.singular_values),
        None => (f64::NAN, real.norm()),
    };
    let degenerate = !(gap > DEGENERACY_RATIO * sigma_max);
    let bordered = || {
        let mut b = real.clone();
        let mut rhs = DVector::<f64>::zeros(n);
        for col in 0..n {
            b[(0, col)] = if col % d == col / d { 1.0 } else { 0.0 };
        }
        rhs[0] = 1.0;
        b.lu().solve(&rhs)
    };
    let coords = match (degenerate, bordered()) {
        (false, Some(sol)) => sol,
        _ => {
            let svd = SVD::try_new(real.clone(), false, true, 1e-15, 10_000)
                .ok_or_else(|| Error::NotConverged("steady state: SVD did not converge".into()))?;
            let k = (0..n)
                .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
                .expect("non-empty spectrum");
            svd.v_t.as_ref().expect("right singular vectors requested").row(k).transpose()
        }
    };
    let trace: f64 = (0..d).map(|a| coords[a + d * a]).sum();
    if trace.abs() < 1e-300 {
        return Err(Error::NotConverged("kernel vector has zero trace".into()));
    }
    let rho = DensityMatrix::from_hermitized(&basis.matrix(&(coords / trace)));
    let residual = l.apply(rho.matrix()).norm();
    Ok(SteadyState {
        rho,
        residual,
        spectral_gap: gap,
        sigma_max,
        degenerate,
    })
}

/// `exp(L t) rho0`.
pub fn evolve(l: &Superoperator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("evolution time must be non-negative, got {t}")));
    }
    if rho0.dim() != l.dim() {
        return Err(Error::Dimension(format!(
            "state has dimension {}, generator acts on dimension {}",
            rho0.dim(),
            l.dim()
        )));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let basis = HermitianBasis { d: l.dim() };
    let propagator = (basis.real_form(l) * t).exp();
    let r = propagator * basis.coords(rho0.matrix());
    Ok(DensityMatrix::from_raw(basis.matrix(&r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_scenario, EnsembleSpec, Interaction};
    use crate::qmat::{hermiticity_error, max_abs, partial_trace, thermal_qubit_state, HilbertLayout};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(rng: &mut StdRng, d: usize) -> CMatrix {
        let a = CMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        (&a + a.adjoint()) * re(0.5)
    }

    fn random_state(rng: &mut StdRng, d: usize) -> DensityMatrix {
        let a = CMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::from_hermitized(&(m / tr))
    }

    fn reference(mode: DissipationMode, kind: u8) -> Scenario {
        reference_scenario(1.5, kind, mode).unwrap()
    }

    /// Permutation exchanging labels 1 and 2 in both ensembles.
    fn label_swap(n_sites: usize) -> CMatrix {
        assert_eq!(n_sites, 2);
        let layout = HilbertLayout::spins(2);
        let d = layout.total_dim();
        let mut p = CMatrix::zeros(d, d);
        for idx in 0..d {
            let digits = layout.split_index(idx);
            let swapped = [digits[1], digits[0], digits[3], digits[2]];
            let target = swapped.iter().fold(0, |acc, &x| acc * 2 + x);
            p[(target, idx)] = ONE;
        }
        p
    }

    #[test]
    fn single_qubit_thermalizes() {
        let nbar = 1.0 / (1.0f64.exp() - 1.0);
        let h = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let l = lindblad(&h, &[(nbar + 1.0, sigma_minus()), (nbar, sigma_plus())]).unwrap();
        let ss = steady_state(&l).unwrap();
        let e = std::f64::consts::E;
        assert!((ss.rho.matrix()[(0, 0)].re - 1.0 / (1.0 + e)).abs() < 1e-12);
        assert!((ss.rho.matrix()[(1, 1)].re - e / (1.0 + e)).abs() < 1e-12);
        assert!((ss.rho.matrix()[(0, 0)].re - 0.26894).abs() < 1e-5);
        assert!(!ss.degenerate);
    }

    #[test]
    fn hot_only_local_dissipator_is_gibbs() {
        let s = Scenario::new(
            EnsembleSpec::new(1.0, vec![0.5], 2.0),
            EnsembleSpec::new(1.0, vec![0.0], 1.0),
            Interaction::None,
            DissipationMode::Common,
        )
        .unwrap();
        let l = dissipator_local(&s).unwrap();
        let d = l.dim();
        let rho = qmat::identity(d) * re(1.0 / d as f64);
        assert!(l.apply(&rho).trace().norm() < 1e-15);
        // excited population n/(2n+1) on the hot site, any cold-site state
        let n = bose(0.5);
        let p = n / (2.0 * n + 1.0);
        let hot = DensityMatrix::new(CMatrix::from_row_slice(2, 2, &[re(p), ZERO, ZERO, re(1.0 - p)])).unwrap();
        let cold = DensityMatrix::new(CMatrix::from_row_slice(2, 2, &[re(0.3), re(0.1), re(0.1), re(0.7)])).unwrap();
        let fixed = DensityMatrix::product(&[&hot, &cold]);
        assert!(max_abs(&l.apply(fixed.matrix())) < 1e-15);
        let shifted = DensityMatrix::product(&[&thermal_qubit_state(0.2), &cold]);
        assert!(max_abs(&l.apply(shifted.matrix())) > 1e-3);
    }

    fn bose(bw: f64) -> f64 {
        1.0 / (bw.exp() - 1.0)
    }

    #[test]
    fn zero_coupling_gives_zero_dissipator() {
        let s = reference_scenario(1.5, 2, DissipationMode::Common)
            .unwrap()
            .with_couplings(vec![0.0, 0.0], vec![0.0, 0.0])
            .unwrap();
        assert_eq!(max_abs(dissipator_local(&s).unwrap().matrix()), 0.0);
        assert_eq!(max_abs(dissipator_nonlocal_common(&s).unwrap().matrix()), 0.0);
    }

    #[test]
    fn cross_terms_vanish_for_single_pair() {
        let s = Scenario::new(
            EnsembleSpec::new(1.2, vec![0.5], 2.0),
            EnsembleSpec::new(1.0, vec![0.5], 1.0),
            Interaction::Pairwise(vec![0.1]),
            DissipationMode::Common,
        )
        .unwrap();
        assert_eq!(max_abs(dissipator_nonlocal_common(&s).unwrap().matrix()), 0.0);
        let c = s.with_mode(DissipationMode::Cascaded);
        assert_eq!(max_abs(dissipator_nonlocal_cascaded(&c).unwrap().matrix()), 0.0);
    }

    #[test]
    fn wrong_mode_is_rejected() {
        assert!(matches!(
            dissipator_nonlocal_common(&reference(DissipationMode::Cascaded, 2)),
            Err(Error::WrongMode { .. })
        ));
        assert!(matches!(
            dissipator_nonlocal_cascaded(&reference(DissipationMode::Independent, 2)),
            Err(Error::WrongMode { .. })
        ));
    }

    #[test]
    fn generators_preserve_trace_and_hermiticity() {
        let mut rng = StdRng::seed_from_u64(21);
        for mode in DissipationMode::ALL {
            for kind in [1, 2] {
                let l = assemble(&reference(mode, kind)).unwrap();
                assert_eq!(l.matrix().nrows(), 256);
                assert!(l.trace_leak() < 1e-10);
                for _ in 0..10 {
                    let x = random_hermitian(&mut rng, 16);
                    let y = l.apply(&x);
                    assert!(hermiticity_error(&y) < 1e-12);
                    assert!(y.trace().norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn independent_differs_from_common_by_cross_terms() {
        let com = assemble(&reference(DissipationMode::Common, 1)).unwrap();
        let ind = assemble(&reference(DissipationMode::Independent, 1)).unwrap();
        let cross = dissipator_nonlocal_common(&reference(DissipationMode::Common, 1)).unwrap();
        assert!(max_abs((&com - &ind).matrix()) > 0.0);
        assert!(max_abs((&(&com - &ind) - &cross).matrix()) < 1e-15);
    }

    #[test]
    fn independent_ignores_offdiagonal_rates() {
        let s = reference(DissipationMode::Independent, 2);
        let rates = s.rate_table().unwrap();
        let a = assemble_with_rates(&s, &rates);
        let b = assemble_with_rates(&s, &rates.with_offdiagonal_zeroed());
        assert_eq!(a, b);
    }

    #[test]
    fn common_cross_terms_are_swap_symmetric_for_equal_couplings() {
        let s = reference_scenario(1.5, 2, DissipationMode::Common)
            .unwrap()
            .with_couplings(vec![0.5, 0.5], vec![0.4, 0.4])
            .unwrap();
        let l = dissipator_nonlocal_common(&s).unwrap();
        let p = label_swap(2);
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..5 {
            let x = random_hermitian(&mut rng, 16);
            let direct = l.apply(&x);
            let conj = &p * l.apply(&(p.adjoint() * &x * &p)) * p.adjoint();
            assert!(max_abs(&(direct - conj)) < 1e-10);
        }
    }

    #[test]
    fn cascaded_first_site_sees_no_back_action() {
        let s = reference_scenario(1.5, 0, DissipationMode::Cascaded).unwrap();
        let rates = s.rate_table().unwrap();
        let local = dissipator_local_with_rates(&s, &rates);
        let full = &local + &cascaded_cross_terms(&s, &rates);
        let layout = s.layout().clone();
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..10 {
            let rho = random_state(&mut rng, 16);
            for site in [0, 2] {
                let a = DensityMatrix::from_raw(local.apply(rho.matrix()));
                let b = DensityMatrix::from_raw(full.apply(rho.matrix()));
                let ra = partial_trace(&a, &layout, &[site]).unwrap();
                let rb = partial_trace(&b, &layout, &[site]).unwrap();
                assert!(max_abs(&(ra.matrix() - rb.matrix())) < 1e-14);
            }
            // the later site does feel the earlier one
            let a = DensityMatrix::from_raw(local.apply(rho.matrix()));
            let b = DensityMatrix::from_raw(full.apply(rho.matrix()));
            let ra = partial_trace(&a, &layout, &[1]).unwrap();
            let rb = partial_trace(&b, &layout, &[1]).unwrap();
            assert!(max_abs(&(ra.matrix() - rb.matrix())) > 1e-6);
        }
    }

    /// `exp(-H_0/T)/Z` for the bare Hamiltonian. With equal frequencies the
    /// exchange term commutes with `H_0`, and local dissipators at a common
    /// temperature relax to this state.
    fn bare_gibbs(s: &Scenario, t: f64) -> CMatrix {
        let h0 = s.free_hamiltonian();
        let d = s.dim();
        let w: Vec<f64> = (0..d).map(|k| (-h0[(k, k)].re / t).exp()).collect();
        let z: f64 = w.iter().sum();
        CMatrix::from_fn(d, d, |i, j| if i == j { re(w[i] / z) } else { ZERO })
    }

    #[test]
    fn equal_temperatures_relax_to_gibbs() {
        for g in [vec![0.5, 0.55], vec![0.5, 0.5]] {
            for mode in DissipationMode::ALL {
                for kind in [1, 2] {
                    let s = reference_scenario(1.0, kind, mode)
                        .unwrap()
                        .with_temperatures(1.3, 1.3)
                        .unwrap()
                        .with_couplings(g.clone(), g.clone())
                        .unwrap();
                    let l = assemble(&s).unwrap();
                    let gibbs = bare_gibbs(&s, 1.3);
                    assert!(max_abs(&l.apply(&gibbs)) < 1e-14);
                    let ss = steady_state(&l).unwrap();
                    if ss.degenerate {
                        // equal couplings to a shared bath leave a dark subspace
                        assert!(g[0] == g[1] && mode == DissipationMode::Common);
                        continue;
                    }
                    assert!(
                        max_abs(&(ss.rho.matrix() - &gibbs)) < 1e-9,
                        "{mode:?} type{kind} g={g:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn uncoupled_ensembles_relax_to_product_of_local_gibbs() {
        let s = reference_scenario(1.7, 0, DissipationMode::Independent).unwrap();
        let ss = steady_state(&assemble(&s).unwrap()).unwrap();
        let h = thermal_qubit_state(1.7 / 2.0);
        let c = thermal_qubit_state(1.0);
        let product = DensityMatrix::product(&[&h, &h, &c, &c]);
        assert!(max_abs(&(ss.rho.matrix() - product.matrix())) < 1e-12);
        assert!(ss.rho.fidelity(&product) > 1.0 - 1e-9);
    }

    #[test]
    fn steady_state_residuals() {
        for mode in DissipationMode::ALL {
            for kind in [1, 2] {
                let l = assemble(&reference(mode, kind)).unwrap();
                let ss = steady_state(&l).unwrap();
                assert!(ss.residual < 1e-10 * l.norm(), "{}", ss.residual);
                assert!(!ss.degenerate);
                assert!(ss.rho.min_eigenvalue() >= -1e-10);
                assert!((ss.rho.trace() - ONE).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_generator_is_degenerate() {
        let l = Superoperator::zero(2);
        assert!(steady_state(&l).unwrap().degenerate);
    }

    #[test]
    fn coherence_pattern_by_mode() {
        let com = steady_state(&assemble(&reference_scenario(1.5, 2, DissipationMode::Common).unwrap()).unwrap()).unwrap();
        let ind = steady_state(&assemble(&reference_scenario(1.5, 0, DissipationMode::Independent).unwrap()).unwrap()).unwrap();
        let s = reference_scenario(1.5, 0, DissipationMode::Common).unwrap();
        let op = s.spin_op(Bath::Hot, 0, &sigma_plus()) * s.spin_op(Bath::Hot, 1, &sigma_minus());
        let c_com = qmat::expectation(&op, &com.rho).unwrap();
        let c_ind = qmat::expectation(&op, &ind.rho).unwrap();
        assert!(c_com.norm() > 1e-4, "{c_com}");
        assert!(c_ind.norm() < 1e-12, "{c_ind}");
    }

    #[test]
    fn label_swap_covariance() {
        let base = reference_scenario(1.4, 2, DissipationMode::Common)
            .unwrap()
            .with_interaction(Interaction::Pairwise(vec![0.1, 0.2]))
            .unwrap();
        let swapped = base
            .with_couplings(vec![0.55, 0.5], vec![0.55, 0.5])
            .unwrap()
            .with_interaction(Interaction::Pairwise(vec![0.2, 0.1]))
            .unwrap();
        let a = steady_state(&assemble(&base).unwrap()).unwrap();
        let b = steady_state(&assemble(&swapped).unwrap()).unwrap();
        let p = label_swap(2);
        let transformed = &p * a.rho.matrix() * p.adjoint();
        assert!(max_abs(&(transformed - b.rho.matrix())) < 1e-10);
    }

    #[test]
    fn evolution() {
        let l = assemble(&reference(DissipationMode::Common, 2)).unwrap();
        let ss = steady_state(&l).unwrap();
        let rho0 = DensityMatrix::product(&[
            &thermal_qubit_state(0.1),
            &thermal_qubit_state(3.0),
            &thermal_qubit_state(0.5),
            &thermal_qubit_state(2.0),
        ]);
        assert_eq!(evolve(&l, &rho0, 0.0).unwrap(), rho0);
        assert!(evolve(&l, &rho0, -1.0).is_err());
        for k in 1..=10 {
            let rho = evolve(&l, &rho0, 0.7 * k as f64).unwrap();
            assert!((rho.trace() - ONE).norm() < 1e-11);
            assert!(hermiticity_error(rho.matrix()) < 1e-12);
            assert!(rho.min_eigenvalue() > -1e-9);
        }
        let t_long = 50.0 / ss.spectral_gap;
        let late = evolve(&l, &rho0, t_long).unwrap();
        assert!(max_abs(&(late.matrix() - ss.rho.matrix())) < 1e-8);
    }

    #[test]
    fn hermitian_basis_round_trip() {
        let mut rng = StdRng::seed_from_u64(2);
        let basis = HermitianBasis { d: 5 };
        let x = random_hermitian(&mut rng, 5);
        assert!(max_abs(&(basis.matrix(&basis.coords(&x)) - &x)) < 1e-15);
        // orthonormality of the basis elements
        let dense = |k: usize| {
            let mut m = CMatrix::zeros(5, 5);
            for (i, j, v) in basis.element(k) {
                m[(i, j)] += v;
            }
            m
        };
        for k in 0..25 {
            for l in 0..25 {
                let ip = (dense(k).adjoint() * dense(l)).trace();
                let expect = if k == l { ONE } else { ZERO };
                assert!((ip - expect).norm() < 1e-15);
            }
        }
    }
}
