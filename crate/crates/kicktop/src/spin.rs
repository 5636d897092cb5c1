//! Angular-momentum operators, rotation/torsion factors, and spin-coherent
//! states in the (2j+1)-dimensional |j,m> basis (m descending from j).
//!
//! The basis is ordered m = j, j-1, ..., -j so that index 0 is |j,j> ("all
//! qubits up"). Rotations about in-plane axes are computed exactly through
//! the eigendecomposition of a real symmetric tridiagonal matrix: with
//! D = diag((-i)^i), the operator D J_y D† is real tridiagonal, and
//! tilting the axis in the x-y plane only changes the diagonal phases.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{c, cis, r, C, CMat, CVec, Real};
use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

/// Spin quantum number stored as the integer 2j.
///
/// Keeping 2j integral removes floating-point equality hazards in basis
/// indexing; j = N/2 where N is the number of qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinQuantumNumber {
    twice_j: u32,
}

impl SpinQuantumNumber {
    /// From 2j; rejects 2j < 1.
    pub fn from_twice_j(twice_j: u32) -> Result<Self> {
        if twice_j < 1 {
            return Err(Error::InvalidSpin { twice_j });
        }
        Ok(Self { twice_j })
    }

    /// From the qubit count N = 2j.
    pub fn from_qubits(n: u32) -> Result<Self> {
        Self::from_twice_j(n)
    }

    /// From an integer j.
    pub fn from_integer_j(j: u32) -> Result<Self> {
        Self::from_twice_j(2 * j)
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    /// Number of qubits N = 2j.
    pub fn n_qubits(&self) -> u32 {
        self.twice_j
    }

    /// Hilbert-space dimension 2j + 1.
    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    pub fn j<T: Real>(&self) -> T {
        r::<T>(self.twice_j as f64 / 2.0)
    }

    /// m value at basis index i (m = j - i, descending).
    pub fn m_at<T: Real>(&self, index: usize) -> T {
        r::<T>((self.twice_j as f64 - 2.0 * index as f64) / 2.0)
    }

    /// Up-spin count kappa = j + m at basis index i.
    pub fn kappa_at(&self, index: usize) -> u32 {
        self.twice_j - index as u32
    }

    /// True when j is an integer (even qubit count).
    pub fn is_integer(&self) -> bool {
        self.twice_j % 2 == 0
    }
}

impl std::fmt::Display for SpinQuantumNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

/// Ladder bond b_i = sqrt((i+1)(2j-i)) linking basis indices i and i+1,
/// i.e. J+ |j, m_{i+1}> = b_i |j, m_i>.
fn ladder_bonds<T: Real>(j: SpinQuantumNumber) -> Vec<T> {
    let tj = j.twice_j() as f64;
    (0..j.dim() - 1)
        .map(|i| r::<T>(((i as f64 + 1.0) * (tj - i as f64)).sqrt()))
        .collect()
}

/// Diagonal phases D = diag((-i)^i) that make D J_y D† real.
fn reality_phases<T: Real>(d: usize) -> CVec<T> {
    CVec::from_iterator(
        d,
        (0..d).map(|i| match i % 4 {
            0 => c(1.0, 0.0),
            1 => c(0.0, -1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, 1.0),
        }),
    )
}

/// Eigendecomposition of the real symmetric tridiagonal form of J_y,
/// shared by every in-plane rotation and coherent-state construction at a
/// given j. Eigenvalues approximate m = -j..j to machine precision.
pub struct AngularBasis<T: Real> {
    j: SpinQuantumNumber,
    eigvals: DVector<T>,
    eigvecs: DMatrix<T>,
    eigvecs_c: CMat<T>,
    phases: CVec<T>,
}

impl<T: Real> AngularBasis<T> {
    pub fn new(j: SpinQuantumNumber) -> Self {
        let d = j.dim();
        let b = ladder_bonds::<T>(j);
        let mut tri = DMatrix::<T>::zeros(d, d);
        let half = r::<T>(0.5);
        for i in 0..d - 1 {
            tri[(i, i + 1)] = b[i] * half;
            tri[(i + 1, i)] = b[i] * half;
        }
        let (eigvals, eigvecs) = linalg::real_symmetric_eigen(&tri);
        let eigvecs_c = eigvecs.map(|x| Complex::new(x, T::zero()));
        Self {
            j,
            eigvals,
            eigvecs,
            eigvecs_c,
            phases: reality_phases(d),
        }
    }

    pub fn j(&self) -> SpinQuantumNumber {
        self.j
    }

    /// Eigenvalues of J_y (ascending, ~ -j..j).
    pub fn jy_eigenvalues(&self) -> &DVector<T> {
        &self.eigvals
    }

    /// Columns are the eigenvectors of J_y in the |j,m> basis.
    pub fn jy_eigenvectors(&self) -> CMat<T> {
        let d = self.j.dim();
        let mut v = self.eigvecs_c.clone();
        for i in 0..d {
            let ph = self.phases[i].conj();
            for k in 0..d {
                v[(i, k)] *= ph;
            }
        }
        v
    }

    /// Dense rotation exp(-i p J_y) = D† V e^{-ip Λ} Vᵀ D.
    pub fn rotation_y(&self, p: T) -> CMat<T> {
        let d = self.j.dim();
        let mut scaled = self.eigvecs_c.clone();
        for l in 0..d {
            let e = cis(-p * self.eigvals[l]);
            for i in 0..d {
                scaled[(i, l)] *= e;
            }
        }
        let mut rot = scaled * self.eigvecs_c.transpose();
        for a in 0..d {
            for b in 0..d {
                rot[(a, b)] = self.phases[a].conj() * rot[(a, b)] * self.phases[b];
            }
        }
        rot
    }

    /// Parity operator R_y = exp(-i pi J_y).
    pub fn parity_rotation(&self) -> CMat<T> {
        self.rotation_y(T::pi())
    }

    /// Apply exp(-i p J_y) to a vector without assembling the dense matrix.
    pub fn apply_rotation_y(&self, p: T, v: &CVec<T>) -> CVec<T> {
        let d = self.j.dim();
        let mut w = v.clone();
        for i in 0..d {
            w[i] *= self.phases[i];
        }
        let mut w = mul_real_t_vec(&self.eigvecs, &w);
        for l in 0..d {
            w[l] *= cis(-p * self.eigvals[l]);
        }
        let mut w = mul_real_vec(&self.eigvecs, &w);
        for i in 0..d {
            w[i] *= self.phases[i].conj();
        }
        w
    }

    /// Spin-coherent state exp(i theta (J_x sin phi - J_y cos phi)) |j,j>.
    pub fn coherent_state(&self, theta: T, phi: T) -> SymmetricState<T> {
        let d = self.j.dim();
        // The tilted generator is D_phi† T D_phi with D_phi = diag(u^i),
        // u = sin(phi) + i cos(phi); D_phi |j,j> = |j,j>.
        let u = Complex::new(phi.sin(), phi.cos());
        let mut v0 = CVec::from_iterator(d, self.eigvecs.row(0).iter().map(|&x| Complex::new(x, T::zero())));
        for l in 0..d {
            v0[l] *= cis(theta * self.eigvals[l]);
        }
        let mut amps = mul_real_vec(&self.eigvecs, &v0);
        let mut upow = Complex::new(T::one(), T::zero());
        for i in 0..d {
            amps[i] *= upow.conj();
            upow *= u;
            let n = upow.modulus();
            upow /= n;
        }
        let norm = amps.norm();
        amps /= Complex::new(norm, T::zero());
        SymmetricState {
            j: self.j,
            amplitudes: amps,
        }
    }
}

/// Real matrix times complex vector.
fn mul_real_vec<T: Real>(m: &DMatrix<T>, v: &CVec<T>) -> CVec<T> {
    let re = m * v.map(|z| z.re);
    let im = m * v.map(|z| z.im);
    CVec::from_iterator(re.len(), re.iter().zip(im.iter()).map(|(&a, &b)| Complex::new(a, b)))
}

/// Transposed real matrix times complex vector.
fn mul_real_t_vec<T: Real>(m: &DMatrix<T>, v: &CVec<T>) -> CVec<T> {
    let re = m.tr_mul(&v.map(|z| z.re));
    let im = m.tr_mul(&v.map(|z| z.im));
    CVec::from_iterator(re.len(), re.iter().zip(im.iter()).map(|(&a, &b)| Complex::new(a, b)))
}

/// Angular-momentum matrices and the unitary factors of the kick cycle.
pub struct OperatorSet<T: Real> {
    j: SpinQuantumNumber,
    p: T,
    k: T,
    pub jz: CMat<T>,
    pub jplus: CMat<T>,
    pub jminus: CMat<T>,
    pub jx: CMat<T>,
    pub jy: CMat<T>,
    /// exp(-i p J_y), dense.
    pub rotation: CMat<T>,
    /// exp(-i (k/2j) J_z^2), dense diagonal.
    pub torsion: CMat<T>,
}

impl<T: Real> OperatorSet<T> {
    pub fn j(&self) -> SpinQuantumNumber {
        self.j
    }
    pub fn p(&self) -> T {
        self.p
    }
    pub fn k(&self) -> T {
        self.k
    }

    /// Diagonal of the torsion factor, exp(-i (k/2j) m^2).
    pub fn torsion_diagonal(&self) -> CVec<T> {
        self.torsion.diagonal()
    }
}

/// Torsion phases exp(-i (k/2j) m^2) in basis order.
pub(crate) fn torsion_diag<T: Real>(j: SpinQuantumNumber, k: T) -> CVec<T> {
    let d = j.dim();
    let jj: T = j.j();
    CVec::from_iterator(
        d,
        (0..d).map(|i| {
            let m: T = j.m_at(i);
            cis(-(k / (r::<T>(2.0) * jj)) * m * m)
        }),
    )
}

/// Build the full operator set for (j, p, k).
///
/// The rotation factor comes from the exact eigendecomposition of J_y; the
/// torsion factor is diagonal with entries exp(-i (k/2j) m^2).
pub fn build_operators<T: Real>(j: SpinQuantumNumber, p: T, k: T) -> Result<OperatorSet<T>> {
    let basis = AngularBasis::new(j);
    build_operators_with(&basis, p, k)
}

/// Same as [`build_operators`] but reusing a precomputed [`AngularBasis`].
pub fn build_operators_with<T: Real>(
    basis: &AngularBasis<T>,
    p: T,
    k: T,
) -> Result<OperatorSet<T>> {
    if !p.is_finite() {
        return Err(Error::NonFinite { name: "p" });
    }
    if !k.is_finite() {
        return Err(Error::NonFinite { name: "k" });
    }
    let j = basis.j();
    let d = j.dim();
    let b = ladder_bonds::<T>(j);

    let mut jz = CMat::<T>::zeros(d, d);
    for i in 0..d {
        jz[(i, i)] = Complex::new(j.m_at(i), T::zero());
    }
    let mut jplus = CMat::<T>::zeros(d, d);
    for i in 0..d - 1 {
        jplus[(i, i + 1)] = Complex::new(b[i], T::zero());
    }
    let jminus = jplus.adjoint();
    let half = c::<T>(0.5, 0.0);
    let jx = (&jplus + &jminus) * half;
    let jy = (&jplus - &jminus) * c::<T>(0.0, -0.5);

    let rotation = basis.rotation_y(p);
    let torsion = CMat::from_diagonal(&torsion_diag(j, k));

    Ok(OperatorSet {
        j,
        p,
        k,
        jz,
        jplus,
        jminus,
        jx,
        jy,
        rotation,
        torsion,
    })
}

/// Pure state of the top: complex amplitudes over |j,m>, m descending.
#[derive(Clone, Debug)]
pub struct SymmetricState<T: Real> {
    j: SpinQuantumNumber,
    amplitudes: CVec<T>,
}

impl<T: Real> SymmetricState<T> {
    /// Validates dimension and unit norm (within 1e-12).
    pub fn new(j: SpinQuantumNumber, amplitudes: CVec<T>) -> Result<Self> {
        if amplitudes.len() != j.dim() {
            return Err(Error::DimensionMismatch {
                expected: j.dim(),
                actual: amplitudes.len(),
            });
        }
        let dev = (amplitudes.norm_squared() - T::one()).abs();
        if dev > T::tol(1e-12) {
            return Err(Error::NotNormalized {
                deviation: dev.to_f64().unwrap(),
            });
        }
        Ok(Self { j, amplitudes })
    }

    /// Normalizes the given amplitudes.
    pub fn from_unnormalized(j: SpinQuantumNumber, amplitudes: CVec<T>) -> Result<Self> {
        if amplitudes.len() != j.dim() {
            return Err(Error::DimensionMismatch {
                expected: j.dim(),
                actual: amplitudes.len(),
            });
        }
        let n = amplitudes.norm();
        if n <= T::zero() || !n.is_finite() {
            return Err(Error::NotNormalized { deviation: f64::INFINITY });
        }
        Ok(Self {
            j,
            amplitudes: amplitudes / Complex::new(n, T::zero()),
        })
    }

    /// Dicke basis state |j, m> with m at the given basis index (0 is |j,j>).
    pub fn dicke(j: SpinQuantumNumber, index: usize) -> Result<Self> {
        if index >= j.dim() {
            return Err(Error::DimensionMismatch {
                expected: j.dim(),
                actual: index + 1,
            });
        }
        let mut a = CVec::zeros(j.dim());
        a[index] = Complex::new(T::one(), T::zero());
        Ok(Self { j, amplitudes: a })
    }

    pub fn j(&self) -> SpinQuantumNumber {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn amplitudes(&self) -> &CVec<T> {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut CVec<T> {
        &mut self.amplitudes
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.amplitudes.norm();
        self.amplitudes /= Complex::new(n, T::zero());
    }

    /// O(d) first moments (<S_z>, <S_+>) straight from the amplitudes.
    pub(crate) fn first_moments(&self) -> (T, C<T>) {
        let d = self.dim();
        let b = ladder_bonds::<T>(self.j);
        let mut sz = T::zero();
        let mut sp = Complex::new(T::zero(), T::zero());
        for i in 0..d {
            let m: T = self.j.m_at(i);
            sz += m * self.amplitudes[i].modulus_squared();
            if i + 1 < d {
                // <S_+> = sum_i conj(a_i) b_i a_{i+1}
                sp += self.amplitudes[i].conj()
                    * self.amplitudes[i + 1]
                    * Complex::new(b[i], T::zero());
            }
        }
        (sz, sp)
    }
}

/// Spin-coherent state pointing along (theta0, phi0).
///
/// Constructed as exp(i theta0 (J_x sin phi0 - J_y cos phi0)) |j,j> through
/// the exact eigendecomposition of the tilted generator; the global phase is
/// left as produced (all downstream measures are phase-invariant).
pub fn coherent_state<T: Real>(
    j: SpinQuantumNumber,
    theta0: T,
    phi0: T,
) -> Result<SymmetricState<T>> {
    validate_direction(theta0, phi0)?;
    Ok(AngularBasis::new(j).coherent_state(theta0, phi0))
}

pub(crate) fn validate_direction<T: Real>(theta0: T, phi0: T) -> Result<()> {
    if !theta0.is_finite() {
        return Err(Error::NonFinite { name: "theta0" });
    }
    if !phi0.is_finite() {
        return Err(Error::NonFinite { name: "phi0" });
    }
    let slack = T::tol(1e-12);
    if theta0 < -slack || theta0 > T::pi() + slack {
        return Err(Error::OutOfRange {
            name: "theta0",
            value: theta0.to_f64().unwrap(),
            range: "[0, pi]",
        });
    }
    if phi0 <= -T::pi() - slack || phi0 > T::pi() + slack {
        return Err(Error::OutOfRange {
            name: "phi0",
            value: phi0.to_f64().unwrap(),
            range: "(-pi, pi]",
        });
    }
    Ok(())
}

/// Expectation values of collective spin operators for a symmetric state.
#[derive(Clone, Copy, Debug)]
pub struct CollectiveExpectations<T: Real> {
    pub sz: C<T>,
    pub sz_sq: C<T>,
    pub s_plus: C<T>,
    pub s_minus: C<T>,
    pub s_plus_sq: C<T>,
    pub s_minus_sq: C<T>,
    pub s_plus_sz: C<T>,
    pub s_minus_sz: C<T>,
    pub sz_s_plus: C<T>,
    pub sz_s_minus: C<T>,
}

/// All expectation values by matrix-vector contraction against the operator
/// set; `<A B>` is evaluated as `(A† phi)† (B phi)`.
pub fn collective_expectations<T: Real>(
    state: &SymmetricState<T>,
    ops: &OperatorSet<T>,
) -> Result<CollectiveExpectations<T>> {
    if state.dim() != ops.j.dim() {
        return Err(Error::DimensionMismatch {
            expected: ops.j.dim(),
            actual: state.dim(),
        });
    }
    let phi = state.amplitudes();
    let zphi = &ops.jz * phi;
    let pphi = &ops.jplus * phi;
    let mphi = &ops.jminus * phi;
    Ok(CollectiveExpectations {
        sz: phi.dotc(&zphi),
        sz_sq: zphi.dotc(&zphi),
        s_plus: phi.dotc(&pphi),
        s_minus: phi.dotc(&mphi),
        // <S+ S+> = (S- phi)† (S+ phi), etc.
        s_plus_sq: mphi.dotc(&pphi),
        s_minus_sq: pphi.dotc(&mphi),
        s_plus_sz: mphi.dotc(&zphi),
        s_minus_sz: pphi.dotc(&zphi),
        sz_s_plus: zphi.dotc(&pphi),
        sz_s_minus: zphi.dotc(&mphi),
    })
}
