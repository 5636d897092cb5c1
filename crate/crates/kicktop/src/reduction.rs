//! One- and two-qubit reduced density matrices of an N = 2j qubit
//! permutation-symmetric pure state, computed directly from its Dicke
//! amplitudes.
//!
//! The two-qubit reduction uses the exact bipartition of a Dicke state into
//! 2 (x) (N-2) qubits,
//!
//!   |D_N^k> = sum_q sqrt( C(2,q) C(N-2,k-q) / C(N,k) ) |D_2^q> (x) |D_{N-2}^{k-q}>,
//!
//! with k = j + m up-spins; the weights reduce to ratios of at most three
//! integers, so no large binomials are ever formed. An independent
//! brute-force oracle expands the state over all 2^N bitstrings and traces
//! literally.

use crate::error::{Error, Result};
use crate::scalar::{c, C, CVec, Real};
use crate::spin::SymmetricState;
use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex;

/// 2x2 reduced density matrix of a single qubit.
#[derive(Clone, Debug)]
pub struct OneQubitDensityMatrix<T: Real>(Matrix2<C<T>>);

impl<T: Real> OneQubitDensityMatrix<T> {
    /// Validates Hermiticity, unit trace, and positivity (within 1e-12 /
    /// -1e-12 eigenvalue floor).
    pub fn new(m: Matrix2<C<T>>) -> Result<Self> {
        validate_density(m.as_slice(), 2, T::tol(1e-12), T::tol(1e-12))?;
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix2<C<T>> {
        &self.0
    }

    /// Tr rho^2.
    pub fn purity(&self) -> T {
        let p = self.0 * self.0;
        (p[(0, 0)] + p[(1, 1)]).re
    }
}

/// 4x4 reduced density matrix of a qubit pair in the product basis
/// |uu>, |ud>, |du>, |dd>.
#[derive(Clone, Debug)]
pub struct TwoQubitDensityMatrix<T: Real>(Matrix4<C<T>>);

impl<T: Real> TwoQubitDensityMatrix<T> {
    /// Validates Hermiticity, unit trace, and positivity (eigenvalues above
    /// -1e-10). Swap symmetry is a property of symmetric-state reductions
    /// and is not enforced here; see [`TwoQubitDensityMatrix::swap_residual`].
    pub fn new(m: Matrix4<C<T>>) -> Result<Self> {
        validate_density(m.as_slice(), 4, T::tol(1e-8), T::tol(1e-10))?;
        Ok(Self(m))
    }

    /// Density matrix |v><v| of a pure two-qubit state.
    pub fn from_pure(v: &nalgebra::Vector4<C<T>>) -> Result<Self> {
        let n = v.norm();
        let w = v / Complex::new(n, T::zero());
        let mut m = Matrix4::zeros();
        for a in 0..4 {
            for b in 0..4 {
                m[(a, b)] = w[a] * w[b].conj();
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix4<C<T>> {
        &self.0
    }

    /// Marginal of qubit A (trace over B).
    pub fn qubit_a(&self) -> Matrix2<C<T>> {
        let m = &self.0;
        Matrix2::new(
            m[(0, 0)] + m[(1, 1)],
            m[(0, 2)] + m[(1, 3)],
            m[(2, 0)] + m[(3, 1)],
            m[(2, 2)] + m[(3, 3)],
        )
    }

    /// Marginal of qubit B (trace over A).
    pub fn qubit_b(&self) -> Matrix2<C<T>> {
        let m = &self.0;
        Matrix2::new(
            m[(0, 0)] + m[(2, 2)],
            m[(0, 1)] + m[(2, 3)],
            m[(1, 0)] + m[(3, 2)],
            m[(1, 1)] + m[(3, 3)],
        )
    }

    /// Max-norm of SWAP rho SWAP - rho (zero for symmetric-state reductions).
    pub fn swap_residual(&self) -> T {
        let swap = [0usize, 2, 1, 3];
        let mut worst = T::zero();
        for a in 0..4 {
            for b in 0..4 {
                let d = self.0[(swap[a], swap[b])] - self.0[(a, b)];
                worst = worst.max(d.norm_sqr().sqrt());
            }
        }
        worst
    }

    /// Population of the two-qubit singlet (|ud> - |du>)/sqrt(2).
    pub fn singlet_population(&self) -> T {
        let m = &self.0;
        let half = c::<T>(0.5, 0.0);
        ((m[(1, 1)] + m[(2, 2)] - m[(1, 2)] - m[(2, 1)]) * half).re
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> T {
        SymmetricEigen::new(self.0)
            .eigenvalues
            .iter()
            .fold(T::max_value().unwrap(), |acc, &x| acc.min(x))
    }
}

fn validate_density<T: Real>(
    entries: &[C<T>],
    dim: usize,
    herm_tol: T,
    eig_floor: T,
) -> Result<()> {
    let at = |i: usize, j: usize| entries[j * dim + i]; // column-major
    let mut trace = Complex::new(T::zero(), T::zero());
    for i in 0..dim {
        trace += at(i, i);
        for j in 0..dim {
            let d = at(i, j) - at(j, i).conj();
            if d.norm_sqr().sqrt() > herm_tol {
                return Err(Error::InvalidDensityMatrix {
                    reason: format!(
                        "not Hermitian at ({i},{j}), deviation {:.3e}",
                        d.norm_sqr().sqrt().to_f64().unwrap()
                    ),
                });
            }
        }
    }
    let tdev = ((trace.re - T::one()) * (trace.re - T::one()) + trace.im * trace.im).sqrt();
    if tdev > T::tol(1e-8) {
        return Err(Error::InvalidDensityMatrix {
            reason: format!("trace deviates from 1 by {:.3e}", tdev.to_f64().unwrap()),
        });
    }
    // Positivity via the smallest eigenvalue.
    let m = crate::scalar::CMat::<T>::from_fn(dim, dim, |i, j| at(i, j));
    let vals = crate::linalg::hermitian_eigenvalues(&m);
    if vals[0] < -eig_floor {
        return Err(Error::InvalidDensityMatrix {
            reason: format!(
                "negative eigenvalue {:.3e}",
                vals[0].to_f64().unwrap()
            ),
        });
    }
    Ok(())
}

/// Weights of the 2 (x) (N-2) Dicke bipartition,
/// w(q) = C(2,q) C(N-2, excitations-q) / C(N, excitations) for q = 0, 1, 2.
///
/// The binomial ratios reduce to
///   w0 = (N-k)(N-k-1)/(N(N-1)), w1 = 2 k(N-k)/(N(N-1)), w2 = k(k-1)/(N(N-1)),
/// which are evaluated exactly; infeasible q get weight 0.
pub fn dicke_split_coefficients<T: Real>(
    n: u32,
    excitations: u32,
) -> Result<[(usize, T); 3]> {
    if n < 2 {
        return Err(Error::InfeasibleSplit {
            n,
            excitations: excitations as i64,
        });
    }
    if excitations > n {
        return Err(Error::InfeasibleSplit {
            n,
            excitations: excitations as i64,
        });
    }
    let [w0, w1, w2] = split_weights::<T>(n, excitations);
    Ok([(0, w0), (1, w1), (2, w2)])
}

fn split_weights<T: Real>(n: u32, kappa: u32) -> [T; 3] {
    let nf = n as f64;
    let kf = kappa as f64;
    let den = nf * (nf - 1.0);
    [
        crate::scalar::r::<T>((nf - kf) * (nf - kf - 1.0) / den),
        crate::scalar::r::<T>(2.0 * kf * (nf - kf) / den),
        crate::scalar::r::<T>(kf * (kf - 1.0) / den),
    ]
}

/// Exact two-qubit reduced density matrix of a symmetric state.
///
/// The 3x3 symmetric-sector matrix M[q][q'] = sum_k a_k conj(a_{k-q+q'})
/// sqrt(w_q(k) w_{q'}(k-q+q')) is accumulated in O(d) and embedded into the
/// 4x4 product basis; the singlet row and column are identically zero.
pub fn two_qubit_rdm<T: Real>(state: &SymmetricState<T>) -> Result<TwoQubitDensityMatrix<T>> {
    let j = state.j();
    let n = j.n_qubits();
    if n < 2 {
        return Err(Error::InfeasibleSplit {
            n,
            excitations: 0,
        });
    }
    let d = j.dim();
    let a = state.amplitudes();
    let zero = Complex::new(T::zero(), T::zero());
    let mut m = [[zero; 3]; 3];
    for (i, amp) in a.iter().enumerate() {
        let kappa = j.kappa_at(i);
        let w = split_weights::<T>(n, kappa);
        for q in 0..3usize {
            if w[q] <= T::zero() {
                continue;
            }
            for qp in 0..3usize {
                // kappa' = kappa - q + qp maps to index i' = i + q - qp
                let ip = i as i64 + q as i64 - qp as i64;
                if ip < 0 || ip >= d as i64 {
                    continue;
                }
                let kp = kappa as i64 - q as i64 + qp as i64;
                if kp < 0 || kp > n as i64 {
                    continue;
                }
                let wp = split_weights::<T>(n, kp as u32)[qp];
                if wp <= T::zero() {
                    continue;
                }
                m[q][qp] += *amp * a[ip as usize].conj()
                    * Complex::new((w[q] * wp).sqrt(), T::zero());
            }
        }
    }

    let inv_sqrt2 = c::<T>(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let half = c::<T>(0.5, 0.0);
    let mut rho = Matrix4::zeros();
    rho[(0, 0)] = m[2][2];
    rho[(0, 1)] = m[2][1] * inv_sqrt2;
    rho[(0, 2)] = m[2][1] * inv_sqrt2;
    rho[(0, 3)] = m[2][0];
    rho[(1, 1)] = m[1][1] * half;
    rho[(1, 2)] = m[1][1] * half;
    rho[(1, 3)] = m[1][0] * inv_sqrt2;
    rho[(2, 2)] = m[1][1] * half;
    rho[(2, 3)] = m[1][0] * inv_sqrt2;
    rho[(3, 3)] = m[0][0];
    for i in 0..4 {
        for jx in 0..i {
            rho[(i, jx)] = rho[(jx, i)].conj();
        }
    }
    TwoQubitDensityMatrix::new(rho)
}

/// One-qubit reduced density matrix, rho_1 = (I + <sigma> . sigma)/2 with
/// <sigma_z> = <S_z>/j and <sigma_x> + i <sigma_y> = <S_+>/j.
pub fn one_qubit_rdm<T: Real>(state: &SymmetricState<T>) -> OneQubitDensityMatrix<T> {
    let jj: T = state.j().j();
    let (sz, sp) = state.first_moments();
    let z = sz / jj;
    let pm = sp / Complex::new(jj, T::zero());
    let half = c::<T>(0.5, 0.0);
    let m = Matrix2::new(
        Complex::new(T::one() + z, T::zero()) * half,
        pm.conj() * half,
        pm * half,
        Complex::new(T::one() - z, T::zero()) * half,
    );
    OneQubitDensityMatrix(m)
}

/// Maximum qubit count accepted by the brute-force oracle.
pub const BRUTE_FORCE_MAX_QUBITS: u32 = 14;

/// Independent verification path: expand the symmetric state over all 2^N
/// product bitstrings (amplitude a_k / sqrt(C(N,k)) per k-excitation string)
/// and trace literally.
pub fn brute_force_rdm_oracle<T: Real>(
    state: &SymmetricState<T>,
) -> Result<(OneQubitDensityMatrix<T>, TwoQubitDensityMatrix<T>)> {
    let j = state.j();
    let n = j.n_qubits();
    if n > BRUTE_FORCE_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: BRUTE_FORCE_MAX_QUBITS,
        });
    }
    if n < 2 {
        return Err(Error::InfeasibleSplit { n, excitations: 0 });
    }
    let dim = 1usize << n;
    let binom = binomial_row(n);
    let a = state.amplitudes();
    let mut full: CVec<T> = CVec::zeros(dim);
    for s in 0..dim {
        let kappa = (s as u32).count_ones();
        let idx = (n - kappa) as usize;
        let inv_sqrt = T::one() / crate::scalar::r::<T>(binom[kappa as usize] as f64).sqrt();
        full[s] = a[idx] * Complex::new(inv_sqrt, T::zero());
    }

    // Bit b of s is qubit b; bit value 1 means up; product-basis index of a
    // qubit is 1 - bit.
    let mut rho2 = Matrix4::<C<T>>::zeros();
    let mut rho1 = Matrix2::<C<T>>::zeros();
    let env = dim >> 2;
    for sa in 0..2usize {
        for sb in 0..2usize {
            for ta in 0..2usize {
                for tb in 0..2usize {
                    let row = 2 * (1 - sa) + (1 - sb);
                    let col = 2 * (1 - ta) + (1 - tb);
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for rest in 0..env {
                        let s = sa | (sb << 1) | (rest << 2);
                        let t = ta | (tb << 1) | (rest << 2);
                        acc += full[s] * full[t].conj();
                    }
                    rho2[(row, col)] += acc;
                }
            }
        }
    }
    let env1 = dim >> 1;
    for sa in 0..2usize {
        for ta in 0..2usize {
            let mut acc = Complex::new(T::zero(), T::zero());
            for rest in 0..env1 {
                let s = sa | (rest << 1);
                let t = ta | (rest << 1);
                acc += full[s] * full[t].conj();
            }
            rho1[(1 - sa, 1 - ta)] += acc;
        }
    }
    Ok((
        OneQubitDensityMatrix::new(rho1)?,
        TwoQubitDensityMatrix::new(rho2)?,
    ))
}

fn binomial_row(n: u32) -> Vec<u64> {
    let mut row = vec![1u64];
    for k in 0..n {
        let next = row[k as usize] * (n - k) as u64 / (k + 1) as u64;
        row.push(next);
    }
    row
}
