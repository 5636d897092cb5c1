//! Quantum correlation measures on two-qubit reduced density matrices:
//! quantum discord, geometric discord, and the Meyer-Wallach Q measure.
//!
//! Entropic quantities (von Neumann entropy, mutual information, conditional
//! entropy, discord) are reported in nats; [`von_neumann_entropy`] also
//! offers bits through [`EntropyUnit`]. Discord minimizes the measured
//! conditional entropy over rank-1 orthogonal measurements on qubit A,
//! parameterized by a Bloch axis: a 32x64 grid over the axis sphere followed
//! by Nelder-Mead refinement from the best three grid points.

use crate::error::{Error, Result};
use crate::linalg;
use crate::reduction::{OneQubitDensityMatrix, TwoQubitDensityMatrix};
use crate::scalar::{c, r, C, CMat, Real};
use crate::spin::SymmetricState;
use nalgebra::{Matrix2, Matrix3, Matrix4, SymmetricEigen, Vector2, Vector3};
use num_complex::Complex;

/// Entropy unit: log base 2 or natural log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyUnit {
    Bits,
    Nats,
}

const EIG_CLIP_FLOOR: f64 = 1e-10;
const EIG_ZERO: f64 = 1e-14;

/// Entropy of a clipped, renormalized eigenvalue set, in nats.
fn entropy_from_eigs_nats<T: Real>(vals: impl Iterator<Item = T>) -> Result<T> {
    let floor = -T::tol(EIG_CLIP_FLOOR);
    let zero_cut = T::tol(EIG_ZERO);
    let mut kept: Vec<T> = Vec::new();
    let mut total = T::zero();
    for v in vals {
        if v < floor {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("negative eigenvalue {:.3e}", v.to_f64().unwrap()),
            });
        }
        if v > zero_cut {
            kept.push(v);
            total += v;
        }
    }
    let mut s = T::zero();
    for v in kept {
        let w = v / total;
        s -= w * w.ln();
    }
    Ok(s)
}

/// Von Neumann entropy of a density matrix in the requested unit.
///
/// Eigenvalues in [-1e-10, 0) are clipped to zero and the spectrum is
/// renormalized; eigenvalues below -1e-10, non-Hermitian input, or a trace
/// off 1 by more than 1e-8 are errors.
pub fn von_neumann_entropy<T: Real>(rho: &CMat<T>, unit: EntropyUnit) -> Result<T> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            actual: rho.ncols(),
        });
    }
    let herm = linalg::hermiticity_residual(rho);
    if herm > T::tol(1e-8) {
        return Err(Error::InvalidDensityMatrix {
            reason: format!("not Hermitian ({:.3e})", herm.to_f64().unwrap()),
        });
    }
    let tr: C<T> = rho.diagonal().iter().fold(c::<T>(0.0, 0.0), |a, &z| a + z);
    let tdev = (tr - c::<T>(1.0, 0.0)).norm_sqr().sqrt();
    if tdev > T::tol(1e-8) {
        return Err(Error::InvalidDensityMatrix {
            reason: format!("trace deviates from 1 by {:.3e}", tdev.to_f64().unwrap()),
        });
    }
    let vals = linalg::hermitian_eigenvalues(rho);
    let nats = entropy_from_eigs_nats(vals.iter().copied())?;
    Ok(match unit {
        EntropyUnit::Nats => nats,
        EntropyUnit::Bits => nats / r::<T>(std::f64::consts::LN_2),
    })
}

/// Entropy (nats) of a 2x2 density matrix via closed-form eigenvalues.
fn entropy2_nats<T: Real>(m: &Matrix2<C<T>>) -> Result<T> {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = (a + d) / r::<T>(2.0);
    let rad = (((a - d) / r::<T>(2.0)).powi(2) + b.norm_sqr()).sqrt();
    entropy_from_eigs_nats([mean + rad, mean - rad].into_iter())
}

/// Entropy (nats) of a 4x4 density matrix.
fn entropy4_nats<T: Real>(m: &Matrix4<C<T>>) -> Result<T> {
    let eig = SymmetricEigen::new(*m);
    entropy_from_eigs_nats(eig.eigenvalues.iter().copied())
}

/// Binary entropy (nats) of the eigenvalues (1 +- bloch_radius)/2.
fn qubit_entropy_from_radius<T: Real>(radius: T) -> T {
    let one = T::one();
    let rr = radius.min(one);
    let half = r::<T>(0.5);
    let p = (one + rr) * half;
    let q = (one - rr) * half;
    let cut = T::tol(EIG_ZERO);
    let mut s = T::zero();
    if p > cut {
        s -= p * p.ln();
    }
    if q > cut {
        s -= q * q.ln();
    }
    s
}

/// Quantum mutual information I(B:A) = H(A) + H(B) - H(A,B), in nats.
pub fn mutual_information<T: Real>(rho: &TwoQubitDensityMatrix<T>) -> Result<T> {
    let ha = entropy2_nats(&rho.qubit_a())?;
    let hb = entropy2_nats(&rho.qubit_b())?;
    let hab = entropy4_nats(rho.matrix())?;
    Ok(ha + hb - hab)
}

/// Bloch axis of a rank-1 orthogonal measurement on qubit A.
#[derive(Clone, Copy, Debug)]
pub struct MeasurementSetting<T: Real> {
    axis: Vector3<T>,
}

impl<T: Real> MeasurementSetting<T> {
    pub fn from_angles(theta: T, phi: T) -> Self {
        Self {
            axis: Vector3::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ),
        }
    }

    /// Normalizes the given axis; rejects near-zero vectors.
    pub fn from_vector(v: Vector3<T>) -> Result<Self> {
        let n = v.norm();
        if n < T::tol(1e-12) {
            return Err(Error::OutOfRange {
                name: "measurement axis",
                value: n.to_f64().unwrap(),
                range: "unit sphere",
            });
        }
        Ok(Self { axis: v / n })
    }

    pub fn axis(&self) -> &Vector3<T> {
        &self.axis
    }
}

/// Pauli matrices (x, y, z).
fn pauli<T: Real>() -> [Matrix2<C<T>>; 3] {
    let z = c::<T>(0.0, 0.0);
    let one = c::<T>(1.0, 0.0);
    let i = c::<T>(0.0, 1.0);
    [
        Matrix2::new(z, one, one, z),
        Matrix2::new(z, -i, i, z),
        Matrix2::new(one, z, z, -one),
    ]
}

/// Kronecker product of 2x2 matrices, qubit A first.
fn kron2<T: Real>(a: &Matrix2<C<T>>, b: &Matrix2<C<T>>) -> Matrix4<C<T>> {
    let mut out = Matrix4::zeros();
    for ia in 0..2 {
        for ja in 0..2 {
            for ib in 0..2 {
                for jb in 0..2 {
                    out[(2 * ia + ib, 2 * ja + jb)] = a[(ia, ja)] * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Measured conditional entropy sum_i p_i H(rho_B|i) in nats, computed by
/// the literal projector route: Pi_+- = (I +- n.sigma)/2 on A.
pub fn conditional_entropy_after_measurement<T: Real>(
    rho: &TwoQubitDensityMatrix<T>,
    setting: &MeasurementSetting<T>,
) -> Result<T> {
    let sig = pauli::<T>();
    let n = setting.axis();
    let mut ndotsigma = Matrix2::zeros();
    for (i, s) in sig.iter().enumerate() {
        ndotsigma += s * Complex::new(n[i], T::zero());
    }
    let half = c::<T>(0.5, 0.0);
    let eye = Matrix2::identity();
    let mut total = T::zero();
    for sign in [T::one(), -T::one()] {
        let proj = (eye + ndotsigma * Complex::new(sign, T::zero())) * half;
        let proj4 = kron2(&proj, &eye);
        let m = proj4 * rho.matrix() * proj4;
        let p = (m[(0, 0)] + m[(1, 1)] + m[(2, 2)] + m[(3, 3)]).re;
        if p < T::tol(1e-14) {
            continue;
        }
        // rho_B|i = Tr_A[m] / p
        let mut rb = Matrix2::new(
            m[(0, 0)] + m[(2, 2)],
            m[(0, 1)] + m[(2, 3)],
            m[(1, 0)] + m[(3, 2)],
            m[(1, 1)] + m[(3, 3)],
        );
        rb /= Complex::new(p, T::zero());
        total += p * entropy2_nats(&rb)?;
    }
    Ok(total)
}

/// Bloch representation of a two-qubit state: local vectors x, y and the
/// 3x3 correlation matrix T_ij = Tr[rho (sigma_i (x) sigma_j)].
#[derive(Clone, Debug)]
pub struct BlochForm<T: Real> {
    pub x: Vector3<T>,
    pub y: Vector3<T>,
    pub t: Matrix3<T>,
}

impl<T: Real> BlochForm<T> {
    /// Reassemble the density matrix from the decomposition.
    pub fn assemble(&self) -> Matrix4<C<T>> {
        let sig = pauli::<T>();
        let eye = Matrix2::identity();
        let quarter = c::<T>(0.25, 0.0);
        let mut m = kron2(&eye, &eye);
        for i in 0..3 {
            m += kron2(&(sig[i] * Complex::new(self.x[i], T::zero())), &eye);
            m += kron2(&eye, &(sig[i] * Complex::new(self.y[i], T::zero())));
            for jx in 0..3 {
                m += kron2(
                    &(sig[i] * Complex::new(self.t[(i, jx)], T::zero())),
                    &sig[jx],
                );
            }
        }
        m * quarter
    }
}

/// Bloch decomposition by Pauli traces; imaginary parts (pure numerical
/// noise for valid states) are discarded.
pub fn bloch_decompose<T: Real>(rho: &TwoQubitDensityMatrix<T>) -> BlochForm<T> {
    let sig = pauli::<T>();
    let eye = Matrix2::identity();
    let m = rho.matrix();
    let tr = |op: &Matrix4<C<T>>| -> T {
        let mut acc = c::<T>(0.0, 0.0);
        for a in 0..4 {
            for b in 0..4 {
                acc += m[(a, b)] * op[(b, a)];
            }
        }
        acc.re
    };
    let mut x = Vector3::zeros();
    let mut y = Vector3::zeros();
    let mut t = Matrix3::zeros();
    for i in 0..3 {
        x[i] = tr(&kron2(&sig[i], &eye));
        y[i] = tr(&kron2(&eye, &sig[i]));
        for jx in 0..3 {
            t[(i, jx)] = tr(&kron2(&sig[i], &sig[jx]));
        }
    }
    BlochForm { x, y, t }
}

/// Geometric discord D^G = (||x||^2 + ||T||_F^2 - eta_max)/4 where eta_max
/// is the largest eigenvalue of x x^T + T T^T; clamped at zero.
pub fn geometric_discord<T: Real>(rho: &TwoQubitDensityMatrix<T>) -> T {
    geometric_discord_from_bloch(&bloch_decompose(rho))
}

fn geometric_discord_from_bloch<T: Real>(b: &BlochForm<T>) -> T {
    let m = b.x * b.x.transpose() + b.t * b.t.transpose();
    let eig = SymmetricEigen::new(m);
    let eta = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |acc, &v| acc.max(v));
    let val = (b.x.norm_squared() + b.t.norm_squared() - eta) / r::<T>(4.0);
    val.max(T::zero())
}

/// Conditional-entropy objective in Bloch form. For the axis n:
/// p+- = (1 +- n.x)/2 and the conditioned states have Bloch vectors
/// (y +- T^T n)/(1 +- n.x); their entropies need only the radii.
struct DiscordObjective<T: Real> {
    x: Vector3<T>,
    y: Vector3<T>,
    t_tr: Matrix3<T>,
}

impl<T: Real> DiscordObjective<T> {
    fn new(b: &BlochForm<T>) -> Self {
        Self {
            x: b.x,
            y: b.y,
            t_tr: b.t.transpose(),
        }
    }

    fn eval_axis(&self, n: &Vector3<T>) -> T {
        let half = r::<T>(0.5);
        let ndx = self.x.dot(n);
        let tn = self.t_tr * n;
        let cut = T::tol(1e-14);
        let mut total = T::zero();
        for sign in [T::one(), -T::one()] {
            let p = (T::one() + sign * ndx) * half;
            if p < cut {
                continue;
            }
            let v = self.y + tn * sign;
            let radius = v.norm() * half / p;
            total += p * qubit_entropy_from_radius(radius);
        }
        total
    }

    fn eval(&self, theta: T, phi: T) -> T {
        let n = Vector3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        );
        self.eval_axis(&n)
    }
}

const GRID_THETA: usize = 32;
const GRID_PHI: usize = 64;
const NM_FTOL: f64 = 1e-9;
const NM_MAX_ITER: usize = 400;

/// Deterministic Nelder-Mead on (theta, phi).
fn nelder_mead<T: Real, F: Fn(T, T) -> T>(f: &F, start: (T, T), delta: T) -> T {
    let mut simplex: Vec<(Vector2<T>, T)> = Vec::with_capacity(3);
    let base = Vector2::new(start.0, start.1);
    simplex.push((base, f(base[0], base[1])));
    for dim in 0..2 {
        let mut v = base;
        v[dim] += delta;
        simplex.push((v, f(v[0], v[1])));
    }
    let ftol = T::tol(NM_FTOL);
    let half = r::<T>(0.5);
    for _ in 0..NM_MAX_ITER {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        if simplex[2].1 - simplex[0].1 < ftol {
            break;
        }
        let centroid = (simplex[0].0 + simplex[1].0) * half;
        let worst = simplex[2].0;
        let reflect = centroid + (centroid - worst);
        let fr = f(reflect[0], reflect[1]);
        if fr < simplex[0].1 {
            let expand = centroid + (centroid - worst) * r::<T>(2.0);
            let fe = f(expand[0], expand[1]);
            simplex[2] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (reflect, fr);
        } else {
            let contract = centroid + (worst - centroid) * half;
            let fc = f(contract[0], contract[1]);
            if fc < simplex[2].1 {
                simplex[2] = (contract, fc);
            } else {
                for i in 1..3 {
                    let v = simplex[0].0 + (simplex[i].0 - simplex[0].0) * half;
                    simplex[i] = (v, f(v[0], v[1]));
                }
            }
        }
    }
    simplex
        .iter()
        .map(|s| s.1)
        .fold(T::max_value().unwrap(), |a, b| a.min(b))
}

/// Minimal measured conditional entropy over rank-1 orthogonal measurements
/// on A (nats): 32x64 axis grid, then Nelder-Mead from the best 3 points.
fn minimized_conditional_entropy<T: Real>(b: &BlochForm<T>) -> T {
    let obj = DiscordObjective::new(b);
    let thetas: Vec<(T, T, T)> = (0..GRID_THETA)
        .map(|i| {
            let t = T::pi() * r::<T>((i as f64 + 0.5) / GRID_THETA as f64);
            (t, t.sin(), t.cos())
        })
        .collect();
    let phis: Vec<(T, T, T)> = (0..GRID_PHI)
        .map(|l| {
            let f = -T::pi() + T::two_pi() * r::<T>((l as f64 + 0.5) / GRID_PHI as f64);
            (f, f.sin(), f.cos())
        })
        .collect();
    // Track the best three grid points as refinement starts.
    let mut top: [(T, T, T); 3] = [(T::max_value().unwrap(), T::zero(), T::zero()); 3];
    for &(theta, st, ct) in &thetas {
        for &(phi, sf, cf) in &phis {
            let n = Vector3::new(st * cf, st * sf, ct);
            let v = obj.eval_axis(&n);
            if v < top[2].0 {
                top[2] = (v, theta, phi);
                if top[2].0 < top[1].0 {
                    top.swap(1, 2);
                }
                if top[1].0 < top[0].0 {
                    top.swap(0, 1);
                }
            }
        }
    }
    let mut minimum = top[0].0;
    let delta = r::<T>(0.08);
    for &(_, theta, phi) in &top {
        let refined = nelder_mead(&|t, f| obj.eval(t, f), (theta, phi), delta);
        minimum = minimum.min(refined);
    }
    minimum
}

/// Quantum discord D(B:A) = H(A) - H(A,B) + min over measurements on A of
/// the conditional entropy, in nats. Negative numerical noise (down to
/// -1e-9) is clamped to zero.
pub fn quantum_discord<T: Real>(rho: &TwoQubitDensityMatrix<T>) -> Result<T> {
    let b = bloch_decompose(rho);
    let ha = qubit_entropy_from_radius(b.x.norm());
    let hab = entropy4_nats(rho.matrix())?;
    let cond = minimized_conditional_entropy(&b);
    let d = ha - hab + cond;
    debug_assert!(
        d > -T::tol(1e-6),
        "discord {:.3e} below the noise floor",
        d.to_f64().unwrap()
    );
    Ok(d.max(T::zero()))
}

/// Meyer-Wallach measure Q = 2 (1 - Tr rho_1^2); by exchange symmetry every
/// single-qubit marginal of a symmetric state is identical.
pub fn q_measure<T: Real>(state: &SymmetricState<T>) -> T {
    let r1 = crate::reduction::one_qubit_rdm(state);
    r::<T>(2.0) * (T::one() - r1.purity())
}

/// Denominator convention of the collective-operator Q formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QNormalization {
    /// 4/(2j)^2: reproduces [`q_measure`] exactly.
    Qubit2j,
    /// 4/(2j+1)^2: the convention of the ensemble-average formula
    /// (see `rmt::analytic_q_average`); nonzero even for coherent states.
    Collective2jPlus1,
}

/// Collective-operator form Q = 1 - (4/den^2) (<S_z>^2 + <S_+><S_->).
pub fn q_measure_collective<T: Real>(
    state: &SymmetricState<T>,
    normalization: QNormalization,
) -> T {
    let tj = state.j().twice_j() as f64;
    let den = match normalization {
        QNormalization::Qubit2j => r::<T>(tj * tj),
        QNormalization::Collective2jPlus1 => r::<T>((tj + 1.0) * (tj + 1.0)),
    };
    let (sz, sp) = state.first_moments();
    T::one() - r::<T>(4.0) * (sz * sz + sp.norm_sqr()) / den
}

/// The three correlation measures of one state.
#[derive(Clone, Copy, Debug)]
pub struct CorrelationValues<T: Real> {
    /// Quantum discord (nats).
    pub discord: T,
    pub geometric_discord: T,
    pub q_measure: T,
}

impl<T: Real> CorrelationValues<T> {
    /// Checks finiteness, non-negativity, Q in [0,1], and the two-qubit
    /// bound D^G >= D^2/2 (with 1e-9 slack).
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.discord, "discord"),
            (self.geometric_discord, "geometric discord"),
            (self.q_measure, "q measure"),
        ] {
            if !v.is_finite() || v < -T::tol(1e-9) {
                return Err(Error::InvalidDensityMatrix {
                    reason: format!("{name} = {:?} out of range", v.to_f64()),
                });
            }
        }
        if self.q_measure > T::one() + T::tol(1e-9) {
            return Err(Error::InvalidDensityMatrix {
                reason: "q measure exceeds 1".to_string(),
            });
        }
        if self.geometric_discord
            < self.discord * self.discord / r::<T>(2.0) - T::tol(1e-9)
        {
            return Err(Error::InvalidDensityMatrix {
                reason: "geometric discord below D^2/2".to_string(),
            });
        }
        Ok(())
    }
}

/// All three measures of a symmetric state, using the given Q convention.
pub fn evaluate_state_with<T: Real>(
    state: &SymmetricState<T>,
    normalization: QNormalization,
) -> Result<CorrelationValues<T>> {
    let rho = crate::reduction::two_qubit_rdm(state)?;
    let values = CorrelationValues {
        discord: quantum_discord(&rho)?,
        geometric_discord: geometric_discord(&rho),
        q_measure: q_measure_collective(state, normalization),
    };
    values.validate()?;
    Ok(values)
}

/// All three measures with the Meyer-Wallach (qubit) Q convention.
pub fn evaluate_state<T: Real>(state: &SymmetricState<T>) -> Result<CorrelationValues<T>> {
    evaluate_state_with(state, QNormalization::Qubit2j)
}

/// One-qubit marginal as a general matrix, for entropy checks.
pub fn one_qubit_entropy_nats<T: Real>(rho: &OneQubitDensityMatrix<T>) -> Result<T> {
    entropy2_nats(rho.matrix())
}
