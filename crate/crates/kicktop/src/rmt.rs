//! Random-matrix baselines for the chaotic kicked top: the parity-adapted
//! block-COE ensemble, ensemble-averaged correlations, eigenvector Q
//! statistics and the exact ensemble-average formula for Q.
//!
//! The parity operator R_y = exp(-i pi J_y) commutes with the Floquet
//! operator for every (k, p); in the R_y eigenbasis the chaotic top is
//! statistically a block-diagonal unitary whose two blocks are independent
//! COE matrices W = U^T U with U Haar-distributed (Mezzadri's QR recipe
//! with the R-diagonal phase correction).

use crate::correlations::{evaluate_state_with, QNormalization};
use crate::dynamics::AveragedCorrelations;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{r, C, CMat, CVec, Real};
use crate::spin::{AngularBasis, SpinQuantumNumber, SymmetricState};
use nalgebra::ComplexField;
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::io::Write;

/// Orthonormal bases of the +-1 (or -+i for half-integer j) eigenspaces of
/// the parity rotation R_y.
pub struct ParityBasis<T: Real> {
    j: SpinQuantumNumber,
    plus: CMat<T>,
    minus: CMat<T>,
}

impl<T: Real> ParityBasis<T> {
    pub fn j(&self) -> SpinQuantumNumber {
        self.j
    }
    pub fn plus_dim(&self) -> usize {
        self.plus.ncols()
    }
    pub fn minus_dim(&self) -> usize {
        self.minus.ncols()
    }
    /// Columns spanning the positive-parity sector.
    pub fn plus(&self) -> &CMat<T> {
        &self.plus
    }
    /// Columns spanning the negative-parity sector.
    pub fn minus(&self) -> &CMat<T> {
        &self.minus
    }
}

/// Diagonalize R_y = exp(-i pi J_y) and split the |j,m> space by parity.
///
/// R_y shares eigenvectors with J_y; each eigenvalue is exp(-i pi m). For
/// integer j the parity eigenvalues are +-1 (plus sector: even m); for
/// half-integer j they are -+i (plus sector: eigenvalue -i). Eigenvalues
/// farther than 1e-6 from those values signal a J_y construction bug.
pub fn parity_basis<T: Real>(j: SpinQuantumNumber) -> Result<ParityBasis<T>> {
    parity_basis_with(&AngularBasis::new(j))
}

/// Same as [`parity_basis`], reusing a precomputed [`AngularBasis`].
pub fn parity_basis_with<T: Real>(basis: &AngularBasis<T>) -> Result<ParityBasis<T>> {
    let j = basis.j();
    let d = j.dim();
    let vectors = basis.jy_eigenvectors();
    let evals = basis.jy_eigenvalues();
    let mut plus_cols: Vec<CVec<T>> = Vec::new();
    let mut minus_cols: Vec<CVec<T>> = Vec::new();
    for i in 0..d {
        let tm = (evals[i] * r::<T>(2.0)).round().to_f64().unwrap() as i64;
        let phase = crate::scalar::cis(-T::pi() * r::<T>(tm as f64 / 2.0));
        let numeric = crate::scalar::cis(-T::pi() * evals[i]);
        if (phase - numeric).modulus() > T::tol(1e-6) {
            return Err(Error::ParityEigenvalue {
                value: format!(
                    "{:+.6e}{:+.6e}i",
                    numeric.re.to_f64().unwrap(),
                    numeric.im.to_f64().unwrap()
                ),
            });
        }
        // Integer j: +1 for even m. Half-integer j: -i for m = 1/2 mod 2.
        let is_plus = if j.is_integer() {
            tm.rem_euclid(4) == 0
        } else {
            tm.rem_euclid(4) == 1
        };
        let col = vectors.column(i).into_owned();
        if is_plus {
            plus_cols.push(col);
        } else {
            minus_cols.push(col);
        }
    }
    Ok(ParityBasis {
        j,
        plus: CMat::from_columns(&plus_cols),
        minus: CMat::from_columns(&minus_cols),
    })
}

/// Which random ensemble to draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ensemble {
    /// Independent COE blocks in the parity basis (the physical model).
    BlockCoe,
    /// A single COE matrix over the full 2j+1 space.
    FullCoe,
    /// Uniformly random real unit vectors (COE eigenvector model).
    HaarSphereReal,
}

impl Ensemble {
    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::BlockCoe => "block_coe",
            Ensemble::FullCoe => "full_coe",
            Ensemble::HaarSphereReal => "haar_sphere_real",
        }
    }
}

/// Fully seeded description of an ensemble computation; the seed and the
/// per-sample stream index determine every draw.
#[derive(Clone, Copy, Debug)]
pub struct EnsembleSpec {
    pub j: SpinQuantumNumber,
    pub n_samples: usize,
    pub rng_seed: u64,
    pub ensemble: Ensemble,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::EmptyGrid { name: "n_samples" });
        }
        Ok(())
    }
}

/// Independent RNG stream for one sample index.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian<T: Real, R: Rng>(rng: &mut R) -> T {
    r::<T>(rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix, with the
/// R-diagonal phases folded back in.
pub fn sample_cue<T: Real, R: Rng>(dim: usize, rng: &mut R) -> CMat<T> {
    assert!(dim >= 1, "dimension must be positive");
    let g = CMat::<T>::from_fn(dim, dim, |_, _| {
        Complex::new(gaussian::<T, _>(rng), gaussian::<T, _>(rng))
    });
    let qr = g.qr();
    let rdiag = qr.r().diagonal();
    let mut q = qr.q();
    for (col, rd) in rdiag.iter().enumerate() {
        let m = rd.modulus();
        let phase = if m > T::zero() {
            *rd / Complex::new(m, T::zero())
        } else {
            Complex::new(T::one(), T::zero())
        };
        for row in 0..dim {
            q[(row, col)] *= phase;
        }
    }
    q
}

/// COE matrix W = U^T U with U Haar-distributed.
pub fn sample_coe<T: Real, R: Rng>(dim: usize, rng: &mut R) -> CMat<T> {
    let u = sample_cue::<T, _>(dim, rng);
    u.transpose() * &u
}

/// One block-COE sample in the |j,m> basis: independent COE blocks of sizes
/// (d+, d-) assembled in the parity basis (plus block drawn first) and
/// rotated back. Requires `spec.ensemble == BlockCoe`.
pub fn sample_block_coe<T: Real>(
    spec: &EnsembleSpec,
    basis: &ParityBasis<T>,
    sample_index: u64,
) -> Result<CMat<T>> {
    spec.validate()?;
    if spec.ensemble != Ensemble::BlockCoe {
        return Err(Error::EnsembleMismatch {
            expected: "block_coe",
        });
    }
    let mut rng = stream_rng(spec.rng_seed, sample_index);
    let wp = sample_coe::<T, _>(basis.plus_dim(), &mut rng);
    let wm = sample_coe::<T, _>(basis.minus_dim(), &mut rng);
    let plus = basis.plus();
    let minus = basis.minus();
    Ok(plus * wp * plus.adjoint() + minus * wm * minus.adjoint())
}

/// Time average of the correlation measures for a coherent state evolved
/// under ensemble samples; with several samples the per-step records are
/// pooled before averaging.
pub fn coe_time_average<T: Real>(
    spec: &EnsembleSpec,
    theta0: T,
    phi0: T,
    n_steps: usize,
) -> Result<AveragedCorrelations<T>> {
    spec.validate()?;
    if n_steps < 1 {
        return Err(Error::EmptyGrid { name: "n_steps" });
    }
    crate::spin::validate_direction(theta0, phi0)?;
    let angular = AngularBasis::new(spec.j);
    let parity = parity_basis_with(&angular)?;
    let initial = angular.coherent_state(theta0, phi0);

    let step_values: Result<Vec<Vec<[T; 3]>>> = (0..spec.n_samples as u64)
        .into_par_iter()
        .map(|idx| {
            let w = match spec.ensemble {
                Ensemble::BlockCoe => sample_block_coe(spec, &parity, idx)?,
                Ensemble::FullCoe => {
                    let mut rng = stream_rng(spec.rng_seed, idx);
                    sample_coe::<T, _>(spec.j.dim(), &mut rng)
                }
                Ensemble::HaarSphereReal => {
                    return Err(Error::EnsembleMismatch {
                        expected: "block_coe or full_coe",
                    })
                }
            };
            let mut amps = initial.amplitudes().clone();
            let mut rows = Vec::with_capacity(n_steps);
            for _ in 0..n_steps {
                amps = &w * amps;
                if (amps.norm_squared() - T::one()).abs() > T::tol(1e-12) {
                    let norm = amps.norm();
                    amps /= Complex::new(norm, T::zero());
                }
                let state = SymmetricState::new(spec.j, amps.clone())?;
                let vals = evaluate_state_with(&state, QNormalization::Qubit2j)?;
                rows.push([vals.discord, vals.geometric_discord, vals.q_measure]);
            }
            Ok(rows)
        })
        .collect();

    let pooled: Vec<[T; 3]> = step_values?.into_iter().flatten().collect();
    let n = r::<T>(pooled.len() as f64);
    let mut sums = [T::zero(); 3];
    let mut sq = [T::zero(); 3];
    for row in &pooled {
        for i in 0..3 {
            sums[i] += row[i];
            sq[i] += row[i] * row[i];
        }
    }
    let mean = |i: usize| sums[i] / n;
    let std = |i: usize| (sq[i] / n - mean(i) * mean(i)).max(T::zero()).sqrt();
    Ok(AveragedCorrelations {
        d_mean: mean(0),
        d_std: std(0),
        dg_mean: mean(1),
        dg_std: std(1),
        q_mean: mean(2),
        q_std: std(2),
        steps: pooled.len() as u32,
    })
}

/// Exact ensemble average of Q over COE-like eigenvectors,
/// <Q>_E = 1 - 16 j (j+1) / (3 (2j+3) (2j+1)^2), evaluated in integer
/// arithmetic on 2j.
pub fn analytic_q_average<T: Real>(j: SpinQuantumNumber) -> T {
    let tj = j.twice_j() as u64;
    // 16 j (j+1) = 4 (2j) (2j+2)
    let num = 4 * tj * (tj + 2);
    let den = 3 * (tj + 3) * (tj + 1) * (tj + 1);
    T::one() - r::<T>(num as f64) / r::<T>(den as f64)
}

/// Where the eigenvectors under study come from.
pub enum EigvecSource<'a, T: Real> {
    /// Diagonalize ensemble samples (or draw vectors directly for
    /// [`Ensemble::HaarSphereReal`]).
    CoeSamples(&'a EnsembleSpec),
    /// Eigenvectors of kicked-top Floquet operators over a set of kick
    /// strengths.
    FloquetKRange { j: SpinQuantumNumber, p: T, k_values: &'a [T] },
}

/// Whether to pool parity sectors or resolve them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectorMode {
    Mixed,
    ParityResolved,
}

/// Sector tag of a statistics row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectorLabel {
    All,
    Plus,
    Minus,
}

impl SectorLabel {
    pub fn name(&self) -> &'static str {
        match self {
            SectorLabel::All => "all",
            SectorLabel::Plus => "plus",
            SectorLabel::Minus => "minus",
        }
    }
}

/// Mean and standard error of Q over a set of eigenvectors.
#[derive(Clone, Copy, Debug)]
pub struct QStatistics<T: Real> {
    pub mean: T,
    pub std_error: T,
    pub n_vectors: usize,
}

fn q_stats<T: Real>(values: &[T]) -> QStatistics<T> {
    let n = r::<T>(values.len() as f64);
    let mean = values.iter().fold(T::zero(), |a, &b| a + b) / n;
    let var = values
        .iter()
        .fold(T::zero(), |a, &b| a + (b - mean) * (b - mean))
        / n;
    QStatistics {
        mean,
        std_error: (var / n).sqrt(),
        n_vectors: values.len(),
    }
}

fn q_of_amplitudes<T: Real>(
    j: SpinQuantumNumber,
    amps: CVec<T>,
    normalization: QNormalization,
) -> Result<T> {
    let state = SymmetricState::from_unnormalized(j, amps)?;
    Ok(crate::correlations::q_measure_collective(&state, normalization))
}

/// Average Q over eigenvectors of ensemble samples or Floquet operators.
///
/// `normalization` selects the collective-Q convention; the ensemble-average
/// formula [`analytic_q_average`] corresponds to
/// [`QNormalization::Collective2jPlus1`]. With [`SectorMode::ParityResolved`]
/// the averages are reported per parity sector (block-COE and Floquet
/// sources only).
pub fn eigenvector_q_statistics<T: Real>(
    source: EigvecSource<'_, T>,
    mode: SectorMode,
    normalization: QNormalization,
) -> Result<Vec<(SectorLabel, QStatistics<T>)>> {
    match source {
        EigvecSource::CoeSamples(spec) => {
            spec.validate()?;
            let j = spec.j;
            match spec.ensemble {
                Ensemble::HaarSphereReal => {
                    if mode == SectorMode::ParityResolved {
                        return Err(Error::EnsembleMismatch {
                            expected: "block_coe",
                        });
                    }
                    let d = j.dim();
                    let qs: Result<Vec<T>> = (0..spec.n_samples as u64)
                        .into_par_iter()
                        .map(|idx| {
                            let mut rng = stream_rng(spec.rng_seed, idx);
                            let v = CVec::<T>::from_fn(d, |_, _| {
                                Complex::new(gaussian::<T, _>(&mut rng), T::zero())
                            });
                            q_of_amplitudes(j, v, normalization)
                        })
                        .collect();
                    Ok(vec![(SectorLabel::All, q_stats(&qs?))])
                }
                Ensemble::FullCoe => {
                    if mode == SectorMode::ParityResolved {
                        return Err(Error::EnsembleMismatch {
                            expected: "block_coe",
                        });
                    }
                    let qs: Result<Vec<Vec<T>>> = (0..spec.n_samples as u64)
                        .into_par_iter()
                        .map(|idx| {
                            let mut rng = stream_rng(spec.rng_seed, idx);
                            let w = sample_coe::<T, _>(j.dim(), &mut rng);
                            let (_, vecs) = linalg::unitary_eigenpairs(&w)?;
                            (0..j.dim())
                                .map(|c| {
                                    q_of_amplitudes(
                                        j,
                                        vecs.column(c).into_owned(),
                                        normalization,
                                    )
                                })
                                .collect()
                        })
                        .collect();
                    let flat: Vec<T> = qs?.into_iter().flatten().collect();
                    Ok(vec![(SectorLabel::All, q_stats(&flat))])
                }
                Ensemble::BlockCoe => {
                    let parity = parity_basis(j)?;
                    let per_sample: Result<Vec<(Vec<T>, Vec<T>)>> = (0..spec.n_samples
                        as u64)
                        .into_par_iter()
                        .map(|idx| {
                            let mut rng = stream_rng(spec.rng_seed, idx);
                            let wp = sample_coe::<T, _>(parity.plus_dim(), &mut rng);
                            let wm = sample_coe::<T, _>(parity.minus_dim(), &mut rng);
                            let mut plus_qs = Vec::with_capacity(parity.plus_dim());
                            let mut minus_qs = Vec::with_capacity(parity.minus_dim());
                            for (block, embed, out) in [
                                (&wp, parity.plus(), &mut plus_qs),
                                (&wm, parity.minus(), &mut minus_qs),
                            ] {
                                let (_, vecs) = linalg::unitary_eigenpairs(block)?;
                                for c in 0..vecs.ncols() {
                                    let full = embed * vecs.column(c);
                                    out.push(q_of_amplitudes(j, full, normalization)?);
                                }
                            }
                            Ok((plus_qs, minus_qs))
                        })
                        .collect();
                    let mut plus_all = Vec::new();
                    let mut minus_all = Vec::new();
                    for (p, m) in per_sample? {
                        plus_all.extend(p);
                        minus_all.extend(m);
                    }
                    match mode {
                        SectorMode::Mixed => {
                            let mut all = plus_all;
                            all.extend(minus_all);
                            Ok(vec![(SectorLabel::All, q_stats(&all))])
                        }
                        SectorMode::ParityResolved => Ok(vec![
                            (SectorLabel::Plus, q_stats(&plus_all)),
                            (SectorLabel::Minus, q_stats(&minus_all)),
                        ]),
                    }
                }
            }
        }
        EigvecSource::FloquetKRange { j, p, k_values } => {
            if k_values.is_empty() {
                return Err(Error::EmptyGrid { name: "k_values" });
            }
            let angular = AngularBasis::new(j);
            let ry = angular.parity_rotation();
            let per_k: Result<Vec<(Vec<T>, Vec<T>)>> = k_values
                .par_iter()
                .map(|&k| {
                    let op = crate::dynamics::build_floquet_with(&angular, k, p)?;
                    let (_, vecs) = linalg::unitary_eigenpairs(op.matrix())?;
                    let mut plus_qs = Vec::new();
                    let mut minus_qs = Vec::new();
                    for col in 0..vecs.ncols() {
                        let v = vecs.column(col).into_owned();
                        let q = q_of_amplitudes(j, v.clone(), normalization)?;
                        // Parity of the eigenvector from <v|R_y|v>.
                        let exp = v.dotc(&(&ry * &v));
                        let is_plus = if j.is_integer() {
                            exp.re > T::zero()
                        } else {
                            exp.im < T::zero()
                        };
                        if is_plus {
                            plus_qs.push(q);
                        } else {
                            minus_qs.push(q);
                        }
                    }
                    Ok((plus_qs, minus_qs))
                })
                .collect();
            let mut plus_all = Vec::new();
            let mut minus_all = Vec::new();
            for (pq, mq) in per_k? {
                plus_all.extend(pq);
                minus_all.extend(mq);
            }
            match mode {
                SectorMode::Mixed => {
                    let mut all = plus_all;
                    all.extend(minus_all);
                    Ok(vec![(SectorLabel::All, q_stats(&all))])
                }
                SectorMode::ParityResolved => Ok(vec![
                    (SectorLabel::Plus, q_stats(&plus_all)),
                    (SectorLabel::Minus, q_stats(&minus_all)),
                ]),
            }
        }
    }
}

/// Monte-Carlo estimates of the component moments of uniformly random real
/// unit vectors in dimension 2j+1.
#[derive(Clone, Copy, Debug)]
pub struct MomentEstimates<T: Real> {
    /// (mean, standard error) of <|a_m|^4>.
    pub fourth: (T, T),
    /// (mean, standard error) of <|a_m|^2 |a_n|^2>, m != n.
    pub cross: (T, T),
}

/// Estimate <|a_m|^4> and <|a_m|^2|a_n|^2> over random real unit vectors;
/// the identity sum_{m != n} |a_m|^2 |a_n|^2 = 1 - sum_m |a_m|^4 gives the
/// cross moment from the same draw. Expected values are
/// 3/((2j+1)(2j+3)) and 1/((2j+1)(2j+3)).
pub fn component_moment_check<T: Real>(
    j: SpinQuantumNumber,
    n_samples: usize,
    rng_seed: u64,
) -> Result<MomentEstimates<T>> {
    if n_samples < 1000 {
        return Err(Error::NotEnoughPoints {
            needed: 1000,
            have: n_samples,
        });
    }
    let d = j.dim();
    let df = r::<T>(d as f64);
    let pairs = r::<T>((d * (d - 1)) as f64);
    let mut sum4 = T::zero();
    let mut sum4_sq = T::zero();
    let mut sumx = T::zero();
    let mut sumx_sq = T::zero();
    let mut rng = stream_rng(rng_seed, 0);
    for _ in 0..n_samples {
        let mut norm2 = T::zero();
        let mut quart = T::zero();
        let mut comps = Vec::with_capacity(d);
        for _ in 0..d {
            let x: T = gaussian::<T, _>(&mut rng);
            comps.push(x);
            norm2 += x * x;
        }
        for x in comps {
            let w = x * x / norm2;
            quart += w * w;
        }
        let per4 = quart / df;
        let perx = (T::one() - quart) / pairs;
        sum4 += per4;
        sum4_sq += per4 * per4;
        sumx += perx;
        sumx_sq += perx * perx;
    }
    let n = r::<T>(n_samples as f64);
    let stats = |s: T, ss: T| {
        let mean = s / n;
        let var = (ss / n - mean * mean).max(T::zero());
        (mean, (var / n).sqrt())
    };
    Ok(MomentEstimates {
        fourth: stats(sum4, sum4_sq),
        cross: stats(sumx, sumx_sq),
    })
}

/// Maximum qubit count for the Haar reference (full 2^N state vectors).
pub const HAAR_MAX_QUBITS: u32 = 12;

/// Monte-Carlo mean (and standard error) of the Meyer-Wallach Q over Haar
/// random pure states of N qubits; approaches 1 - 3/2^N for large N.
pub fn haar_q_reference<T: Real>(
    n_qubits: u32,
    n_samples: usize,
    rng_seed: u64,
) -> Result<(T, T)> {
    if n_qubits < 1 {
        return Err(Error::InvalidSpin { twice_j: 0 });
    }
    if n_qubits > HAAR_MAX_QUBITS {
        return Err(Error::TooManyQubits {
            n: n_qubits,
            max: HAAR_MAX_QUBITS,
        });
    }
    if n_samples < 1 {
        return Err(Error::EmptyGrid { name: "n_samples" });
    }
    let dim = 1usize << n_qubits;
    let qs: Vec<T> = (0..n_samples as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(rng_seed, idx);
            let mut psi: Vec<C<T>> = (0..dim)
                .map(|_| Complex::new(gaussian::<T, _>(&mut rng), gaussian::<T, _>(&mut rng)))
                .collect();
            let norm = psi
                .iter()
                .fold(T::zero(), |a, z| a + z.norm_sqr())
                .sqrt();
            for z in psi.iter_mut() {
                *z /= Complex::new(norm, T::zero());
            }
            let mut purity_sum = T::zero();
            for q in 0..n_qubits {
                let mask = 1usize << q;
                let mut p00 = T::zero();
                let mut p11 = T::zero();
                let mut p01 = Complex::new(T::zero(), T::zero());
                for s in 0..dim {
                    if s & mask == 0 {
                        p00 += psi[s].norm_sqr();
                        p01 += psi[s] * psi[s | mask].conj();
                    } else {
                        p11 += psi[s].norm_sqr();
                    }
                }
                purity_sum += p00 * p00 + p11 * p11 + r::<T>(2.0) * p01.norm_sqr();
            }
            r::<T>(2.0) * (T::one() - purity_sum / r::<T>(n_qubits as f64))
        })
        .collect();
    let st = q_stats(&qs);
    Ok((st.mean, st.std_error))
}

/// One row of the ensemble-results CSV.
pub struct EnsembleRow<T: Real> {
    pub j: SpinQuantumNumber,
    pub ensemble: Ensemble,
    pub n_samples: usize,
    pub seed: u64,
    pub averages: AveragedCorrelations<T>,
}

/// CSV writer:
/// `j,ensemble,n_samples,seed,D_mean,DG_mean,Q_mean,Q_analytic,stderr_D,stderr_DG,stderr_Q`.
pub fn write_ensemble_csv<T: Real, W: Write>(
    rows: &[EnsembleRow<T>],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(
        out,
        "j,ensemble,n_samples,seed,D_mean,DG_mean,Q_mean,Q_analytic,stderr_D,stderr_DG,stderr_Q"
    )?;
    let g = |x: T| crate::numfmt::sig12(x.to_f64().unwrap());
    for row in rows {
        let a = &row.averages;
        let sqrt_n = r::<T>(a.steps as f64).sqrt();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            crate::numfmt::sig12(row.j.j::<f64>()),
            row.ensemble.name(),
            row.n_samples,
            row.seed,
            g(a.d_mean),
            g(a.dg_mean),
            g(a.q_mean),
            g(analytic_q_average::<T>(row.j)),
            g(a.d_std / sqrt_n),
            g(a.dg_std / sqrt_n),
            g(a.q_std / sqrt_n),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_floquet;
    use crate::linalg::{max_abs, unitarity_residual};
    use approx::assert_abs_diff_eq;

    fn j_of(tj: u32) -> SpinQuantumNumber {
        SpinQuantumNumber::from_twice_j(tj).unwrap()
    }

    #[test]
    fn parity_dimensions() {
        let pb = parity_basis::<f64>(j_of(1)).unwrap();
        assert_eq!((pb.plus_dim(), pb.minus_dim()), (1, 1));
        for tj in [2u32, 3, 7, 20, 41, 100] {
            let pb = parity_basis::<f64>(j_of(tj)).unwrap();
            assert_eq!(pb.plus_dim() + pb.minus_dim(), tj as usize + 1);
        }
    }

    #[test]
    fn parity_squares_to_identity_for_integer_j() {
        let basis = AngularBasis::<f64>::new(j_of(20));
        let ry = basis.parity_rotation();
        let sq = &ry * &ry;
        let mut dev: f64 = 0.0;
        for i in 0..21 {
            for l in 0..21 {
                let want = if i == l { 1.0 } else { 0.0 };
                dev = dev.max((sq[(i, l)] - Complex::new(want, 0.0)).norm());
            }
        }
        assert!(dev < 1e-10);
    }

    #[test]
    fn parity_commutes_with_floquet() {
        let j = j_of(100);
        let basis = AngularBasis::<f64>::new(j);
        let ry = basis.parity_rotation();
        let op = build_floquet(j, 10.0, 1.7).unwrap();
        let comm = &ry * op.matrix() - op.matrix() * &ry;
        assert!(max_abs(&comm) < 1e-10);
    }

    #[test]
    fn parity_vectors_are_eigenvectors() {
        let j = j_of(9); // half-integer j = 9/2
        let basis = AngularBasis::<f64>::new(j);
        let ry = basis.parity_rotation();
        let pb = parity_basis_with(&basis).unwrap();
        for (cols, want) in [(pb.plus(), Complex::new(0.0, -1.0)), (pb.minus(), Complex::new(0.0, 1.0))] {
            for c in 0..cols.ncols() {
                let v = cols.column(c).into_owned();
                let rv = &ry * &v;
                let resid = (&rv - &v * want).norm();
                assert!(resid < 1e-8, "resid {resid:.3e}");
            }
        }
    }

    #[test]
    fn cue_sampling_unitary_and_deterministic() {
        let mut rng = stream_rng(5, 0);
        let u = sample_cue::<f64, _>(24, &mut rng);
        assert!(unitarity_residual(&u) < 1e-12);
        let mut rng2 = stream_rng(5, 0);
        let u2 = sample_cue::<f64, _>(24, &mut rng2);
        assert_eq!(u, u2);
        let mut rng3 = stream_rng(5, 1);
        let u3 = sample_cue::<f64, _>(24, &mut rng3);
        assert!(max_abs(&(&u - &u3)) > 1e-3);
    }

    #[test]
    fn cue_dim_one_is_a_phase() {
        let mut rng = stream_rng(9, 0);
        for _ in 0..50 {
            let u = sample_cue::<f64, _>(1, &mut rng);
            assert_abs_diff_eq!(u[(0, 0)].norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn coe_samples_are_symmetric_unitaries() {
        let mut rng = stream_rng(11, 0);
        for dim in [3usize, 17, 40] {
            let w = sample_coe::<f64, _>(dim, &mut rng);
            assert!(unitarity_residual(&w) < 1e-12);
            let mut sym_dev: f64 = 0.0;
            for i in 0..dim {
                for l in 0..dim {
                    sym_dev = sym_dev.max((w[(i, l)] - w[(l, i)]).norm());
                }
            }
            assert!(sym_dev < 1e-12, "dev {sym_dev:.3e}");
        }
    }

    #[test]
    fn cue_trace_moment() {
        // E |Tr U|^2 = 1 for the CUE.
        let mut rng = stream_rng(13, 0);
        let n = 3000;
        let mut acc = 0.0;
        for _ in 0..n {
            let u = sample_cue::<f64, _>(64, &mut rng);
            let tr: Complex<f64> = (0..64).map(|i| u[(i, i)]).sum();
            acc += tr.norm_sqr();
        }
        let mean = acc / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean |Tr U|^2 = {mean}");
    }

    #[test]
    fn block_coe_commutes_with_parity_and_repeats() {
        let j = j_of(40);
        let basis = AngularBasis::<f64>::new(j);
        let pb = parity_basis_with(&basis).unwrap();
        let spec = EnsembleSpec {
            j,
            n_samples: 1,
            rng_seed: 3,
            ensemble: Ensemble::BlockCoe,
        };
        let w = sample_block_coe(&spec, &pb, 0).unwrap();
        assert!(unitarity_residual(&w) < 1e-11);
        let ry = basis.parity_rotation();
        assert!(max_abs(&(&ry * &w - &w * &ry)) < 1e-10);
        let w2 = sample_block_coe(&spec, &pb, 0).unwrap();
        assert_eq!(w, w2);
        let spec_bad = EnsembleSpec {
            ensemble: Ensemble::FullCoe,
            ..spec
        };
        assert!(sample_block_coe(&spec_bad, &pb, 0).is_err());
    }

    #[test]
    fn analytic_q_reference_points() {
        // j = 1: 1 - 32/135 = 103/135.
        assert_abs_diff_eq!(
            analytic_q_average::<f64>(j_of(2)),
            103.0 / 135.0,
            epsilon = 1e-15
        );
        // j = 120 by direct evaluation of the formula.
        assert_abs_diff_eq!(
            analytic_q_average::<f64>(j_of(240)),
            0.994513126021,
            epsilon = 1e-9
        );
        // Large-j asymptotics 1 - 2/(3j).
        let j = j_of(4000);
        let asym = 1.0 - 2.0 / (3.0 * 2000.0);
        assert!((analytic_q_average::<f64>(j) - asym).abs() < 1e-6);
    }

    #[test]
    fn summation_identities_exact() {
        for tj in 1..=200i128 {
            // 3 sum_m (2m)^2 = 2j (2j+2) (2j+1) in doubled units.
            let mut s2 = 0i128;
            let mut tm = -tj;
            while tm <= tj {
                s2 += tm * tm;
                tm += 2;
            }
            assert_eq!(3 * s2, tj * (tj + 2) * (tj + 1));

            // 3 sum_{m=-j}^{j-1} (2(j-m)) (2(j+m+1))/4 identity, scaled by 12.
            let mut s = 0i128;
            let mut tm = -tj;
            while tm <= tj - 2 {
                s += (tj - tm) * (tj + tm + 2);
                tm += 2;
            }
            let rhs = 3 * tj * tj * (tj + 2) + 6 * tj + 3 * tj * tj
                - tj * (tj + 2) * (tj + 1);
            assert_eq!(3 * s, rhs, "tj = {tj}");
        }
    }

    #[test]
    fn component_moments_match_formulas() {
        // j = 1 (dim 3): <a^4> = 3/15, <a^2 b^2> = 1/15.
        let est = component_moment_check::<f64>(j_of(2), 200_000, 17).unwrap();
        let want4 = 0.2;
        let wantx = 1.0 / 15.0;
        assert!(
            (est.fourth.0 - want4).abs() < 3.0 * est.fourth.1,
            "fourth {:?} vs {want4}",
            est.fourth
        );
        assert!(
            (est.cross.0 - wantx).abs() < 3.0 * est.cross.1,
            "cross {:?} vs {wantx}",
            est.cross
        );
        assert!(component_moment_check::<f64>(j_of(2), 10, 0).is_err());
    }

    #[test]
    fn collective_moment_averages_match_formula() {
        // <<S_z>^2>_E = <<S_+><S_->>_E = 2j(j+1)/(3(2j+3)) over real vectors.
        let j = j_of(10);
        let d = j.dim();
        let n = 40_000;
        let mut rng = stream_rng(23, 0);
        let mut sz2 = Vec::with_capacity(n);
        let mut spsm = Vec::with_capacity(n);
        for _ in 0..n {
            let v = CVec::<f64>::from_fn(d, |_, _| {
                Complex::new(gaussian::<f64, _>(&mut rng), 0.0)
            });
            let st = SymmetricState::from_unnormalized(j, v).unwrap();
            let (sz, sp) = st.first_moments();
            sz2.push(sz * sz);
            spsm.push(sp.norm_sqr());
        }
        let jj = 5.0;
        let want = 2.0 * jj * (jj + 1.0) / (3.0 * (2.0 * jj + 3.0));
        let s1 = q_stats(&sz2);
        let s2 = q_stats(&spsm);
        assert!((s1.mean - want).abs() < 3.0 * s1.std_error, "{s1:?} vs {want}");
        assert!((s2.mean - want).abs() < 3.0 * s2.std_error, "{s2:?} vs {want}");
    }

    #[test]
    fn haar_reference_small_n() {
        let (q1, _) = haar_q_reference::<f64>(1, 200, 5).unwrap();
        assert!(q1.abs() < 1e-12);
        let (q8, se8) = haar_q_reference::<f64>(8, 1000, 5).unwrap();
        let want = 1.0 - 3.0 / 256.0;
        assert!((q8 - want).abs() < 3.0 * se8, "q8 = {q8}, want {want}, se {se8}");
        assert!(haar_q_reference::<f64>(13, 10, 0).is_err());
    }

    #[test]
    fn haar_approaches_one_faster_than_coe() {
        let (q10, _) = haar_q_reference::<f64>(10, 400, 7).unwrap();
        let coe = analytic_q_average::<f64>(j_of(10)); // j = 5 (N = 10)
        assert!(q10 > coe, "haar {q10} vs coe {coe}");
    }

    #[test]
    fn eigenvector_stats_spin_half() {
        let spec = EnsembleSpec {
            j: j_of(1),
            n_samples: 20,
            rng_seed: 2,
            ensemble: Ensemble::FullCoe,
        };
        // Any pure qubit state has zero Meyer-Wallach Q.
        let rows = eigenvector_q_statistics::<f64>(
            EigvecSource::CoeSamples(&spec),
            SectorMode::Mixed,
            QNormalization::Qubit2j,
        )
        .unwrap();
        assert!(rows[0].1.mean.abs() < 1e-12);
        // The ensemble-average convention gives exactly 0.75 = <Q>_E(1/2).
        let rows = eigenvector_q_statistics::<f64>(
            EigvecSource::CoeSamples(&spec),
            SectorMode::Mixed,
            QNormalization::Collective2jPlus1,
        )
        .unwrap();
        assert_abs_diff_eq!(rows[0].1.mean, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(
            analytic_q_average::<f64>(j_of(1)),
            0.75,
            epsilon = 1e-15
        );
    }

    #[test]
    fn real_sphere_eigvec_average_matches_analytic() {
        let j = j_of(20);
        let spec = EnsembleSpec {
            j,
            n_samples: 20_000,
            rng_seed: 31,
            ensemble: Ensemble::HaarSphereReal,
        };
        let rows = eigenvector_q_statistics::<f64>(
            EigvecSource::CoeSamples(&spec),
            SectorMode::Mixed,
            QNormalization::Collective2jPlus1,
        )
        .unwrap();
        let (_, st) = rows[0];
        let want = analytic_q_average::<f64>(j);
        assert!(
            (st.mean - want).abs() < 3.0 * st.std_error,
            "{} vs {want} (se {})",
            st.mean,
            st.std_error
        );
    }

    #[test]
    fn full_coe_eigvec_average_matches_analytic() {
        // COE eigenvector components follow the real-sphere model exactly.
        let j = j_of(20);
        let spec = EnsembleSpec {
            j,
            n_samples: 150,
            rng_seed: 37,
            ensemble: Ensemble::FullCoe,
        };
        let rows = eigenvector_q_statistics::<f64>(
            EigvecSource::CoeSamples(&spec),
            SectorMode::Mixed,
            QNormalization::Collective2jPlus1,
        )
        .unwrap();
        let (_, st) = rows[0];
        let want = analytic_q_average::<f64>(j);
        assert!(
            (st.mean - want).abs() < 2.0 * st.std_error,
            "{} vs {want} (se {})",
            st.mean,
            st.std_error
        );
    }

    #[test]
    fn ensemble_csv_format() {
        let avg = AveragedCorrelations {
            d_mean: 0.2,
            d_std: 0.01,
            dg_mean: 0.05,
            dg_std: 0.002,
            q_mean: 0.99,
            q_std: 0.001,
            steps: 100,
        };
        let rows = vec![EnsembleRow {
            j: j_of(100),
            ensemble: Ensemble::BlockCoe,
            n_samples: 1,
            seed: 7,
            averages: avg,
        }];
        let mut buf = Vec::new();
        write_ensemble_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "j,ensemble,n_samples,seed,D_mean,DG_mean,Q_mean,Q_analytic,stderr_D,stderr_DG,stderr_Q\n"
        ));
        assert!(text.lines().nth(1).unwrap().starts_with("50,block_coe,1,7,0.2,"));
    }

    mod spacing {
        use super::*;

        /// Mean consecutive-spacing ratio of sorted eigenphases.
        pub fn mean_spacing_ratio(phases: &mut Vec<f64>) -> (f64, usize) {
            phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = phases.len();
            let mut spacings = Vec::with_capacity(n);
            for i in 0..n - 1 {
                spacings.push(phases[i + 1] - phases[i]);
            }
            spacings.push(phases[0] + std::f64::consts::TAU - phases[n - 1]);
            let mut acc = 0.0;
            let mut count = 0;
            for i in 0..n {
                let a = spacings[i];
                let b = spacings[(i + 1) % n];
                acc += a.min(b) / a.max(b);
                count += 1;
            }
            (acc, count)
        }

        #[test]
        fn block_coe_spacing_ratios_are_goe_like() {
            // <r> = 4 - 2 sqrt(3) ~ 0.53590 for the COE/GOE universality
            // class; accumulate >= 1e4 spacing ratios per parity block.
            let j = j_of(240);
            let basis = AngularBasis::<f64>::new(j);
            let pb = parity_basis_with(&basis).unwrap();
            let spec = EnsembleSpec {
                j,
                n_samples: 42,
                rng_seed: 41,
                ensemble: Ensemble::BlockCoe,
            };
            let results: Vec<(f64, usize)> = (0..spec.n_samples as u64)
                .into_par_iter()
                .map(|idx| {
                    let mut rng = stream_rng(spec.rng_seed, idx);
                    let mut acc = 0.0;
                    let mut count = 0;
                    for dim in [pb.plus_dim(), pb.minus_dim()] {
                        let w = sample_coe::<f64, _>(dim, &mut rng);
                        let (vals, _) = linalg::unitary_eigenpairs(&w).unwrap();
                        let mut phases: Vec<f64> =
                            vals.iter().map(|z| z.argument()).collect();
                        let (a, c) = mean_spacing_ratio(&mut phases);
                        acc += a;
                        count += c;
                    }
                    (acc, count)
                })
                .collect();
            let total: f64 = results.iter().map(|r| r.0).sum();
            let count: usize = results.iter().map(|r| r.1).sum();
            assert!(count >= 10_000, "only {count} ratios");
            let mean = total / count as f64;
            let goe = 4.0 - 2.0 * 3.0f64.sqrt();
            assert!((mean - goe).abs() < 0.01, "mean r = {mean}, want {goe}");
        }
    }
}
