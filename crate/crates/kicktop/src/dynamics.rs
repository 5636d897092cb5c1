//! Floquet evolution of the kicked top and the sweep experiments built on
//! it: per-step correlation time series, time averages against kick
//! strength, semiclassical scaling in j, and power-law fits.
//!
//! One kick period is U = exp(-i (k/2j) J_z^2) exp(-i p J_y); a step applies
//! the dense rotation matrix-vector product first, then the diagonal torsion
//! phases, at O(d^2) per step.

use crate::correlations::{evaluate_state_with, CorrelationValues, QNormalization};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{r, CMat, CVec, Real};
use crate::spin::{torsion_diag, AngularBasis, SpinQuantumNumber, SymmetricState};
use rayon::prelude::*;
use std::io::Write;

/// The one-period propagator U = torsion * rotation with its factors.
pub struct FloquetOperator<T: Real> {
    j: SpinQuantumNumber,
    k: T,
    p: T,
    u: CMat<T>,
    rotation: CMat<T>,
    torsion_diag: CVec<T>,
}

impl<T: Real> FloquetOperator<T> {
    pub fn j(&self) -> SpinQuantumNumber {
        self.j
    }
    pub fn k(&self) -> T {
        self.k
    }
    pub fn p(&self) -> T {
        self.p
    }

    /// The assembled unitary U.
    pub fn matrix(&self) -> &CMat<T> {
        &self.u
    }

    /// Dense rotation factor exp(-i p J_y).
    pub fn rotation(&self) -> &CMat<T> {
        &self.rotation
    }

    /// Diagonal torsion factor exp(-i (k/2j) m^2).
    pub fn torsion_diagonal(&self) -> &CVec<T> {
        &self.torsion_diag
    }

    /// Max-norm of U†U - I.
    pub fn unitarity_residual(&self) -> T {
        linalg::unitarity_residual(&self.u)
    }

    /// One step: rotation matvec, then torsion phases.
    fn apply(&self, amps: &CVec<T>) -> CVec<T> {
        let mut w = &self.rotation * amps;
        for i in 0..w.len() {
            w[i] *= self.torsion_diag[i];
        }
        w
    }
}

/// Build the Floquet operator for (j, k, p).
pub fn build_floquet<T: Real>(j: SpinQuantumNumber, k: T, p: T) -> Result<FloquetOperator<T>> {
    build_floquet_with(&AngularBasis::new(j), k, p)
}

/// Build the Floquet operator reusing a precomputed [`AngularBasis`].
pub fn build_floquet_with<T: Real>(
    basis: &AngularBasis<T>,
    k: T,
    p: T,
) -> Result<FloquetOperator<T>> {
    if !k.is_finite() {
        return Err(Error::NonFinite { name: "k" });
    }
    if !p.is_finite() {
        return Err(Error::NonFinite { name: "p" });
    }
    let j = basis.j();
    let rotation = basis.rotation_y(p);
    let tau = torsion_diag(j, k);
    let mut u = rotation.clone();
    for i in 0..j.dim() {
        let phase = tau[i];
        for col in 0..j.dim() {
            u[(i, col)] *= phase;
        }
    }
    Ok(FloquetOperator {
        j,
        k,
        p,
        u,
        rotation,
        torsion_diag: tau,
    })
}

/// Iterator over |psi(n)> = U^n |psi(0)> for n = 1..=n_steps.
pub struct Evolution<'a, T: Real> {
    op: &'a FloquetOperator<T>,
    state: SymmetricState<T>,
    remaining: usize,
}

impl<T: Real> Iterator for Evolution<'_, T> {
    type Item = SymmetricState<T>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let next = self.op.apply(self.state.amplitudes());
        *self.state.amplitudes_mut() = next;
        // Same drift criterion as the SymmetricState norm invariant.
        if (self.state.amplitudes().norm_squared() - T::one()).abs() > T::tol(1e-12) {
            self.state.renormalize();
        }
        Some(self.state.clone())
    }
}

/// Evolve a state for `n_steps` kicks, yielding each intermediate state.
pub fn evolve<'a, T: Real>(
    state: &SymmetricState<T>,
    op: &'a FloquetOperator<T>,
    n_steps: usize,
) -> Result<Evolution<'a, T>> {
    if state.dim() != op.j.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.j.dim(),
            actual: state.dim(),
        });
    }
    if n_steps < 1 {
        return Err(Error::EmptyGrid { name: "n_steps" });
    }
    Ok(Evolution {
        op,
        state: state.clone(),
        remaining: n_steps,
    })
}

/// Correlation values at one time step.
#[derive(Clone, Copy, Debug)]
pub struct StepRecord<T: Real> {
    pub t: u32,
    pub values: CorrelationValues<T>,
}

/// Run parameters attached to a time series.
#[derive(Clone, Copy, Debug)]
pub struct SeriesMeta<T: Real> {
    pub j: SpinQuantumNumber,
    pub k: T,
    pub p: T,
    pub theta0: T,
    pub phi0: T,
    pub n_steps: u32,
    pub normalization: QNormalization,
}

/// Per-step correlation measures of one evolved coherent state; t runs
/// contiguously from 1 (the t = 0 coherent state has zero correlations and
/// is excluded).
#[derive(Clone, Debug)]
pub struct CorrelationTimeSeries<T: Real> {
    pub meta: SeriesMeta<T>,
    pub records: Vec<StepRecord<T>>,
}

/// Means and standard deviations of the three measures over a series.
#[derive(Clone, Copy, Debug)]
pub struct AveragedCorrelations<T: Real> {
    pub d_mean: T,
    pub d_std: T,
    pub dg_mean: T,
    pub dg_std: T,
    pub q_mean: T,
    pub q_std: T,
    pub steps: u32,
}

impl<T: Real> CorrelationTimeSeries<T> {
    /// Arithmetic means and population standard deviations over steps 1..T.
    pub fn averages(&self) -> AveragedCorrelations<T> {
        let n = r::<T>(self.records.len() as f64);
        let mut sums = [T::zero(); 3];
        let mut sq = [T::zero(); 3];
        for rec in &self.records {
            let v = [
                rec.values.discord,
                rec.values.geometric_discord,
                rec.values.q_measure,
            ];
            for i in 0..3 {
                sums[i] += v[i];
                sq[i] += v[i] * v[i];
            }
        }
        let mean = |i: usize| sums[i] / n;
        let std = |i: usize| (sq[i] / n - mean(i) * mean(i)).max(T::zero()).sqrt();
        AveragedCorrelations {
            d_mean: mean(0),
            d_std: std(0),
            dg_mean: mean(1),
            dg_std: std(1),
            q_mean: mean(2),
            q_std: std(2),
            steps: self.records.len() as u32,
        }
    }
}

fn series_with_basis<T: Real>(
    basis: &AngularBasis<T>,
    k: T,
    p: T,
    theta0: T,
    phi0: T,
    n_steps: usize,
    normalization: QNormalization,
) -> Result<CorrelationTimeSeries<T>> {
    crate::spin::validate_direction(theta0, phi0)?;
    let op = build_floquet_with(basis, k, p)?;
    let initial = basis.coherent_state(theta0, phi0);
    let mut records = Vec::with_capacity(n_steps);
    for (idx, state) in evolve(&initial, &op, n_steps)?.enumerate() {
        let values = evaluate_state_with(&state, normalization)?;
        records.push(StepRecord {
            t: idx as u32 + 1,
            values,
        });
    }
    Ok(CorrelationTimeSeries {
        meta: SeriesMeta {
            j: basis.j(),
            k,
            p,
            theta0,
            phi0,
            n_steps: n_steps as u32,
            normalization,
        },
        records,
    })
}

/// Per-step correlation measures of the coherent state at (theta0, phi0)
/// evolved for `n_steps` kicks.
pub fn correlation_time_series<T: Real>(
    j: SpinQuantumNumber,
    k: T,
    p: T,
    theta0: T,
    phi0: T,
    n_steps: usize,
    normalization: QNormalization,
) -> Result<CorrelationTimeSeries<T>> {
    if n_steps < 1 {
        return Err(Error::EmptyGrid { name: "n_steps" });
    }
    series_with_basis(
        &AngularBasis::new(j),
        k,
        p,
        theta0,
        phi0,
        n_steps,
        normalization,
    )
}

/// Time-averaged (D, D^G, Q) over steps 1..T, with standard deviations.
pub fn time_averaged_correlations<T: Real>(
    j: SpinQuantumNumber,
    k: T,
    p: T,
    theta0: T,
    phi0: T,
    n_steps: usize,
) -> Result<AveragedCorrelations<T>> {
    Ok(correlation_time_series(j, k, p, theta0, phi0, n_steps, QNormalization::Qubit2j)?
        .averages())
}

/// Which parameter a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    KickStrength,
    Spin,
}

/// Time-averaged correlations along a parameter grid.
#[derive(Clone, Debug)]
pub struct SweepRecord<T: Real> {
    pub axis: SweepAxis,
    pub axis_values: Vec<T>,
    pub rows: Vec<AveragedCorrelations<T>>,
    pub steps: u32,
    /// Fixed j (kick-strength sweeps).
    pub j: Option<SpinQuantumNumber>,
    /// Fixed k (spin sweeps).
    pub k: Option<T>,
    pub p: T,
    pub theta0: T,
    pub phi0: T,
    pub normalization: QNormalization,
}

/// Sweep the kick strength at fixed j; one time average per grid point,
/// output ordered by k ascending. Grid points run in parallel.
pub fn sweep_k<T: Real>(
    j: SpinQuantumNumber,
    p: T,
    theta0: T,
    phi0: T,
    k_grid: &[T],
    n_steps: usize,
    normalization: QNormalization,
) -> Result<SweepRecord<T>> {
    if k_grid.is_empty() {
        return Err(Error::EmptyGrid { name: "k_grid" });
    }
    if n_steps < 1 {
        return Err(Error::EmptyGrid { name: "n_steps" });
    }
    crate::spin::validate_direction(theta0, phi0)?;
    let mut ks = k_grid.to_vec();
    ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let basis = AngularBasis::new(j);
    let rows: Result<Vec<AveragedCorrelations<T>>> = ks
        .par_iter()
        .map(|&k| {
            series_with_basis(&basis, k, p, theta0, phi0, n_steps, normalization)
                .map(|s| s.averages())
        })
        .collect();
    Ok(SweepRecord {
        axis: SweepAxis::KickStrength,
        axis_values: ks,
        rows: rows?,
        steps: n_steps as u32,
        j: Some(j),
        k: None,
        p,
        theta0,
        phi0,
        normalization,
    })
}

/// Sweep the spin size at fixed k; one time average per j. Values of j run
/// in parallel, each with its own basis.
pub fn sweep_j<T: Real>(
    k: T,
    p: T,
    theta0: T,
    phi0: T,
    j_list: &[SpinQuantumNumber],
    n_steps: usize,
    normalization: QNormalization,
) -> Result<SweepRecord<T>> {
    if j_list.is_empty() {
        return Err(Error::EmptyGrid { name: "j_list" });
    }
    if n_steps < 1 {
        return Err(Error::EmptyGrid { name: "n_steps" });
    }
    crate::spin::validate_direction(theta0, phi0)?;
    let mut js = j_list.to_vec();
    js.sort();
    js.dedup();
    let rows: Result<Vec<AveragedCorrelations<T>>> = js
        .par_iter()
        .map(|&j| {
            let basis = AngularBasis::new(j);
            series_with_basis(&basis, k, p, theta0, phi0, n_steps, normalization)
                .map(|s| s.averages())
        })
        .collect();
    Ok(SweepRecord {
        axis: SweepAxis::Spin,
        axis_values: js.iter().map(|j| j.j::<T>()).collect(),
        rows: rows?,
        steps: n_steps as u32,
        j: None,
        k: Some(k),
        p,
        theta0,
        phi0,
        normalization,
    })
}

/// Ordinary least-squares fit of log(value) against log(j).
#[derive(Clone, Copy, Debug)]
pub struct PowerLawFit<T: Real> {
    /// Magnitude of the log-log slope.
    pub exponent: T,
    /// Standard error of the slope.
    pub std_error: T,
    pub n_points: usize,
}

/// Power-law fits of the three measures over points with j >= j_min.
pub fn power_law_fit<T: Real>(
    sweep: &SweepRecord<T>,
    j_min: T,
) -> Result<[PowerLawFit<T>; 3]> {
    if sweep.axis != SweepAxis::Spin {
        return Err(Error::EmptyGrid { name: "spin axis" });
    }
    let selected: Vec<usize> = (0..sweep.axis_values.len())
        .filter(|&i| sweep.axis_values[i] >= j_min)
        .collect();
    if selected.len() < 5 {
        return Err(Error::NotEnoughPoints {
            needed: 5,
            have: selected.len(),
        });
    }
    let measures: [(&'static str, Box<dyn Fn(&AveragedCorrelations<T>) -> T>); 3] = [
        ("discord", Box::new(|row| row.d_mean)),
        ("geometric discord", Box::new(|row| row.dg_mean)),
        ("q measure", Box::new(|row| row.q_mean)),
    ];
    let mut fits = [PowerLawFit {
        exponent: T::zero(),
        std_error: T::zero(),
        n_points: selected.len(),
    }; 3];
    for (slot, (name, extract)) in measures.iter().enumerate() {
        let mut xs = Vec::with_capacity(selected.len());
        let mut ys = Vec::with_capacity(selected.len());
        for &i in &selected {
            let v = extract(&sweep.rows[i]);
            if v <= T::zero() {
                return Err(Error::NonPositiveFitData { measure: name });
            }
            xs.push(sweep.axis_values[i].ln());
            ys.push(v.ln());
        }
        let n = r::<T>(xs.len() as f64);
        let xbar = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
        let ybar = ys.iter().fold(T::zero(), |a, &b| a + b) / n;
        let mut sxx = T::zero();
        let mut sxy = T::zero();
        for i in 0..xs.len() {
            sxx += (xs[i] - xbar) * (xs[i] - xbar);
            sxy += (xs[i] - xbar) * (ys[i] - ybar);
        }
        let slope = sxy / sxx;
        let intercept = ybar - slope * xbar;
        let mut rss = T::zero();
        for i in 0..xs.len() {
            let e = ys[i] - intercept - slope * xs[i];
            rss += e * e;
        }
        let dof = r::<T>((xs.len() - 2) as f64);
        fits[slot] = PowerLawFit {
            exponent: slope.abs(),
            std_error: (rss / dof / sxx).sqrt(),
            n_points: xs.len(),
        };
    }
    Ok(fits)
}

/// Change-point of the mean discord: the first grid point whose D-bar
/// exceeds 5x the running mean of all earlier points (at least 3 baseline
/// points required).
pub fn detect_jump<T: Real>(sweep: &SweepRecord<T>) -> Option<T> {
    let d: Vec<T> = sweep.rows.iter().map(|row| row.d_mean).collect();
    let five = r::<T>(5.0);
    let mut running = T::zero();
    for i in 0..d.len() {
        if i >= 3 {
            let baseline = running / r::<T>(i as f64);
            if d[i] > five * baseline {
                return Some(sweep.axis_values[i]);
            }
        }
        running += d[i];
    }
    None
}

/// CSV writer for sweeps:
/// `axis_value,D_mean,D_std,DG_mean,DG_std,Q_mean,Q_std,T,j,k,p,theta0,phi0`.
pub fn write_sweep_csv<T: Real, W: Write>(
    sweep: &SweepRecord<T>,
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(
        out,
        "axis_value,D_mean,D_std,DG_mean,DG_std,Q_mean,Q_std,T,j,k,p,theta0,phi0"
    )?;
    let g = |x: T| crate::numfmt::sig12(x.to_f64().unwrap());
    for (i, row) in sweep.rows.iter().enumerate() {
        let axis = sweep.axis_values[i];
        let j_col = match sweep.axis {
            SweepAxis::Spin => axis,
            SweepAxis::KickStrength => sweep.j.expect("fixed j").j::<T>(),
        };
        let k_col = match sweep.axis {
            SweepAxis::Spin => sweep.k.expect("fixed k"),
            SweepAxis::KickStrength => axis,
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            g(axis),
            g(row.d_mean),
            g(row.d_std),
            g(row.dg_mean),
            g(row.dg_std),
            g(row.q_mean),
            g(row.q_std),
            sweep.steps,
            g(j_col),
            g(k_col),
            g(sweep.p),
            g(sweep.theta0),
            g(sweep.phi0),
        )?;
    }
    Ok(())
}
