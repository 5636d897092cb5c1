//! Classical kicked-top map on the unit sphere: iteration, phase portraits,
//! finite-difference Jacobians and stability-loss (bifurcation) scans.
//!
//! One kick period maps (X, Y, Z) by a rotation about y through angle p
//! followed by a torsion about z through angle k Z', where Z' is the
//! post-rotation Z. The trivial fixed points (0, +-1, 0) are invariant for
//! every (k, p).

use crate::error::{Error, Result};
use crate::scalar::{r, Real};
use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// Point on the classical unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalPoint<T: Real> {
    x: T,
    y: T,
    z: T,
}

impl<T: Real> ClassicalPoint<T> {
    /// From Cartesian components; rejects points off the sphere by more than
    /// 1e-9 and renormalizes the remainder exactly onto it.
    pub fn from_xyz(x: T, y: T, z: T) -> Result<Self> {
        for (v, name) in [(x, "X"), (y, "Y"), (z, "Z")] {
            if !v.is_finite() {
                return Err(Error::NonFinite { name });
            }
        }
        let n = (x * x + y * y + z * z).sqrt();
        let dev = (n - T::one()).abs();
        if dev > T::tol(1e-9) {
            return Err(Error::OffSphere {
                deviation: dev.to_f64().unwrap(),
            });
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// From polar angle theta in [0, pi] and azimuth phi.
    pub fn from_angles(theta: T, phi: T) -> Self {
        Self {
            x: theta.sin() * phi.cos(),
            y: theta.sin() * phi.sin(),
            z: theta.cos(),
        }
    }

    pub fn x(&self) -> T {
        self.x
    }
    pub fn y(&self) -> T {
        self.y
    }
    pub fn z(&self) -> T {
        self.z
    }

    /// Polar angle in [0, pi].
    pub fn theta(&self) -> T {
        self.z.clamp(-T::one(), T::one()).acos()
    }

    /// Azimuth wrapped to (-pi, pi].
    pub fn phi(&self) -> T {
        let mut f = self.y.atan2(self.x);
        if f <= -T::pi() {
            f += T::two_pi();
        }
        f
    }

    fn norm_deviation(&self) -> T {
        ((self.x * self.x + self.y * self.y + self.z * self.z).sqrt() - T::one()).abs()
    }
}

/// One application of the kicked-top map, renormalized onto the sphere.
pub fn map_step<T: Real>(pt: &ClassicalPoint<T>, k: T, p: T) -> Result<ClassicalPoint<T>> {
    if !k.is_finite() {
        return Err(Error::NonFinite { name: "k" });
    }
    if !p.is_finite() {
        return Err(Error::NonFinite { name: "p" });
    }
    let dev = pt.norm_deviation();
    if dev > T::tol(1e-9) {
        return Err(Error::OffSphere {
            deviation: dev.to_f64().unwrap(),
        });
    }
    let (sp, cp) = (p.sin(), p.cos());
    let rx = pt.x * cp + pt.z * sp;
    let a = k * (pt.z * cp - pt.x * sp);
    let (sa, ca) = (a.sin(), a.cos());
    let x = rx * ca - pt.y * sa;
    let y = rx * sa + pt.y * ca;
    let z = -pt.x * sp + pt.z * cp;
    let n = (x * x + y * y + z * z).sqrt();
    Ok(ClassicalPoint {
        x: x / n,
        y: y / n,
        z: z / n,
    })
}

/// `n` applications of the map.
pub fn iterate<T: Real>(
    pt: &ClassicalPoint<T>,
    k: T,
    p: T,
    n: usize,
) -> Result<ClassicalPoint<T>> {
    let mut q = *pt;
    for _ in 0..n {
        q = map_step(&q, k, p)?;
    }
    Ok(q)
}

/// A single trajectory of the classical map.
#[derive(Clone, Debug)]
pub struct OrbitRecord<T: Real> {
    pub points: Vec<ClassicalPoint<T>>,
    pub k: T,
    pub p: T,
}

/// Initial-condition layout for phase portraits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedLayout {
    /// Regular theta-phi lattice (midpoint placement, poles avoided).
    Grid,
    /// Uniform random points on the sphere from the given seed.
    Random,
}

/// Iterate `n_seeds` initial points for `n_steps` kicks each.
///
/// The RNG seed only matters for [`SeedLayout::Random`]; the grid layout is
/// fully deterministic.
pub fn phase_portrait<T: Real>(
    k: T,
    p: T,
    n_seeds: usize,
    n_steps: usize,
    layout: SeedLayout,
    rng_seed: u64,
) -> Result<Vec<OrbitRecord<T>>> {
    if n_seeds < 1 {
        return Err(Error::EmptyGrid { name: "n_seeds" });
    }
    let seeds: Vec<ClassicalPoint<T>> = match layout {
        SeedLayout::Grid => {
            let n_phi = ((2.0 * n_seeds as f64).sqrt().ceil() as usize).max(1);
            let n_theta = n_seeds.div_ceil(n_phi);
            let mut pts = Vec::with_capacity(n_seeds);
            'outer: for it in 0..n_theta {
                for ip in 0..n_phi {
                    let theta = T::pi() * r::<T>((it as f64 + 0.5) / n_theta as f64);
                    let phi =
                        -T::pi() + T::two_pi() * r::<T>((ip as f64 + 0.5) / n_phi as f64);
                    pts.push(ClassicalPoint::from_angles(theta, phi));
                    if pts.len() == n_seeds {
                        break 'outer;
                    }
                }
            }
            pts
        }
        SeedLayout::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            (0..n_seeds)
                .map(|_| {
                    let z = r::<T>(rng.gen_range(-1.0..=1.0));
                    let phi =
                        r::<T>(rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI));
                    let s = (T::one() - z * z).sqrt();
                    ClassicalPoint {
                        x: s * phi.cos(),
                        y: s * phi.sin(),
                        z,
                    }
                })
                .collect()
        }
    };

    seeds
        .into_iter()
        .map(|seed| {
            let mut points = Vec::with_capacity(n_steps + 1);
            points.push(seed);
            let mut q = seed;
            for _ in 0..n_steps {
                q = map_step(&q, k, p)?;
                points.push(q);
            }
            Ok(OrbitRecord { points, k, p })
        })
        .collect()
}

/// CSV writer for phase portraits: `orbit_id,step,theta,phi`.
pub fn write_portrait_csv<T: Real, W: Write>(
    orbits: &[OrbitRecord<T>],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "orbit_id,step,theta,phi")?;
    for (id, orbit) in orbits.iter().enumerate() {
        for (step, pt) in orbit.points.iter().enumerate() {
            writeln!(
                out,
                "{id},{step},{},{}",
                crate::numfmt::sig12(pt.theta().to_f64().unwrap()),
                crate::numfmt::sig12(pt.phi().to_f64().unwrap()),
            )?;
        }
    }
    Ok(())
}

fn wrap_angle<T: Real>(mut a: T) -> T {
    while a > T::pi() {
        a -= T::two_pi();
    }
    while a <= -T::pi() {
        a += T::two_pi();
    }
    a
}

const FD_STEP: f64 = 1e-6;

/// Central-difference Jacobian of the iterated map in the raw (theta, phi)
/// angles; used internally by the Newton cycle refinement.
fn fd_jacobian_angles<T: Real>(
    pt: &ClassicalPoint<T>,
    k: T,
    p: T,
    period: usize,
) -> Result<(Matrix2<T>, T, T)> {
    let sin_in = pt.theta().sin();
    if sin_in <= T::tol(1e-8) {
        return Err(Error::PolarSingularity {
            sin_theta: sin_in.to_f64().unwrap(),
        });
    }
    let h = T::tol(FD_STEP);
    let theta = pt.theta();
    let phi = pt.phi();
    let eval = |t: T, f: T| -> Result<(T, T)> {
        let q = iterate(&ClassicalPoint::from_angles(t, f), k, p, period)?;
        Ok((q.theta(), q.phi()))
    };
    let mut jac = Matrix2::zeros();
    for (col, (dt, df)) in [(h, T::zero()), (T::zero(), h)].into_iter().enumerate() {
        let (tp, fp) = eval(theta + dt, phi + df)?;
        let (tm, fm) = eval(theta - dt, phi - df)?;
        let two_h = r::<T>(2.0) * h;
        jac[(0, col)] = (tp - tm) / two_h;
        jac[(1, col)] = wrap_angle(fp - fm) / two_h;
    }
    let out = iterate(pt, k, p, period)?;
    Ok((jac, sin_in, out.theta().sin()))
}

/// Jacobian of the `period`-fold iterated map, from central finite
/// differences in (theta, phi) with step 1e-6 and expressed in the
/// canonical area-preserving chart (cos theta, phi), so its determinant is
/// 1 up to finite-difference error. At a periodic point the chart factors
/// cancel and the eigenvalues are the cycle multipliers.
pub fn iterated_jacobian<T: Real>(
    pt: &ClassicalPoint<T>,
    k: T,
    p: T,
    period: usize,
) -> Result<Matrix2<T>> {
    let (jac, sin_in, sin_out) = fd_jacobian_angles(pt, k, p, period)?;
    if sin_out <= T::tol(1e-8) {
        return Err(Error::PolarSingularity {
            sin_theta: sin_out.to_f64().unwrap(),
        });
    }
    // diag(-sin theta_out, 1) * J_angles * diag(-sin theta_in, 1)^-1
    let mut out = jac;
    out[(0, 0)] *= sin_out / sin_in;
    out[(0, 1)] *= -sin_out;
    out[(1, 0)] /= -sin_in;
    Ok(out)
}

/// Jacobian of a single map application (see [`iterated_jacobian`]).
pub fn jacobian<T: Real>(pt: &ClassicalPoint<T>, k: T, p: T) -> Result<Matrix2<T>> {
    iterated_jacobian(pt, k, p, 1)
}

/// Largest eigenvalue modulus of a real 2x2 matrix.
pub fn max_multiplier<T: Real>(m: &Matrix2<T>) -> T {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = tr * tr - r::<T>(4.0) * det;
    if disc >= T::zero() {
        let s = disc.sqrt();
        let two = r::<T>(2.0);
        ((tr + s) / two).abs().max(((tr - s) / two).abs())
    } else {
        det.abs().sqrt()
    }
}

const CYCLE_TOL: f64 = 1e-10;

/// Damped Newton refinement of a periodic point of the `period`-th iterate,
/// seeded from `seed`; converges to the cycle nearest the seed.
pub fn refine_cycle<T: Real>(
    seed: &ClassicalPoint<T>,
    period: usize,
    k: T,
    p: T,
) -> Result<ClassicalPoint<T>> {
    let tol = T::tol(CYCLE_TOL);
    let mut x = Vector2::new(seed.theta(), seed.phi());
    let residual = |v: &Vector2<T>| -> Result<Vector2<T>> {
        let q = iterate(&ClassicalPoint::from_angles(v[0], v[1]), k, p, period)?;
        Ok(Vector2::new(q.theta() - v[0], wrap_angle(q.phi() - v[1])))
    };
    let mut f = residual(&x)?;
    for _ in 0..60 {
        if f.norm() < tol {
            return Ok(ClassicalPoint::from_angles(x[0], x[1]));
        }
        let pt = ClassicalPoint::from_angles(x[0], x[1]);
        let (m, _, _) = fd_jacobian_angles(&pt, k, p, period)?;
        let a = m - Matrix2::identity();
        let delta = a.lu().solve(&(-f)).ok_or_else(|| Error::CycleNotConverged {
            k: k.to_f64().unwrap(),
            residual: f.norm().to_f64().unwrap(),
        })?;
        let mut lambda = T::one();
        let mut advanced = false;
        for _ in 0..10 {
            let xn = x + delta * lambda;
            let fn_ = residual(&xn)?;
            if fn_.norm() < f.norm() {
                x = xn;
                f = fn_;
                advanced = true;
                break;
            }
            lambda /= r::<T>(2.0);
        }
        if !advanced {
            break;
        }
    }
    if f.norm() < T::tol(1e-8) {
        return Ok(ClassicalPoint::from_angles(x[0], x[1]));
    }
    Err(Error::CycleNotConverged {
        k: k.to_f64().unwrap(),
        residual: f.norm().to_f64().unwrap(),
    })
}

const INSTABILITY_THRESHOLD: f64 = 1e-6;

/// Scan kick strengths for the loss of stability of a periodic cycle.
///
/// The cycle seeded by `cycle_point` is tracked in k by Newton refinement;
/// the scan returns the first k at which the largest monodromy-eigenvalue
/// modulus of the `period`-th iterate exceeds 1 + 1e-6, bisected to
/// |dk| < 1e-4. Returns [`Error::NoStabilityLoss`] when the cycle stays
/// stable over the whole range.
pub fn stability_scan<T: Real>(
    cycle_point: &ClassicalPoint<T>,
    period: usize,
    p: T,
    k_range: (T, T),
    dk: T,
) -> Result<T> {
    let (k_lo, k_hi) = k_range;
    if !(k_lo < k_hi) || dk <= T::zero() {
        return Err(Error::EmptyGrid { name: "k_range" });
    }
    let threshold = T::one() + T::tol(INSTABILITY_THRESHOLD);
    let multiplier_at = |seed: &ClassicalPoint<T>, k: T| -> Result<(ClassicalPoint<T>, T)> {
        let cyc = refine_cycle(seed, period, k, p)?;
        let m = iterated_jacobian(&cyc, k, p, period)?;
        Ok((cyc, max_multiplier(&m)))
    };

    let mut seed = *cycle_point;
    let mut k = k_lo;
    let mut prev: Option<(T, ClassicalPoint<T>)> = None;
    loop {
        let (cyc, mu) = multiplier_at(&seed, k)?;
        if mu > threshold {
            let (mut lo, mut lo_seed) = match prev {
                Some((pk, ps)) => (pk, ps),
                None => {
                    return Err(Error::OutOfRange {
                        name: "k_range",
                        value: k_lo.to_f64().unwrap(),
                        range: "cycle already unstable at the lower end",
                    })
                }
            };
            let mut hi = k;
            while hi - lo > T::tol(1e-4) {
                let mid = (lo + hi) / r::<T>(2.0);
                let (cm, mm) = multiplier_at(&lo_seed, mid)?;
                if mm > threshold {
                    hi = mid;
                } else {
                    lo = mid;
                    lo_seed = cm;
                }
            }
            return Ok((lo + hi) / r::<T>(2.0));
        }
        prev = Some((k, cyc));
        seed = cyc;
        if k >= k_hi {
            return Err(Error::NoStabilityLoss {
                k_lo: k_lo.to_f64().unwrap(),
                k_hi: k_hi.to_f64().unwrap(),
            });
        }
        k = (k + dk).min(k_hi);
    }
}

/// One of the pair of period-1 points born at k = 2 for p = pi/2, located
/// from its closed-form seed (X = sqrt((1 - 4/k^2)/2), Y = X cot(kX/2),
/// Z = -X) and Newton-refined. Requires k > 2.
pub fn period_one_family_point<T: Real>(k: T) -> Result<ClassicalPoint<T>> {
    let two = r::<T>(2.0);
    if k <= two {
        return Err(Error::OutOfRange {
            name: "k",
            value: k.to_f64().unwrap(),
            range: "(2, inf)",
        });
    }
    let x = ((T::one() - r::<T>(4.0) / (k * k)) / two).sqrt();
    let half = k * x / two;
    let y = x * half.cos() / half.sin();
    let n = (x * x + y * y + x * x).sqrt();
    let seed = ClassicalPoint {
        x: x / n,
        y: y / n,
        z: -x / n,
    };
    refine_cycle(&seed, 1, k, T::pi() / two)
}
