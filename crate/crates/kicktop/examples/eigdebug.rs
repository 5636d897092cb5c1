// timing scratch
use kicktop::dynamics::time_averaged_correlations;
use kicktop::spin::{AngularBasis, SpinQuantumNumber};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let basis = AngularBasis::<f64>::new(SpinQuantumNumber::from_twice_j(800).unwrap());
    println!("AngularBasis d=801: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let rot = basis.rotation_y(1.7);
    println!("rotation assembly d=801: {:?} (unitarity {:.2e})", t0.elapsed(), kicktop::linalg::unitarity_residual(&rot));

    let j = SpinQuantumNumber::from_twice_j(240).unwrap();
    let t0 = Instant::now();
    let avg = time_averaged_correlations(j, 10.0, 1.7, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2, 1000).unwrap();
    println!("j=120 T=1000 cell: {:?}  D={:.4} DG={:.4} Q={:.4}", t0.elapsed(), avg.d_mean, avg.dg_mean, avg.q_mean);

    let j50 = SpinQuantumNumber::from_twice_j(100).unwrap();
    let t0 = Instant::now();
    let avg = time_averaged_correlations(j50, 10.0, 1.7, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2, 1000).unwrap();
    println!("j=50 T=1000 cell: {:?}  D={:.4} DG={:.4} Q={:.4}", t0.elapsed(), avg.d_mean, avg.dg_mean, avg.q_mean);
}
