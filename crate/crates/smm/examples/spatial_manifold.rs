//! Trace the self-motion manifold of the 7DOF arm holding a full SE(3) pose,
//! and report the per-sample pose-error series the accuracy plots are built
//! from.
//!
//! ```bash
//! cargo run --release -p smm --example spatial_manifold
//! ```

use nalgebra::DVector;
use smm::chain::builtin;
use smm::ivp::{seed_residual, solve_smm_ivp, IntegratorConfig};
use smm::kinematics::fk;

fn main() {
    let (model, task) = builtin("arm7").unwrap();
    let cfg = IntegratorConfig::default();
    let q0 = DVector::from_column_slice(&[0.43, 1.113, 5.098, 1.035, 2.348, 0.418, 4.468]);

    let trace = solve_smm_ivp(&model, &task, &q0, &cfg).unwrap();
    let pose0 = fk(&model, &q0).unwrap();
    let errors: Vec<f64> = trace
        .samples
        .iter()
        .map(|q| seed_residual(&model, &task, q, &pose0).unwrap())
        .collect();
    let max_err = errors.iter().cloned().fold(0.0, f64::max);

    println!("7DOF SE(3) self-motion manifold");
    println!("  closed: {} after {} steps", trace.closed, trace.samples.len() - 1);
    println!("  arc length: {:.3}", trace.arc_length());
    println!("  max pose error along the trace: {max_err:.3e}");
    println!("  error series (every 20th sample):");
    for (i, e) in errors.iter().enumerate().step_by(20) {
        println!("    {i:>4}  {e:.3e}");
    }
}
