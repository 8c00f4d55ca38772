//! Self-motion manifolds of prismatic-jointed systems: a planar PRR arm
//! whose carriage slides along x, and the 6DOF arm mounted on a y-axis rail.
//! The tracer needs no modification; the prismatic coordinate simply sweeps
//! while the end-effector pose stays put.
//!
//! ```bash
//! cargo run --release -p smm --example prismatic_systems
//! ```

use nalgebra::DVector;
use smm::chain::builtin;
use smm::ivp::{seed_residual, solve_smm_ivp, IntegratorConfig};
use smm::kinematics::fk;

fn report(model: &smm::chain::ChainModel, task: &smm::chain::TaskSpec, q0: &DVector<f64>) {
    let cfg = IntegratorConfig::default();
    let pose0 = fk(model, q0).unwrap();
    let trace = solve_smm_ivp(model, task, q0, &cfg).unwrap();
    let err = trace
        .samples
        .iter()
        .map(|q| seed_residual(model, task, q, &pose0).unwrap())
        .fold(0.0f64, f64::max);
    let rail: Vec<f64> = trace.samples.iter().map(|q| q[0]).collect();
    let (lo, hi) = rail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    println!(
        "  closed={} steps={} max task error={err:.3e} prismatic range=[{lo:.3}, {hi:.3}] m",
        trace.closed,
        trace.samples.len() - 1
    );
}

fn main() {
    let (prr, prr_task) = builtin("PRR").unwrap();
    println!("PRR, seed (-1/2, 0, pi/4):");
    report(&prr, &prr_task, &DVector::from_column_slice(&[-0.5, 0.0, std::f64::consts::FRAC_PI_4]));
    println!("PRR, seed (-1/2, pi/4, -pi/2):");
    report(
        &prr,
        &prr_task,
        &DVector::from_column_slice(&[
            -0.5,
            std::f64::consts::FRAC_PI_4,
            -std::f64::consts::FRAC_PI_2,
        ]),
    );

    let (rail6, rail_task) = builtin("rail6").unwrap();
    println!("rail6 (6DOF arm on a y-axis rail), SE(3) pose task:");
    report(
        &rail6,
        &rail_task,
        &DVector::from_column_slice(&[0.2, 0.3, -0.5, 0.4, -0.6, 0.5, 0.3]),
    );
}
