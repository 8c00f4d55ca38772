//! Trace the self-motion manifold of a planar RRR arm holding its
//! end-effector point fixed, for two qualitatively different seeds: a
//! deep-interior point whose manifold winds the base joint through a full
//! turn, and a near-boundary point with a simple closed loop.
//!
//! ```bash
//! cargo run --release -p smm --example planar_manifold
//! ```

use nalgebra::DVector;
use smm::chain::builtin;
use smm::ivp::{solve_smm_ivp, IntegratorConfig};
use smm::kinematics::fk;

fn main() {
    let (model, task) = builtin("RRR").unwrap();
    let cfg = IntegratorConfig::default();

    let seeds = [
        (
            "deep interior (-pi/3, pi/2, 5pi/6)",
            DVector::from_column_slice(&[
                -std::f64::consts::FRAC_PI_3,
                std::f64::consts::FRAC_PI_2,
                5.0 * std::f64::consts::PI / 6.0,
            ]),
        ),
        (
            "near boundary (-5pi/11, -2pi/3, pi/7)",
            DVector::from_column_slice(&[
                -5.0 * std::f64::consts::PI / 11.0,
                -2.0 * std::f64::consts::PI / 3.0,
                std::f64::consts::PI / 7.0,
            ]),
        ),
    ];

    for (label, q0) in seeds {
        let trace = solve_smm_ivp(&model, &task, &q0, &cfg).unwrap();
        let p0 = fk(&model, &q0).unwrap().translation.vector;
        let drift = trace
            .samples
            .iter()
            .map(|q| (fk(&model, q).unwrap().translation.vector - p0).norm())
            .fold(0.0f64, f64::max);
        let first = &trace.samples[0];
        let last = trace.samples.last().unwrap();
        let winding: Vec<f64> = (0..3).map(|i| last[i] - first[i]).collect();
        println!("{label}");
        println!("  closed: {} after {} steps", trace.closed, trace.samples.len() - 1);
        println!("  arc length: {:.3} rad", trace.arc_length());
        println!("  max end-effector drift: {drift:.3e} m");
        println!(
            "  net joint winding: [{:.3}, {:.3}, {:.3}]",
            winding[0], winding[1], winding[2]
        );
    }
}
