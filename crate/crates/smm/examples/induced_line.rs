//! Induced redundancy on a non-redundant planar RR arm: constrain the
//! end-effector to a line instead of a point, turning the 2DOF arm on a
//! 1DOF task into a degree-1 redundant system. Two perpendicular line
//! directions are traced from the same seed.
//!
//! ```bash
//! cargo run --release -p smm --example induced_line
//! ```

use nalgebra::DVector;
use smm::chain::{builtin, Frame, TaskSpec, TwistRow};
use smm::induced::{induced_residual, make_induced_task};
use smm::ivp::{solve_smm_ivp, IntegratorConfig};
use smm::kinematics::fk;

fn main() {
    let (model, _) = builtin("RR").unwrap();
    let cfg = IntegratorConfig::default();
    let q0 = DVector::from_column_slice(&[0.0, std::f64::consts::FRAC_PI_3]);
    let pose0 = fk(&model, &q0).unwrap();
    println!(
        "seed q = (0, pi/3), end effector at ({:.3}, {:.3})",
        pose0.translation.x, pose0.translation.y
    );

    for (label, u) in [("u0 = (1, 0.5)", [1.0, 0.5]), ("u1 = (-0.5, 1)", [-0.5, 1.0])] {
        let induced =
            make_induced_task(&u, &[TwistRow::Vx, TwistRow::Vy], Frame::Base).unwrap();
        let task = TaskSpec::Induced(induced.clone());
        let trace = solve_smm_ivp(&model, &task, &q0, &cfg).unwrap();
        let perp = trace
            .samples
            .iter()
            .map(|q| induced_residual(&pose0, &fk(&model, q).unwrap(), &induced).position)
            .fold(0.0f64, f64::max);
        // How far the end effector actually travelled along the line.
        let dir = nalgebra::Vector2::new(u[0], u[1]).normalize();
        let mut t_min = f64::INFINITY;
        let mut t_max = f64::NEG_INFINITY;
        for q in &trace.samples {
            let p = fk(&model, q).unwrap().translation.vector;
            let t = (p.x - pose0.translation.x) * dir.x + (p.y - pose0.translation.y) * dir.y;
            t_min = t_min.min(t);
            t_max = t_max.max(t);
        }
        println!("{label}");
        println!(
            "  {} after {} steps ({:?})",
            if trace.closed { "closed" } else { "open" },
            trace.samples.len() - 1,
            trace.termination
        );
        println!("  line parameter range: [{t_min:.3}, {t_max:.3}] m");
        println!("  max perpendicular deviation from the line: {perp:.3e} m");
    }
}
