//! Exhaustive component search on a planar RRR arm: build the elbow-toggle
//! seed set, trace a component per unrepresented seed, and validate the
//! result by checking that 100 fresh randomly initialized IK solutions all
//! land on the found components.
//!
//! ```bash
//! cargo run --release -p smm --example component_search
//! ```

use nalgebra::DVector;
use smm::chain::{builtin, TaskSpec};
use smm::ik::{random_restart_seeds, toggle_seeds_rrr, IkConfig};
use smm::ivp::IntegratorConfig;
use smm::kinematics::fk;
use smm::search::{point_to_set_distance, search_components, usable_components};

fn main() {
    let (model, _) = builtin("RRR-0.9-0.8").unwrap();
    let task = TaskSpec::planar_position();
    let cfg = IntegratorConfig::default();

    let poses: [(&str, [f64; 3]); 2] = [
        ("near-boundary pose", [-35.0, 40.0, 15.0]),
        ("deep-interior pose", [-170.0, 150.0, 70.0]),
    ];
    for (label, q0_deg) in poses {
        let q0 = DVector::from_column_slice(&q0_deg.map(f64::to_radians));
        let pose = fk(&model, &q0).unwrap();
        println!(
            "{label}: q0 = {q0_deg:?} deg, |p| = {:.3}",
            pose.translation.vector.norm()
        );

        let seeds = toggle_seeds_rrr(&model, &q0).unwrap();
        let set = search_components(&model, &task, &seeds, &cfg).unwrap();
        println!(
            "  components: {} ({} usable), seeds absorbed by the distance test: {}",
            set.components.len(),
            usable_components(&set, &model).len(),
            set.seeds_rejected.len()
        );
        for (i, trace) in set.components.iter().enumerate() {
            println!(
                "    component {i}: {} samples, arc {:.2} rad, {:?}",
                trace.samples.len(),
                trace.arc_length(),
                trace.termination
            );
        }

        // Validation: every fresh IK solution must lie within one step of a
        // found component.
        let ik = IkConfig::default().with_seed(555);
        let fresh = random_restart_seeds(&model, &task, &pose, 120, &ik).unwrap();
        let max_d = fresh
            .configs
            .iter()
            .take(100)
            .map(|q| {
                set.components
                    .iter()
                    .map(|t| point_to_set_distance(&model, q, t).unwrap())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max);
        println!(
            "  validation: max distance of 100 fresh IK solutions to the components: {max_d:.4} (step h = {})",
            cfg.h
        );
    }
}
