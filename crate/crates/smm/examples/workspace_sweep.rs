//! Sweep random task poses of the 7DOF arm, search the manifold components
//! of each, and histogram the component and usable-component counts — the
//! shape of a workspace-characterization study.
//!
//! ```bash
//! cargo run --release -p smm --example workspace_sweep
//! ```

use smm::chain::builtin;
use smm::ik::IkConfig;
use smm::ivp::IntegratorConfig;
use smm::search::{histogram, workspace_sweep};

fn main() {
    let (model, task) = builtin("arm7").unwrap();
    let cfg = IntegratorConfig::default();
    let ik = IkConfig::default();
    let poses = 25;
    let restarts = 30;

    let t0 = std::time::Instant::now();
    let result = workspace_sweep(&model, &task, poses, restarts, &ik, &cfg, 7).unwrap();
    println!(
        "{} poses swept with {} IK restarts each in {:?} ({} failures)",
        result.rows.len(),
        restarts,
        t0.elapsed(),
        result.failures.len()
    );

    println!("components  occurrences");
    for (count, occ) in histogram(result.rows.iter().map(|r| r.component_count)) {
        println!("{count:>10}  {occ}");
    }
    println!("usable      occurrences");
    for (count, occ) in histogram(result.rows.iter().map(|r| r.usable_count)) {
        println!("{count:>10}  {occ}");
    }
    let flagged = result.rows.iter().filter(|r| r.near_singular).count();
    println!("near-singular poses flagged: {flagged}");
}
