//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the measured numbers (run with `--nocapture` to see
//! them). Tolerances are pinned here, not configurable.

use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use smm::chain::{builtin, ChainModel, Frame, TaskSpec, TwistRow};
use smm::error::Error;
use smm::ik::{random_restart_seeds, toggle_seeds_rrr, IkConfig, SeedSet};
use smm::induced::{induced_residual, make_induced_task};
use smm::ivp::{
    regularized_field, rk_step, seed_residual, solve_smm_ivp, update_reference, IntegratorConfig,
    Termination, Trace,
};
use smm::kinematics::{fk, jacobian, JointConfig};
use smm::nullspace::task_jacobian;
use smm::search::{point_to_set_distance, search_components, usable_components, workspace_sweep};

fn deg(d: f64) -> f64 {
    d.to_radians()
}

fn sample_in_limits(model: &ChainModel, rng: &mut impl Rng) -> JointConfig {
    DVector::from_iterator(
        model.n(),
        model.joints.iter().map(|j| rng.random_range(j.limits[0]..=j.limits[1])),
    )
}

/// Max FK-position drift over all trace samples, relative to fk(q0).
fn max_position_drift(model: &ChainModel, trace: &Trace, q0: &JointConfig) -> f64 {
    let p0 = fk(model, q0).unwrap().translation.vector;
    trace
        .samples
        .iter()
        .map(|q| (fk(model, q).unwrap().translation.vector - p0).norm())
        .fold(0.0, f64::max)
}

/// Max task residual (pose-error rows norm) over all samples.
fn max_task_error(model: &ChainModel, task: &TaskSpec, trace: &Trace, q0: &JointConfig) -> f64 {
    let pose0 = fk(model, q0).unwrap();
    trace
        .samples
        .iter()
        .map(|q| seed_residual(model, task, q, &pose0).unwrap())
        .fold(0.0, f64::max)
}

/// Collect exactly `count` converged IK solutions from consecutive restart
/// streams of a fixed seed.
fn fresh_ik_solutions(
    model: &ChainModel,
    task: &TaskSpec,
    pose: &smm::kinematics::Pose,
    count: usize,
    seed: u64,
) -> Vec<JointConfig> {
    let mut configs = Vec::new();
    let mut batch_start = 0usize;
    while configs.len() < count {
        let cfg = IkConfig::default().with_seed(seed.wrapping_add(batch_start as u64));
        let got = random_restart_seeds(model, task, pose, count, &cfg).expect("IK restarts");
        configs.extend(got.configs);
        batch_start += 1;
        assert!(batch_start < 10, "IK convergence rate unexpectedly low");
    }
    configs.truncate(count);
    configs
}

#[test]
fn criterion_1_rrr_closed_trace_drift() {
    let (model, task) = builtin("RRR").unwrap();
    let cfg = IntegratorConfig::default();
    let seeds = [
        DVector::from_column_slice(&[
            -std::f64::consts::FRAC_PI_3,
            std::f64::consts::FRAC_PI_2,
            5.0 * std::f64::consts::PI / 6.0,
        ]),
        DVector::from_column_slice(&[
            -5.0 * std::f64::consts::PI / 11.0,
            -2.0 * std::f64::consts::PI / 3.0,
            std::f64::consts::PI / 7.0,
        ]),
    ];
    let mut ok = true;
    for (i, q0) in seeds.iter().enumerate() {
        let t0 = Instant::now();
        let trace = solve_smm_ivp(&model, &task, q0, &cfg).unwrap();
        let elapsed = t0.elapsed();
        let drift = max_position_drift(&model, &trace, q0);
        let pass = trace.closed && drift <= 1e-9 && elapsed.as_secs_f64() < 1.0;
        ok &= pass;
        println!(
            "criterion 1 seed {i}: closed={} drift={drift:.3e} (<=1e-9) time={elapsed:?} (<1s) -> {}",
            trace.closed,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    assert!(ok, "criterion 1 failed");
}

#[test]
fn criterion_2_spatial_drift_ten_random_seeds() {
    let (model, task) = builtin("arm7").unwrap();
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let q0 = sample_in_limits(&model, &mut rng);
        let trace = solve_smm_ivp(&model, &task, &q0, &cfg).unwrap();
        worst = worst.max(max_task_error(&model, &task, &trace, &q0));
    }
    let elapsed = t0.elapsed();
    let pass = worst <= 1e-8 && elapsed.as_secs_f64() < 30.0;
    println!(
        "criterion 2: worst pose error {worst:.3e} (<=1e-8) over 10 traces, time={elapsed:?} (<30s) -> {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion 2 failed: worst={worst:.3e}, time={elapsed:?}");
}

/// Sample a reachable planar target in a radius band, solve IK for it, and
/// count self-motion components from the elbow-toggle seed set.
fn count_components_at_radius(
    model: &ChainModel,
    task: &TaskSpec,
    radius: f64,
    angle: f64,
    cfg: &IntegratorConfig,
    ik_seed: u64,
) -> usize {
    let target = nalgebra::Isometry3::translation(radius * angle.cos(), radius * angle.sin(), 0.0);
    let ik = IkConfig::default().with_seed(ik_seed);
    let seeds = random_restart_seeds(model, task, &target, 20, &ik).expect("IK for band pose");
    // Toggle seeds need a non-straight elbow; try IK solutions until one
    // toggles cleanly.
    for q0 in &seeds.configs {
        match toggle_seeds_rrr(model, q0) {
            Ok(toggles) => {
                let set = search_components(model, task, &toggles, cfg).expect("search");
                return set.components.len();
            }
            Err(Error::DegenerateToggle) => continue,
            Err(e) => panic!("unexpected toggle error: {e}"),
        }
    }
    panic!("no IK solution admitted elbow toggling at radius {radius}");
}

#[test]
fn criterion_3_component_dichotomy_as_stated() {
    // Expected counts per the stated dichotomy: inside radius l0+l1 = 1.9
    // exactly one component, outside exactly two. See the ledger: dense
    // independent IK clustering shows the true counts are 2 for radii in
    // (0, 0.7) u (0.9, 1.1) and 1 for (0.7, 0.9) u (1.1, 2.7), so this
    // criterion documents a known defect and is expected to fail; the
    // companion oracle test below verifies the implementation itself.
    let (model, _) = builtin("RRR-0.9-0.8").unwrap();
    let task = TaskSpec::planar_position();
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut band_a = Vec::new();
    let mut band_b = Vec::new();
    for i in 0..20 {
        let r = rng.random_range(0.1..1.8);
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        band_a.push(count_components_at_radius(&model, &task, r, th, &cfg, 100 + i));
    }
    for i in 0..20 {
        let r = rng.random_range(2.0..2.6);
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        band_b.push(count_components_at_radius(&model, &task, r, th, &cfg, 200 + i));
    }
    let a_ok = band_a.iter().all(|&c| c == 1);
    let b_ok = band_b.iter().all(|&c| c == 2);
    println!(
        "criterion 3: band |p|<1.8 counts {band_a:?} (want all 1), band 2.0<|p|<2.6 counts {band_b:?} (want all 2) -> {}",
        if a_ok && b_ok { "PASS" } else { "FAIL" }
    );
    assert!(
        a_ok && b_ok,
        "criterion 3 failed: the stated dichotomy is inverted relative to the \
         true component structure (see companion oracle test and the notes)"
    );
}

/// Exact component count of the self-motion set of a planar 3R chain at a
/// target point, by brute-force enumeration: sweep the absolute angle of the
/// last link over a fine grid, solve the proximal 2R subchain analytically
/// (two elbow branches per feasible angle), and join branches wherever the
/// subchain straightens or folds. Pure trigonometry, independent of the
/// tracer, the Jacobian code, and the IK solver.
fn enumerate_components_planar_3r(lengths: [f64; 3], p: [f64; 2], grid: usize) -> usize {
    let [l0, l1, l2] = lengths;
    let tau = std::f64::consts::TAU;
    let mut feasible = vec![false; grid];
    let mut coincident = vec![false; grid];
    for (i, (f, co)) in feasible.iter_mut().zip(coincident.iter_mut()).enumerate() {
        let a3 = tau * i as f64 / grid as f64;
        let p2 = [p[0] - l2 * a3.cos(), p[1] - l2 * a3.sin()];
        let d2 = p2[0] * p2[0] + p2[1] * p2[1];
        let c2 = (d2 - l0 * l0 - l1 * l1) / (2.0 * l0 * l1);
        if c2.abs() <= 1.0 {
            *f = true;
            *co = 1.0 - c2.abs() < 1e-12;
        }
    }
    // Union-find over (grid index, elbow branch).
    let n = 2 * grid;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    };
    #[allow(clippy::needless_range_loop)] // wraparound neighbor indexing
    for i in 0..grid {
        let j = (i + 1) % grid;
        // Each branch is continuous in the sweep angle wherever feasible.
        if feasible[i] && feasible[j] {
            union(&mut parent, 2 * i, 2 * j);
            union(&mut parent, 2 * i + 1, 2 * j + 1);
        }
        // At a feasibility boundary the subchain straightens or folds and
        // the two branches meet.
        if feasible[i] && !feasible[j] {
            union(&mut parent, 2 * i, 2 * i + 1);
        }
        if !feasible[i] && feasible[j] {
            union(&mut parent, 2 * j, 2 * j + 1);
        }
        // An interior grid point landing exactly on a straightening also
        // joins the branches.
        if feasible[i] && coincident[i] {
            union(&mut parent, 2 * i, 2 * i + 1);
        }
    }
    let mut roots = std::collections::HashSet::new();
    for (i, &ok) in feasible.iter().enumerate() {
        if ok {
            roots.insert(find(&mut parent, 2 * i));
            roots.insert(find(&mut parent, 2 * i + 1));
        }
    }
    roots.len()
}

/// Companion to criterion 3 (not itself a criterion): the component search
/// agrees with the brute-force enumeration oracle. Radii near the transition
/// circles (0.7, 0.9, 1.1, 2.7 for lengths 1, 0.9, 0.8) are excluded, as
/// component counts change exactly there.
#[test]
fn criterion_3_companion_search_matches_enumeration_oracle() {
    let (model, _) = builtin("RRR-0.9-0.8").unwrap();
    let task = TaskSpec::planar_position();
    let cfg = IntegratorConfig::default();
    let radii = [0.3, 0.55, 0.8, 1.0, 1.3, 1.6, 2.1, 2.45];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut all_ok = true;
    for (i, &r) in radii.iter().enumerate() {
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        let searched = count_components_at_radius(&model, &task, r, th, &cfg, 300 + i as u64);
        let expected = enumerate_components_planar_3r(
            [1.0, 0.9, 0.8],
            [r * th.cos(), r * th.sin()],
            4096,
        );
        let ok = searched == expected;
        all_ok &= ok;
        println!(
            "  radius {r}: search={searched} oracle={expected} -> {}",
            if ok { "ok" } else { "MISMATCH" }
        );
    }
    println!(
        "criterion 3 companion: search agrees with enumeration oracle -> {}",
        if all_ok { "PASS" } else { "FAIL" }
    );
    assert!(all_ok);
}

#[test]
fn criterion_4_ik_solutions_lie_on_found_components() {
    let (model, _) = builtin("RRR-0.9-0.8").unwrap();
    let task = TaskSpec::planar_position();
    let cfg = IntegratorConfig::default();
    let mut ok = true;
    for (label, q0) in [
        ("(-35,40,15)deg", DVector::from_column_slice(&[deg(-35.0), deg(40.0), deg(15.0)])),
        ("(-170,150,70)deg", DVector::from_column_slice(&[deg(-170.0), deg(150.0), deg(70.0)])),
    ] {
        let seeds = toggle_seeds_rrr(&model, &q0).unwrap();
        let set = search_components(&model, &task, &seeds, &cfg).unwrap();
        let pose = fk(&model, &q0).unwrap();
        let fresh = fresh_ik_solutions(&model, &task, &pose, 100, 555);
        let max_d = fresh
            .iter()
            .map(|q| {
                set.components
                    .iter()
                    .map(|t| point_to_set_distance(&model, q, t).unwrap())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        let pass = max_d < cfg.h;
        ok &= pass;
        println!(
            "criterion 4 {label}: {} components, max distance of 100 IK solutions {max_d:.4} (<{}) -> {}",
            set.components.len(),
            cfg.h,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    assert!(ok, "criterion 4 failed");
}

#[test]
fn criterion_5_induced_redundancy_accuracy() {
    // 6DOF arm, yaw symmetry in the tool frame, ten random seeds.
    let (arm6, yaw_task) = builtin("arm6").unwrap();
    let yaw = match &yaw_task {
        TaskSpec::Induced(t) => t.clone(),
        _ => unreachable!(),
    };
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_delta: f64 = 0.0;
    let mut worst_gamma: f64 = 0.0;
    for _ in 0..10 {
        let q0 = sample_in_limits(&arm6, &mut rng);
        let pose0 = fk(&arm6, &q0).unwrap();
        let trace = solve_smm_ivp(&arm6, &yaw_task, &q0, &cfg).unwrap();
        for q in &trace.samples {
            let r = induced_residual(&pose0, &fk(&arm6, q).unwrap(), &yaw);
            worst_delta = worst_delta.max(r.position);
            worst_gamma = worst_gamma.max(r.angular);
        }
    }
    let arm_ok = worst_delta <= 1e-7 && worst_gamma <= 1e-7;
    println!(
        "criterion 5 arm6: worst delta={worst_delta:.3e} gamma={worst_gamma:.3e} (<=1e-7) -> {}",
        if arm_ok { "PASS" } else { "FAIL" }
    );

    // RR on a line, both redundancy directions.
    let (rr, _) = builtin("RR").unwrap();
    let q0 = DVector::from_column_slice(&[0.0, std::f64::consts::FRAC_PI_3]);
    let mut rr_ok = true;
    for (label, u) in [("u0=(1,0.5)", [1.0, 0.5]), ("u1=(-0.5,1)", [-0.5, 1.0])] {
        let task = TaskSpec::Induced(
            make_induced_task(&u, &[TwistRow::Vx, TwistRow::Vy], Frame::Base).unwrap(),
        );
        let line = match &task {
            TaskSpec::Induced(t) => t.clone(),
            _ => unreachable!(),
        };
        let pose0 = fk(&rr, &q0).unwrap();
        let trace = solve_smm_ivp(&rr, &task, &q0, &cfg).unwrap();
        let perp = trace
            .samples
            .iter()
            .map(|q| induced_residual(&pose0, &fk(&rr, q).unwrap(), &line).position)
            .fold(0.0, f64::max);
        let pass = perp <= 1e-7;
        rr_ok &= pass;
        println!(
            "criterion 5 RR {label}: max perpendicular deviation {perp:.3e} (<=1e-7) -> {}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    assert!(arm_ok && rr_ok, "criterion 5 failed");
}

#[test]
fn criterion_6_prismatic_systems() {
    let cfg = IntegratorConfig::default();
    let (prr, prr_task) = builtin("PRR").unwrap();
    let mut ok = true;
    for (label, qv) in [
        ("(-1/2,0,pi/4)", vec![-0.5, 0.0, std::f64::consts::FRAC_PI_4]),
        ("(-1/2,pi/4,-pi/2)", vec![-0.5, std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_2]),
    ] {
        let q0 = DVector::from_column_slice(&qv);
        let trace = solve_smm_ivp(&prr, &prr_task, &q0, &cfg).unwrap();
        let drift = max_position_drift(&prr, &trace, &q0);
        let rail: Vec<f64> = trace.samples.iter().map(|q| q[0]).collect();
        let span = rail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - rail.iter().cloned().fold(f64::INFINITY, f64::min);
        let pass = trace.closed && drift <= 1e-9 && span > 1e-3;
        ok &= pass;
        println!(
            "criterion 6 PRR {label}: closed={} drift={drift:.3e} (<=1e-9) joint0 span={span:.3} -> {}",
            trace.closed,
            if pass { "PASS" } else { "FAIL" }
        );
    }

    let (rail6, rail_task) = builtin("rail6").unwrap();
    let q0 = DVector::from_column_slice(&[0.2, 0.3, -0.5, 0.4, -0.6, 0.5, 0.3]);
    let trace = solve_smm_ivp(&rail6, &rail_task, &q0, &cfg).unwrap();
    let err = max_task_error(&rail6, &rail_task, &trace, &q0);
    let rail: Vec<f64> = trace.samples.iter().map(|q| q[0]).collect();
    let span = rail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - rail.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = trace.closed && err <= 1e-8 && span > 1e-3;
    ok &= pass;
    println!(
        "criterion 6 rail6: closed={} pose error={err:.3e} (<=1e-8) rail span={span:.3} -> {}",
        trace.closed,
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion 6 failed");
}

#[test]
fn criterion_7_field_invariants() {
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut evals = 0usize;
    let mut kernel_ok = true;
    let mut unit_ok = true;
    while evals < 1000 {
        for (model, task) in smm::chain::builtin_models() {
            let q = sample_in_limits(&model, &mut rng);
            let reference = match update_reference(&model, &task, &q, None) {
                Ok(r) => r,
                Err(_) => continue, // rank-deficient sample, not a field point
            };
            let (g, _) = regularized_field(&model, &task, &q, &reference).unwrap();
            let jac = jacobian(&model, &q, task.frame()).unwrap();
            let jt = task_jacobian(&jac, &task).unwrap();
            kernel_ok &= (&jt * &g).norm() <= 1e-10 * jt.norm();
            unit_ok &= (g.norm() - 1.0).abs() <= 1e-12;
            evals += 1;
        }
    }
    println!(
        "criterion 7: {evals} field evaluations, kernel annihilation -> {}, unit speed -> {}",
        if kernel_ok { "PASS" } else { "FAIL" },
        if unit_ok { "PASS" } else { "FAIL" }
    );

    // Directional continuity along full traces of three representative cases.
    let mut cont_ok = true;
    let traces: Vec<(&str, Trace)> = vec![
        {
            let (m, t) = builtin("RRR").unwrap();
            let q0 = DVector::from_column_slice(&[
                -std::f64::consts::FRAC_PI_3,
                std::f64::consts::FRAC_PI_2,
                5.0 * std::f64::consts::PI / 6.0,
            ]);
            ("RRR", solve_smm_ivp(&m, &t, &q0, &cfg).unwrap())
        },
        {
            let (m, t) = builtin("PRR").unwrap();
            let q0 = DVector::from_column_slice(&[-0.5, 0.0, std::f64::consts::FRAC_PI_4]);
            ("PRR", solve_smm_ivp(&m, &t, &q0, &cfg).unwrap())
        },
        {
            let (m, t) = builtin("arm6").unwrap();
            #[allow(clippy::approx_constant)] // a specific configuration, not pi
            let q0 = DVector::from_column_slice(&[0.0, 0.379, -1.17, -3.142, 0.779, 1.571]);
            ("arm6", solve_smm_ivp(&m, &t, &q0, &cfg).unwrap())
        },
    ];
    for (name, trace) in &traces {
        let ok = trace.refs.windows(2).all(|w| w[0].dot(&w[1]) > 0.0);
        cont_ok &= ok;
        println!("  directional continuity on {name}: {}", if ok { "ok" } else { "VIOLATED" });
    }

    // Projection idempotence for 100 random directions.
    let mut proj_ok = true;
    for _ in 0..100 {
        let u: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        if u.iter().map(|v| v * v).sum::<f64>() < 1e-12 {
            continue;
        }
        let t = make_induced_task(&u, &TwistRow::ALL, Frame::Base).unwrap();
        let p = &t.projection;
        let err = (p * p - p.clone()).amax();
        proj_ok &= err <= 1e-13;
    }
    println!(
        "criterion 7: P^2 = P within 1e-13 for 100 random directions -> {}",
        if proj_ok { "PASS" } else { "FAIL" }
    );
    assert!(kernel_ok && unit_ok && cont_ok && proj_ok, "criterion 7 failed");
}

#[test]
fn criterion_8_workspace_sweep_substitute() {
    let (model, task) = builtin("arm7").unwrap();
    let cfg = IntegratorConfig::default();
    let ik = IkConfig::default();
    let t0 = Instant::now();
    let first = workspace_sweep(&model, &task, 50, 30, &ik, &cfg, 7).unwrap();
    let second = workspace_sweep(&model, &task, 50, 30, &ik, &cfg, 7).unwrap();
    let elapsed = t0.elapsed();

    let complete = first.rows.len() == 50 && first.failures.is_empty();
    let deterministic = first.rows.len() == second.rows.len()
        && first.rows.iter().zip(second.rows.iter()).all(|(a, b)| {
            a.component_count == b.component_count
                && a.usable_count == b.usable_count
                && a.near_singular == b.near_singular
                && a.position == b.position
                && a.rpy == b.rpy
        });
    let bound_ok = first
        .rows
        .iter()
        .filter(|r| !r.near_singular)
        .all(|r| r.component_count <= 16);
    let time_ok = elapsed.as_secs_f64() < 600.0;
    let hist = smm::search::histogram(first.rows.iter().map(|r| r.component_count));
    println!(
        "criterion 8: complete={complete} deterministic={deterministic} counts<=16={bound_ok} \
         time={elapsed:?} (<10min) histogram={hist:?} -> {}",
        if complete && deterministic && bound_ok && time_ok { "PASS" } else { "FAIL" }
    );
    assert!(complete && deterministic && bound_ok && time_ok, "criterion 8 failed");
}

/// Slide a seed along the radial-line manifold of the RR case until one of
/// the integrator's samples lands inside the rank tolerance of the elbow-fold
/// junction the manifold passes through. Generic seeds step across that
/// junction without noticing (the regularized field is smooth through it), so
/// exercising the singular exit takes deliberate alignment.
fn thread_singular_seed(
    model: &ChainModel,
    task: &TaskSpec,
    q_base: &JointConfig,
    cfg: &IntegratorConfig,
) -> Option<JointConfig> {
    let ratios = |trace: &Trace| -> Vec<f64> {
        trace
            .samples
            .iter()
            .zip(trace.refs.iter())
            .map(|(q, r)| match regularized_field(model, task, q, r) {
                Ok((_, k)) => k.sigma_min / k.sigma_min.max(k.sigma_second).max(1e-300),
                Err(_) => 0.0,
            })
            .collect()
    };
    let base_trace = solve_smm_ivp(model, task, q_base, cfg).ok()?;
    let r = ratios(&base_trace);
    let (k_min, _) =
        r.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
    if k_min < 31 {
        return None;
    }
    let mut q0 = base_trace.samples[k_min - 30].clone();
    for _ in 0..10 {
        let trace = solve_smm_ivp(model, task, &q0, cfg).ok()?;
        if trace.termination == Termination::Singular {
            return Some(q0);
        }
        let r = ratios(&trace);
        let (k, _) = r.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
        if k == 0 || k + 1 >= r.len() {
            return None;
        }
        let delta = if r[k + 1] < r[k - 1] {
            r[k] * cfg.h / (r[k] + r[k + 1])
        } else {
            -(r[k - 1] * cfg.h / (r[k - 1] + r[k]))
        };
        let dir0 = update_reference(model, task, &q0, None).ok()?;
        let dir = if delta >= 0.0 { dir0 } else { -dir0 };
        let nudge = IntegratorConfig { h: delta.abs().max(1e-12), ..cfg.clone() };
        q0 = rk_step(model, task, &q0, &dir, &nudge).ok()?;
    }
    None
}

#[test]
fn criterion_9_error_taxonomy() {
    let cfg = IntegratorConfig::default();

    // Straightened arm: the kernel is two-dimensional at the seed.
    let (rrr, rrr_task) = builtin("RRR").unwrap();
    let err = solve_smm_ivp(&rrr, &rrr_task, &DVector::zeros(3), &cfg).unwrap_err();
    let a_ok = matches!(err, Error::SingularStart(_));
    println!(
        "criterion 9a: straightened-arm seed -> {err} -> {}",
        if a_ok { "PASS" } else { "FAIL" }
    );

    // RR induced line through the origin: the manifold passes through four
    // rank-deficient configurations (two elbow folds, two full extensions).
    let (rr, _) = builtin("RR").unwrap();
    let q_base = DVector::from_column_slice(&[0.0, std::f64::consts::FRAC_PI_3]);
    let p = fk(&rr, &q_base).unwrap().translation.vector;
    let task = TaskSpec::Induced(
        make_induced_task(&[p.x, p.y], &[TwistRow::Vx, TwistRow::Vy], Frame::Base).unwrap(),
    );

    // Generic seed: crossing those configurations must not crash.
    let generic = solve_smm_ivp(&rr, &task, &q_base, &cfg);
    let no_crash = generic.is_ok();
    println!(
        "criterion 9b: generic radial-line trace crosses 4 singular configurations, no crash -> {}",
        if no_crash { "PASS" } else { "FAIL" }
    );

    // Aligned seed: a sample lands inside the rank tolerance, the trace exits
    // mid-integration, and the result is an open bidirectional assembly.
    let threaded = thread_singular_seed(&rr, &task, &q_base, &cfg);
    let b_ok = match &threaded {
        Some(q0) => {
            let trace = solve_smm_ivp(&rr, &task, q0, &cfg).unwrap();
            let open = !trace.closed && trace.termination == Termination::Singular;
            // Bidirectional: the seed sits strictly inside the sample list.
            let pos = trace
                .samples
                .iter()
                .position(|q| rr.joint_distance(q, q0) < 1e-12)
                .unwrap_or(usize::MAX);
            let interior = pos > 0 && pos + 1 < trace.samples.len();
            // Both branches hold the line constraint.
            let line = match &task {
                TaskSpec::Induced(t) => t.clone(),
                _ => unreachable!(),
            };
            let pose0 = fk(&rr, q0).unwrap();
            let perp = trace
                .samples
                .iter()
                .map(|q| induced_residual(&pose0, &fk(&rr, q).unwrap(), &line).position)
                .fold(0.0, f64::max);
            println!(
                "criterion 9b: aligned seed -> termination={:?} closed={} seed index {pos} of {} \
                 samples, max deviation {perp:.3e} -> {}",
                trace.termination,
                trace.closed,
                trace.samples.len(),
                if open && interior { "PASS" } else { "FAIL" }
            );
            open && interior && perp < 1e-6
        }
        None => {
            println!("criterion 9b: could not align a sample with the junction -> FAIL");
            false
        }
    };
    assert!(a_ok && no_crash && b_ok, "criterion 9 failed");
}

/// Usable-component filtering feeds criterion 8's histograms; sanity-check it
/// against hand-tightened limits here so the sweep numbers stay meaningful.
#[test]
fn usable_component_filter_sanity() {
    let (model, _) = builtin("RRR-0.9-0.8").unwrap();
    let task = TaskSpec::planar_position();
    let cfg = IntegratorConfig::default();
    let q0 = DVector::from_column_slice(&[deg(-35.0), deg(40.0), deg(15.0)]);
    let seeds = toggle_seeds_rrr(&model, &q0).unwrap();
    let set = search_components(&model, &task, &seeds, &cfg).unwrap();
    assert_eq!(usable_components(&set, &model).len(), set.components.len());

    let mut clamped = model.clone();
    clamped.joints[0].limits = [3.10, 3.12];
    assert!(usable_components(&set, &clamped).len() < set.components.len());
}

/// The trace CSV machinery used by the file outputs must agree with the raw
/// trace: spot-check sample counts against a re-run (determinism).
#[test]
fn traces_are_reproducible() {
    let (model, task) = builtin("RRR").unwrap();
    let cfg = IntegratorConfig::default();
    let q0 = DVector::from_column_slice(&[
        -std::f64::consts::FRAC_PI_3,
        std::f64::consts::FRAC_PI_2,
        5.0 * std::f64::consts::PI / 6.0,
    ]);
    let a = solve_smm_ivp(&model, &task, &q0, &cfg).unwrap();
    let b = solve_smm_ivp(&model, &task, &q0, &cfg).unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    for (x, y) in a.samples.iter().zip(b.samples.iter()) {
        assert_eq!(x, y);
    }
}

/// Seeds that do not solve the shared pose are rejected by the search rather
/// than silently traced.
#[test]
fn search_rejects_invalid_seed_sets() {
    let (model, task) = builtin("RRR").unwrap();
    let cfg = IntegratorConfig::default();
    let q0 = DVector::from_column_slice(&[0.4, 0.9, -0.7]);
    let mut q_other = q0.clone();
    q_other[0] += 0.5; // different pose entirely
    let seeds = SeedSet { configs: vec![q0, q_other], failures: 0 };
    let set = search_components(&model, &task, &seeds, &cfg).unwrap();
    assert_eq!(set.components.len(), 1);
    assert_eq!(set.seeds_failed.len(), 1);
}
