use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use smm::chain::Frame;
use smm::runs::{self, CommonArgs, Seeder, Target};
use smm::Error;

#[derive(Parser)]
#[command(name = "smm", version, about = "Trace self-motion manifolds of serial kinematic chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Builtin model name (RRR, RRR-0.9-0.8, RR, PRR, arm6, arm7, rail6) or
    /// a chain-file path.
    #[arg(long)]
    model: String,
    /// Integration step (joint-space arc length).
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
    /// Sampler seed for every random draw in the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Interpret --q and --target-rpy in degrees.
    #[arg(long, default_value_t = false)]
    deg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the manifold through a configuration or a target pose.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Seed configuration, comma-separated joint values.
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        /// Target position "x,y,z" (routed through IK).
        #[arg(long, allow_hyphen_values = true)]
        target_xyz: Option<String>,
        /// Target orientation "roll,pitch,yaw".
        #[arg(long, allow_hyphen_values = true)]
        target_rpy: Option<String>,
        /// IK restarts when seeding from a pose.
        #[arg(long, default_value_t = 30)]
        restarts: usize,
    },
    /// Trace an induced-redundancy manifold.
    Induced {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        /// Redundancy direction, comma-separated (restricted-twist or full
        /// 6-twist coordinates).
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, value_parser = parse_frame)]
        frame: Option<Frame>,
    },
    /// Find all disconnected manifold components for one pose.
    Search {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        target_xyz: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        target_rpy: Option<String>,
        /// Seed constructor: "toggle" (planar 3R) or "restarts".
        #[arg(long, default_value = "restarts")]
        seeder: String,
        #[arg(long, default_value_t = 150)]
        restarts: usize,
        /// Draw this many fresh IK solutions and report their distance to the
        /// found components.
        #[arg(long)]
        validate: Option<usize>,
    },
    /// Sweep random task poses and histogram the component counts.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        poses: usize,
        #[arg(long, default_value_t = 30)]
        restarts: usize,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Solve IK for a pose with random restarts.
    Ik {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        target_xyz: String,
        #[arg(long, allow_hyphen_values = true)]
        target_rpy: Option<String>,
        #[arg(long, default_value_t = 150)]
        restarts: usize,
    },
}

fn parse_frame(s: &str) -> Result<Frame, String> {
    match s.to_ascii_lowercase().as_str() {
        "base" => Ok(Frame::Base),
        "tool" => Ok(Frame::Tool),
        other => Err(format!("unknown frame {other:?} (expected base or tool)")),
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("number {t:?}: {e}"))))
        .collect()
}

fn parse_vec3(s: &str) -> Result<[f64; 3], Error> {
    let v = parse_floats(s)?;
    if v.len() != 3 {
        return Err(Error::Parse(format!("expected 3 comma-separated values, got {}", v.len())));
    }
    Ok([v[0], v[1], v[2]])
}

fn to_radians(values: Vec<f64>, deg: bool) -> Vec<f64> {
    if deg {
        values.into_iter().map(f64::to_radians).collect()
    } else {
        values
    }
}

fn common_args(common: &Common) -> CommonArgs {
    CommonArgs {
        model: common.model.clone(),
        h: common.h,
        max_steps: common.max_steps,
        sampler_seed: common.seed,
        out_dir: common.out.clone(),
        argv: std::env::args().collect(),
    }
}

fn target_from(
    xyz: Option<String>,
    rpy: Option<String>,
    deg: bool,
) -> Result<Option<Target>, Error> {
    match xyz {
        None => {
            if rpy.is_some() {
                return Err(Error::Validation("--target-rpy requires --target-xyz".into()));
            }
            Ok(None)
        }
        Some(xyz) => {
            let xyz = parse_vec3(&xyz)?;
            let rpy = match rpy {
                Some(r) => {
                    let mut v = parse_vec3(&r)?;
                    if deg {
                        v = [v[0].to_radians(), v[1].to_radians(), v[2].to_radians()];
                    }
                    v
                }
                None => [0.0; 3],
            };
            Ok(Some(Target { xyz, rpy }))
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SingularStart(_) => 2,
        Error::InvalidSeed { .. } => 3,
        Error::Io(_) => 4,
        Error::DegenerateDirection => 5,
        Error::AllFailed { .. } => 6,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Trace { common, q, target_xyz, target_rpy, restarts } => {
            let args = common_args(&common);
            let q0 = q.map(|s| parse_floats(&s)).transpose()?.map(|v| to_radians(v, common.deg));
            let target = target_from(target_xyz, target_rpy, common.deg)?;
            let summary = runs::run_trace(&args, q0, target, restarts)?;
            println!(
                "trace: {} after {} steps (arc length {:.3}), max task error {:.3e}",
                match summary.termination {
                    smm::ivp::Termination::Closed => "closed",
                    smm::ivp::Termination::Singular => "open (singular)",
                    smm::ivp::Termination::StepLimit => "stopped (step limit)",
                },
                summary.steps,
                summary.arc_length,
                summary.max_error,
            );
            for path in &summary.outputs {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Induced { common, q, u, frame } => {
            let args = common_args(&common);
            let q0 = to_radians(parse_floats(&q)?, common.deg);
            let u = parse_floats(&u)?;
            let summary = runs::run_induced(&args, q0, u, frame)?;
            println!(
                "induced trace: {} after {} steps, max subspace deviation {:.3e}",
                match summary.termination {
                    smm::ivp::Termination::Closed => "closed",
                    smm::ivp::Termination::Singular => "open (singular)",
                    smm::ivp::Termination::StepLimit => "stopped (step limit)",
                },
                summary.steps,
                summary.max_error,
            );
            for path in &summary.outputs {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Search { common, q, target_xyz, target_rpy, seeder, restarts, validate } => {
            let args = common_args(&common);
            let q0 = q.map(|s| parse_floats(&s)).transpose()?.map(|v| to_radians(v, common.deg));
            let target = target_from(target_xyz, target_rpy, common.deg)?;
            let seeder = match seeder.as_str() {
                "toggle" => Seeder::Toggle,
                "restarts" => Seeder::Restarts(restarts),
                other => {
                    return Err(Error::Validation(format!(
                        "unknown seeder {other:?} (expected toggle or restarts)"
                    )))
                }
            };
            let summary = runs::run_search(&args, q0, target, seeder, validate)?;
            println!(
                "search: {} components ({} usable); seeds used {}, absorbed {}, failed {}",
                summary.component_count,
                summary.usable_count,
                summary.seeds_used,
                summary.seeds_rejected,
                summary.seeds_failed,
            );
            if let Some(d) = summary.validation_max_distance {
                println!("validation: max point-to-set distance {d:.3e}");
            }
            for path in &summary.outputs {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Sweep { common, poses, restarts, jobs } => {
            let args = common_args(&common);
            let summary = runs::run_sweep(&args, poses, restarts, jobs)?;
            println!("sweep: {} poses completed, {} failed", summary.completed, summary.failed);
            for path in &summary.outputs {
                println!("wrote {}", path.display());
            }
            if summary.completed * 10 < (summary.completed + summary.failed) * 9 {
                return Err(Error::Numerical("more than 10% of sweep poses failed".into()));
            }
            Ok(())
        }
        Command::Ik { common, target_xyz, target_rpy, restarts } => {
            let args = common_args(&common);
            let target = target_from(Some(target_xyz), target_rpy, common.deg)?
                .expect("target is present");
            let summary = runs::run_ik(&args, target, restarts)?;
            println!("ik: {} solutions ({} restarts failed)", summary.solutions, summary.failures);
            for path in &summary.outputs {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
