use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use screwkit::commands::{self, ArticulatedArgs, TaskArgs};
use screwkit_core::motion::StepBounds;

#[derive(Parser)]
#[command(name = "screwkit", version, about = "Screw-based analysis and replay of demonstrated motions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Test a trajectory for a single constant screw and report its parameters.
    /// Exit status: 0 screw, 2 not a constant screw, 3 no motion.
    Extract {
        traj: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        eps_p: f64,
        #[arg(long, default_value_t = 0.1)]
        eps_phi: f64,
        /// Print a JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Split a trajectory into constant-screw segments.
    Segment {
        traj: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        eps_p: f64,
        #[arg(long, default_value_t = 0.15)]
        eps_phi: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Replay a screw (from a screw file or a one-screw demonstration) with a new magnitude.
    PlanArticulated {
        input: PathBuf,
        /// Pose file or `x,y,z,qw,qx,qy,qz`; defaults to the demonstration's first pose.
        #[arg(long)]
        start: Option<String>,
        /// Radians (or meters for prismatic screws); append `deg` for degrees.
        #[arg(long, allow_hyphen_values = true)]
        magnitude: String,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0.01)]
        eps_p: f64,
        #[arg(long, default_value_t = 0.1)]
        eps_phi: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Plan a multi-step task for a new object arrangement.
    PlanTask {
        demo: PathBuf,
        old_scene: PathBuf,
        new_scene: PathBuf,
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        goal: Option<String>,
        #[arg(long, default_value_t = 0.01)]
        eps_p: f64,
        #[arg(long, default_value_t = 0.15)]
        eps_phi: f64,
        /// Largest per-step translation (m).
        #[arg(long, default_value_t = 0.005)]
        max_translation: f64,
        /// Largest per-step rotation (rad).
        #[arg(long, default_value_t = 0.02)]
        max_rotation: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic demonstration and its ground-truth segmentation.
    Synth {
        spec: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Ground-truth output; defaults to `<out stem>.truth.json`.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Check a trajectory file for unit quaternions, finite values and increasing timestamps.
    Validate { traj: PathBuf },
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Extract { traj, eps_p, eps_phi, json } => {
            commands::extract(&traj, &commands::tolerance(eps_p, eps_phi)?, json)
        }
        Cmd::Segment { traj, eps_p, eps_phi, out } => {
            commands::segment(&traj, &commands::tolerance(eps_p, eps_phi)?, out.as_deref())
        }
        Cmd::PlanArticulated { input, start, magnitude, steps, eps_p, eps_phi, out } => {
            commands::plan_articulated(&ArticulatedArgs {
                input,
                start,
                magnitude,
                steps,
                tol: commands::tolerance(eps_p, eps_phi)?,
                out,
            })
        }
        Cmd::PlanTask { demo, old_scene, new_scene, start, goal, eps_p, eps_phi, max_translation, max_rotation, out } => {
            commands::plan_task(&TaskArgs {
                demo,
                old_scene,
                new_scene,
                start,
                goal,
                tol: commands::tolerance(eps_p, eps_phi)?,
                step: StepBounds { max_translation, max_rotation },
                out,
            })
        }
        Cmd::Synth { spec, out, truth } => {
            let seed = match std::env::var("SCREWKIT_SEED") {
                Ok(s) => Some(s.trim().parse::<u64>().context("SCREWKIT_SEED")?),
                Err(_) => None,
            };
            commands::synth(&spec, &out, truth.as_deref(), seed)
        }
        Cmd::Validate { traj } => commands::validate(&traj),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
