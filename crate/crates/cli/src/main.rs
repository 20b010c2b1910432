//! Command-line surface for the redundant-platform analysis library.
//!
//! Outputs are machine-readable (JSON by default, CSV for the field) and
//! byte-identical for identical inputs and seeds. Exit codes: 0 success,
//! 1 infeasible plan, 2 input error, 3 internal structure violation.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use octasg::kinematics::{self, Configuration, Pose};
use octasg::planner::{
    detect_crossings, make_path, plan_g_profile, singularity_field, PlanOutcome, PlanParams,
};
use octasg::redundant_legs::{BuildParams, RedundantOctahedron};
use octasg::singularity::{
    classify_orientation, recover_sigma, sample_row_pose, Branch, DEFAULT_ROW_MATCH_TOL,
    DEFAULT_UNAVOIDABLE_TOL,
};

mod wire;

use wire::{ConfigDto, PoseDto};

#[derive(Parser)]
#[command(
    name = "octasg",
    about = "Kinematics, singularity analysis and base-reconfiguration planning \
             for a kinematically redundant octahedral Stewart-Gough platform",
    version
)]
struct Cli {
    /// Seed for commands that draw random samples.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for field evaluation (default: rayon's choice).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct MotionArgs {
    /// Start pose, inline JSON {"e":[e0,e1,e2,e3],"s":[x,y,z]} or @file.
    #[arg(long)]
    start: String,
    /// End pose, same format.
    #[arg(long)]
    end: String,
    /// Number of motion samples.
    #[arg(long, default_value_t = 41)]
    ntau: usize,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.5)]
    gmin: f64,
    #[arg(long, default_value_t = 2.0)]
    gmax: f64,
    /// Number of g samples.
    #[arg(long, default_value_t = 31)]
    ng: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Inverse kinematics: the six leg lengths of a configuration.
    Ik {
        /// Configuration, inline JSON {"e":[..],"s":[..],"g":..} or @file.
        #[arg(long)]
        config: String,
    },
    /// Self-motion screw: platform motion with legs locked and unit
    /// base-reconfiguration rate.
    Selfmotion {
        #[arg(long)]
        config: String,
    },
    /// Unavoidable-singularity strata of an orientation.
    Classify {
        /// Pose or bare orientation {"e":[e0,e1,e2,e3]} (translation ignored).
        #[arg(long)]
        pose: String,
        /// Residual tolerance for matching a table row.
        #[arg(long, default_value_t = DEFAULT_ROW_MATCH_TOL)]
        tol: f64,
    },
    /// Recovered quadratic coefficients of det/g³ at a pose, with the
    /// unavoidability verdict.
    Sigma {
        #[arg(long)]
        pose: String,
        /// Unavoidability tolerance on the normalized coefficients.
        #[arg(long, default_value_t = DEFAULT_UNAVOIDABLE_TOL)]
        tol: f64,
    },
    /// Margin/clearance field over a motion and a g range.
    Field {
        #[command(flatten)]
        motion: MotionArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Singularity crossings along a motion at fixed g.
    Crossings {
        #[command(flatten)]
        motion: MotionArgs,
        /// Base circumradius held fixed.
        #[arg(long)]
        g: f64,
    },
    /// Plan a reconfiguration profile g(tau) along a motion.
    Plan {
        #[command(flatten)]
        motion: MotionArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Minimum |margin| for a feasible cell.
        #[arg(long = "tol-det", default_value_t = 1e-4)]
        tol_det: f64,
        /// Minimum leg clearance for a feasible cell.
        #[arg(long = "tol-clear", default_value_t = 0.02)]
        tol_clear: f64,
        /// Maximum |Δg| between consecutive columns.
        #[arg(long = "rate-bound", default_value_t = 0.1)]
        rate_bound: f64,
    },
    /// Rail-position sweep of the sliding-leg platform variant.
    SlidingLegs {
        /// Pose to test: "start", "quarter-turn", or inline JSON/@file.
        #[arg(long, default_value = "quarter-turn")]
        pose: String,
        #[arg(long = "grid-n", default_value_t = 11)]
        grid_n: usize,
        /// Platform height of the construction.
        #[arg(long, default_value_t = 1.0)]
        height: f64,
        /// Rail half-length of the construction.
        #[arg(long = "half-length", default_value_t = 0.5)]
        half_length: f64,
    },
    /// Draw sample poses from a classification-table row.
    Sample {
        /// Table row, 1..=22.
        #[arg(long)]
        row: u8,
        /// Sign branch for rows that carry one: + or -.
        #[arg(long)]
        branch: Option<String>,
        /// Number of samples.
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
}

enum Failure {
    /// Malformed or invalid input: exit 2.
    Input(String),
    /// Internal structure violation: exit 3.
    Structure(String),
}

impl From<octasg::Error> for Failure {
    fn from(e: octasg::Error) -> Self {
        match e {
            octasg::Error::StructureViolation { .. } => Failure::Structure(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn read_arg(raw: &str) -> Result<String, Failure> {
    if let Some(path) = raw.strip_prefix('@') {
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {path}: {e}")))
    } else {
        Ok(raw.to_string())
    }
}

fn parse_pose(raw: &str) -> Result<Pose, Failure> {
    let text = read_arg(raw)?;
    let dto: PoseDto =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("bad pose JSON: {e}")))?;
    dto.into_pose().map_err(Failure::Input)
}

fn parse_config(raw: &str) -> Result<Configuration, Failure> {
    let text = read_arg(raw)?;
    let dto: ConfigDto = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("bad configuration JSON: {e}")))?;
    dto.into_config().map_err(Failure::Input)
}

fn motion_path(motion: &MotionArgs) -> Result<octasg::MotionPath, Failure> {
    let start = parse_pose(&motion.start)?;
    let end = parse_pose(&motion.end)?;
    Ok(make_path(&start, &end, motion.ntau)?)
}

fn run(cli: &Cli) -> Result<(String, u8), Failure> {
    match &cli.command {
        Command::Ik { config } => {
            let cfg = parse_config(config)?;
            let lengths = kinematics::leg_lengths(&cfg)?;
            Ok((wire::lengths_json(&lengths), 0))
        }
        Command::Selfmotion { config } => {
            let cfg = parse_config(config)?;
            let screw = kinematics::self_motion_screw(&cfg)?;
            Ok((wire::screw_json(&screw), 0))
        }
        Command::Classify { pose, tol } => {
            if !tol.is_finite() || *tol <= 0.0 {
                return Err(Failure::Input("tolerance must be positive".into()));
            }
            let pose = parse_pose(pose)?;
            let strata = classify_orientation(&pose.orientation, *tol);
            Ok((wire::strata_json(&strata), 0))
        }
        Command::Sigma { pose, tol } => {
            if !tol.is_finite() || *tol <= 0.0 {
                return Err(Failure::Input("tolerance must be positive".into()));
            }
            let pose = parse_pose(pose)?;
            let coeffs = recover_sigma(&pose)?;
            Ok((wire::sigma_json(&coeffs, *tol), 0))
        }
        Command::Field {
            motion,
            grid,
            format,
        } => {
            let path = motion_path(motion)?;
            let field = singularity_field(&path, grid.gmin, grid.gmax, grid.ng)?;
            let text = match format {
                Format::Json => wire::field_json(&field),
                Format::Csv => wire::field_csv(&field),
            };
            Ok((text, 0))
        }
        Command::Crossings { motion, g } => {
            if !g.is_finite() || *g <= 0.0 {
                return Err(Failure::Input(format!("g must be positive, got {g}")));
            }
            let path = motion_path(motion)?;
            let taus = detect_crossings(&path, *g);
            Ok((wire::crossings_json(*g, &taus), 0))
        }
        Command::Plan {
            motion,
            grid,
            tol_det,
            tol_clear,
            rate_bound,
        } => {
            let path = motion_path(motion)?;
            let params = PlanParams {
                gmin: grid.gmin,
                gmax: grid.gmax,
                ng: grid.ng,
                eps_det: *tol_det,
                eps_clear: *tol_clear,
                rate_bound: *rate_bound,
            };
            match plan_g_profile(&path, &params)? {
                PlanOutcome::Profile(p) => Ok((wire::profile_json(&p), 0)),
                PlanOutcome::Failure(f) => Ok((wire::failure_json(&f), 1)),
            }
        }
        Command::SlidingLegs {
            pose,
            grid_n,
            height,
            half_length,
        } => {
            if !(height.is_finite() && *height > 0.0 && half_length.is_finite() && *half_length > 0.0) {
                return Err(Failure::Input(
                    "height and half-length must be positive".into(),
                ));
            }
            let mech = RedundantOctahedron::new(BuildParams {
                height: *height,
                half_length: *half_length,
                split_angle: 15f64.to_radians(),
            });
            let p = match pose.as_str() {
                "start" => mech.start_pose(),
                "quarter-turn" => mech.quarter_turn_pose(),
                other => parse_pose(other)?,
            };
            let sweep = mech.lambda_sweep(&p, *grid_n)?;
            Ok((wire::sweep_json(&p, &sweep), 0))
        }
        Command::Sample { row, branch, n } => {
            let branch = match branch.as_deref() {
                None => None,
                Some("+") => Some(Branch::Upper),
                Some("-") => Some(Branch::Lower),
                Some(other) => {
                    return Err(Failure::Input(format!("branch must be + or -, got {other}")))
                }
            };
            let needs_branch = matches!(row, 2 | 4..=12);
            if !(1..=22).contains(row) || branch.is_some() != needs_branch {
                return Err(Failure::Input(format!(
                    "row {row} with branch {b:?} is not a table stratum",
                    b = branch.map(Branch::symbol)
                )));
            }
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
            let poses: Vec<Pose> = (0..*n)
                .map(|_| sample_row_pose(*row, branch, &mut rng))
                .collect();
            Ok((wire::samples_json(*row, branch, &poses), 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized");
        }
    }
    match run(&cli) {
        Ok((text, code)) => {
            let emitted = if let Some(path) = &cli.out {
                fs::write(path, text.as_bytes()).map_err(|e| format!("cannot write {path}: {e}"))
            } else {
                println!("{text}");
                Ok(())
            };
            match emitted {
                Ok(()) => ExitCode::from(code),
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(2)
                }
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Structure(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
