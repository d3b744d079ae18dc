use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dcm::project::{
    cmd_aggregate, cmd_assess, cmd_sweep, cmd_validate, Project, ProjectConfig, ProjectError,
    RunOverrides, Weighting, CONFIG_ENV, DEFAULT_PRIOR,
};

#[derive(Parser)]
#[command(name = "dcm", version, about = "Stance-based Bayesian assessment from indicator evidence")]
struct Cli {
    /// Project file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Indicator realizations per stance.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// exact or sampled.
    #[arg(long)]
    mode: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> RunOverrides {
        RunOverrides {
            n_runs: self.runs,
            seed: self.seed,
            mode: self.mode.clone(),
            out: self.out.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check every project file; exit 1 on errors.
    Validate,
    /// Posterior summaries per stance for one system.
    Assess {
        #[arg(long)]
        system: String,
        /// Stance name or file stem; repeatable. Default: all.
        #[arg(long)]
        stance: Vec<String>,
        #[arg(long, default_value = DEFAULT_PRIOR)]
        prior: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Weighted pool of stance posteriors for one system.
    Aggregate {
        #[arg(long)]
        system: String,
        #[arg(long)]
        stance: Vec<String>,
        #[arg(long, default_value = DEFAULT_PRIOR)]
        prior: String,
        /// equal, ratings, or a path to a ratings file.
        #[arg(long, default_value = "equal")]
        weights: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Grid over systems, stances and priors.
    Sweep {
        /// Repeatable. Default: every surveyed system.
        #[arg(long)]
        system: Vec<String>,
        #[arg(long)]
        stance: Vec<String>,
        /// Repeatable. Default: all presets.
        #[arg(long)]
        prior: Vec<String>,
        /// Also run the coarse-grained variant and compare.
        #[arg(long)]
        coarse: bool,
        #[command(flatten)]
        run: RunArgs,
    },
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_UNCONVERGED: u8 = 3;

fn fail(e: &ProjectError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn convergence(unconverged: usize) -> ExitCode {
    if unconverged > 0 {
        eprintln!("warning: {unconverged} sampled runs did not converge");
        ExitCode::from(EXIT_UNCONVERGED)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(config_path) = cli.config else {
        eprintln!("error: no project file (use --config or set {CONFIG_ENV})");
        return ExitCode::from(EXIT_RUNTIME);
    };
    let config = match ProjectConfig::load(&config_path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };

    if let Command::Validate = cli.command {
        let report = cmd_validate(&config);
        for d in &report.diagnostics {
            println!("{d}");
        }
        let errors = report.errors().count();
        println!(
            "{} stances checked, {errors} errors, {} warnings",
            report.stances_checked,
            report.warnings().count()
        );
        return if errors == 0 {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(EXIT_VALIDATION)
        };
    }

    let project = match Project::load(config) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    match cli.command {
        Command::Validate => unreachable!(),
        Command::Assess { system, stance, prior, run } => {
            match cmd_assess(&project, &system, &stance, &prior, &run.overrides()) {
                Ok(out) => {
                    for s in &out.summaries {
                        println!("{:<40} median {:.4}  [{:.4}, {:.4}]", s.provenance.stance, s.median, s.q05, s.q95);
                    }
                    report_written(&out.written);
                    convergence(out.unconverged())
                }
                Err(e) => fail(&e),
            }
        }
        Command::Aggregate { system, stance, prior, weights, run } => {
            let weighting = Weighting::parse(&weights);
            match cmd_aggregate(&project, &system, &stance, &prior, &weighting, &run.overrides()) {
                Ok(out) => {
                    let a = &out.aggregate;
                    println!(
                        "aggregate median {:.4}  mean {:.4}  [{:.4}, {:.4}]  weighted median {:.4}",
                        a.summary.median, a.summary.mean, a.summary.q05, a.summary.q95, a.weighted_median
                    );
                    report_written(&out.written);
                    convergence(a.summary.unconverged)
                }
                Err(e) => fail(&e),
            }
        }
        Command::Sweep { system, stance, prior, coarse, run } => {
            match cmd_sweep(&project, &system, &stance, &prior, coarse, &run.overrides()) {
                Ok(out) => {
                    println!("{} cells", out.base.cells.len());
                    if let Some(r) = &out.ordinal {
                        println!("{} ordinal violations, {} ties", r.violations.len(), r.ties.len());
                    }
                    report_written(&out.written);
                    convergence(out.unconverged())
                }
                Err(e) => fail(&e),
            }
        }
    }
}
