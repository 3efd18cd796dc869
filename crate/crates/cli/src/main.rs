use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpkd::distill::QueryMode;
use dpkd::pipeline::{
    cmd_epsilon, cmd_evaluate, cmd_gen_data, cmd_label_aux, cmd_sweep, cmd_train_student, cmd_train_teacher,
    EvalTarget, RunConfig, SweepGrid, SWEEP_CSV_HEADER,
};
use dpkd::{Error, Result};

#[derive(Parser)]
#[command(
    name = "dpkd",
    version,
    about = "Private teacher, offline labels, released audio-only student"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set dp.sigma=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let mut cfg = base.with_overrides(&self.overrides)?;
        if let Some(dir) = &self.out_dir {
            cfg.out_dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
            cfg = cfg.with_overrides::<&str>(&[])?;
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalAs {
    /// Released student (audio-only networks only).
    Released,
    /// Teacher queried with a zero privileged vector.
    Audio,
    /// Teacher queried with the manifest's privileged vectors.
    Priv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate (or ingest) the dataset and write the recording-disjoint split.
    GenData(ConfigArgs),
    /// Train the DP teacher on the private split.
    TrainTeacher(ConfigArgs),
    /// Privacy budget of the subsampled Gaussian mechanism.
    Epsilon {
        #[arg(long, default_value_t = 0.0016)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 12500)]
        steps: u64,
        #[arg(long, default_value_t = 1e-5)]
        delta: f64,
        /// Also print the per-epoch ε curve as CSV for this many epochs.
        #[arg(long, default_value_t = 0)]
        curve_epochs: u64,
    },
    /// Query the teacher once on the auxiliary set.
    LabelAux(ConfigArgs),
    /// Distill the audio-only student from the auxiliary set and teacher probabilities.
    TrainStudent(ConfigArgs),
    /// Evaluate a checkpoint on a manifest.
    Evaluate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long = "as", value_enum, default_value = "released")]
        target: EvalAs,
    },
    /// Run the full pipeline over a grid and aggregate one CSV row per run.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// TOML grid with keys sigma, awdp, dsaf, n_aux, seeds.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_on_off)]
        awdp: Vec<bool>,
        #[arg(long, value_delimiter = ',', value_parser = parse_on_off)]
        dsaf: Vec<bool>,
        #[arg(long, value_delimiter = ',')]
        n_aux: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
}

fn parse_on_off(s: &str) -> std::result::Result<bool, String> {
    match s {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => Err(format!("expected on/off, got `{s}`")),
    }
}

fn replace_if_given<T>(axis: &mut Vec<T>, given: Vec<T>) {
    if !given.is_empty() {
        *axis = given;
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData(args) => {
            let cfg = args.load()?;
            let s = cmd_gen_data(&cfg)?;
            println!("priv class counts: {:?}", s.priv_counts);
            println!("aux class counts: {:?}", s.aux_counts);
            println!("test class counts: {:?}", s.test_counts);
        }
        Command::TrainTeacher(args) => {
            let cfg = args.load()?;
            let s = cmd_train_teacher(&cfg)?;
            println!("epoch,step,loss,probe_acc,epsilon");
            for r in &s.log {
                let eps = r.epsilon.map_or_else(|| "no DP".to_string(), |e| format!("{e:.6}"));
                println!("{},{},{:.6},{:.6},{}", r.epoch, r.step, r.loss, r.probe_acc, eps);
            }
            println!("teacher checkpoint sha256: {}", s.checkpoint_hash);
            println!("{}", serde_json::to_string(&s.ledger)?);
        }
        Command::Epsilon {
            q,
            sigma,
            steps,
            delta,
            curve_epochs,
        } => {
            let (spent, curve) = cmd_epsilon(q, sigma, steps, delta, curve_epochs)?;
            println!("{spent}");
            if !curve.is_empty() {
                println!("epoch,epsilon");
                for (i, e) in curve.iter().enumerate() {
                    println!("{i},{e:.6}");
                }
            }
        }
        Command::LabelAux(args) => {
            let cfg = args.load()?;
            let probs = cmd_label_aux(&cfg)?;
            println!(
                "labeled {} auxiliary examples ({:?}) with teacher {}",
                probs.rows.len(),
                probs.mode,
                probs.teacher_hash
            );
        }
        Command::TrainStudent(args) => {
            let cfg = args.load()?;
            let s = cmd_train_student(&cfg)?;
            println!("final loss {:.6}", s.final_loss);
            println!("student checkpoint sha256: {}", s.checkpoint_hash);
        }
        Command::Evaluate {
            cfg,
            checkpoint,
            manifest,
            target,
        } => {
            let cfg = cfg.load()?;
            let target = match target {
                EvalAs::Released => EvalTarget::Released,
                EvalAs::Audio => EvalTarget::Teacher(QueryMode::AudioOnly),
                EvalAs::Priv => EvalTarget::Teacher(QueryMode::Privileged),
            };
            let report = cmd_evaluate(&cfg, &checkpoint, &manifest, target)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Sweep {
            cfg,
            grid,
            sigma,
            awdp,
            dsaf,
            n_aux,
            seeds,
        } => {
            let cfg = cfg.load()?;
            let mut g = match grid {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    toml::from_str(&text)?
                }
                None => SweepGrid::point(&cfg),
            };
            replace_if_given(&mut g.sigma, sigma);
            replace_if_given(&mut g.awdp, awdp);
            replace_if_given(&mut g.dsaf, dsaf);
            replace_if_given(&mut g.n_aux, n_aux);
            replace_if_given(&mut g.seeds, seeds);
            println!("{SWEEP_CSV_HEADER}");
            cmd_sweep(&cfg, &g, |row| println!("{row}"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
