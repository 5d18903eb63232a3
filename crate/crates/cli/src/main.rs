//! `ppaas`: evaluate a perturbation pool on a CSV dataset and release the
//! best instance, or run single stages for debugging.
//!
//! Exit codes: 0 released / success, 2 threshold not met, 1 error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ppaas_core::attacks::{AttackSpec, DEFAULT_KNOWN_FRACTION, DEFAULT_RIDGE};
use ppaas_core::dataset::{load_csv, Dataset, LabelColumn};
use ppaas_core::fis::{load_fis_config, FisModel};
use ppaas_core::orchestrator::{rank_table_csv, release_loop, InstanceStatus};
use ppaas_core::perturbation::{PerturbedInstance, Perturbator, Provenance};
use ppaas_core::privacy_metric::DEFAULT_BIN_WIDTH;
use ppaas_core::resistance_metric::var_per_attribute;
use ppaas_core::synthetic;
use serde::Serialize;

use config::{FileConfig, Overrides};

const EXIT_MISS: u8 = 2;

#[derive(Parser)]
#[command(name = "ppaas", version, about = "Perturbation pool evaluation and release")]
struct Cli {
    /// Print per-stage progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pool, rank instances by fuzzy index and release the best one.
    Evaluate(EvaluateArgs),
    /// Perturb a dataset with a single algorithm.
    Perturb(PerturbArgs),
    /// Run one reconstruction attack against a perturbed file.
    Attack(AttackArgs),
    /// Fuzzy index of a manual (privacy, resistance, utility) triple.
    Fis(FisArgs),
    /// Write a seeded synthetic dataset.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Label column name or zero-based index (default: last column).
    #[arg(long)]
    label: Option<String>,
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "PPAAS_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    fi_threshold: Option<f64>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Perturbators, e.g. additive_noise,rotation,geometric,laplace_ldp
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pool: Option<Vec<String>>,
    /// Attacks, e.g. naive,known_io,ica
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    attacks: Option<Vec<String>>,
    /// Classifiers, e.g. knn,gaussian_nb,decision_tree
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    classifiers: Option<Vec<String>>,
    /// Histogram bin width for the privacy metric [default: 0.01]
    #[arg(long)]
    bin_width: Option<f64>,
    /// Fraction of original records known to the known-I/O attacker [default: 0.10]
    #[arg(long)]
    known_fraction: Option<f64>,
    /// FIS document overriding membership functions or rules.
    #[arg(long)]
    fis: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    AdditiveNoise,
    Rotation,
    Geometric,
    LaplaceLdp,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label: Option<String>,
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    bin_width: f64,
    /// Output CSV; a `.provenance.json` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "PPAAS_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackName {
    Naive,
    KnownIo,
    Ica,
}

#[derive(Args)]
struct AttackArgs {
    /// Perturbed CSV written by `perturb` (its provenance sidecar must sit next to it).
    #[arg(long)]
    input: PathBuf,
    /// Original (raw) CSV the perturbed file was derived from.
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    label: Option<String>,
    #[arg(long, value_enum)]
    attack: AttackName,
    #[arg(long, default_value_t = DEFAULT_KNOWN_FRACTION)]
    known_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "PPAAS_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FisArgs {
    #[arg(required_unless_present = "print_config")]
    privacy: Option<f64>,
    #[arg(required_unless_present = "print_config")]
    resistance: Option<f64>,
    #[arg(required_unless_present = "print_config")]
    utility: Option<f64>,
    /// FIS document to use instead of the default model.
    #[arg(long)]
    fis: Option<PathBuf>,
    /// Also print membership degrees and rule-output heights.
    #[arg(long)]
    trace: bool,
    /// Print the model as a FIS document and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Synthetic {
    Blobs,
    Wholesale,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Synthetic,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn label_column(label: &Option<String>) -> LabelColumn {
    match label {
        Some(l) => LabelColumn::parse(l),
        None => LabelColumn::Last,
    }
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("provenance.json")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn out_dir(dir: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn load_normalized(path: &Path, label: &Option<String>) -> Result<Dataset> {
    let raw = load_csv(path, &label_column(label)).with_context(|| format!("loading {}", path.display()))?;
    Ok(raw.zscore_normalize()?)
}

#[derive(Serialize)]
struct ReleaseSidecar<'a> {
    instance: &'a Provenance,
    run: &'a ppaas_core::orchestrator::RunProvenance,
    fi: f64,
}

fn cmd_evaluate(args: EvaluateArgs, verbose: bool) -> Result<u8> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        input: args.input,
        label: args.label,
        out_dir: args.out_dir,
        seed: args.seed,
        fi_threshold: args.fi_threshold,
        max_rounds: args.max_rounds,
        bin_width: args.bin_width,
        known_fraction: args.known_fraction,
        pool: args.pool,
        attacks: args.attacks,
        classifiers: args.classifiers,
        fis: args.fis,
    };
    let run = config::resolve(file, flags, PathBuf::from("."))?;
    let d = load_normalized(&run.input, &run.label)?;
    let dir = out_dir(&Some(run.out_dir.clone()))?;
    let released_csv = dir.join("released.csv");
    for stale in [released_csv.clone(), sidecar_path(&released_csv)] {
        if stale.exists() {
            fs::remove_file(&stale).with_context(|| format!("removing stale {}", stale.display()))?;
        }
    }
    if verbose {
        eprintln!(
            "dataset {} ({} x {}), pool {} x {} attacks x {} classifiers, config {}",
            d.id(),
            d.n_records(),
            d.n_attrs(),
            run.pool.perturbators.len(),
            run.pool.attacks.len(),
            run.pool.classifiers.len(),
            run.pool.hash()
        );
    }

    let outcome = release_loop(&d, &run.pool)?;
    let report = &outcome.report;
    write_file(&dir.join("report.json"), report.to_json()?.as_bytes())?;
    let table = rank_table_csv(report);
    write_file(&dir.join("rank_table.csv"), table.as_bytes())?;

    if verbose {
        for round in &report.rounds {
            for inst in &round.instances {
                match &inst.status {
                    InstanceStatus::Scored => eprintln!(
                        "round {} member {} {}: FI {:.4}",
                        round.round,
                        inst.index,
                        inst.perturbator.algorithm().name(),
                        inst.fi.unwrap_or(f64::NAN)
                    ),
                    InstanceStatus::Failed { stage, message } => eprintln!(
                        "round {} member {} {}: failed at {stage}: {message}",
                        round.round,
                        inst.index,
                        inst.perturbator.algorithm().name()
                    ),
                }
            }
        }
    }
    print!("{table}");

    match (outcome.released(), report.winner) {
        (Some(inst), Some(w)) => {
            write_file(&released_csv, &inst.to_csv_bytes())?;
            let sidecar = ReleaseSidecar {
                instance: &inst.provenance,
                run: &report.provenance,
                fi: w.fi,
            };
            write_file(&sidecar_path(&released_csv), serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
            println!(
                "released {} (round {}, FI {:.4} >= {})",
                inst.algorithm().name(),
                w.round,
                w.fi,
                report.fi_threshold
            );
            Ok(0)
        }
        _ => {
            let best = report.winner.map_or("none".to_string(), |w| format!("{:.4}", w.fi));
            println!(
                "not released: best FI {best} below threshold {} after {} rounds",
                report.fi_threshold, report.rounds_used
            );
            Ok(EXIT_MISS)
        }
    }
}

fn cmd_perturb(args: PerturbArgs) -> Result<u8> {
    let d = load_normalized(&args.input, &args.label)?;
    let name = match args.algo {
        Algo::AdditiveNoise => "additive_noise",
        Algo::Rotation => "rotation",
        Algo::Geometric => "geometric",
        Algo::LaplaceLdp => "laplace_ldp",
    };
    let mut p = Perturbator::from_name(name).expect("known algorithm");
    match &mut p {
        Perturbator::AdditiveNoise { sigma } => *sigma = args.sigma.unwrap_or(*sigma),
        Perturbator::Rotation { iterations } => *iterations = args.iterations.unwrap_or(*iterations),
        Perturbator::Geometric { iterations, sigma } => {
            *iterations = args.iterations.unwrap_or(*iterations);
            *sigma = args.sigma.unwrap_or(*sigma);
        }
        Perturbator::LaplaceLdp { epsilon } => *epsilon = args.epsilon.unwrap_or(*epsilon),
    }
    let inst = p.apply(&d, args.seed, args.bin_width)?;
    let out = match args.out {
        Some(o) => o,
        None => out_dir(&args.out_dir)?.join("perturbed.csv"),
    };
    write_file(&out, &inst.to_csv_bytes())?;
    write_file(&sidecar_path(&out), inst.provenance_json()?.as_bytes())?;
    println!("wrote {} ({} x {})", out.display(), inst.shape().0, inst.shape().1);
    Ok(0)
}

#[derive(Serialize)]
struct AttackSummary<'a> {
    attack: &'static str,
    perturbed: String,
    original: String,
    seed: u64,
    assumptions: &'a std::collections::BTreeMap<String, serde_json::Value>,
    attributes: Vec<String>,
    per_attribute_var: Vec<f64>,
    min_var: f64,
    min_std: f64,
}

fn cmd_attack(args: AttackArgs) -> Result<u8> {
    let original = load_normalized(&args.original, &args.label)?;
    let perturbed = load_csv(&args.input, &label_column(&args.label))
        .with_context(|| format!("loading {}", args.input.display()))?;
    let side = sidecar_path(&args.input);
    let provenance: Provenance = serde_json::from_str(
        &fs::read_to_string(&side).with_context(|| format!("reading provenance sidecar {}", side.display()))?,
    )
    .with_context(|| format!("parsing {}", side.display()))?;
    if perturbed.attr_names() != original.attr_names() {
        bail!("perturbed and original files have different attribute columns");
    }
    let p = PerturbedInstance::from_dataset(&perturbed, provenance);
    let spec = match args.attack {
        AttackName::Naive => AttackSpec::Naive,
        AttackName::KnownIo => AttackSpec::KnownIo {
            known_fraction: args.known_fraction,
            ridge: DEFAULT_RIDGE,
        },
        AttackName::Ica => AttackSpec::from_name("ica").expect("known"),
    };
    let recon = spec.run(&p, &original, args.seed)?;
    let per_attribute_var = var_per_attribute(&original, &recon)?;
    let min_var = per_attribute_var.iter().copied().fold(f64::INFINITY, f64::min);

    let dir = out_dir(&args.out_dir)?;
    let recon_path = dir.join("reconstruction.csv");
    let mut buf = Vec::new();
    ppaas_core::dataset::write_matrix_csv(
        &mut buf,
        original.attr_names(),
        original.label_name(),
        &recon.reconstructed,
        original.labels(),
    )?;
    write_file(&recon_path, &buf)?;
    let summary = AttackSummary {
        attack: recon.attack.name(),
        perturbed: args.input.display().to_string(),
        original: args.original.display().to_string(),
        seed: args.seed,
        assumptions: &recon.assumptions,
        attributes: original.attr_names().to_vec(),
        per_attribute_var: per_attribute_var.clone(),
        min_var,
        min_std: min_var.sqrt(),
    };
    write_file(&dir.join("attack.json"), serde_json::to_string_pretty(&summary)?.as_bytes())?;
    for (name, v) in original.attr_names().iter().zip(&per_attribute_var) {
        println!("Var(P)[{name}] = {v:.6e}");
    }
    println!("Var(P)_min = {min_var:.6e}");
    println!("sqrt(Var(P)_min) = {:.6e}", min_var.sqrt());
    Ok(0)
}

fn cmd_fis(args: FisArgs) -> Result<u8> {
    let model = match &args.fis {
        Some(p) => {
            let doc = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            load_fis_config(&doc).with_context(|| format!("in FIS document {}", p.display()))?
        }
        None => FisModel::default(),
    };
    if args.print_config {
        print!("{}", model.to_toml());
        return Ok(0);
    }
    let (p, r, u) = (
        args.privacy.expect("required"),
        args.resistance.expect("required"),
        args.utility.expect("required"),
    );
    let inf = model.infer(p, r, u)?;
    if args.trace {
        for (name, f) in ["privacy", "attack_resistance", "utility"].iter().zip(&inf.inputs) {
            println!(
                "{name}: LOW {:.6} MEDIUM {:.6} HIGH {:.6}{}",
                f.degrees[0],
                f.degrees[1],
                f.degrees[2],
                if f.clamped { " (clamped)" } else { "" }
            );
        }
        println!(
            "heights: LOW {:.6} MEDIUM {:.6} HIGH {:.6}",
            inf.heights[0], inf.heights[1], inf.heights[2]
        );
        if inf.degenerate {
            println!("no rule fired; fallback value");
        }
    }
    println!("FI = {:.6}", inf.fi);
    Ok(0)
}

fn cmd_generate(args: GenerateArgs) -> Result<u8> {
    let d = match args.kind {
        Synthetic::Blobs => synthetic::blobs(args.seed),
        Synthetic::Wholesale => synthetic::wholesale_like(args.seed),
    };
    let mut buf = Vec::new();
    d.write_csv(&mut buf)?;
    write_file(&args.out, &buf)?;
    println!("wrote {} ({} x {} + label)", args.out.display(), d.n_records(), d.n_attrs());
    Ok(0)
}

fn main() -> ExitCode {
    // clap's own exit status for usage errors is 2, which is reserved here
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    let result = match cli.command {
        Command::Evaluate(a) => cmd_evaluate(a, cli.verbose),
        Command::Perturb(a) => cmd_perturb(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Fis(a) => cmd_fis(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
