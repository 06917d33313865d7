//! `geneval <experiment> --config <file> [--seed N] [--threads N] [--out DIR]`

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use geneval::datasets::{verify_file, CATALOG};
use geneval::experiment::{run_experiment, Experiment, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "geneval", version, about = "Run a generative-model evaluation experiment")]
struct Args {
    /// fit-divergence, parzen-sweep, parzen-benchmark, nn-shift, mixture-demo,
    /// dequantize-ll, or `datasets` to list official dataset files
    experiment: String,

    /// TOML config; every field has a default, so this is optional
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long)]
    threads: Option<usize>,

    /// Output directory (default: results/<experiment>)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override a config field, e.g. `--set nn_shift.window=24`; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Also write gnuplot `.dat` files
    #[arg(long)]
    gnuplot: bool,

    /// Print the resolved config and exit without running
    #[arg(long)]
    dry_run: bool,

    /// With `datasets`: check files in DIR against the pinned checksums
    #[arg(long, value_name = "DIR")]
    verify: Option<PathBuf>,
}

fn datasets(verify: Option<PathBuf>) -> ExitCode {
    let mut ok = true;
    for e in CATALOG {
        println!("{:8} {:26} {}\n         sha256 {}", e.dataset, e.file, e.url, e.sha256);
        let Some(dir) = &verify else { continue };
        let path = dir.join(e.file);
        let status = if !path.exists() {
            "missing".to_string()
        } else {
            match verify_file(&path) {
                Ok(Some(true)) => "ok".to_string(),
                Ok(_) => {
                    ok = false;
                    "CHECKSUM MISMATCH".to_string()
                }
                Err(err) => {
                    ok = false;
                    err.to_string()
                }
            }
        };
        println!("         {}: {status}", path.display());
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.experiment == "datasets" {
        return datasets(args.verify);
    }
    let experiment: Experiment = match args.experiment.parse() {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}\n\nusage: geneval <experiment> --config <file> [--seed N] [--threads N] [--out DIR]");
            return ExitCode::from(2);
        }
    };

    // flags win over --set, which wins over the file
    let mut overrides = vec![format!("experiment=\"{experiment}\"")];
    overrides.extend(args.overrides);
    if let Some(s) = args.seed {
        overrides.push(format!("seed={s}"));
    }
    if args.gnuplot {
        overrides.push("gnuplot=true".into());
    }
    let loaded = match &args.config {
        Some(p) => ExperimentConfig::load(p, &overrides),
        None => ExperimentConfig::parse_with("", &overrides),
    };
    let cfg = match loaded.and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if args.dry_run {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }

    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global pool is configured once");
    }
    let out = args.out.unwrap_or_else(|| PathBuf::from("results").join(experiment.name()));
    match run_experiment(&cfg, &out) {
        Ok(run) => {
            for p in &run.csv {
                println!("{}", p.display());
            }
            println!("{}", run.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
