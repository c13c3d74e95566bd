use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rst_bench::experiment::{diversity_report_cmd, run_experiment, sweep_estimators, time_fit};
use rst_bench::report::{self, AccuracyTable};
use rst_bench::{reference, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "rst-bench",
    version,
    about = "Randomized spline tree experiments on UCR-style datasets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accuracy of every (dataset, model, seed) cell; writes records.csv and table.csv
    Run(Common),
    /// Accuracy against ensemble size from prefix votes; writes sweep.csv
    Sweep(Common),
    /// Median fit time per ensemble size; writes timing.csv
    Time(Common),
    /// Per-observation representation diversity; writes diversity.csv
    Diversity(Common),
    /// Print the archive layout and the expected dataset dimensions
    FetchInfo,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds (overrides the config)
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Worker threads, 0 for all cores (overrides the config)
    #[arg(long)]
    workers: Option<usize>,
    /// Diversity integration grid size (overrides the config)
    #[arg(long)]
    grid_size: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seeds) = &self.seeds {
            cfg.seeds = seeds.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(g) = self.grid_size {
            cfg.grid_size = g;
        }
        cfg.validate()?;
        std::fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let records = run_experiment(&cfg)?;
            let dir = &cfg.output_dir;
            report::write_csv(&dir.join(report::RECORDS_FILE), &records)?;
            let table = AccuracyTable::from_records(&records);
            table.write(&dir.join(report::TABLE_FILE))?;
            report::write_csv(&dir.join(report::REFERENCE_FILE), &reference::rows())?;
            report::write_manifest(
                &dir.join(report::MANIFEST_FILE),
                "run",
                &cfg,
                vec![report::RECORDS_FILE, report::TABLE_FILE, report::REFERENCE_FILE],
            )?;
            for r in records.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "{} {} seed {}: {}",
                    r.dataset,
                    r.model,
                    r.seed,
                    r.error.as_deref().unwrap_or("")
                );
            }
            print_table(&table);
        }
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            let rows = sweep_estimators(&cfg)?;
            report::write_csv(&cfg.output_dir.join(report::SWEEP_FILE), &rows)?;
            report::write_manifest(
                &cfg.output_dir.join(report::MANIFEST_FILE),
                "sweep",
                &cfg,
                vec![report::SWEEP_FILE],
            )?;
            println!("{} sweep rows written to {}", rows.len(), cfg.output_dir.display());
        }
        Command::Time(args) => {
            let cfg = args.resolve()?;
            let rows = time_fit(&cfg)?;
            report::write_csv(&cfg.output_dir.join(report::TIMING_FILE), &rows)?;
            report::write_manifest(
                &cfg.output_dir.join(report::MANIFEST_FILE),
                "time",
                &cfg,
                vec![report::TIMING_FILE],
            )?;
            for r in &rows {
                match r.median_seconds {
                    Some(m) => println!(
                        "{:<20} {:<7} T={:<5} median {:.4}s",
                        r.dataset, r.model, r.n_estimators, m
                    ),
                    None => println!(
                        "{:<20} {:<7} T={:<5} error: {}",
                        r.dataset,
                        r.model,
                        r.n_estimators,
                        r.error.as_deref().unwrap_or("")
                    ),
                }
            }
        }
        Command::Diversity(args) => {
            let cfg = args.resolve()?;
            let rows = diversity_report_cmd(&cfg)?;
            report::write_csv(&cfg.output_dir.join(report::DIVERSITY_FILE), &rows)?;
            report::write_manifest(
                &cfg.output_dir.join(report::MANIFEST_FILE),
                "diversity",
                &cfg,
                vec![report::DIVERSITY_FILE],
            )?;
            for r in rows.iter().filter(|r| r.observation == "mean") {
                match (r.pairwise_d, r.quadratic_qd, r.functional_variance_vf) {
                    (Some(d), Some(q), Some(v)) => {
                        println!("{:<20} {:<7} D={d:.5} Q_D={q:.5} V_F={v:.5}", r.dataset, r.model)
                    }
                    _ => println!(
                        "{:<20} {:<7} error: {}",
                        r.dataset,
                        r.model,
                        r.error.as_deref().unwrap_or("")
                    ),
                }
            }
        }
        Command::FetchInfo => fetch_info(),
    }
    Ok(())
}

fn print_table(table: &AccuracyTable) {
    print!("{:<24}", "dataset");
    for m in &table.models {
        print!("{m:>9}");
    }
    println!();
    for (d, row) in table.datasets.iter().zip(&table.cells) {
        print!("{d:<24}");
        for c in row {
            match c {
                Some(v) => print!("{v:>9.4}"),
                None => print!("{:>9}", "-"),
            }
        }
        println!();
    }
}

fn fetch_info() {
    println!("Datasets come from the UCR Time Series Classification Archive:");
    println!("  https://www.timeseriesclassification.com/");
    println!("  https://www.cs.ucr.edu/~eamonn/time_series_data_2018/");
    println!();
    println!("Expected layout (tab- or comma-separated, label first on each line):");
    println!("  <root>/<Name>/<Name>_TRAIN.tsv");
    println!("  <root>/<Name>/<Name>_TEST.tsv");
    println!();
    println!("Point a config entry at it with kind = \"ucr\", name = \"<Name>\", root = \"<root>\".");
    println!();
    println!(
        "{:<24}{:>7}{:>7}{:>8}{:>9}",
        "name", "train", "test", "length", "classes"
    );
    for d in reference::DATASETS {
        println!(
            "{:<24}{:>7}{:>7}{:>8}{:>9}",
            d.name, d.train, d.test, d.length, d.classes
        );
    }
}
