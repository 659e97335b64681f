//! Command-line front end.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::benford::{benford_by_regime, ScreeningConfig};
use crate::error::{Error, Result};
use crate::ingest::{
    default_end_date, load_dataset, DataSource, JoinedDataset, PanelFile, SourcePaths,
};
use crate::regimes::IndexSource;
use crate::report::{self, BenfordRun, ReportHeader};
use crate::smoothness::{
    build_panel, country_deviations, regime_aggregate_series, run_test1, summary_by_regime,
    CovariateTransform, TableColumn, Test1Spec,
};
use crate::synth::{power_experiment, write_demo_snapshot, Detector, PowerConfig};
use crate::Outcome;

/// Growth cutoffs used when none are given.
pub const DEFAULT_CUTOFFS: [f64; 3] = [0.05, 0.075, 0.10];

/// Directory of the fictional demonstration snapshot shipped with the crate.
pub fn bundled_demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join("demo")
}

#[derive(Debug, Parser)]
#[command(
    name = "covid-forensics",
    version,
    about = "Detect suppressed variation and digit anomalies in epidemic counts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and join the inputs; write panel.json and drops.txt.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Smoothness regressions of the deviation outcome on democracy scores.
    Test1 {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        opts: Test1Args,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// First-digit tests on growth-screened cumulative counts.
    Test2 {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        opts: Test2Args,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Burden by regime, per-country deviations and pooled regime series.
    Describe {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Detection rates on synthetic epidemics, or write the demo snapshot.
    Synth {
        #[command(flatten)]
        opts: SynthArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Every table and figure from one snapshot directory.
    Reproduce {
        /// Snapshot directory; defaults to the bundled demo snapshot.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Epidemic source.
        #[arg(long, value_enum, default_value = "jhu")]
        source: DataSource,
        /// Last date analysed (YYYY-MM-DD).
        #[arg(long)]
        end_date: Option<NaiveDate>,
        #[command(flatten)]
        output: OutputArgs,
        /// Also write the synthetic power table.
        #[arg(long)]
        power: bool,
        /// Master seed of the power experiment.
        #[arg(long, default_value_t = PowerConfig::default().seed)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Snapshot directory in the conventional layout; explicit file flags
    /// override its entries.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Directory with the JHU confirmed and deaths global time series.
    #[arg(long)]
    pub jhu: Option<PathBuf>,
    /// ECDC daily-report CSV.
    #[arg(long)]
    pub ecdc: Option<PathBuf>,
    /// Democracy-score CSV (country,eiu,fh,vdem,polity5).
    #[arg(long)]
    pub eiu: Option<PathBuf>,
    /// World Bank covariate CSV.
    #[arg(long)]
    pub worldbank: Option<PathBuf>,
    /// Country alias CSV (iso3,alias); defaults to the built-in table.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    /// Joined panel written by `ingest`; replaces every file flag.
    #[arg(long)]
    pub panel: Option<PathBuf>,
    /// Epidemic source; defaults to JHU when available.
    #[arg(long, value_enum)]
    pub source: Option<DataSource>,
    /// Last date analysed (YYYY-MM-DD).
    #[arg(long)]
    pub end_date: Option<NaiveDate>,
}

impl DataArgs {
    fn paths(&self) -> Result<SourcePaths> {
        let base = self.data_dir.as_deref().map(SourcePaths::from_dir);
        let required = |flag: &Option<PathBuf>, from_dir: Option<PathBuf>, name: &str| {
            flag.clone()
                .or(from_dir)
                .ok_or_else(|| Error::InvalidParameter(format!("missing --{name} (or --data-dir)")))
        };
        let paths = SourcePaths {
            jhu: self
                .jhu
                .clone()
                .or_else(|| base.as_ref().and_then(|b| b.jhu.clone())),
            ecdc: self
                .ecdc
                .clone()
                .or_else(|| base.as_ref().and_then(|b| b.ecdc.clone())),
            democracy: required(&self.eiu, base.as_ref().map(|b| b.democracy.clone()), "eiu")?,
            worldbank: required(
                &self.worldbank,
                base.as_ref().map(|b| b.worldbank.clone()),
                "worldbank",
            )?,
            aliases: self
                .aliases
                .clone()
                .or_else(|| base.as_ref().and_then(|b| b.aliases.clone())),
        };
        for p in [&paths.democracy, &paths.worldbank]
            .into_iter()
            .chain(paths.jhu.iter())
            .chain(paths.ecdc.iter())
            .chain(paths.aliases.iter())
        {
            if !p.exists() {
                return Err(Error::InvalidParameter(format!(
                    "{} does not exist",
                    p.display()
                )));
            }
        }
        Ok(paths)
    }

    /// Load from the panel file or from the raw inputs.
    pub fn load(&self) -> Result<JoinedDataset> {
        if let Some(panel) = &self.panel {
            let text = std::fs::read_to_string(panel).map_err(|e| Error::io(panel, e))?;
            return PanelFile::from_json(&text);
        }
        let paths = self.paths()?;
        let source = match self.source {
            Some(s) => s,
            None if paths.jhu.is_some() => DataSource::Jhu,
            None if paths.ecdc.is_some() => DataSource::Ecdc,
            None => {
                return Err(Error::InvalidParameter(
                    "no epidemic data: give --jhu or --ecdc".into(),
                ))
            }
        };
        load_dataset(
            &paths,
            source,
            self.end_date.unwrap_or_else(default_end_date),
        )
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory for the CSV reports and JSON sidecars.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Leave the generation time out of report headers.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Test1Args {
    /// Restrict to one index; all four by default.
    #[arg(long, value_enum)]
    pub index: Option<IndexSource>,
    /// Restrict to one outcome; both by default.
    #[arg(long, value_enum)]
    pub outcome: Option<Outcome>,
    /// Add the World Bank and latitude controls.
    #[arg(long)]
    pub controls: bool,
    #[arg(long, value_enum, default_value = "log")]
    pub covariate_transform: CovariateTransform,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Test2Args {
    /// Minimum growth of the 7-day average (repeatable).
    #[arg(long = "cutoff")]
    pub cutoffs: Vec<f64>,
    /// Restrict to one outcome; both by default.
    #[arg(long, value_enum)]
    pub outcome: Option<Outcome>,
    /// Require growth strictly above the cutoff.
    #[arg(long)]
    pub strict_greater: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Key-value scenario file; flags below override it.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub detector: Option<Detector>,
    /// Countries in each of the two score groups.
    #[arg(long)]
    pub countries: Option<usize>,
    /// Smoothing weight of the low-score group (repeatable).
    #[arg(long = "lambda")]
    pub lambdas: Vec<f64>,
    /// Synthetic panels drawn per smoothing weight.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Master seed; each replication derives its own stream from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Outcome the detector is applied to.
    #[arg(long, value_enum)]
    pub outcome: Option<Outcome>,
    /// Growth screen for the first-digit detector.
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Write the fictional demo snapshot to this directory instead.
    #[arg(long)]
    pub write_demo: Option<PathBuf>,
}

impl SynthArgs {
    fn config(&self) -> Result<PowerConfig> {
        let mut cfg = match &self.scenario {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                PowerConfig::from_scenario(&text)?
            }
            None => PowerConfig::default(),
        };
        if let Some(d) = self.detector {
            cfg.detector = d;
        }
        if let Some(n) = self.countries {
            cfg.countries_per_group = n;
        }
        if !self.lambdas.is_empty() {
            cfg.lambda_grid = self.lambdas.clone();
        }
        if let Some(r) = self.replications {
            cfg.replications = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = self.outcome {
            cfg.outcome = o;
        }
        if let Some(c) = self.cutoff {
            cfg.cutoff = c;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

/// Regression columns for the selected indices and outcomes.
pub fn test1_columns(data: &JoinedDataset, opts: &Test1Args) -> Result<Vec<TableColumn>> {
    let panel = build_panel(data);
    let outcomes: Vec<Outcome> = opts.outcome.map_or(Outcome::ALL.to_vec(), |o| vec![o]);
    let indices: Vec<IndexSource> = opts.index.map_or(IndexSource::ALL.to_vec(), |i| vec![i]);
    let mut out = Vec::new();
    for &outcome in &outcomes {
        for &index in &indices {
            let result = run_test1(
                &panel,
                Test1Spec {
                    index,
                    outcome,
                    with_controls: opts.controls,
                    transform: opts.covariate_transform,
                },
            )?;
            out.push(TableColumn {
                outcome,
                index,
                result,
            });
        }
    }
    Ok(out)
}

/// Digit tests for every cutoff and selected outcome.
pub fn test2_runs(data: &JoinedDataset, opts: &Test2Args) -> Result<Vec<BenfordRun>> {
    let cutoffs: Vec<f64> = if opts.cutoffs.is_empty() {
        DEFAULT_CUTOFFS.to_vec()
    } else {
        opts.cutoffs.clone()
    };
    let outcomes: Vec<Outcome> = opts.outcome.map_or(Outcome::ALL.to_vec(), |o| vec![o]);
    let mut runs = Vec::new();
    for &cutoff in &cutoffs {
        for &outcome in &outcomes {
            let cfg = ScreeningConfig::new(cutoff, outcome)?.strict(opts.strict_greater);
            runs.push(BenfordRun {
                cutoff,
                outcome,
                strict: opts.strict_greater,
                reports: benford_by_regime(data, &cfg),
            });
        }
    }
    Ok(runs)
}

#[derive(Serialize)]
struct AnalysisConfig<'a, T: Serialize> {
    command: &'a str,
    source: DataSource,
    end_date: NaiveDate,
    options: T,
}

fn header<T: Serialize>(
    data: &JoinedDataset,
    command: &str,
    options: T,
    output: &OutputArgs,
) -> Result<ReportHeader> {
    let cfg = AnalysisConfig {
        command,
        source: data.source,
        end_date: data.end_date,
        options,
    };
    ReportHeader::new(&data.snapshot, &cfg, !output.no_timestamp)
}

fn write_test1(data: &JoinedDataset, opts: &Test1Args, output: &OutputArgs) -> Result<()> {
    let cols = test1_columns(data, opts)?;
    let name = if opts.controls {
        report::names::TABLE_S1
    } else {
        report::names::TABLE1
    };
    let h = header(data, "test1", opts, output)?;
    announce(&report::regression_table(name, &cols, !opts.controls)?.write(&output.out, &h)?);
    for c in &cols {
        if let Some(t) = c.result.term(crate::smoothness::terms::DEMOCRACY) {
            println!(
                "  {:<16} {:<24} N={}",
                report::column_label(c.outcome, c.index),
                report::display_term(t),
                c.result.n_observations
            );
        }
    }
    Ok(())
}

fn write_test2(data: &JoinedDataset, opts: &Test2Args, output: &OutputArgs) -> Result<()> {
    let runs = test2_runs(data, opts)?;
    let h = header(data, "test2", opts, output)?;
    announce(&report::benford_table(&runs)?.write(&output.out, &h)?);
    announce(&report::benford_digits(&runs)?.write(&output.out, &h)?);
    Ok(())
}

fn write_describe(data: &JoinedDataset, output: &OutputArgs) -> Result<()> {
    let h = header(data, "describe", (), output)?;
    let summary = summary_by_regime(data);
    let days = regime_aggregate_series(data);
    announce(&report::burden_table(&summary)?.write(&output.out, &h)?);
    announce(&report::deviation_table(&country_deviations(data))?.write(&output.out, &h)?);
    announce(&report::cumulative_series_table(&days)?.write(&output.out, &h)?);
    announce(&report::daily_series_table(&days)?.write(&output.out, &h)?);
    let s = summary.democracy_shares;
    println!(
        "  democracies hold {:.0}% of population, {:.0}% of cases, {:.0}% of deaths",
        100.0 * s.population,
        100.0 * s.cases,
        100.0 * s.deaths
    );
    Ok(())
}

fn write_power(cfg: &PowerConfig, output: &OutputArgs) -> Result<()> {
    let rows = power_experiment(cfg)?;
    let h = ReportHeader::new("synthetic", cfg, !output.no_timestamp)?;
    announce(&report::power_table(&rows)?.write(&output.out, &h)?);
    for r in &rows {
        println!(
            "  {} lambda={} power={:.3}",
            r.detector.label(),
            r.smoothing_weight,
            r.power
        );
    }
    Ok(())
}

/// Run one parsed command.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { data, out } => {
            let joined = data.load()?;
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let panel_path = out.join("panel.json");
            std::fs::write(&panel_path, PanelFile::new(joined.clone()).to_json()?)
                .map_err(|e| Error::io(&panel_path, e))?;
            announce(&panel_path);
            let drops_path = out.join("drops.txt");
            std::fs::write(&drops_path, joined.drops.to_text())
                .map_err(|e| Error::io(&drops_path, e))?;
            announce(&drops_path);
            println!(
                "  {} countries joined, {} dropped",
                joined.countries.len(),
                joined.drops.total()
            );
            Ok(())
        }
        Command::Test1 { data, opts, output } => write_test1(&data.load()?, &opts, &output),
        Command::Test2 { data, opts, output } => write_test2(&data.load()?, &opts, &output),
        Command::Describe { data, output } => write_describe(&data.load()?, &output),
        Command::Synth { opts, output } => {
            if let Some(dir) = &opts.write_demo {
                write_demo_snapshot(dir, opts.seed.unwrap_or(PowerConfig::default().seed))?;
                println!("wrote demo snapshot to {}", dir.display());
                return Ok(());
            }
            write_power(&opts.config()?, &output)
        }
        Command::Reproduce {
            data_dir,
            source,
            end_date,
            output,
            power,
            seed,
        } => {
            let data = DataArgs {
                data_dir: Some(data_dir.unwrap_or_else(bundled_demo_dir)),
                jhu: None,
                ecdc: None,
                eiu: None,
                worldbank: None,
                aliases: None,
                panel: None,
                source: Some(source),
                end_date,
            }
            .load()?;
            for controls in [false, true] {
                let opts = Test1Args {
                    index: None,
                    outcome: None,
                    controls,
                    covariate_transform: CovariateTransform::Log,
                };
                write_test1(&data, &opts, &output)?;
            }
            let t2 = Test2Args {
                cutoffs: Vec::new(),
                outcome: None,
                strict_greater: false,
            };
            write_test2(&data, &t2, &output)?;
            write_describe(&data, &output)?;
            if power {
                write_power(
                    &PowerConfig {
                        seed,
                        ..PowerConfig::default()
                    },
                    &output,
                )?;
            }
            Ok(())
        }
    }
}

/// Parse the process arguments and run; any error becomes a one-line
/// message on stderr and exit status 1.
pub fn run() -> std::process::ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}
