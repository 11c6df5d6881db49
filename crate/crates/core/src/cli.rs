//! Command-line entry point. The binary only forwards to [`main_with_args`].
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Failures print one
//! JSON line on stderr: `{"error": "...", "kind": "...", "exit_code": N}`.

use std::ffi::OsString;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::aggregates::{GrowthMethod, RegionCounting};
use crate::classify::{MegaThreshold, ShareDenominator};
use crate::corpus::{
    load_region_map, DefectPolicy, RegionMap, UnmappedPolicy, ValidationPolicy, YearWindow,
};
use crate::error::{Error, Result};
use crate::output::StagedOutputs;
use crate::pipeline::{
    digest_file, ingest, render_aggregates, render_countries, render_growth, render_profiles,
    Analysis, AnalysisConfig, IngestConfig, Ingested, Manifest,
};
use crate::synth::{load_scenario, write_corpus};

#[derive(Debug, Parser)]
#[command(
    name = "collabsim",
    version,
    about = "Country collaboration profiles and similarity indicators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a corpus and print line accounting as JSON.
    Validate(RunArgs),
    /// Write the per-country profile dump (profiles.csv).
    Profile(RunArgs),
    /// Write the five indicators per country (countries.csv).
    Similarity(RunArgs),
    /// Write regional boxplots, flags and scatter datasets.
    Aggregate(RunArgs),
    /// Write regional growth rates (growth.csv).
    Growth(RunArgs),
    /// Everything above in one pass.
    Report(RunArgs),
    /// Generate a synthetic corpus from a scenario file.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Line-delimited JSON corpus.
    #[arg(long)]
    pub input: PathBuf,
    /// `country,region` CSV.
    #[arg(long)]
    pub regions: PathBuf,
    /// Inclusive publication-year window, `A:B`.
    #[arg(long, default_value = "2008:2017")]
    pub years: YearWindow,
    /// Treat publications with at least N countries as a separate class.
    #[arg(long)]
    pub mega_threshold: Option<MegaThreshold>,
    /// Minimum publications for a country to enter the world average.
    #[arg(long, default_value_t = 1)]
    pub min_pubs: u64,
    /// Flag countries with a similarity strictly below this value.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value = "cagr")]
    pub growth_method: GrowthMethod,
    /// Denominator of the bilateral share: `international` or `total`.
    #[arg(long = "fig2-denominator", default_value = "international")]
    pub share_denominator: ShareDenominator,
    /// Regional tallies: `dedup` (once per region) or `country-sum`.
    #[arg(long, default_value = "dedup")]
    pub region_counting: RegionCounting,
    /// `skip` (count and continue) or `fail-fast` for malformed,
    /// country-less and subject-less lines.
    #[arg(long, default_value = "skip")]
    pub on_defect: String,
    /// `skip`, `fail-fast` or `keep` (region UNKNOWN).
    #[arg(long, default_value = "skip")]
    pub unmapped: String,
    /// Also write profiles.csv from `report`.
    #[arg(long)]
    pub dump_profiles: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Corpus output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional region map for the generated countries.
    #[arg(long)]
    pub regions_out: Option<PathBuf>,
}

/// Validated, serializable form of [`RunArgs`].
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub regions: PathBuf,
    pub years: YearWindow,
    pub mega_threshold: Option<MegaThreshold>,
    pub min_pubs: u64,
    pub threshold: f64,
    pub growth_method: GrowthMethod,
    pub fig2_denominator: ShareDenominator,
    pub region_counting: RegionCounting,
    pub policy: ValidationPolicy,
    pub dump_profiles: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self> {
        if !(0.0..=1.0).contains(&args.threshold) {
            return Err(Error::Config(format!(
                "threshold {} is outside [0, 1]",
                args.threshold
            )));
        }
        let defect = match args.on_defect.as_str() {
            "skip" => DefectPolicy::SkipAndCount,
            "fail-fast" => DefectPolicy::FailFast,
            other => return Err(Error::Config(format!("unknown --on-defect `{other}`"))),
        };
        let unmapped = match args.unmapped.as_str() {
            "skip" => UnmappedPolicy::SkipAndCount,
            "fail-fast" => UnmappedPolicy::FailFast,
            "keep" => UnmappedPolicy::KeepAsUnknownRegion,
            other => return Err(Error::Config(format!("unknown --unmapped `{other}`"))),
        };
        Ok(RunConfig {
            input: args.input.clone(),
            regions: args.regions.clone(),
            years: args.years,
            mega_threshold: args.mega_threshold,
            min_pubs: args.min_pubs,
            threshold: args.threshold,
            growth_method: args.growth_method,
            fig2_denominator: args.share_denominator,
            region_counting: args.region_counting,
            policy: ValidationPolicy {
                malformed: defect,
                missing_country: defect,
                missing_subject: defect,
                unmapped_country: unmapped,
                years: Some(args.years),
            },
            dump_profiles: args.dump_profiles,
            out: args.out.clone(),
        })
    }

    pub fn ingest_config(&self) -> IngestConfig {
        IngestConfig {
            policy: self.policy,
            mega_threshold: self.mega_threshold,
            region_counting: self.region_counting,
        }
    }

    pub fn analysis_config(&self) -> AnalysisConfig {
        AnalysisConfig {
            min_pubs: self.min_pubs,
            threshold: self.threshold,
            growth_method: self.growth_method,
            share_denominator: self.fig2_denominator,
        }
    }

    fn out_dir(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| Error::Config("--out is required".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Validate,
    Profile,
    Similarity,
    Aggregate,
    Growth,
    Report,
}

impl Step {
    fn name(self) -> &'static str {
        match self {
            Step::Validate => "validate",
            Step::Profile => "profile",
            Step::Similarity => "similarity",
            Step::Aggregate => "aggregate",
            Step::Growth => "growth",
            Step::Report => "report",
        }
    }
}

/// What a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub ingested: Ingested,
    pub written: Vec<PathBuf>,
}

fn load_inputs(config: &RunConfig) -> Result<(RegionMap, Ingested)> {
    let regions = load_region_map(&config.regions)?;
    let file = std::fs::File::open(&config.input).map_err(|e| Error::io(&config.input, e))?;
    let ingested = ingest(
        BufReader::with_capacity(1 << 20, file),
        &regions,
        &config.ingest_config(),
    )?;
    Ok((regions, ingested))
}

/// Runs one analysis subcommand. Outputs are staged in memory and only
/// moved into the output directory once all of them rendered.
pub fn run_step(step: Step, config: &RunConfig) -> Result<RunOutcome> {
    if step != Step::Validate {
        config.out_dir()?;
    }
    let (regions, ingested) = load_inputs(config)?;
    let analysis_config = config.analysis_config();
    let mut staged = StagedOutputs::new();

    let needs_analysis = matches!(step, Step::Similarity | Step::Aggregate | Step::Report);
    let analysis = needs_analysis.then(|| Analysis::new(&ingested, &regions, &analysis_config));

    match step {
        Step::Validate => {
            staged.add("validation.json", {
                let mut v = serde_json::to_vec_pretty(&ingested.stats)?;
                v.push(b'\n');
                v
            });
        }
        Step::Profile => staged.add("profiles.csv", render_profiles(&ingested.table)?),
        Step::Similarity => staged.add(
            "countries.csv",
            render_countries(analysis.as_ref().expect("built"))?,
        ),
        Step::Aggregate => {
            for (name, bytes) in render_aggregates(
                analysis.as_ref().expect("built"),
                &regions,
                &analysis_config,
            )? {
                staged.add(name, bytes);
            }
        }
        Step::Growth => staged.add(
            "growth.csv",
            render_growth(&ingested, &regions, config.growth_method)?,
        ),
        Step::Report => {
            let analysis = analysis.as_ref().expect("built");
            staged.add("countries.csv", render_countries(analysis)?);
            for (name, bytes) in render_aggregates(analysis, &regions, &analysis_config)? {
                staged.add(name, bytes);
            }
            staged.add(
                "growth.csv",
                render_growth(&ingested, &regions, config.growth_method)?,
            );
            if config.dump_profiles {
                staged.add("profiles.csv", render_profiles(&ingested.table)?);
            }
        }
    }

    let Some(out) = config.out.as_deref() else {
        return Ok(RunOutcome {
            ingested,
            written: Vec::new(),
        });
    };

    let mut manifest = Manifest::new(step.name(), config);
    manifest.inputs = vec![
        digest_file("corpus", &config.input)?,
        digest_file("regions", &config.regions)?,
    ];
    manifest.records = Some(ingested.stats.clone());
    manifest.countries = Some(ingested.table.len());
    manifest.outputs = staged.names().iter().map(|s| s.to_string()).collect();
    staged.add("manifest.json", manifest.to_json()?);

    let written = staged.commit(out)?;
    Ok(RunOutcome { ingested, written })
}

/// Generates a corpus (and optionally its region map) from a scenario.
pub fn run_synth(args: &SynthArgs) -> Result<u64> {
    let scenario = load_scenario(&args.scenario)?;
    let parent = args
        .out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| Error::io(parent, e))?;
    let n = write_corpus(&scenario, tmp.as_file_mut())?;
    if let Some(path) = &args.regions_out {
        let dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        let mut staged = StagedOutputs::new();
        let name = path
            .file_name()
            .ok_or_else(|| Error::Config("--regions-out needs a file name".into()))?
            .to_string_lossy()
            .into_owned();
        staged.add(name, scenario.region_map_csv().into_bytes());
        staged.commit(dir)?;
    }
    tmp.persist(&args.out)
        .map_err(|e| Error::io(&args.out, e.error))?;
    Ok(n)
}

pub fn run(cli: &Cli) -> Result<()> {
    let (step, args) = match &cli.command {
        Command::Synth(args) => {
            let n = run_synth(args)?;
            log::info!("wrote {n} records to {}", args.out.display());
            return Ok(());
        }
        Command::Validate(a) => (Step::Validate, a),
        Command::Profile(a) => (Step::Profile, a),
        Command::Similarity(a) => (Step::Similarity, a),
        Command::Aggregate(a) => (Step::Aggregate, a),
        Command::Growth(a) => (Step::Growth, a),
        Command::Report(a) => (Step::Report, a),
    };
    let config = RunConfig::from_args(args)?;
    let outcome = run_step(step, &config)?;
    if step == Step::Validate {
        println!("{}", serde_json::to_string(&outcome.ingested.stats)?);
    }
    Ok(())
}

fn error_line(message: &str, kind: &str, code: i32) -> String {
    serde_json::json!({ "error": message, "kind": kind, "exit_code": code }).to_string()
}

/// Parses `args` (including the program name) and runs; returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            eprintln!("{}", error_line(&e.kind().to_string(), "usage", 1));
            return 1;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("{}", error_line(&e.to_string(), e.kind(), code));
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("collabsim").chain(args.iter().copied()))
    }

    #[test]
    fn defaults() {
        let cli = parse(&[
            "report",
            "--input",
            "c.jsonl",
            "--regions",
            "r.csv",
            "--out",
            "o",
        ])
        .unwrap();
        let Command::Report(args) = cli.command else {
            panic!("expected report")
        };
        let cfg = RunConfig::from_args(&args).unwrap();
        assert_eq!(cfg.years, YearWindow::new(2008, 2017).unwrap());
        assert_eq!(cfg.threshold, 0.5);
        assert_eq!(cfg.min_pubs, 1);
        assert_eq!(cfg.mega_threshold, None);
        assert_eq!(cfg.growth_method, GrowthMethod::Cagr);
        assert_eq!(cfg.fig2_denominator, ShareDenominator::International);
        assert_eq!(cfg.policy.malformed, DefectPolicy::SkipAndCount);
    }

    #[test]
    fn flag_parsing_and_usage_errors() {
        let cli = parse(&[
            "report",
            "--input",
            "c",
            "--regions",
            "r",
            "--years",
            "1980:2017",
            "--mega-threshold",
            "20",
            "--growth-method",
            "loglinear",
            "--fig2-denominator",
            "total",
            "--threshold",
            "0.4",
            "--min-pubs",
            "5",
        ])
        .unwrap();
        let Command::Report(args) = cli.command else {
            panic!()
        };
        let cfg = RunConfig::from_args(&args).unwrap();
        assert_eq!(cfg.mega_threshold.unwrap().get(), 20);
        assert_eq!(cfg.growth_method, GrowthMethod::Loglinear);
        assert_eq!(cfg.fig2_denominator, ShareDenominator::Total);

        assert!(parse(&[
            "report",
            "--input",
            "c",
            "--regions",
            "r",
            "--mega-threshold",
            "2"
        ])
        .is_err());
        assert!(parse(&[
            "report",
            "--input",
            "c",
            "--regions",
            "r",
            "--years",
            "2017:2008"
        ])
        .is_err());
        assert!(parse(&[
            "report",
            "--input",
            "c",
            "--regions",
            "r",
            "--growth-method",
            "x"
        ])
        .is_err());

        let cli = parse(&[
            "report",
            "--input",
            "c",
            "--regions",
            "r",
            "--threshold",
            "1.5",
        ])
        .unwrap();
        let Command::Report(args) = cli.command else {
            panic!()
        };
        assert_eq!(RunConfig::from_args(&args).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(main_with_args(["collabsim", "frobnicate"]), 1);
        assert_eq!(main_with_args(["collabsim", "--version"]), 0);
    }
}
