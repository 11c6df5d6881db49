//! End-to-end wiring: ingestion → classification → profiles → similarity →
//! aggregates, and the rendering of every output file.
//!
//! Ingestion reads the corpus in fixed-size chunks and folds each chunk in
//! parallel. All partial results are integer monoids, so the outcome is
//! independent of the thread count and chunk boundaries.

use std::io::{BufRead, Read};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::aggregates::{
    region_boxplot, regional_growth, report_birc_share, scatter_dataset, write_flagged_csv,
    write_growth_csv, write_regions_csv, write_scatter_csv, GrowthMethod, RegionBoxplots,
    RegionCounting, RegionalCounts, ScatterSpec,
};
use crate::classify::{classify, MegaThreshold, ShareDenominator};
use crate::corpus::{CorpusStats, RegionMap, ValidationPolicy, Validator};
use crate::error::{Error, Result};
use crate::profiles::{write_profile_csv, ProfileTable};
use crate::similarity::{
    similarity_reports, world_baseline, write_report_csv, CountrySimilarityReport, Indicator,
    WorldBaseline,
};

const CHUNK_LINES: usize = 64 * 1024;
const SHARD_LINES: usize = 4096;

/// Settings that affect how records are counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IngestConfig {
    pub policy: ValidationPolicy,
    pub mega_threshold: Option<MegaThreshold>,
    pub region_counting: RegionCounting,
}

/// Everything accumulated from one pass over a corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingested {
    pub table: ProfileTable,
    pub regional: RegionalCounts,
    pub stats: CorpusStats,
}

impl Ingested {
    fn merge_owned(&mut self, other: Ingested) {
        self.table.merge_owned(other.table);
        self.regional.merge(&other.regional);
        self.stats.merge(&other.stats);
    }
}

fn fold_shard(
    lines: &[String],
    first_line_no: usize,
    validator: &Validator<'_>,
    regions: &RegionMap,
    config: &IngestConfig,
) -> Result<Ingested> {
    let mut acc = Ingested::default();
    for (i, line) in lines.iter().enumerate() {
        if let Some(record) = validator.check(first_line_no + i, line, &mut acc.stats)? {
            let ctype = classify(&record, config.mega_threshold);
            acc.table.accumulate(&record, ctype);
            acc.regional
                .add(&record, ctype, regions, config.region_counting);
        }
    }
    Ok(acc)
}

fn fold_chunk(
    lines: &[String],
    first_line_no: usize,
    validator: &Validator<'_>,
    regions: &RegionMap,
    config: &IngestConfig,
) -> Result<Ingested> {
    let partials: Vec<Result<Ingested>> = lines
        .par_chunks(SHARD_LINES)
        .enumerate()
        .map(|(k, shard)| {
            fold_shard(
                shard,
                first_line_no + k * SHARD_LINES,
                validator,
                regions,
                config,
            )
        })
        .collect();
    let mut acc = Ingested::default();
    // partials are in line order, so the first error is the earliest defect
    for p in partials {
        acc.merge_owned(p?);
    }
    Ok(acc)
}

/// One streaming pass over a corpus.
pub fn ingest<R: BufRead>(
    reader: R,
    regions: &RegionMap,
    config: &IngestConfig,
) -> Result<Ingested> {
    let validator = Validator::new(regions, config.policy);
    let mut acc = Ingested::default();
    let mut chunk: Vec<String> = Vec::with_capacity(CHUNK_LINES);
    let mut next_line_no = 1;
    for line in reader.lines() {
        chunk.push(line.map_err(|e| Error::io("<corpus>", e))?);
        if chunk.len() == CHUNK_LINES {
            acc.merge_owned(fold_chunk(
                &chunk,
                next_line_no,
                &validator,
                regions,
                config,
            )?);
            next_line_no += chunk.len();
            chunk.clear();
        }
    }
    if !chunk.is_empty() {
        acc.merge_owned(fold_chunk(
            &chunk,
            next_line_no,
            &validator,
            regions,
            config,
        )?);
    }
    Ok(acc)
}

/// Profiles of every country appearing in the accepted part of a corpus.
pub fn build_profiles<R: BufRead>(
    reader: R,
    regions: &RegionMap,
    config: &IngestConfig,
) -> Result<(ProfileTable, CorpusStats)> {
    let Ingested { table, stats, .. } = ingest(reader, regions, config)?;
    Ok((table, stats))
}

/// Settings for everything downstream of ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub min_pubs: u64,
    pub threshold: f64,
    pub growth_method: GrowthMethod,
    pub share_denominator: ShareDenominator,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            min_pubs: 1,
            threshold: 0.5,
            growth_method: GrowthMethod::Cagr,
            share_denominator: ShareDenominator::International,
        }
    }
}

/// Finished per-country results.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub reports: Vec<CountrySimilarityReport>,
    pub baseline: WorldBaseline,
}

impl Analysis {
    pub fn new(ingested: &Ingested, regions: &RegionMap, config: &AnalysisConfig) -> Self {
        let reports = similarity_reports(&ingested.table, regions);
        let baseline = world_baseline(&reports, config.min_pubs);
        Analysis { reports, baseline }
    }

    pub fn values(&self, indicator: Indicator) -> Vec<(crate::corpus::CountryCode, Option<f64>)> {
        self.reports
            .iter()
            .map(|r| (r.country, r.value(indicator)))
            .collect()
    }
}

/// Metrics summarized per region, in output order.
pub fn regional_boxplots(
    analysis: &Analysis,
    regions: &RegionMap,
    denominator: ShareDenominator,
) -> Result<Vec<(String, RegionBoxplots)>> {
    let shares: Vec<_> = analysis
        .reports
        .iter()
        .map(|r| (r.country, report_birc_share(r, denominator)))
        .collect();
    let mut rows = vec![("birc_share".to_string(), region_boxplot(&shares, regions)?)];
    for ind in Indicator::ALL {
        rows.push((
            ind.name().to_string(),
            region_boxplot(&analysis.values(ind), regions)?,
        ));
    }
    Ok(rows)
}

/// Name and axes of each scatter file written by `aggregate`.
pub fn default_scatters() -> [(&'static str, ScatterSpec); 2] {
    [
        ("scatter_intl_share.csv", ScatterSpec::international_share()),
        ("scatter_birc_mirc.csv", ScatterSpec::birc_mirc()),
    ]
}

/// Indicators whose low values are flagged.
pub const FLAGGED_INDICATORS: [Indicator; 2] = [Indicator::DomBirc, Indicator::DomMirc];

pub fn render_countries(analysis: &Analysis) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_report_csv(&analysis.reports, &analysis.baseline, &mut buf)?;
    Ok(buf)
}

pub fn render_profiles(table: &ProfileTable) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_profile_csv(table, &mut buf)?;
    Ok(buf)
}

pub fn render_growth(
    ingested: &Ingested,
    regions: &RegionMap,
    method: GrowthMethod,
) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_growth_csv(
        &regional_growth(&ingested.regional, regions, method),
        &mut buf,
    )?;
    Ok(buf)
}

/// `regions.csv`, `flagged.csv` and the scatter files.
pub fn render_aggregates(
    analysis: &Analysis,
    regions: &RegionMap,
    config: &AnalysisConfig,
) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    let mut buf = Vec::new();
    write_regions_csv(
        &regional_boxplots(analysis, regions, config.share_denominator)?,
        &mut buf,
    )?;
    files.push(("regions.csv".to_string(), buf));

    let mut buf = Vec::new();
    write_flagged_csv(
        &analysis.reports,
        &FLAGGED_INDICATORS,
        config.threshold,
        &mut buf,
    )?;
    files.push(("flagged.csv".to_string(), buf));

    for (name, spec) in default_scatters() {
        let data = scatter_dataset(&analysis.reports, spec, None);
        if data.dropped > 0 {
            log::info!(
                "{name}: {} countries dropped with undefined axes",
                data.dropped
            );
        }
        let mut buf = Vec::new();
        write_scatter_csv(&data, &mut buf)?;
        files.push((name.to_string(), buf));
    }
    Ok(files)
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: &'static str,
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

pub fn digest_file(role: &'static str, path: &Path) -> Result<InputDigest> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    Ok(InputDigest {
        role,
        path: path.to_path_buf(),
        bytes,
        sha256: hex::encode(hasher.finalize()),
    })
}

/// Provenance record written next to every output set.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config: C,
    pub inputs: Vec<InputDigest>,
    pub records: Option<CorpusStats>,
    pub countries: Option<usize>,
    pub outputs: Vec<String>,
}

impl<C: Serialize> Manifest<C> {
    pub fn new(subcommand: &str, config: C) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config,
            inputs: Vec::new(),
            records: None,
            countries: None,
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }
}
