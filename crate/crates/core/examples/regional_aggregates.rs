//! Regional boxplots, low-similarity flags and scatter datasets for the
//! sample corpus.
//!
//! ```bash
//! cargo run --example regional_aggregates
//! ```

use std::fs::File;
use std::io::BufReader;

use collabsim::classify::ShareDenominator;
use collabsim::pipeline::regional_boxplots;
use collabsim::{
    ingest, load_region_map, scatter_dataset, threshold_flags, Analysis, AnalysisConfig, Indicator,
    IngestConfig, ScatterSpec,
};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/corpus.jsonl");
const REGIONS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/regions.csv");

fn main() -> collabsim::Result<()> {
    let regions = load_region_map(REGIONS)?;
    let file = File::open(CORPUS).map_err(|e| collabsim::Error::Io {
        path: CORPUS.into(),
        source: e,
    })?;
    let ingested = ingest(BufReader::new(file), &regions, &IngestConfig::default())?;
    let analysis = Analysis::new(&ingested, &regions, &AnalysisConfig::default());

    let rows = regional_boxplots(&analysis, &regions, ShareDenominator::International)?;
    let (_, shares) = &rows[0];
    println!("bilateral share of international output, by region");
    for (region, s) in &shares.by_region {
        println!(
            "  {region:<28} n={:<2} min {:.2}  q1 {:.2}  median {:.2}  q3 {:.2}  max {:.2}  outliers {}",
            s.n, s.min, s.q1, s.median, s.q3, s.max, s.outliers.len()
        );
    }

    let t = 0.75;
    for ind in [Indicator::DomBirc, Indicator::DomMirc] {
        let flags = threshold_flags(&analysis.values(ind), t);
        let names: Vec<&str> = flags.flagged.iter().map(|c| c.as_str()).collect();
        println!("{ind} below {t}: {names:?} ({} undefined)", flags.undefined);
    }

    let spec = ScatterSpec::parse(
        "sim_birc_mirc_disc",
        "sim_birc_mirc_partner",
        "n_international",
    )?;
    let africa = scatter_dataset(&analysis.reports, spec, Some("Sub-Saharan Africa"));
    println!(
        "scatter for Sub-Saharan Africa ({} dropped):",
        africa.dropped
    );
    for p in &africa.points {
        println!("  {} x={:.3} y={:.3} size={}", p.country, p.x, p.y, p.size);
    }
    let intl = scatter_dataset(&analysis.reports, ScatterSpec::international_share(), None);
    println!("international-share scatter: {} points", intl.points.len());

    match ScatterSpec::parse("sim_dom_int", "no_such_axis", "n_pub_total") {
        Ok(_) => unreachable!(),
        Err(e) => println!("unknown selector: {e}"),
    }
    Ok(())
}
