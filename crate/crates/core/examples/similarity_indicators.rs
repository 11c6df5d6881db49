//! Computes the five similarity indicators for every country in the
//! sample corpus, the world baseline, and each country's deviation.
//!
//! ```bash
//! cargo run --example similarity_indicators
//! ```

use std::fs::File;
use std::io::BufReader;

use collabsim::similarity::deviation;
use collabsim::{ingest, load_region_map, Analysis, AnalysisConfig, Indicator, IngestConfig};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/corpus.jsonl");
const REGIONS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/regions.csv");

fn cell(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.3}"))
}

fn main() -> collabsim::Result<()> {
    let regions = load_region_map(REGIONS)?;
    let file = File::open(CORPUS).map_err(|e| collabsim::Error::Io {
        path: CORPUS.into(),
        source: e,
    })?;
    let ingested = ingest(BufReader::new(file), &regions, &IngestConfig::default())?;
    let config = AnalysisConfig {
        min_pubs: 20,
        ..AnalysisConfig::default()
    };
    let analysis = Analysis::new(&ingested, &regions, &config);

    print!("{:<4} {:>5}", "", "pubs");
    for ind in Indicator::ALL {
        print!(" {:>22}", ind.name());
    }
    println!();
    for r in &analysis.reports {
        let dev = deviation(r, &analysis.baseline);
        print!("{:<4} {:>5}", r.country, r.n_pub_total);
        for (ind, d) in Indicator::ALL.into_iter().zip(dev) {
            let tag = match d.label.as_str() {
                "above" => "+",
                "below" => "-",
                _ => " ",
            };
            print!(" {:>21}{tag}", cell(r.value(ind)));
        }
        println!();
    }
    print!("{:<4} {:>5}", "wld", "");
    for ind in Indicator::ALL {
        print!(" {:>22}", cell(analysis.baseline.mean(ind)));
    }
    println!(
        "\n(world means over countries with at least {} publications)",
        analysis.baseline.min_pubs
    );
    Ok(())
}
