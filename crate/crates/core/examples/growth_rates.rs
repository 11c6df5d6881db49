//! Annual growth of bilateral and multilateral output per region over a
//! long synthetic corpus, under both growth methods.
//!
//! ```bash
//! cargo run --release --example growth_rates
//! ```

use std::collections::BTreeMap;
use std::io::Cursor;

use collabsim::aggregates::regional_growth;
use collabsim::synth::write_corpus;
use collabsim::{growth_rate, ingest, GrowthMethod, IngestConfig, RegionMap, ScenarioSpec};

fn main() -> collabsim::Result<()> {
    // a constructed series first: 11.4% a year for 37 years
    let series: BTreeMap<i32, u64> = (1980..=2017)
        .map(|y| (y, (1000.0 * 1.114f64.powi(y - 1980)).round() as u64))
        .collect();
    for m in [GrowthMethod::Cagr, GrowthMethod::Loglinear] {
        let g = growth_rate(&series, m).expect("two nonzero years");
        println!("constructed series, {:<9} {:.4}%", m.as_str(), g.rate_pct());
    }

    // a synthetic corpus has a flat expected volume, so rates hover near 0
    let scenario = ScenarioSpec {
        seed: 5,
        n_countries: 14,
        years: (1980, 2017),
        pubs_per_country_year: 40.0,
        ..Default::default()
    }
    .resolve()?;
    let mut corpus = Vec::new();
    write_corpus(&scenario, &mut corpus)?;
    let regions = RegionMap::from_reader(scenario.region_map_csv().as_bytes())?;
    let config = IngestConfig {
        policy: collabsim::ValidationPolicy {
            years: Some("1980:2017".parse()?),
            ..Default::default()
        },
        ..Default::default()
    };
    let ingested = ingest(Cursor::new(corpus), &regions, &config)?;

    let cagr = regional_growth(&ingested.regional, &regions, GrowthMethod::Cagr);
    let loglin = regional_growth(&ingested.regional, &regions, GrowthMethod::Loglinear);
    println!(
        "\n{:<28} {:<13} {:>9} {:>10}",
        "region", "type", "cagr %", "loglin %"
    );
    for (a, b) in cagr.iter().zip(&loglin) {
        let pct = |r: &Option<collabsim::GrowthRate>| {
            r.as_ref()
                .map_or("-".into(), |g| format!("{:.3}", g.rate_pct()))
        };
        println!(
            "{:<28} {:<13} {:>9} {:>10}",
            a.region,
            a.collab_type.to_string(),
            pct(&a.rate),
            pct(&b.rate)
        );
    }
    Ok(())
}
