//! Builds per-country disciplinary and partner profiles from the sample
//! corpus and prints those of one country.
//!
//! ```bash
//! cargo run --example country_profiles -- NL
//! ```

use std::fs::File;
use std::io::BufReader;

use collabsim::profiles::OutputSlice;
use collabsim::{build_profiles, load_region_map, CountryCode, IngestConfig};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/corpus.jsonl");
const REGIONS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/regions.csv");

fn main() -> collabsim::Result<()> {
    let code = std::env::args().nth(1).unwrap_or_else(|| "NL".into());
    let country = CountryCode::normalize(&code)
        .map_err(|e| collabsim::Error::Config(format!("`{code}`: {e}")))?;

    let regions = load_region_map(REGIONS)?;
    let file = File::open(CORPUS).map_err(|e| collabsim::Error::Io {
        path: CORPUS.into(),
        source: e,
    })?;
    let (table, stats) = build_profiles(BufReader::new(file), &regions, &IngestConfig::default())?;
    table.check_invariants().map_err(collabsim::Error::Config)?;
    println!(
        "{} records accepted, {} countries",
        stats.accepted,
        table.len()
    );

    let Some(set) = table.get(country) else {
        println!("{country} does not appear in the corpus");
        return Ok(());
    };
    let t = &set.pub_counts.totals;
    println!(
        "\n{country}: {} publications ({} domestic, {} bilateral, {} multilateral)",
        t.total(),
        t.domestic,
        t.bilateral,
        t.multilateral
    );
    for slice in [OutputSlice::Domestic, OutputSlice::Birc, OutputSlice::Mirc] {
        let p = set.disciplinary.get(slice);
        let mut top: Vec<_> = p.iter().collect();
        top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let shown: Vec<String> = top
            .iter()
            .take(5)
            .map(|(s, n)| format!("{s}:{n}"))
            .collect();
        println!(
            "  {:<8} subjects ({:>3} total)  {}",
            slice.as_str(),
            p.total(),
            shown.join(" ")
        );
    }
    for slice in [OutputSlice::Birc, OutputSlice::Mirc] {
        let p = set.partner.get(slice).expect("international slice");
        let shown: Vec<String> = p.iter().map(|(c, n)| format!("{c}:{n}")).collect();
        println!(
            "  {:<8} partners ({:>3} total)  {}",
            slice.as_str(),
            p.total(),
            shown.join(" ")
        );
    }
    Ok(())
}
