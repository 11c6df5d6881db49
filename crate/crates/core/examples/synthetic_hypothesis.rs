//! Generates synthetic corpora where international output drifts toward a
//! shared agenda and checks that multilateral profiles move further from
//! domestic ones than bilateral profiles do.
//!
//! ```bash
//! cargo run --release --example synthetic_hypothesis -- [drift_birc] [drift_mirc] [seeds]
//! ```

use collabsim::corpus::RegionMap;
use collabsim::{generate, Indicator, ProfileTable, ScenarioSpec};

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn main() -> collabsim::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let drift_birc = args.first().copied().unwrap_or(0.2);
    let drift_mirc = args.get(1).copied().unwrap_or(0.8);
    let seeds = args.get(2).copied().unwrap_or(5.0) as u64;

    println!("drift_birc={drift_birc} drift_mirc={drift_mirc}");
    println!("seed  records  median_dom_birc  median_dom_mirc  min_dom_birc  min_dom_mirc");
    let mut holds = 0;
    for seed in 0..seeds {
        let scenario = ScenarioSpec {
            seed,
            n_countries: 20,
            pubs_per_country_year: 500.0,
            drift_birc,
            drift_mirc,
            ..Default::default()
        }
        .resolve()?;
        let regions = RegionMap::from_reader(scenario.region_map_csv().as_bytes())?;
        let records: Vec<_> = generate(&scenario).collect();
        let table = ProfileTable::from_records_par(&records, None);
        let reports = collabsim::similarity::similarity_reports(&table, &regions);

        let values =
            |ind: Indicator| -> Vec<f64> { reports.iter().filter_map(|r| r.value(ind)).collect() };
        let birc = values(Indicator::DomBirc);
        let mirc = values(Indicator::DomMirc);
        let min = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
        let (mb, mm) = (median(birc.clone()), median(mirc.clone()));
        if mm < mb {
            holds += 1;
        }
        println!(
            "{seed:>4}  {:>7}  {mb:>15.4}  {mm:>15.4}  {:>12.4}  {:>12.4}",
            records.len(),
            min(&birc),
            min(&mirc)
        );
    }
    println!("median sim_dom_mirc < median sim_dom_birc in {holds} of {seeds} seeds");
    Ok(())
}
