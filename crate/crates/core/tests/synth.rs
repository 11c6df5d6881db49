use std::io::Cursor;

use collabsim::corpus::RegionMap;
use collabsim::pipeline::{ingest, Analysis, AnalysisConfig, IngestConfig};
use collabsim::synth::write_corpus;
use collabsim::{classify, generate, CollabTag, Indicator, ScenarioSpec};

fn analyse(spec: &ScenarioSpec) -> Analysis {
    let scenario = spec.resolve().unwrap();
    let mut corpus = Vec::new();
    write_corpus(&scenario, &mut corpus).unwrap();
    let regions = RegionMap::from_reader(scenario.region_map_csv().as_bytes()).unwrap();
    let ingested = ingest(Cursor::new(corpus), &regions, &IngestConfig::default()).unwrap();
    Analysis::new(&ingested, &regions, &AnalysisConfig::default())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn defined(a: &Analysis, ind: Indicator) -> Vec<f64> {
    a.values(ind).into_iter().filter_map(|(_, v)| v).collect()
}

#[test]
fn without_drift_international_profiles_match_domestic() {
    for seed in [1, 2, 3] {
        let spec = ScenarioSpec {
            seed,
            n_countries: 20,
            pubs_per_country_year: 500.0,
            ..Default::default()
        };
        let a = analyse(&spec);
        let n: u64 = a.reports.iter().map(|r| r.n_pub_total).sum();
        assert!(n >= 100_000, "only {n} country-publications");
        assert_eq!(a.reports.len(), 20);
        for r in &a.reports {
            for ind in [Indicator::DomBirc, Indicator::DomMirc] {
                let v = r.value(ind).unwrap();
                assert!(v >= 0.99, "seed {seed} {} {ind}: {v}", r.country);
            }
        }
    }
}

#[test]
fn type_mix_converges() {
    let mix = (0.5, 0.3, 0.2);
    for seed in [10, 11, 12] {
        let spec = ScenarioSpec {
            seed,
            n_countries: 12,
            pubs_per_country_year: 150.0,
            type_mix: mix,
            ..Default::default()
        };
        let scenario = spec.resolve().unwrap();
        let mut counts = [0u64; 3];
        for r in generate(&scenario) {
            counts[match classify(&r, None).tag {
                CollabTag::Domestic => 0,
                CollabTag::Bilateral => 1,
                _ => 2,
            }] += 1;
        }
        let n: u64 = counts.iter().sum();
        assert!(n >= 10_000);
        for (c, p) in counts.iter().zip([mix.0, mix.1, mix.2]) {
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let got = *c as f64 / n as f64;
            assert!(
                (got - p).abs() <= 3.0 * se,
                "seed {seed}: {got} vs {p} (se {se})"
            );
        }
    }
}

#[test]
fn domestic_only_mix() {
    let spec = ScenarioSpec {
        type_mix: (1.0, 0.0, 0.0),
        ..Default::default()
    };
    let scenario = spec.resolve().unwrap();
    assert!(generate(&scenario).all(|r| r.country_count() == 1));
}

#[test]
fn more_multilateral_drift_never_raises_the_median() {
    let mut previous = f64::INFINITY;
    for step in 0..=5 {
        let drift = step as f64 * 0.2;
        let spec = ScenarioSpec {
            seed: 42,
            n_countries: 20,
            pubs_per_country_year: 200.0,
            drift_mirc: drift,
            ..Default::default()
        };
        let m = median(defined(&analyse(&spec), Indicator::DomMirc));
        assert!(
            m <= previous + 0.005,
            "drift {drift}: median {m} after {previous}"
        );
        previous = m;
    }
    assert!(previous < 0.9);
}

#[test]
fn drift_separates_bilateral_from_multilateral() {
    let spec = ScenarioSpec {
        seed: 3,
        n_countries: 20,
        pubs_per_country_year: 300.0,
        drift_birc: 0.2,
        drift_mirc: 0.8,
        ..Default::default()
    };
    let a = analyse(&spec);
    let birc = median(defined(&a, Indicator::DomBirc));
    let mirc = median(defined(&a, Indicator::DomMirc));
    assert!(mirc + 0.05 < birc, "{mirc} vs {birc}");
}
