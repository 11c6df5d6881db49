//! Helpers shared by the integration tests: an independent reference
//! implementation of the counting rules and small corpus fixtures.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use collabsim::cli::{Cli, Command, RunConfig, RunOutcome, Step};
use collabsim::corpus::format_record;
use collabsim::{generate, PublicationRecord, ScenarioSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counts for one country as recomputed by the reference.
#[derive(Debug, Default, Clone)]
pub struct RefCountry {
    pub n_total: u64,
    pub n_dom: u64,
    pub n_birc: u64,
    pub n_mirc: u64,
    pub dom: HashMap<String, u64>,
    pub intl: HashMap<String, u64>,
    pub birc: HashMap<String, u64>,
    pub mirc: HashMap<String, u64>,
    pub partner_birc: HashMap<String, u64>,
    pub partner_mirc: HashMap<String, u64>,
}

impl RefCountry {
    pub fn sims(&self) -> [Option<f64>; 5] {
        [
            ref_cosine(&self.dom, &self.intl),
            ref_cosine(&self.dom, &self.birc),
            ref_cosine(&self.dom, &self.mirc),
            ref_cosine(&self.birc, &self.mirc),
            ref_cosine(&self.partner_birc, &self.partner_mirc),
        ]
    }
}

/// Plain floating-point cosine over hash maps.
pub fn ref_cosine(a: &HashMap<String, u64>, b: &HashMap<String, u64>) -> Option<f64> {
    let na: f64 = a.values().map(|&v| (v as f64) * (v as f64)).sum();
    let nb: f64 = b.values().map(|&v| (v as f64) * (v as f64)).sum();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let dot: f64 = a
        .iter()
        .filter_map(|(k, &v)| b.get(k).map(|&w| v as f64 * w as f64))
        .sum();
    Some((dot / (na.sqrt() * nb.sqrt())).min(1.0))
}

/// Naive recount of a clean JSONL corpus, parsed as untyped JSON.
/// Country codes are trimmed and uppercased; duplicates collapse.
pub fn reference_recount(text: &str) -> BTreeMap<String, RefCountry> {
    let mut out: BTreeMap<String, RefCountry> = BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line).expect("reference input is clean");
        let strings = |field: &str| -> Vec<String> {
            v[field]
                .as_array()
                .expect("array field")
                .iter()
                .map(|s| s.as_str().expect("string").trim().to_string())
                .collect()
        };
        let subjects: HashSet<String> = strings("subjects").into_iter().collect();
        let countries: HashSet<String> = strings("countries")
            .into_iter()
            .map(|c| c.to_uppercase())
            .collect();
        let k = countries.len();
        for c in &countries {
            let e = out.entry(c.clone()).or_default();
            e.n_total += 1;
            let (disc, partner) = match k {
                1 => {
                    e.n_dom += 1;
                    (&mut e.dom, None)
                }
                2 => {
                    e.n_birc += 1;
                    (&mut e.birc, Some(&mut e.partner_birc))
                }
                _ => {
                    e.n_mirc += 1;
                    (&mut e.mirc, Some(&mut e.partner_mirc))
                }
            };
            for s in &subjects {
                *disc.entry(s.clone()).or_default() += 1;
            }
            if let Some(partner) = partner {
                for p in countries.iter().filter(|p| *p != c) {
                    *partner.entry(p.clone()).or_default() += 1;
                }
            }
            if k > 1 {
                for s in &subjects {
                    *e.intl.entry(s.clone()).or_default() += 1;
                }
            }
        }
    }
    out
}

/// Scenario sized so that it yields at least `n_records` records.
pub fn small_spec(seed: u64, n_countries: usize, n_records: usize) -> ScenarioSpec {
    let sizes = (n_countries - 2).min(4);
    ScenarioSpec {
        seed,
        n_countries,
        n_subjects: 12,
        pubs_per_country_year: (n_records as f64 / (n_countries as f64 * 10.0)) * 1.5,
        drift_birc: 0.3,
        drift_mirc: 0.6,
        mirc_size_weights: vec![1.0 / sizes as f64; sizes],
        ..Default::default()
    }
}

pub fn small_records(seed: u64, n_countries: usize, n_records: usize) -> Vec<PublicationRecord> {
    let spec = small_spec(seed, n_countries, n_records);
    generate(&spec.resolve().expect("valid scenario"))
        .take(n_records)
        .collect()
}

pub fn region_csv_for(n_countries: usize, seed: u64) -> String {
    small_spec(seed, n_countries, 1)
        .resolve()
        .expect("valid scenario")
        .region_map_csv()
}

/// Serializes records, and with `perturb` rewrites some country codes in
/// lower case, pads them with spaces or repeats them.
pub fn to_jsonl(records: &[PublicationRecord], perturb: Option<u64>) -> String {
    let mut rng = perturb.map(ChaCha8Rng::seed_from_u64);
    let mut out = String::new();
    for r in records {
        let line = match rng.as_mut() {
            None => format_record(r),
            Some(rng) => {
                let mut countries: Vec<String> = Vec::new();
                for c in &r.countries {
                    let s = c.as_str();
                    countries.push(match rng.random_range(0..4) {
                        0 => s.to_lowercase(),
                        1 => format!(" {s} "),
                        _ => s.to_string(),
                    });
                    if rng.random_bool(0.1) {
                        countries.push(s.to_string());
                    }
                }
                let subjects: Vec<&str> = r.subjects.iter().map(|s| s.as_str()).collect();
                serde_json::json!({
                    "id": r.id,
                    "year": r.year,
                    "subjects": subjects,
                    "countries": countries,
                })
                .to_string()
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// A directory holding `corpus.jsonl` and `regions.csv`.
pub struct Fixture {
    pub dir: tempfile::TempDir,
}

impl Fixture {
    pub fn new(corpus: &str, regions: &str) -> Fixture {
        let dir = tempfile::tempdir().expect("tempdir");
        std::fs::write(dir.path().join("corpus.jsonl"), corpus).unwrap();
        std::fs::write(dir.path().join("regions.csv"), regions).unwrap();
        Fixture { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn corpus(&self) -> PathBuf {
        self.path("corpus.jsonl")
    }

    pub fn regions(&self) -> PathBuf {
        self.path("regions.csv")
    }

    /// Arguments for `sub` with this fixture's inputs and `extra` flags.
    pub fn args(&self, sub: &str, out: Option<&Path>, extra: &[&str]) -> Vec<String> {
        let mut v = vec![
            "collabsim".to_string(),
            sub.to_string(),
            "--input".into(),
            self.corpus().display().to_string(),
            "--regions".into(),
            self.regions().display().to_string(),
        ];
        if let Some(out) = out {
            v.push("--out".into());
            v.push(out.display().to_string());
        }
        v.extend(extra.iter().map(|s| s.to_string()));
        v
    }

    /// Runs `sub` in-process.
    pub fn run(
        &self,
        sub: &str,
        out: Option<&Path>,
        extra: &[&str],
    ) -> collabsim::Result<RunOutcome> {
        use clap::Parser;
        let cli = Cli::try_parse_from(self.args(sub, out, extra)).expect("valid arguments");
        let (step, args) = match &cli.command {
            Command::Validate(a) => (Step::Validate, a),
            Command::Profile(a) => (Step::Profile, a),
            Command::Similarity(a) => (Step::Similarity, a),
            Command::Aggregate(a) => (Step::Aggregate, a),
            Command::Growth(a) => (Step::Growth, a),
            Command::Report(a) => (Step::Report, a),
            Command::Synth(_) => panic!("not a run step"),
        };
        collabsim::cli::run_step(step, &RunConfig::from_args(args)?)
    }
}

/// Parses a CSV file into header-keyed rows.
pub fn read_csv(path: &Path) -> Vec<HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).expect("readable csv");
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            header
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}
