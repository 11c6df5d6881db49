//! Acceptance criteria, run sequentially with one status line each.
//!
//! ```bash
//! cargo test -p collabsim --test acceptance
//! ```

mod common;

use std::collections::BTreeMap;
use std::io::Cursor;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use collabsim::classify::{classify_count, MegaThreshold};
use collabsim::corpus::RegionMap;
use collabsim::pipeline::{ingest, Analysis, AnalysisConfig, IngestConfig};
use collabsim::synth::write_corpus;
use collabsim::{
    classify, cosine, growth_rate, threshold_flags, CollabTag, CountryCode,
    CountrySimilarityReport, GrowthMethod, Indicator, Profile, ProfileTable, PublicationRecord,
    ScenarioSpec,
};
use common::{read_csv, reference_recount, small_records, to_jsonl, Fixture};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn random_profile(rng: &mut ChaCha8Rng, dims: u32) -> Profile<u32> {
    let support = rng.random_range(0..=12usize);
    (0..support)
        .map(|_| (rng.random_range(0..dims), rng.random_range(1..=1_000u64)))
        .collect()
}

fn cosine_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc051);
    let n = 20_000;
    let mut defined = 0;
    for _ in 0..n {
        let dims = rng.random_range(1..=50);
        let p = random_profile(&mut rng, dims);
        let q = random_profile(&mut rng, dims);
        let pq = cosine(&p, &q);
        let qp = cosine(&q, &p);
        ensure!(
            pq.map(f64::to_bits) == qp.map(f64::to_bits),
            "asymmetric: {pq:?} vs {qp:?}"
        );
        ensure!(
            pq.is_none() == (p.is_empty() || q.is_empty()),
            "definedness wrong for {p:?} {q:?}"
        );
        if let Some(c) = pq {
            defined += 1;
            ensure!((-1e-12..=1.0 + 1e-12).contains(&c), "out of range: {c}");
            let k = rng.random_range(2..=1_000u64);
            let scaled = cosine(&p.scaled(k), &q).unwrap();
            ensure!(
                (scaled - c).abs() <= 1e-12,
                "scaling by {k}: {scaled} vs {c}"
            );
        }
        if !p.is_empty() {
            let s = cosine(&p, &p).unwrap();
            ensure!((s - 1.0).abs() <= 1e-12, "self similarity {s}");
        }
    }
    Ok(format!("{n} pairs, {defined} defined"))
}

fn oracle_equivalence() -> Outcome {
    let mut worst_mem: f64 = 0.0;
    let mut worst_csv: f64 = 0.0;
    let mut countries = 0;
    for seed in 0..20u64 {
        let n_countries = 4 + (seed as usize % 9);
        let records = small_records(seed, n_countries, 500);
        ensure!(
            records.len() == 500,
            "scenario produced {} records",
            records.len()
        );
        let corpus = to_jsonl(&records, Some(seed));
        let regions = common::region_csv_for(n_countries, seed);
        let fx = Fixture::new(&corpus, &regions);
        let out = fx.path("out");
        let outcome = fx
            .run("similarity", Some(&out), &[])
            .map_err(|e| format!("pipeline failed: {e}"))?;
        let reference = reference_recount(&corpus);

        let region_map = RegionMap::from_reader(regions.as_bytes()).unwrap();
        let analysis = Analysis::new(&outcome.ingested, &region_map, &AnalysisConfig::default());
        let rows = read_csv(&out.join("countries.csv"));
        ensure!(
            rows.len() == reference.len() && analysis.reports.len() == reference.len(),
            "seed {seed}: {} csv rows, {} reports, {} reference countries",
            rows.len(),
            analysis.reports.len(),
            reference.len()
        );
        for ((row, report), (code, want)) in rows.iter().zip(&analysis.reports).zip(&reference) {
            ensure!(
                &row["country"] == code,
                "seed {seed}: row order {} vs {code}",
                row["country"]
            );
            for (col, n) in [
                ("n_pub_total", want.n_total),
                ("n_dom", want.n_dom),
                ("n_birc", want.n_birc),
                ("n_mirc", want.n_mirc),
            ] {
                ensure!(
                    row[col] == n.to_string(),
                    "seed {seed} {code} {col}: {} vs {n}",
                    row[col]
                );
            }
            for (ind, want) in Indicator::ALL.into_iter().zip(want.sims()) {
                let got = report.value(ind);
                let cell = &row[ind.name()];
                match (got, want) {
                    (None, None) => ensure!(cell.is_empty(), "seed {seed} {code}: cell `{cell}`"),
                    (Some(g), Some(w)) => {
                        worst_mem = worst_mem.max((g - w).abs());
                        ensure!(
                            (g - w).abs() <= 1e-12,
                            "seed {seed} {code} {ind}: {g} vs {w}"
                        );
                        let c: f64 = cell.parse().map_err(|_| format!("bad cell `{cell}`"))?;
                        worst_csv = worst_csv.max((c - w).abs());
                        ensure!(
                            (c - w).abs() <= 5e-7 + 1e-12,
                            "seed {seed} {code} {ind}: csv {c} vs {w}"
                        );
                    }
                    _ => return Err(format!("seed {seed} {code} {ind}: {got:?} vs {want:?}")),
                }
            }
        }
        countries += reference.len();
    }
    Ok(format!(
        "{countries} countries; max diff {worst_mem:.1e} in memory, {worst_csv:.1e} in csv (6 dp)"
    ))
}

fn merge_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3e76e);
    for corpus in 0..10u64 {
        let records = small_records(100 + corpus, 10, 1000);
        let mega = (corpus % 2 == 0).then(|| MegaThreshold::new(4).unwrap());
        let single = ProfileTable::from_records(&records, mega);
        let mut shards: [Vec<PublicationRecord>; 4] = Default::default();
        for r in &records {
            shards[rng.random_range(0..4)].push(r.clone());
        }
        let mut parts: Vec<ProfileTable> = shards
            .iter()
            .map(|s| ProfileTable::from_records(s, mega))
            .collect();
        parts.shuffle(&mut rng);
        let mut merged = ProfileTable::new();
        for p in &parts {
            merged.merge(p);
        }
        ensure!(merged == single, "corpus {corpus}: sharded build differs");
        merged
            .check_invariants()
            .map_err(|e| format!("corpus {corpus}: {e}"))?;
    }
    Ok("10 corpora x 1000 records, 4 random shards each".into())
}

fn classification_totality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc1a55);
    let alphabet: Vec<String> = (0..26 * 26)
        .map(|i| {
            format!(
                "{}{}",
                (b'A' + (i / 26) as u8) as char,
                (b'A' + (i % 26) as u8) as char
            )
        })
        .collect();
    let mut checked = 0;
    for k in 1..=30usize {
        for _ in 0..20 {
            let countries: Vec<&String> = alphabet.choose_multiple(&mut rng, k).collect();
            let r = PublicationRecord::new("r", 2010, ["S"], countries).unwrap();
            ensure!(
                r.country_count() == k,
                "k={k}: record has {}",
                r.country_count()
            );
            let base = match k {
                1 => CollabTag::Domestic,
                2 => CollabTag::Bilateral,
                _ => CollabTag::Multilateral,
            };
            ensure!(classify(&r, None).tag == base, "k={k} without mega");
            for t in 3..=31 {
                let want = if k >= t {
                    CollabTag::MegaMultilateral
                } else {
                    base
                };
                let got = classify(&r, Some(MegaThreshold::new(t).unwrap()));
                ensure!(
                    got.tag == want && got.country_count == k,
                    "k={k} t={t}: {got:?}"
                );
                ensure!(
                    classify_count(k, Some(MegaThreshold::new(t).unwrap())) == got,
                    "k={k}"
                );
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} classifications over k = 1..30"))
}

fn hypothesis() -> Outcome {
    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        }
    };
    let mut holds = 0;
    let mut records = 0;
    let mut gaps = Vec::new();
    for seed in 1..=20u64 {
        let scenario = ScenarioSpec {
            seed,
            n_countries: 20,
            years: (2008, 2017),
            pubs_per_country_year: 500.0,
            drift_birc: 0.2,
            drift_mirc: 0.8,
            ..Default::default()
        }
        .resolve()
        .map_err(|e| e.to_string())?;
        let mut corpus = Vec::new();
        records += write_corpus(&scenario, &mut corpus).map_err(|e| e.to_string())?;
        let regions = RegionMap::from_reader(scenario.region_map_csv().as_bytes()).unwrap();
        let ingested = ingest(Cursor::new(corpus), &regions, &IngestConfig::default())
            .map_err(|e| e.to_string())?;
        let analysis = Analysis::new(&ingested, &regions, &AnalysisConfig::default());
        let vals = |i| {
            analysis
                .values(i)
                .into_iter()
                .filter_map(|(_, v)| v)
                .collect::<Vec<_>>()
        };
        let (birc, mirc) = (
            median(vals(Indicator::DomBirc)),
            median(vals(Indicator::DomMirc)),
        );
        gaps.push(birc - mirc);
        if mirc < birc {
            holds += 1;
        }
    }
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let detail = format!(
        "{holds}/20 seeds, {} records per seed on average, smallest median gap {min_gap:.4}",
        records / 20
    );
    ensure!(holds >= 19, "{detail}");
    Ok(detail)
}

fn growth_checks() -> Outcome {
    let series = |f: &dyn Fn(i32) -> u64,
                  years: std::ops::RangeInclusive<i32>|
     -> BTreeMap<i32, u64> { years.map(|y| (y, f(y))).collect() };
    let pct = |s: &BTreeMap<i32, u64>, m| growth_rate(s, m).map(|g| g.rate_pct());
    let mut lines = Vec::new();
    for m in [GrowthMethod::Cagr, GrowthMethod::Loglinear] {
        let constant = pct(&series(&|_| 500, 2008..=2017), m).ok_or("constant undefined")?;
        ensure!(
            format!("{constant:.4}") == "0.0000",
            "{m:?} constant: {constant}"
        );
        let doubling = pct(&[(2016, 40), (2017, 80)].into(), m).ok_or("doubling undefined")?;
        ensure!(
            format!("{doubling:.4}") == "100.0000",
            "{m:?} doubling: {doubling}"
        );
        let geo = series(
            &|y| (1e4 * 1.114f64.powi(y - 1980)).round() as u64,
            1980..=2016,
        );
        let g = pct(&geo, m).ok_or("geometric undefined")?;
        ensure!((g - 11.4).abs() <= 0.05, "{m:?} geometric: {g}");
        lines.push(format!("{}: {g:.4}%", m.as_str()));
    }
    Ok(format!(
        "0.0000% / 100.0000% / 11.4% over 37 years -> {}",
        lines.join(", ")
    ))
}

fn report_with(country: &str, v: Option<f64>) -> CountrySimilarityReport {
    CountrySimilarityReport {
        country: CountryCode::normalize(country).unwrap(),
        region: "R".into(),
        region_known: true,
        sim_dom_int: None,
        sim_dom_birc: v,
        sim_dom_mirc: None,
        sim_birc_mirc_disc: None,
        sim_birc_mirc_partner: None,
        n_pub_total: 10,
        n_dom: 5,
        n_birc: 5,
        n_mirc: 0,
        n_mega: 0,
    }
}

fn threshold_flagging() -> Outcome {
    let table = [
        ("AR", Some(0.12)),
        ("BR", Some(0.4999999)),
        ("CL", Some(0.5)),
        ("DE", Some(0.5000001)),
        ("EG", None),
        ("FR", Some(0.0)),
        ("GH", Some(0.93)),
        ("IN", Some(0.49)),
        ("JP", Some(1.0)),
        ("KE", Some(0.71)),
    ];
    let reports: Vec<_> = table.iter().map(|(c, v)| report_with(c, *v)).collect();
    let values: Vec<_> = reports
        .iter()
        .map(|r| (r.country, r.sim_dom_birc))
        .collect();
    let manual: Vec<CountryCode> = table
        .iter()
        .filter(|(_, v)| matches!(v, Some(x) if *x < 0.5))
        .map(|(c, _)| CountryCode::normalize(c).unwrap())
        .collect();
    let flags = threshold_flags(&values, 0.5);
    ensure!(
        flags.flagged == manual,
        "flagged {:?}, manual {manual:?}",
        flags.flagged
    );
    ensure!(flags.undefined == 1, "undefined count {}", flags.undefined);
    let cl = CountryCode::normalize("CL").unwrap();
    ensure!(!flags.flagged.contains(&cl), "0.5 must not be flagged");

    let mut csv = Vec::new();
    collabsim::aggregates::write_flagged_csv(&reports, &[Indicator::DomBirc], 0.5, &mut csv)
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8(csv).unwrap();
    let listed: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    let manual_names: Vec<&str> = manual.iter().map(|c| c.as_str()).collect();
    ensure!(listed == manual_names, "flagged.csv lists {listed:?}");
    Ok(format!(
        "flagged {manual_names:?}; CL at 0.5 kept, EG undefined"
    ))
}

fn max_child_rss_kb() -> i64 {
    // SAFETY: getrusage only writes into the zeroed struct we pass.
    unsafe {
        let mut usage: libc::rusage = std::mem::zeroed();
        libc::getrusage(libc::RUSAGE_CHILDREN, &mut usage);
        usage.ru_maxrss
    }
}

fn read_dir_sorted(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn determinism_and_resources() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_collabsim");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = ScenarioSpec {
        seed: 2024,
        n_countries: 40,
        years: (2008, 2017),
        pubs_per_country_year: 2_500.0,
        drift_birc: 0.2,
        drift_mirc: 0.6,
        ..Default::default()
    };
    let scenario_path = dir.path().join("scenario.toml");
    std::fs::write(&scenario_path, spec.to_toml_string()).unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let regions = dir.path().join("regions.csv");
    let status = Command::new(bin)
        .args(["synth", "--scenario"])
        .arg(&scenario_path)
        .arg("--out")
        .arg(&corpus)
        .arg("--regions-out")
        .arg(&regions)
        .status()
        .map_err(|e| e.to_string())?;
    ensure!(status.success(), "synth failed: {status}");
    let lines = std::fs::read_to_string(&corpus).unwrap().lines().count();
    ensure!(
        lines >= 1_000_000 * 99 / 100,
        "corpus has only {lines} records"
    );

    let out = dir.path().join("out");
    let mut runs: Vec<(Duration, BTreeMap<String, Vec<u8>>)> = Vec::new();
    for i in 0..2 {
        let start = Instant::now();
        let status = Command::new(bin)
            .arg("report")
            .arg("--input")
            .arg(&corpus)
            .arg("--regions")
            .arg(&regions)
            .arg("--out")
            .arg(&out)
            .arg("--dump-profiles")
            .status()
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        ensure!(status.success(), "report run {i} failed: {status}");
        runs.push((elapsed, read_dir_sorted(&out)));
        std::fs::remove_dir_all(&out).unwrap();
    }
    let rss_mb = max_child_rss_kb() as f64 / 1024.0;
    let (a, b) = (&runs[0].1, &runs[1].1);
    ensure!(a.len() >= 7, "only {} output files", a.len());
    ensure!(a == b, "outputs differ between runs");
    let slowest = runs.iter().map(|r| r.0).max().unwrap();
    let detail = format!(
        "{lines} records, {} files identical, slowest run {:.1} s, peak RSS {rss_mb:.0} MB",
        a.len(),
        slowest.as_secs_f64()
    );
    ensure!(slowest < Duration::from_secs(60), "{detail}");
    ensure!(rss_mb < 2048.0, "{detail}");
    Ok(detail)
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "cosine property suite",
            cosine_properties,
            Some(Duration::from_secs(10)),
        ),
        (
            "oracle equivalence",
            oracle_equivalence,
            Some(Duration::from_secs(30)),
        ),
        ("merge law", merge_law, None),
        ("classification totality", classification_totality, None),
        (
            "drift hypothesis",
            hypothesis,
            Some(Duration::from_secs(120)),
        ),
        ("growth rates", growth_checks, None),
        ("threshold flags", threshold_flagging, None),
        ("determinism and resources", determinism_and_resources, None),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let result = match (result, budget) {
            (Ok(d), Some(b)) if took > b => Err(format!("{d}; exceeded {} s budget", b.as_secs())),
            (r, _) => r,
        };
        let (status, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{status} [{}] {name} ({:.2} s): {detail}",
            i + 1,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
