//! Seeded synthetic corpora under a parameterized globalization scenario.
//!
//! Every publication is led by one country. Its collaboration type is drawn
//! from the type mix, its partners from the lead's affinity row, and each of
//! its subjects from
//!
//! ```text
//! (1 - drift) * base[lead] + drift * global_agenda
//! ```
//!
//! where `drift` is 0 for domestic output and `drift_birc` / `drift_mirc`
//! for bilateral / multilateral output. Every record consumes the same
//! number of uniform draws whatever the drift values, so two scenarios that
//! differ only in drift produce the same countries, types and years.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{format_record, CountryCode, PublicationRecord, Subject};
use crate::error::{Error, Result};

/// The seven World Bank regions.
pub const WORLD_BANK_REGIONS: [&str; 7] = [
    "East Asia & Pacific",
    "Europe & Central Asia",
    "Latin America & Caribbean",
    "Middle East & North Africa",
    "North America",
    "South Asia",
    "Sub-Saharan Africa",
];

const PROB_TOL: f64 = 1e-9;

/// Scenario file contents. Anything left out is filled in by
/// [`ScenarioSpec::resolve`], deterministically from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub n_countries: usize,
    pub n_subjects: usize,
    pub years: (i32, i32),
    pub pubs_per_country_year: f64,
    /// `(p_dom, p_birc, p_mirc)`.
    pub type_mix: (f64, f64, f64),
    /// Weights over multilateral sizes 3, 4, 5, ...
    pub mirc_size_weights: Vec<f64>,
    pub drift_birc: f64,
    pub drift_mirc: f64,
    /// Probability that a publication lists a second subject.
    pub second_subject_prob: f64,
    /// Weight of the country-specific component in generated base
    /// distributions; the rest is a shared skewed profile.
    pub specialization: f64,
    pub countries: Option<Vec<String>>,
    pub regions: Option<Vec<String>>,
    pub subjects: Option<Vec<String>>,
    pub base_topics: Option<Vec<Vec<f64>>>,
    /// Defaults to uniform over subjects.
    pub global_agenda: Option<Vec<f64>>,
    pub affinity: Option<Vec<Vec<f64>>>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            seed: 1,
            n_countries: 20,
            n_subjects: 24,
            years: (2008, 2017),
            pubs_per_country_year: 50.0,
            type_mix: (0.6, 0.25, 0.15),
            mirc_size_weights: vec![0.5, 0.25, 0.15, 0.1],
            drift_birc: 0.0,
            drift_mirc: 0.0,
            second_subject_prob: 0.25,
            specialization: 0.1,
            countries: None,
            regions: None,
            subjects: None,
            base_topics: None,
            global_agenda: None,
            affinity: None,
        }
    }
}

impl ScenarioSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Fills in every unspecified component and validates the result.
    pub fn resolve(&self) -> Result<Scenario> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_5eed_5eed_5eed);

        let countries = match &self.countries {
            Some(list) => list
                .iter()
                .map(|c| CountryCode::normalize(c).map_err(|e| Error::Scenario(e.to_string())))
                .collect::<Result<Vec<_>>>()?,
            None => (0..self.n_countries)
                .map(synthetic_code)
                .collect::<Result<Vec<_>>>()?,
        };
        let n = countries.len();
        if n == 0 {
            return Err(Error::Scenario("no countries".into()));
        }

        let subjects = match &self.subjects {
            Some(list) => list
                .iter()
                .map(|s| Subject::new(s).map_err(|e| Error::Scenario(e.to_string())))
                .collect::<Result<Vec<_>>>()?,
            None => (0..self.n_subjects)
                .map(|i| Subject::new(&format!("S{i:03}")).expect("non-empty"))
                .collect(),
        };
        let m = subjects.len();
        if m == 0 {
            return Err(Error::Scenario("no subjects".into()));
        }

        let regions = match &self.regions {
            Some(r) => r.clone(),
            None => (0..n)
                .map(|i| WORLD_BANK_REGIONS[i % WORLD_BANK_REGIONS.len()].to_string())
                .collect(),
        };

        let base_topics = match &self.base_topics {
            Some(b) => b.clone(),
            None => {
                if !(0.0..=1.0).contains(&self.specialization) {
                    return Err(Error::Scenario("specialization must be in [0, 1]".into()));
                }
                let zipf: Vec<f64> = (0..m).map(|r| 1.0 / (r + 1) as f64).collect();
                let zipf = normalized(&zipf);
                (0..n)
                    .map(|_| {
                        let raw: Vec<f64> =
                            (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                        let specific = normalized(&raw);
                        zipf.iter()
                            .zip(&specific)
                            .map(|(z, s)| (1.0 - self.specialization) * z + self.specialization * s)
                            .collect()
                    })
                    .collect()
            }
        };

        let global_agenda = self
            .global_agenda
            .clone()
            .unwrap_or_else(|| vec![1.0 / m as f64; m]);

        let affinity = match &self.affinity {
            Some(a) => a.clone(),
            None => {
                let mut a = vec![vec![0.0; n]; n];
                #[allow(clippy::needless_range_loop)]
                for i in 0..n {
                    for j in (i + 1)..n {
                        let w = 0.2 + 0.8 * rng.random::<f64>();
                        a[i][j] = w;
                        a[j][i] = w;
                    }
                }
                a
            }
        };

        let scenario = Scenario {
            seed: self.seed,
            countries,
            regions,
            subjects,
            base_topics,
            global_agenda,
            type_mix: [self.type_mix.0, self.type_mix.1, self.type_mix.2],
            mirc_size: normalized_or_err(&self.mirc_size_weights, "mirc_size_weights")?,
            affinity,
            drift_birc: self.drift_birc,
            drift_mirc: self.drift_mirc,
            second_subject_prob: self.second_subject_prob,
            years: self.years,
            pubs_per_country_year: self.pubs_per_country_year,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioSpec::from_toml_str(&text)?.resolve()
}

fn synthetic_code(i: usize) -> Result<CountryCode> {
    if i >= 26 * 26 {
        return Err(Error::Scenario("at most 676 generated countries".into()));
    }
    let code = [b'A' + (i / 26) as u8, b'A' + (i % 26) as u8];
    CountryCode::normalize(std::str::from_utf8(&code).expect("ascii"))
        .map_err(|e| Error::Scenario(e.to_string()))
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn normalized_or_err(w: &[f64], what: &str) -> Result<Vec<f64>> {
    if w.is_empty() || w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0
    {
        return Err(Error::Scenario(format!(
            "{what} must be non-negative with positive sum"
        )));
    }
    Ok(normalized(w))
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Scenario(format!(
            "{what} has negative or non-finite entries"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::Scenario(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

/// A fully specified, validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub countries: Vec<CountryCode>,
    pub regions: Vec<String>,
    pub subjects: Vec<Subject>,
    /// One probability vector over `subjects` per country.
    pub base_topics: Vec<Vec<f64>>,
    pub global_agenda: Vec<f64>,
    /// `[p_dom, p_birc, p_mirc]`.
    pub type_mix: [f64; 3],
    /// Probabilities for multilateral sizes 3, 4, ...
    pub mirc_size: Vec<f64>,
    /// Symmetric, non-negative; the diagonal is ignored.
    pub affinity: Vec<Vec<f64>>,
    pub drift_birc: f64,
    pub drift_mirc: f64,
    pub second_subject_prob: f64,
    pub years: (i32, i32),
    pub pubs_per_country_year: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let n = self.countries.len();
        let m = self.subjects.len();
        let mut seen = std::collections::BTreeSet::new();
        if !self.countries.iter().all(|c| seen.insert(*c)) {
            return Err(Error::Scenario("duplicate country codes".into()));
        }
        if self.regions.len() != n {
            return Err(Error::Scenario(format!(
                "{} regions for {n} countries",
                self.regions.len()
            )));
        }
        if self.base_topics.len() != n || self.base_topics.iter().any(|b| b.len() != m) {
            return Err(Error::Scenario(format!("base_topics must be {n} x {m}")));
        }
        for (c, b) in self.countries.iter().zip(&self.base_topics) {
            check_distribution(b, &format!("base topics of {c}"))?;
        }
        if self.global_agenda.len() != m {
            return Err(Error::Scenario(
                "global_agenda length differs from subjects".into(),
            ));
        }
        check_distribution(&self.global_agenda, "global_agenda")?;
        check_distribution(&self.type_mix, "type_mix")?;
        check_distribution(&self.mirc_size, "mirc_size")?;
        for (name, d) in [
            ("drift_birc", self.drift_birc),
            ("drift_mirc", self.drift_mirc),
        ] {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::Scenario(format!("{name} must be in [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.second_subject_prob) {
            return Err(Error::Scenario(
                "second_subject_prob must be in [0, 1]".into(),
            ));
        }
        if self.years.0 > self.years.1 {
            return Err(Error::Scenario("years are reversed".into()));
        }
        if !(self.pubs_per_country_year.is_finite() && self.pubs_per_country_year >= 0.0) {
            return Err(Error::Scenario("pubs_per_country_year must be >= 0".into()));
        }
        if self.affinity.len() != n || self.affinity.iter().any(|r| r.len() != n) {
            return Err(Error::Scenario(format!("affinity must be {n} x {n}")));
        }
        for i in 0..n {
            for j in 0..n {
                let a = self.affinity[i][j];
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::Scenario("affinity entries must be >= 0".into()));
                }
                if (a - self.affinity[j][i]).abs() > PROB_TOL {
                    return Err(Error::Scenario("affinity must be symmetric".into()));
                }
            }
        }
        if self.type_mix[1] > 0.0 && n < 2 {
            return Err(Error::Scenario(
                "bilateral output needs at least 2 countries".into(),
            ));
        }
        if self.type_mix[2] > 0.0 && self.k_max() > n {
            return Err(Error::Scenario(format!(
                "multilateral size up to {} needs that many countries",
                self.k_max()
            )));
        }
        Ok(())
    }

    pub fn k_max(&self) -> usize {
        self.mirc_size.len() + 2
    }

    /// `country,region` CSV matching the generated country codes.
    pub fn region_map_csv(&self) -> String {
        let mut out = String::from("country,region\n");
        for (c, r) in self.countries.iter().zip(&self.regions) {
            out.push_str(&format!("{c},{r}\n"));
        }
        out
    }

    pub fn expected_records(&self) -> f64 {
        let years = (self.years.1 - self.years.0 + 1) as f64;
        years * self.countries.len() as f64 * self.pubs_per_country_year
    }
}

fn cdf(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|c| *c <= u).min(cdf.len() - 1)
}

/// Streaming generator; yields records in a fixed order for a given seed.
pub struct Generator<'a> {
    scenario: &'a Scenario,
    rng: ChaCha8Rng,
    poisson: Option<Poisson<f64>>,
    /// `subject_cdfs[lead][0|1|2]` for domestic, bilateral and multilateral drift.
    subject_cdfs: Vec<[Vec<f64>; 3]>,
    type_cdf: Vec<f64>,
    size_cdf: Vec<f64>,
    year: i32,
    lead: usize,
    remaining: u64,
    emitted: u64,
    weights: Vec<f64>,
}

impl<'a> Generator<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let mix = |base: &[f64], d: f64| -> Vec<f64> {
            let p: Vec<f64> = base
                .iter()
                .zip(&scenario.global_agenda)
                .map(|(b, g)| (1.0 - d) * b + d * g)
                .collect();
            cdf(&p)
        };
        let subject_cdfs = scenario
            .base_topics
            .iter()
            .map(|b| {
                [
                    mix(b, 0.0),
                    mix(b, scenario.drift_birc),
                    mix(b, scenario.drift_mirc),
                ]
            })
            .collect();
        let poisson = (scenario.pubs_per_country_year > 0.0)
            .then(|| Poisson::new(scenario.pubs_per_country_year).expect("positive rate"));
        let mut g = Generator {
            scenario,
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
            poisson,
            subject_cdfs,
            type_cdf: cdf(&scenario.type_mix),
            size_cdf: cdf(&scenario.mirc_size),
            year: scenario.years.0,
            lead: 0,
            remaining: 0,
            emitted: 0,
            weights: vec![0.0; scenario.countries.len()],
        };
        g.remaining = g.draw_cell_count();
        g
    }

    fn draw_cell_count(&mut self) -> u64 {
        match &self.poisson {
            Some(p) => p.sample(&mut self.rng) as u64,
            None => 0,
        }
    }

    /// Advances to the next (year, lead) cell; false when exhausted.
    fn next_cell(&mut self) -> bool {
        self.lead += 1;
        if self.lead == self.scenario.countries.len() {
            self.lead = 0;
            self.year += 1;
        }
        if self.year > self.scenario.years.1 {
            return false;
        }
        self.remaining = self.draw_cell_count();
        true
    }

    fn draw_partners(&mut self, k: usize, out: &mut Vec<usize>) {
        let n = self.scenario.countries.len();
        self.weights
            .copy_from_slice(&self.scenario.affinity[self.lead]);
        self.weights[self.lead] = 0.0;
        for _ in 0..k {
            let u: f64 = self.rng.random();
            let total: f64 = self.weights.iter().sum();
            let pick = if total > 0.0 {
                let target = u * total;
                let mut acc = 0.0;
                let mut pick = None;
                for (j, w) in self.weights.iter().enumerate() {
                    if *w > 0.0 {
                        acc += w;
                        pick = Some(j);
                        if acc > target {
                            break;
                        }
                    }
                }
                pick.expect("positive total")
            } else {
                // no affinity mass left: uniform over unused countries
                let free: Vec<usize> = (0..n)
                    .filter(|j| *j != self.lead && !out.contains(j))
                    .collect();
                free[((u * free.len() as f64) as usize).min(free.len() - 1)]
            };
            self.weights[pick] = 0.0;
            out.push(pick);
        }
    }

    fn make_record(&mut self) -> PublicationRecord {
        let s = self.scenario;
        let type_idx = draw(&self.type_cdf, self.rng.random());
        let mut members = vec![self.lead];
        match type_idx {
            0 => {}
            1 => self.draw_partners(1, &mut members),
            _ => {
                let k = 3 + draw(&self.size_cdf, self.rng.random());
                self.draw_partners(k - 1, &mut members);
            }
        }
        let cdf = &self.subject_cdfs[self.lead][type_idx];
        let first = draw(cdf, self.rng.random());
        let u_extra: f64 = self.rng.random();
        let u_second: f64 = self.rng.random();
        let mut subjects = vec![&s.subjects[first]];
        if u_extra < s.second_subject_prob {
            subjects.push(&s.subjects[draw(cdf, u_second)]);
        }
        self.emitted += 1;
        PublicationRecord::new(
            &format!("syn-{}-{}", s.seed, self.emitted),
            self.year,
            subjects.iter().map(|x| x.as_str()),
            members.iter().map(|i| s.countries[*i].as_str()),
        )
        .expect("generated records are valid")
    }
}

impl Iterator for Generator<'_> {
    type Item = PublicationRecord;

    fn next(&mut self) -> Option<PublicationRecord> {
        while self.remaining == 0 {
            if !self.next_cell() {
                return None;
            }
        }
        self.remaining -= 1;
        Some(self.make_record())
    }
}

pub fn generate(scenario: &Scenario) -> Generator<'_> {
    Generator::new(scenario)
}

/// Writes the corpus in the line-delimited input format; returns the
/// record count.
pub fn write_corpus<W: Write>(scenario: &Scenario, out: W) -> Result<u64> {
    let mut out = std::io::BufWriter::new(out);
    let mut n = 0;
    for r in generate(scenario) {
        out.write_all(format_record(&r).as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| Error::io("<synthetic corpus>", e))?;
        n += 1;
    }
    out.flush()
        .map_err(|e| Error::io("<synthetic corpus>", e))?;
    Ok(n)
}
