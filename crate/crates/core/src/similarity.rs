//! Cosine similarity of count profiles and the five per-country indicators.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{CountryCode, RegionMap};
use crate::error::{Error, Result};
use crate::output::fmt_opt;
use crate::profiles::{CountryProfileSet, Profile, ProfileTable};

/// `dot(p, q) / (|p| |q|)` over the union of keys, or `None` when either
/// profile is empty.
///
/// Dot product and squared norms are accumulated exactly in integers over
/// the canonically ordered keys, so the result does not depend on how the
/// profiles were built. Both profiles share a key type, which rules out
/// comparing subject profiles against partner profiles.
pub fn cosine<K: Ord>(p: &Profile<K>, q: &Profile<K>) -> Option<f64> {
    if p.is_empty() || q.is_empty() {
        return None;
    }
    let norm2 = |x: &Profile<K>| {
        x.iter()
            .map(|(_, v)| (v as u128) * (v as u128))
            .sum::<u128>()
    };
    let (np, nq) = (norm2(p), norm2(q));

    let mut dot: u128 = 0;
    let mut a = p.iter().peekable();
    let mut b = q.iter().peekable();
    while let (Some((ka, va)), Some((kb, vb))) = (a.peek(), b.peek()) {
        match ka.cmp(kb) {
            std::cmp::Ordering::Less => {
                a.next();
            }
            std::cmp::Ordering::Greater => {
                b.next();
            }
            std::cmp::Ordering::Equal => {
                dot += (*va as u128) * (*vb as u128);
                a.next();
                b.next();
            }
        }
    }
    // equality in Cauchy-Schwarz: the profiles are proportional
    if dot
        .checked_mul(dot)
        .is_some_and(|d2| Some(d2) == np.checked_mul(nq))
    {
        return Some(1.0);
    }
    let value = dot as f64 / ((np as f64).sqrt() * (nq as f64).sqrt());
    Some(value.clamp(0.0, 1.0))
}

/// The five per-country similarity indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Indicator {
    /// Domestic vs international subject profile.
    DomInt,
    DomBirc,
    DomMirc,
    /// Bilateral vs multilateral subject profile.
    BircMircDisc,
    /// Bilateral vs multilateral partner profile.
    BircMircPartner,
}

impl Indicator {
    pub const ALL: [Indicator; 5] = [
        Indicator::DomInt,
        Indicator::DomBirc,
        Indicator::DomMirc,
        Indicator::BircMircDisc,
        Indicator::BircMircPartner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::DomInt => "sim_dom_int",
            Indicator::DomBirc => "sim_dom_birc",
            Indicator::DomMirc => "sim_dom_mirc",
            Indicator::BircMircDisc => "sim_birc_mirc_disc",
            Indicator::BircMircPartner => "sim_birc_mirc_partner",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Indicator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Indicator::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::UnknownSelector {
                name: s.to_string(),
                valid: Indicator::ALL.map(Indicator::name).join(", "),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountrySimilarityReport {
    pub country: CountryCode,
    pub region: String,
    /// False when the country was absent from the region map.
    pub region_known: bool,
    pub sim_dom_int: Option<f64>,
    pub sim_dom_birc: Option<f64>,
    pub sim_dom_mirc: Option<f64>,
    pub sim_birc_mirc_disc: Option<f64>,
    pub sim_birc_mirc_partner: Option<f64>,
    pub n_pub_total: u64,
    pub n_dom: u64,
    pub n_birc: u64,
    pub n_mirc: u64,
    pub n_mega: u64,
}

impl CountrySimilarityReport {
    pub fn value(&self, indicator: Indicator) -> Option<f64> {
        match indicator {
            Indicator::DomInt => self.sim_dom_int,
            Indicator::DomBirc => self.sim_dom_birc,
            Indicator::DomMirc => self.sim_dom_mirc,
            Indicator::BircMircDisc => self.sim_birc_mirc_disc,
            Indicator::BircMircPartner => self.sim_birc_mirc_partner,
        }
    }

    pub fn n_international(&self) -> u64 {
        self.n_birc + self.n_mirc + self.n_mega
    }
}

pub fn five_indicators(ps: &CountryProfileSet, regions: &RegionMap) -> CountrySimilarityReport {
    let d = &ps.disciplinary;
    let counts = &ps.pub_counts.totals;
    let region = regions.region_of(ps.country);
    CountrySimilarityReport {
        country: ps.country,
        region: regions.region_or_unknown(ps.country).to_string(),
        region_known: region.is_some(),
        sim_dom_int: cosine(&d.domestic, &d.international),
        sim_dom_birc: cosine(&d.domestic, &d.birc),
        sim_dom_mirc: cosine(&d.domestic, &d.mirc),
        sim_birc_mirc_disc: cosine(&d.birc, &d.mirc),
        sim_birc_mirc_partner: cosine(&ps.partner.birc, &ps.partner.mirc),
        n_pub_total: counts.total(),
        n_dom: counts.domestic,
        n_birc: counts.bilateral,
        n_mirc: counts.multilateral,
        n_mega: counts.mega,
    }
}

/// One report per country, in country order.
pub fn similarity_reports(
    table: &ProfileTable,
    regions: &RegionMap,
) -> Vec<CountrySimilarityReport> {
    let sets: Vec<&CountryProfileSet> = table.iter().collect();
    sets.par_iter()
        .map(|ps| five_indicators(ps, regions))
        .collect()
}

/// Unweighted per-indicator mean over eligible countries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorldBaseline {
    means: [Option<f64>; 5],
    eligible: [usize; 5],
    /// Countries with fewer publications than this are not averaged.
    pub min_pubs: u64,
}

impl WorldBaseline {
    pub fn mean(&self, indicator: Indicator) -> Option<f64> {
        self.means[indicator.index()]
    }

    pub fn eligible_count(&self, indicator: Indicator) -> usize {
        self.eligible[indicator.index()]
    }
}

pub fn world_baseline(reports: &[CountrySimilarityReport], min_pubs: u64) -> WorldBaseline {
    let mut means = [None; 5];
    let mut eligible = [0; 5];
    for ind in Indicator::ALL {
        let values: Vec<f64> = reports
            .iter()
            .filter(|r| r.n_pub_total >= min_pubs)
            .filter_map(|r| r.value(ind))
            .collect();
        eligible[ind.index()] = values.len();
        if !values.is_empty() {
            means[ind.index()] = Some(values.iter().sum::<f64>() / values.len() as f64);
        }
    }
    WorldBaseline {
        means,
        eligible,
        min_pubs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviationLabel {
    Above,
    Below,
    At,
    Undefined,
}

impl DeviationLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviationLabel::Above => "above",
            DeviationLabel::Below => "below",
            DeviationLabel::At => "at",
            DeviationLabel::Undefined => "undefined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub delta: Option<f64>,
    pub label: DeviationLabel,
}

pub fn deviation_of(value: Option<f64>, baseline: Option<f64>) -> Deviation {
    match (value, baseline) {
        (Some(v), Some(b)) => {
            let delta = v - b;
            let label = if delta > 0.0 {
                DeviationLabel::Above
            } else if delta < 0.0 {
                DeviationLabel::Below
            } else {
                DeviationLabel::At
            };
            Deviation {
                delta: Some(delta),
                label,
            }
        }
        _ => Deviation {
            delta: None,
            label: DeviationLabel::Undefined,
        },
    }
}

/// Signed distance from the world average for every indicator.
pub fn deviation(report: &CountrySimilarityReport, baseline: &WorldBaseline) -> [Deviation; 5] {
    Indicator::ALL.map(|ind| deviation_of(report.value(ind), baseline.mean(ind)))
}

pub const REPORT_CSV_HEADER: [&str; 14] = [
    "country",
    "region",
    "n_pub_total",
    "n_dom",
    "n_birc",
    "n_mirc",
    "sim_dom_int",
    "sim_dom_birc",
    "sim_dom_mirc",
    "sim_birc_mirc_disc",
    "sim_birc_mirc_partner",
    "label_dom_int",
    "label_birc_mirc_disc",
    "label_birc_mirc_partner",
];

/// Writes `countries.csv`. Undefined similarities are empty cells; their
/// labels read `undefined`.
pub fn write_report_csv<W: Write>(
    reports: &[CountrySimilarityReport],
    baseline: &WorldBaseline,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_CSV_HEADER)?;
    for r in reports {
        let dev = deviation(r, baseline);
        let label = |ind: Indicator| dev[ind.index()].label.as_str();
        let mut row = vec![
            r.country.to_string(),
            r.region.clone(),
            r.n_pub_total.to_string(),
            r.n_dom.to_string(),
            r.n_birc.to_string(),
            r.n_mirc.to_string(),
        ];
        row.extend(Indicator::ALL.map(|i| fmt_opt(r.value(i))));
        row.push(label(Indicator::DomInt).into());
        row.push(label(Indicator::BircMircDisc).into());
        row.push(label(Indicator::BircMircPartner).into());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<countries>", e))?;
    Ok(())
}
