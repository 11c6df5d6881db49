//! Regional and temporal summaries over finished similarity reports:
//! boxplots of country values per region, annual growth rates, threshold
//! flags and scatter datasets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::classify::{
    birc_share_with, CollabTag, CollaborationType, ShareDenominator, YearCounts,
};
use crate::corpus::{CountryCode, PublicationRecord, RegionMap};
use crate::error::{Error, Result};
use crate::output::{fmt_f64, fmt_opt};
use crate::similarity::{CountrySimilarityReport, Indicator};

/// Linear interpolation between closest ranks (Hyndman & Fan type 7, the
/// default of R and NumPy). `sorted` must be ascending and non-empty.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotStats {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Points beyond 1.5 IQR from the quartiles, in ascending value order.
    pub outliers: Vec<(CountryCode, f64)>,
}

impl BoxplotStats {
    /// `None` for an empty input.
    pub fn from_values(values: &[(CountryCode, f64)]) -> Option<BoxplotStats> {
        if values.is_empty() {
            return None;
        }
        let mut sorted: Vec<(CountryCode, f64)> = values.to_vec();
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let xs: Vec<f64> = sorted.iter().map(|(_, v)| *v).collect();
        let q1 = quantile_type7(&xs, 0.25);
        let q3 = quantile_type7(&xs, 0.75);
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        Some(BoxplotStats {
            n: xs.len(),
            min: xs[0],
            q1,
            median: quantile_type7(&xs, 0.5),
            q3,
            max: xs[xs.len() - 1],
            outliers: sorted
                .into_iter()
                .filter(|(_, v)| *v < lo_fence || *v > hi_fence)
                .collect(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RegionBoxplots {
    pub by_region: BTreeMap<String, BoxplotStats>,
    /// Countries whose value was undefined.
    pub undefined: usize,
    /// Regions that appeared only with undefined values.
    pub omitted_regions: Vec<String>,
}

/// Per-region boxplots of unit-interval values. Values outside [0, 1] are
/// rejected.
pub fn region_boxplot(
    values: &[(CountryCode, Option<f64>)],
    regions: &RegionMap,
) -> Result<RegionBoxplots> {
    let mut grouped: BTreeMap<String, Vec<(CountryCode, f64)>> = BTreeMap::new();
    let mut undefined = 0;
    for (country, value) in values {
        let region = regions.region_or_unknown(*country).to_string();
        let slot = grouped.entry(region).or_default();
        match value {
            Some(v) if !(0.0..=1.0).contains(v) => {
                return Err(Error::OutOfRange {
                    country: *country,
                    value: *v,
                })
            }
            Some(v) => slot.push((*country, *v)),
            None => undefined += 1,
        }
    }
    let mut out = RegionBoxplots {
        undefined,
        ..Default::default()
    };
    for (region, vals) in grouped {
        match BoxplotStats::from_values(&vals) {
            Some(stats) => {
                out.by_region.insert(region, stats);
            }
            None => {
                log::info!("region {region} has no defined values; omitted");
                out.omitted_regions.push(region);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthMethod {
    /// Endpoint compound annual growth over the first and last non-zero years.
    #[default]
    Cagr,
    /// `exp(b) - 1` for the least-squares slope `b` of `ln N` on year.
    Loglinear,
}

impl GrowthMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthMethod::Cagr => "cagr",
            GrowthMethod::Loglinear => "loglinear",
        }
    }
}

impl fmt::Display for GrowthMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GrowthMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cagr" => Ok(GrowthMethod::Cagr),
            "loglinear" => Ok(GrowthMethod::Loglinear),
            _ => Err(Error::Config(format!(
                "unknown growth method `{s}` (expected cagr or loglinear)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRate {
    /// Per-year rate as a fraction (0.114 for 11.4 %).
    pub rate: f64,
    pub method: GrowthMethod,
    pub first_year: i32,
    pub last_year: i32,
}

impl GrowthRate {
    pub fn rate_pct(&self) -> f64 {
        self.rate * 100.0
    }
}

/// Annual growth of a count series. Zero-count years are ignored; fewer
/// than two usable years gives `None`.
pub fn growth_rate(annual: &BTreeMap<i32, u64>, method: GrowthMethod) -> Option<GrowthRate> {
    let points: Vec<(i32, f64)> = annual
        .iter()
        .filter(|(_, n)| **n > 0)
        .map(|(y, n)| (*y, *n as f64))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let (first_year, first) = points[0];
    let (last_year, last) = points[points.len() - 1];
    let rate = match method {
        GrowthMethod::Cagr => {
            let span = (last_year - first_year) as f64;
            (last / first).powf(1.0 / span) - 1.0
        }
        GrowthMethod::Loglinear => {
            // centre the years to keep the normal equations well conditioned
            let n = points.len() as f64;
            let mean_x = points.iter().map(|(y, _)| *y as f64).sum::<f64>() / n;
            let mean_y = points.iter().map(|(_, v)| v.ln()).sum::<f64>() / n;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (y, v) in &points {
                let dx = *y as f64 - mean_x;
                sxy += dx * (v.ln() - mean_y);
                sxx += dx * dx;
            }
            (sxy / sxx).exp() - 1.0
        }
    };
    Some(GrowthRate {
        rate,
        method,
        first_year,
        last_year,
    })
}

/// How a publication with several countries in one region is tallied
/// for that region.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionCounting {
    /// Once per region it touches.
    #[default]
    Deduplicated,
    /// Once per participating country.
    CountrySum,
}

impl FromStr for RegionCounting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dedup" | "deduplicated" => Ok(RegionCounting::Deduplicated),
            "country-sum" => Ok(RegionCounting::CountrySum),
            _ => Err(Error::Config(format!(
                "unknown region counting `{s}` (expected dedup or country-sum)"
            ))),
        }
    }
}

/// Region → year → publication counts by collaboration class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionalCounts {
    counts: BTreeMap<String, BTreeMap<i32, YearCounts>>,
}

impl RegionalCounts {
    pub fn add(
        &mut self,
        record: &PublicationRecord,
        ctype: CollaborationType,
        regions: &RegionMap,
        mode: RegionCounting,
    ) {
        let mut bump = |region: &str| {
            if !self.counts.contains_key(region) {
                self.counts.insert(region.to_string(), BTreeMap::new());
            }
            self.counts
                .get_mut(region)
                .expect("inserted above")
                .entry(record.year)
                .or_default()
                .add(ctype.tag, 1);
        };
        match mode {
            RegionCounting::Deduplicated => {
                let touched: BTreeSet<&str> = record
                    .countries
                    .iter()
                    .map(|c| regions.region_or_unknown(*c))
                    .collect();
                touched.into_iter().for_each(&mut bump);
            }
            RegionCounting::CountrySum => {
                for c in &record.countries {
                    bump(regions.region_or_unknown(*c));
                }
            }
        }
    }

    pub fn merge(&mut self, other: &RegionalCounts) {
        for (region, years) in &other.counts {
            let mine = self.counts.entry(region.clone()).or_default();
            for (y, c) in years {
                mine.entry(*y).or_default().merge(c);
            }
        }
    }

    pub fn regions(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    /// Annual counts of one collaboration class in one region.
    pub fn series(&self, region: &str, tag: CollabTag) -> BTreeMap<i32, u64> {
        self.counts
            .get(region)
            .map(|years| years.iter().map(|(y, c)| (*y, c.get(tag))).collect())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRateResult {
    pub region: String,
    pub collab_type: CollabTag,
    pub method: GrowthMethod,
    pub rate: Option<GrowthRate>,
}

/// Bilateral and multilateral growth for every region in `regions` plus
/// any region observed only in the counts.
pub fn regional_growth(
    counts: &RegionalCounts,
    regions: &RegionMap,
    method: GrowthMethod,
) -> Vec<GrowthRateResult> {
    let mut names: BTreeSet<&str> = regions.regions();
    names.extend(counts.regions());
    let mut out = Vec::new();
    for region in names {
        for tag in [CollabTag::Bilateral, CollabTag::Multilateral] {
            out.push(GrowthRateResult {
                region: region.to_string(),
                collab_type: tag,
                method,
                rate: growth_rate(&counts.series(region, tag), method),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ThresholdFlags {
    pub flagged: Vec<CountryCode>,
    pub undefined: usize,
}

/// Countries whose defined value is strictly below `t`.
pub fn threshold_flags(values: &[(CountryCode, Option<f64>)], t: f64) -> ThresholdFlags {
    let mut out = ThresholdFlags::default();
    for (c, v) in values {
        match v {
            Some(v) if *v < t => out.flagged.push(*c),
            Some(_) => {}
            None => out.undefined += 1,
        }
    }
    out
}

/// A field of [`CountrySimilarityReport`] or a ratio derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Indicator(Indicator),
    /// International publications over all publications.
    InternationalShare,
    /// Bilateral over international publications.
    BircShare,
    NPubTotal,
    NDom,
    NBirc,
    NMirc,
    NMega,
    NInternational,
}

impl Selector {
    const NAMED: [(&'static str, Selector); 9] = [
        ("international_share", Selector::InternationalShare),
        ("birc_share", Selector::BircShare),
        ("n_pub_total", Selector::NPubTotal),
        ("n_dom", Selector::NDom),
        ("n_birc", Selector::NBirc),
        ("n_mirc", Selector::NMirc),
        ("n_mega", Selector::NMega),
        ("n_international", Selector::NInternational),
        ("n_pub_international", Selector::NInternational),
    ];

    pub fn valid_names() -> Vec<&'static str> {
        let mut v: Vec<&str> = Indicator::ALL.iter().map(|i| i.name()).collect();
        v.extend(Self::NAMED.iter().map(|(n, _)| *n));
        v
    }

    pub fn count(self, r: &CountrySimilarityReport) -> Option<u64> {
        match self {
            Selector::NPubTotal => Some(r.n_pub_total),
            Selector::NDom => Some(r.n_dom),
            Selector::NBirc => Some(r.n_birc),
            Selector::NMirc => Some(r.n_mirc),
            Selector::NMega => Some(r.n_mega),
            Selector::NInternational => Some(r.n_international()),
            _ => None,
        }
    }

    pub fn value(self, r: &CountrySimilarityReport) -> Option<f64> {
        match self {
            Selector::Indicator(i) => r.value(i),
            Selector::InternationalShare => {
                (r.n_pub_total > 0).then(|| r.n_international() as f64 / r.n_pub_total as f64)
            }
            Selector::BircShare => report_birc_share(r, ShareDenominator::International),
            other => other.count(r).map(|n| n as f64),
        }
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(i) = s.parse::<Indicator>() {
            return Ok(Selector::Indicator(i));
        }
        Self::NAMED
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, sel)| *sel)
            .ok_or_else(|| Error::UnknownSelector {
                name: s.to_string(),
                valid: Self::valid_names().join(", "),
            })
    }
}

pub fn report_birc_share(
    r: &CountrySimilarityReport,
    denominator: ShareDenominator,
) -> Option<f64> {
    let counts = YearCounts {
        domestic: r.n_dom,
        bilateral: r.n_birc,
        multilateral: r.n_mirc,
        mega: r.n_mega,
    };
    birc_share_with(&counts, denominator)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub country: CountryCode,
    pub region: String,
    pub x: f64,
    pub y: f64,
    pub size: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScatterDataset {
    pub points: Vec<ScatterPoint>,
    /// Countries that passed the filter but had an undefined axis.
    pub dropped: usize,
}

/// Named axis configuration for a scatter dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScatterSpec {
    pub x: Selector,
    pub y: Selector,
    pub size: Selector,
}

impl ScatterSpec {
    pub fn parse(x: &str, y: &str, size: &str) -> Result<Self> {
        let size_sel: Selector = size.parse()?;
        if size_sel.count(&empty_report()).is_none() {
            return Err(Error::UnknownSelector {
                name: size.to_string(),
                valid: Self::count_names().join(", "),
            });
        }
        Ok(ScatterSpec {
            x: x.parse()?,
            y: y.parse()?,
            size: size_sel,
        })
    }

    fn count_names() -> Vec<&'static str> {
        Selector::NAMED
            .iter()
            .filter(|(n, _)| n.starts_with("n_"))
            .map(|(n, _)| *n)
            .collect()
    }

    /// International share against domestic/international similarity,
    /// sized by total output.
    pub fn international_share() -> Self {
        ScatterSpec {
            x: Selector::InternationalShare,
            y: Selector::Indicator(Indicator::DomInt),
            size: Selector::NPubTotal,
        }
    }

    /// Bilateral/multilateral subject similarity against partner
    /// similarity, sized by international output.
    pub fn birc_mirc() -> Self {
        ScatterSpec {
            x: Selector::Indicator(Indicator::BircMircDisc),
            y: Selector::Indicator(Indicator::BircMircPartner),
            size: Selector::NInternational,
        }
    }
}

fn empty_report() -> CountrySimilarityReport {
    CountrySimilarityReport {
        country: CountryCode::normalize("AA").expect("valid"),
        region: String::new(),
        region_known: false,
        sim_dom_int: None,
        sim_dom_birc: None,
        sim_dom_mirc: None,
        sim_birc_mirc_disc: None,
        sim_birc_mirc_partner: None,
        n_pub_total: 0,
        n_dom: 0,
        n_birc: 0,
        n_mirc: 0,
        n_mega: 0,
    }
}

pub fn scatter_dataset(
    reports: &[CountrySimilarityReport],
    spec: ScatterSpec,
    region_filter: Option<&str>,
) -> ScatterDataset {
    let mut out = ScatterDataset::default();
    for r in reports {
        if region_filter.is_some_and(|f| f != r.region) {
            continue;
        }
        let size = spec.size.count(r).unwrap_or(0);
        match (spec.x.value(r), spec.y.value(r)) {
            (Some(x), Some(y)) => out.points.push(ScatterPoint {
                country: r.country,
                region: r.region.clone(),
                x,
                y,
                size,
            }),
            _ => out.dropped += 1,
        }
    }
    out
}

pub const REGIONS_CSV_HEADER: [&str; 9] = [
    "region",
    "n_countries",
    "metric",
    "min",
    "q1",
    "median",
    "q3",
    "max",
    "n_outliers",
];

pub fn write_regions_csv<W: Write>(rows: &[(String, RegionBoxplots)], out: W) -> Result<()> {
    let mut by_region: BTreeMap<&str, Vec<(&str, &BoxplotStats)>> = BTreeMap::new();
    for (metric, plots) in rows {
        for (region, stats) in &plots.by_region {
            by_region
                .entry(region.as_str())
                .or_default()
                .push((metric.as_str(), stats));
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REGIONS_CSV_HEADER)?;
    for (region, metrics) in by_region {
        for (metric, s) in metrics {
            w.write_record([
                region.to_string(),
                s.n.to_string(),
                metric.to_string(),
                fmt_f64(s.min),
                fmt_f64(s.q1),
                fmt_f64(s.median),
                fmt_f64(s.q3),
                fmt_f64(s.max),
                s.outliers.len().to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<regions>", e))?;
    Ok(())
}

pub const GROWTH_CSV_HEADER: [&str; 6] = [
    "region",
    "collab_type",
    "method",
    "first_year",
    "last_year",
    "rate_pct",
];

pub fn write_growth_csv<W: Write>(rows: &[GrowthRateResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GROWTH_CSV_HEADER)?;
    for row in rows {
        let tag = match row.collab_type {
            CollabTag::Bilateral => "BIRC",
            CollabTag::Multilateral => "MIRC",
            other => return Err(Error::Config(format!("no growth row for {other}"))),
        };
        let (first, last) = row
            .rate
            .map(|r| (r.first_year.to_string(), r.last_year.to_string()))
            .unwrap_or_default();
        w.write_record([
            row.region.as_str(),
            tag,
            row.method.as_str(),
            &first,
            &last,
            &fmt_opt(row.rate.map(|r| r.rate_pct())),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<growth>", e))?;
    Ok(())
}

pub const SCATTER_CSV_HEADER: [&str; 5] = ["country", "region", "x", "y", "size"];

pub fn write_scatter_csv<W: Write>(data: &ScatterDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCATTER_CSV_HEADER)?;
    for p in &data.points {
        w.write_record([
            p.country.to_string(),
            p.region.clone(),
            fmt_f64(p.x),
            fmt_f64(p.y),
            p.size.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<scatter>", e))?;
    Ok(())
}

pub const FLAGGED_CSV_HEADER: [&str; 5] = ["metric", "threshold", "country", "region", "value"];

/// One row per flagged country and metric.
pub fn write_flagged_csv<W: Write>(
    reports: &[CountrySimilarityReport],
    metrics: &[Indicator],
    t: f64,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FLAGGED_CSV_HEADER)?;
    for ind in metrics {
        let values: Vec<(CountryCode, Option<f64>)> =
            reports.iter().map(|r| (r.country, r.value(*ind))).collect();
        let flags = threshold_flags(&values, t);
        for c in flags.flagged {
            let r = reports
                .iter()
                .find(|r| r.country == c)
                .expect("flagged country comes from reports");
            w.write_record([
                ind.name().to_string(),
                fmt_f64(t),
                c.to_string(),
                r.region.clone(),
                fmt_opt(r.value(*ind)),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<flagged>", e))?;
    Ok(())
}
