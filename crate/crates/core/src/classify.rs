//! Domestic / bilateral / multilateral classification by the number of
//! distinct author countries.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::corpus::PublicationRecord;
use crate::error::{Error, Result};

/// Default cut-off for the optional very-large-collaboration class.
pub const DEFAULT_MEGA_THRESHOLD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CollabTag {
    Domestic,
    Bilateral,
    Multilateral,
    MegaMultilateral,
}

impl CollabTag {
    pub fn is_international(self) -> bool {
        self != CollabTag::Domestic
    }
}

impl fmt::Display for CollabTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CollabTag::Domestic => "domestic",
            CollabTag::Bilateral => "bilateral",
            CollabTag::Multilateral => "multilateral",
            CollabTag::MegaMultilateral => "mega_multilateral",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CollaborationType {
    pub tag: CollabTag,
    pub country_count: usize,
}

/// Threshold at or above which a publication is `MegaMultilateral`.
/// Always at least 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MegaThreshold(usize);

impl MegaThreshold {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!(
                "mega threshold must be at least 3, got {n}"
            )));
        }
        Ok(MegaThreshold(n))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl std::str::FromStr for MegaThreshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("invalid mega threshold `{s}`")))?;
        MegaThreshold::new(n)
    }
}

impl Default for MegaThreshold {
    fn default() -> Self {
        MegaThreshold(DEFAULT_MEGA_THRESHOLD)
    }
}

/// Classifies by country-set cardinality alone.
pub fn classify_count(country_count: usize, mega: Option<MegaThreshold>) -> CollaborationType {
    let tag = match country_count {
        0 | 1 => CollabTag::Domestic,
        2 => CollabTag::Bilateral,
        k => match mega {
            Some(t) if k >= t.get() => CollabTag::MegaMultilateral,
            _ => CollabTag::Multilateral,
        },
    };
    CollaborationType { tag, country_count }
}

pub fn classify(record: &PublicationRecord, mega: Option<MegaThreshold>) -> CollaborationType {
    classify_count(record.country_count(), mega)
}

/// Counts of publications per collaboration class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct YearCounts {
    pub domestic: u64,
    pub bilateral: u64,
    pub multilateral: u64,
    pub mega: u64,
}

impl YearCounts {
    pub fn add(&mut self, tag: CollabTag, n: u64) {
        match tag {
            CollabTag::Domestic => self.domestic += n,
            CollabTag::Bilateral => self.bilateral += n,
            CollabTag::Multilateral => self.multilateral += n,
            CollabTag::MegaMultilateral => self.mega += n,
        }
    }

    pub fn merge(&mut self, other: &YearCounts) {
        self.domestic += other.domestic;
        self.bilateral += other.bilateral;
        self.multilateral += other.multilateral;
        self.mega += other.mega;
    }

    pub fn get(&self, tag: CollabTag) -> u64 {
        match tag {
            CollabTag::Domestic => self.domestic,
            CollabTag::Bilateral => self.bilateral,
            CollabTag::Multilateral => self.multilateral,
            CollabTag::MegaMultilateral => self.mega,
        }
    }

    pub fn international(&self) -> u64 {
        self.bilateral + self.multilateral + self.mega
    }

    pub fn total(&self) -> u64 {
        self.domestic + self.international()
    }
}

/// Totals plus a per-year breakdown that always sums to the totals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TypeCounts {
    pub totals: YearCounts,
    pub by_year: BTreeMap<i32, YearCounts>,
}

impl TypeCounts {
    pub fn record(&mut self, year: i32, tag: CollabTag) {
        self.totals.add(tag, 1);
        self.by_year.entry(year).or_default().add(tag, 1);
    }

    pub fn merge(&mut self, other: &TypeCounts) {
        self.totals.merge(&other.totals);
        for (year, c) in &other.by_year {
            self.by_year.entry(*year).or_default().merge(c);
        }
    }

    pub fn n_domestic(&self) -> u64 {
        self.totals.domestic
    }
    pub fn n_bilateral(&self) -> u64 {
        self.totals.bilateral
    }
    pub fn n_multilateral(&self) -> u64 {
        self.totals.multilateral
    }
    pub fn n_mega(&self) -> u64 {
        self.totals.mega
    }
}

/// Denominator used for the share of bilateral output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShareDenominator {
    /// Bilateral + multilateral (+ mega when enabled).
    #[default]
    International,
    /// All output including domestic.
    Total,
}

impl std::str::FromStr for ShareDenominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "international" => Ok(ShareDenominator::International),
            "total" => Ok(ShareDenominator::Total),
            _ => Err(Error::Config(format!(
                "unknown denominator `{s}` (expected international or total)"
            ))),
        }
    }
}

/// Share of international output that is bilateral; `None` when there is
/// no international output.
pub fn birc_share(counts: &YearCounts) -> Option<f64> {
    birc_share_with(counts, ShareDenominator::International)
}

pub fn birc_share_with(counts: &YearCounts, denominator: ShareDenominator) -> Option<f64> {
    let denom = match denominator {
        ShareDenominator::International => counts.international(),
        ShareDenominator::Total => counts.total(),
    };
    (denom > 0).then(|| counts.bilateral as f64 / denom as f64)
}
