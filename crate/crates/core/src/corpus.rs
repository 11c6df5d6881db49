//! Publication records, the line-delimited corpus format and the
//! country → region mapping.
//!
//! A corpus is UTF-8 text with one JSON object per line:
//!
//! ```text
//! {"id":"p1","year":2010,"subjects":["PHYS"],"countries":["NL","ES"]}
//! ```
//!
//! Country codes are ISO-3166 alpha-2 and are case-normalized; both arrays
//! are treated as sets. Unknown extra fields are ignored.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

/// Region assigned to countries absent from the region map when the
/// unmapped-country policy keeps them.
pub const UNKNOWN_REGION: &str = "UNKNOWN";

/// Years accepted by the record parser regardless of the analysis window.
pub const DEFAULT_ACCEPTED_YEARS: YearWindow = YearWindow {
    first: 1900,
    last: 2100,
};

/// An ISO-3166 alpha-2 code, stored upper-case.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    /// Trims and upper-cases `raw`; anything but two ASCII letters is rejected.
    pub fn normalize(raw: &str) -> Result<Self, RecordDefect> {
        let trimmed = raw.trim();
        match trimmed.as_bytes() {
            [a, b] if a.is_ascii_alphabetic() && b.is_ascii_alphabetic() => Ok(CountryCode([
                a.to_ascii_uppercase(),
                b.to_ascii_uppercase(),
            ])),
            _ => Err(RecordDefect::InvalidCountry(raw.to_string())),
        }
    }

    pub fn as_str(&self) -> &str {
        // both bytes are ASCII letters by construction
        std::str::from_utf8(&self.0).expect("ascii country code")
    }
}

impl FromStr for CountryCode {
    type Err = RecordDefect;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CountryCode::normalize(s)
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// A subject-category code such as a Web of Science category abbreviation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Subject(String);

impl Subject {
    pub fn new(code: &str) -> Result<Self, RecordDefect> {
        let trimmed = code.trim();
        if trimmed.is_empty() {
            return Err(RecordDefect::EmptySubjectCode);
        }
        Ok(Subject(trimmed.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Subject {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Inclusive range of calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct YearWindow {
    pub first: i32,
    pub last: i32,
}

impl YearWindow {
    pub fn new(first: i32, last: i32) -> Result<Self> {
        if first > last {
            return Err(Error::Config(format!(
                "year window {first}:{last} is empty"
            )));
        }
        Ok(YearWindow { first, last })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.first..=self.last).contains(&year)
    }
}

impl FromStr for YearWindow {
    type Err = Error;

    /// Parses `A:B`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("expected A:B year range, got `{s}`")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<i32>()
                .map_err(|_| Error::Config(format!("invalid year `{v}`")))
        };
        YearWindow::new(parse(a)?, parse(b)?)
    }
}

/// One publication after normalization. `subjects` and `countries` are
/// sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicationRecord {
    pub id: String,
    pub year: i32,
    pub subjects: Vec<Subject>,
    pub countries: Vec<CountryCode>,
}

impl PublicationRecord {
    /// Builds a record from raw parts, applying the same normalization as
    /// the line parser.
    pub fn new<S, C>(id: &str, year: i32, subjects: S, countries: C) -> Result<Self, RecordDefect>
    where
        S: IntoIterator,
        S::Item: AsRef<str>,
        C: IntoIterator,
        C::Item: AsRef<str>,
    {
        if !DEFAULT_ACCEPTED_YEARS.contains(year) {
            return Err(RecordDefect::YearOutOfRange(year as i64));
        }
        let subjects = subjects
            .into_iter()
            .map(|s| Subject::new(s.as_ref()))
            .collect::<Result<BTreeSet<_>, _>>()?;
        let countries = countries
            .into_iter()
            .map(|c| CountryCode::normalize(c.as_ref()))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if subjects.is_empty() {
            return Err(RecordDefect::EmptySubjects);
        }
        if countries.is_empty() {
            return Err(RecordDefect::EmptyCountries);
        }
        Ok(PublicationRecord {
            id: id.to_string(),
            year,
            subjects: subjects.into_iter().collect(),
            countries: countries.into_iter().collect(),
        })
    }

    pub fn country_count(&self) -> usize {
        self.countries.len()
    }
}

/// Why a single line could not become a [`PublicationRecord`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordDefect {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("empty subjects")]
    EmptySubjects,
    #[error("empty countries")]
    EmptyCountries,
    #[error("empty subject code")]
    EmptySubjectCode,
    #[error("invalid country code `{0}`")]
    InvalidCountry(String),
    #[error("year {0} outside accepted range")]
    YearOutOfRange(i64),
    #[error("country {0} is not in the region map")]
    UnmappedCountry(CountryCode),
}

/// Counter bucket a defect is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectClass {
    Malformed,
    MissingCountry,
    MissingSubject,
    UnmappedCountry,
}

impl RecordDefect {
    pub fn class(&self) -> DefectClass {
        match self {
            RecordDefect::MissingField("countries") | RecordDefect::EmptyCountries => {
                DefectClass::MissingCountry
            }
            RecordDefect::MissingField("subjects") | RecordDefect::EmptySubjects => {
                DefectClass::MissingSubject
            }
            RecordDefect::UnmappedCountry(_) => DefectClass::UnmappedCountry,
            _ => DefectClass::Malformed,
        }
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    year: Option<i64>,
    subjects: Option<Vec<String>>,
    countries: Option<Vec<String>>,
}

/// Parses one corpus line.
pub fn parse_record(line: &str) -> Result<PublicationRecord, RecordDefect> {
    let raw: RawRecord =
        serde_json::from_str(line).map_err(|e| RecordDefect::Malformed(e.to_string()))?;
    let id = raw.id.ok_or(RecordDefect::MissingField("id"))?;
    let year = raw.year.ok_or(RecordDefect::MissingField("year"))?;
    let subjects = raw.subjects.ok_or(RecordDefect::MissingField("subjects"))?;
    let countries = raw
        .countries
        .ok_or(RecordDefect::MissingField("countries"))?;
    let year = i32::try_from(year)
        .ok()
        .filter(|y| DEFAULT_ACCEPTED_YEARS.contains(*y))
        .ok_or(RecordDefect::YearOutOfRange(year))?;
    PublicationRecord::new(&id, year, subjects, countries)
}

/// Serializes a record back into the corpus line format.
pub fn format_record(record: &PublicationRecord) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        id: &'a str,
        year: i32,
        subjects: &'a [Subject],
        countries: &'a [CountryCode],
    }
    serde_json::to_string(&Out {
        id: &record.id,
        year: record.year,
        subjects: &record.subjects,
        countries: &record.countries,
    })
    .expect("record serialization is infallible")
}

/// Country → World Bank region lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionMap {
    entries: BTreeMap<CountryCode, String>,
}

impl RegionMap {
    pub fn from_pairs<I, C, R>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C, R)>,
        C: AsRef<str>,
        R: Into<String>,
    {
        let mut map = RegionMap::default();
        for (country, region) in pairs {
            let code = CountryCode::normalize(country.as_ref())
                .map_err(|e| Error::RegionMap(e.to_string()))?;
            map.insert(code, region.into())?;
        }
        Ok(map)
    }

    fn insert(&mut self, code: CountryCode, region: String) -> Result<()> {
        let region = region.trim().to_string();
        if region.is_empty() {
            return Err(Error::RegionMap(format!("empty region for {code}")));
        }
        match self.entries.get(&code) {
            Some(existing) if *existing != region => Err(Error::ConflictingRegion(code)),
            Some(_) => Ok(()),
            None => {
                self.entries.insert(code, region);
                Ok(())
            }
        }
    }

    /// Reads the `country,region` CSV format.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.is_empty() {
            log::warn!("region map is empty");
            return Ok(RegionMap::default());
        }
        let names: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
        if names != ["country", "region"] {
            return Err(Error::RegionMap(format!(
                "expected header `country,region`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut map = RegionMap::default();
        for row in rdr.records() {
            let row = row?;
            let code =
                CountryCode::normalize(&row[0]).map_err(|e| Error::RegionMap(e.to_string()))?;
            map.insert(code, row[1].to_string())?;
        }
        if map.is_empty() {
            log::warn!("region map is empty");
        }
        Ok(map)
    }

    pub fn region_of(&self, country: CountryCode) -> Option<&str> {
        self.entries.get(&country).map(String::as_str)
    }

    pub fn region_or_unknown(&self, country: CountryCode) -> &str {
        self.region_of(country).unwrap_or(UNKNOWN_REGION)
    }

    /// The closed set of region names present in the map.
    pub fn regions(&self) -> BTreeSet<&str> {
        self.entries.values().map(String::as_str).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CountryCode, &str)> {
        self.entries.iter().map(|(c, r)| (*c, r.as_str()))
    }
}

pub fn load_region_map(path: impl AsRef<Path>) -> Result<RegionMap> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    RegionMap::from_reader(std::io::BufReader::new(file))
}

/// What to do with a defective line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectPolicy {
    SkipAndCount,
    FailFast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnmappedPolicy {
    SkipAndCount,
    FailFast,
    KeepAsUnknownRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidationPolicy {
    pub malformed: DefectPolicy,
    pub missing_country: DefectPolicy,
    pub missing_subject: DefectPolicy,
    pub unmapped_country: UnmappedPolicy,
    /// Analysis window; accepted records outside it are counted, not kept.
    pub years: Option<YearWindow>,
}

impl Default for ValidationPolicy {
    fn default() -> Self {
        ValidationPolicy {
            malformed: DefectPolicy::SkipAndCount,
            missing_country: DefectPolicy::SkipAndCount,
            missing_subject: DefectPolicy::SkipAndCount,
            unmapped_country: UnmappedPolicy::SkipAndCount,
            years: None,
        }
    }
}

impl ValidationPolicy {
    pub fn fail_fast() -> Self {
        ValidationPolicy {
            malformed: DefectPolicy::FailFast,
            missing_country: DefectPolicy::FailFast,
            missing_subject: DefectPolicy::FailFast,
            unmapped_country: UnmappedPolicy::FailFast,
            years: None,
        }
    }
}

/// Line accounting for one validation pass. Blank lines are not counted.
///
/// Forms a commutative monoid under [`CorpusStats::merge`], so per-shard
/// stats can be combined in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub total_lines: u64,
    pub accepted: u64,
    pub skipped_missing_country: u64,
    pub skipped_missing_subject: u64,
    pub skipped_unmapped_country: u64,
    pub skipped_malformed: u64,
    pub skipped_outside_years: u64,
    /// Over accepted records.
    pub year_range: Option<(i32, i32)>,
}

impl CorpusStats {
    pub fn skipped(&self) -> u64 {
        self.skipped_missing_country
            + self.skipped_missing_subject
            + self.skipped_unmapped_country
            + self.skipped_malformed
            + self.skipped_outside_years
    }

    pub fn merge(&mut self, other: &CorpusStats) {
        self.total_lines += other.total_lines;
        self.accepted += other.accepted;
        self.skipped_missing_country += other.skipped_missing_country;
        self.skipped_missing_subject += other.skipped_missing_subject;
        self.skipped_unmapped_country += other.skipped_unmapped_country;
        self.skipped_malformed += other.skipped_malformed;
        self.skipped_outside_years += other.skipped_outside_years;
        self.year_range = match (self.year_range, other.year_range) {
            (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
            (r, None) | (None, r) => r,
        };
    }

    fn accept(&mut self, year: i32) {
        self.accepted += 1;
        self.year_range = Some(match self.year_range {
            Some((lo, hi)) => (lo.min(year), hi.max(year)),
            None => (year, year),
        });
    }

    fn charge(&mut self, class: DefectClass) {
        match class {
            DefectClass::Malformed => self.skipped_malformed += 1,
            DefectClass::MissingCountry => self.skipped_missing_country += 1,
            DefectClass::MissingSubject => self.skipped_missing_subject += 1,
            DefectClass::UnmappedCountry => self.skipped_unmapped_country += 1,
        }
    }
}

/// Applies a [`ValidationPolicy`] line by line. Pure per line, so a corpus
/// can be split across workers and the resulting stats merged.
#[derive(Debug, Clone, Copy)]
pub struct Validator<'a> {
    regions: &'a RegionMap,
    policy: ValidationPolicy,
}

impl<'a> Validator<'a> {
    pub fn new(regions: &'a RegionMap, policy: ValidationPolicy) -> Self {
        Validator { regions, policy }
    }

    pub fn policy(&self) -> &ValidationPolicy {
        &self.policy
    }

    /// Returns the accepted record, `None` for a counted skip, or an error
    /// when the policy for the defect is fail-fast. `line_no` is 1-based.
    pub fn check(
        &self,
        line_no: usize,
        line: &str,
        stats: &mut CorpusStats,
    ) -> Result<Option<PublicationRecord>> {
        if line.trim().is_empty() {
            return Ok(None);
        }
        stats.total_lines += 1;
        let record = match parse_record(line) {
            Ok(r) => r,
            Err(defect) => return self.reject(line_no, defect, stats),
        };
        if self.policy.unmapped_country != UnmappedPolicy::KeepAsUnknownRegion {
            if let Some(c) = record
                .countries
                .iter()
                .find(|c| self.regions.region_of(**c).is_none())
            {
                return self.reject(line_no, RecordDefect::UnmappedCountry(*c), stats);
            }
        }
        if let Some(window) = self.policy.years {
            if !window.contains(record.year) {
                stats.skipped_outside_years += 1;
                return Ok(None);
            }
        }
        stats.accept(record.year);
        Ok(Some(record))
    }

    fn reject(
        &self,
        line_no: usize,
        defect: RecordDefect,
        stats: &mut CorpusStats,
    ) -> Result<Option<PublicationRecord>> {
        let class = defect.class();
        let fail = match class {
            DefectClass::Malformed => self.policy.malformed == DefectPolicy::FailFast,
            DefectClass::MissingCountry => self.policy.missing_country == DefectPolicy::FailFast,
            DefectClass::MissingSubject => self.policy.missing_subject == DefectPolicy::FailFast,
            DefectClass::UnmappedCountry => {
                self.policy.unmapped_country == UnmappedPolicy::FailFast
            }
        };
        if fail {
            return Err(Error::Record {
                line: line_no,
                defect,
            });
        }
        stats.charge(class);
        Ok(None)
    }
}

/// Validates a whole corpus stream, calling `on_accept` for every accepted
/// record in input order.
pub fn validate_stream<R, F>(
    reader: R,
    regions: &RegionMap,
    policy: ValidationPolicy,
    mut on_accept: F,
) -> Result<CorpusStats>
where
    R: BufRead,
    F: FnMut(PublicationRecord),
{
    let validator = Validator::new(regions, policy);
    let mut stats = CorpusStats::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        if let Some(record) = validator.check(idx + 1, &line, &mut stats)? {
            on_accept(record);
        }
    }
    Ok(stats)
}

pub fn validate_corpus<R: BufRead>(
    reader: R,
    regions: &RegionMap,
    policy: ValidationPolicy,
) -> Result<CorpusStats> {
    validate_stream(reader, regions, policy, |_| {})
}
