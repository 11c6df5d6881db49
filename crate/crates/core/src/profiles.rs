//! Per-country disciplinary and partner profiles.
//!
//! Counting is whole counting: a publication adds 1 to every
//! (country, subject) pair it covers and 1 to every ordered
//! (country, partner) pair among its countries. Counts are integers, so
//! building shard-local tables and merging them gives exactly the same
//! result as a single pass.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::classify::{classify, CollabTag, CollaborationType, MegaThreshold, TypeCounts};
use crate::corpus::{CountryCode, PublicationRecord, Subject};
use crate::error::{Error, Result};

/// Sparse non-negative count vector. Zero counts are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct Profile<K> {
    dims: BTreeMap<K, u64>,
    total: u64,
}

impl<K> Default for Profile<K> {
    fn default() -> Self {
        Profile {
            dims: BTreeMap::new(),
            total: 0,
        }
    }
}

impl<K: Ord> Profile<K> {
    pub fn get(&self, key: &K) -> u64 {
        self.dims.get(key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Number of non-zero dimensions.
    pub fn support(&self) -> usize {
        self.dims.len()
    }

    /// Entries in canonical (ascending key) order.
    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> {
        self.dims.iter().map(|(k, v)| (k, *v))
    }
}

impl<K: Ord + Clone> Profile<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: &K, n: u64) {
        if n == 0 {
            return;
        }
        match self.dims.get_mut(key) {
            Some(c) => *c += n,
            None => {
                self.dims.insert(key.clone(), n);
            }
        }
        self.total += n;
    }

    pub fn increment(&mut self, key: &K) {
        self.add(key, 1);
    }

    pub fn merge(&mut self, other: &Profile<K>) {
        for (k, v) in other.iter() {
            self.add(k, v);
        }
    }

    pub fn merged(&self, other: &Profile<K>) -> Profile<K> {
        let mut out = self.clone();
        out.merge(other);
        out
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Profile<K> {
        self.iter().map(|(k, v)| (k.clone(), v * factor)).collect()
    }
}

impl<K: Ord + Clone> FromIterator<(K, u64)> for Profile<K> {
    fn from_iter<I: IntoIterator<Item = (K, u64)>>(iter: I) -> Self {
        let mut p = Profile::new();
        for (k, v) in iter {
            p.add(&k, v);
        }
        p
    }
}

impl<K: fmt::Debug> fmt::Debug for Profile<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.dims.iter()).finish()
    }
}

/// Which slice of a country's output a profile covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputSlice {
    Domestic,
    International,
    Birc,
    Mirc,
    Mega,
}

impl OutputSlice {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputSlice::Domestic => "domestic",
            OutputSlice::International => "international",
            OutputSlice::Birc => "birc",
            OutputSlice::Mirc => "mirc",
            OutputSlice::Mega => "mega",
        }
    }

    fn for_tag(tag: CollabTag) -> OutputSlice {
        match tag {
            CollabTag::Domestic => OutputSlice::Domestic,
            CollabTag::Bilateral => OutputSlice::Birc,
            CollabTag::Multilateral => OutputSlice::Mirc,
            CollabTag::MegaMultilateral => OutputSlice::Mega,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DisciplinaryProfiles {
    pub domestic: Profile<Subject>,
    /// Union of the bilateral, multilateral and mega slices.
    pub international: Profile<Subject>,
    pub birc: Profile<Subject>,
    pub mirc: Profile<Subject>,
    /// Only populated when the mega class is enabled; kept out of `mirc`.
    pub mega: Profile<Subject>,
}

impl DisciplinaryProfiles {
    pub fn get(&self, slice: OutputSlice) -> &Profile<Subject> {
        match slice {
            OutputSlice::Domestic => &self.domestic,
            OutputSlice::International => &self.international,
            OutputSlice::Birc => &self.birc,
            OutputSlice::Mirc => &self.mirc,
            OutputSlice::Mega => &self.mega,
        }
    }

    fn get_mut(&mut self, slice: OutputSlice) -> &mut Profile<Subject> {
        match slice {
            OutputSlice::Domestic => &mut self.domestic,
            OutputSlice::International => &mut self.international,
            OutputSlice::Birc => &mut self.birc,
            OutputSlice::Mirc => &mut self.mirc,
            OutputSlice::Mega => &mut self.mega,
        }
    }

    /// Subject profile over all of the country's output.
    pub fn all_output(&self) -> Profile<Subject> {
        self.domestic.merged(&self.international)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartnerProfiles {
    pub international: Profile<CountryCode>,
    pub birc: Profile<CountryCode>,
    pub mirc: Profile<CountryCode>,
    pub mega: Profile<CountryCode>,
}

impl PartnerProfiles {
    /// `None` for the domestic slice, which has no partners.
    pub fn get(&self, slice: OutputSlice) -> Option<&Profile<CountryCode>> {
        match slice {
            OutputSlice::Domestic => None,
            OutputSlice::International => Some(&self.international),
            OutputSlice::Birc => Some(&self.birc),
            OutputSlice::Mirc => Some(&self.mirc),
            OutputSlice::Mega => Some(&self.mega),
        }
    }

    fn get_mut(&mut self, slice: OutputSlice) -> &mut Profile<CountryCode> {
        match slice {
            OutputSlice::Birc => &mut self.birc,
            OutputSlice::Mirc => &mut self.mirc,
            OutputSlice::Mega => &mut self.mega,
            OutputSlice::International | OutputSlice::Domestic => &mut self.international,
        }
    }
}

/// Everything accumulated for one country.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountryProfileSet {
    pub country: CountryCode,
    pub disciplinary: DisciplinaryProfiles,
    pub partner: PartnerProfiles,
    pub pub_counts: TypeCounts,
}

impl CountryProfileSet {
    pub fn empty(country: CountryCode) -> Self {
        CountryProfileSet {
            country,
            disciplinary: DisciplinaryProfiles::default(),
            partner: PartnerProfiles::default(),
            pub_counts: TypeCounts::default(),
        }
    }

    /// Adds `record` from the perspective of `self.country`, which must be
    /// one of the record's countries.
    fn add_record(&mut self, record: &PublicationRecord, tag: CollabTag) {
        let slice = OutputSlice::for_tag(tag);
        let disc = self.disciplinary.get_mut(slice);
        for s in &record.subjects {
            disc.increment(s);
        }
        if tag.is_international() {
            for s in &record.subjects {
                self.disciplinary.international.increment(s);
            }
            for p in record.countries.iter().filter(|p| **p != self.country) {
                self.partner.get_mut(slice).increment(p);
                self.partner.international.increment(p);
            }
        }
        self.pub_counts.record(record.year, tag);
    }

    /// Field-wise sum. Fails when the two sets belong to different countries.
    pub fn merge(&mut self, other: &CountryProfileSet) -> Result<()> {
        if self.country != other.country {
            return Err(Error::CountryMismatch {
                left: self.country,
                right: other.country,
            });
        }
        let (d, od) = (&mut self.disciplinary, &other.disciplinary);
        d.domestic.merge(&od.domestic);
        d.international.merge(&od.international);
        d.birc.merge(&od.birc);
        d.mirc.merge(&od.mirc);
        d.mega.merge(&od.mega);
        let (p, op) = (&mut self.partner, &other.partner);
        p.international.merge(&op.international);
        p.birc.merge(&op.birc);
        p.mirc.merge(&op.mirc);
        p.mega.merge(&op.mega);
        self.pub_counts.merge(&other.pub_counts);
        Ok(())
    }

    pub fn merged(a: &CountryProfileSet, b: &CountryProfileSet) -> Result<CountryProfileSet> {
        let mut out = a.clone();
        out.merge(b)?;
        Ok(out)
    }

    /// Checks the sum decompositions and the no-self-partner rule.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let d = &self.disciplinary;
        let parts = d.birc.merged(&d.mirc).merged(&d.mega);
        if parts != d.international {
            return Err(format!("{}: birc+mirc+mega != international", self.country));
        }
        let p = &self.partner;
        let parts = p.birc.merged(&p.mirc).merged(&p.mega);
        if parts != p.international {
            return Err(format!(
                "{}: partner birc+mirc+mega != international",
                self.country
            ));
        }
        for prof in [&p.international, &p.birc, &p.mirc, &p.mega] {
            if prof.get(&self.country) != 0 {
                return Err(format!("{}: partner profile names itself", self.country));
            }
        }
        let c = &self.pub_counts.totals;
        if (c.domestic == 0) != d.domestic.is_empty()
            || (c.bilateral == 0) != d.birc.is_empty()
            || (c.multilateral == 0) != d.mirc.is_empty()
            || (c.mega == 0) != d.mega.is_empty()
        {
            return Err(format!(
                "{}: publication counts disagree with profiles",
                self.country
            ));
        }
        Ok(())
    }
}

/// Country → profile set, in canonical country order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProfileTable {
    sets: BTreeMap<CountryCode, CountryProfileSet>,
}

impl ProfileTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a classified record to every participating country.
    pub fn accumulate(&mut self, record: &PublicationRecord, ctype: CollaborationType) {
        for c in &record.countries {
            self.sets
                .entry(*c)
                .or_insert_with(|| CountryProfileSet::empty(*c))
                .add_record(record, ctype.tag);
        }
    }

    pub fn add(&mut self, record: &PublicationRecord, mega: Option<MegaThreshold>) {
        self.accumulate(record, classify(record, mega));
    }

    pub fn merge(&mut self, other: &ProfileTable) {
        for (c, set) in &other.sets {
            match self.sets.get_mut(c) {
                Some(mine) => mine.merge(set).expect("keys match"),
                None => {
                    self.sets.insert(*c, set.clone());
                }
            }
        }
    }

    pub fn merge_owned(&mut self, other: ProfileTable) {
        if self.sets.is_empty() {
            *self = other;
            return;
        }
        for (c, set) in other.sets {
            match self.sets.get_mut(&c) {
                Some(mine) => mine.merge(&set).expect("keys match"),
                None => {
                    self.sets.insert(c, set);
                }
            }
        }
    }

    /// Sequential single-pass build.
    pub fn from_records<'a, I>(records: I, mega: Option<MegaThreshold>) -> ProfileTable
    where
        I: IntoIterator<Item = &'a PublicationRecord>,
    {
        let mut t = ProfileTable::new();
        for r in records {
            t.add(r, mega);
        }
        t
    }

    /// Parallel fold over arbitrary rayon splits followed by merges.
    pub fn from_records_par(records: &[PublicationRecord], mega: Option<MegaThreshold>) -> Self {
        records
            .par_iter()
            .fold(ProfileTable::new, |mut t, r| {
                t.add(r, mega);
                t
            })
            .reduce(ProfileTable::new, |mut a, b| {
                a.merge_owned(b);
                a
            })
    }

    pub fn get(&self, country: CountryCode) -> Option<&CountryProfileSet> {
        self.sets.get(&country)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CountryProfileSet> {
        self.sets.values()
    }

    pub fn countries(&self) -> impl Iterator<Item = CountryCode> + '_ {
        self.sets.keys().copied()
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        self.iter()
            .try_for_each(CountryProfileSet::check_invariants)
    }
}

pub const PROFILE_CSV_HEADER: [&str; 5] = [
    "country",
    "profile_family",
    "collab_type",
    "dimension",
    "count",
];

/// Writes every non-zero count as `country,profile_family,collab_type,dimension,count`,
/// sorted lexicographically on the first four columns.
pub fn write_profile_csv<W: Write>(table: &ProfileTable, out: W) -> Result<()> {
    let mut rows: Vec<(String, &'static str, &'static str, String, u64)> = Vec::new();
    for set in table.iter() {
        let country = set.country.to_string();
        let slices = [
            OutputSlice::Domestic,
            OutputSlice::International,
            OutputSlice::Birc,
            OutputSlice::Mirc,
            OutputSlice::Mega,
        ];
        for slice in slices {
            for (s, n) in set.disciplinary.get(slice).iter() {
                rows.push((
                    country.clone(),
                    "disciplinary",
                    slice.as_str(),
                    s.to_string(),
                    n,
                ));
            }
            if let Some(p) = set.partner.get(slice) {
                for (c, n) in p.iter() {
                    rows.push((country.clone(), "partner", slice.as_str(), c.to_string(), n));
                }
            }
        }
    }
    rows.sort_unstable_by(|a, b| (&a.0, a.1, a.2, &a.3).cmp(&(&b.0, b.1, b.2, &b.3)));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_CSV_HEADER)?;
    for (c, fam, slice, dim, n) in rows {
        w.write_record([c.as_str(), fam, slice, dim.as_str(), &n.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<profiles>", e))?;
    Ok(())
}
