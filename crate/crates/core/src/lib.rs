//! Collaboration-type profiles of countries and the cosine-similarity
//! indicators built on them.
//!
//! Publications are classified as domestic, bilateral or multilateral by
//! their number of distinct author countries. For every country the crate
//! builds subject-category profiles per collaboration type and partner
//! profiles for international output, then compares them with the cosine
//! similarity:
//!
//! | indicator               | compares                                  |
//! |-------------------------|-------------------------------------------|
//! | `sim_dom_int`           | domestic vs international subjects        |
//! | `sim_dom_birc`          | domestic vs bilateral subjects            |
//! | `sim_dom_mirc`          | domestic vs multilateral subjects         |
//! | `sim_birc_mirc_disc`    | bilateral vs multilateral subjects        |
//! | `sim_birc_mirc_partner` | bilateral vs multilateral partners        |
//!
//! Regional summaries (boxplots, growth rates, scatter datasets) and a
//! seeded synthetic corpus generator sit on top. See the `examples/`
//! directory for one runnable program per capability.

pub mod aggregates;
pub mod classify;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod profiles;
pub mod similarity;
pub mod synth;

pub use aggregates::{
    growth_rate, region_boxplot, scatter_dataset, threshold_flags, BoxplotStats, GrowthMethod,
    GrowthRate, RegionCounting, ScatterSpec, Selector,
};
pub use classify::{birc_share, classify, CollabTag, CollaborationType, MegaThreshold, TypeCounts};
pub use corpus::{
    load_region_map, parse_record, validate_corpus, CorpusStats, CountryCode, PublicationRecord,
    RegionMap, Subject, ValidationPolicy,
};
pub use error::{Error, Result};
pub use pipeline::{build_profiles, ingest, Analysis, AnalysisConfig, IngestConfig, Ingested};
pub use profiles::{CountryProfileSet, Profile, ProfileTable};
pub use similarity::{
    cosine, deviation, five_indicators, world_baseline, CountrySimilarityReport, Indicator,
    WorldBaseline,
};
pub use synth::{generate, Scenario, ScenarioSpec};
