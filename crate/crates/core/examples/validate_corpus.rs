//! Runs the corpus validator over a deliberately dirty input under the
//! skip-and-count and fail-fast policies.
//!
//! ```bash
//! cargo run --example validate_corpus
//! ```

use collabsim::corpus::{DefectPolicy, UnmappedPolicy, YearWindow};
use collabsim::{validate_corpus, RegionMap, ValidationPolicy};

const CORPUS: &str = r#"{"id":"a","year":2010,"subjects":["PHYS"],"countries":["NL"]}
{"id":"b","year":2011,"subjects":["CHEM"],"countries":["NL","ZA"]}
{"id":"c","year":2011,"subjects":["CHEM"],"countries":[]}
{"id":"d","year":2012,"subjects":[],"countries":["ZA"]}
{"id":"e","year":2012,"subjects":["MATH"],"countries":["XX"]}
{"id":"f","year":1995,"subjects":["MATH"],"countries":["NL"]}
{this is not json

{"id":"g","year":2015,"subjects":["BIOL"],"countries":["ZA","NL","BR"]}
"#;

fn main() -> collabsim::Result<()> {
    let regions = RegionMap::from_pairs([
        ("NL", "Europe & Central Asia"),
        ("ZA", "Sub-Saharan Africa"),
        ("BR", "Latin America & Caribbean"),
    ])?;

    let lenient = ValidationPolicy {
        years: Some(YearWindow::new(2008, 2017)?),
        ..ValidationPolicy::default()
    };
    let stats = validate_corpus(CORPUS.as_bytes(), &regions, lenient)?;
    println!("skip and count:\n{}", serde_json::to_string_pretty(&stats)?);
    assert_eq!(stats.accepted + stats.skipped(), stats.total_lines);

    let keep_unknown = ValidationPolicy {
        unmapped_country: UnmappedPolicy::KeepAsUnknownRegion,
        ..lenient
    };
    let stats = validate_corpus(CORPUS.as_bytes(), &regions, keep_unknown)?;
    println!("keeping unmapped countries: {} accepted", stats.accepted);

    let strict = ValidationPolicy {
        malformed: DefectPolicy::FailFast,
        ..lenient
    };
    match validate_corpus(CORPUS.as_bytes(), &regions, strict) {
        Ok(_) => println!("fail fast: no defect found"),
        Err(e) => println!("fail fast: {e} (exit code {})", e.exit_code()),
    }
    Ok(())
}
