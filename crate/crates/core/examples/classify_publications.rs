//! Parses a few publication records and sorts them into domestic,
//! bilateral and multilateral output, with and without the optional
//! mega-collaboration class.
//!
//! ```bash
//! cargo run --example classify_publications
//! ```

use collabsim::classify::{birc_share_with, ShareDenominator, YearCounts};
use collabsim::{classify, parse_record, MegaThreshold};

const LINES: &[&str] = &[
    r#"{"id":"p1","year":2010,"subjects":["PHYS"],"countries":["NL"]}"#,
    r#"{"id":"p2","year":2010,"subjects":["PHYS","CHEM"],"countries":["nl","NL","ES"]}"#,
    r#"{"id":"p3","year":2011,"subjects":["BIOL"],"countries":["NL","ES","ZA"]}"#,
    r#"{"id":"p4","year":2012,"subjects":["MED"],"countries":["BR","AR","CL","PE","CO"]}"#,
    r#"{"id":"p5","year":2012,"subjects":[],"countries":["NL"]}"#,
];

fn main() {
    let mega = Some(MegaThreshold::new(5).expect("at least 3"));
    let mut counts = YearCounts::default();

    println!(
        "{:<4} {:<16} {:<14} {:<18}",
        "id", "countries", "class", "class (mega >= 5)"
    );
    for line in LINES {
        let record = match parse_record(line) {
            Ok(r) => r,
            Err(defect) => {
                println!("rejected: {defect} ({line})");
                continue;
            }
        };
        let plain = classify(&record, None);
        let with_mega = classify(&record, mega);
        counts.add(plain.tag, 1);
        let codes: Vec<&str> = record.countries.iter().map(|c| c.as_str()).collect();
        println!(
            "{:<4} {:<16} {:<14} {:<18}",
            record.id,
            codes.join(","),
            plain.tag.to_string(),
            with_mega.tag.to_string()
        );
    }

    for denom in [ShareDenominator::International, ShareDenominator::Total] {
        let share =
            birc_share_with(&counts, denom).map_or("undefined".into(), |s| format!("{s:.3}"));
        println!("bilateral share ({denom:?} denominator): {share}");
    }
}
