//! Profile tables form a commutative monoid: building shards
//! independently and merging them gives the single-pass table exactly.
//!
//! ```bash
//! cargo run --release --example sharded_merge
//! ```

use std::thread;

use collabsim::{generate, ProfileTable, PublicationRecord, ScenarioSpec};

fn main() -> collabsim::Result<()> {
    let scenario = ScenarioSpec {
        seed: 11,
        n_countries: 30,
        pubs_per_country_year: 200.0,
        drift_mirc: 0.5,
        ..Default::default()
    }
    .resolve()?;
    let records: Vec<PublicationRecord> = generate(&scenario).collect();
    println!("{} records", records.len());

    let single = ProfileTable::from_records(&records, None);

    // interleaved shards, built on separate threads
    let shards = 4;
    let parts: Vec<ProfileTable> = thread::scope(|s| {
        let handles: Vec<_> = (0..shards)
            .map(|k| {
                let records = &records;
                s.spawn(move || {
                    ProfileTable::from_records(records.iter().skip(k).step_by(shards), None)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("shard thread"))
            .collect()
    });
    let mut merged = ProfileTable::new();
    for part in parts.into_iter().rev() {
        merged.merge_owned(part);
    }

    let parallel = ProfileTable::from_records_par(&records, None);
    println!("sharded merge equals single pass: {}", merged == single);
    println!("rayon build equals single pass:   {}", parallel == single);
    assert!(merged == single && parallel == single);
    Ok(())
}
