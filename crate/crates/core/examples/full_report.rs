//! Runs the `report` subcommand in-process on the sample corpus and
//! lists what it wrote.
//!
//! ```bash
//! cargo run --example full_report -- /tmp/collabsim-report
//! ```

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/corpus.jsonl");
const REGIONS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/regions.csv");

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("collabsim-report")
            .display()
            .to_string()
    });
    let code = collabsim::cli::main_with_args([
        "collabsim",
        "report",
        "--input",
        CORPUS,
        "--regions",
        REGIONS,
        "--out",
        &out,
        "--dump-profiles",
        "--threshold",
        "0.75",
    ]);
    if code != 0 {
        std::process::exit(code);
    }
    let mut names: Vec<_> = std::fs::read_dir(&out)
        .expect("output directory")
        .map(|e| e.expect("entry").file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    println!("wrote to {out}:");
    for n in names {
        println!("  {n}");
    }
    let flagged = std::fs::read_to_string(std::path::Path::new(&out).join("flagged.csv"))
        .expect("flagged.csv");
    println!("\nflagged.csv:\n{flagged}");
}
