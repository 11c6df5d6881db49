//! Cosine similarity between sparse count profiles.
//!
//! ```bash
//! cargo run --example cosine_profiles
//! ```

use collabsim::{cosine, Profile};

fn profile(entries: &[(&'static str, u64)]) -> Profile<&'static str> {
    entries.iter().copied().collect()
}

fn show(label: &str, p: &Profile<&'static str>, q: &Profile<&'static str>) {
    let value = cosine(p, q).map_or("undefined".to_string(), |c| format!("{c:.6}"));
    println!("{label:<40} {value}");
}

fn main() {
    let a = profile(&[("s1", 1), ("s2", 1)]);
    let b = profile(&[("s2", 1), ("s3", 1)]);
    let heavy = profile(&[("s1", 3), ("s2", 3)]);
    let other = profile(&[("s7", 4)]);
    let empty = Profile::new();

    show("identical", &a, &a);
    show("half overlap {s1,s2} vs {s2,s3}", &a, &b);
    show("proportional {s1:3,s2:3} vs {s1:1,s2:1}", &heavy, &a);
    show("disjoint supports", &a, &other);
    show("against an empty profile", &a, &empty);

    // counts can come from anywhere; only the overlap structure matters
    let physics_heavy = profile(&[("PHYS", 120), ("MATH", 30), ("CHEM", 10)]);
    let balanced = profile(&[("PHYS", 40), ("MATH", 40), ("CHEM", 40), ("BIOL", 40)]);
    show("physics-heavy vs balanced", &physics_heavy, &balanced);
    show(
        "physics-heavy x1000 vs balanced",
        &physics_heavy.scaled(1000),
        &balanced,
    );
}
