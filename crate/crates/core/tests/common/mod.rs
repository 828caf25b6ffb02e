#![allow(dead_code)]

use std::io::Write;
use std::path::PathBuf;

use nrqmc::imaging::{read_image, ColorImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// The bundled 64×64 natural-image crop.
pub fn crop_path() -> PathBuf {
    data_path("astronaut_64.png")
}

pub fn crop() -> ColorImage {
    read_image(&crop_path()).expect("bundled image")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Prints one result line and returns whether every check held. The line
/// goes straight to stdout so it shows without `--nocapture`.
pub fn report(id: &str, checks: &[(&str, bool, String)]) -> bool {
    let ok = checks.iter().all(|(_, pass, _)| *pass);
    let detail: Vec<String> = checks
        .iter()
        .map(|(name, pass, v)| format!("{name} {v}{}", if *pass { "" } else { " (FAILED)" }))
        .collect();
    let line = format!("{id}: {} | {}\n", if ok { "PASS" } else { "FAIL" }, detail.join("; "));
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    ok
}
