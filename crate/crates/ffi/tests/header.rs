//! The C header is maintained by hand; these tests keep it in step with the
//! exported symbols and check that a C program can use it.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

const HEADER: &str = include_str!("../include/nrqmc.h");
const SOURCE: &str = include_str!("../src/lib.rs");

fn names_after(text: &str, marker: &str) -> BTreeSet<String> {
    text.match_indices(marker)
        .map(|(i, _)| {
            text[i + marker.len()..]
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect()
        })
        .collect()
}

#[test]
fn header_declares_every_export() {
    let exported = names_after(SOURCE, "extern \"C\" fn ");
    let declared: BTreeSet<String> = names_after(HEADER, " nrqmc_")
        .into_iter()
        .chain(names_after(HEADER, "*nrqmc_"))
        .map(|n| format!("nrqmc_{n}"))
        .collect();
    assert!(!exported.is_empty());
    assert_eq!(exported, declared);
}

#[test]
fn header_status_codes_match() {
    for (name, code) in [
        ("OK", 0),
        ("NULL_POINTER", 1),
        ("DIMENSION", 2),
        ("PARAMETER", 3),
        ("INPUT", 4),
        ("DOMAIN", 5),
        ("NUMERICAL", 6),
        ("IO", 7),
        ("PANIC", 8),
    ] {
        assert!(HEADER.contains(&format!("NRQMC_STATUS_{name} = {code},")), "{name}");
    }
}

/// `target/<profile>`, where cargo places the static library.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "nrqmc.h"

int main(void) {
    double w[6] = {0, 0, 0, 0, 0, 0};
    double x[6] = {1, 2, 3, 2, 4, 6};
    NrqmcMatrix *m = NULL;
    if (nrqmc_matrix_new(2, 3, w, x, NULL, NULL, &m) != NRQMC_STATUS_OK) return 1;
    double s[2];
    if (nrqmc_matrix_singular_values(m, s, 2) != NRQMC_STATUS_OK) return 2;
    if (fabs(s[0] - sqrt(70.0)) > 1e-9 || fabs(s[1]) > 1e-9) return 3;

    NrqmcMask *mask = NULL;
    if (nrqmc_mask_random(2, 3, 1.0, 1, &mask) != NRQMC_STATUS_OK) return 4;
    NrqmcConfig *cfg = NULL;
    nrqmc_config_new(&cfg);
    if (nrqmc_config_set_p(cfg, 5.0) != NRQMC_STATUS_PARAMETER) return 5;
    if (nrqmc_last_error()[0] == '\0') return 6;
    NrqmcReport *r = NULL;
    if (nrqmc_solve(m, mask, cfg, &r) != NRQMC_STATUS_OK) return 7;
    NrqmcSummary sum;
    if (nrqmc_report_summary(r, &sum) != NRQMC_STATUS_OK || sum.iterations == 0) return 8;
    if (nrqmc_matrix_shape(NULL, NULL, NULL) != NRQMC_STATUS_NULL_POINTER) return 9;

    nrqmc_report_free(r);
    nrqmc_config_free(cfg);
    nrqmc_mask_free(mask);
    nrqmc_matrix_free(m);
    printf("%s\n", nrqmc_version());
    return 0;
}
"#;

#[test]
fn c_program_compiles_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib = artifact_dir().join("libnrqmc_ffi.a");
    let dir = tempfile_dir();
    let src = dir.join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();

    let syntax = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(syntax.success(), "header does not compile");

    if !lib.exists() {
        eprintln!("{} not built; checked syntax only", lib.display());
        return;
    }
    let exe = dir.join("main");
    let link = Command::new(&cc)
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(link.success(), "link failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
    let _ = std::fs::remove_dir_all(&dir);
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nrqmc-ffi-c-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
