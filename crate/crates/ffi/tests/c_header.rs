//! Builds a small C program against the generated header and the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "unfold_dpor.h"

int main(void) {
    UdSystem *sys = NULL;
    if (ud_system_generate("writer-readers", UD_DEPENDENCE_READ_ARCS, &sys) != UD_STATUS_OK) return 10;
    UdOptions opts = ud_options_default();
    opts.cutoffs = false;
    UdReport *rep = NULL;
    if (ud_explore(sys, &opts, &rep) != UD_STATUS_OK) return 11;
    char *json = ud_report_stats_json(rep);
    printf("%zu %zu %s\n", ud_report_max_configs(rep), ud_report_events(rep), json);
    ud_string_free(json);
    ud_report_free(rep);
    ud_system_free(sys);
    if (ud_system_generate("nope", UD_DEPENDENCE_READ_ARCS, &sys) != UD_STATUS_INVALID_ARGUMENT) return 12;
    if (ud_last_error() == NULL || strlen(ud_last_error()) == 0) return 13;
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn have(tool: &str) -> bool {
    Command::new(tool).arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn header_is_current() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/unfold_dpor.h")).unwrap();
    for f in ["ud_system_from_json", "ud_system_generate", "ud_explore", "ud_verify", "ud_last_error", "ud_string_free"]
    {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct UdSystem UdSystem;"));
}

#[test]
fn c_program_links_and_runs() {
    if !have("cc") {
        eprintln!("cc not found; skipping");
        return;
    }
    let lib = target_dir().join("libunfold_dpor_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-std=c11", "-Wall", "-Werror", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("4 10 {\"events\":10"), "{stdout}");
}
