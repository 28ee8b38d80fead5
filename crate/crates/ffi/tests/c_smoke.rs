use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "dofinetti.h"

int main(void) {
    DfTable *t = NULL;
    size_t v[1] = {0}, p[1] = {0}, x[1] = {0};
    if (df_analytic_post_interventional(0, 1.0, 3.0, 2, v, p, x, 1, &t) != DF_STATUS_OK) return 1;
    double cells[16];
    if (df_table_probs(t, cells, 16) != DF_STATUS_OK) return 2;
    df_table_free(t);
    if (fabs(cells[0] - 0.45) > 1e-12) return 3;
    if (df_analytic_post_interventional(5, 1.0, 3.0, 2, NULL, NULL, NULL, 0, &t) != DF_STATUS_INVALID_ARGUMENT) return 4;
    if (df_last_error_message() == NULL) return 5;
    printf("ok\n");
    return 0;
}
"#;

#[test]
fn c_program_links_against_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    // target/<profile>/ holds the staticlib built alongside this test
    let profile_dir = tmp
        .parent()
        .unwrap()
        .join(if cfg!(debug_assertions) { "debug" } else { "release" });
    let lib = profile_dir.join("libdofinetti_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let src = tmp.join("smoke.c");
    let exe = tmp.join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
