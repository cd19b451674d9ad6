//! Compiles and runs a small C program against the generated header and the
//! static library, proving the ABI from the consumer side. Requires a C
//! toolchain (`cc`) on the path.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include "blockspec.h"
#include <assert.h>
#include <string.h>

int main(void) {
    assert(strlen(bsp_version()) > 0);
    double rho[3] = {0.3, 0.3, 0.4};
    double m[9] = {0.5, 0.1, 0.1, 0.1, 0.5, 0.1, 0.1, 0.1, 0.5};
    BspParams *params = NULL;
    assert(bsp_params_new(3, rho, 1, m, false, &params) == BSP_STATUS_OK);
    assert(bsp_params_k(params) == 3);

    BspSample *sample = NULL;
    assert(bsp_sample_generate(params, 200, 42, 0, &sample) == BSP_STATUS_OK);
    assert(bsp_sample_n(sample) == 200);

    size_t tau[200], labels[200], count = 999;
    assert(bsp_sample_tau(sample, tau) == BSP_STATUS_OK);
    assert(bsp_partition(sample, 3, BSP_MODE_ROWS, 3, 20, 42, 0, labels) == BSP_STATUS_OK);
    assert(bsp_misassignment_count(tau, labels, 200, &count) == BSP_STATUS_OK);
    assert(count < 20);

    size_t k = 0;
    assert(bsp_select_k_check(sample, 3, BSP_MODE_ROWS, 0.01, 0.25, 20, 42, 0, &k) == BSP_STATUS_OK);
    assert(k == 3);

    bsp_sample_free(sample);
    bsp_params_free(params);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile = if cfg!(debug_assertions) {
        "debug"
    } else {
        "release"
    };
    manifest.join("../../target").join(profile)
}

#[test]
fn c_program_links_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("smoke.c");
    std::fs::write(&source, PROGRAM).unwrap();
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let staticlib = target_dir().join("libblockspec_capi.a");
    assert!(staticlib.exists(), "static library not built");
    let binary = dir.path().join("smoke");

    let compile = Command::new("cc")
        .arg(&source)
        .arg("-I")
        .arg(&include)
        .arg("-o")
        .arg(&binary)
        .arg(&staticlib)
        .args(["-lopenblas", "-lpthread", "-ldl", "-lm"])
        .output()
        .expect("invoke cc");
    assert!(
        compile.status.success(),
        "compile failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&binary).output().expect("run smoke binary");
    assert!(
        run.status.success(),
        "smoke binary failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );
}
