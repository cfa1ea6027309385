use std::path::PathBuf;
use std::process::Command;

/// Compiles the C smoke program against the generated header and the static
/// library, then runs it. Skipped when no C compiler is on PATH.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.parent().unwrap().join("libergolab_ffi.a");
    let lib = if lib.exists() { lib } else { deps.join("libergolab_ffi.a") };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ergolab_smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let line = String::from_utf8(out.stdout).unwrap();
    assert_eq!(line.trim(), format!("{} 0.7799443 msg", env!("CARGO_PKG_VERSION")));
}
