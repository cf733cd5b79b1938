//! Compiles a C client against the generated header and the static
//! library, then runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

/// Directory holding the library artifacts of this build profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().expect("test executable path");
    exe.parent().and_then(Path::parent).expect("target/<profile>/deps/<test>").to_path_buf()
}

#[test]
fn c_client_builds_and_runs() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = artifact_dir().join("libhodecomp_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let out = std::env::temp_dir().join(format!("hodecomp-c-client-{}", std::process::id()));
    let status = Command::new("cc")
        .args(["-std=c11", "-Wall", "-Werror", "-I"])
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests").join("c_client.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("a C compiler is installed as cc");
    assert!(status.success(), "the C client did not compile");
    let run = Command::new(&out).output().expect("the C client runs");
    let _ = std::fs::remove_file(&out);
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}");
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[..4], ["typed 1 degree 7", "minimal 1", "inert 1", "parse status 3"]);
    assert!(lines[4].starts_with("text new s"), "{stdout}");
}
