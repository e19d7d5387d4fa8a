#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub const BIN: &str = env!("CARGO_BIN_EXE_valuescope");

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn mini_corpora() -> PathBuf {
    repo_root().join("fixtures/mini-workspace/corpora")
}

pub fn golden_dir() -> PathBuf {
    repo_root().join("fixtures/mini-workspace-golden")
}

pub fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

/// A fresh copy of the mini-workspace corpora under `dir/ws`.
pub fn mini_workspace(dir: &Path) -> PathBuf {
    let ws = dir.join("ws");
    copy_dir(&mini_corpora(), &ws.join("corpora"));
    ws
}

/// The golden pipeline. `{out}` is replaced by the output directory.
pub const PIPELINE: &[&[&str]] = &[
    &["stats"],
    &["annotate", "--strategy", "snowball"],
    &["train", "--role", "all", "--seed", "1", "--deterministic"],
    &["variation", "--theta", "0.5", "--k", "2", "--seed-label", "mother"],
    &["variation", "--theta", "-1", "--k", "2", "--out", "{out}/complete", "--models", "{out}/models"],
    &["sweep", "--theta-grid", "-1,0,0.25,0.5,0.75"],
    &["export", "--format", "json", "--out", "{out}/export", "--models", "{out}/models"],
];

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn valuescope(ws: &Path, out: &Path, args: &[&str]) -> Run {
    let out_str = out.display().to_string();
    let args: Vec<String> = args.iter().map(|a| a.replace("{out}", &out_str)).collect();
    let output = Command::new(BIN)
        .arg("--workspace")
        .arg(ws)
        .arg("--out")
        .arg(out)
        .args(&args)
        .env_remove("VALUESCOPE_WORKSPACE")
        .output()
        .expect("run valuescope");
    Run {
        code: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

pub fn run_pipeline(ws: &Path, out: &Path) -> Result<(), String> {
    for step in PIPELINE {
        let run = valuescope(ws, out, step);
        if run.code != 0 {
            return Err(format!("{step:?} exited {}: {}", run.code, run.stderr));
        }
    }
    Ok(())
}

/// Every file under `dir` except vector files, keyed by relative path.
/// Vector digests are part of the model metadata, which is compared.
pub fn collect(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else if path.extension().is_none_or(|e| e != "vec") {
                let key = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Differences between `out` and the committed goldens, empty when identical.
pub fn golden_diff(out: &Path) -> Vec<String> {
    let actual = collect(out);
    let expected = collect(&golden_dir());
    let mut diffs = Vec::new();
    for (name, bytes) in &expected {
        match actual.get(name) {
            None => diffs.push(format!("missing {name}")),
            Some(b) if b != bytes => diffs.push(format!("differs {name}")),
            _ => {}
        }
    }
    for name in actual.keys().filter(|n| !expected.contains_key(*n)) {
        diffs.push(format!("unexpected {name}"));
    }
    diffs
}

pub fn bless(out: &Path) {
    let golden = golden_dir();
    let _ = fs::remove_dir_all(&golden);
    for (name, bytes) in collect(out) {
        let path = golden.join(name);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, bytes).unwrap();
    }
}
