#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    /// Stdout, then stderr under a marker line when there is any.
    pub fn transcript(&self) -> String {
        if self.stderr.is_empty() {
            self.stdout.clone()
        } else {
            format!("{}--- stderr ---\n{}", self.stdout, self.stderr)
        }
    }
}

pub fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

/// Runs the binary with a clean `QDIST_*` environment plus `env`.
pub fn qdist(args: &[String], env: &[(String, String)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qdist"));
    for var in ["QDIST_ELL", "QDIST_N", "QDIST_ROOT_EXPONENT", "QDIST_FORMAT", "QDIST_CACHE", "QDIST_JOBS", "QDIST_CAP"] {
        cmd.env_remove(var);
    }
    cmd.args(args).envs(env.iter().cloned());
    let out = cmd.output().expect("qdist runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

pub fn qdist_str(args: &[&str]) -> Run {
    let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    qdist(&owned, &[])
}

pub struct GoldenCase {
    pub name: String,
    pub exit: i32,
    pub env: Vec<(String, String)>,
    pub args: Vec<String>,
}

pub fn golden_cases() -> Vec<GoldenCase> {
    let text = std::fs::read_to_string(tests_dir().join("golden/cases.txt")).expect("cases.txt");
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
        let fields: Vec<&str> = line.splitn(3, '|').map(str::trim).collect();
        let [name, exit, rest] = fields[..] else {
            panic!("malformed case line: {line}");
        };
        let words = shlex::split(rest).expect("balanced quotes");
        let mut env = Vec::new();
        let mut args = Vec::new();
        for w in words {
            match w.split_once('=') {
                Some((k, v)) if args.is_empty() && k.starts_with("QDIST_") => env.push((k.to_string(), v.to_string())),
                _ => args.push(w),
            }
        }
        out.push(GoldenCase {
            name: name.to_string(),
            exit: exit.parse().expect("exit code"),
            env,
            args,
        });
    }
    out
}

pub fn golden_path(name: &str) -> PathBuf {
    tests_dir().join("golden").join(format!("{name}.out"))
}

pub fn corpus() -> Vec<String> {
    let text = std::fs::read_to_string(tests_dir().join("corpus/expressions.txt")).expect("corpus");
    text.lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
}
