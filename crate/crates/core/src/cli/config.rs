//! `--config FILE` support: plain `key=value` lines whose keys are long flag
//! names. Values from the file are appended as flags unless the same flag was
//! given on the command line, so explicit flags win.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The command line with config-file entries merged in.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedArgs {
    pub args: Vec<String>,
    /// SHA-256 of the flag groups (config flag excluded), sorted.
    pub config_hash: String,
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn flag_given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

/// `(key, value)` pairs of a config file, in file order. Blank lines and
/// lines starting with `#` are ignored.
pub fn parse_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            field: 1,
            message: "expected key=value".into(),
        })?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                field: 1,
                message: format!("invalid key '{key}'"),
            });
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Merges config-file entries into `args` (program name first, subcommand
/// second). `true`/`false` values toggle switches.
pub fn merge_config(args: Vec<String>) -> Result<MergedArgs> {
    let mut merged = args.clone();
    if let Some(path) = config_path(&args) {
        for (key, value) in parse_config(Path::new(&path))? {
            if flag_given(&args, &key) {
                continue;
            }
            match value.as_str() {
                "true" => merged.push(format!("--{key}")),
                "false" => {}
                _ => {
                    merged.push(format!("--{key}"));
                    merged.push(value);
                }
            }
        }
    }
    let config_hash = hash_args(&merged);
    Ok(MergedArgs {
        args: merged,
        config_hash,
    })
}

/// Order-insensitive digest: tokens are grouped by the flag that starts them.
fn hash_args(args: &[String]) -> String {
    let mut groups: Vec<Vec<&str>> = Vec::new();
    let mut skip_value = false;
    for a in args.iter().skip(1) {
        if skip_value {
            skip_value = false;
            continue;
        }
        if a == "--config" {
            skip_value = true;
            continue;
        }
        if a.starts_with("--config=") {
            continue;
        }
        if a.starts_with("--") || groups.is_empty() {
            groups.push(vec![a]);
        } else {
            groups.last_mut().expect("non-empty").push(a);
        }
    }
    // the subcommand stays first; flags are sorted
    if groups.len() > 1 {
        groups[1..].sort();
    }
    let canonical: Vec<String> = groups.iter().map(|g| g.join(" ")).collect();
    let digest = Sha256::digest(canonical.join("\n").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn flags_win_over_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# comment\nseed = 9\nreps=3\nsymmetrize=true\nplot=false\n").unwrap();
        let args = s(&["prdim", "sweep", "--seed", "1", "--config", path.to_str().unwrap()]);
        let merged = merge_config(args).unwrap();
        assert_eq!(merged.args[6..], s(&["--reps", "3", "--symmetrize"]));
    }

    #[test]
    fn hash_ignores_flag_order_and_config_path() {
        let a = hash_args(&s(&["prdim", "sweep", "--seed", "1", "--reps", "2"]));
        let b = hash_args(&s(&["prdim", "sweep", "--reps", "2", "--config", "x", "--seed", "1"]));
        let c = hash_args(&s(&["prdim", "sweep", "--reps", "3", "--seed", "1"]));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn malformed_line_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        fs::write(&path, "seed 3\n").unwrap();
        assert!(matches!(parse_config(&path), Err(Error::Parse { line: 1, .. })));
    }
}
