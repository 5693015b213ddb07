//! `--config` files: `key = value` lines turned into flags the user did not pass.

use std::path::Path;

use largesol::Manifest;

use crate::error::CliError;

const GLOBAL_WITH_VALUE: [&str; 2] = ["--jobs", "--config"];

fn config_path(argv: &[String]) -> Option<String> {
    argv.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            argv.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    })
}

fn subcommand_index(argv: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].as_str();
        if GLOBAL_WITH_VALUE.contains(&a) {
            i += 2;
        } else if a.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn has_flag(argv: &[String], flag: &str) -> bool {
    let prefix = format!("{flag}=");
    argv.iter().any(|a| a == flag || a.starts_with(&prefix))
}

/// Splices config entries into `argv` right after the subcommand; explicit flags win.
pub fn merge(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let Some(at) = subcommand_index(&argv) else {
        return Ok(argv);
    };
    let cfg = Manifest::load(Path::new(&path))
        .map_err(|e| CliError::Usage(format!("cannot read config `{path}`: {e}")))?;
    Ok(splice(argv, at, &cfg))
}

fn splice(argv: Vec<String>, at: usize, cfg: &Manifest) -> Vec<String> {
    let mut extra = Vec::new();
    for (key, value) in cfg.entries() {
        let flag = format!("--{}", key.replace('_', "-"));
        if has_flag(&argv, &flag) || flag == "--config" {
            continue;
        }
        match value {
            "true" => extra.push(flag),
            "false" => {}
            v => {
                extra.push(flag);
                extra.push(v.to_string());
            }
        }
    }
    let mut out = argv;
    let tail = out.split_off(at + 1);
    out.extend(extra);
    out.extend(tail);
    out
}
