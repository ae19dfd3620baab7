//! `--config FILE`: `key=value` lines turned into `--key value` flags that
//! precede the command-line ones, so explicit flags win.

use std::path::Path;

use crate::{usage, CliResult};

fn config_path(argv: &[String]) -> CliResult<Option<(usize, usize, String)>> {
    for (i, a) in argv.iter().enumerate().skip(1) {
        if a == "--" {
            break;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some((i, 1, p.to_string())));
        }
        if a == "--config" {
            let p = argv
                .get(i + 1)
                .ok_or_else(|| usage("--config needs a file"))?;
            return Ok(Some((i, 2, p.clone())));
        }
    }
    Ok(None)
}

/// Parses `key=value` lines; `#` starts a comment line.
pub fn parse(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", n + 1)))?;
        let k = k.trim().replace('_', "-");
        if k.is_empty() || k == "config" {
            return Err(usage(format!("config line {}: bad key", n + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

fn read(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

/// Removes `--config` from `argv` and splices the file's flags in right
/// after the subcommand name.
pub fn expand(mut argv: Vec<String>) -> CliResult<Vec<String>> {
    let Some((at, len, path)) = config_path(&argv)? else {
        return Ok(argv);
    };
    argv.drain(at..at + len);
    let entries = read(Path::new(&path))?;
    let sub = argv
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 2)
        .ok_or_else(|| usage("missing subcommand"))?;
    let mut flags = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => flags.push(format!("--{k}")),
            "false" => {}
            _ => flags.push(format!("--{k}={v}")),
        }
    }
    argv.splice(sub..sub, flags);
    Ok(argv)
}
