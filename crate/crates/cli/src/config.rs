//! Flat `key=value` configuration files.
//!
//! Keys are long flag names of the chosen subcommand. Values from the file
//! are appended as `--key value` unless the same flag was given on the
//! command line, so explicit flags win. `true` turns on a switch, `false`
//! leaves it off.

use std::path::Path;

use anyhow::{bail, Context};

/// Parse `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> anyhow::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key=value", i + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            bail!("line {}: empty key", i + 1);
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Expand `--config FILE` inside `args` (program name first, subcommand
/// second).
pub fn expand_args(args: Vec<String>) -> anyhow::Result<Vec<String>> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let mut args = args;
    let path = if let Some(p) = args[pos].strip_prefix("--config=") {
        let p = p.to_string();
        args.remove(pos);
        p
    } else {
        if pos + 1 >= args.len() {
            bail!("--config needs a file path");
        }
        let p = args.remove(pos + 1);
        args.remove(pos);
        p
    };
    let text = std::fs::read_to_string(Path::new(&path)).with_context(|| format!("reading config {path}"))?;
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    for (key, value) in parse(&text).with_context(|| format!("in config {path}"))? {
        if given.contains(&key) {
            continue;
        }
        match value.as_str() {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value);
            }
        }
    }
    Ok(args)
}
