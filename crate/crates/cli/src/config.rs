//! `--config FILE` support: plain `key = value` lines that become default
//! flags for the chosen subcommand. Flags given on the command line win.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};

/// Removes `--config PATH` / `--config=PATH` from `args` and splices the
/// file's entries in directly after the subcommand name.
pub fn expand_config_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            let path = iter.next().context("--config needs a file path")?;
            config = Some(path);
        } else if let Some(path) = text.strip_prefix("--config=") {
            config = Some(OsString::from(path));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)
        .with_context(|| format!("{}: cannot read config", path.to_string_lossy()))?;
    let injected =
        parse_config(&text).with_context(|| format!("{}: bad config", path.to_string_lossy()))?;

    // first non-flag argument after the program name is the subcommand
    let Some(pos) = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 2)
    else {
        return Ok(rest);
    };
    let mut out: Vec<OsString> = rest[..pos].to_vec();
    out.extend(injected.into_iter().map(OsString::from));
    out.extend_from_slice(&rest[pos..]);
    Ok(out)
}

/// Turns config text into flag tokens. `key = true` becomes a bare `--key`,
/// `key = false` is dropped; underscores in keys become dashes.
pub fn parse_config(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key = value", n + 1);
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            bail!("line {}: empty key", n + 1);
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}
