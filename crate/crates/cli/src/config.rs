//! `key = value` config files merged under command-line flags.
//!
//! Keys are flag names with `_` or `-` separators. A key is turned into its
//! flag and appended to the command line unless that flag was already given
//! there, so the command line always wins. Keys that belong to a different
//! subcommand are ignored; keys no subcommand knows are an error.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{Context, Result};
use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

use crate::UsageError;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn parse_config(text: &str) -> Result<Vec<Entry>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find(" #").or_else(|| raw.trim_start().starts_with('#').then_some(0)) {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let key = key.trim().replace('-', "_");
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        let value = value.trim();
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        out.push(Entry {
            key,
            value: value.to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}

fn parse_bool(entry: &Entry) -> Result<bool, UsageError> {
    match entry.value.as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(UsageError(format!(
            "config line {}: `{}` expects true or false, got `{other}`",
            entry.line, entry.key
        ))),
    }
}

fn given_on_command_line(matches: &[&ArgMatches], id: &str) -> bool {
    matches
        .iter()
        .any(|m| matches!(m.try_get_raw(id), Ok(Some(_))) && m.value_source(id) == Some(ValueSource::CommandLine))
}

/// Flags to append to `argv` for the config entries the command line did
/// not already set.
pub fn config_args(cmd: &Command, matches: &ArgMatches, entries: &[Entry]) -> Result<Vec<OsString>, UsageError> {
    let (sub_name, sub_matches) = matches
        .subcommand()
        .ok_or_else(|| UsageError("no subcommand given".into()))?;
    let sub = cmd.find_subcommand(sub_name).expect("parsed subcommand exists");
    let scopes = [matches, sub_matches];
    let lookup = |id: &str| {
        sub.get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_id().as_str() == id && a.get_long().is_some())
            .cloned()
    };
    let known_elsewhere = |id: &str| {
        cmd.get_subcommands()
            .flat_map(|s| s.get_arguments())
            .any(|a| a.get_id().as_str() == id || a.get_id().as_str() == format!("no_{id}"))
    };

    let mut out = Vec::new();
    for e in entries {
        if e.key == "config" {
            return Err(UsageError(format!("config line {}: config files cannot nest", e.line)));
        }
        let (arg, negated) = match (lookup(&e.key), lookup(&format!("no_{}", e.key))) {
            (Some(a), _) => (a, false),
            (None, Some(a)) => (a, true),
            (None, None) if known_elsewhere(&e.key) => continue,
            (None, None) => {
                return Err(UsageError(format!("config line {}: unknown key `{}`", e.line, e.key)))
            }
        };
        let id = arg.get_id().as_str().to_string();
        if given_on_command_line(&scopes, &id) {
            continue;
        }
        let long = format!("--{}", arg.get_long().expect("filtered on long"));
        if arg.get_action().takes_values() {
            out.push(OsString::from(long));
            out.push(OsString::from(&e.value));
        } else if parse_bool(e)? != negated {
            out.push(OsString::from(long));
        }
    }
    Ok(out)
}

/// Parses `argv`, folding in the `--config` file if one is named.
pub fn parse_with_config<P: clap::FromArgMatches>(cmd: Command, argv: Vec<OsString>) -> Result<P> {
    let matches = cmd.clone().try_get_matches_from(&argv)?;
    let Some(path) = matches.get_one::<std::path::PathBuf>("config").cloned() else {
        return Ok(P::from_arg_matches(&matches)?);
    };
    let entries = read_config(&path)?;
    let extra = config_args(&cmd, &matches, &entries)?;
    let mut full = argv;
    full.extend(extra);
    let matches = cmd.try_get_matches_from(&full)?;
    Ok(P::from_arg_matches(&matches)?)
}

fn read_config(path: &Path) -> Result<Vec<Entry>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
        .map_err(|m| UsageError(format!("{}: {m}", path.display())))
        .context("invalid config file")
}
