//! Plain-text run configuration: `[section]` headers and `key = value` lines.
//!
//! A section is named after a command path, e.g. `[identities run]` or
//! `[flow sphere]`; `[identities]` applies to every `identities` subcommand.
//! Keys are long flag names without the dashes. Flags given on the command
//! line win over the file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    sections: BTreeMap<String, Vec<(String, String)>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse(format!("line {}: unterminated section header", i + 1)))?;
                current = normalize(name);
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", i + 1)))?;
            let k = k.trim();
            if k.is_empty() || k.starts_with('-') {
                return Err(Error::Parse(format!("line {}: bad key `{k}`", i + 1)));
            }
            let entries = sections.entry(current.clone()).or_default();
            entries.retain(|(key, _)| key != k);
            entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(Self { sections })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Entries applying to `command` (a command path such as `["flow", "sphere"]`),
    /// most specific section last so that it wins.
    pub fn entries_for(&self, command: &[String]) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        for depth in 0..=command.len() {
            if let Some(es) = self.sections.get(&command[..depth].join(" ")) {
                for (k, v) in es {
                    out.retain(|(key, _)| key != k);
                    out.push((k.clone(), v.clone()));
                }
            }
        }
        out
    }

    /// Appends `--key value` for every configured key absent from `argv`.
    /// Boolean keys take `true`/`false`.
    pub fn merge_into(&self, argv: &[String]) -> Vec<String> {
        let command = command_path(argv);
        let given = |key: &str| {
            let flag = format!("--{key}");
            argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
        };
        let mut out = argv.to_vec();
        for (k, v) in self.entries_for(&command) {
            if given(&k) {
                continue;
            }
            match v.as_str() {
                "true" => out.push(format!("--{k}")),
                "false" => {}
                _ => {
                    out.push(format!("--{k}"));
                    out.push(v);
                }
            }
        }
        out
    }
}

/// Global options that take a value and may precede the subcommand.
const GLOBAL_VALUE_FLAGS: [&str; 2] = ["--config", "--jobs"];

/// Leading subcommand words of `argv`, skipping global options.
fn command_path(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if GLOBAL_VALUE_FLAGS.contains(&a.as_str()) {
            it.next();
        } else if a.starts_with('-') {
            if out.is_empty() {
                continue;
            }
            break;
        } else {
            out.push(a.clone());
        }
    }
    out
}

fn normalize(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ")
}
