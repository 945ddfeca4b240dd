//! `key = value` sweep configuration files.
//!
//! ```text
//! # comment
//! [protocol]
//! t1 = 300ns, 500ns, 700ns
//! theta_steps = 100
//! ```
//!
//! A `[section]` header names the command, as does a `command = ...` line.
//! Repeated keys keep the last value and produce a warning.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    Analytic,
    Nqubit,
    Multicycle,
    Protocol,
    Storage,
    Verify,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Analytic,
        Command::Nqubit,
        Command::Multicycle,
        Command::Protocol,
        Command::Storage,
        Command::Verify,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Nqubit => "nqubit",
            Command::Multicycle => "multicycle",
            Command::Protocol => "protocol",
            Command::Storage => "storage",
            Command::Verify => "verify",
        }
    }

    /// Keys accepted by this command, with `(required)` ones first.
    pub fn keys(&self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Command::Analytic => (&["n"], &["p_min", "p_max", "p_steps"]),
            Command::Nqubit => (&["n"], &["p_min", "p_max", "p_steps", "averager", "nodes", "samples"]),
            Command::Multicycle => (&["n", "cycles"], &["t_over_t1", "pulses"]),
            Command::Protocol => (
                &["t1"],
                &["t2", "protocol", "errors", "theta_steps", "theta_max", "dt", "pulse", "decohere_error_slot", "decohere_during_gates"],
            ),
            Command::Storage => (&["t1"], &["t2", "p_min", "p_max", "p_steps", "dt"]),
            Command::Verify => (&[], &["tolerance", "grid_tolerance", "dt_tolerance", "mc_samples", "mc_sigmas", "grid_resolution"]),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command '{s}'"))
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepConfig {
    pub command: Option<Command>,
    pub output_path: Option<PathBuf>,
    entries: BTreeMap<String, Entry>,
    /// Diagnostics such as overridden duplicates.
    pub warnings: Vec<String>,
}

fn config_err(line: usize, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {msg}"))
}

/// Parses a configuration file.
pub fn parse_config(text: &str) -> Result<SweepConfig, CliError> {
    let mut cfg = SweepConfig::default();
    let mut command_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = if let Some(section) = body.strip_prefix('[') {
            let name = section
                .strip_suffix(']')
                .ok_or_else(|| config_err(line, format!("unterminated section header '{body}'")))?;
            ("command", name.trim())
        } else {
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected 'key = value', got '{body}'")))?;
            (k.trim(), v.trim())
        };
        if key.is_empty() || value.is_empty() {
            return Err(config_err(line, format!("empty key or value in '{body}'")));
        }
        match key {
            "command" => {
                let c = value.parse::<Command>().map_err(|e| config_err(line, e))?;
                if let Some(prev) = cfg.command.filter(|p| *p != c) {
                    return Err(config_err(
                        line,
                        format!("command '{c}' conflicts with '{prev}' on line {command_line}"),
                    ));
                }
                cfg.command = Some(c);
                command_line = line;
            }
            "output" => cfg.output_path = Some(PathBuf::from(value)),
            _ => {
                let entry = Entry {
                    value: value.to_string(),
                    line,
                };
                if let Some(old) = cfg.entries.insert(key.to_string(), entry) {
                    cfg.warnings.push(format!(
                        "line {line}: '{key}' overrides the value from line {}",
                        old.line
                    ));
                }
            }
        }
    }
    Ok(cfg)
}

impl SweepConfig {
    /// Entries of `other` replace those of `self`.
    pub fn merged(mut self, other: SweepConfig) -> SweepConfig {
        if other.command.is_some() {
            self.command = other.command;
        }
        if other.output_path.is_some() {
            self.output_path = other.output_path;
        }
        self.entries.extend(other.entries);
        self.warnings.extend(other.warnings);
        self
    }

    /// Checks the config against `command`: matching command name, no
    /// unknown keys, every required key present.
    pub fn check_for(&self, command: Command) -> Result<(), CliError> {
        if let Some(c) = self.command.filter(|c| *c != command) {
            return Err(CliError::Config(format!("config is for '{c}', but '{command}' was requested")));
        }
        let (required, optional) = command.keys();
        for (key, e) in &self.entries {
            if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                return Err(config_err(e.line, format!("unknown key '{key}' for command '{command}'")));
            }
        }
        for key in required {
            if !self.entries.contains_key(*key) {
                return Err(CliError::Config(format!("missing required key '{key}' for command '{command}'")));
            }
        }
        Ok(())
    }

    /// Canonical `key=value` lines, used for the output hash.
    pub fn canonical(&self, command: Command) -> String {
        let mut s = format!("command={command}\n");
        for (k, e) in &self.entries {
            s.push_str(&format!("{k}={}\n", e.value));
        }
        s
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn parse_each<V>(&self, key: &str, f: impl Fn(&str) -> Result<V, String>) -> Result<Option<Vec<V>>, CliError> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        e.value
            .split(',')
            .map(|item| f(item.trim()).map_err(|msg| config_err(e.line, format!("{msg} for key '{key}'"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn single<V>(&self, key: &str, f: impl Fn(&str) -> Result<V, String>) -> Result<Option<V>, CliError> {
        match self.parse_each(key, f)? {
            None => Ok(None),
            Some(mut v) if v.len() == 1 => Ok(v.pop()),
            Some(_) => Err(config_err(self.raw(key).map_or(0, |e| e.line), format!("'{key}' takes a single value"))),
        }
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.single(key, parse_number)
    }

    pub fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.parse_each(key, parse_number)
    }

    pub fn count(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.single(key, parse_count)
    }

    pub fn counts(&self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        self.parse_each(key, parse_count)
    }

    /// Durations in seconds.
    pub fn durations(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.parse_each(key, parse_duration)
    }

    pub fn duration(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.single(key, parse_duration)
    }

    pub fn flag(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.single(key, |s| match s {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(format!("expected true or false, got '{s}'")),
        })
    }

    /// Values parsed by their `FromStr` implementation.
    pub fn parsed<V: FromStr>(&self, key: &str) -> Result<Option<Vec<V>>, CliError>
    where
        V::Err: fmt::Display,
    {
        self.parse_each(key, |s| s.parse::<V>().map_err(|e| e.to_string()))
    }

    pub fn parsed_one<V: FromStr>(&self, key: &str) -> Result<Option<V>, CliError>
    where
        V::Err: fmt::Display,
    {
        self.single(key, |s| s.parse::<V>().map_err(|e| e.to_string()))
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.raw(key).map(|e| e.value.as_str())
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| format!("malformed number '{s}'")),
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.parse::<usize>().map_err(|_| format!("malformed count '{s}'"))
}

/// Duration in seconds; a bare number is taken in nanoseconds.
pub fn parse_duration(s: &str) -> Result<f64, String> {
    let split = s
        .find(|c: char| c.is_ascii_alphabetic() || c == 'µ')
        .filter(|_| !s.starts_with("inf"))
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let per_second = match unit.trim() {
        "" | "ns" => 1e9,
        "us" | "µs" => 1e6,
        "ms" => 1e3,
        "s" => 1.0,
        other => return Err(format!("unknown time unit '{other}' in '{s}'")),
    };
    Ok(parse_number(num.trim())? / per_second)
}
