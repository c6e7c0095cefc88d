//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! Values are scalars or comma-separated lists; a list item of the form
//! `start:stop:step` expands to an inclusive arithmetic range, with the
//! step defaulting to 1. `#` and `;` start comments.

use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    /// Empty for keys before the first section header.
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl Entry {
    pub fn qualified(&self) -> String {
        if self.section.is_empty() {
            self.key.clone()
        } else {
            format!("{}.{}", self.section, self.key)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: Vec<Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut section = String::new();
        let mut entries: Vec<Entry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::config_at(line, "unterminated section header"))?
                    .trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return Err(CliError::config_at(line, format!("bad section name `{name}`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::config_at(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::config_at(line, "empty key"));
            }
            if let Some(prev) = entries.iter().find(|e| e.section == section && e.key == key) {
                return Err(CliError::config_at(
                    line,
                    format!("`{key}` already set on line {}", prev.line),
                ));
            }
            entries.push(Entry {
                section: section.clone(),
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Add or replace `section.key` (or a bare key) from a `--set` flag.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (name, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{assignment}`")))?;
        let name = name.trim();
        let (section, key) = name.rsplit_once('.').unwrap_or(("", name));
        let value = value.trim().to_string();
        match self.entries.iter_mut().find(|e| e.section == section && e.key == key) {
            Some(e) => e.value = value,
            None => self.entries.push(Entry {
                section: section.to_string(),
                key: key.to_string(),
                value,
                line: 0,
            }),
        }
        Ok(())
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.section == section && e.key == key)
    }
}

fn items(entry: &Entry) -> Vec<&str> {
    entry.value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn number(entry: &Entry, text: &str) -> Result<f64, CliError> {
    let v: f64 = text
        .parse()
        .map_err(|_| entry_error(entry, format!("`{text}` is not a number")))?;
    if !v.is_finite() && !text.eq_ignore_ascii_case("inf") {
        return Err(entry_error(entry, format!("`{text}` is not finite")));
    }
    Ok(v)
}

pub(crate) fn entry_error(entry: &Entry, msg: impl std::fmt::Display) -> CliError {
    let msg = format!("{}: {msg}", entry.qualified());
    if entry.line == 0 {
        CliError::Config(msg)
    } else {
        CliError::config_at(entry.line, msg)
    }
}

/// Expand `start:stop[:step]`, including `stop` when it lands on the grid.
fn range(entry: &Entry, text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(entry_error(entry, format!("range `{text}` must be start:stop or start:stop:step")));
    }
    let step = match parts.get(2) {
        Some(s) => number(entry, s)?,
        None => 1.0,
    };
    let (start, stop) = (number(entry, parts[0])?, number(entry, parts[1])?);
    if step == 0.0 || (stop - start) * step < 0.0 {
        return Err(entry_error(entry, format!("range `{text}` never reaches its end")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    if count > 1_000_000 {
        return Err(entry_error(entry, format!("range `{text}` has too many points")));
    }
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

pub fn parse_list(entry: &Entry) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for item in items(entry) {
        if item.contains(':') {
            out.extend(range(entry, item)?);
        } else {
            out.push(number(entry, item)?);
        }
    }
    if out.is_empty() {
        return Err(entry_error(entry, "empty value"));
    }
    Ok(out)
}

pub fn parse_usize_list(entry: &Entry) -> Result<Vec<usize>, CliError> {
    parse_list(entry)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(entry_error(entry, format!("`{v}` is not a non-negative integer")))
            }
        })
        .collect()
}

pub fn parse_scalar(entry: &Entry) -> Result<f64, CliError> {
    match parse_list(entry)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(entry_error(entry, "expected a single value")),
    }
}

pub fn parse_usize(entry: &Entry) -> Result<usize, CliError> {
    match parse_usize_list(entry)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(entry_error(entry, "expected a single integer")),
    }
}

pub fn parse_bool(entry: &Entry) -> Result<bool, CliError> {
    match entry.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(entry_error(entry, format!("`{other}` is not a boolean"))),
    }
}
