//! Line-oriented INI reader that keeps line numbers for diagnostics.
//!
//! Syntax: `[section]` or `[section label]` headers, `key = value` pairs,
//! full-line comments starting with `#` or `;`, and trailing ` #` comments.

use std::fmt;

/// A problem in a scenario file, anchored to a line (0 when global).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub key: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line,
            key: key.map(str::to_string),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: ", self.line)?;
        }
        if let Some(k) = &self.key {
            write!(f, "{k}: ")?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub label: Option<String>,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Sets `key`, replacing an existing value or appending a new entry.
    pub fn set(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value.to_string(),
            None => self.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line: 0,
            }),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let trimmed = line.trim_start();
    if trimmed.starts_with('#') || trimmed.starts_with(';') {
        return "";
    }
    match line.find(" #") {
        Some(i) => &line[..i],
        None => line,
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

/// Splits `text` into sections; all syntax errors are collected.
pub fn parse(text: &str) -> Result<Vec<Section>, Vec<Diagnostic>> {
    let mut sections: Vec<Section> = Vec::new();
    let mut diags = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(inner) = rest.strip_suffix(']') else {
                diags.push(Diagnostic::new(line_no, None, "section header is missing ']'"));
                continue;
            };
            let mut parts = inner.split_whitespace();
            let name = parts.next().unwrap_or("").to_string();
            let label = parts.next().map(str::to_string);
            if !valid_name(&name) || parts.next().is_some() || label.as_deref().is_some_and(|l| !valid_name(l)) {
                diags.push(Diagnostic::new(line_no, None, format!("malformed section header '[{inner}]'")));
                continue;
            }
            if sections.iter().any(|s| s.name == name && s.label == label) {
                diags.push(Diagnostic::new(line_no, None, format!("duplicate section '[{inner}]'")));
            }
            sections.push(Section {
                name,
                label,
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            diags.push(Diagnostic::new(line_no, None, format!("expected 'key = value', got '{line}'")));
            continue;
        };
        let key = k.trim();
        let value = v.trim();
        if !valid_name(key) {
            diags.push(Diagnostic::new(line_no, None, format!("invalid key '{key}'")));
            continue;
        }
        let Some(section) = sections.last_mut() else {
            diags.push(Diagnostic::new(line_no, Some(key), "key outside of any section"));
            continue;
        };
        if section.get(key).is_some() {
            diags.push(Diagnostic::new(line_no, Some(key), "duplicate key"));
            continue;
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line: line_no,
        });
    }
    if diags.is_empty() {
        Ok(sections)
    } else {
        Err(diags)
    }
}
