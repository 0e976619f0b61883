//! Line-oriented `key = value` run configuration files.
//!
//! `#` starts a comment (whole line or trailing), blank lines are skipped,
//! keys are case-sensitive. Values stay raw strings; the consumer parses
//! them per key. When a key repeats, the last occurrence wins.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    MalformedLine { line: usize },
    #[error("line {line}: empty key")]
    EmptyKey { line: usize },
}

/// Parses config text into (key, value) pairs in file order.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let eq = content
            .find('=')
            .ok_or(ConfigError::MalformedLine { line })?;
        let key = content[..eq].trim();
        let value = content[eq + 1..].trim();
        if key.is_empty() {
            return Err(ConfigError::EmptyKey { line });
        }
        if let Some(existing) = pairs.iter_mut().find(|(k, _)| k == key) {
            existing.1 = value.to_string();
        } else {
            pairs.push((key.to_string(), value.to_string()));
        }
    }
    Ok(pairs)
}
