//! Flat `key=value` configuration text: one pair per line, `#` starts a
//! comment, blank lines are ignored and lists are comma separated.

use std::str::FromStr;

use crate::error::FormatError;

#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: Vec<(usize, String, String)>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| FormatError::syntax(line_no, "expected `key=value`"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(FormatError::syntax(line_no, "empty key"));
            }
            if entries.iter().any(|(_, k, _)| k == key) {
                return Err(FormatError::syntax(line_no, format!("duplicate key `{key}`")));
            }
            entries.push((line_no, key.to_string(), value.trim().to_string()));
        }
        Ok(KvConfig { entries })
    }

    /// Removes `key` and parses its value.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, FormatError> {
        let Some(pos) = self.entries.iter().position(|(_, k, _)| k == key) else {
            return Ok(None);
        };
        let (line, _, value) = self.entries.remove(pos);
        value
            .parse()
            .map(Some)
            .map_err(|_| FormatError::syntax(line, format!("invalid value `{value}` for `{key}`")))
    }

    /// Removes `key` and parses its comma separated list value.
    pub fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, FormatError> {
        let Some(pos) = self.entries.iter().position(|(_, k, _)| k == key) else {
            return Ok(None);
        };
        let (line, _, value) = self.entries.remove(pos);
        parse_list(&value)
            .map(Some)
            .ok_or_else(|| FormatError::syntax(line, format!("invalid list `{value}` for `{key}`")))
    }

    pub fn set<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<(), FormatError> {
        if let Some(v) = self.take(key)? {
            *slot = v;
        }
        Ok(())
    }

    /// Fails on the first key nobody consumed.
    pub fn finish(self) -> Result<(), FormatError> {
        match self.entries.into_iter().next() {
            Some((line, key, _)) => Err(FormatError::syntax(line, format!("unknown key `{key}`"))),
            None => Ok(()),
        }
    }
}

pub fn parse_list<T: FromStr>(value: &str) -> Option<Vec<T>> {
    if value.trim().is_empty() {
        return Some(Vec::new());
    }
    value.split(',').map(|item| item.trim().parse().ok()).collect()
}
