//! Line-oriented `key = value` files with `[section]` headers.
//!
//! Values may be double-quoted; `#` and `;` start comments outside quotes.
//! Every entry remembers its line so later validation can point at it.

use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ini {
    pub path: PathBuf,
    pub sections: Vec<Section>,
}

impl Ini {
    pub fn read(path: &Path) -> Result<Ini> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            line: None,
            msg: format!("cannot read config: {e}"),
        })?;
        Ini::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Ini> {
        let err = |line: usize, msg: String| CliError::Config {
            path: path.to_path_buf(),
            line: Some(line),
            msg,
        };
        let mut sections: Vec<Section> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = strip_comment(raw).map_err(|m| err(line, m))?;
            let content = content.trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, "section header must end with `]`".into()))?
                    .trim();
                if name.is_empty() {
                    return Err(err(line, "empty section name".into()));
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(err(line, format!("section [{name}] appears twice")));
                }
                sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, found `{content}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(err(line, "missing key before `=`".into()));
            }
            let section = sections
                .last_mut()
                .ok_or_else(|| err(line, format!("key `{key}` appears before any [section]")))?;
            if section.get(key).is_some() {
                return Err(err(
                    line,
                    format!("key `{key}` repeated in [{}]", section.name),
                ));
            }
            section.entries.push(Entry {
                key: key.to_string(),
                value: unquote(value.trim()).map_err(|m| err(line, m))?,
                line,
            });
        }
        Ok(Ini {
            path: path.to_path_buf(),
            sections,
        })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

fn strip_comment(line: &str) -> Result<&str, String> {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' | ';' if !quoted => return Ok(&line[..i]),
            _ => {}
        }
    }
    if quoted {
        return Err("unterminated quote".into());
    }
    Ok(line)
}

fn unquote(v: &str) -> Result<String, String> {
    match v.strip_prefix('"') {
        Some(rest) => match rest.strip_suffix('"') {
            Some(inner) if !inner.contains('"') => Ok(inner.to_string()),
            _ => Err(format!("malformed quoted value `{v}`")),
        },
        None if v.contains('"') => Err(format!("stray quote in `{v}`")),
        None => Ok(v.to_string()),
    }
}
