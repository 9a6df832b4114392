use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LexiconError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ColorOrigin {
    /// The shipped named-color list.
    External,
    /// Colors observed in the dataset's queries.
    Dataset,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorEntry {
    pub name: String,
    pub rgb: [u8; 3],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorTable {
    entries: Vec<ColorEntry>,
    origin: ColorOrigin,
}

fn parse_hex(hex: &str) -> Option<[u8; 3]> {
    let hex = hex.trim().trim_start_matches('#');
    if hex.len() != 6 || !hex.is_ascii() {
        return None;
    }
    let channel = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
    Some([channel(0)?, channel(2)?, channel(4)?])
}

impl ColorTable {
    pub fn new(entries: Vec<ColorEntry>, origin: ColorOrigin) -> Result<ColorTable, LexiconError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.name.as_str()) {
                return Err(LexiconError::Color(format!("duplicate color name `{}`", e.name)));
            }
        }
        Ok(ColorTable { entries, origin })
    }

    /// Reads a `name,rrggbb` CSV. A header row is skipped when its second
    /// field is not a hex triple.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<ColorTable, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<ColorTable, LexiconError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, hex) = line
                .split_once(',')
                .ok_or_else(|| LexiconError::Color(format!("line {}: expected `name,rrggbb`", i + 1)))?;
            match parse_hex(hex) {
                Some(rgb) => entries.push(ColorEntry {
                    name: name.trim().to_lowercase(),
                    rgb,
                }),
                None if i == 0 => continue,
                None => {
                    return Err(LexiconError::Color(format!(
                        "line {}: bad hex color `{}`",
                        i + 1,
                        hex.trim()
                    )))
                }
            }
        }
        ColorTable::new(entries, ColorOrigin::External)
    }

    /// Restricts an external table to the names present in `observed`,
    /// keeping this table's order.
    pub fn dataset_subset<'a>(&self, observed: impl IntoIterator<Item = &'a str>) -> ColorTable {
        let observed: HashSet<&str> = observed.into_iter().collect();
        ColorTable {
            entries: self
                .entries
                .iter()
                .filter(|e| observed.contains(e.name.as_str()))
                .cloned()
                .collect(),
            origin: ColorOrigin::Dataset,
        }
    }

    pub fn entries(&self) -> &[ColorEntry] {
        &self.entries
    }

    pub fn origin(&self) -> ColorOrigin {
        self.origin
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn get(&self, name: &str) -> Option<[u8; 3]> {
        let name = name.to_lowercase();
        self.entries.iter().find(|e| e.name == name).map(|e| e.rgb)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Color similarity `1 / (1 + d / 255)` with `d` the Euclidean RGB
/// distance. `None` when either name is missing from the table.
pub fn color_distance(table: &ColorTable, a: &str, b: &str) -> Option<f64> {
    let x = table.get(a)?;
    let y = table.get(b)?;
    let d2: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(p, q)| {
            let d = f64::from(*p) - f64::from(*q);
            d * d
        })
        .sum();
    Some(1.0 / (1.0 + d2.sqrt() / 255.0))
}

/// The fixed size-adjective sets, paired by list position.
#[derive(Clone, Copy, Debug, Default)]
pub struct SizeTable;

impl SizeTable {
    pub const LARGE: [&'static str; 4] = ["large", "big", "enormous", "huge"];
    pub const SMALL: [&'static str; 4] = ["small", "little", "minor", "tiny"];

    /// The opposite-size word at the same list position.
    pub fn counterpart(word: &str) -> Option<&'static str> {
        let w = word.to_lowercase();
        if let Some(i) = Self::LARGE.iter().position(|x| *x == w) {
            return Some(Self::SMALL[i]);
        }
        Self::SMALL.iter().position(|x| *x == w).map(|i| Self::LARGE[i])
    }
}
