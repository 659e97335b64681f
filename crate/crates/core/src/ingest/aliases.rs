use std::collections::HashMap;
use std::io::Read;

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../data/country_aliases.csv");

/// Maps the country names used by the different sources onto one key
/// (ISO 3166-1 alpha-3 for every listed country).
///
/// Lookups compare [`normalize_name`] forms, so case, accents, underscores
/// and punctuation do not matter. There is no fuzzy matching.
#[derive(Debug, Clone, Default)]
pub struct AliasTable {
    by_alias: HashMap<String, String>,
    display: HashMap<String, String>,
}

impl AliasTable {
    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_reader(BUILTIN.as_bytes()).expect("bundled alias table is valid")
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// CSV with header `iso3,alias`, one alias per row. The first alias
    /// listed for a code is its display name.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut table = AliasTable::default();
        for rec in rdr.records() {
            let rec = rec?;
            let (code, alias) = (rec.get(0).unwrap_or(""), rec.get(1).unwrap_or(""));
            if code.is_empty() || alias.is_empty() {
                return Err(Error::Alias(format!("incomplete row {:?}", rec.as_slice())));
            }
            table.insert(code, alias)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, code: &str, alias: &str) -> Result<()> {
        let key = normalize_name(alias);
        match self.by_alias.get(&key) {
            Some(existing) if existing != code => {
                return Err(Error::Alias(format!(
                    "{alias:?} maps to both {existing} and {code}"
                )))
            }
            _ => {}
        }
        self.by_alias.insert(key, code.to_string());
        self.display
            .entry(code.to_string())
            .or_insert_with(|| alias.to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.by_alias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_alias.is_empty()
    }

    /// Canonical key for `name`: the listed code, a code given verbatim, or
    /// failing both the normalized name itself.
    pub fn resolve(&self, name: &str) -> String {
        if let Some(code) = self.by_alias.get(&normalize_name(name)) {
            return code.clone();
        }
        if self.display.contains_key(name) {
            return name.to_string();
        }
        normalize_name(name)
    }

    /// Whether `name` resolves through the table rather than by fallback.
    pub fn knows(&self, name: &str) -> bool {
        self.by_alias.contains_key(&normalize_name(name)) || self.display.contains_key(name)
    }

    pub fn display_name(&self, code: &str) -> Option<&str> {
        self.display.get(code).map(String::as_str)
    }
}

/// Lowercase, ASCII-folded, with `_` and `-` read as spaces and every other
/// punctuation mark removed.
pub fn normalize_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for ch in name.chars().flat_map(char::to_lowercase) {
        let ch = match ch {
            'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' => 'a',
            'ç' => 'c',
            'è' | 'é' | 'ê' | 'ë' => 'e',
            'ì' | 'í' | 'î' | 'ï' => 'i',
            'ñ' => 'n',
            'ò' | 'ó' | 'ô' | 'õ' | 'ö' => 'o',
            'ù' | 'ú' | 'û' | 'ü' => 'u',
            'ý' | 'ÿ' => 'y',
            '_' | '-' => ' ',
            c => c,
        };
        if ch.is_alphanumeric() || ch == ' ' {
            out.push(ch);
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}
