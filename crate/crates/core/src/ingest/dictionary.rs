use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::records::BillRecord;
use crate::error::{Error, Result};

const DEFAULT_DICTIONARY: &str = include_str!("../../data/default_dictionary.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRule {
    pub label: String,
    /// Lowercase keywords or phrases.
    pub keywords: Vec<String>,
}

/// Ordered keyword rules for classifying bill titles; the first matching
/// rule wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordDictionary {
    rules: Vec<KeywordRule>,
}

/// On-disk form: `{"order": [labels...], "keywords": {label: [keywords...]}}`.
#[derive(Serialize, Deserialize)]
struct DictionaryFile {
    order: Vec<String>,
    keywords: BTreeMap<String, Vec<String>>,
}

impl KeywordDictionary {
    pub fn new(rules: Vec<KeywordRule>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(rules.len());
        for rule in rules {
            let label = rule.label.trim().to_string();
            if label.is_empty() {
                return Err(Error::Config("dictionary rule with empty label".into()));
            }
            if !seen.insert(label.to_lowercase()) {
                return Err(Error::Config(format!("duplicate dictionary label {label:?}")));
            }
            let keywords: Vec<String> = rule
                .keywords
                .iter()
                .map(|k| k.trim().to_lowercase())
                .filter(|k| !k.is_empty())
                .collect();
            if keywords.is_empty() {
                return Err(Error::Config(format!("no keywords for {label:?}")));
            }
            normalized.push(KeywordRule { label, keywords });
        }
        Ok(Self { rules: normalized })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DictionaryFile = serde_json::from_str(text).map_err(|e| Error::Config(format!("dictionary: {e}")))?;
        let mut keywords = file.keywords;
        let mut rules = Vec::with_capacity(file.order.len());
        for label in file.order {
            let kws = keywords
                .remove(&label)
                .ok_or_else(|| Error::Config(format!("ordered label {label:?} has no keyword list")))?;
            rules.push(KeywordRule { label, keywords: kws });
        }
        if let Some(extra) = keywords.keys().next() {
            return Err(Error::Config(format!("label {extra:?} missing from \"order\"")));
        }
        Self::new(rules)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = DictionaryFile {
            order: self.rules.iter().map(|r| r.label.clone()).collect(),
            keywords: self
                .rules
                .iter()
                .map(|r| (r.label.clone(), r.keywords.clone()))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// The shipped dictionary covering the thirteen health areas.
    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_DICTIONARY).expect("bundled dictionary is valid")
    }

    pub fn rules(&self) -> &[KeywordRule] {
        &self.rules
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.rules.iter().map(|r| r.label.as_str())
    }

    /// Case-insensitive substring match of each rule's keywords against `title`.
    pub fn classify_title(&self, title: &str) -> Option<&str> {
        let title = title.to_lowercase();
        self.rules
            .iter()
            .find(|r| r.keywords.iter().any(|k| title.contains(k.as_str())))
            .map(|r| r.label.as_str())
    }
}

/// Health area for a bill, from its title alone. `None` means "N/A".
pub fn classify_bill<'d>(bill: &BillRecord, dictionary: &'d KeywordDictionary) -> Option<&'d str> {
    dictionary.classify_title(&bill.title)
}
