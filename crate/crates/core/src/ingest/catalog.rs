use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::records::ServiceRequestRecord;
use crate::error::{Error, Result};

/// The thirteen health-related complaint categories and their share (percent)
/// in the original 30k subsample of the 311 dataset.
pub const HEALTH_AREAS: [(&str, f64); 13] = [
    ("Water System", 34.29),
    ("Dirty Conditions", 18.46),
    ("Sanitation Condition", 15.75),
    ("Rodent", 13.84),
    ("Food Establishment", 4.31),
    ("Air Quality", 3.94),
    ("Indoor Air Quality", 2.44),
    ("Food Poisoning", 1.61),
    ("Hazardous Materials", 1.43),
    ("Asbestos", 1.06),
    ("Smoking", 0.98),
    ("Drinking", 0.70),
    ("Water Quality", 0.63),
];

pub const DEFAULT_MAX_CATEGORIES: usize = 13;
pub const DEFAULT_MIN_FRACTION: f64 = 0.005;

/// Canonical form of a category label: whitespace trimmed and collapsed,
/// known health areas in their canonical capitalization, anything else
/// title-cased word by word. Returns `None` for blank input.
pub fn normalize_category(raw: &str) -> Option<String> {
    let words: Vec<&str> = raw.split_whitespace().collect();
    if words.is_empty() {
        return None;
    }
    let joined = words.join(" ");
    if let Some((canon, _)) = HEALTH_AREAS.iter().find(|(name, _)| name.eq_ignore_ascii_case(&joined)) {
        return Some((*canon).to_string());
    }
    let titled = words
        .iter()
        .map(|w| {
            let mut chars = w.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars.flat_map(char::to_lowercase)).collect(),
                None => String::new(),
            }
        })
        .collect::<Vec<String>>()
        .join(" ");
    Some(titled)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub label: String,
    pub count: usize,
    /// count / total over all records passed to selection.
    pub frequency: f64,
}

/// Selected complaint categories in descending frequency order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCatalog {
    pub entries: Vec<CatalogEntry>,
}

impl CategoryCatalog {
    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.entries.iter().any(|e| e.label == label)
    }
}

/// Keep the most frequent complaint types: frequency ≥ `min_fraction`, at most
/// `max_categories`, ties broken alphabetically.
pub fn select_top_categories(
    records: &[ServiceRequestRecord],
    max_categories: usize,
    min_fraction: f64,
) -> Result<CategoryCatalog> {
    if records.is_empty() {
        return Err(Error::invalid("no records to select categories from"));
    }
    if max_categories == 0 {
        return Err(Error::invalid("max_categories must be positive"));
    }
    if !(0.0..=1.0).contains(&min_fraction) {
        return Err(Error::invalid(format!("min_fraction {min_fraction} outside [0, 1]")));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in records {
        *counts.entry(r.complaint_type.as_str()).or_default() += 1;
    }
    let total = records.len() as f64;
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let entries = ranked
        .into_iter()
        .map(|(label, count)| CatalogEntry {
            label: label.to_string(),
            count,
            frequency: count as f64 / total,
        })
        .filter(|e| e.frequency >= min_fraction)
        .take(max_categories)
        .collect();
    Ok(CategoryCatalog { entries })
}
