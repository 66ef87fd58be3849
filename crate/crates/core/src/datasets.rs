//! Reference magic-number sets: sodium-cluster experiments and literature
//! model predictions.
//!
//! The built-in registry is compiled in from `data/datasets.json`. User
//! datasets use the same schema, one object per file or an array of objects.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shells::MagicSet;

const EMBEDDED: &str = include_str!("../data/datasets.json");

/// Largest count a dataset entry may carry.
pub const MAX_ENTRY: u32 = 1516;

/// Environment variable naming a directory of extra dataset files.
pub const DATA_DIR_ENV: &str = "QSHELL_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Experiment,
    Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataPoint {
    pub n: u32,
    /// Printed uncertainty, only where the source gives one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<u32>,
    /// Parenthesised in the source, or an alternative reading of a neighbour.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub weak: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceDataset {
    pub id: String,
    pub kind: DatasetKind,
    pub source: String,
    pub values: Vec<DataPoint>,
}

impl ReferenceDataset {
    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::invalid("dataset id must not be empty"));
        }
        if self.values.is_empty() {
            return Err(Error::invalid(format!("dataset '{}' has no values", self.id)));
        }
        let mut prev = 0;
        for p in &self.values {
            if p.n == 0 || p.n > MAX_ENTRY {
                return Err(Error::invalid(format!(
                    "dataset '{}': value {} outside 1..={MAX_ENTRY}",
                    self.id, p.n
                )));
            }
            if p.n <= prev {
                return Err(Error::invalid(format!(
                    "dataset '{}': values not strictly increasing at {}",
                    self.id, p.n
                )));
            }
            prev = p.n;
        }
        Ok(())
    }

    /// All entries, weak ones included, with printed uncertainties (0 where absent).
    pub fn magic(&self) -> MagicSet {
        let (values, sigmas) = self
            .values
            .iter()
            .map(|p| (p.n, p.sigma.unwrap_or(0)))
            .unzip();
        MagicSet::with_uncertainties(values, sigmas).expect("validated dataset")
    }

    pub fn sigma_of(&self, n: u32) -> Option<u32> {
        self.values.iter().find(|p| p.n == n).and_then(|p| p.sigma)
    }

    pub fn is_experiment(&self) -> bool {
        self.kind == DatasetKind::Experiment
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(ReferenceDataset),
    Many(Vec<ReferenceDataset>),
}

/// Parse one dataset object or an array of them.
pub fn parse_datasets(text: &str) -> Result<Vec<ReferenceDataset>> {
    let sets = match serde_json::from_str(text)? {
        OneOrMany::One(d) => vec![d],
        OneOrMany::Many(v) => v,
    };
    for d in &sets {
        d.validate()?;
    }
    Ok(sets)
}

pub fn load_dataset_file(path: &Path) -> Result<Vec<ReferenceDataset>> {
    let text = fs::read_to_string(path)?;
    parse_datasets(&text)
}

/// The built-in datasets, in table order.
pub fn registry() -> Vec<ReferenceDataset> {
    parse_datasets(EMBEDDED).expect("embedded datasets are valid")
}

/// Ids of the built-in experimental datasets.
pub fn experiment_ids() -> Vec<String> {
    registry()
        .into_iter()
        .filter(ReferenceDataset::is_experiment)
        .map(|d| d.id)
        .collect()
}

/// Datasets addressable by id.
#[derive(Debug, Clone)]
pub struct Registry {
    sets: Vec<ReferenceDataset>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    pub fn builtin() -> Self {
        Self { sets: registry() }
    }

    /// Built-ins plus every `*.json` file in `$QSHELL_DATA_DIR`, if set.
    pub fn from_env() -> Result<Self> {
        let mut reg = Self::builtin();
        if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
            reg.extend_from_dir(Path::new(&dir))?;
        }
        Ok(reg)
    }

    pub fn extend_from_dir(&mut self, dir: &Path) -> Result<()> {
        let mut files: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        for f in files {
            self.extend(load_dataset_file(&f)?)?;
        }
        Ok(())
    }

    /// Add datasets; ids must stay unique.
    pub fn extend(&mut self, sets: Vec<ReferenceDataset>) -> Result<()> {
        let mut seen: HashSet<String> = self.sets.iter().map(|d| d.id.clone()).collect();
        for d in &sets {
            d.validate()?;
            if !seen.insert(d.id.clone()) {
                return Err(Error::invalid(format!("duplicate dataset id '{}'", d.id)));
            }
        }
        self.sets.extend(sets);
        Ok(())
    }

    pub fn all(&self) -> &[ReferenceDataset] {
        &self.sets
    }

    pub fn get(&self, id: &str) -> Result<&ReferenceDataset> {
        self.sets
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| Error::not_found(format!("unknown dataset id '{id}'")))
    }

    pub fn select(&self, ids: &[impl AsRef<str>]) -> Result<Vec<ReferenceDataset>> {
        ids.iter().map(|id| self.get(id.as_ref()).cloned()).collect()
    }

    pub fn experiments(&self) -> Vec<ReferenceDataset> {
        self.sets.iter().filter(|d| d.is_experiment()).cloned().collect()
    }
}

/// Look up a built-in dataset by id.
pub fn lookup(id: &str) -> Result<ReferenceDataset> {
    Registry::builtin().get(id).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_sizes() {
        let reg = registry();
        let lens: Vec<(&str, usize)> = reg.iter().map(|d| (d.id.as_str(), d.values.len())).collect();
        assert_eq!(
            lens,
            vec![
                ("martin", 20),
                ("bjornholm", 12),
                ("knight", 6),
                ("pedersen", 15),
                ("brechignac", 12),
                ("rounded-well", 14),
                ("square-well", 14),
                ("plain-ho", 7),
                ("jellium-martin", 19),
                ("jellium-bjornholm", 17),
                ("jellium-brack", 22),
                ("jellium-bulgac", 18),
                ("woods-saxon", 21),
                ("pseudo-3nl", 17),
            ]
        );
        assert_eq!(reg.iter().map(|d| d.values.len()).sum::<usize>(), 214);
        let sigmas: usize = reg.iter().flat_map(|d| &d.values).filter(|p| p.sigma.is_some()).count();
        assert_eq!(sigmas, 14);
        let weak: usize = reg.iter().flat_map(|d| &d.values).filter(|p| p.weak).count();
        assert_eq!(weak, 5);
    }

    #[test]
    fn knight_lookup() {
        assert_eq!(lookup("knight").unwrap().magic().values(), &[2, 8, 20, 40, 58, 92]);
    }

    #[test]
    fn martin_sigma() {
        let m = lookup("martin").unwrap();
        assert_eq!(m.sigma_of(198), Some(2));
        assert_eq!(m.sigma_of(138), None);
        assert_eq!(m.sigma_of(1430), Some(20));
        let values = m.magic();
        assert_eq!(values.values().first(), Some(&2));
        assert_eq!(values.uncertainty(values.values().iter().position(|&v| v == 700).unwrap()), 15);
    }

    #[test]
    fn bjornholm_as_printed() {
        let b = lookup("bjornholm").unwrap();
        let with_sigma: Vec<(u32, u32)> = b.values.iter().filter_map(|p| p.sigma.map(|s| (p.n, s))).collect();
        assert_eq!(with_sigma, vec![(260, 4), (344, 4), (440, 2), (558, 8)]);
    }

    #[test]
    fn jellium_martin_weak_entries() {
        let j = lookup("jellium-martin").unwrap();
        let weak: Vec<u32> = j.values.iter().filter(|p| p.weak).map(|p| p.n).collect();
        assert_eq!(weak, vec![20, 40, 196, 268, 356]);
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(lookup("foo"), Err(Error::NotFound(_))));
    }

    #[test]
    fn experiments_are_the_five() {
        assert_eq!(experiment_ids(), vec!["martin", "bjornholm", "knight", "pedersen", "brechignac"]);
    }

    #[test]
    fn all_valid_and_unique() {
        let reg = registry();
        let ids: HashSet<_> = reg.iter().map(|d| &d.id).collect();
        assert_eq!(ids.len(), reg.len());
        for d in &reg {
            d.validate().unwrap();
            assert!(d.values.iter().all(|p| p.n >= 1 && p.n <= MAX_ENTRY));
        }
    }

    #[test]
    fn parse_single_and_reject_bad() {
        let one = r#"{"id":"mine","kind":"experiment","source":"lab book","values":[{"n":2},{"n":8,"sigma":1},{"n":20,"weak":true}]}"#;
        let sets = parse_datasets(one).unwrap();
        assert_eq!(sets[0].values[1].sigma, Some(1));
        assert!(sets[0].values[2].weak);

        let unsorted = r#"{"id":"x","kind":"model","source":"s","values":[{"n":8},{"n":2}]}"#;
        assert!(parse_datasets(unsorted).is_err());
        let too_big = r#"{"id":"x","kind":"model","source":"s","values":[{"n":2000}]}"#;
        assert!(parse_datasets(too_big).is_err());
        let bad_kind = r#"{"id":"x","kind":"guess","source":"s","values":[{"n":2}]}"#;
        assert!(parse_datasets(bad_kind).is_err());
    }

    #[test]
    fn registry_extension_rejects_duplicates() {
        let mut reg = Registry::builtin();
        let dup = parse_datasets(r#"{"id":"knight","kind":"model","source":"s","values":[{"n":2}]}"#).unwrap();
        assert!(reg.extend(dup).is_err());
        let new = parse_datasets(r#"{"id":"new","kind":"model","source":"s","values":[{"n":2}]}"#).unwrap();
        reg.extend(new).unwrap();
        assert!(reg.get("new").is_ok());
    }

    #[test]
    fn load_from_dir() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("a.json"),
            r#"[{"id":"a1","kind":"experiment","source":"s","values":[{"n":2}]}]"#,
        )
        .unwrap();
        fs::write(dir.path().join("ignored.txt"), "not json").unwrap();
        let mut reg = Registry::builtin();
        reg.extend_from_dir(dir.path()).unwrap();
        assert!(reg.get("a1").unwrap().is_experiment());
    }
}
