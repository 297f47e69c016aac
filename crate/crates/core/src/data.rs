//! Pattern containers.
//!
//! [`Dataset`] holds raw feature vectors with integer class ids and is what the
//! loaders and generators produce. [`BinarySet`] is the training view used by
//! the perceptron and growth code: every input is stored in augmented form
//! (component 0 is the constant 1 carrying the bias) next to a ±1 target.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type ClassId = i64;

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub features: Vec<f64>,
    pub label: ClassId,
}

impl Pattern {
    pub fn new(features: Vec<f64>, label: ClassId) -> Self {
        Self { features, label }
    }

    /// `(1, x1, ..., xN)`.
    pub fn augmented(&self) -> Vec<f64> {
        augment(&self.features)
    }
}

pub fn augment(features: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(features.len() + 1);
    v.push(1.0);
    v.extend_from_slice(features);
    v
}

/// Multi-class pattern collection with a fixed feature count.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    patterns: Vec<Pattern>,
    class_names: Vec<(ClassId, String)>,
}

impl Dataset {
    /// Builds a dataset, checking that every pattern has the same arity.
    /// Class names default to the decimal form of the id.
    pub fn new(patterns: Vec<Pattern>) -> Result<Self> {
        let dim = patterns.first().map_or(0, |p| p.features.len());
        for p in &patterns {
            if p.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.features.len(),
                });
            }
        }
        let mut ids: Vec<ClassId> = patterns.iter().map(|p| p.label).collect();
        ids.sort_unstable();
        ids.dedup();
        let class_names = ids.into_iter().map(|c| (c, c.to_string())).collect();
        Ok(Self {
            dim,
            patterns,
            class_names,
        })
    }

    /// Dataset with class ids -1 and +1 taken from the targets.
    pub fn from_binary(set: &BinarySet) -> Self {
        let patterns = (0..set.len())
            .map(|mu| Pattern::new(set.features(mu).to_vec(), set.target(mu) as ClassId))
            .collect();
        let mut ds = Self::new(patterns).expect("binary set has a fixed arity");
        ds.dim = set.dim();
        ds
    }

    pub fn with_class_names(mut self, names: Vec<(ClassId, String)>) -> Self {
        let mut names = names;
        names.sort_by_key(|(id, _)| *id);
        self.class_names = names;
        self
    }

    pub fn from_parts(features: Vec<Vec<f64>>, labels: Vec<ClassId>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                found: labels.len(),
            });
        }
        Self::new(
            features
                .into_iter()
                .zip(labels)
                .map(|(f, l)| Pattern::new(f, l))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn class_names(&self) -> &[(ClassId, String)] {
        &self.class_names
    }

    pub fn class_name(&self, id: ClassId) -> Option<&str> {
        self.class_names
            .iter()
            .find(|(c, _)| *c == id)
            .map(|(_, n)| n.as_str())
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.class_names
            .iter()
            .find(|(_, n)| n == name)
            .map(|(c, _)| *c)
    }

    /// Distinct class ids present in the patterns, ascending.
    pub fn classes(&self) -> Vec<ClassId> {
        let mut ids: Vec<ClassId> = self.patterns.iter().map(|p| p.label).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn class_count(&self, id: ClassId) -> usize {
        self.patterns.iter().filter(|p| p.label == id).count()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            dim: self.dim,
            patterns: indices.iter().map(|&i| self.patterns[i].clone()).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// Patterns whose class is not in `excluded`, order preserved.
    pub fn without_classes(&self, excluded: &[ClassId]) -> Self {
        Self {
            dim: self.dim,
            patterns: self
                .patterns
                .iter()
                .filter(|p| !excluded.contains(&p.label))
                .cloned()
                .collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// One-vs-rest view: `positive` maps to +1, every other class to -1.
    pub fn binary(&self, positive: ClassId) -> BinarySet {
        let targets = self
            .patterns
            .iter()
            .map(|p| if p.label == positive { 1 } else { -1 })
            .collect();
        let rows: Vec<Vec<f64>> = self.patterns.iter().map(|p| p.features.clone()).collect();
        BinarySet::from_features(self.dim, &rows, targets)
            .expect("dataset arity is checked at construction")
    }
}

/// Training view: augmented inputs and ±1 targets.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySet {
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<i8>,
}

impl BinarySet {
    /// `rows` are raw feature vectors of length `dim`; the constant input is
    /// prepended here.
    pub fn from_features(dim: usize, rows: &[Vec<f64>], targets: Vec<i8>) -> Result<Self> {
        let mut inputs = Vec::with_capacity(rows.len() * (dim + 1));
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            inputs.push(1.0);
            inputs.extend_from_slice(r);
        }
        Self::checked(dim, inputs, targets)
    }

    /// `rows` are already augmented (component 0 must be 1).
    pub fn from_augmented(rows: &[Vec<f64>], targets: Vec<i8>) -> Result<Self> {
        let width = rows.first().map_or(1, |r| r.len());
        if width == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut inputs = Vec::with_capacity(rows.len() * width);
        for r in rows {
            if r.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    found: r.len(),
                });
            }
            if r[0] != 1.0 {
                return Err(Error::InvalidConfig(
                    "augmented input must start with the constant 1".into(),
                ));
            }
            inputs.extend_from_slice(r);
        }
        Self::checked(width - 1, inputs, targets)
    }

    fn checked(dim: usize, inputs: Vec<f64>, targets: Vec<i8>) -> Result<Self> {
        let p = inputs.len() / (dim + 1);
        if targets.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: targets.len(),
            });
        }
        if let Some(&t) = targets.iter().find(|&&t| t != 1 && t != -1) {
            return Err(Error::InvalidTarget(t as i64));
        }
        Ok(Self {
            dim,
            inputs,
            targets,
        })
    }

    /// Number of raw features N (inputs have N+1 components).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn input(&self, mu: usize) -> &[f64] {
        let w = self.dim + 1;
        &self.inputs[mu * w..(mu + 1) * w]
    }

    #[inline]
    pub fn features(&self, mu: usize) -> &[f64] {
        &self.input(mu)[1..]
    }

    #[inline]
    pub fn target(&self, mu: usize) -> i8 {
        self.targets[mu]
    }

    pub fn targets(&self) -> &[i8] {
        &self.targets
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], i8)> + '_ {
        self.inputs
            .chunks_exact(self.dim + 1)
            .zip(self.targets.iter().copied())
    }

    /// Same inputs, new targets.
    pub fn relabeled(&self, targets: Vec<i8>) -> Result<Self> {
        Self::checked(self.dim, self.inputs.clone(), targets)
    }

    /// First pair of patterns with bitwise-identical inputs but opposite
    /// targets, if any.
    pub fn conflicting_duplicates(&self) -> Option<(usize, usize)> {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(self.len());
        for mu in 0..self.len() {
            let key: Vec<u64> = self.features(mu).iter().map(|x| x.to_bits()).collect();
            match seen.get(&key) {
                Some(&first) if self.targets[first] != self.targets[mu] => {
                    return Some((first, mu))
                }
                Some(_) => {}
                None => {
                    seen.insert(key, mu);
                }
            }
        }
        None
    }
}
