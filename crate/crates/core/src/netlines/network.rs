use crate::data::augment;
use crate::error::{Error, Result};
use crate::linalg::{dot, sign};
use crate::minimerror::PerceptronWeights;
use crate::standardize::Standardizer;

/// Hidden-layer states `(1, sigma_1, ..., sigma_H)` of one input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InternalRepresentation(Vec<i8>);

impl InternalRepresentation {
    pub fn states(&self) -> &[i8] {
        &self.0
    }

    /// Hidden units only, without the constant component.
    pub fn hidden(&self) -> &[i8] {
        &self.0[1..]
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| s as f64).collect()
    }
}

/// One hidden layer of threshold units feeding a threshold output.
///
/// Hidden weights are stored in user units: they apply to raw inputs. The
/// standardizer that was used while training them is kept for reference.
#[derive(Debug, Clone, PartialEq)]
pub struct NetLinesNetwork {
    input_dim: usize,
    hidden: Vec<PerceptronWeights>,
    output: Vec<f64>,
    ls_flag: bool,
    standardizer: Standardizer,
}

impl NetLinesNetwork {
    pub fn new(
        input_dim: usize,
        hidden: Vec<PerceptronWeights>,
        output: Vec<f64>,
        ls_flag: bool,
        standardizer: Standardizer,
    ) -> Result<Self> {
        if hidden.is_empty() {
            return Err(Error::InvalidConfig("network needs a hidden unit".into()));
        }
        for w in &hidden {
            if w.as_slice().len() != input_dim + 1 {
                return Err(Error::DimensionMismatch {
                    expected: input_dim + 1,
                    found: w.as_slice().len(),
                });
            }
        }
        if output.len() != hidden.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: hidden.len() + 1,
                found: output.len(),
            });
        }
        if standardizer.dim() != input_dim {
            return Err(Error::DimensionMismatch {
                expected: input_dim,
                found: standardizer.dim(),
            });
        }
        if ls_flag && hidden.len() != 1 {
            return Err(Error::InvalidConfig(
                "a linearly separable network has exactly one unit".into(),
            ));
        }
        Ok(Self {
            input_dim,
            hidden,
            output,
            ls_flag,
            standardizer,
        })
    }

    /// Bare first unit; the output copies its state.
    pub fn single_unit(unit: PerceptronWeights, ls_flag: bool, standardizer: Standardizer) -> Result<Self> {
        let n = unit.dim();
        Self::new(n, vec![unit], identity_output(), ls_flag, standardizer)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> &[PerceptronWeights] {
        &self.hidden
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden.len()
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn ls_flag(&self) -> bool {
        self.ls_flag
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    /// `H (N+1) + (H+1)`.
    pub fn weight_count(&self) -> usize {
        self.hidden.len() * (self.input_dim + 1) + self.hidden.len() + 1
    }

    fn check(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: features.len(),
            });
        }
        Ok(())
    }

    pub fn compute_ir(&self, features: &[f64]) -> Result<InternalRepresentation> {
        self.check(features)?;
        Ok(InternalRepresentation(self.ir_states(&augment(features))))
    }

    /// Hidden states for an already augmented input (no dimension check).
    pub(crate) fn ir_states(&self, input: &[f64]) -> Vec<i8> {
        let mut s = Vec::with_capacity(self.hidden.len() + 1);
        s.push(1);
        s.extend(self.hidden.iter().map(|w| sign(w.field(input))));
        s
    }

    /// Output weighted sum `W . sigma`.
    pub fn output_sum(&self, features: &[f64]) -> Result<f64> {
        self.check(features)?;
        Ok(self.sum_augmented(&augment(features)))
    }

    pub(crate) fn sum_augmented(&self, input: &[f64]) -> f64 {
        let ir: Vec<f64> = self.ir_states(input).iter().map(|&s| s as f64).collect();
        dot(&self.output, &ir)
    }

    pub fn forward(&self, features: &[f64]) -> Result<i8> {
        self.check(features)?;
        Ok(self.forward_augmented(&augment(features)))
    }

    pub(crate) fn forward_augmented(&self, input: &[f64]) -> i8 {
        if self.ls_flag {
            sign(self.hidden[0].field(input))
        } else {
            sign(self.sum_augmented(input))
        }
    }

    /// Weighted sums of every hidden unit, for confidence reporting.
    pub fn hidden_fields(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.check(features)?;
        let x = augment(features);
        Ok(self.hidden.iter().map(|w| w.field(&x)).collect())
    }
}

/// `(0, sqrt 2)`: output equal to the first hidden state, normalized.
pub(crate) fn identity_output() -> Vec<f64> {
    vec![0.0, 2f64.sqrt()]
}
