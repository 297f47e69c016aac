//! Per-feature standardization and the inverse map on trained weights.
//!
//! Training happens on `(x_i - mean_i) / dev_i`; the weights are then mapped
//! back so the unit applies directly to inputs in user units with the same
//! decisions, renormalized to `sqrt(N+1)`.

use crate::data::BinarySet;
use crate::error::{Error, Result};
use crate::linalg::norm;

#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    means: Vec<f64>,
    deviations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TolerantFit {
    pub standardizer: Standardizer,
    /// Indices of constant features.
    pub constant: Vec<usize>,
}

impl Standardizer {
    /// Builds a standardizer from explicit statistics. Every deviation must
    /// be strictly positive.
    pub fn new(means: Vec<f64>, deviations: Vec<f64>) -> Result<Self> {
        if means.len() != deviations.len() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                found: deviations.len(),
            });
        }
        if let Some(i) = deviations.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::ConstantFeature(i));
        }
        Ok(Self { means, deviations })
    }

    /// Means 0 and deviations 1.
    pub fn identity(dim: usize) -> Self {
        Self {
            means: vec![0.0; dim],
            deviations: vec![1.0; dim],
        }
    }

    /// Population mean and deviation (divisor P) of every feature, computed
    /// in one left-to-right pass (Welford).
    pub fn fit(set: &BinarySet) -> Result<Self> {
        let fitted = Self::fit_tolerant(set)?;
        match fitted.constant.first() {
            Some(&i) => Err(Error::ConstantFeature(i)),
            None => Ok(fitted.standardizer),
        }
    }

    /// Like [`Standardizer::fit`], but a constant feature keeps deviation 1
    /// (it is only centred) and is listed instead of rejected.
    pub fn fit_tolerant(set: &BinarySet) -> Result<TolerantFit> {
        let p = set.len();
        if p < 2 {
            return Err(Error::EmptyDataset {
                needed: 2,
                found: p,
            });
        }
        let n = set.dim();
        let mut mean = vec![0.0; n];
        let mut m2 = vec![0.0; n];
        for mu in 0..p {
            let count = (mu + 1) as f64;
            for (i, &x) in set.features(mu).iter().enumerate() {
                let delta = x - mean[i];
                mean[i] += delta / count;
                m2[i] += delta * (x - mean[i]);
            }
        }
        let mut deviations: Vec<f64> = m2.iter().map(|s| (s / p as f64).sqrt()).collect();
        let mut constant = Vec::new();
        for (i, d) in deviations.iter_mut().enumerate() {
            // relative floor: rounding noise of a constant column is not spread
            if !(*d > 1e-12 * mean[i].abs().max(1.0)) {
                constant.push(i);
                *d = 1.0;
            }
        }
        Ok(TolerantFit {
            standardizer: Self {
                means: mean,
                deviations,
            },
            constant,
        })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn deviations(&self) -> &[f64] {
        &self.deviations
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    /// Standardized copy of a raw feature vector.
    pub fn transform(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(features.len())?;
        Ok(features
            .iter()
            .zip(&self.means)
            .zip(&self.deviations)
            .map(|((x, m), d)| (x - m) / d)
            .collect())
    }

    /// Standardizes every feature of `set`; targets and the bias input are
    /// left as they are.
    pub fn standardize(&self, set: &BinarySet) -> Result<BinarySet> {
        self.check_dim(set.dim())?;
        let rows: Vec<Vec<f64>> = (0..set.len())
            .map(|mu| self.transform(set.features(mu)))
            .collect::<Result<_>>()?;
        BinarySet::from_features(set.dim(), &rows, set.targets().to_vec())
    }

    /// Maps weights trained on standardized inputs to user units and
    /// renormalizes them to `sqrt(N+1)`.
    pub fn unstandardize_weights(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(w.len().saturating_sub(1))?;
        let mut out = Vec::with_capacity(w.len());
        let shift: f64 = w[1..]
            .iter()
            .zip(&self.means)
            .zip(&self.deviations)
            .map(|((wi, m), d)| wi * m / d)
            .sum();
        out.push(w[0] - shift);
        out.extend(w[1..].iter().zip(&self.deviations).map(|(wi, d)| wi / d));
        let len = norm(&out);
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::DegenerateWeights);
        }
        let scale = (w.len() as f64).sqrt() / len;
        out.iter_mut().for_each(|x| *x *= scale);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, sign};

    fn column(xs: &[f64]) -> BinarySet {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        BinarySet::from_features(1, &rows, vec![1; xs.len()]).unwrap()
    }

    #[test]
    fn fit_uses_population_variance() {
        let s = Standardizer::fit(&column(&[1.0, 2.0, 3.0])).unwrap();
        assert!((s.means()[0] - 2.0).abs() < 1e-12);
        assert!((s.deviations()[0] - 0.8165).abs() < 1e-4);
        let z = s.standardize(&column(&[1.0, 2.0, 3.0])).unwrap();
        let got: Vec<f64> = (0..3).map(|mu| z.features(mu)[0]).collect();
        for (g, e) in got.iter().zip([-1.2247, 0.0, 1.2247]) {
            assert!((g - e).abs() < 1e-4);
        }
        assert_eq!(z.input(0)[0], 1.0);
    }

    #[test]
    fn constant_and_tiny_sets_are_rejected() {
        assert_eq!(
            Standardizer::fit(&column(&[5.0, 5.0, 5.0])),
            Err(Error::ConstantFeature(0))
        );
        assert!(matches!(
            Standardizer::fit(&column(&[1.0])),
            Err(Error::EmptyDataset { .. })
        ));
    }

    #[test]
    fn already_standard_column_is_a_fixed_point() {
        let s = Standardizer::fit(&column(&[-1.0, 1.0, -1.0, 1.0])).unwrap();
        assert!(s.means()[0].abs() < 1e-12);
        assert!((s.deviations()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unstandardize_hand_example() {
        let s = Standardizer::new(vec![2.0], vec![0.5]).unwrap();
        let w = s.unstandardize_weights(&[0.0, 1.0]).unwrap();
        assert!((w[0] + 1.2649).abs() < 1e-4);
        assert!((w[1] - 0.6325).abs() < 1e-4);
    }

    #[test]
    fn identity_standardizer_only_renormalizes() {
        let s = Standardizer::identity(2);
        let w = [0.3, -1.2, 2.0];
        let out = s.unstandardize_weights(&w).unwrap();
        let k = 3f64.sqrt() / norm(&w);
        for (o, x) in out.iter().zip(w) {
            assert!((o - k * x).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_weights_are_rejected() {
        let s = Standardizer::identity(2);
        assert_eq!(
            s.unstandardize_weights(&[0.0, 0.0, 0.0]),
            Err(Error::DegenerateWeights)
        );
    }

    #[test]
    fn decisions_survive_the_inverse_map() {
        let s = Standardizer::new(vec![1.5, -3.0], vec![0.7, 2.5]).unwrap();
        let w = [0.4, -0.9, 1.3];
        let user = s.unstandardize_weights(&w).unwrap();
        for x in [[0.0, 0.0], [3.0, -1.0], [-2.0, 5.0], [1.4, -2.9]] {
            let z = s.transform(&x).unwrap();
            let a = sign(dot(&w, &[1.0, z[0], z[1]]));
            let b = sign(dot(&user, &[1.0, x[0], x[1]]));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let s = Standardizer::identity(2);
        assert!(matches!(
            s.transform(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(s.unstandardize_weights(&[1.0, 2.0]).is_err());
    }
}
