use crate::data::BinarySet;
use crate::error::{Error, Result};
use crate::linalg::sign;
use crate::rng::derive_seed;
use crate::minimerror::{train_perceptron, train_perceptron_from, MinimerrorConfig, PerceptronWeights};
use crate::standardize::Standardizer;

use super::appendix::{fallback_step_within, FallbackStep};
use super::network::NetLinesNetwork;

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthConfig {
    /// Maximum number of hidden units; `None` means P.
    pub hmax: Option<usize>,
    /// Tolerated training errors.
    pub emax: usize,
    pub trainer: MinimerrorConfig,
    pub fallback: bool,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self {
            hmax: None,
            emax: 0,
            trainer: MinimerrorConfig::default(),
            fallback: true,
        }
    }
}

impl GrowthConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.trainer.seed = seed;
        self
    }
}

/// What happened while growing a network.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GrowthTrace {
    /// Training errors of the bare first unit, then after every output
    /// retraining (or constructed step).
    pub stage_errors: Vec<usize>,
    pub fallback_steps: Vec<FallbackStep>,
    /// Weight updates of every trained unit, dropped outputs and discarded
    /// hidden units included.
    pub weight_updates: u64,
    /// Weight updates of the units present in the final network.
    pub weight_updates_kept: u64,
    /// Growth stopped early because neither trained units nor constructed
    /// steps lowered the error any more; the network keeps residual errors.
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Growth {
    pub network: NetLinesNetwork,
    pub trace: GrowthTrace,
}

impl Growth {
    pub fn training_errors(&self) -> usize {
        *self.trace.stage_errors.last().expect("at least one stage")
    }
}

/// Grows a network on `set` (user units).
///
/// Hidden units train on standardized inputs with targets that say whether
/// the previous stage got each pattern right; the output unit trains on the
/// raw ±1 IRs. Stops once the training error reaches `emax` or the network
/// has `hmax` hidden units.
pub fn train_netlines(set: &BinarySet, cfg: &GrowthConfig) -> Result<Growth> {
    let p = set.len();
    if p == 0 {
        return Err(Error::EmptyDataset { needed: 1, found: 0 });
    }
    if cfg.emax == 0 {
        if let Some((first, second)) = set.conflicting_duplicates() {
            return Err(Error::ConflictingDuplicates { first, second });
        }
    }
    let hmax = cfg.hmax.unwrap_or(p);
    if hmax == 0 {
        return Err(Error::InvalidConfig("hmax must be at least 1".into()));
    }
    let n = set.dim();
    let standardizer = if p >= 2 {
        Standardizer::fit_tolerant(set)?.standardizer
    } else {
        Standardizer::identity(n)
    };
    let scaled = standardizer.standardize(set)?;
    let targets = set.targets().to_vec();
    let base = cfg.trainer.seed;
    let mut trace = GrowthTrace::default();

    let train_hidden = |stage_targets: Vec<i8>, h: usize| -> Result<(PerceptronWeights, u64)> {
        let staged = scaled.relabeled(stage_targets)?;
        let trainer = cfg.trainer.clone().with_seed(derive_seed(base, h as u64));
        let rep = train_perceptron(&staged, &trainer)?;
        let user = standardizer.unstandardize_weights(rep.weights.as_slice())?;
        Ok((PerceptronWeights::new(user), (rep.epochs_run * (n + 1)) as u64))
    };

    // First unit learns the original targets.
    let (first, updates) = train_hidden(targets.clone(), 0)?;
    trace.weight_updates += updates;
    let mut hidden_updates = vec![updates];
    let states: Vec<i8> = set.iter().map(|(x, _)| sign(first.field(x))).collect();
    let e1 = states.iter().zip(&targets).filter(|(s, t)| s != t).count();
    trace.stage_errors.push(e1);
    let mut net = NetLinesNetwork::single_unit(first, e1 == 0, standardizer.clone())?;
    let mut output_updates = 0u64;
    if e1 <= cfg.emax || hmax == 1 {
        trace.weight_updates_kept = updates;
        return Ok(Growth { network: net, trace });
    }

    // IR rows (1, sigma_1, ..., sigma_h) of the training patterns.
    let mut irs: Vec<Vec<f64>> = states.iter().map(|&s| vec![1.0, s as f64]).collect();
    let mut stage_targets: Vec<i8> = states.iter().zip(&targets).map(|(s, t)| s * t).collect();
    let mut best = e1;
    let mut stalled = 0;

    while net.hidden_count() < hmax {
        let h = net.hidden_count();
        let (unit, updates) = train_hidden(stage_targets.clone(), h)?;
        trace.weight_updates += updates;

        let mut cand_irs = irs.clone();
        for (row, (x, _)) in cand_irs.iter_mut().zip(set.iter()) {
            row.push(sign(unit.field(x)) as f64);
        }
        let ir_set = BinarySet::from_augmented(&cand_irs, targets.clone())?;
        let trainer = cfg.trainer.clone().with_seed(derive_seed(base, 1_000_000 + h as u64));
        // Start from the current output with a zero weight on the new unit,
        // so retraining never loses ground.
        let mut start = net.output().to_vec();
        start.push(0.0);
        let rep = train_perceptron_from(&ir_set, &trainer, &start)?;
        let out_updates = (rep.epochs_run * (h + 2)) as u64;
        trace.weight_updates += out_updates;

        let mut hidden = net.hidden().to_vec();
        hidden.push(unit);
        let candidate = NetLinesNetwork::new(
            n,
            hidden,
            rep.weights.into_vec(),
            false,
            standardizer.clone(),
        )?;
        let e = errors_of(&candidate, set);

        let accepted_step = if e < best {
            None
        } else if cfg.fallback {
            fallback_step_within(&net, set, hmax - h).ok()
        } else {
            None
        };

        let e = match accepted_step {
            Some((grown, step)) => {
                hidden_updates.resize(grown.hidden_count(), 0);
                net = grown;
                output_updates = 0;
                trace.fallback_steps.push(step);
                stalled = 0;
                errors_of(&net, set)
            }
            None => {
                if e < best {
                    stalled = 0;
                } else {
                    stalled += 1;
                }
                net = candidate;
                hidden_updates.push(updates);
                output_updates = out_updates;
                e
            }
        };
        best = best.min(e);
        trace.stage_errors.push(e);
        if e <= cfg.emax {
            break;
        }
        if stalled >= 2 && net.hidden_count() < hmax {
            if !cfg.fallback {
                return Err(Error::FallbackExhausted {
                    errors: e,
                    hidden: net.hidden_count(),
                });
            }
            trace.stalled = true;
            break;
        }

        irs = set
            .iter()
            .map(|(x, _)| net.ir_states(x).iter().map(|&s| s as f64).collect())
            .collect();
        stage_targets = set
            .iter()
            .map(|(x, t)| net.forward_augmented(x) * t)
            .collect();
    }

    trace.weight_updates_kept = hidden_updates.iter().sum::<u64>() + output_updates;
    Ok(Growth { network: net, trace })
}

fn errors_of(net: &NetLinesNetwork, set: &BinarySet) -> usize {
    set.iter()
        .filter(|(x, t)| net.forward_augmented(x) != *t)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm_set(rows: &[[f64; 2]], targets: &[i8]) -> BinarySet {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        BinarySet::from_features(2, &rows, targets.to_vec()).unwrap()
    }

    const CORNERS: [[f64; 2]; 4] = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];

    #[test]
    fn and_is_linearly_separable() {
        let set = pm_set(&CORNERS, &[1, -1, -1, -1]);
        let g = train_netlines(&set, &GrowthConfig::default()).unwrap();
        assert!(g.network.ls_flag());
        assert_eq!(g.network.hidden_count(), 1);
        assert_eq!(g.training_errors(), 0);
    }

    #[test]
    fn xor_needs_two_units() {
        let set = pm_set(&CORNERS, &[-1, 1, 1, -1]);
        let g = train_netlines(&set, &GrowthConfig::default()).unwrap();
        assert_eq!(g.network.hidden_count(), 2);
        assert_eq!(g.training_errors(), 0);
        for (x, t) in CORNERS.iter().zip([-1, 1, 1, -1]) {
            assert_eq!(g.network.forward(x).unwrap(), t);
        }
    }

    #[test]
    fn conflicting_duplicates_rejected_when_emax_is_zero() {
        let set = pm_set(&[[1.0, 1.0], [1.0, 1.0], [0.0, 1.0]], &[1, -1, 1]);
        assert!(matches!(
            train_netlines(&set, &GrowthConfig::default()),
            Err(Error::ConflictingDuplicates { .. })
        ));
        let tolerant = GrowthConfig {
            emax: 1,
            ..Default::default()
        };
        assert!(train_netlines(&set, &tolerant).is_ok());
    }

    #[test]
    fn hmax_caps_growth() {
        // alternating labels on a line need five cuts
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let set = BinarySet::from_features(1, &rows, vec![1, -1, 1, -1, 1, -1]).unwrap();
        let cfg = GrowthConfig {
            hmax: Some(2),
            ..Default::default()
        };
        let g = train_netlines(&set, &cfg).unwrap();
        assert_eq!(g.network.hidden_count(), 2);
        assert!(g.training_errors() > 0);
        assert_eq!(g.trace.stage_errors.len(), 2);
    }
}
