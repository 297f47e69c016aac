use std::fmt::Write as _;

use netlines_core::multiclass::{train_ensemble_traced, train_ton_traced, train_wta_traced};
use netlines_core::netlines::GrowthTrace;
use netlines_core::{train_netlines, ClassId, Dataset, GrowthConfig};

use crate::error::{CliError, CliResult};
use crate::model::{BinaryModel, Classifier, ModelFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Binary for two classes, a voting ensemble of chains otherwise.
    #[default]
    Auto,
    Binary,
    Wta,
    Ton,
    TonEnsemble,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainOptions {
    pub growth: GrowthConfig,
    pub mode: Mode,
    /// Number of chains of an ensemble; `None` lets the library choose.
    pub ensemble: Option<usize>,
    /// Class (by name) that maps to +1 in binary mode. Defaults to the
    /// larger of two class ids; required with more than two classes.
    pub positive: Option<String>,
}

impl TrainOptions {
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut o = self.clone();
        o.growth.trainer.seed = seed;
        o
    }
}

/// Growth record of one trained network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLog {
    pub label: String,
    pub hidden: usize,
    pub trace: GrowthTrace,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub networks: Vec<NetworkLog>,
}

impl TrainLog {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for n in &self.networks {
            let t = &n.trace;
            let errors: Vec<String> = t.stage_errors.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "{}: H = {}", n.label, n.hidden);
            let _ = writeln!(s, "  stage errors: {}", errors.join(" "));
            let _ = writeln!(s, "  constructed steps: {}", t.fallback_steps.len());
            let _ = writeln!(
                s,
                "  weight updates: {} (kept units only: {})",
                t.weight_updates, t.weight_updates_kept
            );
            if t.stalled {
                let _ = writeln!(s, "  growth stalled with {} training errors", t.stage_errors.last().unwrap_or(&0));
            }
        }
        s
    }
}

fn class_label(data: &Dataset, id: ClassId) -> String {
    data.class_name(id).map_or_else(|| id.to_string(), str::to_owned)
}

fn resolve_positive(data: &Dataset, opts: &TrainOptions) -> CliResult<(ClassId, Option<ClassId>)> {
    let classes = data.classes();
    let positive = match &opts.positive {
        Some(name) => data
            .class_id(name)
            .filter(|c| classes.contains(c))
            .ok_or_else(|| CliError::Usage(format!("no class named {name:?} in the data")))?,
        None if classes.len() == 2 => classes[1],
        None => {
            return Err(CliError::Usage(
                "binary training with more than two classes needs --positive".into(),
            ))
        }
    };
    let negative = match classes.as_slice() {
        [a, b] => Some(if *a == positive { *b } else { *a }),
        _ => None,
    };
    Ok((positive, negative))
}

/// Trains the classifier selected by `opts` on `data`.
pub fn fit(data: &Dataset, opts: &TrainOptions) -> CliResult<(ModelFile, TrainLog)> {
    let classes = data.classes();
    if classes.len() < 2 {
        return Err(CliError::Usage(format!(
            "training data needs at least two classes, found {}",
            classes.len()
        )));
    }
    let mode = match opts.mode {
        Mode::Auto if opts.positive.is_some() || classes.len() == 2 => Mode::Binary,
        Mode::Auto => Mode::TonEnsemble,
        m => m,
    };
    let cfg = &opts.growth;
    let mut log = TrainLog::default();
    let chain_logs = |log: &mut TrainLog, prefix: &str, seq: &[ClassId], traces: Vec<GrowthTrace>, hidden: Vec<usize>| {
        for (i, (trace, h)) in traces.into_iter().zip(hidden).enumerate() {
            log.networks.push(NetworkLog {
                label: format!("{prefix}stage {} ({} vs rest)", i + 1, class_label(data, seq[i])),
                hidden: h,
                trace,
            });
        }
    };
    let classifier = match mode {
        Mode::Binary => {
            let (positive, negative) = resolve_positive(data, opts)?;
            let g = train_netlines(&data.binary(positive), cfg)?;
            log.networks.push(NetworkLog {
                label: format!("{} vs rest", class_label(data, positive)),
                hidden: g.network.hidden_count(),
                trace: g.trace,
            });
            Classifier::Binary(BinaryModel {
                network: g.network,
                positive,
                negative,
            })
        }
        Mode::Ton => {
            let (ton, traces) = train_ton_traced(data, &classes, cfg)?;
            let hidden = ton.chain().iter().map(|n| n.hidden_count()).collect();
            chain_logs(&mut log, "", ton.sequence(), traces, hidden);
            Classifier::Ton(ton)
        }
        Mode::TonEnsemble => {
            let (ens, traces) = train_ensemble_traced(data, opts.ensemble, cfg)?;
            for (k, (ton, tr)) in ens.tons().iter().zip(traces).enumerate() {
                let hidden = ton.chain().iter().map(|n| n.hidden_count()).collect();
                chain_logs(&mut log, &format!("chain {} ", k + 1), ton.sequence(), tr, hidden);
            }
            Classifier::Ensemble(ens)
        }
        Mode::Wta => {
            let (wta, traces) = train_wta_traced(data, cfg)?;
            for ((net, trace), &c) in wta.networks().iter().zip(traces).zip(wta.classes()) {
                log.networks.push(NetworkLog {
                    label: format!("{} vs rest", class_label(data, c)),
                    hidden: net.hidden_count(),
                    trace,
                });
            }
            Classifier::Wta(wta)
        }
        Mode::Auto => unreachable!("resolved above"),
    };
    let model = ModelFile {
        inputs: data.dim(),
        classes: data.class_names().to_vec(),
        classifier,
    };
    Ok((model, log))
}

/// Fraction of `data` (already aligned to the model's ids) that the model
/// gets wrong.
pub fn error_rate(model: &ModelFile, data: &Dataset) -> CliResult<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut wrong = 0usize;
    for p in data.patterns() {
        if !model.is_correct(model.predict(&p.features)?, p.label) {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / data.len() as f64)
}
