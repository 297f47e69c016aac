//! More than two classes: one-vs-rest winner-takes-all, chains of networks
//! (TONs), and plurality voting over an odd number of chains.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{ClassId, Dataset};
use crate::error::{Error, Result};
use crate::netlines::{train_netlines, GrowthConfig, GrowthTrace, NetLinesNetwork};
use crate::rng::derive_seed;

/// Chain of `C - 1` networks; network `i` answers "class `c_i`?" for the
/// patterns not claimed by earlier networks.
#[derive(Debug, Clone, PartialEq)]
pub struct Ton {
    sequence: Vec<ClassId>,
    chain: Vec<NetLinesNetwork>,
}

impl Ton {
    pub fn from_parts(sequence: Vec<ClassId>, chain: Vec<NetLinesNetwork>) -> Result<Self> {
        if sequence.len() < 2 || chain.len() + 1 != sequence.len() {
            return Err(Error::InvalidConfig(format!(
                "a chain over {} classes needs {} networks, got {}",
                sequence.len(),
                sequence.len().saturating_sub(1),
                chain.len()
            )));
        }
        check_distinct(&sequence)?;
        check_dims(&chain)?;
        Ok(Self { sequence, chain })
    }

    pub fn sequence(&self) -> &[ClassId] {
        &self.sequence
    }

    pub fn chain(&self) -> &[NetLinesNetwork] {
        &self.chain
    }

    pub fn input_dim(&self) -> usize {
        self.chain[0].input_dim()
    }

    pub fn weight_count(&self) -> usize {
        self.chain.iter().map(NetLinesNetwork::weight_count).sum()
    }
}

fn check_distinct(classes: &[ClassId]) -> Result<()> {
    let mut sorted = classes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfig("class listed twice".into()));
    }
    Ok(())
}

fn check_dims(nets: &[NetLinesNetwork]) -> Result<()> {
    let n = nets[0].input_dim();
    match nets.iter().find(|net| net.input_dim() != n) {
        Some(net) => Err(Error::DimensionMismatch {
            expected: n,
            found: net.input_dim(),
        }),
        None => Ok(()),
    }
}

/// Trains a chain for `sequence`, which must order exactly the classes of
/// `data`. Returns the growth trace of every stage as well.
pub fn train_ton_traced(
    data: &Dataset,
    sequence: &[ClassId],
    cfg: &GrowthConfig,
) -> Result<(Ton, Vec<GrowthTrace>)> {
    if sequence.len() < 2 {
        return Err(Error::InvalidConfig("a chain needs at least two classes".into()));
    }
    check_distinct(sequence)?;
    if let Some(&c) = sequence.iter().find(|&&c| data.class_count(c) == 0) {
        return Err(Error::DegenerateClass(c));
    }
    if let Some(c) = data.classes().into_iter().find(|c| !sequence.contains(c)) {
        return Err(Error::InvalidConfig(format!(
            "class {c} is missing from the sequence"
        )));
    }
    let base = cfg.trainer.seed;
    let mut remaining = data.clone();
    let mut chain = Vec::with_capacity(sequence.len() - 1);
    let mut traces = Vec::with_capacity(sequence.len() - 1);
    for (stage, &class) in sequence[..sequence.len() - 1].iter().enumerate() {
        let stage_cfg = cfg.clone().with_seed(derive_seed(base, stage as u64));
        let growth = train_netlines(&remaining.binary(class), &stage_cfg)?;
        chain.push(growth.network);
        traces.push(growth.trace);
        remaining = remaining.without_classes(&[class]);
    }
    Ok((
        Ton {
            sequence: sequence.to_vec(),
            chain,
        },
        traces,
    ))
}

pub fn train_ton(data: &Dataset, sequence: &[ClassId], cfg: &GrowthConfig) -> Result<Ton> {
    train_ton_traced(data, sequence, cfg).map(|(ton, _)| ton)
}

/// First class in the sequence whose network says +1; the last class when
/// none does.
pub fn ton_predict(ton: &Ton, features: &[f64]) -> Result<ClassId> {
    for (net, &class) in ton.chain.iter().zip(&ton.sequence) {
        if net.forward(features)? == 1 {
            return Ok(class);
        }
    }
    Ok(*ton.sequence.last().expect("at least two classes"))
}

/// Odd committee of chains over the same classes.
#[derive(Debug, Clone, PartialEq)]
pub struct TonEnsemble {
    tons: Vec<Ton>,
}

impl TonEnsemble {
    pub fn new(tons: Vec<Ton>) -> Result<Self> {
        if tons.len().is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "a voting committee needs an odd number of chains, got {}",
                tons.len()
            )));
        }
        let classes = sorted(tons[0].sequence());
        if tons.iter().any(|t| sorted(t.sequence()) != classes) {
            return Err(Error::InvalidConfig("chains disagree on the class set".into()));
        }
        let n = tons[0].input_dim();
        if let Some(t) = tons.iter().find(|t| t.input_dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.input_dim(),
            });
        }
        Ok(Self { tons })
    }

    pub fn tons(&self) -> &[Ton] {
        &self.tons
    }

    pub fn len(&self) -> usize {
        self.tons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tons.is_empty()
    }

    pub fn weight_count(&self) -> usize {
        self.tons.iter().map(Ton::weight_count).sum()
    }
}

fn sorted(classes: &[ClassId]) -> Vec<ClassId> {
    let mut v = classes.to_vec();
    v.sort_unstable();
    v
}

/// Orders of `classes` that give different chains. Swapping the last two
/// classes only flips the sign of the final network, so each pair is
/// represented once (last two ascending). Lexicographic order.
pub fn distinct_sequences(classes: &[ClassId]) -> Vec<Vec<ClassId>> {
    let mut pool = sorted(classes);
    pool.dedup();
    let mut out = Vec::new();
    permute(&mut Vec::new(), &mut pool.clone(), &mut out);
    out.retain(|s: &Vec<ClassId>| s.len() < 2 || s[s.len() - 2] < s[s.len() - 1]);
    out
}

fn permute(prefix: &mut Vec<ClassId>, rest: &mut Vec<ClassId>, out: &mut Vec<Vec<ClassId>>) {
    if rest.is_empty() {
        out.push(prefix.clone());
        return;
    }
    for i in 0..rest.len() {
        let c = rest.remove(i);
        prefix.push(c);
        permute(prefix, rest, out);
        prefix.pop();
        rest.insert(i, c);
    }
}

const MAX_ENUMERATED_CLASSES: usize = 8;

/// `count` distinct chain orders chosen by a seeded shuffle. `None` picks
/// the largest odd number not above `min(available, 3)`.
pub fn ensemble_sequences(
    classes: &[ClassId],
    count: Option<usize>,
    seed: u64,
) -> Result<Vec<Vec<ClassId>>> {
    let classes = {
        let mut c = sorted(classes);
        c.dedup();
        c
    };
    if classes.len() < 2 {
        return Err(Error::InvalidConfig("need at least two classes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let available = if classes.len() <= MAX_ENUMERATED_CLASSES {
        Some(distinct_sequences(&classes))
    } else {
        None
    };
    let cap = available.as_ref().map_or(usize::MAX, Vec::len);
    let k = match count {
        Some(k) => {
            if k % 2 == 0 || k > cap {
                return Err(Error::InvalidConfig(format!(
                    "ensemble size {k} must be odd and at most {cap}"
                )));
            }
            k
        }
        None => {
            let k = cap.min(3);
            if k % 2 == 0 {
                k - 1
            } else {
                k
            }
        }
    };
    match available {
        Some(mut all) => {
            all.shuffle(&mut rng);
            all.truncate(k);
            Ok(all)
        }
        None => {
            let mut picked: Vec<Vec<ClassId>> = Vec::with_capacity(k);
            while picked.len() < k {
                let mut s = classes.clone();
                s.shuffle(&mut rng);
                let n = s.len();
                if s[n - 2] > s[n - 1] {
                    s.swap(n - 2, n - 1);
                }
                if !picked.contains(&s) {
                    picked.push(s);
                }
            }
            Ok(picked)
        }
    }
}

/// Trains a committee of chains; see [`ensemble_sequences`] for the orders.
pub fn train_ensemble(data: &Dataset, count: Option<usize>, cfg: &GrowthConfig) -> Result<TonEnsemble> {
    train_ensemble_traced(data, count, cfg).map(|(e, _)| e)
}

pub fn train_ensemble_traced(
    data: &Dataset,
    count: Option<usize>,
    cfg: &GrowthConfig,
) -> Result<(TonEnsemble, Vec<Vec<GrowthTrace>>)> {
    let base = cfg.trainer.seed;
    let sequences = ensemble_sequences(&data.classes(), count, derive_seed(base, u64::MAX))?;
    let mut tons = Vec::with_capacity(sequences.len());
    let mut traces = Vec::with_capacity(sequences.len());
    for (i, seq) in sequences.iter().enumerate() {
        let ton_cfg = cfg.clone().with_seed(derive_seed(base, 100 + i as u64));
        let (ton, tr) = train_ton_traced(data, seq, &ton_cfg)?;
        tons.push(ton);
        traces.push(tr);
    }
    Ok((TonEnsemble::new(tons)?, traces))
}

/// Plurality of the chains' answers; ties go to the class named by the
/// earliest chain among the tied ones.
pub fn vote_predict(ensemble: &TonEnsemble, features: &[f64]) -> Result<ClassId> {
    let votes = ensemble
        .tons
        .iter()
        .map(|t| ton_predict(t, features))
        .collect::<Result<Vec<ClassId>>>()?;
    Ok(plurality(&votes))
}

/// Most frequent entry; among equally frequent ones, the first to appear.
pub fn plurality(votes: &[ClassId]) -> ClassId {
    let mut best = votes[0];
    let mut best_count = 0;
    for &v in votes {
        let c = votes.iter().filter(|&&x| x == v).count();
        if c > best_count {
            best = v;
            best_count = c;
        }
    }
    best
}

/// One one-vs-rest network per class.
#[derive(Debug, Clone, PartialEq)]
pub struct WtaClassifier {
    classes: Vec<ClassId>,
    networks: Vec<NetLinesNetwork>,
}

impl WtaClassifier {
    pub fn from_parts(classes: Vec<ClassId>, networks: Vec<NetLinesNetwork>) -> Result<Self> {
        if classes.len() < 2 || classes.len() != networks.len() {
            return Err(Error::InvalidConfig(format!(
                "{} classes need as many networks, got {}",
                classes.len(),
                networks.len()
            )));
        }
        check_distinct(&classes)?;
        check_dims(&networks)?;
        Ok(Self { classes, networks })
    }

    pub fn classes(&self) -> &[ClassId] {
        &self.classes
    }

    pub fn networks(&self) -> &[NetLinesNetwork] {
        &self.networks
    }

    pub fn input_dim(&self) -> usize {
        self.networks[0].input_dim()
    }

    pub fn weight_count(&self) -> usize {
        self.networks.iter().map(NetLinesNetwork::weight_count).sum()
    }
}

pub fn train_wta_traced(data: &Dataset, cfg: &GrowthConfig) -> Result<(WtaClassifier, Vec<GrowthTrace>)> {
    let classes = data.classes();
    if classes.len() < 2 {
        return Err(Error::InvalidConfig("need at least two classes".into()));
    }
    let base = cfg.trainer.seed;
    let mut networks = Vec::with_capacity(classes.len());
    let mut traces = Vec::with_capacity(classes.len());
    for (i, &c) in classes.iter().enumerate() {
        let net_cfg = cfg.clone().with_seed(derive_seed(base, i as u64));
        let g = train_netlines(&data.binary(c), &net_cfg)?;
        networks.push(g.network);
        traces.push(g.trace);
    }
    Ok((WtaClassifier { classes, networks }, traces))
}

pub fn train_wta(data: &Dataset, cfg: &GrowthConfig) -> Result<WtaClassifier> {
    train_wta_traced(data, cfg).map(|(w, _)| w)
}

/// Class whose network has the largest output sum; ties go to the lowest
/// class id.
pub fn wta_predict(wta: &WtaClassifier, features: &[f64]) -> Result<ClassId> {
    let mut best: Option<(f64, ClassId)> = None;
    for (net, &class) in wta.networks.iter().zip(&wta.classes) {
        let s = net.output_sum(features)?;
        best = match best {
            Some((b, c)) if s < b || (s == b && c < class) => Some((b, c)),
            _ => Some((s, class)),
        };
    }
    Ok(best.expect("at least two classes").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimerror::PerceptronWeights;
    use crate::standardize::Standardizer;

    /// 1-D network answering `x > threshold` (or `x < threshold` if `flip`).
    fn cut(threshold: f64, flip: bool) -> NetLinesNetwork {
        let s = if flip { -1.0 } else { 1.0 };
        let w = PerceptronWeights::normalized(vec![-s * threshold, s]).unwrap();
        NetLinesNetwork::single_unit(w, true, Standardizer::identity(1)).unwrap()
    }

    fn constant(out: f64) -> NetLinesNetwork {
        let w = PerceptronWeights::normalized(vec![1.0, 0.0]).unwrap();
        NetLinesNetwork::new(1, vec![w], vec![out, 0.0], false, Standardizer::identity(1)).unwrap()
    }

    /// Three clusters of three points around (0, 0), (10, 0) and (5, 8).
    fn clusters() -> Dataset {
        let centers = [(0.0, 0.0), (10.0, 0.0), (5.0, 8.0)];
        let offsets = [(0.0, 1.0), (1.0, -0.5), (-1.0, -0.5)];
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (c, (cx, cy)) in centers.iter().enumerate() {
            for (dx, dy) in offsets {
                features.push(vec![cx + dx, cy + dy]);
                labels.push(c as ClassId);
            }
        }
        Dataset::from_parts(features, labels).unwrap()
    }

    #[test]
    fn chain_prediction_rules() {
        let ton = Ton::from_parts(vec![5, 6, 7], vec![constant(1.0), constant(-1.0)]).unwrap();
        assert_eq!(ton_predict(&ton, &[0.0]).unwrap(), 5);
        let ton = Ton::from_parts(vec![5, 6, 7], vec![constant(-1.0), constant(1.0)]).unwrap();
        assert_eq!(ton_predict(&ton, &[0.0]).unwrap(), 6);
        let ton = Ton::from_parts(vec![5, 6, 7], vec![constant(-1.0), constant(-1.0)]).unwrap();
        assert_eq!(ton_predict(&ton, &[0.0]).unwrap(), 7);
        assert!(ton_predict(&ton, &[0.0, 1.0]).is_err());
        assert!(Ton::from_parts(vec![5, 6, 7], vec![constant(1.0)]).is_err());
    }

    #[test]
    fn trained_chain_on_clusters() {
        let ds = clusters();
        let ton = train_ton(&ds, &[2, 0, 1], &GrowthConfig::default()).unwrap();
        assert_eq!(ton.chain().len(), 2);
        for p in ds.patterns() {
            assert_eq!(ton_predict(&ton, &p.features).unwrap(), p.label);
        }
    }

    #[test]
    fn chain_checks_classes() {
        let ds = clusters();
        assert_eq!(
            train_ton(&ds, &[0, 1, 9], &GrowthConfig::default()),
            Err(Error::DegenerateClass(9))
        );
        assert!(matches!(
            train_ton(&ds, &[0, 1], &GrowthConfig::default()),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn two_classes_agree_with_binary_forward() {
        let net = cut(2.0, false);
        let ton = Ton::from_parts(vec![1, 0], vec![net.clone()]).unwrap();
        let wta = WtaClassifier::from_parts(vec![0, 1], vec![cut(2.0, true), net.clone()]).unwrap();
        for x in [-5.0, 0.0, 1.9, 2.1, 7.0] {
            let bin = if net.forward(&[x]).unwrap() == 1 { 1 } else { 0 };
            assert_eq!(ton_predict(&ton, &[x]).unwrap(), bin);
            assert_eq!(wta_predict(&wta, &[x]).unwrap(), bin);
        }
    }

    #[test]
    fn winner_takes_all_rules() {
        let wta = WtaClassifier::from_parts(
            vec![0, 1, 2],
            vec![constant(-1.0), constant(0.5), constant(-0.2)],
        )
        .unwrap();
        assert_eq!(wta_predict(&wta, &[3.0]).unwrap(), 1);
        let all_negative = WtaClassifier::from_parts(
            vec![0, 1, 2],
            vec![constant(-1.0), constant(-0.7), constant(-0.2)],
        )
        .unwrap();
        assert_eq!(wta_predict(&all_negative, &[3.0]).unwrap(), 2);
        let tied = WtaClassifier::from_parts(
            vec![4, 1, 2],
            vec![constant(0.3), constant(0.3), constant(-0.2)],
        )
        .unwrap();
        assert_eq!(wta_predict(&tied, &[3.0]).unwrap(), 1);
        let trained = train_wta(&clusters(), &GrowthConfig::default()).unwrap();
        assert_eq!(trained.networks().len(), 3);
    }

    #[test]
    fn voting_rules() {
        assert_eq!(plurality(&[2, 2, 2]), 2);
        assert_eq!(plurality(&[1, 1, 3]), 1);
        assert_eq!(plurality(&[3, 1, 1]), 1);
        assert_eq!(plurality(&[3, 1, 2]), 3);
        let make = |first: f64| Ton::from_parts(vec![0, 1], vec![constant(first)]).unwrap();
        assert!(TonEnsemble::new(vec![make(1.0), make(1.0)]).is_err());
        let e = TonEnsemble::new(vec![make(-1.0), make(1.0), make(-1.0)]).unwrap();
        assert_eq!(vote_predict(&e, &[0.0]).unwrap(), 1);
    }

    #[test]
    fn sequence_enumeration() {
        let three = distinct_sequences(&[1, 2, 3]);
        assert_eq!(three, vec![vec![1, 2, 3], vec![2, 1, 3], vec![3, 1, 2]]);
        assert_eq!(distinct_sequences(&[0, 1, 2, 3]).len(), 12);
        assert_eq!(distinct_sequences(&[4, 9]), vec![vec![4, 9]]);

        let picked = ensemble_sequences(&[1, 2, 3], None, 3).unwrap();
        assert_eq!(picked.len(), 3);
        assert_eq!(sorted_seqs(picked), three);
        assert_eq!(ensemble_sequences(&[0, 1], None, 0).unwrap().len(), 1);
        assert_eq!(ensemble_sequences(&[0, 1, 2, 3], Some(5), 1).unwrap().len(), 5);
        assert!(ensemble_sequences(&[0, 1, 2], Some(2), 1).is_err());
        assert!(ensemble_sequences(&[0, 1, 2], Some(5), 1).is_err());
        let many: Vec<ClassId> = (0..10).collect();
        let big = ensemble_sequences(&many, Some(7), 2).unwrap();
        assert_eq!(big.len(), 7);
        assert_eq!(big, ensemble_sequences(&many, Some(7), 2).unwrap());
    }

    fn sorted_seqs(mut v: Vec<Vec<ClassId>>) -> Vec<Vec<ClassId>> {
        v.sort();
        v
    }

    #[test]
    fn ensemble_trains_every_order() {
        let e = train_ensemble(&clusters(), None, &GrowthConfig::default()).unwrap();
        assert_eq!(e.len(), 3);
        for t in e.tons() {
            assert_eq!(t.chain().len(), 2);
        }
        for p in clusters().patterns() {
            assert_eq!(vote_predict(&e, &p.features).unwrap(), p.label);
        }
    }
}
