//! Explicit unit construction that guarantees growth makes progress.
//!
//! Given a unit `w_h` and the targets it was meant to learn, let `nu` be the
//! misclassified pattern closest to its hyperplane and `L_h` the correctly
//! classified patterns strictly closer than `nu`. The unit
//!
//! ```text
//! w_{h+1} = tau_nu w_h - (1 - eps) tau_nu (w_h . xi_nu) e_0
//! ```
//!
//! is parallel to `w_h` with its threshold moved just inside `nu`: every
//! pattern of `L_h` lands on the positive side and `nu` on the negative side,
//! provided `0 < eps < min_{L_h} (|gamma_nu| - gamma_mu) / |gamma_nu|`.
//! Pairing it with the output update `W_0 += tau_nu`, `W_{h+1} = -tau_nu`
//! shifts the output sum of the negative side by `2 tau_nu`.
//!
//! [`fallback_step`] wraps both into a network-level step that is only
//! accepted when it strictly enlarges the set of correctly classified
//! training patterns. Single constructed units are tried first; the last
//! resort adds a pair of units around a slab.

use crate::data::BinarySet;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sign};
use crate::minimerror::{normalize, PerceptronWeights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::network::NetLinesNetwork;

/// Result of [`appendix_unit`].
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixUnit {
    pub weights: PerceptronWeights,
    /// Index of the misclassified pattern closest to the reference hyperplane.
    pub nu: usize,
    /// Correctly classified patterns closer to the hyperplane than `nu`.
    pub learned: Vec<usize>,
    pub epsilon: f64,
}

/// Builds the next unit from `w_h` and the stage targets carried by `set`.
///
/// Under the returned weights every pattern of `learned` has a positive field
/// and `nu` a negative one, i.e. all of them are learned with the relabeled
/// targets (+1 for correct, -1 for wrong under `w_h`).
pub fn appendix_unit(w_h: &[f64], set: &BinarySet) -> Result<AppendixUnit> {
    if w_h.len() != set.dim() + 1 {
        return Err(Error::DimensionMismatch {
            expected: set.dim() + 1,
            found: w_h.len(),
        });
    }
    let len = norm(w_h);
    if !(len > 0.0) {
        return Err(Error::ZeroWeights);
    }
    let fields: Vec<f64> = set.iter().map(|(x, _)| dot(w_h, x)).collect();
    let gammas: Vec<f64> = fields
        .iter()
        .zip(set.targets())
        .map(|(a, &t)| t as f64 * a / len)
        .collect();

    let nu = gammas
        .iter()
        .enumerate()
        .filter(|(_, g)| **g <= 0.0)
        .min_by(|(_, a), (_, b)| a.abs().total_cmp(&b.abs()))
        .map(|(i, _)| i)
        .ok_or(Error::NoWronglyLearnedPattern)?;
    let reach = gammas[nu].abs();
    if reach == 0.0 {
        return Err(Error::PatternOnHyperplane);
    }

    let learned: Vec<usize> = (0..set.len())
        .filter(|&mu| gammas[mu] > 0.0 && gammas[mu] < reach)
        .collect();
    let bound = learned
        .iter()
        .map(|&mu| (reach - gammas[mu]) / reach)
        .fold(1.0, f64::min);
    let epsilon = 0.5 * bound;

    let tau = set.target(nu) as f64;
    let mut w = w_h.iter().map(|x| tau * x).collect::<Vec<f64>>();
    w[0] -= (1.0 - epsilon) * tau * fields[nu];
    let w = normalize(&w)?;

    if dot(&w, set.input(nu)) >= 0.0 {
        return Err(Error::ConstructionFailed(format!(
            "pattern {nu} not moved to the negative side"
        )));
    }
    if let Some(&mu) = learned.iter().find(|&&mu| dot(&w, set.input(mu)) <= 0.0) {
        return Err(Error::ConstructionFailed(format!(
            "pattern {mu} of the learned slab lost"
        )));
    }

    Ok(AppendixUnit {
        weights: PerceptronWeights::new(w),
        nu,
        learned,
        epsilon,
    })
}

/// `W_0 += tau_nu`, existing weights kept, new weight `-tau_nu`.
pub fn appendix_output_update(output: &[f64], tau_nu: i8) -> Vec<f64> {
    let tau = tau_nu as f64;
    let mut w = output.to_vec();
    w[0] += tau;
    w.push(-tau);
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FallbackRoute {
    /// Built on the last hidden unit of the network.
    LastUnit,
    /// Built on a reference hyperplane that cuts one wrong pattern off from
    /// all other distinct inputs.
    Isolation,
    /// A half-space cap holding a wrong pattern on its boundary, placed
    /// directly rather than derived from a reference unit. `learned` is empty
    /// and `epsilon` is NaN for this route.
    Cap,
    /// Two parallel units bounding a slab that holds `nu` and no pattern the
    /// shift could break; the output adds `2 tau_nu` inside the slab only.
    /// Always available when `nu`'s input differs from every other input.
    /// `learned` is empty and `epsilon` is NaN.
    Slab,
}

/// Record of one accepted fallback step.
#[derive(Debug, Clone, PartialEq)]
pub struct FallbackStep {
    pub route: FallbackRoute,
    pub nu: usize,
    pub learned: Vec<usize>,
    pub epsilon: f64,
    /// Relabeled targets under which `nu` and `learned` are checked.
    pub unit_targets: Vec<i8>,
    /// Appended hidden units (two for [`FallbackRoute::Slab`], else one).
    pub units: Vec<PerceptronWeights>,
    pub correct_before: usize,
    pub correct_after: usize,
}

/// Appends one constructed unit to `net` and updates its output so that the
/// set of correctly classified patterns of `set` grows strictly (every
/// previously correct pattern stays correct and `nu` becomes correct).
pub fn fallback_step(net: &NetLinesNetwork, set: &BinarySet) -> Result<(NetLinesNetwork, FallbackStep)> {
    fallback_step_within(net, set, 2)
}

/// Like [`fallback_step`], adding at most `max_units` (1 or 2) units.
pub fn fallback_step_within(
    net: &NetLinesNetwork,
    set: &BinarySet,
    max_units: usize,
) -> Result<(NetLinesNetwork, FallbackStep)> {
    if set.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            found: set.dim(),
        });
    }
    let sums: Vec<f64> = set.iter().map(|(x, _)| effective_sum(net, x)).collect();
    let correct: Vec<bool> = sums
        .iter()
        .zip(set.targets())
        .map(|(s, &t)| sign(*s) == t)
        .collect();
    let before = correct.iter().filter(|&&c| c).count();
    if before == set.len() {
        return Err(Error::NoWronglyLearnedPattern);
    }

    let last = net.hidden().last().expect("network has a hidden unit");
    if let Some(step) = try_reference(net, set, &sums, &correct, last.as_slice(), FallbackRoute::LastUnit) {
        return Ok(step);
    }

    let mut wrong: Vec<usize> = (0..set.len()).filter(|&mu| !correct[mu]).collect();
    wrong.sort_by(|&a, &b| sums[a].abs().total_cmp(&sums[b].abs()));
    let centers = [midrange(set), centroid(set)];
    for &nu in &wrong {
        for center in &centers {
            let Some(reference) = isolating_plane(set, nu, center) else {
                continue;
            };
            if let Some(step) = try_reference(net, set, &sums, &correct, &reference, FallbackRoute::Isolation) {
                return Ok(step);
            }
        }
    }
    if max_units >= 2 {
        if let Some(step) = slab_step(net, set, &sums, &correct, &wrong, &centers) {
            return Ok(step);
        }
    }
    for &nu in wrong.iter().take(MAX_CAP_CANDIDATES) {
        let mut units: Vec<PerceptronWeights> = centers
            .iter()
            .filter_map(|c| {
                let d: Vec<f64> = set.features(nu).iter().zip(c).map(|(x, m)| x - m).collect();
                cap_unit(set, nu, &d)
            })
            .collect();
        for i in 0..set.dim() {
            for sgn in [1.0, -1.0] {
                let mut d = vec![0.0; set.dim()];
                d[i] = sgn;
                units.extend(cap_unit(set, nu, &d));
            }
        }
        units.extend(separating_unit(net, set, &sums, &correct, nu));
        for unit in units {
            if let Some(step) = extend(net, set, &sums, &correct, nu, unit, FallbackRoute::Cap) {
                return Ok(step);
            }
        }
    }
    Err(Error::FallbackExhausted {
        errors: set.len() - before,
        hidden: net.hidden_count(),
    })
}

/// Output sum with the bare-unit convention folded in.
fn effective_sum(net: &NetLinesNetwork, x: &[f64]) -> f64 {
    if net.ls_flag() {
        net.hidden()[0].field(x)
    } else {
        net.sum_augmented(x)
    }
}

fn try_reference(
    net: &NetLinesNetwork,
    set: &BinarySet,
    sums: &[f64],
    correct: &[bool],
    reference: &[f64],
    route: FallbackRoute,
) -> Option<(NetLinesNetwork, FallbackStep)> {
    // Stage targets that make "wrong under the reference" coincide with
    // "misclassified by the network" (up to patterns on the plane).
    let targets: Vec<i8> = set
        .iter()
        .zip(correct)
        .map(|((x, _), &ok)| {
            let s = sign(dot(reference, x));
            if ok {
                s
            } else {
                -s
            }
        })
        .collect();
    let staged = set.relabeled(targets).ok()?;
    let unit = appendix_unit(reference, &staged).ok()?;
    if correct[unit.nu] {
        return None;
    }
    let (grown, mut step) = extend(net, set, sums, correct, unit.nu, unit.weights, route)?;
    step.learned = unit.learned;
    step.epsilon = unit.epsilon;
    Some((grown, step))
}

/// Appends `unit` and applies the output update for `nu`, after rescaling
/// `W` so that the `2 tau_nu` shift fixes `nu` but none of the correct
/// patterns it also reaches. Accepted only if every correct pattern stays
/// correct and `nu` becomes correct.
fn extend(
    net: &NetLinesNetwork,
    set: &BinarySet,
    sums: &[f64],
    correct: &[bool],
    nu: usize,
    unit: PerceptronWeights,
    route: FallbackRoute,
) -> Option<(NetLinesNetwork, FallbackStep)> {
    let tau = set.target(nu);
    let shifted: Vec<bool> = set.iter().map(|(x, _)| sign(unit.field(x)) == -1).collect();
    if !shifted[nu] {
        return None;
    }
    // correct patterns pushed towards the wrong side
    let at_risk = (0..set.len())
        .filter(|&mu| shifted[mu] && correct[mu] && set.target(mu) != tau)
        .map(|mu| sums[mu].abs())
        .fold(f64::INFINITY, f64::min);
    let s_nu = sums[nu].abs();
    if at_risk <= s_nu {
        return None;
    }
    // |S_nu| scale < 2 < at_risk scale
    let scale = if at_risk.is_finite() {
        4.0 / (s_nu + at_risk)
    } else if s_nu > 0.0 {
        1.0 / s_nu
    } else {
        1.0
    };
    let scaled: Vec<f64> = net.output().iter().map(|w| w * scale).collect();
    let output = normalize(&appendix_output_update(&scaled, tau)).ok()?;
    let mut hidden = net.hidden().to_vec();
    hidden.push(unit.clone());
    let grown = NetLinesNetwork::new(
        net.input_dim(),
        hidden,
        output,
        false,
        net.standardizer().clone(),
    )
    .ok()?;

    let now: Vec<bool> = set
        .iter()
        .map(|(x, t)| grown.forward_augmented(x) == t)
        .collect();
    let keeps = correct.iter().zip(&now).all(|(&was, &is)| !was || is);
    if !keeps || !now[nu] {
        return None;
    }
    let unit_targets = (0..set.len())
        .map(|mu| if correct[mu] { 1 } else { -1 })
        .collect();
    let step = FallbackStep {
        route,
        nu,
        learned: Vec::new(),
        epsilon: f64::NAN,
        unit_targets,
        units: vec![unit],
        correct_before: correct.iter().filter(|&&c| c).count(),
        correct_after: now.iter().filter(|&&c| c).count(),
    };
    Some((grown, step))
}

const MAX_CAP_CANDIDATES: usize = 32;
const SLAB_RANDOM_DIRECTIONS: usize = 8;
const SEPARATION_EPOCHS: usize = 2000;

/// Pair of units `-1` on `{d . x > lo}` and on `{d . x > hi}`; with output
/// weights `-tau` and `+tau` they add `2 tau` to the output sum inside the
/// slab `lo < d . x <= hi` and nothing outside. The slab contains `nu` and
/// none of the correct patterns the shift could break.
fn slab_step(
    net: &NetLinesNetwork,
    set: &BinarySet,
    sums: &[f64],
    correct: &[bool],
    wrong: &[usize],
    centers: &[Vec<f64>],
) -> Option<(NetLinesNetwork, FallbackStep)> {
    let n = set.dim();
    let mut shared: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut d = vec![0.0; n];
        d[i] = 1.0;
        shared.push(d);
    }
    shared.extend(net.hidden().iter().map(|u| u.as_slice()[1..].to_vec()));
    let mut rng = ChaCha8Rng::seed_from_u64(set.len() as u64);
    for _ in 0..SLAB_RANDOM_DIRECTIONS {
        shared.push((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
    }
    let mut magnitudes: Vec<f64> = sums.iter().map(|s| s.abs()).collect();
    magnitudes.sort_by(f64::total_cmp);
    magnitudes.dedup();

    for &nu in wrong.iter().take(MAX_CAP_CANDIDATES) {
        let tau = set.target(nu);
        let s_nu = sums[nu].abs();
        // patterns with |S| below `level` follow the shift
        let level = match magnitudes.iter().find(|&&m| m > s_nu) {
            Some(&next) => 0.5 * (s_nu + next),
            None => 2.0 * s_nu + 1.0,
        };
        let harmful = |mu: usize| correct[mu] && set.target(mu) != tau && sums[mu].abs() < level;
        let fixes = |mu: usize| !correct[mu] && set.target(mu) == tau && sums[mu].abs() < level;

        let mut directions: Vec<Vec<f64>> = centers
            .iter()
            .map(|c| set.features(nu).iter().zip(c).map(|(x, m)| x - m).collect())
            .collect();
        directions.extend(shared.iter().cloned());

        let mut best: Option<(usize, Vec<f64>, f64, f64)> = None;
        for d in directions.iter().filter(|d| d.iter().any(|&v| v != 0.0)) {
            let mut proj: Vec<(f64, usize)> =
                (0..set.len()).map(|mu| (dot(d, set.features(mu)), mu)).collect();
            proj.sort_by(|a, b| a.0.total_cmp(&b.0));
            let at = dot(d, set.features(nu));
            // the slab is a run of whole projection levels around `at`
            let blocked = |v: f64| proj.iter().any(|&(p, mu)| p == v && harmful(mu));
            if blocked(at) {
                continue;
            }
            let first = proj.iter().position(|&(p, _)| p == at)?;
            let last = proj.iter().rposition(|&(p, _)| p == at)?;
            let mut lo = first;
            while lo > 0 && !blocked(proj[lo - 1].0) {
                lo -= 1;
            }
            while lo < first && lo > 0 && proj[lo - 1].0 == proj[lo].0 {
                lo += 1;
            }
            let mut hi = last;
            while hi + 1 < proj.len() && !blocked(proj[hi + 1].0) {
                hi += 1;
            }
            while hi > last && hi + 1 < proj.len() && proj[hi + 1].0 == proj[hi].0 {
                hi -= 1;
            }
            let gain = proj[lo..=hi].iter().filter(|&&(_, mu)| fixes(mu)).count();
            let lower = if lo == 0 {
                f64::NEG_INFINITY
            } else {
                0.5 * (proj[lo - 1].0 + proj[lo].0)
            };
            let upper = if hi + 1 == proj.len() {
                f64::INFINITY
            } else {
                0.5 * (proj[hi].0 + proj[hi + 1].0)
            };
            if best.as_ref().is_none_or(|b| gain > b.0) {
                best = Some((gain, d.clone(), lower, upper));
            }
        }
        let Some((_, d, lower, upper)) = best else {
            continue;
        };
        let cap = |threshold: f64, sgn: f64| {
            let mut w = vec![sgn * threshold];
            w.extend(d.iter().map(|v| -sgn * v));
            PerceptronWeights::normalized(w).ok()
        };
        let t = tau as f64;
        let mut output: Vec<f64> = net.output().iter().map(|w| w * 2.0 / level).collect();
        let units = match (lower.is_finite(), upper.is_finite()) {
            (true, true) => {
                output.extend([-t, t]);
                vec![cap(lower, 1.0)?, cap(upper, 1.0)?]
            }
            (true, false) => {
                output = appendix_output_update(&output, tau);
                vec![cap(lower, 1.0)?]
            }
            (false, true) => {
                output = appendix_output_update(&output, tau);
                vec![cap(upper, -1.0)?]
            }
            (false, false) => continue,
        };
        let output = normalize(&output).ok()?;
        let mut hidden = net.hidden().to_vec();
        hidden.extend(units.iter().cloned());
        let Ok(grown) = NetLinesNetwork::new(n, hidden, output, false, net.standardizer().clone())
        else {
            continue;
        };
        let now: Vec<bool> = set
            .iter()
            .map(|(x, t)| grown.forward_augmented(x) == t)
            .collect();
        if !now[nu] || correct.iter().zip(&now).any(|(&was, &is)| was && !is) {
            continue;
        }
        let step = FallbackStep {
            route: FallbackRoute::Slab,
            nu,
            learned: Vec::new(),
            epsilon: f64::NAN,
            unit_targets: (0..set.len()).map(|mu| if correct[mu] { 1 } else { -1 }).collect(),
            units,
            correct_before: correct.iter().filter(|&&c| c).count(),
            correct_after: now.iter().filter(|&&c| c).count(),
        };
        return Some((grown, step));
    }
    None
}
/// Unit with `nu` on its negative side and, on its positive side, every
/// correct pattern the output shift for `nu` could break (opposite target,
/// output sum no larger than `nu`'s). Found with the classic perceptron rule
/// in standardized coordinates; `None` if it does not converge.
fn separating_unit(
    net: &NetLinesNetwork,
    set: &BinarySet,
    sums: &[f64],
    correct: &[bool],
    nu: usize,
) -> Option<PerceptronWeights> {
    let tau = set.target(nu);
    let std = net.standardizer();
    let point = |mu: usize| -> Option<Vec<f64>> {
        let mut z = vec![1.0];
        z.extend(std.transform(set.features(mu)).ok()?);
        Some(z)
    };
    let mut examples = vec![(point(nu)?, -1.0)];
    for mu in 0..set.len() {
        if correct[mu] && set.target(mu) != tau && sums[mu].abs() <= sums[nu].abs() {
            examples.push((point(mu)?, 1.0));
        }
    }
    let mut w = vec![0.0; set.dim() + 1];
    for _ in 0..SEPARATION_EPOCHS {
        let mut clean = true;
        for (z, t) in &examples {
            if t * dot(&w, z) <= 0.0 {
                w.iter_mut().zip(z).for_each(|(wi, zi)| *wi += t * zi);
                clean = false;
            }
        }
        if clean {
            let user = std.unstandardize_weights(&w).ok()?;
            return PerceptronWeights::normalized(user).ok();
        }
    }
    None
}

/// Unit that is -1 exactly on `{mu : d . xi_mu >= d . xi_nu}`.
fn cap_unit(set: &BinarySet, nu: usize, d: &[f64]) -> Option<PerceptronWeights> {
    let at = dot(d, set.features(nu));
    let below = (0..set.len())
        .map(|mu| dot(d, set.features(mu)))
        .filter(|&v| v < at)
        .fold(f64::NEG_INFINITY, f64::max);
    if !below.is_finite() || at - below <= 1e-9 * at.abs().max(1.0) {
        return None;
    }
    let mut w = Vec::with_capacity(d.len() + 1);
    w.push(0.5 * (at + below));
    w.extend(d.iter().map(|v| -v));
    PerceptronWeights::normalized(w).ok()
}

/// Hyperplane with `nu` (and exact copies of it) alone on its positive side,
/// normal to `xi_nu - center`.
fn isolating_plane(set: &BinarySet, nu: usize, center: &[f64]) -> Option<Vec<f64>> {
    let target = set.features(nu);
    let d: Vec<f64> = target.iter().zip(center).map(|(x, c)| x - c).collect();
    if d.iter().all(|&v| v == 0.0) {
        return None;
    }
    let top = dot(&d, target);
    let second = (0..set.len())
        .filter(|&mu| set.features(mu) != target)
        .map(|mu| dot(&d, set.features(mu)))
        .fold(f64::NEG_INFINITY, f64::max);
    if !second.is_finite() || top - second <= 1e-9 * top.abs().max(1.0) {
        return None;
    }
    let mut w = Vec::with_capacity(d.len() + 1);
    w.push(-0.5 * (top + second));
    w.extend(d);
    Some(w)
}

fn midrange(set: &BinarySet) -> Vec<f64> {
    (0..set.dim())
        .map(|i| {
            let (lo, hi) = (0..set.len())
                .map(|mu| set.features(mu)[i])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            0.5 * (lo + hi)
        })
        .collect()
}

fn centroid(set: &BinarySet) -> Vec<f64> {
    let p = set.len() as f64;
    (0..set.dim())
        .map(|i| (0..set.len()).map(|mu| set.features(mu)[i]).sum::<f64>() / p)
        .collect()
}
