//! Synthetic benchmarks: N-bit parity, clumps in a ring, and the three-class
//! waveform problem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{BinarySet, ClassId, Dataset, Pattern};
use crate::error::{Error, Result};

pub const MAX_PARITY_BITS: usize = 20;
pub const WAVEFORM_DIM: usize = 21;

/// All `2^n` ±1 patterns with the product of their bits as target.
///
/// Patterns are listed in binary counting order with `+1` as the 0 digit
/// and the first bit most significant, so `n = 2` gives `(+,+), (+,-),
/// (-,+), (-,-)`.
pub fn gen_parity(n: usize) -> Result<BinarySet> {
    if !(1..=MAX_PARITY_BITS).contains(&n) {
        return Err(Error::NOutOfRange(n));
    }
    let count = 1usize << n;
    let mut rows = Vec::with_capacity(count);
    let mut targets = Vec::with_capacity(count);
    for code in 0..count {
        let bits: Vec<f64> = (0..n)
            .map(|i| if code >> (n - 1 - i) & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        targets.push(if code.count_ones() % 2 == 0 { 1 } else { -1 });
        rows.push(bits);
    }
    BinarySet::from_features(n, &rows, targets)
}

/// ±1 bits read cyclically: the last bit neighbours the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingPattern(Vec<i8>);

impl RingPattern {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if bits.len() < 3 {
            return Err(Error::NOutOfRange(bits.len()));
        }
        if let Some(&b) = bits.iter().find(|&&b| b != 1 && b != -1) {
            return Err(Error::InvalidTarget(b as i64));
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_features(&self) -> Vec<f64> {
        self.0.iter().map(|&b| b as f64).collect()
    }
}

/// Number of maximal cyclic runs of `+1` bits. An all-`+1` ring is one
/// clump, an all-`-1` ring has none.
pub fn count_clumps(ring: &RingPattern) -> usize {
    let bits = ring.bits();
    let n = bits.len();
    let starts = (0..n)
        .filter(|&i| bits[i] == 1 && bits[(i + n - 1) % n] == -1)
        .count();
    if starts == 0 && bits[0] == 1 {
        1
    } else {
        starts
    }
}

/// Samples one ring whose neighbouring bits differ independently with
/// probability `f` on each of the `n` cyclic edges, conditioned on the
/// number of differences being even (the only closable configurations).
fn sample_ring<R: Rng>(n: usize, f: f64, rng: &mut R) -> RingPattern {
    let mut flips = vec![false; n];
    loop {
        for e in flips.iter_mut() {
            *e = rng.gen::<f64>() < f;
        }
        if flips.iter().filter(|&&e| e).count() % 2 == 0 {
            break;
        }
    }
    let mut bits = Vec::with_capacity(n);
    let mut b: i8 = if rng.gen::<bool>() { 1 } else { -1 };
    bits.push(b);
    for &flip in &flips[..n - 1] {
        if flip {
            b = -b;
        }
        bits.push(b);
    }
    RingPattern(bits)
}

fn check_clumps_params(n: usize, k: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::NOutOfRange(n));
    }
    let f = k / n as f64;
    if !(k > 0.0) || !(f <= 1.0) {
        return Err(Error::BadDensity(format!("k = {k} must lie in (0, {n}]")));
    }
    if f == 1.0 && n % 2 == 1 {
        return Err(Error::BadDensity(format!(
            "k = n = {n} needs a flip on every edge, impossible on an odd ring"
        )));
    }
    Ok(f)
}

/// `p` random rings of `n` bits; about `k` neighbouring pairs differ per ring.
pub fn gen_clump_rings(n: usize, k: f64, p: usize, seed: u64) -> Result<Vec<RingPattern>> {
    let f = check_clumps_params(n, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..p).map(|_| sample_ring(n, f, &mut rng)).collect())
}

/// Rings from [`gen_clump_rings`], labelled +1 when they hold fewer than two
/// clumps.
pub fn gen_clumps(n: usize, k: f64, p: usize, seed: u64) -> Result<BinarySet> {
    if p == 0 {
        return Err(Error::EmptyDataset { needed: 1, found: 0 });
    }
    let rings = gen_clump_rings(n, k, p, seed)?;
    let rows: Vec<Vec<f64>> = rings.iter().map(RingPattern::as_features).collect();
    let targets = rings
        .iter()
        .map(|r| if count_clumps(r) < 2 { 1 } else { -1 })
        .collect();
    BinarySet::from_features(n, &rows, targets)
}

/// Base triangle: height 6 at `t = 11`, zero outside `(5, 17)`.
pub fn base_wave(t: f64) -> f64 {
    (6.0 - (t - 11.0).abs()).max(0.0)
}

/// The three elementary waves, `k` in `1..=3`, sampled at `t = 1..=21`.
pub fn elementary_wave(k: usize) -> [f64; WAVEFORM_DIM] {
    let shift = match k {
        1 => 0.0,
        2 => 4.0,
        3 => -4.0,
        _ => panic!("elementary waves are numbered 1 to 3"),
    };
    let mut w = [0.0; WAVEFORM_DIM];
    for (i, v) in w.iter_mut().enumerate() {
        *v = base_wave((i + 1) as f64 - shift);
    }
    w
}

/// Waves mixed by each class.
pub fn class_waves(class: ClassId) -> (usize, usize) {
    match class {
        1 => (1, 2),
        2 => (1, 3),
        3 => (2, 3),
        _ => panic!("waveform classes are numbered 1 to 3"),
    }
}

/// Noise-free mixture `u h_a + (1-u) h_b` for `class`.
pub fn waveform_mean(class: ClassId, u: f64) -> [f64; WAVEFORM_DIM] {
    let (a, b) = class_waves(class);
    let (ha, hb) = (elementary_wave(a), elementary_wave(b));
    let mut x = [0.0; WAVEFORM_DIM];
    for t in 0..WAVEFORM_DIM {
        x[t] = u * ha[t] + (1.0 - u) * hb[t];
    }
    x
}

/// `p` noisy waveforms with classes 1, 2, 3 drawn uniformly.
pub fn gen_waveforms(p: usize, seed: u64) -> Result<Dataset> {
    if p == 0 {
        return Err(Error::EmptyDataset { needed: 1, found: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let patterns = (0..p)
        .map(|_| {
            let class: ClassId = rng.gen_range(1..=3);
            let u: f64 = rng.gen();
            let mut x = waveform_mean(class, u).to_vec();
            for v in x.iter_mut() {
                let noise: f64 = rng.sample(StandardNormal);
                *v += noise;
            }
            Pattern::new(x, class)
        })
        .collect();
    Dataset::new(patterns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(bits: &[i8]) -> RingPattern {
        RingPattern::new(bits.to_vec()).unwrap()
    }

    /// Rotates the ring to start on a -1 bit, then counts runs left to right.
    fn naive_clumps(bits: &[i8]) -> usize {
        let Some(cut) = bits.iter().position(|&b| b == -1) else {
            return 1;
        };
        let line: Vec<i8> = bits[cut..].iter().chain(&bits[..cut]).copied().collect();
        let mut count = 0;
        let mut inside = false;
        for b in line {
            if b == 1 && !inside {
                count += 1;
            }
            inside = b == 1;
        }
        count
    }

    #[test]
    fn parity_tables() {
        let two = gen_parity(2).unwrap();
        assert_eq!(two.targets(), &[1, -1, -1, 1]);
        assert_eq!(two.features(1), &[1.0, -1.0]);
        assert_eq!(two.features(2), &[-1.0, 1.0]);
        let one = gen_parity(1).unwrap();
        assert_eq!(one.targets(), &[1, -1]);
        assert_eq!(one.features(1), &[-1.0]);
        for n in 1..=8 {
            let set = gen_parity(n).unwrap();
            assert_eq!(set.len(), 1 << n);
            assert_eq!(set.targets().iter().filter(|&&t| t == 1).count(), 1 << (n - 1));
            for (x, t) in set.iter() {
                let prod: f64 = x[1..].iter().product();
                assert_eq!(prod as i8, t);
            }
        }
        assert_eq!(gen_parity(0), Err(Error::NOutOfRange(0)));
        assert_eq!(gen_parity(21), Err(Error::NOutOfRange(21)));
        assert_eq!(gen_parity(5), gen_parity(5));
    }

    #[test]
    fn clump_counting() {
        assert_eq!(count_clumps(&ring(&[1, 1, -1, -1, 1, -1])), 2);
        assert_eq!(count_clumps(&ring(&[-1; 5])), 0);
        assert_eq!(count_clumps(&ring(&[1; 5])), 1);
        assert_eq!(count_clumps(&ring(&[1, -1, 1, -1])), 2);
        // wraps around the end
        assert_eq!(count_clumps(&ring(&[1, -1, -1, 1])), 1);
        assert!(RingPattern::new(vec![1, -1]).is_err());
    }

    #[test]
    fn clump_count_matches_naive_scanner() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let n = rng.gen_range(3..30);
            let bits: Vec<i8> = (0..n).map(|_| if rng.gen() { 1 } else { -1 }).collect();
            assert_eq!(count_clumps(&ring(&bits)), naive_clumps(&bits), "{bits:?}");
        }
    }

    #[test]
    fn clumps_targets_and_determinism() {
        let rings = gen_clump_rings(12, 3.0, 200, 5).unwrap();
        let set = gen_clumps(12, 3.0, 200, 5).unwrap();
        for (r, (x, t)) in rings.iter().zip(set.iter()) {
            assert_eq!(&r.as_features()[..], &x[1..]);
            assert_eq!(t == 1, count_clumps(r) < 2);
        }
        assert_eq!(set, gen_clumps(12, 3.0, 200, 5).unwrap());
        assert_ne!(set, gen_clumps(12, 3.0, 200, 6).unwrap());
    }

    #[test]
    fn clump_density_calibration() {
        for n in [10, 25] {
            let rings = gen_clump_rings(n, 3.0, 10_000, 1).unwrap();
            let mean = rings.iter().map(count_clumps).sum::<usize>() as f64 / 1e4;
            assert!((1.4..=1.6).contains(&mean), "n={n} mean={mean}");
        }
    }

    /// Expected clumps given an even number `b` of differing neighbours is
    /// `b/2`, or 1/2 for a constant ring; weight by the even binomial terms.
    fn exact_mean_clumps(n: usize, f: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut binom = 1.0;
        for b in 0..=n {
            if b > 0 {
                binom *= (n - b + 1) as f64 / b as f64;
            }
            if b % 2 == 0 {
                let pr = binom * f.powi(b as i32) * (1.0 - f).powi((n - b) as i32);
                num += pr * if b == 0 { 0.5 } else { b as f64 / 2.0 };
                den += pr;
            }
        }
        num / den
    }

    #[test]
    fn dense_rings_alternate() {
        let (n, k) = (20, 19.0);
        let rings = gen_clump_rings(n, k, 20_000, 3).unwrap();
        let mean = rings.iter().map(count_clumps).sum::<usize>() as f64 / 20_000.0;
        let exact = exact_mean_clumps(n, k / n as f64);
        assert!((mean - exact).abs() < 0.05, "mean={mean} exact={exact}");
        assert!((exact - k / 2.0).abs() < 0.5);
        // fully alternating even ring
        let full = gen_clump_rings(10, 10.0, 50, 0).unwrap();
        assert!(full.iter().all(|r| count_clumps(r) == 5));
    }

    #[test]
    fn bad_clump_parameters() {
        assert!(matches!(gen_clumps(10, 0.0, 5, 0), Err(Error::BadDensity(_))));
        assert!(matches!(gen_clumps(10, 11.0, 5, 0), Err(Error::BadDensity(_))));
        assert!(matches!(gen_clumps(9, 9.0, 5, 0), Err(Error::BadDensity(_))));
        assert!(matches!(gen_clumps(10, f64::NAN, 5, 0), Err(Error::BadDensity(_))));
        assert_eq!(gen_clumps(2, 1.0, 5, 0), Err(Error::NOutOfRange(2)));
    }

    #[test]
    fn waves_by_hand() {
        let h1 = elementary_wave(1);
        assert_eq!(h1[10], 6.0);
        assert_eq!(h1[6], 2.0);
        for (i, v) in h1.iter().enumerate() {
            let t = i + 1;
            if !(6..=16).contains(&t) {
                assert_eq!(*v, 0.0, "t={t}");
            }
        }
        assert_eq!(elementary_wave(2)[14], 6.0);
        assert_eq!(elementary_wave(3)[6], 6.0);
        assert_eq!(waveform_mean(1, 1.0), h1);
        let mid = waveform_mean(3, 0.5);
        assert_eq!(mid[10], 2.0);
        assert_eq!(mid[14], 3.0);
    }

    #[test]
    fn waveform_shape_balance_and_determinism() {
        let ds = gen_waveforms(30_000, 4).unwrap();
        assert_eq!(ds.dim(), WAVEFORM_DIM);
        assert_eq!(ds.classes(), vec![1, 2, 3]);
        let sd = (30_000.0f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in 1..=3 {
            let count = ds.class_count(c) as f64;
            assert!((count - 10_000.0).abs() < 3.0 * sd, "class {c}: {count}");
        }
        assert_eq!(gen_waveforms(50, 9).unwrap(), gen_waveforms(50, 9).unwrap());
    }
}
