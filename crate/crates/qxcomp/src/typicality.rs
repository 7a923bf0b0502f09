//! Classical strong/weak typicality: empirical types, membership
//! predicates, exhaustive enumeration at small N, and seeded Monte
//! Carlo mass estimation at large N.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::trial_rng;

/// Default cap on exhaustive enumeration (number of sequences).
pub const DEFAULT_EXACT_CAP: u128 = 1 << 22;

/// Slack toward membership on boundary comparisons.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Probability distribution over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "alphabet must be nonempty".into(),
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution {
                    reason: format!("probs[{i}] = {p}"),
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution {
                reason: format!("sum = {sum}, expected 1"),
            });
        }
        Ok(Distribution { probs })
    }

    pub fn uniform(d: usize) -> Self {
        Distribution {
            probs: vec![1.0 / d as f64; d],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, letter: usize) -> f64 {
        self.probs[letter]
    }

    /// Cumulative table for inverse-transform sampling.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cum: Vec<f64> = self
            .probs
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
        cum
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: Distribution = serde_json::from_str(s)?;
        Distribution::new(raw.probs)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("distribution serializes")
    }
}

/// Samples one letter by inverse transform on a precomputed cumulative table.
pub fn sample_letter(cum: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    match cum.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
        Ok(i) | Err(i) => i.min(cum.len() - 1),
    }
}

/// A finite letter sequence over alphabet [0, D).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    letters: Vec<usize>,
}

impl Sequence {
    pub fn new(letters: Vec<usize>, d: usize) -> Result<Self> {
        for &l in &letters {
            if l >= d {
                return Err(Error::InvalidInput(format!(
                    "letter {l} outside alphabet of size {d}"
                )));
            }
        }
        Ok(Sequence { letters })
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Empirical type: exact letter counts plus the sequence length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeProfile {
    counts: Vec<u64>,
    n: u64,
}

impl TypeProfile {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Frequencies k_i / N.
    pub fn freqs(&self) -> Vec<f64> {
        self.counts.iter().map(|&k| k as f64 / self.n as f64).collect()
    }
}

pub fn empirical_type(seq: &Sequence, d: usize) -> Result<TypeProfile> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts = vec![0u64; d];
    for &l in seq.letters() {
        counts[l] += 1;
    }
    Ok(TypeProfile {
        counts,
        n: seq.len() as u64,
    })
}

fn counts_of(seq: &Sequence, d: usize) -> Vec<u64> {
    let mut counts = vec![0u64; d];
    for &l in seq.letters() {
        counts[l] += 1;
    }
    counts
}

/// |k_i/N - p_i| ≤ ε p_i for every letter. Letters with p_i = 0 must
/// not occur at all.
fn strong_typical_counts(counts: &[u64], n: u64, p: &Distribution, eps: f64) -> bool {
    counts.iter().zip(p.probs()).all(|(&k, &pi)| {
        let freq = k as f64 / n as f64;
        (freq - pi).abs() <= eps * pi + BOUNDARY_SLACK
    })
}

pub fn is_strong_typical(seq: &Sequence, p: &Distribution, eps: f64) -> bool {
    if seq.is_empty() {
        return false;
    }
    let counts = counts_of(seq, p.len());
    strong_typical_counts(&counts, seq.len() as u64, p, eps)
}

fn weak_typical_counts(counts: &[u64], n: u64, p: &Distribution, eps: f64) -> bool {
    let entropy = crate::coding::shannon_entropy(p);
    let mut log_prob = 0.0;
    for (&k, &pi) in counts.iter().zip(p.probs()) {
        if k == 0 {
            continue;
        }
        if pi <= 0.0 {
            // probability-0 sequence, not typical by convention
            return false;
        }
        log_prob += k as f64 * pi.log2();
    }
    let rate = -log_prob / n as f64;
    (rate - entropy).abs() <= eps + BOUNDARY_SLACK
}

pub fn is_weak_typical(seq: &Sequence, p: &Distribution, eps: f64) -> bool {
    if seq.is_empty() {
        return false;
    }
    let counts = counts_of(seq, p.len());
    weak_typical_counts(&counts, seq.len() as u64, p, eps)
}

/// log2 P(i^N); -inf when a zero-probability letter occurs.
pub fn sequence_log_prob(seq: &Sequence, p: &Distribution) -> f64 {
    let mut s = 0.0;
    for &l in seq.letters() {
        let pi = p.prob(l);
        if pi <= 0.0 {
            return f64::NEG_INFINITY;
        }
        s += pi.log2();
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypicalKind {
    Strong,
    Weak,
}

impl std::fmt::Display for TypicalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TypicalKind::Strong => write!(f, "strong"),
            TypicalKind::Weak => write!(f, "weak"),
        }
    }
}

impl std::str::FromStr for TypicalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(TypicalKind::Strong),
            "weak" => Ok(TypicalKind::Weak),
            other => Err(Error::InvalidInput(format!("unknown kind {other:?}"))),
        }
    }
}

pub(crate) fn check_exact_cap(n: usize, d: usize, cap: u128) -> Result<u128> {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(d as u128);
        if total > cap {
            return Err(Error::ExactCapExceeded {
                required: total,
                cap,
            });
        }
    }
    Ok(total)
}

/// Visits all D^N sequences in lexicographic order.
fn for_each_sequence(n: usize, d: usize, mut visit: impl FnMut(&[usize])) {
    let mut digits = vec![0usize; n];
    loop {
        visit(&digits);
        // odometer increment
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < d {
                break;
            }
            digits[pos] = 0;
            if pos == 0 {
                return;
            }
        }
    }
}

pub fn enumerate_typical(
    n: usize,
    p: &Distribution,
    eps: f64,
    kind: TypicalKind,
    exact_cap: u128,
) -> Result<Vec<Sequence>> {
    check_exact_cap(n, p.len(), exact_cap)?;
    let mut out = Vec::new();
    for_each_sequence(n, p.len(), |digits| {
        let seq = Sequence {
            letters: digits.to_vec(),
        };
        let member = match kind {
            TypicalKind::Strong => is_strong_typical(&seq, p, eps),
            TypicalKind::Weak => is_weak_typical(&seq, p, eps),
        };
        if member {
            out.push(seq);
        }
    });
    Ok(out)
}

/// Probability mass estimate, either exact (std_error 0) or Monte Carlo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl MassEstimate {
    pub fn exact(estimate: f64) -> Self {
        MassEstimate {
            estimate,
            std_error: 0.0,
            trials: 0,
            seed: 0,
        }
    }

    pub fn monte_carlo(hits: u64, trials: u64, seed: u64) -> Self {
        let e = hits as f64 / trials as f64;
        MassEstimate {
            estimate: e,
            std_error: (e * (1.0 - e) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }
}

/// Exact typical-set mass by summing over types (the predicate and the
/// sequence probability both depend only on letter counts).
pub fn typical_mass_exact(
    n: usize,
    p: &Distribution,
    eps: f64,
    kind: TypicalKind,
    exact_cap: u128,
) -> Result<MassEstimate> {
    check_exact_cap(n, p.len(), exact_cap)?;
    let d = p.len();
    let mut mass = 0.0;
    for_each_type(n as u64, d, &mut |counts| {
        let member = match kind {
            TypicalKind::Strong => strong_typical_counts(counts, n as u64, p, eps),
            TypicalKind::Weak => weak_typical_counts(counts, n as u64, p, eps),
        };
        if member {
            mass += type_probability(counts, p.probs());
        }
    });
    Ok(MassEstimate::exact(mass.min(1.0)))
}

/// Visits every letter-count vector summing to n (every type class).
pub(crate) fn for_each_type(n: u64, d: usize, visit: &mut impl FnMut(&[u64])) {
    fn rec(remaining: u64, letter: usize, counts: &mut Vec<u64>, visit: &mut impl FnMut(&[u64])) {
        if letter == counts.len() - 1 {
            counts[letter] = remaining;
            visit(counts);
            counts[letter] = 0;
            return;
        }
        for k in 0..=remaining {
            counts[letter] = k;
            rec(remaining - k, letter + 1, counts, visit);
        }
        counts[letter] = 0;
    }
    let mut counts = vec![0u64; d];
    rec(n, 0, &mut counts, visit);
}

/// Total probability of all sequences with the given type: multinomial
/// coefficient times Π p_i^{k_i}, computed in log space.
pub(crate) fn type_probability(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let mut log_p = ln_factorial(n);
    for (&k, &pi) in counts.iter().zip(probs) {
        log_p -= ln_factorial(k);
        if k > 0 {
            if pi <= 0.0 {
                return 0.0;
            }
            log_p += k as f64 * pi.ln();
        }
    }
    log_p.exp()
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Monte Carlo typical-set mass. Trial t draws from substream (seed, t),
/// so the estimate is identical for serial and parallel execution.
pub fn typical_mass_mc(
    n: usize,
    p: &Distribution,
    eps: f64,
    kind: TypicalKind,
    trials: u64,
    seed: u64,
    parallel: bool,
) -> Result<MassEstimate> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    let cum = p.cumulative();
    let d = p.len();
    let one_trial = |t: u64| -> u64 {
        let mut rng = trial_rng(seed, t);
        let mut counts = vec![0u64; d];
        for _ in 0..n {
            counts[sample_letter(&cum, &mut rng)] += 1;
        }
        let member = match kind {
            TypicalKind::Strong => strong_typical_counts(&counts, n as u64, p, eps),
            TypicalKind::Weak => weak_typical_counts(&counts, n as u64, p, eps),
        };
        member as u64
    };
    let hits: u64 = if parallel {
        (0..trials).into_par_iter().map(one_trial).sum()
    } else {
        (0..trials).map(one_trial).sum()
    };
    Ok(MassEstimate::monte_carlo(hits, trials, seed))
}
