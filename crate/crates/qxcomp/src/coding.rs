//! Classical variable-length coding against a believed distribution q:
//! Shannon lengths, canonical prefix codewords, Kraft checks, and
//! entropy/cross-entropy rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::typicality::Distribution;

/// Tolerance for recognizing dyadic probabilities before the ceiling.
const DYADIC_TOL: f64 = 1e-9;

/// A rate in bits that may be infinite (support mismatch).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Finite(f64),
    Infinite,
}

impl Rate {
    pub fn is_finite(&self) -> bool {
        matches!(self, Rate::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            Rate::Finite(v) => *v,
            Rate::Infinite => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::Finite(v) => write!(f, "{v:.6}"),
            Rate::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthMode {
    Real,
    Integer,
}

impl std::fmt::Display for LengthMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LengthMode::Real => write!(f, "real"),
            LengthMode::Integer => write!(f, "integer"),
        }
    }
}

impl std::str::FromStr for LengthMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(LengthMode::Real),
            "integer" => Ok(LengthMode::Integer),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

/// Per-letter codeword lengths; integer mode also carries prefix-free
/// codewords rendered as ASCII '0'/'1' strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub mode: LengthMode,
    pub lengths: Vec<f64>,
    pub codewords: Option<Vec<String>>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn kraft_sum(&self) -> f64 {
        self.lengths.iter().map(|&l| 2f64.powf(-l)).sum()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("codebook serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Shannon lengths l_i = log2(1/q_i), or their ceiling in integer mode
/// (with dyadic detection so exact powers of two stay exact).
pub fn shannon_lengths(q: &Distribution, mode: LengthMode) -> Result<Codebook> {
    let mut lengths = Vec::with_capacity(q.len());
    for (i, &qi) in q.probs().iter().enumerate() {
        if qi <= 0.0 {
            return Err(Error::ZeroProbabilityLetter { letter: i });
        }
        let l = -qi.log2();
        lengths.push(match mode {
            LengthMode::Real => l,
            LengthMode::Integer => (l - DYADIC_TOL).ceil().max(1.0),
        });
    }
    let codewords = match mode {
        LengthMode::Real => None,
        LengthMode::Integer => {
            let ints: Vec<u32> = lengths.iter().map(|&l| l as u32).collect();
            Some(build_prefix_code(&ints)?)
        }
    };
    Ok(Codebook {
        mode,
        lengths,
        codewords,
    })
}

/// Canonical prefix code: letters sorted by (length, index), codewords
/// assigned by binary counting. Deterministic and prefix-free whenever
/// the Kraft inequality holds.
pub fn build_prefix_code(lengths: &[u32]) -> Result<Vec<String>> {
    let max_len = *lengths.iter().max().ok_or(Error::InvalidInput(
        "empty length list".into(),
    ))? as u128;
    if max_len == 0 {
        return Err(Error::InvalidInput("codeword lengths must be positive".into()));
    }
    if max_len > 64 {
        return Err(Error::InvalidInput(format!(
            "codeword length {max_len} beyond supported 64 bits"
        )));
    }
    // exact Kraft check: sum of 2^(max-l) must not exceed 2^max
    let kraft_num: u128 = lengths.iter().map(|&l| 1u128 << (max_len - l as u128)).sum();
    if kraft_num > 1u128 << max_len {
        return Err(Error::KraftViolated {
            sum: kraft_num as f64 / (1u128 << max_len) as f64,
        });
    }

    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| (lengths[i], i));

    let mut codewords = vec![String::new(); lengths.len()];
    let mut code: u64 = 0;
    let mut prev_len = lengths[order[0]];
    for (pos, &letter) in order.iter().enumerate() {
        let len = lengths[letter];
        if pos > 0 {
            code = (code + 1) << (len - prev_len);
        }
        codewords[letter] = (0..len)
            .rev()
            .map(|b| if code >> b & 1 == 1 { '1' } else { '0' })
            .collect();
        prev_len = len;
    }
    Ok(codewords)
}

/// H(p) = -Σ p_i log2 p_i, with 0·log 0 = 0.
pub fn shannon_entropy(p: &Distribution) -> f64 {
    p.probs()
        .iter()
        .filter(|&&pi| pi > 0.0)
        .map(|&pi| -pi * pi.log2())
        .sum()
}

/// H(p, q) = Σ p_i log2(1/q_i); infinite when p charges a letter q does not.
pub fn cross_entropy(p: &Distribution, q: &Distribution) -> Result<Rate> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: format!("{}", p.len()),
            right: format!("{}", q.len()),
        });
    }
    let mut h = 0.0;
    for (&pi, &qi) in p.probs().iter().zip(q.probs()) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Ok(Rate::Infinite);
        }
        h -= pi * qi.log2();
    }
    Ok(Rate::Finite(h))
}

/// ⟨l⟩ = Σ p_i l_i.
pub fn expected_length(p: &Distribution, cb: &Codebook) -> Result<f64> {
    if p.len() != cb.len() {
        return Err(Error::DimensionMismatch {
            left: format!("{}", p.len()),
            right: format!("{}", cb.len()),
        });
    }
    Ok(p.probs().iter().zip(&cb.lengths).map(|(&pi, &li)| pi * li).sum())
}

/// Concatenates codewords for a letter sequence.
pub fn encode(letters: &[usize], cb: &Codebook) -> Result<String> {
    let codewords = cb.codewords.as_ref().ok_or(Error::InvalidInput(
        "encoding requires an integer-mode codebook".into(),
    ))?;
    let mut out = String::new();
    for &l in letters {
        out.push_str(codewords.get(l).ok_or(Error::InvalidInput(format!(
            "letter {l} outside codebook"
        )))?);
    }
    Ok(out)
}

/// Greedy prefix decoding of a concatenated bit string.
pub fn decode(bits: &str, cb: &Codebook) -> Result<Vec<usize>> {
    let codewords = cb.codewords.as_ref().ok_or(Error::InvalidInput(
        "decoding requires an integer-mode codebook".into(),
    ))?;
    let table: std::collections::HashMap<&str, usize> = codewords
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let max_len = codewords.iter().map(|w| w.len()).max().unwrap_or(0);
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bits.len() {
        let mut matched = None;
        for end in (pos + 1)..=bits.len().min(pos + max_len) {
            if let Some(&letter) = table.get(&bits[pos..end]) {
                matched = Some((letter, end));
                break;
            }
        }
        match matched {
            Some((letter, end)) => {
                out.push(letter);
                pos = end;
            }
            None => {
                return Err(Error::InvalidInput(format!(
                    "undecodable bit string at offset {pos}"
                )))
            }
        }
    }
    Ok(out)
}
