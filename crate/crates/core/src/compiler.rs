//! Random compilation of `e^{iĤt}` with `Ĥ = H/λ = Σ p_l P̃_l`.
//!
//! The time evolution is split into `r` segments. Each segment expands
//! `e^{iĤt/r}` as a sum over even orders `n` of
//! `(iĤt/r)ⁿ/n! · (I + iĤ(t/r)/(n+1))`, and the bracket is rewritten as a
//! convex mixture of Pauli rotations. A sampled segment is therefore `n`
//! Pauli factors followed by one rotation, and the product of all segments,
//! scaled by `Cʳ` and the tracked phase, is an unbiased estimate of `e^{iĤt}`.

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::pauli::{PauliString, PauliSum, Phase};

pub const DEFAULT_EPSILON_Q: f64 = 1e-12;
pub const DEFAULT_EPSILON_C: f64 = 1e-14;

/// Parameters of one compiled evolution `e^{iĤt}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompilationConfig {
    /// Dimensionless time, `t_j = -jτλ` for frequency `j`.
    pub t: f64,
    /// Number of segments.
    pub r: u32,
    pub epsilon_q: f64,
}

impl CompilationConfig {
    pub fn new(t: f64, r: u32, epsilon_q: f64) -> Result<Self> {
        let cfg = Self { t, r, epsilon_q };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(invalid("t", "must be finite"));
        }
        if self.r < 1 {
            return Err(invalid("r", "must be at least 1"));
        }
        if !(self.epsilon_q > 0.0 && self.epsilon_q < 1.0) {
            return Err(invalid("epsilon_q", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    Pauli(PauliString),
    /// `e^{iθP}`.
    Rotation(PauliString, f64),
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Pauli(p) => write!(f, "P {p}"),
            Factor::Rotation(p, theta) => write!(f, "R {p} {theta}"),
        }
    }
}

/// One draw of the compiler: factors in application order plus the phase `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledUnitary {
    n_qubits: usize,
    factors: Vec<Factor>,
    phase: Phase,
}

impl SampledUnitary {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            factors: Vec::new(),
            phase: Phase::ONE,
        }
    }

    pub fn from_parts(n_qubits: usize, factors: Vec<Factor>, phase: Phase) -> Self {
        Self {
            n_qubits,
            factors,
            phase,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Number of (controlled) Pauli rotations, one per segment.
    pub fn rotation_count(&self) -> usize {
        self.factors
            .iter()
            .filter(|f| matches!(f, Factor::Rotation(..)))
            .count()
    }

    pub fn pauli_count(&self) -> usize {
        self.factors.len() - self.rotation_count()
    }

    /// Text dump: a `phase` line then one factor per line.
    pub fn dump(&self) -> String {
        let mut out = format!("phase {}\n", self.phase);
        for f in &self.factors {
            out.push_str(&f.to_string());
            out.push('\n');
        }
        out
    }
}

/// `θ_n = sgn(t)·arccos(1/√(1+((t/r)/(n+1))²))`, evaluated as an arctangent.
pub fn theta_of(n: u32, t: f64, r: u32) -> Result<f64> {
    if !n.is_multiple_of(2) {
        return Err(invalid("n", format!("must be even, got {n}")));
    }
    if r < 1 {
        return Err(invalid("r", "must be at least 1"));
    }
    let x = t / r as f64 / (n + 1) as f64;
    Ok(x.atan())
}

/// Truncated law of the even order `n` in one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct QnDistribution {
    /// `probs[i]` is the probability of `n = 2i`.
    probs: Vec<f64>,
    /// Upper bound on the discarded mass relative to the full series.
    tail_bound: f64,
}

impl QnDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Largest order in the support (`2N`).
    pub fn max_order(&self) -> u32 {
        2 * (self.probs.len() as u32 - 1)
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| 2.0 * i as f64 * p)
            .sum()
    }
}

// Unnormalized segment weight for order n = 2i: x^n/n! · √(1+(x/(n+1))²),
// produced one i at a time by the ratio of consecutive powers.
struct SegmentWeights {
    x: f64,
    i: u32,
    power: f64,
}

impl SegmentWeights {
    fn new(x: f64) -> Self {
        Self {
            x: x.abs(),
            i: 0,
            power: 1.0,
        }
    }
}

impl Iterator for SegmentWeights {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let n = 2 * self.i;
        if self.i > 0 {
            self.power *= self.x * self.x / ((n - 1) as f64 * n as f64);
        }
        self.i += 1;
        let y = self.x / (n + 1) as f64;
        Some(self.power * (1.0 + y * y).sqrt())
    }
}

/// `q_n ∝ |t/r|ⁿ/n! · √(1+((t/r)/(n+1))²)` on even `n`, cut at the smallest
/// `N` whose remaining tail is below `ε_q` of the total, then renormalized.
pub fn qn_distribution(t: f64, r: u32, epsilon_q: f64) -> Result<QnDistribution> {
    CompilationConfig::new(t, r, epsilon_q)?;
    let x = (t / r as f64).abs();
    let mut weights = Vec::new();
    let mut sum = 0.0;
    let tail_bound;
    let mut iter = SegmentWeights::new(x).peekable();
    loop {
        let w = iter.next().expect("infinite iterator");
        weights.push(w);
        sum += w;
        let i = weights.len() as f64;
        let next = *iter.peek().expect("infinite iterator");
        // every later ratio is at most x²/((2i+1)(2i+2))
        let ratio = x * x / ((2.0 * i + 1.0) * (2.0 * i + 2.0));
        if ratio < 1.0 {
            let tail = next / (1.0 - ratio);
            if tail < epsilon_q * sum {
                tail_bound = tail / (sum + tail);
                break;
            }
        }
        if !sum.is_finite() {
            return Err(invalid(
                "t",
                format!("|t/r| = {x} is too large for the segment expansion"),
            ));
        }
    }
    let probs = weights.iter().map(|w| w / sum).collect();
    Ok(QnDistribution { probs, tail_bound })
}

/// Reusable sampler for a fixed Hamiltonian and `(t, r)`.
#[derive(Debug, Clone)]
pub struct UnitarySampler {
    n_qubits: usize,
    r: u32,
    t_negative: bool,
    strings: Vec<PauliString>,
    negative: Vec<bool>,
    terms: WeightedIndex<f64>,
    orders: WeightedIndex<f64>,
    /// `θ_{2i}` for each order in the support.
    thetas: Vec<f64>,
}

impl UnitarySampler {
    pub fn new(h: &PauliSum, cfg: &CompilationConfig) -> Result<Self> {
        cfg.validate()?;
        let qn = qn_distribution(cfg.t, cfg.r, cfg.epsilon_q)?;
        let weights = h.probability_weights();
        let terms = WeightedIndex::new(weights.iter().map(|w| w.0))
            .map_err(|e| invalid("terms", e.to_string()))?;
        let orders = WeightedIndex::new(qn.probabilities().iter().copied())
            .map_err(|e| invalid("t", e.to_string()))?;
        let thetas = (0..qn.probabilities().len() as u32)
            .map(|i| theta_of(2 * i, cfg.t, cfg.r))
            .collect::<Result<_>>()?;
        Ok(Self {
            n_qubits: h.n_qubits(),
            r: cfg.r,
            t_negative: cfg.t < 0.0,
            strings: h.terms().iter().map(|t| t.string).collect(),
            negative: weights.iter().map(|w| w.1 < 0.0).collect(),
            terms,
            orders,
            thetas,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SampledUnitary {
        let mut factors = Vec::new();
        let mut phase = Phase::ONE;
        for _ in 0..self.r {
            let i = self.orders.sample(rng);
            let n = 2 * i as u64;
            let mut negatives = 0u64;
            for _ in 0..n {
                let l = self.terms.sample(rng);
                negatives += self.negative[l] as u64;
                factors.push(Factor::Pauli(self.strings[l]));
            }
            let l = self.terms.sample(rng);
            let theta = if self.negative[l] {
                -self.thetas[i]
            } else {
                self.thetas[i]
            };
            factors.push(Factor::Rotation(self.strings[l], theta));
            // (i·sgn t)ⁿ · sgn(α_{l1}⋯α_{ln})
            let base = if self.t_negative {
                Phase::MINUS_I
            } else {
                Phase::I
            };
            phase = phase * base.pow(n) * Phase::from_sign(negatives % 2 == 1);
        }
        SampledUnitary {
            n_qubits: self.n_qubits,
            factors,
            phase,
        }
    }
}

/// Draw one unitary; build a [`UnitarySampler`] instead when drawing many.
pub fn sample_unitary<R: Rng + ?Sized>(
    h: &PauliSum,
    cfg: &CompilationConfig,
    rng: &mut R,
) -> Result<SampledUnitary> {
    Ok(UnitarySampler::new(h, cfg)?.sample(rng))
}

/// Per-segment normalization `C = Σ_n c_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationSum {
    pub value: f64,
    /// Number of series terms summed.
    pub truncation_terms: usize,
}

impl NormalizationSum {
    /// `Cʳ` in log form, finite even when the power overflows.
    pub fn ln_power(&self, r: u32) -> f64 {
        r as f64 * self.value.ln()
    }
}

/// `Σ_{n} (t/r)^{2n}/(2n)! · √(1+((t/r)/(2n+1))²)`, summed until a term
/// falls below `ε_c` (that term included).
pub fn normalization_sum(t: f64, r: u32, epsilon_c: f64) -> Result<NormalizationSum> {
    if !t.is_finite() {
        return Err(invalid("t", "must be finite"));
    }
    if r < 1 {
        return Err(invalid("r", "must be at least 1"));
    }
    if !(epsilon_c > 0.0) {
        return Err(invalid("epsilon_c", "must be positive"));
    }
    let x = t / r as f64;
    let mut value = 0.0;
    let mut count = 0;
    for (i, w) in SegmentWeights::new(x).enumerate() {
        value += w;
        count += 1;
        // weights increase while 2i(2i-1) < x², so only stop past the peak
        let past_peak = (2 * i + 1) as f64 * (2 * i + 2) as f64 > x * x;
        if (w < epsilon_c && past_peak) || !value.is_finite() {
            break;
        }
    }
    Ok(NormalizationSum {
        value,
        truncation_terms: count,
    })
}
