//! Weight vectors, the piecewise-linear interpolant `w*`, and the OWA / WOWA
//! aggregation operators.
//!
//! A WOWA aggregate combines a rank-dependent *preferential* vector `w` with a
//! rank-independent *importance* vector `p`. Values are sorted nonincreasingly,
//! the importance weights are accumulated in that order, and the increments of
//! `w*` over the accumulated importance become the effective weights.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `Σ w = 1` when validating weight vectors.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Largest dimension accepted by [`wowa_bruteforce_permutations`].
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("weight vector must have at least one entry")]
    Empty,
    #[error("weight entry {index} = {value} is outside [0, 1]")]
    EntryOutOfRange { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1 within {SUM_TOLERANCE}")]
    BadSum { sum: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("alpha must lie in the open interval (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("interpolant argument {0} is outside [0, 1]")]
    OutOfDomain(f64),
    #[error("brute-force enumeration refused for K = {k} (cap {cap})")]
    BruteForceCap { k: usize, cap: usize },
    #[error("preferential weights must be nonincreasing for a concave interpolant")]
    NotNonincreasing,
    #[error("value {index} is not finite")]
    NonFinite { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Preferential,
    Importance,
}

/// A validated probability-like vector: entries in `[0, 1]` summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    entries: Vec<f64>,
    kind: WeightKind,
}

impl WeightVector {
    pub fn new(entries: Vec<f64>, kind: WeightKind) -> Result<Self, WeightError> {
        if entries.is_empty() {
            return Err(WeightError::Empty);
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() {
                return Err(WeightError::NonFinite { index });
            }
            if !(0.0..=1.0).contains(&value) {
                return Err(WeightError::EntryOutOfRange { index, value });
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(WeightError::BadSum { sum });
        }
        Ok(Self { entries, kind })
    }

    pub fn preferential(entries: Vec<f64>) -> Result<Self, WeightError> {
        Self::new(entries, WeightKind::Preferential)
    }

    pub fn importance(entries: Vec<f64>) -> Result<Self, WeightError> {
        Self::new(entries, WeightKind::Importance)
    }

    /// `1/K` in every entry.
    pub fn uniform(k: usize, kind: WeightKind) -> Result<Self, WeightError> {
        if k == 0 {
            return Err(WeightError::Empty);
        }
        Self::new(vec![1.0 / k as f64; k], kind)
    }

    /// The unit vector `e₁`: all preferential mass on the largest value.
    pub fn worst_case(k: usize) -> Result<Self, WeightError> {
        if k == 0 {
            return Err(WeightError::Empty);
        }
        let mut entries = vec![0.0; k];
        entries[0] = 1.0;
        Self::new(entries, WeightKind::Preferential)
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.entries.windows(2).all(|pair| pair[0] >= pair[1])
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }
}

/// `g_α(z) = (1 - α^z) / (1 - α)`.
fn g_alpha(alpha: f64, z: f64) -> f64 {
    -(z * alpha.ln()).exp_m1() / (1.0 - alpha)
}

/// Preferential weights `w_j = g_α(j/K) - g_α((j-1)/K)`.
///
/// Smaller `α` concentrates more weight on the first ranks. The result is
/// strictly decreasing for every `α ∈ (0, 1)`.
pub fn generate_weights_galpha(alpha: f64, k: usize) -> Result<WeightVector, WeightError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(WeightError::AlphaOutOfRange(alpha));
    }
    if k == 0 {
        return Err(WeightError::Empty);
    }
    let kf = k as f64;
    let cumulative: Vec<f64> = (0..=k)
        .map(|j| match j {
            0 => 0.0,
            j if j == k => 1.0,
            j => g_alpha(alpha, j as f64 / kf),
        })
        .collect();
    let entries = cumulative.windows(2).map(|c| c[1] - c[0]).collect();
    WeightVector::new(entries, WeightKind::Preferential)
}

/// The piecewise-linear function through `(0, 0)` and `(i/K, Σ_{j≤i} w_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    cumulative: Vec<f64>,
    slopes: Vec<f64>,
}

impl Interpolant {
    pub fn new(w: &WeightVector) -> Self {
        let k = w.len();
        let mut cumulative = Vec::with_capacity(k + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for (i, &wi) in w.entries().iter().enumerate() {
            acc += wi;
            cumulative.push(if i + 1 == k { 1.0 } else { acc });
        }
        let slopes = w.entries().iter().map(|&wi| wi * k as f64).collect();
        Self { cumulative, slopes }
    }

    pub fn segments(&self) -> usize {
        self.slopes.len()
    }

    /// Breakpoints `(i/K, w*(i/K))` for `i = 0..=K`.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let k = self.segments() as f64;
        self.cumulative
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as f64 / k, v))
            .collect()
    }

    pub fn segment_slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn is_concave(&self) -> bool {
        self.slopes.windows(2).all(|s| s[0] >= s[1])
    }

    pub fn eval(&self, t: f64) -> Result<f64, WeightError> {
        if !(-SUM_TOLERANCE..=1.0 + SUM_TOLERANCE).contains(&t) {
            return Err(WeightError::OutOfDomain(t));
        }
        Ok(self.eval_clamped(t))
    }

    /// Evaluation for arguments already known to lie in `[0, 1]` up to rounding.
    pub(crate) fn eval_clamped(&self, t: f64) -> f64 {
        let k = self.segments();
        let t = t.clamp(0.0, 1.0);
        let scaled = t * k as f64;
        let nearest = scaled.round();
        if (scaled - nearest).abs() <= 1e-12 {
            return self.cumulative[nearest as usize];
        }
        let segment = (scaled.ceil() as usize).clamp(1, k);
        let left = (segment - 1) as f64 / k as f64;
        self.cumulative[segment - 1] + self.slopes[segment - 1] * (t - left)
    }
}

/// A sorting permutation together with the effective WOWA weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDeltas {
    /// `permutation[r]` is the (0-based) index of the value at rank `r`.
    pub permutation: Vec<usize>,
    pub deltas: Vec<f64>,
}

fn check_values(expected: usize, a: &[f64]) -> Result<(), WeightError> {
    if a.len() != expected {
        return Err(WeightError::DimensionMismatch {
            expected,
            got: a.len(),
        });
    }
    if let Some(index) = a.iter().position(|v| !v.is_finite()) {
        return Err(WeightError::NonFinite { index });
    }
    Ok(())
}

/// Indices of `a` sorted by nonincreasing value, ties by ascending index.
pub fn descending_order(a: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].total_cmp(&a[i]));
    order
}

/// Ordered weighted average `Σ_k w_k a_{τ(k)}` with `a` sorted nonincreasingly.
pub fn owa(w: &WeightVector, a: &[f64]) -> Result<f64, WeightError> {
    check_values(w.len(), a)?;
    Ok(descending_order(a)
        .into_iter()
        .zip(w.entries())
        .map(|(idx, &wk)| wk * a[idx])
        .sum())
}

/// Effective weights `δ_k = w*(Σ_{j≤k} p_{τ(j)}) - w*(Σ_{j<k} p_{τ(j)})` for a
/// fixed permutation.
pub(crate) fn deltas_for_order(interp: &Interpolant, p: &WeightVector, order: &[usize]) -> Vec<f64> {
    let mut deltas = Vec::with_capacity(order.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        acc += p.entries()[idx];
        let cumulative = if rank + 1 == order.len() { 1.0 } else { acc };
        let value = interp.eval_clamped(cumulative);
        deltas.push(value - prev);
        prev = value;
    }
    deltas
}

pub fn ranked_deltas(
    w: &WeightVector,
    p: &WeightVector,
    a: &[f64],
) -> Result<RankedDeltas, WeightError> {
    if p.len() != w.len() {
        return Err(WeightError::DimensionMismatch {
            expected: w.len(),
            got: p.len(),
        });
    }
    check_values(w.len(), a)?;
    let permutation = descending_order(a);
    let deltas = deltas_for_order(&Interpolant::new(w), p, &permutation);
    Ok(RankedDeltas {
        permutation,
        deltas,
    })
}

/// Weighted OWA aggregate of `a` under preferential `w` and importance `p`.
pub fn wowa(w: &WeightVector, p: &WeightVector, a: &[f64]) -> Result<f64, WeightError> {
    let ranked = ranked_deltas(w, p, a)?;
    Ok(ranked
        .permutation
        .iter()
        .zip(&ranked.deltas)
        .map(|(&idx, &delta)| delta * a[idx])
        .sum())
}

/// WOWA computed as the maximum over all `K!` orderings of the permuted
/// increment sum. Valid only for concave `w*`; used as an oracle.
pub fn wowa_bruteforce_permutations(
    w: &WeightVector,
    p: &WeightVector,
    a: &[f64],
) -> Result<f64, WeightError> {
    wowa_bruteforce_with_cap(w, p, a, DEFAULT_BRUTE_FORCE_CAP)
}

pub fn wowa_bruteforce_with_cap(
    w: &WeightVector,
    p: &WeightVector,
    a: &[f64],
    cap: usize,
) -> Result<f64, WeightError> {
    let k = w.len();
    if k > cap {
        return Err(WeightError::BruteForceCap { k, cap });
    }
    if p.len() != k {
        return Err(WeightError::DimensionMismatch {
            expected: k,
            got: p.len(),
        });
    }
    check_values(k, a)?;
    if !w.is_nonincreasing() {
        return Err(WeightError::NotNonincreasing);
    }
    let interp = Interpolant::new(w);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = f64::NEG_INFINITY;
    loop {
        let value: f64 = deltas_for_order(&interp, p, &perm)
            .iter()
            .zip(&perm)
            .map(|(d, &idx)| d * a[idx])
            .sum();
        best = best.max(value);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best)
}

/// Advances `perm` to its lexicographic successor; `false` once exhausted.
fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}
