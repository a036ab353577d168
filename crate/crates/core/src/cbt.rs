//! Simulated computational basis tomography.
//!
//! Weights are sampled from the Born distribution; relative phases against
//! the most frequent determinant `k1` come from two interference
//! measurements per determinant, simulated directly from the statevector:
//! `U` projects onto `(|k1⟩ + |kj⟩)/√2` and `V` onto `(|k1⟩ − i|kj⟩)/√2`, so
//!
//! ```text
//! p_U = |c1 + cj|²/2,   p_V = |c1 + i·cj|²/2
//! c1·conj(cj) = p_U + i·p_V − (1 + i)(|c1|² + |cj|²)/2
//! ```

use crate::activesolver::WaveState;
use crate::det::Determinant;
use crate::seed;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Reference weights below this make phase reconstruction undefined.
pub const REFERENCE_WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CbtError {
    #[error("invalid shot budget: {0}")]
    InvalidBudget(String),
    #[error("reference weight {weight:e} below floor {REFERENCE_WEIGHT_FLOOR:e}")]
    DegenerateReference { weight: f64 },
    #[error("all coefficients vanish after real projection")]
    DegenerateProjection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotBudget {
    pub n_sample: u64,
    pub n_u: u64,
    pub n_v: u64,
    pub r: usize,
}

impl Default for ShotBudget {
    fn default() -> Self {
        ShotBudget {
            n_sample: 1_000_000,
            n_u: 1_000_000,
            n_v: 1_000_000,
            r: 100,
        }
    }
}

impl ShotBudget {
    pub fn new(n_sample: u64, n_u: u64, n_v: u64, r: usize) -> Result<Self, CbtError> {
        let b = ShotBudget { n_sample, n_u, n_v, r };
        b.validate()?;
        Ok(b)
    }

    /// Same number of shots for all three measurement types.
    pub fn uniform(n: u64, r: usize) -> Result<Self, CbtError> {
        ShotBudget::new(n, n, n, r)
    }

    pub fn validate(&self) -> Result<(), CbtError> {
        if self.n_sample == 0 || self.n_u == 0 || self.n_v == 0 || self.r == 0 {
            return Err(CbtError::InvalidBudget(format!(
                "all of n_sample={}, n_u={}, n_v={}, r={} must be positive",
                self.n_sample, self.n_u, self.n_v, self.r
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sampled,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CbtEstimate {
    /// Sorted by descending coefficient magnitude.
    pub entries: Vec<(Determinant, Complex64)>,
    pub budget: ShotBudget,
    pub reference: Determinant,
    pub mode: Mode,
}

impl CbtEstimate {
    pub fn to_wavestate(&self) -> WaveState {
        WaveState::new(
            self.entries.iter().map(|e| e.0).collect(),
            self.entries.iter().map(|e| e.1).collect(),
        )
    }

    pub fn coefficient(&self, d: &Determinant) -> Option<Complex64> {
        self.entries.iter().find(|e| &e.0 == d).map(|e| e.1)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.1.norm_sqr()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Multinomial sample of `n_sample` draws from `|amps|²`, via sequential
/// conditional binomials in basis order. Zero counts are omitted.
pub fn sample_weights<R: Rng + ?Sized>(state: &WaveState, n_sample: u64, rng: &mut R) -> BTreeMap<Determinant, u64> {
    let probs: Vec<f64> = state.amps.iter().map(|a| a.norm_sqr()).collect();
    let mut mass: f64 = probs.iter().sum();
    let last = probs.iter().rposition(|&p| p > 0.0);
    let mut left = n_sample;
    let mut counts = BTreeMap::new();
    for (idx, (d, &p)) in state.basis.iter().zip(&probs).enumerate() {
        if left == 0 || Some(idx) > last {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let k = if Some(idx) == last {
            left
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        if k > 0 {
            counts.insert(*d, k);
        }
        left -= k;
        mass -= p;
    }
    counts
}

/// The `r` most frequent determinants by descending count, ties by
/// ascending `(alpha, beta)`.
pub fn select_top_r(counts: &BTreeMap<Determinant, u64>, r: usize) -> Vec<Determinant> {
    let mut v: Vec<(Determinant, u64)> = counts.iter().map(|(d, &c)| (*d, c)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().take(r).map(|x| x.0).collect()
}

/// Outcome probabilities of the `U` and `V` interference measurements.
pub fn interference_probabilities(c1: Complex64, cj: Complex64) -> (f64, f64) {
    let i = Complex64::i();
    ((c1 + cj).norm_sqr() / 2.0, (c1 + i * cj).norm_sqr() / 2.0)
}

/// Combine measured `p_U`, `p_V` with weights `|c1|²`, `|cj|²` into an
/// estimate of `c1·conj(cj)`.
pub fn combine_interference(p_u: f64, p_v: f64, w1: f64, wj: f64) -> Complex64 {
    let s = 0.5 * (w1 + wj);
    Complex64::new(p_u - s, p_v - s)
}

/// Shot counts for the interference measurements; `None` evaluates the
/// infinite-shot limit.
pub type InterferenceShots = Option<(u64, u64)>;

/// Estimate `⟨k1|Ψ⟩⟨Ψ|kj⟩` from simulated `U`/`V` outcomes and the given
/// weight estimates `(|c1|², |cj|²)`.
pub fn interference_factor<R: Rng + ?Sized>(
    state: &WaveState,
    k1: &Determinant,
    kj: &Determinant,
    shots: InterferenceShots,
    weights: (f64, f64),
    rng: &mut R,
) -> Complex64 {
    let (p_u, p_v) = interference_probabilities(state.amplitude(k1), state.amplitude(kj));
    let (p_u, p_v) = match shots {
        None => (p_u, p_v),
        Some((n_u, n_v)) => {
            let draw = |n: u64, p: f64, rng: &mut R| {
                Binomial::new(n, p.clamp(0.0, 1.0)).expect("valid binomial").sample(rng) as f64 / n as f64
            };
            let u = draw(n_u, p_u, rng);
            (u, draw(n_v, p_v, rng))
        }
    };
    combine_interference(p_u, p_v, weights.0, weights.1)
}

/// Infinite-shot interference factor with exact weights.
pub fn exact_interference_factor(state: &WaveState, k1: &Determinant, kj: &Determinant) -> Complex64 {
    let (c1, cj) = (state.amplitude(k1), state.amplitude(kj));
    let (p_u, p_v) = interference_probabilities(c1, cj);
    combine_interference(p_u, p_v, c1.norm_sqr(), cj.norm_sqr())
}

fn stream_id(d: &Determinant) -> [u64; 2] {
    [d.alpha, d.beta]
}

/// Full tomography pipeline. In sampled mode the coefficient magnitudes
/// are `sqrt(N_j/N)` and phases come from the interference factor against
/// `k1`, whose phase is fixed to zero. In exact mode the coefficients are
/// read from the state, gauge-fixed so `k1` is real positive, and truncated
/// to the top `r` by magnitude.
pub fn reconstruct(state: &WaveState, budget: &ShotBudget, mode: Mode, seed: u64) -> Result<CbtEstimate, CbtError> {
    budget.validate()?;
    match mode {
        Mode::Exact => reconstruct_exact(state, budget),
        Mode::Sampled => reconstruct_sampled(state, budget, seed),
    }
}

fn reconstruct_exact(state: &WaveState, budget: &ShotBudget) -> Result<CbtEstimate, CbtError> {
    let mut entries: Vec<(Determinant, Complex64)> = state
        .basis
        .iter()
        .copied()
        .zip(state.amps.iter().copied())
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .collect();
    entries.sort_by(|a, b| b.1.norm_sqr().total_cmp(&a.1.norm_sqr()).then(a.0.cmp(&b.0)));
    entries.truncate(budget.r);
    let Some(&(k1, c1)) = entries.first() else {
        return Err(CbtError::DegenerateReference { weight: 0.0 });
    };
    if c1.norm_sqr() < REFERENCE_WEIGHT_FLOOR {
        return Err(CbtError::DegenerateReference { weight: c1.norm_sqr() });
    }
    let gauge = c1.conj() / c1.norm();
    for e in entries.iter_mut() {
        e.1 *= gauge;
    }
    entries[0].1 = Complex64::new(c1.norm(), 0.0);
    Ok(CbtEstimate {
        entries,
        budget: *budget,
        reference: k1,
        mode: Mode::Exact,
    })
}

fn reconstruct_sampled(state: &WaveState, budget: &ShotBudget, seed: u64) -> Result<CbtEstimate, CbtError> {
    let n = budget.n_sample as f64;
    let counts = sample_weights(state, budget.n_sample, &mut seed::rng(seed, &[0]));
    let top = select_top_r(&counts, budget.r);
    let Some(&k1) = top.first() else {
        return Err(CbtError::DegenerateReference { weight: 0.0 });
    };
    let w1 = counts[&k1] as f64 / n;
    if w1 < REFERENCE_WEIGHT_FLOOR {
        return Err(CbtError::DegenerateReference { weight: w1 });
    }
    let mut entries = vec![(k1, Complex64::new(w1.sqrt(), 0.0))];
    for kj in &top[1..] {
        let wj = counts[kj] as f64 / n;
        let [a1, b1] = stream_id(&k1);
        let [aj, bj] = stream_id(kj);
        let mut rng = seed::rng(seed, &[1, a1, b1, aj, bj]);
        let f = interference_factor(state, &k1, kj, Some((budget.n_u, budget.n_v)), (w1, wj), &mut rng);
        let phase = if f.norm() > 0.0 {
            f.conj() / f.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        entries.push((*kj, phase * wj.sqrt()));
    }
    Ok(CbtEstimate {
        entries,
        budget: *budget,
        reference: k1,
        mode: Mode::Sampled,
    })
}

/// Keep real parts, drop exact zeros, renormalize, and re-sort by
/// descending magnitude (stable, so ties keep their prior order).
pub fn finalize_real(est: &CbtEstimate) -> Result<CbtEstimate, CbtError> {
    let mut entries: Vec<(Determinant, Complex64)> = est
        .entries
        .iter()
        .filter(|e| e.1.re != 0.0)
        .map(|e| (e.0, Complex64::new(e.1.re, 0.0)))
        .collect();
    let norm: f64 = entries.iter().map(|e| e.1.re * e.1.re).sum::<f64>().sqrt();
    if entries.is_empty() || norm == 0.0 {
        return Err(CbtError::DegenerateProjection);
    }
    for e in entries.iter_mut() {
        e.1 /= norm;
    }
    entries.sort_by(|a, b| b.1.re.abs().total_cmp(&a.1.re.abs()));
    Ok(CbtEstimate {
        reference: entries[0].0,
        entries,
        budget: est.budget,
        mode: est.mode,
    })
}
