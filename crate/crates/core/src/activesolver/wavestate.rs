use crate::det::Determinant;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Complex amplitudes over an ordered determinant basis.
///
/// JSON form: `{"basis": [[alpha, beta], …], "amps": [[re, im], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveState {
    pub basis: Vec<Determinant>,
    pub amps: Vec<Complex64>,
}

impl WaveState {
    pub fn new(basis: Vec<Determinant>, amps: Vec<Complex64>) -> Self {
        assert_eq!(basis.len(), amps.len(), "basis and amplitudes must align");
        WaveState { basis, amps }
    }

    pub fn from_real(basis: Vec<Determinant>, amps: &[f64]) -> Self {
        WaveState::new(basis, amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn single(d: Determinant) -> Self {
        WaveState::new(vec![d], vec![Complex64::new(1.0, 0.0)])
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn amplitude(&self, d: &Determinant) -> Complex64 {
        self.basis
            .iter()
            .position(|x| x == d)
            .map(|i| self.amps[i])
            .unwrap_or_default()
    }

    pub fn to_map(&self) -> HashMap<Determinant, Complex64> {
        self.basis.iter().copied().zip(self.amps.iter().copied()).collect()
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &WaveState) -> f64 {
        let map = other.to_map();
        let overlap: Complex64 = self
            .basis
            .iter()
            .zip(&self.amps)
            .map(|(d, a)| a.conj() * map.get(d).copied().unwrap_or_default())
            .sum();
        overlap.norm_sqr()
    }

    /// Multiply every amplitude by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> WaveState {
        let f = Complex64::from_polar(1.0, phi);
        WaveState::new(self.basis.clone(), self.amps.iter().map(|a| a * f).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
