//! Spin-orbital coupled cluster with frozen (tailored) amplitudes.

mod ccsd;
mod triples;

pub use ccsd::{ccsd_solve, CcResult, TraceRow};
pub use triples::{triples_correction, triples_energy};

use crate::hamio::{MolecularHamiltonian, Reference};
use crate::tailor::Amplitudes;
use ndarray::{Array2, Array4};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CcError {
    #[error("amplitudes shaped ({0}, {1}) do not match the {2} occupied / {3} virtual spin orbitals")]
    Shape(usize, usize, usize, usize),
    #[error("active projected energy needs zero unfrozen amplitudes; found magnitude {0:e}")]
    ContractViolation(f64),
    #[error("writing trace {path}: {source}")]
    Trace {
        path: String,
        #[source]
        source: csv::Error,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcConfig {
    pub max_iterations: usize,
    pub energy_tol: f64,
    pub amp_rms_tol: f64,
    pub diis_depth: usize,
    pub level_shift: f64,
}

impl Default for CcConfig {
    fn default() -> Self {
        CcConfig {
            max_iterations: 200,
            energy_tol: 1e-8,
            amp_rms_tol: 1e-7,
            diis_depth: 8,
            level_shift: 0.0,
        }
    }
}

/// Fock matrix and antisymmetrized integrals over spin orbitals, occupied
/// first. Spin orbital `2k + σ` of each block is the `k`-th reference
/// occupied (virtual) orbital with spin `σ`.
#[derive(Clone, Debug)]
pub struct SpinSystem {
    pub nocc: usize,
    pub nvir: usize,
    pub e_hf: f64,
    pub fock: Array2<f64>,
    /// `⟨pq||rs⟩`.
    pub g: Array4<f64>,
}

impl SpinSystem {
    pub fn new(h: &MolecularHamiltonian, reference: &Reference) -> Self {
        let spatial: Vec<usize> = reference.occupied.iter().chain(&reference.virtuals).copied().collect();
        let n = 2 * spatial.len();
        let sp = |p: usize| spatial[p / 2];
        let fock = Array2::from_shape_fn((n, n), |(p, q)| {
            if p % 2 == q % 2 {
                reference.fock[[sp(p), sp(q)]]
            } else {
                0.0
            }
        });
        let coulomb = |p: usize, q: usize, r: usize, s: usize| {
            if p % 2 == r % 2 && q % 2 == s % 2 {
                h.eri[[sp(p), sp(r), sp(q), sp(s)]]
            } else {
                0.0
            }
        };
        let g = Array4::from_shape_fn((n, n, n, n), |(p, q, r, s)| coulomb(p, q, r, s) - coulomb(p, q, s, r));
        SpinSystem {
            nocc: 2 * reference.nocc(),
            nvir: 2 * reference.nvir(),
            e_hf: reference.e_hf,
            fock,
            g,
        }
    }

    pub fn check(&self, amps: &Amplitudes) -> Result<(), CcError> {
        if amps.nocc() != self.nocc || amps.nvir() != self.nvir {
            return Err(CcError::Shape(amps.nocc(), amps.nvir(), self.nocc, self.nvir));
        }
        Ok(())
    }

    /// `Σ f_ia t_ia + ¼ Σ ⟨ij||ab⟩ t_ijab + ½ Σ ⟨ij||ab⟩ t_ia t_jb`.
    pub fn correlation_energy(&self, t1: &Array2<f64>, t2: &Array4<f64>) -> f64 {
        let (o, v) = (self.nocc, self.nvir);
        let mut e = 0.0;
        for i in 0..o {
            for a in 0..v {
                e += self.fock[[i, o + a]] * t1[[i, a]];
            }
        }
        for i in 0..o {
            for j in 0..o {
                for a in 0..v {
                    for b in 0..v {
                        let g = self.g[[i, j, o + a, o + b]];
                        if g != 0.0 {
                            e += g * (0.25 * t2[[i, j, a, b]] + 0.5 * t1[[i, a]] * t1[[j, b]]);
                        }
                    }
                }
            }
        }
        e
    }
}

/// `e_hf` plus the CC correlation functional.
pub fn projected_energy(sys: &SpinSystem, amps: &Amplitudes) -> Result<f64, CcError> {
    sys.check(amps)?;
    Ok(sys.e_hf + sys.correlation_energy(&amps.t1, &amps.t2))
}

/// Projected energy of tailored amplitudes before the remaining amplitudes
/// are optimized, i.e. with every unfrozen amplitude zero.
pub fn active_projected_energy(sys: &SpinSystem, tailored: &Amplitudes) -> Result<f64, CcError> {
    let m = tailored.max_unfrozen();
    if m != 0.0 {
        return Err(CcError::ContractViolation(m));
    }
    projected_energy(sys, tailored)
}

pub fn corrected_energy(e_active_qc: f64, e_tcc: f64, e_tcc_active: f64) -> f64 {
    e_active_qc + (e_tcc - e_tcc_active)
}

/// Energies of one pipeline run; only requested quantities are present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_hf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_casci: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_vqe: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_ccsd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_ccsd_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_active_qc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_tcc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_tcc_active: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_corrected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_triples: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_corrected_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discarded_ci_weight: Option<f64>,
}

pub fn write_trace_csv(trace: &[TraceRow], path: &Path) -> Result<(), CcError> {
    let wrap = |source| CcError::Trace {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    for row in trace {
        w.serialize(row).map_err(wrap)?;
    }
    w.flush().map_err(|e| wrap(e.into()))?;
    Ok(())
}
