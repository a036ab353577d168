//! Active-space ground states: exact diagonalization (CASCI) and a simulated
//! statevector UCCSD-VQE, plus active-space energy evaluation.

pub mod ci;
pub mod eigen;
mod vqe;
mod wavestate;

pub use ci::CiSpace;
pub use vqe::{
    uccsd_excitations, uccsd_vqe, Excitation, GradientMethod, InitialParams, Statevector, VqeConfig, VqeResult,
};
pub use wavestate::WaveState;

use crate::hamio::ActiveHamiltonian;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("determinant space of dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("{qubits} qubits exceed cap {cap}")]
    QubitCap { qubits: usize, cap: usize },
    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

#[derive(Clone, Debug)]
pub struct CasciOptions {
    pub dim_cap: usize,
    /// Dense diagonalization at or below this dimension, Davidson above.
    pub dense_limit: usize,
    pub davidson: eigen::DavidsonOptions,
}

impl Default for CasciOptions {
    fn default() -> Self {
        CasciOptions {
            dim_cap: 1_000_000,
            dense_limit: 2000,
            davidson: eigen::DavidsonOptions::default(),
        }
    }
}

/// Lowest eigenpair of the active Hamiltonian in its closed-shell
/// determinant sector. The returned energy includes `e_frozen`.
///
/// The eigenvector's sign is fixed so its largest-magnitude amplitude
/// (first in basis order on ties) is positive.
pub fn casci_ground_state(ha: &ActiveHamiltonian, opts: &CasciOptions) -> Result<(WaveState, f64), SolverError> {
    let space = CiSpace::for_hamiltonian(ha)?;
    let dim = space.dim();
    if dim > opts.dim_cap {
        return Err(SolverError::DimensionCap { dim, cap: opts.dim_cap });
    }
    let (e, mut v) = if dim <= opts.dense_limit {
        eigen::dense_lowest(&space.dense(ha))
    } else {
        let diag = space.diagonal(ha);
        eigen::davidson_lowest(|x| space.sigma(ha, x), &diag, &opts.davidson)?
    };
    let lead = v
        .iter()
        .enumerate()
        .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok((WaveState::from_real(space.determinants(), &v), e + ha.e_frozen))
}

/// `⟨Ψ|Ĥ_act|Ψ⟩ + e_frozen` for a normalized state whose basis is any subset
/// of the active closed-shell sector (in any order).
pub fn active_energy(state: &WaveState, ha: &ActiveHamiltonian) -> Result<f64, SolverError> {
    let space = CiSpace::for_hamiltonian(ha)?;
    let mut re = vec![0.0; space.dim()];
    let mut im = vec![0.0; space.dim()];
    for (d, a) in state.basis.iter().zip(&state.amps) {
        let idx = space
            .index_of(d)
            .ok_or_else(|| SolverError::Unsupported(format!("determinant {d} outside the active sector")))?;
        re[idx] += a.re;
        im[idx] += a.im;
    }
    Ok(expectation(&space, ha, &re, &im) + ha.e_frozen)
}

pub(crate) fn expectation(space: &CiSpace, ha: &ActiveHamiltonian, re: &[f64], im: &[f64]) -> f64 {
    let sr = space.sigma(ha, re);
    let si = space.sigma(ha, im);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    dot(re, &sr) + dot(im, &si)
}

/// Energy by explicit Slater–Condon double sum; slow, for cross-checks.
pub fn active_energy_slater_condon(state: &WaveState, ha: &ActiveHamiltonian) -> f64 {
    let mut e = Complex64::new(0.0, 0.0);
    for (di, ai) in state.basis.iter().zip(&state.amps) {
        for (dj, aj) in state.basis.iter().zip(&state.amps) {
            if di.excitation_level(dj) <= 2 {
                e += ai.conj() * aj * ci::slater_condon(ha, di, dj);
            }
        }
    }
    e.re + ha.e_frozen * state.norm_sqr()
}
