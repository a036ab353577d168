//! Molecular integrals: FCIDUMP I/O, the closed-shell reference, active-space
//! selection and frozen-core embedding.

mod active;
mod fcidump;
pub mod fixture;
mod reference;

pub use active::{build_active_hamiltonian, select_active_space, ActiveHamiltonian, ActiveSpace, SelectionWarning};
pub use fcidump::{parse_fcidump, read_fcidump, write_fcidump};
pub use reference::{fock_matrix, reference_state, Reference};

use ndarray::{Array2, Array4};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HamError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported reference: {0}")]
    UnsupportedReference(String),
    #[error("active-space selection failed: {0}")]
    Selection(String),
    #[error("invalid active space: {0}")]
    InvalidSpace(String),
}

/// One- and two-electron integrals over spatial molecular orbitals.
///
/// `eri[[p, q, r, s]]` is the chemists'-notation integral `(pq|rs)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularHamiltonian {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
    pub e_core: f64,
    pub h1: Array2<f64>,
    pub eri: Array4<f64>,
}

impl MolecularHamiltonian {
    pub fn zeros(norb: usize, nelec: usize) -> Self {
        MolecularHamiltonian {
            norb,
            nelec,
            ms2: 0,
            e_core: 0.0,
            h1: Array2::zeros((norb, norb)),
            eri: Array4::zeros((norb, norb, norb, norb)),
        }
    }

    /// Store `(pq|rs)` into all eight symmetry-equivalent slots.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            self.eri[[a, b, c, d]] = v;
        }
    }

    pub fn set_h1(&mut self, p: usize, q: usize, v: f64) {
        self.h1[[p, q]] = v;
        self.h1[[q, p]] = v;
    }

    /// Largest deviation from the h1 and 8-fold eri symmetries.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.norb;
        let mut err: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                err = err.max((self.h1[[p, q]] - self.h1[[q, p]]).abs());
                for r in 0..n {
                    for s in 0..n {
                        let v = self.eri[[p, q, r, s]];
                        err = err
                            .max((v - self.eri[[q, p, r, s]]).abs())
                            .max((v - self.eri[[p, q, s, r]]).abs())
                            .max((v - self.eri[[r, s, p, q]]).abs());
                    }
                }
            }
        }
        err
    }

    /// Direct sum of two Hamiltonians with no coupling between the blocks.
    pub fn direct_sum(&self, other: &MolecularHamiltonian) -> MolecularHamiltonian {
        let n1 = self.norb;
        let n = n1 + other.norb;
        let mut out = MolecularHamiltonian::zeros(n, self.nelec + other.nelec);
        out.e_core = self.e_core + other.e_core;
        out.ms2 = self.ms2 + other.ms2;
        for (off, h) in [(0, self), (n1, other)] {
            for p in 0..h.norb {
                for q in 0..h.norb {
                    out.h1[[p + off, q + off]] = h.h1[[p, q]];
                    for r in 0..h.norb {
                        for s in 0..h.norb {
                            out.eri[[p + off, q + off, r + off, s + off]] = h.eri[[p, q, r, s]];
                        }
                    }
                }
            }
        }
        out
    }
}
