//! Coupled-cluster theory tailored by a sampled active-space wavefunction.
//!
//! Stages: integrals and active-space selection ([`hamio`]), active-space
//! ground state ([`activesolver`]), classical-shadow-style amplitude
//! reconstruction ([`cbt`]), CI-to-CC conversion ([`tailor`]), frozen-amplitude
//! CCSD and (T) ([`cc`]), and drivers for single points, scans and shot-noise
//! statistics ([`pipeline`]).

pub mod activesolver;
pub mod cbt;
pub mod cc;
pub mod det;
pub mod hamio;
pub mod pipeline;
pub mod seed;
pub mod tailor;

#[cfg(test)]
pub(crate) mod test_support {
    use crate::hamio::ActiveHamiltonian;
    use ndarray::{Array2, Array4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Molecule-like random active Hamiltonian: increasing orbital energies,
    /// weak off-diagonal couplings and a full 8-fold symmetric ERI tensor.
    pub fn random_active_hamiltonian(norb: usize, nelec: usize, seed: u64) -> ActiveHamiltonian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h1 = Array2::zeros((norb, norb));
        for p in 0..norb {
            h1[[p, p]] = -2.0 + 0.6 * p as f64 + rng.random_range(-0.1..0.1);
            for q in 0..p {
                let v = rng.random_range(-0.1..0.1);
                h1[[p, q]] = v;
                h1[[q, p]] = v;
            }
        }
        let mut eri = Array4::zeros((norb, norb, norb, norb));
        for p in 0..norb {
            for q in 0..=p {
                for r in 0..norb {
                    for s in 0..=r {
                        if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                            continue;
                        }
                        let v = if p == q && r == s {
                            0.5 + rng.random_range(0.0..0.2)
                        } else {
                            rng.random_range(-0.05..0.05)
                        };
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
                            eri[[a, b, c, d]] = v;
                        }
                    }
                }
            }
        }
        ActiveHamiltonian {
            n_active_orb: norb,
            n_active_elec: nelec,
            e_frozen: 0.0,
            h1_eff: h1,
            eri_act: eri,
        }
    }
}
