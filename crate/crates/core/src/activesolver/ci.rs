//! Determinant space of an active Hamiltonian and its matrix-vector product.

use super::SolverError;
use crate::det::{self, Determinant};
use crate::hamio::ActiveHamiltonian;
use ndarray::{Array1, Array2};
use std::collections::HashMap;

/// `E_pq` single replacement between two strings: `⟨target|E_pq|source⟩ = sign`.
#[derive(Clone, Copy, Debug)]
struct Link {
    target: usize,
    pq: usize,
    sign: f64,
}

fn string_links(strings: &[u64], norb: usize) -> Vec<Vec<Link>> {
    let index: HashMap<u64, usize> = strings.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    strings
        .iter()
        .map(|&s| {
            let mut links = Vec::new();
            for q in 0..norb {
                if s >> q & 1 == 0 {
                    continue;
                }
                let below_q = (s & ((1u64 << q) - 1)).count_ones();
                let removed = s ^ (1 << q);
                for p in 0..norb {
                    if removed >> p & 1 == 1 {
                        continue;
                    }
                    let below_p = (removed & ((1u64 << p) - 1)).count_ones();
                    let t = removed | (1 << p);
                    links.push(Link {
                        target: index[&t],
                        pq: p * norb + q,
                        sign: det::parity_sign(below_q + below_p),
                    });
                }
            }
            links
        })
        .collect()
}

/// Fixed-(Nα, Nβ) determinant basis ordered lexicographically by
/// `(alpha, beta)`, with precomputed string excitation lists.
#[derive(Clone, Debug)]
pub struct CiSpace {
    pub norb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    alpha: Vec<u64>,
    beta: Vec<u64>,
    alpha_links: Vec<Vec<Link>>,
    beta_links: Vec<Vec<Link>>,
    /// Sign relating alpha-block-first and interleaved operator orderings.
    block_sign: Vec<f64>,
    alpha_index: HashMap<u64, usize>,
    beta_index: HashMap<u64, usize>,
}

impl CiSpace {
    pub fn new(norb: usize, n_alpha: usize, n_beta: usize) -> Result<Self, SolverError> {
        if norb > 64 {
            return Err(SolverError::Unsupported(format!(
                "{norb} active orbitals exceed the 64-orbital bitmask"
            )));
        }
        if n_alpha > norb || n_beta > norb {
            return Err(SolverError::Unsupported(format!(
                "({n_alpha}α, {n_beta}β) electrons do not fit in {norb} orbitals"
            )));
        }
        let alpha = det::strings(norb, n_alpha);
        let beta = det::strings(norb, n_beta);
        let alpha_links = string_links(&alpha, norb);
        let beta_links = string_links(&beta, norb);
        let mut block_sign = Vec::with_capacity(alpha.len() * beta.len());
        for &a in &alpha {
            for &b in &beta {
                block_sign.push(det::block_to_interleaved_sign(&Determinant::new(a, b)));
            }
        }
        let alpha_index = alpha.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let beta_index = beta.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(CiSpace {
            norb,
            n_alpha,
            n_beta,
            alpha,
            beta,
            alpha_links,
            beta_links,
            block_sign,
            alpha_index,
            beta_index,
        })
    }

    /// Closed-shell sector of an active Hamiltonian.
    pub fn for_hamiltonian(ha: &ActiveHamiltonian) -> Result<Self, SolverError> {
        if !ha.n_active_elec.is_multiple_of(2) {
            return Err(SolverError::Unsupported(format!(
                "odd active electron count {}",
                ha.n_active_elec
            )));
        }
        let n = ha.n_active_elec / 2;
        CiSpace::new(ha.n_active_orb, n, n)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    pub fn determinant(&self, idx: usize) -> Determinant {
        let nb = self.beta.len();
        Determinant::new(self.alpha[idx / nb], self.beta[idx % nb])
    }

    pub fn determinants(&self) -> Vec<Determinant> {
        (0..self.dim()).map(|i| self.determinant(i)).collect()
    }

    pub fn index_of(&self, d: &Determinant) -> Option<usize> {
        let ia = self.alpha_index.get(&d.alpha)?;
        let ib = self.beta_index.get(&d.beta)?;
        Some(ia * self.beta.len() + ib)
    }

    /// `σ = H c` (without the constant energy) in the interleaved sign
    /// convention.
    ///
    /// Uses `H = Σ k_pq E_pq + ½ Σ (pq|rs) E_pq E_rs` with
    /// `k_pq = h_pq − ½ Σ_r (pr|rq)`, evaluated through the intermediate
    /// `D_rs(K) = ⟨K|E_rs|c⟩`.
    pub fn sigma(&self, ha: &ActiveHamiltonian, c: &[f64]) -> Vec<f64> {
        let n = self.norb;
        let n2 = n * n;
        let dim = self.dim();
        let nb = self.beta.len();
        assert_eq!(c.len(), dim);
        // Work in alpha-block-first convention.
        let cb: Vec<f64> = c.iter().zip(&self.block_sign).map(|(x, s)| x * s).collect();

        let mut d = Array2::<f64>::zeros((n2, dim));
        for (ia, links) in self.alpha_links.iter().enumerate() {
            for l in links {
                for ib in 0..nb {
                    d[[l.pq, l.target * nb + ib]] += l.sign * cb[ia * nb + ib];
                }
            }
        }
        for ia in 0..self.alpha.len() {
            for (ib, links) in self.beta_links.iter().enumerate() {
                let src = cb[ia * nb + ib];
                for l in links {
                    d[[l.pq, ia * nb + l.target]] += l.sign * src;
                }
            }
        }

        let eri = ha
            .eri_act
            .view()
            .into_shape_with_order((n2, n2))
            .expect("contiguous eri");
        let mut g = eri.dot(&d);
        g.mapv_inplace(|x| 0.5 * x);
        for p in 0..n {
            for q in 0..n {
                let mut k = ha.h1_eff[[p, q]];
                for r in 0..n {
                    k -= 0.5 * ha.eri_act[[p, r, r, q]];
                }
                let pq = p * n + q;
                for (kk, x) in cb.iter().enumerate() {
                    g[[pq, kk]] += k * x;
                }
            }
        }

        let mut sigma = vec![0.0; dim];
        for (ka, links) in self.alpha_links.iter().enumerate() {
            for l in links {
                for kb in 0..nb {
                    sigma[l.target * nb + kb] += l.sign * g[[l.pq, ka * nb + kb]];
                }
            }
        }
        for ka in 0..self.alpha.len() {
            for (kb, links) in self.beta_links.iter().enumerate() {
                for l in links {
                    sigma[ka * nb + l.target] += l.sign * g[[l.pq, ka * nb + kb]];
                }
            }
        }
        for (s, sign) in sigma.iter_mut().zip(&self.block_sign) {
            *s *= sign;
        }
        sigma
    }

    /// Diagonal of the Hamiltonian (without the constant energy).
    pub fn diagonal(&self, ha: &ActiveHamiltonian) -> Array1<f64> {
        Array1::from_iter((0..self.dim()).map(|i| {
            let d = self.determinant(i);
            slater_condon(ha, &d, &d)
        }))
    }

    /// Dense Hamiltonian matrix from Slater–Condon rules.
    pub fn dense(&self, ha: &ActiveHamiltonian) -> Array2<f64> {
        let dim = self.dim();
        let dets = self.determinants();
        let mut m = Array2::<f64>::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..=i {
                if dets[i].excitation_level(&dets[j]) > 2 {
                    continue;
                }
                let v = slater_condon(ha, &dets[i], &dets[j]);
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        m
    }
}

/// Antisymmetrized spin-orbital integral `⟨pq||rs⟩` over interleaved active
/// spin orbitals.
#[inline]
pub fn antisym(ha: &ActiveHamiltonian, p: usize, q: usize, r: usize, s: usize) -> f64 {
    let g = |a: usize, b: usize, c: usize, d: usize| -> f64 {
        // ⟨ab|cd⟩ = (ac|bd) δ(σa,σc) δ(σb,σd)
        if a % 2 != c % 2 || b % 2 != d % 2 {
            0.0
        } else {
            ha.eri_act[[a / 2, c / 2, b / 2, d / 2]]
        }
    };
    g(p, q, r, s) - g(p, q, s, r)
}

#[inline]
fn h1_so(ha: &ActiveHamiltonian, p: usize, q: usize) -> f64 {
    if p % 2 != q % 2 {
        0.0
    } else {
        ha.h1_eff[[p / 2, q / 2]]
    }
}

fn bits(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

/// `⟨left|Ĥ|right⟩` (without the constant energy) by Slater–Condon rules.
pub fn slater_condon(ha: &ActiveHamiltonian, left: &Determinant, right: &Determinant) -> f64 {
    let l = left.spin_mask();
    let r = right.spin_mask();
    if l.count_ones() != r.count_ones() {
        return 0.0;
    }
    let created = l & !r;
    let removed = r & !l;
    match created.count_ones() {
        0 => {
            let occ: Vec<usize> = bits(r).collect();
            let mut e = 0.0;
            for (x, &i) in occ.iter().enumerate() {
                e += h1_so(ha, i, i);
                for &j in &occ[..x] {
                    e += antisym(ha, i, j, i, j);
                }
            }
            e
        }
        1 => {
            let p = created.trailing_zeros() as usize;
            let q = removed.trailing_zeros() as usize;
            let (_, sign) = det::apply_excitation(r, &[p], &[q]).expect("valid single");
            let mut v = h1_so(ha, p, q);
            for k in bits(r & l) {
                v += antisym(ha, p, k, q, k);
            }
            sign * v
        }
        2 => {
            let mut c = bits(created);
            let (p, q) = (c.next().unwrap(), c.next().unwrap());
            let mut a = bits(removed);
            let (i, j) = (a.next().unwrap(), a.next().unwrap());
            // left = sign · a†_p a†_q a_j a_i right
            let (_, sign) = det::apply_excitation(r, &[p, q], &[i, j]).expect("valid double");
            sign * antisym(ha, p, q, i, j)
        }
        _ => 0.0,
    }
}
