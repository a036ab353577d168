#![allow(dead_code)]

use ndarray::{Array2, Array4};
use std::path::PathBuf;
use tailored_cc::activesolver::{casci_ground_state, CasciOptions};
use tailored_cc::cc::SpinSystem;
use tailored_cc::det;
use tailored_cc::hamio::fixture::{read_sidecar, Sidecar};
use tailored_cc::hamio::{
    build_active_hamiltonian, read_fcidump, reference_state, ActiveSpace, MolecularHamiltonian, Reference,
};
use tailored_cc::tailor::Amplitudes;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_path(label: &str) -> PathBuf {
    fixtures_dir().join(format!("{label}.fcidump"))
}

pub struct Fixture {
    pub h: MolecularHamiltonian,
    pub reference: Reference,
    pub sidecar: Sidecar,
}

pub fn load(label: &str) -> Fixture {
    let path = fixture_path(label);
    let h = read_fcidump(&path).unwrap();
    let reference = reference_state(&h).unwrap();
    let sidecar = read_sidecar(&path).unwrap().expect("sidecar present");
    Fixture { h, reference, sidecar }
}

/// Full-space FCI through the CASCI solver with everything active.
pub fn fci_energy(h: &MolecularHamiltonian, reference: &Reference) -> f64 {
    let ha = build_active_hamiltonian(h, &ActiveSpace::full(reference));
    casci_ground_state(&ha, &CasciOptions::default()).unwrap().1
}

/// Natural spin-orbital index (`2p + σ`) of each CC occupied and virtual index.
fn cc_to_natural(reference: &Reference) -> (Vec<usize>, Vec<usize>) {
    let map = |list: &[usize]| list.iter().flat_map(|&p| [2 * p, 2 * p + 1]).collect();
    (map(&reference.occupied), map(&reference.virtuals))
}

type State = Vec<f64>;

fn apply_t(state: &State, t1: &Array2<f64>, t2: &Array4<f64>, occ: &[usize], vir: &[usize], sign: f64) -> State {
    let mut out = vec![0.0; state.len()];
    let (o, v) = t1.dim();
    for (x, &cx) in state.iter().enumerate() {
        if cx == 0.0 {
            continue;
        }
        let m = x as u128;
        for i in 0..o {
            for a in 0..v {
                let t = t1[[i, a]];
                if t != 0.0 {
                    if let Some((y, s)) = det::apply_excitation(m, &[vir[a]], &[occ[i]]) {
                        out[y as usize] += sign * t * s * cx;
                    }
                }
            }
        }
        for i in 0..o {
            for j in i + 1..o {
                for a in 0..v {
                    for b in a + 1..v {
                        let t = t2[[i, j, a, b]];
                        if t != 0.0 {
                            if let Some((y, s)) = det::apply_excitation(m, &[vir[a], vir[b]], &[occ[i], occ[j]]) {
                                out[y as usize] += sign * t * s * cx;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn apply_exp_t(state: &State, t1: &Array2<f64>, t2: &Array4<f64>, occ: &[usize], vir: &[usize], sign: f64) -> State {
    let mut sum = state.clone();
    let mut term = state.clone();
    for k in 1..=64 {
        term = apply_t(&term, t1, t2, occ, vir, sign);
        term.iter_mut().for_each(|x| *x /= k as f64);
        if term.iter().all(|&x| x == 0.0) {
            break;
        }
        sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
    }
    sum
}

/// `Ĥ` in second quantization from the chemists' integrals, without `e_core`.
fn apply_h(state: &State, h: &MolecularHamiltonian) -> State {
    let n = h.norb;
    let mut out = vec![0.0; state.len()];
    for (x, &cx) in state.iter().enumerate() {
        if cx == 0.0 {
            continue;
        }
        let m = x as u128;
        for sigma in 0..2 {
            for p in 0..n {
                for q in 0..n {
                    let v = h.h1[[p, q]];
                    if v == 0.0 {
                        continue;
                    }
                    if let Some((y, s)) = det::apply_excitation(m, &[2 * p + sigma], &[2 * q + sigma]) {
                        out[y as usize] += v * s * cx;
                    }
                }
            }
        }
        for sigma in 0..2 {
            for tau in 0..2 {
                for p in 0..n {
                    for q in 0..n {
                        for r in 0..n {
                            for s_ in 0..n {
                                let v = h.eri[[p, q, r, s_]];
                                if v == 0.0 {
                                    continue;
                                }
                                // a†_{pσ} a†_{rτ} a_{sτ} a_{qσ}
                                if let Some((y, s)) = det::apply_excitation(
                                    m,
                                    &[2 * p + sigma, 2 * r + tau],
                                    &[2 * q + sigma, 2 * s_ + tau],
                                ) {
                                    out[y as usize] += 0.5 * v * s * cx;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

pub struct ResidualCheck {
    pub energy: f64,
    /// Largest projection onto an unfrozen single or double.
    pub max_unfrozen: f64,
    /// Largest projection onto a frozen single or double.
    pub max_frozen: f64,
}

/// Projections of `e^{−T} Ĥ e^{T}|0⟩` computed by brute force in the
/// determinant space; the CC equations require the unfrozen ones to vanish.
pub fn cc_residual_oracle(h: &MolecularHamiltonian, reference: &Reference, amps: &Amplitudes) -> ResidualCheck {
    assert!(2 * h.norb <= 20, "oracle limited to 20 spin orbitals");
    let (occ, vir) = cc_to_natural(reference);
    let ref_mask: u128 = occ.iter().fold(0, |m, &p| m | 1 << p);
    let mut psi = vec![0.0; 1 << (2 * h.norb)];
    psi[ref_mask as usize] = 1.0;
    let psi = apply_exp_t(&psi, &amps.t1, &amps.t2, &occ, &vir, 1.0);
    let hpsi = apply_h(&psi, h);
    let phi = apply_exp_t(&hpsi, &amps.t1, &amps.t2, &occ, &vir, -1.0);
    let (o, v) = amps.t1.dim();
    let (mut max_unfrozen, mut max_frozen) = (0.0f64, 0.0f64);
    let mut record = |frozen: bool, r: f64| {
        if frozen {
            max_frozen = max_frozen.max(r.abs());
        } else {
            max_unfrozen = max_unfrozen.max(r.abs());
        }
    };
    for (i, &oi) in occ.iter().enumerate() {
        for (a, &va) in vir.iter().enumerate() {
            if let Some((y, s)) = det::apply_excitation(ref_mask, &[va], &[oi]) {
                record(amps.frozen1[[i, a]], s * phi[y as usize]);
            }
        }
    }
    for i in 0..o {
        for j in i + 1..o {
            for a in 0..v {
                for b in a + 1..v {
                    if let Some((y, s)) = det::apply_excitation(ref_mask, &[vir[a], vir[b]], &[occ[i], occ[j]]) {
                        record(amps.frozen2[[i, j, a, b]], s * phi[y as usize]);
                    }
                }
            }
        }
    }
    ResidualCheck {
        energy: h.e_core + phi[ref_mask as usize],
        max_unfrozen,
        max_frozen,
    }
}

fn permutations3() -> [([usize; 3], f64); 6] {
    [
        ([0, 1, 2], 1.0),
        ([1, 0, 2], -1.0),
        ([2, 1, 0], -1.0),
        ([0, 2, 1], -1.0),
        ([1, 2, 0], 1.0),
        ([2, 0, 1], 1.0),
    ]
}

/// (T) summed over all index orders with explicit antisymmetrizers.
pub fn triples_oracle(sys: &SpinSystem, t1: &Array2<f64>, t2: &Array4<f64>) -> f64 {
    let (o, v) = (sys.nocc, sys.nvir);
    let g = |p: usize, q: usize, r: usize, s: usize| sys.g[[p, q, r, s]];
    let x_c = |i: usize, j: usize, k: usize, a: usize, b: usize, c: usize| {
        let mut x = 0.0;
        for e in 0..v {
            x += t2[[j, k, a, e]] * g(o + e, i, o + b, o + c);
        }
        for m in 0..o {
            x -= t2[[i, m, b, c]] * g(m, o + a, j, k);
        }
        x
    };
    let x_d = |i: usize, j: usize, k: usize, a: usize, b: usize, c: usize| t1[[i, a]] * g(j, k, o + b, o + c);
    let antisym = |f: &dyn Fn(usize, usize, usize, usize, usize, usize) -> f64, ijk: [usize; 3], abc: [usize; 3]| {
        let mut w = 0.0;
        for (p, sp) in permutations3() {
            for (q, sq) in permutations3() {
                w += sp * sq * f(ijk[p[0]], ijk[p[1]], ijk[p[2]], abc[q[0]], abc[q[1]], abc[q[2]]);
            }
        }
        0.25 * w
    };
    let mut e = 0.0;
    for i in 0..o {
        for j in 0..o {
            for k in 0..o {
                if i == j || j == k || i == k {
                    continue;
                }
                for a in 0..v {
                    for b in 0..v {
                        for c in 0..v {
                            if a == b || b == c || a == c {
                                continue;
                            }
                            let wc = antisym(&x_c, [i, j, k], [a, b, c]);
                            let wd = antisym(&x_d, [i, j, k], [a, b, c]);
                            let d = sys.fock[[i, i]] + sys.fock[[j, j]] + sys.fock[[k, k]]
                                - sys.fock[[o + a, o + a]]
                                - sys.fock[[o + b, o + b]]
                                - sys.fock[[o + c, o + c]];
                            e += wc * (wc + wd) / d;
                        }
                    }
                }
            }
        }
    }
    e / 36.0
}
