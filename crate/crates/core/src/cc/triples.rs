use super::SpinSystem;
use crate::tailor::Amplitudes;
use ndarray::{Array2, Array4};

/// Perturbative triples with the fully-active (frozen) amplitudes zeroed.
pub fn triples_correction(sys: &SpinSystem, amps: &Amplitudes) -> f64 {
    let stripped = amps.without_frozen();
    triples_energy(sys, &stripped.t1, &stripped.t2)
}

/// Standard (T) energy over unique triples `i<j<k`, `a<b<c`.
pub fn triples_energy(sys: &SpinSystem, t1: &Array2<f64>, t2: &Array4<f64>) -> f64 {
    let (o, v) = (sys.nocc, sys.nvir);
    let g = |p: usize, q: usize, r: usize, s: usize| sys.g[[p, q, r, s]];
    let f = |p: usize| sys.fock[[p, p]];
    let mut e = 0.0;
    // Connected and disconnected numerators for fixed (i,j,k,a,b,c),
    // before the P(i/jk)P(a/bc) permutations.
    let connected = |i: usize, j: usize, k: usize, a: usize, b: usize, c: usize| {
        let mut x = 0.0;
        for ee in 0..v {
            x += t2[[j, k, a, ee]] * g(o + ee, i, o + b, o + c);
        }
        for m in 0..o {
            x -= t2[[i, m, b, c]] * g(m, o + a, j, k);
        }
        x
    };
    let disconnected = |i: usize, j: usize, k: usize, a: usize, b: usize, c: usize| t1[[i, a]] * g(j, k, o + b, o + c);
    let permute = |h: &dyn Fn(usize, usize, usize, usize, usize, usize) -> f64, i, j, k, a, b, c| {
        let occ = |a: usize, b: usize, c: usize| h(i, j, k, a, b, c) - h(j, i, k, a, b, c) - h(k, j, i, a, b, c);
        occ(a, b, c) - occ(b, a, c) - occ(c, b, a)
    };
    for i in 0..o {
        for j in i + 1..o {
            for k in j + 1..o {
                for a in 0..v {
                    for b in a + 1..v {
                        for c in b + 1..v {
                            let wc = permute(&connected, i, j, k, a, b, c);
                            if wc == 0.0 {
                                continue;
                            }
                            let wd = permute(&disconnected, i, j, k, a, b, c);
                            let d = f(i) + f(j) + f(k) - f(o + a) - f(o + b) - f(o + c);
                            e += wc * (wc + wd) / d;
                        }
                    }
                }
            }
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamio::{reference_state, MolecularHamiltonian};

    #[test]
    fn two_electrons_and_zero_amplitudes_give_zero() {
        let mut h = MolecularHamiltonian::zeros(3, 2);
        for p in 0..3 {
            h.set_h1(p, p, p as f64 - 1.0);
            h.set_eri(p, p, p, p, 0.5);
        }
        h.set_eri(0, 1, 0, 1, 0.1);
        let r = reference_state(&h).unwrap();
        let sys = SpinSystem::new(&h, &r);
        let mut amps = Amplitudes::zeros(2, 4);
        amps.t2.fill(0.1);
        assert_eq!(triples_correction(&sys, &amps), 0.0);

        let mut h = MolecularHamiltonian::zeros(4, 4);
        for p in 0..4 {
            h.set_h1(p, p, p as f64 - 1.0);
            for q in 0..4 {
                h.set_eri(p, p, q, q, 0.3);
                h.set_eri(p, q, p, q, 0.1);
            }
        }
        let r = reference_state(&h).unwrap();
        let sys = SpinSystem::new(&h, &r);
        assert_eq!(triples_correction(&sys, &Amplitudes::zeros(4, 4)), 0.0);
    }
}
