use super::{CcConfig, CcError, SpinSystem};
use crate::tailor::Amplitudes;
use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Array4};
use serde::Serialize;
use std::collections::VecDeque;

const DIVERGENCE_RMS: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub energy: f64,
    pub amplitude_rms: f64,
}

#[derive(Clone, Debug)]
pub struct CcResult {
    pub amps: Amplitudes,
    pub e_corr: f64,
    pub e_total: f64,
    pub converged: bool,
    pub diverged: bool,
    /// Amplitude updates performed.
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
}

struct Denominators {
    d1: Array2<f64>,
    d2: Array4<f64>,
}

impl Denominators {
    fn new(sys: &SpinSystem) -> Self {
        let (o, v) = (sys.nocc, sys.nvir);
        let f = &sys.fock;
        Denominators {
            d1: Array2::from_shape_fn((o, v), |(i, a)| f[[i, i]] - f[[o + a, o + a]]),
            d2: Array4::from_shape_fn((o, o, v, v), |(i, j, a, b)| {
                f[[i, i]] + f[[j, j]] - f[[o + a, o + a]] - f[[o + b, o + b]]
            }),
        }
    }
}

/// `RHS − D∘t` of the CCSD amplitude equations with Stanton–Gauss
/// intermediates. The full Fock matrix enters the right-hand side.
fn residuals(sys: &SpinSystem, t1: &Array2<f64>, t2: &Array4<f64>, den: &Denominators) -> (Array2<f64>, Array4<f64>) {
    let (o, v) = (sys.nocc, sys.nvir);
    let f = &sys.fock;
    let g = |p: usize, q: usize, r: usize, s: usize| sys.g[[p, q, r, s]];
    let fov = |i: usize, a: usize| f[[i, o + a]];

    let tau_t = Array4::from_shape_fn((o, o, v, v), |(i, j, a, b)| {
        t2[[i, j, a, b]] + 0.5 * (t1[[i, a]] * t1[[j, b]] - t1[[i, b]] * t1[[j, a]])
    });
    let tau = Array4::from_shape_fn((o, o, v, v), |(i, j, a, b)| {
        t2[[i, j, a, b]] + t1[[i, a]] * t1[[j, b]] - t1[[i, b]] * t1[[j, a]]
    });

    let mut fae = Array2::<f64>::zeros((v, v));
    for a in 0..v {
        for e in 0..v {
            let mut x = if a == e { 0.0 } else { f[[o + a, o + e]] };
            for m in 0..o {
                x -= 0.5 * fov(m, e) * t1[[m, a]];
                for ff in 0..v {
                    x += t1[[m, ff]] * g(m, o + a, o + ff, o + e);
                    for n in 0..o {
                        x -= 0.5 * tau_t[[m, n, a, ff]] * g(m, n, o + e, o + ff);
                    }
                }
            }
            fae[[a, e]] = x;
        }
    }
    let mut fmi = Array2::<f64>::zeros((o, o));
    for m in 0..o {
        for i in 0..o {
            let mut x = if m == i { 0.0 } else { f[[m, i]] };
            for e in 0..v {
                x += 0.5 * t1[[i, e]] * fov(m, e);
                for n in 0..o {
                    x += t1[[n, e]] * g(m, n, i, o + e);
                    for ff in 0..v {
                        x += 0.5 * tau_t[[i, n, e, ff]] * g(m, n, o + e, o + ff);
                    }
                }
            }
            fmi[[m, i]] = x;
        }
    }
    let mut fme = Array2::<f64>::zeros((o, v));
    for m in 0..o {
        for e in 0..v {
            let mut x = fov(m, e);
            for n in 0..o {
                for ff in 0..v {
                    x += t1[[n, ff]] * g(m, n, o + e, o + ff);
                }
            }
            fme[[m, e]] = x;
        }
    }

    let mut wmnij = Array4::<f64>::zeros((o, o, o, o));
    for m in 0..o {
        for n in 0..o {
            for i in 0..o {
                for j in 0..o {
                    let mut x = g(m, n, i, j);
                    for e in 0..v {
                        x += t1[[j, e]] * g(m, n, i, o + e) - t1[[i, e]] * g(m, n, j, o + e);
                        for ff in 0..v {
                            x += 0.25 * tau[[i, j, e, ff]] * g(m, n, o + e, o + ff);
                        }
                    }
                    wmnij[[m, n, i, j]] = x;
                }
            }
        }
    }
    let mut wabef = Array4::<f64>::zeros((v, v, v, v));
    for a in 0..v {
        for b in 0..v {
            for e in 0..v {
                for ff in 0..v {
                    let mut x = g(o + a, o + b, o + e, o + ff);
                    for m in 0..o {
                        x -= t1[[m, b]] * g(o + a, m, o + e, o + ff) - t1[[m, a]] * g(o + b, m, o + e, o + ff);
                        for n in 0..o {
                            x += 0.25 * tau[[m, n, a, b]] * g(m, n, o + e, o + ff);
                        }
                    }
                    wabef[[a, b, e, ff]] = x;
                }
            }
        }
    }
    let mut wmbej = Array4::<f64>::zeros((o, v, v, o));
    for m in 0..o {
        for b in 0..v {
            for e in 0..v {
                for j in 0..o {
                    let mut x = g(m, o + b, o + e, j);
                    for ff in 0..v {
                        x += t1[[j, ff]] * g(m, o + b, o + e, o + ff);
                    }
                    for n in 0..o {
                        x -= t1[[n, b]] * g(m, n, o + e, j);
                        for ff in 0..v {
                            x -= (0.5 * t2[[j, n, ff, b]] + t1[[j, ff]] * t1[[n, b]]) * g(m, n, o + e, o + ff);
                        }
                    }
                    wmbej[[m, b, e, j]] = x;
                }
            }
        }
    }

    let mut r1 = Array2::<f64>::zeros((o, v));
    for i in 0..o {
        for a in 0..v {
            let mut x = fov(i, a);
            for e in 0..v {
                x += t1[[i, e]] * fae[[a, e]];
            }
            for m in 0..o {
                x -= t1[[m, a]] * fmi[[m, i]];
                for e in 0..v {
                    x += t2[[i, m, a, e]] * fme[[m, e]];
                    for ff in 0..v {
                        x -= 0.5 * t2[[i, m, e, ff]] * g(m, o + a, o + e, o + ff);
                    }
                    for n in 0..o {
                        x -= 0.5 * t2[[m, n, a, e]] * g(n, m, o + e, i);
                    }
                }
            }
            for n in 0..o {
                for ff in 0..v {
                    x -= t1[[n, ff]] * g(n, o + a, i, o + ff);
                }
            }
            r1[[i, a]] = x - den.d1[[i, a]] * t1[[i, a]];
        }
    }

    let mut fae_t = fae.clone();
    for b in 0..v {
        for e in 0..v {
            for m in 0..o {
                fae_t[[b, e]] -= 0.5 * t1[[m, b]] * fme[[m, e]];
            }
        }
    }
    let mut fmi_t = fmi.clone();
    for m in 0..o {
        for j in 0..o {
            for e in 0..v {
                fmi_t[[m, j]] += 0.5 * t1[[j, e]] * fme[[m, e]];
            }
        }
    }

    // Terms needing P(ij)P(ab) are accumulated unsymmetrized in `x`, then
    // antisymmetrized.
    let mut x = Array4::<f64>::zeros((o, o, v, v));
    for i in 0..o {
        for j in 0..o {
            for a in 0..v {
                for b in 0..v {
                    let mut s = 0.0;
                    for m in 0..o {
                        for e in 0..v {
                            s += t2[[i, m, a, e]] * wmbej[[m, b, e, j]]
                                - t1[[i, e]] * t1[[m, a]] * g(m, o + b, o + e, j);
                        }
                    }
                    x[[i, j, a, b]] = s;
                }
            }
        }
    }
    let mut r2 = Array4::<f64>::zeros((o, o, v, v));
    for i in 0..o {
        for j in 0..o {
            for a in 0..v {
                for b in 0..v {
                    let mut s = g(i, j, o + a, o + b);
                    for e in 0..v {
                        s += t2[[i, j, a, e]] * fae_t[[b, e]] - t2[[i, j, b, e]] * fae_t[[a, e]];
                        s += t1[[i, e]] * g(o + a, o + b, o + e, j) - t1[[j, e]] * g(o + a, o + b, o + e, i);
                        for ff in 0..v {
                            s += 0.5 * tau[[i, j, e, ff]] * wabef[[a, b, e, ff]];
                        }
                    }
                    for m in 0..o {
                        s -= t2[[i, m, a, b]] * fmi_t[[m, j]] - t2[[j, m, a, b]] * fmi_t[[m, i]];
                        s -= t1[[m, a]] * g(m, o + b, i, j) - t1[[m, b]] * g(m, o + a, i, j);
                        for n in 0..o {
                            s += 0.5 * tau[[m, n, a, b]] * wmnij[[m, n, i, j]];
                        }
                    }
                    s += x[[i, j, a, b]] - x[[j, i, a, b]] - x[[i, j, b, a]] + x[[j, i, b, a]];
                    r2[[i, j, a, b]] = s - den.d2[[i, j, a, b]] * t2[[i, j, a, b]];
                }
            }
        }
    }
    (r1, r2)
}

fn unfrozen(amps: &Amplitudes) -> Vec<f64> {
    amps.t1
        .iter()
        .zip(&amps.frozen1)
        .chain(amps.t2.iter().zip(&amps.frozen2))
        .filter(|(_, &f)| !f)
        .map(|(t, _)| *t)
        .collect()
}

fn set_unfrozen(amps: &mut Amplitudes, values: &[f64]) {
    let mut it = values.iter();
    for (t, &f) in amps.t1.iter_mut().zip(&amps.frozen1) {
        if !f {
            *t = *it.next().expect("length matches");
        }
    }
    for (t, &f) in amps.t2.iter_mut().zip(&amps.frozen2) {
        if !f {
            *t = *it.next().expect("length matches");
        }
    }
}

fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
    }
}

struct Diis {
    depth: usize,
    vectors: VecDeque<(Vec<f64>, Vec<f64>)>,
}

impl Diis {
    fn extrapolate(&mut self, t: Vec<f64>, err: Vec<f64>) -> Vec<f64> {
        if self.depth == 0 {
            return t;
        }
        if self.vectors.len() == self.depth {
            self.vectors.pop_front();
        }
        self.vectors.push_back((t.clone(), err));
        let k = self.vectors.len();
        if k < 2 {
            return t;
        }
        let mut b = DMatrix::<f64>::zeros(k + 1, k + 1);
        for i in 0..k {
            for j in 0..k {
                b[(i, j)] = self.vectors[i]
                    .1
                    .iter()
                    .zip(&self.vectors[j].1)
                    .map(|(x, y)| x * y)
                    .sum();
            }
            b[(i, k)] = -1.0;
            b[(k, i)] = -1.0;
        }
        let scale = (0..k).map(|i| b[(i, i)]).fold(0.0f64, f64::max);
        if scale > 0.0 {
            for i in 0..k {
                for j in 0..k {
                    b[(i, j)] /= scale;
                }
            }
        }
        let mut rhs = DVector::<f64>::zeros(k + 1);
        rhs[k] = -1.0;
        match b.lu().solve(&rhs) {
            Some(c) if c.iter().all(|x| x.is_finite()) => {
                let mut out = vec![0.0; t.len()];
                for (ci, (vec, _)) in c.iter().zip(&self.vectors) {
                    out.iter_mut().zip(vec).for_each(|(o, x)| *o += ci * x);
                }
                out
            }
            _ => {
                self.vectors.clear();
                t
            }
        }
    }
}

fn mp2_guess(sys: &SpinSystem, init: &Amplitudes, den: &Denominators) -> Amplitudes {
    let (o, _) = (sys.nocc, sys.nvir);
    let mut amps = init.clone();
    for ((i, a), t) in amps.t1.indexed_iter_mut() {
        if !init.frozen1[[i, a]] {
            *t = sys.fock[[i, o + a]] / den.d1[[i, a]];
        }
    }
    for ((i, j, a, b), t) in amps.t2.indexed_iter_mut() {
        if !init.frozen2[[i, j, a, b]] {
            let d = den.d2[[i, j, a, b]];
            *t = if d != 0.0 { sys.g[[i, j, o + a, o + b]] / d } else { 0.0 };
        }
    }
    amps
}

/// Solve the CCSD equations for the unfrozen amplitudes; frozen entries of
/// `init` are carried over unchanged. Unfrozen entries of `init` are replaced
/// by the MP2 guess.
pub fn ccsd_solve(sys: &SpinSystem, init: &Amplitudes, cfg: &CcConfig) -> Result<CcResult, CcError> {
    sys.check(init)?;
    let den = Denominators::new(sys);
    let mut amps = mp2_guess(sys, init, &den);
    let mut e = sys.correlation_energy(&amps.t1, &amps.t2);
    let mut trace = vec![TraceRow {
        iteration: 0,
        energy: sys.e_hf + e,
        amplitude_rms: 0.0,
    }];
    if init.all_frozen() {
        return Ok(CcResult {
            amps,
            e_corr: e,
            e_total: sys.e_hf + e,
            converged: true,
            diverged: false,
            iterations: 0,
            trace,
        });
    }

    let mut diis = Diis {
        depth: cfg.diis_depth,
        vectors: VecDeque::new(),
    };
    let mut best: Option<(f64, Amplitudes, f64)> = None;
    let mut converged = false;
    let mut diverged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let (r1, r2) = residuals(sys, &amps.t1, &amps.t2, &den);
        let mut step = Amplitudes {
            t1: Array2::from_shape_fn(r1.dim(), |ix| r1[ix] / (den.d1[ix] - cfg.level_shift)),
            t2: Array4::from_shape_fn(r2.dim(), |ix| r2[ix] / (den.d2[ix] - cfg.level_shift)),
            frozen1: amps.frozen1.clone(),
            frozen2: amps.frozen2.clone(),
        };
        // Zero denominators only occur for spin-forbidden or degenerate entries.
        step.t1.mapv_inplace(|x| if x.is_finite() { x } else { 0.0 });
        step.t2.mapv_inplace(|x| if x.is_finite() { x } else { 0.0 });
        let err = unfrozen(&step);
        let update_rms = rms(&err);
        if best.as_ref().is_none_or(|b| update_rms < b.0) {
            best = Some((update_rms, amps.clone(), e));
        }
        let t_new: Vec<f64> = unfrozen(&amps).iter().zip(&err).map(|(t, d)| t + d).collect();
        let t_new = diis.extrapolate(t_new, err);
        set_unfrozen(&mut amps, &t_new);
        let e_new = sys.correlation_energy(&amps.t1, &amps.t2);
        trace.push(TraceRow {
            iteration: iterations,
            energy: sys.e_hf + e_new,
            amplitude_rms: update_rms,
        });
        let de = (e_new - e).abs();
        e = e_new;
        if !e.is_finite() || rms(&t_new) > DIVERGENCE_RMS {
            diverged = true;
            break;
        }
        if de < cfg.energy_tol && update_rms < cfg.amp_rms_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        if let Some((r, a, eb)) = best {
            log::warn!(
                "CCSD {} after {iterations} iterations; returning best iterate (update RMS {r:.3e})",
                if diverged { "diverged" } else { "did not converge" }
            );
            amps = a;
            e = eb;
        }
    }
    Ok(CcResult {
        amps,
        e_corr: e,
        e_total: sys.e_hf + e,
        converged,
        diverged,
        iterations,
        trace,
    })
}
