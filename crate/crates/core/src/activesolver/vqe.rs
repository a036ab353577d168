//! Statevector simulation of the disentangled UCCSD ansatz under the
//! Jordan–Wigner mapping, optimized with BFGS.

use super::{expectation, CiSpace, SolverError, WaveState};
use crate::det::{self, Determinant};
use crate::hamio::ActiveHamiltonian;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fermionic excitation `a†_{c0} a†_{c1} … a_{a1} a_{a0}` on qubit
/// (spin-orbital) indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Excitation {
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

impl Excitation {
    fn masks(&self) -> (u128, u128) {
        let c = self.creators.iter().fold(0u128, |m, &p| m | 1 << p);
        let a = self.annihilators.iter().fold(0u128, |m, &p| m | 1 << p);
        (c, a)
    }
}

/// Spin-conserving excitations out of the closed-shell reference:
/// doubles first, then singles, each lexicographic in `(i, j, a, b)`.
pub fn uccsd_excitations(n_orb: usize, n_elec: usize) -> Vec<Excitation> {
    let nso = 2 * n_orb;
    let occ: Vec<usize> = (0..n_elec).collect();
    let vir: Vec<usize> = (n_elec..nso).collect();
    let mut doubles = Vec::new();
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in vir.iter().enumerate() {
                for &b in &vir[y + 1..] {
                    let alpha_in = (i % 2 == 0) as u8 + (j % 2 == 0) as u8;
                    let alpha_out = (a % 2 == 0) as u8 + (b % 2 == 0) as u8;
                    if alpha_in == alpha_out {
                        doubles.push(Excitation {
                            creators: vec![a, b],
                            annihilators: vec![i, j],
                        });
                    }
                }
            }
        }
    }
    let mut singles = Vec::new();
    for &i in &occ {
        for &a in &vir {
            if i % 2 == a % 2 {
                singles.push(Excitation {
                    creators: vec![a],
                    annihilators: vec![i],
                });
            }
        }
    }
    doubles.extend(singles);
    doubles
}

#[derive(Clone, Debug)]
pub struct Statevector {
    pub n_qubits: usize,
    pub amps: Vec<Complex64>,
}

impl Statevector {
    pub fn basis_state(n_qubits: usize, d: &Determinant) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[d.spin_mask() as usize] = Complex64::new(1.0, 0.0);
        Statevector { n_qubits, amps }
    }

    fn pairs(&self, exc: &Excitation) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let (cm, am) = exc.masks();
        let exc = exc.clone();
        (0..self.amps.len()).filter_map(move |x| {
            let xm = x as u128;
            if xm & am != am || xm & cm != 0 {
                return None;
            }
            let (y, s) = det::apply_excitation(xm, &exc.creators, &exc.annihilators)?;
            Some((x, y as usize, s))
        })
    }

    /// Apply `exp(θ (τ − τ†))`.
    pub fn rotate(&mut self, exc: &Excitation, theta: f64) {
        let (c, s) = (theta.cos(), theta.sin());
        let pairs: Vec<_> = self.pairs(exc).collect();
        for (x, y, sign) in pairs {
            let px = self.amps[x];
            let py = self.amps[y];
            self.amps[x] = px * c - py * (sign * s);
            self.amps[y] = py * c + px * (sign * s);
        }
    }

    /// `(τ − τ†) |ψ⟩`.
    pub fn generator(&self, exc: &Excitation) -> Statevector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (x, y, sign) in self.pairs(exc) {
            out[x] -= self.amps[y] * sign;
            out[y] += self.amps[x] * sign;
        }
        Statevector {
            n_qubits: self.n_qubits,
            amps: out,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitudes of the given particle-number sector and the weight left
    /// outside it.
    pub fn extract(&self, space: &CiSpace) -> (WaveState, f64) {
        let dets = space.determinants();
        let amps: Vec<Complex64> = dets.iter().map(|d| self.amps[d.spin_mask() as usize]).collect();
        let inside: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let leakage = (self.norm_sqr() - inside).max(0.0);
        (WaveState::new(dets, amps), leakage)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradientMethod {
    Analytic,
    FiniteDifference { step: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialParams {
    Zero,
    /// Uniform perturbation of magnitude ≤ 1e-2 drawn from `seed`.
    PerturbedZero,
}

#[derive(Clone, Debug)]
pub struct VqeConfig {
    pub max_iterations: usize,
    pub gradient: GradientMethod,
    pub convergence_tol: f64,
    pub seed: u64,
    pub initial_params: InitialParams,
    pub qubit_cap: usize,
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            max_iterations: 500,
            gradient: GradientMethod::Analytic,
            convergence_tol: 1e-10,
            seed: 0,
            initial_params: InitialParams::Zero,
            qubit_cap: 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VqeResult {
    pub state: WaveState,
    pub energy: f64,
    pub params: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub leakage: f64,
    /// Energy after each accepted optimizer step, starting with the initial point.
    pub energy_trace: Vec<f64>,
}

struct Problem<'a> {
    ha: &'a ActiveHamiltonian,
    space: CiSpace,
    sector: Vec<usize>,
    excitations: Vec<Excitation>,
    reference: Determinant,
    n_qubits: usize,
}

impl Problem<'_> {
    fn prepare(&self, params: &[f64]) -> Statevector {
        let mut sv = Statevector::basis_state(self.n_qubits, &self.reference);
        for (exc, &t) in self.excitations.iter().zip(params) {
            sv.rotate(exc, t);
        }
        sv
    }

    fn sector_parts(&self, sv: &Statevector) -> (Vec<f64>, Vec<f64>) {
        let re = self.sector.iter().map(|&i| sv.amps[i].re).collect();
        let im = self.sector.iter().map(|&i| sv.amps[i].im).collect();
        (re, im)
    }

    fn energy(&self, params: &[f64]) -> f64 {
        let sv = self.prepare(params);
        let (re, im) = self.sector_parts(&sv);
        expectation(&self.space, self.ha, &re, &im) + self.ha.e_frozen
    }

    /// Energy and adjoint-mode gradient.
    fn energy_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let mut phi = self.prepare(params);
        let (re, im) = self.sector_parts(&phi);
        let sr = self.space.sigma(self.ha, &re);
        let si = self.space.sigma(self.ha, &im);
        let e = re.iter().zip(&sr).map(|(a, b)| a * b).sum::<f64>()
            + im.iter().zip(&si).map(|(a, b)| a * b).sum::<f64>()
            + self.ha.e_frozen;
        let mut lambda = Statevector {
            n_qubits: self.n_qubits,
            amps: vec![Complex64::new(0.0, 0.0); phi.amps.len()],
        };
        for (k, &i) in self.sector.iter().enumerate() {
            lambda.amps[i] = Complex64::new(sr[k], si[k]);
        }
        let mut grad = vec![0.0; params.len()];
        for k in (0..params.len()).rev() {
            let exc = &self.excitations[k];
            let g_phi = phi.generator(exc);
            let overlap: Complex64 = lambda.amps.iter().zip(&g_phi.amps).map(|(l, g)| l.conj() * g).sum();
            grad[k] = 2.0 * overlap.re;
            phi.rotate(exc, -params[k]);
            lambda.rotate(exc, -params[k]);
        }
        (e, grad)
    }

    fn evaluate(&self, params: &[f64], method: GradientMethod) -> (f64, Vec<f64>) {
        match method {
            GradientMethod::Analytic => self.energy_and_gradient(params),
            GradientMethod::FiniteDifference { step } => {
                let e = self.energy(params);
                let mut p = params.to_vec();
                let grad = (0..params.len())
                    .map(|k| {
                        p[k] = params[k] + step;
                        let up = self.energy(&p);
                        p[k] = params[k] - step;
                        let down = self.energy(&p);
                        p[k] = params[k];
                        (up - down) / (2.0 * step)
                    })
                    .collect();
                (e, grad)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimize the UCCSD energy of the active Hamiltonian.
pub fn uccsd_vqe(ha: &ActiveHamiltonian, cfg: &VqeConfig) -> Result<VqeResult, SolverError> {
    let n_qubits = 2 * ha.n_active_orb;
    if n_qubits > cfg.qubit_cap {
        return Err(SolverError::QubitCap {
            qubits: n_qubits,
            cap: cfg.qubit_cap,
        });
    }
    let space = CiSpace::for_hamiltonian(ha)?;
    let sector = space.determinants().iter().map(|d| d.spin_mask() as usize).collect();
    let problem = Problem {
        ha,
        space,
        sector,
        excitations: uccsd_excitations(ha.n_active_orb, ha.n_active_elec),
        reference: Determinant::closed_shell(ha.n_active_elec / 2),
        n_qubits,
    };
    let n = problem.excitations.len();
    let mut x: Vec<f64> = match cfg.initial_params {
        InitialParams::Zero => vec![0.0; n],
        InitialParams::PerturbedZero => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..n).map(|_| rng.random_range(-1e-2..1e-2)).collect()
        }
    };
    let grad_tol = (cfg.convergence_tol.sqrt() * 0.1).max(1e-12);

    let (mut f, mut g) = problem.evaluate(&x, cfg.gradient);
    let mut trace = vec![f];
    let mut hinv = vec![vec![0.0; n]; n];
    for (i, row) in hinv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut converged = n == 0 || max_abs(&g) < grad_tol;
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iterations {
        iterations += 1;
        let mut p: Vec<f64> = hinv.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            for (i, row) in hinv.iter_mut().enumerate() {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[i] = 1.0;
            }
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
        }
        // Armijo backtracking
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
            let (ft, gt) = problem.evaluate(&trial, cfg.gradient);
            if ft <= f + 1e-4 * alpha * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else {
            // No descent possible at machine precision.
            converged = max_abs(&g) < grad_tol.sqrt();
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let hy: Vec<f64> = hinv.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        let df = (f - fnew).abs();
        x = xn;
        f = fnew;
        g = gn;
        trace.push(f);
        converged = max_abs(&g) < grad_tol || (df < cfg.convergence_tol && max_abs(&g) < cfg.convergence_tol.sqrt());
    }
    if !converged {
        log::warn!(
            "VQE stopped after {iterations} iterations without converging (|g|∞ = {:.3e})",
            max_abs(&g)
        );
    }

    let sv = problem.prepare(&x);
    let (mut state, leakage) = sv.extract(&problem.space);
    state.normalize();
    Ok(VqeResult {
        state,
        energy: f,
        params: x,
        converged,
        iterations,
        leakage,
        energy_trace: trace,
    })
}
