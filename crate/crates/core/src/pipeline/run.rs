use super::{Method, PipelineError, RunConfig, Solver, Stage};
use crate::activesolver::{casci_ground_state, uccsd_vqe, CasciOptions, WaveState};
use crate::cbt::{self, ShotBudget};
use crate::cc::{
    active_projected_energy, ccsd_solve, corrected_energy, triples_correction, CcResult, EnergyReport, SpinSystem,
    TraceRow,
};
use crate::det::Determinant;
use crate::hamio::{
    build_active_hamiltonian, read_fcidump, select_active_space, ActiveSpace, MolecularHamiltonian, Reference,
};
use crate::seed;
use crate::tailor::{ci_to_cc, embed};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

const VQE_STREAM: u64 = 0x5651_4500;

/// Everything that does not depend on the CBT seed or budget.
pub struct Prepared {
    pub cfg: RunConfig,
    pub h: MolecularHamiltonian,
    pub reference: Reference,
    pub sys: Option<SpinSystem>,
    pub space: Option<ActiveSpace>,
    /// State handed to tomography and its exact active-space energy.
    pub state: Option<(WaveState, f64)>,
    pub e_casci: Option<f64>,
    pub e_vqe: Option<f64>,
    pub ccsd: Option<CcResult>,
    pub e_ccsd_triples: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TailOutcome {
    pub e_tcc_active: f64,
    pub e_tcc: f64,
    pub e_corrected: f64,
    pub e_triples: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub discarded_ci_weight: f64,
    pub trace: Vec<TraceRow>,
}

impl Prepared {
    pub fn new(cfg: &RunConfig, path: &Path) -> Result<Self, PipelineError> {
        let h = read_fcidump(path)?;
        let reference = crate::hamio::reference_state(&h)?;
        let needs_active = cfg.wants_tailoring() || cfg.wants(Method::Casci) || cfg.wants(Method::Vqe);
        let needs_cc = cfg.wants_tailoring() || cfg.wants(Method::Ccsd) || cfg.wants(Method::CcsdT);
        let mut prepared = Prepared {
            cfg: cfg.clone(),
            sys: needs_cc.then(|| SpinSystem::new(&h, &reference)),
            h,
            reference,
            space: None,
            state: None,
            e_casci: None,
            e_vqe: None,
            ccsd: None,
            e_ccsd_triples: None,
        };
        if needs_active {
            prepared.solve_active()?;
        }
        if cfg.wants(Method::Ccsd) || cfg.wants(Method::CcsdT) {
            let sys = prepared.sys.as_ref().expect("spin system built");
            let init = crate::tailor::Amplitudes::zeros(sys.nocc, sys.nvir);
            let res = ccsd_solve(sys, &init, &cfg.cc)?;
            if cfg.wants(Method::CcsdT) {
                prepared.e_ccsd_triples = Some(triples_correction(sys, &res.amps));
            }
            prepared.ccsd = Some(res);
        }
        Ok(prepared)
    }

    fn solve_active(&mut self) -> Result<(), PipelineError> {
        let cfg = &self.cfg;
        let (n_orb, n_elec) = cfg.active.ok_or_else(|| {
            PipelineError::new(
                Stage::Config,
                "active_space",
                "an active space (n_orb, n_elec) is required for casci, vqe and tailored methods".into(),
            )
        })?;
        let (space, _) = select_active_space(&self.h, &self.reference, n_orb, n_elec)?;
        let ha = build_active_hamiltonian(&self.h, &space);
        let run_casci = cfg.wants(Method::Casci) || (cfg.wants_tailoring() && cfg.solver == Solver::Casci);
        let run_vqe = cfg.wants(Method::Vqe) || (cfg.wants_tailoring() && cfg.solver == Solver::Vqe);
        let opts = CasciOptions {
            dim_cap: cfg.casci_dim_cap,
            ..Default::default()
        };
        let casci = if run_casci {
            Some(casci_ground_state(&ha, &opts)?)
        } else {
            None
        };
        let vqe = if run_vqe {
            let r = uccsd_vqe(&ha, &cfg.vqe.to_config(seed::derive(cfg.seed, &[VQE_STREAM])))?;
            if !r.converged {
                log::warn!("VQE did not converge; using the best parameters found");
            }
            Some((r.state, r.energy))
        } else {
            None
        };
        self.e_casci = casci.as_ref().map(|c| c.1);
        self.e_vqe = vqe.as_ref().map(|v| v.1);
        self.state = match cfg.solver {
            Solver::Casci => casci,
            Solver::Vqe => vqe,
        };
        self.space = Some(space);
        Ok(())
    }

    /// Tomography, tailoring and the remaining CCSD for one seed and budget.
    pub fn tail(&self, cbt_seed: u64, budget: &ShotBudget) -> Result<TailOutcome, PipelineError> {
        let (state, e_active_qc) = self.state.as_ref().expect("tailoring requires a prepared state");
        let space = self.space.as_ref().expect("active space prepared");
        let sys = self.sys.as_ref().expect("spin system built");
        let est = cbt::reconstruct(state, budget, self.cfg.cbt_mode, cbt_seed)?;
        let fin = cbt::finalize_real(&est)?;
        let active_ref = Determinant::closed_shell(space.n_active_occ());
        let act = ci_to_cc(&fin, &active_ref, space)?;
        let init = embed(&act, space, &self.reference)?;
        let e_tcc_active = active_projected_energy(sys, &init)?;
        let res = ccsd_solve(sys, &init, &self.cfg.cc)?;
        let e_triples = self
            .cfg
            .wants(Method::TccTC)
            .then(|| triples_correction(sys, &res.amps));
        Ok(TailOutcome {
            e_tcc_active,
            e_tcc: res.e_total,
            e_corrected: corrected_energy(*e_active_qc, res.e_total, e_tcc_active),
            e_triples,
            converged: res.converged,
            iterations: res.iterations,
            discarded_ci_weight: act.discarded_weight,
            trace: res.trace,
        })
    }

    /// `converged` is false if any CC solve that ran did not converge;
    /// `iterations` counts the tailored solve when present.
    pub fn report(&self, tail: Option<&TailOutcome>) -> EnergyReport {
        let cfg = &self.cfg;
        let mut r = EnergyReport {
            e_hf: cfg.wants(Method::Hf).then_some(self.reference.e_hf),
            e_casci: if cfg.wants(Method::Casci) { self.e_casci } else { None },
            e_vqe: if cfg.wants(Method::Vqe) { self.e_vqe } else { None },
            ..Default::default()
        };
        if let Some(c) = &self.ccsd {
            if cfg.wants(Method::Ccsd) {
                r.e_ccsd = Some(c.e_total);
            }
            r.e_ccsd_t = self.e_ccsd_triples.map(|t| c.e_total + t);
            r.converged = Some(c.converged);
            r.iterations = Some(c.iterations);
        }
        if let Some(t) = tail {
            r.e_active_qc = self.state.as_ref().map(|s| s.1);
            if cfg.wants(Method::Tcc) {
                r.e_tcc = Some(t.e_tcc);
            }
            r.e_tcc_active = Some(t.e_tcc_active);
            if cfg.wants(Method::TccC) || cfg.wants(Method::TccTC) {
                r.e_corrected = Some(t.e_corrected);
            }
            r.e_triples = t.e_triples;
            r.e_corrected_t = t.e_triples.map(|x| t.e_corrected + x);
            r.converged = Some(t.converged && r.converged != Some(false));
            r.iterations = Some(t.iterations);
            r.discarded_ci_weight = Some(t.discarded_ci_weight);
        }
        r
    }

    /// Convergence traces of the CC solves that ran, labeled by solve.
    pub fn traces<'a>(&'a self, tail: Option<&'a TailOutcome>) -> Vec<(&'static str, &'a [TraceRow])> {
        let mut out = Vec::new();
        if let Some(c) = &self.ccsd {
            out.push(("ccsd", c.trace.as_slice()));
        }
        if let Some(t) = tail {
            out.push(("tcc", t.trace.as_slice()));
        }
        out
    }
}

/// Energy of one method within a report.
pub fn method_energy(r: &EnergyReport, m: Method) -> Option<f64> {
    match m {
        Method::Hf => r.e_hf,
        Method::Casci => r.e_casci,
        Method::Vqe => r.e_vqe,
        Method::Ccsd => r.e_ccsd,
        Method::CcsdT => r.e_ccsd_t,
        Method::Tcc => r.e_tcc,
        Method::TccC => r.e_corrected,
        Method::TccTC => r.e_corrected_t,
    }
}

/// Full pipeline on one FCIDUMP, keeping the intermediate state.
pub fn run_prepared(cfg: &RunConfig, path: &Path) -> Result<(Prepared, Option<TailOutcome>), PipelineError> {
    let prepared = Prepared::new(cfg, path)?;
    let tail = if cfg.wants_tailoring() {
        Some(prepared.tail(cfg.seed, &cfg.budget)?)
    } else {
        None
    };
    Ok((prepared, tail))
}

/// Full pipeline on one FCIDUMP.
pub fn run_single(cfg: &RunConfig, path: &Path) -> Result<EnergyReport, PipelineError> {
    let (prepared, tail) = run_prepared(cfg, path)?;
    Ok(prepared.report(tail.as_ref()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub point: String,
    pub path: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<EnergyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<PipelineError>,
}

fn point_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub(crate) fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    match threads {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| PipelineError::new(Stage::Config, "threads", e.to_string())),
    }
}

/// One report per geometry, in input order. Per-geometry failures are
/// recorded in the row; inconsistent orbital or electron counts across the
/// series are fatal.
pub fn run_scan(cfg: &RunConfig) -> Result<Vec<ScanRow>, PipelineError> {
    if cfg.fcidumps.is_empty() {
        return Err(PipelineError::new(
            Stage::Config,
            "fcidump",
            "no FCIDUMP files given".into(),
        ));
    }
    let mut shape = None;
    for p in &cfg.fcidumps {
        let h = read_fcidump(p)?;
        match shape {
            None => shape = Some((h.norb, h.nelec)),
            Some(s) if s != (h.norb, h.nelec) => {
                return Err(PipelineError::new(
                    Stage::Config,
                    "series",
                    format!(
                        "{} has norb={} nelec={}, series started with norb={} nelec={}",
                        p.display(),
                        h.norb,
                        h.nelec,
                        s.0,
                        s.1
                    ),
                ))
            }
            _ => {}
        }
    }
    with_pool(cfg.threads, || {
        cfg.fcidumps
            .par_iter()
            .map(|p| {
                let result = run_single(cfg, p);
                if let Err(e) = &result {
                    log::warn!("{}: {e}", p.display());
                }
                ScanRow {
                    point: point_label(p),
                    path: p.clone(),
                    report: result.as_ref().ok().cloned(),
                    error: result.err(),
                }
            })
            .collect()
    })
}
