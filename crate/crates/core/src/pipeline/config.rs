use super::{PipelineError, Stage};
use crate::activesolver::{GradientMethod, InitialParams, VqeConfig};
use crate::cbt::{Mode, ShotBudget};
use crate::cc::CcConfig;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hf,
    Casci,
    Vqe,
    Ccsd,
    CcsdT,
    Tcc,
    TccC,
    TccTC,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Hf,
        Method::Casci,
        Method::Vqe,
        Method::Ccsd,
        Method::CcsdT,
        Method::Tcc,
        Method::TccC,
        Method::TccTC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hf => "hf",
            Method::Casci => "casci",
            Method::Vqe => "vqe",
            Method::Ccsd => "ccsd",
            Method::CcsdT => "ccsd_t",
            Method::Tcc => "tcc",
            Method::TccC => "tcc_c",
            Method::TccTC => "tcc_t_c",
        }
    }

    pub fn is_tailored(self) -> bool {
        matches!(self, Method::Tcc | Method::TccC | Method::TccTC)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL.into_iter().find(|m| m.name() == s.trim()).ok_or_else(|| {
            format!("unknown method '{s}' (expected one of hf, casci, vqe, ccsd, ccsd_t, tcc, tcc_c, tcc_t_c)")
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Casci,
    Vqe,
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "casci" => Ok(Solver::Casci),
            "vqe" => Ok(Solver::Vqe),
            _ => Err(format!("unknown solver '{s}' (expected casci or vqe)")),
        }
    }
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "sampled" => Ok(Mode::Sampled),
        "exact" => Ok(Mode::Exact),
        _ => Err(format!("unknown CBT mode '{s}' (expected sampled or exact)")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientKind {
    Analytic,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeSettings {
    pub max_iterations: usize,
    pub gradient: GradientKind,
    pub gradient_step: f64,
    pub convergence_tol: f64,
    pub perturb_initial: bool,
    pub qubit_cap: usize,
}

impl Default for VqeSettings {
    fn default() -> Self {
        let d = VqeConfig::default();
        VqeSettings {
            max_iterations: d.max_iterations,
            gradient: GradientKind::Analytic,
            gradient_step: 1e-6,
            convergence_tol: d.convergence_tol,
            perturb_initial: false,
            qubit_cap: d.qubit_cap,
        }
    }
}

impl VqeSettings {
    pub fn to_config(&self, seed: u64) -> VqeConfig {
        VqeConfig {
            max_iterations: self.max_iterations,
            gradient: match self.gradient {
                GradientKind::Analytic => GradientMethod::Analytic,
                GradientKind::FiniteDifference => GradientMethod::FiniteDifference {
                    step: self.gradient_step,
                },
            },
            convergence_tol: self.convergence_tol,
            seed,
            initial_params: if self.perturb_initial {
                InitialParams::PerturbedZero
            } else {
                InitialParams::Zero
            },
            qubit_cap: self.qubit_cap,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathList {
    One(PathBuf),
    Many(Vec<PathBuf>),
}

impl PathList {
    fn into_vec(self) -> Vec<PathBuf> {
        match self {
            PathList::One(p) => vec![p],
            PathList::Many(v) => v,
        }
    }
}

/// TOML configuration file. Every key is optional; command-line flags
/// override file values. Relative `fcidump` paths resolve against the
/// file's directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub fcidump: Option<PathList>,
    pub active: Option<[usize; 2]>,
    pub solver: Option<Solver>,
    pub cbt_mode: Option<Mode>,
    pub shots: Option<[u64; 3]>,
    pub r: Option<usize>,
    pub budgets: Option<Vec<[u64; 3]>>,
    pub methods: Option<Vec<Method>>,
    pub seed: Option<u64>,
    pub repetitions: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub write_trace: Option<bool>,
    pub casci_dim_cap: Option<usize>,
    pub cc: Option<CcConfig>,
    pub vqe: Option<VqeSettings>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::new(Stage::Config, "io", format!("{}: {e}", path.display())))?;
        let mut cfg: ConfigFile = toml::from_str(&text)
            .map_err(|e| PipelineError::new(Stage::Config, "parse", format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(list) = cfg.fcidump.take() {
            let resolved = list
                .into_vec()
                .into_iter()
                .map(|p| if p.is_relative() { base.join(p) } else { p })
                .collect();
            cfg.fcidump = Some(PathList::Many(resolved));
        }
        Ok(cfg)
    }
}

/// Command-line overrides; `None` keeps the file value or default.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub fcidump: Vec<PathBuf>,
    pub active: Option<(usize, usize)>,
    pub solver: Option<Solver>,
    pub cbt_mode: Option<Mode>,
    pub shots: Option<(u64, u64, u64)>,
    pub r: Option<usize>,
    pub methods: Option<Vec<Method>>,
    pub seed: Option<u64>,
    pub repetitions: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub fcidumps: Vec<PathBuf>,
    pub active: Option<(usize, usize)>,
    pub solver: Solver,
    pub cbt_mode: Mode,
    pub budget: ShotBudget,
    /// Budgets for the statistics harness.
    pub budgets: Vec<ShotBudget>,
    pub methods: BTreeSet<Method>,
    pub seed: u64,
    pub repetitions: usize,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub write_trace: bool,
    pub casci_dim_cap: usize,
    pub cc: CcConfig,
    pub vqe: VqeSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fcidumps: Vec::new(),
            active: None,
            solver: Solver::Casci,
            cbt_mode: Mode::Sampled,
            budget: ShotBudget::default(),
            budgets: [10_000, 100_000, 1_000_000]
                .into_iter()
                .map(|n| ShotBudget::uniform(n, 100).expect("positive"))
                .collect(),
            methods: [Method::Hf, Method::Casci, Method::Ccsd, Method::Tcc, Method::TccC].into(),
            seed: 0,
            repetitions: 1000,
            threads: None,
            out: PathBuf::from("out"),
            write_trace: false,
            casci_dim_cap: 1_000_000,
            cc: CcConfig::default(),
            vqe: VqeSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn resolve(file: Option<ConfigFile>, ov: Overrides) -> Result<Self, PipelineError> {
        let file = file.unwrap_or_default();
        let d = RunConfig::default();
        let r = ov.r.or(file.r).unwrap_or(d.budget.r);
        let shots = ov.shots.or(file.shots.map(|[a, b, c]| (a, b, c)));
        let budget = match shots {
            Some((a, b, c)) => ShotBudget::new(a, b, c, r),
            None => ShotBudget::new(d.budget.n_sample, d.budget.n_u, d.budget.n_v, r),
        }
        .map_err(|e| PipelineError::new(Stage::Config, "budget", e.to_string()))?;
        let budgets = match file.budgets {
            Some(list) => list
                .into_iter()
                .map(|[a, b, c]| ShotBudget::new(a, b, c, r))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| PipelineError::new(Stage::Config, "budget", e.to_string()))?,
            None => d.budgets.iter().map(|b| ShotBudget { r, ..*b }).collect(),
        };
        let methods: BTreeSet<Method> = match ov.methods.or(file.methods) {
            Some(m) => m.into_iter().collect(),
            None => d.methods,
        };
        if methods.is_empty() {
            return Err(PipelineError::new(
                Stage::Config,
                "methods",
                "method set is empty".into(),
            ));
        }
        let repetitions = ov.repetitions.or(file.repetitions).unwrap_or(d.repetitions);
        if repetitions == 0 {
            return Err(PipelineError::new(
                Stage::Config,
                "repetitions",
                "repetitions must be ≥ 1".into(),
            ));
        }
        let fcidumps = if ov.fcidump.is_empty() {
            file.fcidump.map(PathList::into_vec).unwrap_or_default()
        } else {
            ov.fcidump
        };
        Ok(RunConfig {
            fcidumps,
            active: ov.active.or(file.active.map(|[a, b]| (a, b))),
            solver: ov.solver.or(file.solver).unwrap_or(d.solver),
            cbt_mode: ov.cbt_mode.or(file.cbt_mode).unwrap_or(d.cbt_mode),
            budget,
            budgets,
            methods,
            seed: ov.seed.or(file.seed).unwrap_or(d.seed),
            repetitions,
            threads: ov.threads.or(file.threads),
            out: ov.out.or(file.out).unwrap_or(d.out),
            write_trace: file.write_trace.unwrap_or(d.write_trace),
            casci_dim_cap: file.casci_dim_cap.unwrap_or(d.casci_dim_cap),
            cc: file.cc.unwrap_or(d.cc),
            vqe: file.vqe.unwrap_or(d.vqe),
        })
    }

    pub fn wants(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }

    pub fn wants_tailoring(&self) -> bool {
        self.methods.iter().any(|m| m.is_tailored())
    }
}
