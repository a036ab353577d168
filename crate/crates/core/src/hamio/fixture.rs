//! Committed fixture layout: `<label>.fcidump` plus a `<label>.json` sidecar
//! recording geometry, basis and reference energies.

use super::{read_fcidump, reference_state, HamError, MolecularHamiltonian};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Geometry {
    pub bond_bohr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_deg: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sidecar {
    pub label: String,
    pub molecule: String,
    pub basis: String,
    #[serde(default)]
    pub orbitals: Option<String>,
    pub geometry: Geometry,
    pub norb: usize,
    pub nelec: usize,
    pub e_hf: f64,
    #[serde(default)]
    pub e_fci: Option<f64>,
    #[serde(default)]
    pub e_ccsd: Option<f64>,
    #[serde(default)]
    pub ccsd_converged: Option<bool>,
    #[serde(default)]
    pub e_ccsd_t: Option<f64>,
    #[serde(default)]
    pub generator: Option<String>,
}

pub fn sidecar_path(fcidump: &Path) -> PathBuf {
    fcidump.with_extension("json")
}

/// Read the sidecar next to an FCIDUMP, if there is one.
pub fn read_sidecar(fcidump: &Path) -> Result<Option<Sidecar>, HamError> {
    let path = sidecar_path(fcidump);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|source| HamError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map(Some).map_err(|e| HamError::Parse {
        line: e.line(),
        msg: format!("{}: {e}", path.display()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureCheck {
    pub path: String,
    pub e_hf: f64,
    pub e_hf_sidecar: Option<f64>,
    pub deviation: Option<f64>,
    pub ok: bool,
    pub error: Option<String>,
}

pub const HF_TOLERANCE: f64 = 1e-8;

/// Parse one fixture and compare its recomputed HF energy with the sidecar.
pub fn verify_fixture(path: &Path) -> FixtureCheck {
    let run = || -> Result<(MolecularHamiltonian, f64, Option<Sidecar>), HamError> {
        let h = read_fcidump(path)?;
        let r = reference_state(&h)?;
        Ok((h, r.e_hf, read_sidecar(path)?))
    };
    match run() {
        Ok((_, e_hf, side)) => {
            let e_side = side.as_ref().map(|s| s.e_hf);
            let deviation = e_side.map(|e| (e - e_hf).abs());
            FixtureCheck {
                path: path.display().to_string(),
                e_hf,
                e_hf_sidecar: e_side,
                deviation,
                ok: deviation.is_some_and(|d| d <= HF_TOLERANCE),
                error: if side.is_none() {
                    Some("missing sidecar".into())
                } else {
                    None
                },
            }
        }
        Err(e) => FixtureCheck {
            path: path.display().to_string(),
            e_hf: f64::NAN,
            e_hf_sidecar: None,
            deviation: None,
            ok: false,
            error: Some(e.to_string()),
        },
    }
}

/// All `*.fcidump` files in a directory, sorted by name.
pub fn list_fixtures(dir: &Path) -> Result<Vec<PathBuf>, HamError> {
    let rd = std::fs::read_dir(dir).map_err(|source| HamError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut out: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "fcidump"))
        .collect();
    out.sort();
    Ok(out)
}
