use super::{HamError, MolecularHamiltonian, Reference};
use ndarray::{Array2, Array4};
use serde::Serialize;

/// Partition of the spatial orbitals into frozen core, active and external.
///
/// Active orbitals are ordered with the reference-occupied ones first, so
/// the active reference determinant occupies the lowest
/// `n_active_elec / 2` active positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActiveSpace {
    pub frozen: Vec<usize>,
    pub active: Vec<usize>,
    pub n_active_elec: usize,
}

impl ActiveSpace {
    pub fn new(h: &MolecularHamiltonian, frozen: Vec<usize>, active: Vec<usize>) -> Result<Self, HamError> {
        let bad = |m: String| Err(HamError::InvalidSpace(m));
        for &p in frozen.iter().chain(&active) {
            if p >= h.norb {
                return bad(format!("orbital {p} out of range 0..{}", h.norb));
            }
        }
        let mut seen = vec![false; h.norb];
        for &p in frozen.iter().chain(&active) {
            if seen[p] {
                return bad(format!("orbital {p} listed twice"));
            }
            seen[p] = true;
        }
        if 2 * frozen.len() > h.nelec {
            return bad(format!("{} frozen orbitals exceed {} electrons", frozen.len(), h.nelec));
        }
        let n_active_elec = h.nelec - 2 * frozen.len();
        if n_active_elec > 2 * active.len() {
            return bad(format!(
                "{n_active_elec} active electrons do not fit in {} orbitals",
                active.len()
            ));
        }
        Ok(ActiveSpace {
            frozen,
            active,
            n_active_elec,
        })
    }

    /// Every orbital active, nothing frozen.
    pub fn full(reference: &Reference) -> Self {
        ActiveSpace {
            frozen: Vec::new(),
            active: reference.occupied.iter().chain(&reference.virtuals).copied().collect(),
            n_active_elec: 2 * reference.nocc(),
        }
    }

    /// No active orbitals: all occupied orbitals frozen, nothing tailored.
    pub fn empty(reference: &Reference) -> Self {
        ActiveSpace {
            frozen: reference.occupied.clone(),
            active: Vec::new(),
            n_active_elec: 0,
        }
    }

    pub fn n_active_orb(&self) -> usize {
        self.active.len()
    }

    /// Active orbitals doubly occupied in the reference.
    pub fn n_active_occ(&self) -> usize {
        self.n_active_elec / 2
    }

    /// Verify the occupied-first ordering against a reference.
    pub fn check_reference(&self, reference: &Reference) -> Result<(), HamError> {
        for &f in &self.frozen {
            if !reference.occupied.contains(&f) {
                return Err(HamError::InvalidSpace(format!(
                    "frozen orbital {f} is not occupied in the reference"
                )));
            }
        }
        for (pos, &p) in self.active.iter().enumerate() {
            let occ = reference.occupied.contains(&p);
            if occ != (pos < self.n_active_occ()) {
                return Err(HamError::InvalidSpace(format!(
                    "active orbital {p} at position {pos} breaks the occupied-first ordering"
                )));
            }
        }
        Ok(())
    }
}

/// Degenerate Fock energies straddling an active-space boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionWarning {
    pub boundary: &'static str,
    pub selected: usize,
    pub excluded: usize,
    pub energy: f64,
}

const DEGENERACY_TOL: f64 = 1e-9;

/// Pick the `n_elec/2` highest occupied and the `n_orb − n_elec/2` lowest
/// virtual orbitals by Fock energy; the remaining occupied orbitals are frozen.
/// Exact ties are broken by ascending orbital index.
pub fn select_active_space(
    h: &MolecularHamiltonian,
    reference: &Reference,
    n_orb: usize,
    n_elec: usize,
) -> Result<(ActiveSpace, Vec<SelectionWarning>), HamError> {
    let sel = |m: String| Err(HamError::Selection(m));
    if !n_elec.is_multiple_of(2) {
        return sel(format!("active electron count {n_elec} must be even"));
    }
    if n_elec > h.nelec {
        return sel(format!(
            "requested {n_elec} active electrons but the system has {}",
            h.nelec
        ));
    }
    let n_occ = n_elec / 2;
    if n_occ > n_orb {
        return sel(format!("{n_elec} electrons do not fit in {n_orb} orbitals"));
    }
    let n_vir = n_orb - n_occ;
    if n_vir > reference.nvir() {
        return sel(format!(
            "requested {n_vir} virtual orbitals but only {} are unoccupied",
            reference.nvir()
        ));
    }
    let e = |p: usize| reference.orbital_energy(p);
    let mut warnings = Vec::new();

    // Highest occupied first: descending energy, ties by ascending index.
    let mut occ = reference.occupied.clone();
    occ.sort_by(|&a, &b| e(b).total_cmp(&e(a)).then(a.cmp(&b)));
    if n_occ > 0 && n_occ < occ.len() && (e(occ[n_occ - 1]) - e(occ[n_occ])).abs() < DEGENERACY_TOL {
        warnings.push(SelectionWarning {
            boundary: "occupied",
            selected: occ[n_occ - 1],
            excluded: occ[n_occ],
            energy: e(occ[n_occ - 1]),
        });
    }
    let mut vir = reference.virtuals.clone();
    vir.sort_by(|&a, &b| e(a).total_cmp(&e(b)).then(a.cmp(&b)));
    if n_vir > 0 && n_vir < vir.len() && (e(vir[n_vir - 1]) - e(vir[n_vir])).abs() < DEGENERACY_TOL {
        warnings.push(SelectionWarning {
            boundary: "virtual",
            selected: vir[n_vir - 1],
            excluded: vir[n_vir],
            energy: e(vir[n_vir - 1]),
        });
    }
    for w in &warnings {
        log::warn!(
            "degenerate {} boundary at {:.10}: kept orbital {}, excluded {}",
            w.boundary,
            w.energy,
            w.selected,
            w.excluded
        );
    }

    let mut act_occ: Vec<usize> = occ[..n_occ].to_vec();
    act_occ.sort_by(|&a, &b| e(a).total_cmp(&e(b)).then(a.cmp(&b)));
    let mut frozen: Vec<usize> = occ[n_occ..].to_vec();
    frozen.sort_by(|&a, &b| e(a).total_cmp(&e(b)).then(a.cmp(&b)));
    let active: Vec<usize> = act_occ.into_iter().chain(vir[..n_vir].iter().copied()).collect();
    Ok((
        ActiveSpace {
            frozen,
            active,
            n_active_elec: n_elec,
        },
        warnings,
    ))
}

/// Active-space Hamiltonian with the frozen core folded in.
#[derive(Clone, Debug)]
pub struct ActiveHamiltonian {
    pub n_active_orb: usize,
    pub n_active_elec: usize,
    /// Core energy plus the frozen-core electronic energy.
    pub e_frozen: f64,
    pub h1_eff: Array2<f64>,
    pub eri_act: Array4<f64>,
}

impl ActiveHamiltonian {
    /// View a molecular Hamiltonian as an active Hamiltonian over all orbitals.
    pub fn from_molecular(h: &MolecularHamiltonian) -> Self {
        ActiveHamiltonian {
            n_active_orb: h.norb,
            n_active_elec: h.nelec,
            e_frozen: h.e_core,
            h1_eff: h.h1.clone(),
            eri_act: h.eri.clone(),
        }
    }
}

pub fn build_active_hamiltonian(h: &MolecularHamiltonian, space: &ActiveSpace) -> ActiveHamiltonian {
    let n = h.norb;
    // Frozen-core Fock over the full orbital set.
    let mut fc = h.h1.clone();
    for p in 0..n {
        for q in 0..n {
            let mut acc = 0.0;
            for &i in &space.frozen {
                acc += 2.0 * h.eri[[p, q, i, i]] - h.eri[[p, i, i, q]];
            }
            fc[[p, q]] += acc;
        }
    }
    let e_frozen = h.e_core + space.frozen.iter().map(|&i| h.h1[[i, i]] + fc[[i, i]]).sum::<f64>();
    let na = space.active.len();
    let act = &space.active;
    let h1_eff = Array2::from_shape_fn((na, na), |(p, q)| fc[[act[p], act[q]]]);
    let eri_act = Array4::from_shape_fn((na, na, na, na), |(p, q, r, s)| h.eri[[act[p], act[q], act[r], act[s]]]);
    ActiveHamiltonian {
        n_active_orb: na,
        n_active_elec: space.n_active_elec,
        e_frozen,
        h1_eff,
        eri_act,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamio::reference_state;

    /// Diagonal model with prescribed orbital energies and no interaction.
    fn model(energies: &[f64], nelec: usize) -> MolecularHamiltonian {
        let mut h = MolecularHamiltonian::zeros(energies.len(), nelec);
        for (p, &e) in energies.iter().enumerate() {
            h.set_h1(p, p, e);
        }
        h
    }

    #[test]
    fn n2_like_6o6e_selection() {
        let e: Vec<f64> = (0..10).map(|p| -5.0 + p as f64).collect();
        let h = model(&e, 14);
        let r = reference_state(&h).unwrap();
        let (s, w) = select_active_space(&h, &r, 6, 6).unwrap();
        assert!(w.is_empty());
        assert_eq!(s.frozen, vec![0, 1, 2, 3]);
        assert_eq!(s.active, vec![4, 5, 6, 7, 8, 9]);
        assert_eq!(s.n_active_elec, 6);
    }

    #[test]
    fn homo_lumo_selection() {
        let h = model(&[-2.0, -0.3, 0.1, 0.5], 4);
        let r = reference_state(&h).unwrap();
        let (s, _) = select_active_space(&h, &r, 2, 2).unwrap();
        assert_eq!(s.frozen, vec![0]);
        assert_eq!(s.active, vec![1, 2]);
    }

    #[test]
    fn no_frozen_when_all_electrons_active() {
        let h = model(&[-4.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0], 8);
        let r = reference_state(&h).unwrap();
        let (s, _) = select_active_space(&h, &r, 6, 8).unwrap();
        assert!(s.frozen.is_empty());
        assert_eq!(s.active, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn selection_errors() {
        let h = model(&[-1.0, 1.0], 2);
        let r = reference_state(&h).unwrap();
        assert!(select_active_space(&h, &r, 3, 2).is_err());
        assert!(select_active_space(&h, &r, 2, 4).is_err());
        assert!(select_active_space(&h, &r, 2, 1).is_err());
        assert!(select_active_space(&h, &r, 0, 2).is_err());
    }

    #[test]
    fn degenerate_boundary_breaks_ties_by_index() {
        let h = model(&[-1.0, 0.5, 0.5, 2.0], 2);
        let r = reference_state(&h).unwrap();
        let (s, w) = select_active_space(&h, &r, 2, 2).unwrap();
        assert_eq!(s.active, vec![0, 1]);
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].selected, w[0].excluded), (1, 2));
    }

    #[test]
    fn no_folding_without_frozen() {
        let mut h = model(&[-1.0, 0.2], 2);
        h.e_core = 0.3;
        h.set_eri(0, 0, 0, 0, 0.7);
        h.set_eri(0, 1, 0, 1, 0.1);
        let r = reference_state(&h).unwrap();
        let full = ActiveSpace::full(&r);
        let a = build_active_hamiltonian(&h, &full);
        assert_eq!(a.e_frozen, 0.3);
        assert_eq!(a.h1_eff, h.h1);
        assert_eq!(a.eri_act, h.eri);
    }

    #[test]
    fn frozen_core_energy_is_reference_energy_when_everything_frozen() {
        let mut h = model(&[-1.0, -0.5, 0.2], 4);
        h.set_eri(0, 0, 0, 0, 0.7);
        h.set_eri(1, 1, 1, 1, 0.6);
        h.set_eri(0, 0, 1, 1, 0.4);
        h.set_eri(0, 1, 0, 1, 0.1);
        let r = reference_state(&h).unwrap();
        let a = build_active_hamiltonian(&h, &ActiveSpace::empty(&r));
        assert!((a.e_frozen - r.e_hf).abs() < 1e-14);
    }

    #[test]
    fn invalid_spaces_rejected() {
        let h = model(&[-1.0, 0.2, 0.4], 2);
        assert!(ActiveSpace::new(&h, vec![0], vec![0, 1]).is_err());
        assert!(ActiveSpace::new(&h, vec![], vec![3]).is_err());
        assert!(ActiveSpace::new(&h, vec![0, 1], vec![]).is_err());
        let ok = ActiveSpace::new(&h, vec![], vec![0, 1]).unwrap();
        assert_eq!(ok.n_active_elec, 2);
    }
}
