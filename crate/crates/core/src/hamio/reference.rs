use super::{HamError, MolecularHamiltonian};
use crate::det::Determinant;
use ndarray::Array2;

/// Restricted closed-shell reference determinant.
#[derive(Clone, Debug)]
pub struct Reference {
    /// Doubly occupied spatial orbitals, ascending Fock energy.
    pub occupied: Vec<usize>,
    /// Empty spatial orbitals, ascending Fock energy.
    pub virtuals: Vec<usize>,
    pub fock: Array2<f64>,
    pub e_hf: f64,
}

impl Reference {
    pub fn nocc(&self) -> usize {
        self.occupied.len()
    }

    pub fn nvir(&self) -> usize {
        self.virtuals.len()
    }

    pub fn orbital_energy(&self, p: usize) -> f64 {
        self.fock[[p, p]]
    }

    /// The reference as a determinant over the full orbital set.
    pub fn determinant(&self) -> Determinant {
        let mask = self.occupied.iter().fold(0u64, |m, &i| m | 1 << i);
        Determinant::new(mask, mask)
    }
}

/// Fock matrix `h1[p,q] + Σ_i [2(pq|ii) − (pi|iq)]` over the given doubly
/// occupied orbitals.
pub fn fock_matrix(h: &MolecularHamiltonian, occupied: &[usize]) -> Array2<f64> {
    let n = h.norb;
    let mut f = h.h1.clone();
    for p in 0..n {
        for q in 0..n {
            let mut acc = 0.0;
            for &i in occupied {
                acc += 2.0 * h.eri[[p, q, i, i]] - h.eri[[p, i, i, q]];
            }
            f[[p, q]] += acc;
        }
    }
    f
}

fn energy_order(f: &Array2<f64>, idx: &mut [usize]) {
    idx.sort_by(|&a, &b| f[[a, a]].total_cmp(&f[[b, b]]).then(a.cmp(&b)));
}

/// Iterate the occupation against the Fock diagonal until the lowest
/// `nocc` orbitals stop changing.
fn stable_occupation(h: &MolecularHamiltonian, mut occupied: Vec<usize>) -> (Vec<usize>, Array2<f64>) {
    let nocc = occupied.len();
    occupied.sort_unstable();
    let mut fock = fock_matrix(h, &occupied);
    for _ in 0..(2 * h.norb + 2) {
        let mut all: Vec<usize> = (0..h.norb).collect();
        energy_order(&fock, &mut all);
        let mut next: Vec<usize> = all[..nocc].to_vec();
        next.sort_unstable();
        if next == occupied {
            break;
        }
        occupied = next;
        fock = fock_matrix(h, &occupied);
    }
    (occupied, fock)
}

fn hf_energy(h: &MolecularHamiltonian, occupied: &[usize], fock: &Array2<f64>) -> f64 {
    h.e_core + occupied.iter().map(|&i| h.h1[[i, i]] + fock[[i, i]]).sum::<f64>()
}

/// Build the closed-shell reference. Occupation follows the Fock diagonal:
/// from a starting guess, the lowest `nelec/2` orbitals of the resulting Fock
/// diagonal are occupied and the Fock matrix rebuilt until the occupied set
/// stops changing. Two guesses are tried, the first `nelec/2` orbitals in
/// file order and the lowest `nelec/2` of the `h1` diagonal; the lower-energy
/// result wins, file order on ties.
pub fn reference_state(h: &MolecularHamiltonian) -> Result<Reference, HamError> {
    if !h.nelec.is_multiple_of(2) {
        return Err(HamError::UnsupportedReference(format!(
            "odd electron count {} (closed-shell reference required)",
            h.nelec
        )));
    }
    if h.ms2 != 0 {
        return Err(HamError::UnsupportedReference(format!(
            "MS2={} (closed-shell reference required)",
            h.ms2
        )));
    }
    let nocc = h.nelec / 2;
    let mut by_h1: Vec<usize> = (0..h.norb).collect();
    energy_order(&h.h1, &mut by_h1);
    let (mut occupied, mut fock) = stable_occupation(h, (0..nocc).collect());
    let mut e_hf = hf_energy(h, &occupied, &fock);
    let (occ2, fock2) = stable_occupation(h, by_h1[..nocc].to_vec());
    let e2 = hf_energy(h, &occ2, &fock2);
    if e2 < e_hf - 1e-12 {
        (occupied, fock, e_hf) = (occ2, fock2, e2);
    }
    let mut occupied_sorted = occupied.clone();
    energy_order(&fock, &mut occupied_sorted);
    let mut virtuals: Vec<usize> = (0..h.norb).filter(|p| !occupied.contains(p)).collect();
    energy_order(&fock, &mut virtuals);
    Ok(Reference {
        occupied: occupied_sorted,
        virtuals,
        fock,
        e_hf,
    })
}
