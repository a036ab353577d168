//! CI-to-CC conversion of the active-space coefficients and embedding into
//! full spin-orbital amplitude tensors.
//!
//! Spin-orbital layout of the full amplitudes: occupied index `2·k + σ` for
//! the `k`-th reference-occupied orbital (ascending Fock energy), virtual
//! index `2·k + σ` for the `k`-th virtual, with `σ = 0` for alpha. A double
//! `t2[i,j,a,b]` multiplies `a†_a a†_b a_j a_i`.

use crate::cbt::CbtEstimate;
use crate::det::{self, Determinant};
use crate::hamio::{ActiveSpace, Reference};
use ndarray::{Array2, Array4};
use thiserror::Error;

/// Reference coefficients below this make intermediate normalization meaningless.
pub const REFERENCE_COEFFICIENT_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TailorError {
    #[error("reference coefficient {coefficient:e} below floor {REFERENCE_COEFFICIENT_FLOOR:e}")]
    Undefined { coefficient: f64 },
    #[error("estimate is not finalized: determinant {0} has a complex coefficient")]
    NotFinalized(Determinant),
    #[error("determinant {0} does not match the active reference's electron counts")]
    WrongSector(Determinant),
    #[error("index mapping: {0}")]
    Mapping(String),
}

/// Spin-orbital amplitudes with masks marking the tailored (frozen) entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Amplitudes {
    pub t1: Array2<f64>,
    pub t2: Array4<f64>,
    pub frozen1: Array2<bool>,
    pub frozen2: Array4<bool>,
}

impl Amplitudes {
    pub fn zeros(nocc: usize, nvir: usize) -> Self {
        Amplitudes {
            t1: Array2::zeros((nocc, nvir)),
            t2: Array4::zeros((nocc, nocc, nvir, nvir)),
            frozen1: Array2::from_elem((nocc, nvir), false),
            frozen2: Array4::from_elem((nocc, nocc, nvir, nvir), false),
        }
    }

    pub fn nocc(&self) -> usize {
        self.t1.nrows()
    }

    pub fn nvir(&self) -> usize {
        self.t1.ncols()
    }

    pub fn n_frozen(&self) -> (usize, usize) {
        (
            self.frozen1.iter().filter(|&&f| f).count(),
            self.frozen2.iter().filter(|&&f| f).count(),
        )
    }

    pub fn all_frozen(&self) -> bool {
        self.frozen1.iter().all(|&f| f) && self.frozen2.iter().all(|&f| f)
    }

    /// Copy with every frozen entry set to zero.
    pub fn without_frozen(&self) -> Amplitudes {
        let mut out = self.clone();
        out.t1.zip_mut_with(&self.frozen1, |t, &f| {
            if f {
                *t = 0.0
            }
        });
        out.t2.zip_mut_with(&self.frozen2, |t, &f| {
            if f {
                *t = 0.0
            }
        });
        out
    }

    /// Largest magnitude among unfrozen entries.
    pub fn max_unfrozen(&self) -> f64 {
        let m1 = self
            .t1
            .iter()
            .zip(&self.frozen1)
            .filter(|(_, &f)| !f)
            .fold(0.0f64, |m, (t, _)| m.max(t.abs()));
        let m2 = self
            .t2
            .iter()
            .zip(&self.frozen2)
            .filter(|(_, &f)| !f)
            .fold(0.0f64, |m, (t, _)| m.max(t.abs()));
        m1.max(m2)
    }
}

/// Active-space amplitudes over active spin orbitals: occupied `0..n_elec`,
/// virtual `n_elec..2·n_orb` (stored with the virtual offset removed).
#[derive(Clone, Debug, PartialEq)]
pub struct ActiveAmplitudes {
    pub t1: Array2<f64>,
    pub t2: Array4<f64>,
    /// Σc² of the finalized entries beyond double substitutions.
    pub discarded_weight: f64,
}

fn holes_particles(reference: u128, d: u128) -> (Vec<usize>, Vec<usize>) {
    let bits = |m: u128| (0..128).filter(move |&p| m >> p & 1 == 1);
    (bits(reference & !d).collect(), bits(d & !reference).collect())
}

/// Intermediate-normalize the finalized coefficients and apply
/// `T1 = C1`, `T2 = C2 − ½C1²`.
pub fn ci_to_cc(
    est: &CbtEstimate,
    reference: &Determinant,
    space: &ActiveSpace,
) -> Result<ActiveAmplitudes, TailorError> {
    let o = space.n_active_elec;
    let v = 2 * space.n_active_orb() - o;
    let c0 = est.coefficient(reference).map(|c| c.re).unwrap_or(0.0);
    if c0.abs() < REFERENCE_COEFFICIENT_FLOOR {
        return Err(TailorError::Undefined { coefficient: c0 });
    }
    let ref_mask = reference.spin_mask();
    let mut c1 = Array2::<f64>::zeros((o, v));
    let mut c2 = Array4::<f64>::zeros((o, o, v, v));
    let mut discarded = 0.0;
    for (d, c) in &est.entries {
        if c.im != 0.0 {
            return Err(TailorError::NotFinalized(*d));
        }
        if d.n_alpha() != reference.n_alpha() || d.n_beta() != reference.n_beta() {
            return Err(TailorError::WrongSector(*d));
        }
        let (h, p) = holes_particles(ref_mask, d.spin_mask());
        if h.iter().chain(&p).any(|&x| x >= o + v) {
            return Err(TailorError::Mapping(format!(
                "determinant {d} outside the active space"
            )));
        }
        let x = c.re / c0;
        match h.len() {
            0 => {}
            1 => {
                let (_, s) = det::apply_excitation(ref_mask, &p, &h).expect("valid single");
                c1[[h[0], p[0] - o]] = s * x;
            }
            2 => {
                let (_, s) = det::apply_excitation(ref_mask, &p, &h).expect("valid double");
                let (i, j, a, b) = (h[0], h[1], p[0] - o, p[1] - o);
                let val = s * x;
                c2[[i, j, a, b]] = val;
                c2[[j, i, a, b]] = -val;
                c2[[i, j, b, a]] = -val;
                c2[[j, i, b, a]] = val;
            }
            _ => discarded += c.re * c.re,
        }
    }
    if discarded > 0.0 {
        log::info!("discarded CI weight beyond doubles: {discarded:.3e}");
    }
    let mut t2 = c2;
    for i in 0..o {
        for j in 0..o {
            for a in 0..v {
                for b in 0..v {
                    t2[[i, j, a, b]] -= c1[[i, a]] * c1[[j, b]] - c1[[i, b]] * c1[[j, a]];
                }
            }
        }
    }
    Ok(ActiveAmplitudes {
        t1: c1,
        t2,
        discarded_weight: discarded,
    })
}

/// Full-space spin-orbital positions of the active spin orbitals: active
/// occupied map into the occupied block, active virtual into the virtual block.
pub fn active_index_map(space: &ActiveSpace, reference: &Reference) -> Result<(Vec<usize>, Vec<usize>), TailorError> {
    let n_occ = space.n_active_occ();
    let mut occ = Vec::with_capacity(2 * n_occ);
    let mut vir = Vec::new();
    for (k, &p) in space.active.iter().enumerate() {
        let (list, target) = if k < n_occ {
            (&reference.occupied, &mut occ)
        } else {
            (&reference.virtuals, &mut vir)
        };
        let pos = list.iter().position(|&q| q == p).ok_or_else(|| {
            TailorError::Mapping(format!(
                "active orbital {p} at position {k} is not {} in the reference",
                if k < n_occ { "occupied" } else { "virtual" }
            ))
        })?;
        target.push(2 * pos);
        target.push(2 * pos + 1);
    }
    Ok((occ, vir))
}

/// Copy active amplitudes into full-space tensors and mark every
/// fully-active index combination frozen.
pub fn embed(act: &ActiveAmplitudes, space: &ActiveSpace, reference: &Reference) -> Result<Amplitudes, TailorError> {
    let (occ, vir) = active_index_map(space, reference)?;
    if act.t1.dim() != (occ.len(), vir.len()) {
        return Err(TailorError::Mapping(format!(
            "active amplitudes shaped {:?}, space needs ({}, {})",
            act.t1.dim(),
            occ.len(),
            vir.len()
        )));
    }
    let mut amps = Amplitudes::zeros(2 * reference.nocc(), 2 * reference.nvir());
    for (i, &fi) in occ.iter().enumerate() {
        for (a, &fa) in vir.iter().enumerate() {
            amps.t1[[fi, fa]] = act.t1[[i, a]];
            amps.frozen1[[fi, fa]] = true;
            for (j, &fj) in occ.iter().enumerate() {
                for (b, &fb) in vir.iter().enumerate() {
                    amps.t2[[fi, fj, fa, fb]] = act.t2[[i, j, a, b]];
                    amps.frozen2[[fi, fj, fa, fb]] = true;
                }
            }
        }
    }
    Ok(amps)
}

/// Read the active entries back out of full-space amplitudes.
pub fn extract(
    amps: &Amplitudes,
    space: &ActiveSpace,
    reference: &Reference,
) -> Result<(Array2<f64>, Array4<f64>), TailorError> {
    let (occ, vir) = active_index_map(space, reference)?;
    let t1 = Array2::from_shape_fn((occ.len(), vir.len()), |(i, a)| amps.t1[[occ[i], vir[a]]]);
    let t2 = Array4::from_shape_fn((occ.len(), occ.len(), vir.len(), vir.len()), |(i, j, a, b)| {
        amps.t2[[occ[i], occ[j], vir[a], vir[b]]]
    });
    Ok((t1, t2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbt::{finalize_real, Mode, ShotBudget};
    use crate::hamio::{reference_state, select_active_space, MolecularHamiltonian};
    use num_complex::Complex64;
    use std::collections::BTreeMap;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn estimate(entries: Vec<(Determinant, f64)>) -> CbtEstimate {
        CbtEstimate {
            reference: entries[0].0,
            entries: entries.into_iter().map(|(d, c)| (d, Complex64::new(c, 0.0))).collect(),
            budget: ShotBudget::default(),
            mode: Mode::Exact,
        }
    }

    fn space(n_orb: usize, n_elec: usize) -> ActiveSpace {
        ActiveSpace {
            frozen: vec![],
            active: (0..n_orb).collect(),
            n_active_elec: n_elec,
        }
    }

    fn det_of(mask: u128) -> Determinant {
        Determinant::from_spin_mask(mask)
    }

    /// Coefficient of the determinant reached by the operator, with its sign.
    fn excite(reference: u128, creators: &[usize], annihilators: &[usize], amp: f64) -> (Determinant, f64) {
        let (m, s) = det::apply_excitation(reference, creators, annihilators).unwrap();
        (det_of(m), s * amp)
    }

    #[test]
    fn reference_only_gives_zero_amplitudes() {
        let r = Determinant::closed_shell(1);
        let t = ci_to_cc(&estimate(vec![(r, 1.0)]), &r, &space(2, 2)).unwrap();
        assert!(t.t1.iter().all(|&x| x == 0.0));
        assert!(t.t2.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn equal_double_gives_unit_t2() {
        let r = Determinant::closed_shell(1);
        let (d, c) = excite(r.spin_mask(), &[2, 3], &[0, 1], FRAC_1_SQRT_2);
        let t = ci_to_cc(&estimate(vec![(r, FRAC_1_SQRT_2), (d, c)]), &r, &space(2, 2)).unwrap();
        assert!((t.t2[[0, 1, 0, 1]] - 1.0).abs() < 1e-15);
        assert!((t.t2[[1, 0, 0, 1]] + 1.0).abs() < 1e-15);
        assert!(t.t1.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_pair_product_subtracted() {
        // c0 = 0.9, alpha and beta singles 0.3, their opposite-spin double 0.2
        let r = Determinant::closed_shell(1);
        let m = r.spin_mask();
        let sa = excite(m, &[2], &[0], 0.3);
        let sb = excite(m, &[3], &[1], 0.3);
        let d = excite(m, &[2, 3], &[0, 1], 0.2);
        let t = ci_to_cc(&estimate(vec![(r, 0.9), sa, sb, d]), &r, &space(2, 2)).unwrap();
        assert!((t.t1[[0, 0]] - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.t1[[1, 1]] - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.t2[[0, 1, 0, 1]] - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn reference_floor() {
        let r = Determinant::closed_shell(1);
        let other = Determinant::new(2, 2);
        let e = ci_to_cc(&estimate(vec![(other, 1.0), (r, 1e-7)]), &r, &space(2, 2));
        assert!(matches!(e, Err(TailorError::Undefined { .. })));
        let e = ci_to_cc(&estimate(vec![(other, 1.0)]), &r, &space(2, 2));
        assert!(matches!(e, Err(TailorError::Undefined { .. })));
    }

    #[test]
    fn higher_excitations_are_discarded_with_weight() {
        // (4o,4e) with a single triple substitution
        let r = Determinant::closed_shell(2);
        let m = r.spin_mask();
        let t3 = excite(m, &[4, 5, 7], &[1, 2, 3], 0.1);
        let est = finalize_real(&estimate(vec![(r, 0.99), t3])).unwrap();
        let t = ci_to_cc(&est, &r, &space(4, 4)).unwrap();
        let expected = 0.01 / (0.99 * 0.99 + 0.01);
        assert!((t.discarded_weight - expected).abs() < 1e-15);
    }

    /// Intermediate-normalized CI vector of `(1 + T1 + T2 + ½T1²)|0⟩`,
    /// built by acting with the excitation operators on determinant masks.
    fn apply_exp_t(t1: &Array2<f64>, t2: &Array4<f64>, o: usize) -> BTreeMap<u128, f64> {
        let (no, nv) = t1.dim();
        let reference: u128 = (1u128 << o) - 1;
        let mut singles: Vec<(Vec<usize>, Vec<usize>, f64)> = Vec::new();
        for i in 0..no {
            for a in 0..nv {
                if t1[[i, a]] != 0.0 {
                    singles.push((vec![a + o], vec![i], t1[[i, a]]));
                }
            }
        }
        let mut out = BTreeMap::new();
        out.insert(reference, 1.0);
        let add = |out: &mut BTreeMap<u128, f64>, m: u128, v: f64| *out.entry(m).or_insert(0.0) += v;
        for (c, a, t) in &singles {
            if let Some((m, s)) = det::apply_excitation(reference, c, a) {
                add(&mut out, m, s * t);
            }
        }
        // T2 = ¼ Σ t_ijab a†_a a†_b a_j a_i over all index orders
        for i in 0..no {
            for j in 0..no {
                for a in 0..nv {
                    for b in 0..nv {
                        let t = t2[[i, j, a, b]];
                        if t == 0.0 {
                            continue;
                        }
                        if let Some((m, s)) = det::apply_excitation(reference, &[a + o, b + o], &[i, j]) {
                            add(&mut out, m, 0.25 * s * t);
                        }
                    }
                }
            }
        }
        for (c1, a1, x) in &singles {
            for (c2, a2, y) in &singles {
                let Some((m1, s1)) = det::apply_excitation(reference, c2, a2) else {
                    continue;
                };
                if let Some((m, s)) = det::apply_excitation(m1, c1, a1) {
                    add(&mut out, m, 0.5 * s1 * s * x * y);
                }
            }
        }
        out
    }

    #[test]
    fn reconstruction_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let (n_orb, n_elec) = (4, 4);
        let (o, v) = (n_elec, 2 * n_orb - n_elec);
        for _ in 0..10 {
            let mut t1 = Array2::zeros((o, v));
            let mut t2 = Array4::zeros((o, o, v, v));
            for i in 0..o {
                for a in 0..v {
                    if i % 2 == a % 2 {
                        t1[[i, a]] = rng.random_range(-0.2..0.2);
                    }
                }
            }
            for i in 0..o {
                for j in i + 1..o {
                    for a in 0..v {
                        for b in a + 1..v {
                            if (i % 2 + j % 2) == (a % 2 + b % 2) && (i % 2 == a % 2 || i % 2 == b % 2) {
                                let x = rng.random_range(-0.2..0.2);
                                t2[[i, j, a, b]] = x;
                                t2[[j, i, a, b]] = -x;
                                t2[[i, j, b, a]] = -x;
                                t2[[j, i, b, a]] = x;
                            }
                        }
                    }
                }
            }
            let ci = apply_exp_t(&t1, &t2, o);
            let r = Determinant::closed_shell(n_elec / 2);
            let mut entries: Vec<(Determinant, f64)> = ci
                .iter()
                .filter(|(m, _)| (**m ^ r.spin_mask()).count_ones() <= 4)
                .map(|(m, c)| (det_of(*m), *c))
                .collect();
            let norm = entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            entries.iter_mut().for_each(|e| e.1 /= norm);
            let t = ci_to_cc(&estimate(entries), &r, &space(n_orb, n_elec)).unwrap();
            let d1 = (&t.t1 - &t1).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let d2 = (&t.t2 - &t2).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(d1 < 1e-12 && d2 < 1e-12, "{d1} {d2}");
        }
    }

    fn lih_like() -> (MolecularHamiltonian, Reference) {
        let mut h = MolecularHamiltonian::zeros(6, 4);
        for p in 0..6 {
            h.set_h1(p, p, -1.0 + 0.4 * p as f64);
            h.set_eri(p, p, p, p, 0.5);
        }
        let r = reference_state(&h).unwrap();
        (h, r)
    }

    #[test]
    fn lih_two_two_frozen_counts() {
        let (h, reference) = lih_like();
        let (space, _) = select_active_space(&h, &reference, 2, 2).unwrap();
        let act = ActiveAmplitudes {
            t1: Array2::zeros((2, 2)),
            t2: Array4::from_shape_fn((2, 2, 2, 2), |(i, j, a, b)| match (i, j, a, b) {
                (0, 1, 0, 1) | (1, 0, 1, 0) => 0.1,
                (1, 0, 0, 1) | (0, 1, 1, 0) => -0.1,
                _ => 0.0,
            }),
            discarded_weight: 0.0,
        };
        let amps = embed(&act, &space, &reference).unwrap();
        let spin_allowed_1 = amps
            .frozen1
            .indexed_iter()
            .filter(|((i, a), &f)| f && i % 2 == a % 2)
            .count();
        assert_eq!(spin_allowed_1, 2);
        // One spatial double: its four antisymmetric spin-orbital images.
        let nonzero_2: Vec<_> = amps
            .t2
            .indexed_iter()
            .filter(|(_, &t)| t != 0.0)
            .map(|(ix, _)| ix)
            .collect();
        assert_eq!(nonzero_2.len(), 4);
        assert!(nonzero_2.iter().all(|&(i, j, a, b)| amps.frozen2[[i, j, a, b]]));
        // HOMO is occupied index 1 (spin orbitals 2, 3), LUMO virtual index 0.
        assert_eq!(amps.t2[[2, 3, 0, 1]], 0.1);
        let (t1, t2) = extract(&amps, &space, &reference).unwrap();
        assert_eq!(t1, act.t1);
        assert_eq!(t2, act.t2);
    }

    #[test]
    fn full_space_freezes_everything() {
        let (_, reference) = lih_like();
        let space = ActiveSpace::full(&reference);
        let act = ActiveAmplitudes {
            t1: Array2::zeros((4, 8)),
            t2: Array4::zeros((4, 4, 8, 8)),
            discarded_weight: 0.0,
        };
        assert!(embed(&act, &space, &reference).unwrap().all_frozen());
        let empty = ActiveSpace::empty(&reference);
        let act = ActiveAmplitudes {
            t1: Array2::zeros((0, 0)),
            t2: Array4::zeros((0, 0, 0, 0)),
            discarded_weight: 0.0,
        };
        assert_eq!(embed(&act, &empty, &reference).unwrap().n_frozen(), (0, 0));
    }
}
