//! Slater determinants as alpha/beta occupation bitmasks.
//!
//! Spin orbitals are interleaved (`α0, β0, α1, β1, …`), so spatial orbital
//! `p` owns spin orbitals `2p` (alpha) and `2p + 1` (beta). A determinant is
//! the product of creation operators applied in ascending spin-orbital order,
//! `a†_{s1} a†_{s2} … a†_{sn} |vac⟩` with `s1 < s2 < … < sn`, which is exactly
//! the Jordan–Wigner computational basis state with those bits set.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Occupation of spatial orbitals by alpha and beta electrons.
///
/// Ordering is lexicographic by `(alpha, beta)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(u64, u64)", into = "(u64, u64)")]
pub struct Determinant {
    pub alpha: u64,
    pub beta: u64,
}

impl From<(u64, u64)> for Determinant {
    fn from((alpha, beta): (u64, u64)) -> Self {
        Determinant { alpha, beta }
    }
}

impl From<Determinant> for (u64, u64) {
    fn from(d: Determinant) -> Self {
        (d.alpha, d.beta)
    }
}

impl fmt::Display for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:#b}, {:#b})", self.alpha, self.beta)
    }
}

impl Determinant {
    pub fn new(alpha: u64, beta: u64) -> Self {
        Determinant { alpha, beta }
    }

    /// Closed-shell determinant occupying the lowest `n_pairs` spatial orbitals.
    pub fn closed_shell(n_pairs: usize) -> Self {
        let m = low_bits(n_pairs);
        Determinant { alpha: m, beta: m }
    }

    pub fn n_alpha(&self) -> u32 {
        self.alpha.count_ones()
    }

    pub fn n_beta(&self) -> u32 {
        self.beta.count_ones()
    }

    pub fn n_electrons(&self) -> u32 {
        self.n_alpha() + self.n_beta()
    }

    /// Interleaved spin-orbital occupation, i.e. the Jordan–Wigner basis index.
    pub fn spin_mask(&self) -> u128 {
        interleave(self.alpha, self.beta)
    }

    pub fn from_spin_mask(mask: u128) -> Self {
        let (alpha, beta) = deinterleave(mask);
        Determinant { alpha, beta }
    }

    /// Number of spin-orbital substitutions separating two determinants with
    /// equal electron counts.
    pub fn excitation_level(&self, other: &Determinant) -> u32 {
        ((self.alpha ^ other.alpha).count_ones() + (self.beta ^ other.beta).count_ones()) / 2
    }

    /// Highest occupied spatial orbital index plus one (0 for the vacuum).
    pub fn span(&self) -> usize {
        let m = self.alpha | self.beta;
        (u64::BITS - m.leading_zeros()) as usize
    }
}

pub fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn interleave(alpha: u64, beta: u64) -> u128 {
    let mut out = 0u128;
    for p in 0..64 {
        if alpha >> p & 1 == 1 {
            out |= 1u128 << (2 * p);
        }
        if beta >> p & 1 == 1 {
            out |= 1u128 << (2 * p + 1);
        }
    }
    out
}

pub fn deinterleave(mask: u128) -> (u64, u64) {
    let mut alpha = 0u64;
    let mut beta = 0u64;
    for p in 0..64 {
        if mask >> (2 * p) & 1 == 1 {
            alpha |= 1 << p;
        }
        if mask >> (2 * p + 1) & 1 == 1 {
            beta |= 1 << p;
        }
    }
    (alpha, beta)
}

/// Apply `a_q` to an occupation bitstring. Returns the new string and the
/// Jordan–Wigner sign, or `None` if `q` is empty.
#[inline]
pub fn annihilate(mask: u128, q: usize) -> Option<(u128, f64)> {
    let bit = 1u128 << q;
    if mask & bit == 0 {
        return None;
    }
    let below = (mask & (bit - 1)).count_ones();
    Some((mask ^ bit, parity_sign(below)))
}

/// Apply `a†_p` to an occupation bitstring.
#[inline]
pub fn create(mask: u128, p: usize) -> Option<(u128, f64)> {
    let bit = 1u128 << p;
    if mask & bit != 0 {
        return None;
    }
    let below = (mask & (bit - 1)).count_ones();
    Some((mask | bit, parity_sign(below)))
}

/// Apply `a†_{c[0]} a†_{c[1]} … a_{n[…]} … a_{n[0]}`, i.e. annihilators are
/// applied first in the listed order, then creators in reverse order.
///
/// For a double excitation pass `creators = [a, b]`, `annihilators = [i, j]`
/// to realise `a†_a a†_b a_j a_i`.
pub fn apply_excitation(mask: u128, creators: &[usize], annihilators: &[usize]) -> Option<(u128, f64)> {
    let mut m = mask;
    let mut sign = 1.0;
    for &q in annihilators {
        let (next, s) = annihilate(m, q)?;
        m = next;
        sign *= s;
    }
    for &p in creators.iter().rev() {
        let (next, s) = create(m, p)?;
        m = next;
        sign *= s;
    }
    Some((m, sign))
}

#[inline]
pub fn parity_sign(n: u32) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// All `n`-bit strings with exactly `k` bits set, ascending.
pub fn strings(n: usize, k: usize) -> Vec<u64> {
    assert!(n <= 64, "at most 64 spatial orbitals");
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut v: u64 = low_bits(k);
    let limit = if n == 64 { u64::MAX } else { 1u64 << n };
    loop {
        out.push(v);
        // Gosper's hack
        let c = v & v.wrapping_neg();
        let r = v.wrapping_add(c);
        if r == 0 {
            break;
        }
        let next = (((r ^ v) >> 2) / c) | r;
        if n < 64 && next >= limit {
            break;
        }
        if next <= v {
            break;
        }
        v = next;
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Sign converting a determinant from alpha-block-first operator order
/// (`α†… β†… |vac⟩`) to interleaved ascending order.
pub fn block_to_interleaved_sign(d: &Determinant) -> f64 {
    let mut swaps = 0u32;
    let mut beta = d.beta;
    while beta != 0 {
        let q = beta.trailing_zeros();
        beta &= beta - 1;
        // alpha operators with spatial index p > q sit to the right of β_q
        let above = if q >= 63 { 0 } else { d.alpha >> (q + 1) };
        swaps += above.count_ones();
    }
    parity_sign(swaps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strings_enumerates_combinations_in_order() {
        let s = strings(4, 2);
        assert_eq!(s, vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        assert_eq!(strings(3, 0), vec![0]);
        assert_eq!(strings(3, 3), vec![0b111]);
        assert!(strings(2, 3).is_empty());
        assert_eq!(strings(10, 7).len(), binomial(10, 7));
    }

    #[test]
    fn interleave_roundtrip() {
        let d = Determinant::new(0b1011, 0b0110);
        assert_eq!(Determinant::from_spin_mask(d.spin_mask()), d);
        assert_eq!(Determinant::new(1, 0).spin_mask(), 0b01);
        assert_eq!(Determinant::new(0, 1).spin_mask(), 0b10);
    }

    #[test]
    fn excitation_signs_follow_ordering() {
        // |α0 β0⟩ -> a†_{α1} a_{α0}: removing spin orbital 0 leaves β0 below α1.
        let m = Determinant::closed_shell(1).spin_mask();
        let (out, s) = apply_excitation(m, &[2], &[0]).unwrap();
        assert_eq!(Determinant::from_spin_mask(out), Determinant::new(0b10, 0b01));
        assert_eq!(s, -1.0);
        assert!(apply_excitation(m, &[0], &[1]).is_none());
    }

    #[test]
    fn block_sign_counts_crossings() {
        // α1 β0: block order α1† β0† needs one swap to reach β0(1) α1(2).
        assert_eq!(block_to_interleaved_sign(&Determinant::new(0b10, 0b01)), -1.0);
        assert_eq!(block_to_interleaved_sign(&Determinant::new(0b01, 0b10)), 1.0);
        assert_eq!(block_to_interleaved_sign(&Determinant::closed_shell(3)), -1.0);
    }
}
