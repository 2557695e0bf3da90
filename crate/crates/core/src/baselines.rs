//! Reference constructions: Zadoff-Chu families, random Gaussian sets, and
//! greedy lowest-coherence subset selection.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{inner, SequenceSet, SubcarrierAssignment};
use crate::rng;

/// A family of odd-length Zadoff-Chu sequences
/// `z_r(k) = exp(−jπ·r·k(k+1)/len)`, with `shifts` cyclic shifts per root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZcFamilySpec {
    len: usize,
    roots: Vec<usize>,
    shifts: usize,
}

impl ZcFamilySpec {
    pub fn new(len: usize, roots: Vec<usize>, shifts: usize) -> Result<Self> {
        if len < 3 || len.is_multiple_of(2) {
            return Err(Error::validation("length", format!("ZC length must be odd and >= 3, got {len}")));
        }
        if roots.is_empty() {
            return Err(Error::validation("roots", "no roots given"));
        }
        if shifts == 0 {
            return Err(Error::validation("shifts", "must be at least 1"));
        }
        let mut seen = Vec::with_capacity(roots.len());
        for &r in &roots {
            if r == 0 || r >= len || gcd(r, len) != 1 {
                return Err(Error::validation(
                    "roots",
                    format!("root {r} must satisfy 1 <= r < {len} and gcd(r, {len}) = 1"),
                ));
            }
            if seen.contains(&r) {
                return Err(Error::validation("roots", format!("duplicate root {r}")));
            }
            seen.push(r);
        }
        Ok(Self { len, roots, shifts })
    }

    /// Every admissible root `1..len` coprime with `len`.
    pub fn all_roots(len: usize, shifts: usize) -> Result<Self> {
        Self::new(len, (1..len).filter(|&r| gcd(r, len) == 1).collect(), shifts)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn shifts(&self) -> usize {
        self.shifts
    }

    /// Number of sequences the family produces.
    pub fn family_size(&self) -> usize {
        self.roots.len() * self.shifts
    }
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Largest odd prime not exceeding `max_len`.
pub fn largest_prime_at_most(max_len: usize) -> Option<usize> {
    (3..=max_len).rev().find(|&n| is_prime(n))
}

/// Unnormalized root-`r` sequence, cyclically shifted left by `shift`.
pub fn zc_sequence(len: usize, root: usize, shift: usize) -> Vec<Complex64> {
    (0..len)
        .map(|i| {
            let k = ((i + shift) % len) as u128;
            // k(k+1) is even, so reduce r·k(k+1)/2 modulo len exactly.
            let half = ((root as u128 * (k * (k + 1) / 2)) % len as u128) as f64;
            Complex64::from_polar(1.0, -2.0 * PI * half / len as f64)
        })
        .collect()
}

/// All (root, shift) combinations, root-major, zero-padded to the assignment
/// length and normalized.
pub fn zc_generate(spec: &ZcFamilySpec, assignment: SubcarrierAssignment) -> Result<SequenceSet> {
    let target = assignment.len();
    if spec.len() > target {
        return Err(Error::validation(
            "length",
            format!("ZC length {} exceeds target length {target}", spec.len()),
        ));
    }
    let mut sequences = Vec::with_capacity(spec.family_size());
    for &root in spec.roots() {
        for shift in 0..spec.shifts() {
            let mut seq = zc_sequence(spec.len(), root, shift);
            seq.resize(target, Complex64::new(0.0, 0.0));
            sequences.push(seq);
        }
    }
    SequenceSet::normalized(assignment, sequences)
}

/// `count` i.i.d. standard complex Gaussian sequences, each scaled to unit norm.
pub fn random_gaussian_set(assignment: SubcarrierAssignment, count: usize, seed: u64) -> Result<SequenceSet> {
    let len = assignment.len();
    let mut r = rng::seeded(seed);
    let sequences = (0..count)
        .map(|_| (0..len).map(|_| rng::complex_gaussian(&mut r)).collect())
        .collect();
    SequenceSet::normalized(assignment, sequences)
}

/// Greedy max-pair elimination down to `target` sequences.
///
/// While too many sequences remain, take the pair with the largest `|p_mᴴp_n|`
/// (ties go to the lexicographically lowest pair) and drop whichever member
/// has the larger coherence against the remaining others (ties drop the lower
/// index). The result is not guaranteed to be the optimal subset.
pub fn select_lowest_coherence_subset(set: &SequenceSet, target: usize) -> Result<SequenceSet> {
    let count = set.count();
    if target > count {
        return Err(Error::Domain(format!(
            "cannot select {target} sequences from a set of {count}"
        )));
    }
    let mags: Vec<Vec<f64>> = (0..count)
        .map(|m| (0..count).map(|n| inner(set.sequence(m), set.sequence(n)).norm()).collect())
        .collect();
    let mut alive: Vec<usize> = (0..count).collect();
    while alive.len() > target {
        let mut worst = (0usize, 1usize, f64::NEG_INFINITY);
        for (i, &m) in alive.iter().enumerate() {
            for &n in &alive[i + 1..] {
                if mags[m][n] > worst.2 {
                    worst = (m, n, mags[m][n]);
                }
            }
        }
        let (a, b, _) = worst;
        let others = |x: usize, partner: usize| {
            alive
                .iter()
                .filter(|&&k| k != x && k != partner)
                .map(|&k| mags[x][k])
                .fold(0.0, f64::max)
        };
        let drop = if others(b, a) > others(a, b) { b } else { a };
        alive.retain(|&k| k != drop);
    }
    set.select(&alive)
}
