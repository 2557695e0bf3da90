//! Signal and metric layer: subcarrier assignments, sequence sets, PAPR probe
//! vectors, mutual coherence and the Welch bound.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `‖p‖ = 1` accepted when building a [`SequenceSet`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-9;

/// Default number of subcarriers and time-domain samples.
pub const DEFAULT_GRID: usize = 1024;

/// `aᴴb`, summed in ascending index order.
#[inline]
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

#[inline]
pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Scales `v` to unit norm in place. Returns `false` (leaving `v` untouched)
/// when `v` is zero.
pub fn normalize(v: &mut [Complex64]) -> bool {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|z| *z /= n);
    true
}

/// Which `L` of the `N_C` subcarriers carry the sequence entries, plus the
/// number of time-domain samples `N_S` used to discretize the PAPR.
///
/// Indices are 1-based: entry `l` of a sequence rides on subcarrier `indices[l]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcarrierAssignment {
    indices: Vec<usize>,
    n_subcarriers: usize,
    n_samples: usize,
}

impl SubcarrierAssignment {
    pub fn new(indices: Vec<usize>, n_subcarriers: usize, n_samples: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::validation("subcarriers", "index vector is empty"));
        }
        if n_samples < n_subcarriers {
            return Err(Error::validation(
                "n_samples",
                format!("N_S = {n_samples} must be at least N_C = {n_subcarriers}"),
            ));
        }
        let mut seen = vec![false; n_subcarriers + 1];
        for (l, &c) in indices.iter().enumerate() {
            if c == 0 || c > n_subcarriers {
                return Err(Error::validation(
                    "subcarriers",
                    format!("index c({}) = {c} is outside 1..={n_subcarriers}", l + 1),
                ));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::validation(
                    "subcarriers",
                    format!("duplicate subcarrier index {c}"),
                ));
            }
        }
        Ok(Self { indices, n_subcarriers, n_samples })
    }

    /// `c = [1, 2, ..., L]`.
    pub fn contiguous(len: usize, n_subcarriers: usize, n_samples: usize) -> Result<Self> {
        Self::strided(len, 1, n_subcarriers, n_samples)
    }

    /// `c = [k, 2k, ..., Lk]`.
    pub fn strided(len: usize, stride: usize, n_subcarriers: usize, n_samples: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::validation("subcarriers", "stride must be positive"));
        }
        Self::new((1..=len).map(|l| l * stride).collect(), n_subcarriers, n_samples)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Sequence length `L`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Same subcarriers, different sampling grid.
    pub fn with_samples(&self, n_samples: usize) -> Result<Self> {
        Self::new(self.indices.clone(), self.n_subcarriers, n_samples)
    }
}

/// `N` unit-norm complex sequences of common length `L`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    len: usize,
    data: Vec<Complex64>,
    assignment: SubcarrierAssignment,
}

impl SequenceSet {
    /// Builds a set from already-normalized sequences.
    pub fn new(assignment: SubcarrierAssignment, sequences: Vec<Vec<Complex64>>) -> Result<Self> {
        let len = assignment.len();
        let mut data = Vec::with_capacity(len * sequences.len());
        for seq in &sequences {
            if seq.len() != len {
                return Err(Error::Dimension { expected: len, actual: seq.len() });
            }
            data.extend_from_slice(seq);
        }
        Self::from_flat(assignment, data)
    }

    /// Builds a set from arbitrary nonzero vectors, scaling each to unit norm.
    pub fn normalized(assignment: SubcarrierAssignment, mut sequences: Vec<Vec<Complex64>>) -> Result<Self> {
        for (n, seq) in sequences.iter_mut().enumerate() {
            if !normalize(seq) {
                return Err(Error::validation("sequences", format!("sequence {n} is zero")));
            }
        }
        Self::new(assignment, sequences)
    }

    pub(crate) fn from_flat(assignment: SubcarrierAssignment, data: Vec<Complex64>) -> Result<Self> {
        let len = assignment.len();
        if len < 2 {
            return Err(Error::validation("L", format!("sequence length must be at least 2, got {len}")));
        }
        if !data.len().is_multiple_of(len) {
            return Err(Error::Dimension { expected: len, actual: data.len() % len });
        }
        let count = data.len() / len;
        if count < 2 {
            return Err(Error::validation("N", format!("need at least 2 sequences, got {count}")));
        }
        for (n, seq) in data.chunks_exact(len).enumerate() {
            let nrm = norm(seq);
            if (nrm - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(Error::validation(
                    "sequences",
                    format!("sequence {n} has norm {nrm}, expected 1"),
                ));
            }
        }
        if count <= len {
            log::warn!("sequence set has N = {count} <= L = {len}; the Welch bound is not informative");
        }
        Ok(Self { len, data, assignment })
    }

    /// Sequence length `L`.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Number of sequences `N`.
    pub fn count(&self) -> usize {
        self.data.len() / self.len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn sequence(&self, n: usize) -> &[Complex64] {
        &self.data[n * self.len..(n + 1) * self.len]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.data.chunks_exact(self.len)
    }

    pub fn assignment(&self) -> &SubcarrierAssignment {
        &self.assignment
    }

    pub fn as_flat(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn as_flat_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Re-labels the set with a different assignment of the same length.
    pub fn with_assignment(mut self, assignment: SubcarrierAssignment) -> Result<Self> {
        if assignment.len() != self.len {
            return Err(Error::Dimension { expected: self.len, actual: assignment.len() });
        }
        self.assignment = assignment;
        Ok(self)
    }

    /// Keeps the sequences at `keep`, in that order.
    pub fn select(&self, keep: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(keep.len() * self.len);
        for &n in keep {
            if n >= self.count() {
                return Err(Error::Domain(format!("sequence index {n} out of range")));
            }
            data.extend_from_slice(self.sequence(n));
        }
        Self::from_flat(self.assignment.clone(), data)
    }
}

/// The `N_S` unit-norm probes `w_s` with `w_s(l) = exp(-2πj·c(l)·(s-1)/N_S)/√L`.
///
/// `L·|w_sᴴp|²` is the instantaneous-to-average power ratio of the multicarrier
/// signal carrying `p` at sample `s`.
#[derive(Debug, Clone)]
pub struct PaprProbeSet {
    assignment: SubcarrierAssignment,
    probes: Vec<Complex64>,
}

impl PaprProbeSet {
    pub fn new(assignment: &SubcarrierAssignment) -> Self {
        let len = assignment.len();
        let ns = assignment.n_samples();
        let scale = 1.0 / (len as f64).sqrt();
        let mut probes = Vec::with_capacity(ns * len);
        for s in 0..ns {
            for &c in assignment.indices() {
                // Reduce the phase index exactly before going to floating point so
                // grids nested by a power of two produce bit-identical probes.
                let k = ((c as u128 * s as u128) % ns as u128) as f64;
                let angle = TAU * k / ns as f64;
                probes.push(Complex64::from_polar(scale, -angle));
            }
        }
        Self { assignment: assignment.clone(), probes }
    }

    pub fn assignment(&self) -> &SubcarrierAssignment {
        &self.assignment
    }

    /// Sequence length `L`.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }

    /// Number of probes `N_S`.
    pub fn count(&self) -> usize {
        self.assignment.n_samples()
    }

    /// Probe `s` (0-based, i.e. sample `s + 1`).
    pub fn probe(&self, s: usize) -> &[Complex64] {
        let len = self.len();
        &self.probes[s * len..(s + 1) * len]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.probes.chunks_exact(self.len())
    }

    /// Largest `|w_sᴴp|` over all probes.
    pub fn peak_magnitude(&self, seq: &[Complex64]) -> f64 {
        self.iter().map(|w| inner(w, seq).norm()).fold(0.0, f64::max)
    }
}

/// Discretized PAPR `L·max_s |w_sᴴp|²`.
pub fn papr(seq: &[Complex64], probes: &PaprProbeSet) -> Result<f64> {
    if seq.len() != probes.len() {
        return Err(Error::Dimension { expected: probes.len(), actual: seq.len() });
    }
    let peak = probes.peak_magnitude(seq);
    Ok(seq.len() as f64 * peak * peak)
}

/// Mutual coherence: the largest `|p_mᴴp_n|` over distinct pairs.
pub fn coherence(set: &SequenceSet) -> Result<f64> {
    let count = set.count();
    if count < 2 {
        return Err(Error::Domain(format!("coherence needs at least 2 sequences, got {count}")));
    }
    Ok(max_cross_magnitude(set.as_flat(), set.len()))
}

pub(crate) fn max_cross_magnitude(data: &[Complex64], len: usize) -> f64 {
    let count = data.len() / len;
    (0..count)
        .into_par_iter()
        .map(|m| {
            let pm = &data[m * len..(m + 1) * len];
            ((m + 1)..count)
                .map(|n| inner(pm, &data[n * len..(n + 1) * len]).norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Welch lower bound `√((N−L)/(L(N−1)))` on the coherence of `N` unit-norm
/// sequences of length `L`.
pub fn welch_bound(len: usize, count: usize) -> Result<f64> {
    if len == 0 {
        return Err(Error::Domain("sequence length must be positive".into()));
    }
    if count <= len {
        return Err(Error::Domain(format!(
            "Welch bound needs N > L (got L = {len}, N = {count})"
        )));
    }
    let (l, n) = (len as f64, count as f64);
    Ok(((n - l) / (l * (n - 1.0))).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub coherence: f64,
    pub papr_per_sequence: Vec<f64>,
    pub max_papr: f64,
    /// `None` when `N ≤ L`.
    pub welch_bound: Option<f64>,
}

pub fn evaluate(set: &SequenceSet, probes: &PaprProbeSet) -> Result<Metrics> {
    if probes.len() != set.len() {
        return Err(Error::Dimension { expected: set.len(), actual: probes.len() });
    }
    let coherence = coherence(set)?;
    let papr_per_sequence = set
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|seq| papr(seq, probes))
        .collect::<Result<Vec<_>>>()?;
    let max_papr = papr_per_sequence.iter().copied().fold(0.0, f64::max);
    Ok(Metrics {
        coherence,
        papr_per_sequence,
        max_papr,
        welch_bound: welch_bound(set.len(), set.count()).ok(),
    })
}
