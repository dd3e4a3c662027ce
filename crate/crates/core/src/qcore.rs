//! Dense complex linear algebra over multi-qubit states and operators.
//!
//! Qubit `0` is the most significant bit of an amplitude index, so the
//! string `|q0 q1 ... q(m-1)>` reads directly as the binary index.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::par;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for exact structural identities.
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Tolerance for protocol-level fidelities and probabilities.
pub const PROTOCOL_TOL: f64 = 1e-10;

fn log2_exact(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[inline]
fn bit(index: usize, qubit: usize, num_qubits: usize) -> usize {
    (index >> (num_qubits - 1 - qubit)) & 1
}

/// Tensor product with the left operand's qubits as the more significant ones.
pub trait Kron {
    fn kron(&self, other: &Self) -> Self;
}

pub fn kron<T: Kron>(a: &T, b: &T) -> T {
    a.kron(b)
}

/// A dense pure state over `num_qubits` qubits.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector[{}q](", self.num_qubits)?;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                write!(
                    f,
                    " {:+.6}{:+.6}i|{:0w$b}>",
                    a.re,
                    a.im,
                    i,
                    w = self.num_qubits
                )?;
            }
        }
        write!(f, " )")
    }
}

impl StateVector {
    pub fn new(num_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        let expected = 1usize
            .checked_shl(num_qubits as u32)
            .ok_or(Error::NotPowerOfTwo(0))?;
        if num_qubits == 0 || amps.len() != expected {
            return Err(Error::AmplitudeCount {
                num_qubits,
                expected,
                actual: amps.len(),
            });
        }
        Ok(Self { num_qubits, amps })
    }

    /// Builds a state from its amplitude list, inferring the qubit count.
    pub fn from_amps(amps: Vec<C64>) -> Result<Self> {
        let n = log2_exact(amps.len())?;
        Self::new(n, amps)
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amps(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// Computational basis vector `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        Self { num_qubits, amps }
    }

    /// Normally distributed amplitudes, normalized (Haar-distributed state).
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << num_qubits)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self { num_qubits, amps }
            .normalized()
            .expect("gaussian sample is nonzero")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(C64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            num_qubits: self.num_qubits,
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: C64) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            num_qubits: self.num_qubits,
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + factor * b)
                .collect(),
        })
    }

    /// Euclidean distance between the amplitude vectors.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Largest entrywise amplitude difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        let mut seen = HashSet::with_capacity(qubits.len());
        for &q in qubits {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
            if !seen.insert(q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        Ok(())
    }
}

impl Kron for StateVector {
    fn kron(&self, other: &Self) -> Self {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Self {
            num_qubits: self.num_qubits + other.num_qubits,
            amps,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    num_qubits: usize,
    amps: Vec<[f64; 2]>,
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateFile {
            num_qubits: self.num_qubits,
            amps: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = StateFile::deserialize(d)?;
        let amps = raw.amps.iter().map(|&[re, im]| C64::new(re, im)).collect();
        StateVector::new(raw.num_qubits, amps).map_err(serde::de::Error::custom)
    }
}

/// Dense square operator on `2^k` dimensions, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<C64>,
}

impl Operator {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        log2_exact(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Invalid("rows must form a square matrix".into()));
        }
        Self::new(dim, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Self { dim, entries }
    }

    /// Operator whose columns are the given vectors.
    pub fn from_columns(columns: &[StateVector]) -> Result<Self> {
        let dim = columns.len();
        let mut entries = vec![ZERO; dim * dim];
        for (c, col) in columns.iter().enumerate() {
            if col.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: col.dim(),
                });
            }
            for (r, a) in col.amps().iter().enumerate() {
                entries[r * dim + c] = *a;
            }
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn column(&self, col: usize) -> StateVector {
        StateVector::from_amps((0..self.dim).map(|r| self.get(r, col)).collect())
            .expect("power-of-two dimension")
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self { dim: d, entries }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        let d = self.dim;
        let rows = par::map_fine(d, |r| {
            (0..d)
                .map(|c| (0..d).map(|k| self.get(r, k) * other.get(k, c)).sum::<C64>())
                .collect::<Vec<_>>()
        });
        Ok(Self {
            dim: d,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: state.dim(),
            });
        }
        let amps = par::map_fine(self.dim, |r| {
            self.entries[r * self.dim..(r + 1) * self.dim]
                .iter()
                .zip(state.amps())
                .map(|(m, a)| m * a)
                .sum()
        });
        StateVector::new(state.num_qubits(), amps)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |U U^dagger - I|` over entries.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self
            .matmul(&self.adjoint())
            .expect("square operator times its adjoint");
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

impl Kron for Operator {
    fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut entries = vec![ZERO; d * d];
        for ar in 0..da {
            for ac in 0..da {
                let a = self.get(ar, ac);
                if a == ZERO {
                    continue;
                }
                for br in 0..db {
                    for bc in 0..db {
                        entries[(ar * db + br) * d + ac * db + bc] = a * other.get(br, bc);
                    }
                }
            }
        }
        Self { dim: d, entries }
    }
}

/// Pauli operator: `0 -> I`, `1 -> X`, `2 -> Y`, `3 -> Z`.
pub fn pauli(label: u8) -> Result<Operator> {
    let rows: [[C64; 2]; 2] = match label {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        other => return Err(Error::PauliLabel(other)),
    };
    Operator::from_rows(&[&rows[0], &rows[1]])
}

/// Dense tensor product of single-qubit Paulis, first label most significant.
pub fn pauli_string_operator(labels: &[u8]) -> Result<Operator> {
    let mut op = Operator::identity(1);
    for &l in labels {
        op = op.kron(&pauli(l)?);
    }
    Ok(op)
}

/// Applies `op` to the listed qubits (first target = most significant
/// qubit of `op`), identity elsewhere.
pub fn apply_on_subsystems(
    op: &Operator,
    targets: &[usize],
    state: &StateVector,
) -> Result<StateVector> {
    if op.dim() != 1usize << targets.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << targets.len(),
            actual: op.dim(),
        });
    }
    state.check_qubits(targets)?;
    let m = state.num_qubits();
    let k = targets.len();
    let masks: Vec<usize> = targets.iter().map(|&q| 1usize << (m - 1 - q)).collect();
    let target_mask: usize = masks.iter().sum();
    let scatter = |sub: usize| -> usize {
        masks
            .iter()
            .enumerate()
            .filter(|(j, _)| (sub >> (k - 1 - j)) & 1 == 1)
            .map(|(_, mk)| mk)
            .sum()
    };
    let offsets: Vec<usize> = (0..op.dim()).map(scatter).collect();
    let amps = par::map_fine(state.dim(), |i| {
        let row = masks
            .iter()
            .enumerate()
            .filter(|(_, &mk)| i & mk != 0)
            .map(|(j, _)| 1usize << (k - 1 - j))
            .sum::<usize>();
        let base = i & !target_mask;
        (0..op.dim())
            .map(|col| op.get(row, col) * state.amp(base | offsets[col]))
            .sum()
    });
    StateVector::new(m, amps)
}

/// Applies a Pauli string to the listed qubits without forming a matrix.
pub fn apply_pauli_string(
    labels: &[u8],
    targets: &[usize],
    state: &StateVector,
) -> Result<StateVector> {
    if labels.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            actual: labels.len(),
        });
    }
    state.check_qubits(targets)?;
    let m = state.num_qubits();
    let mut flip = 0usize;
    let mut z_mask = 0usize;
    let mut y_count = 0u32;
    for (&l, &q) in labels.iter().zip(targets) {
        let mk = 1usize << (m - 1 - q);
        match l {
            0 => {}
            1 => flip |= mk,
            // Y = i X Z
            2 => {
                flip |= mk;
                z_mask |= mk;
                y_count += 1;
            }
            3 => z_mask |= mk,
            other => return Err(Error::PauliLabel(other)),
        }
    }
    let global = I.powu(y_count);
    let amps = par::map_fine(state.dim(), |out| {
        let src = out ^ flip;
        let sign = if (src & z_mask).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        state.amp(src) * global * sign
    });
    StateVector::new(m, amps)
}

/// Reorders qubits: qubit `j` of the result is qubit `perm[j]` of the input.
pub fn permute_qubits(state: &StateVector, perm: &[usize]) -> Result<StateVector> {
    let m = state.num_qubits();
    validate_permutation(perm, m)?;
    let amps = par::map_fine(state.dim(), |new| {
        let old = (0..m).fold(0usize, |acc, j| {
            acc | (bit(new, j, m) << (m - 1 - perm[j]))
        });
        state.amp(old)
    });
    StateVector::new(m, amps)
}

pub fn validate_permutation(perm: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    if perm.len() != m {
        return Err(Error::InvalidPermutation(m));
    }
    for &p in perm {
        if p >= m || seen[p] {
            return Err(Error::InvalidPermutation(m));
        }
        seen[p] = true;
    }
    Ok(())
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (j, &p) in perm.iter().enumerate() {
        inv[p] = j;
    }
    inv
}

pub fn inner(a: &StateVector, b: &StateVector) -> Result<C64> {
    a.inner(b)
}

/// `|<a|b>|^2`.
pub fn fidelity_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Density matrix on `num_qubits` qubits, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    entries: Vec<C64>,
}

impl DensityMatrix {
    pub fn new(num_qubits: usize, entries: Vec<C64>) -> Result<Self> {
        let d = 1usize << num_qubits;
        if num_qubits == 0 || entries.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                actual: entries.len(),
            });
        }
        Ok(Self {
            num_qubits,
            entries,
        })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let a = state.amps();
        let d = a.len();
        let entries = par::map_fine(d * d, |idx| a[idx / d] * a[idx % d].conj());
        Self {
            num_qubits: state.num_qubits(),
            entries,
        }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        let mut entries = vec![ZERO; d * d];
        for i in 0..d {
            entries[i * d + i] = C64::new(1.0 / d as f64, 0.0);
        }
        Self {
            num_qubits,
            entries,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|(r, c)| (self.get(r, c) - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `tr(rho^2)`, which for Hermitian `rho` is the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = self.num_qubits;
        let (kept, traced) = split_qubits(keep, m)?;
        let dk = 1usize << kept.len();
        let de = 1usize << traced.len();
        let compose = |a: usize, e: usize| {
            scatter_bits(a, &kept, m) | scatter_bits(e, &traced, m)
        };
        let d = self.dim();
        let entries = par::map_fine(dk * dk, |idx| {
            let (r, c) = (idx / dk, idx % dk);
            (0..de)
                .map(|e| self.entries[compose(r, e) * d + compose(c, e)])
                .sum()
        });
        DensityMatrix::new(kept.len(), entries)
    }
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// Sorted kept qubits and the complementary traced-out qubits.
fn split_qubits(keep: &[usize], m: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    for w in kept.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateQubit(w[0]));
        }
    }
    if let Some(&q) = kept.last().filter(|&&q| q >= m) {
        return Err(Error::QubitOutOfRange {
            index: q,
            num_qubits: m,
        });
    }
    let traced = (0..m).filter(|q| kept.binary_search(q).is_err()).collect();
    Ok((kept, traced))
}

/// Places the bits of `sub` (most significant first) on `qubits` of an
/// `m`-qubit index.
fn scatter_bits(sub: usize, qubits: &[usize], m: usize) -> usize {
    let k = qubits.len();
    qubits.iter().enumerate().fold(0, |acc, (j, &q)| {
        acc | (((sub >> (k - 1 - j)) & 1) << (m - 1 - q))
    })
}

/// Inputs accepted by [`partial_trace`].
pub trait PartialTrace {
    /// Reduced state on `keep`, with kept qubits in ascending order.
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix>;
}

impl PartialTrace for DensityMatrix {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        DensityMatrix::partial_trace(self, keep)
    }
}

impl PartialTrace for StateVector {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = self.num_qubits;
        let (kept, traced) = split_qubits(keep, m)?;
        let dk = 1usize << kept.len();
        let de = 1usize << traced.len();
        // Reshape to a dk x de matrix M; the reduced state is M M^dagger.
        let traced_offsets: Vec<usize> = (0..de).map(|e| scatter_bits(e, &traced, m)).collect();
        let rows: Vec<Vec<C64>> = par::map_fine(dk, |a| {
            let base = scatter_bits(a, &kept, m);
            traced_offsets.iter().map(|&e| self.amps[base | e]).collect()
        });
        let entries = par::map_fine(dk * dk, |idx| {
            let (r, c) = (idx / dk, idx % dk);
            rows[r]
                .iter()
                .zip(&rows[c])
                .map(|(x, y)| x * y.conj())
                .sum()
        });
        DensityMatrix::new(kept.len(), entries)
    }
}

pub fn partial_trace<T: PartialTrace + ?Sized>(input: &T, keep: &[usize]) -> Result<DensityMatrix> {
    input.partial_trace(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bell() -> StateVector {
        StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap()
    }

    #[test]
    fn kron_examples() {
        let s = StateVector::basis(1, 0).kron(&StateVector::basis(1, 1));
        assert_eq!(s, StateVector::from_real(&[0.0, 1.0, 0.0, 0.0]).unwrap());

        assert_eq!(Operator::identity(2).kron(&Operator::identity(2)), Operator::identity(4));

        let s = bell().kron(&StateVector::basis(1, 0));
        let nonzero: Vec<usize> = (0..8).filter(|&i| s.amp(i) != ZERO).collect();
        assert_eq!(nonzero, vec![0b000, 0b110]);
        assert_eq!(s.amp(0b110).re, FRAC_1_SQRT_2);
    }

    #[test]
    fn pauli_examples() {
        assert_eq!(pauli(0).unwrap(), Operator::identity(2));
        let flipped = pauli(1).unwrap().apply(&StateVector::basis(1, 0)).unwrap();
        assert_eq!(flipped, StateVector::basis(1, 1));
        let y = pauli(2).unwrap();
        assert_eq!(y.matmul(&y).unwrap(), Operator::identity(2));
        assert_eq!(pauli(4), Err(Error::PauliLabel(4)));
    }

    #[test]
    fn apply_on_subsystems_examples() {
        let x = pauli(1).unwrap();
        let out = apply_on_subsystems(&x, &[1], &StateVector::basis(2, 0)).unwrap();
        assert_eq!(out, StateVector::basis(2, 1));

        let s = StateVector::random(3, &mut rand::rng());
        let same = apply_on_subsystems(&Operator::identity(4), &[2, 0], &s).unwrap();
        assert_eq!(same, s);

        let xx = x.kron(&x);
        let out = apply_on_subsystems(&xx, &[0, 1], &bell()).unwrap();
        assert!(out.max_abs_diff(&bell()).unwrap() < 1e-15);
    }

    #[test]
    fn apply_on_subsystems_errors() {
        let s = StateVector::basis(2, 0);
        assert!(matches!(
            apply_on_subsystems(&Operator::identity(4), &[0], &s),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            apply_on_subsystems(&Operator::identity(4), &[1, 1], &s),
            Err(Error::DuplicateQubit(1))
        );
        assert!(matches!(
            apply_on_subsystems(&Operator::identity(2), &[2], &s),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn target_order_is_respected() {
        // CNOT with control on the first target.
        let cnot = Operator::new(
            4,
            [1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.]
                .iter()
                .map(|&v| C64::new(v, 0.0))
                .collect(),
        )
        .unwrap();
        // |100>, control qubit 0, target qubit 2 -> |101>
        let out = apply_on_subsystems(&cnot, &[0, 2], &StateVector::basis(3, 0b100)).unwrap();
        assert_eq!(out, StateVector::basis(3, 0b101));
        // control qubit 2 (which is 0) -> unchanged
        let out = apply_on_subsystems(&cnot, &[2, 0], &StateVector::basis(3, 0b100)).unwrap();
        assert_eq!(out, StateVector::basis(3, 0b100));
    }

    #[test]
    fn inner_examples() {
        let zero = StateVector::basis(1, 0);
        let one = StateVector::basis(1, 1);
        let plus = StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert_eq!(inner(&zero, &zero).unwrap(), ONE);
        assert_eq!(inner(&zero, &one).unwrap(), ZERO);
        assert!((inner(&plus, &zero).unwrap() - FRAC_1_SQRT_2).norm() < 1e-16);
        assert!(inner(&zero, &bell()).is_err());
        // conjugate-linear in the first argument
        let iz = zero.scaled(I);
        assert_eq!(inner(&iz, &zero).unwrap(), -I);
    }

    #[test]
    fn partial_trace_examples() {
        let rho = partial_trace(&StateVector::basis(2, 0), &[0]).unwrap();
        assert_eq!(rho, DensityMatrix::from_pure(&StateVector::basis(1, 0)));

        let rho = partial_trace(&bell(), &[0]).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(1)) < 1e-15);
        assert!((rho.purity() - 0.5).abs() < 1e-15);

        assert_eq!(partial_trace(&bell(), &[]), Err(Error::EmptyKeep));
    }

    #[test]
    fn partial_trace_of_density_matches_pure_route() {
        let s = StateVector::random(4, &mut rand::rng());
        let from_pure = partial_trace(&s, &[3, 1]).unwrap();
        let from_rho = partial_trace(&DensityMatrix::from_pure(&s), &[1, 3]).unwrap();
        assert!(from_pure.max_abs_diff(&from_rho) < 1e-14);
    }

    #[test]
    fn permute_examples() {
        let s = StateVector::random(3, &mut rand::rng());
        assert_eq!(permute_qubits(&s, &[0, 1, 2]).unwrap(), s);
        assert_eq!(
            permute_qubits(&StateVector::basis(2, 0b01), &[1, 0]).unwrap(),
            StateVector::basis(2, 0b10)
        );
        let perm = [2, 0, 1];
        let there = permute_qubits(&s, &perm).unwrap();
        let back = permute_qubits(&there, &inverse_permutation(&perm)).unwrap();
        assert_eq!(back, s);
        assert_eq!(
            permute_qubits(&s, &[0, 0, 1]),
            Err(Error::InvalidPermutation(3))
        );
    }

    #[test]
    fn permutation_moves_named_qubit() {
        // qubit 0 of the result is qubit 2 of |001>, i.e. 1
        let out = permute_qubits(&StateVector::basis(3, 0b001), &[2, 0, 1]).unwrap();
        assert_eq!(out, StateVector::basis(3, 0b100));
    }

    #[test]
    fn fidelity_examples() {
        let s = StateVector::random(2, &mut rand::rng());
        assert!((fidelity_pure(&s, &s).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(
            fidelity_pure(&StateVector::basis(2, 0), &StateVector::basis(2, 3)).unwrap(),
            0.0
        );
        let phased = s.scaled(C64::from_polar(1.0, 0.7));
        assert!((fidelity_pure(&s, &phased).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn purity_examples() {
        let s = StateVector::random(3, &mut rand::rng());
        assert!((DensityMatrix::from_pure(&s).purity() - 1.0).abs() < 1e-13);
        assert!((DensityMatrix::maximally_mixed(1).purity() - 0.5).abs() < 1e-16);
    }

    #[test]
    fn pauli_string_fast_path_matches_dense() {
        let mut rng = rand::rng();
        let s = StateVector::random(4, &mut rng);
        for labels in [[0u8, 0], [1, 2], [2, 3], [3, 1], [2, 2]] {
            let targets = [3, 1];
            let dense = apply_on_subsystems(&pauli_string_operator(&labels).unwrap(), &targets, &s)
                .unwrap();
            let fast = apply_pauli_string(&labels, &targets, &s).unwrap();
            assert!(dense.max_abs_diff(&fast).unwrap() < 1e-15, "{labels:?}");
        }
    }

    #[test]
    fn state_json_roundtrip_and_validation() {
        let s = bell();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.starts_with("{\"num_qubits\":2,\"amps\":[["));
        let back: StateVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"num_qubits": 2, "amps": [[1,0],[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<StateVector>(bad).is_err());
    }

    #[test]
    fn unitarity_deviation_detects_nonunitary() {
        assert!(pauli(2).unwrap().unitarity_deviation() < 1e-15);
        let m = Operator::from_rows(&[&[ONE, ONE], &[ZERO, ONE]]).unwrap();
        assert!(m.unitarity_deviation() > 0.5);
    }
}
