//! Angle-parameterized orthonormal basis families.
//!
//! An n-qubit family is grown one qubit at a time: every vector of the
//! (n-1)-qubit prefix basis spawns an adjacent pair
//!
//! ```text
//! |2p>   = |p> (x) ( cos t |0> + sin t |1>)
//! |2p+1> = |p> (x) (-sin t |0> + cos t |1>)
//! ```
//!
//! with one angle `t` per pair. On the A side, pair `p = 1` uses
//! `(sin t |0> - cos t |1>)` for its odd member instead; see
//! [`SignConvention`].

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::qcore::{Operator, StateVector, C64, PROTOCOL_TOL};

/// Angles for a fully recursive basis family: level `l` (1-based) holds
/// `2^(l-1)` angles in radians.
///
/// Any finite angle is accepted. The nominal range is `[0, pi/2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule")]
pub struct AngleSchedule {
    n: usize,
    levels: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawSchedule {
    n: usize,
    levels: Vec<Vec<f64>>,
}

impl TryFrom<RawSchedule> for AngleSchedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        let s = AngleSchedule::new(raw.levels)?;
        if s.n != raw.n {
            return Err(Error::MalformedSchedule(format!(
                "n = {} but {} levels given",
                raw.n, s.n
            )));
        }
        Ok(s)
    }
}

impl AngleSchedule {
    pub fn new(levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::MalformedSchedule("no levels".into()));
        }
        for (l, level) in levels.iter().enumerate() {
            if level.len() != 1 << l {
                return Err(Error::MalformedSchedule(format!(
                    "level {} has {} angles, expected {}",
                    l + 1,
                    level.len(),
                    1usize << l
                )));
            }
            if let Some(bad) = level.iter().find(|a| !a.is_finite()) {
                return Err(Error::MalformedSchedule(format!(
                    "level {} contains non-finite angle {bad}",
                    l + 1
                )));
            }
        }
        Ok(Self {
            n: levels.len(),
            levels,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            levels: (0..n).map(|l| vec![0.0; 1 << l]).collect(),
        }
    }

    /// Uniform angles in `[0, pi/2]`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            n,
            levels: (0..n)
                .map(|l| (0..1 << l).map(|_| rng.random_range(0.0..=FRAC_PI_2)).collect())
                .collect(),
        }
    }

    /// Schedule whose lower levels are zero and whose last level is `last`.
    pub fn with_last_level(last: Vec<f64>) -> Result<Self> {
        let n = last.len().trailing_zeros() as usize + 1;
        let mut levels: Vec<Vec<f64>> = (0..n - 1).map(|l| vec![0.0; 1 << l]).collect();
        levels.push(last);
        Self::new(levels)
    }

    /// Builds a schedule from all angles concatenated level by level.
    pub fn from_flat(n: usize, angles: &[f64]) -> Result<Self> {
        let expected = (1usize << n) - 1;
        if n == 0 || angles.len() != expected {
            return Err(Error::MalformedSchedule(format!(
                "{} angles given, {n} levels need {expected}",
                angles.len()
            )));
        }
        let levels = (0..n)
            .map(|l| angles[(1 << l) - 1..(1 << (l + 1)) - 1].to_vec())
            .collect();
        Self::new(levels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn last_level(&self) -> &[f64] {
        &self.levels[self.n - 1]
    }

    /// The first `n` levels.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        Self::new(self.levels[..n.min(self.n)].to_vec())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
    Generic,
}

/// Sign rule for the odd member of A-side pair `p = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SignConvention {
    /// `(sin t, -cos t)` for A-side pair 1, `(-sin t, cos t)` everywhere else.
    #[default]
    Faithful,
    /// `(-sin t, cos t)` for every pair on both sides.
    Uniform,
}

/// Ordered orthonormal basis of an n-qubit space.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    n: usize,
    side: Side,
    vectors: Vec<StateVector>,
}

impl OrthonormalBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn get(&self, k: usize) -> &StateVector {
        &self.vectors[k]
    }

    /// Largest entrywise deviation of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, u) in self.vectors.iter().enumerate() {
            for (j, v) in self.vectors.iter().enumerate().skip(i) {
                let g = u.inner(v).expect("same dimension");
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// `sum_K coeffs[K] |basis_K>`.
    pub fn reconstruct(&self, coeffs: &[C64]) -> Result<StateVector> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: coeffs.len(),
            });
        }
        let dim = self.len();
        let amps = (0..dim)
            .map(|i| {
                coeffs
                    .iter()
                    .zip(&self.vectors)
                    .map(|(c, v)| c * v.amp(i))
                    .sum()
            })
            .collect();
        StateVector::new(self.n, amps)
    }

    /// Matrix with the basis vectors as columns.
    pub fn to_operator(&self) -> Operator {
        Operator::from_columns(&self.vectors).expect("square by construction")
    }
}

fn pair_qubits(theta: f64, pair: usize, side: Side, convention: SignConvention) -> ([f64; 2], [f64; 2]) {
    let (s, c) = theta.sin_cos();
    let even = [c, s];
    let odd = if side == Side::A && pair == 1 && convention == SignConvention::Faithful {
        [s, -c]
    } else {
        [-s, c]
    };
    (even, odd)
}

fn qubit(v: [f64; 2]) -> StateVector {
    StateVector::from_real(&v).expect("two amplitudes")
}

/// Adds one qubit to `prefix`, one angle per prefix vector.
pub fn extend_basis(
    prefix: &OrthonormalBasis,
    angles: &[f64],
    side: Side,
    convention: SignConvention,
) -> Result<OrthonormalBasis> {
    if angles.len() != prefix.len() {
        return Err(Error::MalformedSchedule(format!(
            "{} angles for a {}-vector prefix",
            angles.len(),
            prefix.len()
        )));
    }
    let mut vectors = Vec::with_capacity(2 * prefix.len());
    for (p, (&theta, head)) in angles.iter().zip(prefix.vectors()).enumerate() {
        let (even, odd) = pair_qubits(theta, p, side, convention);
        vectors.push(crate::qcore::kron(head, &qubit(even)));
        vectors.push(crate::qcore::kron(head, &qubit(odd)));
    }
    Ok(OrthonormalBasis {
        n: prefix.n + 1,
        side,
        vectors,
    })
}

fn build_recursive(schedule: &AngleSchedule, side: Side, convention: SignConvention) -> OrthonormalBasis {
    let (even, odd) = pair_qubits(schedule.levels[0][0], 0, side, convention);
    let mut basis = OrthonormalBasis {
        n: 1,
        side,
        vectors: vec![qubit(even), qubit(odd)],
    };
    for level in &schedule.levels[1..] {
        basis = extend_basis(&basis, level, side, convention).expect("validated schedule");
    }
    basis
}

/// A-side family `{|K>}` with the faithful sign convention.
pub fn build_basis_a(schedule: &AngleSchedule) -> OrthonormalBasis {
    build_recursive(schedule, Side::A, SignConvention::Faithful)
}

pub fn build_basis_a_with(schedule: &AngleSchedule, convention: SignConvention) -> OrthonormalBasis {
    build_recursive(schedule, Side::A, convention)
}

/// B-side family `{|K'>}`.
pub fn build_basis_b(schedule: &AngleSchedule) -> OrthonormalBasis {
    build_recursive(schedule, Side::B, SignConvention::Faithful)
}

/// Family over a computational (n-1)-qubit prefix, using only the last
/// level of angles. This is the form of the explicit three-qubit lists.
pub fn build_over_computational_prefix(
    last_level: &[f64],
    side: Side,
    convention: SignConvention,
) -> Result<OrthonormalBasis> {
    if last_level.is_empty() || !last_level.len().is_power_of_two() {
        return Err(Error::MalformedSchedule(format!(
            "last level needs a power-of-two angle count, got {}",
            last_level.len()
        )));
    }
    let prefix_qubits = last_level.len().trailing_zeros() as usize;
    if prefix_qubits == 0 {
        let (even, odd) = pair_qubits(last_level[0], 0, side, convention);
        return Ok(OrthonormalBasis {
            n: 1,
            side,
            vectors: vec![qubit(even), qubit(odd)],
        });
    }
    extend_basis(&computational_basis(prefix_qubits), last_level, side, convention)
}

pub fn computational_basis(n: usize) -> OrthonormalBasis {
    OrthonormalBasis {
        n,
        side: Side::Generic,
        vectors: (0..1 << n).map(|k| StateVector::basis(n, k)).collect(),
    }
}

/// Columns of a unitary matrix as an ordered basis.
pub fn basis_from_columns(matrix: &Operator) -> Result<OrthonormalBasis> {
    let deviation = matrix.unitarity_deviation();
    if deviation > PROTOCOL_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(OrthonormalBasis {
        n: matrix.num_qubits(),
        side: Side::Generic,
        vectors: (0..matrix.dim()).map(|c| matrix.column(c)).collect(),
    })
}

/// Entry `K` is `<basis_K|state>`.
pub fn coefficients_in_basis(state: &StateVector, basis: &OrthonormalBasis) -> Result<Vec<C64>> {
    basis.vectors.iter().map(|v| v.inner(state)).collect()
}
