//! Joint measurement on `A'A` in the Pauli-generated maximally entangled basis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bases::OrthonormalBasis;
use crate::error::{Error, Result};
use crate::par;
use crate::qcore::{apply_pauli_string, kron, StateVector, C64};

/// Probabilities at or below this are treated as exact zeros.
pub const ZERO_PROBABILITY: f64 = 1e-20;

/// One Pauli label `0..=3` per qubit; lexicographic order enumerates all `4^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct PauliLabels(Vec<u8>);

impl TryFrom<Vec<u8>> for PauliLabels {
    type Error = Error;

    fn try_from(labels: Vec<u8>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<PauliLabels> for Vec<u8> {
    fn from(p: PauliLabels) -> Self {
        p.0
    }
}

impl std::fmt::Display for PauliLabels {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl PauliLabels {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Invalid("empty Pauli label list".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 3) {
            return Err(Error::PauliLabel(bad));
        }
        Ok(Self(labels))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Label tuple at position `index` of the lexicographic enumeration.
    pub fn from_index(n: usize, index: usize) -> Self {
        Self((0..n).map(|j| ((index >> (2 * (n - 1 - j))) & 3) as u8).collect())
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &l| (acc << 2) | l as usize)
    }

    pub fn all(n: usize) -> impl Iterator<Item = PauliLabels> {
        (0..1usize << (2 * n)).map(move |i| Self::from_index(n, i))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.0
    }

    /// Two bits per label, first label first: `2n` classical bits.
    pub fn bits(&self) -> String {
        self.0.iter().map(|l| format!("{l:02b}")).collect()
    }

    pub fn from_bits(bits: &str) -> Result<Self> {
        if bits.is_empty() || !bits.len().is_multiple_of(2) || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Invalid(format!("bad outcome bit string {bits:?}")));
        }
        let labels = bits
            .as_bytes()
            .chunks(2)
            .map(|c| (c[0] - b'0') * 2 + (c[1] - b'0'))
            .collect();
        Self::new(labels)
    }
}

/// The `4^n` vectors `(P_l (x) I) |Pi_0>` on `2n` qubits (`A'` then `A`), where
/// `|Pi_0> = (1/sqrt(2^n)) sum_K |K'>_A' (x) |K>_A`.
#[derive(Clone, Debug)]
pub struct MeasurementBasis {
    n: usize,
    vectors: Vec<StateVector>,
}

impl MeasurementBasis {
    pub fn n(&self) -> usize {
        self.n
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

    pub fn vector(&self, labels: &PauliLabels) -> &StateVector {
        &self.vectors[labels.index()]
    }

    pub fn gram_deviation(&self) -> f64 {
        let rows = par::map_tasks(self.len(), |i| {
            let u = &self.vectors[i];
            self.vectors[i..]
                .iter()
                .enumerate()
                .map(|(off, v)| {
                    let target = if off == 0 { 1.0 } else { 0.0 };
                    (u.inner(v).expect("same size") - target).norm()
                })
                .fold(0.0, f64::max)
        });
        rows.into_iter().fold(0.0, f64::max)
    }

    fn check_outcome(&self, outcome: &PauliLabels) -> Result<()> {
        if outcome.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: outcome.n(),
            });
        }
        Ok(())
    }
}

pub fn build_pi_basis(basis_a: &OrthonormalBasis, basis_b: &OrthonormalBasis) -> Result<MeasurementBasis> {
    if basis_a.n() != basis_b.n() {
        return Err(Error::DimensionMismatch {
            expected: basis_a.len(),
            actual: basis_b.len(),
        });
    }
    let n = basis_a.n();
    let norm = C64::new(1.0 / (basis_a.len() as f64).sqrt(), 0.0);
    let mut root = kron(basis_b.get(0), basis_a.get(0));
    for (b, a) in basis_b.vectors().iter().zip(basis_a.vectors()).skip(1) {
        root = root.add_scaled(&kron(b, a), C64::new(1.0, 0.0))?;
    }
    let root = root.scaled(norm);
    let targets: Vec<usize> = (0..n).collect();
    let vectors = par::map_tasks(1 << (2 * n), |i| {
        apply_pauli_string(PauliLabels::from_index(n, i).labels(), &targets, &root)
            .expect("labels in range")
    });
    Ok(MeasurementBasis { n, vectors })
}

fn check_joint(joint: &StateVector, basis: &MeasurementBasis) -> Result<()> {
    if joint.num_qubits() != 3 * basis.n {
        return Err(Error::DimensionMismatch {
            expected: 1 << (3 * basis.n),
            actual: joint.dim(),
        });
    }
    Ok(())
}

/// Unnormalized `B` residual `(<v| (x) I_B) |joint>`.
fn contract(joint: &StateVector, v: &StateVector) -> Vec<C64> {
    let bdim = joint.dim() / v.dim();
    let amps = joint.amps();
    (0..bdim)
        .map(|b| {
            v.amps()
                .iter()
                .enumerate()
                .map(|(x, c)| c.conj() * amps[x * bdim + b])
                .sum()
        })
        .collect()
}

/// Born probabilities for every outcome, in label order. `joint` is ordered
/// `A'1..A'n A1..An B1..Bn`.
pub fn born_probabilities(joint: &StateVector, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    check_joint(joint, basis)?;
    Ok(par::map_tasks(basis.len(), |l| {
        contract(joint, &basis.vectors[l])
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }))
}

/// Post-measurement `B` state and its Born probability.
#[derive(Clone, Debug)]
pub struct Projection {
    pub residual: StateVector,
    pub probability: f64,
}

pub fn project(joint: &StateVector, basis: &MeasurementBasis, outcome: &PauliLabels) -> Result<Projection> {
    check_joint(joint, basis)?;
    basis.check_outcome(outcome)?;
    let raw = StateVector::new(basis.n, contract(joint, basis.vector(outcome)))?;
    let probability = raw.norm_sqr();
    if probability <= ZERO_PROBABILITY {
        return Err(Error::ZeroProbability(outcome.to_string()));
    }
    Ok(Projection {
        residual: raw.scaled(C64::new(1.0 / probability.sqrt(), 0.0)),
        probability,
    })
}

/// Inverse-CDF sampler over a fixed discrete distribution.
#[derive(Clone, Debug)]
pub struct OutcomeSampler {
    cumulative: Vec<f64>,
}

impl OutcomeSampler {
    pub fn new(probabilities: &[f64]) -> Result<Self> {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = probabilities
            .iter()
            .map(|&p| {
                acc += p.max(0.0);
                acc
            })
            .collect();
        if acc <= 0.0 {
            return Err(Error::Invalid("distribution has no mass".into()));
        }
        Ok(Self { cumulative })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("nonempty");
        let u = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // u < total, so idx is in range unless rounding pushed it past the end
        idx.min(self.cumulative.len() - 1)
    }
}

/// Draws one outcome with a private generator seeded by `seed`.
pub fn sample_outcome(joint: &StateVector, basis: &MeasurementBasis, seed: u64) -> Result<PauliLabels> {
    let probs = born_probabilities(joint, basis)?;
    let sampler = OutcomeSampler::new(&probs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(PauliLabels::from_index(basis.n, sampler.sample(&mut rng)))
}

/// Serialized outcome: labels, `2n`-bit string and probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub labels: PauliLabels,
    pub bits: String,
    pub probability: f64,
}

impl OutcomeRecord {
    pub fn new(labels: PauliLabels, probability: f64) -> Self {
        Self {
            bits: labels.bits(),
            labels,
            probability,
        }
    }
}
