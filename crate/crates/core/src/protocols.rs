//! Teleportation and dense coding over a [`ResourceState`].
//!
//! Teleportation joint states are ordered `A'1..A'n A1..An B1..Bn`, with the
//! unknown state on `A'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{build_pi_basis, project, sample_outcome, MeasurementBasis, PauliLabels};
use crate::par;
use crate::qcore::{
    apply_pauli_string, fidelity_pure, kron, DensityMatrix, PartialTrace, StateVector, C64,
    PROTOCOL_TOL,
};
use crate::resource::ResourceState;

/// Squared overlap a dense-coding state must reach to decode.
pub const DECODE_THRESHOLD: f64 = 1.0 - 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TeleportRecord {
    pub outcome: PauliLabels,
    pub probability: f64,
    pub bob_pre: StateVector,
    pub correction: PauliLabels,
    pub bob_post: StateVector,
    pub fidelity: f64,
}

fn check_payload(phi: &StateVector, r: &ResourceState) -> Result<()> {
    if phi.num_qubits() != r.n() {
        return Err(Error::DimensionMismatch {
            expected: 1 << r.n(),
            actual: phi.dim(),
        });
    }
    if !phi.is_normalized(PROTOCOL_TOL) {
        return Err(Error::Invalid(format!(
            "input state has squared norm {}",
            phi.norm_sqr()
        )));
    }
    Ok(())
}

fn targets(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn record_for(
    phi: &StateVector,
    joint: &StateVector,
    basis: &MeasurementBasis,
    outcome: PauliLabels,
) -> Result<TeleportRecord> {
    let n = basis.n();
    let projection = project(joint, basis, &outcome)?;
    // Paulis are involutions, so the outcome's own string undoes it.
    let correction = outcome.clone();
    let bob_post = apply_pauli_string(correction.labels(), &targets(n), &projection.residual)?;
    let fidelity = fidelity_pure(&bob_post, phi)?;
    Ok(TeleportRecord {
        outcome,
        probability: projection.probability,
        bob_pre: projection.residual,
        correction,
        bob_post,
        fidelity,
    })
}

/// One teleportation round with a sampled measurement outcome.
pub fn teleport_once(phi: &StateVector, r: &ResourceState, seed: u64) -> Result<TeleportRecord> {
    check_payload(phi, r)?;
    let basis = build_pi_basis(r.basis_a(), r.basis_b())?;
    let joint = kron(phi, r.state());
    let outcome = sample_outcome(&joint, &basis, seed)?;
    record_for(phi, &joint, &basis, outcome)
}

/// All `4^n` branches of the protocol, in label order.
pub fn teleport_exhaustive(phi: &StateVector, r: &ResourceState) -> Result<Vec<TeleportRecord>> {
    check_payload(phi, r)?;
    let basis = build_pi_basis(r.basis_a(), r.basis_b())?;
    let joint = kron(phi, r.state());
    par::map_tasks(basis.len(), |l| {
        record_for(phi, &joint, &basis, PauliLabels::from_index(r.n(), l))
    })
    .into_iter()
    .collect()
}

/// `|| |phi> (x) |xi> - (1/2^n) sum_l |Pi_l> (x) P_l |phi> ||`.
pub fn verify_decomposition(phi: &StateVector, r: &ResourceState) -> Result<f64> {
    let basis = build_pi_basis(r.basis_a(), r.basis_b())?;
    verify_decomposition_with(phi, r, &basis)
}

/// Same residual, with an explicitly supplied measurement basis.
pub fn verify_decomposition_with(
    phi: &StateVector,
    r: &ResourceState,
    basis: &MeasurementBasis,
) -> Result<f64> {
    if basis.n() != r.n() {
        return Err(Error::DimensionMismatch {
            expected: r.n(),
            actual: basis.n(),
        });
    }
    check_payload(phi, r)?;
    let n = r.n();
    let bdim = 1usize << n;
    let corrected: Vec<StateVector> = par::map_tasks(basis.len(), |l| {
        apply_pauli_string(PauliLabels::from_index(n, l).labels(), &targets(n), phi)
            .expect("labels in range")
    });
    let scale = 1.0 / bdim as f64;
    let lhs = kron(phi, r.state());
    let diffs = par::map_fine(lhs.dim(), |idx| {
        let (x, b) = (idx / bdim, idx % bdim);
        let rhs: C64 = basis
            .vectors()
            .iter()
            .zip(&corrected)
            .map(|(v, c)| v.amp(x) * c.amp(b))
            .sum();
        (lhs.amp(idx) - rhs * scale).norm_sqr()
    });
    Ok(diffs.iter().sum::<f64>().sqrt())
}

/// Matrix of the map `A' -> B` obtained by contracting `<Pi_0|` with the
/// resource, in the computational basis (row = B index, column = A' index).
pub fn transfer_operator(r: &ResourceState, basis: &MeasurementBasis) -> Vec<C64> {
    let d = 1usize << r.n();
    let root = basis.vector(&PauliLabels::zeros(r.n()));
    let xi = r.state();
    par::map_fine(d * d, |idx| {
        let (b, a_prime) = (idx / d, idx % d);
        (0..d)
            .map(|a| root.amp(a_prime * d + a).conj() * xi.amp(a * d + b))
            .sum()
    })
}

/// Max entrywise deviation of the transfer operator from `I / 2^n`.
pub fn transfer_operator_check(r: &ResourceState) -> Result<f64> {
    let basis = build_pi_basis(r.basis_a(), r.basis_b())?;
    Ok(transfer_operator_deviation(r, &basis))
}

pub fn transfer_operator_deviation(r: &ResourceState, basis: &MeasurementBasis) -> f64 {
    let d = 1usize << r.n();
    let target = 1.0 / d as f64;
    transfer_operator(r, basis)
        .iter()
        .enumerate()
        .map(|(idx, t)| {
            let want = if idx / d == idx % d { target } else { 0.0 };
            (t - want).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenseCodingRecord {
    pub message: PauliLabels,
    pub encoded: StateVector,
    pub decoded: PauliLabels,
}

/// Applies the message's Pauli string to the A half of the resource.
pub fn dense_encode(r: &ResourceState, message: &PauliLabels) -> Result<StateVector> {
    if message.n() != r.n() {
        return Err(Error::DimensionMismatch {
            expected: r.n(),
            actual: message.n(),
        });
    }
    apply_pauli_string(message.labels(), &targets(r.n()), r.state())
}

/// All `4^n` encoded states of a resource, in message order.
#[derive(Clone, Debug)]
pub struct DenseCodebook {
    n: usize,
    codewords: Vec<StateVector>,
}

impl DenseCodebook {
    pub fn new(r: &ResourceState) -> Self {
        let n = r.n();
        let codewords = par::map_tasks(1 << (2 * n), |l| {
            dense_encode(r, &PauliLabels::from_index(n, l)).expect("n matches")
        });
        Self { n, codewords }
    }

    pub fn codewords(&self) -> &[StateVector] {
        &self.codewords
    }

    /// Joint measurement over all `2n` qubits in the codeword basis.
    pub fn decode(&self, encoded: &StateVector) -> Result<PauliLabels> {
        if encoded.num_qubits() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 1 << (2 * self.n),
                actual: encoded.dim(),
            });
        }
        let overlaps = par::map_tasks(self.codewords.len(), |l| {
            self.codewords[l]
                .inner(encoded)
                .expect("same size")
                .norm_sqr()
        });
        let (best, &score) = overlaps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty codebook");
        if score < DECODE_THRESHOLD {
            return Err(Error::Undecodable { best: score });
        }
        Ok(PauliLabels::from_index(self.n, best))
    }

    /// Max `|<c_i|c_j>|` over distinct codewords.
    pub fn max_off_diagonal(&self) -> f64 {
        let rows = par::map_tasks(self.codewords.len(), |i| {
            self.codewords[i + 1..]
                .iter()
                .map(|c| self.codewords[i].inner(c).expect("same size").norm())
                .fold(0.0, f64::max)
        });
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Max deviation of any codeword's A marginal from `I / 2^n`.
    pub fn max_marginal_deviation(&self) -> f64 {
        let keep: Vec<usize> = (0..self.n).collect();
        let mixed = DensityMatrix::maximally_mixed(self.n);
        par::map_tasks(self.codewords.len(), |l| {
            self.codewords[l]
                .partial_trace(&keep)
                .expect("valid qubits")
                .max_abs_diff(&mixed)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn dense_decode(r: &ResourceState, encoded: &StateVector) -> Result<PauliLabels> {
    DenseCodebook::new(r).decode(encoded)
}

pub fn dense_round_trip(codebook: &DenseCodebook, r: &ResourceState, message: &PauliLabels) -> Result<DenseCodingRecord> {
    let encoded = dense_encode(r, message)?;
    let decoded = codebook.decode(&encoded)?;
    Ok(DenseCodingRecord {
        message: message.clone(),
        encoded,
        decoded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DenseGramReport {
    pub max_off_diagonal: f64,
    pub max_marginal_deviation: f64,
}

/// Orthogonality of the `4^n` encoded states and maximal entanglement of each.
pub fn dense_gram_check(r: &ResourceState) -> DenseGramReport {
    let book = DenseCodebook::new(r);
    DenseGramReport {
        max_off_diagonal: book.max_off_diagonal(),
        max_marginal_deviation: book.max_marginal_deviation(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{computational_basis, AngleSchedule, SignConvention};
    use crate::resource::{build_resource, cluster6_resource};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_resource(n: usize, seed: u64) -> ResourceState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = AngleSchedule::random(n, &mut rng);
        let b = AngleSchedule::random(n, &mut rng);
        ResourceState::from_schedules(&a, &b, SignConvention::Faithful).unwrap()
    }

    fn bell_resource(n: usize) -> ResourceState {
        build_resource(computational_basis(n), computational_basis(n)).unwrap()
    }

    #[test]
    fn bell_teleportation_is_perfect_for_every_seed() {
        let r = bell_resource(1);
        let phi = StateVector::random(1, &mut ChaCha8Rng::seed_from_u64(1));
        for seed in 0..32 {
            let rec = teleport_once(&phi, &r, seed).unwrap();
            assert!(rec.fidelity >= 1.0 - 1e-12);
            assert_eq!(rec.correction, rec.outcome);
        }
    }

    #[test]
    fn basis_vector_payload_is_teleported() {
        let r = random_resource(2, 3);
        let phi = r.basis_b().get(2).clone();
        for rec in teleport_exhaustive(&phi, &r).unwrap() {
            assert!(rec.fidelity >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn cluster6_teleportation() {
        let r = cluster6_resource(0.3, 0.4, 0.5);
        let phi = StateVector::random(3, &mut ChaCha8Rng::seed_from_u64(9));
        for seed in 0..8 {
            assert!(teleport_once(&phi, &r, seed).unwrap().fidelity >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn exhaustive_branches_are_uniform_and_perfect() {
        let r = bell_resource(1);
        let phi = StateVector::random(1, &mut ChaCha8Rng::seed_from_u64(4));
        let recs = teleport_exhaustive(&phi, &r).unwrap();
        assert_eq!(recs.len(), 4);
        for (l, rec) in recs.iter().enumerate() {
            assert_eq!(rec.outcome.index(), l);
            assert!((rec.probability - 0.25).abs() < 1e-12);
            assert!(rec.fidelity >= 1.0 - 1e-12);
        }

        let r = random_resource(3, 17);
        let phi = StateVector::random(3, &mut ChaCha8Rng::seed_from_u64(5));
        let recs = teleport_exhaustive(&phi, &r).unwrap();
        assert_eq!(recs.len(), 64);
        for rec in &recs {
            assert!((rec.probability - 1.0 / 64.0).abs() < 1e-10);
            assert!(rec.fidelity >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn sign_convention_does_not_affect_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = AngleSchedule::random(2, &mut rng);
        let b = AngleSchedule::random(2, &mut rng);
        let phi = StateVector::random(2, &mut rng);
        let faithful = ResourceState::from_schedules(&a, &b, SignConvention::Faithful).unwrap();
        let uniform = ResourceState::from_schedules(&a, &b, SignConvention::Uniform).unwrap();
        let f1 = teleport_exhaustive(&phi, &faithful).unwrap();
        let f2 = teleport_exhaustive(&phi, &uniform).unwrap();
        for (x, y) in f1.iter().zip(&f2) {
            assert!((x.fidelity - y.fidelity).abs() < 1e-12);
            assert!(x.fidelity >= 1.0 - 1e-12);
        }
        assert!(faithful.state().max_abs_diff(uniform.state()).unwrap() > 1e-3);
    }

    #[test]
    fn payload_validation() {
        let r = bell_resource(2);
        assert!(teleport_once(&StateVector::basis(1, 0), &r, 0).is_err());
        let unnormalized = StateVector::basis(2, 0).scaled(C64::new(2.0, 0.0));
        assert!(teleport_exhaustive(&unnormalized, &r).is_err());
    }

    #[test]
    fn decomposition_identity() {
        let phi = StateVector::random(1, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(verify_decomposition(&phi, &bell_resource(1)).unwrap() < 1e-12);
        for n in 1..=3 {
            let r = random_resource(n, 40 + n as u64);
            let phi = StateVector::random(n, &mut ChaCha8Rng::seed_from_u64(n as u64));
            assert!(verify_decomposition(&phi, &r).unwrap() < 1e-10);
        }
    }

    #[test]
    fn decomposition_needs_matched_bases() {
        let r = random_resource(2, 50);
        let other = random_resource(2, 51);
        let basis = build_pi_basis(other.basis_a(), other.basis_b()).unwrap();
        let phi = StateVector::random(2, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(verify_decomposition_with(&phi, &r, &basis).unwrap() > 0.1);
    }

    #[test]
    fn transfer_operator_is_scaled_identity() {
        assert!(transfer_operator_check(&bell_resource(2)).unwrap() < 1e-12);
        for n in 1..=3 {
            let r = random_resource(n, 60 + n as u64);
            assert!(transfer_operator_check(&r).unwrap() < 1e-12);
            // swapping the roles of the two bases breaks the identity
            let swapped = build_pi_basis(r.basis_b(), r.basis_a()).unwrap();
            assert!(transfer_operator_deviation(&r, &swapped) > 1e-3, "n = {n}");
        }
    }

    #[test]
    fn dense_encoding_examples() {
        let r = random_resource(2, 70);
        let same = dense_encode(&r, &PauliLabels::zeros(2)).unwrap();
        assert_eq!(&same, r.state());

        let m1 = PauliLabels::new(vec![1, 2]).unwrap();
        let m2 = PauliLabels::new(vec![3, 2]).unwrap();
        let ov = dense_encode(&r, &m1).unwrap().inner(&dense_encode(&r, &m2).unwrap()).unwrap();
        assert!(ov.norm() < 1e-12);

        // Z on A1 negates every amplitude whose leading bit is 1
        let z = dense_encode(&r, &PauliLabels::new(vec![3, 0]).unwrap()).unwrap();
        for i in 0..16 {
            let sign = if i >= 8 { -1.0 } else { 1.0 };
            assert_eq!(z.amp(i), r.state().amp(i) * sign);
        }
        assert!(dense_encode(&r, &PauliLabels::zeros(3)).is_err());
    }

    #[test]
    fn dense_round_trip_all_messages() {
        for n in 1..=3 {
            let r = random_resource(n, 80 + n as u64);
            let book = DenseCodebook::new(&r);
            for m in PauliLabels::all(n) {
                let rec = dense_round_trip(&book, &r, &m).unwrap();
                assert_eq!(rec.decoded, m);
            }
        }
    }

    #[test]
    fn dense_decode_edge_cases() {
        let r = random_resource(2, 90);
        assert_eq!(dense_decode(&r, r.state()).unwrap(), PauliLabels::zeros(2));
        let noise = StateVector::random(4, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(matches!(dense_decode(&r, &noise), Err(Error::Undecodable { .. })));
        assert!(dense_decode(&r, &StateVector::basis(3, 0)).is_err());
    }

    #[test]
    fn dense_gram_examples() {
        let g = dense_gram_check(&bell_resource(1));
        assert!(g.max_off_diagonal < 1e-12);
        let g = dense_gram_check(&random_resource(3, 99));
        assert!(g.max_off_diagonal < 1e-10);
        assert!(g.max_marginal_deviation < 1e-12);
    }
}
