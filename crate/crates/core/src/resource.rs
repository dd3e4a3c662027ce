//! The 2n-qubit shared resource and its reference states.
//!
//! Qubits are ordered `A1..An B1..Bn`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::bases::{
    build_basis_a_with, build_basis_b, build_over_computational_prefix, AngleSchedule,
    OrthonormalBasis, SignConvention, Side,
};
use crate::error::{Error, Result};
use crate::par;
use crate::qcore::{DensityMatrix, PartialTrace, StateVector, C64};

/// `(1/sqrt(2^n)) sum_K |K>_A (x) |K'>_B` together with the bases it was built from.
#[derive(Clone, Debug)]
pub struct ResourceState {
    n: usize,
    state: StateVector,
    basis_a: OrthonormalBasis,
    basis_b: OrthonormalBasis,
    schedules: Option<(AngleSchedule, AngleSchedule)>,
}

pub fn build_resource(basis_a: OrthonormalBasis, basis_b: OrthonormalBasis) -> Result<ResourceState> {
    if basis_a.n() != basis_b.n() {
        return Err(Error::DimensionMismatch {
            expected: basis_a.len(),
            actual: basis_b.len(),
        });
    }
    let n = basis_a.n();
    let dim = basis_a.len();
    let norm = 1.0 / (dim as f64).sqrt();
    let amps = par::map_fine(dim * dim, |idx| {
        let (i, j) = (idx / dim, idx % dim);
        let sum: C64 = basis_a
            .vectors()
            .iter()
            .zip(basis_b.vectors())
            .map(|(a, b)| a.amp(i) * b.amp(j))
            .sum();
        sum * norm
    });
    Ok(ResourceState {
        n,
        state: StateVector::new(2 * n, amps)?,
        basis_a,
        basis_b,
        schedules: None,
    })
}

impl ResourceState {
    /// Resource over the recursive A- and B-side families of two schedules.
    pub fn from_schedules(
        a: &AngleSchedule,
        b: &AngleSchedule,
        convention: SignConvention,
    ) -> Result<Self> {
        let mut r = build_resource(build_basis_a_with(a, convention), build_basis_b(b))?;
        r.schedules = Some((a.clone(), b.clone()));
        Ok(r)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn basis_a(&self) -> &OrthonormalBasis {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &OrthonormalBasis {
        &self.basis_b
    }

    pub fn schedules(&self) -> Option<&(AngleSchedule, AngleSchedule)> {
        self.schedules.as_ref()
    }

    /// Reduced state on `A1..An`.
    pub fn a_marginal(&self) -> DensityMatrix {
        let keep: Vec<usize> = (0..self.n).collect();
        self.state.partial_trace(&keep).expect("valid qubit range")
    }

    /// Largest entrywise deviation of the A marginal from `I / 2^n`.
    pub fn a_marginal_deviation(&self) -> f64 {
        self.a_marginal()
            .max_abs_diff(&DensityMatrix::maximally_mixed(self.n))
    }

    pub fn file(&self) -> ResourceFile<'_> {
        ResourceFile {
            num_qubits: self.state.num_qubits(),
            amps: self.state.amps().iter().map(|a| [a.re, a.im]).collect(),
            n: self.n,
            schedule_a: self.schedules.as_ref().map(|s| &s.0),
            schedule_b: self.schedules.as_ref().map(|s| &s.1),
        }
    }
}

/// On-disk form: the state file plus provenance keys.
#[derive(Serialize)]
pub struct ResourceFile<'a> {
    pub num_qubits: usize,
    pub amps: Vec<[f64; 2]>,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule_a: Option<&'a AngleSchedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule_b: Option<&'a AngleSchedule>,
}

fn from_signed_terms(num_qubits: usize, terms: &[(&str, f64)], scale: f64) -> StateVector {
    let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
    for (bits, sign) in terms {
        let idx = usize::from_str_radix(bits, 2).expect("binary literal");
        amps[idx] = C64::new(sign * scale, 0.0);
    }
    StateVector::new(num_qubits, amps).expect("literal width matches")
}

/// The six-qubit cluster state in `A1A2A3B1B2B3` order.
pub fn cluster6_reference() -> StateVector {
    let terms = [
        ("110111", 1.0),
        ("111110", -1.0),
        ("101101", -1.0),
        ("100100", 1.0),
        ("000000", 1.0),
        ("001001", 1.0),
        ("010011", 1.0),
        ("011010", 1.0),
    ];
    from_signed_terms(6, &terms, 1.0 / 8f64.sqrt())
}

/// Linear four-qubit cluster state `(|0000> + |0011> + |1100> - |1111>) / 2`.
pub fn cluster4_reference() -> StateVector {
    let terms = [("0000", 1.0), ("0011", 1.0), ("1100", 1.0), ("1111", -1.0)];
    from_signed_terms(4, &terms, 0.5)
}

/// Angle constraints that reduce the three-qubit family to the cluster
/// form: `a = (t1, t2, t3, 0)`, `b = (t1, pi/2 - t2, t3, pi/2)` on the
/// last level, lower levels zero.
pub fn cluster6_schedule(t1: f64, t2: f64, t3: f64) -> (AngleSchedule, AngleSchedule) {
    let a = AngleSchedule::with_last_level(vec![t1, t2, t3, 0.0]).expect("four angles");
    let b = AngleSchedule::with_last_level(vec![t1, FRAC_PI_2 - t2, t3, FRAC_PI_2])
        .expect("four angles");
    (a, b)
}

/// Resource over the three-qubit lists (computational two-qubit prefixes)
/// at the cluster angle constraints.
pub fn cluster6_resource(t1: f64, t2: f64, t3: f64) -> ResourceState {
    let (a, b) = cluster6_schedule(t1, t2, t3);
    let basis_a =
        build_over_computational_prefix(a.last_level(), Side::A, SignConvention::Faithful)
            .expect("four angles");
    let basis_b =
        build_over_computational_prefix(b.last_level(), Side::B, SignConvention::Faithful)
            .expect("four angles");
    let mut r = build_resource(basis_a, basis_b).expect("matching sizes");
    r.schedules = Some((a, b));
    r
}

/// Resource over computational prefixes and arbitrary last-level angles.
pub fn resource_over_computational_prefix(
    a_last: &[f64],
    b_last: &[f64],
    convention: SignConvention,
) -> Result<ResourceState> {
    build_resource(
        build_over_computational_prefix(a_last, Side::A, convention)?,
        build_over_computational_prefix(b_last, Side::B, convention)?,
    )
}

/// Permutation taking `A1..An B1..Bn` order to `A1 B1 A2 B2 ...` order.
pub fn interleave_permutation(n: usize) -> Vec<usize> {
    (0..2 * n)
        .map(|j| if j % 2 == 0 { j / 2 } else { n + j / 2 })
        .collect()
}

/// `n` Bell pairs `(|00> + |11>)/sqrt(2)` on `(A_i, B_i)`, in `A1..An B1..Bn` order.
pub fn bell_product_reference(n: usize) -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let pair = StateVector::from_real(&[h, 0.0, 0.0, h]).expect("two qubits");
    let mut interleaved = pair.clone();
    for _ in 1..n {
        interleaved = crate::qcore::kron(&interleaved, &pair);
    }
    // result qubit j < n is A_j (interleaved 2j); j >= n is B_(j-n).
    let perm: Vec<usize> = (0..2 * n)
        .map(|j| if j < n { 2 * j } else { 2 * (j - n) + 1 })
        .collect();
    crate::qcore::permute_qubits(&interleaved, &perm).expect("valid permutation")
}

/// Two-qubit reduced state on `(A_n, B_n)`.
pub fn reduced_last_pair(r: &ResourceState) -> DensityMatrix {
    r.state
        .partial_trace(&[r.n - 1, 2 * r.n - 1])
        .expect("valid qubits")
}

/// Entries of the `{|00>, |11>}` block of the last-pair reduced state:
/// `diag = <00|rho|00> = <11|rho|11>`, `off = <00|rho|11> = <11|rho|00>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockCoefficients {
    pub diag: f64,
    pub off: f64,
}

impl BlockCoefficients {
    pub fn determinant(&self) -> f64 {
        self.diag * self.diag - self.off * self.off
    }
}

/// Closed form of the `{|00>,|11>}` block from the last-level angles.
///
/// With `2^(n-1)` pairs, pair `p` contributes `cos^2(t_p - t'_p)` to both
/// sums, except pair 1, which contributes `cos^2(t_1 + t'_1)` to `diag` and
/// `-cos^2(t_1 + t'_1)` to `off`. Both sums carry a `1/2^n` factor so that
/// they are matrix entries of a unit-trace state.
pub fn closed_form_block(a_angles: &[f64], b_angles: &[f64]) -> Result<BlockCoefficients> {
    let pairs = a_angles.len();
    if pairs == 0 || !pairs.is_power_of_two() || b_angles.len() != pairs {
        return Err(Error::MalformedSchedule(format!(
            "closed form needs equal power-of-two angle counts, got {} and {}",
            a_angles.len(),
            b_angles.len()
        )));
    }
    let mut diag = 0.0;
    let mut off = 0.0;
    for (p, (&t, &tp)) in a_angles.iter().zip(b_angles).enumerate() {
        if p == 1 {
            let c = (t + tp).cos().powi(2);
            diag += c;
            off -= c;
        } else {
            let c = (t - tp).cos().powi(2);
            diag += c;
            off += c;
        }
    }
    let norm = 1.0 / (2 * pairs) as f64;
    Ok(BlockCoefficients {
        diag: diag * norm,
        off: off * norm,
    })
}
