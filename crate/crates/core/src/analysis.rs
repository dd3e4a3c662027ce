//! Structural comparisons: Bell-product witness, permutation/phase matching
//! and the four-qubit cluster search.

use std::f64::consts::FRAC_PI_2;

use itertools::Itertools;
use serde::{Serialize, Serializer};

use crate::bases::{AngleSchedule, SignConvention};
use crate::error::{Error, Result};
use crate::par;
use crate::qcore::{permute_qubits, StateVector, C64};
use crate::resource::{cluster4_reference, reduced_last_pair, ResourceState};

/// Purity below `1 - WITNESS_GAP` certifies a non-Bell-product resource.
pub const WITNESS_GAP: f64 = 1e-8;

/// Default fidelity threshold for a structural match.
pub const MATCH_THRESHOLD: f64 = 1.0 - 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NotBellProduct,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub purity: f64,
    pub verdict: Verdict,
}

/// A mixed `(A_n, B_n)` marginal rules out a product of Bell pairs on
/// `(A_i, B_i)`. A pure marginal proves nothing.
pub fn bell_product_witness(r: &ResourceState) -> Witness {
    let purity = reduced_last_pair(r).purity();
    let verdict = if purity < 1.0 - WITNESS_GAP {
        Verdict::NotBellProduct
    } else {
        Verdict::Inconclusive
    };
    Witness { purity, verdict }
}

fn serialize_phase<S: Serializer>(phase: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [phase.re, phase.im].serialize(s)
}

/// Best match of a candidate against a reference. `permuted(candidate)`
/// is approximately `phase * reference` with the given fidelity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchReport {
    pub matched: bool,
    pub fidelity: f64,
    #[serde(serialize_with = "serialize_phase")]
    pub phase: C64,
    pub permutation: Vec<usize>,
}

/// Fidelities are compared on a 1e-12 grid so that near-equal values tie
/// and ties fall to the earliest candidate.
fn fidelity_key(f: f64) -> i64 {
    (f * 1e12).round() as i64
}

/// Every permutation of `0..m` in lexicographic order, identity first.
pub fn all_permutations(m: usize) -> Vec<Vec<usize>> {
    (0..m).permutations(m).collect()
}

pub fn match_up_to_phase_perm(
    candidate: &StateVector,
    reference: &StateVector,
    perms: &[Vec<usize>],
    threshold: f64,
) -> Result<MatchReport> {
    if candidate.num_qubits() != reference.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: reference.dim(),
            actual: candidate.dim(),
        });
    }
    if perms.is_empty() {
        return Err(Error::Invalid("empty permutation set".into()));
    }
    let overlaps = par::map_tasks(perms.len(), |i| -> Result<C64> {
        reference.inner(&permute_qubits(candidate, &perms[i])?)
    });
    let mut best: Option<(usize, C64)> = None;
    for (i, ov) in overlaps.into_iter().enumerate() {
        let ov = ov?;
        let better = match best {
            None => true,
            Some((_, b)) => fidelity_key(ov.norm_sqr()) > fidelity_key(b.norm_sqr()),
        };
        if better {
            best = Some((i, ov));
        }
    }
    let (i, ov) = best.expect("nonempty");
    let fidelity = ov.norm_sqr().min(1.0);
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
    Ok(MatchReport {
        matched: fidelity >= threshold,
        fidelity,
        phase,
        permutation: perms[i].clone(),
    })
}

/// Result of the n=2 angle search.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterSearch {
    pub schedule_a: AngleSchedule,
    pub schedule_b: AngleSchedule,
    pub report: MatchReport,
    pub grid_points: usize,
}

/// Grid values `0, step, 2 step, ...` up to `pi/2` inclusive.
pub fn angle_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Invalid(format!("grid step must be positive, got {step}")));
    }
    let count = (FRAC_PI_2 / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| k as f64 * step).collect())
}

/// Searches last-level angles `(a1, a2, b1, b2)` on a grid over `[0, pi/2]`
/// (level-1 angles zero) for the n=2 resource closest to the linear
/// four-qubit cluster state.
pub fn search_cluster_angles_n2(grid_step: f64, perms: &[Vec<usize>]) -> Result<ClusterSearch> {
    search_n2_against(&cluster4_reference(), grid_step, perms)
}

/// The same search against an arbitrary four-qubit reference. Ties in
/// fidelity go to the lexicographically smallest `(a1, a2, b1, b2)`.
pub fn search_n2_against(
    reference: &StateVector,
    grid_step: f64,
    perms: &[Vec<usize>],
) -> Result<ClusterSearch> {
    if reference.num_qubits() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 16,
            actual: reference.dim(),
        });
    }
    let grid = angle_grid(grid_step)?;
    let g = grid.len();
    let points = g.pow(4);
    let schedules = |idx: usize| {
        let pick = |k: u32| grid[(idx / g.pow(3 - k)) % g];
        let a = AngleSchedule::new(vec![vec![0.0], vec![pick(0), pick(1)]]).expect("two levels");
        let b = AngleSchedule::new(vec![vec![0.0], vec![pick(2), pick(3)]]).expect("two levels");
        (a, b)
    };
    let reports = par::map_tasks(points, |idx| -> Result<MatchReport> {
        let (a, b) = schedules(idx);
        let r = ResourceState::from_schedules(&a, &b, SignConvention::Faithful)?;
        match_up_to_phase_perm(r.state(), reference, perms, MATCH_THRESHOLD)
    });
    let mut best: Option<(usize, MatchReport)> = None;
    for (idx, report) in reports.into_iter().enumerate() {
        let report = report?;
        let better = match &best {
            None => true,
            Some((_, b)) => fidelity_key(report.fidelity) > fidelity_key(b.fidelity),
        };
        if better {
            best = Some((idx, report));
        }
    }
    let (idx, report) = best.expect("grid is nonempty");
    let (schedule_a, schedule_b) = schedules(idx);
    Ok(ClusterSearch {
        schedule_a,
        schedule_b,
        report,
        grid_points: points,
    })
}
