//! Self-check suite run by `telecluster verify`.
//!
//! Each check reproduces one structural claim about the resource family at
//! a fixed tolerance and reports the worst measured deviation.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_8};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analysis::{all_permutations, search_cluster_angles_n2};
use crate::bases::{computational_basis, AngleSchedule, SignConvention};
use crate::error::{Error, Result};
use crate::measurement::{born_probabilities, build_pi_basis, OutcomeSampler, PauliLabels};
use crate::protocols::{dense_round_trip, teleport_exhaustive, transfer_operator_check, verify_decomposition, DenseCodebook};
use crate::qcore::{fidelity_pure, kron, permute_qubits, StateVector};
use crate::resource::{
    build_resource, closed_form_block, cluster6_reference, cluster6_resource,
    interleave_permutation, reduced_last_pair, ResourceState,
};

/// `(id, name)` of every check, in run order.
pub const CRITERIA: [(u8, &str); 9] = [
    (1, "teleport"),
    (2, "decomposition"),
    (3, "transfer"),
    (4, "cluster6"),
    (5, "block"),
    (6, "densecode"),
    (7, "bell"),
    (8, "cluster-n2"),
    (9, "sampler"),
];

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Names from [`CRITERIA`]; empty runs everything.
    pub only: Vec<String>,
    /// Largest payload size for the per-n sweeps. At 3 or more, a single
    /// `n_max + 1` teleportation smoke case is added.
    pub n_max: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            only: Vec::new(),
            n_max: 3,
            seed: 20_100_601,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub criteria: Vec<CriterionOutcome>,
}

fn rng_for(opts: &VerifyOptions, id: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(31).wrapping_add(id as u64))
}

fn random_resource<R: Rng>(n: usize, rng: &mut R) -> Result<ResourceState> {
    let a = AngleSchedule::random(n, rng);
    let b = AngleSchedule::random(n, rng);
    ResourceState::from_schedules(&a, &b, SignConvention::Faithful)
}

pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    for name in &opts.only {
        if !CRITERIA.iter().any(|(_, n)| n == name) {
            return Err(Error::Invalid(format!("unknown criterion {name:?}")));
        }
    }
    if opts.n_max == 0 {
        return Err(Error::Invalid("n-max must be at least 1".into()));
    }
    let mut criteria = Vec::new();
    for (id, name) in CRITERIA {
        if !opts.only.is_empty() && !opts.only.iter().any(|o| o == name) {
            continue;
        }
        let (passed, detail) = run_one(id, opts)?;
        criteria.push(CriterionOutcome {
            id,
            name,
            passed,
            detail,
        });
    }
    Ok(VerifyReport {
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    })
}

fn run_one(id: u8, opts: &VerifyOptions) -> Result<(bool, Value)> {
    let mut rng = rng_for(opts, id);
    let n3 = opts.n_max.min(3);
    match id {
        1 => teleport(opts, &mut rng),
        2 => {
            let mut worst = 0.0f64;
            for n in 1..=n3 {
                for _ in 0..20 {
                    let r = random_resource(n, &mut rng)?;
                    let phi = StateVector::random(n, &mut rng);
                    worst = worst.max(verify_decomposition(&phi, &r)?);
                }
            }
            Ok((worst <= 1e-10, json!({ "max_residual": worst, "tolerance": 1e-10 })))
        }
        3 => {
            let mut worst = 0.0f64;
            for n in 1..=n3 {
                for _ in 0..20 {
                    worst = worst.max(transfer_operator_check(&random_resource(n, &mut rng)?)?);
                }
            }
            Ok((worst <= 1e-12, json!({ "max_deviation": worst, "tolerance": 1e-12 })))
        }
        4 => {
            let reference = cluster6_reference();
            let mut worst = 0.0f64;
            let mut spread = 0.0f64;
            let first = cluster6_resource(0.0, 0.0, 0.0);
            for _ in 0..20 {
                let t: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..=FRAC_PI_2));
                let r = cluster6_resource(t[0], t[1], t[2]);
                worst = worst.max(r.state().max_abs_diff(&reference)?);
                spread = spread.max(r.state().max_abs_diff(first.state())?);
            }
            Ok((
                worst <= 1e-12,
                json!({
                    "max_amplitude_deviation": worst,
                    "angle_dependence": spread,
                    "fidelity_to_reference": fidelity_pure(first.state(), &reference)?,
                    "tolerance": 1e-12,
                }),
            ))
        }
        5 => block(&mut rng),
        6 => {
            let mut failures = 0usize;
            let mut total = 0usize;
            let mut gram = 0.0f64;
            let mut marginal = 0.0f64;
            for n in 1..=n3 {
                let r = random_resource(n, &mut rng)?;
                let book = DenseCodebook::new(&r);
                for m in PauliLabels::all(n) {
                    total += 1;
                    match dense_round_trip(&book, &r, &m) {
                        Ok(rec) if rec.decoded == m => {}
                        _ => failures += 1,
                    }
                }
                gram = gram.max(book.max_off_diagonal());
                marginal = marginal.max(book.max_marginal_deviation());
            }
            Ok((
                failures == 0 && gram <= 1e-10 && marginal <= 1e-12,
                json!({
                    "messages": total,
                    "decode_failures": failures,
                    "max_gram_off_diagonal": gram,
                    "max_marginal_deviation": marginal,
                }),
            ))
        }
        7 => {
            let mut worst = 1.0f64;
            for n in 1..=n3 {
                let r = build_resource(computational_basis(n), computational_basis(n))?;
                let got = permute_qubits(r.state(), &interleave_permutation(n))?;
                let pair = StateVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2])?;
                let want = (1..n).fold(pair.clone(), |acc, _| kron(&acc, &pair));
                worst = worst.min(fidelity_pure(&got, &want)?);
            }
            Ok((worst >= 1.0 - 1e-12, json!({ "min_fidelity": worst })))
        }
        8 => {
            let start = Instant::now();
            let search = search_cluster_angles_n2(FRAC_PI_8, &all_permutations(4))?;
            let in_budget = start.elapsed().as_secs_f64() < 30.0;
            Ok((
                search.report.fidelity >= 1.0 - 1e-6 && in_budget,
                json!({
                    "fidelity": search.report.fidelity,
                    "schedule_a": search.schedule_a,
                    "schedule_b": search.schedule_b,
                    "permutation": search.report.permutation,
                    "within_time_budget": in_budget,
                }),
            ))
        }
        9 => sampler(opts, &mut rng),
        _ => unreachable!("ids come from CRITERIA"),
    }
}

fn teleport(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<(bool, Value)> {
    let start = Instant::now();
    let mut cases: Vec<(usize, usize)> = (1..=opts.n_max.min(3)).map(|n| (n, 20)).collect();
    if opts.n_max >= 3 {
        cases.push((opts.n_max + 1, 1));
    }
    let mut min_fidelity = 1.0f64;
    let mut max_prob_dev = 0.0f64;
    let mut branches = 0usize;
    for (n, trials) in cases {
        let target = 1.0 / (1u64 << (2 * n)) as f64;
        for _ in 0..trials {
            let r = random_resource(n, rng)?;
            let phi = StateVector::random(n, rng);
            for rec in teleport_exhaustive(&phi, &r)? {
                branches += 1;
                min_fidelity = min_fidelity.min(rec.fidelity);
                max_prob_dev = max_prob_dev.max((rec.probability - target).abs());
            }
        }
    }
    let in_budget = start.elapsed().as_secs_f64() < 60.0;
    Ok((
        min_fidelity >= 1.0 - 1e-10 && max_prob_dev <= 1e-10 && in_budget,
        json!({
            "branches": branches,
            "min_fidelity": min_fidelity,
            "max_probability_deviation": max_prob_dev,
            "within_time_budget": in_budget,
        }),
    ))
}

fn block(rng: &mut ChaCha8Rng) -> Result<(bool, Value)> {
    let mut worst = 0.0f64;
    let mut max_purity = 0.0f64;
    for _ in 0..100 {
        let a = AngleSchedule::random(3, rng);
        let b = AngleSchedule::random(3, rng);
        let r = ResourceState::from_schedules(&a, &b, SignConvention::Faithful)?;
        let rho = reduced_last_pair(&r);
        let c = closed_form_block(a.last_level(), b.last_level())?;
        for (row, col, want) in [(0, 0, c.diag), (3, 3, c.diag), (0, 3, c.off), (3, 0, c.off)] {
            worst = worst.max((rho.get(row, col) - want).norm());
        }
        max_purity = max_purity.max(rho.purity());
    }
    let cluster_purity = reduced_last_pair(&cluster6_resource(0.0, 0.0, 0.0)).purity();
    let passed =
        worst <= 1e-12 && (cluster_purity - 0.375).abs() <= 1e-12 && max_purity < 1.0 - 1e-6;
    Ok((
        passed,
        json!({
            "max_block_deviation": worst,
            "cluster6_purity": cluster_purity,
            "max_random_purity": max_purity,
        }),
    ))
}

fn sampler(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<(bool, Value)> {
    const DRAWS: usize = 40_000;
    let n = 2;
    let r = random_resource(n, rng)?;
    let phi = StateVector::random(n, rng);
    let basis = build_pi_basis(r.basis_a(), r.basis_b())?;
    let probs = born_probabilities(&kron(&phi, r.state()), &basis)?;
    let sampler = OutcomeSampler::new(&probs)?;
    let mut draw_rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut counts = vec![0usize; probs.len()];
    for _ in 0..DRAWS {
        counts[sampler.sample(&mut draw_rng)] += 1;
    }
    let expected = DRAWS as f64 / probs.len() as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = (probs.len() - 1) as f64;
    let p_value = 1.0 - ChiSquared::new(dof).expect("positive dof").cdf(statistic);
    let cell = 1.0 / probs.len() as f64;
    let sigma = (DRAWS as f64 * cell * (1.0 - cell)).sqrt();
    let max_z = counts
        .iter()
        .map(|&c| (c as f64 - expected).abs() / sigma)
        .fold(0.0, f64::max);
    Ok((
        p_value >= 1e-3 && max_z <= 5.0,
        json!({ "draws": DRAWS, "chi_square": statistic, "p_value": p_value, "max_z": max_z }),
    ))
}
