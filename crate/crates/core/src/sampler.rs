//! Deterministic Monte Carlo over random prospect lattices.
//!
//! Combined amplitudes are drawn isotropically on the unit sphere of the
//! full basis and split by first-factor mode into one prospect per mode.
//! Sample `i` always uses ChaCha stream `i` of the configured seed, so a
//! summary depends only on the configuration, never on thread scheduling.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate_prospect, feasible_q_range};
use crate::error::{Error, Result};
use crate::mindspace::{build_frame, factor_combined, ActionFrame, ProspectLattice, StrategicState};
use crate::paradox::{self, ParadoxReport, ParadoxScenario, Proposition, Verdict, BOUNDARY_BAND};
use crate::probability::{decompose, interference_of, lattice_report_with};
use crate::AGGREGATE_TOL;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraints {
    /// Rebalance attractions so they sum to zero.
    pub alternation: bool,
    /// `p(A1 X_j) > p(A2 X_j)` for every outcome.
    pub majorization: bool,
    /// `p(A1 X_j) = p(A2 X_j)` for every outcome.
    pub equal_conditionals: bool,
    /// Pin `p(A1 X1)` to one half on a 2x2 lattice.
    pub leading_half: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub shape: Vec<usize>,
    pub sample_count: usize,
    pub seed: u64,
    pub constraints: Constraints,
    /// Multiplier in `[0, 1]` applied to every sampled attraction factor.
    pub q_scale: f64,
    /// Thread count; `None` uses the global pool. Never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl SampleConfig {
    pub fn new(shape: Vec<usize>, sample_count: usize, seed: u64) -> Self {
        SampleConfig { shape, sample_count, seed, constraints: Constraints::default(), q_scale: 1.0, workers: None }
    }

    pub fn with_constraints(mut self, constraints: Constraints) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn with_q_scale(mut self, q_scale: f64) -> Self {
        self.q_scale = q_scale;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::ConstraintInfeasible(msg.to_string()));
        if self.sample_count == 0 {
            return fail("sample count must be at least 1");
        }
        if self.shape.is_empty() || self.shape.contains(&0) {
            return fail("every factor needs at least one mode");
        }
        if self.workers == Some(0) {
            return fail("worker count must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.q_scale) {
            return fail("q scale must lie in [0, 1]");
        }
        let c = &self.constraints;
        if (c.majorization || c.equal_conditionals || c.leading_half) && self.shape[0] != 2 {
            return fail("outcome constraints need exactly two prospects");
        }
        if c.majorization && c.equal_conditionals {
            return fail("majorization and equal conditionals exclude each other");
        }
        if c.leading_half && self.shape.iter().product::<usize>() != 4 {
            return fail("the leading-half constraint needs a 2x2 lattice");
        }
        if c.leading_half && c.equal_conditionals {
            return fail("equal conditionals cannot keep p(A1 X1) at one half");
        }
        Ok(())
    }
}

/// Draws lattices for one configuration.
#[derive(Debug, Clone)]
pub struct Sampler {
    config: SampleConfig,
    frame: ActionFrame,
}

impl Sampler {
    pub fn new(config: SampleConfig) -> Result<Self> {
        config.validate()?;
        let labels: Vec<String> = (0..config.shape.len()).map(factor_label).collect();
        let factors: Vec<(&str, usize)> = labels.iter().map(String::as_str).zip(config.shape.iter().copied()).collect();
        let frame = build_frame(&factors)?;
        Ok(Sampler { config, frame })
    }

    pub fn config(&self) -> &SampleConfig {
        &self.config
    }

    pub fn frame(&self) -> &ActionFrame {
        &self.frame
    }

    /// Sample number `index`.
    pub fn sample(&self, index: u64) -> Result<(StrategicState, ProspectLattice)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index);
        let dim = self.frame.dim();
        let rows = self.config.shape[0];
        let width = dim / rows;

        let z = loop {
            let z: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                .collect();
            let norm = z.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-150 {
                break z.into_iter().map(|z| z / norm).collect::<Vec<_>>();
            }
        };
        let mut partials: Vec<Vec<f64>> = z.chunks(width).map(|r| r.iter().map(|z| z.norm_sqr()).collect()).collect();
        let phases: Vec<Vec<f64>> = z.chunks(width).map(|r| r.iter().map(|z| z.arg()).collect()).collect();
        self.apply_outcome_constraints(&mut partials);

        let recalibrate = self.config.constraints.alternation || self.config.q_scale != 1.0;
        let phases = if recalibrate { self.calibrated_phases(&partials, &phases)? } else { phases };

        let dense = partials
            .iter()
            .zip(&phases)
            .enumerate()
            .map(|(n, (p, phi))| {
                let mut row = vec![Complex64::new(0.0, 0.0); dim];
                for (j, (p, phi)) in p.iter().zip(phi).enumerate() {
                    row[n * width + j] = Complex64::from_polar(p.sqrt(), *phi);
                }
                (format!("pi{}", n + 1), row)
            })
            .collect();
        factor_combined(&self.frame, dense)
    }

    fn apply_outcome_constraints(&self, partials: &mut [Vec<f64>]) {
        let c = &self.config.constraints;
        if c.equal_conditionals {
            partials[1] = partials[0].clone();
        }
        if c.majorization {
            let (a, b) = partials.split_at_mut(1);
            for (x, y) in a[0].iter_mut().zip(b[0].iter_mut()) {
                if *x < *y {
                    std::mem::swap(x, y);
                }
            }
        }
        if c.leading_half {
            let rest: f64 = partials.iter().flatten().sum::<f64>() - partials[0][0];
            for (k, p) in partials.iter_mut().flatten().enumerate() {
                *p = if k == 0 { 0.5 } else { *p * 0.5 / rest };
            }
        }
        let total: f64 = partials.iter().flatten().sum();
        for p in partials.iter_mut().flatten() {
            *p /= total;
        }
    }

    /// Phases reproducing the sampled attractions after clamping into each
    /// row's reachable range, optional rebalancing to zero sum, and scaling.
    fn calibrated_phases(&self, partials: &[Vec<f64>], phases: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut q = Vec::with_capacity(partials.len());
        let mut ranges = Vec::with_capacity(partials.len());
        for (p, phi) in partials.iter().zip(phases) {
            if p.iter().all(|x| *x == 0.0) {
                q.push(0.0);
                ranges.push((0.0, 0.0));
                continue;
            }
            let z: Vec<Complex64> = p.iter().zip(phi).map(|(p, phi)| Complex64::from_polar(p.sqrt(), *phi)).collect();
            let range = feasible_q_range(p)?;
            q.push(interference_of(&z).clamp(range.q_min, range.q_max));
            ranges.push((range.q_min, range.q_max));
        }
        if self.config.constraints.alternation {
            balance(&mut q, &ranges);
        }
        for q in &mut q {
            *q *= self.config.q_scale;
        }
        partials
            .iter()
            .zip(&q)
            .map(|(p, &q)| {
                if p.iter().all(|x| *x == 0.0) {
                    return Ok(vec![0.0; p.len()]);
                }
                calibrate_prospect(p, q).map_err(|e| Error::ConstraintInfeasible(e.to_string()))
            })
            .collect()
    }
}

fn factor_label(k: usize) -> String {
    match k {
        0 => "A".to_string(),
        1 => "X".to_string(),
        k => format!("F{k}"),
    }
}

/// Removes the excess `sum q` by moving each entry toward the far end of
/// its range, in proportion to the room left there. Every range contains 0,
/// so the room always covers the excess.
fn balance(q: &mut [f64], ranges: &[(f64, f64)]) {
    let excess: f64 = q.iter().sum();
    if excess == 0.0 {
        return;
    }
    let room: Vec<f64> =
        q.iter().zip(ranges).map(|(q, (lo, hi))| if excess > 0.0 { q - lo } else { hi - q }).collect();
    let total: f64 = room.iter().sum();
    if total <= 0.0 {
        q.iter_mut().for_each(|q| *q = 0.0);
        return;
    }
    for ((q, r), (lo, hi)) in q.iter_mut().zip(&room).zip(ranges) {
        *q = (*q - excess * r / total).clamp(*lo, *hi);
    }
}

pub fn random_lattice_state(config: &SampleConfig, index: u64) -> Result<(StrategicState, ProspectLattice)> {
    Sampler::new(config.clone())?.sample(index)
}

/// Propositions the suite can evaluate on sampled lattices.
pub const SUITE_PROPOSITIONS: [u8; 11] = [1, 2, 7, 8, 10, 11, 12, 13, 14, 15, 16];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PropositionSummary {
    /// Samples evaluated outside the boundary band.
    pub evaluated: usize,
    pub boundary: usize,
    /// Samples whose preconditions failed.
    pub not_applicable: usize,
    pub agreements: usize,
    pub effects: usize,
    /// `agreements / evaluated`; absent when nothing was evaluated.
    pub agreement_rate: Option<f64>,
    /// `effects / evaluated`.
    pub effect_frequency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub config: SampleConfig,
    pub samples: usize,
    /// Samples the generator could not produce under the constraints.
    pub rejected: usize,
    pub propositions: BTreeMap<Proposition, PropositionSummary>,
    /// `max |sum_n q_n|`.
    pub max_alternation_residual: f64,
    /// `max |sum_n p_n - 1 - sum_n q_n|`.
    pub max_contrapositive_residual: f64,
    /// `max |p - utility - q|` with `q` from the double sum.
    pub max_decomposition_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Entry {
    NotApplicable,
    Boundary,
    Evaluated { agrees: bool, effect: bool },
}

#[derive(Debug, Clone)]
struct Tally {
    samples: usize,
    rejected: usize,
    counts: Vec<PropositionSummary>,
    alternation: f64,
    contrapositive: f64,
    decomposition: f64,
}

impl Tally {
    fn empty(props: usize) -> Self {
        Tally {
            samples: 0,
            rejected: 0,
            counts: vec![PropositionSummary::default(); props],
            alternation: 0.0,
            contrapositive: 0.0,
            decomposition: 0.0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.samples += other.samples;
        self.rejected += other.rejected;
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            a.evaluated += b.evaluated;
            a.boundary += b.boundary;
            a.not_applicable += b.not_applicable;
            a.agreements += b.agreements;
            a.effects += b.effects;
        }
        self.alternation = self.alternation.max(other.alternation);
        self.contrapositive = self.contrapositive.max(other.contrapositive);
        self.decomposition = self.decomposition.max(other.decomposition);
        self
    }
}

/// Runs the listed propositions over `config.sample_count` samples.
pub fn run_suite(config: &SampleConfig, propositions: &[Proposition]) -> Result<SampleSummary> {
    if let Some(p) = propositions.iter().find(|p| !SUITE_PROPOSITIONS.contains(&p.id())) {
        return Err(Error::UnsupportedProposition(p.to_string()));
    }
    let sampler = Sampler::new(config.clone())?;
    let work = || {
        (0..config.sample_count as u64)
            .into_par_iter()
            .map(|i| evaluate_sample(&sampler, i, propositions))
            .reduce(|| Tally::empty(propositions.len()), Tally::merge)
    };
    let tally = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::ConstraintInfeasible(e.to_string()))?
            .install(work),
        None => work(),
    };
    let propositions = propositions
        .iter()
        .zip(tally.counts)
        .map(|(p, mut s)| {
            if s.evaluated > 0 {
                s.agreement_rate = Some(s.agreements as f64 / s.evaluated as f64);
                s.effect_frequency = Some(s.effects as f64 / s.evaluated as f64);
            }
            (*p, s)
        })
        .collect();
    Ok(SampleSummary {
        config: config.clone(),
        samples: tally.samples,
        rejected: tally.rejected,
        propositions,
        max_alternation_residual: tally.alternation,
        max_contrapositive_residual: tally.contrapositive,
        max_decomposition_residual: tally.decomposition,
    })
}

fn evaluate_sample(sampler: &Sampler, index: u64, propositions: &[Proposition]) -> Tally {
    let mut tally = Tally::empty(propositions.len());
    tally.samples = 1;
    let Ok((psi, lattice)) = sampler.sample(index) else {
        tally.rejected = 1;
        return tally;
    };
    let measured = (|| -> Result<_> {
        let decomposition = paradox::check_decomposition(&lattice, &psi)?;
        let report = lattice_report_with(&lattice, &psi, AGGREGATE_TOL)?;
        let scenario = ParadoxScenario::from_state(&lattice, &psi)?;
        Ok((decomposition, report, scenario))
    })();
    let Ok((decomposition, report, scenario)) = measured else {
        tally.rejected = 1;
        return tally;
    };
    tally.decomposition = decomposition.details["max_residual"];
    tally.alternation = report.alternation_sum.abs();
    tally.contrapositive = (report.probability_sum - 1.0 - report.alternation_sum).abs();

    for (k, prop) in propositions.iter().enumerate() {
        let entry = match prop.id() {
            1 => Entry::Evaluated { agrees: decomposition.verdict.holds(), effect: false },
            2 => match paradox::check_alternation(&lattice, &psi, AGGREGATE_TOL) {
                Ok(r) => Entry::Evaluated { agrees: r.agrees == Some(true), effect: r.verdict.holds() },
                Err(_) => Entry::NotApplicable,
            },
            _ => evaluate_checker(*prop, &scenario),
        };
        let c = &mut tally.counts[k];
        match entry {
            Entry::NotApplicable => c.not_applicable += 1,
            Entry::Boundary => c.boundary += 1,
            Entry::Evaluated { agrees, effect } => {
                c.evaluated += 1;
                c.agreements += agrees as usize;
                c.effects += effect as usize;
            }
        }
    }
    tally
}

fn near(x: f64) -> bool {
    x.abs() <= BOUNDARY_BAND
}

/// Dual evaluation of one biconditional: boundary when the governing
/// condition or the direct comparison sits inside the band.
fn dual(r: &ParadoxReport) -> Entry {
    let direct = r.details.get("direct_gap").copied().unwrap_or(r.margin);
    if r.verdict == Verdict::Boundary || near(direct) {
        return Entry::Boundary;
    }
    Entry::Evaluated { agrees: r.agrees == Some(true), effect: r.verdict.holds() }
}

fn evaluate_checker(prop: Proposition, s: &ParadoxScenario) -> Entry {
    if s.prospects() < 2 {
        return Entry::NotApplicable;
    }
    match prop.id() {
        7 => {
            let s = if s.q()[1] > s.q()[0] { s.clone().swap_prospects(0, 1) } else { s.clone() };
            match paradox::check_ellsberg(&s) {
                Ok(r) if r.verdict == Verdict::Boundary || near(r.details["q_gap"]) => Entry::Boundary,
                Ok(r) => Entry::Evaluated { agrees: (r.margin > 0.0) == (r.details["q_gap"] > 0.0), effect: r.verdict.holds() },
                Err(_) => Entry::NotApplicable,
            }
        }
        8 => {
            let s = if s.partial_gap(0, 1) < 0.0 { s.clone().swap_prospects(0, 1) } else { s.clone() };
            paradox::check_inversion(&s, 0, 1).map_or(Entry::NotApplicable, |r| dual(&r))
        }
        10 => {
            let s = if s.q()[0] > s.q()[1] { s.clone().swap_prospects(0, 1) } else { s.clone() };
            paradox::check_certainty(&s, 0, 1).map_or(Entry::NotApplicable, |r| dual(&r))
        }
        11 => {
            let s = if s.joints()[1][0] > s.joints()[0][0] { s.clone().swap_prospects(0, 1) } else { s.clone() };
            paradox::check_disjunction(&s).map_or(Entry::NotApplicable, |r| dual(&r))
        }
        12 => paradox::check_conjunction(s).map_or(Entry::NotApplicable, |r| dual(&r)),
        13 => paradox::check_isolation(s).map_or(Entry::NotApplicable, |r| dual(&r)),
        _ => {
            if s.prospects() != 2 || s.outcomes() != 2 {
                return Entry::NotApplicable;
            }
            let s = if s.joints()[0][1] > s.joints()[0][0] { s.clone().swap_outcomes(0, 1) } else { s.clone() };
            match paradox::check_combined(&s) {
                Ok(r) if r.proposition != prop => Entry::NotApplicable,
                Ok(r) if r.verdict == Verdict::Boundary => Entry::Boundary,
                Ok(r) => {
                    let effect = if prop == Proposition::REVERSAL_IMPLIES_FALLACY {
                        r.details["reversal_margin"] > 0.0
                    } else {
                        r.details["fallacy_margin"] > 0.0
                    };
                    Entry::Evaluated { agrees: r.verdict.holds(), effect }
                }
                Err(_) => Entry::NotApplicable,
            }
        }
    }
}

/// Prospect probabilities of a sampled lattice.
pub fn sampled_probabilities(lattice: &ProspectLattice, psi: &StrategicState) -> Result<Vec<f64>> {
    lattice.prospects().iter().map(|p| decompose(p, psi).map(|r| r.probability)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(seed: u64) -> SampleConfig {
        SampleConfig::new(vec![2, 2], 200, seed)
    }

    #[test]
    fn same_seed_same_state() {
        let c = binary(11);
        let (a, la) = random_lattice_state(&c, 3).unwrap();
        let (b, lb) = random_lattice_state(&c, 3).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        assert_eq!(la.prospects()[1].amplitudes(), lb.prospects()[1].amplitudes());
        let (_, other) = random_lattice_state(&c, 4).unwrap();
        assert_ne!(la.prospects()[0].amplitudes(), other.prospects()[0].amplitudes());
    }

    #[test]
    fn sphere_normalization() {
        let c = SampleConfig::new(vec![2, 2], 1, 5);
        let s = Sampler::new(c).unwrap();
        for i in 0..50 {
            let (psi, lattice) = s.sample(i).unwrap();
            assert!((lattice.joint_normalization(&psi).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn alternation_enforced() {
        let c = binary(1).with_constraints(Constraints { alternation: true, ..Default::default() });
        let s = Sampler::new(c).unwrap();
        for i in 0..100 {
            let (psi, lattice) = s.sample(i).unwrap();
            let q: Vec<f64> = lattice.prospects().iter().map(|p| decompose(p, &psi).unwrap().attraction).collect();
            assert!((q[0] + q[1]).abs() < 1e-10);
            let p = sampled_probabilities(&lattice, &psi).unwrap();
            assert!((p[0] + p[1] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn outcome_constraints_hold() {
        let maj = Constraints { alternation: true, majorization: true, ..Default::default() };
        let s = Sampler::new(binary(2).with_constraints(maj)).unwrap();
        let half = Constraints { alternation: true, leading_half: true, ..Default::default() };
        let h = Sampler::new(binary(2).with_constraints(half)).unwrap();
        for i in 0..50 {
            let (psi, lattice) = s.sample(i).unwrap();
            let sc = ParadoxScenario::from_state(&lattice, &psi).unwrap();
            assert!(sc.joints()[0].iter().zip(&sc.joints()[1]).all(|(a, b)| a >= b));
            let (psi, lattice) = h.sample(i).unwrap();
            let sc = ParadoxScenario::from_state(&lattice, &psi).unwrap();
            assert!((sc.joints()[0][0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_constraints_rejected() {
        let both = Constraints { majorization: true, equal_conditionals: true, ..Default::default() };
        assert!(matches!(Sampler::new(binary(0).with_constraints(both)), Err(Error::ConstraintInfeasible(_))));
        assert!(Sampler::new(SampleConfig::new(vec![2, 2], 0, 0)).is_err());
        let maj = Constraints { majorization: true, ..Default::default() };
        assert!(Sampler::new(SampleConfig::new(vec![3, 2], 1, 0).with_constraints(maj)).is_err());
        assert!(Sampler::new(binary(0).with_q_scale(2.0)).is_err());
    }

    #[test]
    fn disjunction_agreement() {
        let c = binary(9).with_constraints(Constraints { alternation: true, majorization: true, ..Default::default() });
        let s = run_suite(&c, &[Proposition::DISJUNCTION]).unwrap();
        let p = s.propositions[&Proposition::DISJUNCTION];
        assert!(p.evaluated > 100);
        assert_eq!(p.agreement_rate, Some(1.0));
        assert!(s.max_alternation_residual < 1e-10);
    }

    #[test]
    fn conjunction_frequency_interior() {
        let s = run_suite(&binary(4), &[Proposition::CONJUNCTION]).unwrap();
        let f = s.propositions[&Proposition::CONJUNCTION].effect_frequency.unwrap();
        assert!(f > 0.0 && f < 1.0, "{f}");
    }

    #[test]
    fn classical_limit_kills_effects() {
        let c = binary(4).with_constraints(Constraints { alternation: true, ..Default::default() });
        let props = [Proposition::CONJUNCTION, Proposition::ISOLATION];
        let full = run_suite(&c, &props).unwrap();
        let zero = run_suite(&c.clone().with_q_scale(0.0), &props).unwrap();
        for p in props {
            assert!(full.propositions[&p].effects > 0);
            assert_eq!(zero.propositions[&p].effects, 0);
        }
    }

    #[test]
    fn summary_independent_of_workers() {
        let c = binary(7).with_constraints(Constraints { alternation: true, ..Default::default() });
        let props: Vec<Proposition> = SUITE_PROPOSITIONS.iter().map(|&i| Proposition::new(i).unwrap()).collect();
        let one = run_suite(&c.clone().with_workers(1), &props).unwrap();
        let four = run_suite(&c.clone().with_workers(4), &props).unwrap();
        assert_eq!(one.propositions, four.propositions);
        assert_eq!(one.max_decomposition_residual, four.max_decomposition_residual);
        assert!(run_suite(&c, &[Proposition::BAYES]).is_err());
    }
}
