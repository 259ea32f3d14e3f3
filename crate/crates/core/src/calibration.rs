//! Realizing target partial probabilities and attraction factors.
//!
//! A prospect row fixes the moduli `sqrt(p_a)` of its combined amplitudes;
//! only the relative phases remain free, and they determine `q`. Two-term
//! rows are inverted in closed form. Longer rows use the one-parameter
//! family `phi_k = k * theta` over the positive entries, solved by grid
//! bracketing and bisection.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mindspace::{ActionFrame, BasicStateIndex, ProspectLattice, ProspectState, StrategicState};
use crate::{AGGREGATE_TOL, IDENTITY_TOL};

const GRID_BASE: usize = 1024;
const GRID_PER_TERM: usize = 64;
const THETA_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-9;

/// Attractions reachable by a row of partial probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleRange {
    pub q_min: f64,
    pub q_max: f64,
    /// Family parameter at which `q_min` is attained.
    pub theta_min: f64,
}

impl FeasibleRange {
    pub fn contains(&self, q: f64) -> bool {
        q >= self.q_min - IDENTITY_TOL && q <= self.q_max + IDENTITY_TOL
    }
}

fn validate_row(row: &[f64]) -> Result<Vec<(usize, f64)>> {
    if let Some(&value) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::ProbabilityOutOfRange { value });
    }
    let positive: Vec<(usize, f64)> =
        row.iter().copied().enumerate().filter(|&(_, p)| p > 0.0).map(|(k, p)| (k, p.sqrt())).collect();
    if positive.is_empty() {
        return Err(Error::AllZeroRow);
    }
    Ok(positive)
}

/// `|sum_a sqrt(p_a) e^(i phi_a)|^2 - sum_a p_a`.
pub fn row_interference(row: &[f64], phases: &[f64]) -> f64 {
    let z: Vec<Complex64> = row.iter().zip(phases).map(|(p, phi)| Complex64::from_polar(p.sqrt(), *phi)).collect();
    crate::probability::interference_of(&z)
}

/// Phases of the one-parameter family at `theta`. Zero entries get phase 0;
/// the k-th positive entry gets `k * theta`.
pub fn family_phases(row: &[f64], theta: f64) -> Vec<f64> {
    let mut k = 0usize;
    row.iter()
        .map(|&p| {
            if p > 0.0 {
                let phi = k as f64 * theta;
                k += 1;
                phi
            } else {
                0.0
            }
        })
        .collect()
}

fn family_q(moduli: &[f64], theta: f64) -> f64 {
    let total: Complex64 = moduli.iter().enumerate().map(|(k, a)| Complex64::from_polar(*a, k as f64 * theta)).sum();
    total.norm_sqr() - moduli.iter().map(|a| a * a).sum::<f64>()
}

fn grid_len(terms: usize) -> usize {
    GRID_BASE + GRID_PER_TERM * terms
}

/// Range of attraction factors realizable for `row`.
///
/// `q_max = (sum sqrt(p))^2 - sum p` is attained at equal phases; `q_min` is
/// the minimum of the phase family, located on a grid over `[0, pi]` and
/// refined by golden-section search.
pub fn feasible_q_range(row: &[f64]) -> Result<FeasibleRange> {
    let positive = validate_row(row)?;
    let moduli: Vec<f64> = positive.iter().map(|&(_, a)| a).collect();
    let sum_a: f64 = moduli.iter().sum();
    let sum_p: f64 = moduli.iter().map(|a| a * a).sum();
    let q_max = sum_a * sum_a - sum_p;
    match moduli.len() {
        1 => Ok(FeasibleRange { q_min: 0.0, q_max: 0.0, theta_min: 0.0 }),
        2 => Ok(FeasibleRange { q_min: -2.0 * moduli[0] * moduli[1], q_max, theta_min: PI }),
        m => {
            // f(theta) = f(-theta), so [0, pi] covers the whole circle.
            let n = grid_len(m);
            let h = PI / n as f64;
            let best = (0..=n)
                .map(|i| i as f64 * h)
                .min_by(|a, b| family_q(&moduli, *a).total_cmp(&family_q(&moduli, *b)))
                .unwrap_or(PI);
            let theta = golden_min(|t| family_q(&moduli, t), (best - h).max(0.0), (best + h).min(PI));
            let theta = if family_q(&moduli, theta) <= family_q(&moduli, best) { theta } else { best };
            Ok(FeasibleRange { q_min: family_q(&moduli, theta).min(0.0), q_max, theta_min: theta })
        }
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > THETA_TOL {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo + hi) / 2.0
}

/// Phases `phi_a` whose row interference equals `q_target` within 1e-9.
pub fn calibrate_prospect(row: &[f64], q_target: f64) -> Result<Vec<f64>> {
    let range = feasible_q_range(row)?;
    if !q_target.is_finite() || !range.contains(q_target) {
        return Err(Error::InfeasibleTarget { target: q_target, q_min: range.q_min, q_max: range.q_max });
    }
    let positive = validate_row(row)?;
    let moduli: Vec<f64> = positive.iter().map(|&(_, a)| a).collect();
    let theta = match moduli.len() {
        1 => 0.0,
        2 => {
            let cos = (q_target / (2.0 * moduli[0] * moduli[1])).clamp(-1.0, 1.0);
            cos.acos()
        }
        m => bracket_theta(&moduli, q_target, range, grid_len(m))?,
    };
    let phases = family_phases(row, theta);
    let achieved = row_interference(row, &phases);
    if (achieved - q_target).abs() > RESIDUAL_TOL {
        return Err(Error::NoBracket { target: q_target, q_min: range.q_min, q_max: range.q_max });
    }
    Ok(phases)
}

/// First sign change of `family_q - target` along `[0, theta_min]`, refined
/// by bisection to float resolution.
fn bracket_theta(moduli: &[f64], target: f64, range: FeasibleRange, n: usize) -> Result<f64> {
    let g = |t: f64| family_q(moduli, t) - target;
    if g(0.0) <= 0.0 {
        return Ok(0.0);
    }
    if g(range.theta_min) >= 0.0 {
        return Ok(range.theta_min);
    }
    let h = range.theta_min / n as f64;
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=n {
        let t = if i == n { range.theta_min } else { i as f64 * h };
        if g(t) <= 0.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi.ok_or(Error::NoBracket { target, q_min: range.q_min, q_max: range.q_max })?;
    // run past THETA_TOL until the bracket cannot be split any further
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Target partials `p_n(e_a)` and attractions `q_n`, with the basic state
/// each partial belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTarget {
    pub labels: Vec<String>,
    pub partials: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub supports: Vec<Vec<BasicStateIndex>>,
}

impl CalibrationTarget {
    pub fn new(partials: Vec<Vec<f64>>, q: Vec<f64>, supports: Vec<Vec<BasicStateIndex>>) -> Result<Self> {
        let labels = (1..=partials.len()).map(|n| format!("pi{n}")).collect();
        let target = CalibrationTarget { labels, partials, q, supports };
        target.validate()?;
        Ok(target)
    }

    /// Prospects `pi_n = A_n X`: row `n` covers the basic states whose
    /// first-factor mode is `n`, in lexicographic order.
    pub fn canonical(frame: &ActionFrame, partials: Vec<Vec<f64>>, q: Vec<f64>) -> Result<Self> {
        let supports = canonical_supports(frame);
        if partials.len() != supports.len() {
            return Err(Error::LengthMismatch { expected: supports.len(), found: partials.len() });
        }
        let labels = frame.factors()[0].modes.iter().map(|m| format!("{m}X")).collect();
        let target = CalibrationTarget { labels, partials, q, supports };
        target.validate()?;
        Ok(target)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.partials.len() {
            return Err(Error::LengthMismatch { expected: self.partials.len(), found: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    /// Checks normalization, alternation and per-row feasibility.
    pub fn validate(&self) -> Result<()> {
        let n = self.partials.len();
        if n == 0 {
            return Err(Error::LengthMismatch { expected: 1, found: 0 });
        }
        for have in [self.q.len(), self.supports.len(), self.labels.len()] {
            if have != n {
                return Err(Error::LengthMismatch { expected: n, found: have });
            }
        }
        for (row, support) in self.partials.iter().zip(&self.supports) {
            if row.len() != support.len() {
                return Err(Error::LengthMismatch { expected: support.len(), found: row.len() });
            }
        }
        let total: f64 = self.partials.iter().flatten().sum();
        if self.partials.iter().flatten().any(|p| !p.is_finite() || *p < 0.0) || (total - 1.0).abs() > IDENTITY_TOL {
            return Err(Error::PartialsNotNormalized { total });
        }
        let q_total: f64 = self.q.iter().sum();
        if self.q.iter().any(|q| !q.is_finite()) || q_total.abs() > AGGREGATE_TOL {
            return Err(Error::AlternationViolated { total: q_total });
        }
        for (row, &q) in self.partials.iter().zip(&self.q) {
            if row.iter().all(|p| *p == 0.0) {
                if q != 0.0 {
                    return Err(Error::InfeasibleTarget { target: q, q_min: 0.0, q_max: 0.0 });
                }
                continue;
            }
            let range = feasible_q_range(row)?;
            if !range.contains(q) {
                return Err(Error::InfeasibleTarget { target: q, q_min: range.q_min, q_max: range.q_max });
            }
        }
        Ok(())
    }
}

pub fn canonical_supports(frame: &ActionFrame) -> Vec<Vec<BasicStateIndex>> {
    let mut supports = vec![Vec::new(); frame.shape()[0]];
    for index in frame.basis() {
        supports[index.modes()[0]].push(index);
    }
    supports
}

/// Strategic state and prospect lattice reproducing `target`.
///
/// Uses `c = 1/sqrt(dim)` and `b_n(e_a) = sqrt(dim p_n(e_a)) e^(-i phi_(n,a))`,
/// so the combined amplitudes are `sqrt(p_n(e_a)) e^(i phi_(n,a))`.
pub fn calibrate_lattice(target: &CalibrationTarget, frame: &ActionFrame) -> Result<(StrategicState, ProspectLattice)> {
    target.validate()?;
    let mut owner = vec![false; frame.dim()];
    for support in &target.supports {
        for index in support {
            let k = frame.flat_index(index)?;
            if owner[k] {
                return Err(Error::OverlappingSupports { index: index.0.clone() });
            }
            owner[k] = true;
        }
    }
    let dim = frame.dim() as f64;
    let psi = StrategicState::uniform(frame);
    let mut prospects = Vec::with_capacity(target.partials.len());
    for ((row, &q), (support, label)) in target.partials.iter().zip(&target.q).zip(target.supports.iter().zip(&target.labels)) {
        let phases = if row.iter().all(|p| *p == 0.0) { vec![0.0; row.len()] } else { calibrate_prospect(row, q)? };
        let mut coeffs = vec![Complex64::new(0.0, 0.0); frame.dim()];
        for ((p, phi), index) in row.iter().zip(&phases).zip(support) {
            coeffs[frame.flat_index(index)?] = Complex64::from_polar((dim * p).sqrt(), -phi);
        }
        prospects.push(ProspectState::new(frame, label.clone(), coeffs)?);
    }
    Ok((psi, ProspectLattice::new(prospects)?))
}
