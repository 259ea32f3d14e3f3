//! Prospect probabilities and their utility/attraction decomposition.
//!
//! For a prospect with combined amplitudes `z_a = conj(b(e_a)) c(e_a)` the
//! probability is `p = |sum_a z_a|^2`. It splits into the utility factor
//! `sum_a |z_a|^2` and the attraction (interference) factor `q`, the sum of
//! the cross terms `z_a conj(z_b)` over `a != b`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mindspace::{
    combined_amplitude, combined_amplitudes, ensure_same_frame, prospect_overlap, BasicStateIndex,
    ProspectLattice, ProspectState, StrategicState,
};
use crate::{AGGREGATE_TOL, IDENTITY_TOL};

/// Probability of one prospect with its two additive parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProspectReport {
    pub label: String,
    pub probability: f64,
    pub utility_factor: f64,
    pub attraction: f64,
}

/// `p_n(e_a) = |b_n(e_a) c(e_a)|^2`.
pub fn elementary_probability(
    prospect: &ProspectState,
    psi: &StrategicState,
    alpha: &BasicStateIndex,
) -> Result<f64> {
    Ok(combined_amplitude(prospect, psi, alpha)?.norm_sqr())
}

/// `p(pi_n) = |<pi_n|psi_s>|^2`.
pub fn prospect_probability(prospect: &ProspectState, psi: &StrategicState) -> Result<f64> {
    Ok(prospect_overlap(prospect, psi)?.norm_sqr())
}

/// The utility factor, `sum_a p_n(e_a)`.
pub fn utility_factor(prospect: &ProspectState, psi: &StrategicState) -> Result<f64> {
    Ok(combined_amplitudes(prospect, psi)?.iter().map(Complex64::norm_sqr).sum())
}

/// Attraction factor `q(pi_n)`, computed in difference form
/// `p(pi_n) - sum_a p_n(e_a)`.
pub fn interference_term(prospect: &ProspectState, psi: &StrategicState) -> Result<f64> {
    let z = combined_amplitudes(prospect, psi)?;
    Ok(interference_of(&z))
}

pub(crate) fn interference_of(z: &[Complex64]) -> f64 {
    let total: Complex64 = z.iter().sum();
    let partial: f64 = z.iter().map(Complex64::norm_sqr).sum();
    total.norm_sqr() - partial
}

pub fn decompose(prospect: &ProspectState, psi: &StrategicState) -> Result<ProspectReport> {
    let z = combined_amplitudes(prospect, psi)?;
    let total: Complex64 = z.iter().sum();
    let probability = total.norm_sqr();
    let utility_factor: f64 = z.iter().map(Complex64::norm_sqr).sum();
    Ok(ProspectReport {
        label: prospect.label().to_string(),
        probability,
        utility_factor,
        attraction: probability - utility_factor,
    })
}

/// Per-prospect reports for a whole lattice plus its aggregate sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub reports: Vec<ProspectReport>,
    /// `sum_n q(pi_n)`.
    pub alternation_sum: f64,
    /// `sum_n p(pi_n)`.
    pub probability_sum: f64,
    /// `sum_(n,a) p_n(e_a)`.
    pub utility_sum: f64,
    /// Whether `sum_n p(pi_n) = 1` within the aggregate tolerance.
    pub probabilities_normalized: bool,
    /// Whether `sum_n q(pi_n) = 0` within the aggregate tolerance.
    pub interference_alternates: bool,
}

pub fn lattice_report(lattice: &ProspectLattice, psi: &StrategicState) -> Result<LatticeReport> {
    lattice_report_with(lattice, psi, AGGREGATE_TOL)
}

/// Fails with [`Error::JointNormalizationViolated`] when the elementary
/// probabilities of the lattice do not sum to one within `tol`.
pub fn lattice_report_with(
    lattice: &ProspectLattice,
    psi: &StrategicState,
    tol: f64,
) -> Result<LatticeReport> {
    let total = lattice.joint_normalization(psi)?;
    if (total - 1.0).abs() > tol {
        return Err(Error::JointNormalizationViolated { total });
    }
    let reports = lattice
        .prospects()
        .iter()
        .map(|p| decompose(p, psi))
        .collect::<Result<Vec<_>>>()?;
    let alternation_sum: f64 = reports.iter().map(|r| r.attraction).sum();
    let probability_sum: f64 = reports.iter().map(|r| r.probability).sum();
    let utility_sum: f64 = reports.iter().map(|r| r.utility_factor).sum();
    Ok(LatticeReport {
        probabilities_normalized: (probability_sum - 1.0).abs() <= tol,
        interference_alternates: alternation_sum.abs() <= tol,
        reports,
        alternation_sum,
        probability_sum,
        utility_sum,
    })
}

/// Relation between two prospects under the probability ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    Indifferent,
    FirstPreferred,
    SecondPreferred,
}

/// Total preorder of prospects by probability. Ties are kept, not broken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProspectOrdering {
    pub probabilities: Vec<f64>,
    /// Tiers of mutually indifferent prospects, most probable first.
    pub tiers: Vec<Vec<usize>>,
    pub tolerance: f64,
}

impl ProspectOrdering {
    /// The argmax set; more than one element means a tie at the top.
    pub fn optimal(&self) -> &[usize] {
        self.tiers.first().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn compare(&self, a: usize, b: usize) -> Preference {
        let (pa, pb) = (self.probabilities[a], self.probabilities[b]);
        if (pa - pb).abs() <= self.tolerance {
            Preference::Indifferent
        } else if pa > pb {
            Preference::FirstPreferred
        } else {
            Preference::SecondPreferred
        }
    }
}

pub fn order_prospects(reports: &[ProspectReport]) -> ProspectOrdering {
    order_probabilities(reports.iter().map(|r| r.probability).collect(), IDENTITY_TOL)
}

pub fn order_probabilities(probabilities: Vec<f64>, tolerance: f64) -> ProspectOrdering {
    let mut idx: Vec<usize> = (0..probabilities.len()).collect();
    idx.sort_by(|&a, &b| probabilities[b].total_cmp(&probabilities[a]).then(a.cmp(&b)));
    let mut tiers: Vec<Vec<usize>> = Vec::new();
    for i in idx {
        match tiers.last_mut() {
            Some(tier) if (probabilities[tier[0]] - probabilities[i]).abs() <= tolerance => tier.push(i),
            _ => tiers.push(vec![i]),
        }
    }
    ProspectOrdering { probabilities, tiers, tolerance }
}

/// Sum of two prospect states; the compound prospect `a + b`.
pub fn add_prospects(a: &ProspectState, b: &ProspectState) -> Result<ProspectState> {
    ensure_same_frame(a.frame(), b.frame())?;
    let coeffs = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x + y).collect();
    Ok(ProspectState::from_parts(a.frame(), format!("{}+{}", a.label(), b.label()), coeffs))
}

/// `q(a+b) = p(a+b) - p(a) - p(b)`.
pub fn compound_interference(a: &ProspectState, b: &ProspectState, psi: &StrategicState) -> Result<f64> {
    let sum = add_prospects(a, b)?;
    Ok(prospect_probability(&sum, psi)? - prospect_probability(a, psi)? - prospect_probability(b, psi)?)
}

/// Weights `p(X_j)` with conditionals `p(A|X_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    weights: Vec<f64>,
    conditionals: Vec<f64>,
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(0.0..=1.0).contains(w)) || (total - 1.0).abs() > IDENTITY_TOL {
        return Err(Error::WeightsNotNormalized { total });
    }
    Ok(())
}

fn check_unit_interval(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(&value) => Err(Error::ProbabilityOutOfRange { value }),
        None => Ok(()),
    }
}

impl ConditionalTable {
    pub fn new(weights: Vec<f64>, conditionals: Vec<f64>) -> Result<Self> {
        if weights.len() != conditionals.len() {
            return Err(Error::LengthMismatch { expected: weights.len(), found: conditionals.len() });
        }
        check_weights(&weights)?;
        check_unit_interval(&conditionals)?;
        Ok(ConditionalTable { weights, conditionals })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn conditionals(&self) -> &[f64] {
        &self.conditionals
    }

    /// `p(AX_j) = p(A|X_j) p(X_j)`.
    pub fn joints(&self) -> Vec<f64> {
        self.conditionals.iter().zip(&self.weights).map(|(c, w)| c * w).collect()
    }

    /// Classical total probability `sum_j p(A|X_j) p(X_j)`.
    pub fn total(&self) -> f64 {
        self.joints().iter().sum()
    }
}

/// `p(A|X_j) = p(AX_j) / p(X_j)`.
pub fn conditional_probability(joint: f64, weight: f64) -> Result<f64> {
    if weight <= 0.0 {
        return Err(Error::ZeroConditioningEvent);
    }
    Ok(joint / weight)
}

/// `p(X_j|A) = p(X_j A) / p(AX)`.
pub fn inverse_conditional(joint_reversed: f64, prospect_probability: f64) -> Result<f64> {
    if prospect_probability <= 0.0 {
        return Err(Error::ZeroConditioningEvent);
    }
    Ok(joint_reversed / prospect_probability)
}

/// Generalized Bayes relation:
/// `p(X_j|A) = p(X_j A) / (sum_j p(A|X_j) p(X_j) + q(AX))`.
///
/// With `q_ax = 0` and `p(X_j A) = p(A X_j)` this is the classical posterior.
pub fn qdt_bayes(conditionals: &[f64], weights: &[f64], q_ax: f64, p_xja: f64) -> Result<f64> {
    let table = ConditionalTable::new(weights.to_vec(), conditionals.to_vec())?;
    let denominator = table.total() + q_ax;
    if denominator <= 1e-14 {
        return Err(Error::DegenerateDenominator { value: denominator });
    }
    Ok(p_xja / denominator)
}

/// Outcome of evaluating the reversed-order prospect `XA`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseOrder {
    /// `p(XA) = p(AX) + q(XA)`.
    pub probability: f64,
    /// `p(AX) = p(XA)`; holds exactly when `q(XA)` vanishes.
    pub commutative: bool,
    /// `p(XA)` sits on 0 or 1.
    pub at_bound: bool,
    /// `q(AX) = -q(XA)` when `q(AX)` was supplied.
    pub antisymmetric: Option<bool>,
}

/// Probability of the reversed prospect `XA` given `p(AX)`, the reverse
/// conditionals `p(X_j|A)` (which must sum to one) and `q(XA)`.
pub fn reverse_order_probability(
    p_ax: f64,
    reverse_conditionals: &[f64],
    q_xa: f64,
    q_ax: Option<f64>,
) -> Result<ReverseOrder> {
    let total: f64 = reverse_conditionals.iter().sum();
    if (total - 1.0).abs() > IDENTITY_TOL {
        return Err(Error::ConditionalNotNormalized { total });
    }
    let probability = reverse_conditionals.iter().map(|c| c * p_ax).sum::<f64>() + q_xa;
    Ok(ReverseOrder {
        probability,
        commutative: q_xa.abs() <= IDENTITY_TOL,
        at_bound: probability.abs() <= IDENTITY_TOL || (probability - 1.0).abs() <= IDENTITY_TOL,
        antisymmetric: q_ax.map(|q| (q + q_xa).abs() <= IDENTITY_TOL),
    })
}
