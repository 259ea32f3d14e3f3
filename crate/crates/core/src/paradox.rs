//! Classical comparators and numeric checkers for the decision paradoxes.
//!
//! Every checker evaluates the governing inequality of its proposition and
//! reports a [`Verdict`] together with the signed slack of that inequality.
//! Where a proposition is a biconditional, the checker also compares prospect
//! probabilities directly and records whether both routes agree.
//!
//! Prospect probabilities follow `p(pi_n) = sum_j p(A_n X_j) + q(pi_n)`
//! unless a scenario carries probabilities measured on actual states.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mindspace::{combined_amplitudes, ProspectLattice, StrategicState};
use crate::probability::{
    check_weights, compound_interference, decompose, inverse_conditional, lattice_report_with, qdt_bayes,
    reverse_order_probability, ConditionalTable,
};
use crate::{AGGREGATE_TOL, IDENTITY_TOL};

/// Width of the zone around a strict threshold reported as a boundary.
pub const BOUNDARY_BAND: f64 = 1e-10;
/// Equalities between attraction factors are accepted within the
/// calibration residual.
pub const ATTRACTION_EQ_TOL: f64 = 1e-9;

/// Identifier of one of the sixteen propositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Proposition(u8);

impl Proposition {
    pub const DECOMPOSITION: Proposition = Proposition(1);
    pub const ALTERNATION: Proposition = Proposition(2);
    pub const BAYES: Proposition = Proposition(3);
    pub const NONCOMMUTATIVITY: Proposition = Proposition(4);
    pub const COMPATIBILITY: Proposition = Proposition(5);
    pub const INDEPENDENCE: Proposition = Proposition(6);
    pub const ELLSBERG: Proposition = Proposition(7);
    pub const INVERSION: Proposition = Proposition(8);
    pub const INVARIANCE: Proposition = Proposition(9);
    pub const CERTAINTY: Proposition = Proposition(10);
    pub const DISJUNCTION: Proposition = Proposition(11);
    pub const CONJUNCTION: Proposition = Proposition(12);
    pub const ISOLATION: Proposition = Proposition(13);
    pub const FALLACY_IMPLIES_REVERSAL: Proposition = Proposition(14);
    pub const REVERSAL_IMPLIES_FALLACY: Proposition = Proposition(15);
    pub const FALLACY_IFF_REVERSAL: Proposition = Proposition(16);

    pub fn new(id: u8) -> Option<Self> {
        (1..=16).contains(&id).then_some(Proposition(id))
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Proposition> {
        (1..=16).map(Proposition)
    }

    pub fn name(self) -> &'static str {
        match self.0 {
            1 => "decomposition",
            2 => "alternation",
            3 => "bayes",
            4 => "noncommutativity",
            5 => "allais",
            6 => "independence",
            7 => "ellsberg",
            8 => "inversion",
            9 => "kahneman-tversky",
            10 => "certainty",
            11 => "disjunction",
            12 => "conjunction",
            13 => "isolation",
            14 => "combined-fallacy",
            15 => "combined-reversal",
            _ => "combined-equivalence",
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.name())
    }
}

impl FromStr for Proposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(id) = s.trim_start_matches(['P', 'p']).parse::<u8>() {
            return Proposition::new(id).ok_or_else(|| Error::UnsupportedProposition(s.to_string()));
        }
        let id = match s.to_ascii_lowercase().as_str() {
            "compatibility" => 5,
            "invariance" => 9,
            "combined" => 14,
            other => match Proposition::all().find(|p| p.name() == other) {
                Some(p) => p.0,
                None => return Err(Error::UnsupportedProposition(s.to_string())),
            },
        };
        Ok(Proposition(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Boundary,
}

impl Verdict {
    /// Verdict of a strict inequality with signed slack `margin`.
    pub fn strict(margin: f64, band: f64) -> Verdict {
        if margin.abs() <= band {
            Verdict::Boundary
        } else if margin > 0.0 {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Boundary => "boundary",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadoxReport {
    pub proposition: Proposition,
    pub verdict: Verdict,
    /// Signed slack of the governing inequality.
    pub margin: f64,
    /// Short reading of the verdict, e.g. `compatible` or `fallacy`.
    pub outcome: String,
    /// Both sides of each evaluated condition.
    pub details: BTreeMap<String, f64>,
    /// Prospect (and outcome) indices witnessing an existence claim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    /// For biconditionals: whether the condition agrees with the direct
    /// probability comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agrees: Option<bool>,
}

impl ParadoxReport {
    fn new(proposition: Proposition, verdict: Verdict, margin: f64, outcome: impl Into<String>) -> Self {
        ParadoxReport {
            proposition,
            verdict,
            margin,
            outcome: outcome.into(),
            details: BTreeMap::new(),
            witness: None,
            agrees: None,
        }
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

fn precondition(condition: &str) -> Error {
    Error::PreconditionViolated { condition: condition.to_string() }
}

/// Partial probabilities `p(A_n X_j)` and attraction factors of a lattice
/// whose prospects are `pi_n = A_n X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParadoxScenario {
    joints: Vec<Vec<f64>>,
    q: Vec<f64>,
    probabilities: Vec<f64>,
    conditionals: Option<Vec<Vec<f64>>>,
    utilities: Option<Vec<f64>>,
    band: f64,
}

impl ParadoxScenario {
    /// From joints `p(A_n X_j)` directly.
    pub fn from_joints(joints: Vec<Vec<f64>>, q: Vec<f64>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::LengthMismatch { expected: 1, found: 0 });
        }
        if q.len() != joints.len() {
            return Err(Error::LengthMismatch { expected: joints.len(), found: q.len() });
        }
        let width = joints[0].len();
        if let Some(row) = joints.iter().find(|r| r.len() != width) {
            return Err(Error::LengthMismatch { expected: width, found: row.len() });
        }
        if let Some(&value) = joints.iter().flatten().find(|p| !p.is_finite() || !(0.0..=1.0).contains(*p)) {
            return Err(Error::ProbabilityOutOfRange { value });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "attraction factors".into() });
        }
        let probabilities = joints.iter().zip(&q).map(|(row, q)| row.iter().sum::<f64>() + q).collect();
        Ok(ParadoxScenario { joints, q, probabilities, conditionals: None, utilities: None, band: BOUNDARY_BAND })
    }

    /// From conditionals `p(A_n|X_j)` and weights `p(X_j)`, with
    /// `p(A_n X_j) = p(A_n|X_j) p(X_j)`.
    pub fn from_conditionals(conditionals: Vec<Vec<f64>>, weights: &[f64], q: Vec<f64>) -> Result<Self> {
        check_weights(weights)?;
        let joints = conditionals
            .iter()
            .map(|row| Ok(ConditionalTable::new(weights.to_vec(), row.clone())?.joints()))
            .collect::<Result<Vec<_>>>()?;
        let mut s = Self::from_joints(joints, q)?;
        s.conditionals = Some(conditionals);
        Ok(s)
    }

    /// From per-prospect lotteries `p_n(X_j)` and prospect weights `p(A_n)`,
    /// with `p(A_n X_j) = p_n(X_j) p(A_n)`. The lotteries stand in for the
    /// conditionals in the balance and equivalence conditions.
    pub fn from_lotteries(lotteries: Vec<Vec<f64>>, prospect_weights: &[f64], q: Vec<f64>) -> Result<Self> {
        if prospect_weights.len() != lotteries.len() {
            return Err(Error::LengthMismatch { expected: lotteries.len(), found: prospect_weights.len() });
        }
        check_weights(prospect_weights)?;
        let joints = lotteries.iter().zip(prospect_weights).map(|(row, w)| row.iter().map(|p| p * w).collect()).collect();
        let mut s = Self::from_joints(joints, q)?;
        s.conditionals = Some(lotteries);
        Ok(s)
    }

    /// Reads joints and attractions off an evaluated lattice. Prospect `n`
    /// must live on the basic states whose first-factor mode is `n`; the
    /// remaining factors, flattened, enumerate the outcomes `X_j`.
    /// Probabilities are the measured `|<pi_n|psi>|^2`.
    pub fn from_state(lattice: &ProspectLattice, psi: &StrategicState) -> Result<Self> {
        let frame = lattice.frame();
        let rows = frame.shape()[0];
        if lattice.len() != rows {
            return Err(Error::LengthMismatch { expected: rows, found: lattice.len() });
        }
        let width = frame.dim() / rows;
        let mut joints = Vec::with_capacity(rows);
        let mut q = Vec::with_capacity(rows);
        let mut probabilities = Vec::with_capacity(rows);
        for (n, prospect) in lattice.prospects().iter().enumerate() {
            let z = combined_amplitudes(prospect, psi)?;
            let outside = z.iter().enumerate().any(|(k, z)| k / width != n && z.norm_sqr() > 0.0);
            if outside {
                return Err(precondition("prospect n supported on first-factor mode n"));
            }
            joints.push(z[n * width..(n + 1) * width].iter().map(|z| z.norm_sqr()).collect());
            let r = decompose(prospect, psi)?;
            q.push(r.attraction);
            probabilities.push(r.probability);
        }
        let mut s = Self::from_joints(joints, q)?;
        s.probabilities = probabilities;
        Ok(s)
    }

    pub fn with_utilities(mut self, utilities: Vec<f64>) -> Self {
        self.utilities = Some(utilities);
        self
    }

    pub fn with_band(mut self, band: f64) -> Self {
        self.band = band;
        self
    }

    /// Replaces the attraction factors, recomputing probabilities.
    pub fn with_q(self, q: Vec<f64>) -> Result<Self> {
        let conditionals = self.conditionals;
        let utilities = self.utilities;
        let band = self.band;
        let mut s = Self::from_joints(self.joints, q)?;
        s.conditionals = conditionals;
        s.utilities = utilities;
        s.band = band;
        Ok(s)
    }

    /// Exchanges the roles of prospects `a` and `b`.
    pub fn swap_prospects(mut self, a: usize, b: usize) -> Self {
        self.joints.swap(a, b);
        self.q.swap(a, b);
        self.probabilities.swap(a, b);
        if let Some(c) = &mut self.conditionals {
            c.swap(a, b);
        }
        self
    }

    /// Swaps outcomes `j` and `k` in every row.
    pub fn swap_outcomes(mut self, j: usize, k: usize) -> Self {
        for row in &mut self.joints {
            row.swap(j, k);
        }
        if let Some(c) = &mut self.conditionals {
            for row in c {
                row.swap(j, k);
            }
        }
        self
    }

    pub fn joints(&self) -> &[Vec<f64>] {
        &self.joints
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn conditionals(&self) -> Option<&[Vec<f64>]> {
        self.conditionals.as_deref()
    }

    pub fn utilities(&self) -> Option<&[f64]> {
        self.utilities.as_deref()
    }

    pub fn prospects(&self) -> usize {
        self.joints.len()
    }

    pub fn outcomes(&self) -> usize {
        self.joints[0].len()
    }

    /// `sum_j p(A_n X_j)`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.joints[n].iter().sum()
    }

    /// `p(A_a X) - p(A_b X)` from the joints alone.
    pub fn partial_gap(&self, a: usize, b: usize) -> f64 {
        self.joints[a].iter().zip(&self.joints[b]).map(|(x, y)| x - y).sum()
    }

    /// `p(pi_a) - p(pi_b)` split into its partial and attraction parts.
    fn pair_difference(&self, a: usize, b: usize) -> f64 {
        self.partial_gap(a, b) + (self.q[a] - self.q[b])
    }

    /// True when `p1 + p3 = p2 + p4` at every outcome.
    pub fn balance_holds(&self) -> bool {
        self.balance_violation().is_none()
    }

    fn balance_violation(&self) -> Option<usize> {
        let rows = self.conditionals.as_deref().unwrap_or(&self.joints);
        if rows.len() < 4 {
            return Some(0);
        }
        (0..rows[0].len()).find(|&j| (rows[0][j] + rows[2][j] - rows[1][j] - rows[3][j]).abs() > IDENTITY_TOL)
    }

    fn require(&self, prospects: usize) -> Result<()> {
        if self.prospects() < prospects {
            return Err(Error::LengthMismatch { expected: prospects, found: self.prospects() });
        }
        Ok(())
    }
}

/// `U(pi_n) = sum_j p_n(X_j) U(X_j)`.
pub fn classical_expected_utility(probabilities: &[f64], utilities: &[f64]) -> Result<f64> {
    if probabilities.len() != utilities.len() {
        return Err(Error::LengthMismatch { expected: utilities.len(), found: probabilities.len() });
    }
    Ok(probabilities.iter().zip(utilities).map(|(p, u)| p * u).sum())
}

/// The two expected-utility differences `s12 = U(pi1) - U(pi2)` and
/// `s34 = U(pi3) - U(pi4)`. Under the balance condition `s34 = -s12`, so
/// `s12 > 0` together with `s34 >= 0` is impossible.
pub fn allais_classical_contradiction(lotteries: &[Vec<f64>], utilities: &[f64]) -> Result<(f64, f64)> {
    if lotteries.len() != 4 {
        return Err(Error::LengthMismatch { expected: 4, found: lotteries.len() });
    }
    for row in lotteries {
        if row.len() != utilities.len() {
            return Err(Error::LengthMismatch { expected: utilities.len(), found: row.len() });
        }
    }
    if let Some(outcome) = (0..utilities.len())
        .find(|&j| (lotteries[0][j] + lotteries[2][j] - lotteries[1][j] - lotteries[3][j]).abs() > IDENTITY_TOL)
    {
        return Err(Error::BalanceViolated { outcome });
    }
    let diff = |a: usize, b: usize| -> f64 {
        lotteries[a].iter().zip(&lotteries[b]).zip(utilities).map(|((x, y), u)| (x - y) * u).sum()
    };
    Ok((diff(0, 1), diff(2, 3)))
}

/// Maximum deviation of `p - sum p_partial - q` over the lattice, with `q`
/// from the explicit double sum over distinct basic-state pairs.
pub fn check_decomposition(lattice: &ProspectLattice, psi: &StrategicState) -> Result<ParadoxReport> {
    let mut worst: f64 = 0.0;
    let mut worst_imag: f64 = 0.0;
    for p in lattice.prospects() {
        let z = combined_amplitudes(p, psi)?;
        let r = decompose(p, psi)?;
        let mut cross = num_complex::Complex64::new(0.0, 0.0);
        for (a, za) in z.iter().enumerate() {
            for (b, zb) in z.iter().enumerate() {
                if a != b {
                    cross += za * zb.conj();
                }
            }
        }
        worst = worst.max((r.probability - r.utility_factor - cross.re).abs());
        worst_imag = worst_imag.max(cross.im.abs());
    }
    let holds = worst < IDENTITY_TOL && worst_imag < IDENTITY_TOL;
    let verdict = if holds { Verdict::Holds } else { Verdict::Fails };
    Ok(ParadoxReport::new(Proposition::DECOMPOSITION, verdict, IDENTITY_TOL - worst, "p = utility + q")
        .detail("max_residual", worst)
        .detail("max_imaginary_residue", worst_imag))
}

/// Interference alternation on a lattice with normalized partials.
pub fn check_alternation(lattice: &ProspectLattice, psi: &StrategicState, tol: f64) -> Result<ParadoxReport> {
    let rep = lattice_report_with(lattice, psi, tol)?;
    let contrapositive = (rep.probability_sum - 1.0 - rep.alternation_sum).abs();
    let biconditional = rep.probabilities_normalized == rep.interference_alternates;
    let verdict = if rep.interference_alternates { Verdict::Holds } else { Verdict::Fails };
    let outcome = match (rep.interference_alternates, biconditional) {
        (true, _) => "interference alternates",
        (false, _) => "probabilities not normalized",
    };
    let mut r = ParadoxReport::new(Proposition::ALTERNATION, verdict, tol - rep.alternation_sum.abs(), outcome)
        .detail("alternation_sum", rep.alternation_sum)
        .detail("probability_sum", rep.probability_sum)
        .detail("contrapositive_residual", contrapositive);
    r.agrees = Some(biconditional);
    Ok(r)
}

/// Generalized Bayes relation, cross-checked against the definition
/// `p(X_j|A) = p(X_j A) / p(AX)` with `p(AX) = sum_j p(A X_j) + q(AX)`.
pub fn check_bayes(conditionals: &[f64], weights: &[f64], q_ax: f64, p_xja: f64) -> Result<ParadoxReport> {
    let posterior = qdt_bayes(conditionals, weights, q_ax, p_xja)?;
    let table = ConditionalTable::new(weights.to_vec(), conditionals.to_vec())?;
    let p_ax = table.total() + q_ax;
    let direct = inverse_conditional(p_xja, p_ax)?;
    let residual = (posterior - direct).abs();
    let verdict = if residual <= IDENTITY_TOL { Verdict::Holds } else { Verdict::Fails };
    let outcome = if q_ax.abs() <= IDENTITY_TOL { "classical Bayes" } else { "interference-shifted Bayes" };
    let mut r = ParadoxReport::new(Proposition::BAYES, verdict, IDENTITY_TOL - residual, outcome)
        .detail("posterior", posterior)
        .detail("p_ax", p_ax)
        .detail("classical_total", table.total());
    if table.total() > 1e-14 {
        r = r.detail("classical_posterior", p_xja / table.total());
    }
    Ok(r)
}

/// `AX` and `XA` are indifferent exactly when `q(XA) = 0`.
pub fn check_noncommutativity(
    p_ax: f64,
    reverse_conditionals: &[f64],
    q_xa: f64,
    q_ax: Option<f64>,
) -> Result<ParadoxReport> {
    let rev = reverse_order_probability(p_ax, reverse_conditionals, q_xa, q_ax)?;
    let indifferent = (rev.probability - p_ax).abs() <= IDENTITY_TOL;
    let biconditional = indifferent == rev.commutative && rev.antisymmetric.unwrap_or(true);
    let verdict = if biconditional { Verdict::Holds } else { Verdict::Fails };
    let outcome = if indifferent { "commutative" } else { "noncommutative" };
    let mut r = ParadoxReport::new(Proposition::NONCOMMUTATIVITY, verdict, rev.probability - p_ax, outcome)
        .detail("p_ax", p_ax)
        .detail("p_xa", rev.probability)
        .detail("q_xa", q_xa);
    if let Some(q) = q_ax {
        r = r.detail("q_ax", q);
    }
    r.agrees = Some(biconditional);
    Ok(r)
}

/// Compatibility of `pi1 > pi2` with `pi3 >= pi4` under balance:
/// `0 <= sum_j [p(A2 X_j) - p(A1 X_j)] < q1 - q2`.
pub fn check_allais_compatibility(s: &ParadoxScenario) -> Result<ParadoxReport> {
    s.require(4)?;
    let q = s.q();
    if q[1] > q[0] + ATTRACTION_EQ_TOL {
        return Err(precondition("q(pi2) < q(pi1): pi2 more uncertain than pi1"));
    }
    if (q[2] - q[3]).abs() > ATTRACTION_EQ_TOL {
        return Err(precondition("q(pi3) = q(pi4): pi3 and pi4 equally uncertain"));
    }
    if let Some(outcome) = s.balance_violation() {
        return Err(Error::BalanceViolated { outcome });
    }
    let gap = s.partial_gap(1, 0);
    let q_gap = q[0] - q[1];
    let left = gap;
    let right = q_gap - gap;
    let verdict = if left < -s.band {
        Verdict::Fails
    } else {
        Verdict::strict(right, s.band)
    };
    let outcome = if verdict.holds() { "compatible" } else { "incompatible" };
    Ok(ParadoxReport::new(Proposition::COMPATIBILITY, verdict, left.min(right), outcome)
        .detail("partial_gap", gap)
        .detail("q_gap", q_gap))
}

/// Independence: `p(pi1 + pi3) > p(pi2 + pi4)` from the prospect
/// probabilities and the two compound attraction factors.
pub fn check_independence(probabilities: &[f64], q13: f64, q24: f64) -> Result<ParadoxReport> {
    if probabilities.len() < 4 {
        return Err(Error::LengthMismatch { expected: 4, found: probabilities.len() });
    }
    let p = probabilities;
    let band = BOUNDARY_BAND;
    if p[0] - p[1] <= band {
        return Err(precondition("p(pi1) > p(pi2)"));
    }
    if p[2] - p[3] < -band {
        return Err(precondition("p(pi3) >= p(pi4)"));
    }
    if q24 > q13 + band {
        return Err(precondition("q(pi2+pi4) <= q(pi1+pi3)"));
    }
    let lhs = p[0] + p[2] + q13;
    let rhs = p[1] + p[3] + q24;
    let verdict = Verdict::strict(lhs - rhs, band);
    let outcome = if verdict.holds() { "pi1+pi3 preferred" } else { "independence violated" };
    Ok(ParadoxReport::new(Proposition::INDEPENDENCE, verdict, lhs - rhs, outcome)
        .detail("p13", lhs)
        .detail("p24", rhs)
        .detail("q13", q13)
        .detail("q24", q24))
}

/// Independence evaluated on actual states, with the compound attraction
/// factors from the summed prospect states. The compound probabilities are
/// also measured directly and compared with the decomposed sums.
pub fn check_independence_on_lattice(lattice: &ProspectLattice, psi: &StrategicState) -> Result<ParadoxReport> {
    let pr = lattice.prospects();
    if pr.len() < 4 {
        return Err(Error::LengthMismatch { expected: 4, found: pr.len() });
    }
    let p: Vec<f64> = pr.iter().map(|x| decompose(x, psi).map(|r| r.probability)).collect::<Result<_>>()?;
    let q13 = compound_interference(&pr[0], &pr[2], psi)?;
    let q24 = compound_interference(&pr[1], &pr[3], psi)?;
    let mut r = check_independence(&p, q13, q24)?;
    let direct13 = crate::probability::prospect_probability(&crate::probability::add_prospects(&pr[0], &pr[2])?, psi)?;
    let direct24 = crate::probability::prospect_probability(&crate::probability::add_prospects(&pr[1], &pr[3])?, psi)?;
    r.agrees = Some((direct13 > direct24) == r.verdict.holds() || r.verdict == Verdict::Boundary);
    Ok(r)
}

/// Ellsberg: with equal conditionals, `p(pi1) - p(pi2) = q1 - q2 > 0`.
pub fn check_ellsberg(s: &ParadoxScenario) -> Result<ParadoxReport> {
    s.require(2)?;
    let rows = s.conditionals().unwrap_or(s.joints());
    if rows[0].iter().zip(&rows[1]).any(|(a, b)| (a - b).abs() > IDENTITY_TOL) {
        return Err(precondition("p(A1|X_j) = p(A2|X_j) for all j"));
    }
    let q = s.q();
    if q[1] > q[0] + ATTRACTION_EQ_TOL {
        return Err(precondition("q(pi2) < q(pi1): pi2 more uncertain than pi1"));
    }
    let margin = s.probabilities()[0] - s.probabilities()[1];
    let verdict = Verdict::strict(margin, s.band);
    let outcome = match verdict {
        Verdict::Holds => "pi1 preferred",
        Verdict::Boundary => "indifferent",
        Verdict::Fails => "pi2 preferred",
    };
    Ok(ParadoxReport::new(Proposition::ELLSBERG, verdict, margin, outcome)
        .detail("p1", s.probabilities()[0])
        .detail("p2", s.probabilities()[1])
        .detail("q_gap", q[0] - q[1]))
}

/// Inversion between prospects `first` and `second`:
/// `p(second) > p(first)` iff `q_second - q_first > sum_j [p(A_first X_j) - p(A_second X_j)]`.
pub fn check_inversion(s: &ParadoxScenario, first: usize, second: usize) -> Result<ParadoxReport> {
    s.require(first.max(second) + 1)?;
    let gap = s.partial_gap(first, second);
    if gap < -s.band {
        return Err(precondition("sum_j p(A1 X_j) >= sum_j p(A2 X_j)"));
    }
    let q_gap = s.q()[second] - s.q()[first];
    let condition = q_gap - gap;
    let direct = s.probabilities()[second] - s.probabilities()[first];
    let verdict = Verdict::strict(condition, s.band);
    let outcome = match verdict {
        Verdict::Holds => "inversion",
        Verdict::Boundary => "indifferent",
        Verdict::Fails => "no inversion",
    };
    let mut r = ParadoxReport::new(Proposition::INVERSION, verdict, condition, outcome)
        .detail("partial_gap", gap)
        .detail("q_gap", q_gap)
        .detail("direct_gap", direct);
    r.agrees = Some(agree(condition, direct, s.band));
    Ok(r)
}

/// `true` when two signed quantities agree in sign, or either is inside the
/// boundary band.
fn agree(condition: f64, direct: f64, band: f64) -> bool {
    condition.abs() <= band || direct.abs() <= band || (condition > 0.0) == (direct > 0.0)
}

/// Invariance violation: equal partial sums with `q1 < q2`, `q4 < q3`
/// give `p(pi2) > p(pi1)` and `p(pi3) > p(pi4)`.
pub fn check_kahneman_tversky(s: &ParadoxScenario) -> Result<ParadoxReport> {
    s.require(4)?;
    let s0 = s.partial_sum(0);
    if (1..4).any(|n| (s.partial_sum(n) - s0).abs() > IDENTITY_TOL) {
        return Err(Error::InvarianceViolated);
    }
    let q = s.q();
    if q[0] > q[1] + ATTRACTION_EQ_TOL || q[3] > q[2] + ATTRACTION_EQ_TOL {
        return Err(Error::UncertaintyPatternViolated);
    }
    // same difference as the Ellsberg and inversion checks
    let m21 = s.pair_difference(1, 0);
    let m34 = s.pair_difference(2, 3);
    let v21 = Verdict::strict(m21, s.band);
    let v34 = Verdict::strict(m34, s.band);
    let verdict = match (v21, v34) {
        (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
        (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
        _ => Verdict::Boundary,
    };
    let outcome = match verdict {
        Verdict::Holds => "pi2 > pi1 and pi3 > pi4",
        Verdict::Boundary => "indifferent",
        Verdict::Fails => "pattern not reproduced",
    };
    Ok(ParadoxReport::new(Proposition::INVARIANCE, verdict, m21.min(m34), outcome)
        .detail("margin_21", m21)
        .detail("margin_34", m34))
}

/// Certainty effects for a pair with `q_first < q_second`: the more
/// uncertain `first` is still preferred iff
/// `sum_j [p(A_first X_j) - p(A_second X_j)] > q_second - q_first > 0`.
pub fn check_certainty(s: &ParadoxScenario, first: usize, second: usize) -> Result<ParadoxReport> {
    s.require(first.max(second) + 1)?;
    let q_gap = s.q()[second] - s.q()[first];
    if q_gap <= 0.0 {
        return Err(precondition("q(pi1) < q(pi2): pi1 more uncertain than pi2"));
    }
    let gap = s.partial_gap(first, second);
    let condition = gap - q_gap;
    let direct = s.probabilities()[first] - s.probabilities()[second];
    let verdict = Verdict::strict(condition, s.band);
    let outcome = match verdict {
        Verdict::Holds => "reversed certainty effect",
        Verdict::Boundary => "indifferent",
        Verdict::Fails => "direct certainty effect",
    };
    let mut r = ParadoxReport::new(Proposition::CERTAINTY, verdict, condition, outcome)
        .detail("partial_gap", gap)
        .detail("q_gap", q_gap)
        .detail("direct_gap", direct);
    r.agrees = Some(agree(condition, direct, s.band));
    Ok(r)
}

/// Disjunction effect on a binary lattice with `p(A1 X_j) > p(A2 X_j)` for
/// all `j` and alternating attractions: `pi2` is preferred iff
/// `q2 > (1/2) sum_j [p(A1 X_j) - p(A2 X_j)]`.
pub fn check_disjunction(s: &ParadoxScenario) -> Result<ParadoxReport> {
    s.require(2)?;
    let (a, b) = (&s.joints()[0], &s.joints()[1]);
    if let Some(outcome) = (0..a.len()).find(|&j| a[j] <= b[j]) {
        return Err(Error::MajorizationViolated { outcome });
    }
    let q = s.q();
    if q[0] > q[1] + ATTRACTION_EQ_TOL {
        return Err(precondition("q(pi1) < q(pi2): pi1 more uncertain than pi2"));
    }
    if (q[0] + q[1]).abs() > AGGREGATE_TOL {
        return Err(precondition("q(pi1) + q(pi2) = 0"));
    }
    let gap = s.partial_gap(0, 1);
    let condition = q[1] - 0.5 * gap;
    let direct = s.probabilities()[1] - s.probabilities()[0];
    let verdict = Verdict::strict(condition, s.band);
    let outcome = match verdict {
        Verdict::Holds => "disjunction effect",
        Verdict::Boundary => "indifferent",
        Verdict::Fails => "sure-thing principle holds",
    };
    let mut r = ParadoxReport::new(Proposition::DISJUNCTION, verdict, condition, outcome)
        .detail("q2", q[1])
        .detail("half_partial_gap", 0.5 * gap)
        .detail("direct_gap", direct);
    r.agrees = Some(agree(condition, direct, s.band));
    Ok(r)
}

/// Conjunction fallacy: some `p(pi_n) < sup_j p(A_n X_j)`, which happens iff
/// `q_n < -sum_(j != j0) p(A_n X_j)`. The witness is the prospect with the
/// largest slack and its leading outcome.
pub fn check_conjunction(s: &ParadoxScenario) -> Result<ParadoxReport> {
    let mut best: Option<(usize, usize, f64, f64)> = None;
    let mut r = ParadoxReport::new(Proposition::CONJUNCTION, Verdict::Fails, f64::NEG_INFINITY, "");
    for n in 0..s.prospects() {
        let row = &s.joints()[n];
        let j0 = argmax(row);
        let rest: f64 = row.iter().enumerate().filter(|&(j, _)| j != j0).map(|(_, p)| p).sum();
        let condition = -rest - s.q()[n];
        let direct = row[j0] - s.probabilities()[n];
        r.details.insert(format!("slack_{}", n + 1), condition);
        if best.is_none_or(|(_, _, c, _)| condition > c) {
            best = Some((n, j0, condition, direct));
        }
    }
    let (n0, j0, condition, direct) = best.expect("scenario has at least one prospect");
    r.verdict = Verdict::strict(condition, s.band);
    r.margin = condition;
    r.outcome = match r.verdict {
        Verdict::Holds => "conjunction fallacy",
        Verdict::Boundary => "boundary",
        Verdict::Fails => "no fallacy",
    }
    .to_string();
    r.witness = Some(vec![n0, j0]);
    r.agrees = Some(agree(condition, direct, s.band));
    Ok(r.detail("direct_gap", direct))
}

fn argmax(row: &[f64]) -> usize {
    row.iter().enumerate().fold(0, |best, (j, p)| if *p > row[best] { j } else { best })
}

/// Isolation effect: with `pi*` maximizing the partial sum, some other
/// `pi_n` is preferred iff `q* < q_n + sum_j p(A_n X_j) - sup_n sum_j p(A_n X_j)`.
pub fn check_isolation(s: &ParadoxScenario) -> Result<ParadoxReport> {
    s.require(2)?;
    let sums: Vec<f64> = (0..s.prospects()).map(|n| s.partial_sum(n)).collect();
    let top = argmax(&sums);
    let mut r = ParadoxReport::new(Proposition::ISOLATION, Verdict::Fails, f64::NEG_INFINITY, "");
    let mut best: Option<(usize, f64, f64)> = None;
    for n in (0..s.prospects()).filter(|&n| n != top) {
        let condition = s.q()[n] + sums[n] - sums[top] - s.q()[top];
        let direct = s.probabilities()[n] - s.probabilities()[top];
        r.details.insert(format!("slack_{}", n + 1), condition);
        if best.is_none_or(|(_, c, _)| condition > c) {
            best = Some((n, condition, direct));
        }
    }
    let (n, condition, direct) = best.expect("at least two prospects");
    r.verdict = Verdict::strict(condition, s.band);
    r.margin = condition;
    r.outcome = match r.verdict {
        Verdict::Holds => "isolation effect",
        Verdict::Boundary => "boundary",
        Verdict::Fails => "classical optimum kept",
    }
    .to_string();
    r.witness = Some(vec![n]);
    r.agrees = Some(agree(condition, direct, s.band));
    Ok(r.detail("leading_prospect", (top + 1) as f64).detail("direct_gap", direct))
}

/// Combined conjunction fallacy and preference reversal on a binary 2x2
/// lattice, with outcomes enumerated so that `p(A1 X1)` leads its row.
/// The branch depends on `p(A1 X1)` against one half:
/// below, fallacy implies reversal; above, reversal implies fallacy; at one
/// half, they are equivalent.
pub fn check_combined(s: &ParadoxScenario) -> Result<ParadoxReport> {
    if s.prospects() != 2 || s.outcomes() != 2 {
        return Err(Error::LengthMismatch { expected: 2, found: s.prospects().max(s.outcomes()) });
    }
    let j = s.joints();
    if j[0][0] < j[0][1] {
        return Err(Error::NotationViolated);
    }
    let q = s.q();
    if (q[0] + q[1]).abs() > AGGREGATE_TOL {
        return Err(precondition("q(pi1) + q(pi2) = 0"));
    }
    let p = s.probabilities();
    let lead = j[0][0];
    let fallacy_margin = lead - p[0];
    let reversal_margin = p[1] - p[0];
    let fallacy = fallacy_margin > 0.0;
    let reversal = reversal_margin > 0.0;
    let (proposition, margin) = if (lead - 0.5).abs() <= s.band {
        let m = if fallacy { fallacy_margin.min(reversal_margin) } else { (-fallacy_margin).min(-reversal_margin) };
        (Proposition::FALLACY_IFF_REVERSAL, m)
    } else if lead < 0.5 {
        (Proposition::FALLACY_IMPLIES_REVERSAL, if fallacy { reversal_margin } else { -fallacy_margin })
    } else {
        (Proposition::REVERSAL_IMPLIES_FALLACY, if reversal { fallacy_margin } else { -reversal_margin })
    };
    let verdict = if fallacy_margin.abs() <= s.band || reversal_margin.abs() <= s.band {
        Verdict::Boundary
    } else if margin > 0.0 {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    let outcome = match (fallacy, reversal) {
        (true, true) => "fallacy with reversal",
        (true, false) => "fallacy without reversal",
        (false, true) => "reversal without fallacy",
        (false, false) => "neither effect",
    };
    let mut r = ParadoxReport::new(proposition, verdict, margin, outcome)
        .detail("p_a1x1", lead)
        .detail("fallacy_margin", fallacy_margin)
        .detail("reversal_margin", reversal_margin)
        .detail("fallacy_condition", -j[0][1] - q[0]);
    // the fallacy condition q1 < -p(A1 X2) must match the direct comparison
    r.agrees = Some(agree(-j[0][1] - q[0], fallacy_margin, s.band));
    Ok(r)
}
