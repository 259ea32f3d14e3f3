//! Scenario files, built-in fixtures and result documents.
//!
//! Scenarios are JSON. A file declares the action frame, exactly one state
//! source (explicit amplitudes or calibration targets), optional classical
//! data (weights, conditionals, utilities) and a list of checks. Results are
//! written in a canonical form: sorted keys, every float with 17 significant
//! digits, one trailing newline.

use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::calibration::{calibrate_lattice, CalibrationTarget};
use crate::error::{Error, Result};
use crate::mindspace::{ActionFrame, BasicStateIndex, Factor, ProspectLattice, ProspectState, StrategicState};
use crate::paradox::{self, ParadoxReport, ParadoxScenario, Proposition};
use crate::probability::{lattice_report_with, order_probabilities, ProspectReport};
use crate::{Tolerances, ENGINE_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub frame: FrameSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<AmplitudeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetSpec>,
    /// `p(X_j)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// `p(A_n)`, used with per-prospect lotteries in `conditionals`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prospect_weights: Option<Vec<f64>>,
    /// One row `p(A_n|X_j)` (or lottery `p_n(X_j)`) per prospect.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditionals: Option<Vec<Vec<f64>>>,
    /// `U(X_j)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub factors: Vec<FactorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub label: String,
    pub modes: Vec<String>,
}

/// A factor mode given by position or by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeRef {
    Position(usize),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeEntry {
    pub index: Vec<ModeRef>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProspectSpec {
    pub label: String,
    pub support: Vec<AmplitudeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeSpec {
    pub strategic: Vec<AmplitudeEntry>,
    pub prospects: Vec<ProspectSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub partials: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    /// Defaults to one row per first-factor mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supports: Option<Vec<Vec<Vec<ModeRef>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub proposition: String,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub params: Map<String, Value>,
}

impl CheckSpec {
    pub fn new(proposition: &str) -> Self {
        CheckSpec { proposition: proposition.to_string(), params: Map::new() }
    }
}

fn schema(field: impl Into<String>, constraint: impl Into<String>) -> Error {
    Error::Schema { field: field.into(), constraint: constraint.into() }
}

/// Parses and validates scenario text.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let file: ScenarioFile = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        schema(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
    })?;
    Scenario::new(file)
}

/// A validated scenario with its frame and state built.
#[derive(Debug, Clone)]
pub struct Scenario {
    file: ScenarioFile,
    frame: ActionFrame,
    psi: StrategicState,
    lattice: ProspectLattice,
}

impl Scenario {
    pub fn new(file: ScenarioFile) -> Result<Self> {
        let frame = build_frame(&file.frame)?;
        let (psi, lattice) = match (&file.amplitudes, &file.targets) {
            (Some(_), Some(_)) => return Err(schema("amplitudes", "mutually exclusive with `targets`")),
            (None, None) => return Err(schema("<root>", "one of `amplitudes` or `targets` is required")),
            (Some(a), None) => build_amplitudes(&frame, a)?,
            (None, Some(t)) => build_targets(&frame, t)?,
        };
        let s = Scenario { file, frame, psi, lattice };
        s.validate_classical()?;
        Ok(s)
    }

    fn validate_classical(&self) -> Result<()> {
        let f = &self.file;
        let finite = |field: &str, v: &[f64]| -> Result<()> {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(schema(field, "values must be finite"));
            }
            Ok(())
        };
        if f.weights.is_some() && f.prospect_weights.is_some() {
            return Err(schema("prospect_weights", "mutually exclusive with `weights`"));
        }
        if let Some(w) = &f.weights {
            finite("weights", w)?;
        }
        if let Some(w) = &f.prospect_weights {
            finite("prospect_weights", w)?;
            if w.len() != self.lattice.len() {
                return Err(schema("prospect_weights", format!("need one weight per prospect ({})", self.lattice.len())));
            }
        }
        if let Some(u) = &f.utilities {
            finite("utilities", u)?;
        }
        if let Some(c) = &f.conditionals {
            if c.len() != self.lattice.len() {
                return Err(schema("conditionals", format!("need one row per prospect ({})", self.lattice.len())));
            }
            for (n, row) in c.iter().enumerate() {
                finite(&format!("conditionals[{n}]"), row)?;
                if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(schema(format!("conditionals[{n}]"), "probabilities must lie in [0, 1]"));
                }
                let width = f.weights.as_ref().map_or(c[0].len(), Vec::len);
                if row.len() != width {
                    return Err(schema(format!("conditionals[{n}]"), format!("need {width} entries")));
                }
            }
            if let Some(u) = &f.utilities {
                if u.len() != c[0].len() {
                    return Err(schema("utilities", "need one utility per outcome"));
                }
            }
        }
        for (k, check) in f.checks.iter().enumerate() {
            if check.proposition.trim().is_empty() {
                return Err(schema(format!("checks[{k}].proposition"), "must name a proposition"));
            }
        }
        Ok(())
    }

    pub fn file(&self) -> &ScenarioFile {
        &self.file
    }

    pub fn frame(&self) -> &ActionFrame {
        &self.frame
    }

    pub fn state(&self) -> &StrategicState {
        &self.psi
    }

    pub fn lattice(&self) -> &ProspectLattice {
        &self.lattice
    }

    /// Hex SHA-256 of the canonical serialization of the file.
    pub fn hash(&self) -> String {
        canonical_hash(&self.file)
    }

    /// Per-prospect decomposition.
    pub fn evaluate(&self, tol: &Tolerances) -> Result<Vec<ProspectReport>> {
        Ok(lattice_report_with(&self.lattice, &self.psi, tol.aggregate)?.reports)
    }

    /// Labels of the prospects with the highest probability; ties within
    /// `tol.identity` are kept.
    pub fn optimal(&self, reports: &[ProspectReport], tol: &Tolerances) -> Vec<String> {
        order_probabilities(reports.iter().map(|r| r.probability).collect(), tol.identity)
            .optimal().iter().map(|&k| reports[k].label.clone()).collect()
    }

    /// Checks listed in the file, restricted to `filter` when given. A
    /// filtered proposition the file does not list runs with no parameters.
    pub fn run_checks(&self, filter: Option<&[Proposition]>, tol: &Tolerances) -> Result<Vec<CheckEntry>> {
        let mut planned: Vec<(Proposition, CheckSpec)> = Vec::new();
        for check in &self.file.checks {
            let p: Proposition = check.proposition.parse()?;
            if filter.is_none_or(|f| f.iter().any(|x| same_check(*x, p))) {
                planned.push((p, check.clone()));
            }
        }
        for &p in filter.unwrap_or(&[]) {
            if !planned.iter().any(|(x, _)| same_check(*x, p)) {
                planned.push((p, CheckSpec::new(&p.id().to_string())));
            }
        }
        planned.into_iter().map(|(p, spec)| self.run_check(p, &spec, tol)).collect()
    }

    fn run_check(&self, prop: Proposition, spec: &CheckSpec, tol: &Tolerances) -> Result<CheckEntry> {
        let outcome = match prop.id() {
            1 => paradox::check_decomposition(&self.lattice, &self.psi),
            2 => paradox::check_alternation(&self.lattice, &self.psi, tol.aggregate),
            3 => {
                let p = Params::new(prop, spec);
                let weights = match p.opt_vec("weights")? {
                    Some(w) => w,
                    None => self.file.weights.clone().ok_or_else(|| p.missing("weights"))?,
                };
                paradox::check_bayes(&p.vec("conditionals")?, &weights, p.num("q_ax")?, p.num("p_xja")?)
            }
            4 => {
                let p = Params::new(prop, spec);
                paradox::check_noncommutativity(
                    p.num("p_ax")?,
                    &p.vec("conditionals_xa")?,
                    p.num("q_xa")?,
                    p.opt_num("q_ax")?,
                )
            }
            6 => {
                let p = Params::new(prop, spec);
                match p.opt_vec("probabilities")? {
                    Some(probs) => paradox::check_independence(&probs, p.num("q13")?, p.num("q24")?),
                    None => paradox::check_independence_on_lattice(&self.lattice, &self.psi),
                }
            }
            _ => {
                let s = self.paradox_scenario(prop, spec)?;
                let p = Params::new(prop, spec);
                let pair = p.pair()?;
                match prop.id() {
                    5 => paradox::check_allais_compatibility(&s),
                    7 => paradox::check_ellsberg(&s),
                    8 => paradox::check_inversion(&s, pair.0, pair.1),
                    9 => paradox::check_kahneman_tversky(&s),
                    10 => paradox::check_certainty(&s, pair.0, pair.1),
                    11 => paradox::check_disjunction(&s),
                    12 => paradox::check_conjunction(&s),
                    13 => paradox::check_isolation(&s),
                    _ => paradox::check_combined(&s),
                }
            }
        };
        match outcome {
            Ok(report) => Ok(CheckEntry { requested: prop, report: Some(report), not_applicable: None }),
            Err(e) if is_precondition(&e) => {
                Ok(CheckEntry { requested: prop, report: None, not_applicable: Some(e.to_string()) })
            }
            Err(e) => Err(e),
        }
    }

    /// Joints and attractions for the paradox checkers. Joints come from
    /// parameters, classical data, or the built state, in that order; `q`
    /// from parameters, targets, or the built state.
    pub fn paradox_scenario(&self, prop: Proposition, spec: &CheckSpec) -> Result<ParadoxScenario> {
        let p = Params::new(prop, spec);
        let from_state = ParadoxScenario::from_state(&self.lattice, &self.psi);
        let q = match p.opt_vec("q")? {
            Some(q) => q,
            None => match &self.file.targets {
                Some(t) => t.q.clone(),
                None => from_state.as_ref().map_err(|_| p.missing("q"))?.q().to_vec(),
            },
        };
        let prospect_weights = p.opt_vec("prospect_weights")?.or_else(|| self.file.prospect_weights.clone());
        let s = if let Some(joints) = p.opt_matrix("joints")? {
            ParadoxScenario::from_joints(joints, q)?
        } else if let (Some(c), Some(w)) = (&self.file.conditionals, &prospect_weights) {
            ParadoxScenario::from_lotteries(c.clone(), w, q)?
        } else if let (Some(c), Some(w)) = (&self.file.conditionals, &self.file.weights) {
            ParadoxScenario::from_conditionals(c.clone(), w, q)?
        } else {
            let s = from_state.map_err(|_| p.missing("joints"))?;
            if p.opt_vec("q")?.is_some() || self.file.targets.is_some() {
                s.with_q(q)?
            } else {
                s
            }
        };
        Ok(match &self.file.utilities {
            Some(u) => s.with_utilities(u.clone()),
            None => s,
        })
    }
}

fn same_check(a: Proposition, b: Proposition) -> bool {
    a == b || (a.id() >= 14 && b.id() >= 14)
}

fn is_precondition(e: &Error) -> bool {
    matches!(
        e,
        Error::BalanceViolated { .. }
            | Error::PreconditionViolated { .. }
            | Error::InvarianceViolated
            | Error::UncertaintyPatternViolated
            | Error::MajorizationViolated { .. }
            | Error::NotationViolated
    )
}

struct Params<'a> {
    check: String,
    map: &'a Map<String, Value>,
}

impl<'a> Params<'a> {
    fn new(prop: Proposition, spec: &'a CheckSpec) -> Self {
        Params { check: prop.to_string(), map: &spec.params }
    }

    fn missing(&self, field: &str) -> Error {
        Error::MissingCheckField { check: self.check.clone(), field: field.to_string() }
    }

    fn bad(&self, field: &str, constraint: &str) -> Error {
        schema(format!("checks[{}].params.{field}", self.check), constraint)
    }

    fn opt_num(&self, field: &str) -> Result<Option<f64>> {
        match self.map.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| self.bad(field, "expected a number")),
        }
    }

    fn num(&self, field: &str) -> Result<f64> {
        self.opt_num(field)?.ok_or_else(|| self.missing(field))
    }

    fn opt_vec(&self, field: &str) -> Result<Option<Vec<f64>>> {
        match self.map.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|_| self.bad(field, "expected a list of numbers")),
        }
    }

    fn vec(&self, field: &str) -> Result<Vec<f64>> {
        self.opt_vec(field)?.ok_or_else(|| self.missing(field))
    }

    fn opt_matrix(&self, field: &str) -> Result<Option<Vec<Vec<f64>>>> {
        match self.map.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|_| self.bad(field, "expected rows of numbers")),
        }
    }

    /// 1-based prospect pair, default `[1, 2]`.
    fn pair(&self) -> Result<(usize, usize)> {
        match self.map.get("pair") {
            None | Some(Value::Null) => Ok((0, 1)),
            Some(v) => match serde_json::from_value::<[usize; 2]>(v.clone()) {
                Ok([a, b]) if a >= 1 && b >= 1 && a != b => Ok((a - 1, b - 1)),
                _ => Err(self.bad("pair", "expected two distinct 1-based prospect numbers")),
            },
        }
    }
}

fn build_frame(spec: &FrameSpec) -> Result<ActionFrame> {
    if spec.factors.is_empty() {
        return Err(schema("frame.factors", "at least one factor is required"));
    }
    for (k, f) in spec.factors.iter().enumerate() {
        if f.modes.is_empty() {
            return Err(schema(format!("frame.factors[{k}].modes"), "at least one mode is required"));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(m) = f.modes.iter().find(|m| !seen.insert(m.as_str())) {
            return Err(schema(format!("frame.factors[{k}].modes"), format!("duplicate mode `{m}`")));
        }
    }
    ActionFrame::new(spec.factors.iter().map(|f| Factor::with_modes(f.label.clone(), f.modes.clone())).collect())
        .map_err(|e| schema("frame.factors", e.to_string()))
}

fn resolve(frame: &ActionFrame, field: &str, index: &[ModeRef]) -> Result<BasicStateIndex> {
    if index.len() != frame.shape().len() {
        return Err(schema(field, format!("expected {} mode references", frame.shape().len())));
    }
    let modes = index
        .iter()
        .enumerate()
        .map(|(k, m)| match m {
            ModeRef::Position(p) if *p < frame.shape()[k] => Ok(*p),
            ModeRef::Position(p) => Err(schema(field, format!("mode {p} out of range for factor {k}"))),
            ModeRef::Label(l) => frame.mode_position(k, l).ok_or_else(|| schema(field, format!("unknown mode label `{l}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasicStateIndex(modes))
}

fn amplitude(field: &str, e: &AmplitudeEntry) -> Result<Complex64> {
    if !e.re.is_finite() || !e.im.is_finite() {
        return Err(schema(field, "amplitude must be finite"));
    }
    Ok(Complex64::new(e.re, e.im))
}

fn build_amplitudes(frame: &ActionFrame, spec: &AmplitudeSpec) -> Result<(StrategicState, ProspectLattice)> {
    if spec.prospects.is_empty() {
        return Err(schema("amplitudes.prospects", "at least one prospect is required"));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); frame.dim()];
    for (k, e) in spec.strategic.iter().enumerate() {
        let field = format!("amplitudes.strategic[{k}]");
        let idx = resolve(frame, &format!("{field}.index"), &e.index)?;
        coeffs[frame.flat_index(&idx)?] = amplitude(&field, e)?;
    }
    let psi = StrategicState::new(frame, coeffs)?;
    let mut prospects = Vec::with_capacity(spec.prospects.len());
    for (n, p) in spec.prospects.iter().enumerate() {
        let mut support = Vec::with_capacity(p.support.len());
        for (k, e) in p.support.iter().enumerate() {
            let field = format!("amplitudes.prospects[{n}].support[{k}]");
            support.push((resolve(frame, &format!("{field}.index"), &e.index)?, amplitude(&field, e)?));
        }
        prospects.push(ProspectState::from_support(frame, p.label.clone(), &support)?);
    }
    Ok((psi, ProspectLattice::new(prospects)?))
}

fn build_targets(frame: &ActionFrame, spec: &TargetSpec) -> Result<(StrategicState, ProspectLattice)> {
    if spec.partials.is_empty() {
        return Err(schema("targets.partials", "at least one prospect is required"));
    }
    if spec.partials.iter().flatten().chain(&spec.q).any(|x| !x.is_finite()) {
        return Err(schema("targets", "values must be finite"));
    }
    let infeasible = |e: Error| match e {
        Error::LengthMismatch { .. } => schema("targets", e.to_string()),
        e => Error::TargetInfeasible { reason: e.to_string() },
    };
    let target = match &spec.supports {
        None => {
            let rows = frame.shape()[0];
            if spec.partials.len() != rows {
                return Err(schema("targets.partials", format!("need one row per mode of the first factor ({rows})")));
            }
            if let Some(row) = spec.partials.iter().find(|r| r.len() != frame.dim() / rows) {
                return Err(schema("targets.partials", format!("rows need {} entries, found {}", frame.dim() / rows, row.len())));
            }
            CalibrationTarget::canonical(frame, spec.partials.clone(), spec.q.clone()).map_err(infeasible)?
        }
        Some(supports) => {
            let resolved = supports
                .iter()
                .enumerate()
                .map(|(n, s)| {
                    s.iter()
                        .enumerate()
                        .map(|(k, idx)| resolve(frame, &format!("targets.supports[{n}][{k}]"), idx))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            for (n, (row, s)) in spec.partials.iter().zip(&resolved).enumerate() {
                if row.len() != s.len() {
                    return Err(schema(format!("targets.supports[{n}]"), "must match the partials row length"));
                }
            }
            CalibrationTarget::new(spec.partials.clone(), spec.q.clone(), resolved).map_err(infeasible)?
        }
    };
    let target = match &spec.labels {
        Some(l) => target.with_labels(l.clone()).map_err(|e| schema("targets.labels", e.to_string()))?,
        None => target,
    };
    calibrate_lattice(&target, frame).map_err(|e| match e {
        Error::OverlappingSupports { .. } => e,
        e => infeasible(e),
    })
}

/// Names accepted by [`builtin`].
pub const BUILTINS: [&str; 5] = ["allais", "ellsberg", "kahneman-tversky", "disjunction-template", "conjunction-template"];

fn labelled(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

fn frame_spec(prospects: usize, outcomes: usize) -> FrameSpec {
    FrameSpec {
        factors: vec![
            FactorSpec { label: "A".into(), modes: labelled("A", prospects) },
            FactorSpec { label: "X".into(), modes: labelled("X", outcomes) },
        ],
    }
}

fn targets(partials: Vec<Vec<f64>>, q: Vec<f64>) -> Option<TargetSpec> {
    Some(TargetSpec { partials, q, supports: None, labels: None })
}

fn rows<const W: usize>(r: &[[f64; W]]) -> Vec<Vec<f64>> {
    r.iter().map(|r| r.to_vec()).collect()
}

fn scaled(r: &[Vec<f64>], w: f64) -> Vec<Vec<f64>> {
    r.iter().map(|r| r.iter().map(|p| p * w).collect()).collect()
}

/// The canonical fixture `name` as a scenario file.
pub fn builtin_file(name: &str) -> Result<ScenarioFile> {
    let empty = |name: &str, frame| ScenarioFile {
        name: Some(name.to_string()),
        frame,
        amplitudes: None,
        targets: None,
        weights: None,
        prospect_weights: None,
        conditionals: None,
        utilities: None,
        checks: Vec::new(),
    };
    let checks = |ids: &[&str]| ids.iter().map(|p| CheckSpec::new(p)).collect::<Vec<_>>();
    let file = match name {
        "allais" => {
            let sets = rows(&[[0.0, 1.0, 0.0], [0.01, 0.89, 0.10], [0.90, 0.0, 0.10], [0.89, 0.11, 0.0]]);
            ScenarioFile {
                targets: targets(scaled(&sets, 0.25), vec![0.0, -0.1, 0.05, 0.05]),
                prospect_weights: Some(vec![0.25; 4]),
                conditionals: Some(sets),
                utilities: Some(vec![0.0, 1.0, 2.0]),
                checks: checks(&["5"]),
                ..empty(name, frame_spec(4, 3))
            }
        }
        "ellsberg" => {
            let cond = rows(&[[0.5, 0.5], [0.5, 0.5]]);
            ScenarioFile {
                targets: targets(scaled(&cond, 0.5), vec![0.1, -0.1]),
                weights: Some(vec![0.5, 0.5]),
                conditionals: Some(cond),
                checks: checks(&["7"]),
                ..empty(name, frame_spec(2, 2))
            }
        }
        "kahneman-tversky" => {
            let sets = rows(&[[0.5, 0.0, 0.5], [0.0, 1.0, 0.0], [0.5, 0.0, 0.5], [0.0, 1.0, 0.0]]);
            ScenarioFile {
                targets: targets(scaled(&sets, 0.25), vec![-0.1, 0.0, 0.1, 0.0]),
                prospect_weights: Some(vec![0.25; 4]),
                conditionals: Some(sets),
                checks: checks(&["9"]),
                ..empty(name, frame_spec(4, 3))
            }
        }
        "disjunction-template" => ScenarioFile {
            targets: targets(rows(&[[0.3, 0.3], [0.2, 0.2]]), vec![-0.15, 0.15]),
            checks: checks(&["11", "8"]),
            ..empty(name, frame_spec(2, 2))
        },
        "conjunction-template" => ScenarioFile {
            targets: targets(rows(&[[0.4, 0.1], [0.25, 0.25]]), vec![-0.2, 0.2]),
            checks: checks(&["12", "14"]),
            ..empty(name, frame_spec(2, 2))
        },
        other => return Err(Error::UnknownBuiltin(other.to_string())),
    };
    Ok(file)
}

pub fn builtin(name: &str) -> Result<Scenario> {
    Scenario::new(builtin_file(name)?)
}

/// Outcome of one requested check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub requested: Proposition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ParadoxReport>,
    /// Why the check's preconditions did not hold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub not_applicable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario_hash: String,
    pub engine_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
}

impl Provenance {
    pub fn new(scenario_hash: String, seed: Option<u64>, tolerances: Tolerances) -> Self {
        Provenance { scenario_hash, engine_version: ENGINE_VERSION.to_string(), seed, tolerances }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub reports: Vec<ProspectReport>,
    pub paradoxes: Vec<CheckEntry>,
    pub provenance: Provenance,
}

struct CanonicalFormatter;

impl serde_json::ser::Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Canonical text of any serializable value: keys sorted, floats with 17
/// significant digits, newline-terminated.
pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    // Value maps are ordered, which sorts every object's keys
    let tree = serde_json::to_value(value).expect("engine documents serialize to JSON");
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    tree.serialize(&mut ser).expect("writing to memory cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}

/// Hex SHA-256 of [`to_canonical_string`].
pub fn canonical_hash<T: Serialize>(value: &T) -> String {
    hex::encode(Sha256::digest(to_canonical_string(value).as_bytes()))
}

pub fn save_results(document: &ResultDocument) -> String {
    to_canonical_string(document)
}

pub fn load_results(text: &str) -> Result<ResultDocument> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    serde_path_to_error::deserialize(value).map_err(|e| schema(e.path().to_string(), e.into_inner().to_string()))
}

/// Evaluates the scenario and runs its checks into a result document.
pub fn evaluate_document(
    scenario: &Scenario,
    filter: Option<&[Proposition]>,
    tol: &Tolerances,
    run_checks: bool,
) -> Result<ResultDocument> {
    let reports = scenario.evaluate(tol)?;
    let paradoxes = if run_checks { scenario.run_checks(filter, tol)? } else { Vec::new() };
    Ok(ResultDocument { reports, paradoxes, provenance: Provenance::new(scenario.hash(), None, *tol) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paradox::Verdict;

    #[test]
    fn allais_builtin_sets_and_balance() {
        let s = builtin("allais").unwrap();
        let c = s.file().conditionals.as_ref().unwrap();
        assert_eq!(c[1], vec![0.01, 0.89, 0.10]);
        assert_eq!(c[3], vec![0.89, 0.11, 0.0]);
        let sums: Vec<f64> = (0..3).map(|j| c[0][j] + c[2][j]).collect();
        assert_eq!(sums, vec![0.9, 1.0, 0.1]);
        let sums: Vec<f64> = (0..3).map(|j| c[1][j] + c[3][j]).collect();
        assert_eq!(sums, vec![0.9, 1.0, 0.1]);
    }

    #[test]
    fn kahneman_tversky_builtin() {
        let s = builtin("kahneman-tversky").unwrap();
        let c = s.file().conditionals.as_ref().unwrap();
        assert_eq!(c[0], vec![0.5, 0.0, 0.5]);
        assert_eq!(c[1], vec![0.0, 1.0, 0.0]);
        let reports = s.evaluate(&Tolerances::default()).unwrap();
        for (r, e) in reports.iter().zip([0.15, 0.25, 0.35, 0.25]) {
            assert!((r.probability - e).abs() < 1e-9, "{} vs {e}", r.probability);
        }
        assert_eq!(s.optimal(&reports, &Tolerances::default()), vec!["A3X".to_string()]);
    }

    #[test]
    fn unknown_builtin() {
        assert_eq!(builtin("unknown").unwrap_err(), Error::UnknownBuiltin("unknown".into()));
    }

    #[test]
    fn builtins_run_their_checks() {
        let tol = Tolerances::default();
        for name in BUILTINS {
            let s = builtin(name).unwrap();
            let checks = s.run_checks(None, &tol).unwrap();
            assert!(!checks.is_empty());
            for c in checks {
                let r = c.report.unwrap_or_else(|| panic!("{name}: {:?}", c.not_applicable));
                assert_eq!(r.verdict, Verdict::Holds, "{name}: {r:?}");
            }
        }
    }

    #[test]
    fn allais_custom_gap() {
        let mut f = builtin_file("allais").unwrap();
        let mut spec = CheckSpec::new("5");
        spec.params.insert("q".into(), serde_json::json!([0.1, -0.1, 0.0, 0.0]));
        spec.params.insert("prospect_weights".into(), serde_json::json!([0.225, 0.275, 0.25, 0.25]));
        f.checks = vec![spec];
        let s = Scenario::new(f).unwrap();
        let r = s.run_checks(None, &Tolerances::default()).unwrap().remove(0).report.unwrap();
        assert_eq!(r.outcome, "compatible");
        assert!((r.margin - 0.05).abs() < 1e-12);
    }

    #[test]
    fn parse_and_schema_errors() {
        assert!(matches!(load_scenario("{\"frame\": ").unwrap_err(), Error::Parse { line: 1, .. }));
        let text = r#"{"frame": {"factors": [{"label": "A", "modes": ["a"]}]},
            "amplitudes": {"strategic": [{"index": [0], "re": 1}], "prospects": []}}"#;
        assert!(matches!(load_scenario(text).unwrap_err(), Error::Schema { field, .. } if field == "amplitudes.prospects"));
        let text = r#"{"frame": {"factors": []}, "targets": {"partials": [], "q": []}}"#;
        assert!(matches!(load_scenario(text).unwrap_err(), Error::Schema { .. }));
        let text = r#"{"frame": {"factors": [{"label": "A", "modes": ["a"]}]}, "bogus": 1}"#;
        assert!(matches!(load_scenario(text).unwrap_err(), Error::Schema { .. }));
        let text = r#"{"frame": {"factors": [{"label": "A", "modes": ["a", "b"]}]},
            "targets": {"partials": [[0.5], [0.4]], "q": [0, 0]}}"#;
        assert!(matches!(load_scenario(text).unwrap_err(), Error::TargetInfeasible { reason } if reason.contains("sum_(n,a)")));
    }

    #[test]
    fn mixing_state_sources_rejected() {
        let text = r#"{"frame": {"factors": [{"label": "A", "modes": ["a"]}]},
            "targets": {"partials": [[1.0]], "q": [0]},
            "amplitudes": {"strategic": [{"index": [0], "re": 1}], "prospects": [{"label": "p", "support": [{"index": ["a"], "re": 1}]}]}}"#;
        assert!(matches!(load_scenario(text).unwrap_err(), Error::Schema { field, .. } if field == "amplitudes"));
    }

    #[test]
    fn amplitudes_with_labels() {
        let text = r#"{"frame": {"factors": [{"label": "A", "modes": ["a1", "a2"]}]},
            "amplitudes": {
              "strategic": [{"index": ["a1"], "re": 0.6}, {"index": [1], "re": 0, "im": 0.8}],
              "prospects": [{"label": "first", "support": [{"index": ["a1"], "re": 1}]},
                            {"label": "second", "support": [{"index": ["a2"], "re": 1}]}]}}"#;
        let s = load_scenario(text).unwrap();
        let r = s.evaluate(&Tolerances::default()).unwrap();
        assert!((r[0].probability - 0.36).abs() < 1e-15 && (r[1].probability - 0.64).abs() < 1e-15);
        let bad = text.replace("[\"a1\"], \"re\": 0.6", "[\"zz\"], \"re\": 0.6");
        assert!(matches!(load_scenario(&bad).unwrap_err(), Error::Schema { .. }));
    }

    #[test]
    fn canonical_round_trip() {
        let s = builtin("conjunction-template").unwrap();
        let doc = evaluate_document(&s, None, &Tolerances::default(), true).unwrap();
        let text = save_results(&doc);
        assert!(text.ends_with('\n'));
        assert_eq!(load_results(&text).unwrap(), doc);
        assert_eq!(save_results(&load_results(&text).unwrap()), text);
    }

    #[test]
    fn key_order_irrelevant() {
        let a: Value = serde_json::from_str(r#"{"b": 0.75, "a": [1.0, {"y": 2, "x": 3}]}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"a": [1.0, {"x": 3, "y": 2}], "b": 0.75}"#).unwrap();
        let text = to_canonical_string(&a);
        assert_eq!(text, to_canonical_string(&b));
        assert!(text.contains("7.5000000000000000e-1"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"].as_f64().unwrap().to_bits(), 0.75f64.to_bits());
    }

    #[test]
    fn hash_is_stable() {
        let a = builtin("ellsberg").unwrap();
        let text = to_canonical_string(a.file());
        let b = load_scenario(&text).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn classical_limit_matches_partials() {
        let mut f = builtin_file("disjunction-template").unwrap();
        f.targets.as_mut().unwrap().q = vec![0.0, 0.0];
        let r = Scenario::new(f).unwrap().evaluate(&Tolerances::default()).unwrap();
        assert!((r[0].probability - 0.6).abs() < 1e-12 && (r[1].probability - 0.4).abs() < 1e-12);
    }
}
