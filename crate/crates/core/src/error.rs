use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the engine can report.
///
/// Variants are grouped by the module that raises them; [`Error::category`]
/// maps them onto the coarse classes the command line exposes as exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // frame and state construction
    #[error("action frame has no factors")]
    EmptyFrame,
    #[error("factor `{factor}` has zero modes; an empty action is not a basis factor")]
    ZeroModes { factor: String },
    #[error("duplicate factor label `{label}`")]
    DuplicateFactor { label: String },
    #[error("objects are defined over different action frames")]
    FrameMismatch,
    #[error("basic-state index {index:?} is outside the frame shape {shape:?}")]
    IndexOutOfRange { index: Vec<usize>, shape: Vec<usize> },
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("strategic state is not normalized: sum |c|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    // probability kernel
    #[error("joint normalization sum_(n,a) |b c|^2 = 1 violated: total = {total}")]
    JointNormalizationViolated { total: f64 },
    #[error("conditioning event has zero probability")]
    ZeroConditioningEvent,
    #[error("generalized Bayes denominator {value} is degenerate")]
    DegenerateDenominator { value: f64 },
    #[error("weights p(X_j) must lie in [0,1] and sum to 1: total = {total}")]
    WeightsNotNormalized { total: f64 },
    #[error("reverse conditionals sum_j p(X_j|A) must equal 1: total = {total}")]
    ConditionalNotNormalized { total: f64 },
    #[error("probability {value} lies outside [0,1]")]
    ProbabilityOutOfRange { value: f64 },

    // calibration
    #[error("partial-probability row has no positive entry")]
    AllZeroRow,
    #[error("attraction target {target} outside feasible range [{q_min}, {q_max}]")]
    InfeasibleTarget { target: f64, q_min: f64, q_max: f64 },
    #[error("phase family reaches only [{q_min}, {q_max}]; cannot bracket target {target}")]
    NoBracket { target: f64, q_min: f64, q_max: f64 },
    #[error("prospect supports overlap at basic state {index:?}")]
    OverlappingSupports { index: Vec<usize> },
    #[error("partials must be nonnegative and satisfy sum_(n,a) p_n(e_a) = 1: total = {total}")]
    PartialsNotNormalized { total: f64 },
    #[error("attraction targets must alternate, sum_n q_n = 0: total = {total}")]
    AlternationViolated { total: f64 },

    // paradox checkers
    #[error("balance condition p1+p3 = p2+p4 fails at outcome {outcome}")]
    BalanceViolated { outcome: usize },
    #[error("precondition violated: {condition}")]
    PreconditionViolated { condition: String },
    #[error("invariance condition sum_j p(A_n X_j) = const violated")]
    InvarianceViolated,
    #[error("uncertainty pattern q1 < q2, q4 < q3 violated")]
    UncertaintyPatternViolated,
    #[error("majorization p(A1 X_j) > p(A2 X_j) fails at outcome {outcome}")]
    MajorizationViolated { outcome: usize },
    #[error("outcomes must be enumerated so that p(A1 X1) is the row maximum")]
    NotationViolated,

    // sampling
    #[error("sampling constraints cannot be met: {0}")]
    ConstraintInfeasible(String),
    #[error("unsupported proposition `{0}`")]
    UnsupportedProposition(String),

    // scenario files
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error in `{field}`: {constraint}")]
    Schema { field: String, constraint: String },
    #[error("calibration target infeasible: {reason}")]
    TargetInfeasible { reason: String },
    #[error("unknown built-in scenario `{0}`")]
    UnknownBuiltin(String),
    #[error("check `{check}` is missing required field `{field}`")]
    MissingCheckField { check: String, field: String },
}

/// Coarse failure class, stable across releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Input,
    Infeasible,
    Request,
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Parse { .. }
            | Error::Schema { .. }
            | Error::UnknownBuiltin(_)
            | Error::EmptyFrame
            | Error::ZeroModes { .. }
            | Error::DuplicateFactor { .. }
            | Error::IndexOutOfRange { .. }
            | Error::NotNormalized { .. }
            | Error::ZeroVector
            | Error::NonFinite { .. }
            | Error::OverlappingSupports { .. } => Category::Input,
            Error::TargetInfeasible { .. }
            | Error::InfeasibleTarget { .. }
            | Error::NoBracket { .. }
            | Error::PartialsNotNormalized { .. }
            | Error::AlternationViolated { .. }
            | Error::AllZeroRow
            | Error::JointNormalizationViolated { .. } => Category::Infeasible,
            _ => Category::Request,
        }
    }
}
