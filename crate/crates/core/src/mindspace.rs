//! Finite-dimensional state spaces for intended actions.
//!
//! An [`ActionFrame`] lists the action factors and their modes. Its basic
//! states are the tensor products of one mode per factor, enumerated densely
//! in lexicographic (row-major) order. Strategic and prospect states are
//! complex coefficient vectors over that basis.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::IDENTITY_TOL;

/// One action factor and the labels of its modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub label: String,
    pub modes: Vec<String>,
}

impl Factor {
    /// Factor with default mode labels `label1 .. labelM`.
    pub fn new(label: impl Into<String>, mode_count: usize) -> Self {
        let label = label.into();
        let modes = (1..=mode_count).map(|j| format!("{label}{j}")).collect();
        Factor { label, modes }
    }

    pub fn with_modes(label: impl Into<String>, modes: Vec<String>) -> Self {
        Factor { label: label.into(), modes }
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }
}

#[derive(Debug, PartialEq, Eq)]
struct FrameInner {
    factors: Vec<Factor>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

/// The ordered action factors spanning a mind space.
///
/// Cloning is cheap; clones compare equal and share storage.
#[derive(Clone, PartialEq, Eq)]
pub struct ActionFrame(Arc<FrameInner>);

impl fmt::Debug for ActionFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ActionFrame")
            .field("factors", &self.0.factors)
            .field("dim", &self.0.dim)
            .finish()
    }
}

/// Mode tuple addressing one basic state, one 0-based mode per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasicStateIndex(pub Vec<usize>);

impl BasicStateIndex {
    pub fn modes(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for BasicStateIndex {
    fn from(v: Vec<usize>) -> Self {
        BasicStateIndex(v)
    }
}

impl<const N: usize> From<[usize; N]> for BasicStateIndex {
    fn from(v: [usize; N]) -> Self {
        BasicStateIndex(v.to_vec())
    }
}

/// Builds a frame from `(label, mode_count)` pairs.
pub fn build_frame(factors: &[(&str, usize)]) -> Result<ActionFrame> {
    ActionFrame::new(factors.iter().map(|&(l, m)| Factor::new(l, m)).collect())
}

impl ActionFrame {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyFrame);
        }
        for (i, f) in factors.iter().enumerate() {
            if f.modes.is_empty() {
                return Err(Error::ZeroModes { factor: f.label.clone() });
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::DuplicateFactor { label: f.label.clone() });
            }
        }
        let shape: Vec<usize> = factors.iter().map(Factor::mode_count).collect();
        let mut strides = vec![1; shape.len()];
        for n in (0..shape.len().saturating_sub(1)).rev() {
            strides[n] = strides[n + 1] * shape[n + 1];
        }
        let dim = shape.iter().product();
        Ok(ActionFrame(Arc::new(FrameInner { factors, shape, strides, dim })))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0.factors
    }

    pub fn shape(&self) -> &[usize] {
        &self.0.shape
    }

    /// Dimension of the mind space, the product of all mode counts.
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn flat_index(&self, index: &BasicStateIndex) -> Result<usize> {
        let modes = index.modes();
        let shape = self.shape();
        if modes.len() != shape.len() || modes.iter().zip(shape).any(|(j, m)| j >= m) {
            return Err(Error::IndexOutOfRange { index: modes.to_vec(), shape: shape.to_vec() });
        }
        Ok(modes.iter().zip(&self.0.strides).map(|(j, s)| j * s).sum())
    }

    /// Inverse of [`ActionFrame::flat_index`]. Panics if `flat >= dim`.
    pub fn index_at(&self, flat: usize) -> BasicStateIndex {
        assert!(flat < self.dim(), "flat index {flat} out of range");
        let modes = self
            .0
            .strides
            .iter()
            .zip(self.shape())
            .map(|(s, m)| (flat / s) % m)
            .collect();
        BasicStateIndex(modes)
    }

    /// All basic states in lexicographic order.
    pub fn basis(&self) -> impl Iterator<Item = BasicStateIndex> + '_ {
        (0..self.dim()).map(move |k| self.index_at(k))
    }

    /// Resolves a mode label of factor `factor` to its position.
    pub fn mode_position(&self, factor: usize, label: &str) -> Option<usize> {
        self.factors().get(factor)?.modes.iter().position(|m| m == label)
    }

    /// Readable name of a basic state, e.g. `A1 X2`.
    pub fn describe(&self, index: &BasicStateIndex) -> String {
        index
            .modes()
            .iter()
            .zip(self.factors())
            .map(|(&j, f)| f.modes.get(j).map(String::as_str).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn same_as(&self, other: &ActionFrame) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

pub(crate) fn ensure_same_frame(a: &ActionFrame, b: &ActionFrame) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::FrameMismatch)
    }
}

fn check_finite(what: &str, coeffs: &[Complex64]) -> Result<()> {
    if coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what: what.to_string() })
    }
}

/// `sum_a conj(x_a) y_a`.
pub fn inner_product(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// The decision maker's unit-normalized state over the basic states.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategicState {
    frame: ActionFrame,
    coeffs: Vec<Complex64>,
}

impl StrategicState {
    /// Rejects vectors whose squared norm differs from 1 by more than 1e-12.
    pub fn new(frame: &ActionFrame, coeffs: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(frame, coeffs, IDENTITY_TOL)
    }

    pub fn with_tolerance(frame: &ActionFrame, coeffs: Vec<Complex64>, tol: f64) -> Result<Self> {
        if coeffs.len() != frame.dim() {
            return Err(Error::LengthMismatch { expected: frame.dim(), found: coeffs.len() });
        }
        check_finite("strategic state", &coeffs)?;
        let norm_sqr: f64 = coeffs.iter().map(Complex64::norm_sqr).sum();
        if (norm_sqr - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(StrategicState { frame: frame.clone(), coeffs })
    }

    /// Scales `coeffs` to unit norm.
    pub fn normalized(frame: &ActionFrame, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != frame.dim() {
            return Err(Error::LengthMismatch { expected: frame.dim(), found: coeffs.len() });
        }
        check_finite("strategic state", &coeffs)?;
        let norm = coeffs.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let coeffs = coeffs.into_iter().map(|z| z / norm).collect();
        Ok(StrategicState { frame: frame.clone(), coeffs })
    }

    /// Equal real amplitude `1/sqrt(dim)` on every basic state.
    pub fn uniform(frame: &ActionFrame) -> Self {
        let c = Complex64::new(1.0 / (frame.dim() as f64).sqrt(), 0.0);
        StrategicState { frame: frame.clone(), coeffs: vec![c; frame.dim()] }
    }

    pub fn basis_state(frame: &ActionFrame, index: &BasicStateIndex) -> Result<Self> {
        let k = frame.flat_index(index)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); frame.dim()];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Ok(StrategicState { frame: frame.clone(), coeffs })
    }

    pub fn frame(&self) -> &ActionFrame {
        &self.frame
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficient(&self, index: &BasicStateIndex) -> Result<Complex64> {
        Ok(self.coeffs[self.frame.flat_index(index)?])
    }
}

/// State of a composite prospect. Neither normalized nor orthogonal to
/// other prospects in general.
#[derive(Debug, Clone, PartialEq)]
pub struct ProspectState {
    label: String,
    frame: ActionFrame,
    coeffs: Vec<Complex64>,
}

impl ProspectState {
    pub fn new(frame: &ActionFrame, label: impl Into<String>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != frame.dim() {
            return Err(Error::LengthMismatch { expected: frame.dim(), found: coeffs.len() });
        }
        check_finite("prospect state", &coeffs)?;
        Ok(ProspectState { label: label.into(), frame: frame.clone(), coeffs })
    }

    /// The empty prospect: zero overlap with every basic state.
    pub fn vacuum(frame: &ActionFrame, label: impl Into<String>) -> Self {
        ProspectState {
            label: label.into(),
            frame: frame.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); frame.dim()],
        }
    }

    /// Elementary prospect whose state is one basic state.
    pub fn indicator(frame: &ActionFrame, label: impl Into<String>, index: &BasicStateIndex) -> Result<Self> {
        Self::from_support(frame, label, &[(index.clone(), Complex64::new(1.0, 0.0))])
    }

    /// Builds a prospect from `(index, b(e_a))` pairs; repeated indices add.
    pub fn from_support(
        frame: &ActionFrame,
        label: impl Into<String>,
        support: &[(BasicStateIndex, Complex64)],
    ) -> Result<Self> {
        let mut p = Self::vacuum(frame, label);
        for (index, b) in support {
            let k = frame.flat_index(index)?;
            p.coeffs[k] += b;
        }
        check_finite("prospect state", &p.coeffs)?;
        Ok(p)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn frame(&self) -> &ActionFrame {
        &self.frame
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficient(&self, index: &BasicStateIndex) -> Result<Complex64> {
        Ok(self.coeffs[self.frame.flat_index(index)?])
    }

    /// Flat positions of the basic states carrying a nonzero amplitude.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_vacuum(&self) -> bool {
        self.coeffs.iter().all(|z| z.norm_sqr() == 0.0)
    }

    pub fn relabeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn from_parts(frame: &ActionFrame, label: String, coeffs: Vec<Complex64>) -> Self {
        ProspectState { label, frame: frame.clone(), coeffs }
    }
}

/// The prospects under consideration, sharing one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ProspectLattice {
    frame: ActionFrame,
    prospects: Vec<ProspectState>,
}

impl ProspectLattice {
    pub fn new(prospects: Vec<ProspectState>) -> Result<Self> {
        let first = prospects.first().ok_or(Error::LengthMismatch { expected: 1, found: 0 })?;
        let frame = first.frame().clone();
        for p in &prospects[1..] {
            ensure_same_frame(&frame, p.frame())?;
        }
        Ok(ProspectLattice { frame, prospects })
    }

    pub fn frame(&self) -> &ActionFrame {
        &self.frame
    }

    pub fn prospects(&self) -> &[ProspectState] {
        &self.prospects
    }

    pub fn len(&self) -> usize {
        self.prospects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prospects.is_empty()
    }

    /// `sum_(n,a) |b_n(e_a) c(e_a)|^2`, which must equal 1 for a lattice
    /// whose elementary probabilities are normalized.
    pub fn joint_normalization(&self, psi: &StrategicState) -> Result<f64> {
        ensure_same_frame(&self.frame, psi.frame())?;
        Ok(self
            .prospects
            .iter()
            .flat_map(|p| p.coeffs.iter().zip(&psi.coeffs).map(|(b, c)| (b.conj() * c).norm_sqr()))
            .sum())
    }
}

/// `<pi_n|psi_s> = sum_a conj(b_n(e_a)) c(e_a)`.
pub fn prospect_overlap(prospect: &ProspectState, psi: &StrategicState) -> Result<Complex64> {
    ensure_same_frame(prospect.frame(), psi.frame())?;
    Ok(inner_product(prospect.amplitudes(), psi.amplitudes()))
}

/// `z_(n,a) = conj(b_n(e_a)) c(e_a)`, the per-state contribution to the overlap.
pub fn combined_amplitude(
    prospect: &ProspectState,
    psi: &StrategicState,
    alpha: &BasicStateIndex,
) -> Result<Complex64> {
    ensure_same_frame(prospect.frame(), psi.frame())?;
    let k = psi.frame().flat_index(alpha)?;
    Ok(prospect.coeffs[k].conj() * psi.coeffs[k])
}

/// All combined amplitudes of a prospect, dense over the basis.
pub fn combined_amplitudes(prospect: &ProspectState, psi: &StrategicState) -> Result<Vec<Complex64>> {
    ensure_same_frame(prospect.frame(), psi.frame())?;
    Ok(prospect.coeffs.iter().zip(&psi.coeffs).map(|(b, c)| b.conj() * c).collect())
}

/// Splits combined amplitudes `z_n` (one dense row per prospect) into a
/// uniform strategic state `c = 1/sqrt(dim)` and prospect coefficients
/// `b_n = conj(z_n) sqrt(dim)`. Only the products enter any probability, so
/// every factorization with the same products is equivalent.
pub fn factor_combined(
    frame: &ActionFrame,
    rows: Vec<(String, Vec<Complex64>)>,
) -> Result<(StrategicState, ProspectLattice)> {
    let psi = StrategicState::uniform(frame);
    let scale = (frame.dim() as f64).sqrt();
    let prospects = rows
        .into_iter()
        .map(|(label, z)| {
            if z.len() != frame.dim() {
                return Err(Error::LengthMismatch { expected: frame.dim(), found: z.len() });
            }
            let b = z.iter().map(|z| z.conj() * scale).collect();
            ProspectState::new(frame, label, b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((psi, ProspectLattice::new(prospects)?))
}
