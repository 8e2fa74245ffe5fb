//! Bell-basis conventions, two-qubit density matrices and X states.
//!
//! Bell basis order (used for every 4×4 matrix labelled "Bell"):
//! `|1⟩ = |Ψ⁻⟩, |2⟩ = |Φ⁻⟩, |3⟩ = |Φ⁺⟩, |4⟩ = |Ψ⁺⟩`, stored at indices 0..4.
//!
//! Computational order is `|00⟩, |01⟩, |10⟩, |11⟩` with qubit A as the most
//! significant bit.

use std::fmt;

use nalgebra::{DMatrix, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::eigen::hermitian_eigenvalues;
use crate::{Complex, Error, Result};

pub type Matrix4c = nalgebra::Matrix4<Complex>;
pub type Vector4c = Vector4<Complex>;

/// Allowed `|Tr ρ − 1|`.
pub const TRACE_TOL: f64 = 1e-12;
/// Allowed `max |ρ_ij − ρ_ji*|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest admitted eigenvalue is `-PSD_TOL`.
pub const PSD_TOL: f64 = 1e-10;
/// Slack on `|r23| ≤ sqrt(r2 r3)` and `|r14| ≤ sqrt(r1 r4)`.
pub const COHERENCE_TOL: f64 = 1e-10;
/// Allowed deviation of a pure state's norm from one.
pub const NORM_TOL: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// The four Bell states in the project's basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bell {
    PsiMinus,
    PhiMinus,
    PhiPlus,
    PsiPlus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PsiMinus, Bell::PhiMinus, Bell::PhiPlus, Bell::PsiPlus];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Amplitudes in the computational basis.
    pub fn computational(self) -> Vector4c {
        let s = FRAC_1_SQRT_2;
        let (a, b, cc, d) = match self {
            Bell::PsiMinus => (0.0, s, -s, 0.0),
            Bell::PhiMinus => (s, 0.0, 0.0, -s),
            Bell::PhiPlus => (s, 0.0, 0.0, s),
            Bell::PsiPlus => (0.0, s, s, 0.0),
        };
        Vector4c::new(c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0))
    }

    /// Eigenvalue of `σy ⊗ σy` on this Bell state.
    pub fn sigma_yy_eigenvalue(self) -> f64 {
        match self {
            Bell::PsiMinus | Bell::PhiPlus => -1.0,
            Bell::PhiMinus | Bell::PsiPlus => 1.0,
        }
    }
}

/// Unitary whose columns are the Bell vectors written in the computational basis.
pub fn bell_unitary() -> Matrix4c {
    Matrix4c::from_columns(&Bell::ALL.map(Bell::computational))
}

/// `U ρ U†`: Bell-basis matrix to computational basis.
pub fn bell_to_computational(m: &BellDensityMatrix) -> Matrix4c {
    bell_matrix_to_computational(&m.0)
}

pub fn bell_matrix_to_computational(m: &Matrix4c) -> Matrix4c {
    let u = bell_unitary();
    u * m * u.adjoint()
}

/// `U† ρ U`: computational-basis matrix to Bell basis.
pub fn computational_to_bell(m: &Matrix4c) -> Matrix4c {
    let u = bell_unitary();
    u.adjoint() * m * u
}

/// `σy ⊗ σy` in the computational basis.
pub fn sigma_yy() -> Matrix4c {
    let mut m = Matrix4c::zeros();
    m[(0, 3)] = c(-1.0, 0.0);
    m[(3, 0)] = c(-1.0, 0.0);
    m[(1, 2)] = c(1.0, 0.0);
    m[(2, 1)] = c(1.0, 0.0);
    m
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonFinite,
    Hermiticity { defect: f64 },
    Trace { defect: f64 },
    NegativeEigenvalue { min: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite => write!(f, "non-finite entry"),
            Violation::Hermiticity { defect } => write!(f, "not Hermitian (defect {defect:e})"),
            Violation::Trace { defect } => write!(f, "trace differs from 1 by {defect:e}"),
            Violation::NegativeEigenvalue { min } => write!(f, "negative eigenvalue {min:e}"),
        }
    }
}

/// Diagnostics of a candidate density matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks Hermiticity, unit trace and positivity of a 4×4 matrix.
pub fn validate_density(m: &Matrix4c) -> ValidationReport {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return ValidationReport {
            hermiticity_defect: f64::NAN,
            trace_defect: f64::NAN,
            min_eigenvalue: f64::NAN,
            violations: vec![Violation::NonFinite],
        };
    }
    let mut herm = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            herm = herm.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    let trace_defect = (m.trace() - c(1.0, 0.0)).norm();
    let dm = DMatrix::from_fn(4, 4, |i, j| m[(i, j)]);
    let min_eigenvalue = hermitian_eigenvalues(&dm)[0];

    let mut violations = Vec::new();
    if herm > HERMITIAN_TOL {
        violations.push(Violation::Hermiticity { defect: herm });
    }
    if trace_defect > TRACE_TOL {
        violations.push(Violation::Trace {
            defect: trace_defect,
        });
    }
    if min_eigenvalue < -PSD_TOL {
        violations.push(Violation::NegativeEigenvalue {
            min: min_eigenvalue,
        });
    }
    ValidationReport {
        hermiticity_defect: herm,
        trace_defect,
        min_eigenvalue,
        violations,
    }
}

// ---------------------------------------------------------------------------
// Pure states

/// Normalized two-qubit pure state, amplitudes in the Bell basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellVector(Vector4c);

impl BellVector {
    pub fn new(amplitudes: [Complex; 4]) -> Result<Self> {
        let v = Vector4c::from(amplitudes);
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NormError(norm));
        }
        Ok(BellVector(v))
    }

    /// Normalizes the given amplitudes. Fails only for the zero vector.
    pub fn normalized(amplitudes: [Complex; 4]) -> Result<Self> {
        let v = Vector4c::from(amplitudes);
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NormError(norm));
        }
        Ok(BellVector(v / c(norm, 0.0)))
    }

    pub fn bell(state: Bell) -> Self {
        let mut v = Vector4c::zeros();
        v[state.index()] = c(1.0, 0.0);
        BellVector(v)
    }

    pub fn from_computational(v: &Vector4c) -> Result<Self> {
        let b = bell_unitary().adjoint() * v;
        BellVector::new([b[0], b[1], b[2], b[3]])
    }

    pub fn amplitudes(&self) -> &Vector4c {
        &self.0
    }

    pub fn to_computational(&self) -> Vector4c {
        bell_unitary() * self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

// ---------------------------------------------------------------------------
// Density matrices

/// Validated two-qubit density matrix in the Bell basis. Stored exactly
/// Hermitian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDensityMatrix(Matrix4c);

impl BellDensityMatrix {
    /// Validates `m` (Bell basis) and stores its Hermitian part.
    pub fn new(m: Matrix4c) -> Result<Self> {
        let report = validate_density(&m);
        if !report.passed() {
            return Err(Error::InvalidDensity(report));
        }
        Ok(Self::hermitize(m))
    }

    pub fn from_computational(m: &Matrix4c) -> Result<Self> {
        Self::new(computational_to_bell(m))
    }

    fn hermitize(m: Matrix4c) -> Self {
        let mut h = (m + m.adjoint()) * c(0.5, 0.0);
        for i in 0..4 {
            h[(i, i)].im = 0.0;
        }
        BellDensityMatrix(h)
    }

    pub fn pure(psi: &BellVector) -> Self {
        let v = psi.0;
        Self::hermitize(v * v.adjoint())
    }

    pub fn bell(state: Bell) -> Self {
        Self::pure(&BellVector::bell(state))
    }

    pub fn maximally_mixed() -> Self {
        BellDensityMatrix(Matrix4c::identity() * c(0.25, 0.0))
    }

    /// Convex combination `w·self + (1-w)·other`.
    pub fn mix(&self, w: f64, other: &BellDensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::ParamRange {
                name: "weight",
                value: w,
                range: "[0, 1]",
            });
        }
        Ok(Self::hermitize(self.0 * c(w, 0.0) + other.0 * c(1.0 - w, 0.0)))
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    /// Entry `r_{ij}` with 1-based Bell labels, as written in the literature.
    pub fn r(&self, i: usize, j: usize) -> Complex {
        self.0[(i - 1, j - 1)]
    }

    /// Diagonal `(r1, r2, r3, r4)`: fidelities with the four Bell states.
    pub fn diagonal(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.0[(i, i)].re)
    }

    pub fn to_computational(&self) -> Matrix4c {
        bell_to_computational(self)
    }

    /// True when every entry outside the X pattern is exactly zero.
    pub fn is_x_patterned(&self) -> bool {
        X_OFF_PATTERN
            .iter()
            .all(|&(i, j)| self.0[(i, j)] == c(0.0, 0.0))
    }

    /// Reads the X-state parameters if the matrix has the exact X pattern.
    pub fn as_x_state(&self) -> Option<XState> {
        if !self.is_x_patterned() {
            return None;
        }
        XState::new(self.diagonal(), self.0[(0, 3)], self.0[(1, 2)]).ok()
    }
}

impl From<XState> for BellDensityMatrix {
    fn from(s: XState) -> Self {
        s.to_density()
    }
}

/// Positions (0-based) that must vanish in an X state.
pub const X_OFF_PATTERN: [(usize, usize); 8] = [
    (0, 1),
    (0, 2),
    (1, 0),
    (1, 3),
    (2, 0),
    (2, 3),
    (3, 1),
    (3, 2),
];

// ---------------------------------------------------------------------------
// X states

/// Seven-parameter state with support on the diagonal and the (1,4)/(2,3)
/// anti-diagonal of the Bell-basis matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XState {
    r: [f64; 4],
    r14: Complex,
    r23: Complex,
}

impl XState {
    pub fn new(r: [f64; 4], r14: Complex, r23: Complex) -> Result<Self> {
        let finite = r.iter().all(|x| x.is_finite())
            && r14.re.is_finite()
            && r14.im.is_finite()
            && r23.re.is_finite()
            && r23.im.is_finite();
        if !finite {
            return Err(Error::InvalidXState("non-finite parameter".into()));
        }
        if let Some(x) = r.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidXState(format!("diagonal entry {x} outside [0, 1]")));
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidXState(format!("diagonal sums to {sum}")));
        }
        if r23.norm() > (r[1] * r[2]).sqrt() + COHERENCE_TOL {
            return Err(Error::InvalidXState(format!(
                "|r23| = {} exceeds sqrt(r2 r3) = {}",
                r23.norm(),
                (r[1] * r[2]).sqrt()
            )));
        }
        if r14.norm() > (r[0] * r[3]).sqrt() + COHERENCE_TOL {
            return Err(Error::InvalidXState(format!(
                "|r14| = {} exceeds sqrt(r1 r4) = {}",
                r14.norm(),
                (r[0] * r[3]).sqrt()
            )));
        }
        Ok(XState { r, r14, r23 })
    }

    pub(crate) fn new_unchecked(r: [f64; 4], r14: Complex, r23: Complex) -> Self {
        XState { r, r14, r23 }
    }

    /// Bell-diagonal state with zero coherences.
    pub fn diagonal(r: [f64; 4]) -> Result<Self> {
        Self::new(r, c(0.0, 0.0), c(0.0, 0.0))
    }

    /// Real coherences, the layout of the fixed-point table.
    pub fn with_real(r: [f64; 4], r14: f64, r23: f64) -> Result<Self> {
        Self::new(r, c(r14, 0.0), c(r23, 0.0))
    }

    pub fn maximally_mixed() -> Self {
        XState::new_unchecked([0.25; 4], c(0.0, 0.0), c(0.0, 0.0))
    }

    pub fn bell(state: Bell) -> Self {
        let mut r = [0.0; 4];
        r[state.index()] = 1.0;
        XState::new_unchecked(r, c(0.0, 0.0), c(0.0, 0.0))
    }

    pub fn r(&self) -> [f64; 4] {
        self.r
    }

    pub fn r14(&self) -> Complex {
        self.r14
    }

    pub fn r23(&self) -> Complex {
        self.r23
    }

    /// `(r1, r2, r3, r4, Re r14, Im r14, Re r23, Im r23)`.
    pub fn params(&self) -> [f64; 8] {
        let [r1, r2, r3, r4] = self.r;
        [r1, r2, r3, r4, self.r14.re, self.r14.im, self.r23.re, self.r23.im]
    }

    pub fn from_params(v: &[f64; 8]) -> Result<Self> {
        Self::new(
            [v[0], v[1], v[2], v[3]],
            c(v[4], v[5]),
            c(v[6], v[7]),
        )
    }

    /// Relabelling `1↔4, 2↔3` of the Bell basis. Coherences become their
    /// conjugates (`r14 → r41`, `r23 → r32`).
    pub fn mirrored(&self) -> XState {
        let [r1, r2, r3, r4] = self.r;
        XState::new_unchecked([r4, r3, r2, r1], self.r14.conj(), self.r23.conj())
    }

    pub fn to_density(&self) -> BellDensityMatrix {
        let mut m = Matrix4c::zeros();
        for i in 0..4 {
            m[(i, i)] = c(self.r[i], 0.0);
        }
        m[(0, 3)] = self.r14;
        m[(3, 0)] = self.r14.conj();
        m[(1, 2)] = self.r23;
        m[(2, 1)] = self.r23.conj();
        BellDensityMatrix(m)
    }

    /// Max-norm distance between parameter vectors.
    pub fn distance(&self, other: &XState) -> f64 {
        let a = self.params();
        let b = other.params();
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Closed-form spectrum of an X state: `[λ23⁺, λ23⁻, λ14⁺, λ14⁻]`.
pub fn x_state_eigenvalues(s: &XState) -> [f64; 4] {
    let pair = |rj: f64, rk: f64, rjk: Complex| {
        let root = ((rj - rk).powi(2) + 4.0 * rjk.norm_sqr()).sqrt();
        ((rj + rk + root) / 2.0, (rj + rk - root) / 2.0)
    };
    let [r1, r2, r3, r4] = s.r;
    let (p23, m23) = pair(r2, r3, s.r23);
    let (p14, m14) = pair(r1, r4, s.r14);
    [p23, m23, p14, m14]
}

// ---------------------------------------------------------------------------
// Random states

/// Which family [`random_density`] samples from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    General,
    XState,
    BellDiagonal,
}

fn ginibre(rng: &mut ChaCha8Rng) -> Matrix4c {
    Matrix4c::from_fn(|_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    })
}

fn ginibre_state(seed: u64) -> Matrix4c {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(&mut rng);
    let gg = g * g.adjoint();
    let tr = gg.trace().re;
    gg / c(tr, 0.0)
}

/// Seeded random density matrix `G G† / Tr(G G†)` with complex Gaussian `G`,
/// optionally restricted to the X pattern or to the diagonal.
pub fn random_density(seed: u64, kind: StateKind) -> BellDensityMatrix {
    let m = ginibre_state(seed);
    match kind {
        StateKind::General => BellDensityMatrix::hermitize(m),
        StateKind::XState => random_x_from(&m).to_density(),
        StateKind::BellDiagonal => {
            let r = [0, 1, 2, 3].map(|i| m[(i, i)].re);
            XState::new_unchecked(normalize_diag(r), c(0.0, 0.0), c(0.0, 0.0)).to_density()
        }
    }
}

/// Seeded random X state (same draw as `random_density(seed, StateKind::XState)`).
pub fn random_x_state(seed: u64) -> XState {
    random_x_from(&ginibre_state(seed))
}

/// Seeded random pure state, Haar distributed.
pub fn random_pure(seed: u64) -> BellVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: [Complex; 4] = std::array::from_fn(|_| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        c(re, im)
    });
    BellVector::normalized(amps).expect("Gaussian vector is nonzero")
}

fn normalize_diag(r: [f64; 4]) -> [f64; 4] {
    let s: f64 = r.iter().sum();
    r.map(|x| x / s)
}

fn clip(z: Complex, bound: f64) -> Complex {
    let n = z.norm();
    if n > bound {
        if n == 0.0 {
            z
        } else {
            z * (bound / n)
        }
    } else {
        z
    }
}

fn random_x_from(m: &Matrix4c) -> XState {
    let r = normalize_diag([0, 1, 2, 3].map(|i| m[(i, i)].re));
    let r14 = clip(m[(0, 3)], (r[0] * r[3]).sqrt());
    let r23 = clip(m[(1, 2)], (r[1] * r[2]).sqrt());
    XState::new_unchecked(r, r14, r23)
}
