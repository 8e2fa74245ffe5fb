//! One round of the purification protocol in closed form.
//!
//! For a general input `ρ = Σ r_ij |i⟩⟨j|` (Bell basis) the surviving pair is
//! always an X state:
//!
//! ```text
//! N    = (r1+r2)² + (r3+r4)² − (r12+r21)² − (r34+r43)²
//! r1'  = (r1² + r2² − r12² − r21²) / N      r2' = 2 (r3 r4 − |r34|²) / N
//! r3'  = 2 (r1 r2 − |r12|²) / N             r4' = (r3² + r4² − r34² − r43²) / N
//! r14' = (r14² + r23² − r13² − r24²) / N
//! r23' = 2 (r23* r14* − r13* r24*) / N
//! ```
//!
//! and the round succeeds with probability `N / 2`.

use serde::Serialize;

use crate::bell::{BellDensityMatrix, XState};
use crate::{Complex, Error, Result};

/// Below this normalization the round is treated as never succeeding.
pub const DEGENERATE_N: f64 = 1e-12;
/// Coherence overshoot (beyond `sqrt(r_j r_k)`) that is attributed to rounding.
pub const COHERENCE_CLIP: f64 = 1e-12;
/// Diagonal entries this far outside `[0, 1]` are rounding and are clamped.
const DIAGONAL_CLAMP: f64 = 1e-12;

/// Result of one successful round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapOutcome<S = XState> {
    pub state: S,
    pub success_probability: f64,
    pub normalization: f64,
}

impl MapOutcome<XState> {
    pub fn density(&self) -> BellDensityMatrix {
        self.state.to_density()
    }
}

/// Closed-form round on an arbitrary two-qubit state.
pub fn apply_general(rho: &BellDensityMatrix) -> Result<MapOutcome> {
    let r = |i: usize, j: usize| rho.r(i, j);
    let [r1, r2, r3, r4] = rho.diagonal();
    let (r12, r21, r34, r43) = (r(1, 2), r(2, 1), r(3, 4), r(4, 3));

    let n = (r1 + r2).powi(2) + (r3 + r4).powi(2) - (r12 + r21).re.powi(2) - (r34 + r43).re.powi(2);
    check_normalization(n)?;

    let d1 = r1 * r1 + r2 * r2 - (r12 * r12 + r21 * r21).re;
    let d2 = 2.0 * (r3 * r4 - r34.norm_sqr());
    let d3 = 2.0 * (r1 * r2 - r12.norm_sqr());
    let d4 = r3 * r3 + r4 * r4 - (r34 * r34 + r43 * r43).re;
    let c14 = r(1, 4) * r(1, 4) + r(2, 3) * r(2, 3) - r(1, 3) * r(1, 3) - r(2, 4) * r(2, 4);
    let c23 = (r(2, 3).conj() * r(1, 4).conj() - r(1, 3).conj() * r(2, 4).conj()) * 2.0;

    finish([d1, d2, d3, d4], c14, c23, n)
}

/// Closed-form round on an X state.
pub fn apply_x(s: &XState) -> Result<MapOutcome> {
    let [r1, r2, r3, r4] = s.r();
    // homogeneous form of (r1 + r2)² + (1 − r1 − r2)²
    let n = (r1 + r2).powi(2) + (r3 + r4).powi(2);
    check_normalization(n)?;
    let (d, c14, c23) = x_numerators(s.r(), s.r14(), s.r23());
    finish(d, c14, c23, n)
}

/// Numerators of the X-state map, shared with the real-vector form.
pub(crate) fn x_numerators(r: [f64; 4], r14: Complex, r23: Complex) -> ([f64; 4], Complex, Complex) {
    let [r1, r2, r3, r4] = r;
    (
        [r1 * r1 + r2 * r2, 2.0 * r3 * r4, 2.0 * r1 * r2, r3 * r3 + r4 * r4],
        r14 * r14 + r23 * r23,
        r23.conj() * r14.conj() * 2.0,
    )
}

fn check_normalization(n: f64) -> Result<()> {
    if n.is_finite() && n > DEGENERATE_N {
        Ok(())
    } else {
        Err(Error::DegenerateNormalization { n })
    }
}

fn finish(numerators: [f64; 4], c14: Complex, c23: Complex, n: f64) -> Result<MapOutcome> {
    let mut r = numerators.map(|x| x / n);
    for x in &mut r {
        if *x < 0.0 && *x >= -DIAGONAL_CLAMP {
            *x = 0.0;
        } else if *x > 1.0 && *x <= 1.0 + DIAGONAL_CLAMP {
            *x = 1.0;
        }
    }
    let r14 = clip_coherence(c14 / n, (r[0] * r[3]).max(0.0).sqrt(), "14")?;
    let r23 = clip_coherence(c23 / n, (r[1] * r[2]).max(0.0).sqrt(), "23")?;
    let state = XState::new(r, r14, r23)?;
    Ok(MapOutcome {
        state,
        success_probability: n / 2.0,
        normalization: n,
    })
}

fn clip_coherence(z: Complex, bound: f64, pair: &'static str) -> Result<Complex> {
    let m = z.norm();
    if m <= bound {
        return Ok(z);
    }
    let excess = m - bound;
    if excess <= COHERENCE_CLIP {
        Ok(z * (bound / m))
    } else {
        Err(Error::CoherenceBound { pair, excess })
    }
}

/// Input to [`iterate`]: the first round of a general state uses the general
/// formula, after which the X-state form takes over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateInput {
    X(XState),
    General(BellDensityMatrix),
}

impl From<XState> for StateInput {
    fn from(s: XState) -> Self {
        StateInput::X(s)
    }
}

impl From<BellDensityMatrix> for StateInput {
    fn from(m: BellDensityMatrix) -> Self {
        match m.as_x_state() {
            Some(x) => StateInput::X(x),
            None => StateInput::General(m),
        }
    }
}

impl StateInput {
    fn params(&self) -> [f64; 8] {
        match self {
            StateInput::X(s) => s.params(),
            StateInput::General(m) => {
                let [r1, r2, r3, r4] = m.diagonal();
                let (a, b) = (m.r(1, 4), m.r(2, 3));
                [r1, r2, r3, r4, a.re, a.im, b.re, b.im]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryStep {
    /// 1-based round index.
    pub step: usize,
    #[serde(skip)]
    pub outcome: MapOutcome,
    /// Product of the per-round success probabilities so far.
    pub cumulative_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: StateInput,
    pub steps: Vec<TrajectoryStep>,
    /// True when iteration stopped because the state stopped moving.
    pub converged: bool,
}

impl Trajectory {
    pub fn last_state(&self) -> Option<&XState> {
        self.steps.last().map(|s| &s.outcome.state)
    }
}

/// Runs up to `steps` rounds. Stops early once the max-norm change of the
/// parameter vector drops below `stop_tolerance`.
pub fn iterate(input: impl Into<StateInput>, steps: usize, stop_tolerance: f64) -> Result<Trajectory> {
    let initial = input.into();
    if steps == 0 {
        return Err(Error::ParamRange {
            name: "steps",
            value: 0.0,
            range: ">= 1",
        });
    }
    let mut out = Vec::with_capacity(steps);
    let mut prev = initial.params();
    let mut cumulative = 1.0;
    let mut current: Option<XState> = None;
    let mut converged = false;
    for step in 1..=steps {
        let outcome = match (current, &initial) {
            (Some(s), _) => apply_x(&s),
            (None, StateInput::X(s)) => apply_x(s),
            (None, StateInput::General(m)) => apply_general(m),
        }
        .map_err(|e| e.at_step(step))?;
        cumulative *= outcome.success_probability;
        let next = outcome.state.params();
        let change = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        out.push(TrajectoryStep {
            step,
            outcome,
            cumulative_probability: cumulative,
        });
        current = Some(outcome.state);
        prev = next;
        if change < stop_tolerance {
            converged = true;
            break;
        }
    }
    Ok(Trajectory {
        initial,
        steps: out,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{random_density, random_x_state, validate_density, Bell, Matrix4c, StateKind};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn psi_minus_is_preserved_with_half_success() {
        let out = apply_general(&BellDensityMatrix::bell(Bell::PsiMinus)).unwrap();
        assert_eq!(out.state, XState::bell(Bell::PsiMinus));
        assert_eq!(out.success_probability, 0.5);
        assert_eq!(out.normalization, 1.0);
    }

    #[test]
    fn maximally_mixed_maps_to_itself() {
        let out = apply_general(&BellDensityMatrix::maximally_mixed()).unwrap();
        assert_eq!(out.state, XState::maximally_mixed());
        assert_eq!(out.success_probability, 0.25);
    }

    #[test]
    fn werner_like_state_one_round() {
        let s = XState::diagonal([0.7, 0.1, 0.1, 0.1]).unwrap();
        let out = apply_x(&s).unwrap();
        // N = 0.8² + 0.2²; numerators 0.5, 0.02, 0.14, 0.02
        assert!(close(out.normalization, 0.68, 1e-15));
        let want = [0.5 / 0.68, 0.02 / 0.68, 0.14 / 0.68, 0.02 / 0.68];
        for (a, b) in out.state.r().iter().zip(want) {
            assert!(close(*a, b, 1e-15));
        }
        assert!(close(out.state.r()[0], 0.735_294_117_647, 1e-12));
        assert!(close(out.state.r()[2], 0.205_882_352_941, 1e-12));
    }

    #[test]
    fn uniform_coherent_table_row_is_fixed_exactly() {
        let s = XState::with_real([0.25; 4], 0.25, 0.25).unwrap();
        assert_eq!(apply_x(&s).unwrap().state, s);
        let s = XState::with_real([0.25; 4], 0.25, -0.25).unwrap();
        assert_eq!(apply_x(&s).unwrap().state, s);
    }

    #[test]
    fn four_digit_table_row_is_nearly_fixed() {
        let s = XState::diagonal([0.1409, 0.2344, 0.1245, 0.5002]).unwrap();
        let out = apply_x(&s).unwrap();
        assert!(out.state.distance(&s) < 5e-4);
    }

    #[test]
    fn example_one_closed_form() {
        for x in [0.55, 0.75, 1.0] {
            let mut m = Matrix4c::zeros();
            m[(0, 0)] = Complex::new(x / 2.0, 0.0);
            m[(1, 1)] = Complex::new(x / 2.0, 0.0);
            m[(0, 1)] = Complex::new(0.0, -x / 2.0);
            m[(1, 0)] = Complex::new(0.0, x / 2.0);
            m[(2, 2)] = Complex::new(1.0 - x, 0.0);
            let rho = BellDensityMatrix::new(m).unwrap();
            let out = apply_general(&rho).unwrap();
            let want = x * x / (x * x + (1.0 - x).powi(2));
            assert!(close(out.state.r()[0], want, 1e-14));
        }
    }

    #[test]
    fn general_agrees_with_x_form_on_x_states() {
        for seed in 0..1000 {
            let s = random_x_state(seed);
            let a = apply_x(&s).unwrap();
            let b = apply_general(&s.to_density()).unwrap();
            assert!(a.state.distance(&b.state) < 1e-14, "seed {seed}");
            assert!(close(a.normalization, b.normalization, 1e-14));
        }
    }

    #[test]
    fn outputs_are_valid_x_states() {
        for seed in 0..1000 {
            let rho = random_density(seed, StateKind::General);
            let out = apply_general(&rho).unwrap();
            let d = out.density();
            assert!(d.is_x_patterned());
            assert!(validate_density(d.matrix()).passed());
            assert_eq!(out.success_probability, out.normalization / 2.0);
        }
    }

    #[test]
    fn degenerate_normalization_is_an_error() {
        // All weight on |Φ⁺⟩,|Ψ⁺⟩ with full real coherence: N = 1 - 1 = 0.
        let mut m = Matrix4c::zeros();
        for (i, j) in [(2, 2), (3, 3), (2, 3), (3, 2)] {
            m[(i, j)] = Complex::new(0.5, 0.0);
        }
        let rho = BellDensityMatrix::new(m).unwrap();
        assert!(matches!(apply_general(&rho), Err(Error::DegenerateNormalization { .. })));
    }

    #[test]
    fn iterate_stops_on_fixed_point() {
        let t = iterate(XState::bell(Bell::PsiMinus), 10, 0.0).unwrap();
        assert_eq!(t.steps.len(), 10);
        assert!(t.steps.iter().all(|s| s.outcome.state == XState::bell(Bell::PsiMinus)));
        assert!(close(t.steps[9].cumulative_probability, 0.5f64.powi(10), 1e-18));
        let t = iterate(XState::bell(Bell::PsiMinus), 10, 1e-12).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!(t.converged);
    }

    #[test]
    fn iterate_werner_increases_fidelity() {
        let t = iterate(XState::diagonal([0.7, 0.1, 0.1, 0.1]).unwrap(), 20, 0.0).unwrap();
        let mut prev = 0.7;
        for s in &t.steps {
            let r1 = s.outcome.state.r()[0];
            assert!(r1 > prev || r1 == 1.0);
            prev = r1;
        }
        assert!(prev > 1.0 - 1e-12);
    }

    #[test]
    fn iterate_reports_failing_step() {
        let mut m = Matrix4c::zeros();
        for (i, j) in [(2, 2), (3, 3), (2, 3), (3, 2)] {
            m[(i, j)] = Complex::new(0.5, 0.0);
        }
        let rho = BellDensityMatrix::new(m).unwrap();
        let err = iterate(rho, 5, 0.0).unwrap_err();
        assert!(matches!(err, Error::AtStep { step: 1, .. }));
        assert!(err.is_degenerate());
    }
}
