//! Purification conditions and attractor classification.
//!
//! An X state is driven to `|Ψ⁻⟩` iff `F(r1, r2) = (2r1 − 1)(1 − 2r2) > 0`
//! and to `|Ψ⁺⟩` iff `F(r4, r3) > 0`. For a general state the coherences
//! relax both inequalities:
//!
//! ```text
//! (2r1 − 1)(1 − 2r2) > −(2 Im r12)² − (2 Re r34)²     → |Ψ⁻⟩
//! (2r4 − 1)(1 − 2r3) > −(2 Im r34)² − (2 Re r12)²     → |Ψ⁺⟩
//! ```

use serde::Serialize;

use crate::bell::{BellDensityMatrix, XState};
use crate::map::apply_x;
use crate::Result;

/// Half-width of the band around equality that is reported as `Boundary`.
pub const BOUNDARY_BAND: f64 = 1e-12;
/// Default iteration cap for [`classify_by_iteration`].
pub const DEFAULT_MAX_STEPS: usize = 200;
/// Parameter change below which an orbit is considered stuck on a cycle.
const CYCLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PurifiesPsiMinus,
    PurifiesPsiPlus,
    NoPurification,
    Boundary,
}

/// One side-by-side inequality `lhs > rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margin {
    pub lhs: f64,
    pub rhs: f64,
}

impl Margin {
    pub fn value(&self) -> f64 {
        self.lhs - self.rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margins {
    pub psi_minus: Margin,
    pub psi_plus: Margin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub margins: Margins,
}

impl Classification {
    fn from_margins(psi_minus: Margin, psi_plus: Margin) -> Self {
        let (m1, m4) = (psi_minus.value(), psi_plus.value());
        let verdict = if m1 > BOUNDARY_BAND {
            Verdict::PurifiesPsiMinus
        } else if m4 > BOUNDARY_BAND {
            Verdict::PurifiesPsiPlus
        } else if m1.abs() <= BOUNDARY_BAND || m4.abs() <= BOUNDARY_BAND {
            Verdict::Boundary
        } else {
            Verdict::NoPurification
        };
        Classification {
            verdict,
            margins: Margins { psi_minus, psi_plus },
        }
    }
}

/// `F(r1, r2) = (2 r1 − 1)(1 − 2 r2)`.
pub fn quadratic_form(r1: f64, r2: f64) -> f64 {
    (2.0 * r1 - 1.0) * (1.0 - 2.0 * r2)
}

pub fn condition_x(s: &XState) -> Classification {
    let [r1, r2, r3, r4] = s.r();
    Classification::from_margins(
        Margin {
            lhs: quadratic_form(r1, r2),
            rhs: 0.0,
        },
        Margin {
            lhs: quadratic_form(r4, r3),
            rhs: 0.0,
        },
    )
}

pub fn condition_general(rho: &BellDensityMatrix) -> Classification {
    let [r1, r2, r3, r4] = rho.diagonal();
    let r12 = rho.r(1, 2);
    let r34 = rho.r(3, 4);
    Classification::from_margins(
        Margin {
            lhs: quadratic_form(r1, r2),
            rhs: -(2.0 * r12.im).powi(2) - (2.0 * r34.re).powi(2),
        },
        Margin {
            lhs: quadratic_form(r4, r3),
            rhs: -(2.0 * r34.im).powi(2) - (2.0 * r12.re).powi(2),
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Attractor {
    PsiMinus,
    PsiPlus,
    Mixed,
    NonConvergent,
}

/// Why an orbit was labelled [`Attractor::NonConvergent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stall {
    /// Sits on a fixed point that is not one of the attractors.
    FixedPoint,
    /// Alternates between two states.
    PeriodTwo,
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationSummary {
    pub attractor: Attractor,
    pub stall: Option<Stall>,
    /// Rounds applied before the verdict was reached.
    pub steps: usize,
    #[serde(skip)]
    pub final_state: XState,
    pub cumulative_probability: f64,
}

fn attractor_of(s: &XState, tol: f64) -> Option<Attractor> {
    let [r1, _, _, r4] = s.r();
    if r1 > 1.0 - tol {
        Some(Attractor::PsiMinus)
    } else if r4 > 1.0 - tol {
        Some(Attractor::PsiPlus)
    } else if s.distance(&XState::maximally_mixed()) < tol {
        Some(Attractor::Mixed)
    } else {
        None
    }
}

/// Iterates the X map until the orbit reaches an attractor within `tol`,
/// gets stuck on a fixed point or 2-cycle, or `max_steps` runs out.
pub fn classify_by_iteration(s: &XState, max_steps: usize, tol: f64) -> Result<IterationSummary> {
    let mut current = *s;
    let mut before: Option<XState> = None;
    let mut cumulative = 1.0;
    for step in 0..=max_steps {
        if let Some(attractor) = attractor_of(&current, tol) {
            return Ok(IterationSummary {
                attractor,
                stall: None,
                steps: step,
                final_state: current,
                cumulative_probability: cumulative,
            });
        }
        if step == max_steps {
            break;
        }
        let out = apply_x(&current).map_err(|e| e.at_step(step + 1))?;
        let next = out.state;
        cumulative *= out.success_probability;
        let stall = if next.distance(&current) < CYCLE_TOL {
            Some(Stall::FixedPoint)
        } else if before.is_some_and(|b| b.distance(&next) < CYCLE_TOL) {
            Some(Stall::PeriodTwo)
        } else {
            None
        };
        if stall.is_some() {
            return Ok(IterationSummary {
                attractor: Attractor::NonConvergent,
                stall,
                steps: step + 1,
                final_state: next,
                cumulative_probability: cumulative,
            });
        }
        before = Some(current);
        current = next;
    }
    Ok(IterationSummary {
        attractor: Attractor::NonConvergent,
        stall: Some(Stall::MaxSteps),
        steps: max_steps,
        final_state: current,
        cumulative_probability: cumulative,
    })
}

/// The attractor a condition verdict predicts, if any.
pub fn predicted_attractor(verdict: Verdict) -> Option<Attractor> {
    match verdict {
        Verdict::PurifiesPsiMinus => Some(Attractor::PsiMinus),
        Verdict::PurifiesPsiPlus => Some(Attractor::PsiPlus),
        Verdict::NoPurification => Some(Attractor::Mixed),
        Verdict::Boundary => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{random_x_state, Bell, Matrix4c};
    use crate::map::apply_general;
    use crate::Complex;

    #[test]
    fn quadratic_form_values() {
        assert_eq!(quadratic_form(1.0, 0.0), 1.0);
        assert_eq!(quadratic_form(0.5, 0.37), 0.0);
        assert!((quadratic_form(0.7, 0.1) - 0.32).abs() < 1e-15);
    }

    #[test]
    fn x_conditions() {
        let s = XState::diagonal([0.7, 0.1, 0.1, 0.1]).unwrap();
        assert_eq!(condition_x(&s).verdict, Verdict::PurifiesPsiMinus);
        assert_eq!(condition_x(&s.mirrored()).verdict, Verdict::PurifiesPsiPlus);
        let c = condition_x(&XState::maximally_mixed());
        assert_eq!(c.verdict, Verdict::NoPurification);
        assert_eq!(c.margins.psi_minus.lhs, -0.25);
        assert_eq!(c.margins.psi_plus.lhs, -0.25);
        let edge = XState::diagonal([0.5, 0.2, 0.2, 0.1]).unwrap();
        assert_eq!(condition_x(&edge).verdict, Verdict::Boundary);
        let s = XState::diagonal([0.4, 0.3, 0.2, 0.1]).unwrap();
        assert_eq!(condition_x(&s).verdict, Verdict::NoPurification);
    }

    fn example_one(x: f64) -> BellDensityMatrix {
        let mut m = Matrix4c::zeros();
        m[(0, 0)] = Complex::new(x / 2.0, 0.0);
        m[(1, 1)] = Complex::new(x / 2.0, 0.0);
        m[(0, 1)] = Complex::new(0.0, -x / 2.0);
        m[(1, 0)] = Complex::new(0.0, x / 2.0);
        m[(2, 2)] = Complex::new(1.0 - x, 0.0);
        BellDensityMatrix::new(m).unwrap()
    }

    #[test]
    fn general_condition_example_one() {
        let c = condition_general(&example_one(0.6));
        assert!((c.margins.psi_minus.lhs + 0.16).abs() < 1e-15);
        assert!((c.margins.psi_minus.rhs + 0.36).abs() < 1e-15);
        assert_eq!(c.verdict, Verdict::PurifiesPsiMinus);
    }

    #[test]
    fn general_condition_example_two() {
        for cc in [0.05, 0.1, 0.3, 0.5] {
            let mut m = Matrix4c::zeros();
            let h = (1.0 - cc) / 2.0;
            m[(0, 0)] = Complex::new(cc, 0.0);
            for (i, j) in [(2, 2), (3, 3), (2, 3), (3, 2)] {
                m[(i, j)] = Complex::new(h, 0.0);
            }
            let c = condition_general(&BellDensityMatrix::new(m).unwrap());
            assert!((c.margins.psi_minus.lhs - (2.0 * cc - 1.0)).abs() < 1e-15);
            assert!((c.margins.psi_minus.rhs + (1.0 - cc).powi(2)).abs() < 1e-15);
            assert_eq!(c.verdict, Verdict::PurifiesPsiMinus);
        }
    }

    #[test]
    fn general_condition_reduces_on_diagonal_states() {
        for seed in 0..200 {
            let s = random_x_state(seed);
            let d = XState::diagonal(s.r()).unwrap();
            assert_eq!(condition_general(&d.to_density()), condition_x(&d));
        }
    }

    #[test]
    fn iteration_verdicts() {
        let s = XState::diagonal([0.7, 0.1, 0.1, 0.1]).unwrap();
        let sum = classify_by_iteration(&s, 200, 1e-6).unwrap();
        assert_eq!(sum.attractor, Attractor::PsiMinus);
        assert!(sum.steps > 0);

        let sum = classify_by_iteration(&XState::maximally_mixed(), 200, 1e-6).unwrap();
        assert_eq!((sum.attractor, sum.steps), (Attractor::Mixed, 0));

        let s = XState::with_real([0.5, 0.0, 0.0, 0.5], 0.5, 0.0).unwrap();
        let sum = classify_by_iteration(&s, 200, 1e-6).unwrap();
        assert_eq!(sum.attractor, Attractor::NonConvergent);
        assert_eq!(sum.stall, Some(Stall::FixedPoint));

        let sum = classify_by_iteration(&XState::bell(Bell::PsiPlus), 5, 1e-6).unwrap();
        assert_eq!(sum.attractor, Attractor::PsiPlus);
    }

    #[test]
    fn iteration_detects_two_cycles() {
        // Orbit point found by the period-2 search on the r3 = 0 face.
        let v = crate::fixed_points::refine(
            &crate::fixed_points::ParamVector([0.2655, 0.359, 0.0, 0.3755, 0.0, 0.0, 0.0, 0.0]),
            crate::fixed_points::Period::Two,
        )
        .unwrap();
        let s = XState::from_params(&v.0.map(|x| if x.abs() < 1e-15 { 0.0 } else { x })).unwrap();
        let sum = classify_by_iteration(&s, 200, 1e-6).unwrap();
        assert_eq!(sum.attractor, Attractor::NonConvergent);
        assert!(matches!(sum.stall, Some(Stall::PeriodTwo) | Some(Stall::MaxSteps)));
    }

    #[test]
    fn general_soundness_on_samples() {
        for seed in 0..500 {
            let rho = crate::bell::random_density(seed, crate::bell::StateKind::General);
            if condition_general(&rho).verdict == Verdict::PurifiesPsiMinus {
                assert!(apply_general(&rho).unwrap().state.r()[0] > 0.5);
            }
        }
    }
}
