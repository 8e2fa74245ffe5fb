//! The two worked example families and a one-step report for each.
//!
//! * `ρ1(x) = x|Υ_ent⟩⟨Υ_ent| + (1−x)|Φ⁺⟩⟨Φ⁺|`, `x ∈ (1/2, 1]`, with
//!   `|Υ_ent⟩ = (|Ψ⁻⟩ + i|Φ⁻⟩)/√2`. No Bell fidelity exceeds one half, yet
//!   one step lifts `r1` to `x²/(x² + (1−x)²)`.
//! * `ρ2(c) = c|Ψ⁻⟩⟨Ψ⁻| + (1−c)|Υ_sep⟩⟨Υ_sep|`, `c ∈ (0, 1/2]`, with
//!   `|Υ_sep⟩ = (|Φ⁺⟩ + |Ψ⁺⟩)/√2`. One step gives `|Ψ⁻⟩` exactly, with
//!   probability `c²/2`.

use serde::Serialize;

use crate::bell::{Bell, BellDensityMatrix, BellVector};
use crate::map::apply_general;
use crate::measures::{bell_fidelities, concurrence_mixed, max_entangled_fidelity, MaxEntangledVector};
use crate::oracle::{max_entry_deviation, run_protocol};
use crate::{Complex, Error, Result};

const EXACT_TOL: f64 = 1e-12;
const NUMERIC_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-10;

pub fn upsilon_ent() -> BellVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    BellVector::new([Complex::new(s, 0.0), Complex::new(0.0, s), Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)])
        .expect("unit vector")
}

pub fn upsilon_sep() -> BellVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    BellVector::new([Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), Complex::new(s, 0.0), Complex::new(s, 0.0)])
        .expect("unit vector")
}

pub fn rho1(x: f64) -> Result<BellDensityMatrix> {
    if !(x > 0.5 && x <= 1.0) {
        return Err(Error::ParamRange {
            name: "x",
            value: x,
            range: "(0.5, 1]",
        });
    }
    BellDensityMatrix::pure(&upsilon_ent()).mix(x, &BellDensityMatrix::bell(Bell::PhiPlus))
}

pub fn rho2(c: f64) -> Result<BellDensityMatrix> {
    if !(c > 0.0 && c <= 0.5) {
        return Err(Error::ParamRange {
            name: "c",
            value: c,
            range: "(0, 0.5]",
        });
    }
    BellDensityMatrix::bell(Bell::PsiMinus).mix(c, &BellDensityMatrix::pure(&upsilon_sep()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Example {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl TryFrom<u8> for Example {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Example::One),
            2 => Ok(Example::Two),
            _ => Err(Error::ParamRange {
                name: "example",
                value: n as f64,
                range: "{1, 2}",
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum Relation {
    Equal { tolerance: f64 },
    AtMost { slack: f64 },
    AtLeast { slack: f64 },
    Greater,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub target: f64,
    #[serde(flatten)]
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, target: f64, relation: Relation) -> Self {
        let passed = match relation {
            Relation::Equal { tolerance } => (value - target).abs() <= tolerance,
            Relation::AtMost { slack } => value <= target + slack,
            Relation::AtLeast { slack } => value >= target - slack,
            Relation::Greater => value > target,
        };
        Check {
            name,
            value,
            target,
            relation,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleReport {
    pub example: Example,
    pub param: f64,
    pub r1_out: f64,
    pub r1_out_oracle: f64,
    pub oracle_deviation: f64,
    pub success_probability: f64,
    pub bell_fidelities: [f64; 4],
    pub concurrence: f64,
    pub max_entangled_fidelity: f64,
    pub argmax: MaxEntangledVector,
    pub checks: Vec<Check>,
}

impl ExampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_example(example: Example, param: f64) -> Result<ExampleReport> {
    let rho = match example {
        Example::One => rho1(param)?,
        Example::Two => rho2(param)?,
    };
    let closed = apply_general(&rho)?;
    let oracle = run_protocol(&rho)?;
    let r1_out = closed.state.r()[0];
    let r1_out_oracle = oracle.state.r(1, 1).re;
    let oracle_deviation = max_entry_deviation(closed.density().matrix(), oracle.state.matrix())
        .max((closed.success_probability - oracle.success_probability).abs());
    let fidelities = bell_fidelities(&rho);
    let concurrence = concurrence_mixed(&rho);
    let (fmax, argmax) = max_entangled_fidelity(&rho);

    let mut checks = vec![Check::new(
        "oracle_agreement",
        oracle_deviation,
        0.0,
        Relation::AtMost { slack: ORACLE_TOL },
    )];
    match example {
        Example::One => {
            let x = param;
            let n = x * x + (1.0 - x) * (1.0 - x);
            checks.push(Check::new("r1_out", r1_out, x * x / n, Relation::Equal { tolerance: EXACT_TOL }));
            checks.push(Check::new("r1_out_exceeds_x", r1_out, x, Relation::Greater));
            checks.push(Check::new(
                "success_probability",
                closed.success_probability,
                n / 2.0,
                Relation::Equal { tolerance: EXACT_TOL },
            ));
            let top = fidelities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::new("max_bell_fidelity", top, 0.5, Relation::AtMost { slack: EXACT_TOL }));
            checks.push(Check::new(
                "max_entangled_fidelity",
                fmax,
                x,
                Relation::AtLeast { slack: NUMERIC_TOL },
            ));
        }
        Example::Two => {
            let c = param;
            checks.push(Check::new("r1_out", r1_out, 1.0, Relation::Equal { tolerance: EXACT_TOL }));
            checks.push(Check::new(
                "success_probability",
                closed.success_probability,
                c * c / 2.0,
                Relation::Equal { tolerance: EXACT_TOL },
            ));
            checks.push(Check::new("concurrence", concurrence, c, Relation::Equal { tolerance: NUMERIC_TOL }));
            checks.push(Check::new(
                "max_entangled_fidelity",
                fmax,
                0.5,
                Relation::AtMost { slack: NUMERIC_TOL },
            ));
        }
    }

    Ok(ExampleReport {
        example,
        param,
        r1_out,
        r1_out_oracle,
        oracle_deviation,
        success_probability: closed.success_probability,
        bell_fidelities: fidelities,
        concurrence,
        max_entangled_fidelity: fmax,
        argmax,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho1_entries() {
        let r = rho1(0.6).unwrap();
        assert!((r.r(1, 1).re - 0.3).abs() < 1e-15);
        assert!((r.r(2, 2).re - 0.3).abs() < 1e-15);
        assert!((r.r(1, 2) - Complex::new(0.0, -0.3)).norm() < 1e-15);
        assert!((r.r(3, 3).re - 0.4).abs() < 1e-15);
        assert!(r.r(3, 4).norm() < 1e-15);
    }

    #[test]
    fn rho2_entries() {
        let r = rho2(0.3).unwrap();
        let d = r.diagonal();
        for (got, want) in d.iter().zip([0.3, 0.0, 0.35, 0.35]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((r.r(3, 4).re - 0.35).abs() < 1e-15);
    }

    #[test]
    fn spec_instances() {
        let a = run_example(Example::One, 0.75).unwrap();
        assert!((a.r1_out - 0.9).abs() < 1e-12);
        assert!(a.passed(), "{a:?}");
        let b = run_example(Example::Two, 0.4).unwrap();
        assert!((b.r1_out - 1.0).abs() < 1e-12);
        assert!((b.success_probability - 0.08).abs() < 1e-12);
        assert!(b.max_entangled_fidelity <= 0.5 + 1e-9);
        assert!(b.passed(), "{b:?}");
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(rho1(0.5), Err(Error::ParamRange { .. })));
        assert!(matches!(rho1(1.01), Err(Error::ParamRange { .. })));
        assert!(matches!(rho2(0.0), Err(Error::ParamRange { .. })));
        assert!(matches!(rho2(0.51), Err(Error::ParamRange { .. })));
        assert!(Example::try_from(3).is_err());
    }

    #[test]
    fn x_one_is_pure_upsilon() {
        let r = run_example(Example::One, 1.0).unwrap();
        assert!((r.r1_out - 1.0).abs() < 1e-12);
        assert!((r.concurrence - 1.0).abs() < 1e-9);
    }
}
