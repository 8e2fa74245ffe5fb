//! Region scans over the diagonal simplex `(r1, r2, r3)`, `r4 = 1 − r1 − r2 − r3`.
//!
//! Each grid point gets a state from one of three coherence families and is
//! labelled by the general purification conditions.

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{validate_density, BellDensityMatrix, Matrix4c, ValidationReport};
use crate::convergence::{condition_general, Verdict};
use crate::{Complex, Error, Result};

pub const DEFAULT_GRID: usize = 64;

/// How the coherences `r12`, `r34` depend on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// All coherences zero.
    Diagonal,
    /// `r12 = η_a √(r1 r2)`, `r34 = η_b √(r3 r4)`.
    Dephasing1 { eta_a: f64, eta_b: f64 },
    /// `r12 = i η_c √(r1 r2)`, `r34 = η_d √(r3 r4)`.
    Dephasing2 { eta_c: f64, eta_d: f64 },
}

impl Family {
    fn etas(&self) -> [(&'static str, f64); 2] {
        match *self {
            Family::Diagonal => [("eta", 0.0), ("eta", 0.0)],
            Family::Dephasing1 { eta_a, eta_b } => [("eta_a", eta_a), ("eta_b", eta_b)],
            Family::Dephasing2 { eta_c, eta_d } => [("eta_c", eta_c), ("eta_d", eta_d)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.etas() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ParamRange {
                    name,
                    value,
                    range: "[0, 1]",
                });
            }
        }
        Ok(())
    }

    /// Bell-basis matrix for the diagonal `r` (not validated).
    pub fn matrix(&self, r: [f64; 4]) -> Matrix4c {
        let mut m = Matrix4c::zeros();
        for i in 0..4 {
            m[(i, i)] = Complex::new(r[i], 0.0);
        }
        let g12 = (r[0] * r[1]).sqrt();
        let g34 = (r[2] * r[3]).sqrt();
        let (r12, r34) = match *self {
            Family::Diagonal => (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)),
            Family::Dephasing1 { eta_a, eta_b } => (Complex::new(eta_a * g12, 0.0), Complex::new(eta_b * g34, 0.0)),
            Family::Dephasing2 { eta_c, eta_d } => (Complex::new(0.0, eta_c * g12), Complex::new(eta_d * g34, 0.0)),
        };
        m[(0, 1)] = r12;
        m[(1, 0)] = r12.conj();
        m[(2, 3)] = r34;
        m[(3, 2)] = r34.conj();
        m
    }

    pub fn state(&self, r: [f64; 4]) -> Result<BellDensityMatrix> {
        BellDensityMatrix::new(self.matrix(r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    PsiMinus,
    PsiPlus,
    None,
    Boundary,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::PsiMinus => "psi_minus",
            Label::PsiPlus => "psi_plus",
            Label::None => "none",
            Label::Boundary => "boundary",
        }
    }
}

impl From<Verdict> for Label {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::PurifiesPsiMinus => Label::PsiMinus,
            Verdict::PurifiesPsiPlus => Label::PsiPlus,
            Verdict::NoPurification => Label::None,
            Verdict::Boundary => Label::Boundary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedPoint {
    pub r: [f64; 4],
    pub report: ValidationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionScan {
    pub family: Family,
    pub grid_points_per_axis: usize,
    pub points: Vec<RegionPoint>,
    pub rejected: Vec<RejectedPoint>,
}

impl RegionScan {
    pub fn count(&self, label: Label) -> usize {
        self.points.iter().filter(|p| p.label == label).count()
    }

    /// Share of accepted grid points carrying `label`.
    pub fn fraction(&self, label: Label) -> f64 {
        if self.points.is_empty() {
            0.0
        } else {
            self.count(label) as f64 / self.points.len() as f64
        }
    }

    /// `r1,r2,r3,label` with LF line endings.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.points.len() * 48);
        s.push_str("r1,r2,r3,label\n");
        for p in &self.points {
            s.push_str(&format!("{:?},{:?},{:?},{}\n", p.r1, p.r2, p.r3, p.label.as_str()));
        }
        s
    }
}

/// Cell-centre grid `(k + ½)/n` restricted to `r1 + r2 + r3 ≤ 1`, in
/// lexicographic `(r1, r2, r3)` order.
pub fn simplex_grid(n: usize) -> Vec<[f64; 4]> {
    let mut out = Vec::new();
    let at = |k: usize| (k as f64 + 0.5) / n as f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // integer test avoids rounding at the r4 = 0 face
                if 2 * (i + j + k) + 3 > 2 * n {
                    continue;
                }
                let (r1, r2, r3) = (at(i), at(j), at(k));
                out.push([r1, r2, r3, 1.0 - r1 - r2 - r3]);
            }
        }
    }
    out
}

pub fn scan(family: Family, grid_points_per_axis: usize) -> Result<RegionScan> {
    family.validate()?;
    if grid_points_per_axis < 1 {
        return Err(Error::ParamRange {
            name: "grid",
            value: grid_points_per_axis as f64,
            range: ">= 1",
        });
    }
    let results: Vec<std::result::Result<RegionPoint, RejectedPoint>> = simplex_grid(grid_points_per_axis)
        .par_iter()
        .map(|&r| {
            let m = family.matrix(r);
            let report = validate_density(&m);
            if !report.passed() {
                return Err(RejectedPoint { r, report });
            }
            let rho = BellDensityMatrix::new(m).map_err(|_| RejectedPoint {
                r,
                report: report.clone(),
            })?;
            Ok(RegionPoint {
                r1: r[0],
                r2: r[1],
                r3: r[2],
                label: condition_general(&rho).verdict.into(),
            })
        })
        .collect();
    let mut points = Vec::with_capacity(results.len());
    let mut rejected = Vec::new();
    for r in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => rejected.push(e),
        }
    }
    Ok(RegionScan {
        family,
        grid_points_per_axis,
        points,
        rejected,
    })
}
