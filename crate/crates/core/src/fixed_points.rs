//! Fixed points of the X-state map and their linear stability.
//!
//! The map is written on the ambient space `R^8` with
//! `v = (r1, r2, r3, r4, Re r14, Im r14, Re r23, Im r23)`. The normalization is
//! taken in its homogeneous form `N = (r1 + r2)² + (r3 + r4)²`, which agrees
//! with `(r1 + r2)² + (1 − r1 − r2)²` on unit-trace states but keeps the
//! trace direction neutral when differentiating.

use nalgebra::{DMatrix, DVector, SMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{XState, COHERENCE_TOL};
use crate::eigen::real_eigenvalues;
use crate::map::{x_numerators, DEGENERATE_N};
use crate::{Complex, Error, Result};

pub type Jacobian = SMatrix<f64, 8, 8>;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-6;
/// Allowed gap between the `h` and `h/2` Jacobians.
pub const RICHARDSON_TOL: f64 = 1e-6;
/// Band around unit modulus reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-9;
/// Largest accepted `‖f(v) − v‖∞` for a reported fixed point.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Solutions closer than this (max-norm) are merged.
pub const DEDUP_TOL: f64 = 1e-6;
pub const DEFAULT_GRID_DENSITY: usize = 12;
/// Seed values for `Re r14` and `Re r23`.
pub const COHERENCE_SEEDS: [f64; 5] = [0.0, 0.25, -0.25, 0.5, -0.5];

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TARGET: f64 = 1e-14;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ParamVector(pub [f64; 8]);

impl ParamVector {
    pub fn from_state(s: &XState) -> Self {
        ParamVector(s.params())
    }

    pub fn to_state(&self) -> Result<XState> {
        XState::from_params(&self.0)
    }

    pub fn max_distance(&self, other: &ParamVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Whether the vector describes a valid X state, up to `tol`.
    pub fn is_valid_state(&self, tol: f64) -> bool {
        let v = &self.0;
        let r = &v[..4];
        r.iter().all(|x| *x >= -tol && *x <= 1.0 + tol)
            && (r.iter().sum::<f64>() - 1.0).abs() <= tol
            && v[4].hypot(v[5]) <= (r[0] * r[3]).max(0.0).sqrt() + tol
            && v[6].hypot(v[7]) <= (r[1] * r[2]).max(0.0).sqrt() + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Period {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Period {
    pub fn as_usize(self) -> usize {
        match self {
            Period::One => 1,
            Period::Two => 2,
        }
    }
}

impl TryFrom<usize> for Period {
    type Error = Error;
    fn try_from(p: usize) -> Result<Self> {
        match p {
            1 => Ok(Period::One),
            2 => Ok(Period::Two),
            _ => Err(Error::ParamRange {
                name: "period",
                value: p as f64,
                range: "{1, 2}",
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn from_magnitudes(mags: &[f64]) -> Self {
        if mags.iter().any(|&m| m > 1.0 + MARGINAL_BAND) {
            Stability::Unstable
        } else if mags.iter().all(|&m| m < 1.0 - MARGINAL_BAND) {
            Stability::Stable
        } else {
            Stability::Marginal
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointRecord {
    pub v_star: ParamVector,
    /// `‖f^p(v⋆) − v⋆‖∞`.
    pub residual: f64,
    /// Jacobian eigenvalue moduli, descending.
    pub eigen_magnitudes: [f64; 8],
    pub verdict: Stability,
    pub period: Period,
}

/// The X map on `R^8`.
pub fn map_f(v: &ParamVector) -> Result<ParamVector> {
    let x = &v.0;
    let n = (x[0] + x[1]).powi(2) + (x[2] + x[3]).powi(2);
    if !(n.is_finite() && n > DEGENERATE_N) {
        return Err(Error::DegenerateNormalization { n });
    }
    let (d, c14, c23) = x_numerators(
        [x[0], x[1], x[2], x[3]],
        Complex::new(x[4], x[5]),
        Complex::new(x[6], x[7]),
    );
    let (c14, c23) = (c14 / n, c23 / n);
    Ok(ParamVector([
        d[0] / n,
        d[1] / n,
        d[2] / n,
        d[3] / n,
        c14.re,
        c14.im,
        c23.re,
        c23.im,
    ]))
}

/// `f` applied `period` times.
pub fn map_iterate(v: &ParamVector, period: Period) -> Result<ParamVector> {
    let once = map_f(v)?;
    match period {
        Period::One => Ok(once),
        Period::Two => map_f(&once),
    }
}

fn fd_jacobian(v: &ParamVector, period: Period, h: f64) -> Result<Jacobian> {
    let mut j = Jacobian::zeros();
    for col in 0..8 {
        let mut plus = *v;
        let mut minus = *v;
        plus.0[col] += h;
        minus.0[col] -= h;
        let fp = map_iterate(&plus, period)?;
        let fm = map_iterate(&minus, period)?;
        for row in 0..8 {
            j[(row, col)] = (fp.0[row] - fm.0[row]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Central-difference Jacobian together with its step-halving consistency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianEstimate {
    pub matrix: Jacobian,
    /// `max |J_h − J_{h/2}|`.
    pub richardson_gap: f64,
}

impl JacobianEstimate {
    pub fn is_consistent(&self) -> bool {
        self.richardson_gap <= RICHARDSON_TOL
    }
}

pub fn jacobian(v: &ParamVector) -> Result<JacobianEstimate> {
    jacobian_of(v, Period::One)
}

/// Jacobian of `f` (or `f∘f`) at `v` with step [`FD_STEP`].
pub fn jacobian_of(v: &ParamVector, period: Period) -> Result<JacobianEstimate> {
    let full = fd_jacobian(v, period, FD_STEP)?;
    let half = fd_jacobian(v, period, FD_STEP / 2.0)?;
    Ok(JacobianEstimate {
        matrix: full,
        richardson_gap: (full - half).amax(),
    })
}

/// Eigenvalue moduli of `j`, sorted descending.
pub fn eigen_magnitudes(j: &Jacobian) -> [f64; 8] {
    let mut mags: Vec<f64> = real_eigenvalues(j).iter().map(|z| z.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    std::array::from_fn(|i| mags[i])
}

fn residual(v: &ParamVector, period: Period) -> Result<f64> {
    Ok(map_iterate(v, period)?.max_distance(v))
}

/// Damped Newton iteration on `f^p(v) − v`. Returns the final point whatever
/// its residual; callers decide whether to accept it.
pub fn newton(seed: &ParamVector, period: Period) -> Result<(ParamVector, f64)> {
    let mut v = *seed;
    let mut res = residual(&v, period)?;
    for _ in 0..NEWTON_MAX_ITER {
        if res <= NEWTON_TARGET {
            break;
        }
        let g = map_iterate(&v, period)?;
        let rhs = DVector::from_iterator(8, v.0.iter().zip(&g.0).map(|(x, fx)| x - fx));
        let j = fd_jacobian(&v, period, FD_STEP)? - Jacobian::identity();
        let jd = DMatrix::from_fn(8, 8, |r, c| j[(r, c)]);
        let Ok(step) = jd.svd(true, true).solve(&rhs, 1e-13) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let mut trial = v;
            for i in 0..8 {
                trial.0[i] += t * step[i];
            }
            if let Ok(r) = residual(&trial, period) {
                if r < res {
                    v = trial;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((v, res))
}

/// Newton-refines `v` and reports it if the residual meets [`RESIDUAL_TOL`].
pub fn refine(v: &ParamVector, period: Period) -> Option<ParamVector> {
    match newton(v, period) {
        Ok((p, r)) if r <= RESIDUAL_TOL => Some(p),
        _ => None,
    }
}

/// Builds the stability record of a (refined) fixed point.
pub fn analyze(v: &ParamVector, period: Period) -> Result<FixedPointRecord> {
    let res = residual(v, period)?;
    let j = jacobian_of(v, period)?;
    let mags = eigen_magnitudes(&j.matrix);
    Ok(FixedPointRecord {
        v_star: *v,
        residual: res,
        eigen_magnitudes: mags,
        verdict: Stability::from_magnitudes(&mags),
        period,
    })
}

/// Newton seeds: a simplex grid of the given density times real coherence
/// values that respect the positivity bounds.
pub fn seeds(grid_density: usize) -> Vec<ParamVector> {
    let d = grid_density;
    let mut out = Vec::new();
    for i in 0..=d {
        for j in 0..=d - i {
            for k in 0..=d - i - j {
                let l = d - i - j - k;
                let r = [i, j, k, l].map(|x| x as f64 / d as f64);
                let b14 = (r[0] * r[3]).sqrt();
                let b23 = (r[1] * r[2]).sqrt();
                for &a in COHERENCE_SEEDS.iter().filter(|a| a.abs() <= b14 + 1e-15) {
                    for &b in COHERENCE_SEEDS.iter().filter(|b| b.abs() <= b23 + 1e-15) {
                        out.push(ParamVector([r[0], r[1], r[2], r[3], a, 0.0, b, 0.0]));
                    }
                }
            }
        }
    }
    out
}

/// Searches for fixed points of `f` (period one) or `f∘f` (period two) that
/// are valid X states. Records are sorted lexicographically by `v⋆`.
///
/// For period two, points that are already fixed by `f` are left out so only
/// genuine 2-cycles are reported.
pub fn find_fixed_points(grid_density: usize, period: Period) -> Result<Vec<FixedPointRecord>> {
    if grid_density < 2 {
        return Err(Error::ParamRange {
            name: "grid_density",
            value: grid_density as f64,
            range: ">= 2",
        });
    }
    let candidates: Vec<ParamVector> = seeds(grid_density)
        .par_iter()
        .filter_map(|s| refine(s, period))
        .filter(|v| v.is_valid_state(COHERENCE_TOL))
        .collect();

    let mut unique: Vec<ParamVector> = Vec::new();
    for v in candidates {
        if !unique.iter().any(|u| u.max_distance(&v) < DEDUP_TOL) {
            unique.push(v);
        }
    }
    if period == Period::Two {
        unique.retain(|v| residual(v, Period::One).map_or(false, |r| r > DEDUP_TOL));
    }
    unique.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    unique.iter().map(|v| analyze(v, period)).collect()
}

/// Plain-text table with columns `r1 r2 r3 r4 r14 r23 | stability`.
pub fn render_table(records: &[FixedPointRecord]) -> String {
    let mut s = String::new();
    s.push_str("period  (r1, r2, r3, r4, r14, r23)                          max|λ|      stability\n");
    for r in records {
        let v = &r.v_star.0;
        let fmt_c = |re: f64, im: f64| {
            if im.abs() < 1e-12 {
                format!("{:.4}", clean(re))
            } else {
                format!("{:.4}{:+.4}i", clean(re), im)
            }
        };
        let coords = format!(
            "({:.4}, {:.4}, {:.4}, {:.4}, {}, {})",
            clean(v[0]),
            clean(v[1]),
            clean(v[2]),
            clean(v[3]),
            fmt_c(v[4], v[5]),
            fmt_c(v[6], v[7])
        );
        let verdict = match r.verdict {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        };
        s.push_str(&format!(
            "{:<7} {:<52} {:<11.4e} {}\n",
            r.period.as_usize(),
            coords,
            r.eigen_magnitudes[0],
            verdict
        ));
    }
    s
}

fn clean(x: f64) -> f64 {
    // avoid printing "-0.0000"
    if x.abs() < 5e-5 {
        0.0
    } else {
        x
    }
}
