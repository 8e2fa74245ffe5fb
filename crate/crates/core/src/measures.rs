//! Concurrence, Bell fidelities and overlap with maximally entangled states.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::bell::{sigma_yy, Bell, BellDensityMatrix, BellVector, Matrix4c, NORM_TOL};
use crate::eigen::hermitian_eigen;
use crate::{Complex, Error, Result};

/// Eigenvalues of ρ at or below this are treated as exact zeros when forming
/// the Wootters spectrum.
const RANK_CUTOFF: f64 = 1e-13;
const ASCENT_STARTS: usize = 64;
const ASCENT_TOL: f64 = 1e-10;
const ASCENT_MAX_ITER: usize = 100_000;
const ASCENT_SEED: u64 = 0x5eed_0f_a5ce;

/// `a⁻|Φ⁻⟩ + i a⁺|Φ⁺⟩ + i b⁻|Ψ⁻⟩ + b⁺|Ψ⁺⟩` with real coefficients: every
/// maximally entangled two-qubit pure state up to a global phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxEntangledVector {
    pub a_minus: f64,
    pub a_plus: f64,
    pub b_minus: f64,
    pub b_plus: f64,
}

impl MaxEntangledVector {
    /// Normalizes and fixes the sign so that `a⁻ ≥ 0` (then `a⁺ ≥ 0` on ties).
    pub fn new(a_minus: f64, a_plus: f64, b_minus: f64, b_plus: f64) -> Result<Self> {
        let x = [a_minus, a_plus, b_minus, b_plus];
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NormError(norm));
        }
        Ok(Self::canonical(x.map(|v| v / norm)))
    }

    fn canonical(x: [f64; 4]) -> Self {
        let flip = match x.iter().find(|v| v.abs() > 1e-12) {
            Some(&first) => first < 0.0,
            None => false,
        };
        let x = if flip { x.map(|v| -v) } else { x };
        MaxEntangledVector {
            a_minus: x[0],
            a_plus: x[1],
            b_minus: x[2],
            b_plus: x[3],
        }
    }

    fn coefficients(&self) -> [f64; 4] {
        [self.a_minus, self.a_plus, self.b_minus, self.b_plus]
    }

    /// Bell-basis amplitudes in the order `(Ψ⁻, Φ⁻, Φ⁺, Ψ⁺)`.
    pub fn realize(&self) -> BellVector {
        let amps = [
            Complex::new(0.0, self.b_minus),
            Complex::new(self.a_minus, 0.0),
            Complex::new(0.0, self.a_plus),
            Complex::new(self.b_plus, 0.0),
        ];
        BellVector::normalized(amps).expect("unit coefficients")
    }
}

fn require_unit(psi: &BellVector) -> Result<()> {
    let n = psi.norm();
    if (n - 1.0).abs() > NORM_TOL {
        Err(Error::NormError(n))
    } else {
        Ok(())
    }
}

/// `|⟨ψ|σy⊗σy|ψ*⟩|`, evaluated in the computational basis.
pub fn concurrence_pure(psi: &BellVector) -> Result<f64> {
    require_unit(psi)?;
    let v = psi.to_computational();
    let y = sigma_yy();
    // ⟨ψ|Y|ψ*⟩ = Σ conj(ψ_i) Y_ij conj(ψ_j)
    let mut acc = Complex::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += v[i].conj() * y[(i, j)] * v[j].conj();
        }
    }
    Ok(acc.norm())
}

/// Same quantity using the `σy⊗σy` eigenvalues of the Bell states.
pub fn concurrence_pure_bell(psi: &BellVector) -> Result<f64> {
    require_unit(psi)?;
    let a = psi.amplitudes();
    let s: Complex = Bell::ALL
        .iter()
        .map(|b| a[b.index()] * a[b.index()] * b.sigma_yy_eigenvalue())
        .sum();
    Ok(s.norm())
}

/// Wootters concurrence `max(0, √λ1 − √λ2 − √λ3 − √λ4)`, `λi` the descending
/// eigenvalues of `ρ (σy⊗σy) ρ* (σy⊗σy)`.
///
/// With `ρ = W W†` (`W` holding the scaled eigenvectors) the `√λi` are the
/// singular values of `Wᵀ (σy⊗σy) W`, which avoids square roots of the
/// ill-conditioned small eigenvalues of the non-Hermitian product.
pub fn concurrence_mixed(rho: &BellDensityMatrix) -> f64 {
    let roots = wootters_roots(rho);
    (roots[0] - roots[1] - roots[2] - roots[3]).max(0.0)
}

/// `√λi` of the Wootters construction, descending, padded with zeros.
pub fn wootters_roots(rho: &BellDensityMatrix) -> [f64; 4] {
    let comp = rho.to_computational();
    let d = DMatrix::from_fn(4, 4, |i, j| comp[(i, j)]);
    let (vals, vecs) = hermitian_eigen(&d);
    let cols: Vec<usize> = (0..4).filter(|&i| vals[i] > RANK_CUTOFF).collect();
    if cols.is_empty() {
        return [0.0; 4];
    }
    let w = DMatrix::from_fn(4, cols.len(), |r, c| {
        vecs[(r, cols[c])] * vals[cols[c]].sqrt()
    });
    let y = sigma_yy();
    let yd = DMatrix::from_fn(4, 4, |i, j| y[(i, j)]);
    let tau = w.transpose() * yd * &w;
    let mut sv: Vec<f64> = tau.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    std::array::from_fn(|i| sv.get(i).copied().unwrap_or(0.0))
}

/// The matrix `ρ (σy⊗σy) ρ* (σy⊗σy)` in the computational basis.
pub fn wootters_product(rho: &BellDensityMatrix) -> Matrix4c {
    let r = rho.to_computational();
    let y = sigma_yy();
    r * y * r.map(|z| z.conj()) * y
}

/// `(r1, r2, r3, r4)`: overlaps with `|Ψ⁻⟩, |Φ⁻⟩, |Φ⁺⟩, |Ψ⁺⟩`.
pub fn bell_fidelities(rho: &BellDensityMatrix) -> [f64; 4] {
    rho.diagonal()
}

/// Real symmetric form `A` with `⟨Ψ(x)|ρ|Ψ(x)⟩ = xᵀ A x` for
/// `x = (a⁻, a⁺, b⁻, b⁺)`.
pub fn overlap_form(rho: &BellDensityMatrix) -> [[f64; 4]; 4] {
    // Column k of P is the Bell-basis image of coefficient k.
    let slots: [(usize, Complex); 4] = [
        (Bell::PhiMinus.index(), Complex::new(1.0, 0.0)),
        (Bell::PhiPlus.index(), Complex::new(0.0, 1.0)),
        (Bell::PsiMinus.index(), Complex::new(0.0, 1.0)),
        (Bell::PsiPlus.index(), Complex::new(1.0, 0.0)),
    ];
    let m = rho.matrix();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let (bi, pi) = slots[i];
            let (bj, pj) = slots[j];
            (pi.conj() * m[(bi, bj)] * pj).re
        })
    })
}

fn quad(a: &[[f64; 4]; 4], x: &[f64; 4]) -> f64 {
    (0..4).map(|i| (0..4).map(|j| x[i] * a[i][j] * x[j]).sum::<f64>()).sum()
}

fn apply(a: &[[f64; 4]; 4], x: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| (0..4).map(|j| a[i][j] * x[j]).sum())
}

fn normalize(x: [f64; 4]) -> Option<[f64; 4]> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (n > 0.0 && n.is_finite()).then(|| x.map(|v| v / n))
}

/// Local ascent of `xᵀAx` on the unit sphere. The projected-gradient step
/// `x + (Ax − q x)/q` with `q = xᵀAx` reduces to a normalized power step,
/// which never decreases the objective for positive semidefinite `A`.
fn ascend(a: &[[f64; 4]; 4], start: [f64; 4]) -> ([f64; 4], f64) {
    let mut x = start;
    let mut q = quad(a, &x);
    for _ in 0..ASCENT_MAX_ITER {
        let Some(next) = normalize(apply(a, &x)) else {
            break;
        };
        let qn = quad(a, &next);
        let moved = next
            .iter()
            .zip(&x)
            .map(|(p, o)| (p - o).abs())
            .fold(0.0, f64::max);
        if qn < q {
            break;
        }
        x = next;
        q = qn;
        if moved < ASCENT_TOL {
            break;
        }
    }
    (x, q)
}

/// Largest overlap `⟨Ψ|ρ|Ψ⟩` over maximally entangled pure states, by
/// multi-start ascent from the four Bell states and 64 seeded random points.
pub fn max_entangled_fidelity(rho: &BellDensityMatrix) -> (f64, MaxEntangledVector) {
    let a = overlap_form(rho);
    let mut rng = ChaCha8Rng::seed_from_u64(ASCENT_SEED);
    let mut starts: Vec<[f64; 4]> = (0..4)
        .map(|k| std::array::from_fn(|i| if i == k { 1.0 } else { 0.0 }))
        .collect();
    while starts.len() < 4 + ASCENT_STARTS {
        let g: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        if let Some(x) = normalize(g) {
            starts.push(x);
        }
    }
    let (x, q) = starts
        .into_iter()
        .map(|s| ascend(&a, s))
        .fold(([1.0, 0.0, 0.0, 0.0], f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });
    (q, MaxEntangledVector::canonical(x))
}

/// `⟨Ψ|ρ|Ψ⟩` for a given maximally entangled vector.
pub fn overlap(rho: &BellDensityMatrix, v: &MaxEntangledVector) -> f64 {
    quad(&overlap_form(rho), &v.coefficients())
}
