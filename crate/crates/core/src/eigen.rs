//! Small dense eigenvalue routines.
//!
//! Hermitian spectra go through nalgebra's symmetric eigensolver. General
//! (non-normal) complex matrices use a Householder reduction to upper
//! Hessenberg form followed by Wilkinson-shifted QR sweeps with Givens
//! rotations. Matrices here are at most 16×16, so no blocking or balancing.

use nalgebra::{DMatrix, Dim, Matrix, RawStorage};

use crate::Complex;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Only the Hermitian part `(m + m†)/2` is used.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex>) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &DMatrix<Complex>) -> (Vec<f64>, DMatrix<Complex>) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// All eigenvalues of a general square complex matrix (unordered).
pub fn eigenvalues<R: Dim, C: Dim, S: RawStorage<Complex, R, C>>(
    m: &Matrix<Complex, R, C, S>,
) -> Vec<Complex> {
    assert_eq!(m.nrows(), m.ncols(), "eigenvalues of a non-square matrix");
    let n = m.nrows();
    let mut h = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    reduce_to_hessenberg(&mut h);
    hessenberg_qr(h)
}

/// Eigenvalues of a real square matrix, via the complex routine.
pub fn real_eigenvalues<R: Dim, C: Dim, S: RawStorage<f64, R, C>>(
    m: &Matrix<f64, R, C, S>,
) -> Vec<Complex> {
    let n = m.nrows();
    let c = DMatrix::from_fn(n, m.ncols(), |i, j| Complex::new(m[(i, j)], 0.0));
    eigenvalues(&c)
}

/// In-place unitary similarity `H = Q† A Q` with `H` upper Hessenberg.
fn reduce_to_hessenberg(a: &mut DMatrix<Complex>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // A <- (I - 2 v v†) A
        for j in 0..n {
            let dot: Complex = v
                .iter()
                .enumerate()
                .map(|(t, vi)| vi.conj() * a[(k + 1 + t, j)])
                .sum();
            for (t, vi) in v.iter().enumerate() {
                a[(k + 1 + t, j)] -= *vi * dot * 2.0;
            }
        }
        // A <- A (I - 2 v v†)
        for i in 0..n {
            let dot: Complex = v
                .iter()
                .enumerate()
                .map(|(t, vi)| a[(i, k + 1 + t)] * *vi)
                .sum();
            for (t, vi) in v.iter().enumerate() {
                a[(i, k + 1 + t)] -= dot * vi.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            a[(i, k)] = Complex::new(0.0, 0.0);
        }
    }
}

fn wilkinson_shift(a: Complex, b: Complex, c: Complex, d: Complex) -> Complex {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

fn hessenberg_qr(mut h: DMatrix<Complex>) -> Vec<Complex> {
    let n = h.nrows();
    let mut out = vec![Complex::new(0.0, 0.0); n];
    if n == 0 {
        return out;
    }
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    while hi > 0 {
        // Locate the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * scale {
                h[(lo, lo - 1)] = Complex::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            sweeps = 0;
            continue;
        }
        sweeps += 1;
        let mu = if sweeps % 11 == 0 {
            // exceptional shift to break rare cycles
            h[(hi, hi)] + Complex::new(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE * n {
            // Give up on further deflation; the diagonal is the best estimate.
            for i in lo..=hi {
                out[i] = h[(i, i)];
            }
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            sweeps = 0;
            continue;
        }
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0))
            } else {
                (x / r, y / r)
            };
            for j in k..=hi {
                let p = h[(k, j)];
                let q = h[(k + 1, j)];
                h[(k, j)] = c.conj() * p + s.conj() * q;
                h[(k + 1, j)] = -s * p + c * q;
            }
            rotations.push((c, s));
        }
        for (offset, (c, s)) in rotations.into_iter().enumerate() {
            let k = lo + offset;
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * c + q * s;
                h[(i, k + 1)] = -p * s.conj() + q * c.conj();
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    out[0] = h[(0, 0)];
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> DMatrix<Complex> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn triangular_matrix_returns_diagonal() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[c(1.0, 0.0), c(2.0, 1.0), c(0.5, 0.0), c(0.0, 0.0), c(-3.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)],
        );
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-3.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 2.0)).norm() < 1e-12);
        assert!((ev[2] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rotation_has_unit_circle_spectrum() {
        let t: f64 = 0.3;
        let m = nalgebra::Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
        let ev = real_eigenvalues(&m);
        for z in ev {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!((z.im.abs() - t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn nilpotent_jordan_block() {
        let mut m = DMatrix::<f64>::zeros(4, 4);
        for i in 0..3 {
            m[(i, i + 1)] = 1.0;
        }
        for z in real_eigenvalues(&m) {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn random_spectra_match_trace_and_determinant() {
        for (seed, n) in (0..50u64).zip([2usize, 3, 4, 5, 8, 16].into_iter().cycle()) {
            let m = random_matrix(n, seed);
            let ev = eigenvalues(&m);
            let sum: Complex = ev.iter().sum();
            let prod: Complex = ev.iter().product();
            assert!((sum - m.trace()).norm() < 1e-10, "trace, n={n}");
            let det = m.clone().determinant();
            assert!((prod - det).norm() < 1e-10 * (1.0 + det.norm()), "det, n={n}");
            // each eigenvalue makes m - λI singular
            for z in &ev {
                let shifted = &m - DMatrix::<Complex>::identity(n, n) * *z;
                let smin = shifted
                    .singular_values()
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                assert!(smin < 1e-9, "n={n} λ={z} smin={smin}");
            }
        }
    }

    #[test]
    fn hermitian_routines_agree_with_general_routine() {
        for seed in 0..20 {
            let g = random_matrix(4, 100 + seed);
            let h = &g * g.adjoint();
            let herm = hermitian_eigenvalues(&h);
            let mut gen: Vec<f64> = eigenvalues(&h).iter().map(|z| z.re).collect();
            gen.sort_by(f64::total_cmp);
            for (a, b) in herm.iter().zip(&gen) {
                assert!((a - b).abs() < 1e-11);
            }
            let (vals, vecs) = hermitian_eigen(&h);
            let rebuilt = &vecs
                * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    4,
                    vals.iter().map(|&v| c(v, 0.0)),
                ))
                * vecs.adjoint();
            assert!((rebuilt - &h).camax() < 1e-12);
        }
    }
}
