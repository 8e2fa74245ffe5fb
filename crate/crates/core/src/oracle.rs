//! Literal four-qubit simulation of one purification round.
//!
//! Two copies of `ρ` live on qubits `(A1, B1, A2, B2)` (big-endian, A1 most
//! significant). The rank-two projector `M` acts on `(A1, A2)` at site A and on
//! `(B1, B2)` at site B. One pair is measured in the computational basis, the
//! survivor is corrected with `V_j ⊗ V_{k+1 mod 2}` and all four branches are
//! summed. Nothing here uses the closed-form map, so it serves as an
//! independent check of [`crate::map::apply_general`].

use nalgebra::DMatrix;

use crate::bell::{bell_matrix_to_computational, computational_to_bell, Bell, BellDensityMatrix, Matrix4c};
use crate::map::MapOutcome;
use crate::{Complex, Error, Result};

/// Projected traces at or below this are treated as a failed round.
pub const DEGENERATE_TRACE: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex>;

fn cx(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn qubit_count(m: &CMatrix) -> Result<usize> {
    let n = m.nrows();
    if n != m.ncols() || n == 0 || !n.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square 2^k operator, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Reorders the tensor factors of an operator: qubit `k` of the result is
/// qubit `perm[k]` of the input.
pub fn permute_qubits(m: &CMatrix, perm: &[usize]) -> Result<CMatrix> {
    let q = qubit_count(m)?;
    let mut seen = vec![false; q];
    if perm.len() != q || perm.iter().any(|&p| p >= q || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::DimensionMismatch(format!(
            "{perm:?} is not a permutation of {q} qubits"
        )));
    }
    let map_index = |new: usize| -> usize {
        let mut old = 0;
        for (k, &p) in perm.iter().enumerate() {
            let bit = (new >> (q - 1 - k)) & 1;
            old |= bit << (q - 1 - p);
        }
        old
    };
    let dim = m.nrows();
    let idx: Vec<usize> = (0..dim).map(map_index).collect();
    Ok(CMatrix::from_fn(dim, dim, |i, j| m[(idx[i], idx[j])]))
}

/// Traces out every qubit not in `keep`. Kept qubits retain their relative order.
pub fn partial_trace(m: &CMatrix, keep: &[usize]) -> Result<CMatrix> {
    let q = qubit_count(m)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= q) {
        return Err(Error::DimensionMismatch(format!("qubit index out of range for {q} qubits")));
    }
    let traced: Vec<usize> = (0..q).filter(|k| !keep.contains(k)).collect();
    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0;
        for (t, &k) in keep.iter().enumerate() {
            idx |= ((kept_bits >> (keep.len() - 1 - t)) & 1) << (q - 1 - k);
        }
        for (t, &k) in traced.iter().enumerate() {
            idx |= ((traced_bits >> (traced.len() - 1 - t)) & 1) << (q - 1 - k);
        }
        idx
    };
    let kd = 1 << keep.len();
    let td = 1 << traced.len();
    Ok(CMatrix::from_fn(kd, kd, |i, j| {
        (0..td).map(|t| m[(compose(i, t), compose(j, t))]).sum()
    }))
}

/// Local operations of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperationSet {
    /// `|Ψ⁻⟩⟨Ψ⁻| + |Φ⁻⟩⟨Φ⁻|` on two qubits at one site, computational basis.
    pub m_local: CMatrix,
    /// `V_j = (|1⟩⟨1| + i|0⟩⟨0|) σx^j` for `j = 0, 1`.
    pub v: [CMatrix; 2],
}

impl Default for LocalOperationSet {
    fn default() -> Self {
        let mut m_local = CMatrix::zeros(4, 4);
        for b in [Bell::PsiMinus, Bell::PhiMinus] {
            let v = b.computational();
            for i in 0..4 {
                for j in 0..4 {
                    m_local[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        let phase = CMatrix::from_row_slice(2, 2, &[cx(0.0, 1.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)]);
        let sx = CMatrix::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)]);
        LocalOperationSet {
            m_local,
            v: [phase.clone(), &phase * &sx],
        }
    }
}

impl LocalOperationSet {
    /// `Π = M^{A1,A2} M^{B1,B2}` on the `(A1, B1, A2, B2)` register.
    pub fn bilateral_projector(&self) -> CMatrix {
        // kron(M, M) acts on (A1, A2, B1, B2); reorder to (A1, B1, A2, B2).
        let site_order = kron(&self.m_local, &self.m_local);
        permute_qubits(&site_order, &[0, 2, 1, 3]).expect("4-qubit permutation")
    }
}

/// Density operator on `(A1, B1, A2, B2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourQubitState(pub CMatrix);

impl FourQubitState {
    /// `ρ ⊗ ρ` for a Bell-basis two-qubit state.
    pub fn two_copies(rho: &BellDensityMatrix) -> Self {
        let c = to_dmatrix(&rho.to_computational());
        FourQubitState(kron(&c, &c))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

/// Which pair is measured in step (II).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasuredPair {
    A2B2,
    A1B1,
}

/// Full bookkeeping of one simulated round.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub outcome: MapOutcome<BellDensityMatrix>,
    /// `Tr{Π†Π ρ⊗ρ}`, the probability that both projections succeed.
    pub projected_trace: f64,
    /// Trace of each measurement branch, indexed `[j][k]`.
    pub branch_traces: [[f64; 2]; 2],
}

fn to_dmatrix(m: &Matrix4c) -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

fn to_matrix4(m: &CMatrix) -> Matrix4c {
    Matrix4c::from_fn(|i, j| m[(i, j)])
}

fn projector_bit(bit: usize) -> CMatrix {
    let mut p = CMatrix::zeros(2, 2);
    p[(bit, bit)] = cx(1.0, 0.0);
    p
}

fn identity2() -> CMatrix {
    CMatrix::identity(2, 2)
}

/// Simulates one round measuring pair `(A2, B2)`.
pub fn run_protocol(rho: &BellDensityMatrix) -> Result<MapOutcome<BellDensityMatrix>> {
    run_protocol_detailed(rho, MeasuredPair::A2B2).map(|r| r.outcome)
}

pub fn run_protocol_detailed(rho: &BellDensityMatrix, measured: MeasuredPair) -> Result<ProtocolRun> {
    let ops = LocalOperationSet::default();
    let state = FourQubitState::two_copies(rho);
    let pi = ops.bilateral_projector();
    let projected = &pi * &state.0 * pi.adjoint();
    let projected_trace = (pi.adjoint() * &pi * &state.0).trace().re;
    if !(projected_trace > DEGENERATE_TRACE) {
        return Err(Error::DegenerateNormalization {
            n: 2.0 * projected_trace,
        });
    }

    let (keep, measured_slots): (&[usize], [usize; 2]) = match measured {
        MeasuredPair::A2B2 => (&[0, 1], [2, 3]),
        MeasuredPair::A1B1 => (&[2, 3], [0, 1]),
    };

    let mut sum = CMatrix::zeros(4, 4);
    let mut branch_traces = [[0.0; 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            // |jk⟩⟨jk| on the measured pair, identity elsewhere.
            let mut factors = [identity2(), identity2(), identity2(), identity2()];
            factors[measured_slots[0]] = projector_bit(j);
            factors[measured_slots[1]] = projector_bit(k);
            let p = factors.iter().skip(1).fold(factors[0].clone(), |acc, f| kron(&acc, f));
            let reduced = partial_trace(&(p * &projected), keep)?;
            branch_traces[j][k] = reduced.trace().re;
            let gate = kron(&ops.v[j], &ops.v[(k + 1) % 2]);
            sum += &gate * reduced * gate.adjoint();
        }
    }
    let total = sum.trace().re;
    let bell = computational_to_bell(&to_matrix4(&(sum / cx(total, 0.0))));
    let state = BellDensityMatrix::new(bell)?;
    Ok(ProtocolRun {
        outcome: MapOutcome {
            state,
            success_probability: projected_trace,
            normalization: 2.0 * projected_trace,
        },
        projected_trace,
        branch_traces,
    })
}

/// Entrywise max deviation between two Bell-basis matrices.
pub fn max_entry_deviation(a: &Matrix4c, b: &Matrix4c) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `ρ ⊗ σ` helper for tests and tools.
pub fn product_state(rho: &Matrix4c, sigma: &Matrix4c) -> FourQubitState {
    FourQubitState(kron(&to_dmatrix(rho), &to_dmatrix(sigma)))
}

/// Converts a Bell-basis matrix to the computational basis as a dynamic matrix.
pub fn computational(m: &Matrix4c) -> CMatrix {
    to_dmatrix(&bell_matrix_to_computational(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{random_density, StateKind};
    use crate::map::apply_general;

    #[test]
    fn kron_of_identities() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));
    }

    #[test]
    fn transposition_is_an_involution() {
        let m = FourQubitState::two_copies(&random_density(3, StateKind::General)).0;
        let p = permute_qubits(&m, &[0, 2, 1, 3]).unwrap();
        assert_ne!(p, m);
        assert_eq!(permute_qubits(&p, &[0, 2, 1, 3]).unwrap(), m);
        let cyc = [1, 2, 3, 0];
        let inv = [3, 0, 1, 2];
        let back = permute_qubits(&permute_qubits(&m, &cyc).unwrap(), &inv).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn permutation_moves_a_local_operator() {
        // X on qubit 0 of a 2-qubit register becomes X on qubit 1 after swap.
        let sx = CMatrix::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)]);
        let i2 = CMatrix::identity(2, 2);
        let swapped = permute_qubits(&kron(&sx, &i2), &[1, 0]).unwrap();
        assert_eq!(swapped, kron(&i2, &sx));
    }

    #[test]
    fn bad_permutations_and_dimensions_are_rejected() {
        let m = CMatrix::identity(16, 16);
        assert!(permute_qubits(&m, &[0, 0, 1, 2]).is_err());
        assert!(permute_qubits(&m, &[0, 1, 2]).is_err());
        assert!(partial_trace(&m, &[5]).is_err());
        assert!(partial_trace(&CMatrix::identity(3, 3), &[0]).is_err());
        assert!(permute_qubits(&CMatrix::zeros(4, 2), &[0, 1]).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = random_density(11, StateKind::General).to_computational();
        let sigma = random_density(12, StateKind::General).to_computational() * cx(3.0, 0.0);
        let big = product_state(&rho, &sigma);
        let reduced = partial_trace(&big.0, &[0, 1]).unwrap();
        let want = to_dmatrix(&rho) * cx(3.0, 0.0);
        assert!((reduced - want).camax() < 1e-14);
        let other = partial_trace(&big.0, &[2, 3]).unwrap();
        assert!((other - to_dmatrix(&sigma)).camax() < 1e-14);
    }

    #[test]
    fn local_operations_have_their_algebra() {
        let ops = LocalOperationSet::default();
        let m = &ops.m_local;
        assert!((m * m - m).camax() < 1e-15);
        assert!((m.adjoint() - m).camax() < 1e-15);
        assert!((m.trace().re - 2.0).abs() < 1e-15);
        for v in &ops.v {
            assert!((v * v.adjoint() - CMatrix::identity(2, 2)).camax() < 1e-15);
        }
        let pi = ops.bilateral_projector();
        assert!((pi.adjoint() - &pi).camax() < 1e-13);
        assert!((&pi * &pi - &pi).camax() < 1e-13);
    }

    #[test]
    fn psi_minus_round() {
        let out = run_protocol(&BellDensityMatrix::bell(Bell::PsiMinus)).unwrap();
        assert!(max_entry_deviation(out.state.matrix(), BellDensityMatrix::bell(Bell::PsiMinus).matrix()) < 1e-14);
        assert!((out.success_probability - 0.5).abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_round() {
        let out = run_protocol(&BellDensityMatrix::maximally_mixed()).unwrap();
        assert!(max_entry_deviation(out.state.matrix(), BellDensityMatrix::maximally_mixed().matrix()) < 1e-14);
        assert!((out.success_probability - 0.25).abs() < 1e-14);
    }

    #[test]
    fn agrees_with_closed_form() {
        for seed in 0..200 {
            let rho = random_density(seed, StateKind::General);
            let sim = run_protocol(&rho).unwrap();
            let closed = apply_general(&rho).unwrap();
            assert!(max_entry_deviation(sim.state.matrix(), closed.density().matrix()) < 1e-10);
            assert!((sim.success_probability - closed.success_probability).abs() < 1e-10);
        }
    }

    #[test]
    fn branches_are_complete_and_pair_choice_is_free() {
        for seed in 0..100 {
            let rho = random_density(1000 + seed, StateKind::General);
            let a = run_protocol_detailed(&rho, MeasuredPair::A2B2).unwrap();
            let b = run_protocol_detailed(&rho, MeasuredPair::A1B1).unwrap();
            let sum: f64 = a.branch_traces.iter().flatten().sum();
            assert!((sum - a.projected_trace).abs() < 1e-12);
            assert!(max_entry_deviation(a.outcome.state.matrix(), b.outcome.state.matrix()) < 1e-10);
        }
    }

    #[test]
    fn degenerate_input_is_reported() {
        let mut m = Matrix4c::zeros();
        for (i, j) in [(2, 2), (3, 3), (2, 3), (3, 2)] {
            m[(i, j)] = cx(0.5, 0.0);
        }
        let rho = BellDensityMatrix::new(m).unwrap();
        assert!(matches!(run_protocol(&rho), Err(Error::DegenerateNormalization { .. })));
    }
}
