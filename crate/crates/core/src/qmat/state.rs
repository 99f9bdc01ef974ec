use super::eig::{hermitian_eig, hermitian_tol};
use super::matrix::{tensor_vec, ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Tolerance for trace and normalization checks.
pub const STATE_TOL: f64 = 1e-9;

fn check_dims(dims: &[usize], total: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != total {
        return Err(Error::BadDims {
            dims: dims.to_vec(),
            total,
        });
    }
    Ok(())
}

/// Positive semidefinite, unit-trace operator with a subsystem dimension list.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    mat: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity and unit trace.
    pub fn new(mat: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        check_dims(&dims, mat.rows())?;
        let dev = mat.hermitian_deviation();
        if dev > hermitian_tol(&mat) {
            return Err(Error::NotHermitian(dev));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let eig = hermitian_eig(&mat)?;
        if eig.min_value() < -STATE_TOL {
            return Err(Error::NotPsd(eig.min_value()));
        }
        Ok(Self {
            mat: mat.hermitian_part(),
            dims,
        })
    }

    /// Skips the spectral check; for operators that are states by construction.
    pub(crate) fn new_unchecked(mat: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mat.rows());
        Self { mat, dims }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self::new_unchecked(ComplexMatrix::identity(d).scale(1.0 / d as f64), dims)
    }

    /// Diagonal state in the computational basis.
    pub fn diagonal(probs: &[f64], dims: Vec<usize>) -> Result<Self> {
        Self::new(ComplexMatrix::from_diag(probs), dims)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Same operator under a different factorization of its dimension.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        Ok(Self { dims, ..self })
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        Self::new_unchecked(self.mat.kron(&other.mat), dims)
    }

    /// ρ^{⊗n}
    pub fn tensor_power(&self, n: usize) -> Self {
        assert!(n >= 1);
        (1..n).fold(self.clone(), |acc, _| acc.tensor(self))
    }

    /// Convex combination w·self + (1 − w)·other.
    pub fn mix(&self, w: f64, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::OutOfRange {
                name: "weight",
                value: w,
                domain: "[0, 1]",
            });
        }
        let mat = &self.mat.scale(w) + &other.mat.scale(1.0 - w);
        Ok(Self::new_unchecked(mat, self.dims.clone()))
    }

    pub fn purity(&self) -> f64 {
        self.mat.matmul(&self.mat).trace().re
    }

    /// Trace over every subsystem not listed in `keep` (kept in ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        partial_trace(self, keep)
    }

    /// Transpose on subsystem `sub`.
    pub fn partial_transpose(&self, sub: usize) -> Result<ComplexMatrix> {
        partial_transpose(&self.mat, &self.dims, sub)
    }
}

/// Unit vector with a subsystem dimension list.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes, dims })
    }

    pub(crate) fn new_unchecked(amplitudes: Vec<C64>, dims: Vec<usize>) -> Self {
        Self { amplitudes, dims }
    }

    /// Computational basis vector |index⟩.
    pub fn basis(index: usize, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if index >= d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: index,
            });
        }
        let mut amps = vec![ZERO; d];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(amps, dims)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            amplitudes: tensor_vec(&self.amplitudes, &other.amplitudes),
            dims: self.dims.iter().chain(&other.dims).copied().collect(),
        }
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |ψ⟩⟨ψ| as a density operator.
    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::new_unchecked(
            ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
            self.dims.clone(),
        )
    }
}

/// φ⁺_d = (1/√d) Σ_i |ii⟩ on dims [d, d].
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::OutOfRange {
            name: "d",
            value: d as f64,
            domain: "d >= 2",
        });
    }
    let mut amps = vec![ZERO; d * d];
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        amps[i * d + i] = C64::new(a, 0.0);
    }
    Ok(PureState::new_unchecked(amps, vec![d, d]))
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat offsets of every multi-index over the chosen subsystems.
fn offsets(dims: &[usize], strides: &[usize], subs: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in subs {
        out = out
            .iter()
            .flat_map(|&base| (0..dims[s]).map(move |i| base + i * strides[s]))
            .collect();
    }
    out
}

/// Trace over the complement of `keep`; kept subsystems stay in ascending order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let dims = rho.dims();
    let n = dims.len();
    if keep.is_empty() {
        return Err(Error::SubsystemOutOfRange { index: 0, count: 0 });
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::SubsystemOutOfRange {
            index: bad,
            count: n,
        });
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let st = strides(dims);
    let kept_off = offsets(dims, &st, &keep);
    let traced_off = offsets(dims, &st, &traced);
    let dk = kept_off.len();
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for (r, &ro) in kept_off.iter().enumerate() {
        for (c, &co) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += m[(ro + t, co + t)];
            }
            out[(r, c)] = acc;
        }
    }
    let kept_dims = keep.iter().map(|&k| dims[k]).collect();
    Ok(DensityOperator::new_unchecked(out, kept_dims))
}

/// Reduced state of a pure vector on the `keep` subsystems, Ψ Ψ† without forming |ψ⟩⟨ψ|.
pub fn reduce_pure(psi: &PureState, keep: &[usize]) -> Result<DensityOperator> {
    let dims = psi.dims();
    let n = dims.len();
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::SubsystemOutOfRange {
            index: bad,
            count: n,
        });
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let st = strides(dims);
    let kept_off = offsets(dims, &st, &keep);
    let traced_off = offsets(dims, &st, &traced);
    let a = psi.amplitudes();
    let dk = kept_off.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for &t in &traced_off {
        for (r, &ro) in kept_off.iter().enumerate() {
            let x = a[ro + t];
            if x == ZERO {
                continue;
            }
            for (c, &co) in kept_off.iter().enumerate() {
                out[(r, c)] += x * a[co + t].conj();
            }
        }
    }
    let kept_dims = keep.iter().map(|&k| dims[k]).collect();
    Ok(DensityOperator::new_unchecked(out, kept_dims))
}

/// Transpose of the `sub` tensor factor of an operator on `dims`.
pub fn partial_transpose(m: &ComplexMatrix, dims: &[usize], sub: usize) -> Result<ComplexMatrix> {
    if sub >= dims.len() {
        return Err(Error::SubsystemOutOfRange {
            index: sub,
            count: dims.len(),
        });
    }
    check_dims(dims, m.rows())?;
    let st = strides(dims);
    let d = m.rows();
    let (ds, ss) = (dims[sub], st[sub]);
    let mut out = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        let ri = (r / ss) % ds;
        for c in 0..d {
            let ci = (c / ss) % ds;
            // swap the `sub` digit between row and column
            let r2 = r - ri * ss + ci * ss;
            let c2 = c - ci * ss + ri * ss;
            out[(r2, c2)] = m[(r, c)];
        }
    }
    Ok(out)
}
