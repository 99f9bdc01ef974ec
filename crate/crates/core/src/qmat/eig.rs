//! Hermitian eigendecomposition and the spectral functions built on it
//! (square roots, support projectors).
//!
//! Small matrices go through cyclic complex Jacobi rotations. Above
//! `JACOBI_MAX_DIM` the Householder/QL solver from nalgebra is used instead,
//! since Jacobi sweeps cost seconds at order 256.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Relative threshold separating genuine zero eigenvalues from round-off.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Off-diagonal Frobenius norm (relative) at which Jacobi sweeps stop.
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Largest order handled by Jacobi.
pub const JACOBI_MAX_DIM: usize = 32;

/// Absolute Hermiticity tolerance scaled by the largest entry.
pub(crate) fn hermitian_tol(m: &ComplexMatrix) -> f64 {
    let scale = m.as_slice().iter().map(|z| z.norm()).fold(1.0, f64::max);
    1e-9 * scale
}

/// Eigenvalues (ascending) with the unitary whose columns are the matching eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    /// V diag(f(λ)) V†.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let weights: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = v[(i, k)] * w;
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Absolute cutoff below which eigenvalues count as zero.
    pub fn support_cutoff(&self) -> f64 {
        SUPPORT_TOL * self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Diagonalizes a Hermitian matrix: m = V diag(λ) V†, λ ascending.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    let (values, vectors) = if m.rows() > JACOBI_MAX_DIM {
        tridiagonal(m, true)?
    } else {
        jacobi(m, true)?
    };
    Ok(HermitianEig {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Eigenvalues only (ascending).
pub fn hermitian_eigvals(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.rows() > JACOBI_MAX_DIM {
        Ok(tridiagonal(m, false)?.0)
    } else {
        Ok(jacobi(m, false)?.0)
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let dev = m.hermitian_deviation();
    if dev > hermitian_tol(m) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

type Spectrum = (Vec<f64>, Option<ComplexMatrix>);

fn tridiagonal(m: &ComplexMatrix, want_vectors: bool) -> Result<Spectrum> {
    check_hermitian(m)?;
    let n = m.rows();
    let a = nalgebra::DMatrix::from_row_slice(n, n, m.hermitian_part().as_slice());
    if !want_vectors {
        let mut values: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        return Ok((values, None));
    }
    let eig = nalgebra::SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, dst)] = eig.eigenvectors[(r, src)];
        }
    }
    Ok((values, Some(vectors)))
}

fn jacobi(m: &ComplexMatrix, want_vectors: bool) -> Result<Spectrum> {
    check_hermitian(m)?;
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let total = a.frobenius_norm();
    let target = JACOBI_TOL * total;

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, v.as_mut(), p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.map(|v| {
        let mut sorted = ComplexMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            for r in 0..n {
                sorted[(r, dst)] = v[(r, src)];
            }
        }
        sorted
    });
    Ok((values, vectors))
}

/// One complex Jacobi rotation annihilating a[p][q]: a ← G† a G, v ← v G with
/// G = [[c, s e^{iφ}], [−s e^{−iφ}, c]] on the (p, q) plane, φ = arg a[p][q].
fn rotate(a: &mut ComplexMatrix, v: Option<&mut ComplexMatrix>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Negligible against both diagonal entries: skip, as in the classical threshold strategy.
    if mag < 1e-300 || (app.abs() + mag == app.abs() && aqq.abs() + mag == aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = apq / mag;
    let s_ph = phase * s; // s e^{iφ}
    let s_ph_conj = s_ph.conj(); // s e^{−iφ}
    let n = a.rows();

    // a ← a G (columns p, q).
    for r in 0..n {
        let ap = a[(r, p)];
        let aq = a[(r, q)];
        a[(r, p)] = ap * c - aq * s_ph_conj;
        a[(r, q)] = ap * s_ph + aq * c;
    }
    // a ← G† a (rows p, q).
    for r in 0..n {
        let ap = a[(p, r)];
        let aq = a[(q, r)];
        a[(p, r)] = ap * c - aq * s_ph;
        a[(q, r)] = ap * s_ph_conj + aq * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    if let Some(v) = v {
        for r in 0..n {
            let vp = v[(r, p)];
            let vq = v[(r, q)];
            v[(r, p)] = vp * c - vq * s_ph_conj;
            v[(r, q)] = vp * s_ph + vq * c;
        }
    }
}

fn check_psd(eig: &HermitianEig) -> Result<()> {
    let tol = eig.support_cutoff().max(1e-12);
    let min = eig.min_value();
    if min < -tol {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

/// Principal square root of a PSD matrix; tiny negative eigenvalues are clipped to 0.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    check_psd(&eig)?;
    Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// Moore–Penrose inverse square root restricted to the support of a PSD matrix.
pub fn pinv_sqrt_on_support(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    check_psd(&eig)?;
    let cutoff = eig.support_cutoff();
    Ok(eig.map_spectrum(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 }))
}

/// Orthogonal projector onto the support (eigenvalues above the relative cutoff).
pub fn support_projector(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let cutoff = eig.support_cutoff();
    Ok(eig.map_spectrum(|l| if l > cutoff { 1.0 } else { 0.0 }))
}
