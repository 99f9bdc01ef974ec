//! Distinguishability measures and entanglement detection.
//!
//! - Uhlmann fidelity F(ρ, σ) = (Tr √(√σ ρ √σ))², with the ⟨ψ|ρ|ψ⟩ shortcut
//!   when σ is pure.
//! - Purified distance P(ρ, σ) = √(1 − F(ρ, σ)).
//! - Max-relative entropy D_max(ρ‖σ) = log₂ ‖σ^{−1/2} ρ σ^{−1/2}‖_∞ on supp σ,
//!   with a feasibility probe min-eig(2^λ σ − ρ) ≥ −tol as its independent check.
//! - Von Neumann and conditional entropies, and the partial-transpose witness.

use std::fmt;

use crate::error::{Error, Result};
use crate::qmat::{hermitian_eig, hermitian_eigvals, ComplexMatrix, DensityOperator, PureState};

/// Tolerance used by [`dmax_feasibility_check`].
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Absolute support-leak threshold Tr[(I − Π_σ) ρ] for D_max finiteness.
const SUPPORT_LEAK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Fidelity(pub f64);

impl Fidelity {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn purified_distance(self) -> PurifiedDistance {
        PurifiedDistance((1.0 - self.0).max(0.0).sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PurifiedDistance(pub f64);

impl PurifiedDistance {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// D_max in bits; infinite when supp ρ ⊄ supp σ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaxRelEntropy {
    Finite(f64),
    Infinite,
}

impl MaxRelEntropy {
    pub fn is_finite(self) -> bool {
        matches!(self, MaxRelEntropy::Finite(_))
    }

    /// Bits, or +∞.
    pub fn value(self) -> f64 {
        match self {
            MaxRelEntropy::Finite(v) => v,
            MaxRelEntropy::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            MaxRelEntropy::Finite(v) => Some(v),
            MaxRelEntropy::Infinite => None,
        }
    }
}

impl fmt::Display for MaxRelEntropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxRelEntropy::Finite(v) => write!(f, "{v}"),
            MaxRelEntropy::Infinite => f.write_str("inf"),
        }
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            actual: b,
        });
    }
    Ok(())
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// (Tr √(S ρ S))² for a precomputed S = √σ.
pub fn fidelity_with_sqrt(rho: &ComplexMatrix, sqrt_sigma: &ComplexMatrix) -> Result<Fidelity> {
    same_dim(rho.rows(), sqrt_sigma.rows())?;
    let inner = sqrt_sigma.matmul(rho).matmul(sqrt_sigma).hermitian_part();
    let values = hermitian_eigvals(&inner)?;
    // eigenvalues at round-off scale would each add ~1e-8 after the square root
    let top = values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let floor = values.len() as f64 * f64::EPSILON * top;
    let root_trace: f64 = values
        .iter()
        .filter(|&&l| l > floor)
        .map(|&l| l.sqrt())
        .sum();
    Ok(Fidelity(clamp_unit(root_trace * root_trace)))
}

/// ⟨ψ|ρ|ψ⟩
pub fn fidelity_with_pure(rho: &DensityOperator, psi: &PureState) -> Result<Fidelity> {
    same_dim(rho.dim(), psi.dim())?;
    Ok(Fidelity(clamp_unit(rho.matrix().expectation(psi.amplitudes()))))
}

/// Uhlmann fidelity between two states of equal total dimension.
pub fn uhlmann_fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<Fidelity> {
    same_dim(rho.dim(), sigma.dim())?;
    let eig = hermitian_eig(sigma.matrix())?;
    let cutoff = eig.support_cutoff();
    let n = eig.values.len();
    let rank = eig.values.iter().filter(|&&l| l > cutoff).count();
    if rank == 1 {
        // Pure σ = λ|v⟩⟨v| with λ = 1 up to round-off.
        let v: Vec<_> = (0..n).map(|r| eig.vectors[(r, n - 1)]).collect();
        let f = rho.matrix().expectation(&v) * eig.values[n - 1];
        return Ok(Fidelity(clamp_unit(f)));
    }
    let sqrt_sigma = eig.map_spectrum(|l| if l > cutoff { l.sqrt() } else { 0.0 });
    fidelity_with_sqrt(rho.matrix(), &sqrt_sigma)
}

pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<PurifiedDistance> {
    Ok(uhlmann_fidelity(rho, sigma)?.purified_distance())
}

/// Max-relative entropy via the largest eigenvalue of σ^{−1/2} ρ σ^{−1/2} on supp σ.
pub fn dmax(rho: &DensityOperator, sigma: &DensityOperator) -> Result<MaxRelEntropy> {
    dmax_matrices(rho.matrix(), sigma.matrix())
}

pub(crate) fn dmax_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<MaxRelEntropy> {
    same_dim(rho.rows(), sigma.rows())?;
    let eig = hermitian_eig(sigma)?;
    let cutoff = eig.support_cutoff();
    let projector = eig.map_spectrum(|l| if l > cutoff { 1.0 } else { 0.0 });
    let leak = rho.trace().re - projector.matmul(rho).trace().re;
    if leak >= SUPPORT_LEAK_TOL {
        return Ok(MaxRelEntropy::Infinite);
    }
    let w = eig.map_spectrum(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 });
    let sandwiched = w.matmul(rho).matmul(&w).hermitian_part();
    let top = hermitian_eigvals(&sandwiched)?
        .last()
        .copied()
        .unwrap_or(0.0);
    Ok(MaxRelEntropy::Finite(top.log2().max(0.0)))
}

/// True iff ρ ≤ 2^λ σ, probed as min-eig(2^λ σ − ρ) ≥ −tol.
pub fn dmax_feasibility_check(rho: &DensityOperator, sigma: &DensityOperator, lambda: f64) -> Result<bool> {
    same_dim(rho.dim(), sigma.dim())?;
    let gap = &sigma.matrix().scale(lambda.exp2()) - rho.matrix();
    let min = hermitian_eigvals(&gap.hermitian_part())?[0];
    Ok(min >= -FEASIBILITY_TOL)
}

/// −Σ λ log₂ λ over eigenvalues above the support cutoff, in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    entropy_of_matrix(rho.matrix())
}

pub(crate) fn entropy_of_matrix(m: &ComplexMatrix) -> Result<f64> {
    let vals = hermitian_eigvals(m)?;
    let max = vals.iter().copied().fold(0.0, f64::max);
    let cutoff = crate::qmat::SUPPORT_TOL * max;
    let h: f64 = vals
        .iter()
        .filter(|&&l| l > cutoff)
        .map(|&l| -l * l.log2())
        .sum();
    Ok(h.max(0.0))
}

fn bipartite(rho: &DensityOperator) -> Result<()> {
    if rho.dims().len() != 2 {
        return Err(Error::NotBipartite(rho.dims().len()));
    }
    Ok(())
}

/// H(A|B) = H(ρ_AB) − H(ρ_B) in bits.
pub fn conditional_entropy(rho_ab: &DensityOperator) -> Result<f64> {
    bipartite(rho_ab)?;
    let h_ab = von_neumann_entropy(rho_ab)?;
    let h_b = von_neumann_entropy(&rho_ab.partial_trace(&[1])?)?;
    Ok(h_ab - h_b)
}

/// Smallest eigenvalue of the partial transpose on B; negative certifies entanglement
/// (and, for 2×2 and 2×3, is equivalent to it).
pub fn ppt_min_eigenvalue(rho_ab: &DensityOperator) -> Result<f64> {
    bipartite(rho_ab)?;
    let pt = rho_ab.partial_transpose(1)?;
    Ok(hermitian_eigvals(&pt)?[0])
}
