use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::eig::{hermitian_eigvals, SUPPORT_TOL};
use super::matrix::{ComplexMatrix, C64};
use super::state::DensityOperator;
use crate::error::{Error, Result};

const MAX_ATTEMPTS: usize = 100;

/// Independent generator for task `index` of a run seeded with `seed`.
///
/// Streams are keyed by index, so results do not depend on task scheduling.
pub fn task_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Ginibre-ensemble state G G† / Tr[G G†] with every eigenvalue above the support cutoff.
pub fn random_full_rank_state<R: Rng + ?Sized>(
    d: usize,
    dims: Vec<usize>,
    rng: &mut R,
) -> Result<DensityOperator> {
    if d < 2 {
        return Err(Error::OutOfRange {
            name: "d",
            value: d as f64,
            domain: "d >= 2",
        });
    }
    for _ in 0..MAX_ATTEMPTS {
        let entries: Vec<C64> = (0..d * d)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let g = ComplexMatrix::from_vec(d, d, entries)?;
        let mut rho = g.matmul(&g.adjoint());
        let tr = rho.trace().re;
        rho = rho.scale(1.0 / tr).hermitian_part();
        let vals = hermitian_eigvals(&rho)?;
        let max = vals[d - 1];
        if vals[0] > SUPPORT_TOL * max {
            return DensityOperator::new_unchecked(rho, vec![d]).with_dims(dims);
        }
    }
    Err(Error::SamplingFailed(MAX_ATTEMPTS))
}
