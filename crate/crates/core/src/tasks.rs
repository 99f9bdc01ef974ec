//! Applications: catalytic superdense coding and long-distance entanglement
//! distribution through a depolarizing line.

use num_complex::Complex64;

use crate::channels::{choi, depolarizing_length};
use crate::convexsplit::n_min_random;
use crate::distinguish::{conditional_entropy, ppt_min_eigenvalue};
use crate::embezzle::{harmonic, required_schmidt_rank};
use crate::error::{check_range, Error, Result};
use crate::exec::Exec;
use crate::qmat::{max_entangled, ComplexMatrix, DensityOperator};

/// Dense-coding capacity log₂ d − H(A|B) in bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdcCapacity {
    pub value: f64,
    pub d: usize,
    pub conditional_entropy: f64,
}

pub fn sdc_capacity(rho_ab: &DensityOperator) -> Result<SdcCapacity> {
    let d = match rho_ab.dims() {
        [a, b] if a == b => *a,
        dims => {
            return Err(Error::BadDims {
                dims: dims.to_vec(),
                total: rho_ab.dim(),
            })
        }
    };
    let h = conditional_entropy(rho_ab)?;
    Ok(SdcCapacity {
        value: (d as f64).log2() - h,
        d,
        conditional_entropy: h,
    })
}

/// AB marginal left by the embezzling protocol with target rank d and catalyst rank M:
/// (1/c_M) Σ_{i,j} Σ_{k=0}^{K} ((i+kd)(j+kd))^{−1/2} |ii⟩⟨jj| with K = ⌊(M − max(i,j))/d⌋.
pub fn catalytic_sdc_state(d: usize, rank: usize) -> Result<DensityOperator> {
    check_range("d", d as f64, d >= 2, ">= 2")?;
    check_range("M", rank as f64, rank >= d, ">= d")?;
    let c = harmonic(rank);
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 1..=d {
        for j in 1..=d {
            let top = (rank - i.max(j)) / d;
            let v: f64 = (0..=top)
                .map(|k| 1.0 / (((i + k * d) * (j + k * d)) as f64).sqrt())
                .sum();
            m[((i - 1) * (d + 1), (j - 1) * (d + 1))] = Complex64::new(v / c, 0.0);
        }
    }
    DensityOperator::new(m, vec![d, d])
}

fn check_alpha(alpha: f64) -> Result<()> {
    check_range("alpha", alpha, alpha > 0.0 && alpha.is_finite(), "(0, inf)")
}

/// (ln 3)/α: distance beyond which φ⁺₂ sent through the line stays separable.
pub fn distribution_threshold_bare(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(3f64.ln() / alpha)
}

/// Smallest PPT eigenvalue of (id ⊗ N_l)(φ⁺₂).
pub fn line_ppt_witness(alpha: f64, length: f64) -> Result<f64> {
    ppt_min_eigenvalue(&choi(&depolarizing_length(alpha, length)?)?)
}

/// Bisection for the length where the PPT witness of the transmitted φ⁺₂ crosses zero,
/// stopped at relative width `rel_tol`.
pub fn distribution_threshold_ppt(alpha: f64, rel_tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_range("rel_tol", rel_tol, rel_tol > 0.0, "> 0")?;
    let mut lo = 0.0;
    let mut hi = 1.0 / alpha;
    while line_ppt_witness(alpha, hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoConvergence(0));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if line_ppt_witness(alpha, mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_tol * lo.max(f64::MIN_POSITIVE) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NoConvergence(200))
}

/// Alice at 0, a relay at s, Bob at l along a line with loss rate α.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributionScenario {
    pub alpha: f64,
    pub l: f64,
    pub s: f64,
}

impl DistributionScenario {
    pub fn new(alpha: f64, l: f64, s: f64) -> Result<Self> {
        check_range("alpha", alpha, alpha >= 0.0 && alpha.is_finite(), "[0, inf)")?;
        check_range("l", l, l >= 0.0 && l.is_finite(), "[0, inf)")?;
        check_range("s", s, (0.0..=l).contains(&s), "[0, l]")?;
        Ok(Self { alpha, l, s })
    }

    /// e^{−αs}
    pub fn transmission(&self) -> f64 {
        (-self.alpha * self.s).exp()
    }

    /// ρ_AR = e^{−αs}φ⁺ + (1 − e^{−αs}) I/4.
    pub fn relay_state(&self) -> Result<DensityOperator> {
        let phi = max_entangled(2)?.to_density();
        phi.mix(self.transmission(), &DensityOperator::maximally_mixed(vec![2, 2]))
    }
}

/// Settings for the catalyst-size comparison at the relay.
#[derive(Clone, Copy, Debug)]
pub struct CatalystTarget {
    /// The protocols aim for output fidelity 1 − ε.
    pub epsilon: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for CatalystTarget {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            sample_count: 200,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

/// Catalyst sizes needed to deliver one ebit from the relay state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatalystRequirement {
    /// Best copy count over I/4 and the random candidates.
    pub convex_split_copies: u64,
    /// log₂ of the catalyst dimension 4^{n−1}.
    pub convex_split_log2_dim: f64,
    pub embezzle_rank: u64,
    /// log₂ of the catalyst dimension M².
    pub embezzle_log2_dim: f64,
    /// Qubits delivered by the embezzling protocol.
    pub embezzle_capacity: f64,
}

#[derive(Clone, Debug)]
pub struct DistributionProfile {
    pub scenario: DistributionScenario,
    pub state: DensityOperator,
    pub ppt_witness: f64,
    pub catalysts: Option<CatalystRequirement>,
}

/// Relay state and PPT witness; with a target, also the catalyst sizes for both protocols.
pub fn distribution_entanglement_profile(
    scenario: DistributionScenario,
    target: Option<CatalystTarget>,
) -> Result<DistributionProfile> {
    let state = scenario.relay_state()?;
    let ppt_witness = ppt_min_eigenvalue(&state)?;
    let catalysts = match target {
        None => None,
        Some(t) => {
            let cs = n_min_random(&state, t.sample_count, t.epsilon, t.seed, t.exec)?;
            let rank = required_schmidt_rank(2, t.epsilon)?;
            Some(CatalystRequirement {
                convex_split_copies: cs.n_best,
                convex_split_log2_dim: 2.0 * (cs.n_best.saturating_sub(1)) as f64,
                embezzle_rank: rank,
                embezzle_log2_dim: 2.0 * (rank as f64).log2(),
                embezzle_capacity: 1.0,
            })
        }
    };
    Ok(DistributionProfile {
        scenario,
        state,
        ppt_witness,
        catalysts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embezzle::{protocol_state_ab, DEFAULT_EMBEZZLE_BUDGET};

    #[test]
    fn sdc_examples() {
        let phi = max_entangled(2).unwrap().to_density();
        assert!((sdc_capacity(&phi).unwrap().value - 2.0).abs() < 1e-10);
        let mm = DensityOperator::maximally_mixed(vec![2, 2]);
        assert!(sdc_capacity(&mm).unwrap().value.abs() < 1e-10);
        let zero = DensityOperator::diagonal(&[1.0, 0.0, 0.0, 0.0], vec![2, 2]).unwrap();
        assert!((sdc_capacity(&zero).unwrap().value - 1.0).abs() < 1e-10);
        let bad = DensityOperator::maximally_mixed(vec![2, 3]);
        assert!(sdc_capacity(&bad).is_err());
    }

    #[test]
    fn sdc_state_two_by_two() {
        let rho = catalytic_sdc_state(2, 2).unwrap();
        let c = 1.5;
        let m = rho.matrix();
        assert!((m[(0, 0)].re - 1.0 / c).abs() < 1e-15);
        assert!((m[(0, 3)].re - 1.0 / (2f64.sqrt() * c)).abs() < 1e-15);
        assert!((m[(3, 3)].re - 0.5 / c).abs() < 1e-15);
        assert!((m.trace().re - 1.0).abs() < 1e-12);
        assert!(catalytic_sdc_state(3, 2).is_err());
    }

    #[test]
    fn sdc_state_matches_protocol_marginal() {
        for d in 2..=4 {
            for rank in [d, d + 1, d + 2, 3 * d + 1, 17] {
                let closed = catalytic_sdc_state(d, rank).unwrap();
                let oracle = protocol_state_ab(d, rank, DEFAULT_EMBEZZLE_BUDGET).unwrap();
                assert!(
                    closed.matrix().max_abs_diff(oracle.matrix()) < 1e-12,
                    "d={d} M={rank}"
                );
            }
        }
    }

    #[test]
    fn sdc_capacity_grows_with_rank() {
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=10 {
            let cap = sdc_capacity(&catalytic_sdc_state(2, 1 << k).unwrap()).unwrap().value;
            assert!(cap >= prev - 1e-12);
            assert!((0.0..=2.0 + 1e-9).contains(&cap));
            prev = cap;
        }
        assert!(prev >= 1.95);
    }

    #[test]
    fn bare_threshold_examples() {
        assert!((distribution_threshold_bare(3f64.ln()).unwrap() - 1.0).abs() < 1e-15);
        assert!((distribution_threshold_bare(0.01).unwrap() - 109.86122886681098).abs() < 1e-9);
        assert!(distribution_threshold_bare(0.0).is_err());
    }

    #[test]
    fn ppt_threshold_matches_closed_form() {
        for alpha in [0.005, 0.01, 0.05, 1.0] {
            let found = distribution_threshold_ppt(alpha, 1e-9).unwrap();
            let want = distribution_threshold_bare(alpha).unwrap();
            assert!(((found - want) / want).abs() < 1e-6, "alpha={alpha}");
        }
    }

    #[test]
    fn profile_examples() {
        let at_start = distribution_entanglement_profile(
            DistributionScenario::new(0.01, 200.0, 0.0).unwrap(),
            None,
        )
        .unwrap();
        assert!((at_start.ppt_witness + 0.5).abs() < 1e-12);
        let phi = max_entangled(2).unwrap().to_density();
        assert!(at_start.state.matrix().max_abs_diff(phi.matrix()) < 1e-15);

        let edge = DistributionScenario::new(0.01, 200.0, 3f64.ln() / 0.01).unwrap();
        let p = distribution_entanglement_profile(edge, None).unwrap();
        assert!(p.ppt_witness.abs() < 1e-12);
        assert!(DistributionScenario::new(0.01, 1.0, 2.0).is_err());
    }

    #[test]
    fn witness_decreasing_in_transmission() {
        let mut prev = f64::NEG_INFINITY;
        let mut crossings = 0;
        for i in 0..=50 {
            let s = i as f64 * 4.0;
            let sc = DistributionScenario::new(0.01, 200.0, s).unwrap();
            let w = distribution_entanglement_profile(sc, None).unwrap().ppt_witness;
            assert!(w > prev);
            if prev < 0.0 && w >= 0.0 {
                crossings += 1;
            }
            prev = w;
        }
        assert_eq!(crossings, 1);
    }

    #[test]
    fn catalysts_beyond_correlated_limit() {
        let alpha = 0.01;
        let l = 2.2 * 3f64.ln() / alpha;
        let target = CatalystTarget {
            sample_count: 8,
            ..CatalystTarget::default()
        };
        let mut prev_cs = 0;
        for frac in [0.1, 0.25, 0.4] {
            let sc = DistributionScenario::new(alpha, l, frac * l).unwrap();
            let cat = distribution_entanglement_profile(sc, Some(target))
                .unwrap()
                .catalysts
                .unwrap();
            assert!(cat.embezzle_capacity > 0.0);
            assert!(cat.embezzle_log2_dim.is_finite());
            assert!(cat.convex_split_copies >= prev_cs);
            prev_cs = cat.convex_split_copies;
        }
    }
}
