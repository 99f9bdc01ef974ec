//! Convex-split catalysts.
//!
//! For states ρ, τ with k = D_max(ρ‖τ) finite, the uniform mixture
//!
//! ```text
//! μ = (1/n) Σ_i τ ⊗ … ⊗ ρ (slot i) ⊗ … ⊗ τ
//! ```
//!
//! satisfies P(μ, τ^{⊗n}) ≤ √(2^k / n). Taking ρ to be a channel's Choi
//! state and τ = pφ⁺ + (1 − p)ζ gives a catalyst τ^{⊗(n−1)} whose copy count
//! is controlled by k; this module builds μ densely for verification, evaluates
//! the copy-count formulas, and searches the family {pφ⁺ + (1 − p)ζ} for the
//! smallest admissible n.

use rand::Rng;

use crate::distinguish::{dmax, dmax_matrices, fidelity_with_pure, fidelity_with_sqrt};
use crate::error::{check_range, Error, Result};
use crate::exec::Exec;
use crate::qmat::{
    matrix_sqrt_psd, max_entangled, random_full_rank_state, task_rng, ComplexMatrix,
    DensityOperator, SUPPORT_TOL,
};

/// Default cap on the total dimension of densely built states.
pub const DEFAULT_DENSE_BUDGET: usize = 4096;

/// Grid spacing over p ∈ [0, 1).
pub const P_GRID_STEP: f64 = 1e-3;

const GOLDEN_ITERS: usize = 60;

/// A member of the family τ = pφ⁺_d + (1 − p)ζ with ζ full rank.
#[derive(Clone, Debug)]
pub struct TauFamilyPoint {
    pub p: f64,
    pub zeta: DensityOperator,
    pub tau: DensityOperator,
}

impl TauFamilyPoint {
    pub fn new(p: f64, zeta: &DensityOperator) -> Result<Self> {
        check_range("p", p, (0.0..1.0).contains(&p), "[0, 1)")?;
        let d = local_dim(zeta)?;
        let phi = max_entangled(d)?.to_density();
        let tau = phi.mix(p, zeta)?;
        let min = crate::qmat::hermitian_eigvals(tau.matrix())?[0];
        if min <= SUPPORT_TOL * tau.matrix().frobenius_norm() {
            return Err(Error::NotPsd(min));
        }
        Ok(Self {
            p,
            zeta: zeta.clone(),
            tau,
        })
    }
}

/// Copy count n together with the D_max value k it was derived from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CopyBudget {
    pub n: u64,
    pub k: f64,
}

fn local_dim(state: &DensityOperator) -> Result<usize> {
    match state.dims() {
        [a, b] if a == b => Ok(*a),
        dims => Err(Error::BadDims {
            dims: dims.to_vec(),
            total: state.dim(),
        }),
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    check_range("epsilon", epsilon, epsilon > 0.0 && epsilon < 1.0, "(0, 1)")
}

/// μ = (1/n) Σ_i τ^{⊗(i−1)} ⊗ ρ ⊗ τ^{⊗(n−i)}, built densely.
pub fn convex_split_state(
    rho: &DensityOperator,
    tau: &DensityOperator,
    n: usize,
    budget: usize,
) -> Result<DensityOperator> {
    if rho.dims() != tau.dims() {
        return Err(Error::DimensionMismatch {
            expected: tau.dim(),
            actual: rho.dim(),
        });
    }
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: 0.0,
            domain: ">= 1",
        });
    }
    let total = (tau.dim() as u128).pow(n as u32);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            requested: total.min(usize::MAX as u128) as usize,
            budget,
        });
    }
    // powers[j] = τ^{⊗j}, with τ^{⊗0} the 1×1 identity
    let mut powers = vec![ComplexMatrix::identity(1)];
    for j in 1..n {
        let next = powers[j - 1].kron(tau.matrix());
        powers.push(next);
    }
    let d = total as usize;
    let mut acc = ComplexMatrix::zeros(d, d);
    for i in 0..n {
        let term = powers[i].kron(rho.matrix()).kron(&powers[n - 1 - i]);
        acc = &acc + &term;
    }
    let dims = tau
        .dims()
        .iter()
        .copied()
        .cycle()
        .take(tau.dims().len() * n)
        .collect();
    Ok(DensityOperator::new_unchecked(acc.scale(1.0 / n as f64), dims))
}

/// √(2^k / n), clipped to [0, 1].
pub fn convex_split_bound(k: f64, n: u64) -> f64 {
    (k.exp2() / n as f64).sqrt().clamp(0.0, 1.0)
}

/// ⌈2^{k+2} / ε⌉: copies sufficient for error ε when P(τ, φ⁺) ≤ √ε/2.
pub fn sufficient_copies(k: f64, epsilon: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    check_range("k", k, k >= 0.0, ">= 0")?;
    Ok(((k + 2.0).exp2() / epsilon).ceil() as u64)
}

/// √(2^k / n) + P(τ, φ⁺): purified-distance bound on the protocol output; its square
/// bounds the error 1 − F.
pub fn protocol_error_bound(k: f64, n: u64, tau_phi_dist: f64) -> f64 {
    (k.exp2() / n as f64).sqrt() + tau_phi_dist
}

/// √(2^k / n): bound on how far the catalyst marginal moves.
pub fn consumption_bound_cs(k: f64, n: u64) -> f64 {
    (k.exp2() / n as f64).sqrt()
}

/// Smallest n with √(2^k / n) ≤ δ, i.e. ⌈2^k / δ²⌉.
pub fn min_copies_for_consumption(k: f64, delta: f64) -> Result<u64> {
    check_range("delta", delta, delta > 0.0, "> 0")?;
    Ok((k.exp2() / (delta * delta)).ceil().max(1.0) as u64)
}

/// Error reduction F(post, φ⁺_d) − F(choi, φ⁺_d).
pub fn delta_p_err(choi: &DensityOperator, post_state: &DensityOperator) -> Result<f64> {
    if choi.dim() != post_state.dim() {
        return Err(Error::DimensionMismatch {
            expected: choi.dim(),
            actual: post_state.dim(),
        });
    }
    let phi = max_entangled(local_dim(choi)?)?;
    Ok(fidelity_with_pure(post_state, &phi)?.value() - fidelity_with_pure(choi, &phi)?.value())
}

/// Result of checking the convex-split bound on one (ρ, τ, n).
#[derive(Clone, Copy, Debug)]
pub struct ConvexSplitCheck {
    pub n: usize,
    pub k: f64,
    /// P(μ, τ^{⊗n}) computed from the dense μ.
    pub distance: f64,
    /// √(2^k / n)
    pub bound: f64,
    /// P(Tr_1 μ, τ^{⊗(n−1)}) for n ≥ 2.
    pub consumption: Option<f64>,
}

impl ConvexSplitCheck {
    pub fn satisfied(&self, slack: f64) -> bool {
        self.distance <= self.bound + slack
            && self.consumption.is_none_or(|c| c <= self.bound + slack)
    }
}

/// Builds μ densely and measures it against τ^{⊗n}, using √(τ^{⊗n}) = (√τ)^{⊗n}.
pub fn verify_convex_split(
    rho: &DensityOperator,
    tau: &DensityOperator,
    n: usize,
    budget: usize,
) -> Result<ConvexSplitCheck> {
    let k = dmax(rho, tau)?
        .finite()
        .ok_or_else(|| Error::Infeasible("supp(rho) not contained in supp(tau)".into()))?;
    let mu = convex_split_state(rho, tau, n, budget)?;
    let sqrt_tau = matrix_sqrt_psd(tau.matrix())?;
    let sqrt_power = |copies: usize| {
        (1..copies).fold(sqrt_tau.clone(), |acc, _| acc.kron(&sqrt_tau))
    };
    let distance = fidelity_with_sqrt(mu.matrix(), &sqrt_power(n))?
        .purified_distance()
        .value();
    let consumption = if n >= 2 {
        let slot = tau.dims().len();
        let keep: Vec<usize> = (slot..slot * n).collect();
        let catalyst = mu.partial_trace(&keep)?;
        Some(
            fidelity_with_sqrt(catalyst.matrix(), &sqrt_power(n - 1))?
                .purified_distance()
                .value(),
        )
    } else {
        None
    };
    Ok(ConvexSplitCheck {
        n,
        k,
        distance,
        bound: (k.exp2() / n as f64).sqrt(),
        consumption,
    })
}

/// Optimal point of the n_min search for one ζ and ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NMin {
    /// Smallest admissible copy count (including the system slot).
    pub n: u64,
    /// Argmin p.
    pub p: f64,
    /// D_max(choi ‖ τ(p)) in bits.
    pub k: f64,
    /// F(τ(p), φ⁺).
    pub tau_fidelity: f64,
}

impl NMin {
    /// √(2^k / n) + √(1 − F(τ, φ⁺)): must not exceed √ε.
    pub fn constraint_value(&self) -> f64 {
        (self.k.exp2() / self.n as f64).sqrt() + (1.0 - self.tau_fidelity).max(0.0).sqrt()
    }
}

/// Precomputed (k(p), F(τ(p), φ⁺)) over the p grid for one Choi state and one ζ.
///
/// k does not depend on ε, so one profile serves a whole ε sweep.
#[derive(Clone, Debug)]
pub struct ZetaProfile {
    choi: ComplexMatrix,
    zeta: ComplexMatrix,
    phi: ComplexMatrix,
    /// ⟨φ⁺|ζ|φ⁺⟩
    zeta_overlap: f64,
    grid: Vec<GridPoint>,
}

#[derive(Clone, Copy, Debug)]
struct GridPoint {
    p: f64,
    k: f64,
    fidelity: f64,
}

impl ZetaProfile {
    pub fn new(choi: &DensityOperator, zeta: &DensityOperator) -> Result<Self> {
        let d = local_dim(choi)?;
        if zeta.dim() != choi.dim() {
            return Err(Error::DimensionMismatch {
                expected: choi.dim(),
                actual: zeta.dim(),
            });
        }
        let phi_state = max_entangled(d)?;
        let zeta_overlap = fidelity_with_pure(zeta, &phi_state)?.value();
        let mut profile = Self {
            choi: choi.matrix().clone(),
            zeta: zeta.matrix().clone(),
            phi: phi_state.to_density().into_matrix(),
            zeta_overlap,
            grid: Vec::new(),
        };
        let steps = (1.0 / P_GRID_STEP).round() as usize;
        profile.grid = (0..steps)
            .map(|i| {
                let p = i as f64 * P_GRID_STEP;
                profile.point(p)
            })
            .collect::<Result<_>>()?;
        Ok(profile)
    }

    fn point(&self, p: f64) -> Result<GridPoint> {
        let tau = &self.phi.scale(p) + &self.zeta.scale(1.0 - p);
        let k = dmax_matrices(&self.choi, &tau)?.value();
        Ok(GridPoint {
            p,
            k,
            fidelity: p + (1.0 - p) * self.zeta_overlap,
        })
    }

    fn required(point: &GridPoint, sqrt_eps: f64) -> f64 {
        let slack = sqrt_eps - (1.0 - point.fidelity).max(0.0).sqrt();
        if slack <= 0.0 || !point.k.is_finite() {
            f64::INFINITY
        } else {
            point.k.exp2() / (slack * slack)
        }
    }

    /// n(p) before the ceiling: 2^{k(p)} / (√ε − √(1 − F(τ(p), φ⁺)))², or +∞.
    pub fn required_copies(&self, p: f64, epsilon: f64) -> Result<f64> {
        check_epsilon(epsilon)?;
        Ok(Self::required(&self.point(p)?, epsilon.sqrt()))
    }

    /// Grid search followed by a golden-section pass on [p* − Δp, p* + Δp].
    pub fn n_min(&self, epsilon: f64) -> Result<Option<NMin>> {
        check_epsilon(epsilon)?;
        let sqrt_eps = epsilon.sqrt();
        let (best_idx, best_val) = self
            .grid
            .iter()
            .enumerate()
            .map(|(i, g)| (i, Self::required(g, sqrt_eps)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if !best_val.is_finite() {
            return Ok(None);
        }
        let mut best = self.grid[best_idx];
        let mut best_n = best_val;

        let p_last = self.grid[self.grid.len() - 1].p;
        let (mut lo, mut hi) = (
            (best.p - P_GRID_STEP).max(0.0),
            (best.p + P_GRID_STEP).min(p_last),
        );
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = self.point(x1)?;
        let mut f2 = self.point(x2)?;
        for _ in 0..GOLDEN_ITERS {
            if Self::required(&f1, sqrt_eps) <= Self::required(&f2, sqrt_eps) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.point(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.point(x2)?;
            }
        }
        for cand in [f1, f2] {
            let v = Self::required(&cand, sqrt_eps);
            if v < best_n {
                best_n = v;
                best = cand;
            }
        }
        Ok(Some(NMin {
            n: best_n.ceil().max(1.0) as u64,
            p: best.p,
            k: best.k,
            tau_fidelity: best.fidelity,
        }))
    }
}

/// n_min over S_ζ = {pφ⁺ + (1 − p)ζ : p ∈ [0, 1)}; `None` when no p is feasible.
pub fn n_min_for_zeta(
    choi: &DensityOperator,
    zeta: &DensityOperator,
    epsilon: f64,
) -> Result<Option<NMin>> {
    check_epsilon(epsilon)?;
    ZetaProfile::new(choi, zeta)?.n_min(epsilon)
}

/// Copy-count reduction of the best candidate relative to ζ = I/d².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentReport {
    /// n_min for the maximally mixed reference; `None` if infeasible.
    pub n_mm: Option<u64>,
    pub n_best: u64,
    /// Index into the candidate pool (0 is the maximally mixed reference).
    pub best_index: usize,
    /// (n_mm − n_best) / n_mm
    pub theta: Option<f64>,
    pub epsilon: f64,
    /// Number of random candidates considered.
    pub sample_count: usize,
    pub best: NMin,
}

/// A Choi state with a pool of ζ candidates: the maximally mixed state at index 0
/// followed by seeded random full-rank states.
#[derive(Clone, Debug)]
pub struct CandidatePool {
    profiles: Vec<ZetaProfile>,
    zetas: Vec<DensityOperator>,
}

impl CandidatePool {
    /// I/d² followed by `n_random` Ginibre states; candidate i ≥ 1 draws from
    /// stream i of `seed`, so pools for different sizes are nested.
    pub fn seeded(
        choi: &DensityOperator,
        n_random: usize,
        seed: u64,
        exec: Exec,
    ) -> Result<Self> {
        let d = choi.dim();
        let dims = choi.dims().to_vec();
        let mut zetas = vec![DensityOperator::maximally_mixed(dims.clone())];
        let random: Vec<Result<DensityOperator>> = exec.map(n_random, |i| {
            let mut rng = task_rng(seed, i as u64 + 1);
            random_full_rank_state(d, dims.clone(), &mut rng)
        });
        for z in random {
            zetas.push(z?);
        }
        Self::from_candidates(choi, zetas, exec)
    }

    /// Explicit candidate list; index 0 is treated as the reference.
    pub fn from_candidates(
        choi: &DensityOperator,
        zetas: Vec<DensityOperator>,
        exec: Exec,
    ) -> Result<Self> {
        if zetas.is_empty() {
            return Err(Error::Infeasible("empty candidate pool".into()));
        }
        let profiles = exec
            .map_slice(&zetas, |z| ZetaProfile::new(choi, z))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { profiles, zetas })
    }

    /// Draws extra candidates from an arbitrary generator (not stream-keyed).
    pub fn push_random<R: Rng + ?Sized>(&mut self, choi: &DensityOperator, rng: &mut R) -> Result<()> {
        let z = random_full_rank_state(choi.dim(), choi.dims().to_vec(), rng)?;
        self.profiles.push(ZetaProfile::new(choi, &z)?);
        self.zetas.push(z);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.zetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zetas.is_empty()
    }

    pub fn zeta(&self, index: usize) -> &DensityOperator {
        &self.zetas[index]
    }

    /// n_min for the reference candidate (index 0).
    pub fn reference_n_min(&self, epsilon: f64) -> Result<Option<NMin>> {
        self.profiles[0].n_min(epsilon)
    }

    /// n_min for every candidate at ε, in pool order.
    pub fn n_mins(&self, epsilon: f64, exec: Exec) -> Result<Vec<Option<NMin>>> {
        exec.map_slice(&self.profiles, |p| p.n_min(epsilon))
            .into_iter()
            .collect()
    }

    /// Descent ratio using the reference plus the first `n_random` random candidates.
    pub fn descent(&self, n_random: usize, epsilon: f64, exec: Exec) -> Result<DescentReport> {
        let upto = (n_random + 1).min(self.len());
        let all = exec
            .map_slice(&self.profiles[..upto], |p| p.n_min(epsilon))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Self::report(&all, epsilon, upto - 1)
    }

    fn report(all: &[Option<NMin>], epsilon: f64, sample_count: usize) -> Result<DescentReport> {
        // First minimum wins ties, so the reference is kept when nothing beats it.
        let (best_index, best) = all
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|r| (i, r)))
            .fold(None::<(usize, NMin)>, |acc, (i, r)| match acc {
                Some((_, b)) if b.n <= r.n => acc,
                _ => Some((i, r)),
            })
            .ok_or_else(|| Error::Infeasible(format!("no candidate feasible at epsilon {epsilon}")))?;
        let n_mm = all[0].map(|r| r.n);
        let theta = n_mm.map(|mm| (mm as f64 - best.n as f64) / mm as f64);
        Ok(DescentReport {
            n_mm,
            n_best: best.n,
            best_index,
            theta,
            epsilon,
            sample_count,
            best,
        })
    }
}

/// Best of N seeded random ζ (plus I/d²) and the descent ratio ϑ(N, ε).
pub fn n_min_random(
    choi: &DensityOperator,
    sample_count: usize,
    epsilon: f64,
    seed: u64,
    exec: Exec,
) -> Result<DescentReport> {
    check_epsilon(epsilon)?;
    if sample_count == 0 {
        return Err(Error::OutOfRange {
            name: "N",
            value: 0.0,
            domain: ">= 1",
        });
    }
    CandidatePool::seeded(choi, sample_count, seed, exec)?.descent(sample_count, epsilon, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi, dephasing, KrausChannel};
    use crate::distinguish::purified_distance;

    fn phi2() -> DensityOperator {
        max_entangled(2).unwrap().to_density()
    }

    fn iso(p: f64) -> DensityOperator {
        phi2().mix(p, &DensityOperator::maximally_mixed(vec![2, 2])).unwrap()
    }

    #[test]
    fn mu_with_rho_equal_tau_is_tensor_power() {
        let tau = iso(0.3);
        let mu = convex_split_state(&tau, &tau, 3, DEFAULT_DENSE_BUDGET).unwrap();
        assert!(mu.matrix().max_abs_diff(tau.tensor_power(3).matrix()) < 1e-15);
        assert_eq!(mu.dims(), &[2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn mu_with_one_slot_is_rho() {
        let rho = phi2();
        let mu = convex_split_state(&rho, &iso(0.5), 1, DEFAULT_DENSE_BUDGET).unwrap();
        assert_eq!(mu.matrix(), rho.matrix());
    }

    #[test]
    fn mu_budget_and_dims() {
        let tau = iso(0.5);
        assert!(matches!(
            convex_split_state(&phi2(), &tau, 7, DEFAULT_DENSE_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
        let other = DensityOperator::maximally_mixed(vec![4]);
        assert!(matches!(
            convex_split_state(&other, &tau, 2, DEFAULT_DENSE_BUDGET),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn three_copy_identity_channel_example() {
        let rho = choi(&KrausChannel::identity(2)).unwrap();
        let tau = iso(0.5);
        let check = verify_convex_split(&rho, &tau, 3, DEFAULT_DENSE_BUDGET).unwrap();
        // τ has weight 0.625 on φ⁺, so k = log₂(1 / 0.625)
        assert!((check.k - (1.0f64 / 0.625).log2()).abs() < 1e-12);
        assert!(check.distance <= check.bound + 1e-9);
        assert!(check.distance <= (2.0f64 / 3.0).sqrt());
        assert!(check.consumption.unwrap() <= check.bound + 1e-9);
        // the structured sqrt path agrees with the generic fidelity
        let mu = convex_split_state(&rho, &tau, 3, DEFAULT_DENSE_BUDGET).unwrap();
        let generic = purified_distance(&mu, &tau.tensor_power(3)).unwrap().value();
        assert!((generic - check.distance).abs() < 1e-9);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(convex_split_bound(0.0, 1), 1.0);
        assert_eq!(convex_split_bound(0.0, 4), 0.5);
        assert_eq!(convex_split_bound(2.0, 4), 1.0);
        assert_eq!(convex_split_bound(5.0, 4), 1.0);
    }

    #[test]
    fn sufficient_copy_examples() {
        assert_eq!(sufficient_copies(0.0, 0.5).unwrap(), 8);
        assert_eq!(sufficient_copies(1.0, 0.25).unwrap(), 32);
        assert!(sufficient_copies(1.0, 0.0).is_err());
        assert!(sufficient_copies(1.0, 1.0).is_err());
    }

    #[test]
    fn sufficient_copies_for_dephasing_match_direct_ceiling() {
        let c = choi(&dephasing(0.4).unwrap()).unwrap();
        let zeta = DensityOperator::maximally_mixed(vec![2, 2]);
        let best = n_min_for_zeta(&c, &zeta, 0.1).unwrap().unwrap();
        let tau = TauFamilyPoint::new(best.p, &zeta).unwrap().tau;
        let k = dmax(&c, &tau).unwrap().value();
        assert!((k - best.k).abs() < 1e-9);
        // independent evaluation of ⌈2^{k+2}/ε⌉ by integer search
        let target = (k + 2.0).exp2() / 0.1;
        let mut n = 1u64;
        while (n as f64) < target {
            n += 1;
        }
        assert_eq!(sufficient_copies(k, 0.1).unwrap(), n);
    }

    #[test]
    fn protocol_bound_examples() {
        assert!(protocol_error_bound(0.0, u64::MAX, 0.0) < 1e-9);
        assert_eq!(protocol_error_bound(1.0, 8, 0.0), 0.5);
        // Sufficient regime: P(τ, φ⁺) ≤ √ε/2 and n = ⌈2^{k+2}/ε⌉ give a bound ≤ √ε.
        for k in [0.0, 0.5, 1.0, 2.5, 4.0, 7.0] {
            for eps in [0.01, 0.05, 0.1, 0.3, 0.6, 0.99] {
                let n = sufficient_copies(k, eps).unwrap();
                let b = protocol_error_bound(k, n, eps.sqrt() / 2.0);
                assert!(b <= eps.sqrt() + 1e-12, "k={k} eps={eps}");
            }
        }
    }

    #[test]
    fn consumption_budget_examples() {
        assert_eq!(min_copies_for_consumption(0.0, 1.0).unwrap(), 1);
        assert_eq!(min_copies_for_consumption(1.0, 0.1).unwrap(), 200);
        assert!(min_copies_for_consumption(1.0, 0.0).is_err());
        assert_eq!(consumption_bound_cs(0.0, 4), 0.5);
    }

    #[test]
    fn delta_p_err_examples() {
        let c = choi(&dephasing(0.7).unwrap()).unwrap();
        assert_eq!(delta_p_err(&c, &c).unwrap(), 0.0);
        assert!((delta_p_err(&c, &phi2()).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn noiseless_channel_feasibility_threshold() {
        // F(τ, φ⁺) = p + (1 − p)/4 for isotropic τ; ε = 0.04 needs p > 0.9466…
        let c = phi2();
        let zeta = DensityOperator::maximally_mixed(vec![2, 2]);
        let best = n_min_for_zeta(&c, &zeta, 0.04).unwrap().unwrap();
        assert!(best.p > 1.0 - 0.04 / 0.75);
        assert!(best.constraint_value() <= 0.04f64.sqrt() + 1e-12);
        // grid oracle: k(p) = −log₂(p + (1 − p)/4)
        let oracle = (0..1000)
            .map(|i| i as f64 * 1e-3)
            .filter_map(|p| {
                let f = p + (1.0 - p) / 4.0;
                let slack = 0.2 - (1.0 - f).sqrt();
                (slack > 0.0).then(|| (1.0 / f) / (slack * slack))
            })
            .fold(f64::INFINITY, f64::min);
        // n(p) decreases towards the last grid point, so refinement cannot improve on it
        assert_eq!(best.n, oracle.ceil() as u64);
        assert!((best.p - 0.999).abs() < 1e-9);
    }

    #[test]
    fn n_min_infeasible_for_tiny_epsilon() {
        let c = choi(&dephasing(0.4).unwrap()).unwrap();
        let zeta = DensityOperator::maximally_mixed(vec![2, 2]);
        assert_eq!(n_min_for_zeta(&c, &zeta, 1e-9).unwrap(), None);
        assert!(n_min_for_zeta(&c, &zeta, 0.0).is_err());
    }

    #[test]
    fn n_min_monotone_in_epsilon() {
        let c = choi(&dephasing(0.4).unwrap()).unwrap();
        let profile = ZetaProfile::new(&c, &DensityOperator::maximally_mixed(vec![2, 2])).unwrap();
        let mut prev = u64::MAX;
        for i in 1..100 {
            let eps = i as f64 / 100.0;
            let n = profile.n_min(eps).unwrap().unwrap();
            assert!(n.n <= prev, "eps={eps}");
            assert!(n.constraint_value() <= eps.sqrt() + 1e-12);
            prev = n.n;
        }
        assert!(prev < 100);
    }

    #[test]
    fn single_reference_candidate_gives_zero_descent() {
        let c = choi(&dephasing(0.4).unwrap()).unwrap();
        let pool = CandidatePool::from_candidates(
            &c,
            vec![
                DensityOperator::maximally_mixed(vec![2, 2]),
                DensityOperator::maximally_mixed(vec![2, 2]),
            ],
            Exec::Sequential,
        )
        .unwrap();
        let r = pool.descent(1, 0.1, Exec::Sequential).unwrap();
        assert_eq!(r.theta, Some(0.0));
        assert_eq!(r.best_index, 0);
    }

    #[test]
    fn descent_nondecreasing_in_nested_pools() {
        let c = choi(&dephasing(0.4).unwrap()).unwrap();
        let pool = CandidatePool::seeded(&c, 24, 5, Exec::Parallel).unwrap();
        for eps in [0.1, 0.3] {
            let mut prev = 0.0;
            for n in [1, 2, 4, 8, 16, 24] {
                let r = pool.descent(n, eps, Exec::Parallel).unwrap();
                let t = r.theta.unwrap();
                assert!(t >= prev && (0.0..=1.0).contains(&t));
                prev = t;
            }
        }
    }

    #[test]
    fn random_search_is_seed_deterministic_across_exec_modes() {
        let c = choi(&dephasing(0.4).unwrap()).unwrap();
        let a = n_min_random(&c, 8, 0.2, 17, Exec::Sequential).unwrap();
        let b = n_min_random(&c, 8, 0.2, 17, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tau_family_point() {
        let zeta = DensityOperator::maximally_mixed(vec![2, 2]);
        let t = TauFamilyPoint::new(0.5, &zeta).unwrap();
        assert!(t.tau.matrix().max_abs_diff(iso(0.5).matrix()) < 1e-15);
        assert!(TauFamilyPoint::new(1.0, &zeta).is_err());
    }
}
