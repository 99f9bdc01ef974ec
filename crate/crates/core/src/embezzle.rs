//! Embezzling-state catalysts.
//!
//! τ^E = c_M^{−1/2} Σ_j j^{−1/2} |jj⟩ with c_M the M-th harmonic number. A
//! permutation U on A⊗C sends ω = Σ ω_ij |ii⟩|jj⟩ to φ⁺_m ⊗ τ^E; running it on
//! |11⟩ ⊗ τ^E produces a state close to φ⁺_m ⊗ τ^E once M is large enough.
//!
//! Paper-style indices i, j, k, l are 1-based. Everything here stores 0-based
//! indices: flat index f = i·M + j, then l = f / m and k = f mod m.

use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::qmat::{reduce_pure, DensityOperator, PureState};

/// Default cap on m·M for dense pure-state vectors of size (mM)².
pub const DEFAULT_EMBEZZLE_BUDGET: usize = 4096;

/// Integers above this are not exactly representable as f64.
const MAX_EXACT_RANK: f64 = 9_007_199_254_740_992.0;

/// Ceiling that snaps values within relative 1e-9 of an integer onto it, so that
/// 2^10 evaluated as 1024.0000000000014 still gives 1024.
pub(crate) fn ceil_tolerant(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// H_M = Σ_{j=1}^{M} 1/j.
pub fn harmonic(rank: usize) -> f64 {
    (1..=rank).map(|j| 1.0 / j as f64).sum()
}

fn check_pair(m: usize, rank: usize) -> Result<()> {
    check_range("m", m as f64, m >= 2, ">= 2")?;
    check_range("M", rank as f64, rank >= m, ">= m")
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    check_range("epsilon", epsilon, epsilon > 0.0 && epsilon < 1.0, "(0, 1)")
}

fn check_budget(m: usize, rank: usize, budget: usize) -> Result<()> {
    let requested = m.saturating_mul(rank);
    if requested > budget {
        return Err(Error::BudgetExceeded { requested, budget });
    }
    Ok(())
}

/// τ^E of Schmidt rank M, kept as its Schmidt coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbezzlingState {
    rank: usize,
    normalizer: f64,
    coeffs: Vec<f64>,
}

impl EmbezzlingState {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// c_M
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Amplitude on |jj⟩ for 0-based j.
    pub fn amplitude(&self, j: usize) -> f64 {
        self.coeffs[j]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Dense vector on dims [M, M].
    pub fn pure_state(&self) -> Result<PureState> {
        let m = self.rank;
        let mut amps = vec![Complex64::new(0.0, 0.0); m * m];
        for (j, &c) in self.coeffs.iter().enumerate() {
            amps[j * m + j] = Complex64::new(c, 0.0);
        }
        PureState::new(amps, vec![m, m])
    }
}

pub fn embezzling_state(rank: usize) -> Result<EmbezzlingState> {
    check_range("M", rank as f64, rank >= 1, ">= 1")?;
    let normalizer = harmonic(rank);
    let coeffs = (1..=rank)
        .map(|j| 1.0 / (normalizer * j as f64).sqrt())
        .collect();
    Ok(EmbezzlingState {
        rank,
        normalizer,
        coeffs,
    })
}

/// log₂ of ⌈m^{1/(1−√(1−ε))}⌉ before the ceiling; usable when M itself overflows.
pub fn required_schmidt_rank_log2(m: usize, epsilon: f64) -> Result<f64> {
    check_range("m", m as f64, m >= 2, ">= 2")?;
    check_epsilon(epsilon)?;
    Ok((m as f64).log2() / (1.0 - (1.0 - epsilon).sqrt()))
}

/// ⌈m^{1/(1−√(1−ε))}⌉: Schmidt rank that guarantees error ≤ ε.
pub fn required_schmidt_rank(m: usize, epsilon: f64) -> Result<u64> {
    let exponent = required_schmidt_rank_log2(m, epsilon)?;
    let value = ceil_tolerant(exponent.exp2());
    if value > MAX_EXACT_RANK {
        return Err(Error::OutOfRange {
            name: "required Schmidt rank",
            value,
            domain: "<= 2^53",
        });
    }
    Ok(value as u64)
}

/// ⌈m^{2/δ²}⌉: Schmidt rank keeping the catalyst within purified distance δ.
pub fn min_rank_for_consumption(m: usize, delta: f64) -> Result<u64> {
    check_range("m", m as f64, m >= 2, ">= 2")?;
    check_range("delta", delta, delta > 0.0, "> 0")?;
    let value = ceil_tolerant((m as f64).powf(2.0 / (delta * delta)));
    if value > MAX_EXACT_RANK {
        return Err(Error::OutOfRange {
            name: "Schmidt rank",
            value,
            domain: "<= 2^53",
        });
    }
    Ok(value as u64)
}

/// (1 − √(1 − ε)) · log₂(d_c − 1) qubits.
pub fn capacity_lower_bound(d_c: u64, epsilon: f64) -> Result<f64> {
    check_range("d_c", d_c as f64, d_c >= 2, ">= 2")?;
    check_epsilon(epsilon)?;
    Ok((1.0 - (1.0 - epsilon).sqrt()) * ((d_c - 1) as f64).log2())
}

/// Target rank m with catalyst rank M and error ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbezzlePlan {
    pub m: usize,
    pub rank: u64,
    pub epsilon: f64,
}

impl EmbezzlePlan {
    /// Smallest M meeting the Schmidt-rank condition.
    pub fn for_error(m: usize, epsilon: f64) -> Result<Self> {
        Ok(Self {
            m,
            rank: required_schmidt_rank(m, epsilon)?,
            epsilon,
        })
    }

    pub fn is_compliant(&self) -> Result<bool> {
        Ok(self.rank >= required_schmidt_rank(self.m, self.epsilon)?)
    }
}

/// The permutation (i, j) ↦ (k, l) on {0..m}×{0..M}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbezzleUnitary {
    m: usize,
    rank: usize,
}

impl EmbezzleUnitary {
    pub fn new(m: usize, rank: usize) -> Result<Self> {
        check_pair(m, rank)?;
        Ok(Self { m, rank })
    }

    pub fn len(&self) -> usize {
        self.m * self.rank
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, i: usize, j: usize) -> (usize, usize) {
        let f = i * self.rank + j;
        (f % self.m, f / self.m)
    }

    pub fn inverse(&self, k: usize, l: usize) -> (usize, usize) {
        let f = l * self.m + k;
        (f / self.rank, f % self.rank)
    }

    /// Forward map on the flat index a·M + c of A⊗C.
    pub fn forward_flat(&self, ac: usize) -> usize {
        let (k, l) = self.forward(ac / self.rank, ac % self.rank);
        k * self.rank + l
    }
}

/// ω_ij = 1/√(m c_M ⌈(iM + j + 1)/m⌉) for 0-based i, j; row-major over (i, j).
pub fn omega_coefficients(m: usize, rank: usize) -> Result<Vec<f64>> {
    check_pair(m, rank)?;
    let c = harmonic(rank);
    Ok((0..m * rank)
        .map(|f| {
            let l = f / m + 1;
            1.0 / ((m * l) as f64 * c).sqrt()
        })
        .collect())
}

/// Amplitude position of |a, c, b, c′⟩ on dims [m, M, m, M].
fn acbc(m: usize, rank: usize, a: usize, c: usize, b: usize, cp: usize) -> usize {
    ((a * rank + c) * m + b) * rank + cp
}

/// ω on dims [m, M, m, M] in order A, C, B, C′.
pub fn omega_state(m: usize, rank: usize, budget: usize) -> Result<PureState> {
    check_budget(m, rank, budget)?;
    let w = omega_coefficients(m, rank)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); (m * rank).pow(2)];
    for i in 0..m {
        for j in 0..rank {
            amps[acbc(m, rank, i, j, i, j)] = Complex64::new(w[i * rank + j], 0.0);
        }
    }
    PureState::new(amps, vec![m, rank, m, rank])
}

/// φ⁺_m ⊗ τ^E reordered to A, C, B, C′.
pub fn target_state(m: usize, rank: usize, budget: usize) -> Result<PureState> {
    check_pair(m, rank)?;
    check_budget(m, rank, budget)?;
    let tau = embezzling_state(rank)?;
    let s = 1.0 / (m as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); (m * rank).pow(2)];
    for k in 0..m {
        for l in 0..rank {
            amps[acbc(m, rank, k, l, k, l)] = Complex64::new(s * tau.amplitude(l), 0.0);
        }
    }
    PureState::new(amps, vec![m, rank, m, rank])
}

/// Applies V ⊗ V to a dense vector on [m, M, m, M], with V given on flat A⊗C indices.
fn apply_local_pair(
    amps: &[Complex64],
    ac_dim: usize,
    map: &impl Fn(usize) -> usize,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (x, &a) in amps.iter().enumerate() {
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let (ac, bc) = (x / ac_dim, x % ac_dim);
        out[map(ac) * ac_dim + map(bc)] += a;
    }
    out
}

/// Runs an arbitrary A⊗C index map on both halves of ω and compares with φ⁺_m ⊗ τ^E.
pub fn transport_check_with(
    m: usize,
    rank: usize,
    budget: usize,
    map: impl Fn(usize) -> usize,
) -> Result<bool> {
    let omega = omega_state(m, rank, budget)?;
    let target = target_state(m, rank, budget)?;
    let moved = apply_local_pair(omega.amplitudes(), m * rank, &map);
    let dev = moved
        .iter()
        .zip(target.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(dev < 1e-10)
}

/// U_AC ⊗ U_BC′ |ω⟩ = |φ⁺_m⟩|τ^E⟩, checked on dense vectors.
pub fn unitary_transport_check(m: usize, rank: usize) -> Result<bool> {
    let u = EmbezzleUnitary::new(m, rank)?;
    transport_check_with(m, rank, DEFAULT_EMBEZZLE_BUDGET, |ac| u.forward_flat(ac))
}

/// Achieved fidelity with its analytic lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolFidelity {
    /// ⟨11, τ^E | ω⟩
    pub inner: f64,
    /// inner²
    pub fidelity: f64,
    /// (log M − log m) / log M, a lower bound on `inner`
    pub inner_lower_bound: f64,
}

/// F(μ, φ⁺_m ⊗ τ^E) = (Σ_j τ^E_j ω_{1j})², in O(M).
pub fn protocol_fidelity(m: usize, rank: usize) -> Result<ProtocolFidelity> {
    check_pair(m, rank)?;
    let c = harmonic(rank);
    let inner = (1..=rank)
        .map(|j| 1.0 / ((m * j * j.div_ceil(m)) as f64).sqrt())
        .sum::<f64>()
        / c;
    let lm = rank as f64;
    Ok(ProtocolFidelity {
        inner,
        fidelity: inner * inner,
        inner_lower_bound: (lm.ln() - (m as f64).ln()) / lm.ln(),
    })
}

/// μ = (U ⊗ U)(|11⟩ ⊗ τ^E) as a dense vector on [m, M, m, M] (A, C, B, C′).
pub fn protocol_state_mu(m: usize, rank: usize, budget: usize) -> Result<PureState> {
    check_pair(m, rank)?;
    check_budget(m, rank, budget)?;
    let u = EmbezzleUnitary::new(m, rank)?;
    let tau = embezzling_state(rank)?;
    let mut input = vec![Complex64::new(0.0, 0.0); (m * rank).pow(2)];
    for j in 0..rank {
        input[acbc(m, rank, 0, j, 0, j)] = Complex64::new(tau.amplitude(j), 0.0);
    }
    let amps = apply_local_pair(&input, m * rank, &|ac| u.forward_flat(ac));
    PureState::new(amps, vec![m, rank, m, rank])
}

/// Tr_CC′ μ on dims [m, m].
pub fn protocol_state_ab(m: usize, rank: usize, budget: usize) -> Result<DensityOperator> {
    reduce_pure(&protocol_state_mu(m, rank, budget)?, &[0, 2])
}

/// Catalyst consumption P(Tr_AB μ, τ^E) by three routes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConsumptionRecord {
    /// Closed-form double sum.
    pub exact: f64,
    /// √(2 log_M m)
    pub bound: f64,
    /// Contraction of the dense μ vector with τ^E; `None` above the budget.
    pub direct: Option<f64>,
}

impl ConsumptionRecord {
    /// |exact − direct| when both exist.
    pub fn discrepancy(&self) -> Option<f64> {
        self.direct.map(|d| (d - self.exact).abs())
    }
}

/// √(2 log_M m)
pub fn consumption_bound(m: usize, rank: usize) -> f64 {
    (2.0 * (m as f64).ln() / (rank as f64).ln()).sqrt()
}

fn distance_from_fidelity(f: f64) -> f64 {
    (1.0 - f).max(0.0).sqrt()
}

/// Closed form: F = c_M^{−2} Σ_t (Σ_{i<K} 2/√(i k_i t K) + 1/(tK)) with
/// K = ⌈t/m⌉ and k_i = t − ⌊(t−1)/m⌋m + (i−1)m. O(M²/m).
pub fn consumption_closed_form(m: usize, rank: usize) -> Result<f64> {
    check_pair(m, rank)?;
    let c = harmonic(rank);
    let mut f = 0.0;
    for t in 1..=rank {
        let big_k = t.div_ceil(m);
        let base = t - ((t - 1) / m) * m;
        let mut s = 1.0 / (t * big_k) as f64;
        for i in 1..big_k {
            let k_i = base + (i - 1) * m;
            s += 2.0 / ((i * k_i * t * big_k) as f64).sqrt();
        }
        f += s;
    }
    Ok(distance_from_fidelity(f / (c * c)))
}

/// Same quantity grouped by residue class: F = c_M^{−2} Σ_r (Σ_{t ≡ r} 1/√(t⌈t/m⌉))². O(M).
pub fn consumption_residue_form(m: usize, rank: usize) -> Result<f64> {
    check_pair(m, rank)?;
    let c = harmonic(rank);
    let mut class = vec![0.0; m];
    for t in 1..=rank {
        class[(t - 1) % m] += 1.0 / ((t * t.div_ceil(m)) as f64).sqrt();
    }
    Ok(distance_from_fidelity(
        class.iter().map(|s| s * s).sum::<f64>() / (c * c),
    ))
}

/// P(Tr_AB μ, τ^E) from the dense μ: F = Σ_{ab} |Σ_{cc′} τ_{cc′} μ_{acbc′}|².
pub fn consumption_direct(m: usize, rank: usize, budget: usize) -> Result<f64> {
    let mu = protocol_state_mu(m, rank, budget)?;
    let tau = embezzling_state(rank)?.pure_state()?;
    let amps = mu.amplitudes();
    let t = tau.amplitudes();
    let mut f = 0.0;
    for a in 0..m {
        for b in 0..m {
            let mut s = Complex64::new(0.0, 0.0);
            for c in 0..rank {
                for cp in 0..rank {
                    s += t[c * rank + cp].conj() * amps[acbc(m, rank, a, c, b, cp)];
                }
            }
            f += s.norm_sqr();
        }
    }
    Ok(distance_from_fidelity(f))
}

/// Above this rank the O(M²/m) closed form is replaced by the residue form.
const CLOSED_FORM_LIMIT: usize = 1 << 15;

pub fn consumption_exact(m: usize, rank: usize, budget: usize) -> Result<ConsumptionRecord> {
    check_pair(m, rank)?;
    let exact = if rank <= CLOSED_FORM_LIMIT {
        consumption_closed_form(m, rank)?
    } else {
        consumption_residue_form(m, rank)?
    };
    let direct = match consumption_direct(m, rank, budget) {
        Ok(d) => Some(d),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ConsumptionRecord {
        exact,
        bound: consumption_bound(m, rank),
        direct,
    })
}
