use std::fmt;

use rand::Rng;

use super::config::ExperimentConfig;
use super::rows::Provenance;
use super::run::{run, RunOptions};
use crate::channels::{apply, choi, dephasing, depolarizing_transmission, KrausChannel};
use crate::convexsplit::{verify_convex_split, ZetaProfile, DEFAULT_DENSE_BUDGET};
use crate::distinguish::{dmax, dmax_feasibility_check, purified_distance, uhlmann_fidelity};
use crate::embezzle::{
    consumption_exact, protocol_state_ab, transport_check_with, unitary_transport_check, EmbezzleUnitary,
    DEFAULT_EMBEZZLE_BUDGET,
};
use crate::error::Result;
use crate::qmat::{hermitian_eig, random_full_rank_state, task_rng, ComplexMatrix, DensityOperator, C64};
use crate::tasks::{catalytic_sdc_state, distribution_threshold_bare, distribution_threshold_ppt};

#[derive(Clone, Debug, Default)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            ..Self::default()
        }
    }

    fn case(&mut self, label: impl FnOnce() -> String, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(label());
        }
    }

    /// Records `Err` as a failure.
    fn outcome(&mut self, label: &str, r: Result<bool>) {
        match r {
            Ok(ok) => self.case(|| label.to_string(), ok),
            Err(e) => self.failures.push(format!("{label}: {e}")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn failed(&self) -> usize {
        self.suites.iter().map(|s| s.failures.len()).sum()
    }

    pub fn passed(&self) -> usize {
        self.suites.iter().map(|s| s.passed).sum()
    }

    pub fn ok(&self) -> bool {
        self.failed() == 0
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            let status = if s.failures.is_empty() { "ok" } else { "FAIL" };
            writeln!(
                f,
                "{:<12} {:>5} passed {:>3} failed  {status}",
                s.name,
                s.passed,
                s.failures.len()
            )?;
            for msg in &s.failures {
                writeln!(f, "    - {msg}")?;
            }
        }
        write!(f, "total: {} passed, {} failed", self.passed(), self.failed())
    }
}

fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

fn qubit_pair(seed: u64, i: u64) -> Result<DensityOperator> {
    random_full_rank_state(4, vec![2, 2], &mut task_rng(seed, i))
}

fn qmat_suite() -> SuiteResult {
    let mut s = SuiteResult::new("qmat");
    let mut rng = task_rng(1, 0);
    for n in [2, 3, 5, 8, 16, 33, 40] {
        let m = random_hermitian(n, &mut rng);
        let r = hermitian_eig(&m).map(|e| {
            let back = e.map_spectrum(|l| l);
            back.max_abs_diff(&m) < 1e-10
        });
        s.outcome(&format!("eig reconstruction n={n}"), r);
    }
    for i in 0..20 {
        let r = (|| {
            let a = random_full_rank_state(2, vec![2], &mut task_rng(2, i))?;
            let b = random_full_rank_state(3, vec![3], &mut task_rng(3, i))?;
            let ab = a.tensor(&b);
            let back = ab.partial_trace(&[0])?;
            Ok(back.matrix().max_abs_diff(a.matrix()) < 1e-12)
        })();
        s.outcome(&format!("partial trace of product #{i}"), r);
    }
    s
}

fn distinguish_suite() -> SuiteResult {
    let mut s = SuiteResult::new("distinguish");
    let ch = dephasing(0.3).expect("valid");
    for i in 0..50 {
        let r = (|| {
            let rho = qubit_pair(10, i)?;
            let sigma = qubit_pair(11, i)?;
            let omega = qubit_pair(12, i)?;
            let f1 = uhlmann_fidelity(&rho, &sigma)?.value();
            let f2 = uhlmann_fidelity(&sigma, &rho)?.value();
            let p = |a: &DensityOperator, b: &DensityOperator| {
                purified_distance(a, b).map(|d| d.value())
            };
            let tri = p(&rho, &omega)? <= p(&rho, &sigma)? + p(&sigma, &omega)? + 1e-9;
            let k = dmax(&rho, &sigma)?.value();
            let feas = dmax_feasibility_check(&rho, &sigma, k + 1e-6)?
                && (k <= 1e-3 || !dmax_feasibility_check(&rho, &sigma, k - 1e-3)?);
            let nr = apply(&ch, &rho, 1)?;
            let ns = apply(&ch, &sigma, 1)?;
            let dpi_p = p(&nr, &ns)? <= p(&rho, &sigma)? + 1e-9;
            let dpi_d = dmax(&nr, &ns)?.value() <= k + 1e-9;
            Ok((f1 - f2).abs() < 1e-9 && tri && feas && dpi_p && dpi_d)
        })();
        s.outcome(&format!("measure axioms #{i}"), r);
    }
    s
}

fn channels_suite() -> SuiteResult {
    let mut s = SuiteResult::new("channels");
    let families: Vec<(String, KrausChannel)> = [0.0, 0.25, 0.5, 1.0]
        .iter()
        .flat_map(|&p| {
            [
                (format!("dephasing {p}"), dephasing(p)),
                (format!("amplitude damping {p}"), crate::channels::amplitude_damping(p)),
                (format!("depolarizing {p}"), depolarizing_transmission(p)),
            ]
        })
        .map(|(n, c)| (n, c.expect("valid parameter")))
        .collect();
    for (name, ch) in &families {
        let r = (|| {
            let c = choi(ch)?;
            let marginal = c.partial_trace(&[0])?;
            let ok_marginal = marginal
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(2).scale(0.5))
                < 1e-10;
            let rho = qubit_pair(20, 0)?;
            let out = apply(ch, &rho, 0)?;
            Ok(ok_marginal && (out.matrix().trace().re - 1.0).abs() < 1e-10)
        })();
        s.outcome(name, r);
    }
    s
}

fn convexsplit_suite() -> SuiteResult {
    let mut s = SuiteResult::new("convexsplit");
    for i in 0..10 {
        for n in 1..=3 {
            let r = (|| {
                let rho = qubit_pair(30, i)?;
                let tau = qubit_pair(31, i)?;
                Ok(verify_convex_split(&rho, &tau, n, DEFAULT_DENSE_BUDGET)?.satisfied(1e-9))
            })();
            s.outcome(&format!("convex-split bound case {i} n={n}"), r);
        }
    }
    let r = (|| {
        let c = choi(&dephasing(0.4)?)?;
        let profile = ZetaProfile::new(&c, &DensityOperator::maximally_mixed(vec![2, 2]))?;
        let mut prev = u64::MAX;
        for k in 1..20 {
            let Some(n) = profile.n_min(k as f64 / 20.0)? else {
                return Ok(false);
            };
            if n.n > prev {
                return Ok(false);
            }
            prev = n.n;
        }
        Ok(true)
    })();
    s.outcome("n_min non-increasing in epsilon", r);
    s
}

fn embezzle_suite() -> SuiteResult {
    let mut s = SuiteResult::new("embezzle");
    for m in 2..=3 {
        for rank in m..=16 {
            s.outcome(
                &format!("transport m={m} M={rank}"),
                unitary_transport_check(m, rank),
            );
        }
    }
    // A corrupted permutation (l shifted by one) must be caught.
    for (m, rank) in [(2usize, 3usize), (3, 9)] {
        let r = EmbezzleUnitary::new(m, rank).and_then(|u| {
            let mutant = move |ac: usize| {
                let (k, l) = u.forward(ac / rank, ac % rank);
                k * rank + (l + 1) % rank
            };
            transport_check_with(m, rank, DEFAULT_EMBEZZLE_BUDGET, mutant).map(|ok| !ok)
        });
        s.outcome(&format!("mutant permutation rejected m={m} M={rank}"), r);
    }
    for (m, rank) in [(2, 4), (2, 17), (3, 12)] {
        let r = consumption_exact(m, rank, DEFAULT_EMBEZZLE_BUDGET).map(|rec| {
            rec.discrepancy().is_some_and(|d| d < 1e-8)
                && rec.direct.is_some_and(|d| d <= rec.bound + 1e-9)
        });
        s.outcome(&format!("consumption m={m} M={rank}"), r);
    }
    s
}

fn tasks_suite() -> SuiteResult {
    let mut s = SuiteResult::new("tasks");
    for (d, rank) in [(2, 2), (2, 5), (3, 7)] {
        let r = (|| {
            let closed = catalytic_sdc_state(d, rank)?;
            let oracle = protocol_state_ab(d, rank, DEFAULT_EMBEZZLE_BUDGET)?;
            Ok(closed.matrix().max_abs_diff(oracle.matrix()) < 1e-12)
        })();
        s.outcome(&format!("sdc state vs protocol marginal d={d} M={rank}"), r);
    }
    for alpha in [0.01, 0.05] {
        let r = (|| {
            let found = distribution_threshold_ppt(alpha, 1e-9)?;
            let want = distribution_threshold_bare(alpha)?;
            Ok(((found - want) / want).abs() < 1e-6)
        })();
        s.outcome(&format!("ppt threshold alpha={alpha}"), r);
    }
    s
}

fn determinism_suite() -> SuiteResult {
    let mut s = SuiteResult::new("determinism");
    let text = |seed: u64| {
        format!(
            "experiment = \"fig3\"\nnoise_grid = [0.4]\nepsilon_grid = [0.2]\nsample_count = 2\nseed = {seed}\noutput_path = \"selftest.csv\"\n"
        )
    };
    let r = (|| {
        let cfg = ExperimentConfig::from_toml_str(&text(5))?;
        let a = run(&cfg, RunOptions::default())?;
        let b = run(&cfg, RunOptions::default())?;
        let other = run(&ExperimentConfig::from_toml_str(&text(6))?, RunOptions::default())?;
        let same_csv = a.to_csv_string()? == b.to_csv_string()?;
        let rows = |o: &super::rows::RunOutput, p: Provenance| {
            o.rows
                .iter()
                .filter(|r| r.provenance == p)
                .cloned()
                .collect::<Vec<_>>()
        };
        let formula_stable = rows(&a, Provenance::Search) == rows(&other, Provenance::Search);
        let sampled_moves = rows(&a, Provenance::Sampled) != rows(&other, Provenance::Sampled);
        Ok(same_csv && formula_stable && sampled_moves)
    })();
    s.outcome("fig3 repeat and seed variation", r);
    s
}

/// Runs every module's invariant suite at reduced sizes.
pub fn selftest() -> SelftestReport {
    SelftestReport {
        suites: vec![
            qmat_suite(),
            distinguish_suite(),
            channels_suite(),
            convexsplit_suite(),
            embezzle_suite(),
            tasks_suite(),
            determinism_suite(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let report = selftest();
        assert!(report.ok(), "{report}");
        assert!(report.passed() > 100);
        assert_eq!(report.suites.len(), 7);
    }
}
