use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use catlab::channels::{amplitude_damping, apply, choi, dephasing, depolarizing_transmission};
use catlab::convexsplit::{verify_convex_split, CandidatePool, DEFAULT_DENSE_BUDGET};
use catlab::distinguish::{dmax, dmax_feasibility_check, purified_distance, uhlmann_fidelity};
use catlab::embezzle::{
    capacity_lower_bound, consumption_exact, protocol_fidelity, protocol_state_mu,
    required_schmidt_rank, target_state, unitary_transport_check, DEFAULT_EMBEZZLE_BUDGET,
};
use catlab::experiment::{run, write_outputs, ExperimentConfig, RunOptions};
use catlab::qmat::{random_full_rank_state, task_rng, DensityOperator};
use catlab::tasks::{catalytic_sdc_state, distribution_threshold_ppt, sdc_capacity};
use catlab::{Exec, Result};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        ok: true,
        detail: detail.into(),
    })
}

fn fail(detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        ok: false,
        detail: detail.into(),
    })
}

fn qubit_pair(seed: u64, i: u64) -> Result<DensityOperator> {
    random_full_rank_state(4, vec![2, 2], &mut task_rng(seed, i))
}

fn convex_split_direct() -> Result<Outcome> {
    let mut worst = f64::NEG_INFINITY;
    for case in 0..200u64 {
        let rho = qubit_pair(101, case)?;
        let tau = qubit_pair(202, case)?;
        for n in 1..=4 {
            let c = verify_convex_split(&rho, &tau, n, DEFAULT_DENSE_BUDGET)?;
            let bound = (c.k.exp2() / n as f64).sqrt();
            worst = worst.max(c.distance - bound);
            if c.distance > bound + 1e-9 {
                return fail(format!("case {case} n={n}: P={} > {bound}", c.distance));
            }
        }
    }
    pass(format!("800 checks, max P - bound = {worst:.3e}"))
}

fn transport_identity() -> Result<Outcome> {
    let mut count = 0;
    for m in 2..=5 {
        for rank in m..=64 {
            if !unitary_transport_check(m, rank)? {
                return fail(format!("m={m} M={rank}"));
            }
            count += 1;
        }
    }
    pass(format!("{count} (m, M) pairs"))
}

fn embezzle_end_to_end() -> Result<Outcome> {
    let (m, eps) = (2, 0.19);
    let rank = required_schmidt_rank(m, eps)? as usize;
    if rank != 1024 {
        return fail(format!("required rank {rank}, expected 1024"));
    }
    // Dense overlap of μ with φ⁺ ⊗ τ^E.
    let mu = protocol_state_mu(m, rank, DEFAULT_EMBEZZLE_BUDGET)?;
    let target = target_state(m, rank, DEFAULT_EMBEZZLE_BUDGET)?;
    let p_err = 1.0 - target.inner(&mu).norm_sqr();
    if p_err > eps {
        return fail(format!("p_err = {p_err}"));
    }
    let closed = 1.0 - protocol_fidelity(m, rank)?.fidelity;
    if (closed - p_err).abs() > 1e-10 {
        return fail(format!("closed form {closed} vs dense {p_err}"));
    }
    let mut sampled = 0;
    for m in 2..=5 {
        for rank in (m + 1..=256).chain([512, 1024, 4096, 1 << 16]) {
            let pf = protocol_fidelity(m, rank)?;
            if pf.inner < pf.inner_lower_bound {
                return fail(format!("inner bound fails at m={m} M={rank}"));
            }
            sampled += 1;
        }
    }
    pass(format!("p_err = {p_err:.5}; inner bound held at {sampled} points"))
}

fn consumption() -> Result<Outcome> {
    let mut worst_gap = 0.0f64;
    for m in 2..=3 {
        for rank in 4..=128 {
            let rec = consumption_exact(m, rank, DEFAULT_EMBEZZLE_BUDGET)?;
            let direct = rec.direct.expect("within budget");
            if direct > rec.bound + 1e-9 {
                return fail(format!("m={m} M={rank}: {direct} > {}", rec.bound));
            }
            let gap = (direct - rec.exact).abs();
            worst_gap = worst_gap.max(gap);
            if gap > 1e-8 {
                return fail(format!("m={m} M={rank}: closed form off by {gap:e}"));
            }
        }
    }
    pass(format!("max |closed - direct| = {worst_gap:.2e}"))
}

fn sdc_convergence() -> Result<Outcome> {
    let mut prev = f64::NEG_INFINITY;
    for rank in (2..=1024).step_by(2) {
        let c = sdc_capacity(&catalytic_sdc_state(2, rank)?)?.value;
        if c < prev - 1e-12 {
            return fail(format!("decrease at M={rank}: {c} < {prev}"));
        }
        prev = c;
    }
    if prev < 1.95 {
        return fail(format!("capacity at M=1024 is {prev}"));
    }
    pass(format!("C(M=1024) = {prev:.4} bits"))
}

fn distribution_threshold() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for alpha in [0.005, 0.01, 0.05] {
        let found = distribution_threshold_ppt(alpha, 1e-10)?;
        let want = 3f64.ln() / alpha;
        let rel = ((found - want) / want).abs();
        worst = worst.max(rel);
        if rel > 1e-6 {
            return fail(format!("alpha={alpha}: {found} vs {want}"));
        }
    }
    pass(format!("max relative error {worst:.2e}"))
}

const EPS_GRID: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5];

fn thetas(pool: &CandidatePool, n: usize) -> Result<Vec<f64>> {
    EPS_GRID
        .iter()
        .map(|&e| Ok(pool.descent(n, e, Exec::Parallel)?.theta.unwrap_or(f64::NAN)))
        .collect()
}

fn descent_ratio() -> Result<Outcome> {
    let c = choi(&dephasing(0.4)?)?;
    let mut summary = Vec::new();
    for seed in [2024, 7, 99] {
        let pool = CandidatePool::seeded(&c, 200, seed, Exec::Parallel)?;
        let full = thetas(&pool, 200)?;
        if full.iter().any(|t| t.is_nan() || *t < 0.0) {
            return fail(format!("seed {seed}: negative or undefined ratio {full:?}"));
        }
        let positive = full.iter().filter(|t| **t > 0.0).count();
        if 2 * positive < EPS_GRID.len() {
            return fail(format!("seed {seed}: only {positive} positive ratios"));
        }
        let again = CandidatePool::seeded(&c, 200, seed, Exec::Sequential)?;
        if thetas(&again, 200)? != full {
            return fail(format!("seed {seed}: not reproducible"));
        }
        let mut prev = vec![0.0; EPS_GRID.len()];
        for n in [1, 10, 50, 100, 200] {
            let t = thetas(&pool, n)?;
            if t.iter().zip(&prev).any(|(a, b)| a < b) {
                return fail(format!("seed {seed}: ratio decreased at N={n}"));
            }
            prev = t;
        }
        summary.push(format!("seed {seed}: {positive}/10 > 0"));
    }
    pass(summary.join(", "))
}

fn capacity_spot_check() -> Result<Outcome> {
    let v = capacity_lower_bound(1025, 0.19)?;
    if (v - 1.0).abs() <= 1e-12 {
        pass(format!("{v}"))
    } else {
        fail(format!("{v}"))
    }
}

fn measure_axioms() -> Result<Outcome> {
    let n = 1000u64;
    let (mut sym, mut tri, mut feas, mut dpi_p, mut dpi_d) = (0, 0, 0, 0, 0);
    for i in 0..n {
        let rho = qubit_pair(901, i)?;
        let sigma = qubit_pair(902, i)?;
        let omega = qubit_pair(903, i)?;
        let mut rng = task_rng(904, i);

        let f1 = uhlmann_fidelity(&rho, &sigma)?.value();
        let f2 = uhlmann_fidelity(&sigma, &rho)?.value();
        sym += usize::from((f1 - f2).abs() <= 1e-9);

        let p = |a: &DensityOperator, b: &DensityOperator| purified_distance(a, b).map(|d| d.value());
        tri += usize::from(p(&rho, &omega)? <= p(&rho, &sigma)? + p(&sigma, &omega)? + 1e-9);

        let k = dmax(&rho, &sigma)?.value();
        let above = dmax_feasibility_check(&rho, &sigma, k + 1e-9)?;
        let below = dmax_feasibility_check(&rho, &sigma, k - 1e-6)?;
        feas += usize::from(above && !below);

        let q: f64 = rng.random_range(0.0..=1.0);
        let ch = match i % 3 {
            0 => dephasing(q)?,
            1 => amplitude_damping(q)?,
            _ => depolarizing_transmission(q)?,
        };
        let sub = (i / 3 % 2) as usize;
        let (nr, ns) = (apply(&ch, &rho, sub)?, apply(&ch, &sigma, sub)?);
        dpi_p += usize::from(p(&nr, &ns)? <= p(&rho, &sigma)? + 1e-9);
        dpi_d += usize::from(dmax(&nr, &ns)?.value() <= k + 1e-9);
    }
    let counts = [sym, tri, feas, dpi_p, dpi_d];
    let detail = format!(
        "symmetry {sym}, triangle {tri}, D_max oracle {feas}, DPI(P) {dpi_p}, DPI(D_max) {dpi_d} of {n}"
    );
    if counts.iter().all(|&c| c == n as usize) {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir().map_err(|e| catlab::Error::Io(e.to_string()))?;
    let configs = [
        "experiment = \"fig3\"\nnoise_grid = [0.2, 0.4]\nepsilon_grid = [0.05, 0.2, 0.5]\nsample_count = 50\nseed = 31\noutput_path = \"x.csv\"\n",
        "experiment = \"table3\"\nnoise_grid = [0.4]\nepsilon_grid = [0.1, 0.3]\nsample_count = 50\nseed = 31\noutput_path = \"x.csv\"\n",
        "experiment = \"fig6\"\nnoise_grid = [0.75, 0.8]\nepsilon_grid = [0.1, 0.2]\nsample_count = 20\nseed = 31\noutput_path = \"x.csv\"\n",
        "experiment = \"lemma1-check\"\nn_grid = [1, 2, 3]\nsample_count = 10\nseed = 31\noutput_path = \"x.csv\"\n",
    ];
    for (i, text) in configs.iter().enumerate() {
        let cfg = ExperimentConfig::from_toml_str(text)?;
        let mut bytes = Vec::new();
        for (j, exec) in [Exec::Parallel, Exec::Parallel, Exec::Sequential].into_iter().enumerate() {
            let out = run(&cfg, RunOptions { exec })?;
            let path = dir.path().join(format!("{i}_{j}.csv"));
            write_outputs(&out, &path)?;
            bytes.push(std::fs::read(&path).map_err(|e| catlab::Error::Io(e.to_string()))?);
        }
        if bytes[0] != bytes[1] || bytes[0] != bytes[2] {
            return fail(format!("{} differs between runs", cfg.experiment));
        }
    }
    pass(format!("{} configs, 3 runs each", configs.len()))
}

type Check = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Check, Duration); 10] = [
        ("convex-split-direct", convex_split_direct, Duration::from_secs(60)),
        ("transport-identity", transport_identity, Duration::from_secs(10)),
        ("embezzle-end-to-end", embezzle_end_to_end, Duration::from_secs(5)),
        ("consumption", consumption, Duration::from_secs(30)),
        ("sdc-convergence", sdc_convergence, Duration::from_secs(10)),
        ("distribution-threshold", distribution_threshold, Duration::from_secs(5)),
        ("descent-ratio", descent_ratio, Duration::from_secs(600)),
        ("capacity-spot-check", capacity_spot_check, Duration::from_secs(1)),
        ("measure-axioms", measure_axioms, Duration::from_secs(60)),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(o) => (o.ok, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= limit;
        let status = if ok && in_time { "PASS" } else { "FAIL" };
        if status == "FAIL" {
            failed += 1;
        }
        let timing = if in_time {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!("{:.2}s exceeds {}s", elapsed.as_secs_f64(), limit.as_secs())
        };
        println!("{status} {:>2} {name}: {detail} [{timing}]", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
