use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{ExperimentConfig, ExperimentKind};
use super::rows::{Provenance, ResultRow, RunMetadata, RunOutput};
use crate::channels::choi;
use crate::convexsplit::{
    consumption_bound_cs, verify_convex_split, CandidatePool, DescentReport, DEFAULT_DENSE_BUDGET,
};
use crate::distinguish::fidelity_with_pure;
use crate::embezzle::{
    consumption_bound, consumption_exact, consumption_residue_form, protocol_fidelity,
    protocol_state_ab, required_schmidt_rank, required_schmidt_rank_log2,
    unitary_transport_check, DEFAULT_EMBEZZLE_BUDGET,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::qmat::{max_entangled, random_full_rank_state, task_rng, DensityOperator};
use crate::tasks::{
    catalytic_sdc_state, distribution_entanglement_profile, distribution_threshold_bare,
    sdc_capacity, CatalystTarget, DistributionScenario,
};

/// Ranks above this use bounds instead of O(M) sums.
const LINEAR_SUM_LIMIT: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub exec: Exec,
}

type Params = Vec<(&'static str, String)>;

fn fmt(x: impl ToString) -> String {
    x.to_string()
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    exec: Exec,
    rows: Vec<ResultRow>,
}

impl Ctx<'_> {
    fn push(&mut self, params: &Params, metric: &str, value: f64, prov: Provenance) {
        self.rows
            .push(ResultRow::new(self.cfg.experiment, params, metric, value, prov));
    }

    fn infeasible(&mut self, params: &Params, metric: &str, prov: Provenance) {
        self.rows
            .push(ResultRow::infeasible(self.cfg.experiment, params, metric, prov));
    }

    fn check(&mut self, params: &Params, metric: &str, ok: bool, prov: Provenance) {
        self.rows
            .push(ResultRow::check(self.cfg.experiment, params, metric, ok, prov));
    }

    fn dense_budget(&self) -> usize {
        self.cfg.budget.unwrap_or(DEFAULT_DENSE_BUDGET)
    }

    fn embezzle_budget(&self) -> usize {
        self.cfg.budget.unwrap_or(DEFAULT_EMBEZZLE_BUDGET)
    }

    fn pool(&self, noise: f64, n_random: usize) -> Result<(DensityOperator, CandidatePool)> {
        let c = choi(&self.cfg.channel_at(noise)?)?;
        let pool = CandidatePool::seeded(&c, n_random, self.cfg.seed, self.exec)?;
        Ok((c, pool))
    }

    fn descent_rows(&mut self, params: &Params, report: Result<DescentReport>) -> Result<()> {
        match report {
            Ok(r) => {
                match r.n_mm {
                    Some(n) => self.push(params, "n_mm", n as f64, Provenance::Search),
                    None => self.infeasible(params, "n_mm", Provenance::Search),
                }
                self.push(params, "n_best", r.n_best as f64, Provenance::Sampled);
                self.push(params, "best_index", r.best_index as f64, Provenance::Sampled);
                match r.theta {
                    Some(t) => self.push(params, "theta", t, Provenance::Sampled),
                    None => self.infeasible(params, "theta", Provenance::Sampled),
                }
                Ok(())
            }
            Err(Error::Infeasible(_)) => {
                for m in ["n_mm", "n_best", "best_index", "theta"] {
                    self.infeasible(params, m, Provenance::Sampled);
                }
                Ok(())
            }
            Err(e) => Err(e),
        }
    }
}

/// Runs one experiment; rows come out in sweep order whatever the executor.
pub fn run(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let mut ctx = Ctx {
        cfg,
        exec: opts.exec,
        rows: Vec::new(),
    };
    match cfg.experiment {
        ExperimentKind::Fig3 => fig3(&mut ctx)?,
        ExperimentKind::Fig4 => fig4(&mut ctx)?,
        ExperimentKind::Table3 => table3(&mut ctx)?,
        ExperimentKind::Fig6 => fig6(&mut ctx)?,
        ExperimentKind::Fig7 => fig7(&mut ctx)?,
        ExperimentKind::Fig9 => fig9(&mut ctx)?,
        ExperimentKind::Lemma1Check => convex_split_check(&mut ctx)?,
        ExperimentKind::Thm3Check => embezzle_check(&mut ctx)?,
    }
    Ok(RunOutput {
        metadata: RunMetadata {
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: start.elapsed().as_secs_f64(),
            config: cfg.clone(),
        },
        rows: ctx.rows,
    })
}

/// n_min against ε for I/d² (index 0) and `sample_count` random ζ.
fn fig3(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    for &noise in &cfg.noise_grid {
        let (_, pool) = ctx.pool(noise, cfg.sample_count)?;
        for &eps in &cfg.epsilon_grid {
            let all = pool.n_mins(eps, ctx.exec)?;
            for (i, r) in all.iter().enumerate() {
                let params = vec![("noise", fmt(noise)), ("epsilon", fmt(eps)), ("zeta", fmt(i))];
                let prov = if i == 0 {
                    Provenance::Search
                } else {
                    Provenance::Sampled
                };
                match r {
                    Some(r) => {
                        ctx.push(&params, "n_min", r.n as f64, prov);
                        ctx.push(&params, "p_star", r.p, prov);
                        ctx.push(&params, "k", r.k, prov);
                    }
                    None => {
                        for m in ["n_min", "p_star", "k"] {
                            ctx.infeasible(&params, m, prov);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// ϑ(N, ε) for nested pools; pool N uses the first N random candidates.
fn fig4(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let sizes: Vec<usize> = if cfg.n_grid.is_empty() {
        vec![cfg.sample_count]
    } else {
        cfg.n_grid.clone()
    };
    for &noise in &cfg.noise_grid {
        let (_, pool) = ctx.pool(noise, cfg.sample_count)?;
        for &eps in &cfg.epsilon_grid {
            for &n in &sizes {
                let params = vec![("noise", fmt(noise)), ("epsilon", fmt(eps)), ("N", fmt(n))];
                let report = pool.descent(n, eps, ctx.exec);
                ctx.descent_rows(&params, report)?;
            }
        }
    }
    Ok(())
}

fn table3(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    for &noise in &cfg.noise_grid {
        let (_, pool) = ctx.pool(noise, cfg.sample_count)?;
        for &eps in &cfg.epsilon_grid {
            let params = vec![
                ("noise", fmt(noise)),
                ("epsilon", fmt(eps)),
                ("N", fmt(cfg.sample_count)),
            ];
            let report = pool.descent(cfg.sample_count, eps, ctx.exec);
            ctx.descent_rows(&params, report)?;
        }
    }
    Ok(())
}

/// Catalyst sizes (log₂ dimension) and consumption for both protocols.
fn fig6(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let phi = max_entangled(2)?;
    for &noise in &cfg.noise_grid {
        let (c, pool) = ctx.pool(noise, cfg.sample_count)?;
        let bare = fidelity_with_pure(&c, &phi)?.value();
        for &eps in &cfg.epsilon_grid {
            let params = vec![("noise", fmt(noise)), ("epsilon", fmt(eps))];
            ctx.push(&params, "bare_fidelity", bare, Provenance::ClosedForm);

            let exponent = required_schmidt_rank_log2(2, eps)?;
            match required_schmidt_rank(2, eps) {
                Ok(rank) => {
                    ctx.push(&params, "embezzle_rank", rank as f64, Provenance::ClosedForm);
                    ctx.push(
                        &params,
                        "embezzle_log2_dim",
                        2.0 * (rank as f64).log2(),
                        Provenance::ClosedForm,
                    );
                    if rank <= LINEAR_SUM_LIMIT {
                        let r = rank as usize;
                        ctx.push(
                            &params,
                            "embezzle_consumption",
                            consumption_residue_form(2, r)?,
                            Provenance::ClosedForm,
                        );
                        let f = protocol_fidelity(2, r)?.fidelity;
                        ctx.push(&params, "embezzle_delta_p_err", f - bare, Provenance::ClosedForm);
                    } else {
                        ctx.push(
                            &params,
                            "embezzle_consumption",
                            consumption_bound(2, r_usize(rank)),
                            Provenance::Bound,
                        );
                        ctx.push(
                            &params,
                            "embezzle_delta_p_err",
                            (1.0 - eps) - bare,
                            Provenance::Bound,
                        );
                    }
                }
                Err(Error::OutOfRange { .. }) => {
                    ctx.push(&params, "embezzle_log2_dim", 2.0 * exponent, Provenance::Bound);
                    ctx.push(
                        &params,
                        "embezzle_consumption",
                        (2.0 / exponent).sqrt(),
                        Provenance::Bound,
                    );
                    ctx.push(&params, "embezzle_delta_p_err", (1.0 - eps) - bare, Provenance::Bound);
                }
                Err(e) => return Err(e),
            }

            match pool.descent(cfg.sample_count, eps, ctx.exec) {
                Ok(r) => {
                    let best = r.best;
                    ctx.push(&params, "cs_random_copies", best.n as f64, Provenance::Sampled);
                    ctx.push(
                        &params,
                        "cs_random_log2_dim",
                        2.0 * (best.n - 1) as f64,
                        Provenance::Sampled,
                    );
                    ctx.push(
                        &params,
                        "cs_random_consumption",
                        consumption_bound_cs(best.k, best.n),
                        Provenance::Bound,
                    );
                    let mm = pool.reference_n_min(eps)?;
                    match mm {
                        Some(m) => {
                            ctx.push(&params, "cs_mixed_copies", m.n as f64, Provenance::Search);
                            ctx.push(
                                &params,
                                "cs_mixed_log2_dim",
                                2.0 * (m.n - 1) as f64,
                                Provenance::Search,
                            );
                            ctx.push(
                                &params,
                                "cs_mixed_consumption",
                                consumption_bound_cs(m.k, m.n),
                                Provenance::Bound,
                            );
                        }
                        None => {
                            for metric in ["cs_mixed_copies", "cs_mixed_log2_dim", "cs_mixed_consumption"] {
                                ctx.infeasible(&params, metric, Provenance::Search);
                            }
                        }
                    }
                    ctx.push(&params, "cs_delta_p_err", (1.0 - eps) - bare, Provenance::Bound);
                }
                Err(Error::Infeasible(_)) => {
                    for metric in [
                        "cs_random_copies",
                        "cs_random_log2_dim",
                        "cs_random_consumption",
                        "cs_mixed_copies",
                        "cs_mixed_log2_dim",
                        "cs_mixed_consumption",
                        "cs_delta_p_err",
                    ] {
                        ctx.infeasible(&params, metric, Provenance::Sampled);
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

fn r_usize(rank: u64) -> usize {
    usize::try_from(rank).unwrap_or(usize::MAX)
}

/// Relay-position sweep along a depolarizing line.
fn fig7(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let alpha = cfg.alpha.expect("validated");
    let length = cfg.length.expect("validated");
    let base = vec![("alpha", fmt(alpha)), ("length", fmt(length))];
    ctx.push(
        &base,
        "bare_threshold",
        distribution_threshold_bare(alpha)?,
        Provenance::ClosedForm,
    );
    ctx.push(
        &base,
        "correlated_threshold",
        2.0 * distribution_threshold_bare(alpha)?,
        Provenance::ClosedForm,
    );
    for &s in &cfg.noise_grid {
        for &eps in &cfg.epsilon_grid {
            let mut params = base.clone();
            params.push(("s", fmt(s)));
            params.push(("epsilon", fmt(eps)));
            let scenario = DistributionScenario::new(alpha, length, s)?;
            let target = CatalystTarget {
                epsilon: eps,
                sample_count: cfg.sample_count,
                seed: cfg.seed,
                exec: ctx.exec,
            };
            ctx.push(&params, "transmission", scenario.transmission(), Provenance::ClosedForm);
            match distribution_entanglement_profile(scenario, Some(target)) {
                Ok(p) => {
                    ctx.push(&params, "ppt_witness", p.ppt_witness, Provenance::DenseOracle);
                    let cat = p.catalysts.expect("target given");
                    ctx.push(&params, "cs_copies", cat.convex_split_copies as f64, Provenance::Sampled);
                    ctx.push(&params, "cs_log2_dim", cat.convex_split_log2_dim, Provenance::Sampled);
                    ctx.push(&params, "embezzle_rank", cat.embezzle_rank as f64, Provenance::ClosedForm);
                    ctx.push(
                        &params,
                        "embezzle_log2_dim",
                        cat.embezzle_log2_dim,
                        Provenance::ClosedForm,
                    );
                    ctx.push(
                        &params,
                        "embezzle_capacity",
                        cat.embezzle_capacity,
                        Provenance::ClosedForm,
                    );
                }
                Err(Error::Infeasible(_)) => {
                    for m in ["ppt_witness", "cs_copies", "cs_log2_dim"] {
                        ctx.infeasible(&params, m, Provenance::Sampled);
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

/// Dense-coding capacity of the embezzling protocol's AB marginal.
fn fig9(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let budget = ctx.embezzle_budget();
    for &d in &cfg.d_grid {
        for &rank in &cfg.rank_grid {
            let params = vec![("d", fmt(d)), ("M", fmt(rank))];
            if rank < d {
                ctx.infeasible(&params, "sdc_capacity", Provenance::ClosedForm);
                continue;
            }
            let state = catalytic_sdc_state(d, rank)?;
            let cap = sdc_capacity(&state)?;
            ctx.push(&params, "sdc_capacity", cap.value, Provenance::ClosedForm);
            ctx.push(
                &params,
                "conditional_entropy",
                cap.conditional_entropy,
                Provenance::ClosedForm,
            );
            ctx.push(&params, "upper_bound", 2.0 * (d as f64).log2(), Provenance::ClosedForm);
            ctx.check(
                &params,
                "within_bounds",
                cap.value >= -1e-9 && cap.value <= 2.0 * (d as f64).log2() + 1e-9,
                Provenance::ClosedForm,
            );
            ctx.push(
                &params,
                "catalyst_consumption",
                consumption_residue_form(d, rank)?,
                Provenance::ClosedForm,
            );
            if d * rank <= budget {
                let oracle = protocol_state_ab(d, rank, budget)?;
                let dev = oracle.matrix().max_abs_diff(state.matrix());
                ctx.push(&params, "state_oracle_deviation", dev, Provenance::DenseOracle);
                ctx.check(&params, "state_matches_oracle", dev < 1e-9, Provenance::DenseOracle);
            }
        }
    }
    Ok(())
}

/// Dense convex-split verification over seeded random (ρ, τ) pairs.
fn convex_split_check(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let ns: Vec<usize> = if cfg.n_grid.is_empty() {
        vec![1, 2, 3, 4]
    } else {
        cfg.n_grid.clone()
    };
    let budget = ctx.dense_budget();
    let seed = cfg.seed;
    let cases = ctx.exec.map(cfg.sample_count, |i| {
        let mut rng = task_rng(seed, i as u64);
        let rho = random_full_rank_state(4, vec![2, 2], &mut rng)?;
        let tau = random_full_rank_state(4, vec![2, 2], &mut rng)?;
        ns.iter()
            .map(|&n| match verify_convex_split(&rho, &tau, n, budget) {
                Ok(c) => Ok(Some(c)),
                Err(Error::BudgetExceeded { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()
    });
    for (i, case) in cases.into_iter().enumerate() {
        for (check, &n) in case?.into_iter().zip(&ns) {
            let params = vec![("case", fmt(i)), ("n", fmt(n))];
            let Some(c) = check else {
                ctx.infeasible(&params, "distance", Provenance::DenseOracle);
                continue;
            };
            ctx.push(&params, "k", c.k, Provenance::ClosedForm);
            ctx.push(&params, "distance", c.distance, Provenance::DenseOracle);
            ctx.push(&params, "bound", c.bound, Provenance::ClosedForm);
            if let Some(cons) = c.consumption {
                ctx.push(&params, "consumption", cons, Provenance::DenseOracle);
            }
            ctx.check(&params, "bound_satisfied", c.satisfied(1e-9), Provenance::DenseOracle);
        }
    }
    Ok(())
}

/// Transport, fidelity and consumption checks for the embezzling protocol.
fn embezzle_check(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let budget = ctx.embezzle_budget();
    let ranks: Vec<usize> = if cfg.rank_grid.is_empty() {
        vec![4, 8, 16, 32, 64]
    } else {
        cfg.rank_grid.clone()
    };
    for &m in &cfg.m_grid {
        for &rank in ranks.iter().filter(|&&r| r >= m) {
            let params = vec![("m", fmt(m)), ("M", fmt(rank))];
            if m * rank <= budget {
                ctx.check(
                    &params,
                    "transport",
                    unitary_transport_check(m, rank)?,
                    Provenance::DenseOracle,
                );
            }
            let pf = protocol_fidelity(m, rank)?;
            ctx.push(&params, "fidelity", pf.fidelity, Provenance::ClosedForm);
            ctx.push(&params, "inner", pf.inner, Provenance::ClosedForm);
            ctx.push(&params, "inner_lower_bound", pf.inner_lower_bound, Provenance::Bound);
            if rank > m {
                ctx.check(
                    &params,
                    "inner_bound_holds",
                    pf.inner >= pf.inner_lower_bound,
                    Provenance::ClosedForm,
                );
            }
            let rec = consumption_exact(m, rank, budget)?;
            ctx.push(&params, "consumption_closed_form", rec.exact, Provenance::ClosedForm);
            ctx.push(&params, "consumption_bound", rec.bound, Provenance::Bound);
            if let Some(direct) = rec.direct {
                ctx.push(&params, "consumption_direct", direct, Provenance::DenseOracle);
                ctx.check(
                    &params,
                    "consumption_within_bound",
                    direct <= rec.bound + 1e-9,
                    Provenance::DenseOracle,
                );
                ctx.check(
                    &params,
                    "closed_form_matches_direct",
                    (direct - rec.exact).abs() <= 1e-8,
                    Provenance::DenseOracle,
                );
            }
        }
        for &eps in &cfg.epsilon_grid {
            let params = vec![("m", fmt(m)), ("epsilon", fmt(eps))];
            match required_schmidt_rank(m, eps) {
                Ok(rank) if rank <= LINEAR_SUM_LIMIT => {
                    let f = protocol_fidelity(m, rank as usize)?.fidelity;
                    ctx.push(&params, "required_rank", rank as f64, Provenance::ClosedForm);
                    ctx.push(&params, "p_err", 1.0 - f, Provenance::ClosedForm);
                    ctx.check(&params, "p_err_within_epsilon", 1.0 - f <= eps, Provenance::ClosedForm);
                }
                Ok(rank) => {
                    ctx.push(&params, "required_rank", rank as f64, Provenance::ClosedForm);
                    ctx.infeasible(&params, "p_err", Provenance::ClosedForm);
                }
                Err(Error::OutOfRange { .. }) => {
                    ctx.infeasible(&params, "required_rank", Provenance::ClosedForm);
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

/// Writes `<path>` as CSV and the same path with a `.json` extension.
pub fn write_outputs(out: &RunOutput, csv_path: &Path) -> Result<(PathBuf, PathBuf)> {
    let io = |p: &Path, e: std::io::Error| Error::Io(format!("{}: {e}", p.display()));
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    let json_path = csv_path.with_extension("json");
    let file = std::fs::File::create(csv_path).map_err(|e| io(csv_path, e))?;
    out.write_csv(std::io::BufWriter::new(file))?;
    std::fs::write(&json_path, out.to_json_string()?).map_err(|e| io(&json_path, e))?;
    Ok((csv_path.to_path_buf(), json_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::RowStatus;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(text).unwrap()
    }

    fn values(out: &RunOutput, metric: &str) -> Vec<f64> {
        out.rows
            .iter()
            .filter(|r| r.metric == metric)
            .filter_map(|r| r.value)
            .collect()
    }

    #[test]
    fn fig9_converges_to_dense_coding_limit() {
        let c = cfg(r#"
experiment = "fig9"
output_path = "f9.csv"
d_grid = [2, 3]
rank_grid = [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]
"#);
        let out = run(&c, RunOptions::default()).unwrap();
        assert_eq!(out.violations(), 0);
        let caps: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.metric == "sdc_capacity" && r.params.starts_with("d=2;"))
            .filter_map(|r| r.value)
            .collect();
        assert!(caps.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(*caps.last().unwrap() > 1.95);
    }

    #[test]
    fn convex_split_rows_all_satisfied() {
        let c = cfg(r#"
experiment = "lemma1-check"
output_path = "l1.csv"
sample_count = 3
n_grid = [1, 2, 3]
seed = 4
"#);
        let out = run(&c, RunOptions::default()).unwrap();
        let sat = values(&out, "bound_satisfied");
        assert_eq!(sat.len(), 9);
        assert!(sat.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn embezzle_checks_pass() {
        let c = cfg(r#"
experiment = "thm3-check"
output_path = "t3.csv"
m_grid = [2, 3]
rank_grid = [3, 4, 9, 16]
epsilon_grid = [0.19, 0.5]
"#);
        let out = run(&c, RunOptions::default()).unwrap();
        assert_eq!(out.violations(), 0);
        assert!(values(&out, "transport").iter().all(|&v| v == 1.0));
        assert!(out.rows.iter().any(|r| r.metric == "p_err_within_epsilon"));
    }

    #[test]
    fn table3_is_deterministic_and_exec_independent() {
        let c = cfg(r#"
experiment = "table3"
noise_grid = [0.4]
epsilon_grid = [0.1, 0.3]
sample_count = 6
seed = 9
output_path = "t.csv"
"#);
        let a = run(&c, RunOptions { exec: Exec::Sequential }).unwrap();
        let b = run(&c, RunOptions { exec: Exec::Parallel }).unwrap();
        assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
        assert!(values(&a, "theta").iter().all(|&t| t >= 0.0));
    }

    #[test]
    fn seed_changes_sampled_rows_only() {
        let text = r#"
experiment = "fig3"
noise_grid = [0.4]
epsilon_grid = [0.2]
sample_count = 2
seed = 1
output_path = "f3.csv"
"#;
        let a = run(&cfg(text), RunOptions::default()).unwrap();
        let b = run(&cfg(&text.replace("seed = 1", "seed = 2")), RunOptions::default()).unwrap();
        let pick = |o: &RunOutput, p: Provenance| {
            o.rows
                .iter()
                .filter(|r| r.provenance == p)
                .cloned()
                .collect::<Vec<_>>()
        };
        assert_eq!(pick(&a, Provenance::Search), pick(&b, Provenance::Search));
        assert_ne!(pick(&a, Provenance::Sampled), pick(&b, Provenance::Sampled));
    }

    #[test]
    fn fig6_and_fig7_produce_rows() {
        let f6 = cfg(r#"
experiment = "fig6"
noise_grid = [0.75]
epsilon_grid = [0.05, 0.3]
sample_count = 4
output_path = "f6.csv"
"#);
        let out = run(&f6, RunOptions::default()).unwrap();
        for m in ["embezzle_log2_dim", "cs_random_log2_dim", "cs_mixed_log2_dim"] {
            assert_eq!(values(&out, m).len(), 2, "{m}");
        }
        assert!(values(&out, "embezzle_delta_p_err").iter().all(|&v| v > 0.0));
        let rs = values(&out, "cs_random_copies");
        let mm = values(&out, "cs_mixed_copies");
        assert!(rs.iter().zip(&mm).all(|(r, m)| r <= m));

        let f7 = cfg(r#"
experiment = "fig7"
channel = "depolarizing"
noise_grid = [0.0, 30.0, 60.0]
epsilon_grid = [0.1]
sample_count = 3
alpha = 0.01
length = 240.0
output_path = "f7.csv"
"#);
        let out = run(&f7, RunOptions::default()).unwrap();
        assert!(out.rows.iter().all(|r| r.status == RowStatus::Ok));
        assert_eq!(values(&out, "cs_log2_dim").len(), 3);
    }

    #[test]
    fn writes_csv_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("out.csv");
        let c = cfg(r#"
experiment = "fig9"
output_path = "ignored.csv"
d_grid = [2]
rank_grid = [2, 4]
"#);
        let out = run(&c, RunOptions::default()).unwrap();
        let (csv_path, json_path) = write_outputs(&out, &path).unwrap();
        let text = std::fs::read_to_string(csv_path).unwrap();
        assert!(text.starts_with("experiment,params,metric,value,status,provenance\n"));
        let json: RunOutput =
            serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
        assert_eq!(json.rows, out.rows);
    }
}
