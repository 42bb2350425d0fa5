//! Seeded repetitions of the design, estimation and bandit experiments.

use std::time::Instant;

use rayon::prelude::*;

use popart::bandit::{
    run_estc_baseline_with, run_etc_popart_with, run_restricted_phase_elim_with, AlgorithmReport,
    BanditEnv, ESTC_LASSO_MAX_ITER, ESTC_LASSO_TOL,
};
use popart::design::{solve_c_min, solve_h_star, DesignSolution, SolverOptions};
use popart::estimator::{lasso_cd, popart_for_noise, PenaltyRule};
use popart::instances::{
    hard_instance_actions, hard_instance_h_star_squared, hard_instance_inverse_c_min_bracket,
    spanning_unit_sphere_actions, theta_generator, ThetaCase,
};
use popart::linalg::l1_norm;
use popart::{ActionSet, Vector};

use crate::config::{ExperimentConfig, Mode, Preset};
use crate::error::{CliError, Result};
use crate::matrix_io::{read_matrix, read_vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    L1Error,
    CumRegret,
    SupportRecovered,
    HStarSq,
    CMin,
    RuntimeMs,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::L1Error => "l1_error",
            Metric::CumRegret => "cum_regret",
            Metric::SupportRecovered => "support_recovered",
            Metric::HStarSq => "h_star_sq",
            Metric::CMin => "c_min",
            Metric::RuntimeMs => "runtime_ms",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub preset: Preset,
    pub algorithm: &'static str,
    pub seed: u64,
    pub n: usize,
    pub metric: Metric,
    pub value: f64,
}

pub const CSV_HEADER: &str = "preset,algorithm,seed,n,metric,value";

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.preset,
            self.algorithm,
            self.seed,
            self.n,
            self.metric.name(),
            self.value
        )
    }
}

pub const L1_ALGORITHMS: [&str; 3] = ["popart", "c_min-lasso", "h2-lasso"];
pub const BANDIT_ALGORITHMS: [&str; 3] = ["etc-popart", "estc", "restricted-phase-elim"];

/// Everything computed by a run, before anything is written.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub timings: Vec<ResultRow>,
    /// Per-rep failures, `seed algorithm: message`.
    pub failures: Vec<String>,
    /// Closed-form checks printed by design runs.
    pub report: Vec<String>,
}

/// Instance pieces that do not depend on the rep seed.
struct Fixed {
    actions: Option<ActionSet>,
    theta: Option<Vector>,
    designs: Option<(DesignSolution, DesignSolution)>,
}

fn solver_options() -> SolverOptions {
    SolverOptions::default()
}

fn theta_case(preset: Preset, mode: Mode) -> Option<ThetaCase> {
    match preset {
        Preset::Case1L1 => Some(ThetaCase::Case1L1),
        Preset::Case1Bandit => Some(ThetaCase::Case1Bandit),
        Preset::Case2L1 | Preset::Case2Bandit => Some(ThetaCase::Case2),
        Preset::DesignDiagnostics | Preset::Custom => {
            debug_assert!(preset == Preset::Custom || mode == Mode::Design);
            None
        }
    }
}

impl Fixed {
    fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        let actions = match cfg.preset {
            Preset::Custom => {
                let path = cfg.actions_path.as_ref().expect("validated");
                Some(ActionSet::new(read_matrix(path)?)?)
            }
            p if p.sphere_arms() => None,
            _ => Some(hard_instance_actions(cfg.d)?),
        };
        let theta = match &cfg.theta_path {
            Some(path) => {
                let theta = read_vector(path)?;
                let arms = actions.as_ref().expect("custom has actions");
                if theta.len() != arms.dim() {
                    return Err(CliError::Config(format!(
                        "{}: theta has {} entries, arms have dimension {}",
                        path.display(),
                        theta.len(),
                        arms.dim()
                    )));
                }
                Some(theta)
            }
            None => None,
        };
        let designs = match &actions {
            Some(a) if cfg.mode != Mode::Design => Some(solve_designs(a)?),
            _ => None,
        };
        Ok(Self {
            actions,
            theta,
            designs,
        })
    }

    fn actions(&self, cfg: &ExperimentConfig, seed: u64) -> popart::Result<ActionSet> {
        match &self.actions {
            Some(a) => Ok(a.clone()),
            None => Ok(spanning_unit_sphere_actions(cfg.d, cfg.k, seed)?.0),
        }
    }

    /// Environment for one rep, plus designs when they depend on the seed.
    fn rep_setup(&self, cfg: &ExperimentConfig, seed: u64) -> popart::Result<RepSetup<'_>> {
        let env = self.env(cfg, seed)?;
        let owned = match &self.designs {
            Some(_) => None,
            None => Some(solve_designs(env.actions())?),
        };
        Ok(RepSetup {
            env,
            owned,
            fixed: self,
        })
    }

    fn env(&self, cfg: &ExperimentConfig, seed: u64) -> popart::Result<BanditEnv> {
        let actions = self.actions(cfg, seed)?;
        let theta = match (&self.theta, theta_case(cfg.preset, cfg.mode)) {
            (Some(t), _) => t.clone(),
            (None, Some(case)) => theta_generator(case, actions.dim(), seed)?,
            (None, None) => unreachable!("validated"),
        };
        BanditEnv::new(actions, theta, cfg.sigma, seed)
    }
}

struct RepSetup<'a> {
    env: BanditEnv,
    owned: Option<(DesignSolution, DesignSolution)>,
    fixed: &'a Fixed,
}

impl RepSetup<'_> {
    /// The `H^2` and `C_min` solutions.
    fn designs(&self) -> (&DesignSolution, &DesignSolution) {
        let (h, c) = self
            .owned
            .as_ref()
            .or(self.fixed.designs.as_ref())
            .expect("designs solved");
        (h, c)
    }
}

/// Sample points at which cumulative regret is reported: twenty evenly
/// spaced rounds plus the midpoint.
pub fn regret_checkpoints(horizon: usize) -> Vec<usize> {
    let mut points: Vec<usize> = (1..=20)
        .map(|j| j * horizon / 20)
        .filter(|&t| t > 0)
        .collect();
    if horizon >= 2 {
        points.push(horizon / 2);
    }
    points.push(horizon);
    points.sort_unstable();
    points.dedup();
    points
}

struct RepCtx<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    out: Outcome,
}

impl RepCtx<'_> {
    fn row(&mut self, algorithm: &'static str, n: usize, metric: Metric, value: f64) {
        let row = ResultRow {
            preset: self.cfg.preset,
            algorithm,
            seed: self.seed,
            n,
            metric,
            value,
        };
        if metric == Metric::RuntimeMs {
            self.out.timings.push(row);
        } else {
            self.out.rows.push(row);
        }
    }

    fn fail(&mut self, algorithm: &str, err: &dyn std::fmt::Display) {
        self.out
            .failures
            .push(format!("seed {} {algorithm}: {err}", self.seed));
    }

    fn timed<T>(&mut self, algorithm: &'static str, n: usize, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let value = f();
        self.row(
            algorithm,
            n,
            Metric::RuntimeMs,
            start.elapsed().as_secs_f64() * 1e3,
        );
        value
    }
}

fn design_rep(ctx: &mut RepCtx<'_>, fixed: &Fixed) {
    let actions = match fixed.actions(ctx.cfg, ctx.seed) {
        Ok(a) => a,
        Err(e) => {
            ctx.fail("design", &e);
            ctx.row("h-star", 0, Metric::HStarSq, f64::NAN);
            ctx.row("c-min", 0, Metric::CMin, f64::NAN);
            return;
        }
    };
    let h = ctx.timed("h-star", 0, || solve_h_star(&actions, &solver_options()));
    match h {
        Ok(sol) => ctx.row("h-star", 0, Metric::HStarSq, sol.objective),
        Err(e) => {
            ctx.fail("h-star", &e);
            ctx.row("h-star", 0, Metric::HStarSq, f64::NAN);
        }
    }
    let c = ctx.timed("c-min", 0, || solve_c_min(&actions, &solver_options()));
    match c {
        Ok(sol) => ctx.row("c-min", 0, Metric::CMin, sol.objective),
        Err(e) => {
            ctx.fail("c-min", &e);
            ctx.row("c-min", 0, Metric::CMin, f64::NAN);
        }
    }
}

fn solve_designs(actions: &ActionSet) -> popart::Result<(DesignSolution, DesignSolution)> {
    Ok((
        solve_h_star(actions, &solver_options())?,
        solve_c_min(actions, &solver_options())?,
    ))
}

fn estimate_rep(ctx: &mut RepCtx<'_>, fixed: &Fixed) {
    let cfg = ctx.cfg;
    let nan_rows = |ctx: &mut RepCtx<'_>| {
        for alg in L1_ALGORITHMS {
            for &n in &cfg.n_grid {
                ctx.row(alg, n, Metric::L1Error, f64::NAN);
            }
        }
    };
    let setup = match fixed.rep_setup(cfg, ctx.seed) {
        Ok(v) => v,
        Err(e) => {
            ctx.fail("setup", &e);
            nan_rows(ctx);
            return;
        }
    };
    let env = &setup.env;
    let (h, c) = setup.designs();
    let r_max = cfg.r_max.unwrap_or_else(|| env.default_r_max());
    let n_max = *cfg.n_grid.last().expect("validated");
    let theta = env.theta_star().clone();
    let d = env.dim();

    // one draw per design; every grid point uses a prefix of it
    let batches = env
        .draw_batch(&h.design, n_max, 0)
        .and_then(|bh| Ok((bh, env.draw_batch(&c.design, n_max, 1)?)));
    let (batch_h, batch_c) = match batches {
        Ok(b) => b,
        Err(e) => {
            ctx.fail("sampling", &e);
            nan_rows(ctx);
            return;
        }
    };

    for &n in &cfg.n_grid {
        let view_h = batch_h.view().split_at(n).0;
        let est = ctx.timed("popart", n, || {
            popart_for_noise(view_h, &h.cov, r_max, cfg.sigma, cfg.delta)
        });
        let err = match est {
            Ok(e) => l1_norm(&(&e.theta_hat - &theta)),
            Err(e) => {
                ctx.fail("popart", &e);
                f64::NAN
            }
        };
        ctx.row("popart", n, Metric::L1Error, err);

        let lambda = PenaltyRule::default().lambda(n, d, cfg.sigma, cfg.delta);
        for (alg, batch) in [("c_min-lasso", &batch_c), ("h2-lasso", &batch_h)] {
            let view = batch.view().split_at(n).0;
            let fit = ctx.timed(alg, n, || {
                lasso_cd(view, lambda, ESTC_LASSO_TOL, ESTC_LASSO_MAX_ITER)
            });
            let err = match fit {
                Ok(f) => l1_norm(&(&f.coef - &theta)),
                Err(e) => {
                    ctx.fail(alg, &e);
                    f64::NAN
                }
            };
            ctx.row(alg, n, Metric::L1Error, err);
        }
    }
}

fn bandit_rep(ctx: &mut RepCtx<'_>, fixed: &Fixed) {
    let cfg = ctx.cfg;
    let horizon = cfg.effective_horizon();
    let checkpoints = regret_checkpoints(horizon);
    let nan_rows = |ctx: &mut RepCtx<'_>, alg: &'static str| {
        for &t in &checkpoints {
            ctx.row(alg, t, Metric::CumRegret, f64::NAN);
        }
        ctx.row(alg, horizon, Metric::SupportRecovered, f64::NAN);
    };
    let setup = match fixed.rep_setup(cfg, ctx.seed) {
        Ok(v) => v,
        Err(e) => {
            ctx.fail("setup", &e);
            for alg in BANDIT_ALGORITHMS {
                nan_rows(ctx, alg);
            }
            return;
        }
    };
    let env = &setup.env;
    let (h, c) = setup.designs();
    let r_max = cfg.r_max.unwrap_or_else(|| env.default_r_max());
    let truth = env.support();
    let (s, delta, m) = (cfg.s, cfg.delta, cfg.m);

    for alg in BANDIT_ALGORITHMS {
        let report: popart::Result<AlgorithmReport> = ctx.timed(alg, horizon, || match alg {
            "etc-popart" => run_etc_popart_with(env, h, horizon, delta, r_max, s),
            "estc" => run_estc_baseline_with(env, c, horizon, delta, r_max, s),
            _ => run_restricted_phase_elim_with(env, h, horizon, delta, r_max, s, m),
        });
        match report {
            Ok(rep) => {
                for &t in &checkpoints {
                    ctx.row(alg, t, Metric::CumRegret, rep.regret.after(t));
                }
                let recovered = rep.recovered_support.as_ref().map_or(f64::NAN, |sup| {
                    if *sup == truth {
                        1.0
                    } else {
                        0.0
                    }
                });
                ctx.row(alg, horizon, Metric::SupportRecovered, recovered);
            }
            Err(e) => {
                ctx.fail(alg, &e);
                nan_rows(ctx, alg);
            }
        }
    }
}

fn design_report(cfg: &ExperimentConfig, rows: &[ResultRow]) -> Vec<String> {
    let mut lines = Vec::new();
    let mean = |metric: Metric| {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| r.value)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (h, c) = (mean(Metric::HStarSq), mean(Metric::CMin));
    lines.push(format!("H*^2 = {h}"));
    lines.push(format!("C_min = {c} (1/C_min = {})", 1.0 / c));
    if matches!(
        cfg.preset,
        Preset::Case1L1 | Preset::Case1Bandit | Preset::DesignDiagnostics
    ) {
        let closed = hard_instance_h_star_squared(cfg.d);
        let rel = (h - closed).abs() / closed;
        lines.push(format!(
            "hard instance d = {}: closed-form H*^2 = {closed}, relative difference {rel:.3e} ({})",
            cfg.d,
            if rel <= 0.02 {
                "within 2%"
            } else {
                "outside 2%"
            }
        ));
        if let Ok((lo, hi)) = hard_instance_inverse_c_min_bracket(cfg.d) {
            let inv = 1.0 / c;
            lines.push(format!(
                "bracket [min f, 2 min f] = [{lo}, {hi}]: 1/C_min {}",
                if inv >= lo && inv <= hi {
                    "inside"
                } else {
                    "outside"
                }
            ));
        }
    }
    lines
}

/// Compute every row of the experiment without touching the file system.
/// Rep `k` uses seed `base_seed + k`; rows come back in rep order whatever
/// the thread count.
pub fn compute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let fixed = Fixed::prepare(cfg)?;
    let reps: Vec<Outcome> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let mut ctx = RepCtx {
                cfg,
                seed: cfg.seed_for_rep(rep),
                out: Outcome::default(),
            };
            match cfg.mode {
                Mode::Design => design_rep(&mut ctx, &fixed),
                Mode::Estimate => estimate_rep(&mut ctx, &fixed),
                Mode::Bandit => bandit_rep(&mut ctx, &fixed),
            }
            ctx.out
        })
        .collect();
    let mut out = Outcome::default();
    for r in reps {
        out.rows.extend(r.rows);
        out.timings.extend(r.timings);
        out.failures.extend(r.failures);
    }
    if cfg.mode == Mode::Design {
        out.report = design_report(cfg, &out.rows);
    }
    Ok(out)
}
