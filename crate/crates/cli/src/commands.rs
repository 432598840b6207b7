//! The five subcommands. Each one returns its report files in memory together
//! with an exit status; writing them out is left to the caller.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rbsde_core::experiments::{convergence_study, dependence_study, errors_non_increasing};
use rbsde_core::local_time::{k_from_local_times, RelativeRmse};
use rbsde_core::skorohod::{
    check_skorohod_conditions, lipschitz_gap, step_projection_oracle, xi_max_formula, xi_slaby,
};
use rbsde_core::solver::{solve_picard, DriverKind, PicardReport, TerminalSpec};
use rbsde_core::{grid::sup_norm_distance, BarrierPair, BarrierSpec, DiscretePath, TimeGrid};
use serde_json::json;

use crate::config::{terminal_spec, ScenarioConfig, ValidationError};
use crate::output::{csv_bytes, json_bytes, num};
use crate::sample;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Io = 1,
    Usage = 2,
    NotConverged = 3,
    CheckFailed = 4,
    NoContraction = 5,
}

/// Gap allowed between the three reflection routes.
pub const ESM_TOL: f64 = 1e-12;
/// Largest local-time mesh; these runs use single walk paths, not the tree.
pub const MAX_WALK_MESH: usize = 1 << 14;

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub mesh: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub files: Vec<(&'static str, Vec<u8>)>,
    pub exit: Exit,
    pub summary: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("{0}")]
    Failed(String),
}

impl CommandError {
    pub fn exit(&self) -> Exit {
        match self {
            Self::Validation(_) => Exit::Usage,
            Self::Failed(_) => Exit::CheckFailed,
        }
    }
}

type CmdResult = Result<CommandOutput, CommandError>;

fn failed(context: &str) -> impl FnOnce(rbsde_core::Error) -> CommandError + '_ {
    move |e| CommandError::Failed(format!("{context}: {e}"))
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CommandError> {
    csv_bytes(header, rows).map_err(|e| CommandError::Failed(format!("csv: {e}")))
}

pub fn esm_check(cfg: &ScenarioConfig, o: &Overrides) -> CmdResult {
    let paths = o.paths.unwrap_or(cfg.esm_check.paths);
    let seed = o.seed.unwrap_or(cfg.seed);
    let (amp, noise) = (cfg.esm_check.amplitude, cfg.esm_check.noise);
    if !(amp > 0.0 && amp.is_finite() && noise >= 0.0 && noise.is_finite()) {
        return Err(ValidationError("esm_check: amplitude must be positive and noise nonnegative".into()).into());
    }
    let b = cfg.barrier_pair()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(paths);
    let (mut worst_gap, mut worst_lip) = (0.0_f64, 0.0_f64);
    for id in 0..paths {
        let x = sample::zigzag(&mut rng, &b, amp).map_err(failed("sampling"))?;
        let x2 = sample::perturb(&mut rng, &x, &b, noise).map_err(failed("sampling"))?;
        let mf = xi_max_formula(&x, &b).map_err(failed("max formula"))?;
        let sl = xi_slaby(&x, &b).map_err(failed("iterated formula"))?;
        let oracle = step_projection_oracle(&x, &b).map_err(failed("step projection"))?;
        let gap_sl = sup_norm_distance(&mf, &sl).map_err(failed("compare"))?;
        let gap_or = sup_norm_distance(&mf, &oracle.xi).map_err(failed("compare"))?;
        let lip = lipschitz_gap(&x, &x2, &b).map_err(failed("lipschitz"))?;
        let (flat_u, flat_l) = check_skorohod_conditions(&oracle, &b).map_err(failed("flat-off"))?;
        worst_gap = worst_gap.max(gap_sl).max(gap_or).max(flat_l.abs()).max(flat_u.abs());
        worst_lip = worst_lip.min(lip);
        rows.push(vec![id.to_string(), num(gap_sl), num(gap_or), num(lip), num(flat_l), num(flat_u)]);
    }
    let header = [
        "path_id",
        "max_formula_vs_slaby_gap",
        "max_formula_vs_oracle_gap",
        "lipschitz_gap",
        "flat_off_residual_l",
        "flat_off_residual_u",
    ];
    let ok = worst_gap <= ESM_TOL && worst_lip >= -ESM_TOL;
    Ok(CommandOutput {
        files: vec![("esm_check.csv", csv(&header, &rows)?)],
        exit: if ok { Exit::Ok } else { Exit::CheckFailed },
        summary: format!("{paths} paths, largest route gap {worst_gap:e}, most negative lipschitz gap {worst_lip:e}"),
    })
}

fn opt(v: Option<f64>) -> serde_json::Value {
    v.map_or(serde_json::Value::Null, |x| json!(x))
}

fn solve_exit(report: &PicardReport, dt: f64) -> Exit {
    let c = &report.constants;
    if !report.converged {
        if c.condition_holds() {
            Exit::NotConverged
        } else {
            Exit::NoContraction
        }
    } else if report.residuals.passes(dt, c.l1, c.l2) {
        Exit::Ok
    } else {
        Exit::CheckFailed
    }
}

pub fn solve(cfg: &ScenarioConfig, _o: &Overrides) -> CmdResult {
    let s = cfg.scenario()?;
    let pc = cfg.picard_config()?;
    let r = solve_picard(&s, &pc).map_err(failed("solve"))?;
    let dt = s.grid().dt();
    let exit = solve_exit(&r, dt);

    let rows: Vec<Vec<String>> = r
        .distances
        .iter()
        .zip(&r.ratios)
        .enumerate()
        .map(|(i, (d, q))| vec![(i + 1).to_string(), num(*d), q.map_or(String::new(), num)])
        .collect();
    let picard_csv = csv(&["iter", "distance", "ratio"], &rows)?;

    let c = &r.constants;
    let res = &r.residuals;
    let measured: Vec<f64> = r.ratios.iter().flatten().copied().collect();
    let report = json!({
        "converged": r.converged,
        "iterations": r.iterations,
        "final_distance": r.distances.last().copied(),
        "exit_code": exit as i32,
        "projection": format!("{:?}", pc.projection).to_lowercase(),
        "residuals": {
            "equation": res.equation,
            "equation_bound": 10.0 * dt * (1.0 + c.l1 + c.l2),
            "containment": res.containment,
            "flat_off_lower": res.flat_off_lower,
            "flat_off_upper": res.flat_off_upper,
            "flat_off_bound": 1e-9 * res.regulator_variation.max(1.0),
            "regulator_variation": res.regulator_variation,
            "min_increment": res.min_increment,
            "passes": res.passes(dt, c.l1, c.l2),
        },
        "diagnostics": {
            "adaptedness_gap": r.adaptedness_gap,
            "projection_gap": r.projection_gap,
            "max_formula_gap": r.max_formula_gap,
        },
        "smallness": {
            "L1": c.l1,
            "L2": c.l2,
            "T": c.horizon,
            "alpha": c.alpha,
            "beta": c.beta,
            "bdg_constant": c.bdg_constant,
            "l1_bound_printed": opt(c.l1_bound_printed),
            "l2_bound_printed": opt(c.l2_bound_printed),
            "printed_condition_holds": c.printed_condition_holds(),
            "l1_bound": opt(c.l1_bound),
            "l2_bound": opt(c.l2_bound),
            "condition_holds": c.condition_holds(),
        },
        "coefficients": {
            "theoretical_yz": c.yz_coefficient,
            "theoretical_k": c.k_coefficient,
            "theoretical_yz_at_config": c.yz_coefficient_at_config,
            "theoretical_k_at_config": c.k_coefficient_at_config,
            "measured_max_ratio": measured.iter().copied().fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v)))),
            "measured_last_ratio": measured.last().copied(),
            "geometric_rate": r.geometric_fit.map(|f| f.0),
            "geometric_r2": r.geometric_fit.map(|f| f.1),
            "empirical_contraction": r.empirical_contraction,
        },
    });

    let n = s.tree().depth();
    let mut sol = Vec::with_capacity((2usize << n) - 1);
    for k in 0..=n {
        let q = &r.solution;
        let (y, z, kl, ku) = (q.y.level(k), q.z.level(k), q.kl.level(k), q.ku.level(k));
        for p in 0..y.len() {
            sol.push(vec![k.to_string(), p.to_string(), num(y[p]), num(z[p]), num(kl[p]), num(ku[p])]);
        }
    }
    Ok(CommandOutput {
        files: vec![
            ("picard_report.csv", picard_csv),
            ("residuals.json", json_bytes(&report)),
            ("solution.csv", csv(&["k", "prefix_id", "Y", "Z", "Kl", "Ku"], &sol)?),
        ],
        exit,
        summary: format!(
            "{} after {} iterations, final distance {:e}",
            if r.converged { "converged" } else { "not converged" },
            r.iterations,
            r.distances.last().copied().unwrap_or(0.0)
        ),
    })
}

/// `-spec`, the default perturbation direction.
fn negated(t: TerminalSpec) -> TerminalSpec {
    match t {
        TerminalSpec::Constant(c) => TerminalSpec::Constant(-c),
        TerminalSpec::OfTerminalW { g, scale } => TerminalSpec::OfTerminalW { g, scale: -scale },
        TerminalSpec::RunningMax { scale } => TerminalSpec::RunningMax { scale: -scale },
    }
}

pub fn depend(cfg: &ScenarioConfig, o: &Overrides) -> CmdResult {
    let s = cfg.scenario()?;
    let pc = cfg.picard_config()?;
    let eps = o.eps.clone().unwrap_or_else(|| cfg.depend.eps.clone());
    let delta = match &cfg.depend.perturbation {
        Some(t) => terminal_spec(t)?,
        None => negated(terminal_spec(&cfg.terminal)?),
    };
    let report = dependence_study(&s, &delta, &eps, &pc).map_err(|e| match e {
        rbsde_core::Error::PerturbationOutside { .. } | rbsde_core::Error::InvalidConfig(_) => {
            CommandError::Validation(ValidationError::from_core("depend", e))
        }
        e => failed("depend")(e),
    })?;
    let rows: Vec<Vec<String>> =
        report.rows.iter().map(|r| vec![num(r.eps), num(r.e_xi_hat_sq), num(r.lhs), num(r.ratio)]).collect();
    let converged = report.base_converged && report.rows.iter().all(|r| r.converged);
    Ok(CommandOutput {
        files: vec![("depend.csv", csv(&["eps", "E_xi_hat_sq", "lhs", "ratio"], &rows)?)],
        exit: if converged { Exit::Ok } else { Exit::NotConverged },
        summary: format!("{} rows, largest ratio {}", rows.len(), report.c_hat),
    })
}

#[allow(clippy::too_many_arguments)]
fn walk_rmse(
    lo: f64,
    hi: f64,
    f: f64,
    horizon: f64,
    mesh: usize,
    paths: usize,
    eps_factor: f64,
    seed: u64,
) -> rbsde_core::Result<f64> {
    let grid = TimeGrid::uniform(horizon, mesh)?;
    let b = BarrierPair::constant(grid, lo, hi)?;
    let fvals = DiscretePath::constant(grid, f)?;
    let eps = eps_factor * grid.sqrt_dt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mesh as u64);
    let mut acc = RelativeRmse::default();
    for _ in 0..paths {
        let x = sample::random_walk(&mut rng, grid, 0.5 * (lo + hi), -f)?;
        let out = step_projection_oracle(&x, &b)?;
        let estimate = k_from_local_times(&out.reflected, &b, &fvals, eps)?;
        acc.add(&estimate, &out.xi)?;
    }
    Ok(acc.value())
}

pub fn local_time(cfg: &ScenarioConfig, o: &Overrides) -> CmdResult {
    let lt = &cfg.local_time;
    let meshes = o.mesh.clone().unwrap_or_else(|| lt.meshes.clone());
    let paths = o.paths.unwrap_or(lt.paths);
    let seed = o.seed.unwrap_or(cfg.seed);
    let spec = cfg.scenario_spec()?;
    let (BarrierSpec::Constant(lo), BarrierSpec::Constant(hi)) = (spec.lower, spec.upper) else {
        return Err(ValidationError("local-time: barriers must be constant".into()).into());
    };
    let f = match spec.driver.kind() {
        DriverKind::Zero => 0.0,
        DriverKind::Constant(c) => c,
        _ => return Err(ValidationError("local-time: driver must be zero or constant".into()).into()),
    };
    if let Some(&m) = meshes.iter().find(|&&m| m == 0 || m > MAX_WALK_MESH) {
        return Err(ValidationError(format!("local-time: mesh {m} outside 1..={MAX_WALK_MESH}")).into());
    }
    if !(lt.eps_factor > 0.0 && lt.eps_factor.is_finite()) {
        return Err(ValidationError("local_time.eps_factor must be positive".into()).into());
    }
    let horizon = spec.horizon;
    let values: Vec<rbsde_core::Result<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = meshes
            .iter()
            .map(|&m| scope.spawn(move || walk_rmse(lo, hi, f, horizon, m, paths, lt.eps_factor, seed)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("local-time worker panicked")).collect()
    });
    let mut rows = Vec::with_capacity(meshes.len());
    for (m, v) in meshes.iter().zip(values) {
        rows.push(vec![m.to_string(), num(v.map_err(failed("local-time"))?)]);
    }
    Ok(CommandOutput {
        files: vec![("local_time.csv", csv(&["N", "mean_relative_rmse"], &rows)?)],
        exit: Exit::Ok,
        summary: format!("{} meshes, {paths} paths each", meshes.len()),
    })
}

pub fn converge(cfg: &ScenarioConfig, o: &Overrides) -> CmdResult {
    let meshes = o.mesh.clone().unwrap_or_else(|| cfg.converge.meshes.clone());
    let spec = cfg.scenario_spec()?;
    let pc = cfg.picard_config()?;
    let rows = convergence_study(&spec, &meshes, &pc).map_err(|e| match e {
        rbsde_core::Error::DepthExceeded { .. }
        | rbsde_core::Error::InvalidGrid { .. }
        | rbsde_core::Error::UnsupportedDriver { .. } => {
            CommandError::Validation(ValidationError::from_core("converge", e))
        }
        e => failed("converge")(e),
    })?;
    let errors: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    let ok = errors_non_increasing(&errors, 1.5, 1e-12);
    let table: Vec<Vec<String>> = rows.iter().map(|r| vec![r.steps.to_string(), num(r.sup_error)]).collect();
    let exit = if rows.iter().any(|r| !r.converged) {
        Exit::NotConverged
    } else if ok {
        Exit::Ok
    } else {
        Exit::CheckFailed
    };
    Ok(CommandOutput {
        files: vec![("converge.csv", csv(&["N", "sup_error"], &table)?)],
        exit,
        summary: format!("errors {errors:?}"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    EsmCheck,
    Solve,
    Depend,
    LocalTime,
    Converge,
}

pub fn run(cmd: Command, cfg: &ScenarioConfig, o: &Overrides) -> CmdResult {
    match cmd {
        Command::EsmCheck => esm_check(cfg, o),
        Command::Solve => solve(cfg, o),
        Command::Depend => depend(cfg, o),
        Command::LocalTime => local_time(cfg, o),
        Command::Converge => converge(cfg, o),
    }
}
