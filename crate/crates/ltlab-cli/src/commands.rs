use std::path::Path;

use ltlab::binding::{binding_expansion_check, binding_profile_options, BindingRow};
use ltlab::constants::{
    aizenman_lieb_scan, constants_report, crossing_point, default_crossing_bracket,
};
use ltlab::manakov::{sample_pair, soliton_norms, SolitonPair};
use ltlab::profile_cache::{cache_key, ground_state};
use ltlab::radial_nls::SolveOptions;
use ltlab::scf::{scf_run, ScfInit, ScfOptions};
use ltlab::weak_norm::{
    lower_constant, quasinorm, quasinorm_with_argmax, upper_constant, StepFunction,
};
use ltlab::ProblemParams;
use serde::Deserialize;
use serde_json::json;

use crate::config::parse_range;
use crate::envelope::Table;
use crate::{recipes, CliError, Command, Context, InitKind, Output};

pub fn dispatch(cmd: &Command, ctx: &mut Context<'_>) -> Result<Output, CliError> {
    match cmd {
        Command::Constants { kappa, d, sweep } => constants(ctx, *kappa, *d, sweep.clone()),
        Command::Crossing { d, tol } => crossing(ctx, *d, *tol),
        Command::GroundState { d, p } => ground(ctx, *d, *p),
        Command::Scf {
            d,
            p,
            n,
            half_width,
            h,
            damping,
            max_iter,
            tol,
            init,
            separation,
            trace,
        } => {
            let base = ScfOptions::default();
            let s = &mut ctx.settings;
            let d = s.get("d", *d, 1usize)?;
            let p = s.require("p", *p)?;
            let n = s.get("N", *n, 1usize)?;
            let init = s.get("init", *init, InitKind::Gaussian)?;
            let opts = ScfOptions {
                half_width: s.get("half-width", *half_width, base.half_width)?,
                h: s.get("h", *h, base.h)?,
                damping: s.get("damping", *damping, base.damping)?,
                max_iter: s.get("max-iter", *max_iter, base.max_iter)?,
                tol: s.get("tol", *tol, base.tol)?,
                init: match init {
                    InitKind::Gaussian => ScfInit::Gaussian,
                    InitKind::Translates => ScfInit::Translates {
                        separation: s.get("separation", *separation, 6.0)?,
                    },
                },
            };
            scf(d, p, n, &opts, *trace)
        }
        Command::Binding {
            d,
            p,
            r_min,
            r_max,
            r_step,
        } => {
            let s = &mut ctx.settings;
            let d = s.require("d", *d)?;
            let p = s.require("p", *p)?;
            let lo = s.get("R-min", *r_min, 9.0)?;
            let hi = s.get("R-max", *r_max, 13.0)?;
            let step = s.get("R-step", *r_step, 0.5)?;
            let rs = parse_range(&format!("{lo}:{hi}:{step}"))?;
            binding(ctx, d, p, &rs, "binding")
        }
        Command::Soliton {
            eta1,
            eta2,
            a2,
            a1,
            grid,
        } => {
            let s = &mut ctx.settings;
            let eta1 = s.require("eta1", *eta1)?;
            let eta2 = s.require("eta2", *eta2)?;
            let a2 = s.get("a2", *a2, 1.0)?;
            let a1 = s.optional("a1", *a1)?;
            let grid = s.get("grid", grid.clone(), "-30:30:0.1".to_string())?;
            soliton(eta1, eta2, a1, a2, &parse_range(&grid)?)
        }
        Command::Weaknorm { input, steps, p, r } => {
            weaknorm(ctx, input.as_deref(), steps.clone(), *p, *r)
        }
        Command::Reproduce { recipe } => {
            ctx.settings.record("recipe", &format!("{recipe:?}"));
            recipes::reproduce(*recipe, ctx)
        }
    }
}

fn constants(
    ctx: &mut Context<'_>,
    kappa: Option<f64>,
    d: Option<usize>,
    sweep: Option<String>,
) -> Result<Output, CliError> {
    let kappa = ctx.settings.require("kappa", kappa)?;
    let d = ctx.settings.require("d", d)?;
    let sweep = ctx.settings.optional("sweep", sweep)?;
    let report = constants_report(kappa, d, &ctx.solve, ctx.cache.as_ref())?;
    let mut out = Output::new(serde_json::to_value(&report).expect("report serialises"));
    out.cache_keys.push(report.cache_key.clone());
    if let Some(sw) = sweep {
        let ks = parse_range(&sw)?;
        let rows = aizenman_lieb_scan(d, &ks, &ctx.solve, ctx.cache.as_ref())?;
        let mut t = Table::new("constants_sweep", &["kappa", "L_sc", "L1", "ratio"]);
        for r in &rows {
            t.push(vec![r.kappa, r.l_sc, r.l1, r.ratio]);
        }
        for &k in &ks {
            if let Ok(pp) = ProblemParams::from_kappa(k, d) {
                out.cache_keys.push(cache_key(pp, &ctx.solve));
            }
        }
        out.tables.push(t);
    }
    Ok(out)
}

fn crossing(ctx: &mut Context<'_>, d: Option<usize>, tol: Option<f64>) -> Result<Output, CliError> {
    let d = ctx.settings.require("d", d)?;
    let tol = ctx.settings.get("tol", tol, 1e-7)?;
    let c = crossing_point(
        d,
        default_crossing_bracket(d),
        tol,
        &ctx.solve,
        ctx.cache.as_ref(),
    )?;
    let mut out = Output::new(json!({
        "d": c.d,
        "kappa1": c.kappa1,
        "tolerance": c.tolerance,
        "iterations": c.iterations,
        "residual": c.residual,
    }));
    out.cache_keys = c.cache_keys;
    Ok(out)
}

fn ground(ctx: &mut Context<'_>, d: Option<usize>, p: Option<f64>) -> Result<Output, CliError> {
    let d = ctx.settings.require("d", d)?;
    let p = ctx.settings.require("p", p)?;
    let pp = ProblemParams::new(d, p)?;
    let q = ground_state(pp, &ctx.solve, ctx.cache.as_ref())?;
    let (r1, r2) = q.pohozaev_residuals();
    let mut out = Output::new(json!({
        "d": d,
        "p": p,
        "kappa": pp.kappa(),
        "Q0": q.samples[0],
        "mass": q.mass,
        "lp_norm": q.lp_norm,
        "kinetic": q.kinetic,
        "pohozaev_residuals": [r1, r2],
        "mass_ratio_residual": q.mass_ratio_residual(),
        "ode_residual": q.ode_residual(),
    }));
    let mut t = Table::new("ground_state", &["r", "Q"]);
    for (i, v) in q.samples.iter().enumerate() {
        t.push(vec![q.r(i), *v]);
    }
    out.tables.push(t);
    out.cache_keys.push(cache_key(pp, &ctx.solve));
    Ok(out)
}

fn scf(d: usize, p: f64, n: usize, opts: &ScfOptions, trace: bool) -> Result<Output, CliError> {
    let pp = ProblemParams::new(d, p)?;
    let run = scf_run(pp, n, opts)?;
    let st = &run.state;
    let mut out = Output::new(json!({
        "quotient": st.quotient,
        "eigenvalues": st.eigenvalues,
        "occupations": st.occupations,
        "residual": st.scf_residual,
        "iterations": st.iterations,
        "converged": run.converged,
        "rank": st.rank(),
    }));
    out.failed = !run.converged;
    if trace {
        let mut t = Table::new("scf_trace", &["iter", "quotient", "residual"]);
        for r in &run.trace {
            t.push(vec![r.iter as f64, r.quotient, r.residual]);
        }
        out.tables.push(t);
    }
    Ok(out)
}

pub(crate) fn binding_table(name: &str, rows: &[BindingRow]) -> Table {
    let mut t = Table::new(
        name,
        &[
            "R",
            "A",
            "E",
            "B",
            "h",
            "delta",
            "quotient",
            "predicted",
            "rho",
        ],
    );
    for r in rows {
        let o = &r.overlaps;
        t.push(vec![
            r.r,
            o.a,
            o.e,
            o.b,
            r.two_level.h,
            r.two_level.delta,
            r.quotient,
            r.predicted,
            r.rho,
        ]);
    }
    t
}

pub(crate) fn binding_rows(
    ctx: &Context<'_>,
    d: usize,
    p: f64,
    rs: &[f64],
) -> Result<(Vec<BindingRow>, String), CliError> {
    let pp = ProblemParams::new(d, p)?;
    let hi = rs.iter().cloned().fold(0.0, f64::max);
    let opts = SolveOptions {
        tol: ctx.solve.tol,
        ..binding_profile_options(hi)
    };
    let q = ground_state(pp, &opts, ctx.cache.as_ref())?;
    Ok((binding_expansion_check(pp, rs, &q)?, cache_key(pp, &opts)))
}

fn binding(
    ctx: &mut Context<'_>,
    d: usize,
    p: f64,
    rs: &[f64],
    name: &str,
) -> Result<Output, CliError> {
    let (rows, key) = binding_rows(ctx, d, p, rs)?;
    let mut out = Output::new(serde_json::to_value(&rows).expect("rows serialise"));
    out.tables.push(binding_table(name, &rows));
    out.cache_keys.push(key);
    Ok(out)
}

fn soliton(
    eta1: f64,
    eta2: f64,
    a1: Option<f64>,
    a2: f64,
    grid: &[f64],
) -> Result<Output, CliError> {
    let pair = match a1 {
        Some(a1) => SolitonPair::new(eta1, eta2, a1, a2)?,
        None => SolitonPair::vanishing_at_origin(eta1, eta2, a2, true)?,
    };
    let samples = sample_pair(&pair, grid);
    let mut t = Table::new("soliton", &["x", "v1", "v2", "res1", "res2", "c1", "c2"]);
    let (mut res, mut inv) = (0.0f64, 0.0f64);
    for s in &samples {
        t.push(vec![s.x, s.v1, s.v2, s.res1, s.res2, s.c1, s.c2]);
        res = res.max(s.res1.abs()).max(s.res2.abs());
        inv = inv.max(s.c1.abs()).max(s.c2.abs());
    }
    let (mu1, mu2) = pair.mu();
    let mut out = Output::new(json!({
        "pair": pair,
        "mu": [mu1, mu2],
        "norms": soliton_norms(&pair),
        "max_residual": res,
        "max_invariant": inv,
    }));
    out.tables.push(t);
    Ok(out)
}

#[derive(Deserialize)]
struct WeakInput {
    steps: Vec<(f64, f64)>,
    p: Option<f64>,
    r: Option<f64>,
}

fn parse_steps(s: &str) -> Result<Vec<(f64, f64)>, CliError> {
    s.split(',')
        .map(|pair| {
            let (v, m) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("step {pair:?} must be value:measure")))?;
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::Usage(format!("{x:?}: {e}")))
            };
            Ok((num(v)?, num(m)?))
        })
        .collect()
}

fn weaknorm(
    ctx: &mut Context<'_>,
    input: Option<&Path>,
    steps: Option<String>,
    p: Option<f64>,
    r: Option<f64>,
) -> Result<Output, CliError> {
    let s = &mut ctx.settings;
    let input = s.optional("input", input.map(|x| x.display().to_string()))?;
    let from_file: Option<WeakInput> = match &input {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Some(serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))?)
        }
        None => None,
    };
    let inline = s.optional("steps", steps)?;
    let steps = match (&from_file, inline) {
        (_, Some(txt)) => parse_steps(&txt)?,
        (Some(f), None) => f.steps.clone(),
        (None, None) => return Err(CliError::Usage("weaknorm needs --input or --steps".into())),
    };
    let p = s.require("p", p.or(from_file.as_ref().and_then(|f| f.p)))?;
    let r = s.get("r", r.or(from_file.as_ref().and_then(|f| f.r)), 1.0)?;
    let f = StepFunction::from_steps(&steps)?;
    let (tau, value) = quasinorm_with_argmax(&f, p, r)?;
    let weak = quasinorm(&f, p, 0.0)?;
    let (lower, upper) = (lower_constant(p, r) * weak, upper_constant(p, r) * weak);
    Ok(Output::new(json!({
        "p": p,
        "r": r,
        "quasinorm": value,
        "argmax_tau": tau,
        "weak_norm": weak,
        "lower": lower,
        "upper": upper,
        "lower_ok": lower <= value * (1.0 + ltlab::weak_norm::SANDWICH_SLACK),
        "upper_ok": value <= upper * (1.0 + ltlab::weak_norm::SANDWICH_SLACK),
    })))
}
