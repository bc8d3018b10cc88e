use fraccomp_core::composition::{compose, ComposableFn};
use fraccomp_core::defaults::Defaults;
use fraccomp_core::montecarlo::{chain_limit, compound_poisson_mgf, theoretical_mgf_chain, ChainParams, Jumps};
use fraccomp_core::solver::{limit_check_nu_zero, solve_composed, solve_direct, SolutionField, SolverConfig, TimeProblemSpec};
use fraccomp_core::specfun::{mittag_leffler, wright};
use fraccomp_core::subordinator::{inverse_density, subordinator_density, subordinator_value, KernelValues, OrderVector};

use crate::job::{Command, Job, Routes};
use crate::output::{num, Table};
use crate::CliError;

/// One artifact; `suffix` distinguishes several tables written by a single job.
pub struct Artifact {
    pub suffix: Option<&'static str>,
    pub table: Table,
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Summary lines for stdout.
    pub summary: Vec<String>,
}

fn numerical(e: fraccomp_core::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

fn base_table(command: Command, quantity: &str, route: &str) -> Table {
    let mut t = Table::default();
    t.meta("quantity", quantity);
    t.meta("command", command.name());
    t.meta("route", route);
    t.meta("build", env!("FRACCOMP_GIT_DESCRIBE"));
    t.meta("version", env!("CARGO_PKG_VERSION"));
    for (k, v) in Defaults::describe() {
        t.meta(k, v);
    }
    t
}

fn orders_text(ov: &OrderVector) -> String {
    ov.pairs().iter().map(|(l, n)| format!("({},{})", num(*l), num(*n))).collect::<Vec<_>>().join(" ")
}

fn grid_meta(t: &mut Table, cfg: &SolverConfig) {
    if let fraccomp_core::solver::SpectralGrid::Line(g) = &cfg.grid {
        t.meta("grid", format!("line n={} length={}", g.n, num(g.length)));
    }
    if let Some(w) = cfg.x_window {
        t.meta("x_window", num(w));
    }
    t.meta("time_tol", num(cfg.time_tol));
    t.meta("panel_order", cfg.panel_order.to_string());
}

fn field_table(command: Command, quantity: &str, field: &SolutionField, cfg: &SolverConfig, extra: &[(&str, String)]) -> Table {
    let mut t = base_table(command, quantity, field.route.name());
    grid_meta(&mut t, cfg);
    for (k, v) in extra {
        t.meta(k, v.clone());
    }
    let d = &field.diagnostics;
    t.meta("max_refinement_delta", num(d.max_refinement_delta));
    t.meta("observed_spectral_tail", num(d.spectral_tail));
    t.meta("imag_residue", num(d.imag_residue));
    t.meta("oscillation_index", num(d.oscillation_index));
    t.meta("mass_defect", num(d.mass_defect));
    for w in &d.warnings {
        t.meta("warning", w.clone());
    }
    for p in &field.point_masses {
        t.meta("point_mass", format!("t={} x={} weight={}", num(field.ts()[p.t_index]), num(p.location), num(p.weight)));
    }
    for (i, &tv) in field.ts().iter().enumerate() {
        for (j, &x) in field.xs().iter().enumerate() {
            t.push(tv, x, field.values.at(i, j));
        }
    }
    t
}

fn single(table: Table) -> Vec<Artifact> {
    vec![Artifact { suffix: None, table }]
}

pub fn execute(command: Command, job: &Job) -> Result<Outcome, CliError> {
    let mut summary = Vec::new();
    let artifacts = match job {
        Job::EvalMl { params, z } => {
            let mut t = base_table(command, "mittag-leffler", "series/asymptotic/inversion");
            t.meta("alpha", num(params.alpha));
            t.meta("beta", num(params.beta));
            t.meta("t_axis", "unused");
            for &x in z {
                t.push(0.0, x, mittag_leffler(*params, x).map_err(numerical)?);
            }
            single(t)
        }
        Job::EvalWright { params, z } => {
            let mut t = base_table(command, "wright", "series/inversion");
            t.meta("alpha", num(params.alpha));
            t.meta("beta", num(params.beta));
            t.meta("t_axis", "unused");
            for &x in z {
                t.push(0.0, x, wright(*params, x).map_err(numerical)?);
            }
            single(t)
        }
        Job::Density { ov, ts, xs, inverse } => {
            let (quantity, route) = if *inverse {
                ("inverse-density", "wright/laplace-inversion")
            } else {
                ("subordinator-density", "wright/laplace-inversion")
            };
            let mut t = base_table(command, quantity, route);
            t.meta("orders", orders_text(ov));
            for &tv in ts {
                let k = if *inverse { inverse_density(ov, tv, xs) } else { subordinator_density(ov, tv, xs) }
                    .map_err(numerical)?;
                t.meta("total_mass", format!("t={} mass={} tol={}", num(tv), num(k.total_mass), num(k.mass_tolerance)));
                match &k.values {
                    KernelValues::Grid(v) => {
                        for (&x, &val) in xs.iter().zip(v) {
                            t.push(tv, x, val);
                        }
                    }
                    KernelValues::PointMass { location } => {
                        t.meta("point_mass", format!("t={} x={} weight=1", num(tv), num(*location)));
                    }
                }
            }
            single(t)
        }
        Job::Solve { sym, ov, f0, f0_name, ts, cfg, routes } => {
            let mut spec = TimeProblemSpec::delta(ov.clone());
            spec.initial_conditions[0] = f0.clone();
            let extra = [("orders", orders_text(ov)), ("symbol", format!("{:?}", sym.kind)), ("initial", f0_name.clone())];
            let mut out = Vec::new();
            let mut fields = Vec::new();
            if matches!(routes, Routes::Direct | Routes::Both) {
                fields.push(("direct", solve_direct(sym, &spec, ts, cfg).map_err(numerical)?));
            }
            if matches!(routes, Routes::Composed | Routes::Both) {
                fields.push(("composition", solve_composed(sym, &spec, ts, cfg).map_err(numerical)?));
            }
            if let [(_, a), (_, b)] = fields.as_slice() {
                let d = a.sup_difference(b).map_err(numerical)?;
                summary.push(format!("sup_difference: {}", num(d)));
            }
            let many = fields.len() > 1;
            for (suffix, f) in &fields {
                out.push(Artifact {
                    suffix: many.then_some(*suffix),
                    table: field_table(command, "fundamental-solution", f, cfg, &extra),
                });
            }
            out
        }
        Job::ComposeCheck { outer, inner, ts, xs } => {
            let (a, b) = (*outer, *inner);
            let ova = OrderVector::single(a).map_err(numerical)?;
            let ovb = OrderVector::single(b).map_err(numerical)?;
            let ovab = OrderVector::single(a * b).map_err(numerical)?;
            let f = ComposableFn::density(|s, x| subordinator_value(&ova, s, x).unwrap_or(f64::NAN));
            let g = ComposableFn::density(|t, s| subordinator_value(&ovb, t, s).unwrap_or(f64::NAN));
            let mut tab = base_table(command, "subordinator-composition", "composition-quadrature");
            tab.meta("outer_nu", num(a));
            tab.meta("inner_nu", num(b));
            tab.meta("reference", format!("u_{}", num(a * b)));
            let mut worst = 0.0f64;
            for &tv in ts {
                for &x in xs {
                    let c = compose(&f, &g, tv, x).map_err(numerical)?;
                    if !c.value.is_finite() {
                        return Err(CliError::Numerical(format!("composition at t={tv}, x={x} is not finite")));
                    }
                    let r = subordinator_value(&ovab, tv, x).map_err(numerical)?;
                    worst = worst.max((c.value - r).abs());
                    tab.push(tv, x, c.value);
                }
            }
            tab.meta("sup_difference", num(worst));
            summary.push(format!("sup_difference: {}", num(worst)));
            single(tab)
        }
        Job::McLimit { cfg, mus } => {
            let mut tab = base_table(command, "compound-poisson-laplace", "monte-carlo");
            tab.meta("seed", cfg.seed.to_string());
            tab.meta("samples", cfg.samples.to_string());
            tab.meta("nu", num(cfg.nu));
            tab.meta("beta", num(cfg.beta));
            tab.meta("alpha", num(cfg.alpha()));
            tab.meta("delta", num(cfg.delta_cutoff));
            tab.meta("jumps", if cfg.jumps == Jumps::Pareto { "pareto" } else { "degenerate" });
            tab.meta("x_axis", "mu");
            let p = ChainParams::from(cfg);
            for &mu in mus {
                let e = compound_poisson_mgf(cfg, mu).map_err(numerical)?;
                let chain = theoretical_mgf_chain(cfg, mu, cfg.delta_cutoff).map_err(numerical)?;
                let limit = chain_limit(&p, mu);
                tab.meta(
                    "reference",
                    format!("mu={} chain={} limit={} estimator={:?}", num(mu), num(chain), num(limit), e.estimator),
                );
                let z = |r: f64| if e.stderr > 0.0 { (e.estimate - r) / e.stderr } else { 0.0 };
                summary.push(format!(
                    "mu={}: estimate={} stderr={} chain={} ({:+.2} se) limit={} ({:+.2} se)",
                    num(mu),
                    num(e.estimate),
                    num(e.stderr),
                    num(chain),
                    z(chain),
                    num(limit),
                    z(limit)
                ));
                tab.rows.push(crate::output::Row { t: cfg.t, x: mu, value: e.estimate, stderr: Some(e.stderr) });
            }
            single(tab)
        }
        Job::LimitCheck { sym, nu_small, f0, f0_name, ts, cfg } => {
            let (sol, lim) = limit_check_nu_zero(sym, f0, *nu_small, ts, cfg).map_err(numerical)?;
            let d = sol.sup_difference(&lim).map_err(numerical)?;
            let first = lim.values.row(0);
            let drift = (1..ts.len())
                .flat_map(|i| lim.values.row(i).iter().zip(first).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>())
                .fold(0.0f64, f64::max);
            summary.push(format!("sup_difference: {}", num(d)));
            summary.push(format!("limit_t_variation: {}", num(drift)));
            let extra = [
                ("nu_small", num(*nu_small)),
                ("symbol", format!("{:?}", sym.kind)),
                ("initial", f0_name.clone()),
                ("sup_difference", num(d)),
                ("limit_t_variation", num(drift)),
            ];
            vec![
                Artifact { suffix: Some("solution"), table: field_table(command, "fundamental-solution", &sol, cfg, &extra) },
                Artifact { suffix: Some("limit"), table: field_table(command, "stationary-limit", &lim, cfg, &extra) },
            ]
        }
    };
    Ok(Outcome { artifacts, summary })
}
