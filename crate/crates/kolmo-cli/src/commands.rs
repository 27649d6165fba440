//! The experiment subcommands.

use serde::Serialize;
use serde_json::{json, Value};
use tracing::{info, warn};

use kolmo_core::potentials::{MoreauEnvelope, Weighting};
use kolmo_core::sde::{Dynamics, PathEnsemble, Scheme, SdeParams};
use kolmo_core::solver::{
    axis_marginal, estimate_report, flux_trace, outside_mass, solve_neumann, solve_penalized, w12_distance,
    Domain, EstimateReport, FluxReport, QuadratureOptions, Region, SolverOptions, WeakProblem, WeakSolution,
};

use crate::config::{ExperimentConfig, SdeConfig, SolveConfig, SolveMode};
use crate::error::{CliError, Stage};
use crate::output::{q, Quantity, Writer};
use crate::setup::{Rhs, Setup};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    PenalizeSweep,
    FeynmanKac,
    FluxCheck,
    SampleInvariant,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::PenalizeSweep => "penalize-sweep",
            Command::FeynmanKac => "feynman-kac",
            Command::FluxCheck => "flux-check",
            Command::SampleInvariant => "sample-invariant",
        }
    }
}

/// Runs `cmd`, writes its files into `w` and returns the summary report.
pub fn run(cmd: Command, cfg: &ExperimentConfig, mut w: Writer) -> Result<Value, CliError> {
    cfg.validate()?;
    let summary = match cmd {
        Command::Solve => serde_json::to_value(cmd_solve(cfg, &mut w)?),
        Command::PenalizeSweep => serde_json::to_value(cmd_penalize_sweep(cfg, &mut w)?),
        Command::FeynmanKac => serde_json::to_value(cmd_feynman_kac(cfg, &mut w)?),
        Command::FluxCheck => serde_json::to_value(cmd_flux_check(cfg, &mut w)?),
        Command::SampleInvariant => serde_json::to_value(cmd_sample_invariant(cfg, &mut w)?),
    }
    .expect("report serializes");
    w.finish(cmd.name(), cfg, summary.clone())?;
    Ok(summary)
}

fn solve_cfg(cfg: &ExperimentConfig) -> Result<&SolveConfig, CliError> {
    cfg.solve.as_ref().ok_or_else(|| CliError::Config("a [solve] block is required".into()))
}

fn sde_cfg(cfg: &ExperimentConfig) -> Result<&SdeConfig, CliError> {
    cfg.sde.as_ref().ok_or_else(|| CliError::Config("an [sde] block is required".into()))
}

fn solver_options(s: &SolveConfig) -> SolverOptions {
    SolverOptions {
        cg_tol: s.cg_tol,
        mass: s.mass.into(),
        band_factor: s.band_factor,
        ..SolverOptions::default()
    }
}

fn quad_tag(setup: &Setup) -> String {
    let g = setup.space.grid();
    format!(
        "lumped nu-mass quadrature, tensor grid {} cells/axis, box {} sigma",
        g.dims()[0] - 1,
        setup.space.box_radius()
    )
}

fn penalty_alpha(cfg: &ExperimentConfig, s: &SolveConfig) -> Result<f64, CliError> {
    s.alpha
        .or(cfg.model_alpha())
        .ok_or_else(|| CliError::Config("penalized mode needs solve.alpha".into()))
}

/// Restricted (or whole-box) solve of λu − Ku = f.
fn solve_plain(setup: &Setup, s: &SolveConfig, f: Vec<f64>, whole: bool) -> Result<(WeakSolution<f64>, EstimateReport), CliError> {
    let domain = match (&setup.body, whole) {
        (Some(b), false) => Domain::Restricted(b.clone()),
        _ => Domain::Whole,
    };
    let mut p = WeakProblem::new(&setup.space, domain, setup.weighting(), s.lambda, f);
    p.options = solver_options(s);
    let sol = solve_neumann(&p).stage("solve")?;
    let est = estimate_report(&sol, &p).stage("estimates")?;
    Ok((sol, est))
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateSide {
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub mode: SolveMode,
    pub lambda: f64,
    pub cells: usize,
    pub dofs: usize,
    pub cut_cells: usize,
    pub cg_iterations: usize,
    pub cg_relative_residual: f64,
    pub dissipativity: EstimateSide,
    pub maximal_regularity: EstimateSide,
    /// Whole-box estimate including λ‖Du‖² and the Hessian term of U_α.
    pub whole_space: Option<EstimateSide>,
    pub hessian_term: Option<Quantity>,
    pub flux_surface_norm: Option<Quantity>,
    pub warnings: Vec<String>,
}

fn side(lhs: Quantity, rhs: Quantity, slack: f64) -> EstimateSide {
    let ratio = if rhs.value > 0.0 { lhs.value / rhs.value } else if lhs.value == 0.0 { 0.0 } else { f64::INFINITY };
    let bound = 1.0 + slack;
    EstimateSide {
        lhs,
        rhs,
        ratio,
        bound,
        pass: ratio <= bound,
    }
}

pub fn cmd_solve(cfg: &ExperimentConfig, w: &mut Writer) -> Result<SolveReport, CliError> {
    let s = solve_cfg(cfg)?;
    let setup = Setup::new(cfg)?;
    let rhs = Rhs::new(&s.rhs, setup.space.lambdas())?;
    let f = rhs.grid_values(&setup.space)?;
    w.stage("setup");
    let tag = quad_tag(&setup);
    let (sol, est, flux) = match s.mode {
        SolveMode::Restricted | SolveMode::Whole => {
            if s.mode == SolveMode::Restricted && setup.body.is_none() {
                return Err(CliError::Config("restricted mode needs a convex_set".into()));
            }
            let (sol, est) = solve_plain(&setup, s, f, s.mode == SolveMode::Whole)?;
            let flux = est.flux_surface_norm;
            (sol, est, flux)
        }
        SolveMode::Penalized => {
            let alpha = penalty_alpha(cfg, s)?;
            let body = setup.require_body()?.clone();
            let mut p = WeakProblem::new(&setup.space, Domain::Whole, setup.penalized(alpha)?, s.lambda, f);
            p.options = solver_options(s);
            let sol = solve_penalized(&p).stage("solve")?;
            let est = estimate_report(&sol, &p).stage("estimates")?;
            // flux of u_α restricted to C, with the ν-masses of C
            let quad = p.options.quadrature_for(setup.space.dim());
            let wc = kolmo_core::solver::lumped_weights(&setup.space, &setup.weighting(), Region::Inside(&body), quad)
                .stage("estimates")?;
            let fl = flux_trace(&sol, &setup.space, &body, Some(&wc), s.band_factor).stage("flux")?;
            (sol, est, Some(fl.flux_surface_norm))
        }
    };
    w.stage("solve");
    let measure = if sol.penalized { "nu_alpha" } else { "nu" };
    let report = SolveReport {
        mode: s.mode,
        lambda: s.lambda,
        cells: setup.space.cells_per_axis(),
        dofs: sol.dofs,
        cut_cells: sol.cut_cells,
        cg_iterations: sol.cg.iterations,
        cg_relative_residual: sol.cg.relative_residual,
        dissipativity: side(
            q(est.lhs_diss, format!("lambda|u|^2 + |Du|^2/2 in L2({measure}); {tag}")),
            q(est.rhs_diss, format!("|f|^2/lambda in L2({measure}); {tag}")),
            s.diss_slack,
        ),
        maximal_regularity: side(
            q(est.lhs_maxreg, format!("Tr[(D2u)^2]/2 + |Q^-1/2 Du|^2 in L1({measure}), central differences; {tag}")),
            q(est.rhs_maxreg, format!("4|f|^2 in L2({measure}); {tag}")),
            s.maxreg_slack,
        ),
        whole_space: est.lhs_whole.map(|l| {
            side(
                q(l, format!("lambda|Du|^2 + maximal-regularity terms + Hessian term of U_alpha; {tag}")),
                q(est.rhs_maxreg, format!("4|f|^2 in L2({measure}); {tag}")),
                s.maxreg_slack,
            )
        }),
        hessian_term: est
            .hessian_term
            .map(|h| q(h, format!("<D2U_alpha Du, Du> with D2U_alpha by differences of DU_alpha; {tag}"))),
        flux_surface_norm: flux.map(|v| {
            q(
                v,
                format!(
                    "hat-kernel band quadrature of |<Du,DG>| e^-2U, band {} h_max, Taylor step to G = 0; {tag}",
                    s.band_factor
                ),
            )
        }),
        warnings: sol.warnings.clone(),
    };
    w.json("report.json", &report)?;
    if cfg.output.csv {
        write_solution_csv(w, &setup, &sol)?;
    }
    info!(dofs = report.dofs, diss = report.dissipativity.ratio, maxreg = report.maximal_regularity.ratio, "solve done");
    Ok(report)
}

fn write_solution_csv(w: &mut Writer, setup: &Setup, sol: &WeakSolution<f64>) -> Result<(), CliError> {
    let n = setup.space.dim();
    let g = setup.space.grid();
    let mut header: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
    header.push("u".into());
    header.extend((0..n).map(|k| format!("du{k}")));
    header.push("nu_mass".into());
    let rows = (0..g.len()).filter(|&i| sol.active[i]).map(|i| {
        let mut r = g.node(i).to_vec();
        r.push(sol.u[i]);
        r.extend((0..n).map(|k| sol.du[k][i]));
        r.push(sol.mass[i]);
        r
    });
    w.csv("solution.csv", &header, rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub w12_error: Quantity,
    pub outside_mass: Quantity,
    pub flux_norm: Quantity,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub reference_flux_norm: f64,
    pub rows: Vec<SweepRow>,
    /// Each error at most 1.05 times the previous one.
    pub error_monotone: Option<bool>,
    /// Last error at most a tenth of the first.
    pub error_reduction: Option<f64>,
    pub mass_decreasing: Option<bool>,
    /// Least-squares slope of log error against log α.
    pub empirical_order: Option<f64>,
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn cmd_penalize_sweep(cfg: &ExperimentConfig, w: &mut Writer) -> Result<SweepReport, CliError> {
    let s = solve_cfg(cfg)?;
    if s.alpha_sweep.is_empty() {
        return Err(CliError::Config("solve.alpha_sweep is empty".into()));
    }
    let setup = Setup::new(cfg)?;
    let body = setup.require_body()?.clone();
    let rhs = Rhs::new(&s.rhs, setup.space.lambdas())?;
    let f = rhs.grid_values(&setup.space)?;
    let (reference, _) = solve_plain(&setup, s, f.clone(), false)?;
    let ref_flux = flux_trace(&reference, &setup.space, &body, None, s.band_factor).stage("flux")?;
    w.stage("reference");
    let quad = QuadratureOptions::for_dim(setup.space.dim());
    let tag = quad_tag(&setup);
    let mut rows = Vec::new();
    for &alpha in &s.alpha_sweep {
        let weighting = setup.penalized(alpha)?;
        let mass = outside_mass(&setup.space, &body, &weighting, quad).stage("outside mass")?;
        let mut p = WeakProblem::new(&setup.space, Domain::Whole, weighting, s.lambda, f.clone());
        p.options = solver_options(s);
        let sol = solve_penalized(&p).stage("penalized solve")?;
        let err = w12_distance(&reference, &sol);
        let fl = flux_trace(&sol, &setup.space, &body, Some(&reference.mass), s.band_factor).stage("flux")?;
        info!(alpha, err, mass, "penalized solve");
        rows.push(SweepRow {
            alpha,
            w12_error: q(err, format!("W12(C,nu) distance to the Neumann solution on nodes of C; {tag}")),
            outside_mass: q(mass, format!("integral of e^-2V_alpha over the complement of C, cut-cell Gauss quadrature; {tag}")),
            flux_norm: q(fl.flux_surface_norm, format!("flux of u_alpha restricted to C, nu-masses of C; {tag}")),
        });
    }
    w.stage("sweep");
    let errs: Vec<f64> = rows.iter().map(|r| r.w12_error.value).collect();
    let masses: Vec<f64> = rows.iter().map(|r| r.outside_mass.value).collect();
    let alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let single = rows.len() < 2;
    if single {
        warn!("a single alpha gives no convergence verdict");
    }
    let report = SweepReport {
        reference_flux_norm: ref_flux.flux_surface_norm,
        error_monotone: (!single).then(|| errs.windows(2).all(|p| p[1] <= 1.05 * p[0])),
        error_reduction: (!single).then(|| errs[errs.len() - 1] / errs[0]),
        mass_decreasing: (!single).then(|| masses.windows(2).all(|p| p[1] < p[0])),
        empirical_order: if single { None } else { loglog_slope(&alphas, &errs) },
        rows,
    };
    w.json("report.json", &report)?;
    if cfg.output.csv {
        let header = ["alpha", "w12_error", "outside_mass", "flux_norm"].map(String::from);
        w.csv(
            "sweep.csv",
            &header,
            report
                .rows
                .iter()
                .map(|r| vec![r.alpha, r.w12_error.value, r.outside_mass.value, r.flux_norm.value]),
        )?;
    }
    Ok(report)
}

fn dynamics(setup: &Setup, sde: &SdeConfig) -> Result<Dynamics<f64>, CliError> {
    let drift = setup.space.drift_coeffs().to_vec();
    let d = match sde.scheme {
        Scheme::Project | Scheme::Reflect => {
            let weighting = match sde.alpha {
                Some(a) if !setup.potential.is_zero() => {
                    Weighting::Envelope(MoreauEnvelope::new(setup.potential.clone(), a).stage("sde")?)
                }
                _ => setup.weighting(),
            };
            if sde.scheme == Scheme::Project {
                Dynamics::reflected(&drift, setup.body.clone(), weighting)
            } else {
                Dynamics::mirrored(&drift, setup.body.clone(), weighting)
            }
        }
        Scheme::Penalize => {
            let a = sde
                .alpha
                .ok_or_else(|| CliError::Config("the penalize scheme needs sde.alpha".into()))?;
            Dynamics::penalized(&drift, setup.penalized(a)?)
        }
    }
    .stage("sde")?;
    Ok(d.with_exponential(sde.exponential))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub x0: Vec<f64>,
    pub u_pde: Quantity,
    pub u_mc: Quantity,
    pub stderr: f64,
    pub tail_bound: f64,
    pub paths_failed: usize,
    pub difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FkReport {
    pub scheme: Scheme,
    pub dt: f64,
    pub horizon: f64,
    pub paths: usize,
    pub probes: Vec<ProbeRow>,
}

pub fn cmd_feynman_kac(cfg: &ExperimentConfig, w: &mut Writer) -> Result<FkReport, CliError> {
    let s = solve_cfg(cfg)?;
    let sde = sde_cfg(cfg)?;
    if sde.probes.is_empty() {
        return Err(CliError::Config("sde.probes is empty".into()));
    }
    let setup = Setup::new(cfg)?;
    let n = setup.space.dim();
    for p in &sde.probes {
        if p.len() != n {
            return Err(CliError::Config(format!("probe {p:?} has {} coordinates, expected {n}", p.len())));
        }
        if let Some(b) = &setup.body {
            if !b.contains(p) {
                return Err(CliError::Config(format!("probe {p:?} lies outside C")));
            }
        }
    }
    let rhs = Rhs::new(&s.rhs, setup.space.lambdas())?;
    let f = rhs.grid_values(&setup.space)?;
    let (sol, _) = solve_plain(&setup, s, f, s.mode == SolveMode::Whole)?;
    w.stage("solve");
    let dynamics = dynamics(&setup, sde)?;
    let tag = quad_tag(&setup);
    let mut probes = Vec::new();
    for (i, p) in sde.probes.iter().enumerate() {
        let u = sol
            .value_at(&setup.space, p)
            .ok_or_else(|| CliError::Config(format!("probe {p:?} lies outside the active grid")))?;
        let params = SdeParams {
            dt: sde.dt,
            horizon: sde.horizon,
            paths: sde.paths,
            seed: cfg.sde_seed().wrapping_add(i as u64),
        };
        let ens = PathEnsemble::new(&dynamics, params).stage("sde")?;
        let est = ens.feynman_kac(p, |x| rhs.eval(x), s.lambda).stage("feynman-kac")?;
        let diff = (u - est.estimate).abs();
        let tol = 3.0 * est.stderr + 0.02 * u.abs();
        info!(probe = ?p, u_pde = u, u_mc = est.estimate, stderr = est.stderr, "probe");
        probes.push(ProbeRow {
            x0: p.clone(),
            u_pde: q(u, format!("multilinear interpolation of the Galerkin solution; {tag}")),
            u_mc: q(
                est.estimate,
                format!(
                    "Monte Carlo, {} paths, {:?} scheme, dt {}, T {}, left-point discounting",
                    est.paths, sde.scheme, sde.dt, sde.horizon
                ),
            ),
            stderr: est.stderr,
            tail_bound: est.tail_bound,
            paths_failed: est.paths_failed,
            difference: diff,
            tolerance: tol,
            pass: diff <= tol,
        });
    }
    w.stage("monte carlo");
    let report = FkReport {
        scheme: sde.scheme,
        dt: sde.dt,
        horizon: sde.horizon,
        paths: sde.paths,
        probes,
    };
    w.json("report.json", &report)?;
    if cfg.output.csv {
        let mut header: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
        header.extend(["u_pde", "u_mc", "stderr", "tail_bound", "difference", "tolerance"].map(String::from));
        w.csv(
            "feynman_kac.csv",
            &header,
            report.probes.iter().map(|r| {
                let mut v = r.x0.clone();
                v.extend([r.u_pde.value, r.u_mc.value, r.stderr, r.tail_bound, r.difference, r.tolerance]);
                v
            }),
        )?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxRow {
    pub cells: usize,
    pub h_max: f64,
    pub flux: FluxReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxCheckReport {
    pub rows: Vec<FluxRow>,
    pub decreasing: bool,
    /// Least-squares slope of log flux against log h.
    pub empirical_order: Option<f64>,
    pub provenance: String,
}

pub fn cmd_flux_check(cfg: &ExperimentConfig, w: &mut Writer) -> Result<FluxCheckReport, CliError> {
    let s = solve_cfg(cfg)?;
    if s.mode != SolveMode::Restricted {
        return Err(CliError::Config("flux-check needs solve.mode = \"restricted\" (no boundary otherwise)".into()));
    }
    let ladder = if s.refine.is_empty() {
        let m = cfg.space.cells_per_axis;
        vec![m / 4, m / 2, m]
    } else {
        s.refine.clone()
    };
    let mut rows = Vec::new();
    for &m in &ladder {
        let setup = Setup::with_cells(cfg, m)?;
        let body = setup.require_body()?.clone();
        let rhs = Rhs::new(&s.rhs, setup.space.lambdas())?;
        let f = rhs.grid_values(&setup.space)?;
        let (sol, _) = solve_plain(&setup, s, f, false)?;
        let flux = flux_trace(&sol, &setup.space, &body, None, s.band_factor).stage("flux")?;
        info!(cells = m, flux = flux.flux_surface_norm, "flux");
        rows.push(FluxRow {
            cells: m,
            h_max: setup.space.grid().h_max(),
            flux,
        });
        w.stage(&format!("cells {m}"));
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h_max).collect();
    let fl: Vec<f64> = rows.iter().map(|r| r.flux.flux_surface_norm).collect();
    let report = FluxCheckReport {
        decreasing: fl.windows(2).all(|p| p[1] < p[0]),
        empirical_order: loglog_slope(&hs, &fl),
        provenance: format!(
            "hat-kernel band quadrature of |<Du,DG>| e^-2U over nodes of C with -{} h_max <= G/|DG| <= 0, Taylor step to G = 0",
            s.band_factor
        ),
        rows,
    };
    w.json("report.json", &report)?;
    if cfg.output.csv {
        let header = ["cells", "h_max", "flux_surface_norm", "raw_flux_norm", "identity_residual"].map(String::from);
        w.csv(
            "flux.csv",
            &header,
            report.rows.iter().map(|r| {
                vec![
                    r.cells as f64,
                    r.h_max,
                    r.flux.flux_surface_norm,
                    r.flux.raw_flux_norm,
                    r.flux.identity_residual,
                ]
            }),
        )?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub scheme: Scheme,
    pub dt: f64,
    pub burn_in: f64,
    pub record: f64,
    pub paths: usize,
    pub paths_failed: usize,
    pub samples: u64,
    /// sup over bin edges of |F_emp − F_ref| per axis.
    pub sup_distance: Vec<Quantity>,
}

pub fn cmd_sample_invariant(cfg: &ExperimentConfig, w: &mut Writer) -> Result<InvariantReport, CliError> {
    let sde = sde_cfg(cfg)?;
    let inv = sde
        .invariant
        .as_ref()
        .ok_or_else(|| CliError::Config("an [sde.invariant] block is required".into()))?;
    let setup = Setup::new(cfg)?;
    let n = setup.space.dim();
    let dynamics = dynamics(&setup, sde)?;
    let start = match (&inv.start, &setup.body) {
        (Some(s), _) => s.clone(),
        (None, Some(b)) => b.project(&vec![0.0; n]).stage("sde")?,
        (None, None) => vec![0.0; n],
    };
    let ranges: Vec<(f64, f64, usize)> = (0..n)
        .map(|k| {
            let h = setup.space.half_width(k);
            (-h, h, inv.bins)
        })
        .collect();
    let params = SdeParams {
        dt: inv.dt,
        horizon: inv.record,
        paths: inv.paths,
        seed: cfg.sde_seed(),
    };
    let ens = PathEnsemble::new(&dynamics, params).stage("sde")?;
    let sample = ens.sample_invariant(&start, inv.burn_in, &ranges).stage("sample-invariant")?;
    w.stage("simulate");
    // reference law: ν restricted to C, or ν_α on the box for the penalized scheme
    let quad = QuadratureOptions::for_dim(n);
    let penalized;
    let (weighting, region) = match (sde.scheme, &setup.body) {
        (Scheme::Penalize, _) => {
            penalized = setup.penalized(sde.alpha.unwrap_or(1.0))?;
            (&penalized, Region::All)
        }
        (_, Some(b)) => {
            penalized = setup.weighting();
            (&penalized, Region::Inside(b))
        }
        (_, None) => {
            penalized = setup.weighting();
            (&penalized, Region::All)
        }
    };
    let mut sup = Vec::new();
    for k in 0..n {
        let marginal = axis_marginal(&setup.space, weighting, region, k, quad).stage("reference law")?;
        let hist = &sample.histograms[k];
        let d = hist.sup_distance(|t| marginal.cdf(t));
        sup.push(q(
            d,
            format!(
                "max over {} bin edges of |empirical CDF - reference CDF|, reference by cut-cell quadrature; {}",
                inv.bins + 1,
                quad_tag(&setup)
            ),
        ));
        if cfg.output.csv {
            let header = ["x", "empirical_cdf", "reference_cdf"].map(String::from);
            let rows: Vec<Vec<f64>> = hist.cdf().into_iter().map(|(x, p)| vec![x, p, marginal.cdf(x)]).collect();
            w.csv(&format!("histogram_axis{k}.csv"), &header, rows.into_iter())?;
        }
    }
    let report = InvariantReport {
        scheme: sde.scheme,
        dt: inv.dt,
        burn_in: inv.burn_in,
        record: inv.record,
        paths: sample.paths,
        paths_failed: sample.paths_failed,
        samples: sample.samples,
        sup_distance: sup,
    };
    w.json("report.json", &report)?;
    Ok(report)
}

/// Summary for `validate-config`.
pub fn describe(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    cfg.validate()?;
    let setup = Setup::new(cfg)?;
    if let Some(s) = &cfg.solve {
        Rhs::new(&s.rhs, setup.space.lambdas())?;
    }
    Ok(json!({
        "dimension": setup.space.dim(),
        "lambdas": setup.space.lambdas(),
        "grid_nodes": setup.space.grid().len(),
        "convex_set": cfg.convex_set,
        "potential_is_zero": setup.potential.is_zero(),
    }))
}
