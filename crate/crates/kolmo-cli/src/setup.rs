//! Builds the numerical objects a config describes.

use std::sync::Arc;

use evalexpr::{ContextWithMutableVariables, HashMapContext, Node, Value};

use kolmo_core::geometry::{ConcaveMap, ConvexBody};
use kolmo_core::measure::{MeasureSpace, SpaceOptions};
use kolmo_core::models::{build_ch, build_rd};
use kolmo_core::potentials::{PenalizedPotential, Phi, PhiKind, Potential, Separable, Weighting};

use crate::config::{ConvexSetConfig, ExperimentConfig, MapConfig, ModelKind, RhsConfig};
use crate::error::{CliError, Stage};

/// Space, convex set and potential of one experiment.
pub struct Setup {
    pub space: MeasureSpace<f64>,
    pub body: Option<ConvexBody<f64>>,
    pub potential: Arc<dyn Potential<f64>>,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        Self::with_cells(cfg, cfg.space.cells_per_axis)
    }

    pub fn with_cells(cfg: &ExperimentConfig, cells: usize) -> Result<Self, CliError> {
        let opts = SpaceOptions {
            box_radius: cfg.space.box_radius,
            cells_per_axis: cells,
            qmc_samples: cfg.space.qmc_samples,
            qmc_seed: cfg.seed,
            memory_cap_bytes: cfg.space.memory_cap_mb.saturating_mul(1 << 20),
        };
        let (space, potential): (MeasureSpace<f64>, Arc<dyn Potential<f64>>) = match &cfg.model {
            Some(m) if m.kind != ModelKind::Custom => {
                let phi = Phi::new(PhiKind::parse(&m.phi).stage("model")?, m.phi_scale).stage("model")?;
                match m.kind {
                    ModelKind::Rd => {
                        let r = build_rd(m.modes, phi, m.xi_grid, &opts).stage("model")?;
                        (r.space, r.potential)
                    }
                    _ => {
                        let alpha = m.alpha.ok_or_else(|| CliError::Config("model.alpha is required".into()))?;
                        let c = build_ch(m.modes, phi, alpha, m.xi_grid, &opts).stage("model")?;
                        (c.space, c.potential)
                    }
                }
            }
            _ => {
                let lambdas = cfg
                    .space
                    .lambdas
                    .as_ref()
                    .ok_or_else(|| CliError::Config("space.lambdas is required for custom spaces".into()))?;
                let space = MeasureSpace::new(lambdas, &opts).stage("space")?;
                let phi = Phi::new(PhiKind::parse(&cfg.potential.phi).stage("potential")?, cfg.potential.scale)
                    .stage("potential")?;
                (space, Arc::new(Separable::new(phi)))
            }
        };
        let body = build_body(&cfg.convex_set, space.dim())?;
        Ok(Self { space, body, potential })
    }

    pub fn require_body(&self) -> Result<&ConvexBody<f64>, CliError> {
        self.body
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a convex_set other than `whole`".into()))
    }

    /// Weight e^{−2U} of the restricted and whole-box problems.
    pub fn weighting(&self) -> Weighting<f64> {
        if self.potential.is_zero() {
            Weighting::Gaussian
        } else {
            Weighting::Potential(self.potential.clone())
        }
    }

    pub fn penalized(&self, alpha: f64) -> Result<Weighting<f64>, CliError> {
        let body = self.require_body()?.clone();
        Ok(Weighting::Penalized(
            PenalizedPotential::new(self.potential.clone(), body, alpha).stage("potential")?,
        ))
    }
}

pub fn build_body(c: &ConvexSetConfig, n: usize) -> Result<Option<ConvexBody<f64>>, CliError> {
    let body = match c {
        ConvexSetConfig::Whole => return Ok(None),
        ConvexSetConfig::Halfspace { direction, offset } => ConvexBody::halfspace(direction.clone(), *offset),
        ConvexSetConfig::Ellipsoid { alphas, radius } => ConvexBody::ellipsoid(alphas.clone(), *radius),
        ConvexSetConfig::Hypograph { axis, map } => {
            let map = match map {
                MapConfig::Affine { coeffs, offset } => ConcaveMap::Affine {
                    coeffs: coeffs.clone(),
                    offset: *offset,
                },
                MapConfig::NegQuadratic { curvature, linear, offset } => ConcaveMap::NegQuadratic {
                    curvature: curvature.clone(),
                    linear: linear.clone().unwrap_or_else(|| vec![0.0; curvature.len()]),
                    offset: *offset,
                },
            };
            ConvexBody::hypograph(*axis, map)
        }
    }
    .stage("convex_set")?;
    body.check_dim(n).stage("convex_set")?;
    Ok(Some(body))
}

/// Right-hand side f as a function on ℝⁿ.
pub struct Rhs {
    constant: f64,
    /// (axis, 1/√(2λ_axis), coefficients)
    hermite: Vec<(usize, f64, Vec<f64>)>,
    expr: Option<Node>,
}

/// Σ_j c_j H_j(y), physicists' Hermite polynomials.
pub fn hermite_series(coeffs: &[f64], y: f64) -> f64 {
    let mut s = 0.0;
    let (mut h0, mut h1) = (1.0, 2.0 * y);
    for (j, &c) in coeffs.iter().enumerate() {
        let hj = if j == 0 { h0 } else { h1 };
        s += c * hj;
        if j >= 1 {
            let next = 2.0 * y * h1 - 2.0 * j as f64 * h0;
            h0 = h1;
            h1 = next;
        }
    }
    s
}

impl Rhs {
    pub fn new(cfg: &RhsConfig, lambdas: &[f64]) -> Result<Self, CliError> {
        let mut hermite = Vec::new();
        for t in &cfg.hermite {
            let l = lambdas
                .get(t.axis)
                .ok_or_else(|| CliError::Config(format!("rhs hermite axis {} out of range", t.axis)))?;
            hermite.push((t.axis, 1.0 / (2.0 * l).sqrt(), t.coeffs.clone()));
        }
        let expr = match &cfg.expr {
            Some(e) => Some(evalexpr::build_operator_tree(e).map_err(|err| CliError::Config(format!("rhs expr: {err}")))?),
            None => None,
        };
        let rhs = Self {
            constant: cfg.constant,
            hermite,
            expr,
        };
        // surface expression errors at configuration time
        rhs.try_eval(&vec![0.0; lambdas.len()])?;
        Ok(rhs)
    }

    pub fn try_eval(&self, x: &[f64]) -> Result<f64, CliError> {
        let mut v = self.constant;
        for (axis, s, c) in &self.hermite {
            v += hermite_series(c, x[*axis] * s);
        }
        if let Some(node) = &self.expr {
            let mut ctx = HashMapContext::new();
            for (k, &xk) in x.iter().enumerate() {
                ctx.set_value(format!("x{k}"), Value::Float(xk))
                    .map_err(|e| CliError::Config(format!("rhs expr: {e}")))?;
            }
            let r = node
                .eval_number_with_context(&ctx)
                .map_err(|e| CliError::Config(format!("rhs expr: {e}")))?;
            v += r;
        }
        Ok(v)
    }

    /// Evaluation after [`Rhs::new`] has validated the expression.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.try_eval(x).unwrap_or(f64::NAN)
    }

    pub fn grid_values(&self, space: &MeasureSpace<f64>) -> Result<Vec<f64>, CliError> {
        let g = space.grid();
        (0..g.len()).map(|i| self.try_eval(g.node(i))).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.hermite.is_empty() && self.expr.is_none()
    }
}
