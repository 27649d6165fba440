use serde::Serialize;

use super::fields::derivative_at;
use super::flux::flux_trace;
use super::{Domain, WeakProblem, WeakSolution};
use crate::error::Result;
use crate::Real;

/// Both sides of the energy, maximal-regularity and whole-space estimates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimateReport {
    /// λ‖u‖² + ½‖Du‖².
    pub lhs_diss: f64,
    /// ‖f‖²/λ.
    pub rhs_diss: f64,
    /// ½∫Tr[(D²u)²] + ∫‖Q^{−1/2}Du‖².
    pub lhs_maxreg: f64,
    /// 4‖f‖².
    pub rhs_maxreg: f64,
    /// λ‖Du‖² + lhs_maxreg (+ ∫⟨D²U_α Du, Du⟩ for smoothed weights); whole box only.
    pub lhs_whole: Option<f64>,
    pub hessian_term: Option<f64>,
    pub flux_surface_norm: Option<f64>,
}

impl EstimateReport {
    pub fn diss_ratio(&self) -> f64 {
        ratio(self.lhs_diss, self.rhs_diss)
    }

    pub fn maxreg_ratio(&self) -> f64 {
        ratio(self.lhs_maxreg, self.rhs_maxreg)
    }

    pub fn whole_ratio(&self) -> Option<f64> {
        self.lhs_whole.map(|l| ratio(l, self.rhs_maxreg))
    }

    pub fn is_valid(&self) -> bool {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        ok(self.lhs_diss)
            && ok(self.rhs_diss)
            && ok(self.lhs_maxreg)
            && ok(self.rhs_maxreg)
            && self.lhs_whole.map_or(true, ok)
            && self.flux_surface_norm.map_or(true, ok)
    }
}

fn ratio(l: f64, r: f64) -> f64 {
    if r > 0.0 {
        l / r
    } else if l == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Quadrature of both sides of each estimate for a computed solution.
///
/// The Hessian term is integrated over nodes where it is nonnegative and
/// negative alike; convexity makes it nonnegative up to differencing error.
pub fn estimate_report<T: Real>(solution: &WeakSolution<T>, problem: &WeakProblem<'_, T>) -> Result<EstimateReport> {
    let nm = &solution.norms;
    let lam = solution.lambda.f64();
    let lhs_maxreg = 0.5 * nm.tr_d2u2 + nm.qdu2;
    let (lhs_whole, hessian_term, flux) = match &problem.domain {
        Domain::Whole => {
            let h = hessian_term(solution, problem)?;
            (Some(lam * nm.du2 + lhs_maxreg + h.unwrap_or(0.0)), h, None)
        }
        Domain::Restricted(body) => {
            let f = flux_trace(solution, problem.space, body, None, problem.options.band_factor)?;
            (None, None, Some(f.flux_surface_norm))
        }
    };
    Ok(EstimateReport {
        lhs_diss: lam * nm.u2 + 0.5 * nm.du2,
        rhs_diss: nm.f2 / lam,
        lhs_maxreg,
        rhs_maxreg: 4.0 * nm.f2,
        lhs_whole,
        hessian_term,
        flux_surface_norm: flux,
    })
}

fn hessian_term<T: Real>(solution: &WeakSolution<T>, problem: &WeakProblem<'_, T>) -> Result<Option<f64>> {
    let grid = problem.space.grid();
    let n = grid.dim();
    if problem.weighting.envelope_gradient(grid.node(0)).is_none() {
        return Ok(None);
    }
    let mut grad = vec![vec![T::zero(); grid.len()]; n];
    for i in 0..grid.len() {
        if !solution.active[i] {
            continue;
        }
        if let Some(g) = problem.weighting.envelope_gradient(grid.node(i)) {
            for (k, v) in g?.into_iter().enumerate() {
                grad[k][i] = v;
            }
        }
    }
    let mut total = T::zero();
    for i in 0..grid.len() {
        if !solution.trusted[i] {
            continue;
        }
        let mut q = T::zero();
        for a in 0..n {
            for b in 0..n {
                let hab = derivative_at(grid, &grad[b], &solution.trusted, i, a);
                q += hab * solution.du[a][i] * solution.du[b][i];
            }
        }
        total += solution.mass[i] * q;
    }
    Ok(Some(total.f64()))
}
