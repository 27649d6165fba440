//! Weighted Galerkin solver for λu − Ku = f on C (natural boundary
//! condition) and on the whole box, with derived fields and estimates.
//!
//! Multilinear elements on the tensor grid. The stiffness uses one
//! coefficient per grid edge, ½∫w·(transverse hat)/h², exact along the edge
//! and lumped across it. The mass is lumped and, for n ≤ 2, corrected by the
//! consistent 1-D mass along each axis; the right-hand side uses the same mass
//! form on the interpolated f. The result is a symmetric M-matrix whenever
//! h² < 3/λ.

mod assemble;
mod cg;
mod estimates;
mod fields;
mod flux;

use tracing::warn;

pub use assemble::{axis_marginal, integrate_cells, Marginal, lumped_weights, outside_mass, CellIntegrals, QuadratureOptions, Region};
pub use cg::{conjugate_gradient, pdot, CgInfo, Csr};
pub use estimates::{estimate_report, EstimateReport};
pub use fields::{derivative_at, first_derivatives};
pub use flux::{flux_trace, FluxReport};

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::measure::MeasureSpace;
use crate::potentials::Weighting;
use crate::Real;

#[derive(Debug, Clone)]
pub enum Domain<T> {
    Whole,
    Restricted(ConvexBody<T>),
}

impl<T> Domain<T> {
    pub fn body(&self) -> Option<&ConvexBody<T>> {
        match self {
            Domain::Whole => None,
            Domain::Restricted(b) => Some(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassScheme {
    /// Axis-consistent for n ≤ 2, lumped otherwise.
    Auto,
    Lumped,
    AxisConsistent,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub cg_tol: f64,
    /// Iteration cap as a multiple of the number of unknowns.
    pub max_iter_factor: usize,
    pub quadrature: Option<QuadratureOptions>,
    pub mass: MassScheme,
    /// Nodes with lumped mass below `drop_tol · max` are removed.
    pub drop_tol: f64,
    /// Flux band half-width in units of the largest cell size.
    pub band_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cg_tol: 1e-10,
            max_iter_factor: 50,
            quadrature: None,
            mass: MassScheme::Auto,
            drop_tol: 1e-14,
            band_factor: 2.0,
        }
    }
}

impl SolverOptions {
    pub fn quadrature_for(&self, n: usize) -> QuadratureOptions {
        self.quadrature.unwrap_or_else(|| QuadratureOptions::for_dim(n))
    }
}

/// λ(u, φ)_ν + ½(Du, Dφ)_ν = (f, φ)_ν on the domain, ν = e^{−2W}μ.
#[derive(Debug, Clone)]
pub struct WeakProblem<'a, T> {
    pub space: &'a MeasureSpace<T>,
    pub domain: Domain<T>,
    pub weighting: Weighting<T>,
    pub lambda: T,
    /// Node values of f on the grid.
    pub rhs: Vec<T>,
    pub options: SolverOptions,
}

impl<'a, T: Real> WeakProblem<'a, T> {
    pub fn new(space: &'a MeasureSpace<T>, domain: Domain<T>, weighting: Weighting<T>, lambda: T, rhs: Vec<T>) -> Self {
        Self {
            space,
            domain,
            weighting,
            lambda,
            rhs,
            options: SolverOptions::default(),
        }
    }
}

/// ν-integrals of the solution and its derivatives.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct Norms {
    pub u2: f64,
    pub du2: f64,
    pub tr_d2u2: f64,
    pub qdu2: f64,
    pub f2: f64,
    pub mass: f64,
}

#[derive(Debug, Clone)]
pub struct WeakSolution<T> {
    pub u: Vec<T>,
    pub active: Vec<bool>,
    /// Active nodes inside C, the only ones used by difference stencils.
    pub trusted: Vec<bool>,
    /// Lumped ν-masses of the nodes.
    pub mass: Vec<T>,
    pub du: Vec<Vec<T>>,
    d2u: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub lambda: T,
    pub norms: Norms,
    pub cg: CgInfo,
    pub dofs: usize,
    pub cut_cells: usize,
    pub restricted: bool,
    pub penalized: bool,
    pub warnings: Vec<String>,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + b
}

impl<T: Real> WeakSolution<T> {
    pub fn dim(&self) -> usize {
        self.du.len()
    }

    /// D_ij u as a grid function; D_ij and D_ji share one stencil.
    pub fn d2(&self, i: usize, j: usize) -> &[T] {
        &self.d2u[pair_index(self.dim(), i, j)]
    }

    /// Multilinear interpolation of u at x over the active corners of its cell.
    pub fn value_at(&self, space: &MeasureSpace<T>, x: &[T]) -> Option<T> {
        let grid = space.grid();
        let n = space.dim();
        if x.len() != n {
            return None;
        }
        let mut origin = 0;
        let mut t = vec![T::zero(); n];
        for k in 0..n {
            let lo = grid.axis(k)[0];
            let h = grid.cell_size()[k];
            let s = (x[k] - lo) / h;
            if s < T::zero() || s > T::from_usize_lossy(grid.dims()[k] - 1) {
                return None;
            }
            let c = s.floor().to_usize()?.min(grid.dims()[k] - 2);
            t[k] = s - T::from_usize_lossy(c);
            origin += c * grid.strides()[k];
        }
        let mut num = T::zero();
        let mut den = T::zero();
        for m in 0..(1usize << n) {
            let mut node = origin;
            let mut w = T::one();
            for k in 0..n {
                if m >> k & 1 == 1 {
                    node += grid.strides()[k];
                    w *= t[k];
                } else {
                    w *= T::one() - t[k];
                }
            }
            if self.active[node] && w > T::zero() {
                num += w * self.u[node];
                den += w;
            }
        }
        if den > T::zero() {
            Some(num / den)
        } else {
            None
        }
    }
}

/// ‖u − v‖_{W^{1,2}} with the masses and trusted nodes of `reference`.
pub fn w12_distance<T: Real>(reference: &WeakSolution<T>, other: &WeakSolution<T>) -> T {
    let mut s = T::zero();
    for i in 0..reference.u.len() {
        if !reference.trusted[i] {
            continue;
        }
        let d = reference.u[i] - other.u[i];
        let mut v = d * d;
        for k in 0..reference.dim() {
            let e = reference.du[k][i] - other.du[k][i];
            v += e * e;
        }
        s += reference.mass[i] * v;
    }
    s.sqrt()
}

/// Weak Neumann problem on C, or the whole-box problem when the domain is whole.
pub fn solve_neumann<T: Real>(problem: &WeakProblem<'_, T>) -> Result<WeakSolution<T>> {
    solve(problem)
}

/// Whole-box problem with weight e^{−2V_α}.
pub fn solve_penalized<T: Real>(problem: &WeakProblem<'_, T>) -> Result<WeakSolution<T>> {
    let pen = match &problem.weighting {
        Weighting::Penalized(p) => p,
        _ => return Err(Error::Config("penalized solve needs a penalized weighting".into())),
    };
    if !matches!(problem.domain, Domain::Whole) {
        return Err(Error::Config("penalized problems are posed on the whole box".into()));
    }
    let mut sol = solve(problem)?;
    let h = problem.space.grid().h_max();
    if pen.alpha < T::lit(1e-6) * h * h {
        let msg = format!("alpha = {} is below 1e-6 h^2; the penalized system is stiff", pen.alpha);
        warn!("{msg}");
        sol.warnings.push(msg);
    }
    Ok(sol)
}

/// Linear system over the active nodes.
#[derive(Debug, Clone)]
pub struct System<T> {
    pub matrix: Csr<T>,
    pub rhs: Vec<T>,
    /// Grid index of every unknown.
    pub nodes: Vec<usize>,
    pub active: Vec<bool>,
    pub mass: Vec<T>,
    pub cut_cells: usize,
    pub warnings: Vec<String>,
}

pub fn assemble<T: Real>(problem: &WeakProblem<'_, T>) -> Result<System<T>> {
    let space = problem.space;
    let grid = space.grid();
    let n = space.dim();
    if !grid.is_tensor() {
        return Err(Error::Domain("the Galerkin solver needs a tensor grid (n <= 3)".into()));
    }
    if !(problem.lambda > T::zero()) {
        return Err(Error::Config(format!("lambda must be positive, got {}", problem.lambda)));
    }
    if problem.rhs.len() != grid.len() {
        return Err(Error::InvalidData(format!(
            "rhs has {} values, grid has {} nodes",
            problem.rhs.len(),
            grid.len()
        )));
    }
    if let Some(i) = problem.rhs.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!("rhs is not finite at node {i}")));
    }
    if let Some(b) = problem.domain.body() {
        b.check_dim(n)?;
    }
    let opts = &problem.options;
    let quad = opts.quadrature_for(n);
    let region = match &problem.domain {
        Domain::Whole => Region::All,
        Domain::Restricted(b) => Region::Inside(b),
    };
    let cells = integrate_cells(space, &problem.weighting, region, quad)?;
    let lam = problem.lambda;
    let h = grid.cell_size();
    let consistent = match opts.mass {
        MassScheme::Auto => n <= 2,
        MassScheme::Lumped => false,
        MassScheme::AxisConsistent => true,
    };
    let nn = grid.len();
    let mut warnings = Vec::new();
    let mut edge_m = cells.edge_m.clone();
    let mut coef = vec![T::zero(); nn * n];
    let mut clipped = 0usize;
    for e in 0..nn * n {
        let k = e % n;
        if !consistent {
            edge_m[e] = T::zero();
        }
        let stiff = T::lit(0.5) * cells.edge_w[e] / (h[k] * h[k]);
        let mut c = stiff - lam * edge_m[e];
        if edge_m[e] > T::zero() && !(c > T::zero()) {
            edge_m[e] = T::zero();
            c = stiff;
            clipped += 1;
        }
        coef[e] = c;
    }
    if clipped > 0 {
        let msg = format!("{clipped} edges fell back to lumped mass (h^2 >= 3/lambda)");
        warn!("{msg}");
        warnings.push(msg);
    }
    let ml = cells.lumped;
    let mmax = ml.iter().fold(T::zero(), |a, &b| a.max(b));
    if mmax == T::zero() {
        return Err(Error::Domain("no grid cell meets the domain".into()));
    }
    let cut = T::lit(opts.drop_tol) * mmax;
    let active: Vec<bool> = ml.iter().map(|&m| m > cut).collect();
    let dof_count = active.iter().filter(|&&a| a).count();
    if dof_count < 10 {
        return Err(Error::Domain(format!("only {dof_count} active nodes")));
    }
    let mut dof = vec![usize::MAX; nn];
    let mut nodes = Vec::with_capacity(dof_count);
    for i in 0..nn {
        if active[i] {
            dof[i] = nodes.len();
            nodes.push(i);
        }
    }
    // rows of A and entries of b = M f
    let f = &problem.rhs;
    let mut row_ptr = Vec::with_capacity(dof_count + 1);
    let mut cols = Vec::with_capacity(dof_count * (2 * n + 1));
    let mut vals = Vec::with_capacity(dof_count * (2 * n + 1));
    let mut b = Vec::with_capacity(dof_count);
    row_ptr.push(0);
    for &i in &nodes {
        let mut diag = lam * ml[i];
        let mut bi = ml[i] * f[i];
        let mut offs: Vec<(usize, T)> = Vec::with_capacity(2 * n);
        for k in 0..n {
            for dir in [-1isize, 1] {
                let Some(j) = grid.neighbor(i, k, dir) else { continue };
                let e = if dir < 0 { j * n + k } else { i * n + k };
                let c = coef[e];
                if c == T::zero() && edge_m[e] == T::zero() {
                    continue;
                }
                diag += c;
                bi -= edge_m[e] * (f[i] - f[j]);
                if active[j] && c != T::zero() {
                    offs.push((dof[j], -c));
                }
            }
        }
        offs.push((dof[i], diag));
        offs.sort_by_key(|p| p.0);
        for (c, v) in offs {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
        b.push(bi);
    }
    let a = Csr {
        n: dof_count,
        row_ptr,
        cols,
        vals,
    };
    Ok(System {
        matrix: a,
        rhs: b,
        nodes,
        active,
        mass: ml,
        cut_cells: cells.cut_cells,
        warnings,
    })
}

fn solve<T: Real>(problem: &WeakProblem<'_, T>) -> Result<WeakSolution<T>> {
    let System {
        matrix,
        rhs,
        nodes,
        active,
        mass,
        cut_cells,
        warnings,
    } = assemble(problem)?;
    let grid = problem.space.grid();
    let nn = grid.len();
    let dof_count = nodes.len();
    let max_iter = problem.options.max_iter_factor.max(1) * dof_count;
    let (x, info) = conjugate_gradient(&matrix, &rhs, T::lit(problem.options.cg_tol), max_iter)?;
    let mut u = vec![T::zero(); nn];
    for (d, &i) in nodes.iter().enumerate() {
        u[i] = x[d];
    }
    let trusted: Vec<bool> = match &problem.domain {
        Domain::Whole => active.clone(),
        Domain::Restricted(body) => (0..nn).map(|i| active[i] && body.g(grid.node(i)) <= T::zero()).collect(),
    };
    let du = first_derivatives(grid, &u, &trusted, &active);
    let d2u = fields::second_derivatives(grid, &u, &du, &trusted, &active);
    let mut sol = WeakSolution {
        u,
        active,
        trusted,
        mass,
        du,
        d2u,
        rhs: problem.rhs.clone(),
        lambda: problem.lambda,
        norms: Norms::default(),
        cg: info,
        dofs: dof_count,
        cut_cells,
        restricted: matches!(problem.domain, Domain::Restricted(_)),
        penalized: problem.weighting.is_penalized(),
        warnings,
    };
    sol.norms = compute_norms(problem.space, &sol);
    Ok(sol)
}

fn compute_norms<T: Real>(space: &MeasureSpace<T>, s: &WeakSolution<T>) -> Norms {
    let n = space.dim();
    let mut out = [T::zero(); 6];
    for i in 0..s.u.len() {
        if !s.active[i] {
            continue;
        }
        let m = s.mass[i];
        let mut g2 = T::zero();
        let mut q2 = T::zero();
        let mut tr = T::zero();
        for k in 0..n {
            let d = s.du[k][i];
            g2 += d * d;
            q2 += d * d / space.lambdas()[k];
            for l in 0..n {
                let v = s.d2(k, l)[i];
                tr += v * v;
            }
        }
        out[0] += m * s.u[i] * s.u[i];
        out[1] += m * g2;
        out[2] += m * tr;
        out[3] += m * q2;
        out[4] += m * s.rhs[i] * s.rhs[i];
        out[5] += m;
    }
    Norms {
        u2: out[0].f64(),
        du2: out[1].f64(),
        tr_d2u2: out[2].f64(),
        qdu2: out[3].f64(),
        f2: out[4].f64(),
        mass: out[5].f64(),
    }
}

#[cfg(test)]
mod tests;
