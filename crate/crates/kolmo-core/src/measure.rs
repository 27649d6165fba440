//! Finite-dimensional Gaussian space: spectrum, drift, quadrature and sampling.

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::potentials::Potential;
use crate::{rng, Real};

/// Construction options for [`MeasureSpace`].
#[derive(Debug, Clone)]
pub struct SpaceOptions {
    /// Half-width of the box in units of σ_k.
    pub box_radius: f64,
    /// Cells per axis of the tensor grid.
    pub cells_per_axis: usize,
    /// Number of QMC nodes when n > 3.
    pub qmc_samples: usize,
    pub qmc_seed: u64,
    /// Upper bound on the memory the grid may use.
    pub memory_cap_bytes: u64,
}

impl Default for SpaceOptions {
    fn default() -> Self {
        Self {
            box_radius: 8.0,
            cells_per_axis: 200,
            qmc_samples: 1 << 14,
            qmc_seed: 0x5eed,
            memory_cap_bytes: 2 << 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Tensor,
    Qmc,
}

/// Quadrature nodes and μ-weights on the box.
#[derive(Debug, Clone)]
pub struct QuadratureGrid<T> {
    kind: GridKind,
    n: usize,
    dims: Vec<usize>,
    strides: Vec<usize>,
    axes: Vec<Vec<T>>,
    h: Vec<T>,
    nodes: Vec<T>,
    mu_weights: Vec<T>,
}

impl<T: Real> QuadratureGrid<T> {
    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_tensor(&self) -> bool {
        self.kind == GridKind::Tensor
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.mu_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu_weights.is_empty()
    }

    /// Coordinates of node `i`.
    #[inline]
    pub fn node(&self, i: usize) -> &[T] {
        &self.nodes[i * self.n..(i + 1) * self.n]
    }

    pub fn mu_weights(&self) -> &[T] {
        &self.mu_weights
    }

    /// Grid spacing per axis (tensor grids only; empty otherwise).
    pub fn cell_size(&self) -> &[T] {
        &self.h
    }

    pub fn h_max(&self) -> T {
        self.h.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    /// Nodes per axis.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Node coordinates along `axis`.
    pub fn axis(&self, axis: usize) -> &[T] {
        &self.axes[axis]
    }

    #[inline]
    pub fn multi_index(&self, mut i: usize, out: &mut [usize]) {
        for k in (0..self.n).rev() {
            out[k] = i % self.dims[k];
            i /= self.dims[k];
        }
    }

    #[inline]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    /// Neighbour of node `i` shifted by `offset` along `axis`, if inside the grid.
    #[inline]
    pub fn neighbor(&self, i: usize, axis: usize, offset: isize) -> Option<usize> {
        let pos = (i / self.strides[axis]) % self.dims[axis];
        let target = pos as isize + offset;
        if target < 0 || target >= self.dims[axis] as isize {
            None
        } else {
            Some((i as isize + offset * self.strides[axis] as isize) as usize)
        }
    }

    /// Evaluates `f` at every node.
    pub fn map<F: Fn(&[T]) -> T>(&self, f: F) -> Vec<T> {
        (0..self.len()).map(|i| f(self.node(i))).collect()
    }
}

/// Truncated Gaussian structure (ℝⁿ, Q, A, μ) with its quadrature grid.
#[derive(Debug, Clone)]
pub struct MeasureSpace<T> {
    lambdas: Vec<T>,
    drift: Vec<T>,
    sigmas: Vec<T>,
    box_radius: T,
    cells: usize,
    grid: QuadratureGrid<T>,
}

/// Builds a space with default options and the given box and grid.
pub fn build_space<T: Real>(lambdas: &[T], box_radius: f64, cells_per_axis: usize) -> Result<MeasureSpace<T>> {
    MeasureSpace::new(
        lambdas,
        &SpaceOptions {
            box_radius,
            cells_per_axis,
            ..SpaceOptions::default()
        },
    )
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

impl<T: Real> MeasureSpace<T> {
    pub fn new(lambdas: &[T], opts: &SpaceOptions) -> Result<Self> {
        let n = lambdas.len();
        if n == 0 {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        for (k, &l) in lambdas.iter().enumerate() {
            if !(l > T::zero()) || !l.is_finite() {
                return Err(Error::InvalidSpectrum(format!("lambda_{} = {} is not a positive real", k + 1, l)));
            }
        }
        if !(opts.box_radius >= 4.0) || !opts.box_radius.is_finite() {
            return Err(Error::Config(format!("box_radius must be >= 4, got {}", opts.box_radius)));
        }
        if opts.cells_per_axis < 8 {
            return Err(Error::Config(format!("cells_per_axis must be >= 8, got {}", opts.cells_per_axis)));
        }
        let drift: Vec<T> = lambdas.iter().map(|&l| -T::one() / (T::lit(2.0) * l)).collect();
        let sigmas: Vec<T> = lambdas.iter().map(|&l| l.sqrt()).collect();
        let bytes_per_node = ((n + 1) * std::mem::size_of::<T>()) as u64;
        let grid = if n <= 3 {
            let per_axis = (opts.cells_per_axis + 1) as u64;
            let count = per_axis.checked_pow(n as u32).unwrap_or(u64::MAX);
            if count.saturating_mul(bytes_per_node) > opts.memory_cap_bytes {
                return Err(Error::Resource(format!(
                    "tensor grid with {count} nodes exceeds the memory cap of {} bytes",
                    opts.memory_cap_bytes
                )));
            }
            tensor_grid(&sigmas, opts.box_radius, opts.cells_per_axis)
        } else {
            let count = opts.qmc_samples as u64;
            if count.saturating_mul(bytes_per_node) > opts.memory_cap_bytes {
                return Err(Error::Resource(format!(
                    "QMC grid with {count} nodes exceeds the memory cap of {} bytes",
                    opts.memory_cap_bytes
                )));
            }
            if opts.qmc_samples == 0 {
                return Err(Error::Config("qmc_samples must be positive".into()));
            }
            qmc_grid(&sigmas, opts.box_radius, opts.qmc_samples, opts.qmc_seed)
        };
        Ok(Self {
            lambdas: lambdas.to_vec(),
            drift,
            sigmas,
            box_radius: T::lit(opts.box_radius),
            cells: opts.cells_per_axis,
            grid,
        })
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    /// Diagonal of A, a_k = −1/(2λ_k).
    pub fn drift_coeffs(&self) -> &[T] {
        &self.drift
    }

    pub fn sigmas(&self) -> &[T] {
        &self.sigmas
    }

    pub fn box_radius(&self) -> T {
        self.box_radius
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn grid(&self) -> &QuadratureGrid<T> {
        &self.grid
    }

    /// Half-width of the box along `axis`.
    pub fn half_width(&self, axis: usize) -> T {
        self.box_radius * self.sigmas[axis]
    }

    /// μ-mass of the box, product of the 1-D masses.
    pub fn box_mass(&self) -> T {
        let r = self.box_radius.f64() / std::f64::consts::SQRT_2;
        T::lit(erf(r).powi(self.dim() as i32))
    }

    /// Density of μ at x.
    pub fn density(&self, x: &[T]) -> T {
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        let mut q = T::zero();
        let mut norm = T::one();
        for ((&xk, &l), _) in x.iter().zip(&self.lambdas).zip(0..) {
            q += xk * xk / l;
            norm *= (two_pi * l).sqrt();
        }
        (-q / T::lit(2.0)).exp() / norm
    }

    /// Quadrature of ∫f dμ over the box.
    pub fn integrate_mu(&self, f: &[T]) -> Result<T> {
        self.check_len(f)?;
        let mut s = T::zero();
        for (i, (&w, &v)) in self.grid.mu_weights.iter().zip(f).enumerate() {
            if v.is_nan() {
                return Err(Error::InvalidData(format!("NaN at node {i}")));
            }
            s += w * v;
        }
        Ok(s)
    }

    /// Quadrature of ∫f e^{−2U} dμ given node values of U (which may be +∞).
    pub fn integrate_nu_values(&self, f: &[T], u: &[T]) -> Result<T> {
        self.check_len(f)?;
        self.check_len(u)?;
        let mut s = T::zero();
        let mut finite = false;
        for i in 0..f.len() {
            if f[i].is_nan() || u[i].is_nan() {
                return Err(Error::InvalidData(format!("NaN at node {i}")));
            }
            if u[i] == T::infinity() {
                continue;
            }
            if u[i] == T::neg_infinity() {
                return Err(Error::InvalidData(format!("potential is -inf at node {i}")));
            }
            finite = true;
            s += self.grid.mu_weights[i] * (-T::lit(2.0) * u[i]).exp() * f[i];
        }
        if !finite {
            return Err(Error::DegenerateMeasure("potential is +inf on every node".into()));
        }
        Ok(s)
    }

    /// Quadrature of ∫f dν with ν = e^{−2U}μ.
    pub fn integrate_nu(&self, f: &[T], potential: &dyn Potential<T>) -> Result<T> {
        let u = self.grid.map(|x| potential.value(x));
        self.integrate_nu_values(f, &u)
    }

    /// |∫D_kφ ψ dμ + ∫D_kψ φ dμ − (1/λ_k)∫x_k φψ dμ| with centered differences.
    pub fn check_ibp_mu(&self, phi: &[T], psi: &[T], k: usize) -> Result<T> {
        if !self.grid.is_tensor() {
            return Err(Error::Domain("finite differences need a tensor grid".into()));
        }
        if k >= self.dim() {
            return Err(Error::Config(format!("axis {k} out of range")));
        }
        self.check_len(phi)?;
        self.check_len(psi)?;
        let dphi = self.axis_derivative(phi, k);
        let dpsi = self.axis_derivative(psi, k);
        let mut lhs = T::zero();
        let mut rhs = T::zero();
        for i in 0..self.grid.len() {
            let w = self.grid.mu_weights[i];
            let xk = self.grid.node(i)[k];
            let (a, b) = (phi[i], psi[i]);
            if a.is_nan() || b.is_nan() {
                return Err(Error::InvalidData(format!("NaN at node {i}")));
            }
            lhs += w * dphi[i] * b;
            rhs += w * (-dpsi[i] * a + xk * a * b / self.lambdas[k]);
        }
        Ok((lhs - rhs).abs())
    }

    /// Centered difference along `axis`, one-sided at the faces of the box.
    pub fn axis_derivative(&self, v: &[T], axis: usize) -> Vec<T> {
        let g = &self.grid;
        let h = g.h[axis];
        (0..g.len())
            .map(|i| match (g.neighbor(i, axis, -1), g.neighbor(i, axis, 1)) {
                (Some(a), Some(b)) => (v[b] - v[a]) / (T::lit(2.0) * h),
                (None, Some(b)) => (v[b] - v[i]) / h,
                (Some(a), None) => (v[i] - v[a]) / h,
                (None, None) => T::zero(),
            })
            .collect()
    }

    /// `count` i.i.d. draws from μ (not truncated to the box).
    pub fn sample_mu(&self, seed: u64, count: usize) -> Vec<Vec<T>> {
        let mut r = rng::stream(seed, 0);
        (0..count)
            .map(|_| self.sigmas.iter().map(|&s| s * rng::normal::<T, _>(&mut r)).collect())
            .collect()
    }

    fn check_len(&self, f: &[T]) -> Result<()> {
        if f.len() != self.grid.len() {
            return Err(Error::InvalidData(format!(
                "grid function has {} values, grid has {} nodes",
                f.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }
}

fn tensor_grid<T: Real>(sigmas: &[T], radius: f64, m: usize) -> QuadratureGrid<T> {
    let n = sigmas.len();
    let dims = vec![m + 1; n];
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let exact_mass = erf(radius / std::f64::consts::SQRT_2);
    let mut axes = Vec::with_capacity(n);
    let mut axis_w = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for &s in sigmas {
        let s = s.f64();
        let half = radius * s;
        let hk = 2.0 * half / m as f64;
        let xs: Vec<f64> = (0..=m).map(|i| -half + i as f64 * hk).collect();
        let mut ws: Vec<f64> = xs
            .iter()
            .map(|&x| hk * (-x * x / (2.0 * s * s)).exp() / (2.0 * std::f64::consts::PI * s * s).sqrt())
            .collect();
        ws[0] *= 0.5;
        ws[m] *= 0.5;
        // pin the axis mass to the exact Gaussian mass of the interval
        let total: f64 = ws.iter().sum();
        let scale = exact_mass / total;
        axes.push(xs.iter().map(|&x| T::lit(x)).collect::<Vec<T>>());
        axis_w.push(ws.iter().map(|&w| w * scale).collect::<Vec<f64>>());
        h.push(T::lit(hk));
    }
    let count: usize = dims.iter().product();
    let mut nodes = Vec::with_capacity(count * n);
    let mut weights = Vec::with_capacity(count);
    let mut idx = vec![0usize; n];
    for i in 0..count {
        let mut rem = i;
        for k in (0..n).rev() {
            idx[k] = rem % dims[k];
            rem /= dims[k];
        }
        let mut w = 1.0;
        for k in 0..n {
            nodes.push(axes[k][idx[k]]);
            w *= axis_w[k][idx[k]];
        }
        weights.push(T::lit(w));
    }
    QuadratureGrid {
        kind: GridKind::Tensor,
        n,
        dims,
        strides,
        axes,
        h,
        nodes,
        mu_weights: weights,
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Scrambled Halton points mapped to the truncated Gaussian on the box.
fn qmc_grid<T: Real>(sigmas: &[T], radius: f64, count: usize, seed: u64) -> QuadratureGrid<T> {
    let n = sigmas.len();
    let mut r = rng::stream(seed, 0);
    let perms: Vec<Vec<u64>> = (0..n)
        .map(|d| {
            let b = PRIMES[d % PRIMES.len()];
            let mut p: Vec<u64> = (1..b).collect();
            p.shuffle(&mut r);
            let mut full = vec![0];
            full.extend(p);
            full
        })
        .collect();
    let shifts: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
    let normal = std_normal();
    let lo = normal.cdf(-radius);
    let hi = normal.cdf(radius);
    let mass = erf(radius / std::f64::consts::SQRT_2).powi(n as i32);
    let w = T::lit(mass / count as f64);
    let mut nodes = Vec::with_capacity(count * n);
    for i in 1..=count as u64 {
        for d in 0..n {
            let b = PRIMES[d % PRIMES.len()];
            let mut u = (radical_inverse(i, b, &perms[d]) + shifts[d]).fract();
            u = u.clamp(1e-15, 1.0 - 1e-15);
            let z = normal.inverse_cdf(lo + u * (hi - lo)).clamp(-radius, radius);
            nodes.push(T::lit(z) * sigmas[d]);
        }
    }
    QuadratureGrid {
        kind: GridKind::Qmc,
        n,
        dims: Vec::new(),
        strides: Vec::new(),
        axes: Vec::new(),
        h: Vec::new(),
        nodes,
        mu_weights: vec![w; count],
    }
}

fn radical_inverse(mut i: u64, base: u64, perm: &[u64]) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += perm[(i % base) as usize] as f64 * f;
        i /= base;
        f *= inv;
    }
    x
}
