//! U(x) = ∫₀¹ Φ(x(ξ)) dξ on the sine basis √2 sin(kπξ).

use super::{my_residual, Phi, Potential};
use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone)]
pub struct RdPotential<T> {
    phi: Phi<T>,
    modes: usize,
    /// basis[j * modes + k] = √2 sin((k+1)πξ_j)
    basis: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> RdPotential<T> {
    /// `grid_xi` is the number of trapezoid intervals on [0, 1].
    pub fn new(phi: Phi<T>, modes: usize, grid_xi: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Config("at least one mode is required".into()));
        }
        if grid_xi < 4 * modes {
            return Err(Error::Config(format!("xi grid of {grid_xi} intervals aliases {modes} modes")));
        }
        let pi = std::f64::consts::PI;
        let s2 = std::f64::consts::SQRT_2;
        let mut basis = Vec::with_capacity((grid_xi + 1) * modes);
        let mut weights = Vec::with_capacity(grid_xi + 1);
        for j in 0..=grid_xi {
            let xi = j as f64 / grid_xi as f64;
            for k in 1..=modes {
                basis.push(T::lit(s2 * (k as f64 * pi * xi).sin()));
            }
            let w = if j == 0 || j == grid_xi { 0.5 } else { 1.0 };
            weights.push(T::lit(w / grid_xi as f64));
        }
        let out = Self { phi, modes, basis, weights };
        if !out.growth_ok() {
            tracing::warn!("profile {:?} violates the polynomial growth bound on probe points", phi.kind());
        }
        Ok(out)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn phi(&self) -> Phi<T> {
        self.phi
    }

    pub fn xi_points(&self) -> usize {
        self.weights.len()
    }

    /// x(ξ_j) on the ξ-grid.
    pub fn field(&self, x: &[T]) -> Vec<T> {
        self.weights
            .iter()
            .enumerate()
            .map(|(j, _)| {
                let row = &self.basis[j * self.modes..(j + 1) * self.modes];
                row.iter().zip(x).fold(T::zero(), |s, (&e, &c)| s + e * c)
            })
            .collect()
    }

    /// L² projection of a ξ-grid function onto the modes.
    pub fn project(&self, g: &[T]) -> Vec<T> {
        let mut c = vec![T::zero(); self.modes];
        for (j, (&w, &gj)) in self.weights.iter().zip(g).enumerate() {
            let row = &self.basis[j * self.modes..(j + 1) * self.modes];
            for k in 0..self.modes {
                c[k] += w * gj * row[k];
            }
        }
        c
    }

    /// Trapezoid ∫₀¹ g dξ.
    pub fn integrate(&self, g: &[T]) -> T {
        self.weights.iter().zip(g).fold(T::zero(), |s, (&w, &v)| s + w * v)
    }

    /// Gram matrix of the basis on the ξ-grid (row-major).
    pub fn gram(&self) -> Vec<T> {
        let m = self.modes;
        let mut g = vec![T::zero(); m * m];
        for (j, &w) in self.weights.iter().enumerate() {
            let row = &self.basis[j * m..(j + 1) * m];
            for a in 0..m {
                for b in 0..m {
                    g[a * m + b] += w * row[a] * row[b];
                }
            }
        }
        g
    }

    /// Yosida-inequality residual at function level: the scalar inequality is integrated in ξ.
    pub fn check_my_pointwise(&self, x: &[T], alpha: T) -> T {
        let f = self.field(x);
        let mut acc = T::zero();
        for (&w, &t) in self.weights.iter().zip(&f) {
            let (_, g) = self.phi.envelope(t, alpha);
            let d = self.phi.derivative(t);
            acc += w * my_residual(&[g], &[d]);
        }
        acc
    }

    fn growth_ok(&self) -> bool {
        let p = self.phi.kind().growth() as i32;
        let mut prev = T::zero();
        for e in 0..12 {
            let t = T::lit(2f64.powi(e));
            let ratio = self.phi.derivative(t).abs() / (T::one() + t.powi(p - 1));
            if e > 2 && ratio > prev * T::lit(1.5) + T::lit(1e-12) {
                return false;
            }
            prev = ratio;
        }
        true
    }
}

impl<T: Real> Potential<T> for RdPotential<T> {
    fn value(&self, x: &[T]) -> T {
        let f = self.field(x);
        self.weights.iter().zip(&f).fold(T::zero(), |s, (&w, &t)| s + w * self.phi.value(t))
    }

    fn lower_bound(&self) -> T {
        T::zero()
    }

    /// Pointwise prox in ξ, projected back onto the modes.
    fn prox(&self, x: &[T], alpha: T) -> Result<Vec<T>> {
        let f = self.field(x);
        let p: Vec<T> = f.iter().map(|&t| self.phi.prox(t, alpha)).collect();
        Ok(self.project(&p))
    }

    fn min_norm_gradient(&self, x: &[T]) -> Result<Vec<T>> {
        let f = self.field(x);
        let d: Vec<T> = f.iter().map(|&t| self.phi.derivative(t)).collect();
        Ok(self.project(&d))
    }

    /// U_α(x) = ∫Φ_α(x(ξ))dξ with gradient the projection of Φ_α'(x(·)).
    fn envelope(&self, x: &[T], alpha: T) -> Result<(T, Vec<T>)> {
        if !(alpha > T::zero()) {
            return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
        }
        let f = self.field(x);
        let mut v = T::zero();
        let mut d = Vec::with_capacity(f.len());
        for (&w, &t) in self.weights.iter().zip(&f) {
            let (a, b) = self.phi.envelope(t, alpha);
            v += w * a;
            d.push(b);
        }
        Ok((v, self.project(&d)))
    }

    fn is_zero(&self) -> bool {
        self.phi.kind() == super::PhiKind::Zero
    }
}
