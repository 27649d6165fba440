//! Cahn–Hilliard potential on the mean-zero cosine modes, with the envelope
//! U_α(x) = ∫Φ_α((I+αB)⁻¹x)dξ.

use super::{Phi, Potential};
use crate::error::{Error, Result};
use crate::Real;

/// Coordinates x_k refer to the X-orthonormal functions f_k = kπ√2 cos(kπξ).
#[derive(Debug, Clone)]
pub struct ChPotential<T> {
    phi: Phi<T>,
    modes: usize,
    /// cosines[j * modes + k] = √2 cos((k+1)πξ_j)
    cosines: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> ChPotential<T> {
    pub fn new(phi: Phi<T>, modes: usize, grid_xi: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Config("at least one mode is required".into()));
        }
        if grid_xi < 4 * modes {
            return Err(Error::Config(format!("xi grid of {grid_xi} intervals aliases {modes} modes")));
        }
        let pi = std::f64::consts::PI;
        let s2 = std::f64::consts::SQRT_2;
        let mut cosines = Vec::with_capacity((grid_xi + 1) * modes);
        let mut weights = Vec::with_capacity(grid_xi + 1);
        for j in 0..=grid_xi {
            let xi = j as f64 / grid_xi as f64;
            for k in 1..=modes {
                cosines.push(T::lit(s2 * (k as f64 * pi * xi).cos()));
            }
            let w = if j == 0 || j == grid_xi { 0.5 } else { 1.0 };
            weights.push(T::lit(w / grid_xi as f64));
        }
        Ok(Self {
            phi,
            modes,
            cosines,
            weights,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Eigenvalue k²π² of B on mode k (1-based).
    pub fn b_eigenvalue(k: usize) -> T {
        let kp = T::from_usize_lossy(k) * T::lit(std::f64::consts::PI);
        kp * kp
    }

    /// Factor 1/(1 + αk²π²) of (I+αB)⁻¹ on mode k (1-based).
    pub fn resolvent_factor(k: usize, alpha: T) -> T {
        T::one() / (T::one() + alpha * Self::b_eigenvalue(k))
    }

    pub fn resolvent(&self, x: &[T], alpha: T) -> Vec<T> {
        x.iter().enumerate().map(|(i, &c)| c * Self::resolvent_factor(i + 1, alpha)).collect()
    }

    /// Σ_k c_k w_k(ξ_j) √2 cos(kπξ_j) with per-mode multipliers w_k.
    fn synth(&self, x: &[T], mult: impl Fn(usize) -> T) -> Vec<T> {
        let m: Vec<T> = (1..=self.modes).map(mult).collect();
        self.weights
            .iter()
            .enumerate()
            .map(|(j, _)| {
                let row = &self.cosines[j * self.modes..(j + 1) * self.modes];
                (0..self.modes).fold(T::zero(), |s, k| s + row[k] * x[k] * m[k])
            })
            .collect()
    }

    /// ∫ g(ξ) √2 cos(kπξ) dξ for every mode.
    fn analyse(&self, g: &[T]) -> Vec<T> {
        let mut c = vec![T::zero(); self.modes];
        for (j, (&w, &gj)) in self.weights.iter().zip(g).enumerate() {
            let row = &self.cosines[j * self.modes..(j + 1) * self.modes];
            for k in 0..self.modes {
                c[k] += w * gj * row[k];
            }
        }
        c
    }

    fn kpi(k: usize) -> T {
        T::from_usize_lossy(k) * T::lit(std::f64::consts::PI)
    }

    /// x(ξ) = Σ x_k kπ√2 cos(kπξ).
    pub fn field(&self, x: &[T]) -> Vec<T> {
        self.synth(x, Self::kpi)
    }

    /// B⁻¹y as a function of ξ.
    pub fn b_inverse_field(&self, y: &[T]) -> Vec<T> {
        self.synth(y, |k| T::one() / Self::kpi(k))
    }

    /// ⟨y, g⟩_X for a mode vector y and a ξ-grid function g.
    pub fn x_inner(&self, y: &[T], g: &[T]) -> T {
        let c = self.analyse(g);
        (0..self.modes).fold(T::zero(), |s, k| s + y[k] * c[k] / Self::kpi(k + 1))
    }

    /// Trapezoid ∫₀¹ g dξ.
    pub fn integrate(&self, g: &[T]) -> T {
        self.weights.iter().zip(g).fold(T::zero(), |s, (&w, &v)| s + w * v)
    }

    /// ⟨Bx, x⟩ in coefficient form.
    pub fn b_form(&self, x: &[T]) -> T {
        x.iter().enumerate().fold(T::zero(), |s, (i, &c)| s + Self::b_eigenvalue(i + 1) * c * c)
    }

    pub fn xi_points(&self) -> usize {
        self.weights.len()
    }
}

impl<T: Real> Potential<T> for ChPotential<T> {
    fn value(&self, x: &[T]) -> T {
        let f = self.field(x);
        self.weights.iter().zip(&f).fold(T::zero(), |s, (&w, &t)| s + w * self.phi.value(t))
    }

    fn lower_bound(&self) -> T {
        T::zero()
    }

    fn prox(&self, _x: &[T], _alpha: T) -> Result<Vec<T>> {
        Err(Error::UnsupportedPotential(
            "the Cahn-Hilliard envelope is not a proximal construction".into(),
        ))
    }

    fn min_norm_gradient(&self, x: &[T]) -> Result<Vec<T>> {
        let f = self.field(x);
        let d: Vec<T> = f.iter().map(|&t| self.phi.derivative(t)).collect();
        let c = self.analyse(&d);
        Ok(c.iter().enumerate().map(|(i, &v)| v * Self::kpi(i + 1)).collect())
    }

    fn envelope(&self, x: &[T], alpha: T) -> Result<(T, Vec<T>)> {
        if !(alpha > T::zero()) {
            return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
        }
        let xa = self.resolvent(x, alpha);
        let f = self.field(&xa);
        let mut v = T::zero();
        let mut d = Vec::with_capacity(f.len());
        for (&w, &t) in self.weights.iter().zip(&f) {
            let (a, b) = self.phi.envelope(t, alpha);
            v += w * a;
            d.push(b);
        }
        let c = self.analyse(&d);
        let g = c
            .iter()
            .enumerate()
            .map(|(i, &v)| v * Self::kpi(i + 1) * Self::resolvent_factor(i + 1, alpha))
            .collect();
        Ok((v, g))
    }

    fn is_zero(&self) -> bool {
        self.phi.kind() == super::PhiKind::Zero
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PhiKind;

    #[test]
    fn resolvent_factors() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((ChPotential::<f64>::resolvent_factor(2, 0.1) - 1.0 / (1.0 + 0.4 * pi2)).abs() < 1e-15);
        let u = ChPotential::<f64>::new(Phi::unit(PhiKind::Quartic), 3, 256).unwrap();
        let r = u.resolvent(&[1.0, 1.0, 1.0], 0.5);
        for k in 0..3 {
            assert_eq!(r[k], ChPotential::<f64>::resolvent_factor(k + 1, 0.5));
        }
    }

    #[test]
    fn fields_have_zero_mean() {
        let u = ChPotential::<f64>::new(Phi::unit(PhiKind::Quartic), 4, 512).unwrap();
        let f = u.field(&[0.3, -0.1, 0.05, 0.2]);
        assert!(u.integrate(&f).abs() < 1e-12);
    }

    #[test]
    fn envelope_gradient_matches_fd() {
        let u = ChPotential::<f64>::new(Phi::unit(PhiKind::Quartic), 2, 512).unwrap();
        let x = [0.15, -0.05];
        let a = 0.01;
        let (_, g) = u.envelope(&x, a).unwrap();
        for k in 0..2 {
            let e = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[k] += e;
            xm[k] -= e;
            let fd = (u.envelope(&xp, a).unwrap().0 - u.envelope(&xm, a).unwrap().0) / (2.0 * e);
            assert!((fd - g[k]).abs() < 1e-4, "{fd} vs {}", g[k]);
        }
        let z = ChPotential::<f64>::new(Phi::unit(PhiKind::Zero), 2, 512).unwrap();
        let (v, g) = z.envelope(&x, a).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn b_is_positive() {
        let u = ChPotential::<f64>::new(Phi::unit(PhiKind::Quartic), 3, 64).unwrap();
        assert!(u.b_form(&[0.0, 1e-3, 0.0]) > 0.0);
        assert!(ChPotential::<f64>::new(Phi::unit(PhiKind::Quartic), 4, 12).is_err());
    }
}
