//! Convex potentials, Moreau–Yosida envelopes and penalized potentials.

mod ch;
mod phi;
mod rd;

use std::fmt::Debug;
use std::sync::Arc;

pub use ch::ChPotential;
pub use phi::{Phi, PhiKind};
pub use rd::RdPotential;

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::real::{dot, norm};
use crate::Real;

/// Step used to approximate D₀U through DU_α when no closed form exists.
pub const MIN_NORM_ALPHA: f64 = 1e-6;

/// A convex potential U: ℝⁿ → ℝ ∪ {+∞} bounded below.
pub trait Potential<T: Real>: Send + Sync + Debug {
    fn value(&self, x: &[T]) -> T;

    /// A constant C with U ≥ C.
    fn lower_bound(&self) -> T;

    /// argmin_y U(y) + ‖x − y‖²/(2α).
    fn prox(&self, x: &[T], alpha: T) -> Result<Vec<T>>;

    /// D₀U(x), the minimal-norm subgradient.
    fn min_norm_gradient(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(self.envelope(x, T::lit(MIN_NORM_ALPHA))?.1)
    }

    /// (U_α(x), DU_α(x)).
    fn envelope(&self, x: &[T], alpha: T) -> Result<(T, Vec<T>)> {
        let p = self.prox(x, alpha)?;
        let mut d2 = T::zero();
        let grad: Vec<T> = x
            .iter()
            .zip(&p)
            .map(|(&a, &b)| {
                d2 += (a - b) * (a - b);
                (a - b) / alpha
            })
            .collect();
        Ok((self.value(&p) + d2 / (T::lit(2.0) * alpha), grad))
    }

    fn is_zero(&self) -> bool {
        false
    }
}

/// U ≡ c.
#[derive(Debug, Clone, Copy)]
pub struct Constant<T>(pub T);

impl<T: Real> Potential<T> for Constant<T> {
    fn value(&self, _x: &[T]) -> T {
        self.0
    }
    fn lower_bound(&self) -> T {
        self.0
    }
    fn prox(&self, x: &[T], _alpha: T) -> Result<Vec<T>> {
        Ok(x.to_vec())
    }
    fn min_norm_gradient(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(vec![T::zero(); x.len()])
    }
    fn is_zero(&self) -> bool {
        self.0 == T::zero()
    }
}

/// U(x) = Σ_k Φ(x_k).
#[derive(Debug, Clone, Copy)]
pub struct Separable<T> {
    pub phi: Phi<T>,
}

impl<T: Real> Separable<T> {
    pub fn new(phi: Phi<T>) -> Self {
        Self { phi }
    }

    pub fn of(kind: PhiKind) -> Self {
        Self { phi: Phi::unit(kind) }
    }
}

impl<T: Real> Potential<T> for Separable<T> {
    fn value(&self, x: &[T]) -> T {
        x.iter().map(|&t| self.phi.value(t)).sum()
    }
    fn lower_bound(&self) -> T {
        T::zero()
    }
    fn prox(&self, x: &[T], alpha: T) -> Result<Vec<T>> {
        check_alpha(alpha)?;
        Ok(x.iter().map(|&t| self.phi.prox(t, alpha)).collect())
    }
    fn min_norm_gradient(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(x.iter().map(|&t| self.phi.derivative(t)).collect())
    }
    fn envelope(&self, x: &[T], alpha: T) -> Result<(T, Vec<T>)> {
        check_alpha(alpha)?;
        let mut v = T::zero();
        let g = x
            .iter()
            .map(|&t| {
                let (a, b) = self.phi.envelope(t, alpha);
                v += a;
                b
            })
            .collect();
        Ok((v, g))
    }
    fn is_zero(&self) -> bool {
        self.phi.kind() == PhiKind::Zero
    }
}

type ValueFn<T> = dyn Fn(&[T]) -> T + Send + Sync;
type GradFn<T> = dyn Fn(&[T]) -> Vec<T> + Send + Sync;

/// A user supplied convex C¹ potential. The prox is computed by gradient
/// descent with backtracking; D₀U falls back to DU_α at α = 10⁻⁶.
#[derive(Clone)]
pub struct UserPotential<T> {
    value: Arc<ValueFn<T>>,
    gradient: Arc<GradFn<T>>,
    lower_bound: T,
}

impl<T> Debug for UserPotential<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("UserPotential")
    }
}

impl<T: Real> UserPotential<T> {
    pub fn new(
        value: impl Fn(&[T]) -> T + Send + Sync + 'static,
        gradient: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
        lower_bound: T,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            lower_bound,
        }
    }
}

impl<T: Real> Potential<T> for UserPotential<T> {
    fn value(&self, x: &[T]) -> T {
        (self.value)(x)
    }
    fn lower_bound(&self) -> T {
        self.lower_bound
    }
    fn prox(&self, x: &[T], alpha: T) -> Result<Vec<T>> {
        check_alpha(alpha)?;
        let obj = |y: &[T]| {
            let d: T = y.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum();
            (self.value)(y) + d / (T::lit(2.0) * alpha)
        };
        let mut y = x.to_vec();
        let mut f = obj(&y);
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(100.0));
        let mut step = alpha;
        for it in 0..10_000 {
            let gu = (self.gradient)(&y);
            let g: Vec<T> = gu.iter().zip(&y).zip(x).map(|((&gu, &yi), &xi)| gu + (yi - xi) / alpha).collect();
            let gn = norm(&g);
            if gn <= tol * (T::one() + norm(x)) {
                return Ok(y);
            }
            step = step * T::lit(2.0);
            // below this the objective cannot register a decrease
            let floor = T::epsilon() * T::lit(8.0) * (T::one() + f.abs());
            if T::lit(0.5) * step * gn * gn < floor && gn <= T::lit(1e-8) * (T::one() + norm(x)) {
                return Ok(y);
            }
            loop {
                let cand: Vec<T> = y.iter().zip(&g).map(|(&a, &b)| a - step * b).collect();
                let fc = obj(&cand);
                if fc <= f - T::lit(0.5) * step * gn * gn {
                    y = cand;
                    f = fc;
                    break;
                }
                step = step * T::lit(0.5);
                if step < T::epsilon() * alpha {
                    return if gn <= T::lit(1e-8) * (T::one() + norm(x)) {
                        Ok(y)
                    } else {
                        Err(Error::NumericalFailure {
                            what: "prox line search".into(),
                            iterations: it,
                            residual: gn.f64(),
                        })
                    };
                }
            }
        }
        Err(Error::NumericalFailure {
            what: "prox gradient descent".into(),
            iterations: 10_000,
            residual: f64::NAN,
        })
    }
}

/// U_α for a fixed α.
#[derive(Debug, Clone)]
pub struct MoreauEnvelope<T> {
    pub base: Arc<dyn Potential<T>>,
    pub alpha: T,
}

impl<T: Real> MoreauEnvelope<T> {
    pub fn new(base: Arc<dyn Potential<T>>, alpha: T) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { base, alpha })
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        Ok(self.base.envelope(x, self.alpha)?.0)
    }

    pub fn eval(&self, x: &[T]) -> Result<(T, Vec<T>)> {
        self.base.envelope(x, self.alpha)
    }
}

/// Evaluates (U_α(x), DU_α(x)).
pub fn moreau_eval<T: Real>(u: &dyn Potential<T>, alpha: T, x: &[T]) -> Result<(T, Vec<T>)> {
    check_alpha(alpha)?;
    u.envelope(x, alpha)
}

/// max(0, ‖DU_α − D₀U‖² − ‖D₀U‖² + ‖DU_α‖²).
pub fn check_my_inequality<T: Real>(u: &dyn Potential<T>, alpha: T, x: &[T]) -> Result<T> {
    let (_, g) = u.envelope(x, alpha)?;
    let d0 = u.min_norm_gradient(x)?;
    Ok(my_residual(&g, &d0))
}

pub(crate) fn my_residual<T: Real>(g: &[T], d0: &[T]) -> T {
    let diff: T = g.iter().zip(d0).map(|(&a, &b)| (a - b) * (a - b)).sum();
    (diff - dot(d0, d0) + dot(g, g)).max(T::zero())
}

/// V_α(x) = U_α(x) + dist(x, C)²/(2α).
#[derive(Debug, Clone)]
pub struct PenalizedPotential<T> {
    pub envelope: MoreauEnvelope<T>,
    pub body: ConvexBody<T>,
    pub alpha: T,
}

impl<T: Real> PenalizedPotential<T> {
    pub fn new(base: Arc<dyn Potential<T>>, body: ConvexBody<T>, alpha: T) -> Result<Self> {
        Ok(Self {
            envelope: MoreauEnvelope::new(base, alpha)?,
            body,
            alpha,
        })
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        let p = self.body.project(x)?;
        let d2: T = x.iter().zip(&p).map(|(&a, &b)| (a - b) * (a - b)).sum();
        Ok(self.envelope.value(x)? + d2 / (T::lit(2.0) * self.alpha))
    }

    /// (V_α(x), DV_α(x)).
    pub fn eval(&self, x: &[T]) -> Result<(T, Vec<T>)> {
        let (v, mut g) = self.envelope.eval(x)?;
        let p = self.body.project(x)?;
        let mut d2 = T::zero();
        for k in 0..x.len() {
            let d = x[k] - p[k];
            d2 += d * d;
            g[k] += d / self.alpha;
        }
        Ok((v + d2 / (T::lit(2.0) * self.alpha), g))
    }
}

/// The exponent W in the weight e^{−2W} of a weighted problem.
#[derive(Debug, Clone)]
pub enum Weighting<T> {
    /// W ≡ 0 (pure Gaussian weight).
    Gaussian,
    /// W = U.
    Potential(Arc<dyn Potential<T>>),
    /// W = U_α.
    Envelope(MoreauEnvelope<T>),
    /// W = V_α.
    Penalized(PenalizedPotential<T>),
}

impl<T: Real> Weighting<T> {
    pub fn exponent(&self, x: &[T]) -> Result<T> {
        match self {
            Weighting::Gaussian => Ok(T::zero()),
            Weighting::Potential(u) => Ok(u.value(x)),
            Weighting::Envelope(e) => e.value(x),
            Weighting::Penalized(p) => p.value(x),
        }
    }

    /// DU_α for smooth weightings (envelope and penalized), used by the
    /// ⟨D²U_α Du, Du⟩ term of the whole-space estimate.
    pub fn envelope_gradient(&self, x: &[T]) -> Option<Result<Vec<T>>> {
        match self {
            Weighting::Envelope(e) => Some(e.eval(x).map(|r| r.1)),
            Weighting::Penalized(p) => Some(p.envelope.eval(x).map(|r| r.1)),
            _ => None,
        }
    }

    /// Gradient of W (DV_α for penalized, DU_α for envelopes, D₀U otherwise).
    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        match self {
            Weighting::Gaussian => Ok(vec![T::zero(); x.len()]),
            Weighting::Potential(u) => u.min_norm_gradient(x),
            Weighting::Envelope(e) => Ok(e.eval(x)?.1),
            Weighting::Penalized(p) => Ok(p.eval(x)?.1),
        }
    }

    pub fn lower_bound(&self) -> T {
        match self {
            Weighting::Gaussian => T::zero(),
            Weighting::Potential(u) => u.lower_bound(),
            Weighting::Envelope(e) => e.base.lower_bound(),
            Weighting::Penalized(p) => p.envelope.base.lower_bound(),
        }
    }

    pub fn is_penalized(&self) -> bool {
        matches!(self, Weighting::Penalized(_))
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("alpha must be positive, got {alpha}")))
    }
}
