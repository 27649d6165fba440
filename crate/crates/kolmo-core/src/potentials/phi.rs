//! Scalar convex profiles Φ: ℝ → ℝ and their proximal maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiKind {
    Zero,
    /// t²/2
    Quadratic,
    /// t⁴
    Quartic,
    /// t²/2 on |t| ≤ 1, |t| − 1/2 outside.
    Huber,
    Abs,
    /// max(t, 0)²
    Relu2,
}

impl PhiKind {
    pub const ALL: [PhiKind; 6] = [
        PhiKind::Zero,
        PhiKind::Quadratic,
        PhiKind::Quartic,
        PhiKind::Huber,
        PhiKind::Abs,
        PhiKind::Relu2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhiKind::Zero => "zero",
            PhiKind::Quadratic => "quadratic",
            PhiKind::Quartic => "quartic",
            PhiKind::Huber => "huber",
            PhiKind::Abs => "abs",
            PhiKind::Relu2 => "relu2",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnsupportedPotential(format!("unknown profile `{name}`")))
    }

    /// Growth exponent p with |Φ'(t)| ≤ C(1 + |t|^{p−1}).
    pub fn growth(self) -> u32 {
        match self {
            PhiKind::Zero | PhiKind::Huber | PhiKind::Abs => 1,
            PhiKind::Quadratic | PhiKind::Relu2 => 2,
            PhiKind::Quartic => 4,
        }
    }

    pub fn is_smooth(self) -> bool {
        !matches!(self, PhiKind::Abs)
    }
}

/// Φ = scale · base(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi<T> {
    kind: PhiKind,
    scale: T,
}

impl<T: Real> Phi<T> {
    pub fn new(kind: PhiKind, scale: T) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::Config(format!("profile scale must be positive, got {scale}")));
        }
        Ok(Self { kind, scale })
    }

    pub fn unit(kind: PhiKind) -> Self {
        Self { kind, scale: T::one() }
    }

    pub fn kind(&self) -> PhiKind {
        self.kind
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    #[inline]
    pub fn value(&self, t: T) -> T {
        let half = T::lit(0.5);
        let b = match self.kind {
            PhiKind::Zero => T::zero(),
            PhiKind::Quadratic => half * t * t,
            PhiKind::Quartic => t * t * t * t,
            PhiKind::Huber => {
                if t.abs() <= T::one() {
                    half * t * t
                } else {
                    t.abs() - half
                }
            }
            PhiKind::Abs => t.abs(),
            PhiKind::Relu2 => {
                let p = t.max(T::zero());
                p * p
            }
        };
        self.scale * b
    }

    /// Minimal-norm element of ∂Φ(t).
    #[inline]
    pub fn derivative(&self, t: T) -> T {
        let b = match self.kind {
            PhiKind::Zero => T::zero(),
            PhiKind::Quadratic => t,
            PhiKind::Quartic => T::lit(4.0) * t * t * t,
            PhiKind::Huber => t.max(-T::one()).min(T::one()),
            PhiKind::Abs => {
                if t > T::zero() {
                    T::one()
                } else if t < T::zero() {
                    -T::one()
                } else {
                    T::zero()
                }
            }
            PhiKind::Relu2 => T::lit(2.0) * t.max(T::zero()),
        };
        self.scale * b
    }

    /// argmin_s Φ(s) + (s − r)²/(2α).
    pub fn prox(&self, r: T, alpha: T) -> T {
        let a = alpha * self.scale;
        match self.kind {
            PhiKind::Zero => r,
            PhiKind::Quadratic => r / (T::one() + a),
            PhiKind::Quartic => quartic_prox(r, a),
            PhiKind::Huber => {
                if r.abs() <= T::one() + a {
                    r / (T::one() + a)
                } else {
                    r - a * r.signum()
                }
            }
            PhiKind::Abs => r.signum() * (r.abs() - a).max(T::zero()),
            PhiKind::Relu2 => {
                if r > T::zero() {
                    r / (T::one() + T::lit(2.0) * a)
                } else {
                    r
                }
            }
        }
    }

    /// (Φ_α(t), Φ_α'(t)).
    #[inline]
    pub fn envelope(&self, t: T, alpha: T) -> (T, T) {
        let p = self.prox(t, alpha);
        let d = t - p;
        (self.value(p) + d * d / (T::lit(2.0) * alpha), d / alpha)
    }
}

/// Root of s + 4a s³ = r, Newton safeguarded by bisection.
fn quartic_prox<T: Real>(r: T, a: T) -> T {
    if r == T::zero() {
        return T::zero();
    }
    let four_a = T::lit(4.0) * a;
    let (mut lo, mut hi) = if r > T::zero() { (T::zero(), r) } else { (r, T::zero()) };
    let cbrt = (r / four_a).abs().cbrt() * r.signum();
    let mut s = if cbrt.abs() < r.abs() { cbrt } else { r };
    let tol = T::epsilon() * T::lit(4.0);
    for _ in 0..200 {
        let g = s + four_a * s * s * s - r;
        if g == T::zero() {
            return s;
        }
        if g > T::zero() {
            hi = s;
        } else {
            lo = s;
        }
        let dg = T::one() + T::lit(3.0) * four_a * s * s;
        let mut next = s - g / dg;
        if !(next > lo && next < hi) {
            next = (lo + hi) * T::lit(0.5);
        }
        if (next - s).abs() <= tol * (T::one() + s.abs()) {
            return next;
        }
        s = next;
    }
    s
}
