//! Convex bodies C = {G ≤ 0}: level-set function, projection, distance and
//! the coarea surface band.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::MeasureSpace;
use crate::potentials::Weighting;
use crate::real::{dist, dot};
use crate::{rng, Real};

const PROJ_TOL: f64 = 1e-12;
const PROJ_MAX_ITER: usize = 200;

type MapFn<T> = dyn Fn(&[T]) -> T + Send + Sync;
type MapGrad<T> = dyn Fn(&[T]) -> Vec<T> + Send + Sync;

/// Map F of the remaining coordinates bounding the distinguished axis from above.
#[derive(Clone)]
pub enum ConcaveMap<T> {
    /// F(z) = ⟨b, z⟩ + c
    Affine { coeffs: Vec<T>, offset: T },
    /// F(z) = c + ⟨b, z⟩ − Σ a_i z_i², a_i ≥ 0
    NegQuadratic { curvature: Vec<T>, linear: Vec<T>, offset: T },
    /// Any map with gradient; concavity is the caller's claim.
    Custom { value: Arc<MapFn<T>>, gradient: Arc<MapGrad<T>> },
}

impl<T: fmt::Debug> fmt::Debug for ConcaveMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcaveMap::Affine { coeffs, offset } => f
                .debug_struct("Affine")
                .field("coeffs", coeffs)
                .field("offset", offset)
                .finish(),
            ConcaveMap::NegQuadratic { curvature, linear, offset } => f
                .debug_struct("NegQuadratic")
                .field("curvature", curvature)
                .field("linear", linear)
                .field("offset", offset)
                .finish(),
            ConcaveMap::Custom { .. } => f.write_str("Custom"),
        }
    }
}

impl<T: Real> ConcaveMap<T> {
    pub fn value(&self, z: &[T]) -> T {
        match self {
            ConcaveMap::Affine { coeffs, offset } => dot(coeffs, z) + *offset,
            ConcaveMap::NegQuadratic { curvature, linear, offset } => {
                let mut v = *offset;
                for i in 0..z.len() {
                    v += linear[i] * z[i] - curvature[i] * z[i] * z[i];
                }
                v
            }
            ConcaveMap::Custom { value, .. } => value(z),
        }
    }

    pub fn gradient(&self, z: &[T]) -> Vec<T> {
        match self {
            ConcaveMap::Affine { coeffs, .. } => coeffs.clone(),
            ConcaveMap::NegQuadratic { curvature, linear, .. } => (0..z.len())
                .map(|i| linear[i] - T::lit(2.0) * curvature[i] * z[i])
                .collect(),
            ConcaveMap::Custom { gradient, .. } => gradient(z),
        }
    }

    /// argmin_z ½‖z − z0‖² − t F(z) for t ≥ 0.
    fn prox_neg(&self, z0: &[T], t: T) -> Result<Vec<T>> {
        match self {
            ConcaveMap::Affine { coeffs, .. } => Ok(z0.iter().zip(coeffs).map(|(&z, &b)| z + t * b).collect()),
            ConcaveMap::NegQuadratic { curvature, linear, .. } => Ok((0..z0.len())
                .map(|i| (z0[i] + t * linear[i]) / (T::one() + T::lit(2.0) * t * curvature[i]))
                .collect()),
            ConcaveMap::Custom { .. } => {
                // gradient descent on a 1-strongly convex objective
                let mut z = z0.to_vec();
                let mut step = T::one();
                let obj = |z: &[T]| {
                    let d: T = z.iter().zip(z0).map(|(&a, &b)| (a - b) * (a - b)).sum();
                    T::lit(0.5) * d - t * self.value(z)
                };
                let mut f = obj(&z);
                for it in 0..10_000 {
                    let gf = self.gradient(&z);
                    let g: Vec<T> = (0..z.len()).map(|i| z[i] - z0[i] - t * gf[i]).collect();
                    let gn = dot(&g, &g).sqrt();
                    if gn <= T::lit(PROJ_TOL) * (T::one() + dot(z0, z0).sqrt()) {
                        return Ok(z);
                    }
                    step = step * T::lit(2.0);
                    loop {
                        let cand: Vec<T> = z.iter().zip(&g).map(|(&a, &b)| a - step * b).collect();
                        let fc = obj(&cand);
                        if fc <= f - T::lit(0.5) * step * gn * gn {
                            z = cand;
                            f = fc;
                            break;
                        }
                        step = step * T::lit(0.5);
                        if step < T::epsilon() {
                            return if gn <= T::lit(1e-9) {
                                Ok(z)
                            } else {
                                Err(Error::NumericalFailure {
                                    what: "hypograph inner prox".into(),
                                    iterations: it,
                                    residual: gn.f64(),
                                })
                            };
                        }
                    }
                }
                Err(Error::NumericalFailure {
                    what: "hypograph inner prox".into(),
                    iterations: 10_000,
                    residual: f64::NAN,
                })
            }
        }
    }
}

/// A closed convex set C = G⁻¹((−∞, 0]).
#[derive(Debug, Clone)]
pub enum ConvexBody<T> {
    /// ⟨y, x⟩ ≤ c
    Halfspace { direction: Vec<T>, offset: T },
    /// Σ α_k x_k² ≤ r²
    Ellipsoid { alphas: Vec<T>, radius: T },
    /// x_axis ≤ F(remaining coordinates)
    Hypograph { axis: usize, map: ConcaveMap<T> },
}

impl<T: Real> ConvexBody<T> {
    pub fn halfspace(direction: Vec<T>, offset: T) -> Result<Self> {
        if direction.iter().all(|&v| v == T::zero()) || direction.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("halfspace direction must be a nonzero finite vector".into()));
        }
        Ok(ConvexBody::Halfspace { direction, offset })
    }

    pub fn ellipsoid(alphas: Vec<T>, radius: T) -> Result<Self> {
        if alphas.iter().any(|&a| !(a > T::zero()) || !a.is_finite()) {
            return Err(Error::Config("ellipsoid coefficients must be positive and finite".into()));
        }
        if !(radius > T::zero()) {
            return Err(Error::Config("ellipsoid radius must be positive".into()));
        }
        Ok(ConvexBody::Ellipsoid { alphas, radius })
    }

    pub fn hypograph(axis: usize, map: ConcaveMap<T>) -> Result<Self> {
        if let ConcaveMap::NegQuadratic { curvature, .. } = &map {
            if curvature.iter().any(|&a| a < T::zero()) {
                return Err(Error::Config("neg-quadratic curvature must be nonnegative".into()));
            }
        }
        Ok(ConvexBody::Hypograph { axis, map })
    }

    /// Dimension the body is defined for, if fixed by its parameters.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ConvexBody::Halfspace { direction, .. } => Some(direction.len()),
            ConvexBody::Ellipsoid { alphas, .. } => Some(alphas.len()),
            ConvexBody::Hypograph { map, .. } => match map {
                ConcaveMap::Affine { coeffs, .. } => Some(coeffs.len() + 1),
                ConcaveMap::NegQuadratic { curvature, .. } => Some(curvature.len() + 1),
                ConcaveMap::Custom { .. } => None,
            },
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if let ConvexBody::Hypograph { axis, .. } = self {
            if *axis >= n {
                return Err(Error::Config(format!("hypograph axis {axis} out of range for n = {n}")));
            }
        }
        match self.dim() {
            Some(d) if d != n => Err(Error::Config(format!("convex set has dimension {d}, space has {n}"))),
            _ => Ok(()),
        }
    }

    /// Σα_k²λ_k, finite at any truncation.
    pub fn ellipsoid_trace_condition(&self, lambdas: &[T]) -> Option<T> {
        match self {
            ConvexBody::Ellipsoid { alphas, .. } => Some(alphas.iter().zip(lambdas).map(|(&a, &l)| a * a * l).sum()),
            _ => None,
        }
    }

    pub fn g(&self, x: &[T]) -> T {
        match self {
            ConvexBody::Halfspace { direction, offset } => dot(direction, x) - *offset,
            ConvexBody::Ellipsoid { alphas, radius } => {
                alphas.iter().zip(x).fold(T::zero(), |s, (&a, &v)| s + a * v * v) - *radius * *radius
            }
            ConvexBody::Hypograph { axis, map } => {
                let z = split(x, *axis);
                x[*axis] - map.value(&z)
            }
        }
    }

    pub fn dg(&self, x: &[T]) -> Vec<T> {
        match self {
            ConvexBody::Halfspace { direction, .. } => direction.clone(),
            ConvexBody::Ellipsoid { alphas, .. } => alphas.iter().zip(x).map(|(&a, &v)| T::lit(2.0) * a * v).collect(),
            ConvexBody::Hypograph { axis, map } => {
                let z = split(x, *axis);
                let gf = map.gradient(&z);
                let mut out = Vec::with_capacity(x.len());
                let mut it = gf.into_iter();
                for k in 0..x.len() {
                    if k == *axis {
                        out.push(T::one());
                    } else {
                        out.push(-it.next().unwrap_or(T::zero()));
                    }
                }
                out
            }
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.g(x) <= T::zero()
    }

    /// Euclidean projection Π_C(x).
    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        if self.g(x) <= T::zero() {
            return Ok(x.to_vec());
        }
        match self {
            ConvexBody::Halfspace { direction, offset } => {
                let t = (dot(direction, x) - *offset) / dot(direction, direction);
                Ok(x.iter().zip(direction).map(|(&a, &d)| a - t * d).collect())
            }
            ConvexBody::Ellipsoid { alphas, radius } => project_ellipsoid(alphas, *radius, x),
            ConvexBody::Hypograph { axis, map } => project_hypograph(*axis, map, x),
        }
    }

    pub fn distance(&self, x: &[T]) -> Result<T> {
        Ok(dist(x, &self.project(x)?))
    }

    /// Signed normalized level G/‖DG‖.
    pub fn normalized_level(&self, x: &[T]) -> T {
        let g = self.g(x);
        let d = self.dg(x);
        let n = dot(&d, &d).sqrt();
        if n > T::zero() {
            g / n
        } else if g > T::zero() {
            T::infinity()
        } else {
            T::neg_infinity()
        }
    }
}

fn split<T: Real>(x: &[T], axis: usize) -> Vec<T> {
    x.iter().enumerate().filter(|(k, _)| *k != axis).map(|(_, &v)| v).collect()
}

/// Root of Σα_k x_k²/(1 + 2μα_k)² = r² in μ > 0, bisection with Newton steps.
fn project_ellipsoid<T: Real>(alphas: &[T], radius: T, x: &[T]) -> Result<Vec<T>> {
    let two = T::lit(2.0);
    let r2 = radius * radius;
    let phi = |mu: T| -> (T, T) {
        let mut v = -r2;
        let mut d = T::zero();
        for (&a, &xk) in alphas.iter().zip(x) {
            let den = T::one() + two * mu * a;
            v += a * xk * xk / (den * den);
            d += -T::lit(4.0) * a * a * xk * xk / (den * den * den);
        }
        (v, d)
    };
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut it = 0;
    while phi(hi).0 > T::zero() {
        lo = hi;
        hi = hi * two;
        it += 1;
        if it > 2000 || !hi.is_finite() {
            return Err(Error::NumericalFailure {
                what: "ellipsoid projection bracket".into(),
                iterations: it,
                residual: phi(hi).0.f64(),
            });
        }
    }
    let tol = T::lit(PROJ_TOL).max(T::epsilon() * T::lit(8.0));
    let mut mu = (lo + hi) / two;
    for i in 0..PROJ_MAX_ITER {
        let (v, d) = phi(mu);
        if v > T::zero() {
            lo = mu;
        } else {
            hi = mu;
        }
        let mut next = if d < T::zero() { mu - v / d } else { (lo + hi) / two };
        if !(next > lo && next < hi) {
            next = (lo + hi) / two;
        }
        if (next - mu).abs() <= tol * (T::one() + mu.abs()) || (hi - lo) <= tol * (T::one() + mu.abs()) {
            mu = next;
            return Ok(alphas.iter().zip(x).map(|(&a, &xk)| xk / (T::one() + two * mu * a)).collect());
        }
        mu = next;
        if i + 1 == PROJ_MAX_ITER {
            break;
        }
    }
    Err(Error::NumericalFailure {
        what: "ellipsoid projection".into(),
        iterations: PROJ_MAX_ITER,
        residual: phi(mu).0.f64(),
    })
}

/// Projection on {x_axis ≤ F(z)}: for a multiplier t ≥ 0 the point
/// (z(t), x_axis − t) with z(t) = argmin ½‖z − z0‖² − tF(z) is the prox of tG;
/// t is the root of G = 0 found by bisection with secant steps.
fn project_hypograph<T: Real>(axis: usize, map: &ConcaveMap<T>, x: &[T]) -> Result<Vec<T>> {
    let z0 = split(x, axis);
    let s0 = x[axis];
    let gap = |t: T| -> Result<(T, Vec<T>)> {
        let z = map.prox_neg(&z0, t)?;
        Ok((s0 - t - map.value(&z), z))
    };
    let mut lo = T::zero();
    let mut glo = gap(lo)?.0;
    let mut hi = glo.max(T::lit(1e-12));
    let mut ghi = gap(hi)?.0;
    let mut it = 0;
    while ghi > T::zero() {
        lo = hi;
        glo = ghi;
        hi = hi * T::lit(2.0);
        ghi = gap(hi)?.0;
        it += 1;
        if it > PROJ_MAX_ITER {
            return Err(Error::NumericalFailure {
                what: "hypograph projection bracket".into(),
                iterations: it,
                residual: ghi.f64(),
            });
        }
    }
    let tol = T::lit(PROJ_TOL).max(T::epsilon() * T::lit(8.0));
    for i in 0..PROJ_MAX_ITER {
        let mut t = lo - glo * (hi - lo) / (ghi - glo);
        if !(t > lo && t < hi) || i % 3 == 2 {
            t = (lo + hi) * T::lit(0.5);
        }
        let (gt, z) = gap(t)?;
        if gt.abs() <= tol * (T::one() + s0.abs()) || (hi - lo) <= tol * (T::one() + t) {
            let mut out = Vec::with_capacity(x.len());
            let mut zi = z.into_iter();
            for k in 0..x.len() {
                out.push(if k == axis { s0 - t } else { zi.next().unwrap_or(T::zero()) });
            }
            return Ok(out);
        }
        if gt > T::zero() {
            lo = t;
            glo = gt;
        } else {
            hi = t;
            ghi = gt;
        }
    }
    Err(Error::NumericalFailure {
        what: "hypograph projection".into(),
        iterations: PROJ_MAX_ITER,
        residual: (hi - lo).f64(),
    })
}

/// Nodes near G = 0 with coarea weights.
#[derive(Debug, Clone)]
pub struct SurfaceBand<T> {
    /// Node indices into the space's grid.
    pub nodes: Vec<usize>,
    /// Normalized signed levels G/‖DG‖ at the band nodes.
    pub levels: Vec<T>,
    /// μ-weight · e^{−2U} · K(level).
    pub weights: Vec<T>,
    pub delta: T,
}

impl<T: Real> SurfaceBand<T> {
    /// Σ w_i f(x_i) for a full grid function f.
    pub fn integrate(&self, f: &[T]) -> T {
        self.nodes.iter().zip(&self.weights).fold(T::zero(), |s, (&i, &w)| s + w * f[i])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Hat kernel of half-width δ with unit mass.
#[inline]
pub fn hat_kernel<T: Real>(s: T, delta: T) -> T {
    ((T::one() - s.abs() / delta) / delta).max(T::zero())
}

/// Coarea band of half-width δ (in normalized distance) around G = 0, with
/// weights μ_i e^{−2U(x_i)} K(G/‖DG‖).
pub fn surface_band<T: Real>(
    body: &ConvexBody<T>,
    space: &MeasureSpace<T>,
    weighting: &Weighting<T>,
    delta: T,
) -> Result<SurfaceBand<T>> {
    if !(delta > T::zero()) {
        return Err(Error::Config("band half-width must be positive".into()));
    }
    let grid = space.grid();
    let mut nodes = Vec::new();
    let mut levels = Vec::new();
    let mut weights = Vec::new();
    for i in 0..grid.len() {
        let x = grid.node(i);
        let s = body.normalized_level(x);
        if s.abs() > delta {
            continue;
        }
        let u = weighting.exponent(x)?;
        let w = grid.mu_weights()[i] * (-T::lit(2.0) * u).exp() * hat_kernel(s, delta);
        if w > T::zero() {
            nodes.push(i);
            levels.push(s);
            weights.push(w);
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptySurface("no grid node within the band".into()));
    }
    Ok(SurfaceBand {
        nodes,
        levels,
        weights,
        delta,
    })
}

#[derive(Debug, Clone, Default)]
pub struct ConvexityReport {
    pub pairs: usize,
    pub violations: usize,
    pub max_violation: f64,
}

/// Tests G(tx + (1−t)y) ≤ 0 on random pairs of points of C drawn from μ
/// restricted to C.
pub fn check_convexity<T: Real>(
    body: &ConvexBody<T>,
    space: &MeasureSpace<T>,
    samples: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    if samples < 100 {
        return Err(Error::Config("at least 100 samples are required".into()));
    }
    let mut r = rng::stream(seed, 1);
    let n = space.dim();
    let mut pts: Vec<Vec<T>> = Vec::with_capacity(2 * samples);
    let mut tries = 0usize;
    while pts.len() < 2 * samples {
        tries += 1;
        if tries > 1000 * samples {
            return Err(Error::Domain("could not sample points of C".into()));
        }
        let x: Vec<T> = (0..n)
            .map(|k| space.sigmas()[k] * T::lit(2.0) * rng::normal::<T, _>(&mut r))
            .collect();
        if body.contains(&x) {
            pts.push(x);
        }
    }
    let mut rep = ConvexityReport {
        pairs: samples,
        ..Default::default()
    };
    for p in 0..samples {
        let (x, y) = (&pts[2 * p], &pts[2 * p + 1]);
        let t = T::lit(r.gen::<f64>());
        let z: Vec<T> = x.iter().zip(y).map(|(&a, &b)| t * a + (T::one() - t) * b).collect();
        let g = body.g(&z);
        let scale = T::one() + body.g(x).abs() + body.g(y).abs();
        if g > T::lit(1e-12) * scale {
            rep.violations += 1;
            rep.max_violation = rep.max_violation.max(g.f64());
        }
    }
    Ok(rep)
}
