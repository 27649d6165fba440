//! Reflected and penalized Euler schemes, Feynman–Kac estimates and
//! long-run histograms.
//!
//! Every path draws from its own stream `rng::stream(seed, path)`, and all
//! reductions run in path order, so results do not depend on the number of
//! worker threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::potentials::Weighting;
use crate::{norm, rng, Real};

/// States with a larger norm abort the path.
pub const BLOW_UP_NORM: f64 = 1e6;
/// Largest tolerated fraction of failed paths.
pub const MAX_FAILED_FRACTION: f64 = 1e-3;
/// Explicit steps need dt·max|a_k| ≤ this.
pub const EXPLICIT_STABILITY: f64 = 0.5;

const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Euler step followed by projection onto C.
    Project,
    /// Euler step with the penalized drift −DV_α, no projection.
    Penalize,
    /// Euler step mirrored at ∂C (x ↦ 2Π_C(x) − x), projected if still outside.
    Reflect,
}

/// dX = (AX − DW(X))dt + dW(t), reflected on C or penalized.
#[derive(Debug, Clone)]
pub struct Dynamics<T> {
    drift: Vec<T>,
    body: Option<ConvexBody<T>>,
    weighting: Weighting<T>,
    scheme: Scheme,
    exponential: bool,
}

impl<T: Real> Dynamics<T> {
    /// Projection scheme with drift a_k x_k − DW; `body = None` is the free process.
    pub fn reflected(drift: &[T], body: Option<ConvexBody<T>>, weighting: Weighting<T>) -> Result<Self> {
        Self::constrained(drift, body, weighting, Scheme::Project)
    }

    /// Mirror scheme: same dynamics as [`Dynamics::reflected`], O(dt) weak
    /// error on flat boundaries instead of O(√dt).
    pub fn mirrored(drift: &[T], body: Option<ConvexBody<T>>, weighting: Weighting<T>) -> Result<Self> {
        Self::constrained(drift, body, weighting, Scheme::Reflect)
    }

    fn constrained(drift: &[T], body: Option<ConvexBody<T>>, weighting: Weighting<T>, scheme: Scheme) -> Result<Self> {
        if weighting.is_penalized() {
            return Err(Error::Config("the projection scheme takes U or U_alpha, not V_alpha".into()));
        }
        if let Some(b) = &body {
            b.check_dim(drift.len())?;
        }
        Self::build(drift, body, weighting, scheme)
    }

    /// Penalization scheme with drift a_k x_k − DV_α.
    pub fn penalized(drift: &[T], weighting: Weighting<T>) -> Result<Self> {
        let body = match &weighting {
            Weighting::Penalized(p) => p.body.clone(),
            _ => return Err(Error::Config("the penalization scheme needs a penalized potential".into())),
        };
        body.check_dim(drift.len())?;
        Self::build(drift, Some(body), weighting, Scheme::Penalize)
    }

    fn build(drift: &[T], body: Option<ConvexBody<T>>, weighting: Weighting<T>, scheme: Scheme) -> Result<Self> {
        if drift.is_empty() || drift.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidSpectrum("drift coefficients must be finite and nonempty".into()));
        }
        Ok(Self {
            drift: drift.to_vec(),
            body,
            weighting,
            scheme,
            exponential: false,
        })
    }

    /// Integrate the linear part exactly (e^{a_k dt}) instead of by Euler.
    pub fn with_exponential(mut self, on: bool) -> Self {
        self.exponential = on;
        self
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn body(&self) -> Option<&ConvexBody<T>> {
        self.body.as_ref()
    }

    pub fn drift(&self) -> &[T] {
        &self.drift
    }

    fn alpha(&self) -> Option<f64> {
        match &self.weighting {
            Weighting::Envelope(e) => Some(e.alpha.f64()),
            Weighting::Penalized(p) => Some(p.alpha.f64()),
            _ => None,
        }
    }

    fn flat(&self) -> bool {
        match &self.weighting {
            Weighting::Gaussian => true,
            Weighting::Potential(u) => u.is_zero(),
            _ => false,
        }
    }

    /// Rejects explicit steps with dt·max|a_k| above the stability limit.
    pub fn check_dt(&self, dt: T) -> Result<()> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        if self.exponential {
            return Ok(());
        }
        let amax = self.drift.iter().fold(T::zero(), |m, a| m.max(a.abs()));
        if dt * amax > T::lit(EXPLICIT_STABILITY) {
            return Err(Error::Config(format!(
                "dt * max|a| = {} exceeds {EXPLICIT_STABILITY}; reduce dt or use the exponential integrator",
                dt * amax
            )));
        }
        Ok(())
    }

    /// Step coefficients for a fixed dt. No stability check.
    pub fn stepper(&self, dt: T) -> Stepper<'_, T> {
        let n = self.dim();
        let mut decay = vec![T::zero(); n];
        let mut gain = vec![T::zero(); n];
        let mut noise = vec![T::zero(); n];
        for k in 0..n {
            let a = self.drift[k];
            if self.exponential && a != T::zero() {
                let e = (a * dt).exp();
                decay[k] = e;
                gain[k] = (e - T::one()) / a;
                noise[k] = (((T::lit(2.0) * a * dt).exp() - T::one()) / (T::lit(2.0) * a)).sqrt();
            } else {
                decay[k] = T::one() + a * dt;
                gain[k] = dt;
                noise[k] = dt.sqrt();
            }
        }
        Stepper {
            dynamics: self,
            dt,
            decay,
            gain,
            noise,
            flat: self.flat(),
        }
    }
}

/// One-step map of a [`Dynamics`] at fixed dt.
#[derive(Debug, Clone)]
pub struct Stepper<'a, T> {
    dynamics: &'a Dynamics<T>,
    dt: T,
    decay: Vec<T>,
    gain: Vec<T>,
    noise: Vec<T>,
    flat: bool,
}

impl<'a, T: Real> Stepper<'a, T> {
    /// x ← step(x) for the standard normal draw `xi`.
    pub fn step_with_noise(&self, x: &mut [T], xi: &[T]) -> Result<()> {
        let d = &self.dynamics;
        if self.flat {
            for k in 0..x.len() {
                x[k] = self.decay[k] * x[k] + self.noise[k] * xi[k];
            }
        } else {
            let g = d.weighting.gradient(x)?;
            for k in 0..x.len() {
                x[k] = self.decay[k] * x[k] - self.gain[k] * g[k] + self.noise[k] * xi[k];
            }
        }
        if let (Some(b), Scheme::Project | Scheme::Reflect) = (&d.body, d.scheme) {
            if !b.contains(x) {
                let p = b.project(x)?;
                if d.scheme == Scheme::Reflect {
                    for k in 0..x.len() {
                        x[k] = p[k] + p[k] - x[k];
                    }
                }
                if d.scheme == Scheme::Project || !b.contains(x) {
                    x.copy_from_slice(&p);
                }
            }
        }
        let n2 = x.iter().fold(T::zero(), |s, &v| s + v * v);
        if !(n2 <= T::lit(BLOW_UP_NORM * BLOW_UP_NORM)) {
            return Err(Error::BlowUp {
                norm: norm(x).f64(),
                dt: self.dt.f64(),
                alpha: d.alpha(),
            });
        }
        Ok(())
    }

    /// x ← step(x), drawing the noise from `rng` into `xi`.
    pub fn step<R: Rng + ?Sized>(&self, x: &mut [T], xi: &mut [T], rng: &mut R) -> Result<()> {
        rng::fill_normal(rng, xi);
        self.step_with_noise(x, xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeParams {
    pub dt: f64,
    /// Simulated time per path (after burn-in for histograms).
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FkEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// e^{−λT} max|f| / λ over the values seen along the paths.
    pub tail_bound: f64,
    pub paths: usize,
    pub paths_failed: usize,
    pub steps_per_path: usize,
}

/// Marginal histogram on [lo, hi) with overflow counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(hi > lo) || bins == 0 {
            return Err(Error::Config(format!("bad histogram range [{lo}, {hi}) with {bins} bins")));
        }
        Ok(Self {
            lo,
            hi,
            counts: vec![0; bins],
            below: 0,
            above: 0,
        })
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        if v < self.lo {
            self.below += 1;
        } else if v >= self.hi {
            self.above += 1;
        } else {
            let nb = self.counts.len();
            let b = ((v - self.lo) / (self.hi - self.lo) * nb as f64) as usize;
            self.counts[b.min(nb - 1)] += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.below += other.below;
        self.above += other.above;
    }

    pub fn total(&self) -> u64 {
        self.below + self.above + self.counts.iter().sum::<u64>()
    }

    pub fn edge(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * i as f64 / self.counts.len() as f64
    }

    /// (edge, empirical CDF) at every bin edge.
    pub fn cdf(&self) -> Vec<(f64, f64)> {
        let total = self.total().max(1) as f64;
        let mut acc = self.below;
        let mut out = Vec::with_capacity(self.counts.len() + 1);
        out.push((self.lo, acc as f64 / total));
        for (i, c) in self.counts.iter().enumerate() {
            acc += c;
            out.push((self.edge(i + 1), acc as f64 / total));
        }
        out
    }

    /// max over bin edges of |F_emp − F|.
    pub fn sup_distance(&self, reference: impl Fn(f64) -> f64) -> f64 {
        self.cdf().into_iter().map(|(x, p)| (p - reference(x)).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantSample {
    pub histograms: Vec<Histogram>,
    /// Recorded states per axis.
    pub samples: u64,
    pub paths: usize,
    pub paths_failed: usize,
}

/// Many independent paths of one dynamics.
#[derive(Debug, Clone)]
pub struct PathEnsemble<'a, T> {
    pub dynamics: &'a Dynamics<T>,
    pub params: SdeParams,
}

impl<'a, T: Real> PathEnsemble<'a, T> {
    pub fn new(dynamics: &'a Dynamics<T>, params: SdeParams) -> Result<Self> {
        dynamics.check_dt(T::lit(params.dt))?;
        if params.paths == 0 {
            return Err(Error::Config("at least one path is required".into()));
        }
        if !(params.horizon >= params.dt) || !params.horizon.is_finite() {
            return Err(Error::Config(format!("horizon {} shorter than dt", params.horizon)));
        }
        Ok(Self { dynamics, params })
    }

    fn steps(&self, time: f64) -> usize {
        (time / self.params.dt - 1e-9).ceil().max(0.0) as usize
    }

    fn check_start(&self, x0: &[T]) -> Result<()> {
        if x0.len() != self.dynamics.dim() {
            return Err(Error::Config(format!("start point has {} coordinates, expected {}", x0.len(), self.dynamics.dim())));
        }
        if self.dynamics.scheme != Scheme::Penalize {
            if let Some(b) = &self.dynamics.body {
                if !b.contains(x0) {
                    return Err(Error::Domain("start point lies outside C".into()));
                }
            }
        }
        Ok(())
    }

    fn check_failures(&self, failed: usize, first: Option<Error>) -> Result<()> {
        if failed as f64 > MAX_FAILED_FRACTION * self.params.paths as f64 {
            let cause = first.map(|e| e.to_string()).unwrap_or_default();
            return Err(Error::Reliability(format!(
                "{failed} of {} paths failed; first: {cause}",
                self.params.paths
            )));
        }
        Ok(())
    }

    /// End states of all paths after the horizon (None for failed paths).
    pub fn terminal_states(&self, x0: &[T]) -> Result<Vec<Option<Vec<T>>>> {
        self.check_start(x0)?;
        let steps = self.steps(self.params.horizon);
        let stepper = self.dynamics.stepper(T::lit(self.params.dt));
        let out: Vec<Option<Vec<T>>> = (0..self.params.paths)
            .into_par_iter()
            .map(|p| {
                let mut r = rng::stream(self.params.seed, p as u64);
                let mut x = x0.to_vec();
                let mut xi = vec![T::zero(); x.len()];
                for _ in 0..steps {
                    stepper.step(&mut x, &mut xi, &mut r).ok()?;
                }
                Some(x)
            })
            .collect();
        Ok(out)
    }

    /// Monte Carlo estimate of ∫₀^T e^{−λt} E f(X_t) dt from x0.
    ///
    /// Left-point rule with exact weights e^{−λt_j}(1 − e^{−λdt})/λ, so
    /// constant f is integrated exactly.
    pub fn feynman_kac<F>(&self, x0: &[T], f: F, lambda: f64) -> Result<FkEstimate>
    where
        F: Fn(&[T]) -> T + Sync,
    {
        if !(lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
        }
        if self.params.horizon < 8.0 / lambda {
            return Err(Error::Config(format!(
                "horizon {} below 8/lambda = {}",
                self.params.horizon,
                8.0 / lambda
            )));
        }
        self.check_start(x0)?;
        let dt = self.params.dt;
        let steps = self.steps(self.params.horizon);
        let w0 = (1.0 - (-lambda * dt).exp()) / lambda;
        let shrink = (-lambda * dt).exp();
        let stepper = self.dynamics.stepper(T::lit(dt));
        let results: Vec<std::result::Result<(f64, f64), Error>> = (0..self.params.paths)
            .into_par_iter()
            .map(|p| {
                let mut r = rng::stream(self.params.seed, p as u64);
                let mut x = x0.to_vec();
                let mut xi = vec![T::zero(); x.len()];
                let mut w = w0;
                let mut acc = 0.0;
                let mut fmax = 0.0f64;
                for _ in 0..steps {
                    let fv = f(&x).f64();
                    acc += w * fv;
                    fmax = fmax.max(fv.abs());
                    w *= shrink;
                    stepper.step(&mut x, &mut xi, &mut r)?;
                }
                fmax = fmax.max(f(&x).f64().abs());
                Ok((acc, fmax))
            })
            .collect();
        let mut vals = Vec::with_capacity(results.len());
        let mut sups = Vec::with_capacity(results.len());
        let mut failed = 0;
        let mut first = None;
        for r in results {
            match r {
                Ok((v, s)) => {
                    vals.push(v);
                    sups.push(s);
                }
                Err(e) => {
                    failed += 1;
                    first.get_or_insert(e);
                }
            }
        }
        self.check_failures(failed, first)?;
        let (mean, stderr) = mean_stderr(&vals);
        let fsup = sups.iter().fold(0.0f64, |a, &b| a.max(b));
        Ok(FkEstimate {
            estimate: mean,
            stderr,
            tail_bound: (-lambda * dt * steps as f64).exp() * fsup / lambda,
            paths: vals.len(),
            paths_failed: failed,
            steps_per_path: steps,
        })
    }

    /// Histograms of every coordinate of X_t, t ∈ (burn_in, burn_in + horizon],
    /// recorded at every step. `ranges[k] = (lo, hi, bins)`.
    pub fn sample_invariant(&self, x0: &[T], burn_in: f64, ranges: &[(f64, f64, usize)]) -> Result<InvariantSample> {
        self.check_start(x0)?;
        let n = self.dynamics.dim();
        if ranges.len() != n {
            return Err(Error::Config(format!("{} histogram ranges for {n} axes", ranges.len())));
        }
        let amin = self.dynamics.drift.iter().fold(f64::INFINITY, |m, a| m.min(a.f64().abs()));
        if amin > 0.0 && burn_in < 5.0 / amin {
            return Err(Error::Config(format!("burn-in {burn_in} below 5/|a_min| = {}", 5.0 / amin)));
        }
        let empty: Vec<Histogram> = ranges.iter().map(|&(lo, hi, b)| Histogram::new(lo, hi, b)).collect::<Result<_>>()?;
        let burn = self.steps(burn_in);
        let record = self.steps(self.params.horizon);
        let stepper = self.dynamics.stepper(T::lit(self.params.dt));
        let chunks = self.params.paths.div_ceil(CHUNK);
        let parts: Vec<(Vec<Histogram>, usize, Option<Error>)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut hist = empty.clone();
                let mut failed = 0;
                let mut first = None;
                let mut local = empty.clone();
                for p in c * CHUNK..((c + 1) * CHUNK).min(self.params.paths) {
                    let mut r = rng::stream(self.params.seed, p as u64);
                    let mut x = x0.to_vec();
                    let mut xi = vec![T::zero(); n];
                    for h in local.iter_mut() {
                        h.counts.iter_mut().for_each(|v| *v = 0);
                        h.below = 0;
                        h.above = 0;
                    }
                    let run = (|| -> Result<()> {
                        for _ in 0..burn {
                            stepper.step(&mut x, &mut xi, &mut r)?;
                        }
                        for _ in 0..record {
                            stepper.step(&mut x, &mut xi, &mut r)?;
                            for (h, v) in local.iter_mut().zip(&x) {
                                h.add(v.f64());
                            }
                        }
                        Ok(())
                    })();
                    match run {
                        Ok(()) => {
                            for (a, b) in hist.iter_mut().zip(&local) {
                                a.merge(b);
                            }
                        }
                        Err(e) => {
                            failed += 1;
                            first.get_or_insert(e);
                        }
                    }
                }
                (hist, failed, first)
            })
            .collect();
        let mut hist = empty;
        let mut failed = 0;
        let mut first = None;
        for (h, f, e) in parts {
            for (a, b) in hist.iter_mut().zip(&h) {
                a.merge(b);
            }
            failed += f;
            if first.is_none() {
                first = e;
            }
        }
        self.check_failures(failed, first)?;
        let samples = hist.first().map_or(0, Histogram::total);
        Ok(InvariantSample {
            histograms: hist,
            samples,
            paths: self.params.paths - failed,
            paths_failed: failed,
        })
    }
}

/// Sum by recursive halving; the order is fixed by the slice.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and its standard error.
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(v) / n as f64;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ou() -> Dynamics<f64> {
        Dynamics::reflected(&[-1.0], None, Weighting::Gaussian).unwrap()
    }

    #[test]
    fn projection_clamps_outward_drift() {
        let body = ConvexBody::halfspace(vec![1.0], 0.0).unwrap();
        let d = Dynamics::reflected(&[1.0], Some(body), Weighting::Gaussian).unwrap();
        let s = d.stepper(0.01);
        let mut x = [0.0];
        s.step_with_noise(&mut x, &[0.0]).unwrap();
        assert_eq!(x[0], 0.0);
        let mut y = [-0.5f64];
        s.step_with_noise(&mut y, &[0.0]).unwrap();
        assert!((y[0] + 0.505).abs() < 1e-15);
    }

    #[test]
    fn mirror_reflects_overshoot() {
        let body = ConvexBody::halfspace(vec![1.0], 0.0).unwrap();
        let d = Dynamics::mirrored(&[-1.0], Some(body.clone()), Weighting::Gaussian).unwrap();
        let s = d.stepper(0.01);
        let mut x = [-0.05f64];
        // -0.0495 + 0.1 = 0.0505 → -0.0505
        s.step_with_noise(&mut x, &[1.0]).unwrap();
        assert!((x[0] + 0.0505).abs() < 1e-15);
        // ellipse: a mirrored point that is still outside falls back to the projection
        let e = ConvexBody::ellipsoid(vec![1.0, 1.0], 1.0).unwrap();
        let d = Dynamics::mirrored(&[-1.0, -1.0], Some(e.clone()), Weighting::Gaussian).unwrap();
        let mut y = [0.9f64, 0.0];
        d.stepper(0.01).step_with_noise(&mut y, &[30.0, 0.0]).unwrap();
        assert!(e.contains(&y));
        assert!((y[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn one_step_mean_matches_ou() {
        let d = ou();
        let x0 = 1.3;
        let dt: f64 = 1e-3;
        let mut x = [x0];
        d.stepper(dt).step_with_noise(&mut x, &[0.0]).unwrap();
        assert!((x[0] - x0 * (-dt).exp()).abs() < dt * dt);
        let e = ou().with_exponential(true);
        let mut y = [x0];
        e.stepper(dt).step_with_noise(&mut y, &[0.0]).unwrap();
        assert!((y[0] - x0 * (-dt).exp()).abs() < 1e-15);
    }

    #[test]
    fn constant_functional_is_exact() {
        let d = ou();
        let ens = PathEnsemble::new(&d, SdeParams { dt: 1e-2, horizon: 10.0, paths: 32, seed: 3 }).unwrap();
        let r = ens.feynman_kac(&[0.2], |_| 1.0, 1.0).unwrap();
        assert!((r.estimate - (1.0 - (-10.0f64).exp())).abs() < 1e-9);
        assert!(r.stderr < 1e-9);
    }

    #[test]
    fn guards() {
        let d = Dynamics::reflected(&[-100.0], None, Weighting::<f64>::Gaussian).unwrap();
        assert!(PathEnsemble::new(&d, SdeParams { dt: 0.01, horizon: 1.0, paths: 1, seed: 0 }).is_err());
        let e = d.clone().with_exponential(true);
        assert!(PathEnsemble::new(&e, SdeParams { dt: 0.01, horizon: 1.0, paths: 1, seed: 0 }).is_ok());
        let ens = PathEnsemble::new(&e, SdeParams { dt: 0.01, horizon: 1.0, paths: 1, seed: 0 }).unwrap();
        assert!(matches!(ens.feynman_kac(&[0.0], |_| 1.0, 1.0), Err(Error::Config(_))));
        let body = ConvexBody::halfspace(vec![1.0], 0.0).unwrap();
        let r = Dynamics::reflected(&[-1.0], Some(body), Weighting::Gaussian).unwrap();
        let ens = PathEnsemble::new(&r, SdeParams { dt: 0.01, horizon: 10.0, paths: 1, seed: 0 }).unwrap();
        assert!(matches!(ens.feynman_kac(&[1.0], |_| 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn unstable_explicit_steps_blow_up() {
        let d = Dynamics::reflected(&[-16.0 * std::f64::consts::PI.powi(4)], None, Weighting::Gaussian).unwrap();
        let dt = 3.0 / (16.0 * std::f64::consts::PI.powi(4));
        let s = d.stepper(dt);
        let mut x = [1.0];
        let mut hit = false;
        for _ in 0..100 {
            if let Err(Error::BlowUp { .. }) = s.step_with_noise(&mut x, &[0.0]) {
                hit = true;
                break;
            }
        }
        assert!(hit);
        let e = d.with_exponential(true);
        let s = e.stepper(dt);
        let mut y = [1.0];
        for _ in 0..100 {
            s.step_with_noise(&mut y, &[0.5]).unwrap();
        }
        assert!(y[0].abs() < 1.0);
    }

    #[test]
    fn histogram_cdf() {
        let mut h = Histogram::new(0.0, 1.0, 4).unwrap();
        for v in [-1.0, 0.1, 0.3, 0.6, 2.0] {
            h.add(v);
        }
        let c = h.cdf();
        assert_eq!(c[0], (0.0, 0.2));
        assert_eq!(c[4], (1.0, 0.8));
        assert_eq!(h.total(), 5);
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }
}
