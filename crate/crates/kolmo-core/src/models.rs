//! Reaction–diffusion on L²(0,1) and Cahn–Hilliard on the dual space,
//! truncated to a few modes.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{MeasureSpace, SpaceOptions};
use crate::potentials::{ChPotential, MoreauEnvelope, Phi, Potential, RdPotential};
use crate::{dist, rng, Real};

pub const RD_MAX_MODES: usize = 6;
pub const CH_MAX_MODES: usize = 4;
pub const DEFAULT_XI_GRID: usize = 512;

/// λ_k = 1/(2k²π²), k = 1..=modes.
pub fn rd_eigenvalues<T: Real>(modes: usize) -> Vec<T> {
    (1..=modes).map(|k| T::lit(1.0 / (2.0 * (k as f64 * PI).powi(2)))).collect()
}

/// λ_k = 1/(2k⁴π⁴), k = 1..=modes.
pub fn ch_eigenvalues<T: Real>(modes: usize) -> Vec<T> {
    (1..=modes).map(|k| T::lit(1.0 / (2.0 * (k as f64 * PI).powi(4)))).collect()
}

#[derive(Debug, Clone)]
pub struct RdModel<T> {
    pub space: MeasureSpace<T>,
    pub potential: Arc<RdPotential<T>>,
}

#[derive(Debug, Clone)]
pub struct ChModel<T> {
    pub space: MeasureSpace<T>,
    pub potential: Arc<ChPotential<T>>,
    pub envelope: MoreauEnvelope<T>,
    /// Largest sampled |DU_α(x) − DU_α(y)| / (L |x − y|), L the a-priori constant.
    pub lipschitz_ratio: f64,
}

fn check_modes(modes: usize, cap: usize, what: &str) -> Result<()> {
    if modes == 0 || modes > cap {
        return Err(Error::Config(format!("{what} supports 1..={cap} modes, got {modes}")));
    }
    Ok(())
}

fn check_drift<T: Real>(space: &MeasureSpace<T>, expected: impl Fn(usize) -> f64) -> Result<()> {
    for (i, a) in space.drift_coeffs().iter().enumerate() {
        let e = expected(i + 1);
        if (a.f64() - e).abs() > 4.0 * f64::EPSILON * e.abs() {
            return Err(Error::InvalidSpectrum(format!("a_{} = {a} differs from {e}", i + 1)));
        }
    }
    Ok(())
}

/// Measure space with λ_k = 1/(2k²π²) and U(x) = ∫Φ(x(ξ))dξ, x(ξ) = Σ x_k √2 sin(kπξ).
pub fn build_rd<T: Real>(modes: usize, phi: Phi<T>, xi_grid: usize, opts: &SpaceOptions) -> Result<RdModel<T>> {
    check_modes(modes, RD_MAX_MODES, "reaction-diffusion")?;
    let space = MeasureSpace::new(&rd_eigenvalues::<T>(modes), opts)?;
    check_drift(&space, |k| -(k as f64 * PI).powi(2))?;
    let potential = Arc::new(RdPotential::new(phi, modes, xi_grid)?);
    Ok(RdModel { space, potential })
}

/// Measure space with λ_k = 1/(2k⁴π⁴), the Cahn–Hilliard potential and its
/// envelope U_α built on (I + αB)⁻¹.
pub fn build_ch<T: Real>(modes: usize, phi: Phi<T>, alpha: T, xi_grid: usize, opts: &SpaceOptions) -> Result<ChModel<T>> {
    check_modes(modes, CH_MAX_MODES, "Cahn-Hilliard")?;
    let space = MeasureSpace::new(&ch_eigenvalues::<T>(modes), opts)?;
    check_drift(&space, |k| -(k as f64 * PI).powi(4))?;
    let potential = Arc::new(ChPotential::new(phi, modes, xi_grid)?);
    let base: Arc<dyn Potential<T>> = potential.clone();
    let envelope = MoreauEnvelope::new(base, alpha)?;
    // DU_α = Σ_k kπ r_k ⟨Φ_α'(x_α(·)), √2cos(kπ·)⟩ is Lipschitz with constant
    // max_k (kπ r_k)² / α
    let a = alpha.f64();
    let bound = (1..=modes)
        .map(|k| {
            let kp = k as f64 * PI;
            (kp / (1.0 + a * kp * kp)).powi(2)
        })
        .fold(0.0, f64::max)
        / a;
    let pts = space.sample_mu(0x11b5, 64);
    let mut ratio = 0.0f64;
    for pair in pts.chunks(2) {
        let (_, g0) = envelope.eval(&pair[0])?;
        let (_, g1) = envelope.eval(&pair[1])?;
        let d = dist(&pair[0], &pair[1]).f64();
        if d > 0.0 {
            ratio = ratio.max(dist(&g0, &g1).f64() / (bound * d));
        }
    }
    if ratio > 1.0 + 1e-6 {
        return Err(Error::NumericalFailure {
            what: "Lipschitz check of DU_alpha".into(),
            iterations: pts.len() / 2,
            residual: ratio,
        });
    }
    Ok(ChModel {
        space,
        potential,
        envelope,
        lipschitz_ratio: ratio,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LpMassReport {
    pub p: f64,
    pub q: f64,
    pub samples: usize,
    /// E‖x‖_{L^p}^q with all modes.
    pub estimate: f64,
    pub stderr: f64,
    /// Same with the last mode dropped (equal to `estimate` for one mode).
    pub estimate_fewer_modes: f64,
    pub relative_change: f64,
    pub finite: bool,
    pub stable: bool,
}

/// Which field a coefficient vector stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldBasis {
    /// Σ x_k √2 sin(kπξ).
    Sine,
    /// Σ x_k kπ √2 cos(kπξ).
    Cosine,
}

/// Monte Carlo E‖x‖_{L^p(0,1)}^q under μ truncated to the box, with and
/// without the last mode.
pub fn check_lp_masses<T: Real>(
    space: &MeasureSpace<T>,
    basis: FieldBasis,
    q: f64,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<LpMassReport> {
    if samples < 1000 {
        return Err(Error::Config(format!("at least 1000 samples are required, got {samples}")));
    }
    if !(p >= 1.0) || !(q > 0.0) {
        return Err(Error::Config(format!("need p >= 1 and q > 0, got p = {p}, q = {q}")));
    }
    let n = space.dim();
    let xi_n = DEFAULT_XI_GRID;
    let shape: Vec<Vec<f64>> = (0..=xi_n)
        .map(|j| {
            let xi = j as f64 / xi_n as f64;
            (1..=n)
                .map(|k| {
                    let kp = k as f64 * PI;
                    match basis {
                        FieldBasis::Sine => 2f64.sqrt() * (kp * xi).sin(),
                        FieldBasis::Cosine => kp * 2f64.sqrt() * (kp * xi).cos(),
                    }
                })
                .collect()
        })
        .collect();
    let lp = |x: &[f64], modes: usize| -> f64 {
        let mut s = 0.0;
        for (j, row) in shape.iter().enumerate() {
            let v: f64 = (0..modes).map(|k| row[k] * x[k]).sum();
            let w = if j == 0 || j == xi_n { 0.5 } else { 1.0 };
            s += w * v.abs().powf(p);
        }
        (s / xi_n as f64).powf(q / p)
    };
    let sig: Vec<f64> = space.sigmas().iter().map(|s| s.f64()).collect();
    let r = space.box_radius().f64();
    let mut rng = rng::stream(seed, 0);
    let mut full = Vec::with_capacity(samples);
    let mut fewer = Vec::with_capacity(samples);
    while full.len() < samples {
        let x: Vec<f64> = sig.iter().map(|&s| s * rng::normal::<f64, _>(&mut rng)).collect();
        if x.iter().zip(&sig).any(|(v, s)| v.abs() > r * s) {
            continue;
        }
        full.push(lp(&x, n));
        fewer.push(lp(&x, n.saturating_sub(1).max(1)));
    }
    let (est, se) = crate::sde::mean_stderr(&full);
    let (est_f, _) = crate::sde::mean_stderr(&fewer);
    let change = if est != 0.0 { ((est - est_f) / est).abs() } else { 0.0 };
    let finite = est.is_finite() && se.is_finite();
    Ok(LpMassReport {
        p,
        q,
        samples,
        estimate: est,
        stderr: se,
        estimate_fewer_modes: est_f,
        relative_change: change,
        finite,
        stable: finite && change <= 0.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PhiKind;

    fn opts() -> SpaceOptions {
        SpaceOptions {
            cells_per_axis: 16,
            ..Default::default()
        }
    }

    #[test]
    fn rd_spectrum() {
        let m = build_rd::<f64>(1, Phi::unit(PhiKind::Quartic), 64, &opts()).unwrap();
        assert!((m.space.lambdas()[0] - 1.0 / (2.0 * PI * PI)).abs() < 1e-16);
        assert!((m.space.drift_coeffs()[0] + PI * PI).abs() < 1e-12);
        let m = build_rd::<f64>(3, Phi::unit(PhiKind::Zero), 64, &opts()).unwrap();
        for k in 0..3 {
            let e = -((k + 1) as f64 * PI).powi(2);
            assert!((m.space.drift_coeffs()[k] - e).abs() <= 4.0 * f64::EPSILON * e.abs());
        }
        assert!(build_rd::<f64>(7, Phi::unit(PhiKind::Zero), 64, &opts()).is_err());
    }

    #[test]
    fn ch_spectrum_and_lipschitz() {
        let m = build_ch::<f64>(1, Phi::unit(PhiKind::Quartic), 0.1, 128, &opts()).unwrap();
        assert!((m.space.drift_coeffs()[0] + PI.powi(4)).abs() < 1e-10);
        let m = build_ch::<f64>(3, Phi::unit(PhiKind::Quartic), 0.05, 128, &opts()).unwrap();
        assert!(m.lipschitz_ratio <= 1.0);
        let a = m.space.drift_coeffs();
        assert!((a[2] / a[0] - 81.0).abs() < 1e-9);
        assert!(build_ch::<f64>(5, Phi::unit(PhiKind::Quartic), 0.1, 128, &opts()).is_err());
    }

    #[test]
    fn jensen_bound_on_samples() {
        let m = build_ch::<f64>(2, Phi::unit(PhiKind::Quartic), 0.05, 256, &opts()).unwrap();
        let violations = m
            .space
            .sample_mu(5, 100)
            .iter()
            .filter(|x| m.envelope.value(x).unwrap() > m.potential.value(x) + 1e-14)
            .count();
        assert_eq!(violations, 0);
    }

    #[test]
    fn l2_mass_is_trace() {
        let m = build_rd::<f64>(3, Phi::unit(PhiKind::Zero), 64, &opts()).unwrap();
        let r = check_lp_masses(&m.space, FieldBasis::Sine, 2.0, 2.0, 20000, 1).unwrap();
        let trace: f64 = m.space.lambdas().iter().sum();
        assert!((r.estimate - trace).abs() < 3.0 * r.stderr, "{r:?} vs {trace}");
        let r4 = check_lp_masses(&m.space, FieldBasis::Sine, 2.0, 4.0, 4000, 2).unwrap();
        assert!(r4.finite && r4.stable, "{r4:?}");
    }
}
