use std::sync::Arc;

use super::*;
use crate::measure::build_space;
use crate::potentials::{PenalizedPotential, PhiKind, Separable};

fn h2(x: f64) -> f64 {
    4.0 * x * x - 2.0
}

fn core_error(space: &MeasureSpace<f64>, sol: &WeakSolution<f64>, exact: impl Fn(f64) -> f64) -> f64 {
    let sigma = space.sigmas()[0];
    let g = space.grid();
    (0..g.len())
        .filter(|&i| sol.trusted[i] && g.node(i)[0].abs() <= 4.0 * sigma)
        .map(|i| (sol.u[i] - exact(g.node(i)[0])).abs())
        .fold(0.0, f64::max)
}

#[test]
fn hermite_resolvent() {
    let s = build_space::<f64>(&[0.5], 8.0, 400).unwrap();
    let f = s.grid().map(|x| h2(x[0]));
    let p = WeakProblem::new(&s, Domain::Whole, Weighting::Gaussian, 1.0, f);
    let sol = solve_neumann(&p).unwrap();
    let err = core_error(&s, &sol, |x| h2(x) / 3.0);
    assert!(err <= 1e-3, "{err}");
}

#[test]
fn constants_are_reproduced() {
    let s = build_space::<f64>(&[0.5, 0.25], 6.0, 20).unwrap();
    let f = vec![3.0; s.grid().len()];
    let body = ConvexBody::ellipsoid(vec![1.0, 2.0], 1.0).unwrap();
    for dom in [Domain::Whole, Domain::Restricted(body.clone())] {
        let p = WeakProblem::new(&s, dom.clone(), Weighting::Gaussian, 2.0, f.clone());
        let sol = solve_neumann(&p).unwrap();
        // far corners carry masses near 1e-15 and are only loosely resolved by CG
        for i in 0..f.len() {
            let x = s.grid().node(i);
            let core = (0..2).all(|k| x[k].abs() <= 4.0 * s.sigmas()[k]);
            if sol.active[i] && core {
                assert!((sol.u[i] - 1.5).abs() < 1e-8, "{} {:?}", sol.u[i], x);
            }
        }
        let r = estimate_report(&sol, &p).unwrap();
        assert!((r.diss_ratio() - 1.0).abs() < 1e-6);
        if matches!(dom, Domain::Restricted(_)) {
            assert!(r.flux_surface_norm.unwrap() < 1e-8);
        }
    }
}

#[test]
fn halfline_even_solution() {
    let s = build_space::<f64>(&[0.5], 8.0, 400).unwrap();
    let f = s.grid().map(|x| h2(x[0]));
    let body = ConvexBody::halfspace(vec![1.0], 0.0).unwrap();
    let p = WeakProblem::new(&s, Domain::Restricted(body.clone()), Weighting::Gaussian, 1.0, f);
    let sol = solve_neumann(&p).unwrap();
    let err = core_error(&s, &sol, |x| h2(x) / 3.0);
    assert!(err <= 2e-3, "{err}");
    let fl = flux_trace(&sol, &s, &body, None, 2.0).unwrap();
    assert!(fl.flux_surface_norm < 5e-3, "{fl:?}");
    assert!(fl.identity_residual <= fl.flux_surface_norm + 1e-6);
}

#[test]
fn system_is_symmetric_and_orthogonal() {
    let s = build_space::<f64>(&[0.5, 0.5], 4.0, 40).unwrap();
    let body = ConvexBody::ellipsoid(vec![1.0, 4.0], 1.0).unwrap();
    let f = s.grid().map(|x| h2(x[0]) + x[1]);
    let p = WeakProblem::new(&s, Domain::Restricted(body), Weighting::Gaussian, 1.0, f);
    let sys = assemble(&p).unwrap();
    let scale = sys.matrix.diagonal().iter().fold(0.0f64, |a, &b| a.max(b));
    assert!(sys.matrix.asymmetry() <= 1e-12 * scale);
    let sol = solve_neumann(&p).unwrap();
    let x: Vec<f64> = sys.nodes.iter().map(|&i| sol.u[i]).collect();
    let mut ax = vec![0.0; x.len()];
    sys.matrix.matvec(&x, &mut ax);
    let res: f64 = ax.iter().zip(&sys.rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = sys.rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    assert!(res <= 1e-9 * nb, "{}", res / nb);
}

#[test]
fn positive_data_gives_positive_solution() {
    let s = build_space::<f64>(&[0.5, 0.25], 5.0, 40).unwrap();
    let body = ConvexBody::halfspace(vec![1.0, 1.0], 0.3).unwrap();
    let f = s.grid().map(|x| (x[0] - 0.5).powi(2) * (-x[1] * x[1]).exp());
    let p = WeakProblem::new(&s, Domain::Restricted(body), Weighting::Gaussian, 0.5, f);
    let sol = solve_neumann(&p).unwrap();
    assert!(sol.u.iter().all(|&v| v >= -1e-8));
}

#[test]
fn estimates_hold_in_two_dimensions() {
    let s = build_space::<f64>(&[0.5, 0.25], 6.0, 64).unwrap();
    let f = s.grid().map(|x| h2(x[0]) * x[1] + 1.0);
    let u: Arc<dyn crate::potentials::Potential<f64>> = Arc::new(Separable::of(PhiKind::Quartic));
    let body = ConvexBody::ellipsoid(vec![1.0, 1.0], 1.5).unwrap();
    for (dom, w) in [
        (Domain::Whole, Weighting::Potential(u.clone())),
        (Domain::Restricted(body), Weighting::Potential(u)),
    ] {
        let p = WeakProblem::new(&s, dom, w, 1.0, f.clone());
        let sol = solve_neumann(&p).unwrap();
        let r = estimate_report(&sol, &p).unwrap();
        assert!(r.is_valid());
        assert!(r.diss_ratio() <= 1.05, "{r:?}");
        assert!(r.maxreg_ratio() <= 1.10, "{r:?}");
    }
}

#[test]
fn penalized_with_far_body_matches_envelope_solve() {
    let s = build_space::<f64>(&[0.5], 8.0, 200).unwrap();
    let base: Arc<dyn crate::potentials::Potential<f64>> = Arc::new(Separable::of(PhiKind::Abs));
    let far = ConvexBody::halfspace(vec![1.0], 100.0).unwrap();
    let pen = PenalizedPotential::new(base.clone(), far, 0.25).unwrap();
    let env = crate::potentials::MoreauEnvelope::new(base, 0.25).unwrap();
    let f = s.grid().map(|x| h2(x[0]));
    let a = solve_penalized(&WeakProblem::new(&s, Domain::Whole, Weighting::Penalized(pen), 1.0, f.clone())).unwrap();
    let b = solve_neumann(&WeakProblem::new(&s, Domain::Whole, Weighting::Envelope(env), 1.0, f)).unwrap();
    let d = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(d < 1e-8, "{d}");
}

#[test]
fn penalization_approaches_neumann_solution() {
    let s = build_space::<f64>(&[0.5], 8.0, 400).unwrap();
    let body = ConvexBody::halfspace(vec![1.0], 0.0).unwrap();
    let f = s.grid().map(|x| h2(x[0]));
    let zero: Arc<dyn crate::potentials::Potential<f64>> = Arc::new(Separable::of(PhiKind::Zero));
    let reference = solve_neumann(&WeakProblem::new(&s, Domain::Restricted(body.clone()), Weighting::Gaussian, 1.0, f.clone())).unwrap();
    let q = QuadratureOptions::for_dim(1);
    let mut errs = Vec::new();
    let mut masses = Vec::new();
    for alpha in [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let pen = PenalizedPotential::new(zero.clone(), body.clone(), alpha).unwrap();
        let w = Weighting::Penalized(pen);
        masses.push(outside_mass(&s, &body, &w, q).unwrap());
        let sol = solve_penalized(&WeakProblem::new(&s, Domain::Whole, w, 1.0, f.clone())).unwrap();
        errs.push(w12_distance(&reference, &sol));
    }
    for k in 1..errs.len() {
        assert!(errs[k] < errs[k - 1] * 1.05, "{errs:?}");
        assert!(masses[k] <= 0.5 * masses[k - 1] * 1.5, "{masses:?}");
    }
}

#[test]
fn rejects_bad_input() {
    let s = build_space::<f64>(&[0.5], 4.0, 10).unwrap();
    let f = vec![1.0; s.grid().len()];
    assert!(solve_neumann(&WeakProblem::new(&s, Domain::Whole, Weighting::Gaussian, 0.0, f.clone())).is_err());
    let mut bad = f.clone();
    bad[3] = f64::NAN;
    assert!(matches!(
        solve_neumann(&WeakProblem::new(&s, Domain::Whole, Weighting::Gaussian, 1.0, bad)),
        Err(Error::InvalidData(_))
    ));
    let empty = ConvexBody::halfspace(vec![1.0], -100.0).unwrap();
    assert!(matches!(
        solve_neumann(&WeakProblem::new(&s, Domain::Restricted(empty), Weighting::Gaussian, 1.0, f)),
        Err(Error::Domain(_))
    ));
}
