//! Difference stencils for Du and D²u on the grid.
//!
//! Stencils only read `trusted` nodes. Centered where both neighbours are
//! trusted, second-order one-sided next to the boundary, first order when
//! only one neighbour exists.

use crate::measure::QuadratureGrid;
use crate::Real;

fn pick<T: Real>(grid: &QuadratureGrid<T>, trusted: &[bool], i: usize, axis: usize, off: isize) -> Option<usize> {
    grid.neighbor(i, axis, off).filter(|&j| trusted[j])
}

/// ∂v/∂x_axis at node i.
pub fn derivative_at<T: Real>(grid: &QuadratureGrid<T>, v: &[T], trusted: &[bool], i: usize, axis: usize) -> T {
    let h = grid.cell_size()[axis];
    let p = pick(grid, trusted, i, axis, 1);
    let m = pick(grid, trusted, i, axis, -1);
    match (m, p) {
        (Some(m), Some(p)) => (v[p] - v[m]) / (T::lit(2.0) * h),
        (Some(m), None) => match pick(grid, trusted, m, axis, -1) {
            Some(mm) => (T::lit(3.0) * v[i] - T::lit(4.0) * v[m] + v[mm]) / (T::lit(2.0) * h),
            None => (v[i] - v[m]) / h,
        },
        (None, Some(p)) => match pick(grid, trusted, p, axis, 1) {
            Some(pp) => (-T::lit(3.0) * v[i] + T::lit(4.0) * v[p] - v[pp]) / (T::lit(2.0) * h),
            None => (v[p] - v[i]) / h,
        },
        (None, None) => T::zero(),
    }
}

/// Du on every node of `eval`; zero elsewhere.
pub fn first_derivatives<T: Real>(grid: &QuadratureGrid<T>, u: &[T], trusted: &[bool], eval: &[bool]) -> Vec<Vec<T>> {
    (0..grid.dim())
        .map(|k| {
            (0..u.len())
                .map(|i| if eval[i] { derivative_at(grid, u, trusted, i, k) } else { T::zero() })
                .collect()
        })
        .collect()
}

/// Upper triangle of D²u, row-major over (i, j) with i ≤ j.
pub(crate) fn second_derivatives<T: Real>(
    grid: &QuadratureGrid<T>,
    u: &[T],
    du: &[Vec<T>],
    trusted: &[bool],
    eval: &[bool],
) -> Vec<Vec<T>> {
    let n = grid.dim();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            let h = grid.cell_size()[a];
            let field = (0..u.len())
                .map(|i| {
                    if !eval[i] {
                        return T::zero();
                    }
                    if a == b {
                        if let (Some(p), Some(m)) = (pick(grid, trusted, i, a, 1), pick(grid, trusted, i, a, -1)) {
                            return (u[p] - T::lit(2.0) * u[i] + u[m]) / (h * h);
                        }
                    }
                    derivative_at(grid, &du[b], trusted, i, a)
                })
                .collect();
            out.push(field);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::build_space;

    #[test]
    fn quadratic_fields_are_exact() {
        let s = build_space::<f64>(&[0.5, 0.5], 4.0, 16).unwrap();
        let g = s.grid();
        let u = g.map(|x| x[0] * x[0] + 3.0 * x[0] * x[1] - x[1]);
        let all = vec![true; g.len()];
        let du = first_derivatives(g, &u, &all, &all);
        let d2 = second_derivatives(g, &u, &du, &all, &all);
        for i in 0..g.len() {
            let x = g.node(i);
            assert!((du[0][i] - (2.0 * x[0] + 3.0 * x[1])).abs() < 1e-9);
            assert!((du[1][i] - (3.0 * x[0] - 1.0)).abs() < 1e-9);
            assert!((d2[0][i] - 2.0).abs() < 1e-8);
            assert!((d2[1][i] - 3.0).abs() < 1e-8);
            assert!(d2[2][i].abs() < 1e-8);
        }
    }
}
