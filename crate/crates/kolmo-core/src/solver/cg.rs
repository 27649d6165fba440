//! Jacobi-preconditioned conjugate gradients on a CSR matrix.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::Real;

/// Fixed chunk length of reductions, so sums do not depend on the thread count.
const CHUNK: usize = 4096;

#[derive(Debug, Clone)]
pub struct Csr<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Real> Csr<T> {
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = T::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            *yi = s;
        });
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&p| self.cols[p] == i)
                    .map(|p| self.vals[p])
                    .unwrap_or(T::zero())
            })
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        (self.row_ptr[i]..self.row_ptr[i + 1])
            .find(|&p| self.cols[p] == j)
            .map(|p| self.vals[p])
            .unwrap_or(T::zero())
    }

    /// max |A_ij − A_ji| / max |A_ij|.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        let mut scale = T::zero();
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[p];
                scale = scale.max(self.vals[p].abs());
                worst = worst.max((self.vals[p] - self.get(j, i)).abs());
            }
        }
        if scale > T::zero() {
            worst / scale
        } else {
            T::zero()
        }
    }
}

/// Chunked dot product with a fixed reduction order.
pub fn pdot<T: Real>(a: &[T], b: &[T]) -> T {
    let parts: Vec<T> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).fold(T::zero(), |s, (&p, &q)| s + p * q))
        .collect();
    parts.into_iter().fold(T::zero(), |s, v| s + v)
}

#[derive(Debug, Clone, Copy)]
pub struct CgInfo {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves Ax = b to ‖b − Ax‖ ≤ tol‖b‖.
pub fn conjugate_gradient<T: Real>(a: &Csr<T>, b: &[T], tol: T, max_iter: usize) -> Result<(Vec<T>, CgInfo)> {
    let n = a.n;
    let mut x = vec![T::zero(); n];
    let bnorm = pdot(b, b).sqrt();
    if bnorm == T::zero() {
        return Ok((
            x,
            CgInfo {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let dinv: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();
    let tol = tol.max(T::epsilon() * T::lit(10.0));
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&dinv).map(|(&a, &d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = pdot(&r, &z);
    let mut rel = T::one();
    for it in 0..max_iter {
        a.matvec(&p, &mut ap);
        let pap = pdot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::Assembly(format!(
                "conjugate gradients broke down at iteration {it}: p'Ap = {pap}"
            )));
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(xi, &pi)| *xi += alpha * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, &api)| *ri -= alpha * api);
        rel = pdot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            // confirm with the true residual
            a.matvec(&x, &mut ap);
            let true_rel = ap
                .iter()
                .zip(b)
                .fold(T::zero(), |s, (&v, &w)| s + (w - v) * (w - v))
                .sqrt()
                / bnorm;
            if true_rel <= tol * T::lit(10.0) {
                return Ok((
                    x,
                    CgInfo {
                        iterations: it + 1,
                        relative_residual: true_rel.f64(),
                    },
                ));
            }
            r = ap.iter().zip(b).map(|(&v, &w)| w - v).collect();
        }
        z.par_iter_mut().zip(&r).zip(&dinv).for_each(|((zi, &ri), &d)| *zi = ri * d);
        let rz_new = pdot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(pi, &zi)| *pi = zi + beta * *pi);
    }
    Err(Error::NumericalFailure {
        what: "conjugate gradients".into(),
        iterations: max_iter,
        residual: rel.f64(),
    })
}
