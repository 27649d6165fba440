//! Cell integrals of the weight against multilinear shape factors.

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::ConvexBody;
use crate::measure::MeasureSpace;
use crate::potentials::Weighting;
use crate::quadrature::gauss_legendre_unit;
use crate::Real;

/// Part of the box a weight integral runs over.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a, T> {
    All,
    Inside(&'a ConvexBody<T>),
    Outside(&'a ConvexBody<T>),
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Gauss points per axis on cells not cut by the boundary.
    pub gauss_points: usize,
    /// Gauss points per axis on cut cells (indicator quadrature).
    pub cut_points: usize,
}

impl QuadratureOptions {
    pub fn for_dim(n: usize) -> Self {
        Self {
            gauss_points: 3,
            cut_points: if n <= 2 { 24 } else { 8 },
        }
    }
}

/// Lumped nodal masses and edge integrals on the grid.
///
/// For the edge from node i to i + stride_k (index `i * n + k`):
/// `edge_w` = ∫ w · transverse hat, `edge_m` = ∫ w · ℓ₀ℓ₁ along k · transverse hat.
#[derive(Debug, Clone)]
pub struct CellIntegrals<T> {
    pub lumped: Vec<T>,
    pub edge_w: Vec<T>,
    pub edge_m: Vec<T>,
    pub cut_cells: usize,
    pub active_cells: usize,
}

enum CellKind {
    Skip,
    Full,
    Cut,
}

struct CellData<T> {
    origin: usize,
    lumped: Vec<T>,
    edge_w: Vec<T>,
    edge_m: Vec<T>,
    cut: bool,
}

fn classify<T: Real>(region: &Region<'_, T>, corners: &[Vec<T>], center: &[T], h: &[T]) -> CellKind {
    let (body, inside) = match region {
        Region::All => return CellKind::Full,
        Region::Inside(b) => (*b, true),
        Region::Outside(b) => (*b, false),
    };
    let all_in = corners.iter().all(|c| body.g(c) <= T::zero());
    // lower bound of a convex G over the cell from its tangent plane at the center
    let g = body.g(center);
    let dg = body.dg(center);
    let spread = dg.iter().zip(h).fold(T::zero(), |s, (&d, &hk)| s + d.abs() * hk * T::lit(0.5));
    let all_out = g - spread >= T::zero();
    match (inside, all_in, all_out) {
        (true, true, _) => CellKind::Full,
        (true, false, true) => CellKind::Skip,
        (true, false, false) => CellKind::Cut,
        (false, true, _) => CellKind::Skip,
        (false, false, true) => CellKind::Full,
        (false, false, false) => CellKind::Cut,
    }
}

/// Integrates w = ρ_μ e^{−2W} 1_region against the Q1 factors on every cell.
pub fn integrate_cells<T: Real>(
    space: &MeasureSpace<T>,
    weighting: &Weighting<T>,
    region: Region<'_, T>,
    opts: QuadratureOptions,
) -> Result<CellIntegrals<T>> {
    let grid = space.grid();
    let n = space.dim();
    let dims = grid.dims().to_vec();
    let strides = grid.strides().to_vec();
    let h = grid.cell_size().to_vec();
    let ncorner = 1usize << n;
    let (gx, gw) = gauss_legendre_unit(opts.gauss_points);
    let (cx, cw) = gauss_legendre_unit(opts.cut_points);
    let gx: Vec<T> = gx.into_iter().map(T::lit).collect();
    let gw: Vec<T> = gw.into_iter().map(T::lit).collect();
    let cx: Vec<T> = cx.into_iter().map(T::lit).collect();
    let cw: Vec<T> = cw.into_iter().map(T::lit).collect();
    let cells_per_axis: Vec<usize> = dims.iter().map(|d| d - 1).collect();
    let ncells: usize = cells_per_axis.iter().product();
    let cell_volume = h.iter().fold(T::one(), |a, &b| a * b);

    let per_cell = |c: usize| -> Result<Option<CellData<T>>> {
        let mut idx = vec![0usize; n];
        let mut rem = c;
        for k in (0..n).rev() {
            idx[k] = rem % cells_per_axis[k];
            rem /= cells_per_axis[k];
        }
        let origin: usize = idx.iter().zip(&strides).map(|(a, s)| a * s).sum();
        let lower: Vec<T> = (0..n).map(|k| grid.axis(k)[idx[k]]).collect();
        let corners: Vec<Vec<T>> = (0..ncorner)
            .map(|m| (0..n).map(|k| lower[k] + if m >> k & 1 == 1 { h[k] } else { T::zero() }).collect())
            .collect();
        let center: Vec<T> = (0..n).map(|k| lower[k] + h[k] * T::lit(0.5)).collect();
        let kind = classify(&region, &corners, &center, &h);
        let (px, pw, cut) = match kind {
            CellKind::Skip => return Ok(None),
            CellKind::Full => (&gx, &gw, false),
            CellKind::Cut => (&cx, &cw, true),
        };
        let q = px.len();
        let mut data = CellData {
            origin,
            lumped: vec![T::zero(); ncorner],
            edge_w: vec![T::zero(); n * ncorner],
            edge_m: vec![T::zero(); n * ncorner],
            cut,
        };
        let npts = q.pow(n as u32);
        let mut t = vec![T::zero(); n];
        let mut x = vec![T::zero(); n];
        for p in 0..npts {
            let mut rem = p;
            let mut wq = cell_volume;
            for k in 0..n {
                let j = rem % q;
                rem /= q;
                t[k] = px[j];
                wq *= pw[j];
                x[k] = lower[k] + t[k] * h[k];
            }
            if cut {
                let g = match region {
                    Region::Inside(b) => b.g(&x),
                    Region::Outside(b) => -b.g(&x),
                    Region::All => -T::one(),
                };
                if g > T::zero() {
                    continue;
                }
            }
            let wexp = weighting.exponent(&x)?;
            let w = wq * space.density(&x) * (-T::lit(2.0) * wexp).exp();
            if w == T::zero() {
                continue;
            }
            for m in 0..ncorner {
                let mut phi = T::one();
                for k in 0..n {
                    phi *= if m >> k & 1 == 1 { t[k] } else { T::one() - t[k] };
                }
                data.lumped[m] += w * phi;
            }
            for k in 0..n {
                let along = t[k] * (T::one() - t[k]);
                for m in 0..ncorner {
                    if m >> k & 1 == 1 {
                        continue;
                    }
                    let mut tr = T::one();
                    for l in 0..n {
                        if l != k {
                            tr *= if m >> l & 1 == 1 { t[l] } else { T::one() - t[l] };
                        }
                    }
                    data.edge_w[k * ncorner + m] += w * tr;
                    data.edge_m[k * ncorner + m] += w * along * tr;
                }
            }
        }
        Ok(Some(data))
    };

    let cells: Vec<Option<CellData<T>>> = (0..ncells).into_par_iter().map(per_cell).collect::<Result<_>>()?;

    let nn = grid.len();
    let mut out = CellIntegrals {
        lumped: vec![T::zero(); nn],
        edge_w: vec![T::zero(); nn * n],
        edge_m: vec![T::zero(); nn * n],
        cut_cells: 0,
        active_cells: 0,
    };
    for cell in cells.into_iter().flatten() {
        out.active_cells += 1;
        if cell.cut {
            out.cut_cells += 1;
        }
        for m in 0..ncorner {
            let node = cell.origin + (0..n).filter(|&k| m >> k & 1 == 1).map(|k| strides[k]).sum::<usize>();
            out.lumped[node] += cell.lumped[m];
            for k in 0..n {
                if m >> k & 1 == 0 {
                    out.edge_w[node * n + k] += cell.edge_w[k * ncorner + m];
                    out.edge_m[node * n + k] += cell.edge_m[k * ncorner + m];
                }
            }
        }
    }
    Ok(out)
}

/// Lumped ν-masses ∫_region e^{−2W} φ_i dμ of every node.
pub fn lumped_weights<T: Real>(
    space: &MeasureSpace<T>,
    weighting: &Weighting<T>,
    region: Region<'_, T>,
    opts: QuadratureOptions,
) -> Result<Vec<T>> {
    Ok(integrate_cells(space, weighting, region, opts)?.lumped)
}

/// ∫_{C^c} e^{−2W} dμ over the box.
pub fn outside_mass<T: Real>(
    space: &MeasureSpace<T>,
    body: &ConvexBody<T>,
    weighting: &Weighting<T>,
    opts: QuadratureOptions,
) -> Result<T> {
    Ok(lumped_weights(space, weighting, Region::Outside(body), opts)?.into_iter().sum())
}

/// Marginal law of one coordinate under the normalized weight on a region:
/// the CDF at the cell edges of that axis, linear in between.
#[derive(Debug, Clone)]
pub struct Marginal {
    pub edges: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl Marginal {
    pub fn cdf(&self, t: f64) -> f64 {
        let e = &self.edges;
        if t <= e[0] {
            return 0.0;
        }
        if t >= e[e.len() - 1] {
            return 1.0;
        }
        let j = e.partition_point(|&x| x <= t);
        let (x0, x1) = (e[j - 1], e[j]);
        let (f0, f1) = (self.cumulative[j - 1], self.cumulative[j]);
        f0 + (f1 - f0) * (t - x0) / (x1 - x0)
    }
}

/// ν-marginal of coordinate `axis` over `region`, normalized to mass one.
pub fn axis_marginal<T: Real>(
    space: &MeasureSpace<T>,
    weighting: &Weighting<T>,
    region: Region<'_, T>,
    axis: usize,
    opts: QuadratureOptions,
) -> Result<Marginal> {
    let grid = space.grid();
    let n = space.dim();
    if axis >= n {
        return Err(crate::Error::Config(format!("axis {axis} out of range for dimension {n}")));
    }
    let h = grid.cell_size().to_vec();
    let cells_per_axis: Vec<usize> = grid.dims().iter().map(|d| d - 1).collect();
    let ncells: usize = cells_per_axis.iter().product();
    let (gx, gw) = gauss_legendre_unit(opts.gauss_points);
    let (cx, cw) = gauss_legendre_unit(opts.cut_points);
    let per_cell = |c: usize| -> Result<(usize, f64)> {
        let mut idx = vec![0usize; n];
        let mut rem = c;
        for k in (0..n).rev() {
            idx[k] = rem % cells_per_axis[k];
            rem /= cells_per_axis[k];
        }
        let lower: Vec<T> = (0..n).map(|k| grid.axis(k)[idx[k]]).collect();
        let corners: Vec<Vec<T>> = (0..1usize << n)
            .map(|m| (0..n).map(|k| lower[k] + if m >> k & 1 == 1 { h[k] } else { T::zero() }).collect())
            .collect();
        let center: Vec<T> = (0..n).map(|k| lower[k] + h[k] * T::lit(0.5)).collect();
        let (px, pw, cut) = match classify(&region, &corners, &center, &h) {
            CellKind::Skip => return Ok((idx[axis], 0.0)),
            CellKind::Full => (&gx, &gw, false),
            CellKind::Cut => (&cx, &cw, true),
        };
        let q = px.len();
        let vol = h.iter().fold(1.0, |a, b| a * b.f64());
        let mut acc = 0.0;
        let mut x = vec![T::zero(); n];
        for p in 0..q.pow(n as u32) {
            let mut rem = p;
            let mut wq = vol;
            for k in 0..n {
                let j = rem % q;
                rem /= q;
                wq *= pw[j];
                x[k] = lower[k] + T::lit(px[j]) * h[k];
            }
            if cut {
                let g = match region {
                    Region::Inside(b) => b.g(&x),
                    Region::Outside(b) => -b.g(&x),
                    Region::All => -T::one(),
                };
                if g > T::zero() {
                    continue;
                }
            }
            let w = space.density(&x) * (-T::lit(2.0) * weighting.exponent(&x)?).exp();
            acc += wq * w.f64();
        }
        Ok((idx[axis], acc))
    };
    let parts: Vec<(usize, f64)> = (0..ncells).into_par_iter().map(per_cell).collect::<Result<_>>()?;
    let ca = cells_per_axis[axis];
    let mut slab = vec![0.0; ca];
    for (i, m) in parts {
        slab[i] += m;
    }
    let total: f64 = slab.iter().sum();
    if !(total > 0.0) {
        return Err(crate::Error::DegenerateMeasure("region carries no mass".into()));
    }
    let mut cumulative = Vec::with_capacity(ca + 1);
    let mut acc = 0.0;
    cumulative.push(0.0);
    for m in slab {
        acc += m;
        cumulative.push(acc / total);
    }
    Ok(Marginal {
        edges: grid.axis(axis).iter().map(|v| v.f64()).collect(),
        cumulative,
    })
}
