//! Variable-coefficient forcing terms `I1..I8` and interface terms `K1..K11`
//! of the Π map, evaluated with the module's discrete derivatives.
//!
//! With `G_jm = ∂_m v̄_j`: `S = G b + (G b)ᵀ`, `E = G + Gᵀ`, `D = tr(G b)`.

use crate::error::{FsiError, Result};
use crate::field::{Field, Rank};
use crate::geometry::{Domain, SlabGrid};
use crate::lame::{slab_planes, Viscosities};
use crate::ops::{boundary_trace, grad_array, gradient};

/// Coefficients and unknown of one slab at one time.
#[derive(Clone, Copy, Debug)]
pub struct TermInputs<'a> {
    pub vbar: &'a Field,
    pub b: &'a Field,
    pub j: &'a Field,
    pub r: &'a Field,
    pub visc: Viscosities,
}

struct Derived {
    g: Field,
    s: Field,
    e: Field,
    d: Field,
    div: Field,
}

fn derived(inp: &TermInputs) -> Result<Derived> {
    let g = gradient(inp.vbar)?;
    inp.b.check_shape(&g)?;
    let n = g.npts();
    let mut s = Field::zeros(g.grid, Rank::Tensor);
    let mut e = Field::zeros(g.grid, Rank::Tensor);
    let mut d = Field::zeros(g.grid, Rank::Scalar);
    let mut div = Field::zeros(g.grid, Rank::Scalar);
    for p in 0..n {
        let gm = g.matrix_at(p);
        let bm = inp.b.matrix_at(p);
        let mut gb = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                gb[j][k] = (0..3).map(|m| gm[j][m] * bm[m][k]).sum();
            }
        }
        let mut sm = [[0.0; 3]; 3];
        let mut em = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                sm[j][k] = gb[j][k] + gb[k][j];
                em[j][k] = gm[j][k] + gm[k][j];
            }
        }
        s.set_matrix(p, &sm);
        e.set_matrix(p, &em);
        d.data[p] = gb[0][0] + gb[1][1] + gb[2][2];
        div.data[p] = gm[0][0] + gm[1][1] + gm[2][2];
    }
    Ok(Derived { g, s, e, d, div })
}

/// `∂_k T_{jl}` as `out[3 j + l][k]`.
fn tensor_gradient(t: &Field) -> Vec<[Vec<f64>; 3]> {
    (0..9).map(|c| grad_array(&t.grid, t.comp(c))).collect()
}

fn check_inputs(inp: &TermInputs) -> Result<SlabGrid> {
    let g = inp.vbar.grid;
    if inp.vbar.rank != Rank::Vector || inp.b.rank != Rank::Tensor || inp.j.rank != Rank::Scalar || inp.r.rank != Rank::Scalar {
        return Err(FsiError::Shape("term inputs: v̄ vector, b tensor, J and R scalar".into()));
    }
    for f in [inp.b, inp.j, inp.r] {
        if f.grid != g {
            return Err(FsiError::Shape("term inputs live on different grids".into()));
        }
    }
    Ok(g)
}

/// Terms depending on `v̄`: `I1..I6`, in order.
pub fn velocity_interior_terms(inp: &TermInputs) -> Result<[Field; 6]> {
    let grid = check_inputs(inp)?;
    let dv = derived(inp)?;
    let ds = tensor_gradient(&dv.s);
    let de = tensor_gradient(&dv.e);
    let dd = grad_array(&grid, &dv.d.data);
    let ddiv = grad_array(&grid, &dv.div.data);
    let n = grid.len();
    let (lam, mu) = (inp.visc.lambda, inp.visc.mu);
    let mut out: [Field; 6] = std::array::from_fn(|_| Field::zeros(grid, Rank::Vector));
    for p in 0..n {
        let r = inp.r.data[p];
        let b = inp.b.matrix_at(p);
        for j in 0..3 {
            let mut t = [0.0; 6];
            for k in 0..3 {
                t[0] += ds[3 * j + k][k][p];
                for l in 0..3 {
                    t[1] += b[k][l] * ds[3 * j + l][k][p];
                    t[2] += b[k][l] * de[3 * j + l][k][p];
                }
                t[4] += b[k][j] * dd[k][p];
                t[5] += b[k][j] * ddiv[k][p];
            }
            t[3] = dd[j][p];
            let w = [lam, lam, lam, mu, mu, mu];
            for (i, f) in out.iter_mut().enumerate() {
                f.data[j * n + p] = w[i] * r * t[i];
            }
        }
    }
    Ok(out)
}

/// Terms independent of `v̄`: `I7, I8`.
pub fn fixed_interior_terms(b: &Field, r: &Field) -> Result<[Field; 2]> {
    let grid = r.grid;
    b.check_shape(&Field::zeros(grid, Rank::Tensor))?;
    let rinv = r.map(|x| 1.0 / x);
    let dr = grad_array(&grid, &rinv.data);
    let n = grid.len();
    let mut i7 = Field::zeros(grid, Rank::Vector);
    let mut i8 = Field::zeros(grid, Rank::Vector);
    for p in 0..n {
        let bm = b.matrix_at(p);
        for j in 0..3 {
            i7.data[j * n + p] = -r.data[p] * (0..3).map(|k| bm[k][j] * dr[k][p]).sum::<f64>();
            i8.data[j * n + p] = -r.data[p] * dr[j][p];
        }
    }
    Ok([i7, i8])
}

/// All eight interior terms `I1..I8`.
pub fn interior_terms(inp: &TermInputs) -> Result<[Field; 8]> {
    let [i1, i2, i3, i4, i5, i6] = velocity_interior_terms(inp)?;
    let [i7, i8] = fixed_interior_terms(inp.b, inp.r)?;
    Ok([i1, i2, i3, i4, i5, i6, i7, i8])
}

fn interface_of(grid: &SlabGrid) -> Result<(Domain, f64)> {
    let (gamma, _) = slab_planes(grid)?;
    Ok((gamma, gamma.interface_normal().expect("interface")))
}

/// All eleven interface terms `K1..K11` on the slab's Γc plane.
pub fn boundary_terms(inp: &TermInputs) -> Result<[Field; 11]> {
    let grid = check_inputs(inp)?;
    let (gamma, nu) = interface_of(&grid)?;
    let dv = derived(inp)?;
    let tr = |f: &Field| boundary_trace(f, gamma);
    let (g, s, e, d, div) = (tr(&dv.g)?, tr(&dv.s)?, tr(&dv.e)?, tr(&dv.d)?, tr(&dv.div)?);
    let (b, jac, r) = (tr(inp.b)?, tr(inp.j)?, tr(inp.r)?);
    let plane = g.grid;
    let np = plane.len();
    let (lam, mu) = (inp.visc.lambda, inp.visc.mu);
    let mut out: [Field; 11] = std::array::from_fn(|_| Field::zeros(plane, Rank::Vector));
    for p in 0..np {
        let (bm, sm, em) = (b.matrix_at(p), s.matrix_at(p), e.matrix_at(p));
        let (jj, rinv, dd, dv) = (jac.data[p], 1.0 / r.data[p], d.data[p], div.data[p]);
        for j in 0..3 {
            let dj3 = if j == 2 { 1.0 } else { 0.0 };
            let bs: f64 = (0..3).map(|l| bm[2][l] * sm[j][l]).sum();
            let be: f64 = (0..3).map(|l| bm[2][l] * em[j][l]).sum();
            let k = [
                lam * (1.0 - jj) * em[j][2] * nu,
                mu * (1.0 - jj) * dv * nu * dj3,
                -lam * jj * bs * nu,
                jj * bm[2][j] * rinv * nu,
                (jj - 1.0) * rinv * nu * dj3,
                -lam * jj * sm[j][2] * nu,
                -lam * jj * be * nu,
                -mu * jj * bm[2][j] * dd * nu,
                -mu * jj * dd * nu * dj3,
                -mu * jj * bm[2][j] * dv * nu,
                rinv * nu * dj3,
            ];
            for (f, v) in out.iter_mut().zip(k) {
                f.data[j * np + p] = v;
            }
        }
    }
    Ok(out)
}

/// Terms independent of `v̄`: `K4, K5, K11`.
pub fn fixed_boundary_terms(b: &Field, j: &Field, r: &Field) -> Result<[Field; 3]> {
    let grid = r.grid;
    if b.grid != grid || j.grid != grid || b.rank != Rank::Tensor || j.rank != Rank::Scalar {
        return Err(FsiError::Shape("b, J and R must share one slab grid".into()));
    }
    let (gamma, nu) = interface_of(&grid)?;
    let (b, jac, r) = (boundary_trace(b, gamma)?, boundary_trace(j, gamma)?, boundary_trace(r, gamma)?);
    let plane = r.grid;
    let np = plane.len();
    let mut out: [Field; 3] = std::array::from_fn(|_| Field::zeros(plane, Rank::Vector));
    for p in 0..np {
        let bm = b.matrix_at(p);
        let (jj, rinv) = (jac.data[p], 1.0 / r.data[p]);
        for c in 0..3 {
            let dj3 = if c == 2 { 1.0 } else { 0.0 };
            out[0].data[c * np + p] = jj * bm[2][c] * rinv * nu;
            out[1].data[c * np + p] = (jj - 1.0) * rinv * nu * dj3;
            out[2].data[c * np + p] = rinv * nu * dj3;
        }
    }
    Ok(out)
}

/// Indices (0-based) of the `K` terms that depend on `v̄`.
pub const VELOCITY_K: [usize; 8] = [0, 1, 2, 5, 6, 7, 8, 9];
/// Indices (0-based) of the `K` terms independent of `v̄`.
pub const FIXED_K: [usize; 3] = [3, 4, 10];

/// Sum of the selected terms.
pub fn sum_terms(terms: &[Field], which: &[usize]) -> Field {
    let mut out = Field::zeros(terms[0].grid, terms[0].rank);
    for &i in which {
        out.axpy(1.0, &terms[i]);
    }
    out
}
