//! Differential and trace operators. In-plane derivatives are exact spectral
//! derivatives of the periodic DFT; `∂3` uses second-order centred differences
//! with second-order one-sided stencils at the slab ends.

use num_complex::Complex64;

use crate::error::{FsiError, Result};
use crate::field::{Field, Rank};
use crate::geometry::{Domain, SlabGrid};
use crate::spectral::{deriv_wavenumber, fft2, ifft2_real};

fn require_volume(grid: &SlabGrid) -> Result<()> {
    if grid.is_plane() {
        return Err(FsiError::DomainMismatch { domain: grid.domain, what: "a 3D derivative".into() });
    }
    if grid.nz < 3 {
        return Err(FsiError::Shape("vertical stencils need at least 3 levels".into()));
    }
    Ok(())
}

/// Both in-plane derivatives of one component array.
fn d_inplane(grid: &SlabGrid, data: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (n1, n2) = (grid.n1, grid.n2);
    let np = n1 * n2;
    let mut d1 = vec![0.0; data.len()];
    let mut d2 = vec![0.0; data.len()];
    for k in 0..grid.nz {
        let spec = fft2(&data[k * np..(k + 1) * np], n1, n2);
        let mut s1 = spec.clone();
        let mut s2 = spec;
        for i in 0..n1 {
            let k1 = deriv_wavenumber(i, n1);
            for j in 0..n2 {
                let k2 = deriv_wavenumber(j, n2);
                let p = i * n2 + j;
                s1[p] *= Complex64::new(0.0, k1);
                s2[p] *= Complex64::new(0.0, k2);
            }
        }
        d1[k * np..(k + 1) * np].copy_from_slice(&ifft2_real(s1, n1, n2));
        d2[k * np..(k + 1) * np].copy_from_slice(&ifft2_real(s2, n1, n2));
    }
    (d1, d2)
}

/// In-plane derivative along axis 0 (`y1`) or 1 (`y2`); works on planes too.
pub fn d_plane_axis(grid: &SlabGrid, data: &[f64], axis: usize) -> Vec<f64> {
    let (d1, d2) = d_inplane(grid, data);
    if axis == 0 {
        d1
    } else {
        d2
    }
}

/// Vertical derivative of one component array.
pub fn d_vertical(grid: &SlabGrid, data: &[f64]) -> Vec<f64> {
    let np = grid.plane_len();
    let nz = grid.nz;
    let h2 = 2.0 * grid.dz;
    let mut out = vec![0.0; data.len()];
    let at = |k: usize, p: usize| data[k * np + p];
    for p in 0..np {
        out[p] = (-3.0 * at(0, p) + 4.0 * at(1, p) - at(2, p)) / h2;
        for k in 1..nz - 1 {
            out[k * np + p] = (at(k + 1, p) - at(k - 1, p)) / h2;
        }
        out[(nz - 1) * np + p] = (3.0 * at(nz - 1, p) - 4.0 * at(nz - 2, p) + at(nz - 3, p)) / h2;
    }
    out
}

/// `∂_axis` of component `comp` of `f`, axis in `0..3`.
pub fn partial(f: &Field, comp: usize, axis: usize) -> Result<Vec<f64>> {
    require_volume(&f.grid)?;
    partial_unchecked(&f.grid, f.comp(comp), axis)
}

pub(crate) fn partial_unchecked(grid: &SlabGrid, data: &[f64], axis: usize) -> Result<Vec<f64>> {
    match axis {
        0 | 1 => Ok(d_plane_axis(grid, data, axis)),
        2 => Ok(d_vertical(grid, data)),
        _ => Err(FsiError::InvalidParameter(format!("axis {axis} out of range"))),
    }
}

/// All three partial derivatives of one component array.
pub(crate) fn grad_array(grid: &SlabGrid, data: &[f64]) -> [Vec<f64>; 3] {
    let (d1, d2) = d_inplane(grid, data);
    [d1, d2, d_vertical(grid, data)]
}

/// Gradient of a scalar (→ vector) or vector (→ tensor, `(∇v)_{ij} = ∂_j v_i`).
pub fn gradient(f: &Field) -> Result<Field> {
    require_volume(&f.grid)?;
    let comps: Vec<Vec<f64>> = match f.rank {
        Rank::Scalar => grad_array(&f.grid, f.comp(0)).into(),
        Rank::Vector => (0..3).flat_map(|c| grad_array(&f.grid, f.comp(c))).collect(),
        Rank::Tensor => return Err(FsiError::Shape("gradient of a tensor field is not supported".into())),
    };
    Field::from_components(f.grid, comps)
}

pub fn divergence(v: &Field) -> Result<Field> {
    require_volume(&v.grid)?;
    if v.rank != Rank::Vector {
        return Err(FsiError::Shape("divergence needs a vector field".into()));
    }
    let mut out = partial_unchecked(&v.grid, v.comp(0), 0)?;
    for (c, axis) in [(1, 1), (2, 2)] {
        let d = partial_unchecked(&v.grid, v.comp(c), axis)?;
        for (o, x) in out.iter_mut().zip(d) {
            *o += x;
        }
    }
    Field::from_data(v.grid, Rank::Scalar, out)
}

/// Row-wise divergence of a tensor: `(div T)_i = ∂_j T_{ij}`.
pub fn tensor_divergence(t: &Field) -> Result<Field> {
    require_volume(&t.grid)?;
    if t.rank != Rank::Tensor {
        return Err(FsiError::Shape("tensor divergence needs a tensor field".into()));
    }
    let n = t.npts();
    let mut out = vec![0.0; 3 * n];
    for i in 0..3 {
        for j in 0..3 {
            let d = partial_unchecked(&t.grid, t.comp(3 * i + j), j)?;
            for (o, x) in out[i * n..(i + 1) * n].iter_mut().zip(d) {
                *o += x;
            }
        }
    }
    Field::from_data(t.grid, Rank::Vector, out)
}

/// Discrete Laplacian obtained as `divergence ∘ gradient` of a scalar.
pub fn laplacian(f: &Field) -> Result<Field> {
    divergence(&gradient(f)?)
}

/// Restriction of `f` to a grid-aligned boundary plane of its slab.
pub fn boundary_trace(f: &Field, plane: Domain) -> Result<Field> {
    let k = f.grid.level_of(plane).ok_or(FsiError::DomainMismatch {
        domain: f.grid.domain,
        what: format!("boundary plane {plane:?}"),
    })?;
    let np = f.grid.plane_len();
    let n = f.npts();
    let pg = f.grid.plane_grid(plane, k);
    let mut data = Vec::with_capacity(np * f.comps());
    for c in 0..f.comps() {
        data.extend_from_slice(&f.data[c * n + k * np..c * n + (k + 1) * np]);
    }
    Field::from_data(pg, f.rank, data)
}
