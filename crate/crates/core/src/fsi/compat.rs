//! The four compatibility conditions on `(v0, w1, R0)` at `t = 0`, with the
//! pressure law `q(R) = R`.

use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};
use crate::field::{Field, Pair, Rank};
use crate::geometry::Domain;
use crate::lame::{slab_planes, Viscosities};
use crate::ops::{boundary_trace, divergence, gradient, tensor_divergence};

pub const CONDITION_NAMES: [&str; 4] = [
    "w1 = v0 on interface",
    "v0 = 0 on outer wall",
    "interface stress balance",
    "outer wall momentum balance",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatThresholds(pub [f64; 4]);

impl Default for CompatThresholds {
    fn default() -> Self {
        CompatThresholds([1e-8, 1e-8, 1e-6, 1e-6])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    /// Sup-norm residual of each condition, over both fluid slabs.
    pub residuals: [f64; 4],
    pub thresholds: [f64; 4],
}

impl CompatibilityReport {
    pub fn passed(&self, i: usize) -> bool {
        self.residuals[i] <= self.thresholds[i]
    }

    pub fn all_passed(&self) -> bool {
        (0..4).all(|i| self.passed(i))
    }

    pub fn failures(&self) -> Vec<usize> {
        (0..4).filter(|&i| !self.passed(i)).collect()
    }

    pub fn describe_failures(&self) -> String {
        self.failures()
            .iter()
            .map(|&i| format!("{} (residual {:.3e} > {:.1e})", CONDITION_NAMES[i], self.residuals[i], self.thresholds[i]))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// External loads at `t = 0`: body force `f` on each slab, interface load `h`
/// on each Γc plane.
#[derive(Clone, Copy, Debug)]
pub struct InitialLoads<'a> {
    pub f: Option<&'a Pair<Field>>,
    pub h: Option<&'a Pair<Field>>,
}

fn max_abs_diff(a: &Field, b: &Field) -> Result<f64> {
    a.check_shape(b)?;
    Ok(a.data.iter().zip(&b.data).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())))
}

fn slab_residuals(v0: &Field, r0: &Field, visc: Viscosities, f: Option<&Field>, h: Option<&Field>) -> Result<[f64; 3]> {
    let (gamma, outer) = slab_planes(&v0.grid)?;
    if v0.rank != Rank::Vector || r0.rank != Rank::Scalar || r0.grid != v0.grid {
        return Err(FsiError::Shape("v0 must be a vector and R0 a scalar on the same fluid slab".into()));
    }
    let nu = gamma.interface_normal().expect("interface");
    let rinv = r0.map(|x| 1.0 / x);
    let g = gradient(v0)?;
    let div = divergence(v0)?;

    let wall = boundary_trace(v0, outer)?.max_abs();

    let (gt, dt, rt) = (boundary_trace(&g, gamma)?, boundary_trace(&div, gamma)?, boundary_trace(&rinv, gamma)?);
    let np = gt.npts();
    let mut stress = Field::zeros(gt.grid, Rank::Vector);
    for p in 0..np {
        let m = gt.matrix_at(p);
        for j in 0..3 {
            let mut s = visc.lambda * (m[j][2] + m[2][j]) * nu;
            if j == 2 {
                s += (visc.mu * dt.data[p] - rt.data[p]) * nu;
            }
            stress.data[j * np + p] = s;
        }
    }
    if let Some(h) = h {
        stress.axpy(-1.0, h);
    }

    let mut e = g.clone();
    for p in 0..g.npts() {
        let m = g.matrix_at(p);
        let mut s = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                s[j][k] = m[j][k] + m[k][j];
            }
        }
        e.set_matrix(p, &s);
    }
    let mut momentum = tensor_divergence(&e)?.scaled(visc.lambda);
    momentum.axpy(visc.mu, &gradient(&div)?);
    momentum.axpy(-1.0, &gradient(&rinv)?);
    if let Some(f) = f {
        momentum.axpy(1.0, &f.times_scalar(&rinv));
    }
    let momentum = boundary_trace(&momentum, outer)?.max_abs();
    Ok([wall, stress.max_abs(), momentum])
}

/// Evaluate the left side of each condition as a sup-norm residual.
pub fn check_compatibility(
    v0: &Pair<Field>,
    w1: &Field,
    r0: &Pair<Field>,
    visc: Viscosities,
    loads: InitialLoads,
    thresholds: CompatThresholds,
) -> Result<CompatibilityReport> {
    if w1.grid.domain != Domain::Elastic || w1.rank != Rank::Vector {
        return Err(FsiError::Shape("w1 must be a vector field on the elastic slab".into()));
    }
    let mut residuals = [0.0_f64; 4];
    for (i, (v, r)) in [(&v0.lower, &r0.lower), (&v0.upper, &r0.upper)].into_iter().enumerate() {
        let (gamma, _) = slab_planes(&v.grid)?;
        let c1 = max_abs_diff(&boundary_trace(w1, gamma)?, &boundary_trace(v, gamma)?)?;
        let f = loads.f.map(|f| if i == 0 { &f.lower } else { &f.upper });
        let h = loads.h.map(|h| if i == 0 { &h.lower } else { &h.upper });
        let [c2, c3, c4] = slab_residuals(v, r, visc, f, h)?;
        for (slot, c) in residuals.iter_mut().zip([c1, c2, c3, c4]) {
            *slot = slot.max(c);
        }
    }
    Ok(CompatibilityReport { residuals, thresholds: thresholds.0 })
}

/// A compatible triple: `v0 = (0, 0, A z)` below, `(0, 0, A (z − L3))` above,
/// `w1` the linear interpolation between the interface values, and constant
/// `R0 = 1 / ((2λ + μ) A)`.
pub fn crafted_compatible_triple(
    geometry: &crate::geometry::ChannelGeometry,
    visc: Viscosities,
    amplitude: f64,
) -> Result<(Pair<Field>, Field, Pair<Field>)> {
    if !(amplitude > 0.0) {
        return Err(FsiError::InvalidParameter("amplitude must be positive".into()));
    }
    let (l1, l2, l3) = (geometry.l1, geometry.l2, geometry.l3);
    let a = amplitude;
    let v0 = Pair::new(
        Field::vector_from_fn(geometry.lower(), |y| [0.0, 0.0, a * y[2]]),
        Field::vector_from_fn(geometry.upper(), |y| [0.0, 0.0, a * (y[2] - l3)]),
    );
    let (lo, hi) = (a * l1, a * (l2 - l3));
    let w1 = Field::vector_from_fn(geometry.elastic(), |y| [0.0, 0.0, lo + (hi - lo) * (y[2] - l1) / (l2 - l1)]);
    let r = 1.0 / ((2.0 * visc.lambda + visc.mu) * a);
    let r0 = Pair::new(Field::constant(geometry.lower(), r), Field::constant(geometry.upper(), r));
    Ok((v0, w1, r0))
}
