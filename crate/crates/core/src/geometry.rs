//! Three-layer periodic channel: lower fluid slab `(0, L1)`, elastic slab
//! `(L1, L2)`, upper fluid slab `(L2, L3)`, all periodic with period 2π in
//! `y1` and `y2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};

/// In-plane period of the torus.
pub const PERIOD: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    FluidLower,
    FluidUpper,
    Elastic,
    /// Γc at `y3 = L1`.
    InterfaceLower,
    /// Γc at `y3 = L2`.
    InterfaceUpper,
    /// Γf at `y3 = 0`.
    OuterBottom,
    /// Γf at `y3 = L3`.
    OuterTop,
}

impl Domain {
    pub fn is_plane(self) -> bool {
        matches!(
            self,
            Domain::InterfaceLower | Domain::InterfaceUpper | Domain::OuterBottom | Domain::OuterTop
        )
    }

    pub fn is_fluid(self) -> bool {
        matches!(self, Domain::FluidLower | Domain::FluidUpper)
    }

    /// Vertical component of the interface normal ν, which points out of the
    /// elastic slab into the fluid.
    pub fn interface_normal(self) -> Option<f64> {
        match self {
            Domain::InterfaceLower => Some(-1.0),
            Domain::InterfaceUpper => Some(1.0),
            _ => None,
        }
    }
}

/// Grid of one slab (or one plane, with `nz == 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabGrid {
    pub domain: Domain,
    pub n1: usize,
    pub n2: usize,
    pub nz: usize,
    pub z0: f64,
    /// Exact top coordinate (equal to `z0` for planes).
    pub z1: f64,
    pub dz: f64,
}

impl SlabGrid {
    pub fn plane_len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2 * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_plane(&self) -> bool {
        self.domain.is_plane()
    }

    pub fn thickness(&self) -> f64 {
        self.z1 - self.z0
    }

    pub fn z_top(&self) -> f64 {
        self.z1
    }

    pub fn y1(&self, i: usize) -> f64 {
        PERIOD * i as f64 / self.n1 as f64
    }

    pub fn y2(&self, j: usize) -> f64 {
        PERIOD * j as f64 / self.n2 as f64
    }

    pub fn z(&self, k: usize) -> f64 {
        if k + 1 == self.nz {
            self.z1
        } else {
            self.z0 + self.dz * k as f64
        }
    }

    pub fn index(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.n1 + i) * self.n2 + j
    }

    /// Area of one in-plane cell.
    pub fn cell_area(&self) -> f64 {
        PERIOD * PERIOD / (self.n1 * self.n2) as f64
    }

    /// Trapezoidal weight of vertical level `k` (1 for planes).
    pub fn z_weight(&self, k: usize) -> f64 {
        if self.is_plane() {
            1.0
        } else if k == 0 || k + 1 == self.nz {
            0.5 * self.dz
        } else {
            self.dz
        }
    }

    /// Lebesgue measure of the slab (area for planes).
    pub fn measure(&self) -> f64 {
        if self.is_plane() {
            PERIOD * PERIOD
        } else {
            PERIOD * PERIOD * self.thickness()
        }
    }

    /// Coordinates of every grid point in storage order.
    pub fn points(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.nz).flat_map(move |k| {
            (0..self.n1).flat_map(move |i| (0..self.n2).map(move |j| [self.y1(i), self.y2(j), self.z(k)]))
        })
    }

    /// Vertical level of `plane` inside this slab, if the plane bounds it.
    pub fn level_of(&self, plane: Domain) -> Option<usize> {
        let top = self.nz - 1;
        match (self.domain, plane) {
            (Domain::FluidLower, Domain::OuterBottom) => Some(0),
            (Domain::FluidLower, Domain::InterfaceLower) => Some(top),
            (Domain::FluidUpper, Domain::InterfaceUpper) => Some(0),
            (Domain::FluidUpper, Domain::OuterTop) => Some(top),
            (Domain::Elastic, Domain::InterfaceLower) => Some(0),
            (Domain::Elastic, Domain::InterfaceUpper) => Some(top),
            _ => None,
        }
    }

    /// The plane grid at level `k` of this slab, tagged `plane`.
    pub fn plane_grid(&self, plane: Domain, k: usize) -> SlabGrid {
        SlabGrid {
            domain: plane,
            n1: self.n1,
            n2: self.n2,
            nz: 1,
            z0: self.z(k),
            z1: self.z(k),
            dz: 0.0,
        }
    }

    /// Same domain with refined in-plane and vertical counts.
    pub fn with_counts(&self, n1: usize, n2: usize, nz: usize) -> SlabGrid {
        let dz = if nz > 1 { self.thickness() / (nz - 1) as f64 } else { 0.0 };
        SlabGrid { n1, n2, nz, dz, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelGeometry {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub n1: usize,
    pub n2: usize,
    /// Vertical interval counts of the lower fluid, upper fluid and elastic slabs.
    pub m_lo: usize,
    pub m_up: usize,
    pub m_el: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn build_geometry(
    l1: f64,
    l2: f64,
    l3: f64,
    n1: usize,
    n2: usize,
    m_lo: usize,
    m_up: usize,
    m_el: usize,
) -> Result<ChannelGeometry> {
    if !(l1 > 0.0 && l1 < l2 && l2 < l3) || !l3.is_finite() {
        return Err(FsiError::Config(format!(
            "layer heights must satisfy 0 < L1 < L2 < L3, got ({l1}, {l2}, {l3})"
        )));
    }
    for (name, n) in [("N1", n1), ("N2", n2), ("M_lo", m_lo), ("M_up", m_up), ("M_el", m_el)] {
        if n < 4 || n % 2 != 0 {
            return Err(FsiError::Config(format!("{name} must be even and at least 4, got {n}")));
        }
    }
    Ok(ChannelGeometry { l1, l2, l3, n1, n2, m_lo, m_up, m_el })
}

impl ChannelGeometry {
    pub fn slab(&self, domain: Domain) -> Result<SlabGrid> {
        let (z0, z1, m) = match domain {
            Domain::FluidLower => (0.0, self.l1, self.m_lo),
            Domain::FluidUpper => (self.l2, self.l3, self.m_up),
            Domain::Elastic => (self.l1, self.l2, self.m_el),
            other => {
                return Err(FsiError::DomainMismatch { domain: other, what: "a 3D slab".into() });
            }
        };
        Ok(SlabGrid { domain, n1: self.n1, n2: self.n2, nz: m + 1, z0, z1, dz: (z1 - z0) / m as f64 })
    }

    pub fn lower(&self) -> SlabGrid {
        self.slab(Domain::FluidLower).expect("fluid slab")
    }

    pub fn upper(&self) -> SlabGrid {
        self.slab(Domain::FluidUpper).expect("fluid slab")
    }

    pub fn elastic(&self) -> SlabGrid {
        self.slab(Domain::Elastic).expect("elastic slab")
    }

    pub fn plane(&self, plane: Domain) -> Result<SlabGrid> {
        let z0 = match plane {
            Domain::InterfaceLower => self.l1,
            Domain::InterfaceUpper => self.l2,
            Domain::OuterBottom => 0.0,
            Domain::OuterTop => self.l3,
            other => return Err(FsiError::DomainMismatch { domain: other, what: "a plane".into() }),
        };
        Ok(SlabGrid { domain: plane, n1: self.n1, n2: self.n2, nz: 1, z0, z1: z0, dz: 0.0 })
    }

    /// Slab thicknesses (lower fluid, elastic, upper fluid).
    pub fn thicknesses(&self) -> (f64, f64, f64) {
        (self.l1, self.l2 - self.l1, self.l3 - self.l2)
    }

    /// Γc planes as `(lower, upper)`.
    pub fn interface_planes(&self) -> (SlabGrid, SlabGrid) {
        (
            self.plane(Domain::InterfaceLower).expect("plane"),
            self.plane(Domain::InterfaceUpper).expect("plane"),
        )
    }

    /// Γf planes as `(bottom, top)`.
    pub fn outer_planes(&self) -> (SlabGrid, SlabGrid) {
        (
            self.plane(Domain::OuterBottom).expect("plane"),
            self.plane(Domain::OuterTop).expect("plane"),
        )
    }
}
