//! Grid fields, fluid/interface pairs and uniformly sampled time tracks.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};
use crate::geometry::SlabGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rank {
    Scalar,
    Vector,
    Tensor,
}

impl Rank {
    pub fn comps(self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector => 3,
            Rank::Tensor => 9,
        }
    }
}

/// Samples of a scalar, vector or 3×3 tensor quantity on one slab or plane.
///
/// Storage is component-major: component `c` occupies
/// `data[c * n .. (c + 1) * n]` with `n = grid.len()`, and each component is
/// laid out as `[k][i][j]` (vertical level, `y1`, `y2`). Tensor component
/// `(r, c)` is stored at index `3 * r + c`; gradients use `(∇v)_{rc} = ∂_c v_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: SlabGrid,
    pub rank: Rank,
    pub data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: SlabGrid, rank: Rank) -> Self {
        Field { grid, rank, data: vec![0.0; grid.len() * rank.comps()] }
    }

    pub fn from_data(grid: SlabGrid, rank: Rank, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() * rank.comps() {
            return Err(FsiError::Shape(format!(
                "expected {} values for {:?} on {:?}, got {}",
                grid.len() * rank.comps(),
                rank,
                grid.domain,
                data.len()
            )));
        }
        Ok(Field { grid, rank, data })
    }

    pub fn constant(grid: SlabGrid, value: f64) -> Self {
        Field { grid, rank: Rank::Scalar, data: vec![value; grid.len()] }
    }

    pub fn scalar_from_fn(grid: SlabGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        Field { grid, rank: Rank::Scalar, data: grid.points().map(f).collect() }
    }

    pub fn vector_from_fn(grid: SlabGrid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let n = grid.len();
        let mut data = vec![0.0; 3 * n];
        for (p, y) in grid.points().enumerate() {
            let v = f(y);
            for c in 0..3 {
                data[c * n + p] = v[c];
            }
        }
        Field { grid, rank: Rank::Vector, data }
    }

    pub fn tensor_from_fn(grid: SlabGrid, f: impl Fn([f64; 3]) -> [[f64; 3]; 3]) -> Self {
        let n = grid.len();
        let mut data = vec![0.0; 9 * n];
        for (p, y) in grid.points().enumerate() {
            let m = f(y);
            for r in 0..3 {
                for c in 0..3 {
                    data[(3 * r + c) * n + p] = m[r][c];
                }
            }
        }
        Field { grid, rank: Rank::Tensor, data }
    }

    /// Assemble a field from per-component arrays.
    pub fn from_components(grid: SlabGrid, comps: Vec<Vec<f64>>) -> Result<Self> {
        let rank = match comps.len() {
            1 => Rank::Scalar,
            3 => Rank::Vector,
            9 => Rank::Tensor,
            n => return Err(FsiError::Shape(format!("{n} components do not form a field"))),
        };
        let mut data = Vec::with_capacity(grid.len() * comps.len());
        for c in comps {
            if c.len() != grid.len() {
                return Err(FsiError::Shape("component length does not match grid".into()));
            }
            data.extend(c);
        }
        Ok(Field { grid, rank, data })
    }

    pub fn npts(&self) -> usize {
        self.grid.len()
    }

    pub fn comps(&self) -> usize {
        self.rank.comps()
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let n = self.npts();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.npts();
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Value of component `c` at point index `p`.
    pub fn at(&self, c: usize, p: usize) -> f64 {
        self.data[c * self.npts() + p]
    }

    pub fn matrix_at(&self, p: usize) -> [[f64; 3]; 3] {
        let n = self.npts();
        let mut m = [[0.0; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.data[(3 * r + c) * n + p];
            }
        }
        m
    }

    pub fn set_matrix(&mut self, p: usize, m: &[[f64; 3]; 3]) {
        let n = self.npts();
        for (r, row) in m.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                self.data[(3 * r + c) * n + p] = *v;
            }
        }
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.grid == other.grid && self.rank == other.rank
    }

    pub fn check_shape(&self, other: &Field) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(FsiError::Shape(format!(
                "{:?} {:?} vs {:?} {:?}",
                self.grid.domain, self.rank, other.grid.domain, other.rank
            )))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, rank: self.rank, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Field) {
        debug_assert!(self.same_shape(other));
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    /// Pointwise product of every component with a scalar field.
    pub fn times_scalar(&self, s: &Field) -> Field {
        debug_assert_eq!(s.rank, Rank::Scalar);
        debug_assert_eq!(s.grid, self.grid);
        let n = self.npts();
        let mut out = self.clone();
        for c in 0..self.comps() {
            for p in 0..n {
                out.data[c * n + p] *= s.data[p];
            }
        }
        out
    }

    /// Copy of the field re-tagged onto another grid of identical layout.
    pub fn retagged(&self, grid: SlabGrid) -> Field {
        debug_assert_eq!(grid.len(), self.grid.len());
        Field { grid, rank: self.rank, data: self.data.clone() }
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        debug_assert!(self.same_shape(rhs));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Field { grid: self.grid, rank: self.rank, data }
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        debug_assert!(self.same_shape(rhs));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Field { grid: self.grid, rank: self.rank, data }
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scaled(rhs)
    }
}

/// Lower/upper pair: the two fluid slabs, or the two Γc planes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pair<T> {
    pub lower: T,
    pub upper: T,
}

impl<T> Pair<T> {
    pub fn new(lower: T, upper: T) -> Self {
        Pair { lower, upper }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Pair<U> {
        Pair { lower: f(&self.lower), upper: f(&self.upper) }
    }

    pub fn try_map<U>(&self, mut f: impl FnMut(&T) -> Result<U>) -> Result<Pair<U>> {
        Ok(Pair { lower: f(&self.lower)?, upper: f(&self.upper)? })
    }

    pub fn zip_with<U, V>(&self, other: &Pair<U>, mut f: impl FnMut(&T, &U) -> V) -> Pair<V> {
        Pair { lower: f(&self.lower, &other.lower), upper: f(&self.upper, &other.upper) }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        [&self.lower, &self.upper].into_iter()
    }

    pub fn as_array(&self) -> [&T; 2] {
        [&self.lower, &self.upper]
    }
}

/// Uniformly sampled time series `t = 0, dt, …, (n-1) dt` of fields sharing
/// one grid and rank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeTrack {
    pub dt: f64,
    pub samples: Vec<Field>,
}

impl TimeTrack {
    pub fn new(dt: f64, samples: Vec<Field>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(FsiError::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        if samples.len() < 2 {
            return Err(FsiError::Shape(format!("a time track needs at least 2 samples, got {}", samples.len())));
        }
        for s in &samples[1..] {
            samples[0].check_shape(s)?;
        }
        Ok(TimeTrack { dt, samples })
    }

    /// `steps + 1` copies of `field`.
    pub fn constant(field: &Field, dt: f64, steps: usize) -> Result<Self> {
        TimeTrack::new(dt, vec![field.clone(); steps + 1])
    }

    pub fn from_fn(dt: f64, steps: usize, f: impl Fn(f64) -> Field) -> Result<Self> {
        TimeTrack::new(dt, (0..=steps).map(|n| f(n as f64 * dt)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.dt * n as f64
    }

    pub fn grid(&self) -> SlabGrid {
        self.samples[0].grid
    }

    pub fn rank(&self) -> Rank {
        self.samples[0].rank
    }

    pub fn first(&self) -> &Field {
        &self.samples[0]
    }

    pub fn last(&self) -> &Field {
        self.samples.last().expect("non-empty track")
    }

    pub fn check_compatible(&self, other: &TimeTrack) -> Result<()> {
        if self.len() != other.len() || (self.dt - other.dt).abs() > 1e-14 * self.dt {
            return Err(FsiError::Shape(format!(
                "tracks differ in resolution: {} samples @ {} vs {} samples @ {}",
                self.len(),
                self.dt,
                other.len(),
                other.dt
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(&Field) -> Field) -> TimeTrack {
        TimeTrack { dt: self.dt, samples: self.samples.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&Field) -> Result<Field>) -> Result<TimeTrack> {
        Ok(TimeTrack { dt: self.dt, samples: self.samples.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn zip_map(&self, other: &TimeTrack, f: impl Fn(&Field, &Field) -> Field) -> Result<TimeTrack> {
        self.check_compatible(other)?;
        Ok(TimeTrack {
            dt: self.dt,
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &TimeTrack) -> Result<TimeTrack> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &TimeTrack) -> Result<TimeTrack> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn scaled(&self, a: f64) -> TimeTrack {
        self.map(|f| f.scaled(a))
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(Field::max_abs).fold(0.0, f64::max)
    }

    /// Cumulative trapezoidal integral `∫₀ᵗ` sampled at the track times; the
    /// first sample is exactly zero.
    pub fn cumulative_integral(&self) -> TimeTrack {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = Field::zeros(self.grid(), self.rank());
        out.push(acc.clone());
        for w in self.samples.windows(2) {
            for ((a, x), y) in acc.data.iter_mut().zip(&w[0].data).zip(&w[1].data) {
                *a += 0.5 * self.dt * (x + y);
            }
            out.push(acc.clone());
        }
        TimeTrack { dt: self.dt, samples: out }
    }

    /// Linear interpolation at fractional sample position `s ∈ [0, steps]`.
    pub fn interpolate(&self, s: f64) -> Field {
        let n = self.steps();
        let i = (s.floor() as usize).min(n.saturating_sub(1));
        let w = s - i as f64;
        if w == 0.0 {
            return self.samples[i].clone();
        }
        let mut out = self.samples[i].scaled(1.0 - w);
        out.axpy(w, &self.samples[(i + 1).min(n)]);
        out
    }
}
