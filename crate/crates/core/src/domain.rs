//! Sampling grids: a periodic spatial torus times a geometric scale axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Slack used when rounding log-scale positions to grid indices.
pub(crate) const LOG_EPS: f64 = 1e-9;

/// Spatial torus [0, side)^d with `n_space` cells per axis, and scales
/// s_j = s_min * 2^{j / m_scale} for j in [0, n_scales).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    d: usize,
    side: f64,
    n_space: usize,
    s_min: f64,
    s_max: f64,
    m_scale: usize,
    n_scales: usize,
}

impl Domain {
    /// Grid whose scale samples start at `s_min` and stop at the last sample not above `s_max`.
    pub fn new(
        d: usize,
        side: f64,
        n_space: usize,
        s_min: f64,
        s_max: f64,
        m_scale: usize,
    ) -> Result<Self> {
        if !(s_min > 0.0 && s_max > s_min && s_max.is_finite()) {
            return Err(Error::Parameter(format!(
                "scale range must satisfy 0 < s_min < s_max, got [{s_min}, {s_max}]"
            )));
        }
        if m_scale == 0 {
            return Err(Error::Parameter("m_scale must be positive".into()));
        }
        let n_scales = ((m_scale as f64) * (s_max / s_min).log2() + LOG_EPS).floor() as usize + 1;
        Self::build(d, side, n_space, s_min, s_max, m_scale, n_scales)
    }

    /// Grid with an explicit number of scale samples.
    pub fn with_scales(
        d: usize,
        side: f64,
        n_space: usize,
        s_min: f64,
        m_scale: usize,
        n_scales: usize,
    ) -> Result<Self> {
        if m_scale == 0 || n_scales < 2 {
            return Err(Error::Parameter("need m_scale >= 1 and n_scales >= 2".into()));
        }
        let s_max = s_min * 2f64.powf((n_scales - 1) as f64 / m_scale as f64);
        Self::build(d, side, n_space, s_min, s_max, m_scale, n_scales)
    }

    /// Reassembles a grid from stored header values; `s_max` must agree with the sample count.
    pub(crate) fn from_parts(
        d: usize,
        side: f64,
        n_space: usize,
        s_min: f64,
        s_max: f64,
        m_scale: usize,
        n_scales: usize,
    ) -> Result<Self> {
        if !(s_min > 0.0 && s_max >= s_min && s_max.is_finite()) || m_scale == 0 || n_scales == 0 {
            return Err(Error::Format(format!(
                "inconsistent scale header: s_min {s_min}, s_max {s_max}, m {m_scale}, n {n_scales}"
            )));
        }
        let last = s_min * 2f64.powf((n_scales - 1) as f64 / m_scale as f64);
        if last > s_max * (1.0 + 1e-9) {
            return Err(Error::Format(format!("{n_scales} scales from {s_min} overshoot s_max {s_max}")));
        }
        Self::build(d, side, n_space, s_min, s_max, m_scale, n_scales)
    }

    /// Grid aligned with Whitney generations: `octaves` full boxes (2^{k-1}, 2^k] for
    /// k = k_low, ..., k_low + octaves - 1, each holding exactly `m_scale` log-cells.
    /// The spatial side is 2^{k_side}.
    pub fn aligned(
        d: usize,
        k_side: i32,
        n_space: usize,
        k_low: i32,
        octaves: usize,
        m_scale: usize,
    ) -> Result<Self> {
        if octaves == 0 || m_scale == 0 {
            return Err(Error::Parameter("need octaves >= 1 and m_scale >= 1".into()));
        }
        let s_min = 2f64.powf(k_low as f64 - 1.0 + 0.5 / m_scale as f64);
        Self::with_scales(d, 2f64.powi(k_side), n_space, s_min, m_scale, octaves * m_scale)
    }

    fn build(
        d: usize,
        side: f64,
        n_space: usize,
        s_min: f64,
        s_max: f64,
        m_scale: usize,
        n_scales: usize,
    ) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(Error::Parameter(format!("dimension must be 1, 2 or 3, got {d}")));
        }
        if !(side > 0.0 && side.is_finite()) || n_space == 0 {
            return Err(Error::Parameter("need side > 0 and n_space >= 1".into()));
        }
        if s_max > side * (1.0 + LOG_EPS) {
            return Err(Error::Geometry(format!("s_max = {s_max} exceeds the torus side {side}")));
        }
        Ok(Domain { d, side, n_space, s_min, s_max, m_scale, n_scales })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn side(&self) -> f64 {
        self.side
    }
    pub fn n_space(&self) -> usize {
        self.n_space
    }
    pub fn s_min(&self) -> f64 {
        self.s_min
    }
    pub fn s_max(&self) -> f64 {
        self.s_max
    }
    pub fn m_scale(&self) -> usize {
        self.m_scale
    }
    pub fn n_scales(&self) -> usize {
        self.n_scales
    }

    /// Spatial step h.
    pub fn h(&self) -> f64 {
        self.side / self.n_space as f64
    }

    /// Number of spatial cells, n_space^d.
    pub fn cells(&self) -> usize {
        self.n_space.pow(self.d as u32)
    }

    /// Cell measure h^d.
    pub fn cell_measure(&self) -> f64 {
        self.h().powi(self.d as i32)
    }

    /// Torus measure side^d.
    pub fn volume(&self) -> f64 {
        self.side.powi(self.d as i32)
    }

    /// Uniform step in log s: ln 2 / m.
    pub fn log_step(&self) -> f64 {
        std::f64::consts::LN_2 / self.m_scale as f64
    }

    /// s_j on the bi-infinite extension of the geometric grid.
    pub fn scale(&self, j: i64) -> f64 {
        self.s_min * 2f64.powf(j as f64 / self.m_scale as f64)
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..self.n_scales as i64).map(|j| self.scale(j)).collect()
    }

    /// Log-cell of sample j: [s_j 2^{-1/(2m)}, s_j 2^{1/(2m)}).
    pub fn scale_cell(&self, j: i64) -> (f64, f64) {
        let half = 2f64.powf(0.5 / self.m_scale as f64);
        let s = self.scale(j);
        (s / half, s * half)
    }

    /// Extended indices j with s_j in (lo, hi], as an inclusive range (may be empty).
    pub fn scale_window(&self, lo: f64, hi: f64) -> (i64, i64) {
        let m = self.m_scale as f64;
        let a = (m * (lo / self.s_min).log2() + LOG_EPS).floor() as i64 + 1;
        let b = (m * (hi / self.s_min).log2() + LOG_EPS).floor() as i64;
        (a, b)
    }

    /// Whitney generation k of a scale: s in (2^{k-1}, 2^k].
    pub fn generation_of_scale(s: f64) -> i32 {
        (s.log2() - LOG_EPS).ceil() as i32
    }

    /// Generations (k_cell, k_side) with h = 2^{k_cell} and side = 2^{k_side}, if both are dyadic.
    pub fn dyadic_levels(&self) -> Result<(i32, i32)> {
        let ks = exact_log2(self.side)
            .ok_or_else(|| Error::Geometry(format!("side {} is not a power of two", self.side)))?;
        let kc = exact_log2(self.h()).ok_or_else(|| {
            Error::Geometry(format!("n_space {} is not a power of two", self.n_space))
        })?;
        Ok((kc, ks))
    }

    /// Whitney generations that hold at least one scale sample.
    pub fn data_generations(&self) -> (i32, i32) {
        (
            Self::generation_of_scale(self.scale(0)),
            Self::generation_of_scale(self.scale(self.n_scales as i64 - 1)),
        )
    }

    /// Same spatial grid (dimension, side, resolution).
    pub fn same_space(&self, other: &Domain) -> bool {
        self.d == other.d && self.n_space == other.n_space && self.side == other.side
    }

    /// Copy with a different spatial resolution.
    pub fn with_n_space(&self, n_space: usize) -> Result<Domain> {
        Self::build(self.d, self.side, n_space, self.s_min, self.s_max, self.m_scale, self.n_scales)
    }

    /// Row-major strides, axis 0 slowest.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.d];
        for a in (0..self.d.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.n_space;
        }
        s
    }

    pub fn linear_index(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.d {
            return Err(Error::Range(format!("expected {} coordinates, got {}", self.d, x.len())));
        }
        let mut lin = 0usize;
        for &c in x {
            if c >= self.n_space {
                return Err(Error::Range(format!(
                    "spatial index {c} out of range 0..{}",
                    self.n_space
                )));
            }
            lin = lin * self.n_space + c;
        }
        Ok(lin)
    }

    pub fn multi_index(&self, mut lin: usize) -> Vec<usize> {
        let mut x = vec![0usize; self.d];
        for a in (0..self.d).rev() {
            x[a] = lin % self.n_space;
            lin /= self.n_space;
        }
        x
    }

    /// Cell centre (i + 1/2) h per axis.
    pub fn cell_center(&self, lin: usize) -> Vec<f64> {
        let h = self.h();
        self.multi_index(lin).into_iter().map(|i| (i as f64 + 0.5) * h).collect()
    }
}

pub(crate) fn exact_log2(x: f64) -> Option<i32> {
    if !(x > 0.0 && x.is_finite()) {
        return None;
    }
    let k = x.log2().round() as i32;
    (2f64.powi(k) == x).then_some(k)
}

/// Cells whose centres lie at min-image distance < radius from a given centre.
#[derive(Clone, Debug)]
pub struct Ball {
    d: usize,
    n: usize,
    offsets: Vec<i64>,
    count: usize,
}

impl Ball {
    /// Rejects radius > side/2.
    pub fn new(domain: &Domain, radius: f64) -> Result<Self> {
        if radius > domain.side() / 2.0 * (1.0 + LOG_EPS) {
            return Err(Error::Geometry(format!(
                "ball radius {radius} exceeds half the torus side {}",
                domain.side() / 2.0
            )));
        }
        Ok(Self::unchecked(domain, radius))
    }

    pub(crate) fn unchecked(domain: &Domain, radius: f64) -> Self {
        let d = domain.d();
        let n = domain.n_space();
        let h = domain.h();
        let r2 = radius * radius;
        // |k| < n/2 per axis keeps every cell at most once.
        let kmax = ((radius / h).floor() as i64).min(((n as i64) - 1) / 2);
        let span = 2 * kmax + 1;
        let mut offsets = Vec::new();
        let total = (span as usize).pow(d as u32);
        let mut k = vec![0i64; d];
        for idx in 0..total {
            let mut rem = idx as i64;
            let mut dist2 = 0.0;
            for a in (0..d).rev() {
                k[a] = rem % span - kmax;
                rem /= span;
                let dx = k[a] as f64 * h;
                dist2 += dx * dx;
            }
            if dist2 < r2 {
                offsets.extend_from_slice(&k);
            }
        }
        let count = offsets.len() / d.max(1);
        Ball { d, n, offsets, count }
    }

    /// Number of cells in the ball (at least 1 for positive radius).
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    fn coords(&self, mut lin: usize, out: &mut [i64; 3]) {
        for a in (0..self.d).rev() {
            out[a] = (lin % self.n) as i64;
            lin /= self.n;
        }
    }

    /// Calls `f` with the linear index of every cell of the ball centred at cell `x`.
    #[inline]
    pub fn for_each(&self, x: usize, mut f: impl FnMut(usize)) {
        let n = self.n as i64;
        if self.d == 1 {
            let c = x as i64;
            for &o in &self.offsets {
                f((c + o).rem_euclid(n) as usize);
            }
            return;
        }
        let mut c = [0i64; 3];
        self.coords(x, &mut c);
        for off in self.offsets.chunks_exact(self.d) {
            let mut lin = 0i64;
            for a in 0..self.d {
                lin = lin * n + (c[a] + off[a]).rem_euclid(n);
            }
            f(lin as usize);
        }
    }

    pub fn sum_at<T: Real>(&self, values: &[T], x: usize) -> T {
        let mut s = T::zero();
        self.for_each(x, |y| s = s + values[y]);
        s
    }

    pub fn max_at<T: Real>(&self, values: &[T], x: usize) -> T {
        let mut m = T::zero();
        self.for_each(x, |y| m = m.max(values[y]));
        m
    }
}
