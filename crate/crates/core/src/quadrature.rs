//! Power means, Whitney averages, spatial L^p norms and decreasing rearrangements.
//!
//! Scale integrals use midpoint weights on the geometric grid: the ds-measure of
//! log-cell j is proportional to s_j, so ds/s-weights are uniform (ln 2 / m).
//! Samples on the extended grid outside [0, n_scales) are zero but keep their
//! weight in window normalizations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Ball, Domain};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::HalfSpaceField;
use crate::scalar::{powr, Accumulator, Real};

/// Scale window (a t, b t] and spatial radius c t of a Whitney average.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for AverageSpec {
    fn default() -> Self {
        AverageSpec::STANDARD
    }
}

impl AverageSpec {
    /// (t/2, t] x B(x, t).
    pub const STANDARD: AverageSpec = AverageSpec { a: 0.5, b: 1.0, c: 1.0 };

    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let s = AverageSpec { a, b, c };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > self.a && self.c > 0.0 && self.b.is_finite() && self.c.is_finite()) {
            return Err(Error::Parameter(format!(
                "average spec needs 0 < a < b and c > 0, got ({}, {}, {})",
                self.a, self.b, self.c
            )));
        }
        Ok(())
    }
}

/// (sum w_i s_i^rho / sum w_i)^{1/rho}; the maximum over positively weighted samples for rho = inf.
pub fn power_mean<T: Real>(samples: &[T], weights: &[T], rho: Exponent) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::EmptyDomain("power mean of no samples".into()));
    }
    if samples.len() != weights.len() {
        return Err(Error::Parameter(format!(
            "{} samples but {} weights",
            samples.len(),
            weights.len()
        )));
    }
    rho.validate()?;
    if weights.iter().any(|w| !(*w >= T::zero())) || samples.iter().any(|s| !(*s >= T::zero())) {
        return Err(Error::Parameter("samples and weights must be nonnegative".into()));
    }
    let total = crate::scalar::compensated_sum(weights.iter().copied());
    if total <= T::zero() {
        return Err(Error::Parameter("weights sum to zero".into()));
    }
    match rho {
        Exponent::Infinite => Ok(samples
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w > T::zero())
            .fold(T::zero(), |m, (s, _)| m.max(*s))),
        Exponent::Finite(r) => {
            let r = T::lit(r);
            let mut acc = Accumulator::new();
            for (s, w) in samples.iter().zip(weights) {
                acc.add(*w * powr(*s, r));
            }
            Ok(powr(acc.value() / total, r.recip()))
        }
    }
}

/// (sum_x g(x)^p h^d)^{1/p}, or max g for p = inf.
pub fn lp_norm_spatial<T: Real>(g: &[T], cell_measure: T, p: Exponent) -> T {
    match p {
        Exponent::Infinite => g.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        Exponent::Finite(p) => {
            let p = T::lit(p);
            let mut acc = Accumulator::new();
            for v in g {
                acc.add(powr(v.abs(), p));
            }
            powr(acc.value() * cell_measure, p.recip())
        }
    }
}

/// Nonincreasing step function on (0, total measure].
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<T> {
    heights: Vec<T>,
    widths: Vec<T>,
}

impl<T: Real> StepFunction<T> {
    pub fn heights(&self) -> &[T] {
        &self.heights
    }

    pub fn widths(&self) -> &[T] {
        &self.widths
    }

    pub fn total_measure(&self) -> T {
        crate::scalar::compensated_sum(self.widths.iter().copied())
    }

    /// g*(u) for u in (0, total]; 0 beyond.
    pub fn eval(&self, u: T) -> T {
        let mut edge = T::zero();
        for (h, w) in self.heights.iter().zip(&self.widths) {
            edge = edge + *w;
            if u <= edge {
                return *h;
            }
        }
        T::zero()
    }

    /// int_0^u g*(v)^p dv.
    pub fn integral_pow(&self, u: T, p: T) -> T {
        let mut acc = Accumulator::new();
        let mut left = u;
        for (h, w) in self.heights.iter().zip(&self.widths) {
            if left <= T::zero() {
                break;
            }
            let take = left.min(*w);
            acc.add(powr(*h, p) * take);
            left = left - take;
        }
        acc.value()
    }

    pub fn lp_norm(&self, p: Exponent) -> T {
        match p {
            Exponent::Infinite => self.heights.first().copied().unwrap_or_else(T::zero),
            Exponent::Finite(p) => {
                let p = T::lit(p);
                let mut acc = Accumulator::new();
                for (h, w) in self.heights.iter().zip(&self.widths) {
                    acc.add(powr(*h, p) * *w);
                }
                powr(acc.value(), p.recip())
            }
        }
    }
}

/// Equimeasurable nonincreasing rearrangement of a grid function with equal cell measures.
pub fn decreasing_rearrangement<T: Real>(g: &[T], cell_measure: T) -> StepFunction<T> {
    let mut v: Vec<T> = g.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut heights = Vec::new();
    let mut widths: Vec<T> = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        heights.push(v[i]);
        widths.push(T::lit((j - i) as f64) * cell_measure);
        i = j;
    }
    StepFunction { heights, widths }
}

/// Whitney average of |s^{-beta} F| at cell `x` and scale `t`: the rho-power mean over
/// grid cells with s in (a t, b t] and centre within distance c t, weighted by ds dy.
pub fn whitney_average<T: Real>(
    field: &HalfSpaceField<T>,
    x: &[usize],
    t: f64,
    rho: Exponent,
    spec: &AverageSpec,
    beta: f64,
) -> Result<T> {
    spec.validate()?;
    rho.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("scale t must be positive, got {t}")));
    }
    let dom = field.domain();
    let xl = dom.linear_index(x)?;
    let ball = Ball::new(dom, spec.c * t)?;
    let (jlo, jhi) = dom.scale_window(spec.a * t, spec.b * t);
    let ns = dom.n_scales() as i64;
    if jlo > jhi || jhi < 0 || jlo >= ns {
        return Err(Error::EmptyDomain(format!(
            "window ({}, {}] holds no scale sample of the grid",
            spec.a * t,
            spec.b * t
        )));
    }
    let cells = dom.cells();
    let mut samples = Vec::new();
    let mut weights = Vec::new();
    for j in jlo..=jhi {
        let s = dom.scale(j);
        let w = T::lit(s);
        let damp = T::lit(s.powf(-beta));
        ball.for_each(xl, |y| {
            let v = if (0..ns).contains(&j) {
                field.samples().magnitude(j as usize * cells + y) * damp
            } else {
                T::zero()
            };
            samples.push(v);
            weights.push(w);
        });
    }
    power_mean(&samples, &weights, rho)
}

/// Extended t-grid t_i = s_min 2^{i/m} over every i whose window (a t_i, b t_i] meets a data sample.
#[derive(Clone, Debug)]
pub(crate) struct TGrid {
    pub t: Vec<f64>,
    /// Scale index i of each t_i.
    #[cfg_attr(not(test), allow(dead_code))]
    pub index: Vec<i64>,
    /// Extended sample range (inclusive) of each window.
    pub window: Vec<(i64, i64)>,
}

impl TGrid {
    pub fn new(dom: &Domain, spec: &AverageSpec) -> Result<Self> {
        spec.validate()?;
        let m = dom.m_scale() as f64;
        let ns = dom.n_scales() as i64;
        // j - i ranges over (m log2 a, m log2 b]
        let dlo = (m * spec.a.log2() + crate::domain::LOG_EPS).floor() as i64 + 1;
        let dhi = (m * spec.b.log2() + crate::domain::LOG_EPS).floor() as i64;
        if dlo > dhi {
            return Err(Error::EmptyDomain(format!(
                "window ({}, {}] is narrower than the scale step",
                spec.a, spec.b
            )));
        }
        let mut t = Vec::new();
        let mut index = Vec::new();
        let mut window = Vec::new();
        for i in (-dhi)..(ns - dlo) {
            let (lo, hi) = (i + dlo, i + dhi);
            if hi >= 0 && lo < ns {
                t.push(dom.scale(i));
                index.push(i);
                window.push((lo, hi));
            }
        }
        Ok(TGrid { t, index, window })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }
}

/// Per-scale pointwise data |s_j^{-beta} F(s_j, y)|^rho (or the plain magnitude for rho = inf).
pub(crate) fn powered_samples<T: Real>(field: &HalfSpaceField<T>, rho: Exponent, beta: f64) -> Vec<T> {
    let dom = field.domain();
    let cells = dom.cells();
    let mags = field.magnitudes();
    let r = rho.finite().map(T::lit);
    mags.par_chunks(cells)
        .enumerate()
        .flat_map_iter(|(j, row)| {
            let damp = T::lit(dom.scale(j as i64).powf(-beta));
            row.iter().map(move |&v| {
                let u = v * damp;
                match r {
                    Some(r) => powr(u, r),
                    None => u,
                }
            })
        })
        .collect()
}

/// Window reduction: for each cell y, the ds-weighted mean over the window (virtual samples count
/// as zero) or the max for rho = inf.
pub(crate) fn window_reduce<T: Real>(
    dom: &Domain,
    powered: &[T],
    window: (i64, i64),
    rho_inf: bool,
) -> Vec<T> {
    let cells = dom.cells();
    let ns = dom.n_scales() as i64;
    let mut total = Accumulator::new();
    for j in window.0..=window.1 {
        total.add(T::lit(dom.scale(j)));
    }
    let total = total.value();
    let mut out = vec![T::zero(); cells];
    for j in window.0.max(0)..=window.1.min(ns - 1) {
        let row = &powered[j as usize * cells..(j as usize + 1) * cells];
        if rho_inf {
            for (o, v) in out.iter_mut().zip(row) {
                *o = o.max(*v);
            }
        } else {
            let w = T::lit(dom.scale(j)) / total;
            for (o, v) in out.iter_mut().zip(row) {
                *o = *o + w * *v;
            }
        }
    }
    out
}

/// Ball mean (sum / `norm_count`) or ball max of a cell function, for every centre.
pub(crate) fn ball_reduce<T: Real>(ball: &Ball, values: &[T], weight: f64, max: bool) -> Vec<T> {
    let inv = T::lit(weight);
    (0..values.len())
        .into_par_iter()
        .map(|x| if max { ball.max_at(values, x) } else { ball.sum_at(values, x) * inv })
        .collect()
}

/// Whitney averages A(t_i, x) on the extended t-grid.
#[derive(Clone, Debug)]
pub(crate) struct AverageTable<T> {
    pub grid: TGrid,
    /// values[i][x]
    pub values: Vec<Vec<T>>,
}

/// Builds A(t_i, x) = (mean over (a t_i, b t_i] x B(x, lambda c t_i) of |s^{-beta}F|^rho)^{1/rho},
/// times lambda^d, the exact volume ratio |B(x, lambda c t)| / |B(x, c t)|. `dilation` = 1
/// gives the plain Whitney average.
pub(crate) fn average_table<T: Real>(
    field: &HalfSpaceField<T>,
    rho: Exponent,
    spec: &AverageSpec,
    beta: f64,
    dilation: f64,
) -> Result<AverageTable<T>> {
    rho.validate()?;
    let dom = field.domain();
    let grid = TGrid::new(dom, spec)?;
    let powered = powered_samples(field, rho, beta);
    let rho_inf = rho.is_infinite();
    let inv = rho.finite().map(|r| T::lit(1.0 / r));
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let t = grid.t[i];
        let ball = Ball::new(dom, dilation * spec.c * t)?;
        let weight = dilation.powi(dom.d() as i32) / ball.count() as f64;
        let w = window_reduce(dom, &powered, grid.window[i], rho_inf);
        let mut a = ball_reduce(&ball, &w, weight, rho_inf);
        if let Some(inv) = inv {
            a.iter_mut().for_each(|v| *v = powr(*v, inv));
        }
        values.push(a);
    }
    Ok(AverageTable { grid, values })
}
