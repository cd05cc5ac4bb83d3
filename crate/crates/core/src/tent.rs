//! Continuous tent, Z, endpoint and related norms.
//!
//! Every norm is built from a table of Whitney averages A(t_i, x) over the extended
//! t-grid (see [`crate::quadrature`]). The dt/t integral is the sum over that grid with
//! weight ln 2 / m; suprema over (t, x) are maxima over grid points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Ball, Domain};
use crate::error::{Error, Result};
use crate::exponent::{Exponent, ExponentTuple};
use crate::field::HalfSpaceField;
use crate::quadrature::{average_table, powered_samples, AverageSpec, AverageTable};
use crate::scalar::{compensated_sum, powr, Accumulator, Real};

/// Which functional produced a [`NormResult`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormVariant {
    Tent,
    Z,
    TentInfAlpha { alpha: f64 },
    ChangeOfAngle { lambda: f64 },
    JohnNirenberg { alpha: f64 },
    Whitney { a: f64, b: f64, c: f64 },
    Dyadic,
    DyadicSubset { epsilon: f64 },
}

/// Range of the outer t variable actually summed or maximized over.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TRange {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult<T = f64> {
    pub value: T,
    pub exponents: ExponentTuple,
    pub variant: NormVariant,
    pub domain: Domain,
    pub t_range: TRange,
}

/// Whitney averages of one field for fixed (r, beta, window), reusable across (p, q).
#[derive(Clone, Debug)]
pub struct WhitneyAverages<T> {
    domain: Domain,
    r: Exponent,
    beta: f64,
    variant: NormVariant,
    table: AverageTable<T>,
}

impl<T: Real> WhitneyAverages<T> {
    pub fn new(f: &HalfSpaceField<T>, r: Exponent, beta: f64, spec: &AverageSpec) -> Result<Self> {
        check_beta(beta)?;
        let table = average_table(f, r, spec, beta, 1.0)?;
        let variant = if *spec == AverageSpec::STANDARD {
            NormVariant::Tent
        } else {
            NormVariant::Whitney { a: spec.a, b: spec.b, c: spec.c }
        };
        Ok(WhitneyAverages { domain: f.domain().clone(), r, beta, variant, table })
    }

    /// Averages over (t/2, t] x B(x, lambda t), normalized by the cell count of B(x, t).
    pub fn dilated(f: &HalfSpaceField<T>, r: Exponent, beta: f64, lambda: f64) -> Result<Self> {
        check_beta(beta)?;
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("change of angle needs lambda >= 1, got {lambda}")));
        }
        let table = average_table(f, r, &AverageSpec::STANDARD, beta, lambda)?;
        Ok(WhitneyAverages {
            domain: f.domain().clone(),
            r,
            beta,
            variant: NormVariant::ChangeOfAngle { lambda },
            table,
        })
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.table.grid.t
    }

    /// A(t_i, x) for all x.
    pub fn at(&self, i: usize) -> &[T] {
        &self.table.values[i]
    }

    fn t_range(&self) -> TRange {
        let t = &self.table.grid.t;
        TRange { t_min: t[0], t_max: t[t.len() - 1], count: t.len() }
    }

    fn result(&self, value: T, p: Exponent, q: Exponent, variant: NormVariant) -> NormResult<T> {
        NormResult {
            value,
            exponents: ExponentTuple { p, q, r: self.r, beta: self.beta },
            variant,
            domain: self.domain.clone(),
            t_range: self.t_range(),
        }
    }

    fn dlog(&self) -> T {
        T::lit(self.domain.log_step())
    }

    /// Tent norm in x of the dt/t-integrated averages.
    pub fn tent(&self, p: Exponent, q: Exponent) -> Result<NormResult<T>> {
        p.validate()?;
        q.validate()?;
        let value = match p {
            Exponent::Finite(pv) => self.tent_finite_p(pv, q),
            Exponent::Infinite => match q {
                Exponent::Finite(qv) => self.carleson(qv, qv)?,
                Exponent::Infinite => self.table.values.iter().flatten().fold(T::zero(), |m, v| m.max(*v)),
            },
        };
        Ok(self.result(value, p, q, self.variant))
    }

    fn tent_finite_p(&self, p: f64, q: Exponent) -> T {
        let n = self.domain.cells();
        let vals = &self.table.values;
        let dlog = self.dlog();
        let pt = T::lit(p);
        let per_x: Vec<T> = (0..n)
            .into_par_iter()
            .map(|x| match q {
                Exponent::Finite(qv) => {
                    let qt = T::lit(qv);
                    let mut acc = Accumulator::new();
                    for row in vals {
                        acc.add(powr(row[x], qt));
                    }
                    powr(acc.value() * dlog, pt / qt)
                }
                Exponent::Infinite => powr(vals.iter().fold(T::zero(), |m, row| m.max(row[x])), pt),
            })
            .collect();
        let total = compensated_sum(per_x) * T::lit(self.domain.cell_measure());
        powr(total, pt.recip())
    }

    /// max over (k, y) of (mean over B(y, t_k) of C_k^{alpha/q})^{1/alpha}, C_k = sum_{i<=k} dlog A_i^q.
    fn carleson(&self, q: f64, alpha: f64) -> Result<T> {
        let n = self.domain.cells();
        let qt = T::lit(q);
        let expo = T::lit(alpha) / qt;
        let inv_alpha = T::lit(alpha).recip();
        let dlog = self.dlog();
        let mut cum = vec![Accumulator::<T>::new(); n];
        let mut best = T::zero();
        for (i, row) in self.table.values.iter().enumerate() {
            for (c, a) in cum.iter_mut().zip(row) {
                c.add(powr(*a, qt));
            }
            let ball = Ball::new(&self.domain, self.table.grid.t[i])?;
            let inv = T::lit(1.0 / ball.count() as f64);
            let powered: Vec<T> = cum.iter().map(|c| powr(c.value() * dlog, expo)).collect();
            let m = (0..n)
                .into_par_iter()
                .map(|y| ball.sum_at(&powered, y) * inv)
                .reduce(T::zero, |a, b| a.max(b));
            best = best.max(powr(m, inv_alpha));
        }
        Ok(best)
    }

    /// Endpoint norm with the outer ball average taken of the alpha/q power.
    pub fn jn(&self, q: Exponent, alpha: f64) -> Result<NormResult<T>> {
        q.validate()?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
        }
        let value = match q {
            Exponent::Finite(qv) => self.carleson(qv, alpha)?,
            Exponent::Infinite => self.carleson_sup(alpha)?,
        };
        Ok(self.result(value, Exponent::Infinite, q, NormVariant::JohnNirenberg { alpha }))
    }

    fn carleson_sup(&self, alpha: f64) -> Result<T> {
        let n = self.domain.cells();
        let at = T::lit(alpha);
        let mut run = vec![T::zero(); n];
        let mut best = T::zero();
        for (i, row) in self.table.values.iter().enumerate() {
            for (c, a) in run.iter_mut().zip(row) {
                *c = c.max(*a);
            }
            let ball = Ball::new(&self.domain, self.table.grid.t[i])?;
            let inv = T::lit(1.0 / ball.count() as f64);
            let powered: Vec<T> = run.iter().map(|c| powr(*c, at)).collect();
            let m = (0..n)
                .into_par_iter()
                .map(|y| ball.sum_at(&powered, y) * inv)
                .reduce(T::zero, |a, b| a.max(b));
            best = best.max(powr(m, at.recip()));
        }
        Ok(best)
    }

    /// (sum_i dlog ||A(t_i, .)||_p^q)^{1/q}.
    pub fn z(&self, p: Exponent, q: Exponent) -> Result<NormResult<T>> {
        p.validate()?;
        q.validate()?;
        let h = T::lit(self.domain.cell_measure());
        let slices: Vec<T> = self
            .table
            .values
            .par_iter()
            .map(|row| match p {
                Exponent::Finite(pv) => {
                    let pt = T::lit(pv);
                    compensated_sum(row.iter().map(|a| powr(*a, pt))) * h
                }
                Exponent::Infinite => row.iter().fold(T::zero(), |m, a| m.max(*a)),
            })
            .collect();
        // slices hold ||A_i||_p^p for finite p, ||A_i||_inf otherwise
        let norm_pow = |s: T, e: T| match p {
            Exponent::Finite(pv) => powr(s, e / T::lit(pv)),
            Exponent::Infinite => powr(s, e),
        };
        let value = match q {
            Exponent::Finite(qv) => {
                let qt = T::lit(qv);
                let s = compensated_sum(slices.iter().map(|s| norm_pow(*s, qt))) * self.dlog();
                powr(s, qt.recip())
            }
            Exponent::Infinite => slices.iter().fold(T::zero(), |m, s| m.max(norm_pow(*s, T::one()))),
        };
        let variant = if self.variant == NormVariant::Tent { NormVariant::Z } else { self.variant };
        Ok(self.result(value, p, q, variant))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("beta must be finite, got {beta}")))
    }
}

pub fn tent_norm<T: Real>(f: &HalfSpaceField<T>, e: &ExponentTuple, spec: &AverageSpec) -> Result<NormResult<T>> {
    e.validate()?;
    WhitneyAverages::new(f, e.r, e.beta, spec)?.tent(e.p, e.q)
}

pub fn z_norm<T: Real>(f: &HalfSpaceField<T>, e: &ExponentTuple, spec: &AverageSpec) -> Result<NormResult<T>> {
    e.validate()?;
    WhitneyAverages::new(f, e.r, e.beta, spec)?.z(e.p, e.q)
}

/// Tent norm with the inner ball B(x, t) replaced by B(x, lambda t).
pub fn change_of_angle_norm<T: Real>(f: &HalfSpaceField<T>, e: &ExponentTuple, lambda: f64) -> Result<NormResult<T>> {
    e.validate()?;
    WhitneyAverages::dilated(f, e.r, e.beta, lambda)?.tent(e.p, e.q)
}

pub fn jn_norm<T: Real>(f: &HalfSpaceField<T>, e: &ExponentTuple, alpha: f64) -> Result<NormResult<T>> {
    e.validate()?;
    if !e.p.is_infinite() {
        return Err(Error::Parameter(format!("John-Nirenberg norm needs p = inf, got p = {}", e.p)));
    }
    WhitneyAverages::new(f, e.r, e.beta, &AverageSpec::STANDARD)?.jn(e.q, alpha)
}

/// sup over data scales t_k and cells x of t_k^{-alpha} (sum_{j<=k} dlog mean_{B(x,t_k)} |s_j^{-beta} f|^q)^{1/q}.
pub fn beyond_infinity_norm<T: Real>(
    f: &HalfSpaceField<T>,
    q: Exponent,
    beta: f64,
    alpha: f64,
) -> Result<NormResult<T>> {
    q.validate()?;
    check_beta(beta)?;
    if !alpha.is_finite() {
        return Err(Error::Parameter(format!("alpha must be finite, got {alpha}")));
    }
    let dom = f.domain();
    let n = dom.cells();
    let ns = dom.n_scales();
    let powered = powered_samples(f, q, beta);
    let dlog = T::lit(dom.log_step());
    let mut cum = vec![Accumulator::<T>::new(); n];
    let mut run = vec![T::zero(); n];
    let mut best = T::zero();
    for k in 0..ns {
        let row = &powered[k * n..(k + 1) * n];
        let t = dom.scale(k as i64);
        let ball = Ball::new(dom, t)?;
        let weight = T::lit(t.powf(-alpha));
        let v = match q {
            Exponent::Finite(qv) => {
                for (c, v) in cum.iter_mut().zip(row) {
                    c.add(*v);
                }
                let vals: Vec<T> = cum.iter().map(|c| c.value() * dlog).collect();
                let inv = T::lit(1.0 / ball.count() as f64);
                let m = (0..n)
                    .into_par_iter()
                    .map(|x| ball.sum_at(&vals, x) * inv)
                    .reduce(T::zero, |a, b| a.max(b));
                powr(m, T::lit(1.0 / qv))
            }
            Exponent::Infinite => {
                for (c, v) in run.iter_mut().zip(row) {
                    *c = c.max(*v);
                }
                (0..n)
                    .into_par_iter()
                    .map(|x| ball.max_at(&run, x))
                    .reduce(T::zero, |a, b| a.max(b))
            }
        };
        best = best.max(v * weight);
    }
    Ok(NormResult {
        value: best,
        exponents: ExponentTuple { p: Exponent::Infinite, q, r: q, beta },
        variant: NormVariant::TentInfAlpha { alpha },
        domain: dom.clone(),
        t_range: TRange { t_min: dom.s_min(), t_max: dom.s_max(), count: ns },
    })
}

/// Discrete dy ds/s pairing of |f| and |g|.
pub fn duality_pairing<T: Real>(f: &HalfSpaceField<T>, g: &HalfSpaceField<T>) -> Result<T> {
    if f.domain() != g.domain() {
        return Err(Error::Parameter("pairing needs fields on the same domain".into()));
    }
    let dom = f.domain();
    let a = f.magnitudes();
    let b = g.magnitudes();
    let s = compensated_sum(a.iter().zip(&b).map(|(x, y)| *x * *y));
    Ok(s * T::lit(dom.cell_measure() * dom.log_step()))
}
