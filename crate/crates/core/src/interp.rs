//! K-, K_inf- and E-functionals and real interpolation norms.
//!
//! The L^{p0}/L^inf couple is handled exactly through decreasing rearrangements.
//! Tent couples have no closed form; [`SplitFamily`] collects explicit decompositions
//! f = f0 + f1 and evaluates K(t) as the best one, which bounds the true K from above.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::DyadicCube;
use crate::dyadic::{dyadic_tent_norm, median_field, LocalMeanField};
use crate::error::{Error, Result};
use crate::exponent::{Exponent, ExponentTuple};
use crate::field::HalfSpaceField;
use crate::quadrature::{decreasing_rearrangement, lp_norm_spatial, AverageSpec};
use crate::scalar::{powr, Accumulator, Real};
use crate::tent::tent_norm;

/// Points per decade of the default interpolation t-grid.
pub const T_PER_DECADE: usize = 16;
/// Half-width in decades of the default t-grid around the transition point.
pub const T_DECADES: f64 = 6.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoupleSpec {
    /// (L^{p0}, L^inf) on the spatial grid.
    LpPair { p0: f64 },
    /// (T^{p0,q,r}_beta, T^{inf,q,r}_beta), split along the median field.
    TentPair { e0: ExponentTuple },
    /// (T^{p,q0,r}_{beta0}, T^{p,q1,r}_{beta1}) with beta0 != beta1, split at a scale cutoff.
    ScalePair { e0: ExponentTuple, e1: ExponentTuple },
}

impl CoupleSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            CoupleSpec::LpPair { p0 } => Exponent::Finite(*p0).validate(),
            CoupleSpec::TentPair { e0 } => {
                e0.validate()?;
                if e0.p.is_infinite() {
                    return Err(Error::Parameter("the first tent couple member needs p0 < inf".into()));
                }
                Ok(())
            }
            CoupleSpec::ScalePair { e0, e1 } => {
                e0.validate()?;
                e1.validate()?;
                if e0.p != e1.p || e0.r != e1.r {
                    return Err(Error::Parameter("scale couple members must share p and r".into()));
                }
                if e0.beta == e1.beta {
                    return Err(Error::Parameter("scale couple needs beta0 != beta1".into()));
                }
                Ok(())
            }
        }
    }

    /// Exponents of the second member.
    pub fn e1(&self) -> Option<ExponentTuple> {
        match self {
            CoupleSpec::LpPair { .. } => None,
            CoupleSpec::TentPair { e0 } => Some(e0.with_p(Exponent::Infinite)),
            CoupleSpec::ScalePair { e1, .. } => Some(*e1),
        }
    }
}

/// One evaluation of K(t) from a split family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KValue<T> {
    pub value: T,
    /// ||f0||_0 and ||f1||_1 of the optimal split.
    pub parts: (T, T),
    /// Parameter (threshold or scale) of the optimal split.
    pub witness: f64,
    /// True when `value` only bounds the K-functional from above.
    pub upper_bound: bool,
}

/// Candidate decompositions f = f0 + f1, stored as (witness, ||f0||_0, ||f1||_1).
#[derive(Clone, Debug, PartialEq)]
pub struct SplitFamily<T> {
    splits: Vec<(f64, T, T)>,
    exact: bool,
}

impl<T: Real> SplitFamily<T> {
    pub fn new(splits: Vec<(f64, T, T)>, exact: bool) -> Result<Self> {
        if splits.is_empty() {
            return Err(Error::EmptyDomain("no candidate decompositions".into()));
        }
        Ok(SplitFamily { splits, exact })
    }

    pub fn splits(&self) -> &[(f64, T, T)] {
        &self.splits
    }

    fn best(&self, cost: impl Fn(T, T) -> T) -> KValue<T> {
        let mut best = self.splits[0];
        let mut best_cost = cost(best.1, best.2);
        for s in &self.splits[1..] {
            let c = cost(s.1, s.2);
            if c < best_cost {
                best = *s;
                best_cost = c;
            }
        }
        KValue { value: best_cost, parts: (best.1, best.2), witness: best.0, upper_bound: !self.exact }
    }

    /// min over splits of ||f0||_0 + t ||f1||_1.
    pub fn k(&self, t: f64) -> KValue<T> {
        let t = T::lit(t);
        self.best(|a, b| a + t * b)
    }

    /// min over splits of max(||f0||_0, t ||f1||_1).
    pub fn k_inf(&self, t: f64) -> KValue<T> {
        let t = T::lit(t);
        self.best(|a, b| a.max(t * b))
    }

    /// ||f||_0 / ||f||_1 estimated from the one-sided splits, the natural centre of a t-grid.
    pub fn transition(&self) -> f64 {
        let n0 = self.splits.iter().filter(|s| s.2 == T::zero()).map(|s| s.1).fold(T::zero(), |a, b| a.max(b));
        let n1 = self.splits.iter().filter(|s| s.1 == T::zero()).map(|s| s.2).fold(T::zero(), |a, b| a.max(b));
        let (n0, n1) = (n0.to_f64_lossy(), n1.to_f64_lossy());
        if n0 > 0.0 && n1 > 0.0 {
            n0 / n1
        } else {
            1.0
        }
    }
}

/// Holmstedt's formula (int_0^{t^{p0}} g*(u)^{p0} du)^{1/p0}, equivalent to K(t; L^{p0}, L^inf).
pub fn k_functional_lp<T: Real>(g: &[T], cell_measure: T, p0: f64, t: f64) -> T {
    let star = decreasing_rearrangement(g, cell_measure);
    let p = T::lit(p0);
    powr(star.integral_pow(T::lit(t.powf(p0)), p), p.recip())
}

/// E(t) = ||(g - t)_+||_{L^{p0}}, the distance from g to the L^inf ball of radius t.
pub fn e_functional_lp<T: Real>(g: &[T], cell_measure: T, p0: f64, t: f64) -> T {
    let tt = T::lit(t);
    let excess: Vec<T> = g.iter().map(|v| (v.abs() - tt).max(T::zero())).collect();
    lp_norm_spatial(&excess, cell_measure, Exponent::Finite(p0))
}

/// Exact K_inf(t; L^{p0}, L^inf): the level where E(lambda) meets t lambda, found by bisection.
pub fn k_inf_lp<T: Real>(g: &[T], cell_measure: T, p0: f64, t: f64) -> T {
    let top = g.iter().map(|v| v.abs()).fold(T::zero(), |a, b| a.max(b));
    if top == T::zero() {
        return T::zero();
    }
    let tt = T::lit(t);
    let (mut lo, mut hi) = (T::zero(), top);
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if e_functional_lp(g, cell_measure, p0, mid.to_f64_lossy()) > tt * mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let at = |l: T| e_functional_lp(g, cell_measure, p0, l.to_f64_lossy()).max(tt * l);
    at(lo).min(at(hi))
}

fn check_lm_couple(couple: &CoupleSpec) -> Result<ExponentTuple> {
    couple.validate()?;
    match couple {
        CoupleSpec::TentPair { e0 } => Ok(*e0),
        _ => Err(Error::Parameter("expected a tent_pair couple".into())),
    }
}

/// Splits along A_lambda^+ = {Q : |{x in Q : m(x) > lambda}| > |Q|/2} for every level lambda
/// of the median field m (c = 1/4), plus the two one-sided splits.
pub fn tent_splits<T: Real>(lm: &LocalMeanField<T>, couple: &CoupleSpec) -> Result<SplitFamily<T>> {
    let e0 = check_lm_couple(couple)?;
    let e1 = e0.with_p(Exponent::Infinite);
    let dom = lm.domain();
    let m = median_field(lm, &e0, 0.25)?;
    let (k_min, k_max) = lm.k_range();
    let cubes: Vec<(DyadicCube, Vec<usize>)> = (k_min..=k_max)
        .map(|k| DyadicCube::generation(dom, k))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .map(|c| {
            let cells = c.cells(dom)?;
            Ok((c, cells))
        })
        .collect::<Result<_>>()?;

    let mut levels: Vec<f64> = m.iter().map(|v| v.to_f64_lossy()).collect();
    levels.push(-1.0);
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    levels.dedup();

    let splits = levels
        .par_iter()
        .map(|&lambda| {
            let lt = T::lit(lambda);
            let plus: std::collections::HashSet<&DyadicCube> = cubes
                .iter()
                .filter(|(_, cells)| 2 * cells.iter().filter(|&&x| m[x] > lt).count() > cells.len())
                .map(|(c, _)| c)
                .collect();
            let f0 = LocalMeanField::from_fn(dom, lm.r(), k_min, k_max, |q| {
                if plus.contains(q) { lm.get(q) } else { T::zero() }
            })?;
            let f1 = LocalMeanField::from_fn(dom, lm.r(), k_min, k_max, |q| {
                if plus.contains(q) { T::zero() } else { lm.get(q) }
            })?;
            Ok((lambda, dyadic_tent_norm(&f0, &e0)?.value, dyadic_tent_norm(&f1, &e1)?.value))
        })
        .collect::<Result<Vec<_>>>()?;
    SplitFamily::new(splits, false)
}

/// Upper bound for K(t; T^{p0,q,r}_beta, T^{inf,q,r}_beta) with the witnessing threshold.
pub fn k_functional_tent<T: Real>(lm: &LocalMeanField<T>, couple: &CoupleSpec, t: f64) -> Result<KValue<T>> {
    Ok(tent_splits(lm, couple)?.k(t))
}

/// Splits f = f 1_{s <= s_j} + f 1_{s > s_j} at every grid scale, in both orientations.
pub fn scale_splits<T: Real>(f: &HalfSpaceField<T>, couple: &CoupleSpec, spec: &AverageSpec) -> Result<SplitFamily<T>> {
    couple.validate()?;
    let CoupleSpec::ScalePair { e0, e1 } = couple else {
        return Err(Error::Parameter("expected a scale_pair couple".into()));
    };
    let dom = f.domain();
    let ns = dom.n_scales();
    let norms = (0..=ns)
        .into_par_iter()
        .map(|cut| {
            let low = f.masked(|j, _| j < cut);
            let high = f.masked(|j, _| j >= cut);
            Ok([
                tent_norm(&low, e0, spec)?.value,
                tent_norm(&high, e1, spec)?.value,
                tent_norm(&high, e0, spec)?.value,
                tent_norm(&low, e1, spec)?.value,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let cut_scale = |cut: usize| if cut == 0 { 0.0 } else { dom.scale(cut as i64 - 1) };
    let mut splits = Vec::with_capacity(2 * norms.len());
    for (cut, n) in norms.iter().enumerate() {
        // positive witness: small scales go to X0; negative: small scales go to X1
        splits.push((cut_scale(cut), n[0], n[1]));
        splits.push((-cut_scale(cut), n[2], n[3]));
    }
    SplitFamily::new(splits, false)
}

/// 10^{lo}..10^{hi} with `per_decade` points per decade, endpoints included.
pub fn geometric_t_grid(t_lo: f64, t_hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(t_lo > 0.0 && t_hi >= t_lo && t_hi.is_finite() && per_decade > 0) {
        return Err(Error::Parameter(format!("bad t-grid [{t_lo}, {t_hi}] with {per_decade} points per decade")));
    }
    let decades = (t_hi / t_lo).log10();
    let steps = (decades * per_decade as f64).round().max(1.0) as usize;
    Ok((0..=steps).map(|i| t_lo * 10f64.powf(decades * i as f64 / steps as f64)).collect())
}

/// Default grid: 16 points per decade, six decades either side of `centre`.
pub fn default_t_grid(centre: f64) -> Vec<f64> {
    let c = if centre > 0.0 && centre.is_finite() { centre } else { 1.0 };
    let w = 10f64.powf(T_DECADES);
    geometric_t_grid(c / w, c * w, T_PER_DECADE).expect("valid default grid")
}

/// (int t^{-theta q} K(t)^q dt/t)^{1/q} by the trapezoid rule in log t; sup form for q = inf.
pub fn real_interpolation_norm<T: Real>(k_values: &[(f64, T)], theta: f64, q: Exponent) -> Result<T> {
    if k_values.is_empty() {
        return Err(Error::EmptyDomain("empty t-grid".into()));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Parameter(format!("theta must lie in (0, 1), got {theta}")));
    }
    q.validate()?;
    if k_values.windows(2).any(|w| !(w[1].0 > w[0].0)) || k_values[0].0 <= 0.0 {
        return Err(Error::Parameter("t-grid must be positive and increasing".into()));
    }
    let weighted = |(t, k): &(f64, T)| T::lit(t.powf(-theta)) * *k;
    match q {
        Exponent::Infinite => Ok(k_values.iter().map(weighted).fold(T::zero(), |a, b| a.max(b))),
        Exponent::Finite(q) => {
            let logs: Vec<f64> = k_values.iter().map(|(t, _)| t.ln()).collect();
            let n = logs.len();
            let mut acc = Accumulator::new();
            for (i, kv) in k_values.iter().enumerate() {
                let lo = logs[i.saturating_sub(1)];
                let hi = logs[(i + 1).min(n - 1)];
                acc.add(powr(weighted(kv), T::lit(q)) * T::lit((hi - lo) / 2.0));
            }
            Ok(powr(acc.value(), T::lit(1.0 / q)))
        }
    }
}

/// (1 / (q theta (1 - theta)))^{1/q}, the (theta, q)-norm of K(t) = min(1, t).
pub fn min_one_t_constant(theta: f64, q: f64) -> f64 {
    (1.0 / (q * theta * (1.0 - theta))).powf(1.0 / q)
}
