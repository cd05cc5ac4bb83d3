//! Dyadic local means, discrete tent norms, local square functions and c-medians.
//!
//! Cubes live on the torus grid: generation k runs from the cell size 2^{k_cell}
//! up to the side 2^{k_side}. The local mean of Q is
//! a_Q = ||f||_{L^r(Qbar, dy ds / s^{d+1})}, with the ds-integral of each scale
//! sample taken exactly over its log-cell clipped to (l(Q)/2, l(Q)].

use rayon::prelude::*;

use crate::cube::{CubeSequence, DyadicCube, SubsetFamily};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::exponent::{Exponent, ExponentTuple};
use crate::field::HalfSpaceField;
use crate::scalar::{compensated_sum, powr, Accumulator, Real};
use crate::tent::{NormResult, NormVariant, TRange};

/// a_Q for every cube of generations [k_min, k_max].
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMeanField<T> {
    domain: Domain,
    r: Exponent,
    k_min: i32,
    k_max: i32,
    /// levels[k - k_min][cube index in lexicographic offset order]
    levels: Vec<Vec<T>>,
}

fn check_range(domain: &Domain, k_min: i32, k_max: i32) -> Result<(i32, i32)> {
    let (kc, ks) = domain.dyadic_levels()?;
    if k_min > k_max || k_min < kc || k_max > ks {
        return Err(Error::Range(format!(
            "generations [{k_min}, {k_max}] outside the grid range [{kc}, {ks}]"
        )));
    }
    Ok((kc, ks))
}

/// Index of the generation-k cube containing each cell.
fn cube_map(domain: &Domain, k: i32) -> Result<Vec<usize>> {
    let (kc, ks) = domain.dyadic_levels()?;
    let shift = (k - kc) as u32;
    let per_axis = 1usize << (ks - k);
    let n = domain.n_space();
    let d = domain.d();
    Ok((0..domain.cells())
        .map(|lin| {
            let mut rem = lin;
            let mut coords = [0usize; 3];
            for a in (0..d).rev() {
                coords[a] = rem % n;
                rem /= n;
            }
            coords[..d].iter().fold(0, |acc, c| acc * per_axis + (c >> shift))
        })
        .collect())
}

impl<T: Real> LocalMeanField<T> {
    /// Local means given directly per cube.
    pub fn from_fn(
        domain: &Domain,
        r: Exponent,
        k_min: i32,
        k_max: i32,
        value: impl Fn(&DyadicCube) -> T,
    ) -> Result<Self> {
        check_range(domain, k_min, k_max)?;
        r.validate()?;
        let mut levels = Vec::new();
        for k in k_min..=k_max {
            let row: Vec<T> = DyadicCube::generation(domain, k)?.iter().map(&value).collect();
            if row.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
                return Err(Error::Parameter("local means must be finite and nonnegative".into()));
            }
            levels.push(row);
        }
        Ok(LocalMeanField { domain: domain.clone(), r, k_min, k_max, levels })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn r(&self) -> Exponent {
        self.r
    }

    pub fn k_range(&self) -> (i32, i32) {
        (self.k_min, self.k_max)
    }

    /// a_Q, or zero outside the stored generations.
    pub fn get(&self, q: &DyadicCube) -> T {
        if q.k < self.k_min || q.k > self.k_max || q.check_on(&self.domain).is_err() {
            return T::zero();
        }
        let (_, ks) = self.domain.dyadic_levels().expect("checked at construction");
        let per_axis = 1i64 << (ks - q.k);
        let idx = q.offset.iter().fold(0i64, |acc, o| acc * per_axis + o) as usize;
        self.levels[(q.k - self.k_min) as usize][idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = (DyadicCube, T)> + '_ {
        (self.k_min..=self.k_max).flat_map(move |k| {
            let cubes = DyadicCube::generation(&self.domain, k).expect("checked at construction");
            let row = &self.levels[(k - self.k_min) as usize];
            cubes.into_iter().zip(row.iter().copied())
        })
    }

    pub fn scaled(&self, lambda: T) -> Self {
        let mut out = self.clone();
        out.levels.iter_mut().flatten().for_each(|v| *v = *v * lambda.abs());
        out
    }

    /// s_Q = |Q|^{1/2} a_Q over the nonzero local means.
    pub fn to_sequence(&self) -> CubeSequence<T> {
        let d = self.domain.d();
        let mut seq = CubeSequence::new(d);
        for (q, a) in self.iter() {
            if a > T::zero() {
                let s = T::lit(q.volume().sqrt()) * a;
                seq.insert(q, s).expect("nonnegative finite entry");
            }
        }
        seq
    }

    fn t_range(&self) -> TRange {
        TRange {
            t_min: 2f64.powi(self.k_min - 1),
            t_max: 2f64.powi(self.k_max),
            count: (self.k_max - self.k_min + 1) as usize,
        }
    }
}

/// Local means of |f| for generations [k_min, k_max].
pub fn local_means<T: Real>(
    f: &HalfSpaceField<T>,
    r: Exponent,
    k_min: i32,
    k_max: i32,
) -> Result<LocalMeanField<T>> {
    r.validate()?;
    let dom = f.domain();
    check_range(dom, k_min, k_max)?;
    let n = dom.cells();
    let d = dom.d() as i32;
    let mags = f.magnitudes();
    let h = T::lit(dom.cell_measure());
    let rt = r.finite().map(T::lit);
    let mut levels = Vec::new();
    for k in k_min..=k_max {
        let (box_lo, box_hi) = (2f64.powi(k - 1), 2f64.powi(k));
        let (jlo, jhi) = dom.scale_window(box_lo, box_hi);
        // neighbours may have log-cells straddling the box edge
        let jlo = (jlo - 1).max(0);
        let jhi = (jhi + 1).min(dom.n_scales() as i64 - 1);
        // per-cell scale integral
        let mut cell = vec![Accumulator::<T>::new(); n];
        let mut cell_max = vec![T::zero(); n];
        for j in jlo..=jhi {
            let (lo, hi) = dom.scale_cell(j);
            let (lo, hi) = (lo.max(box_lo), hi.min(box_hi));
            if hi <= lo {
                continue;
            }
            let w = T::lit((lo.powi(-d) - hi.powi(-d)) / d as f64);
            let row = &mags[j as usize * n..(j as usize + 1) * n];
            match rt {
                Some(rt) => cell.iter_mut().zip(row).for_each(|(c, v)| c.add(w * powr(*v, rt))),
                None => cell_max.iter_mut().zip(row).for_each(|(c, v)| *c = c.max(*v)),
            }
        }
        let map = cube_map(dom, k)?;
        let count = DyadicCube::generation(dom, k)?.len();
        let row = match rt {
            Some(rt) => {
                let mut sums = vec![Accumulator::<T>::new(); count];
                for (x, c) in cell.iter().enumerate() {
                    sums[map[x]].add(c.value());
                }
                sums.iter().map(|s| powr(s.value() * h, rt.recip())).collect()
            }
            None => {
                let mut m = vec![T::zero(); count];
                for (x, c) in cell_max.iter().enumerate() {
                    m[map[x]] = m[map[x]].max(*c);
                }
                m
            }
        };
        levels.push(row);
    }
    Ok(LocalMeanField { domain: dom.clone(), r, k_min, k_max, levels })
}

/// Per-level cell contributions 1_{E_Q}(x) l(Q)^{-beta q} a_Q^q (or l(Q)^{-beta} a_Q for q = inf).
fn contributions<T: Real>(
    lm: &LocalMeanField<T>,
    q: Exponent,
    beta: f64,
    fam: Option<&SubsetFamily>,
) -> Result<Vec<Vec<T>>> {
    let dom = &lm.domain;
    let qt = q.finite().map(T::lit);
    let mut out = Vec::with_capacity(lm.levels.len());
    for (li, row) in lm.levels.iter().enumerate() {
        let k = lm.k_min + li as i32;
        let damp = T::lit(2f64.powi(k).powf(-beta));
        let weight: Vec<T> = row
            .iter()
            .map(|a| {
                let v = damp * *a;
                match qt {
                    Some(qt) => powr(v, qt),
                    None => v,
                }
            })
            .collect();
        let mut cells = vec![T::zero(); dom.cells()];
        match fam {
            None => {
                let map = cube_map(dom, k)?;
                cells.iter_mut().zip(&map).for_each(|(c, i)| *c = weight[*i]);
            }
            Some(fam) => {
                for (cube, w) in DyadicCube::generation(dom, k)?.iter().zip(&weight) {
                    if *w == T::zero() {
                        continue;
                    }
                    let mask = fam.mask(cube).ok_or_else(|| {
                        Error::Coverage(format!("no subset E_Q for supported cube {cube:?}"))
                    })?;
                    for (y, keep) in cube.cells(dom)?.into_iter().zip(mask) {
                        if *keep {
                            cells[y] = *w;
                        }
                    }
                }
            }
        }
        out.push(cells);
    }
    Ok(out)
}

fn finite_p_norm<T: Real>(dom: &Domain, levels: &[Vec<T>], p: f64, q: Exponent) -> T {
    let pt = T::lit(p);
    let per_x: Vec<T> = (0..dom.cells())
        .into_par_iter()
        .map(|x| match q {
            Exponent::Finite(qv) => {
                let s = compensated_sum(levels.iter().map(|l| l[x]));
                powr(s, pt / T::lit(qv))
            }
            Exponent::Infinite => powr(levels.iter().fold(T::zero(), |m, l| m.max(l[x])), pt),
        })
        .collect();
    powr(compensated_sum(per_x) * T::lit(dom.cell_measure()), pt.recip())
}

/// max over cubes P of (mean_P G_P^alpha)^{1/alpha}, G_P^q the partial sum over Q subset P.
fn carleson_max<T: Real>(lm: &LocalMeanField<T>, levels: &[Vec<T>], q: Exponent, alpha: f64) -> Result<T> {
    let dom = &lm.domain;
    let (_, ks) = dom.dyadic_levels()?;
    let n = dom.cells();
    let at = T::lit(alpha);
    let expo = match q {
        Exponent::Finite(qv) => at / T::lit(qv),
        Exponent::Infinite => at,
    };
    let mut run = vec![Accumulator::<T>::new(); n];
    let mut run_max = vec![T::zero(); n];
    let mut best = T::zero();
    for k in lm.k_min..=ks {
        if let Some(l) = levels.get((k - lm.k_min) as usize) {
            match q {
                Exponent::Finite(_) => run.iter_mut().zip(l).for_each(|(r, v)| r.add(*v)),
                Exponent::Infinite => run_max.iter_mut().zip(l).for_each(|(r, v)| *r = r.max(*v)),
            }
        }
        let map = cube_map(dom, k)?;
        let count = 1usize << ((ks - k) as usize * dom.d());
        let mut sums = vec![Accumulator::<T>::new(); count];
        for x in 0..n {
            let g = match q {
                Exponent::Finite(_) => run[x].value(),
                Exponent::Infinite => run_max[x],
            };
            sums[map[x]].add(powr(g, expo));
        }
        let per_cube = T::lit((n / count) as f64).recip();
        for s in &sums {
            best = best.max(powr(s.value() * per_cube, at.recip()));
        }
    }
    Ok(best)
}

fn dyadic_norm<T: Real>(
    lm: &LocalMeanField<T>,
    e: &ExponentTuple,
    fam: Option<&SubsetFamily>,
) -> Result<T> {
    e.validate()?;
    let levels = contributions(lm, e.q, e.beta, fam)?;
    match (e.p, e.q) {
        (Exponent::Finite(p), q) => Ok(finite_p_norm(&lm.domain, &levels, p, q)),
        (Exponent::Infinite, Exponent::Finite(qv)) => carleson_max(lm, &levels, e.q, qv),
        (Exponent::Infinite, Exponent::Infinite) => {
            Ok(levels.iter().flatten().fold(T::zero(), |m, v| m.max(*v)))
        }
    }
}

fn result<T: Real>(lm: &LocalMeanField<T>, e: &ExponentTuple, value: T, variant: NormVariant) -> NormResult<T> {
    NormResult {
        value,
        exponents: ExponentTuple { r: lm.r, ..*e },
        variant,
        domain: lm.domain.clone(),
        t_range: lm.t_range(),
    }
}

/// Discrete tent norm of the local means; the r component of `e` is taken from `lm`.
pub fn dyadic_tent_norm<T: Real>(lm: &LocalMeanField<T>, e: &ExponentTuple) -> Result<NormResult<T>> {
    let v = dyadic_norm(lm, e, None)?;
    Ok(result(lm, e, v, NormVariant::Dyadic))
}

/// Discrete tent norm with 1_Q replaced by 1_{E_Q}.
pub fn dyadic_subset_norm<T: Real>(
    lm: &LocalMeanField<T>,
    e: &ExponentTuple,
    fam: &SubsetFamily,
) -> Result<NormResult<T>> {
    let v = dyadic_norm(lm, e, Some(fam))?;
    Ok(result(lm, e, v, NormVariant::DyadicSubset { epsilon: fam.epsilon() }))
}

/// Endpoint dyadic norm with the outer average taken of the alpha/q power.
pub fn jn_dyadic_norm<T: Real>(lm: &LocalMeanField<T>, e: &ExponentTuple, alpha: f64) -> Result<T> {
    e.validate()?;
    if !e.p.is_infinite() {
        return Err(Error::Parameter(format!("John-Nirenberg norm needs p = inf, got p = {}", e.p)));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    let levels = contributions(lm, e.q, e.beta, None)?;
    carleson_max(lm, &levels, e.q, alpha)
}

/// G_P(x) over the cells of P, in the order of [`DyadicCube::cells`].
pub fn local_square_function<T: Real>(
    lm: &LocalMeanField<T>,
    e: &ExponentTuple,
    p_cube: &DyadicCube,
) -> Result<Vec<T>> {
    e.validate()?;
    p_cube.check_on(&lm.domain)?;
    let levels = contributions(lm, e.q, e.beta, None)?;
    let top = (p_cube.k.min(lm.k_max) - lm.k_min + 1).max(0) as usize;
    let cells = p_cube.cells(&lm.domain)?;
    Ok(cells.iter().map(|&x| square_at(&levels[..top], x, e.q)).collect())
}

fn square_at<T: Real>(levels: &[Vec<T>], x: usize, q: Exponent) -> T {
    match q {
        Exponent::Finite(qv) => powr(compensated_sum(levels.iter().map(|l| l[x])), T::lit(1.0 / qv)),
        Exponent::Infinite => levels.iter().fold(T::zero(), |m, l| m.max(l[x])),
    }
}

/// inf{t : #{g > t} < c N}: the (K+1)-th largest value with K the largest integer below cN.
pub fn c_median<T: Real>(gvals: &[T], c: f64) -> Result<T> {
    if gvals.is_empty() {
        return Err(Error::EmptyDomain("c-median of an empty cube".into()));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Parameter(format!("c must lie in (0, 1), got {c}")));
    }
    let n = gvals.len();
    let k = ((c * n as f64).ceil() as usize).saturating_sub(1).min(n - 1);
    let mut v = gvals.to_vec();
    let (_, kth, _) = v.select_nth_unstable_by(k, |a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(*kth)
}

/// x -> max over dyadic P containing x of the c-median of G_P on P.
pub fn median_field<T: Real>(lm: &LocalMeanField<T>, e: &ExponentTuple, c: f64) -> Result<Vec<T>> {
    e.validate()?;
    let dom = &lm.domain;
    let (_, ks) = dom.dyadic_levels()?;
    let levels = contributions(lm, e.q, e.beta, None)?;
    let n = dom.cells();
    let mut out = vec![T::zero(); n];
    for k in lm.k_min..=ks {
        let top = ((k.min(lm.k_max) - lm.k_min) + 1) as usize;
        let g: Vec<T> = (0..n).map(|x| square_at(&levels[..top], x, e.q)).collect();
        let cubes = DyadicCube::generation(dom, k)?;
        let medians: Vec<(Vec<usize>, T)> = cubes
            .par_iter()
            .map(|p| {
                let cells = p.cells(dom)?;
                let vals: Vec<T> = cells.iter().map(|&x| g[x]).collect();
                let m = c_median(&vals, c)?;
                Ok((cells, m))
            })
            .collect::<Result<_>>()?;
        for (cells, m) in medians {
            for x in cells {
                out[x] = out[x].max(m);
            }
        }
    }
    Ok(out)
}

/// Sequence-space norm with L^2-normalized indicators |Q|^{-1/2} 1_Q, evaluated on the grid of `domain`.
pub fn sequence_norm<T: Real>(
    s: &CubeSequence<T>,
    domain: &Domain,
    p: Exponent,
    q: Exponent,
    beta: f64,
) -> Result<T> {
    p.validate()?;
    q.validate()?;
    if s.d() != domain.d() {
        return Err(Error::Parameter(format!("sequence dimension {} != domain {}", s.d(), domain.d())));
    }
    let d = domain.d() as f64;
    let n = domain.cells();
    let h = domain.cell_measure();
    // term(Q) = |Q|^{-q/2 - beta q/d} |s_Q|^q, or |Q|^{-1/2 - beta/d} |s_Q| for q = inf
    let term = |cube: &DyadicCube, v: T| -> T {
        let w = T::lit(cube.volume().powf(-0.5 - beta / d)) * v.abs();
        match q {
            Exponent::Finite(qv) => powr(w, T::lit(qv)),
            Exponent::Infinite => w,
        }
    };
    match p {
        Exponent::Finite(pv) => {
            let mut g = vec![Accumulator::<T>::new(); n];
            let mut gmax = vec![T::zero(); n];
            for (cube, v) in s.iter() {
                let t = term(cube, *v);
                for x in cube.cells(domain)? {
                    g[x].add(t);
                    gmax[x] = gmax[x].max(t);
                }
            }
            let pt = T::lit(pv);
            let sum = compensated_sum((0..n).map(|x| match q {
                Exponent::Finite(qv) => powr(g[x].value(), pt / T::lit(qv)),
                Exponent::Infinite => powr(gmax[x], pt),
            }));
            Ok(powr(sum * T::lit(h), pt.recip()))
        }
        Exponent::Infinite => {
            let Some(kmin) = s.iter().map(|(c, _)| c.k).min() else {
                return Ok(T::zero());
            };
            let (_, ks) = domain.dyadic_levels()?;
            let mut best = T::zero();
            for k in kmin..=ks {
                for pc in DyadicCube::generation(domain, k)? {
                    let mut acc = Accumulator::new();
                    for (cube, v) in s.iter().filter(|(c, _)| pc.contains(c)) {
                        let t = term(cube, *v);
                        match q {
                            Exponent::Finite(_) => acc.add(t * T::lit(cube.volume())),
                            Exponent::Infinite => best = best.max(t),
                        }
                    }
                    if let Exponent::Finite(qv) = q {
                        let mean = acc.value() / T::lit(pc.volume());
                        best = best.max(powr(mean, T::lit(1.0 / qv)));
                    }
                }
            }
            Ok(best)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn e(p: f64, q: f64, r: f64, beta: f64) -> ExponentTuple {
        ExponentTuple::new(p, q, r, beta).unwrap()
    }

    fn dom1() -> Domain {
        Domain::aligned(1, 2, 64, -3, 4, 4).unwrap()
    }

    #[test]
    fn box_indicator_local_mean_is_one() {
        // f = 1 on the Whitney box of Q = [1, 1.5) at generation -1
        let dom = Domain::aligned(1, 2, 64, -3, 4, 8).unwrap();
        let f = HalfSpaceField::<f64>::from_fn(&dom, |s, y| {
            if s > 0.25 && s <= 0.5 && (1.0..1.5).contains(&y[0]) { 1.0 } else { 0.0 }
        })
        .unwrap();
        let lm = local_means(&f, Exponent::Finite(1.0), -3, 0).unwrap();
        assert_relative_eq!(lm.get(&DyadicCube::new(-1, vec![2])), 1.0, max_relative = 1e-12);
        assert_eq!(lm.get(&DyadicCube::new(-1, vec![1])), 0.0);
        assert_eq!(lm.get(&DyadicCube::new(-2, vec![4])), 0.0);
        let half = local_means(&f.scaled(0.5), Exponent::Finite(1.0), -3, 0).unwrap();
        assert_relative_eq!(half.get(&DyadicCube::new(-1, vec![2])), 0.5, max_relative = 1e-12);
        assert!(local_means(&f, Exponent::Finite(1.0), -9, 0).is_err());
    }

    #[test]
    fn single_cube_norms() {
        let dom = dom1();
        let target = DyadicCube::new(-1, vec![3]);
        let lm = LocalMeanField::from_fn(&dom, Exponent::Finite(2.0), -3, 2, |c| {
            if *c == target { 1.0 } else { 0.0 }
        })
        .unwrap();
        let vol: f64 = 0.5;
        for (p, beta) in [(1.0, 0.0), (2.0, 0.5), (0.5, -1.0)] {
            let v = dyadic_tent_norm(&lm, &e(p, 2.0, 2.0, beta)).unwrap().value;
            assert_relative_eq!(v, vol.powf(1.0 / p) * vol.powf(-beta), max_relative = 1e-13);
            let s = sequence_norm(&lm.to_sequence(), &dom, Exponent::Finite(p), Exponent::Finite(2.0), beta).unwrap();
            assert_relative_eq!(s, v, max_relative = 1e-13);
        }
        let g = local_square_function(&lm, &e(2.0, 2.0, 2.0, 0.5), &target).unwrap();
        assert!(g.iter().all(|v| (v - vol.powf(-0.5)).abs() < 1e-13));
    }

    #[test]
    fn c_median_examples() {
        assert_eq!(c_median(&[0.0, 0.0, 0.0, 1.0], 0.25).unwrap(), 1.0);
        assert_eq!(c_median(&[0.0, 0.0, 0.0, 1.0], 0.5).unwrap(), 0.0);
        assert_eq!(c_median(&[2.0; 7], 0.3).unwrap(), 2.0);
        assert!(c_median::<f64>(&[], 0.25).is_err());
    }

    /// Brute force over candidate thresholds {0} union values.
    fn brute_median(g: &[f64], c: f64) -> f64 {
        let n = g.len() as f64;
        let mut cands: Vec<f64> = g.to_vec();
        cands.push(0.0);
        cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for t in cands {
            if (g.iter().filter(|v| **v > t).count() as f64) < c * n {
                return t;
            }
        }
        unreachable!()
    }

    fn smooth_field(dom: &Domain) -> HalfSpaceField<f64> {
        HalfSpaceField::from_fn(dom, |s, y| (s * 3.0).sin().abs() + (5.0 * y[0]).cos() * s).unwrap()
    }

    #[test]
    fn subset_and_jn_identities() {
        let dom = dom1();
        let f = smooth_field(&dom);
        let lm = local_means(&f, Exponent::Finite(1.5), -3, 0).unwrap();
        let full = SubsetFamily::full(&dom, -3, 0).unwrap();
        let thin = SubsetFamily::from_predicate(&dom, -3, 0, 0.25, |_, i, n| 8 * i < n);
        assert!(matches!(thin, Err(Error::Parameter(_))));
        let half = SubsetFamily::from_predicate(&dom, -3, 0, 0.25, |_, i, n| 2 * i < n.max(2)).unwrap();
        for t in [e(2.0, 1.0, 1.5, 0.3), e(f64::INFINITY, 2.0, 1.5, -0.2), e(0.7, f64::INFINITY, 1.5, 0.0)] {
            let a = dyadic_tent_norm(&lm, &t).unwrap().value;
            let b = dyadic_subset_norm(&lm, &t, &full).unwrap().value;
            assert_eq!(a.to_bits(), b.to_bits());
            let c = dyadic_subset_norm(&lm, &t, &half).unwrap().value;
            assert!(c <= a * (1.0 + 1e-12));
            if t.p.is_infinite() {
                let j = jn_dyadic_norm(&lm, &t, t.q.as_f64()).unwrap();
                assert_eq!(j.to_bits(), a.to_bits());
            }
        }
        let partial = SubsetFamily::full(&dom, -3, -1).unwrap();
        assert!(matches!(
            dyadic_subset_norm(&lm, &e(1.0, 1.0, 1.5, 0.0), &partial),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn median_field_of_single_cube() {
        let dom = dom1();
        let target = DyadicCube::new(-2, vec![5]);
        let lm = LocalMeanField::from_fn(&dom, Exponent::Finite(1.0), -3, 1, |c| {
            if *c == target { 2.0 } else { 0.0 }
        })
        .unwrap();
        let t = e(1.0, 1.0, 1.0, 0.0);
        let m = median_field(&lm, &t, 0.25).unwrap();
        // enumeration oracle: P has positive median iff it contains Q with |Q| >= c|P|
        let (kc, ks) = dom.dyadic_levels().unwrap();
        let mut oracle = vec![0.0; dom.cells()];
        for k in kc..=ks {
            for p in DyadicCube::generation(&dom, k).unwrap() {
                if p.contains(&target) && target.volume() >= 0.25 * p.volume() {
                    for x in p.cells(&dom).unwrap() {
                        oracle[x] = 2.0;
                    }
                }
            }
        }
        assert_eq!(m, oracle);
        let zero = LocalMeanField::from_fn(&dom, Exponent::Finite(1.0), -3, 1, |_| 0.0).unwrap();
        assert!(median_field(&zero, &t, 0.25).unwrap().iter().all(|v| *v == 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn median_matches_brute_force(g in proptest::collection::vec(0.0f64..3.0, 1..40), c in 0.01f64..0.99) {
            let g: Vec<f64> = g.iter().map(|v| (v * 4.0).round() / 4.0).collect();
            prop_assert_eq!(c_median(&g, c).unwrap(), brute_median(&g, c));
        }

        #[test]
        fn median_monotone(g in proptest::collection::vec(0.0f64..3.0, 1..40), bump in proptest::collection::vec(0.0f64..1.0, 40), c in 0.01f64..0.99) {
            let h: Vec<f64> = g.iter().zip(&bump).map(|(a, b)| a + b).collect();
            prop_assert!(c_median(&h, c).unwrap() >= c_median(&g, c).unwrap());
        }

        #[test]
        fn sequence_identity(vals in proptest::collection::vec(0.0f64..2.0, 16), p in 0.5f64..3.0, q in 0.5f64..3.0, beta in -1.0f64..1.0, pinf in any::<bool>()) {
            let dom = Domain::aligned(1, 2, 16, -1, 3, 2).unwrap();
            let lm = LocalMeanField::from_fn(&dom, Exponent::Finite(1.0), -2, 2, |c| {
                let i = ((c.k + 2) * 3 + c.offset[0] as i32) as usize % 16;
                vals[i]
            }).unwrap();
            let pe = if pinf { Exponent::Infinite } else { Exponent::Finite(p) };
            let t = ExponentTuple::new(pe, q, 1.0, beta).unwrap();
            let a = dyadic_tent_norm(&lm, &t).unwrap().value;
            let b = sequence_norm(&lm.to_sequence(), &dom, pe, Exponent::Finite(q), beta).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }

        #[test]
        fn nesting_constant_one(u in proptest::collection::vec(-1.0f64..1.0, 64 * 16), p in 0.5f64..3.0, q0 in 0.5f64..3.0, dq in 0.0f64..2.0, r1 in 0.5f64..3.0, dr in 0.0f64..2.0) {
            let dom = Domain::aligned(1, 2, 64, -3, 4, 4).unwrap();
            let f = HalfSpaceField::from_real(&dom, u).unwrap();
            let lo = local_means(&f, Exponent::Finite(r1), -3, 0).unwrap();
            let hi = local_means(&f, Exponent::Finite(r1 + dr), -3, 0).unwrap();
            let a = dyadic_tent_norm(&lo, &e(p, q0 + dq, r1, 0.2)).unwrap().value;
            let b = dyadic_tent_norm(&hi, &e(p, q0, r1 + dr, 0.2)).unwrap().value;
            prop_assert!(a <= b * (1.0 + 1e-12));
        }

        #[test]
        fn median_field_monotone_in_c(u in proptest::collection::vec(0.0f64..1.0, 16 * 3), c0 in 0.05f64..0.5, dc in 0.0f64..0.45) {
            let dom = Domain::aligned(1, 2, 16, -1, 3, 2).unwrap();
            let lm = LocalMeanField::from_fn(&dom, Exponent::Finite(1.0), -2, 0, |c| {
                u[((c.k + 2) * 16 + c.offset[0] as i32) as usize]
            }).unwrap();
            let t = e(1.0, 1.5, 1.0, 0.0);
            let a = median_field(&lm, &t, c0).unwrap();
            let b = median_field(&lm, &t, c0 + dc).unwrap();
            prop_assert!(a.iter().zip(&b).all(|(x, y)| y <= x));
        }
    }
}
