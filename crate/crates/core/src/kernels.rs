//! Spectral extensions, Littlewood-Paley blocks, the endpoint F-norm, X^{q,alpha}
//! norms, Peetre maximal functions and the convolution inequality.
//!
//! Frequencies are angular: mode xi in Z^d on a torus of side L has w = 2 pi xi / L,
//! and every kernel is a radial multiplier m(s |w|).

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::cube::DyadicCube;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::{BoundaryField, HalfSpaceField, Samples};
use crate::scalar::{compensated_sum, powr, Accumulator, Real};

/// Radial multiplier families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// |s w|^N e^{-|s w|^2}; N = 0 is the heat semigroup e^{s^2 Laplacian}.
    GaussWeierstrass { order: u32 },
    /// phi_0(s w) with phi_0(w) = theta(w) - theta(2w).
    LpBlock,
    /// Piecewise-linear multiplier through (|s w|, value) knots, zero past the last knot.
    Custom { table: Vec<(f64, f64)>, moments: i32 },
}

impl KernelSpec {
    pub const HEAT: KernelSpec = KernelSpec::GaussWeierstrass { order: 0 };

    /// Largest R with vanishing multiplier derivatives up to order R at the origin (-1 for none).
    pub fn moment_order(&self) -> i32 {
        match self {
            KernelSpec::GaussWeierstrass { order } => *order as i32 - 1,
            KernelSpec::LpBlock => i32::MAX,
            KernelSpec::Custom { moments, .. } => *moments,
        }
    }

    pub fn multiplier(&self, sw: f64) -> f64 {
        match self {
            KernelSpec::GaussWeierstrass { order } => sw.powi(*order as i32) * (-sw * sw).exp(),
            KernelSpec::LpBlock => phi0(sw),
            KernelSpec::Custom { table, .. } => {
                let Some(&(x0, y0)) = table.first() else { return 0.0 };
                if sw <= x0 {
                    return y0;
                }
                for w in table.windows(2) {
                    let ((xa, ya), (xb, yb)) = (w[0], w[1]);
                    if sw <= xb {
                        return ya + (yb - ya) * (sw - xa) / (xb - xa);
                    }
                }
                0.0
            }
        }
    }

    /// Human-readable description of the multiplier, kept in reports.
    pub fn shape(&self) -> String {
        match self {
            KernelSpec::GaussWeierstrass { order } => format!("|s w|^{order} exp(-|s w|^2)"),
            KernelSpec::LpBlock => {
                "theta(w) - theta(2w), theta(w) = 1 - chi(|w| - 1), chi(u) = e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)})"
                    .into()
            }
            KernelSpec::Custom { table, .. } => format!("tabulated, {} knots", table.len()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let KernelSpec::Custom { table, moments } = self {
            if table.is_empty() || table.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::Parameter("custom multiplier knots must be nonempty and increasing".into()));
            }
            if table.iter().any(|(x, y)| !x.is_finite() || !y.is_finite() || *x < 0.0) {
                return Err(Error::Parameter("custom multiplier knots must be finite with x >= 0".into()));
            }
            if *moments < -1 {
                return Err(Error::Parameter(format!("moment order must be >= -1, got {moments}")));
            }
        }
        Ok(())
    }
}

/// C-infinity step from 0 (u <= 0) to 1 (u >= 1).
fn chi(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// 1 on |w| <= 1, 0 on |w| >= 2.
fn theta(w: f64) -> f64 {
    1.0 - chi(w.abs() - 1.0)
}

/// Annular bump supported in 1/2 < |w| < 2 whose dyadic dilates sum to 1 off the origin.
pub fn phi0(w: f64) -> f64 {
    theta(w) - theta(2.0 * w)
}

/// d-dimensional FFT on a row-major cube of side n.
struct Fft3<T: Real> {
    n: usize,
    d: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> Fft3<T> {
    fn new(n: usize, d: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 { n, d, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn run(&self, data: &mut [Complex<T>], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.inv } else { &self.fwd };
        let mut line = vec![Complex::new(T::zero(), T::zero()); n];
        for axis in 0..self.d {
            let stride = n.pow((self.d - 1 - axis) as u32);
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    for (i, l) in line.iter_mut().enumerate() {
                        *l = data[base + off + i * stride];
                    }
                    plan.process(&mut line);
                    for (i, l) in line.iter().enumerate() {
                        data[base + off + i * stride] = *l;
                    }
                }
            }
        }
        if inverse {
            let scale = T::lit(1.0 / data.len() as f64);
            data.iter_mut().for_each(|z| *z = *z * scale);
        }
    }
}

/// |w| for every FFT bin, row-major.
fn angular_norms(dom: &Domain) -> Vec<f64> {
    let n = dom.n_space();
    let k0 = 2.0 * std::f64::consts::PI / dom.side();
    let wave = |i: usize| if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
    (0..dom.cells())
        .map(|lin| {
            let mut rem = lin;
            let mut s = 0.0;
            for _ in 0..dom.d() {
                let w = k0 * wave(rem % n);
                s += w * w;
                rem /= n;
            }
            s.sqrt()
        })
        .collect()
}

fn to_complex<T: Real>(s: &Samples<T>) -> Vec<Complex<T>> {
    (0..s.len()).map(|i| s.get(i)).collect()
}

fn from_complex<T: Real>(v: Vec<Complex<T>>, real: bool) -> Samples<T> {
    if real {
        Samples::Real(v.into_iter().map(|z| z.re).collect())
    } else {
        Samples::Complex(v)
    }
}

/// Multiplies the spectrum by m(s |w|) and transforms back.
fn apply_multiplier<T: Real>(
    spectrum: &[Complex<T>],
    norms: &[f64],
    fft: &Fft3<T>,
    m: impl Fn(f64) -> f64,
) -> Vec<Complex<T>> {
    let mut v: Vec<Complex<T>> = spectrum.iter().zip(norms).map(|(z, w)| *z * T::lit(m(*w))).collect();
    fft.run(&mut v, true);
    v
}

fn spectrum<T: Real>(f: &BoundaryField<T>) -> (Vec<Complex<T>>, Fft3<T>) {
    let dom = f.domain();
    let fft = Fft3::new(dom.n_space(), dom.d());
    let mut v = to_complex(f.samples());
    fft.run(&mut v, false);
    (v, fft)
}

/// (Phi_s * f)(y) at every grid scale s_j of `domain`.
pub fn extend<T: Real>(f: &BoundaryField<T>, kernel: &KernelSpec, domain: &Domain) -> Result<HalfSpaceField<T>> {
    kernel.validate()?;
    if !domain.same_space(f.domain()) {
        return Err(Error::Parameter("boundary data and target domain have different spatial grids".into()));
    }
    let (spec, fft) = spectrum(f);
    let norms = angular_norms(domain);
    let rows: Vec<Vec<Complex<T>>> = (0..domain.n_scales())
        .into_par_iter()
        .map(|j| {
            let s = domain.scale(j as i64);
            apply_multiplier(&spec, &norms, &fft, |w| kernel.multiplier(s * w))
        })
        .collect();
    let real = !f.samples().is_complex();
    let samples = from_complex(rows.into_iter().flatten().collect(), real);
    Ok(HalfSpaceField::from_samples(domain, samples)?.with_label(format!("{} extension", f.label())))
}

/// The characterization needs R + 1 > beta, with R the kernel's moment order.
pub fn check_kernel_order(kernel: &KernelSpec, beta: f64) -> Result<()> {
    let r = kernel.moment_order();
    if r != i32::MAX && !((r as f64) + 1.0 > beta) {
        return Err(Error::Hypothesis(format!(
            "kernel with moment order R = {r} needs R + 1 > beta, got beta = {beta}"
        )));
    }
    Ok(())
}

/// Block indices [a, b] whose phi_k sum to 1 on every nonzero grid frequency.
pub fn covering_range(domain: &Domain) -> (i32, i32) {
    let w_min = 2.0 * std::f64::consts::PI / domain.side();
    let w_max = w_min * (domain.n_space() / 2) as f64 * (domain.d() as f64).sqrt();
    (w_min.log2().floor() as i32, w_max.log2().ceil() as i32)
}

/// Phi_k * f for k in [k_lo, k_hi].
#[derive(Clone, Debug)]
pub struct BlockFamily<T> {
    pub k_lo: i32,
    pub blocks: Vec<BoundaryField<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> BlockFamily<T> {
    pub fn k_range(&self) -> (i32, i32) {
        (self.k_lo, self.k_lo + self.blocks.len() as i32 - 1)
    }

    /// Pointwise sum of the blocks.
    pub fn reconstruct(&self) -> Option<BoundaryField<T>> {
        let first = self.blocks.first()?;
        let dom = first.domain();
        let n = dom.cells();
        let sum: Vec<Complex<T>> = (0..n)
            .map(|i| self.blocks.iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b.samples().get(i)))
            .collect();
        let real = !first.samples().is_complex();
        BoundaryField::from_samples(dom, from_complex(sum, real)).ok()
    }

    /// The family (2^{k beta} |Phi_k * f|)_k.
    pub fn weighted(&self, beta: f64) -> ScaleFamily<T> {
        let members = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let w = T::lit(2f64.powf((self.k_lo + i as i32) as f64 * beta));
                b.magnitudes().into_iter().map(|v| v * w).collect()
            })
            .collect();
        let domain = self.blocks.first().map(|b| b.domain().clone());
        ScaleFamily { domain, k_lo: self.k_lo, members }
    }
}

pub fn lp_block_transform<T: Real>(f: &BoundaryField<T>, k_lo: i32, k_hi: i32) -> Result<BlockFamily<T>> {
    if k_lo > k_hi {
        return Err(Error::Parameter(format!("empty block range [{k_lo}, {k_hi}]")));
    }
    let dom = f.domain();
    let mut warnings = Vec::new();
    let mean = f.mean();
    let scale = f.magnitudes().into_iter().fold(T::zero(), |m, v| m.max(v));
    if mean.norm() > T::lit(1e-12) * scale.max(T::min_positive_value()) {
        warnings.push(format!(
            "nonzero mean {:.3e}: the blocks miss the zero frequency",
            mean.norm().to_f64_lossy()
        ));
    }
    let (cov_lo, cov_hi) = covering_range(dom);
    if k_lo > cov_lo || k_hi < cov_hi {
        warnings.push(format!("block range [{k_lo}, {k_hi}] does not cover [{cov_lo}, {cov_hi}]"));
    }
    let (spec, fft) = spectrum(f);
    let norms = angular_norms(dom);
    let real = !f.samples().is_complex();
    let blocks = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| {
            let s = 2f64.powi(-k);
            let v = apply_multiplier(&spec, &norms, &fft, |w| phi0(s * w));
            BoundaryField::from_samples(dom, from_complex(v, real)).map(|b| b.with_label(format!("block {k}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockFamily { k_lo, blocks, warnings })
}

/// Nonnegative grid functions g_k, k = k_lo, k_lo + 1, ...
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleFamily<T> {
    domain: Option<Domain>,
    k_lo: i32,
    members: Vec<Vec<T>>,
}

impl<T: Real> ScaleFamily<T> {
    pub fn new(domain: &Domain, k_lo: i32, members: Vec<Vec<T>>) -> Result<Self> {
        if members.iter().any(|m| m.len() != domain.cells()) {
            return Err(Error::Format(format!("every member needs {} samples", domain.cells())));
        }
        if members.iter().flatten().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::Parameter("family members must be finite and nonnegative".into()));
        }
        Ok(ScaleFamily { domain: Some(domain.clone()), k_lo, members })
    }

    pub fn k_lo(&self) -> i32 {
        self.k_lo
    }

    pub fn members(&self) -> &[Vec<T>] {
        &self.members
    }

    pub fn is_zero(&self) -> bool {
        self.members.iter().flatten().all(|v| *v == T::zero())
    }
}

fn cube_generations(dom: &Domain) -> Result<Vec<(i32, Vec<Vec<usize>>)>> {
    let (kc, ks) = dom.dyadic_levels()?;
    (kc..=ks)
        .map(|k| {
            let cubes = DyadicCube::generation(dom, k)?;
            let cells = cubes.iter().map(|c| c.cells(dom)).collect::<Result<Vec<_>>>()?;
            Ok((k, cells))
        })
        .collect()
}

fn finite(q: Exponent, what: &str) -> Result<f64> {
    q.validate()?;
    q.finite().ok_or_else(|| Error::Parameter(format!("{what} must be finite")))
}

/// sup over dyadic Q of (mean_Q (sum_{k >= -log2 l(Q)} g_k^q)^{alpha/q})^{1/alpha}.
pub fn x_norm<T: Real>(g: &ScaleFamily<T>, q: Exponent, alpha: f64) -> Result<T> {
    let q = finite(q, "q")?;
    finite(Exponent::from(alpha), "alpha")?;
    let Some(dom) = &g.domain else { return Ok(T::zero()) };
    let (qt, at) = (T::lit(q), T::lit(alpha));
    let n = dom.cells();
    let gens = cube_generations(dom)?;
    let best = gens
        .par_iter()
        .map(|(kq, cubes)| {
            let mut s = vec![Accumulator::<T>::new(); n];
            for (i, m) in g.members.iter().enumerate() {
                if g.k_lo + i as i32 >= -kq {
                    s.iter_mut().zip(m).for_each(|(a, v)| a.add(powr(*v, qt)));
                }
            }
            let pw: Vec<T> = s.iter().map(|a| powr(a.value(), at / qt)).collect();
            cubes.iter().fold(T::zero(), |b, cells| {
                let mean = compensated_sum(cells.iter().map(|&x| pw[x])) / T::lit(cells.len() as f64);
                b.max(powr(mean, at.recip()))
            })
        })
        .reduce(T::zero, |a, b| a.max(b));
    Ok(best)
}

/// sup over dyadic Q of (mean_Q sum_{k >= -log2 l(Q)} 2^{k beta q} |Phi_k * f|^q)^{1/q}.
pub fn f_endpoint_norm<T: Real>(blocks: &BlockFamily<T>, q: Exponent, beta: f64) -> Result<T> {
    let q = finite(q, "q (the endpoint F-norm excludes q = inf)")?;
    let Some(first) = blocks.blocks.first() else { return Ok(T::zero()) };
    let dom = first.domain();
    let qt = T::lit(q);
    // per block and per cube: mean over the cube of |block|^q
    let gens = cube_generations(dom)?;
    let pw: Vec<Vec<T>> = blocks
        .blocks
        .iter()
        .map(|b| b.magnitudes().into_iter().map(|v| powr(v, qt)).collect())
        .collect();
    let mut best = T::zero();
    for (kq, cubes) in &gens {
        for cells in cubes {
            let mut acc = Accumulator::new();
            for (i, p) in pw.iter().enumerate() {
                let k = blocks.k_lo + i as i32;
                if k >= -kq {
                    let mean = compensated_sum(cells.iter().map(|&x| p[x])) / T::lit(cells.len() as f64);
                    acc.add(T::lit(2f64.powf(k as f64 * beta * q)) * mean);
                }
            }
            best = best.max(powr(acc.value(), qt.recip()));
        }
    }
    Ok(best)
}

/// sup over grid offsets y of |(Phi_t * f)(x + y)| / (1 + |y|/t)^a.
pub fn peetre_maximal<T: Real>(f: &BoundaryField<T>, kernel: &KernelSpec, t: f64, a: f64) -> Result<BoundaryField<T>> {
    kernel.validate()?;
    if !(a > 0.0 && t > 0.0) {
        return Err(Error::Parameter(format!("Peetre maximal function needs a > 0 and t > 0, got a = {a}, t = {t}")));
    }
    let dom = f.domain();
    let (spec, fft) = spectrum(f);
    let norms = angular_norms(dom);
    let conv: Vec<T> = apply_multiplier(&spec, &norms, &fft, |w| kernel.multiplier(t * w))
        .into_iter()
        .map(|z| z.norm())
        .collect();
    let n = dom.n_space() as i64;
    let d = dom.d();
    let h = dom.h();
    let strides = dom.strides();
    // offsets in the fundamental domain, |k_a| <= n/2, with their weights
    let span = n as usize;
    let offsets: Vec<(Vec<i64>, T)> = (0..dom.cells())
        .map(|lin| {
            let mut rem = lin;
            let mut k = vec![0i64; d];
            let mut r2 = 0.0;
            for a in (0..d).rev() {
                let mut v = (rem % span) as i64;
                if v > n / 2 {
                    v -= n;
                }
                k[a] = v;
                r2 += (v as f64 * h).powi(2);
                rem /= span;
            }
            let w = T::lit((1.0 + r2.sqrt() / t).powf(-a));
            (k, w)
        })
        .collect();
    let out: Vec<T> = (0..dom.cells())
        .into_par_iter()
        .map(|x| {
            let xc = dom.multi_index(x);
            offsets.iter().fold(T::zero(), |m, (k, w)| {
                let mut lin = 0usize;
                for a in 0..d {
                    lin += ((xc[a] as i64 + k[a]).rem_euclid(n)) as usize * strides[a];
                }
                m.max(conv[lin] * *w)
            })
        })
        .collect();
    BoundaryField::from_samples(dom, Samples::Real(out))
}

/// Margin of extra indices on each side for the convolved family.
const CONV_MARGIN: i32 = 16;

/// ||(sum_k 2^{-|k-l| delta} g_k)_l||_X / ||(g_l)_l||_X; `None` for a zero family.
pub fn convolution_inequality_check<T: Real>(
    g: &ScaleFamily<T>,
    delta: f64,
    q: Exponent,
    alpha: f64,
) -> Result<Option<T>> {
    let Some(dom) = &g.domain else { return Ok(None) };
    let bound = dom.d() as f64 / alpha;
    if !(delta > bound) {
        return Err(Error::Hypothesis(format!("delta = {delta} must exceed d/alpha = {bound}")));
    }
    let rhs = x_norm(g, q, alpha)?;
    if rhs == T::zero() {
        return Ok(None);
    }
    let k_hi = g.k_lo + g.members.len() as i32 - 1;
    let (l_lo, l_hi) = (g.k_lo - CONV_MARGIN, k_hi + CONV_MARGIN);
    let n = dom.cells();
    let members = (l_lo..=l_hi)
        .map(|l| {
            let mut acc = vec![Accumulator::<T>::new(); n];
            for (i, m) in g.members.iter().enumerate() {
                let k = g.k_lo + i as i32;
                let w = T::lit(2f64.powf(-((k - l).abs() as f64) * delta));
                acc.iter_mut().zip(m).for_each(|(a, v)| a.add(w * *v));
            }
            acc.iter().map(|a| a.value()).collect()
        })
        .collect();
    let lhs_family = ScaleFamily { domain: Some(dom.clone()), k_lo: l_lo, members };
    let lhs = x_norm(&lhs_family, q, alpha)?;
    Ok(Some(lhs / rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn dom1() -> Domain {
        Domain::aligned(1, 3, 64, -4, 4, 4).unwrap()
    }

    #[test]
    fn partition_of_unity() {
        for w in [0.3, 1.0, 1.7, 5.5, 100.0] {
            let s: f64 = (-20..=20).map(|k| phi0(2f64.powi(-k) * w)).sum();
            assert_relative_eq!(s, 1.0, max_relative = 1e-14);
        }
        assert_eq!(phi0(0.49), 0.0);
        assert_eq!(phi0(2.01), 0.0);
        assert_eq!(phi0(0.0), 0.0);
    }

    #[test]
    fn heat_on_fourier_mode() {
        let dom = dom1();
        let xi = 3.0;
        let f = BoundaryField::<f64>::from_fn_complex(&dom, |y| {
            let a = 2.0 * PI * xi * y[0] / dom.side();
            (a.cos(), a.sin())
        })
        .unwrap();
        let u = extend(&f, &KernelSpec::HEAT, &dom).unwrap();
        for j in [0usize, 7, 15] {
            let s = dom.scale(j as i64);
            let damp = (-4.0 * PI * PI * s * s * (xi / dom.side()).powi(2)).exp();
            for x in [0usize, 11, 40] {
                let want = f.get(&[x]).unwrap() * damp;
                let got = u.sample(j, &[x]).unwrap();
                assert!((got - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_data_vanishes_with_moments() {
        let dom = dom1();
        let f = BoundaryField::<f64>::from_fn(&dom, |_| 2.0).unwrap();
        let u = extend(&f, &KernelSpec::GaussWeierstrass { order: 2 }, &dom).unwrap();
        assert!(u.magnitudes().iter().all(|v| *v < 1e-14));
        assert!(check_kernel_order(&KernelSpec::HEAT, -0.5).is_ok());
        assert!(matches!(check_kernel_order(&KernelSpec::HEAT, 0.0), Err(Error::Hypothesis(_))));
        assert!(check_kernel_order(&KernelSpec::GaussWeierstrass { order: 2 }, 1.5).is_ok());
        assert!(check_kernel_order(&KernelSpec::LpBlock, 40.0).is_ok());
    }

    #[test]
    fn parseval_at_fixed_scale() {
        let dom = dom1();
        let f = BoundaryField::<f64>::from_fn(&dom, |y| (2.0 * PI * y[0] / 8.0).sin() + 0.5 * (2.0 * PI * 5.0 * y[0] / 8.0).cos())
            .unwrap();
        let u = extend(&f, &KernelSpec::HEAT, &dom).unwrap();
        let j = 9;
        let s = dom.scale(j);
        let n = dom.cells();
        let l2: f64 = u.magnitudes()[j as usize * n..(j as usize + 1) * n].iter().map(|v| v * v).sum::<f64>() * dom.h();
        // spectral oracle: modes 1 and 5 with amplitudes 1 and 1/2, each split over +-xi
        let m = |xi: f64| (-(s * 2.0 * PI * xi / 8.0).powi(2)).exp();
        let want = 8.0 * (0.5 * m(1.0).powi(2) + 0.5 * 0.25 * m(5.0).powi(2));
        assert_relative_eq!(l2, want, max_relative = 1e-12);
    }

    fn band_limited(dom: &Domain) -> BoundaryField<f64> {
        BoundaryField::from_fn(dom, |y| {
            let a = 2.0 * PI * y[0] / dom.side();
            (3.0 * a).sin() + 0.3 * (11.0 * a + 0.4).cos() - 0.2 * (20.0 * a).sin()
        })
        .unwrap()
    }

    #[test]
    fn blocks_reconstruct_and_localize() {
        let dom = dom1();
        let f = band_limited(&dom);
        let (a, b) = covering_range(&dom);
        let fam = lp_block_transform(&f, a, b).unwrap();
        assert!(fam.warnings.is_empty(), "{:?}", fam.warnings);
        let back = fam.reconstruct().unwrap();
        let err: f64 = back.magnitudes().iter().zip(f.magnitudes()).map(|(x, y)| (x - y).powi(2)).sum();
        let norm: f64 = f.magnitudes().iter().map(|v| v * v).sum();
        assert!((err / norm).sqrt() < 1e-10);

        // single annulus: mode 4 has |w| = pi, blocks with 2^{k-1} < pi < 2^{k+1}
        let g = BoundaryField::<f64>::from_fn(&dom, |y| (2.0 * PI * 4.0 * y[0] / dom.side()).cos()).unwrap();
        let fam = lp_block_transform(&g, a, b).unwrap();
        let nonzero = fam.blocks.iter().filter(|b| !b.magnitudes().iter().all(|v| *v < 1e-14)).count();
        assert!(nonzero <= 2 && nonzero >= 1);

        let c = BoundaryField::<f64>::from_fn(&dom, |_| 1.0).unwrap();
        assert!(!lp_block_transform(&c, a, b).unwrap().warnings.is_empty());
    }

    #[test]
    fn endpoint_norm_examples() {
        let dom = dom1();
        // a single constant block
        let blk = BoundaryField::<f64>::from_fn(&dom, |_| -1.5).unwrap();
        let zero = BoundaryField::<f64>::zeros(&dom);
        let fam = BlockFamily { k_lo: 0, blocks: vec![zero.clone(), blk, zero.clone()], warnings: vec![] };
        assert_relative_eq!(f_endpoint_norm(&fam, Exponent::Finite(2.0), 0.0).unwrap(), 1.5, max_relative = 1e-14);
        assert!(f_endpoint_norm(&fam, Exponent::Infinite, 0.0).is_err());
        let zf = BlockFamily { k_lo: 0, blocks: vec![zero], warnings: vec![] };
        assert_eq!(f_endpoint_norm(&zf, Exponent::Finite(1.0), 0.5).unwrap(), 0.0);

        let f = band_limited(&dom);
        let (a, b) = covering_range(&dom);
        let fam = lp_block_transform(&f, a, b).unwrap();
        for (q, beta) in [(1.0, -0.5), (2.0, 0.0), (0.7, 0.3)] {
            let direct = f_endpoint_norm(&fam, Exponent::Finite(q), beta).unwrap();
            let via_x = x_norm(&fam.weighted(beta), Exponent::Finite(q), q).unwrap();
            assert_relative_eq!(direct, via_x, max_relative = 1e-12);
        }
    }

    #[test]
    fn x_norm_constant_member() {
        let dom = dom1();
        let fam = ScaleFamily::new(&dom, 2, vec![vec![0.75; 64]]).unwrap();
        assert_relative_eq!(x_norm(&fam, Exponent::Finite(1.5), 0.5).unwrap(), 0.75, max_relative = 1e-14);
        let zero = ScaleFamily::new(&dom, 2, vec![vec![0.0; 64]; 3]).unwrap();
        assert_eq!(x_norm(&zero, Exponent::Finite(1.0), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn peetre_examples() {
        let dom = dom1();
        let f = band_limited(&dom);
        let t = 0.3;
        let conv = extend(&f, &KernelSpec::HEAT, &Domain::with_scales(1, 8.0, 64, t, 1, 2).unwrap()).unwrap();
        let plain: Vec<f64> = conv.magnitudes()[..64].to_vec();
        let mut prev: Option<Vec<f64>> = None;
        for a in [0.5, 2.0, 8.0, 64.0] {
            let p = peetre_maximal(&f, &KernelSpec::HEAT, t, a).unwrap().magnitudes();
            for (x, v) in p.iter().enumerate() {
                assert!(*v >= plain[x] * (1.0 - 1e-12));
            }
            if let Some(prev) = &prev {
                assert!(p.iter().zip(prev).all(|(a, b)| a <= &(b * (1.0 + 1e-12))));
            }
            prev = Some(p);
        }
        // large a approaches the plain convolution
        let p = peetre_maximal(&f, &KernelSpec::HEAT, t, 400.0).unwrap().magnitudes();
        let gap = p.iter().zip(&plain).map(|(a, b)| a - b).fold(0.0, f64::max);
        let top = plain.iter().cloned().fold(0.0, f64::max);
        assert!(gap < 0.05 * top);
        // constant convolution
        let c = BoundaryField::<f64>::from_fn(&dom, |_| 2.0).unwrap();
        let p = peetre_maximal(&c, &KernelSpec::HEAT, t, 1.0).unwrap().magnitudes();
        assert!(p.iter().all(|v| (v - 2.0).abs() < 1e-13));
    }

    #[test]
    fn convolution_check_examples() {
        let dom = dom1();
        let members: Vec<Vec<f64>> = (0..40).map(|_| vec![1.0; 64]).collect();
        let g = ScaleFamily::new(&dom, 5, members).unwrap();
        let delta = 1.5;
        let ratio = convolution_inequality_check(&g, delta, Exponent::Finite(1.0), 1.0).unwrap().unwrap();
        // q = 1: the largest cube (side 8) counts indices l >= -3, so the ratio is the
        // double geometric sum over l in [-3, 44 + 16], k in [5, 44], divided by 40
        let mass: f64 = (-3..=60)
            .flat_map(|l| (5..=44).map(move |k: i32| 2f64.powf(-((k - l).abs() as f64) * delta)))
            .sum();
        assert_relative_eq!(ratio, mass / 40.0, max_relative = 1e-12);
        let series = (1.0 + 2f64.powf(-delta)) / (1.0 - 2f64.powf(-delta));
        assert_relative_eq!(ratio, series, max_relative = 1e-5);
        assert!(matches!(
            convolution_inequality_check(&g, 0.5, Exponent::Finite(1.0), 2.0),
            Err(Error::Hypothesis(_))
        ));
        let zero = ScaleFamily::new(&dom, 0, vec![vec![0.0; 64]; 2]).unwrap();
        assert!(convolution_inequality_check(&zero, 2.0, Exponent::Finite(1.0), 1.0).unwrap().is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn extension_linear_and_translation_covariant(
            a in proptest::collection::vec(-1.0f64..1.0, 32),
            b in proptest::collection::vec(-1.0f64..1.0, 32),
            lam in -2.0f64..2.0,
            shift in 0usize..32,
        ) {
            let dom = Domain::aligned(1, 2, 32, -3, 2, 2).unwrap();
            let f = BoundaryField::from_real(&dom, a.clone()).unwrap();
            let g = BoundaryField::from_real(&dom, b.clone()).unwrap();
            let comb: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lam * x + y).collect();
            let h = BoundaryField::from_real(&dom, comb).unwrap();
            let k = KernelSpec::GaussWeierstrass { order: 1 };
            let (uf, ug, uh) = (extend(&f, &k, &dom).unwrap(), extend(&g, &k, &dom).unwrap(), extend(&h, &k, &dom).unwrap());
            for i in 0..uh.samples().len() {
                let want = uf.samples().get(i).re * lam + ug.samples().get(i).re;
                prop_assert!((uh.samples().get(i).re - want).abs() < 1e-12);
            }
            let shifted: Vec<f64> = (0..32).map(|x| a[(x + 32 - shift) % 32]).collect();
            let us = extend(&BoundaryField::from_real(&dom, shifted).unwrap(), &k, &dom).unwrap();
            for j in 0..dom.n_scales() {
                for x in 0..32 {
                    let want = uf.sample(j, &[(x + 32 - shift) % 32]).unwrap().re;
                    prop_assert!((us.sample(j, &[x]).unwrap().re - want).abs() < 1e-12);
                }
            }
        }
    }
}
