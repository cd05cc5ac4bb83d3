//! Sampled fields on the half-space grid and on the boundary torus.

use num_complex::Complex;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Real or complex sample storage.
#[derive(Clone, Debug, PartialEq)]
pub enum Samples<T> {
    Real(Vec<T>),
    Complex(Vec<Complex<T>>),
}

impl<T: Real> Samples<T> {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Samples::Complex(_))
    }

    #[inline]
    pub fn get(&self, i: usize) -> Complex<T> {
        match self {
            Samples::Real(v) => Complex::new(v[i], T::zero()),
            Samples::Complex(v) => v[i],
        }
    }

    #[inline]
    pub fn magnitude(&self, i: usize) -> T {
        match self {
            Samples::Real(v) => v[i].abs(),
            Samples::Complex(v) => v[i].norm(),
        }
    }

    pub fn magnitudes(&self) -> Vec<T> {
        match self {
            Samples::Real(v) => v.iter().map(|x| x.abs()).collect(),
            Samples::Complex(v) => v.iter().map(|x| x.norm()).collect(),
        }
    }

    fn check_finite(&self) -> Result<()> {
        let bad = match self {
            Samples::Real(v) => v.iter().position(|x| !x.is_finite()),
            Samples::Complex(v) => v.iter().position(|x| !(x.re.is_finite() && x.im.is_finite())),
        };
        match bad {
            Some(i) => Err(Error::NonFinite(format!("sample {i}"))),
            None => Ok(()),
        }
    }

    fn set(&mut self, i: usize, v: Complex<T>) {
        if let Samples::Real(r) = self {
            if v.im == T::zero() {
                r[i] = v.re;
                return;
            }
            *self = Samples::Complex(r.iter().map(|&x| Complex::new(x, T::zero())).collect());
        }
        if let Samples::Complex(c) = self {
            c[i] = v;
        }
    }

    fn map_pointwise(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Samples<T> {
        match self {
            Samples::Real(v) => {
                let out: Vec<Complex<T>> = v.iter().map(|&x| f(Complex::new(x, T::zero()))).collect();
                if out.iter().all(|z| z.im == T::zero()) {
                    Samples::Real(out.into_iter().map(|z| z.re).collect())
                } else {
                    Samples::Complex(out)
                }
            }
            Samples::Complex(v) => Samples::Complex(v.iter().map(|&z| f(z)).collect()),
        }
    }
}

/// Samples F(s_j, y) on the scale grid times the spatial torus, scale-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpaceField<T> {
    domain: Domain,
    samples: Samples<T>,
    label: String,
}

impl<T: Real> HalfSpaceField<T> {
    pub fn zeros(domain: &Domain) -> Self {
        let n = domain.n_scales() * domain.cells();
        HalfSpaceField {
            domain: domain.clone(),
            samples: Samples::Real(vec![T::zero(); n]),
            label: String::new(),
        }
    }

    pub fn from_samples(domain: &Domain, samples: Samples<T>) -> Result<Self> {
        let expected = domain.n_scales() * domain.cells();
        if samples.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} samples for the domain, got {}",
                samples.len()
            )));
        }
        samples.check_finite()?;
        Ok(HalfSpaceField { domain: domain.clone(), samples, label: String::new() })
    }

    pub fn from_real(domain: &Domain, values: Vec<T>) -> Result<Self> {
        Self::from_samples(domain, Samples::Real(values))
    }

    /// Real field from a function of (s, cell centre).
    pub fn from_fn(domain: &Domain, f: impl Fn(f64, &[f64]) -> f64) -> Result<Self> {
        let cells = domain.cells();
        let centres: Vec<Vec<f64>> = (0..cells).map(|x| domain.cell_center(x)).collect();
        let mut v = Vec::with_capacity(domain.n_scales() * cells);
        for j in 0..domain.n_scales() {
            let s = domain.scale(j as i64);
            for c in &centres {
                v.push(T::lit(f(s, c)));
            }
        }
        Self::from_real(domain, v)
    }

    /// Complex field from a function of (s, cell centre) returning (re, im).
    pub fn from_fn_complex(domain: &Domain, f: impl Fn(f64, &[f64]) -> (f64, f64)) -> Result<Self> {
        let cells = domain.cells();
        let centres: Vec<Vec<f64>> = (0..cells).map(|x| domain.cell_center(x)).collect();
        let mut v = Vec::with_capacity(domain.n_scales() * cells);
        for j in 0..domain.n_scales() {
            let s = domain.scale(j as i64);
            for c in &centres {
                let (re, im) = f(s, c);
                v.push(Complex::new(T::lit(re), T::lit(im)));
            }
        }
        Self::from_samples(domain, Samples::Complex(v))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn samples(&self) -> &Samples<T> {
        &self.samples
    }

    fn index(&self, j: usize, x: &[usize]) -> Result<usize> {
        if j >= self.domain.n_scales() {
            return Err(Error::Range(format!(
                "scale index {j} out of range 0..{}",
                self.domain.n_scales()
            )));
        }
        Ok(j * self.domain.cells() + self.domain.linear_index(x)?)
    }

    /// Stored sample at scale index j and spatial multi-index x.
    pub fn sample(&self, j: usize, x: &[usize]) -> Result<Complex<T>> {
        Ok(self.samples.get(self.index(j, x)?))
    }

    /// Writes a sample; a non-real value promotes the storage to complex.
    pub fn set(&mut self, j: usize, x: &[usize], v: impl Into<Complex<T>>) -> Result<()> {
        let v = v.into();
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite(format!("value written at ({j}, {x:?})")));
        }
        let i = self.index(j, x)?;
        self.samples.set(i, v);
        Ok(())
    }

    /// |F| in storage order.
    pub fn magnitudes(&self) -> Vec<T> {
        self.samples.magnitudes()
    }

    pub fn is_zero(&self) -> bool {
        match &self.samples {
            Samples::Real(v) => v.iter().all(|x| *x == T::zero()),
            Samples::Complex(v) => v.iter().all(|x| x.re == T::zero() && x.im == T::zero()),
        }
    }

    /// lambda * F.
    pub fn scaled(&self, lambda: T) -> Self {
        HalfSpaceField {
            domain: self.domain.clone(),
            samples: self.samples.map_pointwise(|z| z * lambda),
            label: self.label.clone(),
        }
    }

    /// |F|^M as a real field.
    pub fn abs_pow(&self, m: T) -> Self {
        let v = self.magnitudes().into_iter().map(|a| crate::scalar::powr(a, m)).collect();
        HalfSpaceField { domain: self.domain.clone(), samples: Samples::Real(v), label: self.label.clone() }
    }

    /// F + G on the same domain.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::Parameter("fields live on different domains".into()));
        }
        let n = self.samples.len();
        let samples = if !self.samples.is_complex() && !other.samples.is_complex() {
            Samples::Real((0..n).map(|i| self.samples.get(i).re + other.samples.get(i).re).collect())
        } else {
            Samples::Complex((0..n).map(|i| self.samples.get(i) + other.samples.get(i)).collect())
        };
        Ok(HalfSpaceField { domain: self.domain.clone(), samples, label: String::new() })
    }

    /// Restriction to the first `n_scales` scale samples.
    pub fn truncated(&self, n_scales: usize) -> Result<Self> {
        let d = &self.domain;
        if n_scales > d.n_scales() {
            return Err(Error::Range(format!("{n_scales} scales requested, field has {}", d.n_scales())));
        }
        let dom = Domain::with_scales(d.d(), d.side(), d.n_space(), d.s_min(), d.m_scale(), n_scales)?;
        let keep = n_scales * d.cells();
        let samples = match &self.samples {
            Samples::Real(v) => Samples::Real(v[..keep].to_vec()),
            Samples::Complex(v) => Samples::Complex(v[..keep].to_vec()),
        };
        Ok(HalfSpaceField { domain: dom, samples, label: self.label.clone() })
    }

    /// Keeps samples where `keep(j, cell)` holds and zeroes the rest.
    pub fn masked(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let cells = self.domain.cells();
        let samples = match &self.samples {
            Samples::Real(v) => Samples::Real(
                v.iter()
                    .enumerate()
                    .map(|(i, &x)| if keep(i / cells, i % cells) { x } else { T::zero() })
                    .collect(),
            ),
            Samples::Complex(v) => Samples::Complex(
                v.iter()
                    .enumerate()
                    .map(|(i, &x)| if keep(i / cells, i % cells) { x } else { Complex::new(T::zero(), T::zero()) })
                    .collect(),
            ),
        };
        HalfSpaceField { domain: self.domain.clone(), samples, label: self.label.clone() }
    }
}

/// Samples f(y) on the spatial torus.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryField<T> {
    domain: Domain,
    samples: Samples<T>,
    label: String,
}

impl<T: Real> BoundaryField<T> {
    pub fn zeros(domain: &Domain) -> Self {
        BoundaryField {
            domain: domain.clone(),
            samples: Samples::Real(vec![T::zero(); domain.cells()]),
            label: String::new(),
        }
    }

    pub fn from_samples(domain: &Domain, samples: Samples<T>) -> Result<Self> {
        if samples.len() != domain.cells() {
            return Err(Error::Format(format!(
                "expected {} boundary samples, got {}",
                domain.cells(),
                samples.len()
            )));
        }
        samples.check_finite()?;
        Ok(BoundaryField { domain: domain.clone(), samples, label: String::new() })
    }

    pub fn from_real(domain: &Domain, values: Vec<T>) -> Result<Self> {
        Self::from_samples(domain, Samples::Real(values))
    }

    pub fn from_fn(domain: &Domain, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let v = (0..domain.cells()).map(|x| T::lit(f(&domain.cell_center(x)))).collect();
        Self::from_real(domain, v)
    }

    pub fn from_fn_complex(domain: &Domain, f: impl Fn(&[f64]) -> (f64, f64)) -> Result<Self> {
        let v = (0..domain.cells())
            .map(|x| {
                let (re, im) = f(&domain.cell_center(x));
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        Self::from_samples(domain, Samples::Complex(v))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn samples(&self) -> &Samples<T> {
        &self.samples
    }

    pub fn get(&self, x: &[usize]) -> Result<Complex<T>> {
        Ok(self.samples.get(self.domain.linear_index(x)?))
    }

    pub fn magnitudes(&self) -> Vec<T> {
        self.samples.magnitudes()
    }

    /// Spatial mean (complex).
    pub fn mean(&self) -> Complex<T> {
        let n = self.samples.len();
        let mut re = crate::scalar::Accumulator::new();
        let mut im = crate::scalar::Accumulator::new();
        for i in 0..n {
            let z = self.samples.get(i);
            re.add(z.re);
            im.add(z.im);
        }
        Complex::new(re.value(), im.value()) / T::lit(n as f64)
    }

    pub fn is_zero(&self) -> bool {
        (0..self.samples.len()).all(|i| self.samples.magnitude(i) == T::zero())
    }

    pub fn scaled(&self, lambda: T) -> Self {
        BoundaryField {
            domain: self.domain.clone(),
            samples: self.samples.map_pointwise(|z| z * lambda),
            label: self.label.clone(),
        }
    }
}
