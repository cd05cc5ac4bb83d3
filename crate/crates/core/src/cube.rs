//! Dyadic cubes, Whitney boxes, cube sequences and subset families.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// The cube [2^k offset, 2^k (offset + 1))^d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub k: i32,
    pub offset: Vec<i64>,
}

impl DyadicCube {
    pub fn new(k: i32, offset: Vec<i64>) -> Self {
        DyadicCube { k, offset }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    /// Side length 2^k.
    pub fn side(&self) -> f64 {
        2f64.powi(self.k)
    }

    /// Lebesgue measure 2^{kd}.
    pub fn volume(&self) -> f64 {
        2f64.powi(self.k * self.dim() as i32)
    }

    /// The 2^d cubes of generation k-1 partitioning this cube, in lexicographic order.
    pub fn children(&self) -> Vec<DyadicCube> {
        let d = self.dim();
        (0..1usize << d)
            .map(|bits| {
                let offset = (0..d)
                    .map(|a| 2 * self.offset[a] + ((bits >> (d - 1 - a)) & 1) as i64)
                    .collect();
                DyadicCube { k: self.k - 1, offset }
            })
            .collect()
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube { k: self.k + 1, offset: self.offset.iter().map(|o| o.div_euclid(2)).collect() }
    }

    /// Ancestor at generation `k >= self.k`.
    pub fn ancestor(&self, k: i32) -> DyadicCube {
        let shift = (k - self.k) as u32;
        DyadicCube { k, offset: self.offset.iter().map(|o| o.div_euclid(1 << shift)).collect() }
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.k <= self.k && other.dim() == self.dim() && other.ancestor(self.k) == *self
    }

    pub fn whitney_box(&self) -> WhitneyBox {
        WhitneyBox { cube: self.clone() }
    }

    /// Checks that the cube lies in the torus fundamental domain and is resolved by the grid.
    pub fn check_on(&self, domain: &Domain) -> Result<()> {
        let (kc, ks) = domain.dyadic_levels()?;
        if self.dim() != domain.d() {
            return Err(Error::Range(format!("cube dimension {} != {}", self.dim(), domain.d())));
        }
        if self.k < kc || self.k > ks {
            return Err(Error::Range(format!(
                "cube generation {} outside the grid range [{kc}, {ks}]",
                self.k
            )));
        }
        let per_axis = 1i64 << (ks - self.k);
        if self.offset.iter().any(|&o| o < 0 || o >= per_axis) {
            return Err(Error::Range(format!("cube offset {:?} outside the torus", self.offset)));
        }
        Ok(())
    }

    /// Linear indices of the grid cells inside the cube, in row-major order within the cube.
    pub fn cells(&self, domain: &Domain) -> Result<Vec<usize>> {
        self.check_on(domain)?;
        let (kc, _) = domain.dyadic_levels()?;
        let w = 1usize << (self.k - kc);
        let d = domain.d();
        let n = domain.n_space();
        let mut out = Vec::with_capacity(w.pow(d as u32));
        for idx in 0..w.pow(d as u32) {
            let mut rem = idx;
            let mut local = vec![0usize; d];
            for a in (0..d).rev() {
                local[a] = rem % w;
                rem /= w;
            }
            let mut lin = 0usize;
            for a in 0..d {
                lin = lin * n + self.offset[a] as usize * w + local[a];
            }
            out.push(lin);
        }
        Ok(out)
    }

    /// All cubes of generation k on the torus of `domain`, in lexicographic offset order.
    pub fn generation(domain: &Domain, k: i32) -> Result<Vec<DyadicCube>> {
        let (kc, ks) = domain.dyadic_levels()?;
        if k < kc || k > ks {
            return Err(Error::Range(format!("generation {k} outside [{kc}, {ks}]")));
        }
        let per_axis = 1i64 << (ks - k);
        let d = domain.d();
        let total = (per_axis as usize).pow(d as u32);
        Ok((0..total)
            .map(|idx| {
                let mut rem = idx as i64;
                let mut offset = vec![0i64; d];
                for a in (0..d).rev() {
                    offset[a] = rem % per_axis;
                    rem /= per_axis;
                }
                DyadicCube { k, offset }
            })
            .collect())
    }
}

/// The Whitney box (l(Q)/2, l(Q)] x Q.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WhitneyBox {
    pub cube: DyadicCube,
}

impl WhitneyBox {
    pub fn scale_interval(&self) -> (f64, f64) {
        let l = self.cube.side();
        (l / 2.0, l)
    }

    /// Exact ds dy measure (l/2) l^d.
    pub fn measure(&self) -> Ratio<i128> {
        let d = self.cube.dim() as i32;
        pow2(self.cube.k - 1) * pow2(self.cube.k * d)
    }
}

/// 2^k as an exact rational; |k| must stay below 126.
pub fn pow2(k: i32) -> Ratio<i128> {
    assert!(k.abs() < 126, "2^{k} does not fit an i128 ratio");
    if k >= 0 {
        Ratio::from_integer(1i128 << k)
    } else {
        Ratio::new(1, 1i128 << (-k))
    }
}

/// Whitney boxes of every descendant of `p_cube` (itself included) down to generation `k_min`.
pub fn whitney_tiling(p_cube: &DyadicCube, k_min: i32) -> Result<Vec<WhitneyBox>> {
    if k_min > p_cube.k {
        return Err(Error::Parameter(format!(
            "k_min = {k_min} is above the cube generation {}",
            p_cube.k
        )));
    }
    let mut out = Vec::new();
    let mut level = vec![p_cube.clone()];
    loop {
        out.extend(level.iter().map(DyadicCube::whitney_box));
        if level[0].k == k_min {
            break;
        }
        level = level.iter().flat_map(DyadicCube::children).collect();
    }
    Ok(out)
}

/// Exact measure of (2^{k_min-1}, l(P)] x P, the Carleson box above the truncation floor.
pub fn truncated_carleson_measure(p_cube: &DyadicCube, k_min: i32) -> Ratio<i128> {
    let d = p_cube.dim() as i32;
    (pow2(p_cube.k) - pow2(k_min - 1)) * pow2(p_cube.k * d)
}

/// Finitely supported nonnegative sequence indexed by dyadic cubes.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeSequence<T> {
    d: usize,
    entries: BTreeMap<DyadicCube, T>,
}

impl<T: Real> CubeSequence<T> {
    pub fn new(d: usize) -> Self {
        CubeSequence { d, entries: BTreeMap::new() }
    }

    pub fn from_entries(d: usize, entries: impl IntoIterator<Item = (DyadicCube, T)>) -> Result<Self> {
        let mut s = Self::new(d);
        for (q, v) in entries {
            s.insert(q, v)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, q: DyadicCube, v: T) -> Result<()> {
        if q.dim() != self.d {
            return Err(Error::Parameter(format!("cube dimension {} != {}", q.dim(), self.d)));
        }
        if !(v >= T::zero() && v.is_finite()) {
            return Err(Error::Parameter(format!("sequence values must be finite and >= 0, got {v}")));
        }
        self.entries.insert(q, v);
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, q: &DyadicCube) -> T {
        self.entries.get(q).copied().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DyadicCube, &T)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Sets E_Q inside selected cubes, stored as masks over the cube's grid cells.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetFamily {
    epsilon: f64,
    entries: BTreeMap<DyadicCube, Vec<bool>>,
}

impl SubsetFamily {
    /// Every mask must have the cube's cell count and more than `epsilon` of its cells set.
    pub fn new(
        domain: &Domain,
        entries: impl IntoIterator<Item = (DyadicCube, Vec<bool>)>,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::Parameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        let mut map = BTreeMap::new();
        for (q, mask) in entries {
            let n = q.cells(domain)?.len();
            if mask.len() != n {
                return Err(Error::Parameter(format!(
                    "mask for {q:?} has {} cells, expected {n}",
                    mask.len()
                )));
            }
            let set = mask.iter().filter(|b| **b).count();
            if (set as f64) <= epsilon * n as f64 {
                return Err(Error::Parameter(format!(
                    "E_Q for {q:?} covers {set} of {n} cells, not more than epsilon = {epsilon}"
                )));
            }
            map.insert(q, mask);
        }
        Ok(SubsetFamily { epsilon, entries: map })
    }

    /// E_Q = Q for every cube of generations [k_lo, k_hi].
    pub fn full(domain: &Domain, k_lo: i32, k_hi: i32) -> Result<Self> {
        let mut entries = Vec::new();
        for k in k_lo..=k_hi {
            for q in DyadicCube::generation(domain, k)? {
                let n = q.cells(domain)?.len();
                entries.push((q, vec![true; n]));
            }
        }
        Self::new(domain, entries, 1.0 - 1e-12)
    }

    /// E_Q chosen by a predicate on (cube, position within the cube), for generations [k_lo, k_hi].
    pub fn from_predicate(
        domain: &Domain,
        k_lo: i32,
        k_hi: i32,
        epsilon: f64,
        pick: impl Fn(&DyadicCube, usize, usize) -> bool,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for k in k_lo..=k_hi {
            for q in DyadicCube::generation(domain, k)? {
                let n = q.cells(domain)?.len();
                let mask = (0..n).map(|i| pick(&q, i, n)).collect();
                entries.push((q, mask));
            }
        }
        Self::new(domain, entries, epsilon)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mask(&self, q: &DyadicCube) -> Option<&[bool]> {
        self.entries.get(q).map(Vec::as_slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_of_unit_interval() {
        let q = DyadicCube::new(0, vec![0]);
        assert_eq!(
            q.children(),
            vec![DyadicCube::new(-1, vec![0]), DyadicCube::new(-1, vec![1])]
        );
    }

    #[test]
    fn children_partition_in_2d() {
        let q = DyadicCube::new(-1, vec![1, 0]);
        let ch = q.children();
        assert_eq!(ch.len(), 4);
        let vol: f64 = ch.iter().map(DyadicCube::volume).sum();
        assert_eq!(vol, q.volume());
        for (i, a) in ch.iter().enumerate() {
            assert_eq!(a.parent(), q);
            assert!(q.contains(a));
            for b in &ch[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn parent_of_negative_offsets() {
        let q = DyadicCube::new(-3, vec![-1]);
        assert_eq!(q.parent(), DyadicCube::new(-2, vec![-1]));
    }

    #[test]
    fn tiling_two_levels() {
        let p = DyadicCube::new(1, vec![0]);
        let t = whitney_tiling(&p, 0).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(whitney_tiling(&p, 1).unwrap().len(), 1);
        assert!(whitney_tiling(&p, 2).is_err());
    }

    #[test]
    fn tiling_measure_is_exact() {
        for d in 1..=2usize {
            for k_min in -4..=1 {
                let p = DyadicCube::new(1, vec![0; d]);
                let total: Ratio<i128> =
                    whitney_tiling(&p, k_min).unwrap().iter().map(WhitneyBox::measure).sum();
                // direct oracle: l(P)|P| (1 - 2^{k_min-1}/l(P))
                let lp = pow2(1);
                let vol = pow2(d as i32);
                let oracle = lp * vol * (Ratio::from_integer(1) - pow2(k_min - 1) / lp);
                assert_eq!(total, oracle);
                assert_eq!(total, truncated_carleson_measure(&p, k_min));
            }
        }
    }

    #[test]
    fn generations_partition_the_torus() {
        let dom = Domain::new(2, 1.0, 16, 0.1, 0.2, 4).unwrap();
        for k in -4..=0 {
            let mut hits = vec![0u32; dom.cells()];
            for q in DyadicCube::generation(&dom, k).unwrap() {
                for c in q.cells(&dom).unwrap() {
                    hits[c] += 1;
                }
            }
            assert!(hits.iter().all(|&h| h == 1), "generation {k}");
        }
    }

    #[test]
    fn sequence_rejects_negative() {
        let mut s = CubeSequence::<f64>::new(1);
        assert!(s.insert(DyadicCube::new(0, vec![0]), -1.0).is_err());
        s.insert(DyadicCube::new(0, vec![0]), 2.0).unwrap();
        assert_eq!(s.get(&DyadicCube::new(0, vec![0])), 2.0);
        assert_eq!(s.get(&DyadicCube::new(-1, vec![0])), 0.0);
    }

    #[test]
    fn subset_family_validates_fraction() {
        let dom = Domain::new(1, 1.0, 8, 0.1, 0.2, 4).unwrap();
        let q = DyadicCube::new(-1, vec![0]);
        assert!(SubsetFamily::new(&dom, [(q.clone(), vec![true, true, false, false])], 0.5).is_err());
        assert!(SubsetFamily::new(&dom, [(q.clone(), vec![true, true, true, false])], 0.5).is_ok());
        assert!(SubsetFamily::new(&dom, [(q, vec![true; 3])], 0.5).is_err());
    }
}
