//! Seeded test-function families. Members are defined analytically, so the same member
//! can be sampled on every resolution of an experiment.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::{BoundaryField, HalfSpaceField};
use crate::kernels::{extend, KernelSpec};

use super::config::HarnessConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// One Fourier mode.
    Fourier,
    /// A few modes with seeded amplitudes and phases.
    BandLimited,
    /// Indicator of one Whitney box.
    Whitney,
    /// sum_k c_k g(2^k y) for a single low mode g.
    Lacunary,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Fourier => "fourier",
            FamilyKind::BandLimited => "band_limited",
            FamilyKind::Whitney => "whitney",
            FamilyKind::Lacunary => "lacunary",
        }
    }

}

#[derive(Clone, Debug, PartialEq)]
struct Mode {
    xi: Vec<i64>,
    amp: f64,
    phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Modes(Vec<Mode>),
    Whitney { k: i32, offset: Vec<i64> },
    Zero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub id: String,
    shape: Shape,
}

impl Member {
    pub fn zero() -> Self {
        Member { id: "zero".into(), shape: Shape::Zero }
    }

    pub fn has_boundary(&self) -> bool {
        !matches!(self.shape, Shape::Whitney { .. })
    }

    /// Boundary data sum amp cos(2 pi xi.y / side + phase); mean zero.
    pub fn boundary(&self, dom: &Domain) -> Result<Option<BoundaryField<f64>>> {
        let modes = match &self.shape {
            Shape::Modes(m) => m.as_slice(),
            Shape::Zero => &[],
            Shape::Whitney { .. } => return Ok(None),
        };
        let k0 = 2.0 * PI / dom.side();
        let f = BoundaryField::from_fn(dom, |y| {
            modes
                .iter()
                .map(|m| {
                    let dot: f64 = m.xi.iter().zip(y).map(|(a, b)| *a as f64 * b).sum();
                    m.amp * (k0 * dot + m.phase).cos()
                })
                .sum()
        })?;
        Ok(Some(f.with_label(self.id.clone())))
    }

    /// Half-space field: the kernel extension of the boundary data, or the Whitney indicator.
    pub fn field(&self, dom: &Domain, kernel: &KernelSpec) -> Result<HalfSpaceField<f64>> {
        if let Shape::Whitney { k, offset } = &self.shape {
            let l = 2f64.powi(*k);
            let f = HalfSpaceField::from_fn(dom, |s, y| {
                let inside = s > l / 2.0 && s <= l && y.iter().zip(offset).all(|(v, o)| (v / l).floor() as i64 == *o);
                if inside { 1.0 } else { 0.0 }
            })?;
            return Ok(f.with_label(self.id.clone()));
        }
        let b = self.boundary(dom)?.expect("mode members have boundary data");
        Ok(extend(&b, kernel, dom)?.with_label(self.id.clone()))
    }
}

fn wave_vector(rng: &mut ChaCha8Rng, d: usize, max: i64) -> Vec<i64> {
    loop {
        let xi: Vec<i64> = (0..d).map(|_| rng.gen_range(-max..=max)).collect();
        if xi.iter().any(|v| *v != 0) {
            return xi;
        }
    }
}

fn member(cfg: &HarnessConfig, index: usize, kind: FamilyKind) -> Member {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let d = cfg.domain.d;
    let max = cfg.families.max_mode;
    let shape = match kind {
        FamilyKind::Fourier => {
            Shape::Modes(vec![Mode { xi: wave_vector(&mut rng, d, max), amp: 1.0, phase: rng.gen_range(0.0..2.0 * PI) }])
        }
        FamilyKind::BandLimited => {
            let n = rng.gen_range(3..=6);
            Shape::Modes(
                (0..n)
                    .map(|_| Mode {
                        xi: wave_vector(&mut rng, d, max),
                        amp: rng.gen_range(-1.0..1.0),
                        phase: rng.gen_range(0.0..2.0 * PI),
                    })
                    .collect(),
            )
        }
        FamilyKind::Whitney => {
            let k = rng.gen_range(cfg.domain.k_low..cfg.domain.k_low + cfg.domain.octaves);
            let per_axis = 1i64 << (cfg.domain.side_log2 - k);
            Shape::Whitney { k, offset: (0..d).map(|_| rng.gen_range(0..per_axis)).collect() }
        }
        FamilyKind::Lacunary => {
            let base = wave_vector(&mut rng, d, 3.min(max));
            let top = base.iter().map(|v| v.abs()).max().unwrap_or(1);
            let phase = rng.gen_range(0.0..2.0 * PI);
            let mut modes = Vec::new();
            let mut scale = 1i64;
            while top * scale <= max {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let xi = base.iter().map(|v| v * scale).collect();
                modes.push(Mode { xi, amp: sign * rng.gen_range(0.5..1.0), phase });
                scale *= 2;
            }
            Shape::Modes(modes)
        }
    };
    Member { id: format!("{}-{index:02}", kind.name()), shape }
}

/// The configured family: `count` members cycling through the kinds, plus the zero member.
pub fn generate(cfg: &HarnessConfig) -> Vec<Member> {
    let kinds = &cfg.families.kinds;
    let mut out: Vec<Member> =
        (0..cfg.families.count).map(|i| member(cfg, i, kinds[i % kinds.len()])).collect();
    if cfg.families.include_zero {
        out.push(Member::zero());
    }
    out
}

/// Wave numbers |xi| whose heat scale side / (2 pi |xi|) lies at least one octave inside
/// the sampled scale range on both ends.
pub fn resolved_band(dom: &Domain) -> (f64, f64) {
    let k = dom.side() / (2.0 * PI);
    (2.0 * k / dom.s_max(), k / (2.0 * dom.s_min()))
}

fn resolved_vector(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<i64> {
    let max = hi.floor() as i64;
    loop {
        let xi: Vec<i64> = (0..d).map(|_| rng.gen_range(-max..=max)).collect();
        let norm = xi.iter().map(|v| (v * v) as f64).sum::<f64>().sqrt();
        if norm >= lo && norm <= hi {
            return xi;
        }
    }
}

/// `boundary_count` band-limited members with every mode in [`resolved_band`] of the
/// coarsest grid, plus the zero member.
pub fn boundary_members(cfg: &HarnessConfig) -> Result<Vec<Member>> {
    let doms = cfg.domain.domains()?;
    let (lo, hi) = resolved_band(&doms[0]);
    let max = hi.min(cfg.families.max_mode as f64);
    if lo.ceil() > max {
        return Err(Error::Config(format!("no wave number in the resolved band [{lo:.3}, {hi:.3}]")));
    }
    let d = cfg.domain.d;
    let mut out: Vec<Member> = (0..cfg.families.boundary_count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(BOUNDARY_STREAM + i as u64);
            let n = rng.gen_range(3..=6);
            let modes = (0..n)
                .map(|_| Mode {
                    xi: resolved_vector(&mut rng, d, lo, max),
                    amp: rng.gen_range(-1.0..1.0),
                    phase: rng.gen_range(0.0..2.0 * PI),
                })
                .collect();
            Member { id: format!("resolved-{i:02}"), shape: Shape::Modes(modes) }
        })
        .collect();
    if cfg.families.include_zero {
        out.push(Member::zero());
    }
    Ok(out)
}

/// Stream offset keeping the characterization family apart from the main one.
const BOUNDARY_STREAM: u64 = 1 << 32;
