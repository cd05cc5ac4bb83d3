//! TOML experiment configuration. Every key has a default, so an empty file is valid.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::exponent::{Exponent, ExponentTuple};
use crate::kernels::KernelSpec;

use super::family::FamilyKind;
use super::suites::Suite;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub seed: u64,
    pub domain: DomainConfig,
    pub exponents: ExponentConfig,
    pub families: FamilyConfig,
    pub suites: SuiteConfig,
    pub bands: Bands,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            seed: 20240611,
            domain: DomainConfig::default(),
            exponents: ExponentConfig::default(),
            families: FamilyConfig::default(),
            suites: SuiteConfig::default(),
            bands: Bands::default(),
        }
    }
}

/// Aligned grid: side 2^side_log2, Whitney generations k_low .. k_low + octaves - 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub d: usize,
    pub side_log2: i32,
    pub resolutions: Vec<usize>,
    pub k_low: i32,
    pub octaves: i32,
    pub m_scale: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig { d: 1, side_log2: 4, resolutions: vec![128, 256], k_low: -2, octaves: 4, m_scale: 8 }
    }
}

impl DomainConfig {
    pub fn domains(&self) -> Result<Vec<Domain>> {
        if self.octaves < 1 {
            return Err(Error::Config(format!("domain.octaves = {} must be at least 1", self.octaves)));
        }
        if self.resolutions.is_empty() {
            return Err(Error::Config("domain.resolutions is empty".into()));
        }
        self.resolutions
            .iter()
            .map(|&n| Domain::aligned(self.d, self.side_log2, n, self.k_low, self.octaves as usize, self.m_scale))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentConfig {
    /// Tuples for the equivalence suite.
    pub tuples: Vec<ExponentTuple>,
    /// Outer exponents for the John-Nirenberg comparison.
    pub jn_alphas: Vec<f64>,
    pub convexity_powers: Vec<f64>,
    pub median_c: f64,
    pub beyond_q: Vec<Exponent>,
    pub beyond_alpha: Vec<f64>,
    pub theta: f64,
    pub char_beta: f64,
    pub char_q: f64,
    pub char_r: Vec<Exponent>,
    /// delta - d/alpha for the convolution inequality.
    pub delta_offsets: Vec<f64>,
    pub conv_alphas: Vec<f64>,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        let t = |p: f64, q: f64, r: f64, b: f64| ExponentTuple { p: p.into(), q: q.into(), r: r.into(), beta: b };
        ExponentConfig {
            tuples: vec![t(2.0, 2.0, 2.0, 0.0), t(1.0, 1.0, 2.0, 0.5), t(f64::INFINITY, 2.0, 1.0, 0.0)],
            jn_alphas: vec![0.5, 1.0, 2.0],
            convexity_powers: vec![0.5, 2.0, 3.0],
            median_c: 0.25,
            beyond_q: vec![Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinite],
            beyond_alpha: vec![0.5, 1.0],
            theta: 0.5,
            char_beta: -0.5,
            char_q: 2.0,
            char_r: vec![Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinite],
            delta_offsets: vec![0.05, 0.25, 1.0, 3.0],
            conv_alphas: vec![1.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    pub count: usize,
    pub kinds: Vec<FamilyKind>,
    /// Largest wave number of any member; must stay below the coarsest Nyquist index.
    pub max_mode: i64,
    /// Kernel turning boundary members into half-space fields.
    pub kernel: KernelSpec,
    /// Appends an all-zero member, which every suite must flag as degenerate.
    pub include_zero: bool,
    /// Members used by the characterization suite (boundary-data members only).
    pub boundary_count: usize,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            count: 20,
            kinds: vec![FamilyKind::Fourier, FamilyKind::BandLimited, FamilyKind::Whitney, FamilyKind::Lacunary],
            max_mode: 24,
            kernel: KernelSpec::GaussWeierstrass { order: 1 },
            include_zero: true,
            boundary_count: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub run: Vec<Suite>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { run: Suite::ALL.to_vec() }
    }
}

/// Pass criteria. Equivalences pass inside `equivalence`, constant-1 inequalities below
/// 1 + `exact`, identities within `identity` relative error, bounded embeddings below
/// `equivalence[1]`, and two resolutions may move a band by at most `drift`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bands {
    pub equivalence: [f64; 2],
    pub exact: f64,
    pub identity: f64,
    pub drift: f64,
    /// Relative tolerance of the analytic interpolation constant.
    pub analytic: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Bands { equivalence: [0.125, 8.0], exact: 1e-12, identity: 1e-9, drift: 0.1, analytic: 0.03 }
    }
}

impl HarnessConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: HarnessConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let doms = self.domain.domains()?;
        let coarse = doms.iter().map(|d| d.n_space()).min().unwrap_or(0) as i64;
        if self.families.max_mode < 1 || 2 * self.families.max_mode >= coarse {
            return Err(Error::Config(format!(
                "families.max_mode = {} must lie in [1, {}) for n_space = {coarse}",
                self.families.max_mode,
                coarse / 2
            )));
        }
        if self.families.kinds.is_empty() {
            return Err(Error::Config("families.kinds is empty".into()));
        }
        self.families.kernel.validate()?;
        for e in &self.exponents.tuples {
            e.validate()?;
        }
        let b = &self.bands;
        if !(b.equivalence[0] > 0.0 && b.equivalence[1] >= b.equivalence[0]) {
            return Err(Error::Config(format!("bad equivalence band {:?}", b.equivalence)));
        }
        if !(self.exponents.theta > 0.0 && self.exponents.theta < 1.0) {
            return Err(Error::Config(format!("exponents.theta = {} must lie in (0, 1)", self.exponents.theta)));
        }
        if !(self.exponents.median_c > 0.0 && self.exponents.median_c < 1.0) {
            return Err(Error::Config("exponents.median_c must lie in (0, 1)".into()));
        }
        Ok(())
    }
}
