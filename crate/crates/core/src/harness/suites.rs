//! The five experiment suites. Each experiment evaluates lhs and rhs for every family
//! member at every resolution, then appends a band summary with refinement drift.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{DyadicCube, SubsetFamily};
use crate::domain::Domain;
use crate::dyadic::{dyadic_subset_norm, dyadic_tent_norm, local_means, median_field, sequence_norm, LocalMeanField};
use crate::error::{Error, Result};
use crate::exponent::{Exponent, ExponentTuple};
use crate::field::{BoundaryField, HalfSpaceField};
use crate::interp::{
    default_t_grid, geometric_t_grid, k_functional_lp, min_one_t_constant, real_interpolation_norm, scale_splits,
    tent_splits, CoupleSpec,
};
use crate::kernels::{
    check_kernel_order, convolution_inequality_check, covering_range, extend, f_endpoint_norm, lp_block_transform,
    KernelSpec,
};
use crate::quadrature::{lp_norm_spatial, AverageSpec};
use crate::tent::{beyond_infinity_norm, duality_pairing, jn_norm, tent_norm, z_norm};

use super::config::HarnessConfig;
use super::family::{boundary_members, generate, Member};
use super::report::{judge, summarize, Claim, Grid, RatioReport, Record, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Equivalences,
    Embeddings,
    Duality,
    Interpolation,
    Characterization,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Equivalences, Suite::Embeddings, Suite::Duality, Suite::Interpolation, Suite::Characterization];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Equivalences => "equivalences",
            Suite::Embeddings => "embeddings",
            Suite::Duality => "duality",
            Suite::Interpolation => "interpolation",
            Suite::Characterization => "characterization",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown suite '{s}'")))
    }
}

/// Runs the requested suites in order and returns their records.
pub fn run(cfg: &HarnessConfig, suites: &[Suite]) -> Result<Vec<Record>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for s in suites {
        out.extend(run_suite(cfg, *s)?);
    }
    Ok(out)
}

pub fn run_suite(cfg: &HarnessConfig, suite: Suite) -> Result<Vec<Record>> {
    let r = Runner::new(cfg, suite)?;
    match suite {
        Suite::Equivalences => equivalences(&r)?,
        Suite::Embeddings => embeddings(&r)?,
        Suite::Duality => duality(&r)?,
        Suite::Interpolation => interpolation(&r)?,
        Suite::Characterization => characterization(&r)?,
    }
    Ok(r.out.into_inner().expect("report lock"))
}

/// One lhs/rhs evaluation.
struct Eval {
    lhs: f64,
    rhs: f64,
    note: String,
}

impl Eval {
    fn new(lhs: f64, rhs: f64) -> Self {
        Eval { lhs, rhs, note: String::new() }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

struct Runner<'a> {
    cfg: &'a HarnessConfig,
    suite: Suite,
    doms: Vec<Domain>,
    members: Vec<Member>,
    /// fields[member][resolution]
    fields: Vec<Vec<HalfSpaceField<f64>>>,
    out: Mutex<Vec<Record>>,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a HarnessConfig, suite: Suite) -> Result<Self> {
        let doms = cfg.domain.domains()?;
        let members = if suite == Suite::Characterization { boundary_members(cfg)? } else { generate(cfg) };
        let fields = members
            .par_iter()
            .map(|m| doms.iter().map(|d| m.field(d, &cfg.families.kernel)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Runner { cfg, suite, doms, members, fields, out: Mutex::new(Vec::new()) })
    }

    fn band(&self, claim: Claim) -> ([f64; 2], f64) {
        let b = &self.cfg.bands;
        match claim {
            Claim::Equivalence | Claim::Bounded => (b.equivalence, 0.0),
            Claim::Inequality => ([0.0, 1.0 + b.exact], b.exact),
            Claim::Identity => ([1.0 - b.identity, 1.0 + b.identity], b.identity),
            Claim::Analytic => ([1.0 - b.analytic, 1.0 + b.analytic], b.analytic),
            Claim::Empirical => ([0.0, f64::MAX], 0.0),
            Claim::Rejection => ([0.0, 0.0], 0.0),
        }
    }

    fn report(&self, experiment: &str, claim: Claim, exponents: &str, member: &str, dom: &Domain, ev: Result<Eval>) -> RatioReport {
        let (band, tol) = self.band(claim);
        let (lhs, rhs, ratio, status, note) = match ev {
            Ok(e) => {
                let (ratio, status) = judge(claim, e.lhs, e.rhs, band, tol);
                (e.lhs, e.rhs, ratio, status, e.note)
            }
            Err(e) => (f64::NAN, f64::NAN, None, Status::Fail, format!("error: {e}")),
        };
        RatioReport {
            suite: self.suite.name().into(),
            experiment: experiment.into(),
            member: member.into(),
            claim,
            lhs,
            rhs,
            ratio,
            exponents: exponents.into(),
            grid: Grid::from(dom),
            truncation: format!("s in [{:.6}, {:.6}], {} samples", dom.s_min(), dom.s_max(), dom.n_scales()),
            band,
            status,
            note,
        }
    }

    fn push(&self, reports: Vec<RatioReport>) {
        let summary = summarize(&reports, self.cfg.bands.drift);
        let mut out = self.out.lock().expect("report lock");
        out.extend(reports.into_iter().map(Record::Ratio));
        if let Some(s) = summary {
            out.push(Record::Band(s));
        }
    }

    /// Runs `eval(member index, resolution index)` over the whole family.
    fn experiment<F>(&self, experiment: &str, claim: Claim, exponents: &str, eval: F)
    where
        F: Fn(usize, usize) -> Result<Eval> + Sync,
    {
        let jobs: Vec<(usize, usize)> =
            (0..self.doms.len()).flat_map(|d| (0..self.members.len()).map(move |m| (m, d))).collect();
        let evals: Vec<Result<Eval>> = jobs.par_iter().map(|&(m, d)| eval(m, d)).collect();
        let reports = jobs
            .iter()
            .zip(evals)
            .map(|(&(m, d), ev)| self.report(experiment, claim, exponents, &self.members[m].id, &self.doms[d], ev))
            .collect();
        self.push(reports);
    }

    /// Runs a member-independent `eval(resolution index)`.
    fn grid_experiment<F>(&self, experiment: &str, claim: Claim, exponents: &str, label: &str, eval: F)
    where
        F: Fn(usize) -> Result<Eval> + Sync,
    {
        let evals: Vec<Result<Eval>> = (0..self.doms.len()).into_par_iter().map(&eval).collect();
        let reports = evals
            .into_iter()
            .enumerate()
            .map(|(d, ev)| self.report(experiment, claim, exponents, label, &self.doms[d], ev))
            .collect();
        self.push(reports);
    }

    /// Records whether `attempt` is rejected with a hypothesis or parameter error.
    fn rejection(&self, experiment: &str, exponents: &str, attempt: Result<()>) {
        let (status, note) = match attempt {
            Err(e @ (Error::Hypothesis(_) | Error::Parameter(_))) => (Status::Pass, format!("rejected: {e}")),
            Err(e) => (Status::Fail, format!("rejected with the wrong error: {e}")),
            Ok(()) => (Status::Fail, "accepted".into()),
        };
        let mut r = self.report(experiment, Claim::Rejection, exponents, "-", &self.doms[0], Ok(Eval::new(0.0, 0.0)));
        r.ratio = None;
        r.status = status;
        r.note = note;
        self.push(vec![r]);
    }

    fn field(&self, m: usize, d: usize) -> &HalfSpaceField<f64> {
        &self.fields[m][d]
    }

    /// Next nonzero member after m, wrapping; the zero member pairs with itself.
    fn partner(&self, m: usize) -> usize {
        if self.field(m, 0).is_zero() {
            return m;
        }
        let n = self.members.len();
        (1..n).map(|k| (m + k) % n).find(|&j| !self.field(j, 0).is_zero()).unwrap_or(m)
    }
}

fn ex(p: impl Into<Exponent>, q: impl Into<Exponent>, r: impl Into<Exponent>, beta: f64) -> ExponentTuple {
    ExponentTuple { p: p.into(), q: q.into(), r: r.into(), beta }
}

fn div(e: Exponent, m: f64) -> Exponent {
    match e {
        Exponent::Finite(v) => Exponent::Finite(v / m),
        Exponent::Infinite => Exponent::Infinite,
    }
}

fn conj(e: Exponent) -> Exponent {
    match e {
        Exponent::Finite(v) if v <= 1.0 => Exponent::Infinite,
        Exponent::Finite(v) => Exponent::Finite(v / (v - 1.0)),
        Exponent::Infinite => Exponent::Finite(1.0),
    }
}

fn tent(f: &HalfSpaceField<f64>, e: &ExponentTuple) -> Result<f64> {
    Ok(tent_norm(f, e, &AverageSpec::STANDARD)?.value)
}

fn z(f: &HalfSpaceField<f64>, e: &ExponentTuple) -> Result<f64> {
    Ok(z_norm(f, e, &AverageSpec::STANDARD)?.value)
}

fn means(f: &HalfSpaceField<f64>, r: Exponent) -> Result<LocalMeanField<f64>> {
    let (k0, k1) = f.domain().data_generations();
    local_means(f, r, k0, k1)
}

/// Restriction of `f` to the scales s <= a side / (2c) of every window, so that no
/// outer t reaching the data needs a ball wider than half the torus.
fn within_ball_rule(f: &HalfSpaceField<f64>, windows: &[AverageSpec]) -> Result<HalfSpaceField<f64>> {
    let dom = f.domain();
    let cap = windows.iter().map(|w| w.a * dom.side() / (2.0 * w.c)).fold(f64::INFINITY, f64::min);
    if cap >= dom.s_max() {
        return Ok(f.clone());
    }
    let n = (dom.m_scale() as f64 * (cap / dom.s_min()).log2() + 1e-9).floor() + 1.0;
    if n < 2.0 {
        return Err(Error::Geometry(format!("windows {windows:?} leave fewer than two scales")));
    }
    f.truncated(n as usize)
}

/// Experiment name tagged with the exponents it runs at.
fn at(name: &str, e: &ExponentTuple) -> String {
    format!("{name}@{},{},{},{}", e.p, e.q, e.r, e.beta)
}

/// beta0 - beta1 = d/p0 - d/p1 with p0 < p1, the scaling constraint of the embeddings.
pub fn check_embedding_gap(e0: &ExponentTuple, e1: &ExponentTuple, d: usize) -> Result<()> {
    let inv = |p: Exponent| if p.is_infinite() { 0.0 } else { 1.0 / p.as_f64() };
    if !(e0.p.as_f64() < e1.p.as_f64()) {
        return Err(Error::Parameter(format!("embedding needs p0 < p1, got {} and {}", e0.p, e1.p)));
    }
    let want = d as f64 * (inv(e0.p) - inv(e1.p));
    let got = e0.beta - e1.beta;
    if (got - want).abs() > 1e-12 {
        return Err(Error::Parameter(format!("embedding needs beta0 - beta1 = d/p0 - d/p1 = {want}, got {got}")));
    }
    Ok(())
}

fn equivalences(r: &Runner) -> Result<()> {
    let x = &r.cfg.exponents;
    for e in &x.tuples {
        let es = e.to_string();
        for &m in &x.convexity_powers {
            let em = ex(div(e.p, m), div(e.q, m), div(e.r, m), m * e.beta);
            r.experiment(&at(&format!("convexity/M={m}"), e), Claim::Identity, &es, |i, d| {
                let f = r.field(i, d);
                Ok(Eval::new(tent(&f.abs_pow(m), &em)?, tent(f, e)?.powf(m)))
            });
        }
        r.experiment(&at("dyadic_vs_continuous", e), Claim::Equivalence, &es, |i, d| {
            let f = r.field(i, d);
            Ok(Eval::new(dyadic_tent_norm(&means(f, e.r)?, e)?.value, tent(f, e)?))
        });
        r.experiment(&at("sequence_identity", e), Claim::Identity, &es, |i, d| {
            let f = r.field(i, d);
            let lm = means(f, e.r)?;
            let seq = sequence_norm(&lm.to_sequence(), f.domain(), e.p, e.q, e.beta)?;
            Ok(Eval::new(dyadic_tent_norm(&lm, e)?.value, seq))
        });
        r.experiment(&at(&format!("median_vs_continuous/c={}", x.median_c), e), Claim::Equivalence, &es, |i, d| {
            let f = r.field(i, d);
            let m = median_field(&means(f, e.r)?, e, x.median_c)?;
            Ok(Eval::new(lp_norm_spatial(&m, f.domain().cell_measure(), e.p), tent(f, e)?))
        });
        let windows = [AverageSpec::STANDARD, AverageSpec::new(0.25, 1.0, 2.0)?, AverageSpec::new(1.0, 2.0, 1.0)?];
        for (u, v) in [(1, 0), (2, 0), (1, 2)] {
            let (su, sv) = (windows[u], windows[v]);
            let name = format!("whitney_independence/({},{},{})/({},{},{})", su.a, su.b, su.c, sv.a, sv.b, sv.c);
            r.experiment(&at(&name, e), Claim::Equivalence, &es, |i, d| {
                let f = within_ball_rule(r.field(i, d), &[su, sv])?;
                let note = if f.domain().n_scales() < r.field(i, d).domain().n_scales() {
                    format!("scales up to {:.4}", f.domain().s_max())
                } else {
                    String::new()
                };
                Ok(Eval::new(tent_norm(&f, e, &su)?.value, tent_norm(&f, e, &sv)?.value).note(note))
            });
        }
        if e.p.is_infinite() {
            for &alpha in &x.jn_alphas {
                r.experiment(&at(&format!("john_nirenberg/alpha={alpha}"), e), Claim::Equivalence, &es, |i, d| {
                    let f = r.field(i, d);
                    Ok(Eval::new(jn_norm(f, e, alpha)?.value, tent(f, e)?))
                });
            }
        }
    }
    for &q in &x.beyond_q {
        for &alpha in &x.beyond_alpha {
            let ez = ex(Exponent::Infinite, Exponent::Infinite, q, alpha);
            let name = format!("beyond_infinity/q={q},alpha={alpha}");
            r.experiment(&name, Claim::Equivalence, &format!("beta=0 vs Z{ez}"), |i, d| {
                let f = r.field(i, d);
                Ok(Eval::new(beyond_infinity_norm(f, q, 0.0, alpha)?.value, z(f, &ez)?))
            });
        }
    }
    Ok(())
}

/// E_Q: a rotating run of just over half of each cube's cells.
fn subset_family(dom: &Domain) -> Result<SubsetFamily> {
    let (k0, k1) = dom.data_generations();
    let mut entries = Vec::new();
    for k in k0..=k1 {
        for (j, q) in DyadicCube::generation(dom, k)?.into_iter().enumerate() {
            let n = q.cells(dom)?.len();
            let set = n / 2 + 1;
            let mask = (0..n).map(|c| (c + j) % n < set).collect();
            entries.push((q, mask));
        }
    }
    SubsetFamily::new(dom, entries, 0.5)
}

fn embeddings(r: &Runner) -> Result<()> {
    let d = r.cfg.domain.d;
    let dd = d as f64;
    for p in [1.0, 2.0] {
        let (e0, e1) = (ex(p, 1.0, 2.0, 0.0), ex(p, 2.0, 1.0, 0.0));
        // Jensen on Whitney boxes of measure (2^d - 1)/d
        let factor = ((2f64.powi(d as i32) - 1.0) / dd).powf(1.0 - 0.5);
        r.experiment(&at("nesting_qr/dyadic", &e0), Claim::Inequality, &format!("{e1} vs {e0}"), |i, k| {
            let f = r.field(i, k);
            let lhs = dyadic_tent_norm(&means(f, e1.r)?, &e1)?.value;
            let rhs = dyadic_tent_norm(&means(f, e0.r)?, &e0)?.value;
            Ok(Eval::new(lhs, factor * rhs))
        });
    }
    for p in [Exponent::Finite(2.0), Exponent::Infinite] {
        let (e0, e1) = (ex(p, 2.0, 2.0, 0.0), ex(p, 2.0, 1.0, 0.0));
        r.experiment(&at("nesting_r/continuous", &e0), Claim::Inequality, &format!("{e1} vs {e0}"), |i, k| {
            let f = r.field(i, k);
            Ok(Eval::new(tent(f, &e1)?, tent(f, &e0)?))
        });
    }
    for e in [ex(2.0, 2.0, 2.0, 0.0), ex(Exponent::Infinite, 2.0, 2.0, 0.0)] {
        r.experiment(&at("subset_domination/epsilon=0.5", &e), Claim::Inequality, &e.to_string(), |i, k| {
            let f = r.field(i, k);
            let lm = means(f, e.r)?;
            let fam = subset_family(f.domain())?;
            Ok(Eval::new(dyadic_subset_norm(&lm, &e, &fam)?.value, dyadic_tent_norm(&lm, &e)?.value))
        });
    }
    for e in [ex(2.0, 2.0, 2.0, 0.0), ex(0.5, 1.0, 2.0, 0.0), ex(1.0, 0.5, Exponent::Infinite, 0.3), ex(Exponent::Infinite, 2.0, 1.0, 0.0)] {
        let mu = e.mu();
        r.experiment(&at(&format!("quasi_triangle/mu={mu}"), &e), Claim::Inequality, &e.to_string(), |i, k| {
            let (f, g) = (r.field(i, k), r.field(r.partner(i), k));
            let lhs = tent(&f.add(g)?, &e)?.powf(mu);
            Ok(Eval::new(lhs, tent(f, &e)?.powf(mu) + tent(g, &e)?.powf(mu)))
        });
    }
    let pairs = [
        (ex(1.0, 2.0, 2.0, dd / 2.0), ex(2.0, 2.0, 2.0, 0.0)),
        (ex(2.0, 1.0, 2.0, dd / 2.0), ex(Exponent::Infinite, 2.0, 1.0, 0.0)),
    ];
    for (e0, e1) in pairs {
        check_embedding_gap(&e0, &e1, d)?;
        r.experiment(&at("hardy_sobolev", &e0), Claim::Bounded, &format!("{e1} from {e0}"), |i, k| {
            let f = r.field(i, k);
            Ok(Eval::new(tent(f, &e1)?, tent(f, &e0)?))
        });
        // mixed: T^{p0,q,r0}_{b0} -> Z^{p1,p0,r1}_{b1} and Z^{p0,p1,r0}_{b0} -> T^{p1,q,r1}_{b1}
        let zt = (e1.with_q(e0.p), e0);
        r.experiment(&at("mixed/tent_to_z", &e0), Claim::Bounded, &format!("Z{} from {}", zt.0, zt.1), |i, k| {
            let f = r.field(i, k);
            Ok(Eval::new(z(f, &zt.0)?, tent(f, &zt.1)?))
        });
        let tz = (e1, e0.with_q(e1.p));
        r.experiment(&at("mixed/z_to_tent", &e0), Claim::Bounded, &format!("{} from Z{}", tz.0, tz.1), |i, k| {
            let f = r.field(i, k);
            Ok(Eval::new(tent(f, &tz.0)?, z(f, &tz.1)?))
        });
    }
    for e in [ex(2.0, 1.0, 2.0, 0.0), ex(1.0, 2.0, 2.0, 0.0), ex(Exponent::Infinite, 2.0, 2.0, 0.0)] {
        let lo = if e.p.as_f64() < e.q.as_f64() { e.p } else { e.q };
        let hi = if e.p.as_f64() < e.q.as_f64() { e.q } else { e.p };
        r.experiment(&at("tent_into_z/lower", &e), Claim::Bounded, &format!("{e} from Z(q={lo})"), |i, k| {
            let f = r.field(i, k);
            Ok(Eval::new(tent(f, &e)?, z(f, &e.with_q(lo))?))
        });
        r.experiment(&at("tent_into_z/upper", &e), Claim::Bounded, &format!("Z(q={hi}) from {e}"), |i, k| {
            let f = r.field(i, k);
            Ok(Eval::new(z(f, &e.with_q(hi))?, tent(f, &e)?))
        });
    }
    let bad = (ex(1.0, 2.0, 2.0, 0.0), ex(2.0, 2.0, 2.0, 0.0));
    r.rejection("hardy_sobolev/bad_gap", &format!("{} from {}", bad.1, bad.0), check_embedding_gap(&bad.0, &bad.1, d));
    Ok(())
}

fn duality(r: &Runner) -> Result<()> {
    let e2 = ex(2.0, 2.0, 2.0, 0.0);
    r.experiment("self_pairing", Claim::Identity, &e2.to_string(), |i, k| {
        let f = r.field(i, k);
        Ok(Eval::new(duality_pairing(f, f)?, tent(f, &e2)?.powi(2)))
    });
    let banach = [e2, ex(1.5, 3.0, 1.25, 0.3), ex(3.0, 1.5, 2.0, -0.2), ex(4.0, 1.0, 4.0, 0.5)];
    for e in banach {
        let dual = ex(conj(e.p), conj(e.q), conj(e.r), -e.beta);
        r.experiment(&at("holder_banach", &e), Claim::Inequality, &format!("{e} x {dual}"), |i, k| {
            let (f, g) = (r.field(i, k), r.field(r.partner(i), k));
            Ok(Eval::new(duality_pairing(f, g)?, tent(f, &e)? * tent(g, &dual)?))
        });
    }
    for e in [ex(2.0, 0.5, 2.0, 0.0), ex(1.0, 0.5, 2.0, 0.2)] {
        let dual = ex(conj(e.p), Exponent::Infinite, conj(e.r), -e.beta);
        r.experiment(&at("duality_q_below_one", &e), Claim::Empirical, &format!("{e} x {dual}"), |i, k| {
            let (g, f) = (r.field(i, k), r.field(r.partner(i), k));
            Ok(Eval::new(duality_pairing(f, g)?, tent(g, &e)? * tent(f, &dual)?))
        });
    }
    let dd = r.cfg.domain.d as f64;
    for e in [ex(0.5, 1.0, 2.0, 0.0), ex(0.75, 2.0, 1.0, -0.3)] {
        let p = e.p.as_f64();
        let dual = ex(Exponent::Infinite, Exponent::Infinite, conj(e.r), -e.beta + dd * (1.0 / p - 1.0));
        r.experiment(&at("duality_p_below_one", &e), Claim::Empirical, &format!("{e} x Z{dual}"), |i, k| {
            let (g, f) = (r.field(i, k), r.field(r.partner(i), k));
            Ok(Eval::new(duality_pairing(f, g)?, tent(g, &e)? * z(f, &dual)?))
        });
    }
    Ok(())
}

/// Unit-mass indicator: value 1 on the cube [0, 1)^d.
fn unit_indicator(dom: &Domain) -> Vec<f64> {
    (0..dom.cells()).map(|x| if dom.cell_center(x).iter().all(|c| *c < 1.0) { 1.0 } else { 0.0 }).collect()
}

fn interpolation(r: &Runner) -> Result<()> {
    let theta = r.cfg.exponents.theta;
    for (th, q) in [(theta, 1.0), (theta, 2.0), (0.3, 4.0)] {
        let name = format!("lp_couple_constant/theta={th},q={q}");
        r.grid_experiment(&name, Claim::Analytic, "(L^1, L^inf)", "unit_indicator", |d| {
            let dom = &r.doms[d];
            let g = unit_indicator(dom);
            let ks: Vec<(f64, f64)> =
                default_t_grid(1.0).into_iter().map(|t| (t, k_functional_lp(&g, dom.cell_measure(), 1.0, t))).collect();
            Ok(Eval::new(real_interpolation_norm(&ks, th, Exponent::Finite(q))?, min_one_t_constant(th, q)))
        });
    }

    let e0 = ex(1.0, 2.0, 2.0, 0.0);
    let couple = CoupleSpec::TentPair { e0 };
    r.experiment("tent_couple_k", Claim::Equivalence, &format!("({e0}, p1 = inf)"), |i, k| {
        let f = r.field(i, k);
        let lm = means(f, e0.r)?;
        let fam = tent_splits(&lm, &couple)?;
        let m = median_field(&lm, &e0, 0.25)?;
        let c = fam.transition();
        let mut worst: Option<(f64, f64, f64)> = None;
        for t in geometric_t_grid(c / 10.0, c * 10.0, 8)? {
            let (a, b) = (fam.k(t).value, k_functional_lp(&m, f.domain().cell_measure(), 1.0, t));
            let score = if a > 0.0 && b > 0.0 { (a / b).ln().abs() } else { f64::INFINITY };
            if worst.map_or(true, |w| score > (w.0 / w.1).ln().abs()) {
                worst = Some((a, b, t));
            }
        }
        let (a, b, t) = worst.expect("nonempty t-grid");
        Ok(Eval::new(a, b).note(format!("worst t = {t:.4e} of 2 decades around {c:.4e}")))
    });
    let p = 1.0 / (1.0 - theta);
    r.experiment(&format!("p_scale/theta={theta}"), Claim::Equivalence, &format!("({e0}, p1 = inf) vs p = {p}"), |i, k| {
        let f = r.field(i, k);
        let lm = means(f, e0.r)?;
        let fam = tent_splits(&lm, &couple)?;
        let ks: Vec<(f64, f64)> = default_t_grid(fam.transition()).into_iter().map(|t| (t, fam.k(t).value)).collect();
        let lhs = real_interpolation_norm(&ks, theta, Exponent::Finite(p))?;
        Ok(Eval::new(lhs, dyadic_tent_norm(&lm, &e0.with_p(p))?.value))
    });
    for pp in [Exponent::Finite(2.0), Exponent::Infinite] {
        let (e0, e1) = (ex(pp, 1.0, 2.0, 0.5), ex(pp, 2.0, 2.0, -0.5));
        let q = 2.0;
        let beta = (1.0 - theta) * e0.beta + theta * e1.beta;
        let ez = ex(pp, q, 2.0, beta);
        let couple = CoupleSpec::ScalePair { e0, e1 };
        let name = format!("q_scale_endpoint/p={pp}");
        r.experiment(&name, Claim::Equivalence, &format!("({e0}, {e1})_{theta},{q} vs Z{ez}"), |i, k| {
            let f = r.field(i, k);
            let fam = scale_splits(f, &couple, &AverageSpec::STANDARD)?;
            let ks: Vec<(f64, f64)> = default_t_grid(fam.transition()).into_iter().map(|t| (t, fam.k(t).value)).collect();
            Ok(Eval::new(real_interpolation_norm(&ks, theta, Exponent::Finite(q))?, z(f, &ez)?))
        });
    }
    Ok(())
}

fn characterization(r: &Runner) -> Result<()> {
    let x = r.cfg.exponents.clone();
    let (beta, q) = (x.char_beta, x.char_q);
    check_kernel_order(&KernelSpec::HEAT, beta)?;
    let boundary: Vec<Vec<BoundaryField<f64>>> = r
        .members
        .iter()
        .map(|m| r.doms.iter().map(|d| Ok(m.boundary(d)?.expect("boundary members"))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let endpoint = |i: usize, k: usize| -> Result<f64> {
        let f = &boundary[i][k];
        let (a, b) = covering_range(f.domain());
        f_endpoint_norm(&lp_block_transform(f, a, b)?, Exponent::Finite(q), beta)
    };
    for &rr in &x.char_r {
        let e = ex(Exponent::Infinite, q, rr, beta);
        r.experiment(&format!("heat_vs_lp_block/r={rr}"), Claim::Equivalence, &e.to_string(), |i, k| {
            let f = &boundary[i][k];
            let u = extend(f, &KernelSpec::HEAT, f.domain())?;
            Ok(Eval::new(tent(&u, &e)?, endpoint(i, k)?))
        });
    }
    let d = r.cfg.domain.d as f64;
    for &alpha in &x.conv_alphas {
        let deltas: Vec<f64> = x.delta_offsets.iter().map(|o| d / alpha + o).collect();
        let ratios = |i: usize, k: usize| -> Result<Vec<Option<f64>>> {
            let f = &boundary[i][k];
            let (a, b) = covering_range(f.domain());
            let g = lp_block_transform(f, a, b)?.weighted(beta);
            deltas.iter().map(|&dl| convolution_inequality_check(&g, dl, Exponent::Finite(q), alpha)).collect()
        };
        for (j, &dl) in deltas.iter().enumerate() {
            let name = format!("convolution_inequality/alpha={alpha},delta={dl}");
            r.experiment(&name, Claim::Empirical, &format!("q={q}, beta={beta}"), |i, k| {
                Ok(match ratios(i, k)?[j] {
                    Some(v) => Eval::new(v, 1.0),
                    None => Eval::new(0.0, 0.0).note("zero family"),
                })
            });
        }
        r.experiment(&format!("convolution_monotone/alpha={alpha}"), Claim::Inequality, &format!("q={q}, beta={beta}"), |i, k| {
            let v = ratios(i, k)?;
            if v.iter().any(|x| x.is_none()) {
                return Ok(Eval::new(0.0, 0.0).note("zero family"));
            }
            let v: Vec<f64> = v.into_iter().flatten().collect();
            let (j, _) = v
                .windows(2)
                .enumerate()
                .map(|(j, w)| (j, w[1] / w[0]))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            Ok(Eval::new(v[j + 1], v[j]).note(format!("delta {} -> {}", deltas[j], deltas[j + 1])))
        });
        let f0 = boundary[0][0].clone();
        let attempt = (|| {
            let (a, b) = covering_range(f0.domain());
            let g = lp_block_transform(&f0, a, b)?.weighted(beta);
            convolution_inequality_check(&g, d / alpha, Exponent::Finite(q), alpha).map(|_| ())
        })();
        r.rejection(&format!("convolution_inequality/delta=d/alpha,alpha={alpha}"), "delta = d/alpha", attempt);
    }
    r.rejection("heat_vs_lp_block/beta=0", "heat kernel, beta = 0", check_kernel_order(&KernelSpec::HEAT, 0.0));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn gap_check() {
        assert!(check_embedding_gap(&ex(1.0, 2.0, 2.0, 0.5), &ex(2.0, 2.0, 2.0, 0.0), 1).is_ok());
        assert!(check_embedding_gap(&ex(1.0, 2.0, 2.0, 0.0), &ex(2.0, 2.0, 2.0, 0.0), 1).is_err());
        assert!(check_embedding_gap(&ex(2.0, 2.0, 2.0, 0.5), &ex(1.0, 2.0, 2.0, 0.0), 1).is_err());
        assert_eq!(conj(Exponent::Finite(0.5)), Exponent::Infinite);
        assert_eq!(conj(Exponent::Finite(4.0)), Exponent::Finite(4.0 / 3.0));
    }

    #[test]
    fn small_run_is_deterministic_and_flags_zero() {
        let mut cfg = HarnessConfig::default();
        cfg.domain.resolutions = vec![32, 64];
        cfg.domain.side_log2 = 3;
        cfg.domain.k_low = -1;
        cfg.domain.octaves = 2;
        cfg.domain.m_scale = 2;
        cfg.families.count = 4;
        cfg.families.max_mode = 6;
        cfg.exponents.tuples.truncate(1);
        let a = run(&cfg, &[Suite::Duality]).unwrap();
        let b = run(&cfg, &[Suite::Duality]).unwrap();
        let (mut ja, mut jb) = (Vec::new(), Vec::new());
        super::super::report::write_jsonl(&a, &mut ja).unwrap();
        super::super::report::write_jsonl(&b, &mut jb).unwrap();
        assert_eq!(ja, jb);
        let zero: Vec<&RatioReport> = a
            .iter()
            .filter_map(|r| match r {
                Record::Ratio(x) if x.member == "zero" => Some(x),
                _ => None,
            })
            .collect();
        assert!(!zero.is_empty());
        assert!(zero.iter().all(|r| r.status == Status::Degenerate));
    }
}
