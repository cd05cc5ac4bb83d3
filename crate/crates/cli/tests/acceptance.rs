//! Acceptance criteria 1-10. Runs without the libtest harness so every criterion prints
//! one PASS/FAIL line; the process exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use tentkit::harness::family::generate;
use tentkit::harness::report::{write_jsonl, BandSummary, RatioReport};
use tentkit::harness::{run_suite, Claim, HarnessConfig, Record, Status, Suite};
use tentkit::kernels::{extend, KernelSpec};
use tentkit::tent::{change_of_angle_norm, tent_norm};
use tentkit::{AverageSpec, Boundary, Domain, ExponentTuple, Field};

const EQUIV: [f64; 2] = [0.125, 8.0];
const DRIFT: f64 = 0.1;
const PER_CRITERION: Duration = Duration::from_secs(300);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn ex(p: f64, q: f64, r: f64, beta: f64) -> ExponentTuple {
    ExponentTuple::new(p, q, r, beta).unwrap()
}

struct Runs {
    records: Vec<Record>,
    elapsed: Vec<(Suite, Duration)>,
}

impl Runs {
    fn new(cfg: &HarnessConfig) -> Self {
        let mut records = Vec::new();
        let mut elapsed = Vec::new();
        for s in Suite::ALL {
            let t = Instant::now();
            records.extend(run_suite(cfg, s).expect("suite runs"));
            elapsed.push((s, t.elapsed()));
        }
        Runs { records, elapsed }
    }

    fn time(&self, s: Suite) -> Duration {
        self.elapsed.iter().find(|(x, _)| *x == s).map(|(_, d)| *d).unwrap()
    }

    fn bands(&self, suite: Suite, prefix: &str) -> Vec<&BandSummary> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Record::Band(b) if b.suite == suite.name() && b.experiment.starts_with(prefix) => Some(b),
                _ => None,
            })
            .collect()
    }

    fn ratios(&self, suite: Suite, prefix: &str) -> Vec<&RatioReport> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Record::Ratio(x) if x.suite == suite.name() && x.experiment.starts_with(prefix) => Some(x),
                _ => None,
            })
            .collect()
    }
}

/// Largest |ratio - 1| over non-degenerate reports, and how many there were.
fn max_dev(reports: &[&RatioReport]) -> (f64, usize) {
    let vals: Vec<f64> = reports.iter().filter_map(|r| r.ratio).collect();
    (vals.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max), vals.len())
}

/// Checks a set of band summaries against [lo, hi], the drift limit, and a minimum count
/// of non-degenerate members per resolution.
fn bands_within(bands: &[&BandSummary], lo: f64, hi: f64, drift: Option<f64>, members: usize) -> Outcome {
    if bands.is_empty() {
        return outcome(false, "no experiments");
    }
    let mut worst = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    let mut bad = Vec::new();
    for b in bands {
        let ok_res = b.resolutions.len() >= 2
            && b.resolutions.iter().all(|r| {
                r.members - r.degenerate >= members
                    && r.lo.is_some_and(|v| v >= lo)
                    && r.hi.is_some_and(|v| v <= hi)
            });
        let d = b.drift.unwrap_or(f64::INFINITY);
        let ok_drift = drift.map_or(true, |lim| d <= lim);
        for r in &b.resolutions {
            worst.0 = worst.0.min(r.lo.unwrap_or(f64::NAN));
            worst.1 = worst.1.max(r.hi.unwrap_or(f64::NAN));
        }
        worst.2 = worst.2.max(d);
        if !(ok_res && ok_drift) {
            bad.push(b.experiment.clone());
        }
    }
    let detail = format!(
        "{} experiments, ratios in [{:.4}, {:.4}], max drift {:.4}{}",
        bands.len(),
        worst.0,
        worst.1,
        worst.2,
        if bad.is_empty() { String::new() } else { format!("; out of bounds: {}", bad.join(", ")) }
    );
    outcome(bad.is_empty(), detail)
}

fn timed(mut o: Outcome, spent: Duration, limit: Duration) -> Outcome {
    o.detail = format!("{} ({:.1} s)", o.detail, spent.as_secs_f64());
    if spent > limit {
        o.pass = false;
        o.detail.push_str(" over time limit");
    }
    o
}

fn criterion_1(runs: &Runs, cfg: &HarnessConfig) -> Outcome {
    let t = Instant::now();
    let (conv, n_conv) = max_dev(&runs.ratios(Suite::Equivalences, "convexity/"));
    let (seq, n_seq) = max_dev(&runs.ratios(Suite::Equivalences, "sequence_identity"));
    let dom = &cfg.domain.domains().unwrap()[0];
    let mut homog = 0.0f64;
    for m in generate(cfg) {
        let f = m.field(dom, &cfg.families.kernel).unwrap();
        for e in &cfg.exponents.tuples {
            let base = tent_norm(&f, e, &AverageSpec::STANDARD).unwrap().value;
            if base == 0.0 {
                continue;
            }
            for lambda in [0.5, 3.0, 1e3] {
                let v = tent_norm(&f.scaled(lambda), e, &AverageSpec::STANDARD).unwrap().value;
                homog = homog.max((v / (lambda * base) - 1.0).abs());
            }
        }
    }
    let expected = cfg.families.count * cfg.domain.resolutions.len() * cfg.exponents.tuples.len();
    let pass = conv <= 1e-9
        && n_conv == expected * cfg.exponents.convexity_powers.len()
        && seq <= 1e-12
        && n_seq == expected
        && homog <= 1e-12;
    let o = outcome(
        pass,
        format!("convexity max dev {conv:.2e} over {n_conv}, sequence {seq:.2e} over {n_seq}, homogeneity {homog:.2e}"),
    );
    timed(o, t.elapsed() + runs.time(Suite::Equivalences), PER_CRITERION)
}

/// Simpson's rule in log s for the integral of exp(-2 w^2 s^2) ds/s over (s0, s1].
fn gaussian_log_integral(w: f64, s0: f64, s1: f64) -> f64 {
    let n = 20_000;
    let (a, b) = (s0.ln(), s1.ln());
    let h = (b - a) / n as f64;
    let g = |u: f64| (-2.0 * w * w * u.exp().powi(2)).exp();
    let mut sum = g(a) + g(b);
    for i in 1..n {
        sum += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let modes = [(3.0, 1.0), (5.0, -0.6), (9.0, 0.8)];
    let side = 16.0;
    let e = ex(2.0, 2.0, 2.0, 0.0);
    let oracle = {
        // aligned scales fill the log-cells of (1/8, 2]
        let total: f64 = modes
            .iter()
            .map(|(xi, a)| a * a * side / 2.0 * gaussian_log_integral(2.0 * std::f64::consts::PI * xi / side, 0.125, 2.0))
            .sum();
        total.sqrt()
    };
    let mut errs = Vec::new();
    for (n, m) in [(128, 2), (128, 4), (128, 8), (256, 8)] {
        let dom = Domain::aligned(1, 4, n, -2, 4, m).unwrap();
        let b = Boundary::from_fn(&dom, |y| {
            modes.iter().map(|(xi, a)| a * (2.0 * std::f64::consts::PI * xi * y[0] / side).cos()).sum()
        })
        .unwrap();
        let f = extend(&b, &KernelSpec::HEAT, &dom).unwrap();
        let v = tent_norm(&f, &e, &AverageSpec::STANDARD).unwrap().value;
        errs.push((v / oracle - 1.0).abs());
    }
    let improving = errs[0] > errs[1] && errs[1] > errs[2] && errs[3] <= errs[2] * (1.0 + 1e-9) + 1e-15;

    let dom = Domain::aligned(1, 4, 128, -2, 4, 8).unwrap();
    let boxf = Field::from_fn(&dom, |s, y| if (1.0..=2.0).contains(&s) && y[0] < 1.0 { 1.0 } else { 0.0 }).unwrap();
    let bv = tent_norm(&boxf, &e, &AverageSpec::STANDARD).unwrap().value;
    let box_err = (bv / std::f64::consts::LN_2.sqrt() - 1.0).abs();

    let pass = errs[2] <= 0.02 && improving && box_err <= 0.02;
    let o = outcome(
        pass,
        format!(
            "heat field rel. error m=2,4,8 at n=128: {:.2e}, {:.2e}, {:.2e}; n=256: {:.2e}; sqrt(ln 2) box error {box_err:.2e}",
            errs[0], errs[1], errs[2], errs[3]
        ),
    );
    timed(o, t.elapsed(), PER_CRITERION)
}

fn criterion_3(runs: &Runs) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (suite, prefix) in [
        (Suite::Embeddings, "nesting_qr/"),
        (Suite::Embeddings, "nesting_r/"),
        (Suite::Embeddings, "subset_domination/"),
        (Suite::Embeddings, "quasi_triangle/"),
        (Suite::Duality, "holder_banach"),
    ] {
        let rs = runs.ratios(suite, prefix);
        let vals: Vec<f64> = rs.iter().filter_map(|r| r.ratio).collect();
        let worst = vals.iter().copied().fold(0.0, f64::max);
        let ok = !vals.is_empty()
            && worst <= 1.0 + 1e-12
            && rs.iter().all(|r| r.claim == Claim::Inequality && r.status != Status::Fail);
        pass &= ok;
        parts.push(format!("{} max {worst:.12} ({})", prefix.trim_end_matches('/'), vals.len()));
    }
    let spent = runs.time(Suite::Embeddings) + runs.time(Suite::Duality);
    timed(outcome(pass, parts.join(", ")), spent, PER_CRITERION)
}

fn criterion_4(base: &HarnessConfig) -> Outcome {
    let t = Instant::now();
    // side 32 and scales up to 1 keep 8 t inside half the torus
    let mut cfg = base.clone();
    cfg.domain.side_log2 = 5;
    cfg.domain.k_low = -3;
    cfg.domain.resolutions = vec![256];
    cfg.families.include_zero = false;
    let dom = &cfg.domain.domains().unwrap()[0];
    let d = dom.d() as f64;
    let fields: Vec<Field> = generate(&cfg).iter().map(|m| m.field(dom, &cfg.families.kernel).unwrap()).collect();
    let inf = f64::INFINITY;
    let tuples = [
        ex(2.0, 2.0, 2.0, 0.0),
        ex(1.0, 1.0, 1.0, 0.0),
        ex(0.5, 1.0, 2.0, 0.0),
        ex(inf, 2.0, 1.0, 0.0),
        ex(2.0, 0.5, inf, 0.0),
        ex(1.0, inf, 0.5, 0.0),
    ];
    let lambdas = [2.0f64, 4.0, 8.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for e in &tuples {
        let min = e.p.as_f64().min(e.q.as_f64()).min(e.r.as_f64());
        let bound = d / min + 0.1;
        let mut worst = f64::NEG_INFINITY;
        for f in &fields {
            let logs: Vec<f64> = lambdas.iter().map(|&l| change_of_angle_norm(f, e, l).unwrap().value.ln()).collect();
            let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
            let (mx, my) = (xs.iter().sum::<f64>() / 3.0, logs.iter().sum::<f64>() / 3.0);
            let slope = xs.iter().zip(&logs).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
                / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
            worst = worst.max(slope);
        }
        pass &= worst <= bound;
        parts.push(format!("{}: {worst:.3} <= {bound:.3}", tag(e)));
    }
    timed(outcome(pass, parts.join(", ")), t.elapsed(), PER_CRITERION)
}

fn tag(e: &ExponentTuple) -> String {
    format!("({},{},{})", e.p, e.q, e.r)
}

fn criterion_5(runs: &Runs, cfg: &HarnessConfig) -> Outcome {
    let mut bands = runs.bands(Suite::Equivalences, "dyadic_vs_continuous@");
    bands.extend(runs.bands(Suite::Equivalences, "median_vs_continuous/c=0.25@"));
    let jn = runs.bands(Suite::Equivalences, "john_nirenberg/");
    let alphas: Vec<String> = jn.iter().map(|b| b.experiment.clone()).collect();
    let all_alphas = ["alpha=0.5@", "alpha=1@", "alpha=2@"].iter().all(|a| alphas.iter().any(|x| x.contains(a)));
    bands.extend(jn);
    let mut o = bands_within(&bands, EQUIV[0], EQUIV[1], Some(DRIFT), cfg.families.count);
    o.pass &= all_alphas;
    timed(o, runs.time(Suite::Equivalences), PER_CRITERION)
}

fn criterion_6(runs: &Runs, cfg: &HarnessConfig) -> Outcome {
    let bands = runs.bands(Suite::Equivalences, "beyond_infinity/");
    let mut o = bands_within(&bands, EQUIV[0], EQUIV[1], None, cfg.families.count);
    o.pass &= bands.len() == 6;
    timed(o, runs.time(Suite::Equivalences), PER_CRITERION)
}

fn criterion_7(runs: &Runs, cfg: &HarnessConfig) -> Outcome {
    let (lp, n_lp) = max_dev(&runs.ratios(Suite::Interpolation, "lp_couple_constant/"));
    let mut bands = runs.bands(Suite::Interpolation, "tent_couple_k");
    bands.extend(runs.bands(Suite::Interpolation, "p_scale/"));
    bands.extend(runs.bands(Suite::Interpolation, "q_scale_endpoint/"));
    let mut o = bands_within(&bands, EQUIV[0], EQUIV[1], None, cfg.families.count);
    o.pass &= lp <= 0.03 && n_lp > 0 && bands.len() == 4;
    o.detail = format!("L^p couple constant max dev {lp:.2e} ({n_lp}); {}", o.detail);
    timed(o, runs.time(Suite::Interpolation), PER_CRITERION)
}

fn criterion_8(runs: &Runs, cfg: &HarnessConfig) -> Outcome {
    let bands = runs.bands(Suite::Characterization, "heat_vs_lp_block/r=");
    let mut o = bands_within(&bands, EQUIV[0], EQUIV[1], Some(DRIFT), cfg.families.boundary_count);
    o.pass &= bands.len() == 3 && cfg.families.boundary_count >= 10;
    timed(o, runs.time(Suite::Characterization), Duration::from_secs(900))
}

fn criterion_9(runs: &Runs, cfg: &HarnessConfig) -> Outcome {
    let conv = runs.ratios(Suite::Characterization, "convolution_inequality/alpha=");
    let finite = conv.iter().filter(|r| r.ratio.is_some_and(f64::is_finite)).count();
    let expected = cfg.families.boundary_count
        * cfg.domain.resolutions.len()
        * cfg.exponents.conv_alphas.len()
        * cfg.exponents.delta_offsets.len();
    let zero_flagged = conv.iter().filter(|r| r.ratio.is_none()).all(|r| r.status == Status::Degenerate);
    let mono = runs.ratios(Suite::Characterization, "convolution_monotone/");
    let mono_ok = !mono.is_empty() && mono.iter().all(|r| r.status != Status::Fail);
    let worst = mono.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    let rejections = runs.ratios(Suite::Characterization, "convolution_inequality/delta=d/alpha");
    let rejected = !rejections.is_empty() && rejections.iter().all(|r| r.status == Status::Pass);
    let o = outcome(
        finite == expected && zero_flagged && mono_ok && rejected,
        format!(
            "{finite}/{expected} finite ratios, worst successive ratio {worst:.4}, {} rejections of delta = d/alpha",
            rejections.len()
        ),
    );
    timed(o, runs.time(Suite::Characterization), PER_CRITERION)
}

fn criterion_10(runs: &Runs) -> Outcome {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("run{i}.jsonl"));
        let status = Command::new(env!("CARGO_BIN_EXE_tentkit"))
            .args(["suite", "all", "--out"])
            .arg(&path)
            .env("TENTKIT_THREADS", if i == 0 { "1" } else { "4" })
            .output()
            .expect("runs the binary")
            .status;
        outputs.push((status.code(), std::fs::read(&path).unwrap_or_default()));
    }
    let mut lib = Vec::new();
    write_jsonl(&runs.records, &mut lib).unwrap();
    let same = !outputs[0].1.is_empty() && outputs[0].1 == outputs[1].1 && outputs[0].1 == lib;
    let o = outcome(
        same,
        format!(
            "two CLI runs (1 and 4 threads) and the library run: {} bytes, identical = {same}, exit codes {:?}/{:?}",
            outputs[0].1.len(),
            outputs[0].0,
            outputs[1].0
        ),
    );
    timed(o, t.elapsed(), Duration::from_secs(600))
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture may be passed through; nothing here reads them
    let cfg = HarnessConfig::default();
    let runs = Runs::new(&cfg);
    let results = [
        ("1 exact identities", criterion_1(&runs, &cfg)),
        ("2 Fubini oracle", criterion_2()),
        ("3 constant-1 inequalities", criterion_3(&runs)),
        ("4 change of angle", criterion_4(&cfg)),
        ("5 discrete characterizations", criterion_5(&runs, &cfg)),
        ("6 beyond infinity", criterion_6(&runs, &cfg)),
        ("7 interpolation", criterion_7(&runs, &cfg)),
        ("8 heat characterization", criterion_8(&runs, &cfg)),
        ("9 convolution inequality", criterion_9(&runs, &cfg)),
        ("10 determinism", criterion_10(&runs)),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
