//! The acceptance suite: fourteen numbered checks confronting the enumerator, the
//! spectral engine and the trace machinery with oracles and with one another.

use crate::constrained::{cycle_expansion_dimension, hausdorff_dim, hensley_expansion, DIMENSION_ORDER};
use crate::cost::CostSpec;
use crate::enumerate::{count_pn, enumerate_necklaces, population, PopulationSummary};
use crate::error::{Error, Result};
use crate::operator::SpectralConfig;
use crate::spectral::{GaussianConstants, SpectralEngine, ENTROPY, LAMBDA_STEP};
use crate::stats::{
    empirical_mgf, empirical_moments, local_limit_window, slope_fit, standardized_ks, window_partition_total,
};
use crate::traces::{yk, SeriesTruncation};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::sync::OnceLock;
use std::time::Instant;

/// Asymptotic constant of `|P_N| / N²`.
pub const CARDINALITY_CONSTANT: f64 = 0.210_691_3;
/// `σ_2`, the dimension of continued fractions with digits in `{1, 2}`.
pub const SIGMA_2: f64 = 0.531_280_5;
/// `12 log 2 / π²`.
pub const MU_UNIT: f64 = 12.0 * LN_2 / (std::f64::consts::PI * std::f64::consts::PI);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub quick: bool,
    /// Bounds used for slopes, laws and quasi-powers.
    pub n_grid: Vec<f64>,
    /// Largest `N` of the brute-force comparison.
    pub brute_force_max: u64,
    /// Collocation order for derivative and eigenvalue checks.
    pub order: usize,
    pub trace_cutoff: u64,
    pub dimension_order: usize,
    pub w_grid: Vec<f64>,
}

impl VerifyConfig {
    pub fn full() -> Self {
        VerifyConfig {
            quick: false,
            n_grid: vec![1e2, 1e3, 1e4],
            brute_force_max: 50,
            order: 48,
            trace_cutoff: 10_000,
            dimension_order: DIMENSION_ORDER,
            w_grid: vec![-0.1, -0.05, -0.02, 0.02, 0.05, 0.1],
        }
    }

    /// `N ≤ 10³`, `D = 32`; only the checks that keep their meaning at that scale.
    pub fn quick() -> Self {
        VerifyConfig {
            quick: true,
            n_grid: vec![1e2, 10f64.powf(2.5), 1e3],
            brute_force_max: 50,
            order: 32,
            trace_cutoff: 1000,
            dimension_order: 32,
            w_grid: vec![-0.1, -0.05, -0.02, 0.02, 0.05, 0.1],
        }
    }

    fn runs(&self, id: u8) -> bool {
        !self.quick || matches!(id, 1 | 4 | 5 | 6 | 7 | 8 | 11 | 12)
    }

    fn spectral(&self) -> SpectralConfig {
        SpectralConfig::compact().with_order(self.order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub status: Status,
    pub tolerance: String,
    pub observed: BTreeMap<String, f64>,
    pub note: Option<String>,
    /// Wall-clock time; not serialized so that reports stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// One line: `[PASS] 3 entropy (...)`.
    pub fn summary_line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let obs: Vec<String> = self.observed.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        let mut line = format!(
            "[{tag}] {:>2} {} | tol: {} | {} | {:.2}s",
            self.id,
            self.title,
            self.tolerance,
            obs.join(" "),
            self.seconds
        );
        if let Some(n) = &self.note {
            line.push_str(" | ");
            line.push_str(n);
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub library_version: String,
    pub config: VerifyConfig,
    pub criteria: Vec<CriterionOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> Vec<u8> {
        self.criteria.iter().filter(|c| c.status == Status::Fail).map(|c| c.id).collect()
    }

    pub fn get(&self, id: u8) -> Option<&CriterionOutcome> {
        self.criteria.iter().find(|c| c.id == id)
    }
}

/// Outcome under construction.
struct Check {
    observed: BTreeMap<String, f64>,
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            observed: BTreeMap::new(),
            ok: true,
            notes: Vec::new(),
        }
    }

    fn record(&mut self, key: impl Into<String>, value: f64) {
        self.observed.insert(key.into(), value);
    }

    fn require(&mut self, condition: bool, what: impl Into<String>) {
        if !condition {
            self.ok = false;
            self.notes.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

/// Shared, lazily computed inputs.
struct Context {
    cfg: VerifyConfig,
    populations: OnceLock<Vec<PopulationSummary>>,
    unit: OnceLock<GaussianConstants>,
    chi1: OnceLock<GaussianConstants>,
    unit_engine: SpectralEngine,
}

fn cached<'a, T>(cell: &'a OnceLock<T>, make: impl FnOnce() -> Result<T>) -> Result<&'a T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = make()?;
    Ok(cell.get_or_init(|| v))
}

fn chi1() -> CostSpec {
    CostSpec::digit_indicator(1).expect("digit 1")
}

impl Context {
    fn populations(&self) -> Result<&Vec<PopulationSummary>> {
        cached(&self.populations, || {
            let costs = [CostSpec::unit(), chi1()];
            self.cfg
                .n_grid
                .iter()
                .map(|&n| population(n, &costs, &self.cfg.w_grid, None))
                .collect()
        })
    }

    fn population_at(&self, n: f64) -> Result<&PopulationSummary> {
        self.populations()?
            .iter()
            .find(|p| p.bound == n)
            .ok_or_else(|| Error::InvalidInput(format!("N = {n} is not on the grid")))
    }

    fn unit_constants(&self) -> Result<&GaussianConstants> {
        cached(&self.unit, || self.unit_engine.gaussian_constants())
    }

    fn chi1_constants(&self) -> Result<&GaussianConstants> {
        cached(&self.chi1, || {
            SpectralEngine::new(chi1(), self.cfg.spectral())?.gaussian_constants()
        })
    }

    fn largest_n(&self) -> f64 {
        self.cfg.n_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

const TITLES: [&str; 14] = [
    "exact small populations and brute-force agreement",
    "cardinality |P_N|/N^2",
    "entropy -lambda_s'(1,0)",
    "Gauss fixed point",
    "mean-cost identities lambda_w'(1,0)",
    "unit-cost factorization lambda(1,w)=e^w",
    "mean slope vs mu",
    "variance slope vs nu",
    "Gaussian law (KS distance)",
    "quasi-powers moment generating function",
    "trace identity for Y_k",
    "Hausdorff dimension sigma_M",
    "log epsilon concentration",
    "local limit law",
];

const TOLERANCES: [&str; 14] = [
    "exact",
    "ratio in [0.19,0.23] at the largest N, closer to 0.2106913 than at the previous N",
    "1e-8 (D=48, M_t=1e5)",
    "lambda 1e-12, eigenfunction 1e-10 sup-norm",
    "1e-7",
    "1e-11",
    "5% relative",
    "10% relative",
    "KS <= 0.1 at the largest N, strictly decreasing",
    "10% relative, gap shrinking in N",
    "gap <= 1e-8 and within declared tolerance",
    "sigma_2 +- 1e-5 against oracle, monotone in M, Hensley gap decreasing",
    "mean slope 2 within 5%, variance ratio <= 1.2",
    "window ratio in [0.5, 2], window masses sum to 1",
];

/// Run every criterion, reporting each outcome to `progress` as soon as it is known.
pub fn run_acceptance<F: FnMut(&CriterionOutcome)>(cfg: VerifyConfig, mut progress: F) -> Result<VerifyReport> {
    let ctx = Context {
        unit_engine: SpectralEngine::new(CostSpec::unit(), cfg.spectral())?,
        cfg,
        populations: OnceLock::new(),
        unit: OnceLock::new(),
        chi1: OnceLock::new(),
    };
    let mut criteria = Vec::with_capacity(14);
    for id in 1..=14u8 {
        let outcome = run_one(&ctx, id);
        progress(&outcome);
        criteria.push(outcome);
    }
    Ok(VerifyReport {
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        config: ctx.cfg,
        criteria,
    })
}

fn run_one(ctx: &Context, id: u8) -> CriterionOutcome {
    let idx = id as usize - 1;
    let start = Instant::now();
    let (status, observed, note) = if !ctx.cfg.runs(id) {
        (Status::Skipped, BTreeMap::new(), Some("not part of the quick subset".to_string()))
    } else {
        let mut check = Check::new();
        let result = match id {
            1 => small_populations(ctx, &mut check),
            2 => cardinality(ctx, &mut check),
            3 => entropy(&mut check),
            4 => gauss_fixed_point(ctx, &mut check),
            5 => mean_costs(ctx, &mut check),
            6 => factorization(ctx, &mut check),
            7 => mean_slope(ctx, &mut check),
            8 => variance_slope(ctx, &mut check),
            9 => gaussian_law(ctx, &mut check),
            10 => quasi_powers(ctx, &mut check),
            11 => trace_identity(ctx, &mut check),
            12 => dimension(ctx, &mut check),
            13 => log_epsilon(ctx, &mut check),
            14 => local_limit(ctx, &mut check),
            _ => unreachable!(),
        };
        if let Err(e) = result {
            check.require(false, format!("computation failed: {e}"));
        }
        let status = if check.ok { Status::Pass } else { Status::Fail };
        let note = (!check.notes.is_empty()).then(|| check.notes.join("; "));
        (status, check.observed, note)
    };
    CriterionOutcome {
        id,
        title: TITLES[idx].to_string(),
        status,
        tolerance: TOLERANCES[idx].to_string(),
        observed,
        note,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Primitive cycles found by brute force over every word of period `≤ max_period` with
/// digits `≤ max_digit`, each with its size `ε` in floating point.
///
/// Words are discarded once their digit product exceeds `n_max`, which is safe because
/// `ε ≥ q ≥ Π m_i`.
pub fn brute_force_cycles(n_max: u64, max_period: usize, max_digit: u64) -> Vec<(Vec<u64>, f64)> {
    fn size(word: &[u64]) -> f64 {
        // naive 2×2 product of [[0,1],[1,m]]
        let (mut a, mut b, mut c, mut d) = (1u128, 0u128, 0u128, 1u128);
        for &m in word {
            let m = m as u128;
            (a, b, c, d) = (b, a + m * b, d, c + m * d);
        }
        let t = (a + d) as f64;
        let even = word.len() % 2 == 0;
        let det = if even { 1.0 } else { -1.0 };
        let rho = 0.5 * (t + (t * t - 4.0 * det).sqrt());
        if even {
            rho
        } else {
            rho * rho
        }
    }
    fn rotations(word: &[u64]) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..word.len()).map(move |i| word[i..].iter().chain(&word[..i]).copied().collect())
    }
    fn is_primitive(word: &[u64]) -> bool {
        let p = word.len();
        (1..p).filter(|d| p % d == 0).all(|d| {
            let shifted: Vec<u64> = word[d..].iter().chain(&word[..d]).copied().collect();
            shifted != word
        })
    }
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<u64>, u64)> = vec![(Vec::new(), 1)];
    while let Some((word, product)) = stack.pop() {
        if !word.is_empty() && is_primitive(&word) && rotations(&word).all(|r| word <= r) {
            let eps = size(&word);
            if eps <= n_max as f64 {
                out.push((word.clone(), eps));
            }
        }
        if word.len() == max_period {
            continue;
        }
        for m in 1..=max_digit {
            if product * m > n_max {
                break;
            }
            let mut next = word.clone();
            next.push(m);
            stack.push((next, product * m));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn small_populations(ctx: &Context, check: &mut Check) -> Result<()> {
    let p3 = count_pn(3.0)?;
    let p4 = count_pn(4.0)?;
    check.record("P3", p3 as f64);
    check.record("P4", p4 as f64);
    check.require(p3 == 1, format!("|P_3| = {p3}"));
    check.require(p4 == 3, format!("|P_4| = {p4}"));
    let n_max = ctx.cfg.brute_force_max;
    let brute = brute_force_cycles(n_max, 9, 50);
    let mut mismatches = 0u64;
    for n in 2..=n_max {
        let mut expected: Vec<Vec<u64>> = brute
            .iter()
            .filter(|(_, eps)| *eps <= n as f64)
            .map(|(w, _)| w.clone())
            .collect();
        expected.sort();
        let mut found: Vec<Vec<u64>> = enumerate_necklaces(n as f64, None, &[])?
            .into_iter()
            .map(|o| o.word.digits().to_vec())
            .collect();
        found.sort();
        if found != expected {
            mismatches += 1;
        }
    }
    check.record("brute_force_cycles", brute.len() as f64);
    check.record("mismatched_bounds", mismatches as f64);
    check.require(mismatches == 0, format!("{mismatches} bounds disagree with brute force"));
    Ok(())
}

fn cardinality(ctx: &Context, check: &mut Check) -> Result<()> {
    let pops = ctx.populations()?;
    let mut sorted: Vec<&PopulationSummary> = pops.iter().collect();
    sorted.sort_by(|a, b| a.bound.total_cmp(&b.bound));
    let [.., prev, last] = sorted.as_slice() else {
        return Err(Error::InvalidInput("need at least two bounds".into()));
    };
    let ratio = |p: &PopulationSummary| p.count as f64 / (p.bound * p.bound);
    let (r_prev, r_last) = (ratio(prev), ratio(last));
    check.record("ratio_previous", r_prev);
    check.record("ratio_largest", r_last);
    check.record("count_largest", last.count as f64);
    check.require((0.19..=0.23).contains(&r_last), format!("ratio {r_last} outside [0.19, 0.23]"));
    check.require(
        (r_last - CARDINALITY_CONSTANT).abs() < (r_prev - CARDINALITY_CONSTANT).abs(),
        "ratio did not move closer to the constant",
    );
    Ok(())
}

fn entropy(check: &mut Check) -> Result<()> {
    let engine = SpectralEngine::new(CostSpec::unit(), SpectralConfig::default())?;
    let e = engine.entropy()?;
    check.record("spectral", e.spectral);
    check.record("closed_form", ENTROPY);
    check.record("discrepancy", e.discrepancy);
    check.require(e.discrepancy <= 1e-8, format!("discrepancy {:e}", e.discrepancy));
    Ok(())
}

fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn gauss_fixed_point(ctx: &Context, check: &mut Check) -> Result<()> {
    let sol = ctx.unit_engine.eigen(c64(1.0), c64(0.0))?;
    let op = ctx.unit_engine.operator(c64(1.0), c64(0.0))?;
    let lambda_err = (sol.lambda - 1.0).norm();
    let psi_err = sol
        .right_values
        .iter()
        .zip(op.nodes())
        .map(|(f, &x)| (f - 1.0 / ((1.0 + x) * LN_2)).norm())
        .fold(0.0, f64::max);
    check.record("lambda_error", lambda_err);
    check.record("eigenfunction_error", psi_err);
    check.require(lambda_err <= 1e-12, format!("|λ(1,0) − 1| = {lambda_err:e}"));
    check.require(psi_err <= 1e-10, format!("eigenfunction error {psi_err:e}"));
    Ok(())
}

fn mean_costs(ctx: &Context, check: &mut Check) -> Result<()> {
    let binary: f64 = (0..80).map(|k| (2f64.powi(-k)).ln_1p() / LN_2).sum();
    let mut cases = vec![(CostSpec::unit(), "unit".to_string(), 1.0)];
    for n in 1..=3u64 {
        let nf = n as f64;
        let closed = ((nf + 1.0) * (nf + 1.0) / (nf * (nf + 2.0))).log2();
        cases.push((CostSpec::digit_indicator(n)?, format!("chi{n}"), closed));
    }
    cases.push((CostSpec::binary_length(), "binlen".to_string(), binary));
    for (cost, name, closed) in cases {
        let engine = SpectralEngine::new(cost, ctx.cfg.spectral())?;
        let d = engine.lambda_w(c64(1.0), c64(0.0), LAMBDA_STEP)?;
        let err = (d.value.re - closed).abs();
        check.record(format!("{name}_error"), err);
        check.require(err <= 1e-7, format!("{name}: |λ_w′ − closed form| = {err:e}"));
    }
    Ok(())
}

fn factorization(ctx: &Context, check: &mut Check) -> Result<()> {
    for w in [-0.1, -0.05, 0.05, 0.1] {
        let l = ctx.unit_engine.lambda(c64(1.0), c64(w))?;
        let err = (l - c64(w).exp()).norm();
        check.record(format!("error_w{w:+}"), err);
        check.require(err <= 1e-11, format!("w = {w}: error {err:e}"));
    }
    Ok(())
}

fn slope_of(ctx: &Context, cost_id: &str, variance: bool) -> Result<f64> {
    let cost = if cost_id == "unit" { CostSpec::unit() } else { chi1() };
    let pts = ctx
        .populations()?
        .iter()
        .map(|p| {
            let m = empirical_moments(p, &cost)?;
            Ok((p.bound.ln(), if variance { m.variance } else { m.mean }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(slope_fit(&pts)?.slope)
}

fn mean_slope(ctx: &Context, check: &mut Check) -> Result<()> {
    let unit = ctx.unit_constants()?;
    let chi = ctx.chi1_constants()?;
    let s_unit = slope_of(ctx, "unit", false)?;
    let s_chi = slope_of(ctx, "chi1", false)?;
    check.record("mu_unit_spectral", unit.mu);
    check.record("mu_unit_closed_form", MU_UNIT);
    check.record("slope_unit", s_unit);
    check.record("mu_chi1_spectral", chi.mu);
    check.record("slope_chi1", s_chi);
    check.require(rel(s_unit, unit.mu) <= 0.05, format!("unit slope off by {:.3}", rel(s_unit, unit.mu)));
    check.require(rel(s_chi, chi.mu) <= 0.05, format!("chi1 slope off by {:.3}", rel(s_chi, chi.mu)));
    check.require(rel(unit.mu, MU_UNIT) <= 1e-6, "spectral μ disagrees with 12 log 2/π²");
    Ok(())
}

fn variance_slope(ctx: &Context, check: &mut Check) -> Result<()> {
    let unit = ctx.unit_constants()?;
    let s = slope_of(ctx, "unit", true)?;
    check.record("nu_spectral", unit.nu);
    check.record("slope", s);
    check.record("relative_gap", rel(s, unit.nu));
    check.require(rel(s, unit.nu) <= 0.10, format!("variance slope off by {:.3}", rel(s, unit.nu)));
    Ok(())
}

fn odd_share(p: &PopulationSummary) -> Result<f64> {
    let hist = p
        .cost("unit")
        .and_then(|a| a.histogram.as_ref())
        .ok_or_else(|| Error::UnsupportedCost("unit histogram missing".into()))?;
    let odd: u64 = hist.iter().filter(|(v, _)| *v % 2 != 0).map(|(_, c)| c).sum();
    Ok(odd as f64 / p.count as f64)
}

fn gaussian_law(ctx: &Context, check: &mut Check) -> Result<()> {
    let unit = ctx.unit_constants()?;
    let mut last = f64::INFINITY;
    let mut decreasing = true;
    for p in ctx.populations()? {
        let ks = standardized_ks(p, &CostSpec::unit(), unit.mu, unit.nu)?;
        check.record(format!("ks_N{:.0}", p.bound), ks);
        decreasing &= ks < last;
        last = ks;
    }
    check.require(decreasing, "KS distance not strictly decreasing");
    check.require(last <= 0.1, format!("KS {last:.4} above 0.1 at the largest N"));
    // any continuous law is at least half the heaviest atom away from a lattice law
    let top = ctx.population_at(ctx.largest_n())?;
    let hist = top.cost("unit").and_then(|a| a.histogram.as_ref()).expect("unit histogram");
    let heaviest = hist.values().copied().max().unwrap_or(0) as f64 / top.count as f64;
    check.record("atom_floor", 0.5 * heaviest);
    check.record("odd_period_share", odd_share(top)?);
    if last > 0.1 && 0.5 * heaviest > 0.1 {
        check.note(format!(
            "periods are almost all even, the heaviest atom holds {heaviest:.3}, so no continuous law is within {:.3}",
            0.5 * heaviest
        ));
    }
    Ok(())
}

fn quasi_powers(ctx: &Context, check: &mut Check) -> Result<()> {
    let grid: Vec<f64> = ctx.cfg.n_grid.iter().copied().filter(|&n| n >= 1e3).collect();
    for w in [0.05, -0.05] {
        let mut prev = f64::INFINITY;
        for &n in &grid {
            let p = ctx.population_at(n)?;
            let emp = empirical_mgf(p, &CostSpec::unit(), w)?;
            let pred = ctx.unit_engine.quasi_powers_prediction(w, n)?;
            let gap = rel(emp, pred);
            check.record(format!("gap_w{w:+}_N{n:.0}"), gap);
            check.require(gap <= 0.10, format!("w = {w}, N = {n}: gap {gap:.4}"));
            check.require(gap < prev, format!("w = {w}: gap did not shrink at N = {n}"));
            prev = gap;
        }
    }
    Ok(())
}

fn trace_identity(ctx: &Context, check: &mut Check) -> Result<()> {
    let trunc = SeriesTruncation::new(3, ctx.cfg.trace_cutoff)?;
    let unit = CostSpec::unit();
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        for s in [2.4, 3.0] {
            for w in [0.0, 0.05] {
                match yk(k, c64(s), c64(w), &unit, &trunc) {
                    Ok(r) => {
                        worst = worst.max(r.gap);
                        check.require(r.gap <= 1e-8, format!("k={k} s={s} w={w}: gap {:e}", r.gap));
                    }
                    Err(Error::IdentityViolation { gap, tolerance, .. }) => {
                        worst = worst.max(gap);
                        check.require(false, format!("k={k} s={s} w={w}: gap {gap:e} > {tolerance:e}"));
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    check.record("max_gap", worst);
    Ok(())
}

fn dimension(ctx: &Context, check: &mut Check) -> Result<()> {
    let order = ctx.cfg.dimension_order;
    let s2 = hausdorff_dim(2, order)?;
    let oracle = cycle_expansion_dimension(2, 14)?;
    check.record("sigma_2", s2.sigma_m);
    check.record("sigma_2_cycle_expansion", oracle);
    check.record("sigma_2_doubling_drift", s2.doubling_drift);
    check.require((s2.sigma_m - SIGMA_2).abs() <= 1e-5, format!("σ_2 = {}", s2.sigma_m));
    check.require((s2.sigma_m - oracle).abs() <= 1e-5, "collocation and cycle expansion disagree");
    let ms: &[u64] = if ctx.cfg.quick { &[2, 3, 5, 10, 20] } else { &[2, 3, 5, 10, 20, 50, 100] };
    let mut sigmas = vec![s2.sigma_m];
    for &m in &ms[1..] {
        sigmas.push(hausdorff_dim(m, order)?.sigma_m);
    }
    check.require(sigmas.windows(2).all(|p| p[0] < p[1]), "σ_M not increasing in M");
    let mut prev = f64::INFINITY;
    for (&m, &s) in ms.iter().zip(&sigmas) {
        if m < 10 {
            continue;
        }
        let h = hensley_expansion(m);
        let gap = rel(2.0 * (s - 1.0), h);
        check.record(format!("hensley_gap_M{m}"), gap);
        check.require(gap < prev, format!("Hensley gap not decreasing at M = {m}"));
        prev = gap;
    }
    Ok(())
}

fn log_epsilon(ctx: &Context, check: &mut Check) -> Result<()> {
    let mut pts = Vec::new();
    let mut variances = BTreeMap::new();
    for p in ctx.populations()? {
        let c = p.count as f64;
        let mean = p.log_epsilon_sum.value() / c;
        let var = (p.log_epsilon_sq_sum.value() / c - mean * mean).max(0.0);
        pts.push((p.bound.ln(), mean));
        variances.insert(p.bound.to_bits(), (p.bound, var));
        check.record(format!("variance_N{:.0}", p.bound), var);
    }
    let slope = slope_fit(&pts)?.slope;
    check.record("mean_slope", slope);
    check.require(rel(slope, 2.0) <= 0.05, format!("mean slope {slope:.4}, not 2"));
    let mut sorted: Vec<(f64, f64)> = variances.into_values().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let [.., (_, v_prev), (_, v_last)] = sorted.as_slice() {
        let ratio = v_last / v_prev;
        check.record("variance_ratio", ratio);
        check.require(ratio <= 1.2, format!("variance ratio {ratio:.3}"));
    }
    if rel(slope, 1.0) <= 0.05 {
        check.note("log ε ≤ log N on P_N, so its mean grows like log N, not 2 log N");
    }
    Ok(())
}

fn local_limit(ctx: &Context, check: &mut Check) -> Result<()> {
    let unit = ctx.unit_constants()?;
    let cost = CostSpec::unit();
    let p = ctx.population_at(ctx.largest_n())?;
    let win = local_limit_window(p, &cost, 0.0, unit.mu, unit.nu)?;
    let ratio = win.empirical / win.prediction;
    check.record("empirical", win.empirical);
    check.record("prediction", win.prediction);
    check.record("ratio", ratio);
    check.require((0.5..=2.0).contains(&ratio), format!("ratio {ratio:.4} outside [0.5, 2]"));
    let (windows, count) = window_partition_total(p, &cost)?;
    check.record("window_total_minus_count", windows as f64 - count as f64);
    check.require(windows == count, "window masses do not sum to 1");
    let odd = odd_share(p)?;
    check.record("odd_period_share", odd);
    if !(0.5..=2.0).contains(&ratio) && odd < 1e-3 {
        check.note(format!(
            "odd periods are a {odd:.1e} share, so the period is effectively on 2Z and even windows carry twice the span-1 mass"
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_small_cases() {
        let b = brute_force_cycles(4, 9, 50);
        let words: Vec<&Vec<u64>> = b.iter().map(|(w, _)| w).collect();
        assert_eq!(words, vec![&vec![1], &vec![1, 2]]);
        assert!((b[0].1 - crate::lft::PHI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn quick_run_passes() {
        let report = run_acceptance(VerifyConfig::quick(), |_| {}).unwrap();
        for c in &report.criteria {
            assert_ne!(c.status, Status::Fail, "{}", c.summary_line());
        }
        assert_eq!(report.criteria.iter().filter(|c| c.status == Status::Skipped).count(), 6);
        let json = serde_json::to_string(&report).unwrap();
        assert!(!json.contains("seconds"));
    }
}
