//! The six subcommands.

use crate::config::{self, check_bound, check_grid, ConfigError, CostName, FileConfig};
use crate::output::{to_value, Report, Sink, Table};
use crate::{Command, ConstantsArgs, DimensionArgs, EnumerateArgs, Outcome, StudyArgs, TracesArgs, VerifyArgs};
use anyhow::Result;
use num_complex::Complex64;
use rqi_core::constrained::{cycle_expansion_dimension, hausdorff_dim, hensley_expansion, threshold_probe};
use rqi_core::enumerate::write_audit_csv;
use rqi_core::spectral::{mean_cost_closed_form, LAMBDA_STEP, SIGMA_RESIDUAL};
use rqi_core::stats::{empirical_moments, empirical_study, log_epsilon_study};
use rqi_core::traces::{dirichlet_partials, matrix_orbit_duality, write_trace_audit_csv, yk, SeriesTruncation};
use rqi_core::verify::{run_acceptance, Status, VerifyConfig};
use rqi_core::{enumerate_necklaces, population, CostSpec, SpectralConfig, SpectralEngine};
use serde_json::json;
use std::io::Write;

const DEFAULT_W_GRID: [f64; 6] = [-0.1, -0.05, -0.02, 0.02, 0.05, 0.1];

pub fn dispatch(command: Command, file: &FileConfig, sink: &Sink) -> Result<Outcome> {
    match command {
        Command::Enumerate(a) => {
            let report = enumerate(a, file)?;
            match (&sink.out, report.files.first()) {
                // without an output directory the audit rows replace the summary on stdout
                (None, Some((_, audit))) => std::io::stdout().write_all(audit.as_bytes())?,
                _ => sink.emit(&report)?,
            }
        }
        Command::Constants(a) => sink.emit(&constants(a, file)?)?,
        Command::Dimension(a) => sink.emit(&dimension(a, file)?)?,
        Command::Traces(a) => sink.emit(&traces(a, file)?)?,
        Command::Study(a) => sink.emit(&study(a, file)?)?,
        Command::Verify(a) => return verify(a, sink),
    }
    Ok(Outcome::Done)
}

fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn resolve_cost(args: &crate::CostArgs, file: &FileConfig) -> Result<(CostName, Option<u64>, CostSpec)> {
    let name = args.cost.or(file.cost).unwrap_or(CostName::Unit);
    let digit = args.digit.or(file.digit);
    let spec = config::cost_spec(name, digit)?;
    Ok((name, digit, spec))
}

fn enumerate(a: EnumerateArgs, file: &FileConfig) -> Result<Report> {
    let n = a
        .n
        .or(file.n)
        .ok_or_else(|| ConfigError::new("$.n", "enumerate needs --n"))?;
    let n = check_bound("$.n", n)?;
    let (name, digit, cost) = resolve_cost(&a.cost, file)?;
    let digit_cap = a.digit_cap.or(file.digit_cap);
    if digit_cap == Some(0) {
        return Err(ConfigError::new("$.digit_cap", "must be at least 1").into());
    }
    let w_grid = a.w_grid.or(file.w_grid.clone()).unwrap_or(DEFAULT_W_GRID.to_vec());
    check_grid("$.w_grid", &w_grid, 0)?;

    let summary = population(n, std::slice::from_ref(&cost), &w_grid, digit_cap)?;
    let moments = empirical_moments(&summary, &cost).ok();
    let acc = summary.cost(&cost.id()).expect("requested cost");
    let log_eps_mean = summary.log_epsilon_sum.value() / summary.count.max(1) as f64;
    let body = json!({
        "count": summary.count,
        "necklaces": summary.necklaces,
        "max_period": summary.max_period,
        "ties_included": summary.ties_included,
        "count_over_n_squared": summary.count as f64 / (n * n),
        "cost": cost.id(),
        "mean": moments.map(|m| m.mean),
        "variance": moments.map(|m| m.variance),
        "histogram": acc.histogram,
        "mgf": acc.mgf.iter().map(|s| json!({"w": s.w, "sum_over_count": s.sum.value() / summary.count.max(1) as f64})).collect::<Vec<_>>(),
        "log_epsilon_mean": log_eps_mean,
    });
    let mut table = Table::new(["n", "count", "necklaces", "max_period", "cost", "mean", "variance"]);
    table.push(vec![
        n.to_string(),
        summary.count.to_string(),
        summary.necklaces.to_string(),
        summary.max_period.to_string(),
        cost.id(),
        moments.map_or(String::new(), |m| m.mean.to_string()),
        moments.map_or(String::new(), |m| m.variance.to_string()),
    ]);
    let mut files = Vec::new();
    if a.audit {
        let orbits = enumerate_necklaces(n, digit_cap, &[])?;
        let mut buf = Vec::new();
        write_audit_csv(&orbits, digit.unwrap_or(1), &mut buf)?;
        files.push(("audit.csv".to_string(), String::from_utf8(buf)?));
    }
    Ok(Report {
        command: "enumerate",
        config: json!({"n": n, "cost": name, "digit": digit, "digit_cap": digit_cap, "w_grid": w_grid, "audit": a.audit}),
        tolerances: json!({"size_test": "exact integer arithmetic"}),
        body,
        table,
        files,
    })
}

fn constants(a: ConstantsArgs, file: &FileConfig) -> Result<Report> {
    let (name, digit, cost) = resolve_cost(&a.cost, file)?;
    let digit_cap = a.digit_cap.or(file.digit_cap);
    let cfg = config::spectral_config(
        a.spectral.order.or(file.order),
        a.spectral.digit_truncation.or(file.digit_truncation),
        a.spectral.tail_order.or(file.tail_order),
        digit_cap,
    )?;
    let engine = SpectralEngine::new(cost.clone(), cfg)?;
    let constants = engine.gaussian_constants()?;
    let mut body = json!({ "constants": to_value(&constants)? });
    let mut table = Table::new(["quantity", "value"]);
    for (k, v) in [
        ("sigma0", constants.sigma0),
        ("mu", constants.mu),
        ("nu", constants.nu),
        ("mu1", constants.mu1),
        ("nu1", constants.nu1),
    ] {
        table.push(vec![k.to_string(), v.to_string()]);
    }
    if digit_cap.is_none() {
        let entropy = engine.entropy()?;
        let spectral = engine.lambda_w(c64(1.0), c64(0.0), LAMBDA_STEP)?.value.re;
        let series = mean_cost_closed_form(&cost, u64::MAX)?;
        body["entropy"] = to_value(&entropy)?;
        body["mean_cost"] = json!({
            "spectral": spectral,
            "series": series.value,
            "series_tail_bound": series.tail_bound,
            "gap": (spectral - series.value).abs(),
        });
        table.push(vec!["entropy".into(), entropy.spectral.to_string()]);
        table.push(vec!["mean_cost".into(), spectral.to_string()]);
    }
    Ok(Report {
        command: "constants",
        config: json!({"cost": name, "digit": digit, "spectral": to_value(&cfg)?}),
        tolerances: json!({"sigma_residual": SIGMA_RESIDUAL, "lambda_step": LAMBDA_STEP}),
        body,
        table,
        files: Vec::new(),
    })
}

fn dimension(a: DimensionArgs, file: &FileConfig) -> Result<Report> {
    let ms = a.m.or(file.m_grid.clone()).unwrap_or(vec![2, 3, 5, 10, 20, 50, 100]);
    if let Some(bad) = ms.iter().find(|&&m| m < 2) {
        return Err(ConfigError::new("$.m_grid", format!("M = {bad} must be at least 2")).into());
    }
    let order = a.order.or(file.order).unwrap_or(rqi_core::constrained::DIMENSION_ORDER);
    if order < 8 {
        return Err(ConfigError::new("$.order", "must be at least 8").into());
    }
    let mut rows = Vec::new();
    let mut table = Table::new(["m", "sigma_m", "residual", "doubling_drift", "hensley", "relative_gap"]);
    for &m in &ms {
        let d = hausdorff_dim(m, order)?;
        let h = hensley_expansion(m);
        let gap = ((2.0 * (d.sigma_m - 1.0) - h) / h).abs();
        table.push(vec![
            m.to_string(),
            d.sigma_m.to_string(),
            d.residual.to_string(),
            d.doubling_drift.to_string(),
            h.to_string(),
            gap.to_string(),
        ]);
        rows.push(json!({"dimension": to_value(&d)?, "hensley": h, "relative_gap": gap}));
    }
    let mut body = json!({ "rows": rows });
    if ms.contains(&2) {
        body["cycle_expansion_sigma_2"] = json!(cycle_expansion_dimension(2, 14)?);
    }
    let threshold_n = a.threshold_n.or(file.n_grid.clone());
    if let Some(ns) = &threshold_n {
        check_grid("$.n_grid", ns, 1)?;
        for &n in ns {
            check_bound("$.n_grid", n)?;
        }
        body["threshold"] = to_value(&threshold_probe(ns, &ms, order)?)?;
    }
    Ok(Report {
        command: "dimension",
        config: json!({"m_grid": ms, "order": order, "threshold_n": threshold_n}),
        tolerances: json!({"unit_root_residual": 1e-11}),
        body,
        table,
        files: Vec::new(),
    })
}

fn traces(a: TracesArgs, file: &FileConfig) -> Result<Report> {
    let (name, digit, cost) = resolve_cost(&a.cost, file)?;
    let k_max = a.k_max.or(file.k_max).unwrap_or(3);
    let cutoff = a.cutoff.or(file.cutoff).unwrap_or(10_000);
    let trunc = SeriesTruncation::new(k_max, cutoff).map_err(|e| ConfigError::new("$.k_max", e.to_string()))?;
    let s_grid = a.s.or(file.s_grid.clone()).unwrap_or(vec![2.4, 3.0]);
    let w_grid = a.w.or(file.w_grid.clone()).unwrap_or(vec![0.0, 0.05]);
    check_grid("$.s_grid", &s_grid, 1)?;
    check_grid("$.w_grid", &w_grid, 1)?;
    let n = check_bound("$.n", a.n.or(file.n).unwrap_or(1000.0))?;
    let order = a.order.or(file.order).unwrap_or(32);

    let mut reports = Vec::new();
    for k in 1..=k_max {
        for &s in &s_grid {
            for &w in &w_grid {
                reports.push(yk(k, c64(s), c64(w), &cost, &trunc)?);
            }
        }
    }
    let duality_trunc = SeriesTruncation::new(k_max.min(4), cutoff)?;
    let duality = matrix_orbit_duality(
        c64(1.5),
        c64(0.0),
        &cost,
        SpectralConfig::compact().with_order(order),
        &duality_trunc,
    )?;
    let series = dirichlet_partials(c64(3.0), c64(0.0), &cost, n)?;
    let mut csv = Vec::new();
    write_trace_audit_csv(&reports, &mut csv)?;
    let mut table = Table::new(["k", "s_re", "s_im", "w", "direct", "trace_form", "gap", "tail"]);
    for r in &reports {
        table.push(vec![
            r.k.to_string(),
            r.s.re.to_string(),
            r.s.im.to_string(),
            r.w.re.to_string(),
            r.direct.re.to_string(),
            r.trace_form.re.to_string(),
            r.gap.to_string(),
            (r.direct_tail + r.trace_tail).to_string(),
        ]);
    }
    Ok(Report {
        command: "traces",
        config: json!({"cost": name, "digit": digit, "k_max": k_max, "cutoff": cutoff, "s_grid": s_grid, "w_grid": w_grid, "n": n, "order": order, "duality_s": 1.5}),
        tolerances: json!({"identity": "64 k eps_machine times the summed magnitudes"}),
        body: json!({
            "yk": to_value(&reports)?,
            "matrix_orbit_duality": to_value(&duality)?,
            "dirichlet_s3": to_value(&series)?,
        }),
        table,
        files: vec![("traces_audit.csv".to_string(), String::from_utf8(csv)?)],
    })
}

fn study(a: StudyArgs, file: &FileConfig) -> Result<Report> {
    let (name, digit, cost) = resolve_cost(&a.cost, file)?;
    let n_grid = a.n_grid.or(file.n_grid.clone()).unwrap_or(vec![1e2, 1e3, 1e4]);
    check_grid("$.n_grid", &n_grid, 3)?;
    for &n in &n_grid {
        check_bound("$.n_grid", n)?;
    }
    let w_grid = a.w_grid.or(file.w_grid.clone()).unwrap_or(DEFAULT_W_GRID.to_vec());
    check_grid("$.w_grid", &w_grid, 0)?;
    let order = a.order.or(file.order).unwrap_or(48);
    let engine = SpectralEngine::new(cost.clone(), SpectralConfig::compact().with_order(order))?;
    let constants = engine.gaussian_constants()?;
    let st = empirical_study(&cost, &n_grid, &w_grid, Some((constants.mu, constants.nu)))?;
    let log_eps = log_epsilon_study(&n_grid)?;
    let mut predictions = Vec::new();
    for &n in &n_grid {
        for &w in &w_grid {
            predictions.push(json!({"n": n, "w": w, "prediction": engine.quasi_powers_prediction(w, n)?}));
        }
    }
    let mut header = vec!["n".to_string(), "count".into(), "mean".into(), "var".into(), "ks".into()];
    header.extend(w_grid.iter().map(|w| format!("mgf@{w}")));
    let mut table = Table::new(header);
    for r in &st.rows {
        let mut row = vec![
            r.n.to_string(),
            r.count.to_string(),
            r.mean.to_string(),
            r.variance.to_string(),
            r.ks.map_or(String::new(), |k| k.to_string()),
        ];
        row.extend(r.mgf.iter().map(|(_, m)| m.to_string()));
        table.push(row);
    }
    let mut hist = Table::new(["n", "cost_value", "count"]);
    for (r, h) in st.rows.iter().zip(&st.histograms) {
        for (v, c) in h {
            hist.push(vec![r.n.to_string(), v.to_string(), c.to_string()]);
        }
    }
    Ok(Report {
        command: "study",
        config: json!({"cost": name, "digit": digit, "n_grid": n_grid, "w_grid": w_grid, "order": order}),
        tolerances: json!({"sigma_residual": SIGMA_RESIDUAL}),
        body: json!({
            "constants": to_value(&constants)?,
            "study": to_value(&st)?,
            "quasi_powers": predictions,
            "log_epsilon": to_value(&log_eps)?,
        }),
        table,
        files: vec![("study_histogram.csv".to_string(), hist.to_csv()?)],
    })
}

fn verify(a: VerifyArgs, sink: &Sink) -> Result<Outcome> {
    let cfg = if a.quick { VerifyConfig::quick() } else { VerifyConfig::full() };
    let report = run_acceptance(cfg.clone(), |c| println!("{}", c.summary_line()))?;
    let mut table = Table::new(["id", "title", "status"]);
    for c in &report.criteria {
        table.push(vec![c.id.to_string(), c.title.clone(), format!("{:?}", c.status).to_lowercase()]);
    }
    let out = Report {
        command: "verify",
        config: to_value(&cfg)?,
        tolerances: json!(report.criteria.iter().map(|c| (c.id.to_string(), c.tolerance.clone())).collect::<std::collections::BTreeMap<_, _>>()),
        body: to_value(&report)?,
        table,
        files: Vec::new(),
    };
    if let Some(path) = &a.json {
        let text = serde_json::to_string_pretty(&sink.document(&out))? + "\n";
        std::fs::write(path, text)?;
    }
    if sink.out.is_some() {
        sink.emit(&out)?;
    }
    let failed = report.failures();
    let passed = report.criteria.iter().filter(|c| c.passed()).count();
    let skipped = report.criteria.iter().filter(|c| c.status == Status::Skipped).count();
    print!("{passed} passed, {} failed, {skipped} skipped", failed.len());
    if failed.is_empty() {
        println!();
    } else {
        println!(" (failed: {failed:?})");
    }
    Ok(if report.all_passed() { Outcome::Done } else { Outcome::AcceptanceFailed })
}
