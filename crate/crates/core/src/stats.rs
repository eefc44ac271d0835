//! Empirical statistics over enumerated populations, set against spectral predictions.

use crate::cost::CostSpec;
use crate::enumerate::{population, CostAccumulator, PopulationSummary};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::collections::BTreeMap;

/// Uniform-probability mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

fn accumulator<'a>(summary: &'a PopulationSummary, cost: &CostSpec) -> Result<&'a CostAccumulator> {
    summary
        .cost(&cost.id())
        .ok_or_else(|| Error::UnsupportedCost(format!("{} was not accumulated", cost.id())))
}

pub fn empirical_moments(summary: &PopulationSummary, cost: &CostSpec) -> Result<Moments> {
    if summary.count == 0 {
        return Err(Error::EmptyPopulation);
    }
    let acc = accumulator(summary, cost)?;
    let n = summary.count as f64;
    let mean = acc.sum.value() / n;
    let variance = (acc.sum_sq.value() / n - mean * mean).max(0.0);
    Ok(Moments { mean, variance })
}

/// Same moments recomputed from the value histogram.
pub fn moments_from_histogram(histogram: &BTreeMap<i64, u64>) -> Result<Moments> {
    let total: u64 = histogram.values().sum();
    if total == 0 {
        return Err(Error::EmptyPopulation);
    }
    // integer sums are exact
    let s1: i128 = histogram.iter().map(|(&v, &c)| v as i128 * c as i128).sum();
    let s2: i128 = histogram.iter().map(|(&v, &c)| (v as i128).pow(2) * c as i128).sum();
    let n = total as f64;
    let mean = s1 as f64 / n;
    let variance = ((s2 * total as i128 - s1 * s1) as f64) / (n * n);
    Ok(Moments { mean, variance })
}

/// Least-squares line through `(x, y)` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

pub fn slope_fit(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::InvalidInput("slope fit needs at least 3 points".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 1e-12 * (1.0 + mx * mx)) {
        return Err(Error::InvalidInput("degenerate abscissae".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Ok(SlopeFit {
        slope,
        intercept,
        max_residual,
    })
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Kolmogorov–Smirnov distance between a weighted atomic law and the standard normal.
/// Both one-sided limits of the empirical CDF are compared at every atom.
pub fn ks_atomic(atoms: &[(f64, u64)]) -> Result<f64> {
    let total: u64 = atoms.iter().map(|a| a.1).sum();
    if total == 0 {
        return Err(Error::EmptyPopulation);
    }
    let mut sorted = atoms.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let phi = std_normal();
    let mut below = 0u64;
    let mut ks: f64 = 0.0;
    for (z, c) in sorted {
        let f = phi.cdf(z);
        let before = below as f64 / total as f64;
        below += c;
        let after = below as f64 / total as f64;
        ks = ks.max((f - before).abs()).max((after - f).abs());
    }
    Ok(ks)
}

/// KS distance of a plain sample against the standard normal.
pub fn ks_sample(sample: &[f64]) -> Result<f64> {
    let atoms: Vec<(f64, u64)> = sample.iter().map(|&x| (x, 1)).collect();
    ks_atomic(&atoms)
}

/// KS distance of `(C − μ log N)/√(ν log N)` to the standard normal.
pub fn standardized_ks(summary: &PopulationSummary, cost: &CostSpec, mu: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidInput(format!("ν = {nu} must be positive")));
    }
    if summary.count < 100 {
        return Err(Error::InvalidInput(format!(
            "population of {} is too small for a KS distance",
            summary.count
        )));
    }
    let acc = accumulator(summary, cost)?;
    let hist = acc
        .histogram
        .as_ref()
        .ok_or_else(|| Error::UnsupportedCost(format!("{} has no histogram", cost.id())))?;
    let log_n = summary.bound.ln();
    let scale = (nu * log_n).sqrt();
    let atoms: Vec<(f64, u64)> = hist
        .iter()
        .map(|(&v, &c)| ((v as f64 - mu * log_n) / scale, c))
        .collect();
    ks_atomic(&atoms)
}

/// `S_w(N)/S_0(N)` for a `w` fixed before enumeration.
pub fn empirical_mgf(summary: &PopulationSummary, cost: &CostSpec, w: f64) -> Result<f64> {
    if w == 0.0 {
        return Ok(1.0);
    }
    if summary.count == 0 {
        return Err(Error::EmptyPopulation);
    }
    let acc = accumulator(summary, cost)?;
    let sample = acc
        .mgf
        .iter()
        .find(|s| s.w == w)
        .ok_or(Error::NotAccumulated(w))?;
    Ok(sample.sum.value() / summary.count as f64)
}

/// Empirical mass of the window `|C − Q(y, N)| ≤ L/2` and its Gaussian prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalWindow {
    pub y: f64,
    pub center: f64,
    pub empirical: f64,
    pub prediction: f64,
}

pub fn local_limit_window(
    summary: &PopulationSummary,
    cost: &CostSpec,
    y: f64,
    mu: f64,
    nu: f64,
) -> Result<LocalWindow> {
    let span = cost
        .lattice_span()
        .ok_or_else(|| Error::UnsupportedCost(format!("{} is not a lattice cost", cost.id())))?;
    if !(nu > 0.0) {
        return Err(Error::InvalidInput(format!("ν = {nu} must be positive")));
    }
    let acc = accumulator(summary, cost)?;
    let hist = acc
        .histogram
        .as_ref()
        .ok_or_else(|| Error::UnsupportedCost(format!("{} has no histogram", cost.id())))?;
    if summary.count == 0 {
        return Err(Error::EmptyPopulation);
    }
    let log_n = summary.bound.ln();
    let scale = (nu * log_n).sqrt();
    let center = mu * log_n + y * scale;
    let inside: u64 = hist
        .iter()
        .filter(|(&v, _)| (v as f64 - center).abs() <= 0.5 * span)
        .map(|(_, &c)| c)
        .sum();
    let density = (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
    Ok(LocalWindow {
        y,
        center,
        empirical: inside as f64 / summary.count as f64,
        prediction: span * density / scale,
    })
}

/// Windows centred on every lattice point tile the line; their masses sum to exactly 1.
pub fn window_partition_total(summary: &PopulationSummary, cost: &CostSpec) -> Result<(u64, u64)> {
    let acc = accumulator(summary, cost)?;
    let hist = acc
        .histogram
        .as_ref()
        .ok_or_else(|| Error::UnsupportedCost(format!("{} has no histogram", cost.id())))?;
    Ok((hist.values().sum(), summary.count))
}

/// Per-`N` row of an empirical study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: f64,
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub ks: Option<f64>,
    /// `(w, S_w/S_0)`.
    pub mgf: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStudy {
    pub cost: CostSpec,
    pub n_grid: Vec<f64>,
    pub rows: Vec<StudyRow>,
    pub mean_fit: SlopeFit,
    pub variance_fit: SlopeFit,
    pub histograms: Vec<BTreeMap<i64, u64>>,
    /// Local windows at `y ∈ {−1, 0, 1}` for the largest bound (lattice costs with constants).
    pub windows: Vec<LocalWindow>,
}

/// Mean, variance, KS and MGF samples of one cost across a grid of bounds.
/// `mu`, `nu` standardize the KS distance when given.
pub fn empirical_study(
    cost: &CostSpec,
    n_grid: &[f64],
    w_grid: &[f64],
    constants: Option<(f64, f64)>,
) -> Result<EmpiricalStudy> {
    let mut rows = Vec::new();
    let mut histograms = Vec::new();
    let mut windows = Vec::new();
    let largest = n_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for &n in n_grid {
        let s = population(n, std::slice::from_ref(cost), w_grid, None)?;
        let m = empirical_moments(&s, cost)?;
        let ks = match constants {
            Some((mu, nu)) if s.count >= 100 && cost.is_integer_valued() => {
                Some(standardized_ks(&s, cost, mu, nu)?)
            }
            _ => None,
        };
        let mgf = w_grid
            .iter()
            .map(|&w| Ok((w, empirical_mgf(&s, cost, w)?)))
            .collect::<Result<Vec<_>>>()?;
        if let Some(h) = &accumulator(&s, cost)?.histogram {
            histograms.push(h.clone());
        }
        if let (Some((mu, nu)), Some(_), true) = (constants, cost.lattice_span(), n == largest) {
            for y in [-1.0, 0.0, 1.0] {
                windows.push(local_limit_window(&s, cost, y, mu, nu)?);
            }
        }
        rows.push(StudyRow {
            n,
            count: s.count,
            mean: m.mean,
            variance: m.variance,
            ks,
            mgf,
        });
    }
    let mean_pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n.ln(), r.mean)).collect();
    let var_pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n.ln(), r.variance)).collect();
    Ok(EmpiricalStudy {
        cost: cost.clone(),
        n_grid: n_grid.to_vec(),
        mean_fit: slope_fit(&mean_pts)?,
        variance_fit: slope_fit(&var_pts)?,
        rows,
        histograms,
        windows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEpsilonRow {
    pub n: f64,
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    /// Largest `log ε − log N` over the population; never positive.
    pub max_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEpsilonStudy {
    pub rows: Vec<LogEpsilonRow>,
    pub mean_fit: SlopeFit,
}

/// Mean and variance of `log ε` over `P_N` for each `N`.
pub fn log_epsilon_study(n_grid: &[f64]) -> Result<LogEpsilonStudy> {
    let mut rows = Vec::new();
    for &n in n_grid {
        let s = population(n, &[], &[], None)?;
        if s.count == 0 {
            return Err(Error::EmptyPopulation);
        }
        let c = s.count as f64;
        let mean = s.log_epsilon_sum.value() / c;
        let variance = (s.log_epsilon_sq_sum.value() / c - mean * mean).max(0.0);
        let e = crate::enumerate::Enumeration::new(n, None)?;
        let max_log = e.fold(
            || f64::NEG_INFINITY,
            |m, w, h| {
                let r = if w.len() % 2 == 0 { 1.0 } else { 2.0 };
                *m = m.max(r * h.spectral_radius().ln());
            },
            |a, b| *a = a.max(b),
        );
        rows.push(LogEpsilonRow {
            n,
            count: s.count,
            mean,
            variance,
            max_excess: max_log - n.ln(),
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n.ln(), r.mean)).collect();
    Ok(LogEpsilonStudy {
        mean_fit: slope_fit(&pts)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn population_of_four_moments() {
        let unit = CostSpec::unit();
        let chi3 = CostSpec::digit_indicator(3).unwrap();
        let s = population(4.0, &[unit.clone(), chi3.clone()], &[0.1], None).unwrap();
        let m = empirical_moments(&s, &unit).unwrap();
        assert!((m.mean - 5.0 / 3.0).abs() < 1e-15);
        assert!((m.variance - 2.0 / 9.0).abs() < 1e-15);
        let z = empirical_moments(&s, &chi3).unwrap();
        assert_eq!((z.mean, z.variance), (0.0, 0.0));
        let h = moments_from_histogram(s.cost("unit").unwrap().histogram.as_ref().unwrap()).unwrap();
        assert!((h.mean - m.mean).abs() < 1e-15 && (h.variance - m.variance).abs() < 1e-15);
        let mgf = empirical_mgf(&s, &unit, 0.1).unwrap();
        assert!((mgf - (0.1f64.exp() + 2.0 * 0.2f64.exp()) / 3.0).abs() < 1e-15);
        assert_eq!(empirical_mgf(&s, &unit, 0.0).unwrap(), 1.0);
        assert_eq!(empirical_mgf(&s, &unit, 0.3), Err(Error::NotAccumulated(0.3)));
    }

    #[test]
    fn fits() {
        let pts = [(1.0, 3.0), (2.0, 5.0), (4.0, 9.0)];
        let f = slope_fit(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!(f.max_residual < 1e-14);
        assert!(slope_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(slope_fit(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn ks_on_normal_samples() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let n = 20_000;
        let sample: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let ks = ks_sample(&sample).unwrap();
        assert!(ks < 1.63 / (n as f64).sqrt(), "ks = {ks}");
        // a shifted sample is far away
        let shifted: Vec<f64> = sample.iter().map(|x| x + 1.0).collect();
        assert!(ks_sample(&shifted).unwrap() > 0.3);
    }

    #[test]
    fn ks_sees_both_sides_of_an_atom() {
        // one atom at 0 holding all the mass: distance 1/2 on either side
        assert!((ks_atomic(&[(0.0, 10)]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn local_window_rejects_non_lattice_costs() {
        let c = CostSpec::custom_table(vec![0.5, 1.25], 1.0).unwrap();
        let s = population(50.0, std::slice::from_ref(&c), &[], None).unwrap();
        assert!(matches!(
            local_limit_window(&s, &c, 0.0, 1.0, 1.0),
            Err(Error::UnsupportedCost(_))
        ));
    }

    #[test]
    fn log_epsilon_never_exceeds_log_n() {
        let st = log_epsilon_study(&[50.0, 200.0, 800.0]).unwrap();
        assert!(st.rows.iter().all(|r| r.max_excess <= 1e-12));
    }
}
