//! Continued fractions with digits bounded by `M`: the capped operator, the Hausdorff
//! dimension `σ_M`, and the proportion `π(N, M)` of bounded-digit numbers in `P_N`.

use crate::cost::CostSpec;
use crate::enumerate::Enumeration;
use crate::error::{Error, Result};
use crate::lft::Lft;
use crate::operator::SpectralConfig;
use crate::special::ZETA2;
use crate::spectral::{GaussianConstants, SpectralEngine, LAMBDA_STEP};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default collocation order for dimension work.
pub const DIMENSION_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionResult {
    pub m: u64,
    pub sigma_m: f64,
    /// `|λ_M(σ_M) − 1|`.
    pub residual: f64,
    pub order: usize,
    /// `|σ_M(D) − σ_M(2D)|`.
    pub doubling_drift: f64,
}

/// Root of a decreasing function `g(s) = 1` on `[lo, hi]`: bisection to `1e−6`, then secant-Newton.
pub fn solve_unit_root<F>(g: F, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a)? - 1.0, g(b)? - 1.0);
    if ga.signum() == gb.signum() {
        return Err(Error::RootNotBracketed { lo, hi });
    }
    let increasing_at_a = ga < 0.0;
    while b - a > 1e-6 {
        let mid = 0.5 * (a + b);
        let gm = g(mid)? - 1.0;
        if (gm < 0.0) == increasing_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut s = 0.5 * (a + b);
    let h = 1e-6;
    for _ in 0..20 {
        let f = g(s)? - 1.0;
        if f.abs() <= 1e-15 {
            break;
        }
        let slope = (g(s + h)? - g(s - h)?) / (2.0 * h);
        let step = f / slope;
        s -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    let residual = (g(s)? - 1.0).abs();
    if residual > 1e-11 {
        return Err(Error::NonConvergence {
            iterations: 20,
            residual,
        });
    }
    Ok((s, residual))
}

fn capped_engine(m: u64, order: usize, cost: CostSpec) -> Result<SpectralEngine> {
    SpectralEngine::new(cost, SpectralConfig::capped(order, m))
}

/// Dominant eigenvalue of the operator restricted to digits `≤ M` (`None` for all digits).
pub fn lambda_m(s: f64, m: Option<u64>, order: usize) -> Result<f64> {
    if !(s > 0.5) {
        return Err(Error::InvalidInput(format!("s = {s} must exceed 1/2")));
    }
    let engine = match m {
        Some(m) => capped_engine(m, order, CostSpec::unit())?,
        None => SpectralEngine::new(CostSpec::unit(), SpectralConfig::compact().with_order(order))?,
    };
    engine.lambda_real(s, 0.0)
}

fn sigma_at_order(m: u64, order: usize) -> Result<(f64, f64)> {
    let engine = capped_engine(m, order, CostSpec::unit())?;
    solve_unit_root(|s| engine.lambda_real(s, 0.0), 0.5 + 1e-9, 1.0)
}

/// `σ_M`, with the collocation order doubled as a convergence check.
pub fn hausdorff_dim(m: u64, order: usize) -> Result<DimensionResult> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("M = {m} must be >= 2")));
    }
    let (sigma_m, residual) = sigma_at_order(m, order)?;
    let (fine, _) = sigma_at_order(m, 2 * order)?;
    Ok(DimensionResult {
        m,
        sigma_m,
        residual,
        order,
        doubling_drift: (fine - sigma_m).abs(),
    })
}

/// Two-term prediction of `2(σ_M − 1)`.
pub fn hensley_expansion(m: u64) -> f64 {
    let m = m as f64;
    -2.0 / (ZETA2 * m) - 4.0 * m.ln() / (ZETA2 * ZETA2 * m * m)
}

/// `σ_M` from the truncated Fredholm determinant `det(I − H_s)` built from the traces
/// of all words of length `≤ max_len`, then bisection on its sign.
pub fn cycle_expansion_dimension(m: u64, max_len: usize) -> Result<f64> {
    if m < 2 || max_len < 2 {
        return Err(Error::InvalidInput("need M >= 2 and length >= 2".into()));
    }
    // spectral radius of every word, grouped by length
    let mut radii: Vec<Vec<f64>> = vec![Vec::new(); max_len + 1];
    let mut frontier = vec![Lft::IDENTITY];
    for len in 1..=max_len {
        let mut next = Vec::with_capacity(frontier.len() * m as usize);
        for h in &frontier {
            for digit in 1..=m {
                let g = h.push_digit(digit).ok_or(Error::Overflow { prefix: vec![digit] })?;
                radii[len].push(g.spectral_radius());
                next.push(g);
            }
        }
        frontier = next;
    }
    let determinant = |s: f64| -> f64 {
        // a_n = Tr H_s^n / n; det = exp(−Σ a_n z^n) as a series in z, evaluated at z = 1
        let mut a = vec![0.0; max_len + 1];
        for (n, rs) in radii.iter().enumerate().skip(1) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let tr: f64 = rs
                .iter()
                .map(|&rho| {
                    let alpha2 = rho.powi(-2);
                    alpha2.powf(s) / (1.0 - sign * alpha2)
                })
                .sum();
            a[n] = tr / n as f64;
        }
        // e = exp(−A):  n e_n = −Σ_{k=1}^{n} k a_k e_{n−k}
        let mut e = vec![0.0; max_len + 1];
        e[0] = 1.0;
        for n in 1..=max_len {
            let acc: f64 = (1..=n).map(|k| k as f64 * a[k] * e[n - k]).sum();
            e[n] = -acc / n as f64;
        }
        e.iter().sum()
    };
    // det(I − H_s) < 0 while λ(s) > 1
    let (mut lo, mut hi) = (0.5 + 1e-9, 1.0);
    if determinant(lo).signum() == determinant(hi).signum() {
        return Err(Error::RootNotBracketed { lo, hi });
    }
    let lo_sign = determinant(lo).signum();
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if determinant(mid).signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gaussian constants of a cost on the digit-capped system, anchored at `σ_M`.
pub fn constrained_constants(m: u64, cost: CostSpec, order: usize) -> Result<GaussianConstants> {
    let engine = capped_engine(m, order, cost)?;
    engine.gaussian_constants()
}

/// `−2/λ_M′(σ_M)`, which equals `μ_M` for the unit cost.
pub fn unit_mu_from_slope(m: u64, order: usize) -> Result<f64> {
    let engine = capped_engine(m, order, CostSpec::unit())?;
    let s0 = engine.sigma0()?;
    let d = engine.lambda_s(Complex64::new(s0, 0.0), Complex64::new(0.0, 0.0), LAMBDA_STEP)?;
    Ok(-2.0 / d.value.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub n: f64,
    pub m: u64,
    pub count_capped: u64,
    pub count_all: u64,
    pub pi: f64,
    /// `N^{2(σ_M − 1)}`.
    pub prediction: f64,
}

/// `π(N, M) = |P_N[M]| / |P_N|` against `N^{2(σ_M − 1)}`.
pub fn threshold_probe(n_grid: &[f64], m_grid: &[u64], order: usize) -> Result<Vec<ThresholdRow>> {
    let mut sigmas = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        let s = match m {
            0 => return Err(Error::InvalidDigit(0)),
            // a single fixed point: dimension 0
            1 => 0.0,
            _ => sigma_at_order(m, order)?.0,
        };
        sigmas.push(s);
    }
    let mut rows = Vec::new();
    for &n in n_grid {
        let all = Enumeration::new(n, None)?;
        let count_all = all.fold(|| 0u64, |a, w, _| *a += w.len() as u64, |a, b| *a += b);
        for (&m, &sigma) in m_grid.iter().zip(&sigmas) {
            let capped = Enumeration::new(n, Some(m))?;
            let count_capped = capped.fold(|| 0u64, |a, w, _| *a += w.len() as u64, |a, b| *a += b);
            rows.push(ThresholdRow {
                n,
                m,
                count_capped,
                count_all,
                pi: count_capped as f64 / count_all as f64,
                prediction: n.powf(2.0 * (sigma - 1.0)),
            });
        }
    }
    Ok(rows)
}
