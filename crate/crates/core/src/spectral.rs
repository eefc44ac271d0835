//! Dominant eigenvalue `λ(s, w)`, its derivatives, the curve `λ(σ(w), w) = 1`,
//! and the Gaussian constants derived from them.

use crate::cost::CostSpec;
use crate::eigen::{dominant_eigen, EigenSolution};
use crate::error::{Error, Result};
use crate::operator::{build_operator, DiscretizedOperator, OperatorParams, SpectralConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::Mutex;

/// `π²/(6 log 2)`, the entropy of the Gauss map.
pub const ENTROPY: f64 = PI * PI / (6.0 * LN_2);

/// Residual required of every point on the curve `λ(σ(w), w) = 1`.
pub const SIGMA_RESIDUAL: f64 = 1e-11;

/// Largest `|w|` step taken at once when following `σ`.
const CONTINUATION_STEP: f64 = 0.05;

/// Default finite-difference steps `{h, h/2}`.
pub const LAMBDA_STEP: f64 = 1e-3;
pub const SIGMA_STEP: f64 = 1e-3;

fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A derivative extracted from central differences at steps `h` and `h/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivative {
    /// Richardson-extrapolated value.
    pub value: Complex64,
    /// `|extrapolated − fine|`, an a posteriori error estimate.
    pub error: f64,
    /// Independent five-point (four-evaluation) stencil at step `h`, first derivatives only.
    pub stencil: Option<Complex64>,
    pub step: f64,
}

/// `f′(x₀)` from `f` sampled on `x₀ ± h, x₀ ± h/2, x₀ ± 2h`.
pub fn first_derivative<F>(f: F, x0: f64, h: f64) -> Result<Derivative>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if !(h > 1e-12) {
        return Err(Error::Precision(format!("difference step {h:e} underflows")));
    }
    let (fp, fm) = (f(x0 + h)?, f(x0 - h)?);
    let (fp2, fm2) = (f(x0 + 0.5 * h)?, f(x0 - 0.5 * h)?);
    let (fpp, fmm) = (f(x0 + 2.0 * h)?, f(x0 - 2.0 * h)?);
    let coarse = (fp - fm) / (2.0 * h);
    let fine = (fp2 - fm2) / h;
    let value = (4.0 * fine - coarse) / 3.0;
    let stencil = (-fpp + 8.0 * fp - 8.0 * fm + fmm) / (12.0 * h);
    Ok(Derivative {
        value,
        error: (value - fine).norm(),
        stencil: Some(stencil),
        step: h,
    })
}

/// `f″(x₀)` from symmetric second differences at `h` and `h/2`, with Richardson.
pub fn second_derivative<F>(f: F, x0: f64, h: f64) -> Result<Derivative>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if !(h > 1e-12) {
        return Err(Error::Precision(format!("difference step {h:e} underflows")));
    }
    let f0 = f(x0)?;
    let coarse = (f(x0 + h)? - 2.0 * f0 + f(x0 - h)?) / (h * h);
    let fine = (f(x0 + 0.5 * h)? - 2.0 * f0 + f(x0 - 0.5 * h)?) / (0.25 * h * h);
    let value = (4.0 * fine - coarse) / 3.0;
    Ok(Derivative {
        value,
        error: (value - fine).norm(),
        stencil: None,
        step: h,
    })
}

/// Closed-form or series value of `E[c]` under the Gauss measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCost {
    pub value: f64,
    /// Bound on the neglected digits.
    pub tail_bound: f64,
}

/// `E[c] = Σ_m c(m) log₂((m+1)²/(m(m+2)))`, summed exactly over constant runs.
pub fn mean_cost_closed_form(cost: &CostSpec, m_cap: u64) -> Result<MeanCost> {
    // Gauss measure of {m ≥ n} is log₂(1 + 1/n)
    let tail_mass = |n: u64| (1.0 / n as f64).ln_1p() / LN_2;
    let mut value = 0.0;
    let mut tail_bound = 0.0;
    for block in cost.blocks_from(1) {
        if block.start > m_cap {
            // remaining digits: c(m) ≤ A log m + B, mass of {m ≥ n} ≤ 1/(n log 2)
            let n = block.start as f64;
            let g = cost.growth;
            tail_bound = (g.a * (n.ln() + 1.0) + g.b) / (n * LN_2);
            break;
        }
        let upper = block.end.map_or(0.0, tail_mass);
        value += block.value * (tail_mass(block.start) - upper);
        if block.end.is_none() {
            break;
        }
    }
    if tail_bound > 1e-9 {
        return Err(Error::Precision(format!(
            "mean-cost tail bound {tail_bound:e} beyond digit {m_cap}"
        )));
    }
    Ok(MeanCost { value, tail_bound })
}

/// Entropy two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub closed_form: f64,
    pub spectral: f64,
    pub discrepancy: f64,
    pub derivative_error: f64,
}

/// The dominant pole of the Dirichlet series and its residue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleData {
    pub w: Complex64,
    /// `s_w = 2σ(w)`.
    pub s_w: Complex64,
    /// `v(w) = −1/λ_s′(σ(w), w)`.
    pub residue: Complex64,
    /// `|λ(σ(w), w) − 1|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsDiagnostics {
    pub order: usize,
    pub digit_truncation: u64,
    pub tail_order: usize,
    pub digit_cap: Option<u64>,
    pub sigma_steps: [f64; 2],
    pub lambda_step: f64,
    pub mu_error: f64,
    pub nu_error: f64,
    pub mu1_error: f64,
    pub nu1_error: f64,
    /// `2 E[c] / E` when available (uncapped operators).
    pub mu_closed_form: Option<f64>,
    pub max_sigma_residual: f64,
    pub richardson_order: u32,
}

/// `μ = U′(0)`, `ν = U″(0)`, `μ₁ = V′(0)`, `ν₁ = V″(0)` with `U = 2(σ − σ(0))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianConstants {
    pub cost: String,
    pub sigma0: f64,
    pub mu: f64,
    pub nu: f64,
    pub mu1: f64,
    pub nu1: f64,
    /// `(w, σ(w))` on the stencil.
    pub sigma_samples: Vec<(f64, f64)>,
    /// `(w, V(w))` on the stencil.
    pub v_samples: Vec<(f64, f64)>,
    pub diagnostics: ConstantsDiagnostics,
}

type Key = (u64, u64, u64, u64);

fn key(s: Complex64, w: Complex64) -> Key {
    (s.re.to_bits(), s.im.to_bits(), w.re.to_bits(), w.im.to_bits())
}

/// Evaluator of `λ(s, w)` for one cost and discretization, with a result cache.
pub struct SpectralEngine {
    cost: CostSpec,
    config: SpectralConfig,
    cache: Mutex<HashMap<Key, Complex64>>,
    sigma0: Mutex<Option<f64>>,
}

impl SpectralEngine {
    pub fn new(cost: CostSpec, config: SpectralConfig) -> Result<Self> {
        config.validate()?;
        Ok(SpectralEngine {
            cost,
            config,
            cache: Mutex::new(HashMap::new()),
            sigma0: Mutex::new(None),
        })
    }

    pub fn cost(&self) -> &CostSpec {
        &self.cost
    }

    pub fn config(&self) -> SpectralConfig {
        self.config
    }

    pub fn operator(&self, s: Complex64, w: Complex64) -> Result<DiscretizedOperator> {
        build_operator(&OperatorParams {
            s,
            w,
            cost: self.cost.clone(),
            config: self.config,
        })
    }

    pub fn eigen(&self, s: Complex64, w: Complex64) -> Result<EigenSolution> {
        let op = self.operator(s, w)?;
        let sol = dominant_eigen(&op.matrix)?;
        self.cache.lock().unwrap().insert(key(s, w), sol.lambda);
        Ok(sol)
    }

    pub fn lambda(&self, s: Complex64, w: Complex64) -> Result<Complex64> {
        if let Some(&v) = self.cache.lock().unwrap().get(&key(s, w)) {
            return Ok(v);
        }
        Ok(self.eigen(s, w)?.lambda)
    }

    pub fn lambda_real(&self, s: f64, w: f64) -> Result<f64> {
        Ok(self.lambda(c64(s), c64(w))?.re)
    }

    /// `∂λ/∂s`, differencing along the real direction (λ is analytic in `s`).
    pub fn lambda_s(&self, s: Complex64, w: Complex64, h: f64) -> Result<Derivative> {
        first_derivative(|t| self.lambda(s + t, w), 0.0, h)
    }

    pub fn lambda_w(&self, s: Complex64, w: Complex64, h: f64) -> Result<Derivative> {
        first_derivative(|t| self.lambda(s, w + t), 0.0, h)
    }

    pub fn lambda_ss(&self, s: Complex64, w: Complex64, h: f64) -> Result<Derivative> {
        second_derivative(|t| self.lambda(s + t, w), 0.0, h)
    }

    pub fn lambda_ww(&self, s: Complex64, w: Complex64, h: f64) -> Result<Derivative> {
        second_derivative(|t| self.lambda(s, w + t), 0.0, h)
    }

    pub fn entropy(&self) -> Result<EntropyReport> {
        let d = self.lambda_s(c64(1.0), c64(0.0), LAMBDA_STEP)?;
        let spectral = -d.value.re;
        Ok(EntropyReport {
            closed_form: ENTROPY,
            spectral,
            discrepancy: (spectral - ENTROPY).abs(),
            derivative_error: d.error,
        })
    }

    /// Newton step derivative, cheaper than the extrapolated one.
    fn newton_slope(&self, s: Complex64, w: Complex64) -> Result<Complex64> {
        let h = 1e-5;
        Ok((self.lambda(s + h, w)? - self.lambda(s - h, w)?) / (2.0 * h))
    }

    /// Root of `λ(s, w) = 1` by Newton from `start`.
    fn newton(&self, w: Complex64, start: Complex64) -> Result<(Complex64, f64)> {
        let mut s = start;
        for _ in 0..30 {
            let f = self.lambda(s, w)? - 1.0;
            if f.norm() <= 1e-15 {
                break;
            }
            let step = f / self.newton_slope(s, w)?;
            if !(step.norm() < 0.5) {
                return Err(Error::Continuation {
                    w: w.re,
                    reason: format!("Newton step {:.3e} too large", step.norm()),
                });
            }
            s -= step;
            if step.norm() < 1e-15 {
                break;
            }
        }
        let residual = (self.lambda(s, w)? - 1.0).norm();
        if residual <= SIGMA_RESIDUAL {
            Ok((s, residual))
        } else {
            Err(Error::Continuation {
                w: w.re,
                reason: format!("residual {residual:.3e} after Newton"),
            })
        }
    }

    /// `σ(0)`: 1 for the full operator, the dimension `σ_M` when digits are capped.
    pub fn sigma0(&self) -> Result<f64> {
        if let Some(v) = *self.sigma0.lock().unwrap() {
            return Ok(v);
        }
        let v = if self.config.digit_cap.is_none() {
            1.0
        } else {
            crate::constrained::solve_unit_root(|s| self.lambda_real(s, 0.0), 0.5 + 1e-9, 1.0)?.0
        };
        *self.sigma0.lock().unwrap() = Some(v);
        Ok(v)
    }

    /// `σ(w)` with `|λ(σ(w), w) − 1| ≤ 1e−11`, continuing from `w = 0` in short steps.
    pub fn sigma(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.sigma_with_residual(w)?.0)
    }

    pub fn sigma_with_residual(&self, w: Complex64) -> Result<(Complex64, f64)> {
        let s0 = c64(self.sigma0()?);
        if w.norm() == 0.0 {
            let r = (self.lambda(s0, w)? - 1.0).norm();
            return Ok((s0, r));
        }
        let steps = (w.norm() / CONTINUATION_STEP).ceil().max(1.0) as usize;
        let mut s = s0;
        let mut prev_w = c64(0.0);
        let mut out = (s0, 0.0);
        for i in 1..=steps {
            let wi = w * (i as f64 / steps as f64);
            // predictor: σ′ = −λ_w/λ_s
            let lw = (self.lambda(s, prev_w + 1e-5)? - self.lambda(s, prev_w - 1e-5)?) / 2e-5;
            let ls = self.newton_slope(s, prev_w)?;
            let guess = s - lw / ls * (wi - prev_w);
            out = self.newton(wi, guess)?;
            s = out.0;
            prev_w = wi;
        }
        Ok(out)
    }

    pub fn pole_and_residue(&self, w: Complex64) -> Result<PoleData> {
        let (sigma, residual) = self.sigma_with_residual(w)?;
        let ls = self.lambda_s(sigma, w, LAMBDA_STEP)?;
        Ok(PoleData {
            w,
            s_w: 2.0 * sigma,
            residue: -1.0 / ls.value,
            residual,
        })
    }

    /// `v(w)σ(0)/(σ(w)v(0)) · N^{2(σ(w)−σ(0))}`, the predicted `E_N[e^{wC}]`.
    pub fn quasi_powers_prediction(&self, w: f64, n: f64) -> Result<f64> {
        if !(n > 1.0) {
            return Err(Error::InvalidInput(format!("N must be > 1, got {n}")));
        }
        if w == 0.0 {
            return Ok(1.0);
        }
        let p0 = self.pole_and_residue(c64(0.0))?;
        let pw = self.pole_and_residue(c64(w))?;
        let (s0, sw) = (p0.s_w.re / 2.0, pw.s_w.re / 2.0);
        Ok(pw.residue.re * s0 / (sw * p0.residue.re) * n.powf(2.0 * (sw - s0)))
    }

    /// `V(w) = log(v(w)/v(0)) − log(σ(w)/σ(0))`.
    fn v_function(&self, w: f64, ls0: Complex64) -> Result<Complex64> {
        let sigma = self.sigma(c64(w))?;
        let ls = self.lambda_s(sigma, c64(w), LAMBDA_STEP)?.value;
        Ok((ls0 / ls).ln() - (sigma / self.sigma0()?).ln())
    }

    pub fn gaussian_constants(&self) -> Result<GaussianConstants> {
        let h = SIGMA_STEP;
        let s0 = self.sigma0()?;
        let mut max_res: f64 = 0.0;
        let mut sigma_samples = Vec::new();
        let sigma_at = |w: f64| self.sigma(c64(w));
        for &w in &[-2.0 * h, -h, -0.5 * h, 0.0, 0.5 * h, h, 2.0 * h] {
            let (s, r) = self.sigma_with_residual(c64(w))?;
            max_res = max_res.max(r);
            sigma_samples.push((w, s.re));
        }
        let d1 = first_derivative(sigma_at, 0.0, h)?;
        let d2 = second_derivative(sigma_at, 0.0, h)?;
        let ls0 = self.lambda_s(c64(s0), c64(0.0), LAMBDA_STEP)?.value;
        let v_at = |w: f64| self.v_function(w, ls0);
        let v1 = first_derivative(v_at, 0.0, h)?;
        let v2 = second_derivative(v_at, 0.0, h)?;
        let mut v_samples = Vec::new();
        for &w in &[-h, -0.5 * h, 0.0, 0.5 * h, h] {
            v_samples.push((w, v_at(w)?.re));
        }
        let mu = 2.0 * d1.value.re;
        let nu = 2.0 * d2.value.re;
        let mu_closed_form = match self.config.digit_cap {
            None => Some(2.0 * mean_cost_closed_form(&self.cost, u64::MAX)?.value / ENTROPY),
            Some(_) => None,
        };
        if nu <= -1e-6 {
            return Err(Error::Precision(format!(
                "variance constant ν = {nu:e} is negative: degenerate cost or unstable derivatives"
            )));
        }
        Ok(GaussianConstants {
            cost: self.cost.id(),
            sigma0: s0,
            mu,
            nu,
            mu1: v1.value.re,
            nu1: v2.value.re,
            sigma_samples,
            v_samples,
            diagnostics: ConstantsDiagnostics {
                order: self.config.order,
                digit_truncation: self.config.digit_truncation,
                tail_order: self.config.tail_order,
                digit_cap: self.config.digit_cap,
                sigma_steps: [h, 0.5 * h],
                lambda_step: LAMBDA_STEP,
                mu_error: 2.0 * d1.error,
                nu_error: 2.0 * d2.error,
                mu1_error: v1.error,
                nu1_error: v2.error,
                mu_closed_form,
                max_sigma_residual: max_res,
                richardson_order: 4,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SpectralConfig {
        SpectralConfig {
            order: 24,
            digit_truncation: 512,
            tail_order: 14,
            digit_cap: None,
        }
    }

    #[test]
    fn difference_formulas_on_known_functions() {
        let f = |x: f64| Ok(c64(x.exp()));
        let d = first_derivative(f, 0.3, 1e-2).unwrap();
        assert!((d.value.re - 0.3f64.exp()).abs() < 1e-9);
        assert!((d.stencil.unwrap().re - 0.3f64.exp()).abs() < 1e-8);
        let d2 = second_derivative(f, 0.3, 1e-2).unwrap();
        assert!((d2.value.re - 0.3f64.exp()).abs() < 1e-7);
        assert!(first_derivative(f, 0.0, 0.0).is_err());
    }

    #[test]
    fn mean_costs() {
        let one = mean_cost_closed_form(&CostSpec::unit(), u64::MAX).unwrap();
        assert!((one.value - 1.0).abs() < 1e-15);
        let chi2 = mean_cost_closed_form(&CostSpec::digit_indicator(2).unwrap(), u64::MAX).unwrap();
        assert!((chi2.value - (9.0f64 / 8.0).log2()).abs() < 1e-15);
        let ell = mean_cost_closed_form(&CostSpec::binary_length(), u64::MAX).unwrap();
        let series: f64 = (0..70).map(|k| (2f64.powi(-k)).ln_1p() / LN_2).sum();
        assert!((ell.value - series).abs() < 1e-14);
        assert!((ell.value - 2.253_524_038).abs() < 1e-9);
        assert!(mean_cost_closed_form(&CostSpec::binary_length(), 1000).is_err());
    }

    #[test]
    fn gauss_operator_fixed_point() {
        let e = SpectralEngine::new(CostSpec::unit(), small()).unwrap();
        let sol = e.eigen(c64(1.0), c64(0.0)).unwrap();
        assert!((sol.lambda - 1.0).norm() < 1e-13);
        let op = e.operator(c64(1.0), c64(0.0)).unwrap();
        for (f, &x) in sol.right_values.iter().zip(op.nodes()) {
            assert!((f.re - 1.0 / ((1.0 + x) * LN_2)).abs() < 1e-11);
        }
    }

    #[test]
    fn unit_cost_sigma_slope() {
        let e = SpectralEngine::new(CostSpec::unit(), small()).unwrap();
        let (s, r) = e.sigma_with_residual(c64(0.02)).unwrap();
        assert!(r <= SIGMA_RESIDUAL);
        // λ(σ, 0) = e^{−w}
        assert!((e.lambda_real(s.re, 0.0).unwrap() - (-0.02f64).exp()).abs() < 1e-11);
        let slope = first_derivative(|w| e.sigma(c64(w)), 0.0, 1e-3).unwrap();
        assert!((slope.value.re - 1.0 / ENTROPY).abs() < 1e-7);
    }

    #[test]
    fn continuation_reaches_larger_w() {
        let e = SpectralEngine::new(CostSpec::unit(), small()).unwrap();
        let (s, r) = e.sigma_with_residual(c64(0.12)).unwrap();
        assert!(r <= SIGMA_RESIDUAL);
        assert!(s.re > 1.0);
    }
}
