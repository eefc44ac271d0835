//! Collocation matrices for the weighted transfer operator
//! `H_{s,w}[f](x) = Σ_m e^{w c(m)} (m + x)^{−2s} f(1/(m + x))`.
//!
//! Digits `m ≤ M_t` are summed directly. Beyond `M_t` the interpolant is replaced by
//! its Taylor polynomial at 0, which turns the tail into Hurwitz-zeta moments
//! `Z_k(x) = Σ_{m > M_t} e^{w c(m)} (m + x)^{−2s−k}` summed over constant cost runs.

use crate::chebyshev::ChebyshevGrid;
use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::special::shifted_power_sum;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Discretization choices shared by every evaluation of an engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpectralConfig {
    /// Number of collocation nodes `D`.
    pub order: usize,
    /// Last digit summed directly, `M_t`.
    pub digit_truncation: u64,
    /// Degree of the Taylor tail.
    pub tail_order: usize,
    /// Only digits `≤ M` when set.
    pub digit_cap: Option<u64>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            order: 48,
            digit_truncation: 100_000,
            tail_order: 3,
            digit_cap: None,
        }
    }
}

impl SpectralConfig {
    /// Cheaper assembly with the same accuracy: short direct sum, long Taylor tail.
    pub fn compact() -> Self {
        SpectralConfig {
            order: 48,
            digit_truncation: 2048,
            tail_order: 14,
            digit_cap: None,
        }
    }

    /// Finite-digit operator with no tail.
    pub fn capped(order: usize, m: u64) -> Self {
        SpectralConfig {
            order,
            digit_truncation: m.max(64),
            tail_order: 0,
            digit_cap: Some(m),
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 8 {
            return Err(Error::InvalidInput(format!("order D = {} must be >= 8", self.order)));
        }
        if self.digit_truncation < 64 {
            return Err(Error::InvalidInput(format!(
                "digit truncation M_t = {} must be >= 64",
                self.digit_truncation
            )));
        }
        if self.digit_cap == Some(0) {
            return Err(Error::InvalidDigit(0));
        }
        Ok(())
    }
}

/// A point `(s, w)` together with the cost and discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub s: Complex64,
    pub w: Complex64,
    pub cost: CostSpec,
    pub config: SpectralConfig,
}

/// Whether `Re s − d |Re w| > a`.
pub fn domain_guard(s: Complex64, w: Complex64, cost: &CostSpec, a: f64) -> bool {
    s.re - cost.exponent() * w.re.abs() > a
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    pub matrix: DMatrix<Complex64>,
    pub grid: ChebyshevGrid,
    pub params: OperatorParams,
}

impl DiscretizedOperator {
    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        let v = nalgebra::DVector::from_column_slice(values);
        (&self.matrix * v).iter().copied().collect()
    }

    pub fn trace_of_power(&self, k: usize) -> Complex64 {
        let mut p = self.matrix.clone();
        for _ in 1..k {
            p = &p * &self.matrix;
        }
        p.trace()
    }
}

pub fn build_operator(params: &OperatorParams) -> Result<DiscretizedOperator> {
    let cfg = params.config;
    cfg.validate()?;
    let (s, w) = (params.s, params.w);
    if cfg.digit_cap.is_none() && !domain_guard(s, w, &params.cost, 0.5) {
        return Err(Error::Domain {
            s_re: s.re,
            s_im: s.im,
            w_re: w.re,
            w_im: w.im,
            margin: s.re - params.cost.exponent() * w.re.abs(),
            threshold: 0.5,
        });
    }
    let grid = ChebyshevGrid::new(cfg.order);
    let d = cfg.order;
    let direct_end = cfg.digit_cap.map_or(cfg.digit_truncation, |m| m.min(cfg.digit_truncation));
    let weights: Vec<Complex64> = (1..=direct_end)
        .map(|m| (w * params.cost.evaluate(m)).exp())
        .collect();
    // `None`: no tail; `Some(stop)`: digits `M_t < m < stop` (unbounded when `stop` is `None`)
    let tail = match cfg.digit_cap {
        Some(m) if m <= cfg.digit_truncation => None,
        cap => Some(cap.map(|m| m + 1)),
    };
    let taylor = grid.taylor_at_zero(cfg.tail_order);
    let two_s = 2.0 * s;

    let rows: Vec<Vec<Complex64>> = grid
        .nodes()
        .par_iter()
        .map(|&x| {
            let mut row = vec![Complex64::new(0.0, 0.0); d];
            let mut card = vec![0.0; d];
            for (idx, wt) in weights.iter().enumerate() {
                let base = (idx + 1) as f64 + x;
                let coef = wt * (-two_s * base.ln()).exp();
                grid.cardinals_into(1.0 / base, &mut card);
                for (r, &c) in row.iter_mut().zip(&card) {
                    *r += coef * c;
                }
            }
            if let Some(stop) = tail {
                let moments = tail_moments(&params.cost, w, two_s, x, direct_end + 1, stop, cfg.tail_order);
                for (z, coeffs) in moments.iter().zip(&taylor) {
                    for (r, &t) in row.iter_mut().zip(coeffs) {
                        *r += z * t;
                    }
                }
            }
            row
        })
        .collect();

    let matrix = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Precision("non-finite operator entry".into()));
    }
    Ok(DiscretizedOperator {
        matrix,
        grid,
        params: params.clone(),
    })
}

/// `Z_k(x) = Σ_{start ≤ m < stop} e^{w c(m)} (m + x)^{−2s−k}` for `k ≤ max_k`.
fn tail_moments(
    cost: &CostSpec,
    w: Complex64,
    two_s: Complex64,
    x: f64,
    start: u64,
    stop: Option<u64>,
    max_k: usize,
) -> Vec<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0); max_k + 1];
    for block in cost.blocks_from(start) {
        let end = match (block.end, stop) {
            (Some(e), Some(s)) => Some(e.min(s)),
            (e, None) => e,
            (None, s) => s,
        };
        let weight = (w * block.value).exp();
        for (k, zk) in z.iter_mut().enumerate() {
            *zk += weight * shifted_power_sum(two_s + k as f64, x, block.start, end);
        }
        match (end, stop) {
            (None, _) => break,
            (Some(e), Some(s)) if e >= s => break,
            // runs far beyond 2^60 contribute below rounding
            (Some(e), _) if e > 1 << 60 => break,
            _ => {}
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::hurwitz_zeta_real;

    fn params(s: f64, w: f64, cost: CostSpec, config: SpectralConfig) -> OperatorParams {
        OperatorParams {
            s: Complex64::new(s, 0.0),
            w: Complex64::new(w, 0.0),
            cost,
            config,
        }
    }

    #[test]
    fn gauss_density_is_fixed() {
        let cfg = SpectralConfig {
            order: 32,
            digit_truncation: 4096,
            tail_order: 10,
            digit_cap: None,
        };
        let op = build_operator(&params(1.0, 0.0, CostSpec::unit(), cfg)).unwrap();
        let psi: Vec<Complex64> = op
            .nodes()
            .iter()
            .map(|&x| Complex64::new(1.0 / ((1.0 + x) * std::f64::consts::LN_2), 0.0))
            .collect();
        let image = op.apply(&psi);
        let err = image.iter().zip(&psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err:e}");
    }

    #[test]
    fn constant_function_gives_hurwitz_zeta() {
        let cfg = SpectralConfig {
            order: 16,
            digit_truncation: 100,
            tail_order: 4,
            digit_cap: None,
        };
        let op = build_operator(&params(1.0, 0.0, CostSpec::unit(), cfg)).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 16];
        for (v, &x) in op.apply(&ones).iter().zip(op.nodes()) {
            assert!((v.re - hurwitz_zeta_real(2.0, 1.0 + x)).abs() < 1e-13);
        }
    }

    #[test]
    fn tail_order_and_truncation_trade_off() {
        let long = SpectralConfig { order: 24, digit_truncation: 20_000, tail_order: 3, digit_cap: None };
        let short = SpectralConfig { order: 24, digit_truncation: 256, tail_order: 14, digit_cap: None };
        let cost = CostSpec::binary_length();
        let a = build_operator(&params(1.1, 0.05, cost.clone(), long)).unwrap();
        let b = build_operator(&params(1.1, 0.05, cost, short)).unwrap();
        let gap = (&a.matrix - &b.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(gap < 1e-13, "gap = {gap:e}");
    }

    #[test]
    fn unit_cost_factorizes() {
        let cfg = SpectralConfig::compact().with_order(16);
        let a = build_operator(&params(1.0, 0.0, CostSpec::unit(), cfg)).unwrap();
        let b = build_operator(&params(1.0, 0.1, CostSpec::unit(), cfg)).unwrap();
        let scale = Complex64::new(0.1f64.exp(), 0.0);
        let gap = (a.matrix.map(|z| z * scale) - &b.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(gap < 1e-14);
    }

    #[test]
    fn capped_operator_is_a_finite_sum() {
        let op = build_operator(&params(0.7, 0.0, CostSpec::unit(), SpectralConfig::capped(12, 2))).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 12];
        for (v, &x) in op.apply(&ones).iter().zip(op.nodes()) {
            let expect = (1.0 + x).powf(-1.4) + (2.0 + x).powf(-1.4);
            assert!((v.re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_guard_examples() {
        let unit = CostSpec::unit();
        let c = |x: f64| Complex64::new(x, 0.0);
        assert!(domain_guard(c(1.0), c(0.0), &unit, 0.9));
        assert!(!domain_guard(c(0.4), c(0.0), &unit, 0.5));
        let nu = 0.6 / unit.exponent();
        assert!(!domain_guard(c(1.0), c(nu), &unit, 0.5));
        let err = build_operator(&params(0.45, 0.0, unit, SpectralConfig::compact())).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }
}
