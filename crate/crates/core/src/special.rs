//! Hurwitz zeta for complex exponents, via Euler–Maclaurin after an upward shift.

use num_complex::Complex64;

/// `ζ(2) = π²/6`.
pub const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// `B_{2k} / (2k)!` for `k = 1..=13`.
const BERNOULLI_OVER_FACTORIAL: [f64; 13] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
    43_867.0 / 798.0 / 6_402_373_705_728_000.0,
    -174_611.0 / 330.0 / 2_432_902_008_176_640_000.0,
    854_513.0 / 138.0 / 1.124_000_727_777_607_7e21,
    -236_364_091.0 / 2730.0 / 6.204_484_017_332_394e23,
    8_553_103.0 / 6.0 / 4.032_914_611_266_056_4e26,
];

#[inline]
fn cpow_neg(base: f64, p: Complex64) -> Complex64 {
    (-p * base.ln()).exp()
}

/// `ζ(p, a) = Σ_{n ≥ 0} (n + a)^{-p}` for `Re p > 1`, `a > 0`.
pub fn hurwitz_zeta(p: Complex64, a: f64) -> Complex64 {
    debug_assert!(p.re > 1.0 && a > 0.0);
    let shift_to = 30.0_f64.max(p.norm() + 10.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut x = a;
    while x < shift_to {
        acc += cpow_neg(x, p);
        x += 1.0;
    }
    let xp = cpow_neg(x, p);
    acc += xp * x / (p - 1.0) + xp * 0.5;
    // rising factorial p (p+1) ... (p+2k-2) times x^{-p-2k+1}
    let mut rising = p;
    let mut term = xp / x;
    let inv_x2 = 1.0 / (x * x);
    for (k, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let contrib = rising * term * *coeff;
        acc += contrib;
        if contrib.norm() < 1e-18 * acc.norm() {
            break;
        }
        let kk = (k + 1) as f64;
        rising *= (p + 2.0 * kk - 1.0) * (p + 2.0 * kk);
        term *= inv_x2;
    }
    acc
}

pub fn hurwitz_zeta_real(p: f64, a: f64) -> f64 {
    hurwitz_zeta(Complex64::new(p, 0.0), a).re
}

/// `Σ_{m = start}^{end - 1} (m + x)^{-p}`, with `end = None` meaning infinity.
pub fn shifted_power_sum(p: Complex64, x: f64, start: u64, end: Option<u64>) -> Complex64 {
    match end {
        Some(e) if e <= start => Complex64::new(0.0, 0.0),
        Some(e) if e - start <= 48 => (start..e).map(|m| cpow_neg(m as f64 + x, p)).sum(),
        Some(e) => hurwitz_zeta(p, start as f64 + x) - hurwitz_zeta(p, e as f64 + x),
        None => hurwitz_zeta(p, start as f64 + x),
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riemann_values() {
        assert!((hurwitz_zeta_real(2.0, 1.0) - ZETA2).abs() < 1e-15);
        let z4 = std::f64::consts::PI.powi(4) / 90.0;
        assert!((hurwitz_zeta_real(4.0, 1.0) - z4).abs() < 1e-15);
        // ζ(2, 1/2) = 3 ζ(2)
        assert!((hurwitz_zeta_real(2.0, 0.5) - 3.0 * ZETA2).abs() < 1e-14);
    }

    #[test]
    fn matches_direct_sums() {
        for &(p, a) in &[(2.4, 1.3), (3.0, 7.25), (1.5, 0.75)] {
            let direct: f64 = (0..2000).map(|n| (n as f64 + a).powf(-p)).sum::<f64>()
                + hurwitz_zeta_real(p, a + 2000.0);
            assert!((hurwitz_zeta_real(p, a) - direct).abs() < 1e-14 * direct);
        }
    }

    #[test]
    fn complex_exponent_shift_relation() {
        // ζ(p, a) − ζ(p, a + 1) = a^{-p}
        let p = Complex64::new(2.2, 3.5);
        let a = 1.7;
        let lhs = hurwitz_zeta(p, a) - hurwitz_zeta(p, a + 1.0);
        let rhs = cpow_neg(a, p);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn power_sums_split() {
        let p = Complex64::new(2.5, 0.3);
        let whole = shifted_power_sum(p, 0.4, 3, None);
        let split = shifted_power_sum(p, 0.4, 3, Some(20))
            + shifted_power_sum(p, 0.4, 20, Some(5000))
            + shifted_power_sum(p, 0.4, 5000, None);
        assert!((whole - split).norm() < 1e-14);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
