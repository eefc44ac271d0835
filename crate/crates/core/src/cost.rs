//! Digit costs of moderate growth and their additive extension to words.

use crate::error::{Error, Result};
use crate::lft::{DigitWord, PHI};
use serde::{Deserialize, Serialize};

/// The four families of digit cost supported by the laboratory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostKind {
    /// `c ≡ 1`; the total cost is the period length.
    Unit,
    /// `χ_n`, the indicator of the digit `n`.
    DigitIndicator { n: u64 },
    /// `ℓ(m) = ⌊log₂ m⌋ + 1`, the bit length.
    BinaryLength,
    /// `c(m) = values[m - 1]` for `m ≤ values.len()`, then `tail` forever.
    CustomTable { values: Vec<f64>, tail: f64 },
}

/// Growth certificate `c(m) ≤ A log m + B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub a: f64,
    pub b: f64,
}

impl Growth {
    /// `d = A/2 + B/(2 log φ)`: the weighted operator is analytic for `Re s > d |Re w| + 1/2`.
    pub fn exponent(&self) -> f64 {
        self.a / 2.0 + self.b / (2.0 * PHI.ln())
    }
}

/// A digit cost together with its growth certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub kind: CostKind,
    pub growth: Growth,
}

/// Maximal run `[start, end)` of digits on which the cost is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub start: u64,
    /// `None` for a block running to infinity.
    pub end: Option<u64>,
    pub value: f64,
}

/// Result of a growth audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub m_max: u64,
}

impl CostSpec {
    pub fn unit() -> Self {
        CostSpec {
            kind: CostKind::Unit,
            growth: Growth { a: 0.0, b: 1.0 },
        }
    }

    pub fn digit_indicator(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDigit(0));
        }
        Ok(CostSpec {
            kind: CostKind::DigitIndicator { n },
            growth: Growth { a: 0.0, b: 1.0 },
        })
    }

    pub fn binary_length() -> Self {
        CostSpec {
            kind: CostKind::BinaryLength,
            growth: Growth {
                a: 1.0 / std::f64::consts::LN_2,
                b: 1.0,
            },
        }
    }

    /// Custom table with the trivial certificate `A = 0`, `B = max c`.
    pub fn custom_table(values: Vec<f64>, tail: f64) -> Result<Self> {
        if values.iter().chain(std::iter::once(&tail)).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput("cost values must be finite and nonnegative".into()));
        }
        let b = values.iter().copied().fold(tail, f64::max);
        Ok(CostSpec {
            kind: CostKind::CustomTable { values, tail },
            growth: Growth { a: 0.0, b },
        })
    }

    /// Replace the declared certificate, e.g. to audit a claimed bound.
    pub fn with_growth(mut self, a: f64, b: f64) -> Self {
        self.growth = Growth { a, b };
        self
    }

    /// Short identifier used in reports and cache keys.
    pub fn id(&self) -> String {
        match &self.kind {
            CostKind::Unit => "unit".into(),
            CostKind::DigitIndicator { n } => format!("chi{n}"),
            CostKind::BinaryLength => "binlen".into(),
            CostKind::CustomTable { values, tail } => {
                let body: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
                format!("custom[{};tail={tail}]", body.join(","))
            }
        }
    }

    pub fn evaluate(&self, m: u64) -> f64 {
        debug_assert!(m >= 1);
        match &self.kind {
            CostKind::Unit => 1.0,
            CostKind::DigitIndicator { n } => f64::from(u8::from(m == *n)),
            CostKind::BinaryLength => f64::from(64 - m.leading_zeros()),
            CostKind::CustomTable { values, tail } => {
                values.get((m - 1) as usize).copied().unwrap_or(*tail)
            }
        }
    }

    /// Additive cost of a word.
    pub fn word_cost(&self, w: &DigitWord) -> f64 {
        w.digits().iter().map(|&m| self.evaluate(m)).sum()
    }

    pub fn exponent(&self) -> f64 {
        self.growth.exponent()
    }

    /// Span `L` when every value is an integer multiple of a common `L > 0`.
    pub fn lattice_span(&self) -> Option<f64> {
        match &self.kind {
            CostKind::Unit | CostKind::DigitIndicator { .. } | CostKind::BinaryLength => Some(1.0),
            CostKind::CustomTable { values, tail } => {
                let mut g: u64 = 0;
                for &v in values.iter().chain(std::iter::once(tail)) {
                    if v.fract() != 0.0 || v > 1e15 {
                        return None;
                    }
                    g = gcd(g, v as u64);
                }
                (g > 0).then_some(g as f64)
            }
        }
    }

    /// Whether the cost only takes integer values (histograms are kept exactly).
    pub fn is_integer_valued(&self) -> bool {
        match &self.kind {
            CostKind::CustomTable { values, tail } => values
                .iter()
                .chain(std::iter::once(tail))
                .all(|v| v.fract() == 0.0),
            _ => true,
        }
    }

    /// Constant runs of the cost covering `[from, ∞)`, in increasing order.
    pub fn blocks_from(&self, from: u64) -> Blocks<'_> {
        Blocks {
            cost: self,
            next: Some(from.max(1)),
        }
    }

    /// Checks the certificate on `1 ≤ m ≤ m_max` and returns the exponent.
    pub fn audit_moderate_growth(&self, m_max: u64) -> Result<GrowthCertificate> {
        if m_max < 2 {
            return Err(Error::InvalidInput("audit bound must be >= 2".into()));
        }
        let Growth { a, b } = self.growth;
        if a < 0.0 || b < 0.0 || a + b <= 0.0 {
            return Err(Error::InvalidInput("certificate needs A, B >= 0 and A + B > 0".into()));
        }
        for m in 1..=m_max {
            let bound = a * (m as f64).ln() + b;
            let value = self.evaluate(m);
            if value > bound * (1.0 + 1e-12) + 1e-12 {
                return Err(Error::CertificateFailure { m, value, bound });
            }
        }
        Ok(GrowthCertificate {
            a,
            b,
            d: self.growth.exponent(),
            m_max,
        })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Iterator over the constant runs of a cost.
pub struct Blocks<'a> {
    cost: &'a CostSpec,
    next: Option<u64>,
}

impl Iterator for Blocks<'_> {
    type Item = Block;

    fn next(&mut self) -> Option<Block> {
        let start = self.next?;
        let value = self.cost.evaluate(start);
        let end = match &self.cost.kind {
            CostKind::Unit => None,
            CostKind::DigitIndicator { n } => {
                if start < *n {
                    Some(*n)
                } else if start == *n {
                    Some(n + 1)
                } else {
                    None
                }
            }
            CostKind::BinaryLength => {
                let bits = 64 - start.leading_zeros();
                if bits >= 63 {
                    None
                } else {
                    Some(1u64 << bits)
                }
            }
            CostKind::CustomTable { values, .. } => {
                let len = values.len() as u64;
                if start > len {
                    None
                } else {
                    // extend while the table value is unchanged
                    let mut e = start + 1;
                    while e <= len && values[(e - 1) as usize] == value {
                        e += 1;
                    }
                    if e > len && self.cost.evaluate(e) == value {
                        None
                    } else {
                        Some(e)
                    }
                }
            }
        };
        self.next = end;
        Some(Block { start, end, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(v: &[u64]) -> DigitWord {
        DigitWord::new(v.to_vec()).unwrap()
    }

    #[test]
    fn word_costs() {
        assert_eq!(CostSpec::unit().word_cost(&word(&[1, 2, 1])), 3.0);
        let chi2 = CostSpec::digit_indicator(2).unwrap();
        assert_eq!(chi2.word_cost(&word(&[1, 2, 1])), 1.0);
        assert_eq!(CostSpec::binary_length().word_cost(&word(&[1, 2, 5])), 6.0);
        let ell = CostSpec::binary_length();
        for (m, l) in [(1, 1.0), (2, 2.0), (3, 2.0), (4, 3.0), (7, 3.0), (8, 4.0), (1023, 10.0), (1024, 11.0)] {
            assert_eq!(ell.evaluate(m), l, "m = {m}");
        }
    }

    #[test]
    fn additive_under_concatenation() {
        let ell = CostSpec::binary_length();
        let u = word(&[3, 9, 1]);
        let v = word(&[17, 2]);
        let uv = word(&[3, 9, 1, 17, 2]);
        assert_eq!(ell.word_cost(&uv), ell.word_cost(&u) + ell.word_cost(&v));
    }

    #[test]
    fn audits() {
        let c = CostSpec::unit().audit_moderate_growth(10_000).unwrap();
        assert!((c.d - 1.0 / (2.0 * PHI.ln())).abs() < 1e-15);
        CostSpec::binary_length().audit_moderate_growth(1 << 20).unwrap();
        let linear: Vec<f64> = (1..=100).map(|m| m as f64).collect();
        let bad = CostSpec::custom_table(linear, 100.0).unwrap().with_growth(0.0, 1.0);
        match bad.audit_moderate_growth(100) {
            Err(Error::CertificateFailure { m, .. }) => assert_eq!(m, 2),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn blocks_cover_the_tail() {
        let ell = CostSpec::binary_length();
        let b: Vec<Block> = ell.blocks_from(5).take(3).collect();
        assert_eq!(b[0], Block { start: 5, end: Some(8), value: 3.0 });
        assert_eq!(b[1], Block { start: 8, end: Some(16), value: 4.0 });
        assert_eq!(b[2], Block { start: 16, end: Some(32), value: 5.0 });

        let chi = CostSpec::digit_indicator(3).unwrap();
        let b: Vec<Block> = chi.blocks_from(1).collect();
        assert_eq!(b.len(), 3);
        assert_eq!(b[1], Block { start: 3, end: Some(4), value: 1.0 });
        assert_eq!(b[2].end, None);

        let custom = CostSpec::custom_table(vec![2.0, 2.0, 5.0, 1.0], 1.0).unwrap();
        let b: Vec<Block> = custom.blocks_from(1).collect();
        assert_eq!(
            b,
            vec![
                Block { start: 1, end: Some(3), value: 2.0 },
                Block { start: 3, end: Some(4), value: 5.0 },
                Block { start: 4, end: None, value: 1.0 },
            ]
        );
    }

    #[test]
    fn spans() {
        assert_eq!(CostSpec::unit().lattice_span(), Some(1.0));
        let c = CostSpec::custom_table(vec![2.0, 4.0], 6.0).unwrap();
        assert_eq!(c.lattice_span(), Some(2.0));
        let c = CostSpec::custom_table(vec![0.5], 1.0).unwrap();
        assert_eq!(c.lattice_span(), None);
    }
}
