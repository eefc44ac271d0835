//! Inverse branches of the Gauss map as integer linear fractional transformations.
//!
//! A digit `m` is the branch `x ↦ 1/(m + x)`, stored as the matrix `[[0, 1], [1, m]]`.
//! A word `(m_1, …, m_p)` is the composition `h_{m_1} ∘ … ∘ h_{m_p}`, i.e. the
//! left-to-right matrix product. All entries are 128-bit with checked arithmetic.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Golden ratio.
pub const PHI: f64 = 1.618_033_988_749_895;

/// Ratio bound `sup |h'(x)| / inf |h'(y)|` over the unit interval, valid for every branch.
pub const DISTORTION_RATIO: f64 = 4.0;

/// A partial quotient, always `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Digit(u64);

impl Digit {
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDigit(m));
        }
        Ok(Digit(m))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

/// A nonempty finite cycle of partial quotients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct DigitWord(Vec<u64>);

impl DigitWord {
    pub fn new(digits: Vec<u64>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::EmptyWord);
        }
        if let Some(&m) = digits.iter().find(|&&m| m == 0) {
            return Err(Error::InvalidDigit(m));
        }
        Ok(DigitWord(digits))
    }

    /// Internal constructor for digit vectors already known to be valid.
    pub(crate) fn from_valid(digits: Vec<u64>) -> Self {
        debug_assert!(!digits.is_empty() && digits.iter().all(|&m| m >= 1));
        DigitWord(digits)
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_even(&self) -> bool {
        self.0.len() % 2 == 0
    }

    /// The word repeated `k` times.
    pub fn power(&self, k: usize) -> DigitWord {
        assert!(k >= 1);
        DigitWord(self.0.repeat(k))
    }

    /// Rotation by `shift` places to the left.
    pub fn rotated(&self, shift: usize) -> DigitWord {
        let mut v = self.0.clone();
        let n = v.len();
        v.rotate_left(shift % n);
        DigitWord(v)
    }

    /// Dash-separated rendering used in audit files.
    pub fn to_dashed(&self) -> String {
        self.0
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl TryFrom<Vec<u64>> for DigitWord {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        DigitWord::new(v)
    }
}

impl From<DigitWord> for Vec<u64> {
    fn from(w: DigitWord) -> Self {
        w.0
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_dashed().replace('-', ","))
    }
}

/// Integer matrix `[[a, b], [c, d]]` acting as `x ↦ (a x + b)/(c x + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lft {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

impl Lft {
    pub const IDENTITY: Lft = Lft {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };

    /// The branch `h_m: x ↦ 1/(m + x)`.
    pub fn of_digit(m: Digit) -> Lft {
        Lft {
            a: 0,
            b: 1,
            c: 1,
            d: m.get() as i128,
        }
    }

    /// Composition `self ∘ other` (matrix product), failing loudly on overflow.
    pub fn compose(&self, other: &Lft) -> Option<Lft> {
        let mul_add = |x: i128, y: i128, z: i128, t: i128| -> Option<i128> {
            x.checked_mul(y)?.checked_add(z.checked_mul(t)?)
        };
        Some(Lft {
            a: mul_add(self.a, other.a, self.b, other.c)?,
            b: mul_add(self.a, other.b, self.b, other.d)?,
            c: mul_add(self.c, other.a, self.d, other.c)?,
            d: mul_add(self.c, other.b, self.d, other.d)?,
        })
    }

    /// `self ∘ h_m`, the common step of every depth-first traversal.
    #[inline]
    pub fn push_digit(&self, m: u64) -> Option<Lft> {
        let m = m as i128;
        Some(Lft {
            a: self.b,
            b: self.a.checked_add(self.b.checked_mul(m)?)?,
            c: self.d,
            d: self.c.checked_add(self.d.checked_mul(m)?)?,
        })
    }

    pub fn of_word(w: &DigitWord) -> Result<Lft> {
        let mut acc = Lft::IDENTITY;
        for (i, &m) in w.digits().iter().enumerate() {
            acc = acc.push_digit(m).ok_or_else(|| Error::Overflow {
                prefix: w.digits()[..=i].to_vec(),
            })?;
        }
        Ok(acc)
    }

    pub fn det(&self) -> i128 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> i128 {
        self.a + self.d
    }

    pub fn apply(&self, x: f64) -> f64 {
        (self.a as f64 * x + self.b as f64) / (self.c as f64 * x + self.d as f64)
    }

    /// `h'(x) = det / (c x + d)^2`.
    pub fn derivative(&self, x: f64) -> f64 {
        let den = self.c as f64 * x + self.d as f64;
        self.det() as f64 / (den * den)
    }

    /// Dominant eigenvalue `(t + sqrt(t^2 - 4 det)) / 2` of the cycle matrix.
    pub fn spectral_radius(&self) -> f64 {
        let t = self.trace() as f64;
        let disc = t * t - 4.0 * self.det() as f64;
        0.5 * (t + disc.sqrt())
    }

    /// Attracting fixed point in `(0, 1)`: the positive root of `c x² + (d − a) x − b = 0`.
    pub fn fixed_point(&self) -> f64 {
        let (a, b, c, d) = (self.a as f64, self.b as f64, self.c as f64, self.d as f64);
        let t = self.trace() as f64;
        let root = (t * t - 4.0 * self.det() as f64).sqrt();
        let dm = d - a;
        if dm > 0.0 {
            // conjugate form avoids cancellation in -(d - a) + root
            2.0 * b / (dm + root)
        } else {
            (-dm + root) / (2.0 * c)
        }
    }

    /// Exact test of `ε ≤ bound` for a cycle matrix of the given period parity.
    ///
    /// `ε` is the larger root of `x² − T x + 1`, with `T = t` for even periods and
    /// `T = t² + 2` for odd ones, so `ε ≤ N ⇔ 2N ≥ T ∧ N² − T N + 1 ≥ 0`.
    pub fn epsilon_at_most(&self, even: bool, bound: &SizeBound) -> bool {
        let t = self.trace();
        let big_t = if even {
            Some(t)
        } else {
            t.checked_mul(t).and_then(|x| x.checked_add(2))
        };
        let Some(big_t) = big_t else {
            return false;
        };
        match *bound {
            SizeBound::Integer(n) => {
                let n = n as i128;
                if 2 * n < big_t {
                    return false;
                }
                n * n - big_t * n + 1 >= 0
            }
            SizeBound::Real(n) => {
                let tf = big_t as f64;
                2.0 * n >= tf && n * n - tf * n + 1.0 >= 0.0
            }
        }
    }
}

/// Upper bound `N` on the size `ε`, kept exact when it is an integer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeBound {
    Integer(u64),
    Real(f64),
}

impl SizeBound {
    pub fn new(n: f64) -> Result<Self> {
        if !(n > 1.0) || !n.is_finite() {
            return Err(Error::InvalidInput(format!("size bound must be > 1, got {n}")));
        }
        if n.fract() == 0.0 && n < 9.0e15 {
            Ok(SizeBound::Integer(n as u64))
        } else {
            Ok(SizeBound::Real(n))
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            SizeBound::Integer(n) => n as f64,
            SizeBound::Real(x) => x,
        }
    }
}

/// Sizes attached to a cycle: `α = |h'(x_h)|^{1/2}`, `ε = α^{-r}`, continuant `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeTriple {
    pub alpha: f64,
    pub epsilon: f64,
    pub q: f64,
    pub r: u8,
}

impl SizeTriple {
    /// Two-sided bracket `L^{-1/2} α^{-1} ≤ q ≤ L^{1/2} α^{-1}`.
    pub fn bracket_holds(&self) -> bool {
        let inv = 1.0 / self.alpha;
        let l = DISTORTION_RATIO.sqrt();
        let slack = 1e-12 * inv;
        self.q >= inv / l - slack && self.q <= inv * l + slack
    }
}

pub fn lft_of_digit(m: u64) -> Result<Lft> {
    Ok(Lft::of_digit(Digit::new(m)?))
}

pub fn lft_compose(g: &Lft, h: &Lft) -> Result<Lft> {
    g.compose(h).ok_or(Error::Overflow { prefix: Vec::new() })
}

pub fn lft_of_word(w: &DigitWord) -> Result<Lft> {
    Lft::of_word(w)
}

pub fn size_triple(w: &DigitWord) -> Result<SizeTriple> {
    let h = Lft::of_word(w)?;
    Ok(size_triple_of(&h, w.is_even()))
}

pub(crate) fn size_triple_of(h: &Lft, even: bool) -> SizeTriple {
    let rho = h.spectral_radius();
    let r = if even { 1 } else { 2 };
    SizeTriple {
        alpha: 1.0 / rho,
        epsilon: if even { rho } else { rho * rho },
        q: h.d as f64,
        r,
    }
}

/// One step of the Gauss map; `None` at the terminal point `x = 0`.
pub fn gauss_map(x: f64) -> Option<(u64, f64)> {
    if x == 0.0 {
        return None;
    }
    let inv = 1.0 / x;
    let m = inv.floor();
    Some((m as u64, inv - m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(v: &[u64]) -> DigitWord {
        DigitWord::new(v.to_vec()).unwrap()
    }

    #[test]
    fn digit_matrices() {
        assert_eq!(lft_of_digit(1).unwrap(), Lft { a: 0, b: 1, c: 1, d: 1 });
        assert_eq!(lft_of_digit(2).unwrap(), Lft { a: 0, b: 1, c: 1, d: 2 });
        let h7 = lft_of_digit(7).unwrap();
        assert_eq!(h7, Lft { a: 0, b: 1, c: 1, d: 7 });
        assert_eq!(h7.det(), -1);
        assert!(matches!(lft_of_digit(0), Err(Error::InvalidDigit(0))));
        assert!(DigitWord::new(vec![]).is_err());
        assert!(DigitWord::new(vec![1, 0]).is_err());
    }

    #[test]
    fn composition() {
        let h1 = lft_of_digit(1).unwrap();
        let h2 = lft_of_digit(2).unwrap();
        assert_eq!(lft_compose(&h1, &h2).unwrap(), Lft { a: 1, b: 2, c: 1, d: 3 });
        assert_eq!(lft_compose(&Lft::IDENTITY, &h2).unwrap(), h2);
        assert_eq!(lft_compose(&h1, &h1).unwrap().det(), 1);
        assert_eq!(lft_of_word(&word(&[1])).unwrap(), h1);
        assert_eq!(lft_of_word(&word(&[1, 2])).unwrap(), Lft { a: 1, b: 2, c: 1, d: 3 });
        assert_eq!(lft_of_word(&word(&[1, 1, 2])).unwrap(), Lft { a: 1, b: 3, c: 2, d: 5 });
    }

    #[test]
    fn overflow_is_loud() {
        let big = Lft { a: i128::MAX / 2, b: 1, c: 1, d: 1 };
        assert!(lft_compose(&big, &big).is_err());
        let w = DigitWord::new(vec![u64::MAX; 6]).unwrap();
        match lft_of_word(&w) {
            Err(Error::Overflow { prefix }) => assert!(prefix.len() < 6),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn radii_and_fixed_points() {
        let s5 = 5f64.sqrt();
        let h = lft_of_word(&word(&[1])).unwrap();
        assert!((h.spectral_radius() - (1.0 + s5) / 2.0).abs() < 1e-15);
        assert!((h.fixed_point() - (s5 - 1.0) / 2.0).abs() < 1e-15);
        let h = lft_of_word(&word(&[2])).unwrap();
        assert!((h.spectral_radius() - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!((h.fixed_point() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let h = lft_of_word(&word(&[1, 2])).unwrap();
        assert!((h.spectral_radius() - (2.0 + 3f64.sqrt())).abs() < 1e-14);
        for v in [vec![3, 1, 4], vec![1, 5, 9, 2], vec![6], vec![2, 7, 1, 8, 2, 8]] {
            let h = lft_of_word(&word(&v)).unwrap();
            let x = h.fixed_point();
            assert!(x > 0.0 && x < 1.0);
            assert!((h.apply(x) - x).abs() < 1e-14, "{v:?}");
        }
    }

    #[test]
    fn sizes_of_small_words() {
        let phi = PHI;
        let s = size_triple(&word(&[1])).unwrap();
        assert!((s.alpha - 1.0 / phi).abs() < 1e-15);
        assert!((s.epsilon - phi * phi).abs() < 1e-14);
        assert_eq!((s.q, s.r), (1.0, 2));
        let s = size_triple(&word(&[2])).unwrap();
        assert!((s.epsilon - 5.828_427_124_746_19).abs() < 1e-12);
        let s = size_triple(&word(&[1, 2])).unwrap();
        assert!((s.epsilon - (2.0 + 3f64.sqrt())).abs() < 1e-14);
        assert_eq!((s.q, s.r), (3.0, 1));
        // ε is not multiplicative when parity flips
        let e1 = size_triple(&word(&[1])).unwrap().epsilon;
        let e11 = size_triple(&word(&[1, 1])).unwrap().epsilon;
        assert!((e1 - e11).abs() < 1e-14);
    }

    #[test]
    fn alpha_from_derivative_matches_radius() {
        for v in [vec![1], vec![2, 3], vec![1, 1, 4], vec![5, 1, 2, 2]] {
            let h = lft_of_word(&word(&v)).unwrap();
            let from_deriv = h.derivative(h.fixed_point()).abs().sqrt();
            let s = size_triple(&word(&v)).unwrap();
            assert!((from_deriv - s.alpha).abs() < 1e-14 * s.alpha.max(1e-300) + 1e-16);
            // q is |h'(0)|^{-1/2} exactly
            assert!((h.derivative(0.0).abs().powf(-0.5) - s.q).abs() < 1e-9 * s.q);
        }
    }

    #[test]
    fn exact_epsilon_comparison() {
        // ε((1,2)) = 2 + √3 ≈ 3.732
        let h = lft_of_word(&word(&[1, 2])).unwrap();
        assert!(h.epsilon_at_most(true, &SizeBound::new(4.0).unwrap()));
        assert!(!h.epsilon_at_most(true, &SizeBound::new(3.0).unwrap()));
        assert!(h.epsilon_at_most(true, &SizeBound::new(3.7321).unwrap()));
        assert!(!h.epsilon_at_most(true, &SizeBound::new(3.732).unwrap()));
        // ε((1)) = φ² ≈ 2.618
        let h = lft_of_word(&word(&[1])).unwrap();
        assert!(h.epsilon_at_most(false, &SizeBound::new(3.0).unwrap()));
        assert!(!h.epsilon_at_most(false, &SizeBound::new(2.0).unwrap()));
        assert!(!h.epsilon_at_most(false, &SizeBound::new(2.5).unwrap()));
    }

    #[test]
    fn gauss_map_steps() {
        assert_eq!(gauss_map(0.5), Some((2, 0.0)));
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (m, y) = gauss_map(g).unwrap();
        assert_eq!(m, 1);
        assert!((y - g).abs() < 1e-15);
        let (m, y) = gauss_map(2.0 / 7.0).unwrap();
        assert_eq!(m, 3);
        assert!((y - 0.5).abs() < 1e-15);
        assert_eq!(gauss_map(0.0), None);
    }
}
