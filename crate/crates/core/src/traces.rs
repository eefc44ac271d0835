//! Traces of the weighted transfer operator summed over cycles, the Dirichlet series
//! `Y_k`, `Z`, `P`, and the agreement between orbit sums and collocation matrices.
//!
//! Word sums of a fixed length `k` keep the words whose digit product `Π m_i` is at most
//! the cutoff `Q`; for `k = 1` this is the plain digit cutoff. Since `α(h) ≤ 1/q(h) ≤ 1/Π m_i`
//! and `#{Π m_i ≤ x} ≤ x (1 + log x)^{k−1}`, every discarded tail has an explicit bound.

use crate::cost::CostSpec;
use crate::enumerate::Enumeration;
use crate::error::{Error, Result};
use crate::lft::{size_triple, DigitWord, Lft, PHI};
use crate::operator::{build_operator, domain_guard, DiscretizedOperator, OperatorParams, SpectralConfig};
use crate::special::CompensatedSum;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

const LONGEST_WORD: usize = 12;
const LARGEST_CUTOFF: u64 = 1_000_000_000;

/// Declared truncation of a word series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTruncation {
    /// Longest cycle length considered.
    pub k_max: usize,
    /// Bound `Q` on the digit product of a kept word.
    pub digit_cutoff: u64,
}

impl SeriesTruncation {
    pub fn new(k_max: usize, digit_cutoff: u64) -> Result<Self> {
        if k_max == 0 || k_max > LONGEST_WORD {
            return Err(Error::InvalidInput(format!("k_max = {k_max} must lie in 1..={LONGEST_WORD}")));
        }
        if digit_cutoff == 0 || digit_cutoff > LARGEST_CUTOFF {
            return Err(Error::InvalidInput(format!(
                "digit cutoff {digit_cutoff} must lie in 1..={LARGEST_CUTOFF}"
            )));
        }
        Ok(SeriesTruncation { k_max, digit_cutoff })
    }
}

/// A partial sum together with a bound on what it leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSum {
    pub value: Complex64,
    pub tail: f64,
    pub terms: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
    magnitude: f64,
}

impl ComplexSum {
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
        self.magnitude += z.norm();
    }

    fn merge(&mut self, other: &ComplexSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
        self.magnitude += other.magnitude;
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `Tr H_{[h],s,w} = α^{2s} e^{w c(h)} / (1 − (−1)^{|h|} α²)`.
pub fn trace_component(word: &DigitWord, s: Complex64, w: Complex64, cost: &CostSpec) -> Result<Complex64> {
    let sizes = size_triple(word)?;
    let sign = if word.is_even() { 1.0 } else { -1.0 };
    let alpha = sizes.alpha;
    Ok(component(alpha.ln(), alpha * alpha, sign, s, w, cost.word_cost(word)))
}

#[inline]
fn component(log_alpha: f64, alpha2: f64, sign: f64, s: Complex64, w: Complex64, c: f64) -> Complex64 {
    (s * (2.0 * log_alpha) + w * c).exp() / (1.0 - sign * alpha2)
}

/// `e · ∫_Q^∞ (1 + log x)^{k−1} x^{−e} dx`, which bounds `Σ_{Π m_i > Q} (Π m_i)^{−e}` over
/// words of length `k`. Infinite unless `e > 1`.
fn product_tail(k: usize, q: f64, e: f64) -> f64 {
    if !(e > 1.0) {
        return f64::INFINITY;
    }
    let beta = e - 1.0;
    let l = 1.0 + q.ln();
    let j = k - 1;
    let mut falling = 1.0;
    let mut total = 0.0;
    for i in 0..=j {
        if i > 0 {
            falling *= (j + 1 - i) as f64;
        }
        total += falling * l.powi((j - i) as i32) / beta.powi(i as i32 + 1);
    }
    e * q.powf(-beta) * total
}

/// Sum `K` word functions over every word of length `len` with digit product `≤ cutoff`.
/// Partitioned by first digit; partial sums merge in ascending order.
fn sum_over_words<const K: usize, F>(len: usize, cutoff: u64, cost: &CostSpec, term: F) -> ([ComplexSum; K], u64)
where
    F: Fn(&[u64], &Lft, f64) -> [Complex64; K] + Sync,
{
    fn walk<const K: usize, F: Fn(&[u64], &Lft, f64) -> [Complex64; K]>(
        digits: &mut Vec<u64>,
        h: Lft,
        c: f64,
        budget: u64,
        len: usize,
        cost: &CostSpec,
        term: &F,
        acc: &mut ([ComplexSum; K], u64),
    ) {
        if digits.len() == len {
            for (slot, z) in acc.0.iter_mut().zip(term(digits, &h, c)) {
                slot.add(z);
            }
            acc.1 += 1;
            return;
        }
        for m in 1..=budget {
            // entries stay below 2^len · cutoff
            let child = h.push_digit(m).expect("bounded entries");
            digits.push(m);
            walk(digits, child, c + cost.evaluate(m), budget / m, len, cost, term, acc);
            digits.pop();
        }
    }
    let parts: Vec<([ComplexSum; K], u64)> = (1..=cutoff)
        .into_par_iter()
        .map(|first| {
            let mut acc = ([ComplexSum::default(); K], 0);
            let mut digits = vec![first];
            let h = Lft::IDENTITY.push_digit(first).expect("single digit");
            walk(&mut digits, h, cost.evaluate(first), cutoff / first, len, cost, &term, &mut acc);
            acc
        })
        .collect();
    let mut total = ([ComplexSum::default(); K], 0);
    for (sums, n) in parts {
        for (t, p) in total.0.iter_mut().zip(&sums) {
            t.merge(p);
        }
        total.1 += n;
    }
    total
}

fn domain_error(s: Complex64, w: Complex64, cost: &CostSpec, threshold: f64) -> Error {
    Error::Domain {
        s_re: s.re,
        s_im: s.im,
        w_re: w.re,
        w_im: w.im,
        margin: s.re - cost.exponent() * w.re.abs(),
        threshold,
    }
}

fn check_length(k: usize, trunc: &SeriesTruncation) -> Result<()> {
    if k == 0 || k > trunc.k_max {
        return Err(Error::InvalidInput(format!("length {k} outside 1..={}", trunc.k_max)));
    }
    Ok(())
}

/// Bound on the discarded part of `Σ_{|h|=k} |e^{w c(h)}| α(h)^{e₀}` (times `φ` for traces).
fn word_tail(k: usize, cutoff: u64, alpha_exponent: f64, w: Complex64, cost: &CostSpec, trace: bool) -> f64 {
    let wa = w.re.abs();
    let e = alpha_exponent - cost.growth.a * wa;
    let weight = (k as f64 * cost.growth.b * wa).exp();
    let factor = if trace { PHI } else { 1.0 };
    factor * weight * product_tail(k, cutoff as f64, e)
}

/// `Tr H^k_{s,w}` as the sum of `trace_component` over all words of length `k`.
pub fn trace_hk_direct(
    k: usize,
    s: Complex64,
    w: Complex64,
    cost: &CostSpec,
    trunc: &SeriesTruncation,
) -> Result<TruncatedSum> {
    check_length(k, trunc)?;
    if !domain_guard(s, w, cost, 0.5) {
        return Err(domain_error(s, w, cost, 0.5));
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let (sums, terms) = sum_over_words(k, trunc.digit_cutoff, cost, |_, h, c| {
        let rho = h.spectral_radius();
        [component(-rho.ln(), rho.powi(-2), sign, s, w, c)]
    });
    Ok(TruncatedSum {
        value: sums[0].value(),
        tail: word_tail(k, trunc.digit_cutoff, 2.0 * s.re, w, cost, true),
        terms,
    })
}

/// `Y_k(s, w)` evaluated from the orbits and from the trace relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YkReport {
    pub k: usize,
    pub s: Complex64,
    pub w: Complex64,
    /// `Σ e^{w c(h)} α(h)^s` with `α = Π_i T^i(x_h)` from the fixed points of all rotations.
    pub direct: Complex64,
    /// `Tr H^k_{s/2,w} − (−1)^k Tr H^k_{s/2+1,w}`.
    pub trace_form: Complex64,
    pub trace_low: Complex64,
    pub trace_high: Complex64,
    pub gap: f64,
    /// Rounding allowance for the gap: both sides run over the same words.
    pub tolerance: f64,
    pub direct_tail: f64,
    pub trace_tail: f64,
    pub terms: u64,
}

pub fn yk(k: usize, s: Complex64, w: Complex64, cost: &CostSpec, trunc: &SeriesTruncation) -> Result<YkReport> {
    check_length(k, trunc)?;
    let half = s * 0.5;
    if !domain_guard(half, w, cost, 0.5) {
        return Err(domain_error(half, w, cost, 0.5));
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let one = Complex64::new(1.0, 0.0);
    let (sums, terms) = sum_over_words(k, trunc.digit_cutoff, cost, |digits, h, c| {
        // α as the product of the orbit points, each the fixed point of a rotation
        let mut log_alpha = 0.0;
        let mut rotation = *h;
        for i in 0..k {
            log_alpha += rotation.fixed_point().ln();
            if i + 1 < k {
                let lead = Lft::IDENTITY.push_digit(digits[i]).expect("single digit");
                // h_{m_1}^{-1} ∘ rotation ∘ h_{m_1}
                let inv = Lft {
                    a: -lead.d,
                    b: lead.b,
                    c: lead.c,
                    d: -lead.a,
                };
                rotation = inv
                    .compose(&rotation)
                    .and_then(|g| g.compose(&lead))
                    .expect("bounded entries");
            }
        }
        let direct = (s * log_alpha + w * c).exp();
        let rho = h.spectral_radius();
        let (la, a2) = (-rho.ln(), rho.powi(-2));
        [
            direct,
            component(la, a2, sign, half, w, c),
            component(la, a2, sign, half + one, w, c),
        ]
    });
    let direct = sums[0].value();
    let (low, high) = (sums[1].value(), sums[2].value());
    let trace_form = low - sign * high;
    let gap = (direct - trace_form).norm();
    let scale = sums.iter().map(|t| t.magnitude).sum::<f64>();
    let tolerance = 64.0 * k as f64 * f64::EPSILON * scale.max(1e-300) + 1e-300;
    let report = YkReport {
        k,
        s,
        w,
        direct,
        trace_form,
        trace_low: low,
        trace_high: high,
        gap,
        tolerance,
        direct_tail: word_tail(k, trunc.digit_cutoff, s.re, w, cost, false),
        trace_tail: word_tail(k, trunc.digit_cutoff, s.re, w, cost, true)
            + word_tail(k, trunc.digit_cutoff, s.re + 2.0, w, cost, true),
        terms,
    };
    if gap > tolerance {
        return Err(Error::IdentityViolation { k, gap, tolerance });
    }
    Ok(report)
}

/// Partial sums of `P` (primitive cycles, each rotation counted) and `Z` (all cycles)
/// over `ε ≤ N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletPartials {
    pub s: Complex64,
    pub w: Complex64,
    pub cutoff: f64,
    pub p: Complex64,
    pub z: Complex64,
    /// `Z_k` for `k = 1, 2, …`, index `k − 1`.
    pub z_by_length: Vec<Complex64>,
    /// Bound on the part of `Z` (hence of `P`) with `ε > N`.
    pub tail: f64,
    pub cycles: u64,
}

impl DirichletPartials {
    /// `A = Z − P`, the contribution of non-primitive cycles.
    pub fn non_primitive(&self) -> Complex64 {
        self.z - self.p
    }
}

/// Both series are evaluated only where they converge, `Re s − 2d|Re w| > 2`.
pub fn dirichlet_partials(s: Complex64, w: Complex64, cost: &CostSpec, cutoff: f64) -> Result<DirichletPartials> {
    let growth = 2.0 * cost.exponent() * w.re.abs();
    let effective = s.re - growth;
    if !(effective > 2.0) {
        return Err(Error::Domain {
            s_re: s.re,
            s_im: s.im,
            w_re: w.re,
            w_im: w.im,
            margin: effective,
            threshold: 2.0,
        });
    }
    let enumeration = Enumeration::new(cutoff, None)?;
    let log_n = cutoff.ln();
    type Acc = (ComplexSum, ComplexSum, Vec<ComplexSum>, u64);
    let (p, z, by_len, cycles) = enumeration.fold(
        || -> Acc { (ComplexSum::default(), ComplexSum::default(), Vec::new(), 0) },
        |acc, digits, h| {
            let period = digits.len();
            let c: f64 = digits.iter().map(|&m| cost.evaluate(m)).sum();
            let log_rho = h.spectral_radius().ln();
            let weight = period as f64;
            let mut j = 1usize;
            // ε(h^j) is α^{−j} or α^{−2j} by parity of the length, so not monotone in j
            while j == 1 || j as f64 * log_rho <= log_n {
                let len = j * period;
                let r = if len % 2 == 0 { 1.0 } else { 2.0 };
                let log_eps = j as f64 * r * log_rho;
                if j > 1 && log_eps > log_n {
                    j += 1;
                    continue;
                }
                let term = (w * (j as f64 * c) - s * log_eps).exp() * weight;
                if j == 1 {
                    acc.0.add(term);
                }
                acc.1.add(term);
                if acc.2.len() < len {
                    acc.2.resize(len, ComplexSum::default());
                }
                acc.2[len - 1].add(term);
                j += 1;
            }
            acc.3 += 1;
        },
        |total, part| {
            total.0.merge(&part.0);
            total.1.merge(&part.1);
            if total.2.len() < part.2.len() {
                total.2.resize(part.2.len(), ComplexSum::default());
            }
            for (t, q) in total.2.iter_mut().zip(&part.2) {
                t.merge(q);
            }
            total.3 += part.3;
        },
    );
    // #{h : ε(h) ≤ x} ≤ 2x², and |e^{w c(h)}| ≤ e^{B|w|} ε^{2d|w|}
    let weight = (cost.growth.b * w.re.abs()).exp();
    let tail = 2.0 * weight * effective * cutoff.powf(2.0 - effective) / (effective - 2.0);
    Ok(DirichletPartials {
        s,
        w,
        cutoff,
        p: p.value(),
        z: z.value(),
        z_by_length: by_len.iter().map(ComplexSum::value).collect(),
        tail,
        cycles,
    })
}

pub fn p_partial(s: Complex64, w: Complex64, cost: &CostSpec, cutoff: f64) -> Result<TruncatedSum> {
    let d = dirichlet_partials(s, w, cost, cutoff)?;
    Ok(TruncatedSum {
        value: d.p,
        tail: d.tail,
        terms: d.cycles,
    })
}

pub fn z_partial(s: Complex64, w: Complex64, cost: &CostSpec, cutoff: f64) -> Result<TruncatedSum> {
    let d = dirichlet_partials(s, w, cost, cutoff)?;
    Ok(TruncatedSum {
        value: d.z,
        tail: d.tail,
        terms: d.cycles,
    })
}

/// `Tr A^k` of the collocation matrix against the orbit sum of `Tr H^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityRow {
    pub k: usize,
    pub matrix_trace: Complex64,
    pub direct: TruncatedSum,
    pub gap: f64,
    /// `|Tr A_D^k − Tr A_{D+16}^k|`.
    pub collocation_error: f64,
    pub tolerance: f64,
}

pub fn matrix_orbit_duality(
    s: Complex64,
    w: Complex64,
    cost: &CostSpec,
    config: SpectralConfig,
    trunc: &SeriesTruncation,
) -> Result<Vec<DualityRow>> {
    let build = |cfg: SpectralConfig| {
        build_operator(&OperatorParams {
            s,
            w,
            cost: cost.clone(),
            config: cfg,
        })
    };
    let coarse = build(config)?;
    let fine = build(config.with_order(config.order + 16))?;
    (1..=trunc.k_max)
        .map(|k| {
            let matrix_trace = coarse.trace_of_power(k);
            let collocation_error = (matrix_trace - fine.trace_of_power(k)).norm();
            let direct = trace_hk_direct(k, s, w, cost, trunc)?;
            let gap = (matrix_trace - direct.value).norm();
            let tolerance = direct.tail + 10.0 * collocation_error + 1e-12 * matrix_trace.norm();
            Ok(DualityRow {
                k,
                matrix_trace,
                direct,
                gap,
                collocation_error,
                tolerance,
            })
        })
        .collect()
}

/// The even and odd quasi-inverses `(I − A²)^{−1} A²` and `(I − A²)^{−1} A`.
pub fn even_odd_quasi_inverses(op: &DiscretizedOperator) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let a = &op.matrix;
    let n = a.nrows();
    let a2 = a * a;
    let lu = (DMatrix::identity(n, n) - &a2).lu();
    let even = lu
        .solve(&a2)
        .ok_or_else(|| Error::Precision("I − H² is singular".into()))?;
    let odd = lu
        .solve(a)
        .ok_or_else(|| Error::Precision("I − H² is singular".into()))?;
    Ok((even, odd))
}

/// CSV with header `k,s_re,s_im,w,direct,trace_form,gap,tail`; complex sums are written
/// by their real parts, `w` by its real part.
pub fn write_trace_audit_csv<W: Write>(rows: &[YkReport], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("audit write failed: {e}"));
    wtr.write_record(["k", "s_re", "s_im", "w", "direct", "trace_form", "gap", "tail"])
        .map_err(io)?;
    for r in rows {
        wtr.write_record([
            r.k.to_string(),
            r.s.re.to_string(),
            r.s.im.to_string(),
            r.w.re.to_string(),
            r.direct.re.to_string(),
            r.trace_form.re.to_string(),
            r.gap.to_string(),
            (r.direct_tail + r.trace_tail).to_string(),
        ])
        .map_err(io)?;
    }
    wtr.flush()
        .map_err(|e| Error::InvalidInput(format!("audit write failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn word(d: &[u64]) -> DigitWord {
        DigitWord::new(d.to_vec()).unwrap()
    }

    #[test]
    fn single_components() {
        let unit = CostSpec::unit();
        let t1 = trace_component(&word(&[1]), c(1.0), c(0.0), &unit).unwrap();
        let a2 = PHI.powi(-2);
        assert!((t1.re - a2 / (1.0 + a2)).abs() < 1e-15);
        assert!((t1.re - 0.276_393_202_250_021).abs() < 1e-12);
        let t12 = trace_component(&word(&[1, 2]), c(1.0), c(0.0), &unit).unwrap();
        let a2 = (2.0 + 3f64.sqrt()).powi(-2);
        assert!((t12.re - a2 / (1.0 - a2)).abs() < 1e-15);
        assert!(trace_component(&word(&[1, 2]), c(60.0), c(0.0), &unit).unwrap().norm() < 1e-60);
        // rotation leaves the component unchanged
        let r = trace_component(&word(&[2, 1, 5]), c(1.3), c(0.2), &unit).unwrap();
        let rr = trace_component(&word(&[5, 2, 1]), c(1.3), c(0.2), &unit).unwrap();
        assert!((r - rr).norm() < 1e-15 * r.norm());
    }

    #[test]
    fn product_tail_matches_quadrature() {
        // k = 2: e ∫_Q^∞ (1 + ln x) x^{-e} dx by substitution x = Q e^u
        let (q, e) = (100.0f64, 2.5f64);
        let n = 200_000;
        let h = 40.0 / n as f64;
        let integral: f64 = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) * h;
                let x = q * u.exp();
                (1.0 + x.ln()) * x.powf(1.0 - e) * h
            })
            .sum();
        assert!((product_tail(2, q, e) - e * integral).abs() < 1e-8 * product_tail(2, q, e));
        assert!(product_tail(3, q, 1.0).is_infinite());
    }

    #[test]
    fn first_trace_against_a_finer_cutoff() {
        let unit = CostSpec::unit();
        let coarse = trace_hk_direct(1, c(1.2), c(0.0), &unit, &SeriesTruncation::new(1, 10_000).unwrap()).unwrap();
        let fine = trace_hk_direct(1, c(1.2), c(0.0), &unit, &SeriesTruncation::new(1, 100_000).unwrap()).unwrap();
        assert_eq!(coarse.terms, 10_000);
        assert!(coarse.tail.is_finite() && coarse.tail < 1e-4);
        assert!((coarse.value - fine.value).norm() <= coarse.tail + fine.tail);
    }

    #[test]
    fn second_trace_is_a_sum_over_pairs() {
        let unit = CostSpec::unit();
        let trunc = SeriesTruncation::new(2, 30).unwrap();
        let t = trace_hk_direct(2, c(1.5), c(0.1), &unit, &trunc).unwrap();
        let mut expect = Complex64::new(0.0, 0.0);
        for a in 1..=30u64 {
            for b in 1..=30 / a {
                expect += trace_component(&word(&[a, b]), c(1.5), c(0.1), &unit).unwrap();
            }
        }
        assert!((t.value - expect).norm() < 1e-14);
    }

    #[test]
    fn yk_identity_holds_to_rounding() {
        let unit = CostSpec::unit();
        let trunc = SeriesTruncation::new(3, 2000).unwrap();
        for k in 1..=3 {
            for w in [0.0, 0.1] {
                let r = yk(k, c(2.4), c(w), &unit, &trunc).unwrap();
                assert!(r.gap <= 1e-12, "k={k} gap={}", r.gap);
                assert!(r.direct.re > 0.0 && r.trace_low.re > 0.0 && r.trace_high.re > 0.0);
            }
        }
        assert!(matches!(
            yk(1, c(0.9), c(0.0), &unit, &trunc),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn series_require_re_s_above_two() {
        let unit = CostSpec::unit();
        assert!(matches!(
            dirichlet_partials(c(2.0), c(0.0), &unit, 100.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn z_matches_a_sum_over_all_words() {
        // every word, primitive or not, with ε(h) ≤ N
        let n = 300.0;
        let cost = CostSpec::digit_indicator(1).unwrap();
        let (s, w) = (c(3.0), c(0.2));
        let d = dirichlet_partials(s, w, &cost, n).unwrap();
        let mut brute = Complex64::new(0.0, 0.0);
        let mut primitive = Complex64::new(0.0, 0.0);
        let mut stack = vec![(Vec::<u64>::new(), Lft::IDENTITY)];
        while let Some((digits, h)) = stack.pop() {
            if !digits.is_empty() {
                let wd = DigitWord::new(digits.clone()).unwrap();
                let eps = size_triple(&wd).unwrap().epsilon;
                if eps <= n {
                    let term = (w * cost.word_cost(&wd)).exp() * eps.powf(-s.re);
                    brute += term;
                    if crate::necklace::is_primitive(&wd) {
                        primitive += term;
                    }
                }
            }
            for m in 1..=n as u64 {
                let g = h.push_digit(m).unwrap();
                if g.d as f64 > n {
                    break;
                }
                let mut next = digits.clone();
                next.push(m);
                stack.push((next, g));
            }
        }
        assert!((d.z - brute).norm() < 1e-13, "z={} brute={} p={} prim={}", d.z, brute, d.p, primitive);
        assert!((d.p - primitive).norm() < 1e-13);
        let by_len: Complex64 = d.z_by_length.iter().sum();
        assert!((by_len - d.z).norm() < 1e-14);
        assert!(d.non_primitive().re >= 0.0);
    }

    #[test]
    fn p_is_stable_across_cutoffs() {
        let unit = CostSpec::unit();
        let a = p_partial(c(3.0), c(0.0), &unit, 1000.0).unwrap();
        let b = p_partial(c(3.0), c(0.0), &unit, 10_000.0).unwrap();
        assert!((a.value - b.value).norm() <= a.tail);
        assert!(b.value.re > a.value.re);
    }

    #[test]
    fn matrix_traces_track_orbit_sums() {
        let unit = CostSpec::unit();
        let trunc = SeriesTruncation::new(4, 20_000).unwrap();
        let rows = matrix_orbit_duality(c(1.5), c(0.05), &unit, SpectralConfig::compact().with_order(32), &trunc).unwrap();
        for r in rows {
            assert!(r.gap <= r.tolerance, "k={} gap={:e} tol={:e}", r.k, r.gap, r.tolerance);
        }
    }

    #[test]
    fn quasi_inverses_resum_the_powers() {
        let op = build_operator(&OperatorParams {
            s: c(2.0),
            w: c(0.0),
            cost: CostSpec::unit(),
            config: SpectralConfig::compact().with_order(24),
        })
        .unwrap();
        let (even, odd) = even_odd_quasi_inverses(&op).unwrap();
        let even_sum: Complex64 = (1..40).map(|j| op.trace_of_power(2 * j)).sum();
        let odd_sum: Complex64 = (0..40).map(|j| op.trace_of_power(2 * j + 1)).sum();
        assert!((even.trace() - even_sum).norm() < 1e-13);
        assert!((odd.trace() - odd_sum).norm() < 1e-13);
    }

    #[test]
    fn audit_csv_has_declared_columns() {
        let unit = CostSpec::unit();
        let trunc = SeriesTruncation::new(1, 100).unwrap();
        let r = yk(1, c(2.4), c(0.0), &unit, &trunc).unwrap();
        let mut buf = Vec::new();
        write_trace_audit_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,s_re,s_im,w,direct,trace_form,gap,tail\n1,2.4,0,0,"));
    }
}
