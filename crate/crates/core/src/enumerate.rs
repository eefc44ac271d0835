//! Exhaustive enumeration of the reduced quadratic irrationals with `ε ≤ N`.
//!
//! Each such number is one rotation of a primitive digit cycle, so the search walks
//! Lyndon words (primitive, least rotation) and weights each one by its period.
//! The walk is the prenecklace tree: a prefix `a_1 … a_t` with period `p` may be
//! extended by `b ≥ a_{t+1-p}`, and it is a Lyndon word exactly when `p = t`.
//! Matrices are nonnegative, so `ε ≥ ρ ≥ d` and the lower-right entry `d` only
//! grows along the tree; a prefix with `d > N` has no admissible descendant.

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::lft::{size_triple_of, DigitWord, Lft, SizeBound, SizeTriple};
use crate::special::CompensatedSum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

/// A primitive cycle of the Gauss map, stored by its least rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub word: DigitWord,
    pub period: usize,
    pub sizes: SizeTriple,
    /// Cost id → total cost over one period.
    pub costs: BTreeMap<String, f64>,
}

/// Search bounds: `ε ≤ N` and optionally every digit `≤ M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enumeration {
    pub bound: SizeBound,
    pub digit_cap: Option<u64>,
}

impl Enumeration {
    pub fn new(n: f64, digit_cap: Option<u64>) -> Result<Self> {
        if digit_cap == Some(0) {
            return Err(Error::InvalidDigit(0));
        }
        Ok(Enumeration {
            bound: SizeBound::new(n)?,
            digit_cap,
        })
    }

    fn exceeds(&self, d: i128) -> bool {
        match self.bound {
            SizeBound::Integer(n) => d > n as i128,
            SizeBound::Real(x) => d as f64 > x,
        }
    }

    fn first_digits(&self) -> std::ops::RangeInclusive<u64> {
        let n = self.bound.value().floor() as u64;
        1..=self.digit_cap.map_or(n, |m| m.min(n))
    }

    /// Walk every admissible Lyndon word whose first digit is `first`.
    fn walk_from<F: FnMut(&[u64], &Lft)>(&self, first: u64, visit: &mut F) {
        let cap = self.digit_cap.unwrap_or(u64::MAX);
        let mut digits = vec![first];
        let h = Lft::IDENTITY.push_digit(first).expect("single digit");
        self.walk(&mut digits, h, 1, cap, visit);
    }

    fn walk<F: FnMut(&[u64], &Lft)>(
        &self,
        digits: &mut Vec<u64>,
        h: Lft,
        period: usize,
        cap: u64,
        visit: &mut F,
    ) {
        let t = digits.len();
        if period == t && h.epsilon_at_most(t % 2 == 0, &self.bound) {
            visit(digits, &h);
        }
        let lo = digits[t - period];
        let mut b = lo;
        while b <= cap {
            // overflow can only happen far beyond any bound
            let Some(child) = h.push_digit(b) else { break };
            if self.exceeds(child.d) {
                break;
            }
            digits.push(b);
            let p = if b == lo { period } else { t + 1 };
            self.walk(digits, child, p, cap, visit);
            digits.pop();
            b += 1;
        }
    }

    /// Sequential visit of every admissible primitive cycle in lexicographic order.
    pub fn visit<F: FnMut(&[u64], &Lft)>(&self, mut visit: F) {
        for first in self.first_digits() {
            self.walk_from(first, &mut visit);
        }
    }

    /// Parallel fold partitioned by first digit; partial results merge in ascending order,
    /// so the outcome does not depend on the number of worker threads.
    pub fn fold<A, I, F, M>(&self, init: I, fold: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &[u64], &Lft) + Sync,
        M: Fn(&mut A, A),
    {
        let parts: Vec<A> = self
            .first_digits()
            .into_par_iter()
            .map(|first| {
                let mut acc = init();
                self.walk_from(first, &mut |w: &[u64], h: &Lft| fold(&mut acc, w, h));
                acc
            })
            .collect();
        let mut total = init();
        for p in parts {
            merge(&mut total, p);
        }
        total
    }
}

/// All primitive cycles with `ε ≤ N` (and digits `≤ M` if capped), with their costs.
pub fn enumerate_necklaces(
    n: f64,
    digit_cap: Option<u64>,
    costs: &[CostSpec],
) -> Result<Vec<PeriodicOrbit>> {
    let e = Enumeration::new(n, digit_cap)?;
    let mut out = Vec::new();
    e.visit(|w, h| {
        let word = DigitWord::from_valid(w.to_vec());
        let costs = costs.iter().map(|c| (c.id(), c.word_cost(&word))).collect();
        out.push(PeriodicOrbit {
            period: w.len(),
            sizes: size_triple_of(h, w.len() % 2 == 0),
            word,
            costs,
        });
    });
    Ok(out)
}

/// `|P_N|`, counting every rotation.
pub fn count_pn(n: f64) -> Result<u64> {
    count_pn_capped(n, None)
}

pub fn count_pn_capped(n: f64, digit_cap: Option<u64>) -> Result<u64> {
    let e = Enumeration::new(n, digit_cap)?;
    Ok(e.fold(|| 0u64, |acc, w, _| *acc += w.len() as u64, |a, b| *a += b))
}

/// `Σ p e^{wC}` for one grid value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgfSample {
    pub w: f64,
    pub sum: CompensatedSum,
}

/// Streaming moments of one cost over the population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostAccumulator {
    pub cost: CostSpec,
    pub sum: CompensatedSum,
    pub sum_sq: CompensatedSum,
    /// Multiplicity of each value for integer-valued costs.
    pub histogram: Option<BTreeMap<i64, u64>>,
    pub mgf: Vec<MgfSample>,
}

impl CostAccumulator {
    fn new(cost: &CostSpec, w_grid: &[f64]) -> Self {
        CostAccumulator {
            cost: cost.clone(),
            sum: CompensatedSum::default(),
            sum_sq: CompensatedSum::default(),
            histogram: cost.is_integer_valued().then(BTreeMap::new),
            mgf: w_grid
                .iter()
                .map(|&w| MgfSample {
                    w,
                    sum: CompensatedSum::default(),
                })
                .collect(),
        }
    }

    fn record(&mut self, value: f64, weight: u64) {
        let p = weight as f64;
        self.sum.add(p * value);
        self.sum_sq.add(p * value * value);
        if let Some(h) = &mut self.histogram {
            *h.entry(value as i64).or_insert(0) += weight;
        }
        for s in &mut self.mgf {
            s.sum.add(p * (s.w * value).exp());
        }
    }

    fn merge(&mut self, other: &CostAccumulator) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
        if let (Some(h), Some(o)) = (&mut self.histogram, &other.histogram) {
            for (&k, &v) in o {
                *h.entry(k).or_insert(0) += v;
            }
        }
        for (s, o) in self.mgf.iter_mut().zip(&other.mgf) {
            s.sum.merge(&o.sum);
        }
    }
}

/// Aggregates over `P_N` under the uniform probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSummary {
    pub bound: f64,
    pub digit_cap: Option<u64>,
    /// Numbers with `ε = N` exactly are members of `P_N`.
    pub ties_included: bool,
    pub count: u64,
    pub necklaces: u64,
    pub max_period: usize,
    pub costs: Vec<CostAccumulator>,
    pub log_epsilon_sum: CompensatedSum,
    pub log_epsilon_sq_sum: CompensatedSum,
}

impl PopulationSummary {
    fn empty(bound: f64, digit_cap: Option<u64>, costs: &[CostSpec], w_grid: &[f64]) -> Self {
        PopulationSummary {
            bound,
            digit_cap,
            ties_included: true,
            count: 0,
            necklaces: 0,
            max_period: 0,
            costs: costs.iter().map(|c| CostAccumulator::new(c, w_grid)).collect(),
            log_epsilon_sum: CompensatedSum::default(),
            log_epsilon_sq_sum: CompensatedSum::default(),
        }
    }

    fn record(&mut self, digits: &[u64], h: &Lft) {
        let p = digits.len();
        self.count += p as u64;
        self.necklaces += 1;
        self.max_period = self.max_period.max(p);
        for acc in &mut self.costs {
            let c: f64 = digits.iter().map(|&m| acc.cost.evaluate(m)).sum();
            acc.record(c, p as u64);
        }
        let r = if p % 2 == 0 { 1.0 } else { 2.0 };
        let log_eps = r * h.spectral_radius().ln();
        self.log_epsilon_sum.add(p as f64 * log_eps);
        self.log_epsilon_sq_sum.add(p as f64 * log_eps * log_eps);
    }

    fn merge(&mut self, other: PopulationSummary) {
        self.count += other.count;
        self.necklaces += other.necklaces;
        self.max_period = self.max_period.max(other.max_period);
        for (a, b) in self.costs.iter_mut().zip(&other.costs) {
            a.merge(b);
        }
        self.log_epsilon_sum.merge(&other.log_epsilon_sum);
        self.log_epsilon_sq_sum.merge(&other.log_epsilon_sq_sum);
    }

    /// Accumulator for the cost with the given id.
    pub fn cost(&self, id: &str) -> Option<&CostAccumulator> {
        self.costs.iter().find(|a| a.cost.id() == id)
    }
}

/// Streams over `P_N` once, accumulating every requested statistic.
pub fn population(
    n: f64,
    costs: &[CostSpec],
    w_grid: &[f64],
    digit_cap: Option<u64>,
) -> Result<PopulationSummary> {
    let e = Enumeration::new(n, digit_cap)?;
    if w_grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidInput("w grid must be finite".into()));
    }
    let bound = e.bound.value();
    Ok(e.fold(
        || PopulationSummary::empty(bound, digit_cap, costs, w_grid),
        |acc, w, h| acc.record(w, h),
        |a, b| a.merge(b),
    ))
}

/// Writes one row per number (every rotation of every cycle).
pub fn write_audit_csv<W: Write>(orbits: &[PeriodicOrbit], chi_n: u64, out: W) -> Result<()> {
    let unit = CostSpec::unit();
    let chi = CostSpec::digit_indicator(chi_n)?;
    let ell = CostSpec::binary_length();
    let mut wtr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("audit output: {e}"));
    wtr.write_record([
        "word",
        "period",
        "epsilon",
        "q",
        "cost_unit",
        "cost_chi_n",
        "cost_binlen",
    ])
    .map_err(io)?;
    for o in orbits {
        for r in 0..o.period {
            let w = o.word.rotated(r);
            let sizes = crate::lft::size_triple(&w)?;
            wtr.write_record([
                w.to_dashed(),
                o.period.to_string(),
                format!("{:.12}", sizes.epsilon),
                format!("{}", sizes.q),
                unit.word_cost(&w).to_string(),
                chi.word_cost(&w).to_string(),
                ell.word_cost(&w).to_string(),
            ])
            .map_err(io)?;
        }
    }
    wtr.flush()
        .map_err(|e| Error::InvalidInput(format!("audit output: {e}")))?;
    Ok(())
}
