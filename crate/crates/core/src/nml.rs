//! Normalized maximum likelihood code lengths for histogram models.
//!
//! The parametric complexity of a histogram depends only on the sample size
//! `n` and the number of bins `K`, so one table of `log2 COMP(n, K)` serves
//! one- and two-dimensional models alike. Everything is carried in log space:
//! `COMP(n, K)` overflows a double long before `n` reaches a million.

use std::f64::consts::LN_2;

use crate::error::{invalid, Result};
use crate::geometry::{Dataset2D, DensityVector, Partition};

/// `log2 COMP(n, K)` for `K = 1..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompTable {
    n: usize,
    // Index K; slot 0 is unused.
    bits: Vec<f64>,
}

impl CompTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.bits.len() - 1
    }

    /// `log2 COMP(n, k)`. Panics if `k` is zero or beyond the table.
    pub fn get(&self, k: usize) -> f64 {
        assert!(k >= 1 && k < self.bits.len(), "K = {k} outside 1..={}", self.k_max());
        self.bits[k]
    }
}

/// Total code length split into its data and model parts, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeLength {
    pub data_bits: f64,
    pub model_bits: f64,
    pub total_bits: f64,
}

impl CodeLength {
    pub fn new(data_bits: f64, model_bits: f64) -> Self {
        Self {
            data_bits,
            model_bits,
            total_bits: data_bits + model_bits,
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Natural log of `COMP(n, 2)` by direct summation over the two-bin splits.
fn ln_comp2(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut ln_fact = Vec::with_capacity(n + 1);
    ln_fact.push(0.0);
    let mut acc = 0.0f64;
    for i in 1..=n {
        acc += (i as f64).ln();
        ln_fact.push(acc);
    }
    let ln_n = (n as f64).ln();
    let xlogx = |h: usize| if h == 0 { 0.0 } else { h as f64 * ((h as f64).ln() - ln_n) };
    let terms: Vec<f64> = (0..=n)
        .map(|h| ln_fact[n] - ln_fact[h] - ln_fact[n - h] + xlogx(h) + xlogx(n - h))
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Builds `log2 COMP(n, K)` for `K = 1..=k_max` in `O(n + k_max)` time, using
/// `COMP(n, K) = COMP(n, K-1) + n / (K-2) * COMP(n, K-2)`.
///
/// `n = 0` gives all zeros.
pub fn log_comp(n: usize, k_max: usize) -> Result<CompTable> {
    if k_max < 1 {
        return invalid("k_max must be at least 1");
    }
    let mut ln = vec![0.0; k_max + 1];
    if k_max >= 2 {
        ln[2] = ln_comp2(n);
    }
    let ln_n = if n == 0 { f64::NEG_INFINITY } else { (n as f64).ln() };
    for k in 3..=k_max {
        ln[k] = log_add(ln[k - 1], ln_n - ((k - 2) as f64).ln() + ln[k - 2]);
    }
    let bits = ln.into_iter().map(|v| v / LN_2).collect();
    Ok(CompTable { n, bits })
}

/// `log2 COMP(n, K)` by enumerating every composition `h_1 + ... + h_K = n`.
/// Limited to `n <= 15` and `K <= 8`.
pub fn log_comp_brute(n: usize, k: usize) -> Result<f64> {
    if n > 15 || k > 8 {
        return invalid(format!("brute-force COMP limited to n <= 15, K <= 8 (got n={n}, K={k})"));
    }
    if k < 1 {
        return invalid("K must be at least 1");
    }
    let fact: Vec<f64> = (0..=n)
        .scan(1.0f64, |acc, i| {
            if i > 0 {
                *acc *= i as f64;
            }
            Some(*acc)
        })
        .collect();

    fn walk(rest: usize, slots: usize, n: usize, fact: &[f64], weight: f64, lik: f64) -> f64 {
        if slots == 1 {
            let h = rest;
            let p = if h == 0 { 1.0 } else { (h as f64 / n as f64).powi(h as i32) };
            return weight / fact[h] * lik * p;
        }
        (0..=rest)
            .map(|h| {
                let p = if h == 0 { 1.0 } else { (h as f64 / n as f64).powi(h as i32) };
                walk(rest - h, slots - 1, n, fact, weight / fact[h], lik * p)
            })
            .sum()
    }

    let total = walk(n, k, n, &fact, fact[n], 1.0);
    Ok(total.log2())
}

/// `log2 COMP(n, S̃)` by summing the maximized likelihood over every sequence
/// of `n` lattice cells of S. Limited to `|S| / ε² <= 9` cells and `n <= 4`.
pub fn comp_brute_2d(n: usize, partition: &Partition) -> Result<f64> {
    let [w, h] = partition.grid().cells();
    let cells = (w * h) as usize;
    if cells > 9 || n > 4 {
        return invalid(format!(
            "2-D brute force limited to 9 cells and n <= 4 (got {cells} cells, n={n})"
        ));
    }
    let owner: Vec<usize> = (0..h)
        .flat_map(|y| (0..w).map(move |x| [x, y]))
        .map(|c| partition.region_of(c).expect("partition covers S"))
        .collect();
    let area: Vec<f64> = partition.regions().iter().map(|r| r.area_cells() as f64).collect();
    let k = partition.len();

    let mut total = 0.0;
    let mut seq = vec![0usize; n];
    loop {
        let mut counts = vec![0usize; k];
        for &c in &seq {
            counts[owner[c]] += 1;
        }
        let lik: f64 = counts
            .iter()
            .zip(&area)
            .filter(|(h, _)| **h > 0)
            .map(|(&h, &a)| (h as f64 / (n as f64 * a)).powi(h as i32))
            .product();
        total += lik;

        // next sequence in base `cells`
        let mut i = 0;
        while i < n {
            seq[i] += 1;
            if seq[i] < cells {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    Ok(total.log2())
}

/// `h * log2(h / (n * cells))`, the maximized log-likelihood contribution of
/// one region holding `h` of `n` points over `cells` lattice cells. Zero for
/// an empty region.
pub(crate) fn region_loglik(h: usize, cells: i64, n: usize) -> f64 {
    if h == 0 {
        return 0.0;
    }
    let h = h as f64;
    h * (h / (n as f64 * cells as f64)).log2()
}

/// `-log2 P(x^n | S̃, f̂)` for the cached counts of `partition`.
pub fn neg_log_likelihood(partition: &Partition, n: usize) -> f64 {
    -partition
        .regions()
        .iter()
        .map(|r| {
            debug_assert!(r.area_cells() > 0, "zero-area region");
            region_loglik(r.count(), r.area_cells(), n)
        })
        .sum::<f64>()
}

/// NML code length of `data` given `partition`:
/// `-log2 P(x^n | S̃) + log2 COMP(n, K)`.
pub fn data_code_length_2d(partition: &Partition, data: &Dataset2D) -> f64 {
    let n = data.len();
    if n == 0 {
        return 0.0;
    }
    let comp = log_comp(n, partition.len()).expect("partition has at least one region");
    neg_log_likelihood(partition, n) + comp.get(partition.len())
}

/// Maximum likelihood densities `f̂_j = h_j / (n |S_j|)`.
pub fn ml_densities(partition: &Partition, data: &Dataset2D) -> Result<DensityVector> {
    let n = data.len();
    if n == 0 {
        return invalid("densities are undefined for an empty dataset");
    }
    let grid = partition.grid();
    Ok(DensityVector(
        partition
            .regions()
            .iter()
            .map(|r| r.count() as f64 / (n as f64 * r.area(grid)))
            .collect(),
    ))
}

/// `log2 C(e, k)`; `-inf` when `k > e`.
pub fn log2_binomial(e: u64, k: u64) -> f64 {
    if k > e {
        return f64::NEG_INFINITY;
    }
    let k = k.min(e - k);
    (1..=k)
        .map(|i| ((e - k + i) as f64 / i as f64).log2())
        .sum()
}
