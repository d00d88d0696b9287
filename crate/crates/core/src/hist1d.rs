//! MDL-optimal one-dimensional histograms.
//!
//! Cut points live on the ε-lattice strictly inside the extent. For each bin
//! count `K` a dynamic program finds the maximum likelihood cut set; the
//! parametric complexity and the cut-set code `log2 C(E, K-1)` are added
//! afterwards, since both are constant for fixed `K`. `E` counts every
//! interior lattice position, independent of the data.
//!
//! Bins are closed on the left and open on the right, except the last bin,
//! which is closed on both sides.

use crate::error::{invalid, Result};
use crate::nml::{log2_binomial, log_comp};

/// Closed lattice interval `[lo, hi]` holding one-dimensional data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent1D {
    lo: i64,
    hi: i64,
    epsilon: f64,
}

impl Extent1D {
    pub fn new(lo: i64, hi: i64, epsilon: f64) -> Result<Self> {
        if lo >= hi {
            return invalid(format!("empty extent [{lo}, {hi}]"));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return invalid(format!("epsilon must be positive, got {epsilon}"));
        }
        Ok(Self { lo, hi, epsilon })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of interior lattice positions, E.
    pub fn interior_positions(&self) -> u64 {
        (self.hi - self.lo - 1) as u64
    }

    /// Per-position point counts over `lo..=hi`.
    fn histogram(&self, z: &[i64]) -> Vec<u32> {
        let mut counts = vec![0u32; (self.hi - self.lo + 1) as usize];
        for &v in z {
            debug_assert!(v >= self.lo && v <= self.hi, "value {v} outside extent");
            let i = (v.clamp(self.lo, self.hi) - self.lo) as usize;
            counts[i] += 1;
        }
        counts
    }
}

/// Sorted interior cut positions of one histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSet {
    cuts: Vec<i64>,
    extent: Extent1D,
}

impl CutSet {
    pub fn new(cuts: Vec<i64>, extent: Extent1D) -> Result<Self> {
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("cuts must be strictly increasing");
        }
        if cuts.iter().any(|&c| c <= extent.lo || c >= extent.hi) {
            return invalid("cuts must lie strictly inside the extent");
        }
        Ok(Self { cuts, extent })
    }

    pub fn cuts(&self) -> &[i64] {
        &self.cuts
    }

    pub fn extent(&self) -> &Extent1D {
        &self.extent
    }

    /// Number of bins K.
    pub fn bins(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Cut positions in coordinate units, relative to the lattice origin.
    pub fn coords(&self) -> Vec<f64> {
        self.cuts.iter().map(|&c| c as f64 * self.extent.epsilon).collect()
    }
}

/// Interior positions that can appear in an optimal cut set.
///
/// A position `c` is dropped when some candidates `a < c < b` enclose a
/// data-free interval `[a, b]`. Equivalently, `c` is kept iff it is next to
/// an end of the extent or a data point lies in `{c-1, c, c+1}`.
pub fn candidate_cuts(z: &[i64], extent: &Extent1D) -> Vec<i64> {
    if z.is_empty() {
        return Vec::new();
    }
    retained_from_counts(&extent.histogram(z), extent)
}

fn retained_from_counts(counts: &[u32], extent: &Extent1D) -> Vec<i64> {
    let (lo, hi) = (extent.lo, extent.hi);
    if counts.iter().all(|&c| c == 0) {
        return Vec::new();
    }
    (lo + 1..hi)
        .filter(|&c| {
            let i = (c - lo) as usize;
            c - 1 == lo || c + 1 == hi || counts[i - 1] > 0 || counts[i] > 0 || counts[i + 1] > 0
        })
        .collect()
}

/// Maximum log-likelihood cut sets for every bin count.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodProfile {
    /// Index `K - 1`; `None` where K needs more cuts than there are candidates.
    pub per_k_cuts: Vec<Option<CutSet>>,
    /// `log2 P(z | Ĉ^K)`, `-inf` where infeasible.
    pub per_k_loglik: Vec<f64>,
    /// Number of (start, end) bin pairs scored by the dynamic program.
    pub evaluations: u64,
}

/// Result of MDL model selection over `K = 1..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DpResult {
    pub per_k_cuts: Vec<Option<CutSet>>,
    pub per_k_loglik: Vec<f64>,
    /// `L(z, Ĉ^K)` in bits, `+inf` where infeasible.
    pub per_k_total_bits: Vec<f64>,
    pub chosen_k: usize,
    pub total_bits: f64,
    pub evaluations: u64,
}

impl DpResult {
    pub fn chosen_cuts(&self) -> &CutSet {
        self.per_k_cuts[self.chosen_k - 1]
            .as_ref()
            .expect("chosen K is feasible")
    }
}

/// Runs the maximum likelihood dynamic program over the pruned candidates.
pub fn dp_best_cuts(z: &[i64], extent: &Extent1D, k_max: usize) -> LikelihoodProfile {
    let counts = extent.histogram(z);
    let candidates = retained_from_counts(&counts, extent);
    dp_over(&counts, extent, &candidates, k_max)
}

/// Same dynamic program over an explicit candidate list (sorted, interior).
pub fn dp_best_cuts_with(z: &[i64], extent: &Extent1D, candidates: &[i64], k_max: usize) -> LikelihoodProfile {
    let counts = extent.histogram(z);
    dp_over(&counts, extent, candidates, k_max)
}

fn dp_over(counts: &[u32], extent: &Extent1D, candidates: &[i64], k_max: usize) -> LikelihoodProfile {
    let k_max = k_max.max(1);
    let n: u64 = counts.iter().map(|&c| c as u64).sum();

    // Bin boundaries: lo, candidates..., hi.
    let mut pos = Vec::with_capacity(candidates.len() + 2);
    pos.push(extent.lo);
    pos.extend_from_slice(candidates);
    pos.push(extent.hi);
    let last = pos.len() - 1;

    // below[t] = points strictly left of pos[t]; the last bin is closed so
    // below[last] = n.
    let mut prefix = Vec::with_capacity(counts.len() + 1);
    prefix.push(0u64);
    for &c in counts {
        prefix.push(prefix.last().unwrap() + c as u64);
    }
    let below: Vec<u64> = pos
        .iter()
        .enumerate()
        .map(|(t, &p)| if t == last { n } else { prefix[(p - extent.lo) as usize] })
        .collect();

    let table_len = (n as usize).max((extent.hi - extent.lo) as usize) + 1;
    let lg: Vec<f64> = (0..table_len)
        .map(|i| if i == 0 { 0.0 } else { (i as f64).log2() })
        .collect();
    let lg_n = if n == 0 { 0.0 } else { lg[n as usize] };
    let bin = |i: usize, j: usize| -> f64 {
        let h = (below[j] - below[i]) as usize;
        if h == 0 {
            return 0.0;
        }
        let w = (pos[j] - pos[i]) as usize;
        h as f64 * (lg[h] - lg_n - lg[w])
    };

    let k_eff = k_max.min(last);
    let mut evaluations = 0u64;
    // best[k-1][j]: max loglik of the points left of pos[j] with k bins ending at pos[j].
    let mut best: Vec<Vec<f64>> = Vec::with_capacity(k_eff);
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(k_eff);
    best.push((0..=last).map(|j| if j == 0 { f64::NEG_INFINITY } else { bin(0, j) }).collect());
    back.push(vec![0; last + 1]);
    evaluations += last as u64;

    for k in 2..=k_eff {
        let prev = &best[k - 2];
        let mut cur = vec![f64::NEG_INFINITY; last + 1];
        let mut arg = vec![0u32; last + 1];
        // Only the full extent matters for the final bin count.
        let j_range = if k == k_eff { last..=last } else { k..=last };
        for j in j_range {
            let mut bv = f64::NEG_INFINITY;
            let mut bi = 0usize;
            for (i, &p) in prev.iter().enumerate().take(j).skip(k - 1) {
                let v = p + bin(i, j);
                if v > bv {
                    bv = v;
                    bi = i;
                }
            }
            evaluations += (j - (k - 1)) as u64;
            cur[j] = bv;
            arg[j] = bi as u32;
        }
        best.push(cur);
        back.push(arg);
    }

    let mut per_k_cuts = Vec::with_capacity(k_max);
    let mut per_k_loglik = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if k > k_eff {
            per_k_cuts.push(None);
            per_k_loglik.push(f64::NEG_INFINITY);
            continue;
        }
        let mut cuts = Vec::with_capacity(k - 1);
        let mut j = last;
        for kk in (2..=k).rev() {
            let i = back[kk - 1][j] as usize;
            cuts.push(pos[i]);
            j = i;
        }
        cuts.reverse();
        per_k_loglik.push(best[k - 1][last]);
        per_k_cuts.push(Some(CutSet { cuts, extent: *extent }));
    }
    LikelihoodProfile {
        per_k_cuts,
        per_k_loglik,
        evaluations,
    }
}

/// Picks the bin count minimizing
/// `-log2 P(z | Ĉ^K) + log2 COMP(n, K) + log2 C(E, K-1)`; ties go to the
/// smaller `K`.
pub fn select_mdl_histogram(z: &[i64], extent: &Extent1D, k_max: usize) -> DpResult {
    let profile = dp_best_cuts(z, extent, k_max);
    finish_selection(profile, z.len(), extent)
}

pub(crate) fn select_from_counts(counts: &[u32], extent: &Extent1D, k_max: usize) -> DpResult {
    let n: u64 = counts.iter().map(|&c| c as u64).sum();
    let candidates = retained_from_counts(counts, extent);
    let profile = dp_over(counts, extent, &candidates, k_max);
    finish_selection(profile, n as usize, extent)
}

/// Adds complexity and model bits to a likelihood profile and selects K.
pub fn finish_selection(profile: LikelihoodProfile, n: usize, extent: &Extent1D) -> DpResult {
    let k_max = profile.per_k_loglik.len();
    let comp = log_comp(n, k_max).expect("k_max >= 1");
    let e = extent.interior_positions();
    let per_k_total_bits: Vec<f64> = profile
        .per_k_loglik
        .iter()
        .enumerate()
        .map(|(i, &ll)| {
            let k = i + 1;
            if ll == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                -ll + comp.get(k) + log2_binomial(e, (k - 1) as u64)
            }
        })
        .collect();
    let mut chosen = 0;
    for (i, &t) in per_k_total_bits.iter().enumerate() {
        if t < per_k_total_bits[chosen] {
            chosen = i;
        }
    }
    DpResult {
        total_bits: per_k_total_bits[chosen],
        chosen_k: chosen + 1,
        per_k_cuts: profile.per_k_cuts,
        per_k_loglik: profile.per_k_loglik,
        per_k_total_bits,
        evaluations: profile.evaluations,
    }
}
