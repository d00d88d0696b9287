//! Brute-force references shared by the integration tests. Nothing here
//! calls into the library's own code-length routines.

#![allow(dead_code)]

/// SplitMix64, for drawing test instances independently of the library RNG.
pub struct Mix(pub u64);

impl Mix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next() % (hi - lo + 1) as u64) as i64
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

fn compositions(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if k == 1 {
        prefix.push(n);
        out(prefix);
        prefix.pop();
        return;
    }
    for h in 0..=n {
        prefix.push(h);
        compositions(n - h, k - 1, prefix, out);
        prefix.pop();
    }
}

/// log2 COMP(n, K) summed term by term over all count vectors, with exact
/// multinomial coefficients.
pub fn comp_by_compositions(n: usize, k: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut total = 0.0f64;
    compositions(n, k, &mut Vec::new(), &mut |h| {
        let mut coef: u128 = 1;
        let mut left = n as u64;
        for &hi in h {
            coef *= binomial(left, hi as u64);
            left -= hi as u64;
        }
        let log_p: f64 = h
            .iter()
            .filter(|&&x| x > 0)
            .map(|&x| x as f64 * (x as f64 / n as f64).log2())
            .sum();
        total += coef as f64 * log_p.exp2();
    });
    total.log2()
}

/// Every way to choose `r` elements of `0..m`, in increasing order.
pub fn subsets(m: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, r, &mut Vec::new(), &mut out);
    out
}

/// `-log2 P(z | cuts)` summed point by point, for lattice indices `z` in
/// `[lo, hi]`. Bins are `[c_{j-1}, c_j)` with the last one closed.
pub fn histogram_nll(z: &[i64], lo: i64, hi: i64, cuts: &[i64]) -> f64 {
    let n = z.len();
    let mut edges = vec![lo];
    edges.extend_from_slice(cuts);
    edges.push(hi);
    let k = edges.len() - 1;
    let bin_of = |v: i64| -> usize {
        (0..k)
            .find(|&j| v >= edges[j] && (v < edges[j + 1] || (j == k - 1 && v <= hi)))
            .expect("point inside extent")
    };
    let mut counts = vec![0usize; k];
    for &v in z {
        counts[bin_of(v)] += 1;
    }
    let mut bits = 0.0;
    for &v in z {
        let j = bin_of(v);
        let width = (edges[j + 1] - edges[j]) as f64;
        bits -= (counts[j] as f64 / (n as f64 * width)).log2();
    }
    bits
}

/// Full code length: likelihood, parametric complexity and cut positions.
pub fn histogram_bits(z: &[i64], lo: i64, hi: i64, cuts: &[i64]) -> f64 {
    let k = cuts.len() + 1;
    let e = (hi - lo - 1) as u64;
    histogram_nll(z, lo, hi, cuts) + comp_by_compositions(z.len(), k) + (binomial(e, (k - 1) as u64) as f64).log2()
}

/// Minimum code length over every cut set with at most `k_max` bins;
/// returns (bits, K) with ties going to the smaller K.
pub fn exhaustive_1d(z: &[i64], lo: i64, hi: i64, k_max: usize) -> (f64, usize) {
    let interior: Vec<i64> = (lo + 1..hi).collect();
    let mut best = (f64::INFINITY, 0);
    for k in 1..=k_max {
        if k - 1 > interior.len() {
            break;
        }
        let fixed = comp_by_compositions(z.len(), k) + (binomial(interior.len() as u64, (k - 1) as u64) as f64).log2();
        for s in subsets(interior.len(), k - 1) {
            let cuts: Vec<i64> = s.iter().map(|&i| interior[i]).collect();
            let bits = histogram_nll(z, lo, hi, &cuts) + fixed;
            if bits < best.0 - 1e-12 {
                best = (bits, k);
            }
        }
    }
    best
}

/// Every partition of `0..m` into exactly `k` nonempty blocks, as block labels.
pub fn set_partitions(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, m: usize, k: usize, used: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == m {
            if used == k {
                out.push(labels.clone());
            }
            return;
        }
        if k - used > m - i {
            return;
        }
        for b in 0..=used.min(k - 1) {
            labels.push(b);
            go(i + 1, m, k, used.max(b + 1), labels, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, 0, &mut Vec::new(), &mut out);
    out
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}
