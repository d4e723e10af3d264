//! Straightforward rescanning versions of the counting primitives and
//! estimators, used as test oracles. Positions are 1-based throughout.
#![allow(dead_code)]

pub fn is_up(x: &[f64], u: f64, pos: usize) -> bool {
    pos >= 1 && pos < x.len() && x[pos - 1] <= u && u < x[pos]
}

pub fn upcrossings(x: &[f64], u: f64) -> Vec<usize> {
    (1..x.len()).filter(|&p| is_up(x, u, p)).collect()
}

fn ups_between(x: &[f64], u: f64, a: usize, b: usize) -> usize {
    (a..=b).filter(|&p| is_up(x, u, p)).count()
}

pub fn quantile(x: &[f64], p: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let j = (1..=n)
        .find(|&j| j as f64 >= n as f64 * p - 1e-9)
        .unwrap_or(n);
    s[j - 1]
}

pub fn top(x: &[f64], s_idx: usize) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s[s_idx]
}

pub fn block_counts(x: &[f64], u: f64, r: usize) -> Vec<usize> {
    let n = x.len();
    (1..=n / r)
        .map(|i| ups_between(x, u, (i - 1) * r + 1, (i * r).min(n - 1)))
        .collect()
}

pub fn disjoint_below(x: &[f64], u: f64, r: usize) -> f64 {
    let k = x.len() / r;
    let below = (0..k)
        .filter(|&i| {
            x[i * r..(i + 1) * r]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max)
                <= u
        })
        .count();
    below as f64 / k as f64
}

pub fn sliding_below(x: &[f64], u: f64, r: usize) -> f64 {
    let w = x.len() - r + 1;
    let below = (0..w)
        .filter(|&i| {
            x[i..i + r]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max)
                <= u
        })
        .count();
    below as f64 / w as f64
}

pub fn exceedances(x: &[f64], u: f64) -> Vec<usize> {
    (1..=x.len()).filter(|&i| x[i - 1] >= u).collect()
}

/// `None` when undefined.
pub fn blocks(x: &[f64], u: f64, r: usize) -> Option<f64> {
    let c = block_counts(x, u, r);
    let total: usize = c.iter().sum();
    let occupied = c.iter().filter(|&&v| v > 0).count();
    (total > 0).then(|| occupied as f64 / total as f64)
}

pub fn sigma2(x: &[f64], u: f64, r: usize) -> Option<f64> {
    let c = block_counts(x, u, r);
    let occupied = c.iter().filter(|&&v| v > 0).count();
    let sq: usize = c.iter().map(|v| v * v).sum();
    (occupied > 0).then(|| sq as f64 / occupied as f64)
}

pub fn log_blocks(x: &[f64], u: f64, r: usize, sliding: bool) -> Option<f64> {
    let c = block_counts(x, u, r);
    let total: usize = c.iter().sum();
    let f = if sliding {
        sliding_below(x, u, r)
    } else {
        disjoint_below(x, u, r)
    };
    if total == 0 || f == 0.0 {
        return None;
    }
    Some(-f.ln() / (total as f64 / c.len() as f64))
}

pub fn runs(x: &[f64], u: f64, k: usize) -> Option<f64> {
    let n = x.len();
    let total = upcrossings(x, u).len();
    if total == 0 {
        return None;
    }
    let num = (1..=n - k)
        .filter(|&i| ups_between(x, u, i, i + k - 3) == 0 && is_up(x, u, i + k - 1))
        .count();
    Some(num as f64 / total as f64)
}

pub fn ferro_segers(x: &[f64], u: f64) -> Option<f64> {
    let s = exceedances(x, u);
    if s.len() < 2 {
        return None;
    }
    let t: Vec<f64> = s.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let m = t.len() as f64;
    let theta = if t.iter().all(|&v| v <= 2.0) {
        2.0 * t.iter().sum::<f64>().powi(2) / (m * t.iter().map(|v| v * v).sum::<f64>())
    } else {
        let num = t.iter().map(|v| v - 1.0).sum::<f64>().powi(2);
        let den: f64 = t.iter().map(|v| (v - 1.0) * (v - 2.0)).sum();
        if den == 0.0 {
            return None;
        }
        2.0 * num / (m * den)
    };
    Some(theta.min(1.0))
}

pub fn ei(x: &[f64], u: f64) -> Option<f64> {
    let ups = upcrossings(x, u).len();
    if ups == 0 {
        return None;
    }
    Some(ferro_segers(x, u)? * exceedances(x, u).len() as f64 / ups as f64)
}

pub fn anti_dk(x: &[f64], u: f64, r: usize, k: usize) -> Option<f64> {
    let n = x.len();
    let total = upcrossings(x, u).len();
    if total == 0 {
        return None;
    }
    let num = (1..=n - r + 1)
        .filter(|&i| {
            is_up(x, u, i)
                && ups_between(x, u, i + 2, i + k - 1) == 0
                && ups_between(x, u, i + k, (i + r - 1).min(n - 1)) > 0
        })
        .count();
    Some(num as f64 / total as f64)
}
