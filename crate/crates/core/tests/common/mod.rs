//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Ridge solution `(lambda I + X'X)^-1 X'r`.
pub fn ridge(xs: &[Vec<f64>], rs: &[f64], lambda: f64) -> Vec<f64> {
    let d = xs[0].len();
    let mut a = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    for i in 0..d {
        a[i][i] = lambda;
    }
    for (x, r) in xs.iter().zip(rs) {
        for i in 0..d {
            b[i] += r * x[i];
            for j in 0..d {
                a[i][j] += x[i] * x[j];
            }
        }
    }
    solve_dense(a, b)
}

/// Ordinary least squares coefficients and HC0 (White) standard errors.
pub fn ols_hc0(y: &[f64], x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let p = x[0].len();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, yi) in x.iter().zip(y) {
        for i in 0..p {
            xty[i] += row[i] * yi;
            for j in 0..p {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    let beta = solve_dense(xtx.clone(), xty);
    // (X'X)^-1 column by column
    let inv: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            solve_dense(xtx.clone(), e)
        })
        .collect();
    let mut meat = vec![vec![0.0; p]; p];
    for (row, yi) in x.iter().zip(y) {
        let fit: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
        let e2 = (yi - fit).powi(2);
        for i in 0..p {
            for j in 0..p {
                meat[i][j] += e2 * row[i] * row[j];
            }
        }
    }
    let se = (0..p)
        .map(|k| {
            let mut v = 0.0;
            for i in 0..p {
                for j in 0..p {
                    v += inv[i][k] * meat[i][j] * inv[j][k];
                }
            }
            v.sqrt()
        })
        .collect();
    (beta, se)
}

/// Average ranks (1-based) with ties sharing their mean rank, by counting.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let below = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn two_sided(stats: &[f64], observed: f64) -> f64 {
    let n = stats.len() as f64;
    let eps = 1e-9;
    let lower = stats.iter().filter(|s| **s <= observed + eps).count() as f64 / n;
    let upper = stats.iter().filter(|s| **s >= observed - eps).count() as f64 / n;
    (2.0 * lower.min(upper)).min(1.0)
}

/// Signed-rank p-value by enumerating every sign assignment of the non-zero differences.
pub fn wilcoxon_enumerated(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let r = ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let observed: f64 = r.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();
    let n = d.len();
    let all: Vec<f64> = (0..1u32 << n)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| r[i]).sum())
        .collect();
    two_sided(&all, observed)
}

/// Rank-sum p-value by enumerating every relabelling of the pooled sample.
pub fn mwu_enumerated(x: &[f64], y: &[f64]) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let r = ranks(&pooled);
    let n = pooled.len();
    let observed: f64 = r[..x.len()].iter().sum();
    let all: Vec<f64> = (0..1u32 << n)
        .filter(|m| m.count_ones() as usize == x.len())
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| r[i]).sum())
        .collect();
    two_sided(&all, observed)
}

/// Tie-corrected Kruskal-Wallis H from first principles.
pub fn kruskal_h(groups: &[Vec<f64>]) -> f64 {
    let pooled: Vec<f64> = groups.concat();
    let r = ranks(&pooled);
    let n = pooled.len() as f64;
    let mut start = 0;
    let mut h = 0.0;
    for g in groups {
        let sum: f64 = r[start..start + g.len()].iter().sum();
        h += sum * sum / g.len() as f64;
        start += g.len();
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    let mut seen: Vec<f64> = Vec::new();
    let mut ties = 0.0;
    for v in &pooled {
        if !seen.contains(v) {
            seen.push(*v);
            let t = pooled.iter().filter(|w| *w == v).count() as f64;
            ties += t * t * t - t;
        }
    }
    h / (1.0 - ties / (n * n * n - n))
}
