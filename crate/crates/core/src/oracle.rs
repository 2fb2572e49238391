//! Brute-force reference implementations used only to check the fast paths.
//! Compiled for tests and behind the `oracles` feature.

use rand::Rng;

use crate::mixing::{beta_exact, JointPartitionDistribution};

/// All set partitions of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for g in 0..=max + 1 {
            cur.push(g);
            rec(i + 1, n, cur, max.max(g), out);
            cur.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut cur = vec![0];
    rec(1, n, &mut cur, 0, &mut out);
    out
}

/// Supremum of the atom-sum formula over every pair of coarsenings of the
/// two partitions.
pub fn beta_coarsening_sup(j: &JointPartitionDistribution) -> f64 {
    let (rows, cols) = j.shape();
    let rp = set_partitions(rows);
    let cp = set_partitions(cols);
    let mut best = 0.0f64;
    for r in &rp {
        for c in &cp {
            best = best.max(beta_exact(&j.coarsen(r, c)));
        }
    }
    best
}

/// `max_C |Σ_{(r,s)∈C} (J_rs - p_r q_s)|` by enumerating every set `C` of
/// atom pairs. Only feasible for up to about 20 atoms.
pub fn beta_subset_sup(j: &JointPartitionDistribution) -> Option<f64> {
    let d = j.deviation();
    if d.len() > 20 {
        return None;
    }
    let mut best = 0.0f64;
    for mask in 0u32..(1 << d.len()) {
        let s: f64 = (0..d.len()).filter(|i| mask >> i & 1 == 1).map(|i| d[i]).sum();
        best = best.max(s.abs());
    }
    Some(best)
}

/// Random joint matrix with the given shape. A third of the draws are exact
/// products of marginals and some entries are forced to zero.
pub fn random_joint<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> JointPartitionDistribution {
    let weights = |rng: &mut R, n: usize| -> Vec<f64> {
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    };
    match rng.random_range(0..3) {
        0 => {
            let p = weights(rng, rows);
            let q = weights(rng, cols);
            let m: Vec<Vec<f64>> = p.iter().map(|a| q.iter().map(|b| a * b).collect()).collect();
            normalise(m)
        }
        _ => {
            let m: Vec<Vec<f64>> = (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() })
                        .collect()
                })
                .collect();
            if m.iter().flatten().all(|x| *x == 0.0) {
                return random_joint(rng, rows, cols);
            }
            normalise(m)
        }
    }
}

fn normalise(mut m: Vec<Vec<f64>>) -> JointPartitionDistribution {
    let s: f64 = m.iter().flatten().sum();
    m.iter_mut().flatten().for_each(|x| *x /= s);
    // put the rounding residue on the largest entry so the total is 1
    let s: f64 = m.iter().flatten().sum();
    let big = m.iter_mut().flatten().max_by(|a, b| a.total_cmp(b)).unwrap();
    *big += 1.0 - s;
    JointPartitionDistribution::new(m).expect("normalised")
}

/// Random real matrix with occasional large entries and exact zeros.
pub fn random_h<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| match rng.random_range(0..10) {
                    0 => 0.0,
                    1 => rng.random_range(-100.0..100.0),
                    _ => rng.random_range(-2.0..2.0),
                })
                .collect()
        })
        .collect()
}
