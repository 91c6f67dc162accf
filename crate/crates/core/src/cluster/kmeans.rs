use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::MaterializedMatrix;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    /// Raw (not canonicalized) labels.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each update step; never increases.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, lowest index on ties.
fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(row, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(matrix: &MaterializedMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = matrix.n_rows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(matrix.row(i), matrix.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave the target just past the final sum
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(matrix.row(i), matrix.row(next)));
        }
    }
    chosen.iter().map(|&i| matrix.row(i).to_vec()).collect()
}

fn update_centroids(matrix: &MaterializedMatrix, labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let f = matrix.n_cols();
    let mut sums = vec![vec![0.0; f]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(matrix.row(i)) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= c as f64);
    }
    sums
}

/// Gives every empty cluster the point farthest from its own centroid,
/// taken from a cluster with more than one member.
fn repair_empty(
    matrix: &MaterializedMatrix,
    labels: &mut [usize],
    centroids: &[Vec<f64>],
    k: usize,
) {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    let mut taken = vec![false; labels.len()];
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, &l) in labels.iter().enumerate() {
            if counts[l] < 2 || taken[i] {
                continue;
            }
            let d = sq_dist(matrix.row(i), &centroids[l]);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.expect("k <= n guarantees a donor cluster");
        counts[labels[i]] -= 1;
        labels[i] = c;
        counts[c] = 1;
        taken[i] = true;
    }
}

fn inertia(matrix: &MaterializedMatrix, labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(matrix.row(i), &centroids[l]))
        .sum()
}

/// Lloyd's algorithm from k-means++ seeds drawn with `seed`, run to an
/// assignment fixpoint or [`MAX_ITERATIONS`].
pub fn kmeans(matrix: &MaterializedMatrix, k: usize, seed: u64) -> Result<KMeansFit> {
    let n = matrix.n_rows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "k = {k} is out of range for {n} rows"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(matrix, k, &mut rng);
    let mut labels: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let mut next: Vec<usize> = (0..n)
            .map(|i| nearest(matrix.row(i), &centroids).0)
            .collect();
        repair_empty(matrix, &mut next, &centroids, k);
        if next == labels {
            break;
        }
        labels = next;
        iterations += 1;
        centroids = update_centroids(matrix, &labels, k);
        let current = inertia(matrix, &labels, &centroids);
        if let Some(&prev) = history.last() {
            let slack = 1e-9 * f64::max(prev, 1.0);
            assert!(
                current <= prev + slack,
                "k-means inertia increased: {prev} -> {current}"
            );
        }
        history.push(current);
    }
    Ok(KMeansFit {
        inertia: *history.last().unwrap_or(&0.0),
        labels,
        centroids,
        iterations,
        inertia_history: history,
    })
}
