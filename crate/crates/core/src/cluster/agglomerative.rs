//! Bottom-up merging with Lance-Williams distance updates.
//!
//! Clusters live in slots `0..n`; merging `i < j` keeps slot `i`. A
//! per-slot nearest-neighbour cache (`nn[i]` = closest slot `> i`) makes the
//! global minimum a scan over `n` entries. Ties go to the smallest `(i, j)`.

use serde::{Deserialize, Serialize};

use super::Linkage;
use crate::data::MaterializedMatrix;
use crate::error::{Error, Result};
use crate::metric::Metric;

/// The condensed distance matrix needs `n(n-1)/2` floats.
pub const MAX_AGGLOMERATIVE_ROWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Surviving slot.
    pub keep: usize,
    /// Slot absorbed into `keep`.
    pub absorb: usize,
    pub distance: f64,
}

struct Condensed {
    n: usize,
    d: Vec<f64>,
}

impl Condensed {
    fn idx(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a * self.n - a * (a + 1) / 2 + (b - a - 1)
    }
    fn get(&self, i: usize, j: usize) -> f64 {
        self.d[self.idx(i, j)]
    }
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.d[k] = v;
    }
}

/// Full merge sequence (`n - 1` merges) over the rows of `matrix`.
pub fn dendrogram(
    matrix: &MaterializedMatrix,
    metric: Metric,
    linkage: Linkage,
) -> Result<Vec<Merge>> {
    let n = matrix.n_rows();
    if n > MAX_AGGLOMERATIVE_ROWS {
        return Err(Error::invalid(format!(
            "agglomerative clustering is limited to {MAX_AGGLOMERATIVE_ROWS} rows, got {n}; use kmeans or a subset"
        )));
    }
    metric.check_rows((0..n).map(|i| matrix.row(i)))?;
    let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push(metric.distance(matrix.row(i), matrix.row(j)));
        }
    }
    Ok(merge_condensed(n, d, linkage))
}

/// Merge sequence from a condensed upper-triangle distance list
/// (`(0,1), (0,2), .., (1,2), ..`).
#[allow(clippy::needless_range_loop)]
pub(crate) fn merge_condensed(n: usize, d: Vec<f64>, linkage: Linkage) -> Vec<Merge> {
    debug_assert_eq!(d.len(), n * n.saturating_sub(1) / 2);
    let mut dist = Condensed { n, d };

    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut nn = vec![usize::MAX; n];
    let mut nd = vec![f64::INFINITY; n];
    let refresh =
        |i: usize, active: &[bool], dist: &Condensed, nn: &mut [usize], nd: &mut [f64]| {
            nn[i] = usize::MAX;
            nd[i] = f64::INFINITY;
            for j in i + 1..n {
                if active[j] {
                    let d = dist.get(i, j);
                    if d < nd[i] {
                        nn[i] = j;
                        nd[i] = d;
                    }
                }
            }
        };
    for i in 0..n {
        refresh(i, &active, &dist, &mut nn, &mut nd);
    }

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut i = usize::MAX;
        for s in 0..n {
            if active[s] && nn[s] != usize::MAX && (i == usize::MAX || nd[s] < nd[i]) {
                i = s;
            }
        }
        let j = nn[i];
        merges.push(Merge {
            keep: i,
            absorb: j,
            distance: nd[i],
        });
        active[j] = false;
        let (si, sj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if !active[k] || k == i {
                continue;
            }
            let (dki, dkj) = (dist.get(k, i), dist.get(k, j));
            let merged = match linkage {
                Linkage::Single => dki.min(dkj),
                Linkage::Complete => dki.max(dkj),
                Linkage::Average => (si * dki + sj * dkj) / (si + sj),
            };
            dist.set(k, i, merged);
        }
        size[i] += size[j];
        refresh(i, &active, &dist, &mut nn, &mut nd);
        for k in 0..i {
            if !active[k] {
                continue;
            }
            if nn[k] == i || nn[k] == j {
                refresh(k, &active, &dist, &mut nn, &mut nd);
            } else {
                let d = dist.get(k, i);
                if d < nd[k] || (d == nd[k] && i < nn[k]) {
                    nn[k] = i;
                    nd[k] = d;
                }
            }
        }
        for k in i + 1..j {
            if active[k] && nn[k] == j {
                refresh(k, &active, &dist, &mut nn, &mut nd);
            }
        }
    }
    merges
}

/// Labels after applying the first `n - k` merges, numbered by slot order.
pub fn cut_dendrogram(n: usize, merges: &[Merge], k: usize) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    for m in merges.iter().take(n.saturating_sub(k)) {
        parent[m.absorb] = m.keep;
    }
    fn root(parent: &[usize], mut i: usize) -> usize {
        while parent[i] != i {
            i = parent[i];
        }
        i
    }
    let roots: Vec<usize> = (0..n).map(|i| root(&parent, i)).collect();
    super::canonical_labels(&roots)
}
