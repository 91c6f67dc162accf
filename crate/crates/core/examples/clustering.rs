//! k-means and agglomerative clustering with a silhouette sweep and a
//! per-cluster profile.

use linked_eda::cluster::{cluster, cluster_with_sweep, ClusteringParams, Linkage};
use linked_eda::data::MaterializedMatrix;
use linked_eda::metric::Metric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn blobs(centers: &[[f64; 3]], per: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    centers
        .iter()
        .flat_map(|c| {
            (0..per)
                .map(|_| {
                    c.iter()
                        .map(|v| v + rng.random_range(-1.0..1.0))
                        .collect::<Vec<f64>>()
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn main() -> linked_eda::Result<()> {
    let rows = blobs(
        &[
            [0.0, 0.0, 0.0],
            [6.0, 0.0, 2.0],
            [0.0, 7.0, -3.0],
            [6.0, 6.0, 6.0],
        ],
        40,
        11,
    );
    let matrix = MaterializedMatrix::from_rows(&rows, true)?;

    let kmeans = cluster_with_sweep(&matrix, &ClusteringParams::kmeans(3, 1), None)?;
    println!("silhouette by k:");
    for (k, s) in &kmeans.silhouette_by_k {
        println!(
            "  k={k:<2} {s:.3} {}",
            "#".repeat((s.max(0.0) * 40.0) as usize)
        );
    }
    let best = kmeans
        .silhouette_by_k
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(k, _)| k)
        .unwrap();
    println!("best k = {best}");

    let fit = cluster(&matrix, &ClusteringParams::kmeans(best, 1))?;
    println!(
        "k-means: sizes {:?}, inertia {:.2}, {} iterations, silhouette {:.3}",
        fit.cluster_sizes,
        fit.inertia.unwrap_or(f64::NAN),
        fit.iterations.unwrap_or(0),
        fit.silhouette.mean
    );

    let agg = cluster(
        &matrix,
        &ClusteringParams::agglomerative(best, Metric::Manhattan, Linkage::Complete),
    )?;
    let agree = fit
        .labels
        .iter()
        .zip(&agg.labels)
        .filter(|(a, b)| a == b)
        .count();
    println!(
        "agglomerative (manhattan, complete): sizes {:?}, {agree}/{} labels agree",
        agg.cluster_sizes,
        rows.len()
    );

    println!("profile (min-max scaled cluster means):");
    for (name, row) in fit
        .profile
        .feature_names
        .iter()
        .zip(&fit.profile.normalized)
    {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
        println!("  {name:<4} {}", cells.join("  "));
    }
    Ok(())
}
