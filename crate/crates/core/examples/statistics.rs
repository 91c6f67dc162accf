//! Cluster-wise significance tests, correlations and every feature ranking.

use linked_eda::cluster::{cluster, ClusteringParams};
use linked_eda::data::MaterializedMatrix;
use linked_eda::select::{rank_features, RankOptions, RankingMethod};
use linked_eda::stats::{correlations, significance, SignificanceMethod};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NAMES: [&str; 6] = ["steps", "sleep", "vo2", "age", "visits", "noise"];

fn main() -> linked_eda::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rows: Vec<Vec<f64>> = (0..150)
        .map(|i| {
            let group = (i % 3) as f64;
            let activity = 6.0 * group + rng.random_range(-1.0..1.0);
            vec![
                activity * 1500.0 + rng.random_range(-400.0..400.0),
                7.0 + rng.random_range(-1.0..1.0),
                25.0 + 4.0 * activity + rng.random_range(-2.0..2.0),
                rng.random_range(20.0..70.0),
                (group * 2.0 + rng.random_range(0.0..3.0)).round(),
                rng.random_range(-1.0..1.0),
            ]
        })
        .collect();
    let mut matrix = MaterializedMatrix::from_rows(&rows, true)?;
    matrix.feature_names = NAMES.map(String::from).to_vec();
    // one k-means++ run per seed; keep the tightest
    let mut fits = (0..5)
        .map(|seed| cluster(&matrix, &ClusteringParams::kmeans(3, seed)))
        .collect::<linked_eda::Result<Vec<_>>>()?;
    fits.sort_by(|a, b| {
        a.inertia
            .unwrap_or(f64::INFINITY)
            .total_cmp(&b.inertia.unwrap_or(f64::INFINITY))
    });
    let labels = fits.swap_remove(0).labels;

    for method in [SignificanceMethod::Anova, SignificanceMethod::Chi2] {
        println!("{method} across {} clusters:", 3);
        for f in significance(&matrix, &labels, method)?.features {
            println!(
                "  {:<6} stat {:>9.2}  p {:.2e}  effect {:.3}{}",
                NAMES[f.feature_id],
                f.statistic,
                f.p_value,
                f.effect_size,
                if f.degenerate { "  (degenerate)" } else { "" }
            );
        }
    }

    let corr = correlations(&matrix, 3)?;
    println!("strongest correlations:");
    for pair in &corr.top_pairs {
        println!(
            "  {} ~ {}: r = {:+.3}",
            NAMES[pair.feature_a], NAMES[pair.feature_b], pair.r
        );
    }

    for method in RankingMethod::ALL {
        let supervised = matches!(method, RankingMethod::Anova | RankingMethod::Chi2);
        let ranking = rank_features(
            &matrix,
            method,
            supervised.then_some(labels.as_slice()),
            RankOptions::default(),
        )?;
        let top: Vec<&str> = ranking
            .entries
            .iter()
            .take(ranking.top_n)
            .map(|e| e.name.as_str())
            .collect();
        println!("{method:?} ranking keeps {top:?}");
    }
    Ok(())
}
