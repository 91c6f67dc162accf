//! PCA with projected axes, forward and backward what-if projection, and
//! classical MDS under a non-euclidean metric.

use linked_eda::data::MaterializedMatrix;
use linked_eda::metric::Metric;
use linked_eda::reduce::{
    backward_project, forward_project, project, prolines, ProjectionParams, DEFAULT_PROLINE_STEPS,
};
use linked_eda::stats::{summarize, DEFAULT_BINS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> linked_eda::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..120)
        .map(|_| {
            let activity: f64 = rng.random_range(0.0..10.0);
            let noise = |r: &mut ChaCha8Rng| r.random_range(-0.5..0.5);
            vec![
                1000.0 * activity + 300.0 * noise(&mut rng),
                8.0 - 0.2 * activity + noise(&mut rng),
                30.0 + 2.0 * activity + noise(&mut rng),
                rng.random_range(18.0..80.0),
            ]
        })
        .collect();
    let mut matrix = MaterializedMatrix::from_rows(&rows, true)?;
    matrix.feature_names = ["steps", "sleep", "vo2", "age"].map(String::from).to_vec();

    let pca = project(&matrix, &ProjectionParams::pca(2))?;
    println!("explained variance {:.3?}", pca.explained_variance_ratio);
    for axis in prolines(
        &pca,
        &summarize(&matrix, DEFAULT_BINS)?,
        DEFAULT_PROLINE_STEPS,
    )? {
        let (a, b) = (&axis.polyline[0], axis.polyline.last().unwrap());
        println!(
            "  {:<5} from ({:+.2}, {:+.2}) to ({:+.2}, {:+.2}), median tick at {:.2}",
            axis.name, a[0], a[1], b[0], b[1], axis.tick_positions[2]
        );
    }

    let point = matrix.raw_row(0).to_vec();
    let forward = forward_project(&pca, &point, &[(0, 2000.0)])?;
    println!(
        "+2000 steps moves row 0 from {:.2?} to {:.2?}",
        forward.from, forward.to
    );

    let target = vec![forward.from[0] + 1.0, forward.from[1]];
    let backward = backward_project(&pca, &point, &target, &[1])?;
    println!(
        "to reach {:.2?} with sleep frozen: delta {:.2?}, residual {:.1e}, feasible {}",
        target, backward.delta, backward.residual, backward.feasible
    );

    let cmds = project(&matrix, &ProjectionParams::cmds(2, Metric::Manhattan))?;
    println!(
        "cmds (manhattan): eigenvalues {:.2?}, negative eigenvalues clamped: {}",
        cmds.eigenvalues.unwrap_or_default(),
        cmds.negative_eigenvalues_clamped
    );
    Ok(())
}
