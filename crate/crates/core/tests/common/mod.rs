//! Independent reference implementations and random generators shared by
//! the integration tests. Nothing here calls into the engine's numerics.

#![allow(dead_code)]

use std::collections::BTreeSet;

use linked_eda::cluster::ClusterAlgorithm;
use linked_eda::command::Command;
use linked_eda::data::{Cell, CmpOp, Dataset, FilterExpr, Literal, Predicate};
use linked_eda::metric::Metric;
use linked_eda::reduce::ProjectionAlgorithm;
use linked_eda::session::ViewKind;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Direct O(n²) silhouette: singletons score 0.
pub fn brute_silhouette(points: &[Vec<f64>], labels: &[usize]) -> Vec<f64> {
    let n = points.len();
    let clusters: BTreeSet<usize> = labels.iter().copied().collect();
    (0..n)
        .map(|i| {
            let own = labels[i];
            let size = labels.iter().filter(|&&l| l == own).count();
            if size == 1 {
                return 0.0;
            }
            let mean_to = |c: usize| {
                let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c && j != i).collect();
                members
                    .iter()
                    .map(|&j| euclid(&points[i], &points[j]))
                    .sum::<f64>()
                    / members.len() as f64
            };
            let a = mean_to(own);
            let b = clusters
                .iter()
                .filter(|&&c| c != own)
                .map(|&c| mean_to(c))
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect()
}

fn sse(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = points[0].len();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&Vec<f64>> = points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(p, _)| p)
            .collect();
        let centroid: Vec<f64> = (0..d)
            .map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64)
            .collect();
        total += members
            .iter()
            .map(|p| euclid(p, &centroid).powi(2))
            .sum::<f64>();
    }
    total
}

/// Minimum within-cluster sum of squares over every partition into exactly
/// `k` non-empty clusters.
pub fn exhaustive_kmeans_optimum(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let used: BTreeSet<usize> = labels.iter().copied().collect();
        if used.len() == k {
            best = best.min(sse(points, &labels, k));
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Upper tail of the F(d1, d2) distribution: the beta integral is taken
/// over u = √t so that half-integer shapes stay smooth at 0.
pub fn f_sf_oracle(x: f64, d1: f64, d2: f64) -> f64 {
    let (a, b) = (d1 / 2.0, d2 / 2.0);
    let g = move |u: f64| 2.0 * u.powf(2.0 * a - 1.0) * (1.0 - u * u).max(0.0).powf(b - 1.0);
    let t = d1 * x / (d1 * x + d2);
    let total = integrate(&g, 0.0, 1.0, 1e-14);
    integrate(&g, t.sqrt(), 1.0, 1e-14) / total
}

/// Γ at positive integers and half-integers.
fn gamma_half_integer(x: f64) -> f64 {
    if (x - 0.5).abs() < 1e-12 {
        std::f64::consts::PI.sqrt()
    } else if (x - 1.0).abs() < 1e-12 {
        1.0
    } else {
        (x - 1.0) * gamma_half_integer(x - 1.0)
    }
}

/// Upper tail of χ²(ν), ν a positive integer, from the CDF integral over
/// u = √t with the closed-form normalizer 2^(ν/2)·Γ(ν/2).
pub fn chi2_sf_oracle(x: f64, nu: f64) -> f64 {
    let g = move |u: f64| 2.0 * u.powf(nu - 1.0) * (-u * u / 2.0).exp();
    let norm = 2f64.powf(nu / 2.0) * gamma_half_integer(nu / 2.0);
    1.0 - integrate(&g, 0.0, x.sqrt(), 1e-14) / norm
}

fn eval_pred(ds: &Dataset, row: usize, p: &Predicate) -> bool {
    let col = ds.column_index(&p.column).expect("known column");
    match (ds.cell(row, col), &p.value) {
        (Cell::Missing, _) => false,
        (Cell::Number(v), Literal::Number(t)) => match p.op {
            CmpOp::Eq => v == *t,
            CmpOp::Ne => v != *t,
            CmpOp::Lt => v < *t,
            CmpOp::Le => v <= *t,
            CmpOp::Gt => v > *t,
            CmpOp::Ge => v >= *t,
        },
        (Cell::Text(s), Literal::Text(t)) => match p.op {
            CmpOp::Eq => s == t,
            CmpOp::Ne => s != t,
            _ => unreachable!("ordering on text"),
        },
        _ => unreachable!("type mismatch"),
    }
}

pub fn brute_filter_row(ds: &Dataset, row: usize, e: &FilterExpr) -> bool {
    match e {
        FilterExpr::Pred(p) => eval_pred(ds, row, p),
        FilterExpr::And(cs) => cs.iter().all(|c| brute_filter_row(ds, row, c)),
        FilterExpr::Or(cs) => cs.iter().any(|c| brute_filter_row(ds, row, c)),
    }
}

pub fn brute_filter(ds: &Dataset, e: &FilterExpr) -> BTreeSet<usize> {
    (0..ds.n_rows())
        .filter(|&r| brute_filter_row(ds, r, e))
        .collect()
}

/// CSV with three numeric columns (values on a 0.5 grid, some missing) and
/// two categorical ones; one column name needs quoting.
pub fn filter_fixture(seed: u64, rows: usize) -> Dataset {
    let mut r = rng(seed);
    let mut csv = String::from("a,b,odd name,color,size\n");
    for _ in 0..rows {
        let cell = |r: &mut ChaCha8Rng| {
            if r.random_bool(0.1) {
                String::new()
            } else {
                format!("{}", (r.random_range(-8..=8) as f64) * 0.5)
            }
        };
        let (a, b, c) = (cell(&mut r), cell(&mut r), cell(&mut r));
        let color = if r.random_bool(0.1) {
            ""
        } else {
            *["red", "green", "blue"].choose(&mut r).unwrap()
        };
        let size = if r.random_bool(0.1) {
            ""
        } else {
            *["s", "m", "l x"].choose(&mut r).unwrap()
        };
        csv.push_str(&format!("{a},{b},{c},{color},\"{size}\"\n"));
    }
    Dataset::from_csv_bytes("filters", csv.as_bytes(), &Default::default()).unwrap()
}

pub fn random_filter(r: &mut ChaCha8Rng, depth: u32) -> FilterExpr {
    if depth == 0 || r.random_bool(0.35) {
        if r.random_bool(0.7) {
            let column = *["a", "b", "odd name"].choose(r).unwrap();
            let op = *CmpOp::ALL.choose(r).unwrap();
            FilterExpr::pred(
                column,
                op,
                Literal::Number((r.random_range(-9..=9) as f64) * 0.5),
            )
        } else {
            let (column, values): (&str, &[&str]) = if r.random_bool(0.5) {
                ("color", &["red", "green", "blue", "mauve"])
            } else {
                ("size", &["s", "m", "l x"])
            };
            let op = if r.random_bool(0.5) {
                CmpOp::Eq
            } else {
                CmpOp::Ne
            };
            FilterExpr::pred(
                column,
                op,
                Literal::Text(values.choose(r).unwrap().to_string()),
            )
        }
    } else {
        let children = (0..r.random_range(2..=3))
            .map(|_| random_filter(r, depth - 1))
            .collect();
        if r.random_bool(0.5) {
            FilterExpr::And(children)
        } else {
            FilterExpr::Or(children)
        }
    }
}

fn random_name(r: &mut ChaCha8Rng) -> String {
    const PIECES: [&str; 14] = [
        "steps",
        "heart rate",
        "x",
        "Value",
        "a`b",
        "the",
        "été",
        "sleep_h",
        "by",
        "1st",
        "q,r",
        "  pad",
        "dot.",
        "view",
    ];
    let mut name = String::new();
    for _ in 0..r.random_range(1..=3) {
        if !name.is_empty() {
            name.push(if r.random_bool(0.8) { ' ' } else { '-' });
        }
        name.push_str(PIECES.choose(r).unwrap());
    }
    name
}

fn random_delta(r: &mut ChaCha8Rng) -> f64 {
    let magnitude = match r.random_range(0..4) {
        0 => r.random_range(0..100) as f64,
        1 => r.random_range(0.0..10.0),
        2 => r.random_range(0.0..1e-6),
        _ => r.random_range(0.0..1e12),
    };
    if r.random_bool(0.5) {
        -magnitude
    } else {
        magnitude
    }
}

fn random_slots(r: &mut ChaCha8Rng) -> Vec<usize> {
    (0..r.random_range(1..=4))
        .map(|_| r.random_range(1..=20))
        .collect()
}

pub fn random_command(r: &mut ChaCha8Rng) -> Command {
    let kind = *ViewKind::ALL.choose(r).unwrap();
    match r.random_range(0..7) {
        0 => Command::ShowView {
            kind,
            slots: random_slots(r),
        },
        1 => Command::LoadViewOnScreens {
            kind,
            slots: random_slots(r),
        },
        2 => Command::ExtendView {
            kind,
            screens: r.random_range(1..=15),
        },
        3 => Command::ApplyClustering {
            algorithm: *ClusterAlgorithm::ALL.choose(r).unwrap(),
            k: r.random_range(1..=50),
            solution: r.random_range(0..100),
        },
        4 => Command::ApplyProjection {
            algorithm: if r.random_bool(0.5) {
                ProjectionAlgorithm::Pca
            } else {
                ProjectionAlgorithm::Cmds
            },
            dims: r.random_range(1..=5),
            metric: if r.random_bool(0.5) {
                Some(*Metric::ALL.choose(r).unwrap())
            } else {
                None
            },
            solution: r.random_range(0..100),
        },
        5 => Command::ForwardPerturb {
            feature: random_name(r),
            delta: random_delta(r),
        },
        _ => {
            let mut filter = random_filter(r, 3);
            rename_columns(&mut filter, r);
            Command::FilterWhere {
                solution: r.random_range(0..100),
                filter,
            }
        }
    }
}

fn rename_columns(e: &mut FilterExpr, r: &mut ChaCha8Rng) {
    match e {
        FilterExpr::Pred(p) => {
            if r.random_bool(0.3) {
                p.column = random_name(r);
            }
        }
        FilterExpr::And(cs) | FilterExpr::Or(cs) => {
            cs.iter_mut().for_each(|c| rename_columns(c, r))
        }
    }
}

/// Two well separated blobs in four features, sixty rows.
pub fn session_fixture() -> Dataset {
    let rows: Vec<Vec<Option<f64>>> = (0..60)
        .map(|i| {
            let t = i as f64;
            let blob = (i % 3 == 0) as u8 as f64 * 6.0;
            vec![
                Some(blob + (t * 0.37).sin()),
                Some(blob + (t * 1.13).cos()),
                Some(t * 0.05 + (t * 0.71).sin() * 0.3),
                Some(((i * 7) % 11) as f64),
            ]
        })
        .collect();
    Dataset::from_numeric_rows(&["steps", "sleep", "age", "visits"], &rows).unwrap()
}
