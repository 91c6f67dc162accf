//! Row-to-row distance metrics shared by clustering and projection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    /// `1 - cos(a, b)`.
    Cosine,
    /// `1 - pearson(a, b)` across the coordinates of the two rows.
    Correlation,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Euclidean,
        Metric::Manhattan,
        Metric::Cosine,
        Metric::Correlation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Cosine => "cosine",
            Metric::Correlation => "correlation",
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Cosine => {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                (1.0 - dot / (na * nb)).max(0.0)
            }
            Metric::Correlation => {
                let n = a.len() as f64;
                let ma = a.iter().sum::<f64>() / n;
                let mb = b.iter().sum::<f64>() / n;
                let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    sab += (x - ma) * (y - mb);
                    saa += (x - ma) * (x - ma);
                    sbb += (y - mb) * (y - mb);
                }
                (1.0 - (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)).max(0.0)
            }
        }
    }

    /// Rejects rows on which the metric is undefined: zero vectors for
    /// cosine, constant rows (or fewer than two coordinates) for correlation.
    pub fn check_rows<'a>(self, rows: impl Iterator<Item = &'a [f64]>) -> Result<()> {
        for (i, row) in rows.enumerate() {
            match self {
                Metric::Cosine if row.iter().all(|&v| v == 0.0) => {
                    return Err(Error::Degenerate(format!(
                        "row {i} is a zero vector under the cosine metric"
                    )));
                }
                Metric::Correlation if row.len() < 2 || row.iter().all(|&v| v == row[0]) => {
                    return Err(Error::Degenerate(format!(
                        "row {i} has zero variance under the correlation metric"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown metric '{s}'")))
    }
}
