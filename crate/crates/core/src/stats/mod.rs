//! Descriptive statistics, outliers, correlations and significance tests.

pub mod correlation;
pub mod outliers;
pub mod significance;
pub mod special;
pub mod summary;

pub use correlation::{correlations, CorrelatedPair, CorrelationResult};
pub use outliers::{outlier_flags, outlier_flags_with, OutlierReport};
pub use significance::{significance, FeatureSignificance, SignificanceMethod, SignificanceResult};
pub use summary::{
    compare_distributions, summarize, DistributionComparison, FeatureSummary, Histogram,
    DEFAULT_BINS,
};
