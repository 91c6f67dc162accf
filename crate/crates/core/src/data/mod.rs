//! Dataset ingestion, filtering, feature engineering and materialization.

pub mod dataset;
pub mod expr;
pub mod filter;
pub(crate) mod lexer;
pub mod matrix;

pub use dataset::{
    load_csv, Cell, Column, ColumnKind, ColumnMeta, CsvOptions, DataSource, Dataset, FeatureId,
    RowId,
};
pub use expr::{engineer_feature, Engineered};
pub use filter::{
    apply_filter, parse_filter, parse_filter_syntax, print_filter, CmpOp, FilterExpr, Literal,
    Predicate,
};
pub use matrix::{materialize, MaterializedMatrix};
