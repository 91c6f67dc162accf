//! Load a CSV with missing cells, derive a column, filter rows and
//! materialize a standardized matrix.

use linked_eda::data::{
    apply_filter, engineer_feature, materialize, parse_filter, print_filter, CsvOptions, Dataset,
};
use linked_eda::stats::{outlier_flags, summarize, DEFAULT_BINS};

const CSV: &str = "\
patient,steps,sleep,weight,height,site
p01,8200,7.1,71.5,1.78,north
p02,4100,,88.0,1.70,south
p03,12050,6.4,64.2,1.81,north
p04,NA,8.0,92.3,1.65,east
p05,3900,5.2,101.0,1.74,south
p06,9800,7.7,58.9,1.62,east
p07,15000,6.9,77.0,1.90,north
p08,2500,9.5,,1.68,south
";

fn main() -> linked_eda::Result<()> {
    let dataset = Dataset::from_csv_bytes("patients", CSV.as_bytes(), &CsvOptions::default())?;
    println!("{} rows x {} columns", dataset.n_rows(), dataset.n_cols());
    for column in dataset.columns() {
        println!("  {:<8} {:?}", column.name(), column.kind());
    }

    let engineered = engineer_feature(&dataset, "bmi", "weight / (height * height)")?;
    let dataset = engineered.dataset;
    println!(
        "derived bmi ({} non-finite results dropped)",
        engineered.warnings
    );

    let filter = parse_filter(
        "site != \"south\" and (bmi < 25 or steps >= 10000)",
        &dataset,
    )?;
    let all = (0..dataset.n_rows()).collect();
    let kept = apply_filter(&dataset, &all, &filter)?;
    println!("filter `{}` keeps rows {:?}", print_filter(&filter), kept);

    let features = dataset.numeric_columns();
    let matrix = materialize(&dataset, &all, &features, true)?;
    for s in summarize(&matrix, DEFAULT_BINS)? {
        println!(
            "  {:<7} mean {:>9.2} std {:>8.2} median {:>8.2}",
            s.name, s.mean, s.std, s.median
        );
    }
    let outliers = outlier_flags(&matrix);
    println!("flagged cells per row: {:?}", outliers.row_scores);
    Ok(())
}
