//! Loading a CSV with mixed column types and turning it into a numeric matrix.

use nystrompca::pipeline::{read_csv, OrdinalMap};
use nystrompca::{preprocess, train_test_split, LoadOptions, PreprocessOptions};

const TEXT: &str = "\
date,grade,city,rooms,price
2023-01-04,low,oslo,3,210
2023-01-09,high,bergen,2,180
2023-02-11,mid,oslo,4,320
2023-02-17,mid,tromso,1,95
2023-03-02,high,oslo,5,410
2023-03-21,low,bergen,2,150
";

fn main() -> nystrompca::Result<()> {
    let mut ordinals = OrdinalMap::new();
    ordinals.insert("grade".into(), vec!["low".into(), "mid".into(), "high".into()]);
    let opts = LoadOptions { target: Some("price".into()), ordinals, ..Default::default() };
    let ds = read_csv(TEXT.as_bytes(), &opts)?;
    for c in ds.columns() {
        println!("column {:<6} {:?}", c.name, c.kind);
    }

    let (tr, te) = train_test_split(ds.nrows(), 0.33, 5)?;
    let (xtr, xte, report) = preprocess(&ds.select_rows(&tr)?, &ds.select_rows(&te)?, PreprocessOptions::default())?;
    println!("dropped: {:?}", report.dropped_columns);
    println!("features: {:?}", report.feature_names);
    println!("train {} x {}, test {} x {}", xtr.nrows(), xtr.ncols(), xte.nrows(), xte.ncols());
    println!("first test row: {:?}", xte.row(0).iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());
    Ok(())
}
