//! Binarize a mixed-type CSV table, train an LR on it, and reuse the fitted
//! statistics on new rows.

use nacl::ingest::{apply_stats, binarize, dataset_to_string, IngestSchema, RawTable};
use nacl::{train_lr, TrainOptions};

const TRAIN: &str = "\
income,region,owner,default
32000,north,1,no
54000,south,0,no
21000,south,0,yes
75000,east,1,no
18000,north,0,yes
43000,east,1,no
26000,south,1,yes
61000,north,0,no
";

const NEW_ROWS: &str = "\
income,region,owner
29000,east,0
88000,west,1
";

fn main() -> nacl::Result<()> {
    let schema = IngestSchema::from_json(
        r#"{"label": "default", "columns": [
            {"name": "income", "kind": "continuous"},
            {"name": "region", "kind": "categorical"},
            {"name": "owner", "kind": "binary"}]}"#,
    )?;
    let (data, stats) = binarize(&RawTable::from_reader(TRAIN.as_bytes())?, &schema)?;
    println!("features: {:?}", stats.feature_names());
    println!("classes: {:?}", stats.classes);
    print!("{}", dataset_to_string(&data));

    let lr = train_lr(&data, &TrainOptions::default())?;
    let fresh = apply_stats(&RawTable::from_reader(NEW_ROWS.as_bytes())?, &stats)?;
    for x in fresh.rows() {
        println!("{x:?} -> P({}) = {:.3}", stats.classes[1], lr.predict(x)?[1]);
    }
    Ok(())
}
