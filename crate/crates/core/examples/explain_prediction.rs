//! Explain a prediction by the training samples behind it.

use exll::explain::{explain_prediction, extract_rules};
use exll::io::Split;
use exll::synthetic::{gaussian_blobs, BlobConfig};
use exll::Exll;

fn main() -> exll::Result<()> {
    let data = gaussian_blobs(&BlobConfig { classes: 3, dim: 10, train_per_class: 40, test_per_class: 5, within_std: 0.08, seed: 9, ..Default::default() })?;
    let mut model = Exll::default();
    for i in data.indices(Split::Train) {
        model.train_sample(&data.feature_vector(i))?;
    }

    let q = data.indices(Split::Test)[3];
    let sample = data.feature_vector(q);
    let e = explain_prediction(&model, &sample.sample_id, &sample.normalized()?)?;
    println!("{}", e.to_json());

    let rules = extract_rules(&model)?;
    println!("{} rules, e.g.", rules.rules.len());
    for r in rules.rules.iter().take(3) {
        println!("  {}", r.text);
    }
    Ok(())
}
