//! Prototype-level, class-level and fused posteriors for the same queries.

use exll::synthetic::{gaussian_blobs, BlobConfig};
use exll::io::Split;
use exll::{Exll, InferenceMode};

fn main() -> exll::Result<()> {
    let data = gaussian_blobs(&BlobConfig { classes: 6, dim: 20, within_std: 0.06, seed: 2, ..Default::default() })?;
    let mut model = Exll::default();
    for i in data.indices(Split::Train) {
        model.train_sample(&data.feature_vector(i))?;
    }
    model.prepare()?;

    let test = data.indices(Split::Test);
    for mode in [InferenceMode::Prinf, InferenceMode::Mcinf, InferenceMode::Fuse] {
        let mut correct = 0;
        for &i in &test {
            let x = data.feature_vector(i).normalized()?;
            if model.predict(&x, mode)?.predicted == data.class_of(i) {
                correct += 1;
            }
        }
        println!("{:6} accuracy {:.4}", mode.name(), correct as f64 / test.len() as f64);
    }

    let x = data.feature_vector(test[0]).normalized()?;
    let p = model.fuse(&x)?;
    println!("first query: predicted {} with p = {:.3}", p.predicted, p.max_probability());
    println!("fusion tensor: {} nonzero entries over {} samples", model.fusion().nonzero_count(), model.fusion().total());
    Ok(())
}
