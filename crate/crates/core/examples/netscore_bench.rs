//! Accuracy, parameter count and runtime folded into a single score.

use exll::harness::{netscore, reports_to_csv, run_experiment, ExperimentConfig, LearnerKind, OrderingKind};
use exll::synthetic::{gaussian_blobs, BlobConfig};

fn main() -> exll::Result<()> {
    println!("netscore(0.9, 1e6, 1.0) = {:.3}", netscore(0.9, 1e6, 1.0)?);
    println!("netscore(0.9, 1e3, 1.0) = {:.3}", netscore(0.9, 1e3, 1.0)?);

    let data = gaussian_blobs(&BlobConfig { classes: 8, dim: 32, seed: 3, within_std: 0.06, ..Default::default() })?;
    let mut rows = Vec::new();
    for learner in [LearnerKind::ExllFuse, LearnerKind::Slda, LearnerKind::Ncm] {
        let cfg = ExperimentConfig { learner, ordering: OrderingKind::ClassIid, permutations: 3, jobs: 3, ..Default::default() };
        rows.push(run_experiment(&data, &cfg)?.average);
    }
    print!("{}", reports_to_csv(&rows));
    Ok(())
}
