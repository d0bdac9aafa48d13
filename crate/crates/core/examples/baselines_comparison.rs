//! Every learner on the same stream, in both iid and class-blocked order.

use exll::harness::{run_experiment, ExperimentConfig, LearnerKind, OrderingKind};
use exll::synthetic::{gaussian_blobs, BlobConfig};

fn main() -> exll::Result<()> {
    let data = gaussian_blobs(&BlobConfig { within_std: 0.065, seed: 7, ..Default::default() })?;
    println!("{:10} {:>9} {:>9} {:>8}", "learner", "iid", "class_iid", "params");
    for learner in LearnerKind::ALL {
        let run = |ordering| {
            let cfg = ExperimentConfig { learner, ordering, permutations: 2, ..Default::default() };
            run_experiment(&data, &cfg).map(|r| r.average)
        };
        let (iid, blocked) = (run(OrderingKind::Iid)?, run(OrderingKind::ClassIid)?);
        println!("{:10} {:9.4} {:9.4} {:8}", learner.name(), iid.top1_accuracy, blocked.top1_accuracy, blocked.param_count);
    }
    Ok(())
}
