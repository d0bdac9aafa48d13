//! The stream orderings used for evaluation.

use exll::harness::{make_ordering, Ordering, OrderingKind};
use exll::synthetic::{gaussian_blobs, BlobConfig};

fn main() -> exll::Result<()> {
    let data = gaussian_blobs(&BlobConfig { classes: 3, dim: 4, train_per_class: 6, test_per_class: 1, instances_per_class: 2, seed: 1, ..Default::default() })?;
    let m = data.manifest();
    let kinds = [OrderingKind::Iid, OrderingKind::ClassIid, OrderingKind::Instance, OrderingKind::LowShotInstance];
    for kind in kinds {
        let plan = make_ordering(m, &Ordering::new(kind, 5))?;
        let ids: Vec<&str> = plan.indices.iter().map(|&i| m.samples[i].sample_id.as_str()).collect();
        println!("{kind}: {}", ids.join(" "));
        if !plan.selected_instances.is_empty() {
            println!("  kept instances {:?}", plan.selected_instances);
        }
    }
    let plan = make_ordering(m, &Ordering::k_shot(2, 5))?;
    println!("2-shot: {} samples", plan.indices.len());
    Ok(())
}
