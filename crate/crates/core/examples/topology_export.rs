//! Export the prototype graph and write a snapshot.

use exll::explain::export_topology;
use exll::io::{load_model, save_model, Split};
use exll::synthetic::{gaussian_blobs, BlobConfig};
use exll::Exll;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = gaussian_blobs(&BlobConfig { classes: 4, dim: 8, train_per_class: 60, test_per_class: 1, within_std: 0.1, seed: 4, ..Default::default() })?;
    let mut model = Exll::default();
    for i in data.indices(Split::Train) {
        model.train_sample(&data.feature_vector(i))?;
    }

    let topo = export_topology(&model)?;
    println!("{} nodes, {} edges", topo.node_count(), topo.edge_count());
    for c in &topo.classes {
        println!("class {}: {} samples on {} prototypes", c.class_id, c.sample_count, c.nodes.len());
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.json");
    save_model(&path, &model)?;
    let back = load_model(&path)?;
    println!("snapshot {} bytes, reloads with {} prototypes", std::fs::metadata(&path)?.len(), back.prototype_count());
    Ok(())
}
