//! Write and read the binary feature file and its manifest, as an exporter would.

use exll::io::{read_features, write_features, write_manifest, Dataset, FeatureMatrix, Manifest, SampleRecord, Split};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let features = FeatureMatrix::from_rows(3, &[vec![1.0, 0.0, 0.0], vec![0.9, 0.1, 0.0], vec![0.0, 1.0, 0.2], vec![0.1, 0.9, 0.0]])?;
    write_features(dir.path().join("feats.bin"), &features)?;
    let bytes = std::fs::read(dir.path().join("feats.bin"))?;
    println!("feature file: {} bytes, header {:02x?}", bytes.len(), &bytes[..23]);

    let record = |i: u64, label: &str, split| SampleRecord {
        sample_id: format!("{label}/{i}"),
        label: label.into(),
        row_index: i,
        instance_id: None,
        session_id: None,
        split,
    };
    let manifest = Manifest {
        dataset: "toy".into(),
        feature_files: vec!["feats.bin".into()],
        backbone: Some("resnet18".into()),
        layer: Some("avgpool".into()),
        samples: vec![record(0, "mug", Split::Train), record(1, "mug", Split::Test), record(2, "cup", Split::Train), record(3, "cup", Split::Test)],
    };
    let path = dir.path().join("manifest.json");
    write_manifest(&path, &manifest)?;

    let data = Dataset::load(&path, None)?;
    println!("classes {:?}, dim {}, {} samples", data.class_names(), data.dim(), data.len());
    println!("row 2 read back: {:?}", read_features(dir.path().join("feats.bin"))?.row(2));
    Ok(())
}
