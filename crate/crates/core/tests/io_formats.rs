//! The on-disk contract with the feature exporter, exercised with files
//! assembled byte by byte rather than through the crate's own writers.

use std::path::Path;

use exll::io::{read_features, read_manifest, Dataset, Split};
use exll::Error;

fn feature_file(dim: u32, rows: &[&[f32]]) -> Vec<u8> {
    let mut b = b"EXLLFEAT".to_vec();
    b.extend(1u16.to_le_bytes());
    b.extend(dim.to_le_bytes());
    b.extend((rows.len() as u64).to_le_bytes());
    b.push(0);
    for r in rows {
        for v in *r {
            b.extend(v.to_le_bytes());
        }
    }
    b
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, bytes).unwrap();
    p
}

const MANIFEST: &str = r#"{
  "dataset": "toy",
  "feature_files": ["part0.bin", "part1.bin"],
  "backbone": "mobilenet_v3_small",
  "layer": "classifier.0",
  "samples": [
    {"sample_id": "mug/0", "label": "mug", "row_index": 0, "instance_id": "mug-a", "session_id": "s1", "split": "train"},
    {"sample_id": "cup/0", "label": "cup", "row_index": 1, "instance_id": "cup-a", "split": "train"},
    {"sample_id": "mug/1", "label": "mug", "row_index": 2, "split": "test"},
    {"sample_id": "cup/1", "label": "cup", "row_index": 3, "split": "test"}
  ]
}"#;

#[test]
fn exporter_files_load_as_a_dataset() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "part0.bin", &feature_file(3, &[&[3.0, 0.0, 4.0], &[0.0, 1.0, 0.0]]));
    write(dir.path(), "part1.bin", &feature_file(3, &[&[1.5, 0.0, 2.0], &[0.0, -2.0, 0.5]]));
    let m = write(dir.path(), "manifest.json", MANIFEST.as_bytes());

    let data = Dataset::load(&m, None).unwrap();
    assert_eq!(data.len(), 4);
    assert_eq!(data.dim(), 3);
    assert_eq!(data.class_names(), ["cup", "mug"]);
    assert_eq!(data.class_of(0), 1);
    assert_eq!(data.indices(Split::Test), vec![2, 3]);
    let fv = data.feature_vector(2);
    assert_eq!(fv.values, vec![1.5, 0.0, 2.0]);
    assert_eq!(fv.label, Some(1));
    assert_eq!(data.manifest().layer.as_deref(), Some("classifier.0"));
    assert_eq!(data.manifest().samples[0].session_id.as_deref(), Some("s1"));

    // An explicit feature file replaces the manifest's list.
    let all = write(dir.path(), "all.bin", &feature_file(3, &[&[1.0; 3], &[2.0; 3], &[3.0; 3], &[4.0; 3]]));
    let data = Dataset::load(&m, Some(&all)).unwrap();
    assert_eq!(data.feature_vector(3).values, vec![4.0; 3]);
}

#[test]
fn raw_values_survive_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let odd = [f32::MIN_POSITIVE, -0.0, 1.0e-45, f32::MAX, 0.1];
    let p = write(dir.path(), "f.bin", &feature_file(5, &[&odd]));
    let m = read_features(&p).unwrap();
    assert!(m.row(0).iter().zip(odd).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn corrupt_files_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let good = feature_file(2, &[&[1.0, 2.0], &[3.0, 4.0]]);

    let mut bad = good.clone();
    bad[0] = b'X';
    let e = read_features(write(dir.path(), "magic.bin", &bad)).unwrap_err();
    assert!(matches!(e, Error::BadMagic { .. }), "{e}");

    let e = read_features(write(dir.path(), "short.bin", &good[..good.len() - 4])).unwrap_err();
    assert_eq!(e.kind(), "TruncatedPayload");
    assert!(e.to_string().contains("expected 16 bytes, found 12"), "{e}");

    let mut v9 = good.clone();
    v9[8] = 9;
    let e = read_features(write(dir.path(), "v9.bin", &v9)).unwrap_err();
    assert!(e.to_string().contains("byte 8"), "{e}");
}

#[test]
fn manifest_row_errors() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "part0.bin", &feature_file(3, &[&[1.0; 3]]));
    write(dir.path(), "part1.bin", &feature_file(3, &[&[1.0; 3], &[2.0; 3]]));
    let m = write(dir.path(), "manifest.json", MANIFEST.as_bytes());
    match Dataset::load(&m, None).unwrap_err() {
        Error::DanglingRowIndex { sample_id, row_index: 3, rows: 3 } => assert_eq!(sample_id, "cup/1"),
        e => panic!("unexpected {e}"),
    }

    let dup = MANIFEST.replace(r#""row_index": 3"#, r#""row_index": 0"#);
    write(dir.path(), "part1.bin", &feature_file(3, &[&[1.0; 3], &[2.0; 3], &[3.0; 3]]));
    let m = write(dir.path(), "dup.json", dup.as_bytes());
    assert!(matches!(Dataset::load(&m, None), Err(Error::DuplicateRowIndex { row_index: 0 })));

    let wide = write(dir.path(), "wide.bin", &feature_file(4, &[&[1.0; 4]]));
    let narrow = write(dir.path(), "narrow.bin", &feature_file(3, &[&[1.0; 3]]));
    let mixed = MANIFEST.replace(r#"["part0.bin", "part1.bin"]"#, &format!("{:?}", [wide, narrow]));
    let m = write(dir.path(), "mixed.json", mixed.as_bytes());
    assert!(matches!(Dataset::load(&m, None), Err(Error::DimensionMismatch { expected: 4, found: 3 })));
}

#[test]
fn manifest_round_trips_through_the_writer() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "manifest.json", MANIFEST.as_bytes());
    let parsed = read_manifest(&m).unwrap();
    let out = dir.path().join("again.json");
    exll::io::write_manifest(&out, &parsed).unwrap();
    assert_eq!(read_manifest(&out).unwrap(), parsed);
}
