use std::path::Path;

use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 8] = b"EXLLFEAT";
pub const FEATURE_VERSION: u16 = 1;
/// Payload element tag: little-endian IEEE-754 binary32.
pub const DTYPE_F32: u8 = 0;
/// magic (8) + version u16 (2) + dimension u32 (4) + count u64 (8) + dtype u8 (1).
pub const HEADER_LEN: usize = 23;

/// Row-major block of `count` feature rows of width `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    dim: usize,
    values: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(dim: usize, values: Vec<f32>) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidConfig(format!(
                "{} values cannot be split into rows of width {dim}",
                values.len()
            )));
        }
        Ok(Self { dim, values })
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f32>]) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn row(&self, index: usize) -> &[f32] {
        &self.values[index * self.dim..(index + 1) * self.dim]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn append(&mut self, other: FeatureMatrix) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        self.values.extend(other.values);
        Ok(())
    }
}

pub fn encode_features(features: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + features.values.len() * 4);
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
    out.extend_from_slice(&(features.dim as u32).to_le_bytes());
    out.extend_from_slice(&(features.count() as u64).to_le_bytes());
    out.push(DTYPE_F32);
    for v in &features.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses a feature file image; `path` is only used in error messages.
pub fn decode_features(bytes: &[u8], path: &Path) -> Result<FeatureMatrix> {
    if bytes.len() < FEATURE_MAGIC.len() || &bytes[..8] != FEATURE_MAGIC {
        return Err(Error::BadMagic { path: path.into(), found: bytes[..bytes.len().min(8)].to_vec() });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedPayload {
            path: path.into(),
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
            header: HEADER_LEN as u64,
        });
    }
    let version = u16::from_le_bytes([bytes[8], bytes[9]]);
    if version != FEATURE_VERSION {
        return Err(Error::VersionUnsupported { path: path.into(), what: "version", found: version.into(), offset: 8 });
    }
    let dim = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as u64;
    let count = u64::from_le_bytes(bytes[14..22].try_into().unwrap());
    let dtype = bytes[22];
    if dtype != DTYPE_F32 {
        return Err(Error::VersionUnsupported { path: path.into(), what: "dtype tag", found: dtype.into(), offset: 22 });
    }
    if dim == 0 {
        return Err(Error::VersionUnsupported { path: path.into(), what: "dimension", found: 0, offset: 10 });
    }
    let payload = &bytes[HEADER_LEN..];
    let expected = count
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::InvalidConfig(format!("{}: header declares an impossible size", path.display())))?;
    let actual = payload.len() as u64;
    if actual < expected {
        return Err(Error::TruncatedPayload { path: path.into(), expected, actual, header: HEADER_LEN as u64 });
    }
    if actual > expected {
        return Err(Error::TrailingBytes {
            path: path.into(),
            extra: actual - expected,
            offset: HEADER_LEN as u64 + expected,
        });
    }
    let values = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    FeatureMatrix::new(dim as usize, values)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_features(&bytes, path)
}

pub fn write_features(path: impl AsRef<Path>, features: &FeatureMatrix) -> Result<()> {
    super::write_atomic(path.as_ref(), &encode_features(features))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureMatrix {
        FeatureMatrix::new(3, vec![1.0, -2.5, 3.25, 0.0, f32::MIN_POSITIVE, 1e30]).unwrap()
    }

    #[test]
    fn header_layout_is_pinned() {
        let bytes = encode_features(&sample());
        assert_eq!(&bytes[..8], b"EXLLFEAT");
        assert_eq!(&bytes[8..10], &[1, 0]);
        assert_eq!(&bytes[10..14], &[3, 0, 0, 0]);
        assert_eq!(&bytes[14..22], &[2, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(bytes[22], 0);
        assert_eq!(&bytes[23..27], &1.0f32.to_le_bytes());
        assert_eq!(bytes.len(), HEADER_LEN + 6 * 4);
    }

    #[test]
    fn corruption_is_reported() {
        let p = Path::new("f.bin");
        let bytes = encode_features(&sample());
        assert!(matches!(decode_features(b"NOTMAGIC....", p), Err(Error::BadMagic { .. })));
        assert!(matches!(decode_features(b"EXL", p), Err(Error::BadMagic { .. })));

        let mut v2 = bytes.clone();
        v2[8] = 2;
        assert!(matches!(decode_features(&v2, p), Err(Error::VersionUnsupported { found: 2, offset: 8, .. })));
        let mut f64_tag = bytes.clone();
        f64_tag[22] = 1;
        assert!(matches!(decode_features(&f64_tag, p), Err(Error::VersionUnsupported { offset: 22, .. })));

        match decode_features(&bytes[..bytes.len() - 5], p) {
            Err(e @ Error::TruncatedPayload { expected: 24, actual: 19, .. }) => {
                assert!(e.to_string().contains("expected 24 bytes, found 19"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode_features(&long, p), Err(Error::TrailingBytes { extra: 1, offset: 47, .. })));
    }
}
