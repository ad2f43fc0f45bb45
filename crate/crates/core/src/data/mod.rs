//! Datasets: the half-moons generator, IDX ingestion, splits, and the binary
//! cache format.

mod half_moons;
mod idx;
mod split;

pub use half_moons::{make_half_moons, moon_point};
pub use idx::{load_idx, write_idx_images, write_idx_labels};
pub use split::split;

use std::io::{Read, Write};
use std::path::Path;

use ndarray::ArrayView2;

use crate::error::{Error, Result};

const CACHE_MAGIC: &[u8; 4] = b"BNND";
const CACHE_VERSION: u32 = 1;

/// Where a synthetic dataset's points live, when known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldTag {
    /// Two interleaving noisy semicircles; the noiseless support is a
    /// one-dimensional submanifold of the plane.
    HalfMoons,
    /// Pixel data with features in `[0, 1]`.
    Image,
}

impl ManifoldTag {
    fn to_byte(tag: Option<ManifoldTag>) -> u8 {
        match tag {
            None => 0,
            Some(ManifoldTag::HalfMoons) => 1,
            Some(ManifoldTag::Image) => 2,
        }
    }

    fn from_byte(b: u8) -> Result<Option<ManifoldTag>> {
        match b {
            0 => Ok(None),
            1 => Ok(Some(ManifoldTag::HalfMoons)),
            2 => Ok(Some(ManifoldTag::Image)),
            other => Err(Error::Format {
                expected: "manifold tag in {0, 1, 2}".to_string(),
                actual: other.to_string(),
            }),
        }
    }
}

/// A classification dataset: `n` rows of `d` features with integer labels in
/// `{0, .., class_count - 1}`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    /// Row-major `n x d`.
    inputs: Vec<f64>,
    labels: Vec<usize>,
    ambient_dim: usize,
    class_count: usize,
    manifold_tag: Option<ManifoldTag>,
}

impl LabeledDataset {
    pub fn new(
        inputs: Vec<f64>,
        labels: Vec<usize>,
        ambient_dim: usize,
        class_count: usize,
        manifold_tag: Option<ManifoldTag>,
    ) -> Result<Self> {
        if ambient_dim == 0 || class_count == 0 {
            return Err(Error::contract("dataset dimensions must be >= 1"));
        }
        if labels.is_empty() {
            return Err(Error::contract("dataset must contain at least one point"));
        }
        if inputs.len() != labels.len() * ambient_dim {
            return Err(Error::contract(format!(
                "inputs length {} does not equal {} points x {} features",
                inputs.len(),
                labels.len(),
                ambient_dim
            )));
        }
        if let Some(i) = inputs.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "dataset has non-finite feature at flat index {i}"
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::contract(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        if manifold_tag == Some(ManifoldTag::Image)
            && inputs.iter().any(|&v| !(0.0..=1.0).contains(&v))
        {
            return Err(Error::contract(
                "image datasets must have features in [0, 1]",
            ));
        }
        Ok(Self {
            inputs,
            labels,
            ambient_dim,
            class_count,
            manifold_tag,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn manifold_tag(&self) -> Option<ManifoldTag> {
        self.manifold_tag
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Zero-copy `n x d` view of the inputs.
    pub fn inputs_view(&self) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((self.len(), self.ambient_dim), &self.inputs)
            .expect("shape is maintained as an invariant")
    }

    /// First `n` points as a new dataset.
    pub fn take(&self, n: usize) -> Result<LabeledDataset> {
        if n == 0 || n > self.len() {
            return Err(Error::contract(format!(
                "cannot take {n} points from a dataset of {}",
                self.len()
            )));
        }
        LabeledDataset::new(
            self.inputs[..n * self.ambient_dim].to_vec(),
            self.labels[..n].to_vec(),
            self.ambient_dim,
            self.class_count,
            self.manifold_tag,
        )
    }

    /// Serialize to the cache format: magic `BNND`, version, dimensions,
    /// little-endian `f64` features, then one `u8` per label.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        if self.class_count > 256 {
            return Err(Error::contract(
                "cache format stores labels as u8; class_count must be <= 256",
            ));
        }
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.ambient_dim as u64).to_le_bytes())?;
        w.write_all(&(self.class_count as u64).to_le_bytes())?;
        w.write_all(&[ManifoldTag::to_byte(self.manifold_tag)])?;
        for v in &self.inputs {
            w.write_all(&v.to_le_bytes())?;
        }
        for &l in &self.labels {
            w.write_all(&[l as u8])?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Format {
                expected: format!("{CACHE_MAGIC:?}"),
                actual: format!("{magic:?}"),
            });
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != CACHE_VERSION {
            return Err(Error::Format {
                expected: format!("version {CACHE_VERSION}"),
                actual: format!("version {version}"),
            });
        }
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let n = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let d = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let k = u64::from_le_bytes(u64buf) as usize;
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let manifold_tag = ManifoldTag::from_byte(tag[0])?;

        let mut f64buf = [0u8; 8];
        let mut inputs = Vec::with_capacity(n * d);
        for _ in 0..n * d {
            r.read_exact(&mut f64buf)?;
            inputs.push(f64::from_le_bytes(f64buf));
        }
        let mut labels = vec![0u8; n];
        r.read_exact(&mut labels)?;
        LabeledDataset::new(
            inputs,
            labels.into_iter().map(usize::from).collect(),
            d,
            k,
            manifold_tag,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_construction() {
        assert!(LabeledDataset::new(vec![], vec![], 2, 2, None).is_err());
        assert!(LabeledDataset::new(vec![1.0, 2.0], vec![2], 2, 2, None).is_err());
        assert!(LabeledDataset::new(vec![1.0, f64::NAN], vec![0], 2, 2, None).is_err());
        assert!(LabeledDataset::new(vec![1.5, 0.5], vec![0], 2, 2, Some(ManifoldTag::Image)).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let ds = LabeledDataset::new(
            vec![0.1, 0.9, 0.5, 0.25],
            vec![0, 2],
            2,
            3,
            Some(ManifoldTag::Image),
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        let back = LabeledDataset::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn cache_rejects_wrong_magic() {
        let ds = LabeledDataset::new(vec![0.0, 0.0], vec![0], 2, 2, None).unwrap();
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        buf[0] = b'Z';
        assert!(matches!(
            LabeledDataset::read_from(&mut buf.as_slice()),
            Err(Error::Format { .. })
        ));
    }
}
