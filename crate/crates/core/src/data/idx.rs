//! IDX (MNIST-style) binary format.
//!
//! Images: big-endian `u32` magic 2051, count, rows, cols, then raw `u8`
//! pixels. Labels: magic 2049, count, raw `u8` labels.

use std::io::Read;
use std::path::Path;

use crate::data::{LabeledDataset, ManifoldTag};
use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 2051;
const LABELS_MAGIC: u32 = 2049;

fn read_u32_be(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_be_bytes(buf))
}

fn read_images(r: &mut impl Read, limit: Option<usize>) -> Result<(Vec<u8>, usize, usize, usize)> {
    let magic = read_u32_be(r)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Format {
            expected: format!("image magic {IMAGES_MAGIC}"),
            actual: magic.to_string(),
        });
    }
    let count = read_u32_be(r)? as usize;
    let rows = read_u32_be(r)? as usize;
    let cols = read_u32_be(r)? as usize;
    let take = limit.map_or(count, |l| l.min(count));
    let mut pixels = vec![0u8; take * rows * cols];
    r.read_exact(&mut pixels)?;
    Ok((pixels, take, rows, cols))
}

fn read_labels(r: &mut impl Read, limit: Option<usize>) -> Result<Vec<u8>> {
    let magic = read_u32_be(r)?;
    if magic != LABELS_MAGIC {
        return Err(Error::Format {
            expected: format!("label magic {LABELS_MAGIC}"),
            actual: magic.to_string(),
        });
    }
    let count = read_u32_be(r)? as usize;
    let take = limit.map_or(count, |l| l.min(count));
    let mut labels = vec![0u8; take];
    r.read_exact(&mut labels)?;
    Ok(labels)
}

/// Load an image/label IDX pair into a dataset.
///
/// `limit` truncates to the first points; with `scale` set, pixels are mapped
/// to `[0, 1]` by dividing by 255 and the dataset is tagged as image data.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    limit: Option<usize>,
    scale: bool,
) -> Result<LabeledDataset> {
    let mut img_file = std::io::BufReader::new(std::fs::File::open(images_path)?);
    let (pixels, n_images, rows, cols) = read_images(&mut img_file, limit)?;
    let mut lbl_file = std::io::BufReader::new(std::fs::File::open(labels_path)?);
    let labels = read_labels(&mut lbl_file, limit)?;

    if n_images != labels.len() {
        return Err(Error::Consistency(format!(
            "image count {} does not match label count {}",
            n_images,
            labels.len()
        )));
    }

    let class_count = usize::from(labels.iter().copied().max().unwrap_or(0)) + 1;
    let inputs: Vec<f64> = if scale {
        pixels.iter().map(|&p| f64::from(p) / 255.0).collect()
    } else {
        pixels.iter().map(|&p| f64::from(p)).collect()
    };
    LabeledDataset::new(
        inputs,
        labels.into_iter().map(usize::from).collect(),
        rows * cols,
        class_count.max(2),
        scale.then_some(ManifoldTag::Image),
    )
}

/// Write images in IDX format (one byte per pixel).
pub fn write_idx_images(
    w: &mut impl std::io::Write,
    pixels: &[u8],
    rows: usize,
    cols: usize,
) -> Result<()> {
    if rows * cols == 0 || pixels.len() % (rows * cols) != 0 {
        return Err(Error::contract("pixel buffer does not tile into images"));
    }
    let count = pixels.len() / (rows * cols);
    w.write_all(&IMAGES_MAGIC.to_be_bytes())?;
    w.write_all(&(count as u32).to_be_bytes())?;
    w.write_all(&(rows as u32).to_be_bytes())?;
    w.write_all(&(cols as u32).to_be_bytes())?;
    w.write_all(pixels)?;
    Ok(())
}

/// Write labels in IDX format.
pub fn write_idx_labels(w: &mut impl std::io::Write, labels: &[u8]) -> Result<()> {
    w.write_all(&LABELS_MAGIC.to_be_bytes())?;
    w.write_all(&(labels.len() as u32).to_be_bytes())?;
    w.write_all(labels)?;
    Ok(())
}
