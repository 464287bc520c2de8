//! IDX reader for unsigned-byte image and label files (the MNIST layout).
//!
//! ```text
//! offset 0   u32 BE magic: 0x00 0x00 <type> <ndims>   (type 0x08 = unsigned byte)
//! offset 4   u32 BE size of each dimension, ndims of them
//! then       raw bytes, row-major
//! ```

use std::path::Path;

use ndarray::Array2;

use super::{read_maybe_gzip, Dataset, Normalization};
use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

fn read_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Truncated {
            offset: bytes.len(),
            what: format!("header field {what} needs bytes {offset}..{}", offset + 4),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let found = read_u32(bytes, 0, "magic")?;
    if found == expected {
        return Ok(());
    }
    // Right shape of magic, wrong element type: report that separately.
    if found >> 16 == 0 && (found & 0xff) == (expected & 0xff) {
        return Err(Error::UnsupportedElementType {
            code: ((found >> 8) & 0xff) as u8,
        });
    }
    Err(Error::BadMagic { found, expected })
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<Dataset> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let n = read_u32(bytes, 4, "count")? as usize;
    let rows = read_u32(bytes, 8, "rows")? as usize;
    let cols = read_u32(bytes, 12, "cols")? as usize;
    let pixels = rows.checked_mul(cols).ok_or_else(|| Error::DimensionOverflow {
        offset: 8,
        what: format!("{rows} x {cols} pixels"),
    })?;
    let total = n.checked_mul(pixels).ok_or_else(|| Error::DimensionOverflow {
        offset: 4,
        what: format!("{n} images of {pixels} pixels"),
    })?;
    let body = &bytes[16..];
    if body.len() < total {
        return Err(Error::Truncated {
            offset: bytes.len(),
            what: format!("expected {total} pixel bytes after the 16-byte header, found {}", body.len()),
        });
    }
    if n == 0 || pixels == 0 {
        return Err(Error::Shape(format!("IDX file holds {n} images of {rows}x{cols}")));
    }
    let samples = Array2::from_shape_vec((n, pixels), body[..total].iter().map(|&b| f64::from(b)).collect())
        .expect("length checked above");
    let mut d = Dataset::new(samples, None)?.with_dims((rows, cols))?;
    d.normalization = Normalization::Raw;
    Ok(d)
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<i64>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let n = read_u32(bytes, 4, "count")? as usize;
    let body = &bytes[8..];
    if body.len() < n {
        return Err(Error::Truncated {
            offset: bytes.len(),
            what: format!("expected {n} label bytes after the 8-byte header, found {}", body.len()),
        });
    }
    Ok(body[..n].iter().map(|&b| i64::from(b)).collect())
}

/// Loads an IDX image file; pixel bytes become reals in `[0, 255]`.
pub fn load_idx_images(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut d = parse_idx_images(&read_maybe_gzip(path)?)?;
    d.provenance.push(format!("idx images {}", path.display()));
    Ok(d)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    parse_idx_labels(&read_maybe_gzip(path.as_ref())?)
}

/// An image file and its label file as one labeled dataset.
pub fn load_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset> {
    let mut d = load_idx_images(images)?;
    let labels = load_idx_labels(labels)?;
    if labels.len() != d.n_samples() {
        return Err(Error::Shape(format!("{} labels for {} images", labels.len(), d.n_samples())));
    }
    d.labels = Some(labels);
    Ok(d)
}
