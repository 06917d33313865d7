//! Dataset readers (CIFAR-10 binary, MNIST IDX) and patch extraction.
//!
//! Dataset files are supplied by path; nothing here downloads. [`CATALOG`]
//! lists where the official files live and the SHA-256 digests of the
//! uncompressed files, and [`verify_file`] checks a local copy against them.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::images::{ImageGeometry, QuantizedImageSet};
use crate::rng::Seed;

const CIFAR_SIDE: usize = 32;
const CIFAR_PIXELS: usize = CIFAR_SIDE * CIFAR_SIDE * 3;
const CIFAR_RECORD: usize = 1 + CIFAR_PIXELS;
const IDX_IMAGE_MAGIC: u32 = 2051;

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Read one CIFAR-10 binary batch, or every `data_batch_*.bin` in a
/// directory (in name order).
///
/// Each record is one label byte followed by 3072 pixel bytes: the red,
/// green and blue 32x32 planes, each row-major. Labels are dropped and
/// pixels are re-interleaved to the crate's channel-last layout.
pub fn read_cifar10(path: impl AsRef<Path>) -> Result<QuantizedImageSet> {
    let path = path.as_ref();
    if path.is_dir() {
        let mut batches: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("data_batch_") && n.ends_with(".bin"))
            })
            .collect();
        batches.sort();
        if batches.is_empty() {
            return Err(Error::EmptyDataset(format!(
                "no data_batch_*.bin files in {}",
                path.display()
            )));
        }
        let sets = batches
            .iter()
            .map(read_cifar10_file)
            .collect::<Result<Vec<_>>>()?;
        return QuantizedImageSet::concat(&sets);
    }
    read_cifar10_file(path)
}

fn read_cifar10_file(path: impl AsRef<Path>) -> Result<QuantizedImageSet> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    if bytes.len() % CIFAR_RECORD != 0 {
        return Err(Error::TruncatedRecord {
            path: path.to_path_buf(),
            offset: (bytes.len() / CIFAR_RECORD * CIFAR_RECORD) as u64,
        });
    }
    if bytes.is_empty() {
        return Err(Error::EmptyDataset(path.display().to_string()));
    }
    let n = bytes.len() / CIFAR_RECORD;
    let plane = CIFAR_SIDE * CIFAR_SIDE;
    let mut data = vec![0u8; n * CIFAR_PIXELS];
    for (rec, out) in bytes.chunks_exact(CIFAR_RECORD).zip(data.chunks_exact_mut(CIFAR_PIXELS)) {
        let px = &rec[1..];
        for p in 0..plane {
            for c in 0..3 {
                out[p * 3 + c] = px[c * plane + p];
            }
        }
    }
    QuantizedImageSet::new(data, ImageGeometry::new(CIFAR_SIDE, CIFAR_SIDE, 3)?)
}

/// Write images in the CIFAR-10 binary layout with the given labels.
/// Images must be 32x32x3.
pub fn write_cifar10(path: impl AsRef<Path>, images: &QuantizedImageSet, labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let g = images.geometry();
    if (g.height, g.width, g.channels) != (CIFAR_SIDE, CIFAR_SIDE, 3) {
        return Err(Error::invalid("images", "CIFAR-10 records are 32x32x3"));
    }
    crate::error::check_dim(images.len(), labels.len())?;
    let plane = CIFAR_SIDE * CIFAR_SIDE;
    let mut out = Vec::with_capacity(images.len() * CIFAR_RECORD);
    for (i, &label) in labels.iter().enumerate() {
        out.push(label);
        let img = images.image(i);
        for c in 0..3 {
            out.extend((0..plane).map(|p| img[p * 3 + c]));
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read an IDX3 image file (MNIST layout): big-endian magic 2051, then
/// 32-bit image count, rows and columns, then one byte per pixel.
pub fn read_mnist_idx(path: impl AsRef<Path>) -> Result<QuantizedImageSet> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let malformed = |reason: String| Error::MalformedDataset {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < 16 {
        return Err(malformed(format!("header needs 16 bytes, file has {}", bytes.len())));
    }
    let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().expect("4 bytes"));
    let magic = word(0);
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            found: magic,
            expected: IDX_IMAGE_MAGIC,
        });
    }
    let (count, rows, cols) = (word(1) as usize, word(2) as usize, word(3) as usize);
    if count == 0 {
        return Err(Error::EmptyDataset(format!("{} declares 0 images", path.display())));
    }
    let expected = 16 + count * rows * cols;
    if bytes.len() != expected {
        return Err(malformed(format!(
            "header declares {count} images of {rows}x{cols} ({expected} bytes), file has {}",
            bytes.len()
        )));
    }
    QuantizedImageSet::new(bytes[16..].to_vec(), ImageGeometry::new(rows, cols, 1)?)
}

/// Write single-channel images as an IDX3 file.
pub fn write_mnist_idx(path: impl AsRef<Path>, images: &QuantizedImageSet) -> Result<()> {
    let path = path.as_ref();
    let g = images.geometry();
    if g.channels != 1 {
        return Err(Error::invalid("images", "IDX image files hold single-channel images"));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut header = Vec::with_capacity(16);
    for v in [IDX_IMAGE_MAGIC, images.len() as u32, g.height as u32, g.width as u32] {
        header.extend_from_slice(&v.to_be_bytes());
    }
    f.write_all(&header)
        .and_then(|_| f.write_all(images.as_bytes()))
        .map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    #[default]
    Grayscale,
    Color,
}

/// Square patches cut at uniformly random positions from random images.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PatchSpec {
    pub patch_size: usize,
    pub channel_mode: ChannelMode,
    pub count: usize,
    pub seed: Seed,
}

impl Default for PatchSpec {
    fn default() -> Self {
        PatchSpec {
            patch_size: 6,
            channel_mode: ChannelMode::Grayscale,
            count: 10_000,
            seed: Seed(0),
        }
    }
}

/// Cut `spec.count` patches. Each patch picks an image and a top-left corner
/// uniformly at random; grayscale mode averages channels (rounded to
/// nearest) after cropping.
pub fn extract_patches(images: &QuantizedImageSet, spec: &PatchSpec) -> Result<QuantizedImageSet> {
    let g = images.geometry();
    let p = spec.patch_size;
    if p == 0 || p > g.height || p > g.width {
        return Err(Error::invalid(
            "patch_size",
            format!("{p} does not fit in {}x{} images", g.height, g.width),
        ));
    }
    if spec.count == 0 {
        return Err(Error::invalid("count", "need at least one patch"));
    }
    let mut rng = spec.seed.rng();
    let c = g.channels;
    let mut data = Vec::with_capacity(spec.count * p * p * c);
    for _ in 0..spec.count {
        let i = rng.random_range(0..images.len());
        let y0 = rng.random_range(0..=g.height - p);
        let x0 = rng.random_range(0..=g.width - p);
        let img = images.image(i);
        for y in y0..y0 + p {
            let start = (y * g.width + x0) * c;
            data.extend_from_slice(&img[start..start + p * c]);
        }
    }
    let patches = QuantizedImageSet::new(data, ImageGeometry::new(p, p, c)?)?;
    Ok(match spec.channel_mode {
        ChannelMode::Grayscale => patches.to_grayscale(),
        ChannelMode::Color => patches,
    })
}

/// An official dataset file and the SHA-256 of its uncompressed contents.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub dataset: &'static str,
    pub file: &'static str,
    pub url: &'static str,
    pub sha256: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        dataset: "mnist",
        file: "train-images-idx3-ubyte",
        url: "https://storage.googleapis.com/cvdf-datasets/mnist/train-images-idx3-ubyte.gz",
        sha256: "ba891046e6505d7aadcbbe25680a0738ad16aec93bde7f9b65e87a2fc25776db",
    },
    CatalogEntry {
        dataset: "mnist",
        file: "t10k-images-idx3-ubyte",
        url: "https://storage.googleapis.com/cvdf-datasets/mnist/t10k-images-idx3-ubyte.gz",
        sha256: "0fa7898d509279e482958e8ce81c8e77db3f2f8254e26661ceb7762c4d494ce7",
    },
    CatalogEntry {
        dataset: "cifar10",
        file: "data_batch_1.bin",
        url: "https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz",
        sha256: "cee916563c9f80d84e3cc88e17fdc0941787f1244f00a67874d45b261883ada5",
    },
    CatalogEntry {
        dataset: "cifar10",
        file: "data_batch_2.bin",
        url: "https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz",
        sha256: "a591ca11fa1708a91ee40f54b3da4784ccd871ecf2137de63f51ada8b3fa57ed",
    },
    CatalogEntry {
        dataset: "cifar10",
        file: "data_batch_3.bin",
        url: "https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz",
        sha256: "bbe8596564c0f86427f876058170b84dac6670ddf06d79402899d93ceea26f67",
    },
    CatalogEntry {
        dataset: "cifar10",
        file: "data_batch_4.bin",
        url: "https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz",
        sha256: "014e562d6e23c72197cc727519169a60359f5eccd8945ad5a09d710285ff4e48",
    },
    CatalogEntry {
        dataset: "cifar10",
        file: "data_batch_5.bin",
        url: "https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz",
        sha256: "755304fc0b379caeae8c14f0dac912fbc7d6cd469eb67a1029a08a39453a9add",
    },
];

/// Hex SHA-256 of a file.
pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let bytes = read_bytes(path.as_ref())?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Check a local file against its catalog digest. Returns `Ok(None)` when the
/// file is not in the catalog or has no pinned digest.
pub fn verify_file(path: impl AsRef<Path>) -> Result<Option<bool>> {
    let path = path.as_ref();
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    match CATALOG.iter().find(|e| e.file == name && !e.sha256.is_empty()) {
        Some(entry) => Ok(Some(sha256_file(path)? == entry.sha256)),
        None => Ok(None),
    }
}
