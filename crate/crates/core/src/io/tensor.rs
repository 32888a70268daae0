//! PMRT tensor container: a minimal, byte-exact on-disk format for
//! u16/f32 arrays.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset  size       field
//! 0       4          magic "PMRT"
//! 4       2          version (u16, currently 1)
//! 6       1          dtype: 1 = u16, 2 = f32
//! 7       1          ndim
//! 8       4 * ndim   dims (u32 each)
//! ...     payload    row-major samples, little-endian
//! ```
//!
//! Readers validate magic, version, dtype, the dims product (with overflow
//! guards) and that the payload length matches exactly.

use std::fs;
use std::path::Path;

use crate::error::{PolarError, Result};
use crate::image::Image;
use crate::stack::{Domain, PolarizedStack};

pub const TENSOR_MAGIC: [u8; 4] = *b"PMRT";
pub const TENSOR_VERSION: u16 = 1;

const DTYPE_U16: u8 = 1;
const DTYPE_F32: u8 = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum TensorData {
    U16(Vec<u16>),
    F32(Vec<f32>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::U16(v) => v.len(),
            TensorData::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dtype_code(&self) -> u8 {
        match self {
            TensorData::U16(_) => DTYPE_U16,
            TensorData::F32(_) => DTYPE_F32,
        }
    }

    fn element_size(&self) -> usize {
        match self {
            TensorData::U16(_) => 2,
            TensorData::F32(_) => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub dims: Vec<u32>,
    pub data: TensorData,
}

impl Tensor {
    pub fn new(dims: Vec<u32>, data: TensorData) -> Result<Self> {
        let count = checked_element_count(&dims)?;
        if count != data.len() as u64 {
            return Err(PolarError::Format(format!(
                "dims {:?} imply {} elements, data has {}",
                dims,
                count,
                data.len()
            )));
        }
        Ok(Tensor { dims, data })
    }
}

fn checked_element_count(dims: &[u32]) -> Result<u64> {
    if dims.is_empty() {
        return Err(PolarError::Format("tensor needs at least one dim".into()));
    }
    let mut count: u64 = 1;
    for &d in dims {
        count = count
            .checked_mul(u64::from(d))
            .ok_or_else(|| PolarError::Format("dims product overflows".into()))?;
    }
    Ok(count)
}

pub fn write_tensor(path: impl AsRef<Path>, tensor: &Tensor) -> Result<()> {
    let count = checked_element_count(&tensor.dims)?;
    let payload_len = count
        .checked_mul(tensor.data.element_size() as u64)
        .ok_or_else(|| PolarError::Format("payload size overflows".into()))?;
    let mut bytes =
        Vec::with_capacity(8 + 4 * tensor.dims.len() + payload_len as usize);
    bytes.extend_from_slice(&TENSOR_MAGIC);
    bytes.extend_from_slice(&TENSOR_VERSION.to_le_bytes());
    bytes.push(tensor.data.dtype_code());
    bytes.push(
        u8::try_from(tensor.dims.len())
            .map_err(|_| PolarError::Format("too many dims".into()))?,
    );
    for &d in &tensor.dims {
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    match &tensor.data {
        TensorData::U16(v) => {
            for s in v {
                bytes.extend_from_slice(&s.to_le_bytes());
            }
        }
        TensorData::F32(v) => {
            for s in v {
                bytes.extend_from_slice(&s.to_le_bytes());
            }
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let bytes = fs::read(path)?;
    if bytes.len() < 8 {
        return Err(PolarError::Format("file shorter than header".into()));
    }
    if bytes[0..4] != TENSOR_MAGIC {
        return Err(PolarError::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != TENSOR_VERSION {
        return Err(PolarError::Format(format!(
            "unsupported version {version}"
        )));
    }
    let dtype = bytes[6];
    let ndim = bytes[7] as usize;
    let dims_end = 8 + 4 * ndim;
    if bytes.len() < dims_end {
        return Err(PolarError::Format("truncated dims".into()));
    }
    let dims: Vec<u32> = (0..ndim)
        .map(|i| {
            let o = 8 + 4 * i;
            u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]])
        })
        .collect();
    let count = checked_element_count(&dims)?;
    let element_size: u64 = match dtype {
        DTYPE_U16 => 2,
        DTYPE_F32 => 4,
        other => return Err(PolarError::Format(format!("unknown dtype code {other}"))),
    };
    let payload_len = count
        .checked_mul(element_size)
        .ok_or_else(|| PolarError::Format("payload size overflows".into()))?;
    let actual = (bytes.len() - dims_end) as u64;
    if actual != payload_len {
        return Err(PolarError::Format(format!(
            "payload length {actual} does not match expected {payload_len}"
        )));
    }
    let payload = &bytes[dims_end..];
    let data = match dtype {
        DTYPE_U16 => TensorData::U16(
            payload
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect(),
        ),
        DTYPE_F32 => TensorData::F32(
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        ),
        _ => unreachable!("dtype validated above"),
    };
    Ok(Tensor { dims, data })
}

/// Image -> f32 tensor with dims [height, width]. f64 samples are narrowed
/// to f32; this is the format's declared payload precision.
pub fn image_to_tensor(img: &Image) -> Tensor {
    Tensor {
        dims: vec![img.height() as u32, img.width() as u32],
        data: TensorData::F32(img.pixels().iter().map(|&v| v as f32).collect()),
    }
}

pub fn image_from_tensor(tensor: &Tensor) -> Result<Image> {
    let [h, w] = tensor.dims[..] else {
        return Err(PolarError::Format(format!(
            "expected 2-D tensor, got dims {:?}",
            tensor.dims
        )));
    };
    let TensorData::F32(ref v) = tensor.data else {
        return Err(PolarError::Format("expected f32 tensor".into()));
    };
    Image::new(
        w as usize,
        h as usize,
        v.iter().map(|&x| f64::from(x)).collect(),
    )
}

/// Stack -> f32 tensor with dims [4, height, width], channel-major.
pub fn stack_to_tensor(stack: &PolarizedStack) -> Tensor {
    let mut data = Vec::with_capacity(4 * stack.channel(0).len());
    for k in 0..4 {
        data.extend(stack.channel(k).pixels().iter().map(|&v| v as f32));
    }
    Tensor {
        dims: vec![4, stack.height() as u32, stack.width() as u32],
        data: TensorData::F32(data),
    }
}

/// Inverse of [`stack_to_tensor`]; the result is tagged linear raw.
pub fn stack_from_tensor(tensor: &Tensor) -> Result<PolarizedStack> {
    let [c, h, w] = tensor.dims[..] else {
        return Err(PolarError::Format(format!(
            "expected 3-D tensor, got dims {:?}",
            tensor.dims
        )));
    };
    if c != 4 {
        return Err(PolarError::Format(format!(
            "expected 4 channels, got {c}"
        )));
    }
    let TensorData::F32(ref v) = tensor.data else {
        return Err(PolarError::Format("expected f32 tensor".into()));
    };
    let plane = (h as usize) * (w as usize);
    let channels: [Image; 4] = std::array::from_fn(|k| {
        Image::new(
            w as usize,
            h as usize,
            v[k * plane..(k + 1) * plane]
                .iter()
                .map(|&x| f64::from(x))
                .collect(),
        )
        .expect("plane-sized slice")
    });
    PolarizedStack::new(channels, Domain::LinearRaw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn f32_roundtrip_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data: Vec<f32> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = Tensor::new(vec![3, 4, 5], TensorData::F32(data)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pmrt");
        write_tensor(&path, &t).unwrap();
        assert_eq!(read_tensor(&path).unwrap(), t);
    }

    #[test]
    fn u16_roundtrip_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data: Vec<u16> = (0..24).map(|_| rng.random_range(0..=4095)).collect();
        let t = Tensor::new(vec![4, 6], TensorData::U16(data)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pmrt");
        write_tensor(&path, &t).unwrap();
        assert_eq!(read_tensor(&path).unwrap(), t);
    }

    #[test]
    fn wrong_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pmrt");
        std::fs::write(&path, b"NOPE\x01\x00\x02\x01\x01\x00\x00\x00\x00\x00\x00\x00").unwrap();
        assert!(matches!(read_tensor(&path), Err(PolarError::Format(_))));
    }

    #[test]
    fn truncated_payload_rejected() {
        let t = Tensor::new(vec![2, 2], TensorData::F32(vec![0.0; 4])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.pmrt");
        write_tensor(&path, &t).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(read_tensor(&path), Err(PolarError::Format(_))));
    }

    #[test]
    fn trailing_garbage_rejected() {
        let t = Tensor::new(vec![2, 2], TensorData::F32(vec![0.0; 4])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("long.pmrt");
        write_tensor(&path, &t).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(read_tensor(&path), Err(PolarError::Format(_))));
    }

    #[test]
    fn dims_overflow_guard() {
        // Header declaring 2^20 x 2^20 x 2^20 f32 elements; the element
        // count (2^60) is fine in u64 but the byte size (2^62) must not be
        // trusted: payload is absent, so the read must fail cleanly.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&TENSOR_MAGIC);
        bytes.extend_from_slice(&TENSOR_VERSION.to_le_bytes());
        bytes.push(2); // f32
        bytes.push(3);
        for _ in 0..3 {
            bytes.extend_from_slice(&(1u32 << 20).to_le_bytes());
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("huge.pmrt");
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(read_tensor(&path), Err(PolarError::Format(_))));
    }

    #[test]
    fn unknown_dtype_rejected() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&TENSOR_MAGIC);
        bytes.extend_from_slice(&TENSOR_VERSION.to_le_bytes());
        bytes.push(9);
        bytes.push(1);
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&[0, 0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dtype.pmrt");
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(read_tensor(&path), Err(PolarError::Format(_))));
    }

    #[test]
    fn image_and_stack_adapters() {
        let img = Image::from_fn(5, 3, |x, y| (x + 10 * y) as f64);
        let back = image_from_tensor(&image_to_tensor(&img)).unwrap();
        assert_eq!(back, img); // small integers survive f32 exactly
        let stack = PolarizedStack::new(
            std::array::from_fn(|k| Image::filled(3, 2, k as f64)),
            Domain::LinearRaw,
        )
        .unwrap();
        let back = stack_from_tensor(&stack_to_tensor(&stack)).unwrap();
        assert_eq!(back, stack);
    }
}
