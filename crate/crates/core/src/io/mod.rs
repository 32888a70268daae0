//! Bit-exact file I/O: 16-bit grayscale PNG and the PMRT tensor container.

mod png16;
mod tensor;

pub use png16::{read_png16, write_png16, Gray16};
pub use tensor::{
    image_from_tensor, image_to_tensor, read_tensor, stack_from_tensor, stack_to_tensor,
    write_tensor, Tensor, TensorData, TENSOR_MAGIC, TENSOR_VERSION,
};
