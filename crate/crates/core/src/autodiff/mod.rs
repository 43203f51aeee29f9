//! Dense `f32` tensors and a reverse-mode tape covering the primitives a
//! Llama-style decoder needs.

mod tape;
mod tensor;

pub use tape::{Tape, Var};
pub use tensor::Tensor;

#[cfg(test)]
mod tests;
