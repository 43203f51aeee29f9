//! Byte-level tokenizer: id = byte value, with three reserved ids above the
//! byte range.

pub const BOS: usize = 256;
pub const EOS: usize = 257;
pub const SEP: usize = 258;
pub const VOCAB_SIZE: usize = 259;

pub fn tokenize(text: &str) -> Vec<usize> {
    text.bytes().map(usize::from).collect()
}

/// Inverse of [`tokenize`]; special ids are dropped and invalid UTF-8 is
/// replaced lossily.
pub fn detokenize(ids: &[usize]) -> String {
    let bytes: Vec<u8> = ids.iter().filter_map(|&id| u8::try_from(id).ok()).collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

/// Token sequence used as one analysis sample: `BOS` followed by the text's
/// bytes, truncated to `max_len` ids.
pub fn encode_sample(text: &str, max_len: usize) -> Vec<usize> {
    let mut ids = Vec::with_capacity(text.len() + 1);
    ids.push(BOS);
    ids.extend(text.bytes().map(usize::from));
    ids.truncate(max_len);
    ids
}
