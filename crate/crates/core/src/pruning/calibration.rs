use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tokenizer::{tokenize, SEP};

/// Fixed-length token windows used to gather input statistics for pruning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSet {
    pub sequences: Vec<Vec<usize>>,
    /// Names of the corpora the texts came from.
    pub sources: Vec<String>,
}

impl CalibrationSet {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn with_sources(mut self, sources: Vec<String>) -> Self {
        self.sources = sources;
        self
    }

    pub fn token_count(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }
}

/// Shuffles `texts` (seeded), joins their tokens with `SEP` and cuts the
/// stream into `k` consecutive, disjoint windows of `context_len` tokens.
pub fn build_calibration(
    texts: &[String],
    k: usize,
    context_len: usize,
    seed: u64,
) -> Result<CalibrationSet> {
    if context_len == 0 {
        return Err(Error::Contract("calibration context length must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..texts.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut stream = Vec::new();
    for (n, &i) in order.iter().enumerate() {
        if n > 0 {
            stream.push(SEP);
        }
        stream.extend(tokenize(&texts[i]));
    }
    let required = k * context_len;
    if stream.len() < required {
        return Err(Error::Data(format!(
            "calibration needs {required} tokens ({k} x {context_len}) but the texts provide {}",
            stream.len()
        )));
    }
    let sequences = stream
        .chunks_exact(context_len)
        .take(k)
        .map(<[usize]>::to_vec)
        .collect();
    Ok(CalibrationSet {
        sequences,
        sources: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit_is_verbatim() {
        let c = build_calibration(&["abcdefgh".into()], 1, 8, 3).unwrap();
        assert_eq!(c.sequences, vec![tokenize("abcdefgh")]);
    }

    #[test]
    fn windows_are_uniform_and_disjoint() {
        let texts: Vec<String> = (0..20).map(|i| format!("text number {i} with some words")).collect();
        let c = build_calibration(&texts, 5, 16, 9).unwrap();
        assert_eq!(c.len(), 5);
        assert!(c.sequences.iter().all(|s| s.len() == 16));
        // Re-derive the stream and check the windows tile its prefix.
        let mut order: Vec<usize> = (0..texts.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(9));
        let joined = order.iter().map(|&i| texts[i].as_str()).collect::<Vec<_>>();
        let mut stream = Vec::new();
        for (n, t) in joined.iter().enumerate() {
            if n > 0 {
                stream.push(SEP);
            }
            stream.extend(tokenize(t));
        }
        let flat: Vec<usize> = c.sequences.concat();
        assert_eq!(&flat[..], &stream[..80]);
    }

    #[test]
    fn insufficient_text_states_counts() {
        let err = build_calibration(&["abc".into()], 2, 4, 0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('8') && msg.contains('3'), "{msg}");
    }
}
