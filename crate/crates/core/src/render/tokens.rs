// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Token accounting for prompts.

pub trait Tokenizer: Send + Sync {
    /// Name reported alongside every count.
    fn name(&self) -> &'static str;

    fn count(&self, text: &str) -> usize;
}

/// Identifier, number and single punctuation tokens; whitespace is free.
/// A deterministic stand-in for a byte-pair encoder.
#[derive(Clone, Copy, Debug, Default)]
pub struct SimpleTokenizer;

impl Tokenizer for SimpleTokenizer {
    fn name(&self) -> &'static str {
        "simple"
    }

    fn count(&self, text: &str) -> usize {
        let mut n = 0;
        let mut in_word = false;
        for c in text.chars() {
            if c.is_alphanumeric() || c == '_' {
                if !in_word {
                    n += 1;
                    in_word = true;
                }
            } else {
                in_word = false;
                if !c.is_whitespace() {
                    n += 1;
                }
            }
        }
        n
    }
}

/// The cl100k byte-pair encoding.
#[cfg(feature = "bpe")]
pub struct BpeTokenizer {
    bpe: &'static tiktoken_rs::CoreBPE,
}

#[cfg(feature = "bpe")]
impl Default for BpeTokenizer {
    fn default() -> Self {
        BpeTokenizer { bpe: tiktoken_rs::cl100k_base_singleton() }
    }
}

#[cfg(feature = "bpe")]
impl Tokenizer for BpeTokenizer {
    fn name(&self) -> &'static str {
        "cl100k"
    }

    fn count(&self, text: &str) -> usize {
        self.bpe.encode_ordinary(text).len()
    }
}

/// The byte-pair tokenizer when compiled in, otherwise the simple one.
pub fn default_tokenizer() -> Box<dyn Tokenizer> {
    #[cfg(feature = "bpe")]
    {
        Box::new(BpeTokenizer::default())
    }
    #[cfg(not(feature = "bpe"))]
    {
        Box::new(SimpleTokenizer)
    }
}

/// Looks a tokenizer up by the name it reports.
pub fn tokenizer_by_name(name: &str) -> Option<Box<dyn Tokenizer>> {
    match name {
        "simple" => Some(Box::new(SimpleTokenizer)),
        #[cfg(feature = "bpe")]
        "cl100k" => Some(Box::new(BpeTokenizer::default())),
        _ => None,
    }
}

pub fn count_tokens(text: &str) -> usize {
    default_tokenizer().count(text)
}
