use serde::{Deserialize, Serialize};

use crate::error::{GwtError, Result};

/// Diagonal sampling matrix `K`: `keep_lp[i]` means node `i` stores the
/// low-pass output (`K_ii = +1`), otherwise the high-pass output.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SamplingPattern {
    pub keep_lp: Vec<bool>,
}

impl SamplingPattern {
    pub fn new(keep_lp: Vec<bool>) -> Self {
        Self { keep_lp }
    }

    /// Even nodes keep the low-pass.
    pub fn alternating(n: usize) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(GwtError::OddSize(n));
        }
        Ok(Self::new((0..n).map(|i| i % 2 == 0).collect()))
    }

    /// Pattern from the low `n` bits of `mask` (bit `i` set = low-pass).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self::new((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    /// Parse `"1010..."` or `"TFTF..."`.
    pub fn parse(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| match c {
                '1' | 'T' | 't' | 'L' | 'l' => Ok(true),
                '0' | 'F' | 'f' | 'H' | 'h' => Ok(false),
                other => Err(GwtError::Parse(format!("bad pattern character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.keep_lp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep_lp.is_empty()
    }

    pub fn lowpass_count(&self) -> usize {
        self.keep_lp.iter().filter(|&&b| b).count()
    }

    pub fn sign(&self, i: usize) -> f64 {
        if self.keep_lp[i] {
            1.0
        } else {
            -1.0
        }
    }

    /// `Some(+1)` for even-lowpass alternation, `Some(-1)` for odd-lowpass.
    pub fn alternation_sign(&self) -> Option<f64> {
        let n = self.len();
        if n == 0 || !n.is_multiple_of(2) {
            return None;
        }
        if self
            .keep_lp
            .iter()
            .enumerate()
            .all(|(i, &b)| b == (i % 2 == 0))
        {
            Some(1.0)
        } else if self
            .keep_lp
            .iter()
            .enumerate()
            .all(|(i, &b)| b == (i % 2 == 1))
        {
            Some(-1.0)
        } else {
            None
        }
    }

    pub fn lowpass_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.keep_lp[i]).collect()
    }

    pub fn highpass_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.keep_lp[i]).collect()
    }

    pub fn to_bit_string(&self) -> String {
        self.keep_lp
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}
