/// Clause input: the raw feature bits, optionally followed by their complements.
///
/// Layout with negations is `[x_0..x_{n-1}, !x_0..!x_{n-1}]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralVector {
    bits: Vec<u8>,
    n_features: usize,
}

impl LiteralVector {
    /// `features` must hold 0/1 values; anything nonzero counts as 1.
    pub fn from_features(features: &[u8], negated: bool) -> Self {
        let n = features.len();
        let mut bits = Vec::with_capacity(if negated { 2 * n } else { n });
        bits.extend(features.iter().map(|&b| (b != 0) as u8));
        if negated {
            bits.extend(features.iter().map(|&b| (b == 0) as u8));
        }
        Self {
            bits,
            n_features: n,
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}
