use crate::error::{Error, Result};
use crate::sparse::SparseExample;

/// Binary feature matrix, row-major, values 0/1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseDataset {
    n_features: usize,
    features: Vec<u8>,
    labels: Vec<usize>,
}

impl DenseDataset {
    pub fn new(n_features: usize, features: Vec<u8>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != n_features * labels.len() {
            return Err(Error::Data(format!(
                "{} feature values do not form {} rows of width {n_features}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(v) = features.iter().find(|&&v| v > 1) {
            return Err(Error::Data(format!("non-binary feature value {v}")));
        }
        Ok(Self {
            n_features,
            features,
            labels,
        })
    }

    pub fn from_rows(rows: &[Vec<u8>], labels: Vec<usize>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::Data(format!("row {r} has width {} not {width}", rows[r].len())));
        }
        if rows.len() != labels.len() {
            return Err(Error::Data("row and label counts differ".into()));
        }
        Self::new(width, rows.concat(), labels)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// New dataset holding rows `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> DenseDataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        DenseDataset {
            n_features: self.n_features,
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Active-index form of every row.
    pub fn to_sparse(&self) -> SparseDataset {
        let examples = (0..self.len())
            .map(|i| SparseExample {
                active: (0..self.n_features as u32).filter(|&l| self.row(i)[l as usize] != 0).collect(),
                label: self.labels[i],
            })
            .collect();
        SparseDataset {
            n_literals: self.n_features,
            examples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseDataset {
    n_literals: usize,
    examples: Vec<SparseExample>,
}

impl SparseDataset {
    pub fn new(n_literals: usize, examples: Vec<SparseExample>) -> Result<Self> {
        for ex in &examples {
            ex.check_range(n_literals)?;
            if ex.active.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Data("active indices must be strictly ascending".into()));
            }
        }
        Ok(Self {
            n_literals,
            examples,
        })
    }

    pub fn n_literals(&self) -> usize {
        self.n_literals
    }

    pub fn examples(&self) -> &[SparseExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> SparseDataset {
        SparseDataset {
            n_literals: self.n_literals,
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
        }
    }

    /// Same examples over a wider universe.
    pub fn with_universe(&self, n_literals: usize) -> Result<SparseDataset> {
        SparseDataset::new(n_literals, self.examples.clone())
    }

    /// Sorted set of indices active in at least one example.
    pub fn observed_literals(&self) -> Vec<u32> {
        let mut all: Vec<u32> = self.examples.iter().flat_map(|e| e.active.iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Expand to a dense 0/1 matrix. Only sensible for small universes.
    pub fn to_dense(&self) -> DenseDataset {
        let mut features = vec![0u8; self.n_literals * self.examples.len()];
        for (i, ex) in self.examples.iter().enumerate() {
            for &l in &ex.active {
                features[i * self.n_literals + l as usize] = 1;
            }
        }
        DenseDataset {
            n_features: self.n_literals,
            features,
            labels: self.examples.iter().map(|e| e.label).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dataset {
    Dense(DenseDataset),
    Sparse(SparseDataset),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Dense(d) => d.len(),
            Dataset::Sparse(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_literals(&self) -> usize {
        match self {
            Dataset::Dense(d) => d.n_features(),
            Dataset::Sparse(d) => d.n_literals(),
        }
    }

    pub fn labels(&self) -> Vec<usize> {
        match self {
            Dataset::Dense(d) => d.labels().to_vec(),
            Dataset::Sparse(d) => d.examples().iter().map(|e| e.label).collect(),
        }
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        match self {
            Dataset::Dense(d) => Dataset::Dense(d.select(indices)),
            Dataset::Sparse(d) => Dataset::Sparse(d.select(indices)),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Dataset::Sparse(_))
    }

    pub(crate) fn check(&self, n_literals: usize, n_classes: usize) -> Result<()> {
        if self.n_literals() != n_literals {
            return Err(Error::Data(format!(
                "data has {} features but the model expects {n_literals}",
                self.n_literals()
            )));
        }
        if let Some((i, &label)) = self.labels().iter().enumerate().find(|(_, &l)| l >= n_classes) {
            return Err(Error::Data(format!(
                "example {i}: label {label} out of range for {n_classes} classes"
            )));
        }
        Ok(())
    }
}

impl From<DenseDataset> for Dataset {
    fn from(d: DenseDataset) -> Self {
        Dataset::Dense(d)
    }
}

impl From<SparseDataset> for Dataset {
    fn from(d: SparseDataset) -> Self {
        Dataset::Sparse(d)
    }
}
