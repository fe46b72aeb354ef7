//! Row-major labeled data shared by the SVM, ensemble and MLP trainers.

use alloc::vec::Vec;

/// Binary frame label. Speech is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    NonSpeech,
    Speech,
}

impl Label {
    /// `+1.0` for speech, `-1.0` otherwise.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Speech => 1.0,
            Label::NonSpeech => -1.0,
        }
    }

    #[inline]
    pub fn as_i8(self) -> i8 {
        match self {
            Label::Speech => 1,
            Label::NonSpeech => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Label::Speech),
            -1 => Some(Label::NonSpeech),
            _ => None,
        }
    }

    /// Speech iff `score >= threshold`.
    #[inline]
    pub fn from_score(score: f64, threshold: f64) -> Self {
        if score >= threshold {
            Label::Speech
        } else {
            Label::NonSpeech
        }
    }

    #[inline]
    pub fn flip(self) -> Self {
        match self {
            Label::Speech => Label::NonSpeech,
            Label::NonSpeech => Label::Speech,
        }
    }
}

/// Fixed-dimension rows with one label each, stored contiguously.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
    labels: Vec<Label>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            values: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Builds from row slices. Panics if any row length differs from `dim`.
    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R], labels: &[Label]) -> Self {
        assert_eq!(rows.len(), labels.len(), "rows and labels differ in length");
        let mut ds = Self::new(dim);
        for (row, &label) in rows.iter().zip(labels) {
            ds.push(row.as_ref(), label);
        }
        ds
    }

    pub fn push(&mut self, row: &[f64], label: Label) {
        assert_eq!(row.len(), self.dim, "row dimension mismatch");
        self.values.extend_from_slice(row);
        self.labels.push(label);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    /// `(speech, nonspeech)` row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == Label::Speech).count();
        (pos, self.len() - pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (pos, neg) = self.class_counts();
        pos > 0 && neg > 0
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut ds = Self::new(self.dim);
        ds.values.reserve(indices.len() * self.dim);
        for &i in indices {
            ds.push(self.row(i), self.labels[i]);
        }
        ds
    }

    /// Appends all rows of `other`. Panics on a dimension mismatch.
    pub fn extend_from(&mut self, other: &Dataset) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.values.extend_from_slice(&other.values);
        self.labels.extend_from_slice(&other.labels);
    }
}
