use alloc::vec;
use alloc::vec::Vec;

use super::SvmError;
use crate::dataset::Dataset;
use crate::math;

#[inline]
pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[inline]
pub(crate) fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    math::exp(-gamma * squared_distance(x, y))
}

/// `K(x, y) = exp(-gamma * |x - y|^2)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64, SvmError> {
    if x.len() != y.len() {
        return Err(SvmError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(rbf(x, y, gamma))
}

const EMPTY: usize = usize::MAX;

/// LRU cache of RBF kernel rows `K(x_i, .)` over a training set.
///
/// Eviction scans for the least recently used slot, which is linear in the
/// capacity but negligible next to computing a row.
#[derive(Debug)]
pub struct KernelCache<'a> {
    data: &'a Dataset,
    gamma: f64,
    capacity: usize,
    slots: Vec<Vec<f64>>,
    owner: Vec<usize>,
    last_used: Vec<u64>,
    slot_of: Vec<usize>,
    clock: u64,
    hits: u64,
    misses: u64,
}

impl<'a> KernelCache<'a> {
    /// `capacity` is clamped to `[2, n]`.
    pub fn new(data: &'a Dataset, gamma: f64, capacity: usize) -> Self {
        let n = data.len();
        let capacity = capacity.max(2).min(n.max(2));
        Self {
            data,
            gamma,
            capacity,
            slots: Vec::with_capacity(capacity),
            owner: Vec::with_capacity(capacity),
            last_used: Vec::with_capacity(capacity),
            slot_of: vec![EMPTY; n],
            clock: 0,
            hits: 0,
            misses: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    fn fill(&self, i: usize, row: &mut [f64]) {
        let xi = self.data.row(i);
        for (t, k) in row.iter_mut().enumerate() {
            *k = rbf(xi, self.data.row(t), self.gamma);
        }
    }

    fn ensure(&mut self, i: usize, pinned: usize) -> usize {
        self.clock += 1;
        let slot = self.slot_of[i];
        if slot != EMPTY {
            self.hits += 1;
            self.last_used[slot] = self.clock;
            return slot;
        }
        self.misses += 1;
        let slot = if self.slots.len() < self.capacity {
            self.slots.push(vec![0.0; self.data.len()]);
            self.owner.push(i);
            self.last_used.push(self.clock);
            self.slots.len() - 1
        } else {
            let victim = (0..self.slots.len())
                .filter(|&s| s != pinned)
                .min_by_key(|&s| self.last_used[s])
                .expect("cache holds at least two slots");
            self.slot_of[self.owner[victim]] = EMPTY;
            self.owner[victim] = i;
            self.last_used[victim] = self.clock;
            victim
        };
        let mut row = core::mem::take(&mut self.slots[slot]);
        self.fill(i, &mut row);
        self.slots[slot] = row;
        self.slot_of[i] = slot;
        slot
    }

    /// Kernel row of training index `i`.
    pub fn row(&mut self, i: usize) -> &[f64] {
        let s = self.ensure(i, EMPTY);
        &self.slots[s]
    }

    /// Rows `i` and `j` together; both stay resident while borrowed.
    pub fn pair(&mut self, i: usize, j: usize) -> (&[f64], &[f64]) {
        let si = self.ensure(i, EMPTY);
        let sj = self.ensure(j, si);
        (&self.slots[si], &self.slots[sj])
    }
}
