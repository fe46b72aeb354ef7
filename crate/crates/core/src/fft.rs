//! In-place iterative radix-2 FFT, enough for frame power spectra.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math;

/// Precomputed twiddles and bit-reversal table for one transform size.
#[derive(Debug, Clone)]
pub struct Fft {
    size: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    rev: Vec<usize>,
}

impl Fft {
    /// Plans a transform of `size` points. `size` must be a power of two.
    pub fn new(size: usize) -> Option<Self> {
        if size == 0 || !size.is_power_of_two() {
            return None;
        }
        let bits = size.trailing_zeros();
        let rev = (0..size)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let half = size / 2;
        let cos = (0..half).map(|k| math::cos(-2.0 * PI * k as f64 / size as f64)).collect();
        let sin = (0..half).map(|k| math::sin(-2.0 * PI * k as f64 / size as f64)).collect();
        Some(Self { size, cos, sin, rev })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Forward DFT of `(re, im)` in place: `X[k] = sum_n x[n] e^{-2 pi i k n / N}`.
    pub fn forward(&self, re: &mut [f64], im: &mut [f64]) {
        let n = self.size;
        assert_eq!(re.len(), n);
        assert_eq!(im.len(), n);
        for i in 0..n {
            let j = self.rev[i];
            if i < j {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let step = n / len;
            let half = len / 2;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let (wr, wi) = (self.cos[k * step], self.sin[k * step]);
                    let a = start + k;
                    let b = a + half;
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            len <<= 1;
        }
    }

    /// `|X[k]|^2` for `k = 0..=N/2` of a real signal zero-padded to `N`.
    pub fn power_spectrum(&self, signal: &[f64]) -> Vec<f64> {
        let n = self.size;
        assert!(signal.len() <= n, "signal longer than the FFT size");
        let mut re = alloc::vec![0.0; n];
        let mut im = alloc::vec![0.0; n];
        re[..signal.len()].copy_from_slice(signal);
        self.forward(&mut re, &mut im);
        (0..=n / 2).map(|k| re[k] * re[k] + im[k] * im[k]).collect()
    }
}
