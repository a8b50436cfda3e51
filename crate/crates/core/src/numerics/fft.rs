use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Precomputed twiddles for an iterative radix-2 transform of fixed length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    // exp(-2πi k/n), k < n/2
    twiddles: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return invalid(format!("FFT length must be a power of two, got {n}"));
        }
        let twiddles = (0..n / 2)
            .map(|k| {
                let phase = -TAU * k as f64 / n as f64;
                Complex64::new(phase.cos(), phase.sin())
            })
            .collect();
        Ok(Self { n, twiddles })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Forward: `X_k = Σ_j x_j e^{-2πi jk/N}`. Inverse uses `+i` and divides by `N`.
    pub fn process(&self, buf: &mut [Complex64], inverse: bool) -> Result<()> {
        let n = self.n;
        if buf.len() != n {
            return invalid(format!("buffer length {} does not match plan length {n}", buf.len()));
        }
        if n <= 1 {
            return Ok(());
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let u = buf[start + k];
                    let v = buf[start + k + half] * w;
                    buf[start + k] = u + v;
                    buf[start + k + half] = u - v;
                }
            }
            len <<= 1;
        }
        if inverse {
            let scale = 1.0 / n as f64;
            buf.iter_mut().for_each(|z| *z *= scale);
        }
        Ok(())
    }
}

pub fn fft_in_place(buf: &mut [Complex64], inverse: bool) -> Result<()> {
    FftPlan::new(buf.len())?.process(buf, inverse)
}

pub fn fft(values: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let mut out = values.to_vec();
    fft_in_place(&mut out, inverse)?;
    Ok(out)
}
