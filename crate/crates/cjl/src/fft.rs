//! Complex FFT engine for circular correlation at arbitrary lengths.
//!
//! Power-of-two sizes run a standard iterative radix-2 transform; every other
//! size goes through Bluestein's chirp-z reduction to a padded power-of-two
//! convolution. Zero-padding the data itself is never an option here because
//! the circulant apply needs the exact length-d circular structure.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Precomputed transform of one fixed length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    kind: PlanKind,
}

#[derive(Debug, Clone)]
enum PlanKind {
    Trivial,
    Radix2 {
        // twiddles[j] = exp(-2*pi*i*j/n) for j < n/2
        twiddles: Vec<Complex64>,
    },
    Bluestein {
        // chirp[j] = exp(-i*pi*j^2/n)
        chirp: Vec<Complex64>,
        // forward transform of the wrapped conjugate-chirp kernel, length m
        kernel_fft: Vec<Complex64>,
        inner: Box<FftPlan>,
    },
}

impl FftPlan {
    pub fn new(n: usize) -> FftPlan {
        assert!(n >= 1, "transform length must be positive");
        if n == 1 {
            return FftPlan {
                n,
                kind: PlanKind::Trivial,
            };
        }
        if n.is_power_of_two() {
            let twiddles = (0..n / 2)
                .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
                .collect();
            return FftPlan {
                n,
                kind: PlanKind::Radix2 { twiddles },
            };
        }
        // Bluestein: X[t] = chirp[t] * sum_j (x[j]*chirp[j]) * conj(chirp)[t-j],
        // a linear convolution embedded in a circular one of power-of-two size m.
        let m = (2 * n - 1).next_power_of_two();
        let chirp = chirp_table(n);
        let inner = Box::new(FftPlan::new(m));
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for j in 1..n {
            let b = chirp[j].conj();
            kernel[j] = b;
            kernel[m - j] = b;
        }
        inner.forward_in_place(&mut kernel);
        FftPlan {
            n,
            kind: PlanKind::Bluestein {
                chirp,
                kernel_fft: kernel,
                inner,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Forward transform: X[t] = sum_j x[j] exp(-2*pi*i*j*t/n).
    pub fn forward(&self, input: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(input.len(), self.n);
        match &self.kind {
            PlanKind::Trivial => vec![input[0]],
            PlanKind::Radix2 { .. } => {
                let mut buf = input.to_vec();
                self.forward_in_place(&mut buf);
                buf
            }
            PlanKind::Bluestein {
                chirp,
                kernel_fft,
                inner,
            } => {
                let m = inner.len();
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for j in 0..self.n {
                    buf[j] = input[j] * chirp[j];
                }
                inner.forward_in_place(&mut buf);
                for (b, k) in buf.iter_mut().zip(kernel_fft) {
                    *b *= k;
                }
                inner.inverse_in_place(&mut buf);
                (0..self.n).map(|t| buf[t] * chirp[t]).collect()
            }
        }
    }

    /// Inverse transform: x[j] = (1/n) sum_t X[t] exp(+2*pi*i*j*t/n).
    pub fn inverse(&self, input: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(input.len(), self.n);
        let conj: Vec<Complex64> = input.iter().map(|c| c.conj()).collect();
        let scale = 1.0 / self.n as f64;
        self.forward(&conj)
            .into_iter()
            .map(|c| c.conj() * scale)
            .collect()
    }

    pub fn forward_real(&self, input: &[f64]) -> Vec<Complex64> {
        let buf: Vec<Complex64> = input.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&buf)
    }

    /// Radix-2 in-place forward; only valid for `Radix2` and `Trivial` plans.
    fn forward_in_place(&self, buf: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        let twiddles = match &self.kind {
            PlanKind::Trivial => return,
            PlanKind::Radix2 { twiddles } => twiddles,
            PlanKind::Bluestein { .. } => unreachable!("in-place path is power-of-two only"),
        };
        // bit-reversal permutation
        let mut j = 0usize;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j ^= bit;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            let mut base = 0;
            while base < n {
                for k in 0..half {
                    let w = twiddles[k * step];
                    let t = w * buf[base + k + half];
                    let u = buf[base + k];
                    buf[base + k] = u + t;
                    buf[base + k + half] = u - t;
                }
                base += len;
            }
            len <<= 1;
        }
    }

    fn inverse_in_place(&self, buf: &mut [Complex64]) {
        for c in buf.iter_mut() {
            *c = c.conj();
        }
        self.forward_in_place(buf);
        let scale = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c = c.conj() * scale;
        }
    }
}

/// chirp[j] = exp(-i*pi*j^2/n), with j^2 reduced mod 2n to keep the angle small.
fn chirp_table(n: usize) -> Vec<Complex64> {
    let two_n = 2 * n as u128;
    (0..n)
        .map(|j| {
            let sq = (j as u128 * j as u128) % two_n;
            Complex64::from_polar(1.0, -PI * sq as f64 / n as f64)
        })
        .collect()
}
