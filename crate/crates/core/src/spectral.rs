//! Three-dimensional FFTs on the periodic box and the wavenumber tables that
//! go with them.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Forward and inverse plans for an `n x n x n` complex transform.
///
/// Layout is row-major with x fastest: `idx = ix + n * (iy + n * iz)`.
/// The forward transform is unnormalized; [`Fft3::inverse`] divides by `n^3`.
#[derive(Clone)]
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let plane = n * n;
        assert_eq!(data.len(), plane * n, "buffer does not match grid size");

        // x: rows are contiguous
        run_rows(plan, data, plane);

        // y: transpose each z-plane so y is contiguous
        let y_pass = |slab: &mut [Complex64]| {
            let mut buf = vec![Complex64::default(); plane];
            transpose(slab, &mut buf, n);
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(&mut buf, &mut scratch);
            transpose(&buf, slab, n);
        };
        #[cfg(feature = "parallel")]
        data.par_chunks_mut(plane).for_each(y_pass);
        #[cfg(not(feature = "parallel"))]
        data.chunks_mut(plane).for_each(y_pass);

        // z: gather each xz-plane, transpose so z is contiguous
        let mut gathered = vec![Complex64::default(); plane];
        let mut buf = vec![Complex64::default(); plane];
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for iy in 0..n {
            for iz in 0..n {
                let src = n * iy + plane * iz;
                gathered[iz * n..(iz + 1) * n].copy_from_slice(&data[src..src + n]);
            }
            transpose(&gathered, &mut buf, n);
            plan.process_with_scratch(&mut buf, &mut scratch);
            transpose(&buf, &mut gathered, n);
            for iz in 0..n {
                let dst = n * iy + plane * iz;
                data[dst..dst + n].copy_from_slice(&gathered[iz * n..(iz + 1) * n]);
            }
        }
    }
}

fn run_rows(plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], chunk: usize) {
    let work = |block: &mut [Complex64]| {
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(block, &mut scratch);
    };
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk).for_each(work);
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk).for_each(work);
}

/// Runs `work(block_index, block)` over consecutive blocks of `chunk`
/// samples, in parallel when the `parallel` feature is on.
pub(crate) fn for_each_block<F>(data: &mut [Complex64], chunk: usize, work: F)
where
    F: Fn(usize, &mut [Complex64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk).enumerate().for_each(|(i, b)| work(i, b));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk).enumerate().for_each(|(i, b)| work(i, b));
}

/// Square transpose `dst[j][i] = src[i][j]` with small cache blocks.
fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for i0 in (0..n).step_by(B) {
        for j0 in (0..n).step_by(B) {
            for i in i0..(i0 + B).min(n) {
                for j in j0..(j0 + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// Angular wavenumbers in FFT order for a periodic interval of length `2L`
/// sampled at `n` points: `(pi/L) * {0, 1, .., n/2-1, -n/2, .., -1}`.
pub fn wavenumbers(n: usize, half_width: f64) -> Vec<f64> {
    let dk = PI / half_width;
    (0..n)
        .map(|i| {
            let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
            m as f64 * dk
        })
        .collect()
}

/// Wavenumbers for odd-order derivatives: the Nyquist entry is zeroed so that
/// real fields have real derivatives.
pub fn derivative_wavenumbers(n: usize, half_width: f64) -> Vec<f64> {
    let mut k = wavenumbers(n, half_width);
    if n % 2 == 0 {
        k[n / 2] = 0.0;
    }
    k
}

/// Per-axis 2/3-rule mask: `true` for retained modes.
pub fn dealias_mask_1d(n: usize) -> Vec<bool> {
    let cutoff = n / 3;
    (0..n)
        .map(|i| {
            let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
            m.unsigned_abs() as usize <= cutoff
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft3(data: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); data.len()];
        let w = |a: usize, b: usize| Complex64::from_polar(1.0, -2.0 * PI * (a * b) as f64 / n as f64);
        for kz in 0..n {
            for ky in 0..n {
                for kx in 0..n {
                    let mut acc = Complex64::default();
                    for z in 0..n {
                        for y in 0..n {
                            for x in 0..n {
                                acc += data[x + n * (y + n * z)] * w(kx, x) * w(ky, y) * w(kz, z);
                            }
                        }
                    }
                    out[kx + n * (ky + n * kz)] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let n = 4;
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.1).cos()))
            .collect();
        let mut fast = data.clone();
        Fft3::new(n).forward(&mut fast);
        let slow = naive_dft3(&data, n);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let n = 8;
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64).sqrt(), -(i as f64 * 0.1)))
            .collect();
        let mut buf = data.clone();
        let fft = Fft3::new(n);
        fft.forward(&mut buf);
        fft.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn wavenumber_layout() {
        let k = wavenumbers(8, PI);
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        let kd = derivative_wavenumbers(8, PI);
        assert_eq!(kd[4], 0.0);
        let mask = dealias_mask_1d(9);
        assert_eq!(mask.iter().filter(|m| **m).count(), 7);
    }
}
