//! FFT-backed linear convolution for long coefficient sequences.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// First `len` coefficients of the linear convolution of `a` and `b`.
pub(crate) fn convolve_truncated(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let a = &a[..a.len().min(len)];
    let b = &b[..b.len().min(len)];
    if a.is_empty() || b.is_empty() || len == 0 {
        return vec![Complex64::new(0.0, 0.0); len];
    }
    let full = a.len() + b.len() - 1;
    let size = full.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let mut fa = vec![Complex64::new(0.0, 0.0); size];
    fa[..a.len()].copy_from_slice(a);
    let mut fb = vec![Complex64::new(0.0, 0.0); size];
    fb[..b.len()].copy_from_slice(b);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inverse.process(&mut fa);
    let scale = 1.0 / size as f64;
    let mut out: Vec<_> = fa.into_iter().take(full.min(len)).map(|v| v * scale).collect();
    out.resize(len, Complex64::new(0.0, 0.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_schoolbook() {
        let a: Vec<_> = (0..37).map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let b: Vec<_> = (0..23).map(|k| Complex64::new(1.0 / (k as f64 + 1.0), -(k as f64))).collect();
        let fast = convolve_truncated(&a, &b, 70);
        for (n, v) in fast.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..=n {
                if j < a.len() && n - j < b.len() {
                    s += a[j] * b[n - j];
                }
            }
            assert!((v - s).norm() < 1e-10, "n = {n}");
        }
    }
}
