//! Double-precision transform with the same fold, twist and Lagrange order
//! as the integer transform.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct ReferenceTransform {
    ring_degree: usize,
    twist: Vec<Complex64>,
    roots: Vec<Complex64>,
    dft: Arc<dyn Fft<f64>>,
    idft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ReferenceTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReferenceTransform").field("ring_degree", &self.ring_degree).finish()
    }
}

impl ReferenceTransform {
    pub fn new(ring_degree: usize) -> ReferenceTransform {
        let m = ring_degree / 2;
        let mut planner = FftPlanner::new();
        let step = std::f64::consts::PI / ring_degree as f64;
        ReferenceTransform {
            ring_degree,
            twist: (0..m).map(|j| Complex64::from_polar(1.0, step * j as f64)).collect(),
            roots: (0..2 * ring_degree).map(|r| Complex64::from_polar(1.0, step * r as f64)).collect(),
            dft: planner.plan_fft_inverse(m),
            idft: planner.plan_fft_forward(m),
        }
    }

    pub fn ring_degree(&self) -> usize {
        self.ring_degree
    }

    /// `exp(iπr/N)`.
    pub fn root(&self, r: usize) -> Complex64 {
        self.roots[r % (2 * self.ring_degree)]
    }

    pub fn forward(&self, coeffs: &[f64]) -> Vec<Complex64> {
        let n = self.ring_degree;
        let m = n / 2;
        assert_eq!(coeffs.len(), n);
        let mut buf: Vec<Complex64> = (0..m).map(|j| Complex64::new(coeffs[j], coeffs[j + m]) * self.twist[j]).collect();
        self.dft.process(&mut buf);
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (k, v) in buf.into_iter().enumerate() {
            if k < m / 2 {
                out[2 * k] = v;
            } else {
                out[n - 2 * k - 1] = v.conj();
            }
        }
        out
    }

    pub fn inverse(&self, lagrange: &[Complex64]) -> Vec<f64> {
        let n = self.ring_degree;
        let m = n / 2;
        assert_eq!(lagrange.len(), m);
        let mut buf: Vec<Complex64> =
            (0..m).map(|k| if k < m / 2 { lagrange[2 * k] } else { lagrange[n - 2 * k - 1].conj() }).collect();
        self.idft.process(&mut buf);
        let norm = 1.0 / m as f64;
        let mut out = vec![0.0; n];
        for (j, v) in buf.into_iter().enumerate() {
            let z = v * self.twist[j].conj() * norm;
            out[j] = z.re;
            out[j + m] = z.im;
        }
        out
    }
}
