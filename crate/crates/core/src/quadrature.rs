//! Polar product quadrature over a disk: Gauss–Legendre in the radius,
//! uniform trapezoid in the angle.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A polar grid on the disk `|A| ≤ radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskGrid {
    pub radius: f64,
    pub n_r: usize,
    pub n_phi: usize,
}

impl DiskGrid {
    pub fn new(radius: f64, n_r: usize, n_phi: usize) -> Self {
        DiskGrid { radius, n_r, n_phi }
    }

    pub fn halved(&self) -> Self {
        DiskGrid::new(self.radius, (self.n_r / 2).max(1), (self.n_phi / 2).max(1))
    }

    pub fn doubled(&self) -> Self {
        DiskGrid::new(self.radius, self.n_r * 2, self.n_phi * 2)
    }

    /// Radial nodes with weights that already include the Jacobian `r` and
    /// the angular step, so that `Σ_ij w_i f(r_i, φ_j)` approximates `∫ d²A f`.
    pub fn radial_nodes(&self) -> Vec<(f64, f64)> {
        let (x, w) = gauss_legendre(self.n_r);
        let half = 0.5 * self.radius;
        let dphi = 2.0 * PI / self.n_phi as f64;
        x.iter()
            .zip(&w)
            .map(|(&xi, &wi)| {
                let r = half * (xi + 1.0);
                (r, half * wi * r * dphi)
            })
            .collect()
    }

    pub fn angles(&self) -> Vec<f64> {
        let dphi = 2.0 * PI / self.n_phi as f64;
        (0..self.n_phi).map(|j| j as f64 * dphi).collect()
    }
}
