//! Periodic uniform truncation of R^N (N = 1 or 2) and spatial samples of u(t,.).

use crate::error::{FracError, Result};
use rustfft::{num_complex::Complex, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    /// L/2; the domain is [-L/2, L/2)^dim.
    pub half_length: f64,
    /// Points per dimension, a power of two >= 16.
    pub n_per_dim: usize,
}

impl GridSpec {
    pub fn new(dim: usize, half_length: f64, n_per_dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(FracError::ConfigError(format!("grid dim must be 1 or 2, got {dim}")));
        }
        if half_length <= 0.0 {
            return Err(FracError::ConfigError("half_length must be positive".into()));
        }
        if n_per_dim < 16 || !n_per_dim.is_power_of_two() {
            return Err(FracError::ConfigError(format!(
                "n_per_dim must be a power of two >= 16, got {n_per_dim}"
            )));
        }
        Ok(Self { dim, half_length, n_per_dim })
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n_per_dim as f64
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.n_per_dim.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of index i along one axis: -L/2 + i dx.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    /// Full coordinates of a flat index (row-major for dim 2).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.coord(idx), 0.0],
            _ => {
                let n = self.n_per_dim;
                [self.coord(idx / n), self.coord(idx % n)]
            }
        }
    }

    /// Discrete wavenumbers 2 pi j / L in FFT ordering along one axis.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_per_dim as i64;
        let base = 2.0 * std::f64::consts::PI / self.length();
        (0..n)
            .map(|j| {
                let j = if j <= n / 2 { j } else { j - n };
                base * j as f64
            })
            .collect()
    }

    /// Cell volume dx^dim.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }
}

/// A spatial sample of u(t, .) with its timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: GridSpec,
    pub time: f64,
    pub values: Vec<f64>,
}

impl Field {
    pub fn constant(grid: GridSpec, time: f64, value: f64) -> Self {
        Self { grid, time, values: vec![value; grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, time: f64, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let pt = grid.point(i);
                f(&pt[..grid.dim])
            })
            .collect();
        Self { grid, time, values }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Integral over the periodic box.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// The weighted L^1-type statistic int |u| dx / (1 + |x|^{N+2s}).
    pub fn tail_weighted_norm(&self, s: f64) -> f64 {
        let expo = self.grid.dim as f64 + 2.0 * s;
        let mut acc = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let pt = self.grid.point(i);
            let r = (pt[0] * pt[0] + pt[1] * pt[1]).sqrt();
            acc += v.abs() / (1.0 + r.powf(expo));
        }
        acc * self.grid.cell_volume()
    }

    /// Value at the grid point nearest to x (dim 1).
    pub fn value_at(&self, x: f64) -> f64 {
        assert_eq!(self.grid.dim, 1);
        let dx = self.grid.spacing();
        let i = ((x + self.grid.half_length) / dx).round() as i64;
        let n = self.grid.n_per_dim as i64;
        self.values[(i.rem_euclid(n)) as usize]
    }

    /// Linear interpolation at x (dim 1, periodic).
    pub fn interpolate(&self, x: f64) -> f64 {
        assert_eq!(self.grid.dim, 1);
        let dx = self.grid.spacing();
        let pos = (x + self.grid.half_length) / dx;
        let i0 = pos.floor() as i64;
        let frac = pos - i0 as f64;
        let n = self.grid.n_per_dim as i64;
        let a = self.values[(i0.rem_euclid(n)) as usize];
        let b = self.values[((i0 + 1).rem_euclid(n)) as usize];
        a + frac * (b - a)
    }
}

/// Apply a radial Fourier multiplier m(|k|) to a field.
pub fn apply_radial_multiplier(field: &Field, m: impl Fn(f64) -> f64) -> Field {
    let grid = field.grid;
    let n = grid.n_per_dim;
    let ks = grid.wavenumbers();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut data: Vec<Complex<f64>> =
        field.values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    match grid.dim {
        1 => {
            fwd.process(&mut data);
            for (c, &k) in data.iter_mut().zip(ks.iter()) {
                *c *= m(k.abs());
            }
            inv.process(&mut data);
        }
        _ => {
            // rows
            for row in data.chunks_exact_mut(n) {
                fwd.process(row);
            }
            // columns via transpose
            let mut t = transpose(&data, n);
            for col in t.chunks_exact_mut(n) {
                fwd.process(col);
            }
            for (j, col) in t.chunks_exact_mut(n).enumerate() {
                for (i, c) in col.iter_mut().enumerate() {
                    let k = (ks[i] * ks[i] + ks[j] * ks[j]).sqrt();
                    *c *= m(k);
                }
            }
            for col in t.chunks_exact_mut(n) {
                inv.process(col);
            }
            data = transpose(&t, n);
            for row in data.chunks_exact_mut(n) {
                inv.process(row);
            }
        }
    }
    let norm = 1.0 / grid.len() as f64;
    Field {
        grid,
        time: field.time,
        values: data.iter().map(|c| c.re * norm).collect(),
    }
}

fn transpose(data: &[Complex<f64>], n: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); data.len()];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = data[i * n + j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumbers_fft_order() {
        let g = GridSpec::new(1, 8.0, 16).unwrap();
        let ks = g.wavenumbers();
        let base = 2.0 * std::f64::consts::PI / 16.0;
        assert!((ks[0]).abs() < 1e-15);
        assert!((ks[1] - base).abs() < 1e-14);
        assert!((ks[15] + base).abs() < 1e-14);
    }

    #[test]
    fn multiplier_identity() {
        let g = GridSpec::new(1, 4.0, 32).unwrap();
        let f = Field::from_fn(g, 0.0, |x| (-x[0] * x[0]).exp());
        let out = apply_radial_multiplier(&f, |_| 1.0);
        for (a, b) in f.values.iter().zip(out.values.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_plane_wave_eigenfunction_2d() {
        let g = GridSpec::new(2, std::f64::consts::PI, 16).unwrap();
        // mode exp(i k x) -> cos(2x) cos(3y) is a sum of eigenmodes with |k| = sqrt(13)
        let f = Field::from_fn(g, 0.0, |x| (2.0 * x[0]).cos() * (3.0 * x[1]).cos());
        let out = apply_radial_multiplier(&f, |k| k * k);
        for (a, b) in f.values.iter().zip(out.values.iter()) {
            assert!((13.0 * a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn interpolation_periodic() {
        let g = GridSpec::new(1, 4.0, 32).unwrap();
        let f = Field::from_fn(g, 0.0, |x| x[0]);
        let dx = g.spacing();
        assert!((f.interpolate(1.0 + 0.5 * dx) - (1.0 + 0.5 * dx)).abs() < 1e-12);
    }
}
