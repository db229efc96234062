//! Frequency grids, quadrature rules, broadband mode functions and
//! Gram-Schmidt orthogonalization.
//!
//! A broadband (temporal) mode is a complex amplitude u(omega) sampled on a
//! shared positive-frequency grid; inner products are evaluated with the
//! grid's trapezoid weights. Amplitudes carry units of 1/sqrt(rad/s) so that
//! a normalized mode has unit Hilbert-Schmidt norm.

use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Uniform positive-frequency grid with composite trapezoid weights.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    omega_min: f64,
    omega_max: f64,
    samples: Vec<f64>,
    weights: Vec<f64>,
}

impl PartialEq for FrequencyGrid {
    fn eq(&self, other: &Self) -> bool {
        self.omega_min == other.omega_min
            && self.omega_max == other.omega_max
            && self.samples.len() == other.samples.len()
    }
}

impl FrequencyGrid {
    /// Uniform grid over [omega_min, omega_max] with `n_points` samples.
    pub fn uniform(omega_min: f64, omega_max: f64, n_points: usize) -> Result<Arc<Self>> {
        if !(omega_min > 0.0) {
            return Err(Error::Parameter(format!(
                "omega_min must be > 0, got {omega_min}"
            )));
        }
        if !(omega_max > omega_min) {
            return Err(Error::Parameter(format!(
                "omega_max ({omega_max}) must exceed omega_min ({omega_min})"
            )));
        }
        if n_points < 2 {
            return Err(Error::Parameter(format!(
                "n_points must be at least 2, got {n_points}"
            )));
        }
        let h = (omega_max - omega_min) / (n_points - 1) as f64;
        let samples: Vec<f64> = (0..n_points)
            .map(|i| omega_min + h * i as f64)
            .collect();
        let mut weights = vec![h; n_points];
        weights[0] = 0.5 * h;
        weights[n_points - 1] = 0.5 * h;
        Ok(Arc::new(Self {
            omega_min,
            omega_max,
            samples,
            weights,
        }))
    }

    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Grid spacing.
    pub fn step(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.len() - 1) as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature of a real sampled function.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// True if [lo, hi] lies inside the grid span.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        lo >= self.omega_min && hi <= self.omega_max
    }
}

/// Complex broadband mode amplitude on a shared grid.
#[derive(Debug, Clone)]
pub struct ModeFunction {
    grid: Arc<FrequencyGrid>,
    amp: Vec<Complex64>,
    normalized: bool,
}

impl ModeFunction {
    /// Wrap raw amplitudes; the `normalized` flag is recomputed from the data.
    pub fn from_amplitudes(grid: Arc<FrequencyGrid>, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != grid.len() {
            return Err(Error::Shape(format!(
                "amplitude length {} does not match grid length {}",
                amp.len(),
                grid.len()
            )));
        }
        let mut mode = Self {
            grid,
            amp,
            normalized: false,
        };
        mode.normalized = (mode.norm() - 1.0).abs() < 1e-10;
        Ok(mode)
    }

    /// The all-zero mode (placeholder for dropped Gram-Schmidt directions).
    pub fn zero(grid: Arc<FrequencyGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            amp: vec![Complex64::new(0.0, 0.0); n],
            normalized: false,
        }
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        let mut acc = 0.0;
        for (w, a) in self.grid.weights().iter().zip(&self.amp) {
            acc += w * a.norm_sqr();
        }
        acc.sqrt()
    }

    /// Rescale to unit norm on the grid. Errors on the zero mode.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::Parameter(
                "cannot normalize a zero mode".to_string(),
            ));
        }
        let inv = 1.0 / n;
        for a in &mut self.amp {
            *a *= inv;
        }
        self.normalized = true;
        Ok(())
    }

    /// Linear combination self + c * other (same grid required).
    pub fn axpy(&mut self, c: Complex64, other: &ModeFunction) -> Result<()> {
        check_same_grid(self, other)?;
        for (a, b) in self.amp.iter_mut().zip(&other.amp) {
            *a += c * b;
        }
        self.normalized = false;
        Ok(())
    }

    /// Scale all amplitudes by `c`.
    pub fn scale(&mut self, c: Complex64) {
        for a in &mut self.amp {
            *a *= c;
        }
        self.normalized = false;
    }

    /// Write as CSV with columns `omega_rad_per_s, re_amp, im_amp`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "omega_rad_per_s,re_amp,im_amp")?;
        for (omega, a) in self.grid.samples().iter().zip(&self.amp) {
            writeln!(w, "{:e},{:e},{:e}", omega, a.re, a.im)?;
        }
        Ok(())
    }

    /// Read a mode written by [`ModeFunction::write_csv`]. The grid is
    /// reconstructed from the frequency column, which must be uniform.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty mode CSV".to_string()))??;
        if header.trim() != "omega_rad_per_s,re_amp,im_amp" {
            return Err(Error::Format(format!(
                "unexpected mode CSV header: {header}"
            )));
        }
        let mut omegas = Vec::new();
        let mut amp = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut field = |name: &str| -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::Format(format!("row {i}: missing {name}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("row {i}: bad {name}: {e}")))
            };
            omegas.push(field("omega_rad_per_s")?);
            let re = field("re_amp")?;
            let im = field("im_amp")?;
            amp.push(Complex64::new(re, im));
        }
        if omegas.len() < 2 {
            return Err(Error::Format("mode CSV needs at least two rows".to_string()));
        }
        let n = omegas.len();
        let grid = FrequencyGrid::uniform(omegas[0], omegas[n - 1], n)?;
        let h = grid.step();
        for (read, expect) in omegas.iter().zip(grid.samples()) {
            if (read - expect).abs() > 1e-6 * h {
                return Err(Error::Format(
                    "mode CSV frequency column is not a uniform grid".to_string(),
                ));
            }
        }
        Self::from_amplitudes(grid, amp)
    }
}

fn check_same_grid(u: &ModeFunction, v: &ModeFunction) -> Result<()> {
    if Arc::ptr_eq(&u.grid, &v.grid) || u.grid == v.grid {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Hilbert-Schmidt inner product <u|v> = integral of u* v over the grid.
pub fn inner_product(u: &ModeFunction, v: &ModeFunction) -> Result<Complex64> {
    check_same_grid(u, v)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for ((w, a), b) in u.grid.weights().iter().zip(&u.amp).zip(&v.amp) {
        acc += w * a.conj() * b;
    }
    Ok(acc)
}

/// Normalized Gaussian spectral profile centered at `center`.
///
/// The amplitude is exp(-(omega - center)^2 / (4 width^2)), so `width` is
/// the standard deviation of the intensity |u|^2. Normalization is exact
/// under the grid quadrature. Truncation by the grid edges (coverage of
/// less than center +- 5 width) is reported by [`gaussian_is_truncated`].
pub fn gaussian_mode(center: f64, width: f64, grid: &Arc<FrequencyGrid>) -> Result<ModeFunction> {
    if !(width > 0.0) {
        return Err(Error::Parameter(format!(
            "gaussian width must be > 0, got {width}"
        )));
    }
    if !(center > 0.0) {
        return Err(Error::Parameter(format!(
            "gaussian center must be > 0, got {center}"
        )));
    }
    let inv = 1.0 / (4.0 * width * width);
    let amp: Vec<Complex64> = grid
        .samples()
        .iter()
        .map(|&omega| {
            let d = omega - center;
            Complex64::new((-d * d * inv).exp(), 0.0)
        })
        .collect();
    let mut mode = ModeFunction::from_amplitudes(grid.clone(), amp)?;
    mode.normalize()?;
    Ok(mode)
}

/// True if the grid fails to cover center +- 5 width (truncation warning).
pub fn gaussian_is_truncated(center: f64, width: f64, grid: &FrequencyGrid) -> bool {
    !grid.covers(center - 5.0 * width, center + 5.0 * width)
}

/// Result of [`gram_schmidt`]: an orthonormal basis and the lower-triangular
/// expansion of the seeds in that basis.
#[derive(Debug, Clone)]
pub struct GramSchmidt {
    /// Orthonormal modes; the first `preserved` entries are the inputs.
    pub basis: Vec<ModeFunction>,
    /// `coeffs[(i, j)] = <basis_j | seed_i>`; `coeffs[(i, i)]` is the
    /// residual norm of seed i. Each seed reconstructs as
    /// `sum_j coeffs[(i, j)] * basis_j`.
    pub coeffs: DMatrix<Complex64>,
}

/// Gram-Schmidt orthogonalization preserving the first `preserved` modes.
///
/// The first `preserved` seeds must already be orthonormal; the remaining
/// seeds are orthogonalized against everything before them. A residual norm
/// below 1e-8 of the seed norm is reported as rank deficiency.
pub fn gram_schmidt(seed: &[ModeFunction], preserved: usize) -> Result<GramSchmidt> {
    if preserved > seed.len() {
        return Err(Error::Parameter(format!(
            "preserved count {preserved} exceeds seed count {}",
            seed.len()
        )));
    }
    let n = seed.len();
    for pair in seed.windows(2) {
        check_same_grid(&pair[0], &pair[1])?;
    }
    for (i, u) in seed.iter().take(preserved).enumerate() {
        for (j, v) in seed.iter().take(preserved).enumerate() {
            let g = inner_product(u, v)?;
            let target = if i == j { 1.0 } else { 0.0 };
            if (g - target).norm() > 1e-6 {
                return Err(Error::Contract(format!(
                    "preserved modes are not orthonormal: <{i}|{j}> = {g}"
                )));
            }
        }
    }

    let mut basis: Vec<ModeFunction> = seed.iter().take(preserved).cloned().collect();
    let mut coeffs = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..preserved {
        coeffs[(i, i)] = Complex64::new(1.0, 0.0);
    }

    for i in preserved..n {
        let seed_norm = seed[i].norm();
        let mut residual = seed[i].clone();
        // Two rounds of projection for numerical orthogonality.
        for _round in 0..2 {
            for (j, b) in basis.iter().enumerate() {
                let c = inner_product(b, &residual)?;
                residual.axpy(-c, b)?;
                coeffs[(i, j)] += c;
            }
        }
        let r = residual.norm();
        if r < 1e-8 * seed_norm.max(1e-300) {
            return Err(Error::RankDeficient {
                index: i,
                residual: r,
            });
        }
        residual.normalize()?;
        coeffs[(i, basis.len())] = Complex64::new(r, 0.0);
        basis.push(residual);
    }

    Ok(GramSchmidt { basis, coeffs })
}
