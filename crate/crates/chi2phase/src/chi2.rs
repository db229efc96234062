//! Physical model of the THz-to-optical chi^(2) interaction: dispersion,
//! phase matching, the classical pump spectrum, the squeezing kernel J and
//! beam-splitting kernel K, and the first-order-unitary reduction of the
//! interaction to an effective single-output-mode map.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::spectral::{gaussian_is_truncated, inner_product, FrequencyGrid, ModeFunction};
use crate::units::{fwhm_to_sigma, C_LIGHT, EPSILON_0, HBAR};
use crate::{Error, Result};

/// Refractive-index model. Frequencies in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub enum DispersionModel {
    /// Frequency-independent index.
    Constant { n0: f64 },
    /// Single-pole Sellmeier n^2 = a0 + b0 l^2 / (l^2 - c0) (l in um) for
    /// the optical band, a constant index for the THz band, and a smooth
    /// blend between them. Evaluation outside [valid_min, valid_max] is an
    /// error, not an extrapolation.
    Blend {
        a0: f64,
        b0: f64,
        /// Pole position in um^2.
        c0_um2: f64,
        /// THz-band (phonon-resonance region) index.
        n_thz: f64,
        /// Blend window [rad/s]: pure THz index below, pure Sellmeier above.
        blend_lo: f64,
        blend_hi: f64,
        /// Validity window [rad/s].
        valid_min: f64,
        valid_max: f64,
    },
}

impl DispersionModel {
    /// ZnTe-like defaults: Sellmeier 4.27 + 3.01 l^2/(l^2 - 0.142) in the
    /// optical band, n = 3.17 in the phonon-resonance region below 10 THz,
    /// blended over 10-30 THz where the Sellmeier fit loses validity.
    pub fn znte() -> Self {
        DispersionModel::Blend {
            a0: 4.27,
            b0: 3.01,
            c0_um2: 0.142,
            n_thz: 3.17,
            blend_lo: crate::units::thz_to_angular(10.0),
            blend_hi: crate::units::thz_to_angular(30.0),
            valid_min: crate::units::thz_to_angular(1e-3),
            valid_max: crate::units::thz_to_angular(740.0),
        }
    }
}

/// Refractive index n(omega) > 1, continuous in omega.
pub fn refractive_index(omega: f64, model: &DispersionModel) -> Result<f64> {
    match model {
        DispersionModel::Constant { n0 } => Ok(*n0),
        DispersionModel::Blend {
            a0,
            b0,
            c0_um2,
            n_thz,
            blend_lo,
            blend_hi,
            valid_min,
            valid_max,
        } => {
            if omega < *valid_min || omega > *valid_max {
                return Err(Error::DispersionRange {
                    omega,
                    min: *valid_min,
                    max: *valid_max,
                });
            }
            let sell = |w: f64| -> f64 {
                let lambda_um = 2.0 * std::f64::consts::PI * C_LIGHT / w * 1e6;
                let l2 = lambda_um * lambda_um;
                (a0 + b0 * l2 / (l2 - c0_um2)).sqrt()
            };
            if omega <= *blend_lo {
                Ok(*n_thz)
            } else if omega >= *blend_hi {
                Ok(sell(omega))
            } else {
                let t = (omega - blend_lo) / (blend_hi - blend_lo);
                let s = t * t * (3.0 - 2.0 * t);
                Ok(n_thz + s * (sell(omega) - n_thz))
            }
        }
    }
}

/// Wavenumber k(omega) = omega n(|omega|) / c, odd in omega.
pub fn wavenumber(omega: f64, model: &DispersionModel) -> Result<f64> {
    if omega == 0.0 {
        return Ok(0.0);
    }
    Ok(omega * refractive_index(omega.abs(), model)? / C_LIGHT)
}

/// Wave-vector mismatch dk(a, b) = k(a + b) - k(a) - k(b).
pub fn delta_k(a: f64, b: f64, model: &DispersionModel) -> Result<f64> {
    Ok(wavenumber(a + b, model)? - wavenumber(a, model)? - wavenumber(b, model)?)
}

/// Nonlinear crystal parameters.
#[derive(Debug, Clone)]
pub struct CrystalParams {
    /// Crystal length [m].
    pub length: f64,
    /// Electro-optic coefficient r41 [SI].
    pub r41: f64,
    /// Beam-waist area [m^2].
    pub beam_area: f64,
    /// Coupling density in lambda-hat, overriding the default
    /// eps0 A n^4(omega_p) r41 / 2 when set.
    pub coupling_lambda: Option<f64>,
    pub dispersion: DispersionModel,
}

impl CrystalParams {
    /// Thin ZnTe crystal of the reference setup: L = 20 um, r41 = 4e-12,
    /// A = pi (3 um)^2.
    pub fn default_znte() -> Self {
        Self {
            length: 20e-6,
            r41: 4e-12,
            beam_area: std::f64::consts::PI * 9e-12,
            coupling_lambda: None,
            dispersion: DispersionModel::znte(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::Parameter("crystal length must be > 0".to_string()));
        }
        if !(self.beam_area > 0.0) {
            return Err(Error::Parameter("beam area must be > 0".to_string()));
        }
        Ok(())
    }

    /// The coupling entering lambda-hat. The electro-optic coefficient is
    /// converted through chi2 = n^4 r41 / 2 and scaled by eps0 A to the
    /// susceptibility density of the interaction volume.
    pub fn resolve_coupling(&self, omega_p: f64) -> Result<f64> {
        if let Some(l) = self.coupling_lambda {
            return Ok(l);
        }
        let n_p = refractive_index(omega_p, &self.dispersion)?;
        Ok(EPSILON_0 * self.beam_area * n_p.powi(4) * self.r41 / 2.0)
    }
}

/// Classical coherent pump pulse driving the interaction.
#[derive(Debug, Clone)]
pub struct PumpPulse {
    /// Dimensionless coherent amplitude; |alpha|^2 is the pulse photon
    /// number.
    pub alpha: Complex64,
    /// Central angular frequency [rad/s].
    pub omega_p: f64,
    /// Intensity FWHM bandwidth [rad/s].
    pub delta_omega_p: f64,
    /// Compact-support cutoff in units of the intensity standard deviation.
    pub support_sigmas: f64,
}

impl PumpPulse {
    pub fn new(alpha: Complex64, omega_p: f64, delta_omega_p: f64) -> Self {
        Self {
            alpha,
            omega_p,
            delta_omega_p,
            support_sigmas: 8.0,
        }
    }

    pub fn sigma(&self) -> f64 {
        fwhm_to_sigma(self.delta_omega_p)
    }

    /// Unnormalized spectral profile; identically zero for omega <= 0 and
    /// outside the compact support window.
    fn raw_profile(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        let sigma = self.sigma();
        let d = omega - self.omega_p;
        if d.abs() > self.support_sigmas * sigma {
            return 0.0;
        }
        (-d * d / (4.0 * sigma * sigma)).exp()
    }
}

/// The squeezing kernel J and beam-splitting kernel K on a grid.
///
/// Row index = Omega sample, column index = omega sample; entries carry
/// units of 1/(rad/s).
#[derive(Debug, Clone)]
pub struct InteractionKernels {
    grid: Arc<FrequencyGrid>,
    j: DMatrix<Complex64>,
    k: DMatrix<Complex64>,
}

impl InteractionKernels {
    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn j(&self) -> &DMatrix<Complex64> {
        &self.j
    }

    pub fn k(&self) -> &DMatrix<Complex64> {
        &self.k
    }

    /// f_K(Omega) = -int K*(Omega, omega) v(omega) d omega.
    pub fn beam_splitting_action(&self, v: &ModeFunction) -> Result<ModeFunction> {
        self.kernel_action(&self.k, v, false, true)
    }

    /// f_J(Omega) = int J*(Omega, omega) v*(omega) d omega.
    pub fn squeezing_action(&self, v: &ModeFunction) -> Result<ModeFunction> {
        self.kernel_action(&self.j, v, true, false)
    }

    fn kernel_action(
        &self,
        mat: &DMatrix<Complex64>,
        v: &ModeFunction,
        conj_v: bool,
        negate: bool,
    ) -> Result<ModeFunction> {
        if !(Arc::ptr_eq(v.grid(), &self.grid) || **v.grid() == *self.grid) {
            return Err(Error::GridMismatch);
        }
        let weights = self.grid.weights();
        let amps = v.amplitudes();
        let n = self.grid.len();
        let out: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for jcol in 0..n {
                    let vj = if conj_v { amps[jcol].conj() } else { amps[jcol] };
                    acc += mat[(i, jcol)].conj() * vj * weights[jcol];
                }
                if negate {
                    -acc
                } else {
                    acc
                }
            })
            .collect();
        ModeFunction::from_amplitudes(self.grid.clone(), out)
    }

    /// Dense CSV dump (rows = Omega samples) with re,im column pairs.
    pub fn write_kernel_csv<W: Write>(&self, which: KernelKind, mut w: W) -> Result<()> {
        let mat = match which {
            KernelKind::Squeezing => &self.j,
            KernelKind::BeamSplitting => &self.k,
        };
        writeln!(w, "# rows: Omega samples, cols: omega samples, entries re,im")?;
        for i in 0..mat.nrows() {
            for jcol in 0..mat.ncols() {
                if jcol > 0 {
                    write!(w, ",")?;
                }
                let z = mat[(i, jcol)];
                write!(w, "{:e},{:e}", z.re, z.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Squeezing,
    BeamSplitting,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Largest entry modulus of a complex matrix.
pub fn max_modulus(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Assemble J and K on the grid.
///
/// J(Omega, omega) couples through the pump spectrum at omega + Omega and
/// vanishes exactly outside the pump support; K exchanges a pump photon at
/// |omega - Omega| with phase mismatch dk(-Omega, omega) and a vanishing
/// diagonal. Rows are computed independently in parallel.
pub fn build_kernels(
    crystal: &CrystalParams,
    pump: &PumpPulse,
    grid: &Arc<FrequencyGrid>,
) -> Result<InteractionKernels> {
    crystal.validate()?;
    if !(pump.omega_p > 0.0) || !(pump.delta_omega_p > 0.0) {
        return Err(Error::Parameter(
            "pump center and bandwidth must be > 0".to_string(),
        ));
    }
    let sigma = pump.sigma();
    if pump.omega_p > grid.omega_max() || pump.omega_p + 2.0 * sigma > grid.omega_max() {
        return Err(Error::Coverage(format!(
            "grid top {:.3e} rad/s does not cover the pump band around {:.3e} rad/s",
            grid.omega_max(),
            pump.omega_p
        )));
    }

    let coupling = crystal.resolve_coupling(pump.omega_p)?;
    let length = crystal.length;
    let lam_hat = move |k: f64| {
        coupling * length / (2.0 * std::f64::consts::PI).sqrt() * sinc(k * length / 2.0)
    };

    // Pump profile rescaled to unit quadrature norm on the grid.
    let peak = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
    let raw: Vec<f64> = grid.samples().iter().map(|&w| pump.raw_profile(w)).collect();
    let norm = {
        let mut acc = 0.0;
        for (w, r) in grid.weights().iter().zip(&raw) {
            acc += w * (peak * r) * (peak * r);
        }
        acc.sqrt()
    };
    if norm < 1e-300 {
        return Err(Error::Coverage(
            "pump spectrum has no support on the grid".to_string(),
        ));
    }
    let amp_scale = peak / norm;
    let pump_owned = pump.clone();
    let profile = move |omega: f64| amp_scale * pump_owned.raw_profile(omega);

    let model = crystal.dispersion.clone();
    let n = grid.len();
    let samples = grid.samples().to_vec();
    let mut n_of: Vec<f64> = Vec::with_capacity(n);
    for &w in &samples {
        n_of.push(refractive_index(w, &model)?);
    }
    let k_of: Vec<f64> = samples
        .iter()
        .zip(&n_of)
        .map(|(&w, &nv)| w * nv / C_LIGHT)
        .collect();

    let prefactor = (2.0 / HBAR)
        * (2.0 * std::f64::consts::PI).powf(1.5)
        * (HBAR / (4.0 * std::f64::consts::PI * EPSILON_0 * C_LIGHT * crystal.beam_area))
            .powf(1.5);
    let alpha = pump.alpha;

    let rows: Vec<Result<(Vec<Complex64>, Vec<Complex64>)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let omega_cap = samples[i]; // Omega, the row frequency
            let mut j_row = vec![Complex64::new(0.0, 0.0); n];
            let mut k_row = vec![Complex64::new(0.0, 0.0); n];
            for col in 0..n {
                let omega = samples[col];
                let shared = prefactor * (omega * omega_cap / (n_of[col] * n_of[i])).sqrt();

                // Squeezing kernel: pump photon at omega + Omega.
                let sum = omega_cap + omega;
                let gp = profile(sum);
                if gp != 0.0 {
                    let n_sum = refractive_index(sum, &model)?;
                    let k_sum = sum * n_sum / C_LIGHT;
                    let dk = k_sum - k_of[i] - k_of[col];
                    let scale = shared * (sum / n_sum).sqrt() * lam_hat(dk) * gp;
                    j_row[col] = alpha * scale;
                }

                // Beam-splitting kernel: pump photon at |omega - Omega|.
                if col != i {
                    let diff = omega_cap - omega; // Omega - omega
                    let pf = alpha * profile(diff) + alpha.conj() * profile(-diff);
                    if pf != Complex64::new(0.0, 0.0) {
                        let ad = diff.abs();
                        let n_d = refractive_index(ad, &model)?;
                        // dk(-Omega, omega) = k(omega - Omega) + k(Omega) - k(omega)
                        let dk = -diff.signum() * ad * n_d / C_LIGHT + k_of[i] - k_of[col];
                        let scale = shared * (ad / n_d).sqrt() * lam_hat(dk);
                        k_row[col] = pf * scale;
                    }
                }
            }
            Ok((j_row, k_row))
        })
        .collect();

    let mut j = DMatrix::zeros(n, n);
    let mut k = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        let (j_row, k_row) = row?;
        for col in 0..n {
            j[(i, col)] = j_row[col];
            k[(i, col)] = k_row[col];
        }
    }

    Ok(InteractionKernels {
        grid: grid.clone(),
        j,
        k,
    })
}

/// Interaction regime of the first-order unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// theta_K > theta_J: trigonometric (mu, nu), photon exchange dominates.
    BeamSplitting,
    /// theta_K < theta_J: hyperbolic (mu, nu), pair creation dominates.
    Squeezing,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::BeamSplitting => write!(f, "beam_splitting"),
            Regime::Squeezing => write!(f, "squeezing"),
        }
    }
}

/// First-order-unitary reduction of the interaction for one output mode.
#[derive(Debug, Clone)]
pub struct FirstOrderMap {
    /// Unnormalized beam-splitting partner mode, orthogonal to the output
    /// mode by construction.
    pub f_k: ModeFunction,
    /// Unnormalized squeezing partner mode, orthogonal to the output mode.
    pub f_j: ModeFunction,
    pub theta_k: f64,
    pub theta_j: f64,
    /// theta = sqrt(|theta_K^2 - theta_J^2|).
    pub theta: f64,
    pub mu: f64,
    pub nu: f64,
    pub regime: Regime,
    /// Normalized effective input mode of the beam-splitting channel.
    pub f: ModeFunction,
    /// Normalized effective input mode of the squeezing channel (the zero
    /// mode when xi = 0).
    pub g: ModeFunction,
    pub zeta: f64,
    pub xi: f64,
}

impl FirstOrderMap {
    /// True when the map is the identity (no interaction).
    pub fn is_identity(&self) -> bool {
        self.theta_k == 0.0 && self.theta_j == 0.0
    }

    /// nu / theta, finite in the theta -> 0 limit.
    pub fn nu_over_theta(&self) -> f64 {
        nu_over_theta(self.theta, self.regime)
    }
}

fn nu_over_theta(theta: f64, regime: Regime) -> f64 {
    if theta < 1e-8 {
        match regime {
            Regime::BeamSplitting => 1.0 - theta * theta / 6.0,
            Regime::Squeezing => 1.0 + theta * theta / 6.0,
        }
    } else {
        match regime {
            Regime::BeamSplitting => theta.sin() / theta,
            Regime::Squeezing => theta.sinh() / theta,
        }
    }
}

/// Build the first-order map for output mode `v` from the kernels.
///
/// The derivation assumes the partner modes live in the low-frequency
/// input band, disjoint from the output mode: frequencies above
/// `partner_cut` (notably the sum-frequency band at omega_out + omega_p
/// reached by the beam-splitting kernel) are excluded, and the residual
/// quadrature overlap with `v` (pump-tail leakage) is projected out, so
/// the commutation identities hold exactly.
pub fn first_order_map(
    v: &ModeFunction,
    kernels: &InteractionKernels,
    partner_cut: f64,
) -> Result<FirstOrderMap> {
    if !v.is_normalized() {
        return Err(Error::Contract(
            "first_order_map requires a normalized output mode".to_string(),
        ));
    }
    let mut f_k = kernels.beam_splitting_action(v)?;
    let mut f_j = kernels.squeezing_action(v)?;
    restrict_band(&mut f_k, partner_cut);
    restrict_band(&mut f_j, partner_cut);
    let ck = inner_product(v, &f_k)?;
    f_k.axpy(-ck, v)?;
    let cj = inner_product(v, &f_j)?;
    f_j.axpy(-cj, v)?;
    first_order_map_from_components(v, f_k, f_j)
}

fn restrict_band(mode: &mut ModeFunction, omega_max: f64) {
    let grid = mode.grid().clone();
    let zero = Complex64::new(0.0, 0.0);
    let cut: Vec<Complex64> = grid
        .samples()
        .iter()
        .zip(mode.amplitudes())
        .map(|(&w, &a)| if w > omega_max { zero } else { a })
        .collect();
    *mode = ModeFunction::from_amplitudes(grid, cut).expect("same grid");
}

/// Assemble the map from precomputed partner modes (both must already be
/// orthogonal to `v`).
pub fn first_order_map_from_components(
    v: &ModeFunction,
    f_k: ModeFunction,
    f_j: ModeFunction,
) -> Result<FirstOrderMap> {
    let theta_k = f_k.norm();
    let theta_j = f_j.norm();

    if theta_k < 1e-30 && theta_j < 1e-30 {
        // No interaction: identity map, squeezing branch at theta = 0.
        return Ok(FirstOrderMap {
            f_k,
            f_j,
            theta_k: 0.0,
            theta_j: 0.0,
            theta: 0.0,
            mu: 1.0,
            nu: 0.0,
            regime: Regime::Squeezing,
            f: v.clone(),
            g: ModeFunction::zero(v.grid().clone()),
            zeta: 1.0,
            xi: 0.0,
        });
    }
    let spread = (theta_k - theta_j).abs();
    if spread <= 1e-12 * theta_k.max(theta_j) {
        return Err(Error::DegenerateRegime { theta_k, theta_j });
    }

    let regime = if theta_k > theta_j {
        Regime::BeamSplitting
    } else {
        Regime::Squeezing
    };
    let theta = (theta_k * theta_k - theta_j * theta_j).abs().sqrt();
    let (mu, nu) = match regime {
        Regime::BeamSplitting => (theta.cos(), theta.sin()),
        Regime::Squeezing => (theta.cosh(), theta.sinh()),
    };
    let ratio = nu_over_theta(theta, regime);

    // f = [mu v + (nu/theta) f_K] / zeta ; g = (nu/theta) f_J / xi.
    let mut f = v.clone();
    f.scale(Complex64::new(mu, 0.0));
    f.axpy(Complex64::new(ratio, 0.0), &f_k)?;
    let vartheta_k = theta_k / theta;
    let vartheta_j = theta_j / theta;
    let zeta = (mu * mu + nu * nu * vartheta_k * vartheta_k).sqrt();
    let xi = nu.abs() * vartheta_j;
    f.scale(Complex64::new(1.0 / zeta, 0.0));

    let g = if xi < 1e-14 {
        ModeFunction::zero(v.grid().clone())
    } else {
        let mut g = f_j.clone();
        g.scale(Complex64::new(ratio / xi, 0.0));
        g
    };

    Ok(FirstOrderMap {
        f_k,
        f_j,
        theta_k,
        theta_j,
        theta,
        mu,
        nu,
        regime,
        f,
        g,
        zeta,
        xi,
    })
}

/// Scale precomputed unit-amplitude partner modes by a real pump amplitude
/// and assemble the map. Valid because both kernels are linear in a real
/// amplitude.
pub fn first_order_map_scaled(
    v: &ModeFunction,
    f_k_unit: &ModeFunction,
    f_j_unit: &ModeFunction,
    alpha: f64,
) -> Result<FirstOrderMap> {
    let mut f_k = f_k_unit.clone();
    f_k.scale(Complex64::new(alpha, 0.0));
    let mut f_j = f_j_unit.clone();
    f_j.scale(Complex64::new(alpha, 0.0));
    first_order_map_from_components(v, f_k, f_j)
}

/// True when a Gaussian mode of the given center and width is clipped by
/// the grid edges.
pub fn mode_truncated(center: f64, width: f64, grid: &FrequencyGrid) -> bool {
    gaussian_is_truncated(center, width, grid)
}
