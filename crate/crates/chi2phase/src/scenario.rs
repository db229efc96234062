//! Wiring of the two reference experiments: an n-photon Fock state in one
//! THz broadband mode up-converted to one optical mode, and a two-mode
//! squeezed THz pulse reduced to one optical mode through the generalized
//! Bloch-Messiah decomposition. Produces the per-point sweep records and
//! Wigner-field bundles consumed by the batch CLI and the acceptance suite.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::chi2::{
    build_kernels, first_order_map, first_order_map_scaled, CrystalParams, FirstOrderMap,
    InteractionKernels, PumpPulse, Regime,
};
use crate::phasespace::{
    assemble_quadrature_map, fock_output_wigner, fock_wigner, gaussian_wigner_eval,
    propagate_gaussian, rescaled_output_cov, smoothing_decomposition, BogoliubovKernels,
    GaussianState, QuadratureMap, WignerGrid, WignerWindow,
};
use crate::spectral::{gaussian_mode, gram_schmidt, FrequencyGrid, ModeFunction};
use crate::symplectic::{gbmd, symplectic_eigenvalues, GbmdResult};
use crate::units::fwhm_to_sigma;
use crate::{Error, Result};

/// Physical parameters of the up-conversion setup, SI units internally.
#[derive(Debug, Clone, PartialEq)]
pub struct SetupParams {
    pub grid_min: f64,
    pub grid_max: f64,
    pub n_points: usize,
    pub crystal: CrystalParams,
    /// Pump center [rad/s] and intensity-FWHM bandwidth [rad/s].
    pub pump_center: f64,
    pub pump_fwhm: f64,
    /// First input mode: center and width [rad/s]. Widths follow the
    /// gaussian_mode convention (standard deviation of the intensity).
    pub input_center: f64,
    pub input_width: f64,
    /// Seed center of the second input mode (two-mode experiment).
    pub second_input_center: f64,
    /// Output mode width [rad/s], gaussian_mode convention.
    pub output_width: f64,
    /// Upper edge of the band hosting the effective partner modes of the
    /// first-order map [rad/s].
    pub partner_cut: f64,
}

impl PartialEq for CrystalParams {
    fn eq(&self, other: &Self) -> bool {
        self.length == other.length
            && self.r41 == other.r41
            && self.beam_area == other.beam_area
            && self.coupling_lambda == other.coupling_lambda
            && self.dispersion == other.dispersion
    }
}

impl Default for SetupParams {
    /// The reference parameter set: 20 um ZnTe crystal, pump 200 THz with
    /// 118 THz intensity-FWHM bandwidth, input mode at 27 THz with a
    /// 35 THz amplitude spread, second input seed at 40 THz, output
    /// bandwidth 24 THz intensity FWHM, partner band below 130 THz, grid
    /// 0.1-500 THz with 2048 points.
    fn default() -> Self {
        use crate::units::thz_to_angular as thz;
        Self {
            grid_min: thz(0.1),
            grid_max: thz(500.0),
            n_points: 2048,
            crystal: CrystalParams::default_znte(),
            pump_center: thz(200.0),
            pump_fwhm: thz(118.0),
            input_center: thz(27.0),
            // 35 THz spread of the amplitude = 35/sqrt(2) THz intensity
            // standard deviation.
            input_width: thz(35.0 / std::f64::consts::SQRT_2),
            second_input_center: thz(40.0),
            output_width: fwhm_to_sigma(thz(24.0)),
            partner_cut: thz(130.0),
        }
    }
}

/// Which experiment a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Experiment {
    /// n-photon Fock state in the first input mode, M = N = 1.
    FockSingleMode { n: usize },
    /// Two-mode squeezed vacuum (squeezing parameter r), M = 1 < N = 2.
    TwoModeSqueezed { r: f64 },
}

/// Compiled setup: grid, unit-amplitude kernels, input modes.
pub struct Setup {
    pub params: SetupParams,
    pub grid: Arc<FrequencyGrid>,
    /// Kernels built at unit pump amplitude; everything downstream scales
    /// linearly in a real amplitude.
    pub kernels_unit: InteractionKernels,
    /// Orthonormal input modes (one or two).
    pub inputs: Vec<ModeFunction>,
}

impl Setup {
    /// Build the grid, kernels and input modes for `n_inputs` in {1, 2}.
    pub fn compile(params: SetupParams, n_inputs: usize) -> Result<Setup> {
        if !(1..=2).contains(&n_inputs) {
            return Err(Error::Parameter(
                "setups support one or two input modes".to_string(),
            ));
        }
        let grid = FrequencyGrid::uniform(params.grid_min, params.grid_max, params.n_points)?;
        let pump_unit = PumpPulse::new(
            Complex64::new(1.0, 0.0),
            params.pump_center,
            params.pump_fwhm,
        );
        let kernels_unit = build_kernels(&params.crystal, &pump_unit, &grid)?;

        let u1 = gaussian_mode(params.input_center, params.input_width, &grid)?;
        let inputs = if n_inputs == 1 {
            vec![u1]
        } else {
            let u2_seed = gaussian_mode(params.second_input_center, params.input_width, &grid)?;
            let gs = gram_schmidt(&[u1, u2_seed], 1)?;
            gs.basis
        };
        Ok(Setup {
            params,
            grid,
            kernels_unit,
            inputs,
        })
    }

    /// Output mode at the given center frequency with the configured
    /// bandwidth.
    pub fn output_mode(&self, omega_out: f64) -> Result<ModeFunction> {
        gaussian_mode(omega_out, self.params.output_width, &self.grid)
    }

    /// Per-output-mode context: unit-amplitude partner modes and their
    /// interaction strengths.
    pub fn output_context(&self, omega_out: f64) -> Result<OutputContext> {
        let v = self.output_mode(omega_out)?;
        let base = first_order_map(&v, &self.kernels_unit, self.params.partner_cut)?;
        Ok(OutputContext {
            omega_out,
            theta_k_unit: base.theta_k,
            theta_j_unit: base.theta_j,
            theta_unit: base.theta,
            v,
            f_k_unit: base.f_k,
            f_j_unit: base.f_j,
        })
    }
}

/// Unit-amplitude interaction data for one output mode.
pub struct OutputContext {
    pub omega_out: f64,
    pub theta_k_unit: f64,
    pub theta_j_unit: f64,
    /// theta at unit pump amplitude; theta(alpha) = alpha * theta_unit.
    pub theta_unit: f64,
    pub v: ModeFunction,
    pub f_k_unit: ModeFunction,
    pub f_j_unit: ModeFunction,
}

impl OutputContext {
    /// First-order map at real pump amplitude `alpha`.
    pub fn map_at(&self, alpha: f64) -> Result<FirstOrderMap> {
        first_order_map_scaled(&self.v, &self.f_k_unit, &self.f_j_unit, alpha)
    }

    /// Pump amplitude at which theta reaches the target value.
    pub fn alpha_for_theta(&self, theta: f64) -> Result<f64> {
        if self.theta_unit <= 0.0 {
            return Err(Error::DegenerateRegime {
                theta_k: self.theta_k_unit,
                theta_j: self.theta_j_unit,
            });
        }
        Ok(theta / self.theta_unit)
    }
}

/// Row status of a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFlag {
    Ok,
    /// theta_K = theta_J within tolerance; first-order map undefined.
    DegenerateTheta,
    /// Singular effective core (no inverse scaling available).
    SingularCore,
    /// An entropy was requested of an unphysical covariance.
    UnphysicalEntropy,
}

impl std::fmt::Display for PointFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PointFlag::Ok => "ok",
            PointFlag::DegenerateTheta => "degenerate_theta",
            PointFlag::SingularCore => "singular_core",
            PointFlag::UnphysicalEntropy => "unphysical_entropy",
        };
        write!(f, "{s}")
    }
}

/// One sweep point. Quantities that do not apply to the experiment or were
/// unavailable at a flagged point are NaN.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub omega_out: f64,
    pub alpha: f64,
    pub flag: PointFlag,
    pub theta_k: f64,
    pub theta_j: f64,
    pub theta: f64,
    pub regime: Option<Regime>,
    /// Diagonal of A (single mode) or of the GBMD core (two-mode).
    pub a11: f64,
    pub a22: f64,
    pub covb11: f64,
    pub covb22: f64,
    /// Smoothing singular values (single-mode experiment).
    pub sigma_x: f64,
    pub sigma_p: f64,
    /// Rows 1 and N+1 of S_R (two-mode experiment): the effective
    /// quadrature composition.
    pub s_r: Option<[f64; 8]>,
    pub entropy_in_s: f64,
    pub entropy_out: f64,
    pub entropy_rescaled: f64,
    /// Smallest symplectic eigenvalue of the propagated output state.
    pub nu_min: f64,
}

impl SweepRecord {
    fn flagged(omega_out: f64, alpha: f64, flag: PointFlag, theta_k: f64, theta_j: f64) -> Self {
        SweepRecord {
            omega_out,
            alpha,
            flag,
            theta_k,
            theta_j,
            theta: f64::NAN,
            regime: None,
            a11: f64::NAN,
            a22: f64::NAN,
            covb11: f64::NAN,
            covb22: f64::NAN,
            sigma_x: f64::NAN,
            sigma_p: f64::NAN,
            s_r: None,
            entropy_in_s: f64::NAN,
            entropy_out: f64::NAN,
            entropy_rescaled: f64::NAN,
            nu_min: f64::NAN,
        }
    }
}

/// Quadrature map plus GBMD at one sweep point.
pub struct PointMaps {
    pub map: QuadratureMap,
    pub gbmd: GbmdResult,
    pub first_order: FirstOrderMap,
}

/// Assemble the quadrature map and its GBMD at one point.
pub fn point_maps(setup: &Setup, ctx: &OutputContext, alpha: f64) -> Result<PointMaps> {
    let first_order = ctx.map_at(alpha)?;
    let kernels = BogoliubovKernels::FirstOrder(&first_order);
    let map = assemble_quadrature_map(&kernels, &setup.inputs, std::slice::from_ref(&ctx.v))?;
    let g = gbmd(map.a())?;
    Ok(PointMaps {
        map,
        gbmd: g,
        first_order,
    })
}

/// Evaluate one sweep point of the chosen experiment.
pub fn eval_point(
    setup: &Setup,
    ctx: &OutputContext,
    alpha: f64,
    experiment: Experiment,
) -> SweepRecord {
    let theta_k = alpha.abs() * ctx.theta_k_unit;
    let theta_j = alpha.abs() * ctx.theta_j_unit;
    let pm = match point_maps(setup, ctx, alpha) {
        Ok(pm) => pm,
        Err(Error::DegenerateRegime { .. }) => {
            return SweepRecord::flagged(
                ctx.omega_out,
                alpha,
                PointFlag::DegenerateTheta,
                theta_k,
                theta_j,
            )
        }
        Err(Error::SingularCore { .. }) | Err(Error::Degenerate { .. }) => {
            return SweepRecord::flagged(
                ctx.omega_out,
                alpha,
                PointFlag::SingularCore,
                theta_k,
                theta_j,
            )
        }
        Err(e) => panic!("sweep point failed: {e}"),
    };
    let cov_b = pm.map.cov_b();
    let mut rec = SweepRecord {
        omega_out: ctx.omega_out,
        alpha,
        flag: PointFlag::Ok,
        theta_k: pm.first_order.theta_k,
        theta_j: pm.first_order.theta_j,
        theta: pm.first_order.theta,
        regime: Some(pm.first_order.regime),
        a11: f64::NAN,
        a22: f64::NAN,
        covb11: cov_b[(0, 0)],
        covb22: cov_b[(1, 1)],
        sigma_x: f64::NAN,
        sigma_p: f64::NAN,
        s_r: None,
        entropy_in_s: f64::NAN,
        entropy_out: f64::NAN,
        entropy_rescaled: f64::NAN,
        nu_min: f64::NAN,
    };

    match experiment {
        Experiment::FockSingleMode { .. } => {
            let a = pm.map.a();
            rec.a11 = a[(0, 0)];
            rec.a22 = a[(1, 1)];
            match smoothing_decomposition(a, &cov_b) {
                Ok(sd) => {
                    rec.sigma_x = sd.sigma_x;
                    rec.sigma_p = sd.sigma_p;
                }
                Err(_) => {
                    rec.flag = PointFlag::SingularCore;
                }
            }
            // Vacuum input physicality reference.
            if let Ok(prop) =
                propagate_gaussian(&GaussianState::vacuum(1), &pm.map, &pm.gbmd)
            {
                if let Ok(nus) = symplectic_eigenvalues(&prop.state.cov) {
                    rec.nu_min = nus.into_iter().fold(f64::INFINITY, f64::min);
                }
            }
        }
        Experiment::TwoModeSqueezed { r } => {
            rec.a11 = pm.gbmd.core[(0, 0)];
            rec.a22 = pm.gbmd.core[(1, 1)];
            let s = &pm.gbmd.s;
            rec.s_r = Some([
                s[(0, 0)],
                s[(0, 1)],
                s[(0, 2)],
                s[(0, 3)],
                s[(2, 0)],
                s[(2, 1)],
                s[(2, 2)],
                s[(2, 3)],
            ]);
            let state_in = GaussianState::two_mode_squeezed(r);
            match propagate_gaussian(&state_in, &pm.map, &pm.gbmd) {
                Ok(prop) => {
                    if let Ok(nus) = symplectic_eigenvalues(&prop.state.cov) {
                        rec.nu_min = nus.into_iter().fold(f64::INFINITY, f64::min);
                    }
                    rec.entropy_in_s = entropy_or_nan(&prop.cov_in_s, &mut rec.flag);
                    rec.entropy_out = entropy_or_nan(&prop.state.cov, &mut rec.flag);
                    match rescaled_output_cov(&prop.cov_in_s, &cov_b, &pm.gbmd) {
                        Ok(resc) => {
                            rec.entropy_rescaled = entropy_or_nan(&resc, &mut rec.flag);
                        }
                        Err(_) => rec.flag = PointFlag::SingularCore,
                    }
                }
                Err(_) => rec.flag = PointFlag::SingularCore,
            }
        }
    }
    rec
}

fn entropy_or_nan(cov: &DMatrix<f64>, flag: &mut PointFlag) -> f64 {
    match crate::symplectic::von_neumann_entropy(cov) {
        Ok(s) => s,
        Err(_) => {
            if *flag == PointFlag::Ok {
                *flag = PointFlag::UnphysicalEntropy;
            }
            f64::NAN
        }
    }
}

/// Rectangular sweep domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub omega_outs: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl SweepGrid {
    /// Inclusive ranges with fixed steps.
    pub fn from_ranges(
        omega_lo: f64,
        omega_hi: f64,
        omega_step: f64,
        alpha_lo: f64,
        alpha_hi: f64,
        alpha_step: f64,
    ) -> Result<Self> {
        if !(omega_step > 0.0) || !(alpha_step > 0.0) {
            return Err(Error::Parameter("sweep steps must be > 0".to_string()));
        }
        if omega_hi < omega_lo || alpha_hi < alpha_lo {
            return Err(Error::Parameter("sweep ranges must be nonempty".to_string()));
        }
        let build = |lo: f64, hi: f64, step: f64| -> Vec<f64> {
            let count = ((hi - lo) / step).round() as usize + 1;
            (0..count)
                .map(|i| lo + step * i as f64)
                .filter(|&x| x <= hi + 0.5 * step)
                .collect()
        };
        Ok(Self {
            omega_outs: build(omega_lo, omega_hi, omega_step),
            alphas: build(alpha_lo, alpha_hi, alpha_step),
        })
    }

    pub fn len(&self) -> usize {
        self.omega_outs.len() * self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Run the sweep over the full grid. Points are evaluated in parallel per
/// output frequency and merged in row-major (omega outer, alpha inner)
/// order regardless of completion order. Degenerate points become flagged
/// rows; the record count always equals the grid size.
pub fn run_sweep(setup: &Setup, experiment: Experiment, grid: &SweepGrid) -> Result<Vec<SweepRecord>> {
    let columns: Vec<Result<Vec<SweepRecord>>> = grid
        .omega_outs
        .par_iter()
        .map(|&omega_out| {
            let ctx = setup.output_context(omega_out)?;
            Ok(grid
                .alphas
                .iter()
                .map(|&alpha| eval_point(setup, &ctx, alpha, experiment))
                .collect())
        })
        .collect();
    let mut out = Vec::with_capacity(grid.len());
    for col in columns {
        out.extend(col?);
    }
    Ok(out)
}

/// Default sweep domain of the reference experiments:
/// omega_out 175..245 THz in 1 THz steps, alpha 0..2.8e6 in 4e4 steps.
pub fn default_sweep_grid() -> SweepGrid {
    use crate::units::thz_to_angular as thz;
    SweepGrid::from_ranges(thz(175.0), thz(245.0), thz(1.0), 0.0, 2.8e6, 4.0e4)
        .expect("static ranges are valid")
}

/// Scan for the squeezing -> beam-splitting transition frequency; returns
/// the first flip location (midpoint of the bracketing step).
pub fn find_regime_boundary(
    setup: &Setup,
    omega_lo: f64,
    omega_hi: f64,
    steps: usize,
) -> Result<Option<f64>> {
    let mut prev: Option<(f64, Regime)> = None;
    for i in 0..=steps {
        let omega = omega_lo + (omega_hi - omega_lo) * i as f64 / steps as f64;
        let ctx = setup.output_context(omega)?;
        let map = ctx.map_at(1.0)?;
        if let Some((pw, pr)) = prev {
            if pr != map.regime {
                return Ok(Some(0.5 * (pw + omega)));
            }
        }
        prev = Some((omega, map.regime));
    }
    Ok(None)
}

/// Wigner fields emitted for one parameter point.
pub struct WignerBundle {
    /// Labeled input-side Wigner functions.
    pub inputs: Vec<(String, WignerGrid)>,
    pub output: WignerGrid,
    /// Core-rescaled output (two-mode experiment); None when the core is
    /// singular at this point.
    pub rescaled: Option<WignerGrid>,
}

fn gaussian_window(cov: &DMatrix<f64>) -> WignerWindow {
    let hx = 6.0 * cov[(0, 0)].abs().sqrt();
    let hp = 6.0 * cov[(1, 1)].abs().sqrt();
    WignerWindow {
        half_x: hx.max(6.0),
        half_p: hp.max(6.0),
        nx: 257,
        np: 257,
    }
}

fn widen_until_normalized(
    mut window: WignerWindow,
    eval: impl Fn(&WignerWindow) -> Result<WignerGrid>,
) -> Result<WignerGrid> {
    let mut grid = eval(&window)?;
    for _ in 0..4 {
        if (grid.integral() - 1.0).abs() <= 1e-3 {
            break;
        }
        window.half_x *= 1.5;
        window.half_p *= 1.5;
        grid = eval(&window)?;
    }
    Ok(grid)
}

/// Input/output Wigner fields of the Fock experiment at one point.
pub fn fock_wigner_bundle(
    setup: &Setup,
    ctx: &OutputContext,
    alpha: f64,
    n: usize,
) -> Result<WignerBundle> {
    let pm = point_maps(setup, ctx, alpha)?;
    let cov_b = pm.map.cov_b();
    let input_window = WignerWindow::square(6.0f64.max(3.0 * ((2 * n + 1) as f64).sqrt()), 257);
    let input = fock_wigner(n, &input_window);

    let spread = &cov_b + pm.map.a() * pm.map.a().transpose() * (2 * n + 1) as f64;
    let out_window = gaussian_window(&spread);
    let output = widen_until_normalized(out_window, |w| {
        fock_output_wigner(n, pm.map.a(), &cov_b, w)
    })?;
    Ok(WignerBundle {
        inputs: vec![("input_fock".to_string(), input)],
        output,
        rescaled: None,
    })
}

/// Input/output Wigner fields of the two-mode experiment at one point.
pub fn two_mode_wigner_bundle(
    setup: &Setup,
    ctx: &OutputContext,
    alpha: f64,
    r: f64,
) -> Result<WignerBundle> {
    let pm = point_maps(setup, ctx, alpha)?;
    let cov_b = pm.map.cov_b();
    let state_in = GaussianState::two_mode_squeezed(r);
    let mut inputs = Vec::new();
    for (label, mode) in [("input_mode1", 0usize), ("input_mode2", 1usize)] {
        let red = state_in.reduced(&[mode])?;
        let w = widen_until_normalized(gaussian_window(&red.cov), |win| {
            gaussian_wigner_eval(&red, win)
        })?;
        inputs.push((label.to_string(), w));
    }
    let prop = propagate_gaussian(&state_in, &pm.map, &pm.gbmd)?;
    let output = widen_until_normalized(gaussian_window(&prop.state.cov), |win| {
        gaussian_wigner_eval(&prop.state, win)
    })?;
    let rescaled = match rescaled_output_cov(&prop.cov_in_s, &cov_b, &pm.gbmd) {
        Ok(cov) => {
            let state = GaussianState {
                mean: nalgebra::DVector::zeros(2),
                cov,
            };
            Some(widen_until_normalized(gaussian_window(&state.cov), |win| {
                gaussian_wigner_eval(&state, win)
            })?)
        }
        Err(Error::SingularCore { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(WignerBundle {
        inputs,
        output,
        rescaled,
    })
}
