//! Config file schema and resolution.
//!
//! The file is TOML; every key is optional and defaults to the reference
//! parameter set (20 um ZnTe crystal, 200 THz / 118 THz pump, input mode at
//! 27 THz with a 35 THz spread, second input seed 40 THz, 24 THz output
//! bandwidth). Frequencies are ordinary frequencies in THz and lengths in
//! micrometers; conversion to SI happens here.

use serde::{Deserialize, Serialize};

use chi2phase::chi2::{CrystalParams, DispersionModel};
use chi2phase::scenario::{Experiment, SetupParams, SweepGrid};
use chi2phase::units::{fwhm_to_sigma, thz_to_angular, um2_to_m2, um_to_m};

/// Fully resolved configuration; serializing it round-trips losslessly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub crystal: CrystalConfig,
    #[serde(default)]
    pub pump: PumpConfig,
    #[serde(default)]
    pub modes: ModesConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            output_dir: None,
            grid: GridConfig::default(),
            crystal: CrystalConfig::default(),
            pump: PumpConfig::default(),
            modes: ModesConfig::default(),
            sweep: SweepConfig::default(),
            experiment: ExperimentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub f_min_thz: f64,
    pub f_max_thz: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            f_min_thz: 0.1,
            f_max_thz: 500.0,
            n_points: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalConfig {
    pub length_um: f64,
    pub r41: f64,
    pub beam_area_um2: f64,
    /// Optional override of the coupling density in lambda-hat.
    #[serde(default)]
    pub coupling_lambda: Option<f64>,
    pub dispersion: DispersionConfig,
}

impl Default for CrystalConfig {
    fn default() -> Self {
        Self {
            length_um: 20.0,
            r41: 4e-12,
            beam_area_um2: std::f64::consts::PI * 9.0,
            coupling_lambda: None,
            dispersion: DispersionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionConfig {
    /// "znte" (blended Sellmeier) or "constant".
    pub model: String,
    pub n0: f64,
    pub a0: f64,
    pub b0: f64,
    pub c0_um2: f64,
    pub n_thz: f64,
    pub blend_lo_thz: f64,
    pub blend_hi_thz: f64,
    pub valid_min_thz: f64,
    pub valid_max_thz: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            model: "znte".to_string(),
            n0: 2.85,
            a0: 4.27,
            b0: 3.01,
            c0_um2: 0.142,
            n_thz: 3.17,
            blend_lo_thz: 10.0,
            blend_hi_thz: 30.0,
            valid_min_thz: 1e-3,
            valid_max_thz: 740.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpConfig {
    pub center_thz: f64,
    pub fwhm_thz: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self {
            center_thz: 200.0,
            fwhm_thz: 118.0,
        }
    }
}

/// Width conventions for Gaussian mode profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthConvention {
    /// The quoted width is the standard deviation of the amplitude.
    AmplitudeSigma,
    /// The quoted width is the FWHM of the intensity |u|^2.
    IntensityFwhm,
    /// The quoted width is the standard deviation of the intensity.
    IntensitySigma,
}

impl WidthConvention {
    /// Convert a quoted width to the gaussian_mode parameter (intensity
    /// standard deviation), both in rad/s.
    fn to_intensity_sigma(self, quoted: f64) -> f64 {
        match self {
            WidthConvention::AmplitudeSigma => quoted / std::f64::consts::SQRT_2,
            WidthConvention::IntensityFwhm => fwhm_to_sigma(quoted),
            WidthConvention::IntensitySigma => quoted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesConfig {
    pub input_center_thz: f64,
    pub input_spread_thz: f64,
    pub input_spread_convention: WidthConvention,
    pub second_input_center_thz: f64,
    pub output_bandwidth_thz: f64,
    pub output_bandwidth_convention: WidthConvention,
    pub partner_cut_thz: f64,
}

impl Default for ModesConfig {
    fn default() -> Self {
        Self {
            input_center_thz: 27.0,
            input_spread_thz: 35.0,
            input_spread_convention: WidthConvention::AmplitudeSigma,
            second_input_center_thz: 40.0,
            output_bandwidth_thz: 24.0,
            output_bandwidth_convention: WidthConvention::IntensityFwhm,
            partner_cut_thz: 130.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub omega_out_min_thz: f64,
    pub omega_out_max_thz: f64,
    pub omega_out_step_thz: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_step: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            omega_out_min_thz: 175.0,
            omega_out_max_thz: 245.0,
            omega_out_step_thz: 1.0,
            alpha_min: 0.0,
            alpha_max: 2.8e6,
            alpha_step: 4.0e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// "fock_single_mode" or "two_mode_squeezed".
    pub kind: String,
    pub fock_n: usize,
    pub squeeze_r: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: "fock_single_mode".to_string(),
            fock_n: 3,
            squeeze_r: 1.0,
        }
    }
}

/// A config error listing every offending key.
#[derive(Debug)]
pub struct ConfigError(pub Vec<String>);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for item in &self.0 {
            writeln!(f, "  - {item}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl Config {
    /// Parse a TOML file; an empty (or missing-keys) file yields the
    /// reference defaults.
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text).map_err(|e| ConfigError(vec![e.to_string()]))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(vec![format!("{}: {e}", path.display())]))?;
        Self::from_str(&text)
    }

    /// Serialize the fully resolved configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Check every range constraint, listing all violations.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut bad = Vec::new();
        let mut check = |ok: bool, key: &str, expect: &str, got: String| {
            if !ok {
                bad.push(format!("{key}: expected {expect}, got {got}"));
            }
        };
        let g = &self.grid;
        check(g.f_min_thz > 0.0, "grid.f_min_thz", "> 0", format!("{}", g.f_min_thz));
        check(
            g.f_max_thz > g.f_min_thz,
            "grid.f_max_thz",
            "> grid.f_min_thz",
            format!("{}", g.f_max_thz),
        );
        check(g.n_points >= 2, "grid.n_points", ">= 2", format!("{}", g.n_points));

        let c = &self.crystal;
        check(c.length_um > 0.0, "crystal.length_um", "> 0", format!("{}", c.length_um));
        check(
            c.beam_area_um2 > 0.0,
            "crystal.beam_area_um2",
            "> 0",
            format!("{}", c.beam_area_um2),
        );
        check(
            c.dispersion.model == "znte" || c.dispersion.model == "constant",
            "crystal.dispersion.model",
            "\"znte\" or \"constant\"",
            format!("{:?}", c.dispersion.model),
        );
        check(
            c.dispersion.n0 > 1.0,
            "crystal.dispersion.n0",
            "> 1",
            format!("{}", c.dispersion.n0),
        );
        check(
            c.dispersion.blend_hi_thz > c.dispersion.blend_lo_thz,
            "crystal.dispersion.blend_hi_thz",
            "> blend_lo_thz",
            format!("{}", c.dispersion.blend_hi_thz),
        );

        let p = &self.pump;
        check(p.center_thz > 0.0, "pump.center_thz", "> 0", format!("{}", p.center_thz));
        check(p.fwhm_thz > 0.0, "pump.fwhm_thz", "> 0", format!("{}", p.fwhm_thz));

        let m = &self.modes;
        check(
            m.input_center_thz > 0.0,
            "modes.input_center_thz",
            "> 0",
            format!("{}", m.input_center_thz),
        );
        check(
            m.input_spread_thz > 0.0,
            "modes.input_spread_thz",
            "> 0",
            format!("{}", m.input_spread_thz),
        );
        check(
            m.second_input_center_thz > 0.0,
            "modes.second_input_center_thz",
            "> 0",
            format!("{}", m.second_input_center_thz),
        );
        check(
            m.output_bandwidth_thz > 0.0,
            "modes.output_bandwidth_thz",
            "> 0",
            format!("{}", m.output_bandwidth_thz),
        );
        check(
            m.partner_cut_thz > 0.0,
            "modes.partner_cut_thz",
            "> 0",
            format!("{}", m.partner_cut_thz),
        );

        let s = &self.sweep;
        check(
            s.omega_out_step_thz > 0.0,
            "sweep.omega_out_step_thz",
            "> 0",
            format!("{}", s.omega_out_step_thz),
        );
        check(s.alpha_step > 0.0, "sweep.alpha_step", "> 0", format!("{}", s.alpha_step));
        check(
            s.omega_out_max_thz >= s.omega_out_min_thz,
            "sweep.omega_out_max_thz",
            ">= omega_out_min_thz",
            format!("{}", s.omega_out_max_thz),
        );
        check(
            s.alpha_max >= s.alpha_min,
            "sweep.alpha_max",
            ">= alpha_min",
            format!("{}", s.alpha_max),
        );

        let e = &self.experiment;
        check(
            e.kind == "fock_single_mode" || e.kind == "two_mode_squeezed",
            "experiment.kind",
            "\"fock_single_mode\" or \"two_mode_squeezed\"",
            format!("{:?}", e.kind),
        );
        check(e.fock_n <= 20, "experiment.fock_n", "<= 20", format!("{}", e.fock_n));

        if bad.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(bad))
        }
    }

    pub fn dispersion_model(&self) -> DispersionModel {
        let d = &self.crystal.dispersion;
        if d.model == "constant" {
            DispersionModel::Constant { n0: d.n0 }
        } else {
            DispersionModel::Blend {
                a0: d.a0,
                b0: d.b0,
                c0_um2: d.c0_um2,
                n_thz: d.n_thz,
                blend_lo: thz_to_angular(d.blend_lo_thz),
                blend_hi: thz_to_angular(d.blend_hi_thz),
                valid_min: thz_to_angular(d.valid_min_thz),
                valid_max: thz_to_angular(d.valid_max_thz),
            }
        }
    }

    pub fn setup_params(&self) -> SetupParams {
        let m = &self.modes;
        SetupParams {
            grid_min: thz_to_angular(self.grid.f_min_thz),
            grid_max: thz_to_angular(self.grid.f_max_thz),
            n_points: self.grid.n_points,
            crystal: CrystalParams {
                length: um_to_m(self.crystal.length_um),
                r41: self.crystal.r41,
                beam_area: um2_to_m2(self.crystal.beam_area_um2),
                coupling_lambda: self.crystal.coupling_lambda,
                dispersion: self.dispersion_model(),
            },
            pump_center: thz_to_angular(self.pump.center_thz),
            pump_fwhm: thz_to_angular(self.pump.fwhm_thz),
            input_center: thz_to_angular(m.input_center_thz),
            input_width: m
                .input_spread_convention
                .to_intensity_sigma(thz_to_angular(m.input_spread_thz)),
            second_input_center: thz_to_angular(m.second_input_center_thz),
            output_width: m
                .output_bandwidth_convention
                .to_intensity_sigma(thz_to_angular(m.output_bandwidth_thz)),
            partner_cut: thz_to_angular(m.partner_cut_thz),
        }
    }

    pub fn experiment(&self) -> Experiment {
        if self.experiment.kind == "two_mode_squeezed" {
            Experiment::TwoModeSqueezed {
                r: self.experiment.squeeze_r,
            }
        } else {
            Experiment::FockSingleMode {
                n: self.experiment.fock_n,
            }
        }
    }

    pub fn n_inputs(&self) -> usize {
        match self.experiment() {
            Experiment::FockSingleMode { .. } => 1,
            Experiment::TwoModeSqueezed { .. } => 2,
        }
    }

    pub fn sweep_grid(&self) -> Result<SweepGrid, ConfigError> {
        let s = &self.sweep;
        SweepGrid::from_ranges(
            thz_to_angular(s.omega_out_min_thz),
            thz_to_angular(s.omega_out_max_thz),
            thz_to_angular(s.omega_out_step_thz),
            s.alpha_min,
            s.alpha_max,
            s.alpha_step,
        )
        .map_err(|e| ConfigError(vec![format!("sweep ranges: {e}")]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_reference_defaults() {
        let config = Config::from_str("").unwrap();
        assert_eq!(config, Config::default());
        assert_eq!(config.pump.center_thz, 200.0);
        assert_eq!(config.pump.fwhm_thz, 118.0);
        assert_eq!(config.crystal.length_um, 20.0);
        assert_eq!(config.crystal.r41, 4e-12);
        assert!((config.crystal.beam_area_um2 - std::f64::consts::PI * 9.0).abs() < 1e-12);
        assert_eq!(config.modes.input_center_thz, 27.0);
        assert_eq!(config.modes.input_spread_thz, 35.0);
        assert_eq!(config.modes.output_bandwidth_thz, 24.0);
    }

    #[test]
    fn zero_step_names_the_key() {
        let err = Config::from_str("[sweep]\nomega_out_step_thz = 0.0\n").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("sweep.omega_out_step_thz"), "{text}");
    }

    #[test]
    fn all_range_violations_listed() {
        let err = Config::from_str(
            "[sweep]\nomega_out_step_thz = 0.0\nalpha_step = -1.0\n[pump]\ncenter_thz = -5\n",
        )
        .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("sweep.omega_out_step_thz"));
        assert!(text.contains("sweep.alpha_step"));
        assert!(text.contains("pump.center_thz"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = Config::from_str("[pump]\ncentre = 5\n").unwrap_err();
        assert!(err.to_string().contains("centre"));
    }

    #[test]
    fn serialization_round_trip() {
        let config = Config::from_str("[experiment]\nkind = \"two_mode_squeezed\"\n").unwrap();
        let text = config.to_toml();
        let reparsed = Config::from_str(&text).unwrap();
        assert_eq!(config, reparsed);
    }

    #[test]
    fn width_conventions_convert() {
        let w = thz_to_angular(24.0);
        let s_fwhm = WidthConvention::IntensityFwhm.to_intensity_sigma(w);
        assert!((s_fwhm - fwhm_to_sigma(w)).abs() < 1e-9);
        let s_amp = WidthConvention::AmplitudeSigma.to_intensity_sigma(w);
        assert!((s_amp - w / std::f64::consts::SQRT_2).abs() < 1e-9);
        assert_eq!(WidthConvention::IntensitySigma.to_intensity_sigma(w), w);
    }

    #[test]
    fn setup_params_match_library_defaults() {
        let config = Config::default();
        let params = config.setup_params();
        let reference = SetupParams::default();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        assert!(close(params.grid_min, reference.grid_min));
        assert!(close(params.grid_max, reference.grid_max));
        assert_eq!(params.n_points, reference.n_points);
        assert!(close(params.crystal.length, reference.crystal.length));
        assert!(close(params.crystal.beam_area, reference.crystal.beam_area));
        assert!(close(params.pump_center, reference.pump_center));
        assert!(close(params.pump_fwhm, reference.pump_fwhm));
        assert!(close(params.input_center, reference.input_center));
        assert!(close(params.input_width, reference.input_width));
        assert!(close(params.second_input_center, reference.second_input_center));
        assert!(close(params.output_width, reference.output_width));
        assert!(close(params.partner_cut, reference.partner_cut));
        assert_eq!(params.crystal.dispersion, reference.crystal.dispersion);
    }
}
