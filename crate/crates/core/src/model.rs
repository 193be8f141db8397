//! Physical parameters of the hybrid cavity and their derived quantities.
//!
//! Configuration files quote every frequency as an ordinary frequency in Hz.
//! [`Config::validate`] converts them once into angular frequencies (rad/s),
//! which is the only unit used past this module.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationErrors};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant (J/K).
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

/// State of the injected atoms: populations of the top and bottom levels and
/// the real coherence between them. The middle level starts empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomicInjection {
    #[serde(rename = "aa")]
    pub rho_aa: f64,
    #[serde(rename = "cc")]
    pub rho_cc: f64,
    #[serde(rename = "ca")]
    pub rho_ca: f64,
}

impl AtomicInjection {
    pub const fn new(rho_aa: f64, rho_cc: f64, rho_ca: f64) -> Self {
        Self { rho_aa, rho_cc, rho_ca }
    }

    /// Pure state (|a> + |c>)/sqrt(2): maximal coherence.
    pub const fn maximally_coherent() -> Self {
        Self::new(0.5, 0.5, 0.5)
    }

    pub(crate) fn check(&self, field: &str, errors: &mut ValidationErrors) {
        const TOL: f64 = 1e-12;
        for (name, value) in [("aa", self.rho_aa), ("cc", self.rho_cc)] {
            if !(-TOL..=1.0 + TOL).contains(&value) {
                errors.push(format!("{field}.{name}"), format!("population {value} outside [0, 1]"));
            }
        }
        if !self.rho_ca.is_finite() {
            errors.push(format!("{field}.ca"), "coherence must be finite");
        }
        let sum = self.rho_aa + self.rho_cc;
        if (sum - 1.0).abs() > TOL {
            errors.push(field, format!("populations must sum to 1 (got {sum})"));
        }
        let bound = self.rho_aa * self.rho_cc;
        if self.rho_ca * self.rho_ca > bound * (1.0 + TOL) + TOL {
            errors.push(
                format!("{field}.ca"),
                format!("coherence^2 = {} exceeds aa*cc = {bound}", self.rho_ca * self.rho_ca),
            );
        }
    }
}

/// Bare drive-cavity detuning, either per mode in Hz or as a multiple of each
/// mode's mechanical frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Detuning {
    Hz([f64; 2]),
    Ratio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MechanicalLoss {
    /// Quality factor Q' = omega_m / gamma_m per mirror.
    Quality([f64; 2]),
    /// Damping rate per mirror in Hz.
    DampingHz([f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Drive {
    /// Input power per mode in watts.
    Power([f64; 2]),
    /// Drive amplitude epsilon per mode in s^-1, used as-is.
    Amplitude([f64; 2]),
}

/// Atomic noise model for the four atomic quadrature rows. Only the
/// noiseless rows of the linearized model are available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomicNoise {
    #[default]
    None,
}

/// On-disk configuration (frequencies in Hz, SI otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Cavity length (m).
    pub cavity_length: f64,
    /// Mass of each movable mirror (kg).
    pub mirror_mass: f64,
    /// Cavity / laser wavelength per mode (m).
    pub wavelength: [f64; 2],
    /// Mechanical frequency per mirror (Hz).
    pub mech_freq: [f64; 2],
    pub mech_loss: MechanicalLoss,
    /// Cavity decay rate per mode (Hz).
    pub kappa: [f64; 2],
    /// Atom-field coupling per mode (Hz).
    pub coupling: [f64; 2],
    /// Atomic decay rate (Hz).
    pub atom_decay: f64,
    /// Atomic detunings delta_1, delta_2 (Hz).
    pub atom_detuning: [f64; 2],
    pub cavity_detuning: Detuning,
    pub drive: Drive,
    /// Atomic injection rate (s^-1, not rescaled).
    pub inject_rate: f64,
    pub rho0: AtomicInjection,
    /// Bath temperature (K).
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_mech: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_field: Option<f64>,
    /// Use the single field occupancy for all four baths.
    #[serde(default)]
    pub single_occupancy: bool,
    #[serde(default)]
    pub atomic_noise: AtomicNoise,
}

/// Validated parameters, all frequencies angular (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub cavity_len: f64,
    pub mirror_mass: f64,
    pub omega_cav: [f64; 2],
    pub omega_m: [f64; 2],
    pub gamma_m: [f64; 2],
    pub kappa: [f64; 2],
    pub g: [f64; 2],
    pub gamma_atom: f64,
    pub delta: [f64; 2],
    pub delta_cav: [f64; 2],
    pub drive_amp: [Complex64; 2],
    pub inject_rate: f64,
    pub rho0: AtomicInjection,
    pub n_mech: [f64; 2],
    pub n_field: f64,
}

/// chi_j = (omega_j / L) sqrt(hbar / (m omega_m_j)).
pub fn radiation_pressure_coupling(params: &SystemParams, j: usize) -> f64 {
    params.omega_cav[j] / params.cavity_len * (HBAR / (params.mirror_mass * params.omega_m[j])).sqrt()
}

/// epsilon = sqrt(2 kappa P / (hbar omega_L)) with omega_L = 2 pi c / lambda.
pub fn drive_amplitude_from_power(power: f64, wavelength: f64, kappa: f64) -> Result<f64> {
    if !(power >= 0.0) {
        return Err(Error::InvalidArgument { arg: "power", reason: format!("must be >= 0, got {power}") });
    }
    if !(wavelength > 0.0) || !(kappa > 0.0) {
        return Err(Error::InvalidArgument { arg: "wavelength/kappa", reason: "must be strictly positive".into() });
    }
    let omega_laser = TAU * SPEED_OF_LIGHT / wavelength;
    Ok((2.0 * kappa * power / (HBAR * omega_laser)).sqrt())
}

/// Bose-Einstein occupancy 1/(exp(hbar omega / k_B T) - 1).
pub fn thermal_occupancy(temperature: f64, omega: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidArgument { arg: "temperature", reason: format!("must be > 0, got {temperature}") });
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument { arg: "omega", reason: format!("must be > 0, got {omega}") });
    }
    Ok((HBAR * omega / (K_BOLTZMANN * temperature)).exp_m1().recip())
}

fn require_positive(errors: &mut ValidationErrors, field: &str, values: &[f64]) {
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            let name = if values.len() > 1 { format!("{field}[{i}]") } else { field.to_string() };
            errors.push(name, format!("must be strictly positive and finite, got {v}"));
        }
    }
}

fn require_nonnegative(errors: &mut ValidationErrors, field: &str, values: &[f64]) {
    for (i, &v) in values.iter().enumerate() {
        if !(v >= 0.0 && v.is_finite()) {
            let name = if values.len() > 1 { format!("{field}[{i}]") } else { field.to_string() };
            errors.push(name, format!("must be >= 0 and finite, got {v}"));
        }
    }
}

fn require_finite(errors: &mut ValidationErrors, field: &str, values: &[f64]) {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            errors.push(format!("{field}[{i}]"), format!("must be finite, got {v}"));
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks every invariant and converts to angular units. All violations
    /// are collected before returning.
    pub fn validate(&self) -> Result<SystemParams> {
        let mut errors = ValidationErrors::default();
        require_positive(&mut errors, "cavity_length", &[self.cavity_length]);
        require_positive(&mut errors, "mirror_mass", &[self.mirror_mass]);
        require_positive(&mut errors, "wavelength", &self.wavelength);
        require_positive(&mut errors, "mech_freq", &self.mech_freq);
        require_positive(&mut errors, "kappa", &self.kappa);
        require_positive(&mut errors, "coupling", &self.coupling);
        require_positive(&mut errors, "atom_decay", &[self.atom_decay]);
        require_positive(&mut errors, "inject_rate", &[self.inject_rate]);
        require_positive(&mut errors, "temperature", &[self.temperature]);
        require_finite(&mut errors, "atom_detuning", &self.atom_detuning);
        match self.mech_loss {
            MechanicalLoss::Quality(q) => require_positive(&mut errors, "mech_loss.quality", &q),
            MechanicalLoss::DampingHz(d) => require_positive(&mut errors, "mech_loss.damping_hz", &d),
        }
        match self.cavity_detuning {
            Detuning::Hz(d) => require_finite(&mut errors, "cavity_detuning.hz", &d),
            Detuning::Ratio(r) => require_finite(&mut errors, "cavity_detuning.ratio", &[r]),
        }
        match self.drive {
            Drive::Power(p) => require_nonnegative(&mut errors, "drive.power", &p),
            Drive::Amplitude(e) => require_nonnegative(&mut errors, "drive.amplitude", &e),
        }
        if let Some(n) = self.n_mech {
            require_nonnegative(&mut errors, "n_mech", &n);
        }
        if let Some(n) = self.n_field {
            require_nonnegative(&mut errors, "n_field", &[n]);
        }
        self.rho0.check("rho0", &mut errors);
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }

        let omega_cav = self.wavelength.map(|l| TAU * SPEED_OF_LIGHT / l);
        let omega_m = self.mech_freq.map(|f| TAU * f);
        let kappa = self.kappa.map(|k| TAU * k);
        let gamma_m = match self.mech_loss {
            MechanicalLoss::Quality(q) => [omega_m[0] / q[0], omega_m[1] / q[1]],
            MechanicalLoss::DampingHz(d) => d.map(|x| TAU * x),
        };
        let delta_cav = match self.cavity_detuning {
            Detuning::Hz(d) => d.map(|x| TAU * x),
            Detuning::Ratio(r) => omega_m.map(|w| r * w),
        };
        let drive_amp = match self.drive {
            Drive::Power(p) => [
                drive_amplitude_from_power(p[0], self.wavelength[0], kappa[0])?,
                drive_amplitude_from_power(p[1], self.wavelength[1], kappa[1])?,
            ],
            Drive::Amplitude(e) => e,
        }
        .map(|e| Complex64::new(e, 0.0));

        // The field occupancy uses the (first) cavity frequency.
        let n_field = match self.n_field {
            Some(n) => n,
            None => thermal_occupancy(self.temperature, omega_cav[0])?,
        };
        let n_mech = if self.single_occupancy {
            [n_field; 2]
        } else {
            match self.n_mech {
                Some(n) => n,
                None => {
                    [thermal_occupancy(self.temperature, omega_m[0])?, thermal_occupancy(self.temperature, omega_m[1])?]
                }
            }
        };

        let params = SystemParams {
            cavity_len: self.cavity_length,
            mirror_mass: self.mirror_mass,
            omega_cav,
            omega_m,
            gamma_m,
            kappa,
            g: self.coupling.map(|g| TAU * g),
            gamma_atom: TAU * self.atom_decay,
            delta: self.atom_detuning.map(|d| TAU * d),
            delta_cav,
            drive_amp,
            inject_rate: self.inject_rate,
            rho0: self.rho0,
            n_mech,
            n_field,
        };
        params.check()?;
        Ok(params)
    }

    /// Reference set: 5 mm cavity, 20 ng mirrors, symmetric modes, maximally
    /// coherent injection, Delta = 0.5 omega_m and g = 2 pi x 2.2e5 Hz.
    pub fn fig2() -> Self {
        Self {
            cavity_length: 5e-3,
            mirror_mass: 20e-12,
            wavelength: [810e-9; 2],
            mech_freq: [10e6; 2],
            mech_loss: MechanicalLoss::Quality([6700.0; 2]),
            kappa: [215e3; 2],
            coupling: [2.2e5; 2],
            atom_decay: 1.3e6,
            atom_detuning: [4e6; 2],
            cavity_detuning: Detuning::Ratio(0.5),
            drive: Drive::Power([10e-3; 2]),
            inject_rate: 2000.0,
            rho0: AtomicInjection::maximally_coherent(),
            temperature: 42e-6,
            n_mech: None,
            n_field: None,
            single_occupancy: false,
            atomic_noise: AtomicNoise::None,
        }
    }

    /// Reference set with g = 2 pi x 2.0e5 Hz and Delta = 0.8 omega_m.
    pub fn fig4a() -> Self {
        Self { coupling: [2.0e5; 2], cavity_detuning: Detuning::Ratio(0.8), ..Self::fig2() }
    }

    /// As [`Config::fig4a`] with rho = (1/5, 4/5, 2/5).
    pub fn fig4b() -> Self {
        Self { rho0: AtomicInjection::new(0.2, 0.8, 0.4), ..Self::fig4a() }
    }
}

impl SystemParams {
    /// Re-checks the invariants on an already converted parameter set.
    pub fn check(&self) -> Result<()> {
        let mut errors = ValidationErrors::default();
        require_positive(&mut errors, "cavity_len", &[self.cavity_len]);
        require_positive(&mut errors, "mirror_mass", &[self.mirror_mass]);
        require_positive(&mut errors, "omega_cav", &self.omega_cav);
        require_positive(&mut errors, "omega_m", &self.omega_m);
        require_positive(&mut errors, "gamma_m", &self.gamma_m);
        require_positive(&mut errors, "kappa", &self.kappa);
        require_positive(&mut errors, "g", &self.g);
        require_positive(&mut errors, "gamma_atom", &[self.gamma_atom]);
        require_positive(&mut errors, "inject_rate", &[self.inject_rate]);
        require_finite(&mut errors, "delta", &self.delta);
        require_finite(&mut errors, "delta_cav", &self.delta_cav);
        require_nonnegative(&mut errors, "n_mech", &self.n_mech);
        require_nonnegative(&mut errors, "n_field", &[self.n_field]);
        for (j, e) in self.drive_amp.iter().enumerate() {
            if !(e.re.is_finite() && e.im.is_finite()) {
                errors.push(format!("drive_amp[{j}]"), "must be finite");
            }
        }
        self.rho0.check("rho0", &mut errors);
        errors.into_result(())
    }

    pub fn chi(&self) -> [f64; 2] {
        [radiation_pressure_coupling(self, 0), radiation_pressure_coupling(self, 1)]
    }

    /// Exchanges every per-mode parameter between modes 1 and 2.
    pub fn swapped_modes(&self) -> Self {
        fn sw<T: Copy>(x: [T; 2]) -> [T; 2] {
            [x[1], x[0]]
        }
        Self {
            omega_cav: sw(self.omega_cav),
            omega_m: sw(self.omega_m),
            gamma_m: sw(self.gamma_m),
            kappa: sw(self.kappa),
            g: sw(self.g),
            delta: sw(self.delta),
            delta_cav: sw(self.delta_cav),
            drive_amp: sw(self.drive_amp),
            n_mech: sw(self.n_mech),
            ..self.clone()
        }
    }
}
