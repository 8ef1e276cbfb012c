//! Closed-form physical parameters and coupling strengths.
//!
//! Model frequencies are ordinary frequencies with ħ = 1; the SI-facing
//! calculators (fields, currents, inductances) return MHz.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub mod constants {
    //! Physical constants and configuration defaults shared by every run.

    /// Vacuum permeability, N·A⁻² (the classical `4π × 10⁻⁷`).
    pub const MU_0: f64 = 4.0 * core::f64::consts::PI * 1e-7;
    /// Planck constant, J·s.
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// NV Landé factor.
    pub const NV_LANDE_G: f64 = 2.0;
    /// Magneton in frequency units, MHz per mT.
    pub const NV_MAGNETON_MHZ_PER_MT: f64 = 14.0;
    /// NV ground-state zero-field splitting, MHz.
    pub const NV_ZERO_FIELD_SPLITTING_MHZ: f64 = 2870.0;
    /// Single NV center coupled to a flux qubit (12 kHz), in MHz.
    pub const DEFAULT_G_SINGLE_HYBRID_MHZ: f64 = 0.012;
    /// Single NV center coupled directly to the resonator (10 Hz), in MHz.
    pub const DEFAULT_G_SINGLE_DIRECT_MHZ: f64 = 1e-5;

    /// Name/value/unit table, for manifests.
    pub const TABLE: &[(&str, f64, &str)] = &[
        ("mu_0", MU_0, "N/A^2"),
        ("planck", PLANCK, "J s"),
        ("nv_lande_g", NV_LANDE_G, "1"),
        ("nv_magneton", NV_MAGNETON_MHZ_PER_MT, "MHz/mT"),
        ("nv_zero_field_splitting", NV_ZERO_FIELD_SPLITTING_MHZ, "MHz"),
        ("g_single_hybrid_default", DEFAULT_G_SINGLE_HYBRID_MHZ, "MHz"),
        ("g_single_direct_default", DEFAULT_G_SINGLE_DIRECT_MHZ, "MHz"),
    ];
}

use constants::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    #[default]
    MHz,
    GHz,
    /// Dimensionless, in units of the resonator frequency.
    OmegaR,
}

impl FrequencyUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hz => "Hz",
            Self::KHz => "kHz",
            Self::MHz => "MHz",
            Self::GHz => "GHz",
            Self::OmegaR => "omega_r",
        }
    }
}

impl core::str::FromStr for FrequencyUnit {
    type Err = ();
    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "Hz" | "hz" => Ok(Self::Hz),
            "kHz" | "khz" => Ok(Self::KHz),
            "MHz" | "mhz" => Ok(Self::MHz),
            "GHz" | "ghz" => Ok(Self::GHz),
            "omega_r" => Ok(Self::OmegaR),
            _ => Err(()),
        }
    }
}

/// The five model frequencies and couplings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    /// Flux-qubit splitting; equals the tunneling energy at the degeneracy point.
    pub omega_q: f64,
    pub omega_r: f64,
    pub omega_s: f64,
    pub g_qr: f64,
    pub g_qs: f64,
    pub unit: FrequencyUnit,
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be non-negative and finite",
        })
    }
}

impl SystemParams {
    pub fn new(omega_q: f64, omega_r: f64, omega_s: f64, g_qr: f64, g_qs: f64) -> Result<Self> {
        let p = Self {
            omega_q,
            omega_r,
            omega_s,
            g_qr,
            g_qs,
            unit: FrequencyUnit::MHz,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters in units of ω_R with `g_QR = g_QS = g`.
    pub fn relative(omega_q: f64, omega_s: f64, g: f64) -> Result<Self> {
        Ok(Self::new(omega_q, 1.0, omega_s, g, g)?.with_unit(FrequencyUnit::OmegaR))
    }

    pub fn with_unit(mut self, unit: FrequencyUnit) -> Self {
        self.unit = unit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega_q", self.omega_q)?;
        positive("omega_r", self.omega_r)?;
        positive("omega_s", self.omega_s)?;
        non_negative("g_qr", self.g_qr)?;
        non_negative("g_qs", self.g_qs)
    }

    pub fn delta_r(&self) -> f64 {
        self.omega_q - self.omega_r
    }

    pub fn delta_s(&self) -> f64 {
        self.omega_q - self.omega_s
    }

    pub fn eta_r(&self) -> f64 {
        self.omega_q + self.omega_r
    }

    pub fn eta_s(&self) -> f64 {
        self.omega_q + self.omega_s
    }

    pub(crate) fn dispersive_detunings(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let (dr, ds) = (self.delta_r(), self.delta_s());
        if dr <= 0.0 {
            return Err(Error::RegimeViolation {
                what: "delta_r",
                value: dr,
            });
        }
        if ds <= 0.0 {
            return Err(Error::RegimeViolation {
                what: "delta_s",
                value: ds,
            });
        }
        Ok((dr, ds))
    }
}

/// Rectangular flux-qubit loop and the NV sample inside it (SI units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopGeometry {
    /// Loop area, m².
    pub area: f64,
    /// Length-to-width ratio of the rectangle.
    pub aspect: f64,
    /// NV sample thickness, m.
    pub thickness: f64,
    /// Persistent current, A.
    pub persistent_current: f64,
    /// NV volume density, m⁻³.
    pub density: f64,
}

impl LoopGeometry {
    pub fn validate(&self) -> Result<()> {
        positive("area", self.area)?;
        positive("aspect", self.aspect)?;
        positive("thickness", self.thickness)?;
        positive("persistent_current", self.persistent_current)?;
        positive("density", self.density)
    }

    /// Side lengths `(length, width)` of the rectangle, m.
    pub fn sides(&self) -> (f64, f64) {
        let width = (self.area / self.aspect).sqrt();
        (self.aspect * width, width)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EffectiveRegime {
    RwaDispersive,
    NonRwaDispersive,
}

/// Coefficients of the qubit-eliminated resonator–ensemble Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveParams {
    pub g_eff: f64,
    pub omega_r_prime: f64,
    pub omega_s_prime: f64,
    pub alpha_r: f64,
    pub alpha_s: f64,
    pub regime: EffectiveRegime,
}

/// NV `m_s = 0 ↔ −1` splitting `D − g_e μ B_∥`, MHz.
pub fn nv_transition_frequency(d_zfs_mhz: f64, b_parallel_mt: f64) -> Result<f64> {
    let f = d_zfs_mhz - NV_LANDE_G * NV_MAGNETON_MHZ_PER_MT * b_parallel_mt;
    if f > 0.0 {
        Ok(f)
    } else {
        Err(Error::UnphysicalField { frequency: f })
    }
}

/// Flux-qubit splitting `√(ε² + λ²)` away from the degeneracy point.
pub fn flux_qubit_splitting(bias: f64, tunneling: f64) -> f64 {
    bias.hypot(tunneling)
}

/// Geometric prefactor `8√(β + 1/β)` of the field at the loop center.
pub fn loop_shape_factor(aspect: f64) -> f64 {
    8.0 * (aspect + 1.0 / aspect).sqrt()
}

/// Biot–Savart field at the center of the rectangular loop, tesla.
pub fn loop_center_field(geom: &LoopGeometry) -> Result<f64> {
    geom.validate()?;
    Ok(loop_shape_factor(geom.aspect) * MU_0 * geom.persistent_current
        / (4.0 * core::f64::consts::PI * geom.area.sqrt()))
}

/// Single-NV coupling `g_e μ B / √2` for a field in tesla, MHz.
pub fn single_spin_coupling(b_fq_tesla: f64) -> Result<f64> {
    non_negative("b_fq", b_fq_tesla)?;
    Ok(NV_LANDE_G * NV_MAGNETON_MHZ_PER_MT * (b_fq_tesla * 1e3) / core::f64::consts::SQRT_2)
}

/// Collective enhancement `√N · g_s`.
pub fn ensemble_coupling_from_count(n_spins: f64, g_s: f64) -> Result<f64> {
    if !(n_spins >= 1.0) || !n_spins.is_finite() {
        return Err(Error::InvalidParameter {
            name: "n_spins",
            value: n_spins,
            reason: "need at least one spin",
        });
    }
    Ok(n_spins.sqrt() * g_s)
}

/// `g_QS = √(D·A·d) · g_s(B_center)`, MHz. The loop area cancels.
pub fn ensemble_coupling_from_density(geom: &LoopGeometry) -> Result<f64> {
    let g_s = single_spin_coupling(loop_center_field(geom)?)?;
    Ok((geom.density * geom.area * geom.thickness).sqrt() * g_s)
}

/// Resonator zero-point current `√(h ω_R / L_R)`, A.
pub fn zero_point_current(omega_r_mhz: f64, inductance: f64) -> Result<f64> {
    positive("omega_r", omega_r_mhz)?;
    positive("inductance", inductance)?;
    Ok((PLANCK * omega_r_mhz * 1e6 / inductance).sqrt())
}

/// `g_QR = M I_p I_r0 / h`, MHz.
pub fn qubit_resonator_coupling(mutual: f64, i_p: f64, i_r0: f64) -> Result<f64> {
    non_negative("mutual_inductance", mutual)?;
    non_negative("persistent_current", i_p)?;
    non_negative("zero_point_current", i_r0)?;
    Ok(mutual * i_p * i_r0 / PLANCK * 1e-6)
}

/// `−(α_R + α_S) g_QR g_QS / 2`.
pub fn mediated_coupling(alpha_r: f64, alpha_s: f64, g_qr: f64, g_qs: f64) -> f64 {
    -(alpha_r + alpha_s) * g_qr * g_qs / 2.0
}

/// Rotating-wave dispersive coefficients (`α = 1/Δ`).
pub fn effective_rwa(params: &SystemParams) -> Result<EffectiveParams> {
    let (dr, ds) = params.dispersive_detunings()?;
    let (alpha_r, alpha_s) = (1.0 / dr, 1.0 / ds);
    Ok(EffectiveParams {
        g_eff: mediated_coupling(alpha_r, alpha_s, params.g_qr, params.g_qs),
        omega_r_prime: params.omega_r - params.g_qr * params.g_qr / dr,
        omega_s_prime: params.omega_s - params.g_qs * params.g_qs / ds,
        alpha_r,
        alpha_s,
        regime: EffectiveRegime::RwaDispersive,
    })
}

/// Dispersive coefficients with counter-rotating branches (`α = 1/Δ + 1/η`).
pub fn effective_nonrwa(params: &SystemParams) -> Result<EffectiveParams> {
    let (dr, ds) = params.dispersive_detunings()?;
    let alpha_r = 1.0 / dr + 1.0 / params.eta_r();
    let alpha_s = 1.0 / ds + 1.0 / params.eta_s();
    Ok(EffectiveParams {
        g_eff: mediated_coupling(alpha_r, alpha_s, params.g_qr, params.g_qs),
        omega_r_prime: params.omega_r - alpha_r * params.g_qr * params.g_qr,
        omega_s_prime: params.omega_s - alpha_s * params.g_qs * params.g_qs,
        alpha_r,
        alpha_s,
        regime: EffectiveRegime::NonRwaDispersive,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Squeezing {
    /// Magnitude of the squeezing parameter.
    pub r: f64,
    pub sinh_sq: f64,
    /// `2ω_R/(α_R g_QR²) − 2`; must exceed 2.
    pub beta: f64,
}

/// Squeezing parameter absorbing the photon pair terms of the ultrastrong
/// effective Hamiltonian.
pub fn squeeze_parameter(params: &SystemParams) -> Result<Squeezing> {
    let eff = effective_nonrwa(params)?;
    let beta = 2.0 * params.omega_r / (eff.alpha_r * params.g_qr * params.g_qr) - 2.0;
    if !(beta > 2.0) {
        return Err(Error::SqueezedFrameUndefined { beta });
    }
    let root = (beta * beta - 4.0).sqrt();
    let sinh_sq = if beta.is_infinite() {
        0.0
    } else {
        2.0 / (root * (root + beta))
    };
    Ok(Squeezing {
        r: sinh_sq.sqrt().asinh(),
        sinh_sq,
        beta,
    })
}

/// Direct ensemble–resonator coupling `√N · g_single`.
pub fn direct_ensemble_resonator_coupling(n_spins: f64, g_single: f64) -> Result<f64> {
    ensemble_coupling_from_count(n_spins, g_single)
}

/// Number of spins for which `√N · g_single` reaches `target`.
pub fn spins_required(target: f64, g_single: f64) -> Result<f64> {
    positive("g_single", g_single)?;
    Ok((target / g_single) * (target / g_single))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec::Vec;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    /// Realistic loop: D = 3e6 µm⁻³, d = 5 µm, I_p = 900 nA, β = 50.
    fn realistic_loop() -> LoopGeometry {
        LoopGeometry {
            area: 50e-12,
            aspect: 50.0,
            thickness: 5e-6,
            persistent_current: 900e-9,
            density: 3e6 * 1e18,
        }
    }

    /// Field at the rectangle center by Simpson integration of the
    /// Biot–Savart integrand along the four straight sides.
    fn biot_savart_center(length: f64, width: f64, current: f64) -> f64 {
        let segment = |half_len: f64, dist: f64| {
            // contribution of a side of length 2·half_len at perpendicular distance dist
            let n = 20_000;
            let h = 2.0 * half_len / n as f64;
            let f = |s: f64| dist / (s * s + dist * dist).powf(1.5);
            let mut sum = f(-half_len) + f(half_len);
            for k in 1..n {
                let s = -half_len + k as f64 * h;
                sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(s);
            }
            sum * h / 3.0
        };
        let total = 2.0 * segment(length / 2.0, width / 2.0) + 2.0 * segment(width / 2.0, length / 2.0);
        MU_0 * current / (4.0 * core::f64::consts::PI) * total
    }

    #[test]
    fn nv_frequency_examples() {
        assert_eq!(nv_transition_frequency(2870.0, 0.0).unwrap(), 2870.0);
        assert!((nv_transition_frequency(2870.0, 10.0).unwrap() - 2590.0).abs() < 1e-12);
        assert!(matches!(
            nv_transition_frequency(2870.0, 102.5),
            Err(Error::UnphysicalField { .. })
        ));
    }

    #[test]
    fn square_loop_matches_closed_form_and_quadrature() {
        let side = 10e-6;
        let geom = LoopGeometry {
            area: side * side,
            aspect: 1.0,
            ..realistic_loop()
        };
        let b = loop_center_field(&geom).unwrap();
        let closed = 2.0 * 2f64.sqrt() * MU_0 * geom.persistent_current / (core::f64::consts::PI * side);
        assert!(rel(b, closed) < 1e-14);
        let quad = biot_savart_center(side, side, geom.persistent_current);
        assert!(rel(b, quad) < 1e-9, "quadrature {quad} vs {b}");
    }

    #[test]
    fn rectangular_loops_match_quadrature() {
        for aspect in [2.0, 5.0, 50.0] {
            let geom = LoopGeometry {
                aspect,
                ..realistic_loop()
            };
            let (l, w) = geom.sides();
            let quad = biot_savart_center(l, w, geom.persistent_current);
            assert!(rel(loop_center_field(&geom).unwrap(), quad) < 1e-9);
        }
    }

    #[test]
    fn field_is_linear_in_current() {
        let g = realistic_loop();
        let b1 = loop_center_field(&g).unwrap();
        let b2 = loop_center_field(&LoopGeometry {
            persistent_current: g.persistent_current * 1e-9,
            ..g
        })
        .unwrap();
        assert!(rel(b2, b1 * 1e-9) < 1e-12);
    }

    #[test]
    fn single_spin_examples() {
        assert_eq!(single_spin_coupling(0.0).unwrap(), 0.0);
        // 1 mT -> 28 / √2 MHz
        assert!(rel(single_spin_coupling(1e-3).unwrap(), 28.0 / 2f64.sqrt()) < 1e-14);
        assert!((single_spin_coupling(1e-3).unwrap() - 19.799).abs() < 1e-3);
    }

    #[test]
    fn ensemble_count_examples() {
        assert_eq!(ensemble_coupling_from_count(1.0, 0.012).unwrap(), 0.012);
        let g = ensemble_coupling_from_count(7e7, DEFAULT_G_SINGLE_HYBRID_MHZ).unwrap();
        assert!((g - 100.0).abs() < 1.0, "{g}");
        let g = ensemble_coupling_from_count(1e8, DEFAULT_G_SINGLE_HYBRID_MHZ).unwrap();
        assert!(rel(g, 120.0) < 1e-12);
        assert!(ensemble_coupling_from_count(0.5, 1.0).is_err());
    }

    #[test]
    fn density_route_realistic_sample() {
        let g = ensemble_coupling_from_density(&realistic_loop()).unwrap();
        assert!((300.0..=450.0).contains(&g), "{g}");
        // area-independent
        let g2 = ensemble_coupling_from_density(&LoopGeometry {
            area: 7e-12,
            ..realistic_loop()
        })
        .unwrap();
        assert!(rel(g, g2) < 1e-12);
        // closed form with √A cancelled
        let closed = (realistic_loop().density * realistic_loop().thickness).sqrt()
            * loop_shape_factor(50.0)
            * NV_LANDE_G
            * NV_MAGNETON_MHZ_PER_MT
            * 1e3
            * MU_0
            * 900e-9
            / (4.0 * core::f64::consts::PI * 2f64.sqrt());
        assert!(rel(g, closed) < 1e-12);
    }

    #[test]
    fn density_scaling() {
        let g = realistic_loop();
        let a = ensemble_coupling_from_density(&g).unwrap();
        let b = ensemble_coupling_from_density(&LoopGeometry {
            density: 4.0 * g.density,
            ..g
        })
        .unwrap();
        assert!(rel(b, 2.0 * a) < 1e-12);
        let tiny = ensemble_coupling_from_density(&LoopGeometry {
            density: 1e-30,
            ..g
        })
        .unwrap();
        assert!(tiny < 1e-20);
    }

    #[test]
    fn zero_point_current_examples() {
        let i = zero_point_current(5000.0, 10e-9).unwrap();
        assert!((i - 18.2e-9).abs() < 0.05e-9, "{i}");
        let i4 = zero_point_current(20000.0, 10e-9).unwrap();
        assert!(rel(i4, 2.0 * i) < 1e-12);
        assert!(zero_point_current(5000.0, 1e30).unwrap() < 1e-20);
    }

    #[test]
    fn qubit_resonator_examples() {
        assert_eq!(qubit_resonator_coupling(0.0, 1e-6, 1e-8).unwrap(), 0.0);
        let i_r0 = zero_point_current(5000.0, 10e-9).unwrap();
        let g = qubit_resonator_coupling(4e-12, 900e-9, i_r0).unwrap();
        assert!((90.0..110.0).contains(&g), "{g}");
        let g2 = qubit_resonator_coupling(8e-12, 900e-9, i_r0).unwrap();
        assert!(rel(g2, 2.0 * g) < 1e-14);
    }

    #[test]
    fn effective_rwa_examples() {
        let p = SystemParams::new(6000.0, 5000.0, 5000.0, 100.0, 100.0).unwrap();
        let e = effective_rwa(&p).unwrap();
        assert!(rel(e.g_eff, -10.0) < 1e-12);
        assert!(rel(e.omega_r_prime, 4990.0) < 1e-14);

        let p0 = SystemParams { g_qs: 0.0, ..p };
        let e0 = effective_rwa(&p0).unwrap();
        assert_eq!(e0.g_eff, 0.0);
        assert_eq!(e0.omega_s_prime, p.omega_s);

        let p = SystemParams::new(6050.0, 5000.0, 5000.0, 350.0, 350.0).unwrap();
        let e = effective_rwa(&p).unwrap();
        assert!((e.g_eff.abs() - 116.667).abs() < 1e-3);
    }

    #[test]
    fn regime_violation() {
        let p = SystemParams::new(1.0, 1.0, 0.5, 0.1, 0.1).unwrap();
        assert!(matches!(
            effective_rwa(&p),
            Err(Error::RegimeViolation { what: "delta_r", .. })
        ));
        assert!(effective_nonrwa(&p).is_err());
    }

    #[test]
    fn effective_nonrwa_examples() {
        let p = SystemParams::relative(9.0, 1.0, 1.0).unwrap();
        let e = effective_nonrwa(&p).unwrap();
        assert!((e.alpha_r - 0.225).abs() < 1e-15);
        assert!((e.g_eff + 0.225).abs() < 1e-15);

        let p = SystemParams::relative(2.0, 1.0, 0.05).unwrap();
        let e = effective_nonrwa(&p).unwrap();
        assert!((e.alpha_r - 4.0 / 3.0).abs() < 1e-15);
        assert!((e.g_eff + 4.0 / 3.0 * 0.0025).abs() < 1e-15);
    }

    #[test]
    fn nonrwa_reduces_to_rwa_for_large_qubit_frequency() {
        let mut last = f64::INFINITY;
        for scale in [1e3, 1e5, 1e7] {
            let p = SystemParams::new(scale + 1.0, scale, scale, 0.1, 0.1).unwrap();
            let d = rel(effective_nonrwa(&p).unwrap().g_eff, effective_rwa(&p).unwrap().g_eff);
            assert!(d < 1.0 / scale && d < last);
            last = d;
        }
    }

    #[test]
    fn squeeze_examples() {
        let s = squeeze_parameter(&SystemParams::relative(9.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((s.beta - (2.0 / 0.225 - 2.0)).abs() < 1e-12);
        assert!((s.sinh_sq - 0.0225).abs() < 1e-5, "{}", s.sinh_sq);
        assert!((s.sinh_sq - 0.022_504_893_409).abs() < 1e-11);
        assert!((s.r - 0.149).abs() < 1e-3);

        let s = squeeze_parameter(&SystemParams::relative(9.0, 1.0, 1e-9).unwrap()).unwrap();
        assert!(s.r < 1e-15);
        let s = squeeze_parameter(&SystemParams::relative(9.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(s.r, 0.0);

        let err = squeeze_parameter(&SystemParams::relative(2.0, 1.0, 1.0).unwrap()).unwrap_err();
        match err {
            Error::SqueezedFrameUndefined { beta } => assert!((beta + 0.5).abs() < 1e-12),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn squeeze_matches_bogoliubov_angle() {
        // tanh 2r = α g² / (ω_R − α g²)
        for g in [0.2, 0.5, 1.0, 1.3] {
            let p = SystemParams::relative(9.0, 1.0, g).unwrap();
            let e = effective_nonrwa(&p).unwrap();
            let kappa = e.alpha_r * g * g;
            let r = 0.5 * (kappa / e.omega_r_prime).atanh();
            let s = squeeze_parameter(&p).unwrap();
            assert!((s.r - r).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_coupling_examples() {
        let g = direct_ensemble_resonator_coupling(1e12, DEFAULT_G_SINGLE_DIRECT_MHZ).unwrap();
        assert!(rel(g, 10.0) < 1e-12);
        assert_eq!(direct_ensemble_resonator_coupling(1.0, 1e-5).unwrap(), 1e-5);
        let g = direct_ensemble_resonator_coupling(1e8, DEFAULT_G_SINGLE_DIRECT_MHZ).unwrap();
        assert!(rel(g, 0.1) < 1e-12);
    }

    #[test]
    fn hybrid_needs_orders_of_magnitude_fewer_spins() {
        let g_qs = ensemble_coupling_from_count(1e8, DEFAULT_G_SINGLE_HYBRID_MHZ).unwrap();
        let g_eff = mediated_coupling(1e-3, 1e-3, 100.0, g_qs);
        assert!(rel(g_eff.abs(), 12.0) < 1e-12);
        let n_direct = spins_required(10.0, DEFAULT_G_SINGLE_DIRECT_MHZ).unwrap();
        assert!(rel(n_direct, 1e12) < 1e-12);
        assert!(spins_required(12.0, DEFAULT_G_SINGLE_DIRECT_MHZ).unwrap() / 1e8 >= 1e3);
    }

    fn dispersive_params() -> impl Strategy<Value = SystemParams> {
        (1.0f64..3.0, 1.0f64..3.0, 0.5f64..1.5, 0.5f64..1.5, 0.001f64..0.2, 0.001f64..0.2).prop_map(
            |(dr, ds, wr, ws, gr, gs)| SystemParams::new(wr + dr.max(ws - wr + ds), wr, ws, gr, gs).unwrap(),
        )
    }

    proptest! {
        #[test]
        fn rwa_and_nonrwa_agree_to_first_order(p in dispersive_params()) {
            let a = effective_rwa(&p).unwrap();
            let b = effective_nonrwa(&p).unwrap();
            let eta_min = p.eta_r().min(p.eta_s());
            prop_assert!((a.g_eff - b.g_eff).abs() <= p.g_qr * p.g_qs / eta_min);
        }

        #[test]
        fn g_eff_is_symmetric_under_branch_swap(p in dispersive_params()) {
            let swapped = SystemParams { omega_r: p.omega_s, omega_s: p.omega_r, g_qr: p.g_qs, g_qs: p.g_qr, ..p };
            let a = effective_nonrwa(&p).unwrap().g_eff;
            let b = effective_nonrwa(&swapped).unwrap().g_eff;
            prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
        }

        #[test]
        fn g_eff_monotone(p in dispersive_params()) {
            let grid: Vec<f64> = (1..8).map(|k| k as f64 * 0.05).collect();
            for f in [effective_rwa, effective_nonrwa] {
                let by_gqr: Vec<f64> = grid.iter().map(|&g| f(&SystemParams { g_qr: g, ..p }).unwrap().g_eff.abs()).collect();
                let by_gqs: Vec<f64> = grid.iter().map(|&g| f(&SystemParams { g_qs: g, ..p }).unwrap().g_eff.abs()).collect();
                let by_wq: Vec<f64> = grid.iter().map(|&d| f(&SystemParams { omega_q: p.omega_q + 10.0 * d, ..p }).unwrap().g_eff.abs()).collect();
                prop_assert!(by_gqr.windows(2).all(|w| w[1] > w[0]));
                prop_assert!(by_gqs.windows(2).all(|w| w[1] > w[0]));
                prop_assert!(by_wq.windows(2).all(|w| w[1] < w[0]));
            }
        }
    }
}
