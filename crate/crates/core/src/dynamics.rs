//! Closed-system time evolution and state-transfer experiments.
//!
//! Times in [`TransferConfig`] and [`TransferResult`] are dimensionless `γt`
//! with `γ = |g_eff|` from [`effective_nonrwa`].

use alloc::{format, string::String, vec::Vec};
use core::fmt;

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hammodels::{build, dicke_state, Cutoffs, HamiltonianKind};
use crate::physpar::{effective_nonrwa, effective_rwa, ensemble_coupling_from_count, SystemParams};
use crate::qalgebra::{Operator, SpaceLabel, Spectrum, StateVector, C64, EXCITED, GROUND, QUBIT, SPIN};

pub const DEFAULT_T_MAX: f64 = 4.0;
pub const DEFAULT_N_STEPS: usize = 2001;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-4;
/// Largest Fock dimension per mode tried by the convergence loop.
pub const DEFAULT_CUTOFF_CAP: usize = 40;
/// Resonator and spin frequency used by [`sweep_ensemble_size`], MHz. Only
/// the detunings enter the rotating-wave coefficients.
pub const ENSEMBLE_REFERENCE_FREQUENCY_MHZ: f64 = 5000.0;
pub const FIG6_COUPLINGS: [f64; 6] = [0.025, 0.05, 0.1, 0.15, 0.2, 0.3];

/// `ψ(t_k) = e^{−iHt_k} ψ₀` for every requested time.
pub fn evolve(h: &Operator, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    let spec = Spectrum::of(h)?;
    let c = spec.coefficients(psi0)?;
    Ok(times.iter().map(|&t| spec.evolve_coefficients(&c, t)).collect())
}

/// `|⟨target|ψ⟩|²`.
pub fn fidelity(target: &StateVector, psi: &StateVector) -> Result<f64> {
    Ok(target.inner(psi)?.norm_sqr())
}

/// Fidelity at every time, from overlaps in the eigenbasis.
pub fn fidelity_trajectory(
    h: &Operator,
    psi0: &StateVector,
    target: &StateVector,
    times: &[f64],
) -> Result<Vec<f64>> {
    let spec = Spectrum::of(h)?;
    fidelity_from_spectrum(&spec, psi0, target, times)
}

fn fidelity_from_spectrum(
    spec: &Spectrum,
    psi0: &StateVector,
    target: &StateVector,
    times: &[f64],
) -> Result<Vec<f64>> {
    let c = spec.coefficients(psi0)?;
    let d = spec.coefficients(target)?;
    let weights: DVector<C64> = d.zip_map(&c, |dk, ck| dk.conj() * ck);
    let e = spec.energies();
    // both states are normalized, so overlaps below d·ε are round-off
    let floor = weights.len() as f64 * f64::EPSILON;
    Ok(times
        .iter()
        .map(|&t| {
            let amp: C64 = weights
                .iter()
                .zip(e.iter())
                .map(|(w, &ek)| {
                    let (s, co) = (ek * t).sin_cos();
                    w * C64::new(co, -s)
                })
                .sum();
            if amp.norm() <= floor {
                0.0
            } else {
                amp.norm_sqr()
            }
        })
        .collect())
}

/// Qubit/photon/spin-mode occupation label, e.g. `g,0,1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisLabel {
    pub qubit: usize,
    pub photons: usize,
    pub spin_excitations: usize,
}

impl BasisLabel {
    pub fn new(qubit: usize, photons: usize, spin_excitations: usize) -> Self {
        Self {
            qubit,
            photons,
            spin_excitations,
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = if self.qubit == EXCITED { "e" } else { "g" };
        write!(f, "{q},{},{}", self.photons, self.spin_excitations)
    }
}

impl core::str::FromStr for BasisLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidState(format!("bad basis label `{s}`, expected e.g. g,0,1"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let qubit = match parts[0] {
            "g" => GROUND,
            "e" => EXCITED,
            _ => return Err(bad()),
        };
        let photons = parts[1].parse().map_err(|_| bad())?;
        let spin_excitations = parts[2].parse().map_err(|_| bad())?;
        Ok(Self::new(qubit, photons, spin_excitations))
    }
}

/// Initial or target state.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Basis(BasisLabel),
    /// Amplitude list; normalized on resolution.
    Superposition(Vec<(C64, BasisLabel)>),
}

impl StateSpec {
    pub fn basis(qubit: usize, photons: usize, spin_excitations: usize) -> Self {
        Self::Basis(BasisLabel::new(qubit, photons, spin_excitations))
    }

    /// State on `space`. Qubit-free spaces accept only `g` labels; exact-spin
    /// spaces map spin-mode occupation 1 to the symmetric single excitation.
    pub fn resolve(&self, space: &SpaceLabel) -> Result<StateVector> {
        match self {
            Self::Basis(l) => basis_state(space, l),
            Self::Superposition(terms) => {
                if terms.is_empty() {
                    return Err(Error::InvalidState("empty superposition".into()));
                }
                let mut acc = DVector::<C64>::zeros(space.dim());
                for (amp, label) in terms {
                    acc += basis_state(space, label)?.amplitudes() * *amp;
                }
                if acc.norm() == 0.0 {
                    return Err(Error::InvalidState("superposition has zero norm".into()));
                }
                StateVector::normalized(space.clone(), acc)
            }
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Basis(l) => write!(f, "{l}"),
            Self::Superposition(terms) => {
                for (k, (amp, l)) in terms.iter().enumerate() {
                    if k > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{amp}@{l}")?;
                }
                Ok(())
            }
        }
    }
}

/// `g,0,1` for a basis state, or `amp@label;amp@label…` with complex
/// amplitudes such as `0.6`, `0+0.8i`.
impl core::str::FromStr for StateSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if !s.contains('@') {
            return Ok(Self::Basis(s.parse()?));
        }
        let terms = s
            .split(';')
            .map(|term| {
                let (amp, label) = term
                    .split_once('@')
                    .ok_or_else(|| Error::InvalidState(format!("bad superposition term `{term}`")))?;
                let amp: C64 = amp
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidState(format!("bad amplitude `{amp}`")))?;
                Ok((amp, label.parse()?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::Superposition(terms))
    }
}

fn basis_state(space: &SpaceLabel, l: &BasisLabel) -> Result<StateVector> {
    let has_qubit = space.position(QUBIT).is_some();
    if space.position(SPIN).is_none() && has_qubit {
        return match l.spin_excitations {
            0 => {
                let spins = space.factors().len() - 2;
                let mut levels = alloc::vec![GROUND; spins + 2];
                levels[0] = l.qubit;
                levels[1] = l.photons;
                StateVector::basis(space.clone(), &levels)
            }
            1 => dicke_state(space, l.qubit, l.photons),
            n => Err(Error::InvalidState(format!(
                "exact-spin model supports at most one spin excitation, got {n}"
            ))),
        };
    }
    if has_qubit {
        StateVector::basis(space.clone(), &[l.qubit, l.photons, l.spin_excitations])
    } else if l.qubit == GROUND {
        StateVector::basis(space.clone(), &[l.photons, l.spin_excitations])
    } else {
        Err(Error::InvalidState(format!(
            "label `{l}` excites the qubit, which the effective model has eliminated"
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferConfig {
    pub kind: HamiltonianKind,
    pub params: SystemParams,
    pub cut: Cutoffs,
    /// End of the `γt` window.
    pub t_max: f64,
    pub n_steps: usize,
    pub initial: StateSpec,
    pub target: StateSpec,
    /// Number of individual spins, read by [`HamiltonianKind::ExactSpins`].
    pub n_spins: usize,
    pub convergence_tol: f64,
    pub cutoff_cap: usize,
}

impl TransferConfig {
    /// Spin-to-photon transfer `|g,0,1⟩ → |g,1,0⟩` over `γt ∈ [0, 4]`.
    pub fn new(kind: HamiltonianKind, params: SystemParams) -> Self {
        let g = params.g_qr.max(params.g_qs) / params.omega_r;
        Self {
            kind,
            params,
            cut: Cutoffs::default_for_coupling(g),
            t_max: DEFAULT_T_MAX,
            n_steps: DEFAULT_N_STEPS,
            initial: StateSpec::basis(GROUND, 0, 1),
            target: StateSpec::basis(GROUND, 1, 0),
            n_spins: 3,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            cutoff_cap: DEFAULT_CUTOFF_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.cut.validate()?;
        if self.n_steps < 2 {
            return Err(Error::InvalidParameter {
                name: "n_steps",
                value: self.n_steps as f64,
                reason: "need at least two time samples",
            });
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_max",
                value: self.t_max,
                reason: "must be positive and finite",
            });
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "convergence_tol",
                value: self.convergence_tol,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    /// Uniform `γt` grid.
    pub fn grid(&self) -> Vec<f64> {
        let step = self.t_max / (self.n_steps - 1) as f64;
        (0..self.n_steps).map(|k| k as f64 * step).collect()
    }
}

/// Time unit `γ = |g_eff|` (counter-rotating form). Falls back to `ω_R` when
/// the mediated coupling vanishes.
pub fn gamma(params: &SystemParams) -> Result<f64> {
    let g = effective_nonrwa(params)?.g_eff.abs();
    Ok(if g > 0.0 { g } else { params.omega_r })
}

/// Norm and energy drift along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conservation {
    /// `max_t |‖ψ(t)‖ − 1|`.
    pub max_norm_defect: f64,
    /// `max_t |⟨H⟩_t − ⟨H⟩_0|`.
    pub max_energy_drift: f64,
    /// Spectral norm of `H`.
    pub h_norm: f64,
}

impl Conservation {
    pub fn holds(&self, norm_tol: f64, energy_rel_tol: f64) -> bool {
        self.max_norm_defect <= norm_tol && self.max_energy_drift <= energy_rel_tol * self.h_norm
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferResult {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub peak_time: f64,
    pub peak_fidelity: f64,
    pub cutoffs_used: Cutoffs,
    pub converged: bool,
    pub gamma: f64,
    pub conservation: Conservation,
}

struct Trajectory {
    fidelity: Vec<f64>,
    spectrum: Spectrum,
    h: Operator,
    psi0: StateVector,
}

fn trajectory(cfg: &TransferConfig, cut: Cutoffs, gamma: f64, grid: &[f64]) -> Result<Trajectory> {
    let h = build(cfg.kind, &cfg.params, cut, cfg.n_spins)?;
    let spectrum = Spectrum::of(&h)?;
    let psi0 = cfg.initial.resolve(h.space())?;
    let target = cfg.target.resolve(h.space())?;
    let times: Vec<f64> = grid.iter().map(|x| x / gamma).collect();
    let fidelity = fidelity_from_spectrum(&spectrum, &psi0, &target, &times)?;
    Ok(Trajectory {
        fidelity,
        spectrum,
        h,
        psi0,
    })
}

fn conservation(tr: &Trajectory, times: &[f64]) -> Result<Conservation> {
    let c = tr.spectrum.coefficients(&tr.psi0)?;
    let energy = |psi: &StateVector| tr.h.expectation(psi).map(|z| z.re);
    let e0 = energy(&tr.psi0)?;
    let mut out = Conservation {
        max_norm_defect: 0.0,
        max_energy_drift: 0.0,
        h_norm: tr.spectrum.energies().iter().fold(0.0f64, |m, e| m.max(e.abs())),
    };
    for &t in times {
        let psi = tr.spectrum.evolve_coefficients(&c, t);
        out.max_norm_defect = out.max_norm_defect.max((psi.norm() - 1.0).abs());
        out.max_energy_drift = out.max_energy_drift.max((energy(&psi)? - e0).abs());
    }
    Ok(out)
}

fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn doubled(cut: Cutoffs, cap: usize) -> Cutoffs {
    Cutoffs {
        n_photon: (2 * cut.n_photon).min(cap).max(cut.n_photon),
        n_spinmode: (2 * cut.n_spinmode).min(cap).max(cut.n_spinmode),
    }
}

/// One step of the cutoff-doubling loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceStep {
    pub cut: Cutoffs,
    pub next: Cutoffs,
    /// Max-norm change of the fidelity trajectory from `cut` to `next`.
    pub change: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub accepted: Cutoffs,
    pub converged: bool,
    pub steps: Vec<ConvergenceStep>,
}

struct Converged {
    report: ConvergenceReport,
    accepted: Trajectory,
}

fn converge(cfg: &TransferConfig, gamma: f64, grid: &[f64]) -> Result<Converged> {
    let mut cut = cfg.cut;
    let mut current = trajectory(cfg, cut, gamma, grid)?;
    let mut steps = Vec::new();
    loop {
        let next = doubled(cut, cfg.cutoff_cap);
        if next == cut {
            return Ok(Converged {
                report: ConvergenceReport {
                    accepted: cut,
                    converged: false,
                    steps,
                },
                accepted: current,
            });
        }
        let refined = trajectory(cfg, next, gamma, grid)?;
        let change = max_deviation(&current.fidelity, &refined.fidelity);
        steps.push(ConvergenceStep { cut, next, change });
        if change < cfg.convergence_tol {
            return Ok(Converged {
                report: ConvergenceReport {
                    accepted: cut,
                    converged: true,
                    steps,
                },
                accepted: current,
            });
        }
        cut = next;
        current = refined;
    }
}

/// Doubles both cutoffs until the fidelity trajectory moves by less than
/// the configured tolerance; the smaller cutoff of the converged pair is
/// accepted.
pub fn cutoff_convergence(cfg: &TransferConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let g = gamma(&cfg.params)?;
    Ok(converge(cfg, g, &cfg.grid())?.report)
}

pub fn transfer_experiment(cfg: &TransferConfig) -> Result<TransferResult> {
    cfg.validate()?;
    let g = gamma(&cfg.params)?;
    let grid = cfg.grid();
    let Converged { report, accepted } = converge(cfg, g, &grid)?;
    let times: Vec<f64> = grid.iter().map(|x| x / g).collect();
    let conservation = conservation(&accepted, &times)?;
    let (peak_idx, peak_fidelity) = accepted
        .fidelity
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, f)| if f > best.1 { (k, f) } else { best });
    Ok(TransferResult {
        peak_time: grid[peak_idx],
        peak_fidelity,
        times: grid,
        fidelity: accepted.fidelity,
        cutoffs_used: report.accepted,
        converged: report.converged,
        gamma: g,
        conservation,
    })
}

/// Configuration for one point of a coupling sweep: `g_QR = g_QS = g ω_R`,
/// starting cutoffs no lower than the default rule for `g`.
pub fn sweep_point(base: &TransferConfig, g: f64) -> Result<TransferConfig> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "g",
            value: g,
            reason: "sweep couplings must be positive",
        });
    }
    let mut cfg = base.clone();
    cfg.params.g_qr = g * base.params.omega_r;
    cfg.params.g_qs = g * base.params.omega_r;
    cfg.cut = base.cut.max(Cutoffs::default_for_coupling(g));
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// Coupling in units of `ω_R`.
    pub g: f64,
    pub result: TransferResult,
}

/// Maps `f` over `items`, on the rayon pool with the `parallel` feature.
/// Output order matches input order and the first error in input order wins.
fn ordered_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    #[cfg(feature = "parallel")]
    let out: Vec<Result<U>> = {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let out: Vec<Result<U>> = items.iter().map(f).collect();
    out.into_iter().collect()
}

/// Independent transfer experiments, results in input order.
pub fn transfer_batch(cfgs: &[TransferConfig]) -> Result<Vec<TransferResult>> {
    ordered_map(cfgs, transfer_experiment)
}

pub fn sweep_coupling(base: &TransferConfig, g_values: &[f64]) -> Result<Vec<SweepRow>> {
    ordered_map(g_values, |&g| {
        Ok(SweepRow {
            g,
            result: transfer_experiment(&sweep_point(base, g)?)?,
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleRow {
    pub n_spins: f64,
    pub g_qs: f64,
    /// `|g_eff|` of the qubit-mediated route.
    pub g_eff_hybrid: f64,
    /// `√N g_single_direct`.
    pub g_rs_direct: f64,
}

/// Mediated versus direct coupling as the ensemble grows, with equal
/// detunings `Δ_R = Δ_S = delta`.
pub fn sweep_ensemble_size(
    n_values: &[f64],
    g_single_hybrid: f64,
    g_single_direct: f64,
    g_qr: f64,
    delta: f64,
) -> Result<Vec<EnsembleRow>> {
    let omega = ENSEMBLE_REFERENCE_FREQUENCY_MHZ;
    n_values
        .iter()
        .map(|&n| {
            let g_qs = ensemble_coupling_from_count(n, g_single_hybrid)?;
            let p = SystemParams::new(omega + delta, omega, omega, g_qr, g_qs)?;
            Ok(EnsembleRow {
                n_spins: n,
                g_qs,
                g_eff_hybrid: effective_rwa(&p)?.g_eff.abs(),
                g_rs_direct: ensemble_coupling_from_count(n, g_single_direct)?,
            })
        })
        .collect()
}

/// Human-readable summary of a convergence report.
pub fn describe_convergence(r: &ConvergenceReport) -> String {
    let mut s = format!(
        "accepted n_photon={} n_spinmode={} converged={}",
        r.accepted.n_photon, r.accepted.n_spinmode, r.converged
    );
    for st in &r.steps {
        s.push_str(&format!(
            "; {}->{}: {:.3e}",
            st.cut.n_photon, st.next.n_photon, st.change
        ));
    }
    s
}
