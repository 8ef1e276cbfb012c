//! Hamiltonian builders for the qubit–resonator–ensemble circuit.
//!
//! Full models live on `(qubit, photon, spin)`; qubit-eliminated effective
//! models live on `(photon, spin)`. The exact multi-spin model replaces the
//! collective mode by `spin1 … spinN`, each a two-level factor.

use alloc::{format, string::String, vec::Vec};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::physpar::{effective_nonrwa, effective_rwa, squeeze_parameter, SystemParams};
use crate::qalgebra::{
    local_product, Fock, pauli, Operator, PauliKind, SpaceLabel, StateVector, C64, GROUND,
    PHOTON, QUBIT, SPIN,
};

pub const MAX_EXACT_SPINS: usize = 6;

/// Fock truncation of the two bosonic modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cutoffs {
    pub n_photon: usize,
    pub n_spinmode: usize,
}

impl Cutoffs {
    pub fn new(n_photon: usize, n_spinmode: usize) -> Result<Self> {
        let c = Self {
            n_photon,
            n_spinmode,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn validate(&self) -> Result<()> {
        for dim in [self.n_photon, self.n_spinmode] {
            if dim < 2 {
                return Err(Error::InvalidDimension {
                    dim,
                    reason: "cutoffs must be at least 2",
                });
            }
        }
        Ok(())
    }

    /// 6 levels up to `g = 0.1 ω_R`, 14 beyond.
    pub fn default_for_coupling(g_over_omega_r: f64) -> Self {
        let n = if g_over_omega_r <= 0.1 { 6 } else { 14 };
        Self {
            n_photon: n,
            n_spinmode: n,
        }
    }

    pub fn max(self, other: Self) -> Self {
        Self {
            n_photon: self.n_photon.max(other.n_photon),
            n_spinmode: self.n_spinmode.max(other.n_spinmode),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamiltonianKind {
    RabiFull,
    JaynesCummings,
    EffStrong,
    EffUltra,
    EffSqueezed,
    EffMixed,
    ExactSpins,
}

impl HamiltonianKind {
    pub const ALL: [Self; 7] = [
        Self::RabiFull,
        Self::JaynesCummings,
        Self::EffStrong,
        Self::EffUltra,
        Self::EffSqueezed,
        Self::EffMixed,
        Self::ExactSpins,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::RabiFull => "rabi_full",
            Self::JaynesCummings => "jaynes_cummings",
            Self::EffStrong => "eff_strong",
            Self::EffUltra => "eff_ultra",
            Self::EffSqueezed => "eff_squeezed",
            Self::EffMixed => "eff_mixed",
            Self::ExactSpins => "exact_spins",
        }
    }

    /// Whether the operator carries a qubit factor.
    pub fn has_qubit(self) -> bool {
        matches!(
            self,
            Self::RabiFull | Self::JaynesCummings | Self::EffMixed | Self::ExactSpins
        )
    }
}

impl core::str::FromStr for HamiltonianKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s || (s == "jc" && *k == Self::JaynesCummings))
            .ok_or_else(|| Error::InvalidState(format!("unknown hamiltonian kind `{s}`")))
    }
}

/// Which qubit–mode couplings keep their counter-rotating parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingForm {
    /// Both couplings in Jaynes–Cummings form.
    Rwa,
    /// Both couplings in Rabi form.
    NonRwa,
    /// Rabi form for the resonator, Jaynes–Cummings form for the ensemble.
    Mixed,
}

impl CouplingForm {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rwa => "rwa",
            Self::NonRwa => "nonrwa",
            Self::Mixed => "mixed",
        }
    }
}

pub fn hybrid_space(cut: Cutoffs) -> Result<SpaceLabel> {
    cut.validate()?;
    SpaceLabel::new([(QUBIT, 2), (PHOTON, cut.n_photon), (SPIN, cut.n_spinmode)])
}

pub fn mode_space(cut: Cutoffs) -> Result<SpaceLabel> {
    cut.validate()?;
    SpaceLabel::new([(PHOTON, cut.n_photon), (SPIN, cut.n_spinmode)])
}

pub fn spin_name(j: usize) -> String {
    format!("spin{}", j + 1)
}

pub fn exact_space(n_photon: usize, n_spins: usize) -> Result<SpaceLabel> {
    if n_spins == 0 || n_spins > MAX_EXACT_SPINS {
        return Err(Error::TooManySpins {
            requested: n_spins,
            max: MAX_EXACT_SPINS,
        });
    }
    let mut factors: Vec<(String, usize)> = Vec::with_capacity(n_spins + 2);
    factors.push((QUBIT.into(), 2));
    factors.push((PHOTON.into(), n_photon));
    factors.extend((0..n_spins).map(|j| (spin_name(j), 2)));
    if n_photon < 2 {
        return Err(Error::InvalidDimension {
            dim: n_photon,
            reason: "cutoffs must be at least 2",
        });
    }
    SpaceLabel::new(factors)
}

/// Sum of coefficient-weighted local products on one space.
struct Terms<'s> {
    space: &'s SpaceLabel,
    acc: Operator,
}

impl<'s> Terms<'s> {
    fn new(space: &'s SpaceLabel) -> Self {
        Self {
            space,
            acc: Operator::zeros(space.clone()),
        }
    }

    fn add(&mut self, coef: f64, parts: &[(&str, &Operator)]) -> Result<&mut Self> {
        if coef != 0.0 {
            self.acc = &self.acc + &(local_product(self.space, parts)? * coef);
        }
        Ok(self)
    }

    fn finish(self) -> Operator {
        self.acc
    }
}

/// `½ω_Q σ_z + ω_R a†a + ω_S s†s` on the hybrid space.
pub fn free_part(params: &SystemParams, cut: Cutoffs) -> Result<Operator> {
    params.validate()?;
    let space = hybrid_space(cut)?;
    let (ph, sp) = (Fock::new(cut.n_photon)?, Fock::new(cut.n_spinmode)?);
    let mut t = Terms::new(&space);
    t.add(0.5 * params.omega_q, &[(QUBIT, &pauli(PauliKind::Z))])?
        .add(params.omega_r, &[(PHOTON, &ph.number())])?
        .add(params.omega_s, &[(SPIN, &sp.number())])?;
    Ok(t.finish())
}

/// Qubit–mode couplings in the requested form.
pub fn interaction_part(params: &SystemParams, cut: Cutoffs, form: CouplingForm) -> Result<Operator> {
    params.validate()?;
    let space = hybrid_space(cut)?;
    let (ph, sp) = (Fock::new(cut.n_photon)?, Fock::new(cut.n_spinmode)?);
    let (sx, splus, sminus) = (
        pauli(PauliKind::X),
        pauli(PauliKind::Plus),
        pauli(PauliKind::Minus),
    );
    let mut t = Terms::new(&space);
    let rabi = |t: &mut Terms, g: f64, name: &str, m: &Fock| -> Result<()> {
        t.add(g, &[(QUBIT, &sx), (name, &m.quadrature())])?;
        Ok(())
    };
    let jc = |t: &mut Terms, g: f64, name: &str, m: &Fock| -> Result<()> {
        t.add(g, &[(QUBIT, &splus), (name, &m.a)])?
            .add(g, &[(QUBIT, &sminus), (name, &m.ad)])?;
        Ok(())
    };
    match form {
        CouplingForm::Rwa => {
            jc(&mut t, params.g_qr, PHOTON, &ph)?;
            jc(&mut t, params.g_qs, SPIN, &sp)?;
        }
        CouplingForm::NonRwa => {
            rabi(&mut t, params.g_qr, PHOTON, &ph)?;
            rabi(&mut t, params.g_qs, SPIN, &sp)?;
        }
        CouplingForm::Mixed => {
            rabi(&mut t, params.g_qr, PHOTON, &ph)?;
            jc(&mut t, params.g_qs, SPIN, &sp)?;
        }
    }
    Ok(t.finish())
}

pub fn build_rabi_full(params: &SystemParams, cut: Cutoffs) -> Result<Operator> {
    Ok(free_part(params, cut)? + interaction_part(params, cut, CouplingForm::NonRwa)?)
}

pub fn build_jc(params: &SystemParams, cut: Cutoffs) -> Result<Operator> {
    Ok(free_part(params, cut)? + interaction_part(params, cut, CouplingForm::Rwa)?)
}

/// Beam-splitter Hamiltonian `ω'_R a†a + ω'_S s†s + g_eff(a†s + as†)`.
pub fn build_eff_strong(params: &SystemParams, cut: Cutoffs) -> Result<Operator> {
    let e = effective_rwa(params)?;
    let space = mode_space(cut)?;
    let (ph, sp) = (Fock::new(cut.n_photon)?, Fock::new(cut.n_spinmode)?);
    let mut t = Terms::new(&space);
    t.add(e.omega_r_prime, &[(PHOTON, &ph.number())])?
        .add(e.omega_s_prime, &[(SPIN, &sp.number())])?
        .add(e.g_eff, &[(PHOTON, &ph.ad), (SPIN, &sp.a)])?
        .add(e.g_eff, &[(PHOTON, &ph.a), (SPIN, &sp.ad)])?;
    Ok(t.finish())
}

/// Counter-rotating effective Hamiltonian with quadrature coupling and
/// single-mode pair terms.
pub fn build_eff_ultra(params: &SystemParams, cut: Cutoffs) -> Result<Operator> {
    let e = effective_nonrwa(params)?;
    let space = mode_space(cut)?;
    let (ph, sp) = (Fock::new(cut.n_photon)?, Fock::new(cut.n_spinmode)?);
    let mut t = Terms::new(&space);
    t.add(e.omega_r_prime, &[(PHOTON, &ph.number())])?
        .add(e.omega_s_prime, &[(SPIN, &sp.number())])?
        .add(e.g_eff, &[(PHOTON, &ph.quadrature()), (SPIN, &sp.quadrature())])?
        .add(
            -0.5 * e.alpha_r * params.g_qr * params.g_qr,
            &[(PHOTON, &ph.pair())],
        )?
        .add(
            -0.5 * e.alpha_s * params.g_qs * params.g_qs,
            &[(SPIN, &sp.pair())],
        )?;
    Ok(t.finish())
}

/// Photon-mode Bogoliubov frame of [`build_eff_ultra`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezedFrame {
    /// Signed squeezing parameter used in the dressed-frequency formula (`−|r|`).
    pub r: f64,
    pub dressed_frequency: f64,
    /// `cosh r − sinh r`.
    pub coupling_factor: f64,
    /// Vacuum energy `(ε − ω'_R)/2` removed by the transformation.
    pub vacuum_shift: f64,
}

pub fn squeezed_frame(params: &SystemParams) -> Result<SqueezedFrame> {
    let sq = squeeze_parameter(params)?;
    let e = effective_nonrwa(params)?;
    let kappa = e.alpha_r * params.g_qr * params.g_qr;
    let r = -sq.r;
    let (sh, ch) = (r.sinh(), r.cosh());
    let eps = e.omega_r_prime * (sh * sh + ch * ch) + 2.0 * kappa * sh * ch;
    Ok(SqueezedFrame {
        r,
        dressed_frequency: eps,
        coupling_factor: ch - sh,
        vacuum_shift: 0.5 * (eps - e.omega_r_prime),
    })
}

pub fn build_eff_squeezed(params: &SystemParams, cut: Cutoffs) -> Result<Operator> {
    let frame = squeezed_frame(params)?;
    let e = effective_nonrwa(params)?;
    let space = mode_space(cut)?;
    let (ph, sp) = (Fock::new(cut.n_photon)?, Fock::new(cut.n_spinmode)?);
    let mut t = Terms::new(&space);
    t.add(frame.dressed_frequency, &[(PHOTON, &ph.number())])?
        .add(e.omega_s_prime, &[(SPIN, &sp.number())])?
        .add(
            e.g_eff * frame.coupling_factor,
            &[(PHOTON, &ph.quadrature()), (SPIN, &sp.quadrature())],
        )?
        .add(
            -0.5 * e.alpha_s * params.g_qs * params.g_qs,
            &[(SPIN, &sp.pair())],
        )?;
    Ok(t.finish())
}

/// Ultrastrong resonator, strong ensemble: second-order exchange terms plus
/// the retained third-order qubit–photon lines.
pub fn build_eff_mixed(params: &SystemParams, cut: Cutoffs) -> Result<Operator> {
    let (dr, ds) = params.dispersive_detunings()?;
    let eta_r = params.eta_r();
    let (gr, gs) = (params.g_qr, params.g_qs);
    let alpha_r = 1.0 / dr + 1.0 / eta_r;
    let space = hybrid_space(cut)?;
    let (ph, sp) = (Fock::new(cut.n_photon)?, Fock::new(cut.n_spinmode)?);
    let (sz, up, dn) = (
        pauli(PauliKind::Z),
        pauli(PauliKind::Plus),
        pauli(PauliKind::Minus),
    );
    let c_eta = alpha_r * 2.0 * gr * gr * gr / (3.0 * eta_r);
    let c_delta = alpha_r * 2.0 * gr * gr * gr / (3.0 * dr);
    let w = |d: &[bool]| ph.word(d);
    let (ad, a) = (true, false);

    let mut t = Terms::new(&space);
    t.add(0.5 * params.omega_q, &[(QUBIT, &sz)])?
        .add(params.omega_r - alpha_r * gr * gr, &[(PHOTON, &ph.number())])?
        .add(params.omega_s - gs * gs / ds, &[(SPIN, &sp.number())])?
        .add(
            -gr * gs / (2.0 * ds),
            &[(PHOTON, &ph.quadrature()), (SPIN, &sp.quadrature())],
        )?
        .add(-gr * gs / (2.0 * dr), &[(PHOTON, &ph.ad), (SPIN, &sp.a)])?
        .add(-gr * gs / (2.0 * dr), &[(PHOTON, &ph.a), (SPIN, &sp.ad)])?
        .add(-gr * gs / (2.0 * eta_r), &[(PHOTON, &ph.ad), (SPIN, &sp.ad)])?
        .add(-gr * gs / (2.0 * eta_r), &[(PHOTON, &ph.a), (SPIN, &sp.a)])?;

    // qubit-photon linear exchange
    for (c, q, word) in [
        (c_eta, &up, [a]),
        (c_eta, &dn, [ad]),
        (2.0 * c_eta, &up, [ad]),
        (2.0 * c_eta, &dn, [a]),
        (c_delta, &up, [ad]),
        (c_delta, &dn, [a]),
        (2.0 * c_delta, &up, [a]),
        (2.0 * c_delta, &dn, [ad]),
    ] {
        t.add(-c, &[(QUBIT, q), (PHOTON, &w(&word))])?;
    }

    // three-photon processes
    for (c, q, word) in [
        (c_eta, &up, [ad, ad, ad]),
        (c_eta, &up, [ad, a, a]),
        (2.0 * c_eta, &up, [ad, ad, a]),
        (c_eta, &dn, [a, a, a]),
        (c_eta, &dn, [ad, ad, a]),
        (2.0 * c_eta, &dn, [ad, a, a]),
        (c_delta, &dn, [ad, ad, ad]),
        (c_delta, &dn, [ad, a, a]),
        (2.0 * c_delta, &dn, [ad, ad, a]),
        (c_delta, &up, [a, a, a]),
        (c_delta, &up, [ad, ad, a]),
        (2.0 * c_delta, &up, [ad, a, a]),
    ] {
        t.add(-c, &[(QUBIT, q), (PHOTON, &w(&word))])?;
    }
    Ok(t.finish())
}

/// Individual-spin model in the flux (persistent-current) basis at the
/// degeneracy point:
/// `½ω_Q σ_x + ω_R a†a + g_QR σ_z(a + a†) + Σ_j [½ω_S τ_z^j + g_s σ_z τ_x^j]`
/// with `g_s = g_QS/√N`.
pub fn build_exact_spins_flux(params: &SystemParams, n_spins: usize, n_photon: usize) -> Result<Operator> {
    params.validate()?;
    let space = exact_space(n_photon, n_spins)?;
    let ph = Fock::new(n_photon)?;
    let (sx, sz) = (pauli(PauliKind::X), pauli(PauliKind::Z));
    let g_s = params.g_qs / (n_spins as f64).sqrt();
    let mut t = Terms::new(&space);
    t.add(0.5 * params.omega_q, &[(QUBIT, &sx)])?
        .add(params.omega_r, &[(PHOTON, &ph.number())])?
        .add(params.g_qr, &[(QUBIT, &sz), (PHOTON, &ph.quadrature())])?;
    for j in 0..n_spins {
        let name = spin_name(j);
        t.add(0.5 * params.omega_s, &[(name.as_str(), &sz)])?
            .add(g_s, &[(QUBIT, &sz), (name.as_str(), &sx)])?;
    }
    Ok(t.finish())
}

/// Hadamard on the qubit factor: maps the flux basis to the qubit eigenbasis
/// at the degeneracy point (`σ_x ↔ σ_z`).
pub fn eigenbasis_rotation(space: &SpaceLabel) -> Result<Operator> {
    let h = (pauli(PauliKind::X) + pauli(PauliKind::Z)) * core::f64::consts::FRAC_1_SQRT_2;
    local_product(space, &[(QUBIT, &h)])
}

/// [`build_exact_spins_flux`] expressed in the qubit eigenbasis.
pub fn build_exact_spins(params: &SystemParams, n_spins: usize, cut: Cutoffs) -> Result<Operator> {
    let flux = build_exact_spins_flux(params, n_spins, cut.n_photon)?;
    let w = eigenbasis_rotation(flux.space())?;
    Ok(&(&w * &flux) * &w)
}

/// `|q, n⟩ ⊗ (1/√N) Σ_j τ_+^j |g…g⟩`, the symmetric single-spin excitation.
pub fn dicke_state(space: &SpaceLabel, qubit_level: usize, photons: usize) -> Result<StateVector> {
    let n_spins = space.factors().len().saturating_sub(2);
    let spins_in_place = (0..n_spins).all(|j| space.position(&spin_name(j)) == Some(j + 2));
    if n_spins == 0 || !spins_in_place || space.position(QUBIT) != Some(0) || space.position(PHOTON) != Some(1) {
        return Err(Error::InvalidState("not an exact-spin space".into()));
    }
    let mut amps = nalgebra::DVector::zeros(space.dim());
    let amp = C64::new(1.0 / (n_spins as f64).sqrt(), 0.0);
    for j in 0..n_spins {
        let mut levels: Vec<usize> = alloc::vec![GROUND; n_spins + 2];
        levels[0] = qubit_level;
        levels[1] = photons;
        levels[j + 2] = crate::qalgebra::EXCITED;
        amps[space.index_of(&levels)?] = amp;
    }
    StateVector::new(space.clone(), amps)
}

/// Dispatch by kind. `n_spins` is read only for [`HamiltonianKind::ExactSpins`].
pub fn build(kind: HamiltonianKind, params: &SystemParams, cut: Cutoffs, n_spins: usize) -> Result<Operator> {
    match kind {
        HamiltonianKind::RabiFull => build_rabi_full(params, cut),
        HamiltonianKind::JaynesCummings => build_jc(params, cut),
        HamiltonianKind::EffStrong => build_eff_strong(params, cut),
        HamiltonianKind::EffUltra => build_eff_ultra(params, cut),
        HamiltonianKind::EffSqueezed => build_eff_squeezed(params, cut),
        HamiltonianKind::EffMixed => build_eff_mixed(params, cut),
        HamiltonianKind::ExactSpins => build_exact_spins(params, n_spins, cut),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalgebra::{commutator, Spectrum, EXCITED};
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;

    const E: usize = EXCITED;
    const G: usize = GROUND;

    fn cut(n: usize) -> Cutoffs {
        Cutoffs::uniform(n).unwrap()
    }

    fn re(h: &Operator, row: &[usize], col: &[usize]) -> f64 {
        let z = h.element(row, col).unwrap();
        assert!(z.im.abs() < 1e-15);
        z.re
    }

    fn sorted_eigs(h: &Operator) -> Vec<f64> {
        Spectrum::of(h).unwrap().energies().iter().copied().collect()
    }

    fn strong() -> SystemParams {
        SystemParams::relative(2.0, 1.0, 0.05).unwrap()
    }

    fn ultra() -> SystemParams {
        SystemParams::relative(9.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn cutoff_rules() {
        assert!(Cutoffs::new(1, 4).is_err());
        assert_eq!(Cutoffs::default_for_coupling(0.05), cut(6));
        assert_eq!(Cutoffs::default_for_coupling(0.1), cut(6));
        assert_eq!(Cutoffs::default_for_coupling(1.0), cut(14));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in HamiltonianKind::ALL {
            assert_eq!(k.as_str().parse::<HamiltonianKind>().unwrap(), k);
        }
        assert!("rabi".parse::<HamiltonianKind>().is_err());
    }

    #[test]
    fn uncoupled_rabi_spectrum() {
        let p = SystemParams::new(2.0, 1.0, 0.7, 0.0, 0.0).unwrap();
        let h = build_rabi_full(&p, cut(3)).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
        let mut expected: Vec<f64> = Vec::new();
        for q in [1.0, -1.0] {
            for n in 0..3 {
                for m in 0..3 {
                    expected.push(q + n as f64 + 0.7 * m as f64);
                }
            }
        }
        expected.sort_by(f64::total_cmp);
        for (a, b) in sorted_eigs(&h).iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rabi_matrix_elements() {
        let p = SystemParams::new(2.0, 1.0, 1.0, 0.3, 0.2).unwrap();
        let h = build_rabi_full(&p, cut(4)).unwrap();
        assert_eq!(re(&h, &[E, 0, 0], &[G, 1, 0]), 0.3);
        assert_eq!(re(&h, &[E, 1, 0], &[G, 0, 0]), 0.3);
        assert_eq!(re(&h, &[E, 0, 1], &[G, 0, 0]), 0.2);
    }

    #[test]
    fn bloch_siegert_ground_state() {
        let p = SystemParams::relative(2.0, 1.0, 0.3).unwrap();
        let e0 = sorted_eigs(&build_rabi_full(&p, cut(12)).unwrap())[0];
        assert!(e0 < -1.0 - 1e-3, "{e0}");
    }

    fn excitation_number(c: Cutoffs) -> Operator {
        let space = hybrid_space(c).unwrap();
        let (ph, sp) = (Fock::new(c.n_photon).unwrap(), Fock::new(c.n_spinmode).unwrap());
        let up_proj = &pauli(PauliKind::Plus) * &pauli(PauliKind::Minus);
        let mut t = Terms::new(&space);
        t.add(1.0, &[(QUBIT, &up_proj)])
            .unwrap()
            .add(1.0, &[(PHOTON, &ph.number())])
            .unwrap()
            .add(1.0, &[(SPIN, &sp.number())])
            .unwrap();
        t.finish()
    }

    fn total_excitation(levels: &[usize]) -> usize {
        usize::from(levels[0] == E) + levels[1] + levels[2]
    }

    #[test]
    fn jc_conserves_excitations() {
        let p = SystemParams::new(2.0, 1.0, 0.9, 0.1, 0.07).unwrap();
        let h = build_jc(&p, cut(5)).unwrap();
        assert!(commutator(&h, &excitation_number(cut(5))).unwrap().max_abs() < 1e-14);
        assert_eq!(re(&h, &[E, 1, 0], &[G, 0, 0]), 0.0);
    }

    #[test]
    fn jc_single_excitation_block() {
        let p = SystemParams::new(2.0, 1.1, 0.9, 0.1, 0.07).unwrap();
        let h = build_jc(&p, cut(4)).unwrap();
        // span{|e,0,0⟩, |g,1,0⟩, |g,0,1⟩}, energies relative to the |g⟩ offset
        let b = DMatrix::from_row_slice(3, 3, &[2.0, 0.1, 0.07, 0.1, 1.1, 0.0, 0.07, 0.0, 0.9]);
        let mut want: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().map(|e| e - 1.0).collect();
        want.sort_by(f64::total_cmp);
        let space = h.space().clone();
        let one_exc: Vec<usize> = (0..space.dim())
            .filter(|&i| total_excitation(&space.levels_of(i)) == 1)
            .collect();
        let block = DMatrix::from_fn(3, 3, |i, j| h.matrix()[(one_exc[i], one_exc[j])].re);
        let mut got: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn jc_differs_from_rabi_only_by_two_excitation_jumps() {
        let p = SystemParams::new(2.0, 1.0, 0.9, 0.2, 0.3).unwrap();
        let c = cut(4);
        let d = build_rabi_full(&p, c).unwrap() - build_jc(&p, c).unwrap();
        let space = d.space().clone();
        let mut nonzero = 0;
        for i in 0..space.dim() {
            for j in 0..space.dim() {
                if d.matrix()[(i, j)].norm() != 0.0 {
                    nonzero += 1;
                    let (ni, nj) = (
                        total_excitation(&space.levels_of(i)),
                        total_excitation(&space.levels_of(j)),
                    );
                    assert_eq!(ni.abs_diff(nj), 2);
                }
            }
        }
        assert!(nonzero > 0);
    }

    #[test]
    fn eff_strong_structure() {
        let p = SystemParams::new(6000.0, 5000.0, 5010.0, 100.0, 100.0).unwrap();
        let e = effective_rwa(&p).unwrap();
        let h = build_eff_strong(&p, cut(4)).unwrap();
        assert_eq!(h.space(), &mode_space(cut(4)).unwrap());
        assert_eq!(re(&h, &[1, 0], &[1, 0]), e.omega_r_prime);
        assert_eq!(re(&h, &[0, 1], &[0, 1]), e.omega_s_prime);
        assert_eq!(re(&h, &[1, 0], &[0, 1]), e.g_eff);
        // beam splitter conserves a†a + s†s
        let space = h.space().clone();
        for i in 0..space.dim() {
            for j in 0..space.dim() {
                if h.matrix()[(i, j)].norm() != 0.0 {
                    let (li, lj) = (space.levels_of(i), space.levels_of(j));
                    assert_eq!(li[0] + li[1], lj[0] + lj[1]);
                }
            }
        }
    }

    #[test]
    fn eff_strong_resonant_swap() {
        // ω'_R = ω'_S when ω_R = ω_S and g_QR = g_QS
        let p = SystemParams::new(2.0, 1.0, 1.0, 0.05, 0.05).unwrap();
        let e = effective_rwa(&p).unwrap();
        let h = build_eff_strong(&p, cut(3)).unwrap();
        let t = core::f64::consts::PI / (2.0 * e.g_eff.abs());
        let psi = StateVector::basis(h.space().clone(), &[1, 0]).unwrap();
        let target = StateVector::basis(h.space().clone(), &[0, 1]).unwrap();
        let spec = Spectrum::of(&h).unwrap();
        let out = spec.evolve_coefficients(&spec.coefficients(&psi).unwrap(), t);
        assert!((target.inner(&out).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    fn swap_modes(h: &Operator) -> Operator {
        let space = h.space().clone();
        let d = space.dim();
        let perm: Vec<usize> = (0..d)
            .map(|i| {
                let l = space.levels_of(i);
                space.index_of(&[l[1], l[0]]).unwrap()
            })
            .collect();
        let m = DMatrix::from_fn(d, d, |i, j| h.matrix()[(perm[i], perm[j])]);
        Operator::new(space, m).unwrap()
    }

    #[test]
    fn eff_ultra_examples() {
        let p = SystemParams::relative(9.0, 1.0, 0.8).unwrap();
        let h = build_eff_ultra(&p, cut(5)).unwrap();
        assert_eq!(swap_modes(&h), h);
        let e = effective_nonrwa(&p).unwrap();
        let pair = re(&h, &[2, 0], &[0, 0]);
        assert!((pair + 2f64.sqrt() / 2.0 * e.alpha_r * 0.64).abs() < 1e-15);
    }

    #[test]
    fn eff_ultra_approaches_eff_strong_for_large_qubit_frequency() {
        let c = cut(4);
        let mut last = f64::INFINITY;
        for scale in [1e2, 1e4, 1e6] {
            let p = SystemParams::new(scale + 1.0, scale, scale, 0.05, 0.05).unwrap();
            let ultra = build_eff_ultra(&p, c).unwrap() * (1.0 / scale);
            let strong = build_eff_strong(&p, c).unwrap() * (1.0 / scale);
            let defect = (ultra - strong).max_abs();
            // surviving pieces are the counter-rotating a†s† + as and the pair terms
            assert!(defect < 1e-2 / scale && defect < last);
            last = defect;
        }
    }

    #[test]
    fn squeezed_reduces_to_ultra_without_squeezing() {
        let p = SystemParams::new(9.0, 1.0, 1.0, 0.0, 0.3).unwrap();
        let a = build_eff_squeezed(&p, cut(5)).unwrap();
        let b = build_eff_ultra(&p, cut(5)).unwrap();
        assert!((a - b).max_abs() < 1e-15);
    }

    #[test]
    fn squeezed_frame_matches_bogoliubov() {
        for g in [0.3, 0.7, 1.0, 1.2] {
            let p = SystemParams::relative(9.0, 1.0, g).unwrap();
            let e = effective_nonrwa(&p).unwrap();
            let kappa = e.alpha_r * g * g;
            // eigenvalues of the dynamical matrix [[ω', -κ], [κ, -ω']]
            let eps = (e.omega_r_prime * e.omega_r_prime - kappa * kappa).sqrt();
            let f = squeezed_frame(&p).unwrap();
            assert!((f.dressed_frequency - eps).abs() < 1e-12);
            // X quadrature rescaled by ((ω'+κ)/(ω'-κ))^{1/4}
            let lambda = ((e.omega_r_prime + kappa) / (e.omega_r_prime - kappa)).powf(0.25);
            assert!((f.coupling_factor - lambda).abs() < 1e-12);
            assert!(f.coupling_factor > 1.0);
        }
    }

    #[test]
    fn squeezed_spectrum_equals_ultra_spectrum() {
        let p = SystemParams::relative(9.0, 1.0, 1.0).unwrap();
        let shift = squeezed_frame(&p).unwrap().vacuum_shift;
        let c = Cutoffs::new(48, 24).unwrap();
        let sq = sorted_eigs(&build_eff_squeezed(&p, c).unwrap());
        let ul = sorted_eigs(&build_eff_ultra(&p, c).unwrap());
        for k in 0..6 {
            assert!((sq[k] + shift - ul[k]).abs() < 1e-8, "level {k}: {} vs {}", sq[k] + shift, ul[k]);
        }
    }

    #[test]
    fn squeezed_frame_undefined() {
        let p = SystemParams::relative(2.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            build_eff_squeezed(&p, cut(4)),
            Err(Error::SqueezedFrameUndefined { .. })
        ));
    }

    #[test]
    fn eff_mixed_examples() {
        let p = SystemParams::new(5.0, 1.0, 1.05, 0.1, 0.04).unwrap();
        let h = build_eff_mixed(&p, cut(6)).unwrap();
        assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs());
        let (dr, eta) = (p.delta_r(), p.eta_r());
        let alpha = 1.0 / dr + 1.0 / eta;
        let c_delta = alpha * 2.0 * 1e-3 / (3.0 * dr);
        let got = re(&h, &[E, 0, 0], &[G, 3, 0]);
        assert!((got + c_delta * 6f64.sqrt()).abs() < 1e-15);

        let p0 = SystemParams { g_qs: 0.0, ..p };
        let h0 = build_eff_mixed(&p0, cut(4)).unwrap();
        let space = h0.space().clone();
        for i in 0..space.dim() {
            for j in 0..space.dim() {
                let (li, lj) = (space.levels_of(i), space.levels_of(j));
                if li[2] != lj[2] {
                    assert_eq!(h0.matrix()[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn eigenbasis_rotation_swaps_x_and_z() {
        let space = SpaceLabel::new([(QUBIT, 2), (PHOTON, 2)]).unwrap();
        let w = eigenbasis_rotation(&space).unwrap();
        assert!((&w * &w - Operator::identity(space.clone())).max_abs() < 1e-15);
        let x = local_product(&space, &[(QUBIT, &pauli(PauliKind::X))]).unwrap();
        let z = local_product(&space, &[(QUBIT, &pauli(PauliKind::Z))]).unwrap();
        assert!((&(&w * &x) * &w - &z).max_abs() < 1e-15);
        assert!((&(&w * &z) * &w - &x).max_abs() < 1e-15);
    }

    #[test]
    fn exact_spins_guard_and_hermiticity() {
        assert!(matches!(
            build_exact_spins(&strong(), 7, cut(3)),
            Err(Error::TooManySpins { requested: 7, max: 6 })
        ));
        let h = build_exact_spins(&strong(), 3, cut(4)).unwrap();
        assert!(h.is_hermitian());
        assert_eq!(h.dim(), 2 * 4 * 8);
    }

    #[test]
    fn single_spin_matches_rabi_model() {
        let p = SystemParams::new(2.0, 1.0, 0.95, 0.1, 0.08).unwrap();
        let c = Cutoffs::new(6, 2).unwrap();
        let exact = sorted_eigs(&build_exact_spins(&p, 1, c).unwrap());
        let rabi = sorted_eigs(&build_rabi_full(&p, c).unwrap());
        // ½ω_S τ_z sits ω_S/2 below ω_S s†s
        for (a, b) in exact.iter().zip(&rabi) {
            assert!((a + 0.5 * p.omega_s - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_spins_permutation_symmetric() {
        let h = build_exact_spins(&strong(), 3, cut(3)).unwrap();
        let space = h.space().clone();
        let d = space.dim();
        for (x, y) in [(2, 3), (3, 4), (2, 4)] {
            let mut p = DMatrix::<C64>::zeros(d, d);
            for i in 0..d {
                let mut l = space.levels_of(i);
                l.swap(x, y);
                p[(space.index_of(&l).unwrap(), i)] = C64::new(1.0, 0.0);
            }
            let pm = Operator::new(space.clone(), p).unwrap();
            assert!(commutator(&h, &pm).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn dicke_state_is_normalized_and_symmetric() {
        let space = exact_space(3, 3).unwrap();
        let psi = dicke_state(&space, G, 0).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        let nonzero = psi.amplitudes().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 3);
        assert!(dicke_state(&hybrid_space(cut(3)).unwrap(), G, 0).is_err());
    }

    #[test]
    fn dispatcher_routes_every_kind() {
        let c = cut(3);
        for k in HamiltonianKind::ALL {
            let h = build(k, &ultra(), c, 2).unwrap();
            assert!(h.is_hermitian(), "{}", k.as_str());
            assert_eq!(h.space().position(QUBIT).is_some(), k.has_qubit());
        }
    }

    fn any_params() -> impl Strategy<Value = SystemParams> {
        (1.5f64..10.0, 0.5f64..1.5, 0.5f64..1.5, 0.0f64..1.0, 0.0f64..1.0)
            .prop_map(|(wq, wr, ws, gr, gs)| SystemParams::new(wq, wr, ws, gr, gs).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn builders_are_hermitian(p in any_params(), n in 2usize..6) {
            let c = cut(n);
            for k in HamiltonianKind::ALL {
                match build(k, &p, c, 2) {
                    Ok(h) => prop_assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs().max(1.0)),
                    Err(Error::SqueezedFrameUndefined { .. }) | Err(Error::RegimeViolation { .. }) => {}
                    Err(e) => prop_assert!(false, "{e:?}"),
                }
            }
        }

        #[test]
        fn eff_strong_coefficients_are_physpar_outputs(p in any_params()) {
            if let Ok(e) = effective_rwa(&p) {
                let h = build_eff_strong(&p, cut(3)).unwrap();
                prop_assert_eq!(re(&h, &[1, 0], &[0, 1]), e.g_eff);
                prop_assert_eq!(re(&h, &[1, 0], &[1, 0]), e.omega_r_prime);
                prop_assert_eq!(re(&h, &[0, 1], &[0, 1]), e.omega_s_prime);
            }
        }
    }
}
