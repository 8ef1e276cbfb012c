//! Fröhlich–Nakajima elimination of the dispersively coupled qubit.
//!
//! The generator `V` solves `H_I + [H₀, V] = 0`, so
//! `e^{−V} H e^{V} = H₀ + ½[H_I, V] + O(g³)`. Projecting on the qubit ground
//! state gives the resonator–ensemble effective Hamiltonian.

use crate::error::{Error, Result};
use crate::hammodels::{hybrid_space, CouplingForm, Cutoffs};
use crate::physpar::SystemParams;
use crate::qalgebra::{
    commutator, expm_hermitian, local_product, pauli, project_qubit_ground, qubit_block, Fock,
    Operator, PauliKind, C64, EXCITED, GROUND, PHOTON, QUBIT, SPIN,
};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
/// Fock levels excluded at the top of each truncated mode.
pub const BOUNDARY_MARGIN: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorCoefficients {
    pub xi_r: f64,
    pub xi_s: f64,
    pub zeta_r: Option<f64>,
    pub zeta_s: Option<f64>,
}

/// Anti-Hermitian generator of the transformation.
#[derive(Clone, Debug)]
pub struct Generator {
    pub v: Operator,
    pub regime: CouplingForm,
    pub coefficients: GeneratorCoefficients,
}

fn ratio(name: &'static str, g: f64, detuning: f64) -> Result<f64> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::RegimeViolation {
            what: name,
            value: detuning,
        });
    }
    Ok(g / detuning)
}

/// `ξ(σ_−b† − σ_+b)` plus, for counter-rotating branches, `ζ(σ_−b − σ_+b†)`.
pub fn build_generator(params: &SystemParams, cut: Cutoffs, regime: CouplingForm) -> Result<Generator> {
    params.validate()?;
    let xi_r = ratio("delta_r", params.g_qr, params.delta_r())?;
    let xi_s = ratio("delta_s", params.g_qs, params.delta_s())?;
    let zeta_r = matches!(regime, CouplingForm::NonRwa | CouplingForm::Mixed)
        .then(|| params.g_qr / params.eta_r());
    let zeta_s = matches!(regime, CouplingForm::NonRwa).then(|| params.g_qs / params.eta_s());

    let space = hybrid_space(cut)?;
    let (up, dn) = (pauli(PauliKind::Plus), pauli(PauliKind::Minus));
    let mut v = Operator::zeros(space.clone());
    let mut branch = |mode: &str, dim: usize, xi: f64, zeta: Option<f64>| -> Result<()> {
        let b = Fock::new(dim)?;
        let term = |q: &Operator, m: &Operator| local_product(&space, &[(QUBIT, q), (mode, m)]);
        v = &v + &((term(&dn, &b.ad)? - term(&up, &b.a)?) * xi);
        if let Some(zeta) = zeta {
            v = &v + &((term(&dn, &b.a)? - term(&up, &b.ad)?) * zeta);
        }
        Ok(())
    };
    branch(PHOTON, cut.n_photon, xi_r, zeta_r)?;
    branch(SPIN, cut.n_spinmode, xi_s, zeta_s)?;

    Ok(Generator {
        v,
        regime,
        coefficients: GeneratorCoefficients {
            xi_r,
            xi_s,
            zeta_r,
            zeta_s,
        },
    })
}

fn defining_condition(h0: &Operator, hi: &Operator, gen: &Generator) -> Result<Operator> {
    hi.checked_add(&commutator(h0, &gen.v)?)
}

/// `max|H_I + [H₀, V]|` over the whole space.
pub fn generator_residual(h0: &Operator, hi: &Operator, gen: &Generator) -> Result<f64> {
    Ok(defining_condition(h0, hi, gen)?.max_abs())
}

/// As [`generator_residual`], with the top [`BOUNDARY_MARGIN`] Fock levels of
/// both modes excluded.
pub fn generator_residual_restricted(h0: &Operator, hi: &Operator, gen: &Generator) -> Result<f64> {
    let r = defining_condition(h0, hi, gen)?;
    let mask = r.space().boundary_mask(&[PHOTON, SPIN], BOUNDARY_MARGIN);
    Ok(r.max_abs_masked(&mask))
}

pub fn numeric_effective(h0: &Operator, hi: &Operator, gen: &Generator) -> Result<Operator> {
    numeric_effective_with_tolerance(h0, hi, gen, DEFAULT_RESIDUAL_TOL)
}

/// `⟨g| H₀ + ½[H_I, V] |g⟩`, refused when the restricted residual exceeds `tol`.
pub fn numeric_effective_with_tolerance(
    h0: &Operator,
    hi: &Operator,
    gen: &Generator,
    tol: f64,
) -> Result<Operator> {
    let measured = generator_residual_restricted(h0, hi, gen)?;
    if !(measured <= tol) {
        return Err(Error::ResidualTooLarge {
            measured,
            tolerance: tol,
        });
    }
    let second = h0.checked_add(&(commutator(hi, &gen.v)? * 0.5))?;
    project_qubit_ground(&second)
}

/// Constant part of [`numeric_effective`] that the closed-form builders omit:
/// `−ω_Q/2`, and `−g²/η` for every counter-rotating branch.
pub fn vacuum_offset(params: &SystemParams, regime: CouplingForm) -> f64 {
    let r = params.g_qr * params.g_qr / params.eta_r();
    let s = params.g_qs * params.g_qs / params.eta_s();
    -0.5 * params.omega_q
        - match regime {
            CouplingForm::Rwa => 0.0,
            CouplingForm::Mixed => r,
            CouplingForm::NonRwa => r + s,
        }
}

#[derive(Clone, Debug)]
pub struct ExactEffective {
    /// `e^{−V} H e^{V}` on the full space.
    pub transformed: Operator,
    /// Its qubit-ground block.
    pub projected: Operator,
    /// `max|⟨e|e^{−V} H e^{V}|g⟩|`, the coupling the projection discards.
    pub dropped_block_norm: f64,
}

/// Conjugates `h` by the exact exponential of the generator.
pub fn exact_unitary_effective(h: &Operator, gen: &Generator) -> Result<ExactEffective> {
    // V = iK with K Hermitian, so e^{−V} = e^{−iK}
    let k = gen.v.clone() * C64::new(0.0, -1.0);
    let forward = expm_hermitian(&k, 1.0)?;
    let transformed = forward.checked_mul(h)?.checked_mul(&forward.adjoint())?;
    Ok(ExactEffective {
        projected: project_qubit_ground(&transformed)?,
        dropped_block_norm: qubit_block(&transformed, EXCITED, GROUND)?.max_abs(),
        transformed,
    })
}

/// `max|e^{−V} H e^{V} − (H₀ + ½[H_I, V])|` with `H = H₀ + H_I`.
pub fn remainder_norm(h0: &Operator, hi: &Operator, gen: &Generator) -> Result<f64> {
    let exact = exact_unitary_effective(&h0.checked_add(hi)?, gen)?;
    let second = h0.checked_add(&(commutator(hi, &gen.v)? * 0.5))?;
    Ok(exact.transformed.checked_sub(&second)?.max_abs())
}
