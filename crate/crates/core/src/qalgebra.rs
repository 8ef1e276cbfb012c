//! Dense complex linear algebra on labeled tensor-product Hilbert spaces.
//!
//! Kronecker order follows the factor order of the [`SpaceLabel`]: the last
//! factor is the fastest-varying index. The canonical hybrid space is
//! `(qubit: 2, photon: n, spin: m)`.

use alloc::{string::String, vec, vec::Vec};
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

pub const QUBIT: &str = "qubit";
pub const PHOTON: &str = "photon";
pub const SPIN: &str = "spin";

/// Qubit level index of `|e⟩`.
pub const EXCITED: usize = 0;
/// Qubit level index of `|g⟩`.
pub const GROUND: usize = 1;

/// Relative Hermiticity tolerance: `max|H - H†| ≤ HERMITICITY_TOL · max|H|`.
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const UNITARITY_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub name: String,
    pub dim: usize,
}

/// Ordered list of named tensor factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceLabel {
    factors: Vec<Factor>,
}

impl SpaceLabel {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<Factor> = Vec::new();
        for (name, dim) in factors {
            let name = name.into();
            if dim == 0 {
                return Err(Error::InvalidDimension {
                    dim,
                    reason: "factor dimension must be positive",
                });
            }
            if out.iter().any(|f| f.name == name) {
                return Err(Error::DuplicateFactor(name));
            }
            out.push(Factor { name, dim });
        }
        if out.is_empty() {
            return Err(Error::InvalidDimension {
                dim: 0,
                reason: "a space needs at least one factor",
            });
        }
        Ok(Self { factors: out })
    }

    pub fn single(name: &str, dim: usize) -> Result<Self> {
        Self::new([(name, dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    pub fn factor_dim(&self, name: &str) -> Option<usize> {
        self.position(name).map(|i| self.factors[i].dim)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1].dim;
        }
        strides
    }

    /// Flat basis index of the product state with the given per-factor levels.
    pub fn index_of(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.factors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.factors.len(),
                found: levels.len(),
            });
        }
        let mut idx = 0;
        for ((f, &l), s) in self.factors.iter().zip(levels).zip(self.strides()) {
            if l >= f.dim {
                return Err(Error::InvalidDimension {
                    dim: l,
                    reason: "level exceeds factor dimension",
                });
            }
            idx += l * s;
        }
        Ok(idx)
    }

    pub fn levels_of(&self, mut index: usize) -> Vec<usize> {
        let mut levels = vec![0; self.factors.len()];
        for (i, f) in self.factors.iter().enumerate().rev() {
            levels[i] = index % f.dim;
            index /= f.dim;
        }
        levels
    }

    /// The space with one factor removed.
    pub fn without(&self, name: &str) -> Result<Self> {
        let pos = self
            .position(name)
            .ok_or_else(|| Error::UnknownFactor(name.into()))?;
        if self.factors.len() == 1 {
            return Err(Error::InvalidDimension {
                dim: 0,
                reason: "cannot remove the only factor",
            });
        }
        let mut factors = self.factors.clone();
        factors.remove(pos);
        Ok(Self { factors })
    }

    /// Basis-index mask that excludes the top `margin` levels of every listed
    /// mode present in the space. Truncated ladder algebra only fails there.
    pub fn boundary_mask(&self, modes: &[&str], margin: usize) -> Vec<bool> {
        let limits: Vec<Option<usize>> = self
            .factors
            .iter()
            .map(|f| {
                modes
                    .contains(&f.name.as_str())
                    .then(|| f.dim.saturating_sub(margin))
            })
            .collect();
        (0..self.dim())
            .map(|i| {
                self.levels_of(i)
                    .iter()
                    .zip(&limits)
                    .all(|(&l, lim)| lim.map_or(true, |lim| l < lim))
            })
            .collect()
    }
}

/// Dense complex square matrix acting on a labeled space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: SpaceLabel,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(space: SpaceLabel, matrix: DMatrix<C64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn from_real(space: SpaceLabel, matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(space, matrix.map(|x| C64::new(x, 0.0)))
    }

    pub fn zeros(space: SpaceLabel) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(space: SpaceLabel) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Max-abs norm over entries whose row and column both lie in `mask`.
    pub fn max_abs_masked(&self, mask: &[bool]) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in (0..d).filter(|&j| mask[j]) {
            for i in (0..d).filter(|&i| mask[i]) {
                m = m.max(self.matrix[(i, j)].norm());
            }
        }
        m
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in j..d {
                m = m.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn anti_hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in j..d {
                m = m.max((self.matrix[(i, j)] + self.matrix[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITICITY_TOL * self.max_abs()
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                defect: self.hermiticity_defect(),
            })
        }
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn element(&self, row: &[usize], col: &[usize]) -> Result<C64> {
        Ok(self.matrix[(self.space.index_of(row)?, self.space.index_of(col)?)])
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        if psi.space != self.space {
            return Err(Error::SpaceMismatch);
        }
        let o_psi = &self.matrix * &psi.amplitudes;
        Ok(psi.amplitudes.dotc(&o_psi))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a> $tr<&'a Operator> for &'a Operator {
            type Output = Operator;
            /// Panics when the operands live on different spaces.
            fn $method(self, rhs: &'a Operator) -> Operator {
                self.$checked(rhs).expect("operator space mismatch")
            }
        }
        impl $tr<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: &'a Operator) -> Operator {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * C64::new(rhs, 0.0),
        }
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(mut self, rhs: f64) -> Operator {
        self.matrix *= C64::new(rhs, 0.0);
        self
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * rhs,
        }
    }
}

impl Mul<C64> for Operator {
    type Output = Operator;
    fn mul(mut self, rhs: C64) -> Operator {
        self.matrix *= rhs;
        self
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self * -1.0
    }
}

/// Normalized complex vector on a labeled space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: SpaceLabel,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(space: SpaceLabel, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { space, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(space: SpaceLabel, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(space, amplitudes.unscale(norm))
    }

    pub fn basis(space: SpaceLabel, levels: &[usize]) -> Result<Self> {
        let idx = space.index_of(levels)?;
        let mut amps = DVector::zeros(space.dim());
        amps[idx] = ONE;
        Ok(Self {
            space,
            amplitudes: amps,
        })
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// Annihilation operator on a single `dim`-level mode: `a|n⟩ = √n |n-1⟩`.
pub fn fock_ladder(dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "a truncated mode needs at least two levels",
        });
    }
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::new(SpaceLabel::single("mode", dim)?, m)
}

/// Ladder operators of one truncated mode, with the usual composites.
#[derive(Clone, Debug)]
pub struct Fock {
    pub a: Operator,
    pub ad: Operator,
}

impl Fock {
    pub fn new(dim: usize) -> Result<Self> {
        let a = fock_ladder(dim)?;
        Ok(Self {
            ad: a.adjoint(),
            a,
        })
    }

    /// `a†a`
    pub fn number(&self) -> Operator {
        &self.ad * &self.a
    }

    /// `a + a†`
    pub fn quadrature(&self) -> Operator {
        &self.a + &self.ad
    }

    /// `a² + a†²`
    pub fn pair(&self) -> Operator {
        &self.a * &self.a + &self.ad * &self.ad
    }

    /// Ordered product of ladder operators, `true` meaning `a†`.
    pub fn word(&self, daggers: &[bool]) -> Operator {
        let mut it = daggers.iter().map(|&d| if d { &self.ad } else { &self.a });
        let first = it.next().expect("non-empty word").clone();
        it.fold(first, |acc, op| acc * op)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// Pauli operator in the `(e, g)` qubit eigenbasis.
pub fn pauli(kind: PauliKind) -> Operator {
    let (z, o, i) = (ZERO, ONE, C64::new(0.0, 1.0));
    let m = match kind {
        PauliKind::X => [[z, o], [o, z]],
        PauliKind::Y => [[z, -i], [i, z]],
        PauliKind::Z => [[o, z], [z, -o]],
        PauliKind::Plus => [[z, o], [z, z]],
        PauliKind::Minus => [[z, z], [o, z]],
    };
    let matrix = DMatrix::from_fn(2, 2, |r, c| m[r][c]);
    Operator {
        space: SpaceLabel::single(QUBIT, 2).expect("static space"),
        matrix,
    }
}

/// Tensor product of single-factor operators placed on the named factors,
/// identity on every other factor.
pub fn local_product(space: &SpaceLabel, parts: &[(&str, &Operator)]) -> Result<Operator> {
    let mut slots: Vec<Option<&Operator>> = vec![None; space.factors().len()];
    for (name, op) in parts {
        let pos = space
            .position(name)
            .ok_or_else(|| Error::UnknownFactor((*name).into()))?;
        let want = space.factors()[pos].dim;
        if op.dim() != want {
            return Err(Error::DimensionMismatch {
                expected: want,
                found: op.dim(),
            });
        }
        if slots[pos].replace(op).is_some() {
            return Err(Error::DuplicateFactor((*name).into()));
        }
    }
    let mut acc = DMatrix::from_element(1, 1, ONE);
    for (slot, f) in slots.iter().zip(space.factors()) {
        acc = match slot {
            Some(op) => acc.kronecker(&op.matrix),
            None => acc.kronecker(&DMatrix::<C64>::identity(f.dim, f.dim)),
        };
    }
    Operator::new(space.clone(), acc)
}

/// `op` on `factor`, identity elsewhere.
pub fn embed(op: &Operator, space: &SpaceLabel, factor: &str) -> Result<Operator> {
    local_product(space, &[(factor, op)])
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    Ok(a.checked_mul(b)? - b.checked_mul(a)?)
}

/// Eigendecomposition `H = V diag(E) V†` of a Hermitian operator, computed once
/// and reused for every propagation time.
#[derive(Clone, Debug)]
pub struct Spectrum {
    space: SpaceLabel,
    energies: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl Spectrum {
    pub fn of(h: &Operator) -> Result<Self> {
        h.ensure_hermitian()?;
        let (energies, vectors) = if h.is_real() {
            let eig = SymmetricEigen::new(h.matrix.map(|z| z.re));
            (eig.eigenvalues, eig.eigenvectors.map(|x| C64::new(x, 0.0)))
        } else {
            let eig = SymmetricEigen::new(h.matrix.clone());
            (eig.eigenvalues, eig.eigenvectors)
        };
        // ascending order
        let mut order: Vec<usize> = (0..energies.len()).collect();
        order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
        let energies = DVector::from_iterator(order.len(), order.iter().map(|&k| energies[k]));
        let vectors = vectors.select_columns(order.iter());
        Ok(Self {
            space: h.space.clone(),
            energies,
            vectors,
        })
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    fn phases(&self, t: f64) -> DVector<C64> {
        self.energies.map(|e| {
            let (s, c) = (e * t).sin_cos();
            C64::new(c, -s)
        })
    }

    /// `exp(-iHt)`.
    pub fn propagator(&self, t: f64) -> Operator {
        let phases = self.phases(t);
        let mut scaled = self.vectors.clone();
        for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *p;
        }
        Operator {
            space: self.space.clone(),
            matrix: scaled * self.vectors.adjoint(),
        }
    }

    /// Eigenbasis coefficients `V†ψ`.
    pub fn coefficients(&self, psi: &StateVector) -> Result<DVector<C64>> {
        if psi.space != self.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.vectors.ad_mul(&psi.amplitudes))
    }

    /// `ψ(t) = V e^{-iEt} c` from eigenbasis coefficients `c`.
    pub fn evolve_coefficients(&self, coeffs: &DVector<C64>, t: f64) -> StateVector {
        let rotated = self.phases(t).component_mul(coeffs);
        StateVector {
            space: self.space.clone(),
            amplitudes: &self.vectors * rotated,
        }
    }
}

/// `U = exp(-iHt)` via the real-eigenvalue spectral decomposition.
pub fn expm_hermitian(h: &Operator, t: f64) -> Result<Operator> {
    Ok(Spectrum::of(h)?.propagator(t))
}

/// `max|U†U - I|`.
pub fn unitarity_defect(u: &Operator) -> f64 {
    let d = u.dim();
    let prod = u.matrix.ad_mul(&u.matrix);
    let mut m = 0.0f64;
    for j in 0..d {
        for i in 0..d {
            let id = if i == j { ONE } else { ZERO };
            m = m.max((prod[(i, j)] - id).norm());
        }
    }
    m
}

/// Block `⟨row|O|col⟩` of the qubit factor, as an operator on the remaining factors.
pub fn qubit_block(o: &Operator, row: usize, col: usize) -> Result<Operator> {
    let pos = o.space.position(QUBIT).ok_or(Error::MissingQubit)?;
    let reduced = o.space.without(QUBIT)?;
    let full_index = |r: usize, level: usize| {
        let mut levels = reduced.levels_of(r);
        levels.insert(pos, level);
        o.space.index_of(&levels).expect("levels in range")
    };
    let d = reduced.dim();
    let rows: Vec<usize> = (0..d).map(|r| full_index(r, row)).collect();
    let cols: Vec<usize> = (0..d).map(|r| full_index(r, col)).collect();
    let m = DMatrix::from_fn(d, d, |i, j| o.matrix[(rows[i], cols[j])]);
    Operator::new(reduced, m)
}

/// `⟨g|O|g⟩` on the space without the qubit.
pub fn project_qubit_ground(o: &Operator) -> Result<Operator> {
    qubit_block(o, GROUND, GROUND)
}
