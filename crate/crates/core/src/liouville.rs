//! Dense operators over the `2^(n+1)`-dimensional spin Hilbert space.
//!
//! Basis convention: basis index `b` carries spin `i` in bit
//! `nspins - 1 - i`, so the observer (spin 0) is the most significant bit.
//! A zero bit is `|0⟩ = α` (m = +1/2), a one bit is `|1⟩ = β`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{ComplexField, DMatrix};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::scalar::{cone, cplx, czero, lit, Cplx, Real};
use crate::spin_system::SpinSystem;

/// Cartesian spin-operator component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Single-spin Zeeman level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    /// `|0⟩`, m = +1/2.
    Alpha,
    /// `|1⟩`, m = -1/2.
    Beta,
}

impl Level {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Level::Beta
        } else {
            Level::Alpha
        }
    }
}

/// Bit of spin `i` in basis index `b`.
#[inline]
pub fn basis_bit(b: usize, i: usize, nspins: usize) -> usize {
    (b >> (nspins - 1 - i)) & 1
}

/// A square complex matrix acting on the spin Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T: Real = f64> {
    m: DMatrix<Cplx<T>>,
}

impl<T: Real> Operator<T> {
    pub fn from_matrix(m: DMatrix<Cplx<T>>) -> Self {
        assert!(m.is_square(), "operator matrix must be square");
        Operator { m }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            m: DMatrix::from_element(dim, dim, czero()),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            op.m[(k, k)] = cplx(d, T::zero());
        }
        op
    }

    pub fn from_diagonal(diag: &[Cplx<T>]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            op.m[(k, k)] = d;
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Number of spins implied by the dimension.
    pub fn nspins(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<Cplx<T>> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Cplx<T>> {
        self.m
    }

    pub fn get(&self, r: usize, c: usize) -> Cplx<T> {
        self.m[(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Cplx<T>) {
        self.m[(r, c)] = v;
    }

    pub fn diagonal(&self) -> Vec<Cplx<T>> {
        (0..self.dim()).map(|k| self.m[(k, k)]).collect()
    }

    /// Real parts of the diagonal.
    pub fn real_diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|k| self.m[(k, k)].re).collect()
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            m: self.m.adjoint(),
        }
    }

    pub fn trace(&self) -> Cplx<T> {
        self.m.trace()
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        Operator { m: &self.m * s }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(cplx(s, T::zero()))
    }

    /// `U ρ U†` with `self` as `ρ`.
    pub fn conjugate_by(&self, u: &Operator<T>) -> Self {
        Operator {
            m: &u.m * &self.m * u.m.adjoint(),
        }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Operator<T>) -> Self {
        Operator {
            m: &self.m * &other.m - &other.m * &self.m,
        }
    }

    pub fn max_abs(&self) -> T {
        self.m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
    }

    pub fn max_abs_diff(&self, other: &Operator<T>) -> T {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.m
            .iter()
            .zip(other.m.iter())
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b).modulus()))
    }

    /// Largest entry of `A - A†`.
    pub fn hermiticity_residual(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    /// Largest entry of `U†U - 1`.
    pub fn unitarity_residual(&self) -> T {
        (self.adjoint() * self).max_abs_diff(&Operator::identity(self.dim()))
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_residual() <= tol
    }

    /// Copy with every off-diagonal entry set to zero.
    pub fn diagonal_part(&self) -> Self {
        Self::from_diagonal(&self.diagonal())
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &Operator<T>) -> Self {
        Operator {
            m: self.m.kronecker(&other.m),
        }
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl<T: Real> Mul<&Operator<T>> for &Operator<T> {
    type Output = Operator<T>;
    fn mul(self, rhs: &Operator<T>) -> Operator<T> {
        Operator {
            m: &self.m * &rhs.m,
        }
    }
}

impl<T: Real> Mul<&Operator<T>> for Operator<T> {
    type Output = Operator<T>;
    fn mul(self, rhs: &Operator<T>) -> Operator<T> {
        Operator { m: self.m * &rhs.m }
    }
}

impl<T: Real> Mul for Operator<T> {
    type Output = Operator<T>;
    fn mul(self, rhs: Operator<T>) -> Operator<T> {
        Operator { m: self.m * rhs.m }
    }
}

impl<T: Real> Add<&Operator<T>> for &Operator<T> {
    type Output = Operator<T>;
    fn add(self, rhs: &Operator<T>) -> Operator<T> {
        Operator {
            m: &self.m + &rhs.m,
        }
    }
}

impl<T: Real> Add for Operator<T> {
    type Output = Operator<T>;
    fn add(self, rhs: Operator<T>) -> Operator<T> {
        Operator { m: self.m + rhs.m }
    }
}

impl<T: Real> Sub<&Operator<T>> for &Operator<T> {
    type Output = Operator<T>;
    fn sub(self, rhs: &Operator<T>) -> Operator<T> {
        Operator {
            m: &self.m - &rhs.m,
        }
    }
}

impl<T: Real> Sub for Operator<T> {
    type Output = Operator<T>;
    fn sub(self, rhs: Operator<T>) -> Operator<T> {
        Operator { m: self.m - rhs.m }
    }
}

impl<T: Real> Neg for Operator<T> {
    type Output = Operator<T>;
    fn neg(self) -> Operator<T> {
        Operator { m: -self.m }
    }
}

fn check_index(i: usize, nspins: usize) -> Result<()> {
    if i >= nspins {
        return Err(Error::IndexOutOfRange { index: i, nspins });
    }
    Ok(())
}

/// Places the 2x2 matrix `single` at slot `i`, identity elsewhere.
pub fn embed<T: Real>(single: [[Cplx<T>; 2]; 2], i: usize, nspins: usize) -> Result<Operator<T>> {
    check_index(i, nspins)?;
    let dim = 1usize << nspins;
    let mask = 1usize << (nspins - 1 - i);
    let mut op = Operator::zeros(dim);
    for r in 0..dim {
        let rb = basis_bit(r, i, nspins);
        for cb in 0..2 {
            let c = if cb == rb { r } else { r ^ mask };
            let v = single[rb][cb];
            if v != czero() {
                op.m[(r, c)] = v;
            }
        }
    }
    Ok(op)
}

fn half_pauli<T: Real>(axis: Axis) -> [[Cplx<T>; 2]; 2] {
    let h = lit::<T>(0.5);
    let z = T::zero();
    match axis {
        Axis::X => [[czero(), cplx(h, z)], [cplx(h, z), czero()]],
        Axis::Y => [[czero(), cplx(z, -h)], [cplx(z, h), czero()]],
        Axis::Z => [[cplx(h, z), czero()], [czero(), cplx(-h, z)]],
    }
}

/// `I_{iη} = σ_η / 2` acting on spin `i`.
pub fn spin_operator<T: Real>(i: usize, axis: Axis, nspins: usize) -> Result<Operator<T>> {
    embed(half_pauli(axis), i, nspins)
}

/// Raising operator `I_i^+ = I_{ix} + i I_{iy} = |0⟩⟨1|`.
pub fn raising<T: Real>(i: usize, nspins: usize) -> Result<Operator<T>> {
    embed([[czero(), cone()], [czero(), czero()]], i, nspins)
}

/// `I_i^α = |0⟩⟨0|` or `I_i^β = |1⟩⟨1|` on spin `i`.
pub fn projector<T: Real>(i: usize, level: Level, nspins: usize) -> Result<Operator<T>> {
    let p = match level {
        Level::Alpha => [[cone(), czero()], [czero(), czero()]],
        Level::Beta => [[czero(), czero()], [czero(), cone()]],
    };
    embed(p, i, nspins)
}

/// Product of computational-qubit projectors selecting register state `label`
/// (identity on the observer).
pub fn register_projector<T: Real>(label: &BitString, nspins: usize) -> Result<Operator<T>> {
    label.expect_len(nspins - 1)?;
    let dim = 1usize << nspins;
    let n = nspins - 1;
    let target = label.value();
    let diag: Vec<T> = (0..dim)
        .map(|b| {
            if b & ((1 << n) - 1) == target {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(Operator::from_real_diagonal(&diag))
}

/// Thermal-equilibrium deviation density matrix `Σ_i γ_i I_iz`, with the
/// observer weight normalized to one.
pub fn thermal_equilibrium<T: Real>(sys: &SpinSystem<T>) -> Operator<T> {
    let n = sys.nspins();
    let g0 = sys.observer().gamma_rel;
    let half = lit::<T>(0.5);
    let diag: Vec<T> = (0..sys.dim())
        .map(|b| {
            sys.spins()
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (i, s)| {
                    let m = if basis_bit(b, i, n) == 0 { half } else { -half };
                    acc + s.gamma_rel / g0 * m
                })
        })
        .collect();
    Operator::from_real_diagonal(&diag)
}

/// Labeled pseudo-pure state `I_0z · Π_i I_i^{label_i}`.
pub fn lpps_state<T: Real>(sys: &SpinSystem<T>, label: &BitString) -> Result<Operator<T>> {
    label.expect_len(sys.n_qubits())?;
    let n = sys.n_qubits();
    let half = lit::<T>(0.5);
    let mut diag = vec![T::zero(); sys.dim()];
    diag[label.value()] = half;
    diag[(1 << n) | label.value()] = -half;
    Ok(Operator::from_real_diagonal(&diag))
}
