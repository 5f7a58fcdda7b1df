//! Transition-selective excitation: decomposition of the selective-pulse
//! propagator into a controlled rotation times a conditional phase, gate
//! fidelities, and fidelity sweeps over the pulse power.
//!
//! Power is expressed as the ratio `Ω_0 / (π J_01)`. All propagators run for
//! `τ = α / Ω_0` with the carrier on the line of the target register label.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::evolution::propagator;
use crate::gates::{controlled_rotation_unitary, selective_amplitude};
use crate::hamiltonian::{
    effective_hamiltonian, effective_hamiltonian_scoped, transition_rf_frequency, DriveScope,
    RfField,
};
use crate::liouville::{projector, spin_operator, Axis, Level, Operator};
use crate::scalar::{as_f64, cplx, lit, phase_factor, Real};
use crate::spin_system::{Spin, SpinSystem};

/// `|Tr(U^† V) / N|^2`.
pub fn gate_fidelity<T: Real>(u: &Operator<T>, v: &Operator<T>) -> Result<T> {
    v.check_dim(u.dim())?;
    let tr = u
        .matrix()
        .iter()
        .zip(v.matrix().iter())
        .fold(cplx(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b);
    let n = lit::<T>(u.dim() as f64);
    Ok((tr / n).norm_sqr())
}

/// Dimensionless pulse parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TseParams<T: Real = f64> {
    /// `(ω_0 - ω_i) / Ω_0` for each computational spin.
    pub a: Vec<T>,
    /// `π J_0i / Ω_0`.
    pub b: Vec<T>,
    /// `π J_ij / Ω_0` among computational spins (zero diagonal).
    pub c: Vec<Vec<T>>,
    pub omega0_rad_s: T,
    pub alpha_rad: T,
}

impl<T: Real> TseParams<T> {
    /// Three-spin parameters `(a_1, a_2, b_1, b_2, c_1)`.
    pub fn new_3spin(a: [T; 2], b: [T; 2], c1: T, omega0_rad_s: T, alpha_rad: T) -> Result<Self> {
        let p = TseParams {
            a: a.to_vec(),
            b: b.to_vec(),
            c: vec![vec![T::zero(), c1], vec![c1, T::zero()]],
            omega0_rad_s,
            alpha_rad,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_system(sys: &SpinSystem<T>, ratio: T, alpha_rad: T) -> Result<Self> {
        let omega0 = selective_amplitude(sys, ratio)?;
        let n = sys.n_qubits();
        let w0 = sys.observer().omega();
        let pi = T::pi();
        let p = TseParams {
            a: (1..=n)
                .map(|i| (w0 - sys.spin(i).omega()) / omega0)
                .collect(),
            b: (1..=n).map(|i| pi * sys.j_hz(0, i) / omega0).collect(),
            c: (1..=n)
                .map(|i| (1..=n).map(|j| pi * sys.j_hz(i, j) / omega0).collect())
                .collect(),
            omega0_rad_s: omega0,
            alpha_rad,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega0_rad_s > T::zero() && self.omega0_rad_s.is_finite()) {
            return Err(Error::InvalidParameter("Ω_0 must be positive".into()));
        }
        let n = self.a.len();
        if n == 0 || self.b.len() != n || self.c.len() != n || self.c.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(
                "inconsistent parameter lengths".into(),
            ));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.a.len()
    }

    /// Homonuclear system realizing these parameters, observer on resonance
    /// at 0 Hz.
    pub fn to_system(&self) -> Result<SpinSystem<T>> {
        let n = self.n_qubits();
        let w = self.omega0_rad_s;
        let mut spins = vec![Spin::<T>::new("I0", "X", 0.0)];
        for i in 0..n {
            let mut s = Spin::<T>::new(&format!("I{}", i + 1), "X", 0.0);
            s.offset_hz = -self.a[i] * w / T::two_pi();
            spins.push(s);
        }
        let mut j = vec![vec![T::zero(); n + 1]; n + 1];
        for i in 0..n {
            j[0][i + 1] = self.b[i] * w / T::pi();
            j[i + 1][0] = j[0][i + 1];
            for k in 0..n {
                j[i + 1][k + 1] = self.c[i][k] * w / T::pi();
            }
        }
        SpinSystem::new(spins, j)
    }

    /// Register label whose line is irradiated: all zero.
    pub fn target(&self) -> BitString {
        BitString::zeros(self.n_qubits())
    }

    /// `H⁰_eff / Ω_0` for the synthetic system, carrier on the all-zero line.
    pub fn reduced_hamiltonian(&self) -> Result<Operator<T>> {
        let sys = self.to_system()?;
        let carrier = transition_rf_frequency(&sys, &self.target())?;
        let rf = RfField::along_y("X", carrier, self.omega0_rad_s);
        Ok(
            effective_hamiltonian_scoped(&sys, &rf, DriveScope::ObserverOnly)?
                .scale_real(T::one() / self.omega0_rad_s),
        )
    }
}

fn three_spin(params: &TseParams<impl Real>) -> Result<()> {
    if params.n_qubits() != 2 {
        return Err(Error::InvalidParameter(format!(
            "three-spin form needs 2 computational qubits, got {}",
            params.n_qubits()
        )));
    }
    Ok(())
}

/// The five mutually commuting pieces `[P, Q₋₋ I₁^β I₂^β, Q₊₋ I₁^α I₂^β,
/// Q₋₊ I₁^β I₂^α, Q₊₊ I₁^α I₂^α]` whose sum is `H⁰_eff / Ω_0` for three spins.
pub fn commuting_terms_3spin<T: Real>(params: &TseParams<T>) -> Result<[Operator<T>; 5]> {
    three_spin(params)?;
    let (b1, b2) = (params.b[0], params.b[1]);
    let two = lit::<T>(2.0);
    let op = |i, ax| spin_operator::<T>(i, ax, 3);
    let pr = |i, l| projector::<T>(i, l, 3);
    let (i0y, i0z) = (op(0, Axis::Y)?, op(0, Axis::Z)?);
    let p = op(1, Axis::Z)?.scale_real(params.a[0] - b1 - b2)
        + op(2, Axis::Z)?.scale_real(params.a[1] - b1 - b2)
        + (&op(1, Axis::Z)? * &op(2, Axis::Z)?).scale_real(two * params.c[0][1]);
    let q = |b: T| i0z.scale_real(-two * b) + i0y.clone();
    let block =
        |q: Operator<T>, l1, l2| -> Result<Operator<T>> { Ok(&(&q * &pr(1, l1)?) * &pr(2, l2)?) };
    Ok([
        p,
        block(q(b1 + b2), Level::Beta, Level::Beta)?,
        block(q(b2), Level::Alpha, Level::Beta)?,
        block(q(b1), Level::Beta, Level::Alpha)?,
        block(i0y.clone(), Level::Alpha, Level::Alpha)?,
    ])
}

/// Closed-form three-spin conditional phase
/// `e^{-iαP} Π e^{iα√(1+4B²) I_0z P_B}` over the three unirradiated blocks.
pub fn conditional_phase_unitary<T: Real>(params: &TseParams<T>) -> Result<Operator<T>> {
    three_spin(params)?;
    let [p, ..] = commuting_terms_3spin(params)?;
    let alpha = params.alpha_rad;
    let (b1, b2) = (params.b[0], params.b[1]);
    let root = |b: T| (T::one() + lit::<T>(4.0) * b * b).sqrt();
    let half = lit::<T>(0.5);
    // Register block index (bit 1 = qubit 1) → B of that block.
    let bs = [None, Some(b2), Some(b1), Some(b1 + b2)];
    let pd = p.real_diagonal();
    let diag: Vec<_> = (0..8)
        .map(|k| {
            let obs = if k >> 2 == 0 { half } else { -half };
            let extra = bs[k & 3].map_or(T::zero(), |b| -root(b) * obs);
            phase_factor(alpha * (pd[k] + extra))
        })
        .collect();
    Ok(Operator::from_diagonal(&diag))
}

/// Analytic `F(U_1, U_2)` for three spins.
pub fn analytic_fidelity_3spin<T: Real>(b1: T, b2: T, alpha: T) -> T {
    let half = lit::<T>(0.5);
    let term = |b: T| {
        let r = (T::one() + lit::<T>(4.0) * b * b).sqrt();
        let s = (alpha * half * r).sin();
        s * s * (T::one() - lit::<T>(2.0) * b.abs() / r)
    };
    let x = T::one() - lit::<T>(0.25) * (term(b1 + b2) + term(b2) + term(b1));
    x * x
}

/// Propagators of one selective pulse.
#[derive(Clone, Debug)]
pub struct TsePropagators<T: Real = f64> {
    /// Exact: every channel spin driven.
    pub u0: Operator<T>,
    /// Observer-only drive.
    pub u1: Operator<T>,
    /// `U_control · U_z`.
    pub u2: Operator<T>,
    pub uz: Operator<T>,
    pub omega0_rad_s: T,
    pub duration_s: T,
}

/// Conditional phase for any number of qubits, taken from the diagonal
/// blocks of `h0_red = H⁰_eff / Ω_0`. Register block `s` of `h0_red` is
/// `e_s + κ_s I_0z + I_0y`; away from the target it contributes
/// `exp(-iα(e_s ± ε_s/2))` with `ε_s = sgn(κ_s)√(1 + κ_s²)`, and on the
/// target only `exp(-iα e_s)`.
pub fn conditional_phase_general<T: Real>(
    h0_red: &Operator<T>,
    target: &BitString,
    alpha: T,
) -> Result<Operator<T>> {
    let n = h0_red.nspins() - 1;
    target.expect_len(n)?;
    let half = lit::<T>(0.5);
    let d = h0_red.real_diagonal();
    let mut diag = vec![cplx(T::zero(), T::zero()); h0_red.dim()];
    for s in 0..1usize << n {
        let (lo, hi) = (s, (1 << n) | s);
        let e = (d[lo] + d[hi]) * half;
        let (plo, phi) = if s == target.value() {
            (e, e)
        } else {
            let k = d[lo] - d[hi];
            let sign = if k < T::zero() { -T::one() } else { T::one() };
            let eps = sign * (T::one() + k * k).sqrt();
            (e + eps * half, e - eps * half)
        };
        diag[lo] = phase_factor(alpha * plo);
        diag[hi] = phase_factor(alpha * phi);
    }
    Ok(Operator::from_diagonal(&diag))
}

/// `U_0`, `U_1`, `U_2` and `U_z` for a selective pulse of flip angle `alpha`
/// on the `label` line at power `ratio`.
pub fn tse_propagators<T: Real>(
    sys: &SpinSystem<T>,
    label: &BitString,
    ratio: T,
    alpha: T,
) -> Result<TsePropagators<T>> {
    label.expect_len(sys.n_qubits())?;
    let omega0 = selective_amplitude(sys, ratio)?;
    let tau = alpha / omega0;
    let rf = RfField::along_y(
        &sys.observer().channel,
        transition_rf_frequency(sys, label)?,
        omega0,
    );
    let h = effective_hamiltonian(sys, &rf)?;
    let h0 = effective_hamiltonian_scoped(sys, &rf, DriveScope::ObserverOnly)?;
    let uz = conditional_phase_general(&h0.scale_real(T::one() / omega0), label, alpha)?;
    let uc = controlled_rotation_unitary(sys.n_qubits(), alpha, label)?;
    Ok(TsePropagators {
        u0: propagator(&h, tau)?,
        u1: propagator(&h0, tau)?,
        u2: &uc * &uz,
        uz,
        omega0_rad_s: omega0,
        duration_s: tau,
    })
}

/// `Q = 1 - F` against power ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityCurve<T: Real = f64> {
    pub ratios: Vec<T>,
    /// `1 - F(U_0, U_2)`.
    pub q_values: Vec<T>,
    /// `F(U_1, U_2)`.
    pub f_u1u2: Vec<T>,
    pub alpha_rad: T,
    pub system_id: String,
}

impl<T: Real> FidelityCurve<T> {
    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub const CSV_HEADER: &'static str = "ratio,Q,F,alpha_rad,system_id,F_u1u2";

    /// CSV rows without header.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for k in 0..self.len() {
            let q = as_f64(self.q_values[k]);
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?},{},{:?}",
                as_f64(self.ratios[k]),
                q,
                1.0 - q,
                as_f64(self.alpha_rad),
                self.system_id,
                as_f64(self.f_u1u2[k])
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", Self::CSV_HEADER, self.csv_rows())
    }
}

fn check_ratios<T: Real>(ratios: &[T]) -> Result<()> {
    if ratios.is_empty() {
        return Err(Error::InvalidParameter("empty ratio list".into()));
    }
    if ratios.iter().any(|&r| !(r > T::zero() && r.is_finite())) {
        return Err(Error::InvalidParameter(
            "ratios must be positive and finite".into(),
        ));
    }
    if ratios.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "ratios must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Evaluates the fidelities at every ratio, in parallel. Output order
/// follows `ratios`.
pub fn fidelity_sweep<T: Real>(
    sys: &SpinSystem<T>,
    label: &BitString,
    alpha: T,
    ratios: &[T],
    system_id: &str,
) -> Result<FidelityCurve<T>> {
    check_ratios(ratios)?;
    label.expect_len(sys.n_qubits())?;
    let points: Vec<(T, T)> = ratios
        .par_iter()
        .map(|&r| {
            let p = tse_propagators(sys, label, r, alpha)?;
            Ok((
                T::one() - gate_fidelity(&p.u0, &p.u2)?,
                gate_fidelity(&p.u1, &p.u2)?,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(FidelityCurve {
        ratios: ratios.to_vec(),
        q_values: points.iter().map(|p| p.0).collect(),
        f_u1u2: points.iter().map(|p| p.1).collect(),
        alpha_rad: alpha,
        system_id: system_id.to_string(),
    })
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Result<Vec<T>> {
    if !(lo > T::zero() && hi > lo) || n < 1 {
        return Err(Error::InvalidParameter(
            "log grid needs 0 < lo < hi and n ≥ 1".into(),
        ));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    let step = (l1 - l0) / lit::<T>((n - 1) as f64);
    Ok((0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k => (l0 + step * lit::<T>(k as f64)).exp(),
        })
        .collect())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid<T: Real>(lo: T, hi: T, n: usize) -> Result<Vec<T>> {
    if !(hi > lo) || n < 1 {
        return Err(Error::InvalidParameter(
            "linear grid needs lo < hi and n ≥ 1".into(),
        ));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / lit::<T>((n - 1) as f64);
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + step * lit::<T>(k as f64)
            }
        })
        .collect())
}

/// Default sweep: 200 log-spaced ratios on `[0.01, 2]`.
pub fn default_ratio_grid<T: Real>() -> Vec<T> {
    log_grid(lit(0.01), lit(2.0), 200).expect("valid default grid")
}
