//! Ideal gate unitaries and their pulse-sequence realizations.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::evolution::{
    hard_pulse_unitary, Envelope, GradientMode, PulseAxis, PulseSequence, SequenceEvent,
};
use crate::hamiltonian::{transition_rf_frequency, RfField};
use crate::liouville::Operator;
use crate::scalar::{cplx, lit, Real};
use crate::spin_system::SpinSystem;

/// Required state of each computational qubit for a controlled rotation to
/// fire. Character `k` is qubit `k + 1`.
pub type ControlPattern = BitString;

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "at least one computational qubit is required".into(),
        ));
    }
    Ok(())
}

/// `exp(-i α I_0y Π_i P_i)` on observer plus `n` qubits, where `P_i` selects
/// `pattern_i` on qubit `i`.
pub fn controlled_rotation_unitary<T: Real>(
    n: usize,
    alpha: T,
    pattern: &ControlPattern,
) -> Result<Operator<T>> {
    check_qubits(n)?;
    pattern.expect_len(n)?;
    let half = alpha * lit::<T>(0.5);
    let (c, s) = (half.cos(), half.sin());
    let lo = pattern.value();
    let hi = (1 << n) | lo;
    let mut u = Operator::identity(1 << (n + 1));
    u.set(lo, lo, cplx(c, T::zero()));
    u.set(lo, hi, cplx(-s, T::zero()));
    u.set(hi, lo, cplx(s, T::zero()));
    u.set(hi, hi, cplx(c, T::zero()));
    Ok(u)
}

/// The same gate realized as the all-zero controlled rotation sandwiched
/// between NOT gates on the qubits whose pattern bit is 1.
pub fn controlled_rotation_by_not_sandwich<T: Real>(
    n: usize,
    alpha: T,
    pattern: &ControlPattern,
) -> Result<Operator<T>> {
    check_qubits(n)?;
    pattern.expect_len(n)?;
    let flips: Vec<usize> = (0..n).filter(|&k| pattern.bit(k)).map(|k| k + 1).collect();
    let x = hard_pulse_unitary(n + 1, &flips, PulseAxis::X, T::pi())?;
    let core = controlled_rotation_unitary(n, alpha, &BitString::zeros(n))?;
    Ok(&(&x * &core) * &x.adjoint())
}

/// `R_0y(π/2)^† · U_control(π/2) · Π_i R_iy(π/2)`: the ideal circuit that,
/// followed by a gradient, turns the homonuclear thermal state into the
/// all-zero labeled pseudo-pure state.
pub fn lpps_prep_unitary<T: Real>(n: usize) -> Result<Operator<T>> {
    check_qubits(n)?;
    let comps: Vec<usize> = (1..=n).collect();
    let r_comp = hard_pulse_unitary(n + 1, &comps, PulseAxis::Y, T::frac_pi_2())?;
    let r_obs_inv = hard_pulse_unitary(n + 1, &[0], PulseAxis::MinusY, T::frac_pi_2())?;
    let uc = controlled_rotation_unitary(n, T::frac_pi_2(), &BitString::zeros(n))?;
    Ok(&(&r_obs_inv * &uc) * &r_comp)
}

/// Options for [`lpps_pulse_sequence_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct LppsPulseOptions<T: Real = f64> {
    pub envelope: Envelope<T>,
    pub gradient: GradientMode,
}

impl<T: Real> Default for LppsPulseOptions<T> {
    fn default() -> Self {
        LppsPulseOptions {
            envelope: Envelope::default_gaussian(),
            gradient: GradientMode::CrushAll,
        }
    }
}

/// Amplitude `Ω_0 = ratio · π · J_01` (rad/s) of the selective pulse.
pub fn selective_amplitude<T: Real>(sys: &SpinSystem<T>, ratio: T) -> Result<T> {
    if !(ratio > T::zero() && ratio.is_finite()) {
        return Err(Error::InvalidParameter(
            "power ratio must be positive".into(),
        ));
    }
    let j01 = sys.j_hz(0, 1);
    if j01 == T::zero() {
        return Err(Error::InvalidParameter(
            "observer has no coupling to qubit 1 (J01 = 0)".into(),
        ));
    }
    Ok(ratio * T::pi() * j01.abs())
}

/// Pulsed preparation of the labeled pseudo-pure state with a Gaussian
/// selective pulse and full gradients.
pub fn lpps_pulse_sequence<T: Real>(
    sys: &SpinSystem<T>,
    label: &BitString,
    ratio: T,
    alpha: T,
) -> Result<PulseSequence<T>> {
    lpps_pulse_sequence_with(sys, label, ratio, alpha, &LppsPulseOptions::default())
}

/// `(π/2)_y` on the computational spins, gradient, selective `α_y` on the
/// `label` line, `(π/2)_{-y}` on the observer, gradient.
pub fn lpps_pulse_sequence_with<T: Real>(
    sys: &SpinSystem<T>,
    label: &BitString,
    ratio: T,
    alpha: T,
    opts: &LppsPulseOptions<T>,
) -> Result<PulseSequence<T>> {
    label.expect_len(sys.n_qubits())?;
    let amp = selective_amplitude(sys, ratio)?;
    if !(alpha > T::zero() && alpha.is_finite()) {
        return Err(Error::InvalidParameter(
            "flip angle must be positive".into(),
        ));
    }
    let carrier = transition_rf_frequency(sys, label)?;
    let rf = RfField::along_y(&sys.observer().channel, carrier, amp);
    let comps: Vec<usize> = (1..sys.nspins()).collect();
    Ok(PulseSequence::new(vec![
        SequenceEvent::hard(comps, PulseAxis::Y, T::frac_pi_2()),
        SequenceEvent::Gradient {
            mode: opts.gradient,
        },
        SequenceEvent::SoftPulse {
            rf,
            duration_s: alpha / amp,
            envelope: opts.envelope.clone(),
        },
        SequenceEvent::hard(vec![0], PulseAxis::MinusY, T::frac_pi_2()),
        SequenceEvent::Gradient {
            mode: opts.gradient,
        },
    ]))
}

fn check_answer(a: &BitString) -> Result<()> {
    if a.is_empty() {
        return Err(Error::LabelLength {
            expected: 1,
            got: 0,
        });
    }
    Ok(())
}

/// Register-only oracle `|x⟩ → (-1)^{a·x} |x⟩`.
pub fn bv_oracle_unitary<T: Real>(a: &BitString) -> Result<Operator<T>> {
    check_answer(a)?;
    let n = a.len();
    let mask = a.value();
    let diag: Vec<T> = (0..1usize << n)
        .map(|x| {
            if (x & mask).count_ones() % 2 == 0 {
                T::one()
            } else {
                -T::one()
            }
        })
        .collect();
    Ok(Operator::from_real_diagonal(&diag))
}

fn hadamard_all<T: Real>(n: usize) -> Operator<T> {
    let h = T::one() / lit::<T>(2.0).sqrt();
    let one = Operator::from_matrix(nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[
            cplx(h, T::zero()),
            cplx(h, T::zero()),
            cplx(h, T::zero()),
            cplx(-h, T::zero()),
        ],
    ));
    (1..n).fold(one.clone(), |acc, _| acc.kron(&one))
}

/// Register-only `U_BV = Π_j (σ_jx)^{a_j}`. In debug builds the Hadamard
/// construction `H^{⊗n} U_a H^{⊗n}` is also formed and checked against it.
pub fn bv_unitary<T: Real>(a: &BitString) -> Result<Operator<T>> {
    check_answer(a)?;
    let n = a.len();
    let mask = a.value();
    let dim = 1usize << n;
    let mut u = Operator::zeros(dim);
    for x in 0..dim {
        u.set(x ^ mask, x, cplx(T::one(), T::zero()));
    }
    if cfg!(debug_assertions) && n <= 6 {
        let h = hadamard_all::<T>(n);
        let via_oracle = &(&h * &bv_oracle_unitary(a)?) * &h;
        debug_assert!(via_oracle.max_abs_diff(&u) < T::structural_tolerance());
    }
    Ok(u)
}

/// Lifts a register operator to the full system (identity on the observer).
pub fn on_register<T: Real>(u: &Operator<T>) -> Operator<T> {
    Operator::<T>::identity(2).kron(u)
}

/// A `π_x` hard pulse on computational spin `i + 1` for every `a_i = 1`.
pub fn bv_pulse_sequence<T: Real>(a: &BitString) -> Result<PulseSequence<T>> {
    check_answer(a)?;
    Ok(PulseSequence::new(
        (0..a.len())
            .filter(|&k| a.bit(k))
            .map(|k| SequenceEvent::hard(vec![k + 1], PulseAxis::X, T::pi()))
            .collect(),
    ))
}
