//! Propagators and pulse-sequence execution on deviation density matrices.
//!
//! Time-independent Hamiltonians are exponentiated exactly through their
//! Hermitian eigendecomposition. Shaped pulses are sliced into
//! piecewise-constant segments. Relaxation is a phenomenological per-spin T2
//! damping of coherences, applied once per timed event for its full duration.

use std::fmt;
use std::str::FromStr;

use nalgebra::linalg::SymmetricEigen;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hamiltonian::{effective_hamiltonian, internal_hamiltonian, RfField};
use crate::liouville::{basis_bit, embed, Operator};
use crate::scalar::{as_f64, cplx, czero, lit, phase_factor, Real};
use crate::spin_system::SpinSystem;

/// `exp(-i H t)` for Hermitian `H` (rad/s) and time `t` (s).
pub fn propagator<T: Real>(h: &Operator<T>, t: T) -> Result<Operator<T>> {
    let scale = T::one().max(h.max_abs());
    let residual = h.hermiticity_residual();
    if residual > T::structural_tolerance() * scale {
        return Err(Error::NonHermitian(as_f64(residual)));
    }
    let dim = h.dim();
    if is_diagonal(h) {
        let d: Vec<_> = h
            .real_diagonal()
            .into_iter()
            .map(|e| phase_factor(e * t))
            .collect();
        return Ok(Operator::from_diagonal(&d));
    }
    let eig = SymmetricEigen::try_new(h.matrix().clone(), T::default_epsilon(), 10_000)
        .ok_or(Error::Eigen)?;
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let p = phase_factor(lambda * t);
        for r in 0..dim {
            scaled[(r, k)] *= p;
        }
    }
    Ok(Operator::from_matrix(scaled * v.adjoint()))
}

fn is_diagonal<T: Real>(h: &Operator<T>) -> bool {
    let m = h.matrix();
    (0..h.dim()).all(|r| (0..h.dim()).all(|c| r == c || m[(r, c)] == czero()))
}

/// Rotation axis of an ideal hard pulse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseAxis {
    X,
    Y,
    MinusX,
    MinusY,
}

impl PulseAxis {
    /// Field phase in radians (x = 0, y = π/2, -x = π, -y = 3π/2).
    fn phase<T: Real>(self) -> T {
        match self {
            PulseAxis::X => T::zero(),
            PulseAxis::Y => T::frac_pi_2(),
            PulseAxis::MinusX => T::pi(),
            PulseAxis::MinusY => -T::frac_pi_2(),
        }
    }
}

impl fmt::Display for PulseAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PulseAxis::X => "x",
            PulseAxis::Y => "y",
            PulseAxis::MinusX => "-x",
            PulseAxis::MinusY => "-y",
        })
    }
}

impl FromStr for PulseAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "+x" => Ok(PulseAxis::X),
            "y" | "+y" => Ok(PulseAxis::Y),
            "-x" => Ok(PulseAxis::MinusX),
            "-y" => Ok(PulseAxis::MinusY),
            other => Err(Error::Parse(format!("unknown pulse axis `{other}`"))),
        }
    }
}

impl Serialize for PulseAxis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PulseAxis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Amplitude envelope of a soft pulse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "shape", rename_all = "snake_case")]
pub enum Envelope<T: Real = f64> {
    Rectangular,
    /// Truncated Gaussian sampled at `n_slices` midpoints. The pulse spans
    /// `±truncation_sigmas` standard deviations about its centre.
    Gaussian {
        #[serde(alias = "truncation_fraction")]
        truncation_sigmas: T,
        n_slices: usize,
    },
}

impl<T: Real> Default for Envelope<T> {
    fn default() -> Self {
        Envelope::Rectangular
    }
}

impl<T: Real> Envelope<T> {
    /// Truncation at 2.5 standard deviations, 64 slices.
    pub fn default_gaussian() -> Self {
        Envelope::Gaussian {
            truncation_sigmas: lit(2.5),
            n_slices: 64,
        }
    }

    /// Relative amplitude of each slice, normalized to unit mean so that the
    /// flip integral equals that of a rectangular pulse of the same nominal
    /// amplitude.
    pub fn slice_weights(&self) -> Vec<T> {
        match *self {
            Envelope::Rectangular => vec![T::one()],
            Envelope::Gaussian {
                truncation_sigmas,
                n_slices,
            } => {
                let n = lit::<T>(n_slices as f64);
                let two = lit::<T>(2.0);
                let half = lit::<T>(0.5);
                let raw: Vec<T> = (0..n_slices)
                    .map(|k| {
                        let x =
                            (two * (lit::<T>(k as f64) + half) / n - T::one()) * truncation_sigmas;
                        (-x * x * half).exp()
                    })
                    .collect();
                let mean = raw.iter().fold(T::zero(), |a, &w| a + w) / n;
                raw.into_iter().map(|w| w / mean).collect()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Envelope::Gaussian {
            truncation_sigmas,
            n_slices,
        } = *self
        {
            if n_slices < 8 {
                return Err(Error::Validation(format!(
                    "gaussian envelope needs at least 8 slices, got {n_slices}"
                )));
            }
            if !(truncation_sigmas > T::zero() && truncation_sigmas.is_finite()) {
                return Err(Error::Validation(
                    "gaussian truncation must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// How a pulsed-field gradient dephases coherences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Zero every off-diagonal element.
    #[default]
    CrushAll,
    /// Zero only coherences whose γ-weighted coherence order is nonzero;
    /// zero-quantum coherences survive.
    CrushNonzeroOrder,
}

impl FromStr for GradientMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crush_all" | "crush-all" | "all" => Ok(GradientMode::CrushAll),
            "crush_nonzero_order" | "crush-nonzero-order" | "nonzero-order" => {
                Ok(GradientMode::CrushNonzeroOrder)
            }
            other => Err(Error::Parse(format!("unknown gradient mode `{other}`"))),
        }
    }
}

/// One step of a pulse sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "kind", rename_all = "snake_case")]
pub enum SequenceEvent<T: Real = f64> {
    /// Ideal instantaneous rotation of every spin in `targets`.
    HardPulse {
        targets: Vec<usize>,
        axis: PulseAxis,
        angle_rad: T,
    },
    /// Finite-duration pulse under the full rotating-frame Hamiltonian.
    SoftPulse {
        rf: RfField<T>,
        duration_s: T,
        #[serde(default)]
        envelope: Envelope<T>,
    },
    /// Free evolution under the internal Hamiltonian.
    Delay { duration_s: T },
    Gradient {
        #[serde(default)]
        mode: GradientMode,
    },
}

impl<T: Real> SequenceEvent<T> {
    pub fn hard(targets: Vec<usize>, axis: PulseAxis, angle_rad: T) -> Self {
        SequenceEvent::HardPulse {
            targets,
            axis,
            angle_rad,
        }
    }

    pub fn crush() -> Self {
        SequenceEvent::Gradient {
            mode: GradientMode::CrushAll,
        }
    }

    pub fn duration(&self) -> T {
        match self {
            SequenceEvent::SoftPulse { duration_s, .. } | SequenceEvent::Delay { duration_s } => {
                *duration_s
            }
            _ => T::zero(),
        }
    }

    pub fn validate(&self, sys: &SpinSystem<T>) -> Result<()> {
        let check_duration = |d: T| {
            if d >= T::zero() && d.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(
                    "durations must be non-negative and finite".into(),
                ))
            }
        };
        match self {
            SequenceEvent::HardPulse {
                targets, angle_rad, ..
            } => {
                if !angle_rad.is_finite() {
                    return Err(Error::Validation("pulse angle must be finite".into()));
                }
                for (k, &t) in targets.iter().enumerate() {
                    if t >= sys.nspins() {
                        return Err(Error::IndexOutOfRange {
                            index: t,
                            nspins: sys.nspins(),
                        });
                    }
                    if targets[..k].contains(&t) {
                        return Err(Error::Validation(format!(
                            "spin {t} listed twice in pulse targets"
                        )));
                    }
                }
                Ok(())
            }
            SequenceEvent::SoftPulse {
                rf,
                duration_s,
                envelope,
            } => {
                check_duration(*duration_s)?;
                rf.validate(sys)?;
                envelope.validate()
            }
            SequenceEvent::Delay { duration_s } => check_duration(*duration_s),
            SequenceEvent::Gradient { .. } => Ok(()),
        }
    }
}

/// An ordered list of events.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct PulseSequence<T: Real = f64> {
    pub events: Vec<SequenceEvent<T>>,
}

impl<T: Real> PulseSequence<T> {
    pub fn new(events: Vec<SequenceEvent<T>>) -> Self {
        PulseSequence { events }
    }

    pub fn push(&mut self, e: SequenceEvent<T>) {
        self.events.push(e);
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn total_duration(&self) -> T {
        self.events
            .iter()
            .fold(T::zero(), |acc, e| acc + e.duration())
    }

    /// Concatenates two sequences.
    pub fn then(mut self, other: PulseSequence<T>) -> Self {
        self.events.extend(other.events);
        self
    }

    pub fn validate(&self, sys: &SpinSystem<T>) -> Result<()> {
        self.events.iter().try_for_each(|e| e.validate(sys))
    }

    /// Parses a JSON sequence file. Parse errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes")
    }
}

/// Switches for optional physics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvolutionOptions {
    /// Apply T2 damping during timed events for spins that carry `t2_s`.
    pub relaxation: bool,
}

impl EvolutionOptions {
    pub fn with_relaxation(relaxation: bool) -> Self {
        EvolutionOptions { relaxation }
    }
}

/// Unitary of an ideal hard pulse on `targets`.
pub fn hard_pulse_unitary<T: Real>(
    nspins: usize,
    targets: &[usize],
    axis: PulseAxis,
    angle: T,
) -> Result<Operator<T>> {
    let half = angle * lit::<T>(0.5);
    let (c, s) = (half.cos(), half.sin());
    let phi = axis.phase::<T>();
    // exp(-iθ(cosϕ I_x + sinϕ I_y)) = cos(θ/2) E - i sin(θ/2)(cosϕ σ_x + sinϕ σ_y)
    let off_01 = cplx(-s * phi.sin(), -s * phi.cos());
    let off_10 = cplx(s * phi.sin(), -s * phi.cos());
    let rot = [[cplx(c, T::zero()), off_01], [off_10, cplx(c, T::zero())]];
    let mut u = Operator::identity(1 << nspins);
    for &t in targets {
        u = u * embed(rot, t, nspins)?;
    }
    Ok(u)
}

/// Propagator of a soft pulse, including its envelope.
pub fn soft_pulse_unitary<T: Real>(
    sys: &SpinSystem<T>,
    rf: &RfField<T>,
    duration: T,
    envelope: &Envelope<T>,
) -> Result<Operator<T>> {
    let weights = envelope.slice_weights();
    let dt = duration / lit::<T>(weights.len() as f64);
    let mut u = Operator::identity(sys.dim());
    for w in weights {
        let slice = RfField {
            amp_rad_s: rf.amp_rad_s * w,
            ..rf.clone()
        };
        let h = effective_hamiltonian(sys, &slice)?;
        u = propagator(&h, dt)? * u;
    }
    Ok(u)
}

/// Zeroes coherences according to `mode`.
pub fn apply_gradient<T: Real>(
    rho: &Operator<T>,
    sys: &SpinSystem<T>,
    mode: GradientMode,
) -> Operator<T> {
    match mode {
        GradientMode::CrushAll => rho.diagonal_part(),
        GradientMode::CrushNonzeroOrder => {
            let n = sys.nspins();
            let gmax = sys
                .spins()
                .iter()
                .fold(T::zero(), |a, s| a.max(s.gamma_rel));
            let tol = lit::<T>(1e-9) * gmax;
            let mut out = rho.clone();
            for r in 0..rho.dim() {
                for c in 0..rho.dim() {
                    if r == c {
                        continue;
                    }
                    let order = (0..n).fold(T::zero(), |acc, i| {
                        let d = basis_bit(c, i, n) as f64 - basis_bit(r, i, n) as f64;
                        acc + sys.spin(i).gamma_rel * lit(d)
                    });
                    if order.abs() > tol {
                        out.set(r, c, czero());
                    }
                }
            }
            out
        }
    }
}

/// Multiplies each coherence `(r, c)` by `Π exp(-t / T2_i)` over spins whose
/// state differs between `r` and `c`.
pub fn apply_t2_decay<T: Real>(rho: &Operator<T>, sys: &SpinSystem<T>, t: T) -> Operator<T> {
    let n = sys.nspins();
    let rates: Vec<T> = sys
        .spins()
        .iter()
        .map(|s| s.t2_s.map_or(T::zero(), |t2| T::one() / t2))
        .collect();
    let mut out = rho.clone();
    for r in 0..rho.dim() {
        for c in 0..rho.dim() {
            let diff = r ^ c;
            if diff == 0 {
                continue;
            }
            let rate = (0..n)
                .filter(|&i| basis_bit(diff, i, n) == 1)
                .fold(T::zero(), |a, i| a + rates[i]);
            if rate > T::zero() {
                out.set(r, c, rho.get(r, c) * (-rate * t).exp());
            }
        }
    }
    out
}

/// Applies one event to `rho`.
pub fn apply_event<T: Real>(
    rho: &Operator<T>,
    event: &SequenceEvent<T>,
    sys: &SpinSystem<T>,
    opts: EvolutionOptions,
) -> Result<Operator<T>> {
    rho.check_dim(sys.dim())?;
    event.validate(sys)?;
    let out = match event {
        SequenceEvent::HardPulse {
            targets,
            axis,
            angle_rad,
        } => rho.conjugate_by(&hard_pulse_unitary(
            sys.nspins(),
            targets,
            *axis,
            *angle_rad,
        )?),
        SequenceEvent::SoftPulse {
            rf,
            duration_s,
            envelope,
        } => rho.conjugate_by(&soft_pulse_unitary(sys, rf, *duration_s, envelope)?),
        SequenceEvent::Delay { duration_s } => {
            rho.conjugate_by(&propagator(&internal_hamiltonian(sys), *duration_s)?)
        }
        SequenceEvent::Gradient { mode } => apply_gradient(rho, sys, *mode),
    };
    let t = event.duration();
    if opts.relaxation && t > T::zero() {
        Ok(apply_t2_decay(&out, sys, t))
    } else {
        Ok(out)
    }
}

/// Left fold of [`apply_event`] over the sequence.
pub fn run_sequence<T: Real>(
    sys: &SpinSystem<T>,
    seq: &PulseSequence<T>,
    rho0: &Operator<T>,
    opts: EvolutionOptions,
) -> Result<Operator<T>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    seq.validate(sys)?;
    seq.events
        .iter()
        .try_fold(rho0.clone(), |rho, e| apply_event(&rho, e, sys, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{spin_operator, thermal_equilibrium, Axis};
    use crate::spin_system::{alanine_preset, Spin};
    use std::f64::consts::{FRAC_PI_2, PI};

    type Op = Operator<f64>;

    fn one_spin_pair() -> SpinSystem<f64> {
        SpinSystem::new(
            vec![
                Spin::new("A", "13C", 0.0).with_t2(0.41),
                Spin::new("B", "13C", 50.0),
            ],
            vec![vec![0.0, 12.0], vec![12.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn propagator_at_zero_time_is_identity() {
        let sys = alanine_preset::<f64>();
        let h = effective_hamiltonian(&sys, &RfField::along_y("13C", -115.98, 19.65)).unwrap();
        assert!(propagator(&h, 0.0).unwrap().max_abs_diff(&Op::identity(16)) < 1e-12);
    }

    #[test]
    fn pi_rotation_inverts_iz() {
        let omega = 3.0;
        let iy: Op = spin_operator(0, Axis::Y, 1).unwrap();
        let iz: Op = spin_operator(0, Axis::Z, 1).unwrap();
        let u = propagator(&iy.scale_real(omega), PI / omega).unwrap();
        assert!(iz.conjugate_by(&u).max_abs_diff(&iz.scale_real(-1.0)) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = Op::zeros(2);
        h.set(0, 1, cplx(1.0, 0.0));
        assert!(matches!(propagator(&h, 1.0), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn propagators_are_unitary() {
        let sys = alanine_preset::<f64>();
        let h = effective_hamiltonian(&sys, &RfField::new("13C", 12.0, 400.0, 0.7)).unwrap();
        assert!(propagator(&h, 0.013).unwrap().is_unitary(1e-12));
    }

    #[test]
    fn hard_pulse_rotates_iz_to_ix() {
        let sys = one_spin_pair();
        let rho: Op = spin_operator(0, Axis::Z, 2).unwrap();
        let out = apply_event(
            &rho,
            &SequenceEvent::hard(vec![0], PulseAxis::Y, FRAC_PI_2),
            &sys,
            Default::default(),
        )
        .unwrap();
        let ix: Op = spin_operator(0, Axis::X, 2).unwrap();
        assert!(out.max_abs_diff(&ix) < 1e-15);
    }

    #[test]
    fn hard_pulse_matches_generator_exponential() {
        for axis in [
            PulseAxis::X,
            PulseAxis::Y,
            PulseAxis::MinusX,
            PulseAxis::MinusY,
        ] {
            let (ax, sign) = match axis {
                PulseAxis::X => (Axis::X, 1.0),
                PulseAxis::Y => (Axis::Y, 1.0),
                PulseAxis::MinusX => (Axis::X, -1.0),
                PulseAxis::MinusY => (Axis::Y, -1.0),
            };
            let g = [0usize, 2].iter().fold(Op::zeros(8), |acc, &i| {
                acc + spin_operator(i, ax, 3).unwrap().scale_real(sign)
            });
            let direct = propagator(&g, 1.234).unwrap();
            let u = hard_pulse_unitary(3, &[0, 2], axis, 1.234).unwrap();
            assert!(u.max_abs_diff(&direct) < 1e-12, "{axis}");
        }
    }

    #[test]
    fn inverse_pulses_cancel() {
        let sys = alanine_preset::<f64>();
        let rho0 = thermal_equilibrium(&sys);
        let all = vec![0, 1, 2, 3];
        let seq = PulseSequence::new(vec![
            SequenceEvent::hard(all.clone(), PulseAxis::Y, FRAC_PI_2),
            SequenceEvent::hard(all, PulseAxis::MinusY, FRAC_PI_2),
        ]);
        let out = run_sequence(&sys, &seq, &rho0, Default::default()).unwrap();
        assert!(out.max_abs_diff(&rho0) < 1e-12);
    }

    #[test]
    fn empty_sequence_is_an_error() {
        let sys = alanine_preset::<f64>();
        let rho0 = thermal_equilibrium(&sys);
        assert_eq!(
            run_sequence(&sys, &PulseSequence::default(), &rho0, Default::default()),
            Err(Error::EmptySequence)
        );
    }

    #[test]
    fn dimension_mismatch() {
        let sys = alanine_preset::<f64>();
        let e = apply_event(
            &Op::zeros(4),
            &SequenceEvent::crush(),
            &sys,
            Default::default(),
        );
        assert_eq!(
            e,
            Err(Error::DimensionMismatch {
                expected: 16,
                got: 4
            })
        );
    }

    #[test]
    fn gaussian_flip_integral_matches_rectangular() {
        let env = Envelope::<f64>::default_gaussian();
        let w = env.slice_weights();
        assert_eq!(w.len(), 64);
        let mean: f64 = w.iter().sum::<f64>() / w.len() as f64;
        assert!((mean - 1.0).abs() < 1e-14);
        // Symmetric about the centre, peak in the middle.
        assert!((w[0] - w[63]).abs() < 1e-14);
        assert!(w[31] > w[0] * 20.0);
        // On resonance, an uncoupled spin nutates by amp·duration for either envelope.
        let sys = SpinSystem::new(
            vec![Spin::new("A", "13C", 0.0), Spin::new("B", "1H", 0.0)],
            vec![vec![0.0; 2]; 2],
        )
        .unwrap();
        let rf = RfField::along_y("13C", 0.0, 10.0);
        let g = soft_pulse_unitary(&sys, &rf, FRAC_PI_2 / 10.0, &env).unwrap();
        let r = soft_pulse_unitary(&sys, &rf, FRAC_PI_2 / 10.0, &Envelope::Rectangular).unwrap();
        assert!(g.max_abs_diff(&r) < 1e-12);
    }

    #[test]
    fn gaussian_needs_enough_slices() {
        let sys = one_spin_pair();
        let e = SequenceEvent::SoftPulse {
            rf: RfField::along_y("13C", 0.0, 1.0),
            duration_s: 0.1,
            envelope: Envelope::Gaussian {
                truncation_sigmas: 2.5,
                n_slices: 4,
            },
        };
        assert!(matches!(e.validate(&sys), Err(Error::Validation(_))));
    }

    #[test]
    fn gradient_is_idempotent_and_trace_preserving() {
        let sys = alanine_preset::<f64>();
        let rho = apply_event(
            &thermal_equilibrium(&sys),
            &SequenceEvent::hard(vec![0, 1, 2, 3], PulseAxis::X, 0.7),
            &sys,
            Default::default(),
        )
        .unwrap();
        for mode in [GradientMode::CrushAll, GradientMode::CrushNonzeroOrder] {
            let once = apply_gradient(&rho, &sys, mode);
            assert_eq!(apply_gradient(&once, &sys, mode), once);
            assert!((once.trace() - rho.trace()).norm() < 1e-14);
        }
    }

    #[test]
    fn nonzero_order_keeps_zero_quantum() {
        let sys = SpinSystem::new(
            vec![Spin::new("A", "13C", 0.0), Spin::new("B", "13C", 0.0)],
            vec![vec![0.0; 2]; 2],
        )
        .unwrap();
        let mut rho = Op::zeros(4);
        rho.set(1, 2, cplx(1.0, 0.0)); // |01⟩⟨10|: zero-quantum
        rho.set(0, 1, cplx(1.0, 0.0)); // single-quantum
        let out = apply_gradient(&rho, &sys, GradientMode::CrushNonzeroOrder);
        assert_eq!(out.get(1, 2), cplx(1.0, 0.0));
        assert_eq!(out.get(0, 1), cplx(0.0, 0.0));
        assert_eq!(
            apply_gradient(&rho, &sys, GradientMode::CrushAll),
            Op::zeros(4)
        );
    }

    #[test]
    fn t2_decay_during_soft_pulse() {
        let sys = one_spin_pair();
        let rho: Op = spin_operator(0, Axis::X, 2).unwrap();
        // Zero-amplitude pulse: only the observer coherence decays.
        let e = SequenceEvent::SoftPulse {
            rf: RfField::along_y("13C", 0.0, 0.0),
            duration_s: 0.08,
            envelope: Envelope::Rectangular,
        };
        let free = apply_event(&rho, &e, &sys, EvolutionOptions::default()).unwrap();
        let damped = apply_event(&rho, &e, &sys, EvolutionOptions::with_relaxation(true)).unwrap();
        let ratio = damped.get(2, 0).norm() / free.get(2, 0).norm();
        assert!((ratio - (-0.08f64 / 0.41).exp()).abs() < 1e-12);
        assert!((ratio - 0.82).abs() < 0.01);
        // Hard pulses are instantaneous and never relax.
        let hp = SequenceEvent::hard(vec![0], PulseAxis::X, 0.3);
        assert_eq!(
            apply_event(&rho, &hp, &sys, EvolutionOptions::with_relaxation(true)).unwrap(),
            apply_event(&rho, &hp, &sys, EvolutionOptions::default()).unwrap()
        );
    }

    #[test]
    fn delay_is_free_precession() {
        let sys = one_spin_pair();
        let rho: Op = spin_operator(1, Axis::X, 2).unwrap();
        let t = 0.0123;
        let out = apply_event(
            &rho,
            &SequenceEvent::Delay { duration_s: t },
            &sys,
            Default::default(),
        )
        .unwrap();
        let u = propagator(&internal_hamiltonian(&sys), t).unwrap();
        assert!(out.max_abs_diff(&rho.conjugate_by(&u)) < 1e-14);
    }

    #[test]
    fn sequence_json_round_trip() {
        let seq = PulseSequence::new(vec![
            SequenceEvent::hard(vec![1, 2], PulseAxis::MinusY, FRAC_PI_2),
            SequenceEvent::crush(),
            SequenceEvent::SoftPulse {
                rf: RfField::along_y("13C", -115.98, 19.65),
                duration_s: 0.08,
                envelope: Envelope::default_gaussian(),
            },
            SequenceEvent::Delay { duration_s: 0.001 },
            SequenceEvent::Gradient {
                mode: GradientMode::CrushNonzeroOrder,
            },
        ]);
        assert_eq!(PulseSequence::from_json(&seq.to_json()).unwrap(), seq);
    }

    #[test]
    fn unknown_event_kind_reports_line() {
        let text = "{\n  \"events\": [\n    {\"kind\": \"teleport\"}\n  ]\n}";
        match PulseSequence::<f64>::from_json(text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("line 3"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unitary_events_preserve_spectrum_of_rho() {
        let sys = alanine_preset::<f64>();
        let rho0 = thermal_equilibrium(&sys);
        let e = SequenceEvent::SoftPulse {
            rf: RfField::new("13C", -115.98, 19.65, 0.4),
            duration_s: 0.02,
            envelope: Envelope::Rectangular,
        };
        let out = apply_event(&rho0, &e, &sys, Default::default()).unwrap();
        assert!((out.trace() - rho0.trace()).norm() < 1e-12);
        let eig = |o: &Op| {
            let mut v: Vec<f64> = SymmetricEigen::new(o.matrix().clone())
                .eigenvalues
                .iter()
                .copied()
                .collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        for (a, b) in eig(&out).iter().zip(eig(&rho0)) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
