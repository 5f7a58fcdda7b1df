//! Internal and rotating-frame Hamiltonians (rad/s) and multiplet line
//! positions (Hz).
//!
//! An RF field acts only on spins of its own channel. Other channels keep
//! their plain `-ω_i I_iz` term and receive no Rabi term, since they sit
//! hundreds of MHz away from the carrier.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::liouville::{basis_bit, spin_operator, Axis, Operator};
use crate::scalar::{lit, Real};
use crate::spin_system::SpinSystem;

/// A constant-amplitude RF field in the rotating frame of `channel`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct RfField<T: Real = f64> {
    pub channel: String,
    /// Carrier position in Hz within the channel's rotating frame.
    pub carrier_offset_hz: T,
    /// Rabi frequency of the observer, rad/s.
    pub amp_rad_s: T,
    /// Phase of the field: 0 is +x, π/2 is +y.
    pub phase_rad: T,
}

impl<T: Real> RfField<T> {
    pub fn new(channel: &str, carrier_offset_hz: T, amp_rad_s: T, phase_rad: T) -> Self {
        RfField {
            channel: channel.to_string(),
            carrier_offset_hz,
            amp_rad_s,
            phase_rad,
        }
    }

    /// Field along +y (`ϕ = π/2`).
    pub fn along_y(channel: &str, carrier_offset_hz: T, amp_rad_s: T) -> Self {
        Self::new(channel, carrier_offset_hz, amp_rad_s, T::frac_pi_2())
    }

    pub fn validate(&self, sys: &SpinSystem<T>) -> Result<()> {
        if !sys.has_channel(&self.channel) {
            return Err(Error::UnknownChannel(self.channel.clone()));
        }
        if !(self.amp_rad_s >= T::zero() && self.amp_rad_s.is_finite()) {
            return Err(Error::InvalidParameter(
                "RF amplitude must be non-negative and finite".into(),
            ));
        }
        if !self.carrier_offset_hz.is_finite() || !self.phase_rad.is_finite() {
            return Err(Error::InvalidParameter(
                "RF carrier and phase must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Which spins on the irradiated channel receive a Rabi term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriveScope {
    /// Every spin on the channel (the full effective Hamiltonian).
    Channel,
    /// The observer only; off-resonance drive on the computational spins is
    /// dropped.
    ObserverOnly,
}

/// Diagonal of `Σ_i z_i I_iz + 2π Σ_{i<j} J_ij I_iz I_jz`.
fn zeeman_and_coupling_diagonal<T: Real>(sys: &SpinSystem<T>, z: &[T]) -> Vec<T> {
    let n = sys.nspins();
    let half = lit::<T>(0.5);
    let m = |b: usize, i: usize| if basis_bit(b, i, n) == 0 { half } else { -half };
    (0..sys.dim())
        .map(|b| {
            let mut e = T::zero();
            for i in 0..n {
                e += z[i] * m(b, i);
                for j in i + 1..n {
                    e += T::two_pi() * sys.j_hz(i, j) * m(b, i) * m(b, j);
                }
            }
            e
        })
        .collect()
}

/// `H_int = -Σ ω_i I_iz + 2π Σ_{i<j} J_ij I_iz I_jz`, diagonal.
pub fn internal_hamiltonian<T: Real>(sys: &SpinSystem<T>) -> Operator<T> {
    let z: Vec<T> = sys.spins().iter().map(|s| -s.omega()).collect();
    Operator::from_real_diagonal(&zeeman_and_coupling_diagonal(sys, &z))
}

/// Time-independent Hamiltonian in the frame rotating with `rf`.
pub fn effective_hamiltonian<T: Real>(sys: &SpinSystem<T>, rf: &RfField<T>) -> Result<Operator<T>> {
    effective_hamiltonian_scoped(sys, rf, DriveScope::Channel)
}

/// [`effective_hamiltonian`] with control over which spins are driven.
pub fn effective_hamiltonian_scoped<T: Real>(
    sys: &SpinSystem<T>,
    rf: &RfField<T>,
    scope: DriveScope,
) -> Result<Operator<T>> {
    rf.validate(sys)?;
    let omega_rf = T::two_pi() * rf.carrier_offset_hz;
    let on_channel = |i: usize| sys.spin(i).channel == rf.channel;
    let z: Vec<T> = (0..sys.nspins())
        .map(|i| {
            if on_channel(i) {
                omega_rf - sys.spin(i).omega()
            } else {
                -sys.spin(i).omega()
            }
        })
        .collect();
    let mut h = Operator::from_real_diagonal(&zeeman_and_coupling_diagonal(sys, &z));
    if rf.amp_rad_s > T::zero() {
        let g0 = sys.observer().gamma_rel;
        let (c, s) = (rf.phase_rad.cos(), rf.phase_rad.sin());
        for i in 0..sys.nspins() {
            if !on_channel(i) || (scope == DriveScope::ObserverOnly && i != 0) {
                continue;
            }
            let rabi = rf.amp_rad_s * sys.spin(i).gamma_rel / g0;
            let x = spin_operator(i, Axis::X, sys.nspins())?.scale_real(rabi * c);
            let y = spin_operator(i, Axis::Y, sys.nspins())?.scale_real(rabi * s);
            h = h + x + y;
        }
    }
    Ok(h)
}

/// Position (Hz) of the observer multiplet line belonging to register state
/// `label`: `ν_0 + Σ_i J_0i (label_i - 1/2)`.
///
/// For the all-zero label this is `ν_0 - Σ J_0k / 2`, the carrier that makes
/// the `|0…0⟩ ↔ |10…0⟩` transition resonant.
pub fn transition_rf_frequency<T: Real>(sys: &SpinSystem<T>, label: &BitString) -> Result<T> {
    label.expect_len(sys.n_qubits())?;
    let half = lit::<T>(0.5);
    let shift = label
        .bits()
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (k, &b)| {
            let s = if b { T::one() } else { T::zero() };
            acc + sys.j_hz(0, k + 1) * (s - half)
        });
    Ok(sys.observer().offset_hz + shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{spin_operator, Operator};
    use crate::spin_system::{alanine_preset, Spin};
    use std::f64::consts::{FRAC_PI_2, PI};

    type Op = Operator<f64>;

    fn two_spin(j: f64) -> SpinSystem<f64> {
        SpinSystem::new(
            vec![Spin::new("A", "13C", 0.0), Spin::new("B", "13C", 0.0)],
            vec![vec![0.0, j], vec![j, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn single_offset() {
        // Only the observer is offset; the second spin sits on resonance and is uncoupled.
        let sys = SpinSystem::new(
            vec![Spin::new("A", "13C", 100.0), Spin::new("B", "13C", 0.0)],
            vec![vec![0.0; 2]; 2],
        )
        .unwrap();
        let h = internal_hamiltonian(&sys);
        let d = h.real_diagonal();
        assert!((d[0] + 2.0 * PI * 50.0).abs() < 1e-12);
        assert!((d[2] - 2.0 * PI * 50.0).abs() < 1e-12);
    }

    #[test]
    fn pure_coupling() {
        let h = internal_hamiltonian(&two_spin(34.94));
        let q = 2.0 * PI / 4.0 * 34.94;
        let expected = Op::from_real_diagonal(&[q, -q, -q, q]);
        assert!(h.max_abs_diff(&expected) < 1e-12);
        let rf = RfField::along_y("13C", 0.0, 0.0);
        assert!(
            effective_hamiltonian(&two_spin(34.94), &rf)
                .unwrap()
                .max_abs_diff(&expected)
                < 1e-12
        );
    }

    #[test]
    fn on_resonance_nutation() {
        let sys = two_spin(0.0);
        let omega = 7.0;
        let rf = RfField::along_y("13C", 0.0, omega);
        let h = effective_hamiltonian_scoped(&sys, &rf, DriveScope::ObserverOnly).unwrap();
        let iy: Op = spin_operator(0, Axis::Y, 2).unwrap();
        assert!(h.max_abs_diff(&iy.scale_real(omega)) < 1e-14);
    }

    #[test]
    fn unknown_channel() {
        let rf = RfField::along_y("15N", 0.0, 1.0);
        assert_eq!(
            effective_hamiltonian(&two_spin(1.0), &rf),
            Err(Error::UnknownChannel("15N".into()))
        );
    }

    /// Term-by-term construction from spin operators, independent of the
    /// diagonal fast path.
    fn termwise(sys: &SpinSystem<f64>, rf: &RfField<f64>) -> Op {
        let n = sys.nspins();
        let iop = |i, a| spin_operator::<f64>(i, a, n).unwrap();
        let mut h = Op::zeros(sys.dim());
        for i in 0..n {
            let s = sys.spin(i);
            let w = 2.0 * PI * s.offset_hz;
            if s.channel == rf.channel {
                h = h + iop(i, Axis::Z).scale_real(2.0 * PI * rf.carrier_offset_hz - w);
                let rabi = rf.amp_rad_s * s.gamma_rel;
                h = h + iop(i, Axis::X).scale_real(rabi * rf.phase_rad.cos());
                h = h + iop(i, Axis::Y).scale_real(rabi * rf.phase_rad.sin());
            } else {
                h = h + iop(i, Axis::Z).scale_real(-w);
            }
            for j in i + 1..n {
                h = h + (&iop(i, Axis::Z) * &iop(j, Axis::Z)).scale_real(2.0 * PI * sys.j_hz(i, j));
            }
        }
        h
    }

    #[test]
    fn alanine_matches_termwise_construction() {
        let sys = alanine_preset::<f64>();
        let rf = RfField::along_y("13C", -115.98, 19.65);
        let h = effective_hamiltonian(&sys, &rf).unwrap();
        assert!(h.max_abs_diff(&termwise(&sys, &rf)) < 1e-9);
        assert!(h.is_hermitian(1e-12));
        let rf = RfField::new("1H", 3.0, 5.0, 0.3);
        let h = effective_hamiltonian(&sys, &rf).unwrap();
        assert!(h.max_abs_diff(&termwise(&sys, &rf)) < 1e-9);
    }

    #[test]
    fn rotating_frame_shift() {
        let sys = alanine_preset::<f64>();
        let c = 37.5;
        let rf = RfField::along_y("13C", c, 0.0);
        let heff = effective_hamiltonian(&sys, &rf).unwrap();
        let mut shifted = internal_hamiltonian(&sys);
        for i in 0..3 {
            shifted = shifted
                + spin_operator(i, Axis::Z, 4)
                    .unwrap()
                    .scale_real(2.0 * PI * c);
        }
        assert!(heff.max_abs_diff(&shifted) < 1e-9);
        assert!(internal_hamiltonian(&sys).is_hermitian(1e-12));
    }

    #[test]
    fn alanine_line_positions() {
        let sys = alanine_preset::<f64>();
        let f000 = transition_rf_frequency(&sys, &"000".parse().unwrap()).unwrap();
        let f111 = transition_rf_frequency(&sys, &"111".parse().unwrap()).unwrap();
        assert!((f000 + 115.98).abs() < 1e-12);
        assert!((f111 - 115.98).abs() < 1e-12);
        assert!(transition_rf_frequency(&sys, &"00".parse().unwrap()).is_err());
    }

    #[test]
    fn uncoupled_observer_lines_collapse() {
        let sys = two_spin(0.0);
        for l in ["0", "1"] {
            assert_eq!(
                transition_rf_frequency(&sys, &l.parse().unwrap()).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn line_frequency_matches_energy_gap() {
        // The observer flip |0,s⟩ → |1,s⟩ of H_int has gap 2π·ν(s).
        let sys = alanine_preset::<f64>();
        let d = internal_hamiltonian(&sys).real_diagonal();
        for s in BitString::all(3) {
            let gap = d[8 | s.value()] - d[s.value()];
            let nu = transition_rf_frequency(&sys, &s).unwrap();
            assert!((gap - 2.0 * PI * nu).abs() < 1e-9, "{s}");
            // ...and the carrier at that line cancels the observer's diagonal term.
            let rf = RfField::along_y("13C", nu, 0.0);
            let e = effective_hamiltonian(&sys, &rf).unwrap().real_diagonal();
            assert!((e[8 | s.value()] - e[s.value()]).abs() < 1e-9);
        }
        // 000 line: gap magnitude is half the summed observer couplings.
        assert!((d[8] - d[0] + 2.0 * PI * (34.94 + 53.81 + 143.21) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn lines_order_by_weighted_label() {
        let sys = alanine_preset::<f64>();
        let mut pairs: Vec<(f64, f64)> = BitString::all(3)
            .map(|s| {
                let w: f64 = s
                    .bits()
                    .iter()
                    .enumerate()
                    .map(|(k, &b)| if b { sys.j_hz(0, k + 1) } else { 0.0 })
                    .sum();
                (w, transition_rf_frequency(&sys, &s).unwrap())
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert!(pairs.windows(2).all(|p| p[1].1 > p[0].1));
        let lowest = BitString::all(3)
            .min_by(|a, b| {
                transition_rf_frequency(&sys, a)
                    .unwrap()
                    .partial_cmp(&transition_rf_frequency(&sys, b).unwrap())
                    .unwrap()
            })
            .unwrap();
        assert_eq!(lowest.to_string(), "000");
    }

    #[test]
    fn phase_pi_over_2_is_pure_y() {
        let sys = two_spin(10.0);
        let rf = RfField::new("13C", 0.0, 3.0, FRAC_PI_2);
        let h = effective_hamiltonian(&sys, &rf).unwrap();
        let x_part = (0..4)
            .map(|r| h.get(r, r ^ 2).re)
            .fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(x_part < 1e-15);
    }
}
