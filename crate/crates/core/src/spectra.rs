//! Observer-spin readout: multiplet line amplitudes, Lorentzian rendering and
//! answer decoding.

use std::fmt::Write as _;

use nalgebra::ComplexField;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::evolution::{hard_pulse_unitary, PulseAxis};
use crate::hamiltonian::transition_rf_frequency;
use crate::liouville::Operator;
use crate::scalar::{as_f64, lit, Cplx, Real};
use crate::spin_system::SpinSystem;

/// One line of the observer multiplet.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralLine<T: Real = f64> {
    pub register_label: BitString,
    pub freq_hz: T,
    pub amplitude: Cplx<T>,
}

/// All `2^n` observer lines in increasing register value.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T: Real = f64> {
    pub lines: Vec<SpectralLine<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn amplitudes(&self) -> Vec<Cplx<T>> {
        self.lines.iter().map(|l| l.amplitude).collect()
    }

    pub fn line(&self, label: &BitString) -> Option<&SpectralLine<T>> {
        self.lines.iter().find(|l| &l.register_label == label)
    }

    /// Sum of all amplitudes.
    pub fn total(&self) -> Cplx<T> {
        self.lines
            .iter()
            .fold(Cplx::new(T::zero(), T::zero()), |acc, l| acc + l.amplitude)
    }

    /// `max |amp| / Σ |amp|`.
    pub fn dominant_fraction(&self) -> T {
        let (max, sum) = self.lines.iter().fold((T::zero(), T::zero()), |(m, s), l| {
            let a = l.amplitude.modulus();
            (m.max(a), s + a)
        });
        if sum > T::zero() {
            max / sum
        } else {
            T::zero()
        }
    }

    /// Stick CSV: `register_label,freq_hz,re_amp,im_amp`.
    pub fn sticks_csv(&self) -> String {
        let mut out = String::from("register_label,freq_hz,re_amp,im_amp\n");
        for l in &self.lines {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:?}",
                l.register_label,
                as_f64(l.freq_hz),
                as_f64(l.amplitude.re),
                as_f64(l.amplitude.im)
            );
        }
        out
    }
}

/// Observer coherence conditioned on each register state:
/// `2 Tr[(I_0^+ ⊗ |s⟩⟨s|) ρ]`, scaled so `I_0x ⊗ |s⟩⟨s|` gives amplitude 1.
pub fn multiplet_amplitudes<T: Real>(
    rho: &Operator<T>,
    sys: &SpinSystem<T>,
) -> Result<Spectrum<T>> {
    rho.check_dim(sys.dim())?;
    let n = sys.n_qubits();
    let two = lit::<T>(2.0);
    let lines = BitString::all(n)
        .map(|label| {
            let s = label.value();
            Ok(SpectralLine {
                freq_hz: transition_rf_frequency(sys, &label)?,
                amplitude: rho.get((1 << n) | s, s) * two,
                register_label: label,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Spectrum { lines })
}

/// Ideal `(π/2)_y` on the observer followed by [`multiplet_amplitudes`].
pub fn readout_spectrum<T: Real>(rho: &Operator<T>, sys: &SpinSystem<T>) -> Result<Spectrum<T>> {
    rho.check_dim(sys.dim())?;
    let u = hard_pulse_unitary(sys.nspins(), &[0], PulseAxis::Y, T::frac_pi_2())?;
    multiplet_amplitudes(&rho.conjugate_by(&u), sys)
}

/// Result of reading the answer off a spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded<T: Real = f64> {
    pub label: BitString,
    pub confidence: T,
    /// Another line shares the maximum magnitude.
    pub tie: bool,
}

/// Label of the strongest line. Ties go to the lowest label.
pub fn decode_answer<T: Real>(spec: &Spectrum<T>) -> Result<Decoded<T>> {
    if spec.lines.is_empty() {
        return Err(Error::NoSignal);
    }
    let mags: Vec<T> = spec.lines.iter().map(|l| l.amplitude.modulus()).collect();
    let max = mags.iter().fold(T::zero(), |m, &a| m.max(a));
    let sum = mags.iter().fold(T::zero(), |s, &a| s + a);
    if !(max > T::structural_tolerance()) {
        return Err(Error::NoSignal);
    }
    let tol = max * T::structural_tolerance();
    let best: Vec<usize> = (0..mags.len()).filter(|&k| max - mags[k] <= tol).collect();
    Ok(Decoded {
        label: spec.lines[best[0]].register_label.clone(),
        confidence: max / sum,
        tie: best.len() > 1,
    })
}

/// Uniform frequency grid `start, start + step, …, ≤ stop`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid<T: Real = f64> {
    pub start_hz: T,
    pub stop_hz: T,
    pub step_hz: T,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(start_hz: T, stop_hz: T, step_hz: T) -> Self {
        FrequencyGrid {
            start_hz,
            stop_hz,
            step_hz,
        }
    }

    /// Covers every line with `margin_hz` to spare on each side.
    pub fn around(spec: &Spectrum<T>, margin_hz: T, step_hz: T) -> Self {
        let lo = spec
            .lines
            .iter()
            .fold(T::max_value().unwrap_or(T::zero()), |m, l| m.min(l.freq_hz));
        let hi = spec
            .lines
            .iter()
            .fold(T::min_value().unwrap_or(T::zero()), |m, l| m.max(l.freq_hz));
        FrequencyGrid {
            start_hz: lo - margin_hz,
            stop_hz: hi + margin_hz,
            step_hz,
        }
    }

    pub fn points(&self) -> Result<Vec<T>> {
        if !(self.step_hz > T::zero()) || !self.start_hz.is_finite() || !self.stop_hz.is_finite() {
            return Err(Error::InvalidParameter(
                "grid step must be positive and bounds finite".into(),
            ));
        }
        if self.stop_hz < self.start_hz {
            return Err(Error::InvalidParameter("empty frequency grid".into()));
        }
        let n =
            as_f64((self.stop_hz - self.start_hz) / self.step_hz + lit(1e-9)).floor() as usize + 1;
        Ok((0..n)
            .map(|k| self.start_hz + self.step_hz * lit::<T>(k as f64))
            .collect())
    }
}

/// Sum of unit-height Lorentzians of FWHM `linewidth_hz`, weighted by the
/// real part of each amplitude.
pub fn render_lorentzian<T: Real>(
    spec: &Spectrum<T>,
    linewidth_hz: T,
    grid: &FrequencyGrid<T>,
) -> Result<Vec<(T, T)>> {
    if !(linewidth_hz > T::zero() && linewidth_hz.is_finite()) {
        return Err(Error::InvalidParameter("linewidth must be positive".into()));
    }
    let hw2 = (linewidth_hz * lit(0.5)) * (linewidth_hz * lit(0.5));
    Ok(grid
        .points()?
        .into_iter()
        .map(|f| {
            let y = spec.lines.iter().fold(T::zero(), |acc, l| {
                let d = f - l.freq_hz;
                acc + l.amplitude.re * hw2 / (d * d + hw2)
            });
            (f, y)
        })
        .collect())
}

/// Rendered CSV: `freq_hz,intensity`.
pub fn rendered_csv<T: Real>(samples: &[(T, T)]) -> String {
    let mut out = String::from("freq_hz,intensity\n");
    for &(f, y) in samples {
        let _ = writeln!(out, "{:?},{:?}", as_f64(f), as_f64(y));
    }
    out
}
