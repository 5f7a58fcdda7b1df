//! Spin-system descriptions: spins, channels, offsets and scalar couplings.
//!
//! Index 0 is always the observer spin; indices `1..=n` are the computational
//! qubits. Offsets are stored in Hz relative to the rotating frame of the
//! spin's own channel, so heteronuclear systems never need absolute Larmor
//! frequencies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{as_f64, lit, Real};

/// Largest supported system. Operators are dense, so `2^MAX_SPINS` squared
/// complex entries must fit in memory.
pub const MAX_SPINS: usize = 12;

fn default_gamma<T: Real>() -> T {
    T::one()
}

/// A single spin-1/2 nucleus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct Spin<T: Real = f64> {
    pub label: String,
    /// Spins sharing a channel share one rotating frame and one RF field.
    pub channel: String,
    /// Resonance offset in Hz within the channel's rotating frame.
    pub offset_hz: T,
    /// Gyromagnetic ratio relative to the observer. Scales Rabi frequency and
    /// thermal polarization.
    #[serde(default = "default_gamma")]
    pub gamma_rel: T,
    /// Transverse relaxation time in seconds; `None` disables relaxation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_s: Option<T>,
}

impl<T: Real> Spin<T> {
    pub fn new(label: &str, channel: &str, offset_hz: f64) -> Self {
        Spin {
            label: label.to_string(),
            channel: channel.to_string(),
            offset_hz: lit(offset_hz),
            gamma_rel: T::one(),
            t2_s: None,
        }
    }

    pub fn with_gamma(mut self, gamma_rel: f64) -> Self {
        self.gamma_rel = lit(gamma_rel);
        self
    }

    pub fn with_t2(mut self, t2_s: f64) -> Self {
        self.t2_s = Some(lit(t2_s));
        self
    }

    /// Angular offset `2π·ν` in rad/s.
    pub fn omega(&self) -> T {
        T::two_pi() * self.offset_hz
    }
}

/// On-disk form of a spin system.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
struct SystemConfig<T: Real> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    spins: Vec<Spin<T>>,
    j_hz: Vec<Vec<T>>,
}

/// A validated weakly coupled spin system.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem<T: Real = f64> {
    name: Option<String>,
    spins: Vec<Spin<T>>,
    j_hz: Vec<Vec<T>>,
}

impl<T: Real> SpinSystem<T> {
    /// Builds and validates a system from spins and a full symmetric coupling
    /// matrix in Hz.
    pub fn new(spins: Vec<Spin<T>>, j_hz: Vec<Vec<T>>) -> Result<Self> {
        let sys = SpinSystem {
            name: None,
            spins,
            j_hz,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.spins.len();
        if n < 2 {
            return Err(Error::Validation("at least 2 spins are required".into()));
        }
        if n > MAX_SPINS {
            return Err(Error::Validation(format!(
                "at most {MAX_SPINS} spins are supported, got {n}"
            )));
        }
        for (i, s) in self.spins.iter().enumerate() {
            if s.channel.is_empty() {
                return Err(Error::Validation(format!("spin {i} has an empty channel")));
            }
            if !s.offset_hz.is_finite() {
                return Err(Error::Validation(format!(
                    "spin {i}: offset_hz must be finite"
                )));
            }
            if !(s.gamma_rel > T::zero() && s.gamma_rel.is_finite()) {
                return Err(Error::Validation(format!(
                    "spin {i}: gamma_rel must be positive"
                )));
            }
            if let Some(t2) = s.t2_s {
                if !(t2 > T::zero() && t2.is_finite()) {
                    return Err(Error::Validation(format!(
                        "spin {i}: t2_s must be positive"
                    )));
                }
            }
        }
        if self.j_hz.len() != n || self.j_hz.iter().any(|row| row.len() != n) {
            return Err(Error::Validation(format!("j_hz must be a {n}x{n} matrix")));
        }
        for i in 0..n {
            if self.j_hz[i][i] != T::zero() {
                return Err(Error::Validation(format!("j_hz[{i}][{i}] must be zero")));
            }
            for j in 0..n {
                let (a, b) = (self.j_hz[i][j], self.j_hz[j][i]);
                if !a.is_finite() {
                    return Err(Error::Validation(format!("j_hz[{i}][{j}] must be finite")));
                }
                if a != b {
                    return Err(Error::Validation(format!(
                        "j_hz is not symmetric: j_hz[{i}][{j}] = {} but j_hz[{j}][{i}] = {}",
                        as_f64(a),
                        as_f64(b)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Non-fatal problems: the observer must be resolvably coupled to every
    /// computational qubit for its multiplet to encode the register.
    pub fn warnings(&self) -> Vec<String> {
        (1..self.nspins())
            .filter(|&i| self.j_hz[0][i] == T::zero())
            .map(|i| format!("observer has no J coupling to spin {i} ({}); multiplet lines will be degenerate", self.spins[i].label))
            .collect()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn nspins(&self) -> usize {
        self.spins.len()
    }

    /// Number of computational qubits (`nspins - 1`).
    pub fn n_qubits(&self) -> usize {
        self.spins.len() - 1
    }

    /// Hilbert-space dimension `2^nspins`.
    pub fn dim(&self) -> usize {
        1 << self.spins.len()
    }

    pub fn spins(&self) -> &[Spin<T>] {
        &self.spins
    }

    pub fn spin(&self, i: usize) -> &Spin<T> {
        &self.spins[i]
    }

    pub fn observer(&self) -> &Spin<T> {
        &self.spins[0]
    }

    pub fn j_hz(&self, i: usize, j: usize) -> T {
        self.j_hz[i][j]
    }

    pub fn j_matrix(&self) -> &[Vec<T>] {
        &self.j_hz
    }

    pub fn has_channel(&self, channel: &str) -> bool {
        self.spins.iter().any(|s| s.channel == channel)
    }

    /// Extracts the subsystem made of `indices`, in that order. The first
    /// index becomes the new observer.
    pub fn subsystem(&self, indices: &[usize]) -> Result<Self> {
        for &i in indices {
            if i >= self.nspins() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    nspins: self.nspins(),
                });
            }
        }
        let spins = indices.iter().map(|&i| self.spins[i].clone()).collect();
        let j_hz = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.j_hz[i][j]).collect())
            .collect();
        SpinSystem::new(spins, j_hz)
    }

    /// Returns a copy with every `t2_s` removed.
    pub fn without_relaxation(&self) -> Self {
        let mut out = self.clone();
        for s in &mut out.spins {
            s.t2_s = None;
        }
        out
    }

    /// Converts all parameters to another scalar type.
    pub fn cast<U: Real>(&self) -> SpinSystem<U> {
        let c = |v: T| lit::<U>(as_f64(v));
        SpinSystem {
            name: self.name.clone(),
            spins: self
                .spins
                .iter()
                .map(|s| Spin {
                    label: s.label.clone(),
                    channel: s.channel.clone(),
                    offset_hz: c(s.offset_hz),
                    gamma_rel: c(s.gamma_rel),
                    t2_s: s.t2_s.map(c),
                })
                .collect(),
            j_hz: self
                .j_hz
                .iter()
                .map(|row| row.iter().copied().map(c).collect())
                .collect(),
        }
    }

    /// Parses and validates a JSON system description. Spin order is kept.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SystemConfig<T> =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let sys = SpinSystem::new(cfg.spins, cfg.j_hz)?;
        Ok(match cfg.name {
            Some(name) => sys.with_name(name),
            None => sys,
        })
    }

    pub fn to_json(&self) -> String {
        let cfg = SystemConfig {
            name: self.name.clone(),
            spins: self.spins.clone(),
            j_hz: self.j_hz.clone(),
        };
        serde_json::to_string_pretty(&cfg).expect("spin system serializes")
    }
}

/// Parses a JSON system description (see [`SpinSystem::from_json`]).
pub fn load_system(config_text: &str) -> Result<SpinSystem> {
    SpinSystem::from_json(config_text)
}

/// Proton/carbon transmitter-frequency ratio of the alanine measurement
/// (500.13 MHz / 125.77 MHz).
pub const PROTON_GAMMA_REL: f64 = 500.13 / 125.77;

/// Observer T2 of the alanine C-alpha carbon, seconds.
pub const ALANINE_OBSERVER_T2_S: f64 = 0.41;

/// Carbon-13 labeled alanine with C-alpha as observer.
///
/// Spin order follows the parenthesized numbering of the measured parameter
/// table, not its row order: C-alpha (0), C' (1), C-beta (2), H (3). The
/// proton offset is relative to the proton transmitter.
pub fn alanine_preset<T: Real>() -> SpinSystem<T> {
    let spins = vec![
        Spin::new("CA", "13C", 0.0).with_t2(ALANINE_OBSERVER_T2_S),
        Spin::new("C'", "13C", -4320.0),
        Spin::new("CB", "13C", 15793.0),
        Spin::new("H", "1H", 1550.0).with_gamma(PROTON_GAMMA_REL),
    ];
    let j = [
        [0.0, 34.94, 53.81, 143.21],
        [34.94, 0.0, -1.2, 5.5],
        [53.81, -1.2, 0.0, 5.1],
        [143.21, 5.5, 5.1, 0.0],
    ];
    let j_hz = j
        .iter()
        .map(|row| row.iter().map(|&v| lit(v)).collect())
        .collect();
    SpinSystem::new(spins, j_hz)
        .expect("alanine preset is valid")
        .with_name("alanine")
}

/// The three alanine carbons (C-alpha observer, C', C-beta).
///
/// Stand-in for a homonuclear three-spin processor; the parameters are the
/// alanine values with the proton removed.
pub fn alanine_carbons_preset<T: Real>() -> SpinSystem<T> {
    alanine_preset::<T>()
        .subsystem(&[0, 1, 2])
        .expect("subsystem of a valid preset")
        .with_name("alanine-carbons")
}

/// Looks up a preset by name (`alanine`, `alanine-carbons`).
pub fn preset<T: Real>(name: &str) -> Result<SpinSystem<T>> {
    match name {
        "alanine" => Ok(alanine_preset()),
        "alanine-carbons" | "alanine3" => Ok(alanine_carbons_preset()),
        other => Err(Error::Validation(format!("unknown preset `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TWO_SPIN: &str = r#"{
        "spins": [
            {"label": "A", "channel": "13C", "offset_hz": 0},
            {"label": "B", "channel": "13C", "offset_hz": -4320}
        ],
        "j_hz": [[0, 34.94], [34.94, 0]]
    }"#;

    #[test]
    fn loads_two_spin_config() {
        let sys = load_system(TWO_SPIN).unwrap();
        assert_eq!(sys.nspins(), 2);
        assert_eq!(sys.j_hz(0, 1), 34.94);
        assert_eq!(sys.j_hz(1, 0), 34.94);
        assert_eq!(sys.spin(1).offset_hz, -4320.0);
        assert_eq!(sys.spin(0).gamma_rel, 1.0);
        assert!(sys.spin(0).t2_s.is_none());
    }

    #[test]
    fn rejects_asymmetric_couplings() {
        let text = TWO_SPIN.replace("[[0, 34.94], [34.94, 0]]", "[[0, 5], [4, 0]]");
        assert!(matches!(load_system(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_single_spin() {
        let text =
            r#"{"spins": [{"label": "A", "channel": "13C", "offset_hz": 0}], "j_hz": [[0]]}"#;
        match load_system(text) {
            Err(Error::Validation(msg)) => assert!(msg.contains("at least 2 spins")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_gamma_and_t2() {
        let text = TWO_SPIN.replace(
            r#""offset_hz": -4320"#,
            r#""offset_hz": -4320, "gamma_rel": 0"#,
        );
        assert!(matches!(load_system(&text), Err(Error::Validation(_))));
        let text = TWO_SPIN.replace(r#""offset_hz": -4320"#, r#""offset_hz": -4320, "t2_s": -1"#);
        assert!(matches!(load_system(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_text_is_a_parse_error() {
        assert!(matches!(load_system("{ spins: "), Err(Error::Parse(_))));
    }

    #[test]
    fn alanine_values() {
        let sys = alanine_preset::<f64>();
        assert_eq!(sys.j_hz(0, 3), 143.21);
        assert_eq!(sys.j_hz(1, 2), -1.2);
        assert_eq!(sys.spin(1).offset_hz, -4320.0);
        assert_eq!(sys.spin(3).gamma_rel, 500.13 / 125.77);
        assert_eq!(sys.spin(0).t2_s, Some(0.41));
        assert_eq!(sys.spin(3).channel, "1H");
        assert!(sys.warnings().is_empty());
        // The preset survives its own validation path.
        assert_eq!(load_system(&sys.to_json()).unwrap(), sys);
    }

    #[test]
    fn warns_on_uncoupled_qubit() {
        let text = TWO_SPIN.replace("[[0, 34.94], [34.94, 0]]", "[[0, 0], [0, 0]]");
        let sys = load_system(&text).unwrap();
        assert_eq!(sys.warnings().len(), 1);
    }

    #[test]
    fn subsystem_reindexes() {
        let sys = alanine_preset::<f64>().subsystem(&[0, 2, 1]).unwrap();
        assert_eq!(sys.j_hz(0, 1), 53.81);
        assert_eq!(sys.spin(2).label, "C'");
    }

    fn arb_system() -> impl Strategy<Value = SpinSystem> {
        (2usize..=5).prop_flat_map(|n| {
            let spins = proptest::collection::vec(
                (
                    -2.0e4..2.0e4f64,
                    0.1..5.0f64,
                    proptest::option::of(0.01..10.0f64),
                    proptest::bool::ANY,
                ),
                n,
            );
            let js = proptest::collection::vec(-200.0..200.0f64, n * (n - 1) / 2);
            (spins, js).prop_map(move |(spins, js)| {
                let spins = spins
                    .into_iter()
                    .enumerate()
                    .map(|(i, (off, g, t2, proton))| Spin {
                        label: format!("S{i}"),
                        channel: if proton { "1H".into() } else { "13C".into() },
                        offset_hz: off,
                        gamma_rel: g,
                        t2_s: t2,
                    })
                    .collect();
                let mut j = vec![vec![0.0; n]; n];
                let mut it = js.into_iter();
                for a in 0..n {
                    for b in a + 1..n {
                        let v = it.next().unwrap();
                        j[a][b] = v;
                        j[b][a] = v;
                    }
                }
                SpinSystem::new(spins, j).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn json_round_trip(sys in arb_system()) {
            prop_assert_eq!(load_system(&sys.to_json()).unwrap(), sys);
        }
    }
}
