//! Frequency-domain toolkit for microwave feedline networks built from
//! transmission-line two-ports, with a focus on broadband two-stub (Π)
//! Purcell filters.
//!
//! The crate models a feedline circuit as a chain of series elements and
//! shunt branches ([`netlist`]), evaluates it per frequency either by ABCD
//! cascading ([`network`]) or by nodal analysis ([`mna`]), and derives the
//! quantities of interest for qubit protection: S-parameters, the
//! environmental admittance seen from a qubit node and the Purcell-limited
//! relaxation time ([`purcell`]), the closed-form waveguide scattering model
//! ([`interference`]), and filter synthesis plus robustness sweeps
//! ([`design`]).
//!
//! All internal math uses angular frequency ω in rad/s; file and CLI
//! interfaces use cyclic frequency ν in Hz.

pub mod csvio;
pub mod design;
pub mod elements;
pub mod interference;
pub mod mna;
pub mod netlist;
pub mod network;
pub mod purcell;

pub use num_complex;

/// Speed of light in vacuum (m/s), used to derive phase velocity from an
/// effective permittivity.
pub const C0: f64 = 299_792_458.0;

/// Phase velocity for a given effective permittivity: v = c / sqrt(eps_eff).
pub fn velocity_from_eps_eff(eps_eff: f64) -> f64 {
    assert!(
        eps_eff.is_finite() && eps_eff > 0.0,
        "eps_eff must be positive and finite"
    );
    C0 / eps_eff.sqrt()
}

/// A value that may have been clamped at a lossless-network pole.
///
/// Stub and series-LC admittances diverge at their quarter-wave / series
/// resonances. Instead of producing non-finite samples, evaluations clamp
/// the divergent factor at magnitude 1e12 and mark the sample, so sweeps
/// stay finite and downstream consumers can skip or interpolate across
/// flagged points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub saturated: bool,
}

impl<T> Flagged<T> {
    pub fn clean(value: T) -> Self {
        Flagged {
            value,
            saturated: false,
        }
    }

    pub fn saturated(value: T) -> Self {
        Flagged {
            value,
            saturated: true,
        }
    }

    pub fn with_flag(value: T, saturated: bool) -> Self {
        Flagged { value, saturated }
    }

    /// Apply `f` to the value, keeping the flag.
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Flagged<U> {
        Flagged {
            value: f(self.value),
            saturated: self.saturated,
        }
    }

    /// Combine with another flagged value; the result is flagged if either is.
    pub fn join<U, V>(self, other: Flagged<U>, f: impl FnOnce(T, U) -> V) -> Flagged<V> {
        Flagged {
            value: f(self.value, other.value),
            saturated: self.saturated || other.saturated,
        }
    }
}

/// A finite ascending sequence of evaluation frequencies in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    freqs: Vec<f64>,
}

impl FrequencyGrid {
    /// Build a grid from explicit frequencies. Panics unless the values are
    /// finite, strictly positive and strictly ascending.
    pub fn new(freqs: Vec<f64>) -> Self {
        assert!(!freqs.is_empty(), "frequency grid must be nonempty");
        for w in freqs.windows(2) {
            assert!(w[0] < w[1], "frequency grid must be strictly ascending");
        }
        assert!(
            freqs.iter().all(|f| f.is_finite() && *f > 0.0),
            "frequencies must be finite and positive"
        );
        FrequencyGrid { freqs }
    }

    /// Uniform grid of `points` frequencies from `f_start` to `f_stop`
    /// inclusive. Panics unless 0 < f_start < f_stop and points >= 2.
    pub fn linspace(f_start: f64, f_stop: f64, points: usize) -> Self {
        assert!(points >= 2, "grid needs at least two points");
        assert!(
            f_start.is_finite() && f_stop.is_finite() && f_start > 0.0 && f_start < f_stop,
            "need 0 < f_start < f_stop"
        );
        let n = points as f64 - 1.0;
        let freqs = (0..points)
            .map(|i| f_start + (f_stop - f_start) * i as f64 / n)
            .collect();
        FrequencyGrid { freqs }
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.freqs.iter()
    }
}
