//! Environmental admittance at a qubit node and the Purcell-limited
//! relaxation time T_P = C_Σ / Re{Y_env}.

use num_complex::Complex64;

use crate::netlist::Netlist;
use crate::network::node_admittance_cascade;
use crate::{Flagged, FrequencyGrid};

/// Floor on Re{Y_env}: lossless networks can produce exact zeros on-grid,
/// which would give infinite T_P. Below the floor T_P is capped and the
/// sample flagged.
pub const RE_Y_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, PartialEq)]
pub struct UnknownNode(pub String);

impl std::fmt::Display for UnknownNode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "unknown qubit node '{}'", self.0)
    }
}

impl std::error::Error for UnknownNode {}

/// One row of a Purcell curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurcellPoint {
    pub freq_hz: f64,
    pub y_env: Complex64,
    pub t_p: f64,
    /// Set when Re{Y_env} fell below [`RE_Y_FLOOR`] (T_P is the cap value)
    /// or when an element saturated at this sample.
    pub capped: bool,
}

/// Per-frequency environmental admittance and relaxation time seen from a
/// designated qubit node.
#[derive(Debug, Clone, PartialEq)]
pub struct PurcellCurve {
    pub points: Vec<PurcellPoint>,
}

/// Admittance of the environment at the qubit node, junction removed: both
/// ports resistively terminated, every capacitance (including the node's
/// own C_q) in place.
pub fn env_admittance(
    netlist: &Netlist,
    qubit_node: &str,
    omega: f64,
) -> Result<Flagged<Complex64>, UnknownNode> {
    node_admittance_cascade(netlist, qubit_node, omega)
        .ok_or_else(|| UnknownNode(qubit_node.to_string()))
}

/// T_P = C_Σ / Re{Y_env}, capped (with flag) when Re{Y_env} < the floor.
pub fn purcell_time(c_sigma: f64, y_env: Complex64) -> (f64, bool) {
    assert!(c_sigma.is_finite() && c_sigma > 0.0, "C_sigma must be positive");
    let re = y_env.re;
    if re < RE_Y_FLOOR {
        (c_sigma / RE_Y_FLOOR, true)
    } else {
        (c_sigma / re, false)
    }
}

/// Purcell curve over a grid; the horizontal axis is a hypothetical qubit
/// transition frequency (the junction is absent, so no retuning is needed).
pub fn purcell_curve(
    netlist: &Netlist,
    qubit_node: &str,
    c_sigma: f64,
    grid: &FrequencyGrid,
) -> Result<PurcellCurve, UnknownNode> {
    let mut points = Vec::with_capacity(grid.len());
    for &f in grid.iter() {
        let omega = 2.0 * std::f64::consts::PI * f;
        let y = env_admittance(netlist, qubit_node, omega)?;
        let (t_p, floored) = purcell_time(c_sigma, y.value);
        points.push(PurcellPoint {
            freq_hz: f,
            y_env: y.value,
            t_p,
            capped: floored || y.saturated,
        });
    }
    Ok(PurcellCurve { points })
}

/// Maximal contiguous frequency intervals where t_p >= threshold, endpoints
/// linearly interpolated between samples.
pub fn protected_band(curve: &PurcellCurve, threshold: f64) -> Vec<(f64, f64)> {
    assert!(!curve.points.is_empty(), "empty curve");
    assert!(threshold > 0.0, "threshold must be positive");
    intervals_above(
        &curve.points.iter().map(|p| p.freq_hz).collect::<Vec<_>>(),
        &curve.points.iter().map(|p| p.t_p).collect::<Vec<_>>(),
        threshold,
    )
}

/// Shared interval extraction for threshold crossings on a sampled curve.
pub(crate) fn intervals_above(freqs: &[f64], values: &[f64], threshold: f64) -> Vec<(f64, f64)> {
    let n = freqs.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if values[i] >= threshold {
            let mut j = i;
            while j + 1 < n && values[j + 1] >= threshold {
                j += 1;
            }
            let lo = if i > 0 {
                interp_crossing(freqs[i - 1], values[i - 1], freqs[i], values[i], threshold)
            } else {
                freqs[0]
            };
            let hi = if j + 1 < n {
                interp_crossing(freqs[j], values[j], freqs[j + 1], values[j + 1], threshold)
            } else {
                freqs[n - 1]
            };
            out.push((lo, hi));
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn interp_crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if (y1 - y0).abs() < f64::MIN_POSITIVE {
        return x1;
    }
    let t = (level - y0) / (y1 - y0);
    x0 + t.clamp(0.0, 1.0) * (x1 - x0)
}
