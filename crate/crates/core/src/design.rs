//! Filter synthesis from a target band, lumped-element conversion,
//! multi-band stub chains, and the robustness sweep engine with its
//! threshold-contour extraction.

use std::fmt;

use crate::elements::LumpedLC;
use crate::netlist::{ChainItem, Netlist, ParamError, SeriesElem, SeriesKind, ShuntElem, ShuntKind};
use crate::purcell::{intervals_above, purcell_curve, UnknownNode};
use crate::FrequencyGrid;

/// A synthesized two-stub filter: the stub resonances sit at the band
/// edges (quarter-wave map ℓ = v/(4f)) and the in-line length is the mean
/// of the stub lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterDesign {
    /// Shorter stub (resonant at f_hi).
    pub l_plus: f64,
    /// Longer stub (resonant at f_lo).
    pub l_minus: f64,
    pub inline: f64,
    pub z_tl: f64,
    pub velocity: f64,
    pub band: (f64, f64),
}

impl FilterDesign {
    /// Resonance frequencies (f_lo, f_hi) recovered from the stub lengths.
    pub fn resonances(&self) -> (f64, f64) {
        (
            self.velocity / (4.0 * self.l_minus),
            self.velocity / (4.0 * self.l_plus),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesignError {
    InvalidBand(String),
    Param(ParamError),
    Node(UnknownNode),
}

impl fmt::Display for DesignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignError::InvalidBand(m) => write!(f, "invalid band: {m}"),
            DesignError::Param(e) => write!(f, "{e}"),
            DesignError::Node(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DesignError {}

impl From<ParamError> for DesignError {
    fn from(e: ParamError) -> Self {
        DesignError::Param(e)
    }
}

impl From<UnknownNode> for DesignError {
    fn from(e: UnknownNode) -> Self {
        DesignError::Node(e)
    }
}

/// Synthesize a filter whose stub resonances land exactly on the band
/// edges; the in-line length is the mean of the stub lengths (the sum
/// would instead null the protection at the band center).
pub fn synthesize(f_lo: f64, f_hi: f64, v: f64, z_tl: f64) -> FilterDesign {
    assert!(
        f_lo.is_finite() && f_hi.is_finite() && f_lo > 0.0 && f_lo <= f_hi,
        "need 0 < f_lo <= f_hi"
    );
    assert!(v > 0.0 && z_tl > 0.0, "v and z_tl must be positive");
    let l_plus = v / (4.0 * f_hi);
    let l_minus = v / (4.0 * f_lo);
    FilterDesign {
        l_plus,
        l_minus,
        inline: 0.5 * (l_plus + l_minus),
        z_tl,
        velocity: v,
        band: (f_lo, f_hi),
    }
}

/// Series-LC stand-in for an open stub, matching both its resonance
/// ω₀ = πv/(2ℓ) and its admittance slope there: L = Z_TL·ℓ/(2v),
/// C = 1/(ω₀²L).
pub fn lumped_equivalent(stub_length: f64, z_tl: f64, v: f64) -> LumpedLC {
    assert!(
        stub_length > 0.0 && z_tl > 0.0 && v > 0.0,
        "inputs must be positive"
    );
    let l = z_tl * stub_length / (2.0 * v);
    let w0 = std::f64::consts::PI * v / (2.0 * stub_length);
    LumpedLC::new(l, 1.0 / (w0 * w0 * l))
}

/// Alternating stub / in-line chain protecting several disjoint bands:
/// one stub per band edge (an edge shared by adjacent bands yields a
/// single stub), each in-line length the mean of its neighboring stubs.
pub fn multi_stub(
    bands: &[(f64, f64)],
    v: f64,
    z_tl: f64,
) -> Result<Vec<ChainItem>, DesignError> {
    assert!(v > 0.0 && z_tl > 0.0, "v and z_tl must be positive");
    for (lo, hi) in bands {
        if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo <= hi) {
            return Err(DesignError::InvalidBand(format!(
                "band ({lo}, {hi}) is not 0 < lo <= hi"
            )));
        }
    }
    for pair in bands.windows(2) {
        let ((_, hi0), (lo1, _)) = (pair[0], pair[1]);
        if lo1 < hi0 {
            return Err(DesignError::InvalidBand(format!(
                "bands overlap: {hi0} > {lo1}"
            )));
        }
    }
    // edge frequencies in descending order = stub lengths ascending;
    // adjacent bands sharing an edge contribute it once
    let mut edges: Vec<f64> = Vec::new();
    for (lo, hi) in bands.iter().rev() {
        if edges.last() != Some(hi) {
            edges.push(*hi);
        }
        edges.push(*lo);
    }
    let lengths: Vec<f64> = edges.iter().map(|f| v / (4.0 * f)).collect();
    let mut chain = Vec::new();
    for (i, &len) in lengths.iter().enumerate() {
        if i > 0 {
            chain.push(ChainItem::Series(SeriesElem {
                name: None,
                kind: SeriesKind::Tline {
                    z: z_tl,
                    len: 0.5 * (lengths[i - 1] + len),
                },
            }));
        }
        chain.push(ChainItem::Shunt(ShuntElem {
            name: None,
            kind: ShuntKind::Stub { z: z_tl, len },
        }));
    }
    Ok(chain)
}

/// Total measure (Hz) of frequencies with t_p >= threshold, crossings
/// linearly interpolated.
pub fn bandwidth_metric(freqs: &[f64], tp_s: &[f64], threshold: f64) -> f64 {
    assert!(!freqs.is_empty() && freqs.len() == tp_s.len(), "bad row");
    intervals_above(freqs, tp_s, threshold)
        .iter()
        .map(|(lo, hi)| hi - lo)
        .sum()
}

/// T_P over a (parameter value × frequency) grid with the threshold
/// contour extracted by marching squares.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMap {
    pub param_path: String,
    pub param_values: Vec<f64>,
    pub freqs: Vec<f64>,
    /// `tp_s[i][j]` = T_P at `(param_values[i], freqs[j])`.
    pub tp_s: Vec<Vec<f64>>,
    pub threshold: f64,
    /// Iso-threshold polylines as (param value, frequency) vertices.
    pub contours: Vec<Vec<(f64, f64)>>,
}

/// Sweep one netlist parameter, computing a Purcell curve per value.
pub fn sweep_2d(
    netlist: &Netlist,
    param: &str,
    values: &[f64],
    grid: &FrequencyGrid,
    qubit_node: &str,
    c_sigma: f64,
    threshold: f64,
) -> Result<SweepMap, DesignError> {
    assert!(!values.is_empty(), "empty sweep");
    let mut tp_s = Vec::with_capacity(values.len());
    for &value in values {
        let mut modified = netlist.clone();
        modified.set_param(param, value)?;
        let curve = purcell_curve(&modified, qubit_node, c_sigma, grid)?;
        tp_s.push(curve.points.iter().map(|p| p.t_p).collect::<Vec<f64>>());
    }
    let freqs: Vec<f64> = grid.iter().copied().collect();
    let contours = threshold_contours(values, &freqs, &tp_s, threshold);
    Ok(SweepMap {
        param_path: param.to_string(),
        param_values: values.to_vec(),
        freqs,
        tp_s,
        threshold,
        contours,
    })
}

/// Marching-squares contour of tp = threshold over the sweep grid.
/// Crossings are interpolated in log10(tp) since T_P spans decades; the
/// returned vertices are (param value, frequency) pairs.
pub fn threshold_contours(
    param_values: &[f64],
    freqs: &[f64],
    tp_s: &[Vec<f64>],
    threshold: f64,
) -> Vec<Vec<(f64, f64)>> {
    let np = param_values.len();
    let nf = freqs.len();
    if np < 2 || nf < 2 {
        return Vec::new();
    }
    let lt = threshold.log10();
    let lv = |i: usize, j: usize| tp_s[i][j].max(f64::MIN_POSITIVE).log10();
    // crossing point on an edge between two grid corners
    let cross = |i0: usize, j0: usize, i1: usize, j1: usize| -> (f64, f64) {
        let (a, b) = (lv(i0, j0), lv(i1, j1));
        let t = if (b - a).abs() < f64::MIN_POSITIVE {
            0.5
        } else {
            ((lt - a) / (b - a)).clamp(0.0, 1.0)
        };
        (
            param_values[i0] + t * (param_values[i1] - param_values[i0]),
            freqs[j0] + t * (freqs[j1] - freqs[j0]),
        )
    };
    let mut segments: Vec<((f64, f64), (f64, f64))> = Vec::new();
    for i in 0..np - 1 {
        for j in 0..nf - 1 {
            let mut case = 0usize;
            if lv(i, j) >= lt {
                case |= 1;
            }
            if lv(i, j + 1) >= lt {
                case |= 2;
            }
            if lv(i + 1, j + 1) >= lt {
                case |= 4;
            }
            if lv(i + 1, j) >= lt {
                case |= 8;
            }
            // cell edges: bottom (i,j)-(i,j+1), right (i,j+1)-(i+1,j+1),
            // top (i+1,j)-(i+1,j+1), left (i,j)-(i+1,j)
            let bottom = || cross(i, j, i, j + 1);
            let right = || cross(i, j + 1, i + 1, j + 1);
            let top = || cross(i + 1, j, i + 1, j + 1);
            let left = || cross(i, j, i + 1, j);
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left(), bottom())),
                2 | 13 => segments.push((bottom(), right())),
                3 | 12 => segments.push((left(), right())),
                4 | 11 => segments.push((right(), top())),
                6 | 9 => segments.push((bottom(), top())),
                7 | 8 => segments.push((left(), top())),
                5 => {
                    segments.push((left(), bottom()));
                    segments.push((right(), top()));
                }
                10 => {
                    segments.push((bottom(), right()));
                    segments.push((left(), top()));
                }
                _ => unreachable!(),
            }
        }
    }
    chain_segments(segments)
}

/// Greedy chaining of segments sharing exact endpoints into polylines.
fn chain_segments(segments: Vec<((f64, f64), (f64, f64))>) -> Vec<Vec<(f64, f64)>> {
    use std::collections::HashMap;
    let key = |p: (f64, f64)| (p.0.to_bits(), p.1.to_bits());
    let mut adjacency: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (idx, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(key(*a)).or_default().push(idx);
        adjacency.entry(key(*b)).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut line = vec![a, b];
        // extend forward from the tail
        loop {
            let tail = *line.last().unwrap();
            let next = adjacency
                .get(&key(tail))
                .and_then(|ids| ids.iter().find(|&&i| !used[i]).copied());
            match next {
                Some(i) => {
                    used[i] = true;
                    let (p, q) = segments[i];
                    line.push(if key(p) == key(tail) { q } else { p });
                }
                None => break,
            }
        }
        // extend backward from the head
        loop {
            let head = line[0];
            let prev = adjacency
                .get(&key(head))
                .and_then(|ids| ids.iter().find(|&&i| !used[i]).copied());
            match prev {
                Some(i) => {
                    used[i] = true;
                    let (p, q) = segments[i];
                    line.insert(0, if key(p) == key(head) { q } else { p });
                }
                None => break,
            }
        }
        polylines.push(line);
    }
    polylines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::velocity_from_eps_eff;
    use std::f64::consts::PI;

    #[test]
    fn synthesize_recovers_table_lengths() {
        let v = velocity_from_eps_eff(5.95);
        let d = synthesize(4.16337822929866e9, 4.565487567938204e9, v, 50.48);
        assert!((d.l_plus - 6.73e-3).abs() < 1e-8, "l+ = {}", d.l_plus);
        assert!((d.l_minus - 7.38e-3).abs() < 1e-8, "l- = {}", d.l_minus);
        // in-line is the mean; within 0.5% of the tabulated 7.04 mm
        assert!((d.inline - 7.055e-3).abs() < 1e-8);
        assert!((d.inline - 7.04e-3).abs() / 7.04e-3 < 5e-3);
        // never the destructive choice
        assert!(d.inline < d.l_plus + d.l_minus);
        // quarter-wave map round-trips to rounding error
        let (lo, hi) = d.resonances();
        assert!((lo - d.band.0).abs() <= 4.0 * f64::EPSILON * d.band.0);
        assert!((hi - d.band.1).abs() <= 4.0 * f64::EPSILON * d.band.1);
    }

    #[test]
    fn synthesize_degenerate_band() {
        let d = synthesize(4.3e9, 4.3e9, 1.2e8, 50.0);
        assert_eq!(d.l_plus, d.l_minus);
        assert_eq!(d.inline, d.l_plus);
    }

    #[test]
    fn lumped_equivalent_frozen_values_and_slope() {
        let v = velocity_from_eps_eff(5.95);
        let lc = lumped_equivalent(6.73e-3, 50.48, v);
        assert!((lc.inductance - 1.3821086808587295e-9).abs() < 1e-18);
        assert!((lc.capacitance - 8.792730043057742e-13).abs() < 1e-22);
        // resonance matches the stub's quarter-wave frequency exactly
        let stub = crate::elements::LineSpec::new(6.73e-3, 50.48, v);
        let f0 = lc.resonance() / (2.0 * PI);
        assert!((f0 - stub.quarter_wave_freq()).abs() / f0 < 1e-12);
        // admittance slope matches within 1e-3 at w0 +/- kappa/100
        let w0 = lc.resonance();
        let kappa = v / 6.73e-3;
        for sign in [-1.0, 1.0] {
            let w = w0 + sign * kappa / 100.0;
            let h = w * 1e-7;
            let dy_stub = (crate::elements::open_stub_admittance(&stub, w + h).value
                - crate::elements::open_stub_admittance(&stub, w - h).value)
                / (2.0 * h);
            let dy_lc = (crate::elements::lc_shunt_admittance(&lc, w + h).value
                - crate::elements::lc_shunt_admittance(&lc, w - h).value)
                / (2.0 * h);
            let rel = (dy_stub - dy_lc).norm() / dy_stub.norm();
            assert!(rel < 1e-3, "slope mismatch {rel} at sign {sign}");
        }
    }

    #[test]
    fn multi_stub_single_band_matches_synthesize() {
        let v = velocity_from_eps_eff(5.95);
        let d = synthesize(4.16e9, 4.57e9, v, 50.48);
        let chain = multi_stub(&[(4.16e9, 4.57e9)], v, 50.48).unwrap();
        assert_eq!(chain.len(), 3);
        match (&chain[0], &chain[1], &chain[2]) {
            (
                ChainItem::Shunt(ShuntElem { kind: ShuntKind::Stub { len: l1, .. }, .. }),
                ChainItem::Series(SeriesElem { kind: SeriesKind::Tline { len: li, .. }, .. }),
                ChainItem::Shunt(ShuntElem { kind: ShuntKind::Stub { len: l2, .. }, .. }),
            ) => {
                assert_eq!(*l1, d.l_plus);
                assert_eq!(*li, d.inline);
                assert_eq!(*l2, d.l_minus);
            }
            other => panic!("unexpected fragment {other:?}"),
        }
    }

    #[test]
    fn multi_stub_band_counts_and_errors() {
        let v = 1.2e8;
        assert!(multi_stub(&[], v, 50.0).unwrap().is_empty());
        // shared edge: 3 stubs + 2 in-lines
        let chain = multi_stub(&[(4.0e9, 4.5e9), (4.5e9, 5.0e9)], v, 50.0).unwrap();
        let stubs = chain
            .iter()
            .filter(|c| matches!(c, ChainItem::Shunt(_)))
            .count();
        assert_eq!(stubs, 3);
        assert_eq!(chain.len(), 5);
        // distinct edges: 4 stubs + 3 in-lines
        let chain = multi_stub(&[(4.0e9, 4.4e9), (4.8e9, 5.0e9)], v, 50.0).unwrap();
        let stubs = chain
            .iter()
            .filter(|c| matches!(c, ChainItem::Shunt(_)))
            .count();
        assert_eq!(stubs, 4);
        assert_eq!(chain.len(), 7);
        // overlap rejected
        assert!(matches!(
            multi_stub(&[(4.0e9, 4.6e9), (4.5e9, 5.0e9)], v, 50.0),
            Err(DesignError::InvalidBand(_))
        ));
    }

    #[test]
    fn bandwidth_metric_rows() {
        let freqs: Vec<f64> = (0..11).map(|i| 4.0e9 + i as f64 * 1e8).collect();
        let below = vec![1e-4; 11];
        assert_eq!(bandwidth_metric(&freqs, &below, 1e-3), 0.0);
        // exactly one plateau 4.2..4.5 above threshold
        let mut row = vec![1e-6; 11];
        for (i, r) in row.iter_mut().enumerate() {
            let f = freqs[i];
            if (4.2e9..=4.5e9).contains(&f) {
                *r = 1e-2;
            }
        }
        let bw = bandwidth_metric(&freqs, &row, 1e-3);
        // interpolated edges extend part way into the neighboring cells
        assert!(bw > 3.0e8 && bw < 5.0e8, "bw = {bw}");
        // samples sitting exactly on the threshold interpolate to their own
        // frequency: a [4.2, 4.5] GHz plateau measures exactly 0.3 GHz
        let mut exact = vec![1e-6; 11];
        for (i, r) in exact.iter_mut().enumerate() {
            if (4.2e9..=4.5e9).contains(&freqs[i]) {
                *r = 1e-3;
            }
        }
        let bw = bandwidth_metric(&freqs, &exact, 1e-3);
        assert!((bw - 0.3e9).abs() < 1.0, "bw = {bw}");
    }

    #[test]
    fn contours_lie_on_crossing_cells() {
        // synthetic bump: tp = 1e-2 * exp(-((f-f0)/s)^2) * exp(-((p-p0)/q)^2)
        let params: Vec<f64> = (0..21).map(|i| i as f64).collect();
        let freqs: Vec<f64> = (0..31).map(|j| 100.0 + j as f64).collect();
        let tp: Vec<Vec<f64>> = params
            .iter()
            .map(|&p| {
                freqs
                    .iter()
                    .map(|&f| {
                        1e-2 * (-((f - 115.0) / 6.0).powi(2)).exp()
                            * (-((p - 10.0) / 4.0).powi(2)).exp()
                    })
                    .collect()
            })
            .collect();
        let thr = 1e-3;
        let contours = threshold_contours(&params, &freqs, &tp, thr);
        assert!(!contours.is_empty());
        let interp = |a: f64, b: f64, t: f64| a + t * (b - a);
        let _ = interp;
        for line in &contours {
            assert!(line.len() >= 2);
            for &(p, f) in line {
                // vertex lies inside the grid
                assert!((params[0]..=*params.last().unwrap()).contains(&p));
                assert!((freqs[0]..=*freqs.last().unwrap()).contains(&f));
                // vertex sits on a cell whose corners straddle the threshold
                let i = params.partition_point(|&x| x <= p).saturating_sub(1);
                let j = freqs.partition_point(|&x| x <= f).saturating_sub(1);
                let i = i.min(params.len() - 2);
                let j = j.min(freqs.len() - 2);
                let cell = [tp[i][j], tp[i][j + 1], tp[i + 1][j], tp[i + 1][j + 1]];
                let above = cell.iter().any(|&v| v >= thr);
                let below = cell.iter().any(|&v| v < thr);
                assert!(above && below, "vertex ({p}, {f}) on a non-crossing cell");
            }
        }
    }
}
