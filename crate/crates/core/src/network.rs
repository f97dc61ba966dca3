//! Two-port composition over a netlist: cascading, S-parameters, terminated
//! impedances, the closed-form impedance of the two-stub filter, response
//! sweeps, and extremum extraction.

use num_complex::Complex64;

use crate::elements::{
    abcd_series, abcd_shunt, abcd_tline, lc_shunt_admittance, open_stub_admittance, LineSpec,
    LumpedLC, TwoPort, POLE_CLAMP,
};
use crate::netlist::{
    Branch, BranchItem, ChainItem, Netlist, SeriesElem, SeriesKind, ShuntElem, ShuntKind,
    Termination,
};
use crate::{Flagged, FrequencyGrid};

/// Scattering parameters of a two-port relative to real reference
/// impedances. For every network in scope S12 = S21 (reciprocity) and
/// |S11|² + |S21|² = 1 (losslessness with real ports).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SParams {
    pub s11: Complex64,
    pub s21: Complex64,
    pub s12: Complex64,
    pub s22: Complex64,
}

/// One row of a response sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseSample {
    pub freq_hz: f64,
    pub s: SParams,
    pub saturated: bool,
}

/// Load seen by a two-port's output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Load {
    Impedance(Complex64),
    Open,
}

/// Ordered matrix product of a nonempty sequence, input side first.
pub fn cascade(parts: &[TwoPort]) -> TwoPort {
    assert!(!parts.is_empty(), "cascade of an empty sequence");
    parts[1..]
        .iter()
        .fold(parts[0], |acc, part| acc.then(part))
}

/// ABCD → S conversion with (possibly unequal) real port impedances.
pub fn s_params(tp: &TwoPort, z_in: f64, z_out: f64) -> SParams {
    assert!(z_in > 0.0 && z_out > 0.0, "port impedances must be positive");
    let num_common = tp.a * z_out + tp.b;
    let cross = tp.c * z_in * z_out;
    let den = num_common + cross + tp.d * z_in;
    let root = (z_in * z_out).sqrt();
    SParams {
        s11: (num_common - cross - tp.d * z_in) / den,
        s21: 2.0 * root / den,
        s12: 2.0 * tp.det() * root / den,
        s22: (tp.b - tp.a * z_out - cross + tp.d * z_in) / den,
    }
}

/// Input impedance of a two-port terminated by `load`:
/// Z_in = (A·Z_L + B)/(C·Z_L + D), or A/C for an open load. Near-vanishing
/// denominators are clamped and flagged.
pub fn terminated_impedance(tp: &TwoPort, load: Load) -> Flagged<Complex64> {
    let (num, den) = match load {
        Load::Impedance(zl) => (tp.a * zl + tp.b, tp.c * zl + tp.d),
        Load::Open => (tp.a, tp.c),
    };
    let num_norm = num.norm();
    if den.norm() < 1e-15 * num_norm.max(1e-300) {
        let dir = if num_norm > 0.0 {
            num / num_norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        return Flagged::saturated(dir * 1e15 * num_norm.max(1.0));
    }
    Flagged::clean(num / den)
}

/// Input admittance of a terminated two-port, computed as the reciprocal
/// ratio (C·Z_L + D)/(A·Z_L + B) so that open inputs give an exact zero.
/// Near-shorts are clamped at [`POLE_CLAMP`] S and flagged.
pub fn terminated_admittance(tp: &TwoPort, load: Load) -> Flagged<Complex64> {
    let (num, den) = match load {
        Load::Impedance(zl) => (tp.a * zl + tp.b, tp.c * zl + tp.d),
        Load::Open => (tp.a, tp.c),
    };
    let den_norm = den.norm();
    if num.norm() * POLE_CLAMP < den_norm {
        let dir = if den_norm > 0.0 {
            den / den_norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        return Flagged::saturated(dir * POLE_CLAMP);
    }
    Flagged::clean(den / num)
}

/// Z = 1/Y with a clamp for vanishing admittance.
fn reciprocal_clamped(y: Flagged<Complex64>) -> Flagged<Complex64> {
    let n = y.value.norm();
    if n < 1.0 / POLE_CLAMP {
        return Flagged::saturated(Complex64::new(POLE_CLAMP, 0.0));
    }
    y.map(|y| 1.0 / y)
}

/// Closed-form input impedance of the two-stub filter terminated by a real
/// load `z0`:
///
/// Z_Π = Z_TL · [ (Z₀/Z_TL)(1 − T·t₋) + i·T ]
///        / [ i(Z₀/Z_TL)(T(1 − t₊t₋) + t₊ + t₋) + 1 − T·t₊ ]
///
/// with T = tan(βω), t± = tan(β±ω). Re{Z_Π} → 0 at the stub quarter-wave
/// resonances regardless of the in-line length.
pub fn pi_impedance_analytic(
    lplus: &LineSpec,
    lminus: &LineSpec,
    inline: &LineSpec,
    z0: f64,
    omega: f64,
) -> Flagged<Complex64> {
    assert!(z0 > 0.0, "z0 must be positive");
    assert!(omega.is_finite() && omega >= 0.0, "omega must be >= 0");
    let ztl = inline.char_impedance;
    let ratio = z0 / ztl;
    let clamp = |theta: f64| {
        let t = theta.tan();
        if t.abs() > POLE_CLAMP {
            Flagged::saturated(POLE_CLAMP * t.signum())
        } else {
            Flagged::clean(t)
        }
    };
    let t_in = clamp(inline.beta() * omega);
    let t_p = clamp(lplus.beta() * omega);
    let t_m = clamp(lminus.beta() * omega);
    let saturated = t_in.saturated || t_p.saturated || t_m.saturated;
    let (tt, tp, tm) = (t_in.value, t_p.value, t_m.value);
    let num = Complex64::new(ratio * (1.0 - tt * tm), tt);
    let den = Complex64::new(1.0 - tt * tp, ratio * (tt * (1.0 - tp * tm) + (tp + tm)));
    let num_norm = num.norm();
    if den.norm() < 1e-15 * num_norm.max(1e-300) {
        let dir = if num_norm > 0.0 {
            num / num_norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        return Flagged::saturated(ztl * dir * 1e15);
    }
    Flagged::with_flag(ztl * num / den, saturated)
}

/// Effective series-obstacle impedance of a two-port inserted between
/// matched `z0` ports, extracted from its transmission coefficient:
/// Z_eff = 2·Z₀·(1 − S21)/S21. Diverges at transmission zeros.
pub fn series_equivalent_impedance(s21: Complex64, z0: f64) -> Complex64 {
    let s = if s21.norm() < 1e-150 {
        Complex64::new(1e-150, 0.0)
    } else {
        s21
    };
    2.0 * z0 * (Complex64::new(1.0, 0.0) - s) / s
}

fn series_twoport(elem: &SeriesElem, velocity: f64, omega: f64) -> TwoPort {
    match elem.kind {
        SeriesKind::Tline { z, len } => abcd_tline(&LineSpec::new(len, z, velocity), omega),
        SeriesKind::Cap { c } => abcd_series(1.0 / (Complex64::i() * omega * c)),
    }
}

fn shunt_admittance(elem: &ShuntElem, velocity: f64, omega: f64) -> Flagged<Complex64> {
    match elem.kind {
        ShuntKind::Stub { z, len } => {
            open_stub_admittance(&LineSpec::new(len, z, velocity), omega)
        }
        ShuntKind::Lc { l, c } => lc_shunt_admittance(&LumpedLC::new(l, c), omega),
    }
}

fn branch_item_twoport(item: &BranchItem, velocity: f64, omega: f64) -> Flagged<TwoPort> {
    match item {
        BranchItem::Series(e) => Flagged::clean(series_twoport(e, velocity, omega)),
        BranchItem::Shunt(e) => shunt_admittance(e, velocity, omega).map(abcd_shunt),
        BranchItem::Node(n) => {
            let y = match n.cground {
                Some(c) => Complex64::i() * omega * c,
                None => Complex64::new(0.0, 0.0),
            };
            Flagged::clean(abcd_shunt(y))
        }
    }
}

/// Tap admittance of a shunt branch: the branch chain cascaded and
/// terminated by its open or shorted end.
pub fn branch_admittance(branch: &Branch, velocity: f64, omega: f64) -> Flagged<Complex64> {
    assert!(omega.is_finite() && omega > 0.0, "omega must be > 0");
    let mut m = Flagged::clean(TwoPort::IDENTITY);
    for item in &branch.items {
        let part = branch_item_twoport(item, velocity, omega);
        m = m.join(part, |acc, p| acc.then(&p));
    }
    let load = match branch.termination {
        Termination::Open => Load::Open,
        Termination::Short => Load::Impedance(Complex64::new(0.0, 0.0)),
    };
    let y = terminated_admittance(&m.value, load);
    Flagged::with_flag(y.value, m.saturated || y.saturated)
}

fn chain_item_twoport(item: &ChainItem, velocity: f64, omega: f64) -> Flagged<TwoPort> {
    match item {
        ChainItem::Series(e) => Flagged::clean(series_twoport(e, velocity, omega)),
        ChainItem::Shunt(e) => shunt_admittance(e, velocity, omega).map(abcd_shunt),
        ChainItem::Branch(b) => branch_admittance(b, velocity, omega).map(abcd_shunt),
    }
}

/// ABCD matrix of the whole chain between the two ports: series elements
/// cascaded in order, every shunt branch stamped at its tap.
pub fn chain_abcd(netlist: &Netlist, omega: f64) -> Flagged<TwoPort> {
    assert!(omega.is_finite() && omega > 0.0, "omega must be > 0");
    let mut m = Flagged::clean(TwoPort::IDENTITY);
    for item in &netlist.chain {
        let part = chain_item_twoport(item, netlist.velocity, omega);
        m = m.join(part, |acc, p| acc.then(&p));
    }
    m
}

/// S-parameters of the netlist over a frequency grid.
pub fn response_sweep(netlist: &Netlist, grid: &FrequencyGrid) -> Vec<ResponseSample> {
    grid.iter()
        .map(|&f| {
            let omega = 2.0 * std::f64::consts::PI * f;
            let m = chain_abcd(netlist, omega);
            ResponseSample {
                freq_hz: f,
                s: s_params(&m.value, netlist.z_in, netlist.z_out),
                saturated: m.saturated,
            }
        })
        .collect()
}

/// Admittance looking into the network from a named node, with both ports
/// terminated in their reference impedances. Returns `None` for an unknown
/// node. The node's own shunt capacitance is included (a purely imaginary
/// contribution).
pub(crate) fn node_admittance_cascade(
    netlist: &Netlist,
    node: &str,
    omega: f64,
) -> Option<Flagged<Complex64>> {
    let v = netlist.velocity;
    let (branch_pos, branch, node_pos, marker) = locate_node(netlist, node)?;

    // Admittance of the feedline at the branch tap: everything left of the
    // tap terminated by the input port, plus everything right of it
    // terminated by the output port.
    let y_left = looking_admittance(
        netlist.chain[..branch_pos].iter().rev(),
        true,
        v,
        omega,
        Load::Impedance(Complex64::new(netlist.z_in, 0.0)),
    );
    let y_right = looking_admittance(
        netlist.chain[branch_pos + 1..].iter(),
        false,
        v,
        omega,
        Load::Impedance(Complex64::new(netlist.z_out, 0.0)),
    );
    let y_tap = y_left.join(y_right, |a, b| a + b);

    // From the node toward the tap: the branch items before the node,
    // reversed, terminated by the tap impedance.
    let mut toward_tap = Flagged::clean(TwoPort::IDENTITY);
    for item in branch.items[..node_pos].iter().rev() {
        let part = branch_item_twoport(item, v, omega).map(|m| m.flipped());
        toward_tap = toward_tap.join(part, |acc, p| acc.then(&p));
    }
    let z_tap = reciprocal_clamped(y_tap);
    let y_raw = terminated_admittance(&toward_tap.value, Load::Impedance(z_tap.value));
    let y_up = Flagged::with_flag(
        y_raw.value,
        y_raw.saturated || z_tap.saturated || toward_tap.saturated,
    );

    // From the node away from the tap: the rest of the branch terminated by
    // the branch end.
    let mut beyond = Flagged::clean(TwoPort::IDENTITY);
    for item in branch.items[node_pos + 1..].iter() {
        let part = branch_item_twoport(item, v, omega);
        beyond = beyond.join(part, |acc, p| acc.then(&p));
    }
    let y_beyond = if branch.items.len() == node_pos + 1
        && branch.termination == Termination::Open
    {
        Flagged::clean(Complex64::new(0.0, 0.0))
    } else {
        let load = match branch.termination {
            Termination::Open => Load::Open,
            Termination::Short => Load::Impedance(Complex64::new(0.0, 0.0)),
        };
        let y = terminated_admittance(&beyond.value, load);
        Flagged::with_flag(y.value, y.saturated || beyond.saturated)
    };

    // The node's own capacitance to ground.
    let y_cg = match marker.cground {
        Some(c) => Complex64::i() * omega * c,
        None => Complex64::new(0.0, 0.0),
    };

    Some(y_up.join(y_beyond, |a, b| a + b + y_cg))
}

fn locate_node<'a>(
    netlist: &'a Netlist,
    node: &str,
) -> Option<(usize, &'a Branch, usize, &'a crate::netlist::NodeMarker)> {
    for (i, item) in netlist.chain.iter().enumerate() {
        if let ChainItem::Branch(b) = item {
            for (j, bi) in b.items.iter().enumerate() {
                if let BranchItem::Node(n) = bi {
                    if n.name == node {
                        return Some((i, b, j, n));
                    }
                }
            }
        }
    }
    None
}

/// Admittance looking along a sub-chain toward a terminating load. `rev`
/// flips each element (the walk runs against the netlist direction).
fn looking_admittance<'a>(
    items: impl Iterator<Item = &'a ChainItem>,
    rev: bool,
    velocity: f64,
    omega: f64,
    load: Load,
) -> Flagged<Complex64> {
    let mut m = Flagged::clean(TwoPort::IDENTITY);
    for item in items {
        let part = chain_item_twoport(item, velocity, omega)
            .map(|p| if rev { p.flipped() } else { p });
        m = m.join(part, |acc, p| acc.then(&p));
    }
    let y = terminated_admittance(&m.value, load);
    Flagged::with_flag(y.value, y.saturated || m.saturated)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Peak,
    Dip,
}

/// A located extremum of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub freq_hz: f64,
    pub value: f64,
}

/// Strict local extrema of a sampled magnitude curve with parabolic
/// sub-grid refinement. `saturated` may be empty (treated as all-false);
/// saturated samples count as peaks at their flagged frequency and are
/// never refined. Monotone curves yield an empty list.
pub fn find_extrema(
    freq_hz: &[f64],
    magnitude: &[f64],
    saturated: &[bool],
    kind: ExtremumKind,
) -> Vec<Extremum> {
    assert_eq!(freq_hz.len(), magnitude.len(), "length mismatch");
    assert!(
        saturated.is_empty() || saturated.len() == freq_hz.len(),
        "flag length mismatch"
    );
    assert!(freq_hz.len() >= 3, "need at least 3 samples");
    let flag = |i: usize| !saturated.is_empty() && saturated[i];
    let mut out = Vec::new();
    for i in 1..freq_hz.len() - 1 {
        if flag(i) {
            if kind == ExtremumKind::Peak {
                out.push(Extremum {
                    freq_hz: freq_hz[i],
                    value: magnitude[i],
                });
            }
            continue;
        }
        let (y0, y1, y2) = (magnitude[i - 1], magnitude[i], magnitude[i + 1]);
        let is_extremum = match kind {
            ExtremumKind::Peak => y1 > y0 && y1 > y2,
            ExtremumKind::Dip => y1 < y0 && y1 < y2,
        };
        if !is_extremum {
            continue;
        }
        if flag(i - 1) || flag(i + 1) {
            // refinement across a clamped sample is meaningless
            out.push(Extremum {
                freq_hz: freq_hz[i],
                value: y1,
            });
            continue;
        }
        out.push(refine_parabolic(
            freq_hz[i - 1],
            freq_hz[i],
            freq_hz[i + 1],
            y0,
            y1,
            y2,
        ));
    }
    out
}

/// Vertex of the parabola through three (x, y) points; falls back to the
/// central sample when the points are degenerate.
fn refine_parabolic(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> Extremum {
    let dl = x1 - x0;
    let dr = x1 - x2;
    let num = dl * dl * (y1 - y2) - dr * dr * (y1 - y0);
    let den = dl * (y1 - y2) - dr * (y1 - y0);
    if den.abs() < 1e-300 {
        return Extremum {
            freq_hz: x1,
            value: y1,
        };
    }
    let x_star = (x1 - 0.5 * num / den).clamp(x0.min(x2), x0.max(x2));
    // evaluate the fitted quadratic at the vertex (Lagrange form)
    let l0 = (x_star - x1) * (x_star - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (x_star - x0) * (x_star - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (x_star - x0) * (x_star - x1) / ((x2 - x0) * (x2 - x1));
    Extremum {
        freq_hz: x_star,
        value: y0 * l0 + y1 * l1 + y2 * l2,
    }
}
