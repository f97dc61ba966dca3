//! Closed-form ABCD two-ports and shunt admittances for the circuit
//! elements: lossless transmission lines, series impedances, shunt
//! admittances, open-ended stubs, series-LC shunt branches, and the
//! two-stub Π composition.

use num_complex::Complex64;

use crate::Flagged;

/// Magnitude at which divergent tan / series-LC factors are clamped.
pub const POLE_CLAMP: f64 = 1e12;

/// A 2x2 complex ABCD transfer matrix at one frequency.
///
/// `b` carries Ω, `c` carries S; `a` and `d` are dimensionless. Every
/// element produced by this module is reciprocal: a·d − b·c = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPort {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl TwoPort {
    pub const IDENTITY: TwoPort = TwoPort {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product `self * rhs` (self on the input side).
    pub fn then(&self, rhs: &TwoPort) -> TwoPort {
        TwoPort {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// The same physical two-port viewed from the opposite side. For a
    /// reciprocal network this swaps `a` and `d`.
    pub fn flipped(&self) -> TwoPort {
        TwoPort {
            a: self.d,
            b: self.b,
            c: self.c,
            d: self.a,
        }
    }
}

/// A lossless transmission-line segment.
///
/// The propagation constant is β = length / phase_velocity (seconds), so the
/// electrical phase at angular frequency ω is θ = β·ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSpec {
    pub length: f64,
    pub char_impedance: f64,
    pub phase_velocity: f64,
}

impl LineSpec {
    pub fn new(length: f64, char_impedance: f64, phase_velocity: f64) -> Self {
        assert!(
            length.is_finite() && length > 0.0,
            "line length must be positive"
        );
        assert!(
            char_impedance.is_finite() && char_impedance > 0.0,
            "characteristic impedance must be positive"
        );
        assert!(
            phase_velocity.is_finite() && phase_velocity > 0.0,
            "phase velocity must be positive"
        );
        LineSpec {
            length,
            char_impedance,
            phase_velocity,
        }
    }

    /// β = ℓ/v in seconds.
    pub fn beta(&self) -> f64 {
        self.length / self.phase_velocity
    }

    /// Quarter-wave resonance ν = v/(4ℓ) in Hz, where an open stub of this
    /// spec shorts its tap.
    pub fn quarter_wave_freq(&self) -> f64 {
        self.phase_velocity / (4.0 * self.length)
    }
}

/// A series-LC branch to ground, the lumped stand-in for an open stub.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpedLC {
    pub inductance: f64,
    pub capacitance: f64,
}

impl LumpedLC {
    pub fn new(inductance: f64, capacitance: f64) -> Self {
        assert!(
            inductance.is_finite() && inductance > 0.0,
            "inductance must be positive"
        );
        assert!(
            capacitance.is_finite() && capacitance > 0.0,
            "capacitance must be positive"
        );
        LumpedLC {
            inductance,
            capacitance,
        }
    }

    /// Series resonance ω₀ = 1/sqrt(LC) in rad/s.
    pub fn resonance(&self) -> f64 {
        1.0 / (self.inductance * self.capacitance).sqrt()
    }
}

/// tan(θ) clamped at magnitude [`POLE_CLAMP`], flagged when clamped.
fn clamped_tan(theta: f64) -> Flagged<f64> {
    let t = theta.tan();
    if t.abs() > POLE_CLAMP {
        Flagged::saturated(POLE_CLAMP * t.signum())
    } else {
        Flagged::clean(t)
    }
}

/// ABCD matrix of a lossless line at angular frequency `omega`:
/// [[cos θ, i·Z·sin θ], [i·sin θ/Z, cos θ]] with θ = β·ω.
pub fn abcd_tline(spec: &LineSpec, omega: f64) -> TwoPort {
    assert!(omega.is_finite() && omega >= 0.0, "omega must be >= 0");
    let theta = spec.beta() * omega;
    let (s, c) = theta.sin_cos();
    TwoPort {
        a: Complex64::new(c, 0.0),
        b: Complex64::new(0.0, spec.char_impedance * s),
        c: Complex64::new(0.0, s / spec.char_impedance),
        d: Complex64::new(c, 0.0),
    }
}

/// ABCD matrix of a series impedance: [[1, Z], [0, 1]].
pub fn abcd_series(impedance: Complex64) -> TwoPort {
    assert!(
        impedance.re.is_finite() && impedance.im.is_finite(),
        "series impedance must be finite"
    );
    TwoPort {
        a: Complex64::new(1.0, 0.0),
        b: impedance,
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    }
}

/// ABCD matrix of a shunt admittance: [[1, 0], [Y, 1]].
pub fn abcd_shunt(admittance: Complex64) -> TwoPort {
    assert!(
        admittance.re.is_finite() && admittance.im.is_finite(),
        "shunt admittance must be finite"
    );
    TwoPort {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: admittance,
        d: Complex64::new(1.0, 0.0),
    }
}

/// Tap admittance of an open-ended stub: Y = i·tan(β·ω)/Z.
///
/// Diverges at the quarter-wave resonance β·ω = π/2 where the stub presents
/// a short; there the value is clamped and flagged.
pub fn open_stub_admittance(spec: &LineSpec, omega: f64) -> Flagged<Complex64> {
    assert!(omega.is_finite() && omega >= 0.0, "omega must be >= 0");
    clamped_tan(spec.beta() * omega).map(|t| Complex64::new(0.0, t / spec.char_impedance))
}

/// Tap admittance of a series-LC branch to ground: Y = 1/(i(ωL − 1/(ωC))).
///
/// Diverges at ω₀ = 1/sqrt(LC); same clamp policy as
/// [`open_stub_admittance`], applied at |Y| = [`POLE_CLAMP`] S.
pub fn lc_shunt_admittance(lc: &LumpedLC, omega: f64) -> Flagged<Complex64> {
    assert!(omega.is_finite() && omega > 0.0, "omega must be > 0");
    let reactance = omega * lc.inductance - 1.0 / (omega * lc.capacitance);
    if reactance.abs() < 1.0 / POLE_CLAMP {
        let sign = if reactance == 0.0 {
            1.0
        } else {
            reactance.signum()
        };
        Flagged::saturated(Complex64::new(0.0, -sign * POLE_CLAMP))
    } else {
        Flagged::clean(Complex64::new(0.0, -1.0 / reactance))
    }
}

/// ABCD matrix of the two-stub Π composition: an input-side open stub
/// (`lplus`), an in-line segment (`inline`), and an output-side open stub
/// (`lminus`), written in closed form.
///
/// A = cos(βω) − sin(βω)·tan(β₋ω), B = i·Z·sin(βω),
/// C = (i/Z)·{sin(βω)[1 − tan(β₊ω)tan(β₋ω)] + cos(βω)[tan(β₊ω)+tan(β₋ω)]},
/// D = cos(βω) − sin(βω)·tan(β₊ω).
///
/// Equals `shunt(Y₊) · tline(inline) · shunt(Y₋)` with the stub admittances
/// of [`open_stub_admittance`]. All three specs must share the same
/// characteristic impedance and phase velocity.
pub fn pi_filter_abcd(
    lplus: &LineSpec,
    lminus: &LineSpec,
    inline: &LineSpec,
    omega: f64,
) -> Flagged<TwoPort> {
    assert!(omega.is_finite() && omega >= 0.0, "omega must be >= 0");
    assert_shared_line_params(lplus, lminus, inline);
    let z = inline.char_impedance;
    let theta = inline.beta() * omega;
    let (s, c) = theta.sin_cos();
    let tp = clamped_tan(lplus.beta() * omega);
    let tm = clamped_tan(lminus.beta() * omega);
    tp.join(tm, |tp, tm| TwoPort {
        a: Complex64::new(c - s * tm, 0.0),
        b: Complex64::new(0.0, z * s),
        c: Complex64::new(0.0, (s * (1.0 - tp * tm) + c * (tp + tm)) / z),
        d: Complex64::new(c - s * tp, 0.0),
    })
}

fn assert_shared_line_params(lplus: &LineSpec, lminus: &LineSpec, inline: &LineSpec) {
    let rel = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs());
    assert!(
        rel(lplus.char_impedance, inline.char_impedance)
            && rel(lminus.char_impedance, inline.char_impedance),
        "Pi composition requires a shared characteristic impedance"
    );
    assert!(
        rel(lplus.phase_velocity, inline.phase_velocity)
            && rel(lminus.phase_velocity, inline.phase_velocity),
        "Pi composition requires a shared phase velocity"
    );
}
