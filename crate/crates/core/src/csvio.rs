//! Deterministic CSV emission and parsing for the toolkit's table types.
//!
//! All numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every f64 exactly and keeps byte-identical output across
//! runs. Lines end with LF.

use std::fmt::Write as _;
use std::num::ParseFloatError;

use num_complex::Complex64;

use crate::design::SweepMap;
use crate::interference::{gamma_p, total_reflection, InterferenceConfig};
use crate::network::{ResponseSample, SParams};
use crate::purcell::{PurcellCurve, PurcellPoint};
use crate::FrequencyGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for CsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "csv line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for CsvError {}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(line: usize, s: &str) -> Result<f64, CsvError> {
    s.trim().parse().map_err(|e: ParseFloatError| CsvError {
        line,
        message: format!("bad number '{s}': {e}"),
    })
}

const RESPONSE_HEADER: &str =
    "freq_hz,re_s11,im_s11,re_s21,im_s21,re_s12,im_s12,re_s22,im_s22";

/// S-parameter sweep table.
pub fn response_csv(rows: &[ResponseSample]) -> String {
    let mut out = String::new();
    out.push_str(RESPONSE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.freq_hz),
            num(r.s.s11.re),
            num(r.s.s11.im),
            num(r.s.s21.re),
            num(r.s.s21.im),
            num(r.s.s12.re),
            num(r.s.s12.im),
            num(r.s.s22.re),
            num(r.s.s22.im),
        );
    }
    out
}

pub fn parse_response_csv(text: &str) -> Result<Vec<ResponseSample>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == RESPONSE_HEADER => {}
        other => {
            return Err(CsvError {
                line: 1,
                message: format!("unexpected header {other:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, l) in lines {
        let cols: Vec<&str> = l.split(',').collect();
        if cols.len() != 9 {
            return Err(CsvError {
                line: i + 1,
                message: format!("expected 9 columns, got {}", cols.len()),
            });
        }
        let v: Vec<f64> = cols
            .iter()
            .map(|c| parse_f64(i + 1, c))
            .collect::<Result<_, _>>()?;
        rows.push(ResponseSample {
            freq_hz: v[0],
            s: SParams {
                s11: Complex64::new(v[1], v[2]),
                s21: Complex64::new(v[3], v[4]),
                s12: Complex64::new(v[5], v[6]),
                s22: Complex64::new(v[7], v[8]),
            },
            saturated: false,
        });
    }
    Ok(rows)
}

const PURCELL_HEADER: &str = "freq_hz,re_yenv_s,im_yenv_s,tp_s,capped";

/// Environmental-admittance / relaxation-time table.
pub fn purcell_csv(curve: &PurcellCurve) -> String {
    let mut out = String::new();
    out.push_str(PURCELL_HEADER);
    out.push('\n');
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(p.freq_hz),
            num(p.y_env.re),
            num(p.y_env.im),
            num(p.t_p),
            if p.capped { 1 } else { 0 },
        );
    }
    out
}

pub fn parse_purcell_csv(text: &str) -> Result<PurcellCurve, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == PURCELL_HEADER => {}
        other => {
            return Err(CsvError {
                line: 1,
                message: format!("unexpected header {other:?}"),
            })
        }
    }
    let mut points = Vec::new();
    for (i, l) in lines {
        let cols: Vec<&str> = l.split(',').collect();
        if cols.len() != 5 {
            return Err(CsvError {
                line: i + 1,
                message: format!("expected 5 columns, got {}", cols.len()),
            });
        }
        points.push(PurcellPoint {
            freq_hz: parse_f64(i + 1, cols[0])?,
            y_env: Complex64::new(parse_f64(i + 1, cols[1])?, parse_f64(i + 1, cols[2])?),
            t_p: parse_f64(i + 1, cols[3])?,
            capped: cols[4].trim() == "1",
        });
    }
    Ok(PurcellCurve { points })
}

const INTERFERENCE_HEADER: &str = "freq_hz,gamma_ratio,re_l1,im_l1";

/// One row of an interference sweep: Γ_P/Γ₀ and the total reflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceSample {
    pub freq_hz: f64,
    pub gamma_ratio: f64,
    pub l1: Complex64,
    pub saturated: bool,
}

/// Evaluate the interference model over a grid.
pub fn interference_sweep(cfg: &InterferenceConfig, grid: &FrequencyGrid) -> Vec<InterferenceSample> {
    let g0 = cfg.gamma_zero();
    grid.iter()
        .map(|&f| {
            let omega = 2.0 * std::f64::consts::PI * f;
            let l1 = total_reflection(cfg, omega);
            let g = gamma_p(cfg, omega);
            InterferenceSample {
                freq_hz: f,
                gamma_ratio: if g0 > 0.0 { g.value / g0 } else { 0.0 },
                l1: l1.value,
                saturated: l1.saturated,
            }
        })
        .collect()
}

pub fn interference_csv(rows: &[InterferenceSample]) -> String {
    let mut out = String::new();
    out.push_str(INTERFERENCE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(r.freq_hz),
            num(r.gamma_ratio),
            num(r.l1.re),
            num(r.l1.im),
        );
    }
    out
}

pub fn parse_interference_csv(text: &str) -> Result<Vec<InterferenceSample>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == INTERFERENCE_HEADER => {}
        other => {
            return Err(CsvError {
                line: 1,
                message: format!("unexpected header {other:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, l) in lines {
        let cols: Vec<&str> = l.split(',').collect();
        if cols.len() != 4 {
            return Err(CsvError {
                line: i + 1,
                message: format!("expected 4 columns, got {}", cols.len()),
            });
        }
        rows.push(InterferenceSample {
            freq_hz: parse_f64(i + 1, cols[0])?,
            gamma_ratio: parse_f64(i + 1, cols[1])?,
            l1: Complex64::new(parse_f64(i + 1, cols[2])?, parse_f64(i + 1, cols[3])?),
            saturated: false,
        });
    }
    Ok(rows)
}

/// Map CSV: first row the frequency grid, first column the parameter
/// values, body T_P in seconds.
pub fn sweep_map_csv(map: &SweepMap) -> String {
    let mut out = String::from("param_value");
    for f in &map.freqs {
        out.push(',');
        out.push_str(&num(*f));
    }
    out.push('\n');
    for (i, p) in map.param_values.iter().enumerate() {
        out.push_str(&num(*p));
        for t in &map.tp_s[i] {
            out.push(',');
            out.push_str(&num(*t));
        }
        out.push('\n');
    }
    out
}

/// (parameter values, frequencies, T_P matrix) from a map CSV body.
pub type SweepMapData = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

/// Parse the body of a map CSV into (param values, freqs, tp matrix).
pub fn parse_sweep_map_csv(text: &str) -> Result<SweepMapData, CsvError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(CsvError {
        line: 1,
        message: "empty file".to_string(),
    })?;
    let mut cols = header.split(',');
    if cols.next() != Some("param_value") {
        return Err(CsvError {
            line: 1,
            message: "expected 'param_value' header cell".to_string(),
        });
    }
    let freqs: Vec<f64> = cols.map(|c| parse_f64(1, c)).collect::<Result<_, _>>()?;
    let mut params = Vec::new();
    let mut tp = Vec::new();
    for (i, l) in lines {
        let mut cols = l.split(',');
        params.push(parse_f64(i + 1, cols.next().unwrap_or(""))?);
        let row: Vec<f64> = cols.map(|c| parse_f64(i + 1, c)).collect::<Result<_, _>>()?;
        if row.len() != freqs.len() {
            return Err(CsvError {
                line: i + 1,
                message: format!("expected {} cells, got {}", freqs.len(), row.len()),
            });
        }
        tp.push(row);
    }
    Ok((params, freqs, tp))
}

const CONTOUR_HEADER: &str = "polyline,param_value,freq_hz";

/// Contour CSV: one row per polyline vertex, keyed by polyline index.
pub fn contour_csv(contours: &[Vec<(f64, f64)>]) -> String {
    let mut out = String::new();
    out.push_str(CONTOUR_HEADER);
    out.push('\n');
    for (k, line) in contours.iter().enumerate() {
        for (p, f) in line {
            let _ = writeln!(out, "{k},{},{}", num(*p), num(*f));
        }
    }
    out
}

pub fn parse_contour_csv(text: &str) -> Result<Vec<Vec<(f64, f64)>>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CONTOUR_HEADER => {}
        other => {
            return Err(CsvError {
                line: 1,
                message: format!("unexpected header {other:?}"),
            })
        }
    }
    let mut out: Vec<Vec<(f64, f64)>> = Vec::new();
    for (i, l) in lines {
        let cols: Vec<&str> = l.split(',').collect();
        if cols.len() != 3 {
            return Err(CsvError {
                line: i + 1,
                message: format!("expected 3 columns, got {}", cols.len()),
            });
        }
        let idx: usize = cols[0].trim().parse().map_err(|_| CsvError {
            line: i + 1,
            message: format!("bad polyline index '{}'", cols[0]),
        })?;
        while out.len() <= idx {
            out.push(Vec::new());
        }
        out[idx].push((parse_f64(i + 1, cols[1])?, parse_f64(i + 1, cols[2])?));
    }
    Ok(out)
}
