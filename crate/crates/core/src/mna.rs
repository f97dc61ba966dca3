//! Independent frequency-domain nodal-analysis solver, used to cross-check
//! the cascade path.
//!
//! Every element is stamped into a complex admittance matrix per frequency:
//! series capacitors as two-terminal admittances, transmission lines through
//! their exact frequency-domain Y-parameters (no lumped segmentation), and
//! branches with their own internal nodes, so the two evaluation paths share
//! no code beyond the netlist itself.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::elements::POLE_CLAMP;
use crate::netlist::{
    Branch, BranchItem, ChainItem, Netlist, SeriesElem, SeriesKind, ShuntElem, ShuntKind,
    Termination,
};

#[derive(Debug, Clone, PartialEq)]
pub enum MnaError {
    /// The admittance matrix is singular; the listed nodes have no
    /// connection to the rest of the circuit (empty when the cause could
    /// not be localized).
    Singular { nodes: Vec<String> },
    /// The refined solution still fails the residual bound.
    Residual { relative: f64 },
    UnknownNode(String),
}

impl fmt::Display for MnaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MnaError::Singular { nodes } if nodes.is_empty() => {
                write!(f, "singular nodal matrix")
            }
            MnaError::Singular { nodes } => {
                write!(f, "singular nodal matrix; isolated nodes: {}", nodes.join(", "))
            }
            MnaError::Residual { relative } => {
                write!(f, "solver residual {relative:.3e} exceeds 1e-10")
            }
            MnaError::UnknownNode(n) => write!(f, "unknown node '{n}'"),
        }
    }
}

impl std::error::Error for MnaError {}

/// A stamped nodal system at one frequency. Ground is the implicit
/// reference; the matrix covers all non-ground nodes.
#[derive(Debug, Clone)]
pub struct NodalSystem {
    pub omega: f64,
    pub matrix: DMatrix<Complex64>,
    pub injection: DVector<Complex64>,
    labels: Vec<String>,
    named: HashMap<String, usize>,
    port_in: usize,
    port_out: usize,
}

impl NodalSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.named.get(name).copied()
    }

    pub fn port_in_index(&self) -> usize {
        self.port_in
    }

    pub fn port_out_index(&self) -> usize {
        self.port_out
    }

    /// Largest asymmetry |Y_ij − Y_ji| over all pairs; zero by construction
    /// for the reciprocal elements stamped here.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).norm());
            }
        }
        worst
    }
}

struct Stamper {
    velocity: f64,
    omega: f64,
    matrix_triplets: Vec<(usize, usize, Complex64)>,
    labels: Vec<String>,
    named: HashMap<String, usize>,
}

impl Stamper {
    fn new(velocity: f64, omega: f64) -> Self {
        Stamper {
            velocity,
            omega,
            matrix_triplets: Vec::new(),
            labels: Vec::new(),
            named: HashMap::new(),
        }
    }

    fn alloc(&mut self, label: String) -> usize {
        self.labels.push(label);
        self.labels.len() - 1
    }

    fn add(&mut self, i: usize, j: usize, y: Complex64) {
        self.matrix_triplets.push((i, j, y));
    }

    /// Two-terminal admittance between two nodes (None = ground).
    fn stamp_admittance(&mut self, a: Option<usize>, b: Option<usize>, y: Complex64) {
        if let Some(i) = a {
            self.add(i, i, y);
        }
        if let Some(j) = b {
            self.add(j, j, y);
        }
        if let (Some(i), Some(j)) = (a, b) {
            self.add(i, j, -y);
            self.add(j, i, -y);
        }
    }

    /// Exact Y-parameter stamp of a lossless line. Near θ = nπ the
    /// Y-parameters are singular; the line is then split into two exact
    /// half-length segments joined at a fresh internal node.
    fn stamp_tline(&mut self, a: Option<usize>, b: Option<usize>, z: f64, len: f64, depth: usize) {
        let theta = len / self.velocity * self.omega;
        let (s, c) = theta.sin_cos();
        if s.abs() < 1e-8 && theta > 1e-6 && depth < 64 {
            let mid = Some(self.alloc(format!("tline-split@{depth}")));
            self.stamp_tline(a, mid, z, len / 2.0, depth + 1);
            self.stamp_tline(mid, b, z, len / 2.0, depth + 1);
            return;
        }
        // I1 = Y11 V1 + Y12 V2 with Y11 = Y22 = -i cosθ/(Z sinθ),
        // Y12 = Y21 = i/(Z sinθ)
        let y_diag = Complex64::new(0.0, -c / (z * s));
        let y_off = Complex64::new(0.0, 1.0 / (z * s));
        if let Some(i) = a {
            self.add(i, i, y_diag);
        }
        if let Some(j) = b {
            self.add(j, j, y_diag);
        }
        if let (Some(i), Some(j)) = (a, b) {
            self.add(i, j, y_off);
            self.add(j, i, y_off);
        }
    }

    fn stamp_series(&mut self, elem: &SeriesElem, a: Option<usize>, b: Option<usize>) {
        match elem.kind {
            SeriesKind::Cap { c } => {
                self.stamp_admittance(a, b, Complex64::i() * self.omega * c);
            }
            SeriesKind::Tline { z, len } => {
                self.stamp_tline(a, b, z, len, 0);
            }
        }
    }

    /// Shunt stub / series-LC hung from `at`, each with its own internal
    /// node so the stamp stays exact.
    fn stamp_shunt(&mut self, elem: &ShuntElem, at: Option<usize>) {
        match elem.kind {
            ShuntKind::Stub { z, len } => {
                let end = Some(self.alloc("stub-end".to_string()));
                self.stamp_tline(at, end, z, len, 0);
            }
            ShuntKind::Lc { l, c } => {
                let mid = Some(self.alloc("lc-mid".to_string()));
                self.stamp_admittance(at, mid, 1.0 / (Complex64::i() * self.omega * l));
                self.stamp_admittance(mid, None, Complex64::i() * self.omega * c);
            }
        }
    }

    fn stamp_branch(&mut self, branch: &Branch, tap: Option<usize>) {
        // when the branch ends in a short, the far terminal of its last
        // series element is ground
        let last_series = branch
            .items
            .iter()
            .rposition(|i| matches!(i, BranchItem::Series(_)));
        let mut cur = tap;
        for (idx, item) in branch.items.iter().enumerate() {
            match item {
                BranchItem::Series(e) => {
                    let next = if branch.termination == Termination::Short
                        && Some(idx) == last_series
                    {
                        None
                    } else {
                        Some(self.alloc(format!("{}#{}", branch.name, idx)))
                    };
                    self.stamp_series(e, cur, next);
                    cur = next;
                }
                BranchItem::Shunt(e) => self.stamp_shunt(e, cur),
                BranchItem::Node(n) => {
                    if let Some(i) = cur {
                        self.named.insert(n.name.clone(), i);
                        self.labels[i] = format!("node:{}", n.name);
                    }
                    if let Some(c) = n.cground {
                        self.stamp_admittance(cur, None, Complex64::i() * self.omega * c);
                    }
                }
            }
        }
        if branch.termination == Termination::Short && last_series.is_none() {
            // a bare short at the tap: clamp rather than merging nodes,
            // mirroring the cascade path's pole clamp
            self.stamp_admittance(tap, None, Complex64::new(POLE_CLAMP, 0.0));
        }
    }
}

/// Stamp the whole netlist at `omega`, including the resistive port
/// terminations (1/z at each port) but no source.
pub fn stamp_netlist(netlist: &Netlist, omega: f64) -> NodalSystem {
    assert!(omega.is_finite() && omega > 0.0, "omega must be > 0");
    let mut st = Stamper::new(netlist.velocity, omega);
    let port_in = st.alloc("port_in".to_string());
    let mut cur = Some(port_in);
    for (idx, item) in netlist.chain.iter().enumerate() {
        match item {
            ChainItem::Series(e) => {
                let next = Some(st.alloc(format!("junction#{idx}")));
                st.stamp_series(e, cur, next);
                cur = next;
            }
            ChainItem::Shunt(e) => st.stamp_shunt(e, cur),
            ChainItem::Branch(b) => st.stamp_branch(b, cur),
        }
    }
    let port_out = cur.expect("chain starts at a real node");
    st.labels[port_out] = "port_out".to_string();
    st.stamp_admittance(Some(port_in), None, Complex64::new(1.0 / netlist.z_in, 0.0));
    st.stamp_admittance(Some(port_out), None, Complex64::new(1.0 / netlist.z_out, 0.0));

    let n = st.labels.len();
    let mut matrix = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (i, j, y) in st.matrix_triplets {
        matrix[(i, j)] += y;
    }
    NodalSystem {
        omega,
        matrix,
        injection: DVector::from_element(n, Complex64::new(0.0, 0.0)),
        labels: st.labels,
        named: st.named,
        port_in,
        port_out,
    }
}

/// Solution of a nodal system with its achieved relative residual.
#[derive(Debug, Clone)]
pub struct Solution {
    pub voltages: DVector<Complex64>,
    pub residual: f64,
}

/// Direct dense solve of the system with one step of iterative refinement.
/// Fails on singular matrices (naming structurally isolated nodes) and when
/// the relative residual ‖Av − b‖/‖b‖ stays above 1e-10.
pub fn solve_ac(system: &NodalSystem) -> Result<Solution, MnaError> {
    let a = &system.matrix;
    let b = &system.injection;
    let lu = a.clone().lu();
    let mut v = lu.solve(b).ok_or_else(|| singular_diagnosis(system))?;
    let b_norm = b.norm();
    let mut residual = (a * &v - b).norm() / b_norm.max(f64::MIN_POSITIVE);
    for _ in 0..2 {
        if residual <= 1e-12 {
            break;
        }
        let r = b - a * &v;
        if let Some(dv) = lu.solve(&r) {
            v += dv;
            residual = (a * &v - b).norm() / b_norm.max(f64::MIN_POSITIVE);
        } else {
            break;
        }
    }
    if !residual.is_finite() || residual > 1e-10 {
        return Err(MnaError::Residual { relative: residual });
    }
    Ok(Solution {
        voltages: v,
        residual,
    })
}

fn singular_diagnosis(system: &NodalSystem) -> MnaError {
    let n = system.dim();
    let mut isolated = Vec::new();
    for i in 0..n {
        let row_zero = (0..n).all(|j| system.matrix[(i, j)].norm() == 0.0);
        if row_zero {
            isolated.push(system.labels[i].clone());
        }
    }
    MnaError::Singular { nodes: isolated }
}

/// Forward transmission computed nodally: a unit source behind z_in drives
/// the input port (Norton form), and S21 = 2·V_out·sqrt(z_in/z_out).
pub fn s21_mna(netlist: &Netlist, omega: f64) -> Result<Complex64, MnaError> {
    let mut system = stamp_netlist(netlist, omega);
    let i_in = system.port_in;
    system.injection[i_in] = Complex64::new(1.0 / netlist.z_in, 0.0);
    let sol = solve_ac(&system)?;
    let v_out = sol.voltages[system.port_out];
    Ok(2.0 * v_out * (netlist.z_in / netlist.z_out).sqrt())
}

/// Admittance looking from a named node into the terminated network,
/// by the test-source method: inject unit current, Y = 1/V_node.
pub fn input_admittance_mna(
    netlist: &Netlist,
    node: &str,
    omega: f64,
) -> Result<Complex64, MnaError> {
    let mut system = stamp_netlist(netlist, omega);
    let idx = system
        .node_index(node)
        .ok_or_else(|| MnaError::UnknownNode(node.to_string()))?;
    system.injection[idx] = Complex64::new(1.0, 0.0);
    let sol = solve_ac(&system)?;
    let v = sol.voltages[idx];
    Ok(1.0 / v)
}
