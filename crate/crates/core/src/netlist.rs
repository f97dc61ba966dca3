//! Netlist representation and parser.
//!
//! The text format is line-oriented UTF-8 with `#` comments. All numbers are
//! plain scientific notation in SI base units; no unit suffixes are parsed.
//!
//! ```text
//! param (eps_eff <x> | velocity <m/s>) [ztl <ohm>]
//! port in z=<ohm>
//! port out z=<ohm>
//! tline z=<ohm> len=<m> [name=<id>]
//! cap c=<F> [name=<id>]              # series in the chain
//! stub z=<ohm> len=<m> [name=<id>]   # shunt open stub at this position
//! lc l=<H> c=<F> [name=<id>]         # shunt series-LC to ground
//! branch <name>                      # shunt branch; inner lines below
//!   cap/tline/stub/lc/...
//!   node <name> [cground=<F>]        # named node; qubit site
//!   [short | open]                   # branch termination, default open
//! end
//! ```
//!
//! `z=` may be omitted on `tline`/`stub` when the `param` line defines a
//! default `ztl`. The optional `name=` labels an element so sweeps can
//! address it with a dotted parameter path (`<name>.<field>`, see
//! [`Netlist::set_param`]).

use std::collections::HashSet;
use std::fmt;

use crate::velocity_from_eps_eff;

/// A parse or validation failure, carrying the 1-based source line.
#[derive(Debug, Clone, PartialEq)]
pub struct NetlistError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "netlist: {}", self.message)
        } else {
            write!(f, "netlist line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for NetlistError {}

/// A failed parameter-path lookup (see [`Netlist::set_param`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamError(pub String);

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parameter path: {}", self.0)
    }
}

impl std::error::Error for ParamError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesKind {
    Tline { z: f64, len: f64 },
    Cap { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShuntKind {
    Stub { z: f64, len: f64 },
    Lc { l: f64, c: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesElem {
    pub name: Option<String>,
    pub kind: SeriesKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShuntElem {
    pub name: Option<String>,
    pub kind: ShuntKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeMarker {
    pub name: String,
    /// Shunt capacitance from the node to ground (e.g. a qubit's C_q).
    pub cground: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Open,
    Short,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchItem {
    Series(SeriesElem),
    Shunt(ShuntElem),
    Node(NodeMarker),
}

/// A shunt branch: an element chain hanging off the feedline at one tap.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub name: String,
    pub items: Vec<BranchItem>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainItem {
    Series(SeriesElem),
    Shunt(ShuntElem),
    Branch(Branch),
}

/// An ordered chain of series elements and shunt branches between two
/// resistively terminated ports.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    /// Shared phase velocity in m/s (from `eps_eff` or `velocity`).
    pub velocity: f64,
    /// Default characteristic impedance for `tline`/`stub` lines without `z=`.
    pub default_ztl: Option<f64>,
    /// Input port reference impedance (Ω).
    pub z_in: f64,
    /// Output port reference impedance (Ω).
    pub z_out: f64,
    pub chain: Vec<ChainItem>,
}

impl Netlist {
    pub fn parse(text: &str) -> Result<Netlist, NetlistError> {
        Parser::new(text).run()
    }

    /// Names of all node markers, in chain order.
    pub fn node_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for item in &self.chain {
            if let ChainItem::Branch(b) = item {
                for bi in &b.items {
                    if let BranchItem::Node(n) = bi {
                        out.push(n.name.as_str());
                    }
                }
            }
        }
        out
    }

    /// Default qubit capacitance C_q + C_qr for a node: its `cground` plus
    /// the series capacitor immediately before it in the branch.
    pub fn default_c_sigma(&self, node: &str) -> Option<f64> {
        for item in &self.chain {
            if let ChainItem::Branch(b) = item {
                for (i, bi) in b.items.iter().enumerate() {
                    if let BranchItem::Node(n) = bi {
                        if n.name == node {
                            let mut c_sigma = n.cground.unwrap_or(0.0);
                            if i > 0 {
                                if let BranchItem::Series(SeriesElem {
                                    kind: SeriesKind::Cap { c },
                                    ..
                                }) = &b.items[i - 1]
                                {
                                    c_sigma += c;
                                }
                            }
                            if c_sigma > 0.0 {
                                return Some(c_sigma);
                            }
                            return None;
                        }
                    }
                }
            }
        }
        None
    }

    /// Set a named element field through a dotted path: `<name>.<field>`
    /// with field one of `len`, `z`, `c`, `l`. The field may be omitted when
    /// the element has a single numeric field (`cap`). Values must be
    /// positive and finite.
    pub fn set_param(&mut self, path: &str, value: f64) -> Result<(), ParamError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(ParamError(format!(
                "value for '{path}' must be positive and finite"
            )));
        }
        let slot = self.resolve_mut(path)?;
        *slot = value;
        Ok(())
    }

    /// Read a parameter through the same path syntax as [`Netlist::set_param`].
    pub fn get_param(&self, path: &str) -> Result<f64, ParamError> {
        let loc = self.locate(path)?;
        let read_series = |kind: &SeriesKind| match (kind, loc.field) {
            (SeriesKind::Tline { len, .. }, FieldSel::Len) => Some(*len),
            (SeriesKind::Tline { z, .. }, FieldSel::Z) => Some(*z),
            (SeriesKind::Cap { c }, FieldSel::C) => Some(*c),
            _ => None,
        };
        let read_shunt = |kind: &ShuntKind| match (kind, loc.field) {
            (ShuntKind::Stub { len, .. }, FieldSel::Len) => Some(*len),
            (ShuntKind::Stub { z, .. }, FieldSel::Z) => Some(*z),
            (ShuntKind::Lc { l, .. }, FieldSel::L) => Some(*l),
            (ShuntKind::Lc { c, .. }, FieldSel::C) => Some(*c),
            _ => None,
        };
        let value = match (&self.chain[loc.chain_idx], loc.branch_item_idx) {
            (ChainItem::Series(e), None) => read_series(&e.kind),
            (ChainItem::Shunt(e), None) => read_shunt(&e.kind),
            (ChainItem::Branch(b), Some(j)) => match &b.items[j] {
                BranchItem::Series(e) => read_series(&e.kind),
                BranchItem::Shunt(e) => read_shunt(&e.kind),
                BranchItem::Node(_) => None,
            },
            _ => None,
        };
        value.ok_or_else(|| ParamError(format!("no element matches path '{path}'")))
    }

    fn resolve_mut(&mut self, path: &str) -> Result<&mut f64, ParamError> {
        let loc = self.locate(path)?;
        let item = &mut self.chain[loc.chain_idx];
        let slot = match (item, loc.branch_item_idx) {
            (ChainItem::Series(e), None) => series_slot(&mut e.kind, loc.field),
            (ChainItem::Shunt(e), None) => shunt_slot(&mut e.kind, loc.field),
            (ChainItem::Branch(b), Some(j)) => match &mut b.items[j] {
                BranchItem::Series(e) => series_slot(&mut e.kind, loc.field),
                BranchItem::Shunt(e) => shunt_slot(&mut e.kind, loc.field),
                BranchItem::Node(_) => None,
            },
            _ => None,
        };
        slot.ok_or_else(|| ParamError(format!("no element matches path '{path}'")))
    }

    /// Find the element and field a path refers to. Tries the whole path as
    /// a bare element name first, then splits off the final dotted segment
    /// as the field.
    fn locate(&self, path: &str) -> Result<Location, ParamError> {
        let candidates: Vec<(&str, Option<&str>)> = match path.rsplit_once('.') {
            Some((head, tail)) => vec![(path, None), (head, Some(tail))],
            None => vec![(path, None)],
        };
        let mut field_error = None;
        for (target, field) in candidates {
            for (i, item) in self.chain.iter().enumerate() {
                let hits: Vec<(Option<usize>, &Option<String>, ElemShape)> = match item {
                    ChainItem::Series(e) => vec![(None, &e.name, ElemShape::of_series(&e.kind))],
                    ChainItem::Shunt(e) => vec![(None, &e.name, ElemShape::of_shunt(&e.kind))],
                    ChainItem::Branch(b) => b
                        .items
                        .iter()
                        .enumerate()
                        .filter_map(|(j, bi)| match bi {
                            BranchItem::Series(e) => {
                                Some((Some(j), &e.name, ElemShape::of_series(&e.kind)))
                            }
                            BranchItem::Shunt(e) => {
                                Some((Some(j), &e.name, ElemShape::of_shunt(&e.kind)))
                            }
                            BranchItem::Node(_) => None,
                        })
                        .collect(),
                };
                for (j, name, shape) in hits {
                    if name.as_deref() != Some(target) {
                        continue;
                    }
                    match shape.select(target, field) {
                        Ok(f) => {
                            return Ok(Location {
                                chain_idx: i,
                                branch_item_idx: j,
                                field: f,
                            })
                        }
                        Err(e) => field_error = Some(e),
                    }
                }
            }
        }
        Err(field_error
            .unwrap_or_else(|| ParamError(format!("no element matches path '{path}'"))))
    }
}

struct Location {
    chain_idx: usize,
    branch_item_idx: Option<usize>,
    field: FieldSel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FieldSel {
    Len,
    Z,
    C,
    L,
}

#[derive(Debug, Clone, Copy)]
enum ElemShape {
    Tline,
    Cap,
    Stub,
    Lc,
}

impl ElemShape {
    fn of_series(kind: &SeriesKind) -> Self {
        match kind {
            SeriesKind::Tline { .. } => ElemShape::Tline,
            SeriesKind::Cap { .. } => ElemShape::Cap,
        }
    }

    fn of_shunt(kind: &ShuntKind) -> Self {
        match kind {
            ShuntKind::Stub { .. } => ElemShape::Stub,
            ShuntKind::Lc { .. } => ElemShape::Lc,
        }
    }

    fn select(self, target: &str, field: Option<&str>) -> Result<FieldSel, ParamError> {
        match (self, field) {
            (ElemShape::Tline | ElemShape::Stub, Some("len")) => Ok(FieldSel::Len),
            (ElemShape::Tline | ElemShape::Stub, Some("z")) => Ok(FieldSel::Z),
            (ElemShape::Tline, other) => Err(ParamError(format!(
                "tline '{target}' needs field 'len' or 'z' (got {other:?})"
            ))),
            (ElemShape::Stub, other) => Err(ParamError(format!(
                "stub '{target}' needs field 'len' or 'z' (got {other:?})"
            ))),
            (ElemShape::Cap, Some("c") | None) => Ok(FieldSel::C),
            (ElemShape::Cap, Some(f)) => {
                Err(ParamError(format!("cap '{target}' has no field '{f}'")))
            }
            (ElemShape::Lc, Some("l")) => Ok(FieldSel::L),
            (ElemShape::Lc, Some("c")) => Ok(FieldSel::C),
            (ElemShape::Lc, other) => Err(ParamError(format!(
                "lc '{target}' needs field 'l' or 'c' (got {other:?})"
            ))),
        }
    }
}

fn series_slot(kind: &mut SeriesKind, field: FieldSel) -> Option<&mut f64> {
    match (kind, field) {
        (SeriesKind::Tline { len, .. }, FieldSel::Len) => Some(len),
        (SeriesKind::Tline { z, .. }, FieldSel::Z) => Some(z),
        (SeriesKind::Cap { c }, FieldSel::C) => Some(c),
        _ => None,
    }
}

fn shunt_slot(kind: &mut ShuntKind, field: FieldSel) -> Option<&mut f64> {
    match (kind, field) {
        (ShuntKind::Stub { len, .. }, FieldSel::Len) => Some(len),
        (ShuntKind::Stub { z, .. }, FieldSel::Z) => Some(z),
        (ShuntKind::Lc { l, .. }, FieldSel::L) => Some(l),
        (ShuntKind::Lc { c, .. }, FieldSel::C) => Some(c),
        _ => None,
    }
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

struct RawParams {
    velocity: Option<f64>,
    ztl: Option<f64>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                let l = match l.find('#') {
                    Some(p) => &l[..p],
                    None => l,
                };
                (i + 1, l.trim())
            })
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Parser { lines, pos: 0 }
    }

    fn run(mut self) -> Result<Netlist, NetlistError> {
        let mut params = RawParams {
            velocity: None,
            ztl: None,
        };
        let mut z_in = None;
        let mut z_out = None;
        let mut chain = Vec::new();
        let mut node_names: HashSet<String> = HashSet::new();
        let mut branch_names: HashSet<String> = HashSet::new();
        let mut elem_names: HashSet<String> = HashSet::new();

        while self.pos < self.lines.len() {
            let (line, text) = self.lines[self.pos];
            self.pos += 1;
            let mut tok = text.split_whitespace();
            let kw = tok.next().unwrap();
            match kw {
                "param" => self.parse_param(line, tok, &mut params)?,
                "port" => {
                    let which = tok
                        .next()
                        .ok_or_else(|| err(line, "port needs 'in' or 'out'"))?;
                    let attrs = Attrs::parse(line, tok)?;
                    let z = attrs.take_positive(line, "z")?;
                    attrs.finish(line)?;
                    let slot = match which {
                        "in" => &mut z_in,
                        "out" => &mut z_out,
                        other => return Err(err(line, &format!("unknown port '{other}'"))),
                    };
                    if slot.is_some() {
                        return Err(err(line, &format!("duplicate 'port {which}' directive")));
                    }
                    *slot = Some(z);
                }
                "tline" | "cap" => {
                    let elem = self.parse_series(line, kw, tok, &params, &mut elem_names)?;
                    chain.push(ChainItem::Series(elem));
                }
                "stub" | "lc" => {
                    let elem = self.parse_shunt(line, kw, tok, &params, &mut elem_names)?;
                    chain.push(ChainItem::Shunt(elem));
                }
                "branch" => {
                    let name = tok
                        .next()
                        .ok_or_else(|| err(line, "branch needs a name"))?
                        .to_string();
                    if !branch_names.insert(name.clone()) {
                        return Err(err(line, &format!("duplicate branch name '{name}'")));
                    }
                    if tok.next().is_some() {
                        return Err(err(line, "unexpected tokens after branch name"));
                    }
                    let branch = self.parse_branch(
                        line,
                        name,
                        &params,
                        &mut node_names,
                        &mut elem_names,
                    )?;
                    chain.push(ChainItem::Branch(branch));
                }
                "node" | "short" | "open" => {
                    return Err(err(
                        line,
                        &format!("'{kw}' is only allowed inside a branch"),
                    ))
                }
                "end" => return Err(err(line, "'end' without matching 'branch'")),
                other => return Err(err(line, &format!("unknown keyword '{other}'"))),
            }
        }

        let z_in = z_in.ok_or_else(|| err(0, "missing 'port in' directive"))?;
        let z_out = z_out.ok_or_else(|| err(0, "missing 'port out' directive"))?;
        let velocity = match params.velocity {
            Some(v) => v,
            None => {
                let needs_v = chain_has_lines(&chain);
                if needs_v {
                    return Err(err(
                        0,
                        "missing 'param eps_eff' or 'param velocity' (required by tline/stub)",
                    ));
                }
                f64::NAN
            }
        };
        Ok(Netlist {
            velocity,
            default_ztl: params.ztl,
            z_in,
            z_out,
            chain,
        })
    }

    fn parse_param(
        &mut self,
        line: usize,
        mut tok: std::str::SplitWhitespace<'_>,
        params: &mut RawParams,
    ) -> Result<(), NetlistError> {
        while let Some(key) = tok.next() {
            let val = tok
                .next()
                .ok_or_else(|| err(line, &format!("param '{key}' needs a value")))?;
            let x = parse_positive(line, key, val)?;
            match key {
                "eps_eff" => params.velocity = Some(velocity_from_eps_eff(x)),
                "velocity" => params.velocity = Some(x),
                "ztl" => params.ztl = Some(x),
                other => return Err(err(line, &format!("unknown param '{other}'"))),
            }
        }
        Ok(())
    }

    fn parse_series(
        &mut self,
        line: usize,
        kw: &str,
        tok: std::str::SplitWhitespace<'_>,
        params: &RawParams,
        elem_names: &mut HashSet<String>,
    ) -> Result<SeriesElem, NetlistError> {
        let attrs = Attrs::parse(line, tok)?;
        let name = attrs.take_name(line, elem_names)?;
        let kind = match kw {
            "tline" => {
                let len = attrs.take_positive(line, "len")?;
                let z = attrs.take_z_or_default(line, params)?;
                SeriesKind::Tline { z, len }
            }
            "cap" => SeriesKind::Cap {
                c: attrs.take_positive(line, "c")?,
            },
            _ => unreachable!(),
        };
        attrs.finish(line)?;
        Ok(SeriesElem { name, kind })
    }

    fn parse_shunt(
        &mut self,
        line: usize,
        kw: &str,
        tok: std::str::SplitWhitespace<'_>,
        params: &RawParams,
        elem_names: &mut HashSet<String>,
    ) -> Result<ShuntElem, NetlistError> {
        let attrs = Attrs::parse(line, tok)?;
        let name = attrs.take_name(line, elem_names)?;
        let kind = match kw {
            "stub" => {
                let len = attrs.take_positive(line, "len")?;
                let z = attrs.take_z_or_default(line, params)?;
                ShuntKind::Stub { z, len }
            }
            "lc" => ShuntKind::Lc {
                l: attrs.take_positive(line, "l")?,
                c: attrs.take_positive(line, "c")?,
            },
            _ => unreachable!(),
        };
        attrs.finish(line)?;
        Ok(ShuntElem { name, kind })
    }

    fn parse_branch(
        &mut self,
        start_line: usize,
        name: String,
        params: &RawParams,
        node_names: &mut HashSet<String>,
        elem_names: &mut HashSet<String>,
    ) -> Result<Branch, NetlistError> {
        let mut items = Vec::new();
        let mut termination = None;
        let mut has_node = false;
        loop {
            if self.pos >= self.lines.len() {
                return Err(err(start_line, "branch is missing its 'end'"));
            }
            let (line, text) = self.lines[self.pos];
            self.pos += 1;
            let mut tok = text.split_whitespace();
            let kw = tok.next().unwrap();
            if let Some(t) = termination {
                if kw != "end" {
                    let which = if t == Termination::Short { "short" } else { "open" };
                    return Err(err(line, &format!("'{which}' must be the last branch item")));
                }
            }
            match kw {
                "end" => break,
                "tline" | "cap" => {
                    let e = self.parse_series(line, kw, tok, params, elem_names)?;
                    items.push(BranchItem::Series(e));
                }
                "stub" | "lc" => {
                    let e = self.parse_shunt(line, kw, tok, params, elem_names)?;
                    items.push(BranchItem::Shunt(e));
                }
                "node" => {
                    if has_node {
                        return Err(err(line, "a branch may declare at most one node"));
                    }
                    has_node = true;
                    let nname = tok
                        .next()
                        .ok_or_else(|| err(line, "node needs a name"))?
                        .to_string();
                    if !node_names.insert(nname.clone()) {
                        return Err(err(line, &format!("duplicate node name '{nname}'")));
                    }
                    let attrs = Attrs::parse(line, tok)?;
                    let cground = attrs.take_optional_positive(line, "cground")?;
                    attrs.finish(line)?;
                    items.push(BranchItem::Node(NodeMarker {
                        name: nname,
                        cground,
                    }));
                }
                "short" => termination = Some(Termination::Short),
                "open" => termination = Some(Termination::Open),
                other => {
                    return Err(err(line, &format!("unknown branch keyword '{other}'")))
                }
            }
        }
        Ok(Branch {
            name,
            items,
            termination: termination.unwrap_or(Termination::Open),
        })
    }
}

fn chain_has_lines(chain: &[ChainItem]) -> bool {
    chain.iter().any(|item| match item {
        ChainItem::Series(e) => matches!(e.kind, SeriesKind::Tline { .. }),
        ChainItem::Shunt(e) => matches!(e.kind, ShuntKind::Stub { .. }),
        ChainItem::Branch(b) => b.items.iter().any(|bi| match bi {
            BranchItem::Series(e) => matches!(e.kind, SeriesKind::Tline { .. }),
            BranchItem::Shunt(e) => matches!(e.kind, ShuntKind::Stub { .. }),
            BranchItem::Node(_) => false,
        }),
    })
}

fn err(line: usize, message: &str) -> NetlistError {
    NetlistError {
        line,
        message: message.to_string(),
    }
}

fn parse_positive(line: usize, key: &str, val: &str) -> Result<f64, NetlistError> {
    let x: f64 = val
        .parse()
        .map_err(|_| err(line, &format!("cannot parse '{val}' for '{key}'")))?;
    if !(x.is_finite() && x > 0.0) {
        return Err(err(line, &format!("'{key}' must be positive, got {val}")));
    }
    Ok(x)
}

/// `key=value` attribute list with consumed-key tracking.
struct Attrs {
    pairs: std::cell::RefCell<Vec<(String, String)>>,
}

impl Attrs {
    fn parse(line: usize, tok: std::str::SplitWhitespace<'_>) -> Result<Attrs, NetlistError> {
        let mut pairs = Vec::new();
        for t in tok {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| err(line, &format!("expected key=value, got '{t}'")))?;
            pairs.push((k.to_string(), v.to_string()));
        }
        Ok(Attrs {
            pairs: std::cell::RefCell::new(pairs),
        })
    }

    fn take(&self, key: &str) -> Option<String> {
        let mut pairs = self.pairs.borrow_mut();
        let idx = pairs.iter().position(|(k, _)| k == key)?;
        Some(pairs.remove(idx).1)
    }

    fn take_positive(&self, line: usize, key: &str) -> Result<f64, NetlistError> {
        let v = self
            .take(key)
            .ok_or_else(|| err(line, &format!("missing required '{key}='")))?;
        parse_positive(line, key, &v)
    }

    fn take_optional_positive(&self, line: usize, key: &str) -> Result<Option<f64>, NetlistError> {
        match self.take(key) {
            Some(v) => Ok(Some(parse_positive(line, key, &v)?)),
            None => Ok(None),
        }
    }

    fn take_z_or_default(&self, line: usize, params: &RawParams) -> Result<f64, NetlistError> {
        if let Some(v) = self.take("z") {
            return parse_positive(line, "z", &v);
        }
        params
            .ztl
            .ok_or_else(|| err(line, "missing 'z=' and no default 'ztl' was set"))
    }

    fn take_name(
        &self,
        line: usize,
        elem_names: &mut HashSet<String>,
    ) -> Result<Option<String>, NetlistError> {
        match self.take("name") {
            Some(n) => {
                if !elem_names.insert(n.clone()) {
                    return Err(err(line, &format!("duplicate element name '{n}'")));
                }
                Ok(Some(n))
            }
            None => Ok(None),
        }
    }

    fn finish(&self, line: usize) -> Result<(), NetlistError> {
        let pairs = self.pairs.borrow();
        if let Some((k, _)) = pairs.first() {
            return Err(err(line, &format!("unknown attribute '{k}'")));
        }
        Ok(())
    }
}
