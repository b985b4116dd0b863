//! The textual instance format: a line-oriented, hand-auditable document
//! listing a ring, modules, complexes, chain maps, dg categories, functors
//! and tasks. Parsing is strict; serialization is canonical, and canonical
//! files round-trip byte for byte.

use crate::complex::{ChainMap, Complex, El};
use crate::dg::{CompTable, DgCat, DgFunctor};
use crate::mat::Mat;
use crate::module::{FpModule, ModMap};
use crate::ring::{Ring, Scalar};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

fn perr<T>(line: usize, reason: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        reason: reason.into(),
    })
}

/// One parsed statement, with enough surface structure to re-serialize
/// canonically.
#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Ring(Ring),
    Module {
        name: String,
        rels: Mat,
    },
    Complex {
        name: String,
        lo: i64,
        terms: Vec<String>,
        diffs: Vec<Mat>,
    },
    ChainMapDecl {
        name: String,
        from: String,
        to: String,
        degree: i64,
        comps: Vec<(i64, Mat)>,
    },
    DgcatConcrete {
        name: String,
        complexes: Vec<String>,
    },
    DgcatTabular {
        name: String,
        objects: Vec<String>,
    },
    Hom {
        cat: String,
        x: String,
        y: String,
        lo: i64,
        terms: Vec<String>,
        diffs: Vec<Mat>,
    },
    Unit {
        cat: String,
        x: String,
        coords: Mat,
    },
    Comp {
        cat: String,
        x: String,
        y: String,
        z: String,
        p: i64,
        q: i64,
        cells: Vec<(usize, usize, Mat)>,
    },
    FunctorDecl {
        name: String,
        from: String,
        to: String,
        objects: Vec<String>,
        maps: Vec<(String, String, i64, Mat)>,
    },
    Note(String),
    Task(Task),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Cohomology {
        name: String,
        complex: String,
        degree: i64,
    },
    HomCohomology {
        name: String,
        source: String,
        target: String,
        lo: i64,
        hi: i64,
    },
    Cone {
        name: String,
        map: String,
    },
    Homotopy {
        name: String,
        map: String,
    },
    Quotient {
        name: String,
        dgcat: String,
        kill: Vec<String>,
        cap: usize,
        policy: String,
        pair: (String, String),
        degree: i64,
        oracle: Option<(usize, i64, i64)>,
    },
    Pullback {
        name: String,
        f1: String,
        f2: String,
    },
    HolimCover {
        name: String,
        n: usize,
        layers: Vec<(String, String)>,
        maps: Vec<(String, String, String)>,
    },
    Genwit {
        name: String,
        complex: String,
    },
    ZigzagCompat {
        name: String,
        v1: String,
        v2: String,
        v3: String,
        n: i64,
        k: i64,
        l: i64,
    },
    Critpb {
        name: String,
        dgcat: String,
        d1: Vec<String>,
        d2: Vec<String>,
        cap: usize,
        window: (i64, i64),
        entries: usize,
        shifts: (i64, i64),
    },
}

impl Task {
    pub fn name(&self) -> &str {
        match self {
            Task::Cohomology { name, .. }
            | Task::HomCohomology { name, .. }
            | Task::Cone { name, .. }
            | Task::Homotopy { name, .. }
            | Task::Quotient { name, .. }
            | Task::Pullback { name, .. }
            | Task::HolimCover { name, .. }
            | Task::Genwit { name, .. }
            | Task::ZigzagCompat { name, .. }
            | Task::Critpb { name, .. } => name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Task::Cohomology { .. } | Task::HomCohomology { .. } => "cohomology",
            Task::Cone { .. } => "cone",
            Task::Homotopy { .. } => "homotopy",
            Task::Quotient { .. } => "quotient",
            Task::Pullback { .. } => "pullback",
            Task::HolimCover { .. } => "holim-cover",
            Task::Genwit { .. } => "genwit",
            Task::ZigzagCompat { .. } => "zigzag-compat",
            Task::Critpb { .. } => "critpb",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct InstanceFile {
    pub stmts: Vec<Stmt>,
}

impl InstanceFile {
    pub fn ring(&self) -> Option<Ring> {
        self.stmts.iter().find_map(|s| match s {
            Stmt::Ring(r) => Some(*r),
            _ => None,
        })
    }

    pub fn notes(&self) -> Vec<String> {
        self.stmts
            .iter()
            .filter_map(|s| match s {
                Stmt::Note(n) => Some(n.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn tasks(&self) -> Vec<Task> {
        self.stmts
            .iter()
            .filter_map(|s| match s {
                Stmt::Task(t) => Some(t.clone()),
                _ => None,
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// lexing helpers

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str, line: usize) -> Cursor<'a> {
        Cursor { s, pos: 0, line }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s.as_bytes()[self.pos] == b' ' {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.s[self.pos..].chars().next()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            perr(
                self.line,
                format!("expected '{}' near '{}'", tok, &self.s[self.pos..self.s.len().min(self.pos + 20)]),
            )
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut end = self.s.len();
        for (i, c) in self.s[self.pos..].char_indices() {
            if c.is_alphanumeric() || c == '_' || c == '-' || (i > 0 && c == '/') {
                continue;
            }
            end = start + i;
            break;
        }
        self.pos = end;
        if self.pos == start {
            return perr(self.line, "expected a name");
        }
        Ok(self.s[start..self.pos].to_string())
    }

    /// A whitespace-delimited word (used for ring literals).
    fn word(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut end = self.s.len();
        for (i, c) in self.s[self.pos..].char_indices() {
            if c == ' ' {
                end = start + i;
                break;
            }
        }
        self.pos = end;
        if self.pos == start {
            return perr(self.line, "expected a token");
        }
        Ok(self.s[start..self.pos].to_string())
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.s.as_bytes();
        if self.pos < bytes.len() && (bytes[self.pos] == b'-' || bytes[self.pos] == b'+') {
            self.pos += 1;
        }
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.s[start..self.pos]
            .parse()
            .map_err(|_| ParseError {
                line: self.line,
                reason: "expected an integer".to_string(),
            })
    }

    fn done(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.s.len()
    }
}

fn parse_scalar(tok: &str, ring: Ring, line: usize) -> Result<Scalar, ParseError> {
    let tok = tok.trim();
    match ring.cover() {
        crate::ring::Cover::Int => tok
            .parse::<i64>()
            .map(|v| Scalar::from_i64(v, ring))
            .map_err(|_| ParseError {
                line,
                reason: format!("bad integer entry '{}'", tok),
            }),
        crate::ring::Cover::Rat => {
            if let Some((n, d)) = tok.split_once('/') {
                let n: i64 = n.trim().parse().map_err(|_| ParseError {
                    line,
                    reason: format!("bad rational entry '{}'", tok),
                })?;
                let d: i64 = d.trim().parse().map_err(|_| ParseError {
                    line,
                    reason: format!("bad rational entry '{}'", tok),
                })?;
                let num = num::BigRational::new(num::BigInt::from(n), num::BigInt::from(d));
                Ok(Scalar::Rat(num))
            } else {
                tok.parse::<i64>()
                    .map(|v| Scalar::from_i64(v, ring))
                    .map_err(|_| ParseError {
                        line,
                        reason: format!("bad rational entry '{}'", tok),
                    })
            }
        }
        crate::ring::Cover::Poly(p) => {
            // forms: "a", "bx", "x", "a+bx", "a+x"
            let mut c0 = 0u64;
            let mut c1 = 0u64;
            for part in tok.split('+') {
                let part = part.trim();
                if let Some(stripped) = part.strip_suffix('x') {
                    let coef = if stripped.is_empty() {
                        1
                    } else {
                        stripped.parse::<u64>().map_err(|_| ParseError {
                            line,
                            reason: format!("bad dual-number entry '{}'", tok),
                        })?
                    };
                    c1 = (c1 + coef) % p;
                } else {
                    let coef = part.parse::<u64>().map_err(|_| ParseError {
                        line,
                        reason: format!("bad dual-number entry '{}'", tok),
                    })?;
                    c0 = (c0 + coef) % p;
                }
            }
            let mut coeffs = vec![c0, c1];
            while coeffs.last() == Some(&0) {
                coeffs.pop();
            }
            Ok(Scalar::Poly(coeffs))
        }
    }
}

fn scalar_to_string(s: &Scalar) -> String {
    format!("{}", s)
}

fn parse_mat(cur: &mut Cursor, ring: Ring) -> Result<Mat, ParseError> {
    cur.expect("[")?;
    let rows = cur.int()? as usize;
    cur.expect("x")?;
    let cols = cur.int()? as usize;
    cur.expect(":")?;
    let mut entries = Vec::with_capacity(rows * cols);
    for k in 0..rows * cols {
        if k > 0 {
            cur.expect(",")?;
        }
        cur.skip_ws();
        let start = cur.pos;
        while cur.pos < cur.s.len() {
            let c = cur.s.as_bytes()[cur.pos];
            if c == b',' || c == b']' {
                break;
            }
            cur.pos += 1;
        }
        let tok = &cur.s[start..cur.pos];
        entries.push(parse_scalar(tok, ring, cur.line)?);
    }
    cur.expect("]")?;
    let mut m = Mat::zeros(ring, rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, entries[i * cols + j].clone());
        }
    }
    Ok(m.reduced())
}

fn mat_to_string(m: &Mat) -> String {
    let mut out = format!("[{}x{}:", m.rows, m.cols);
    let mut first = true;
    for i in 0..m.rows {
        for j in 0..m.cols {
            if first {
                out.push(' ');
                first = false;
            } else {
                out.push_str(", ");
            }
            out.push_str(&scalar_to_string(m.at(i, j)));
        }
    }
    out.push(']');
    out
}

fn parse_name_list(cur: &mut Cursor) -> Result<Vec<String>, ParseError> {
    cur.expect("(")?;
    let mut out = Vec::new();
    if cur.peek() == Some(')') {
        cur.expect(")")?;
        return Ok(out);
    }
    loop {
        out.push(cur.ident()?);
        if cur.eat(",") {
            continue;
        }
        cur.expect(")")?;
        break;
    }
    Ok(out)
}

fn parse_mat_list(cur: &mut Cursor, ring: Ring) -> Result<Vec<Mat>, ParseError> {
    cur.expect("(")?;
    let mut out = Vec::new();
    if cur.peek() == Some(')') {
        cur.expect(")")?;
        return Ok(out);
    }
    loop {
        out.push(parse_mat(cur, ring)?);
        if cur.eat(",") {
            continue;
        }
        cur.expect(")")?;
        break;
    }
    Ok(out)
}

fn ring_to_string(r: Ring) -> String {
    match r {
        Ring::Int => "Z".to_string(),
        Ring::IntMod(n) => format!("Z/{}", n),
        Ring::Rational => "Q".to_string(),
        Ring::DualNumbers(p) => format!("F{}[e]", p),
    }
}

fn parse_ring(tok: &str, line: usize) -> Result<Ring, ParseError> {
    let r = if tok == "Z" {
        Ring::Int
    } else if tok == "Q" {
        Ring::Rational
    } else if let Some(n) = tok.strip_prefix("Z/") {
        Ring::IntMod(n.parse().map_err(|_| ParseError {
            line,
            reason: format!("bad modulus '{}'", n),
        })?)
    } else if let Some(rest) = tok.strip_prefix('F') {
        let p = rest.strip_suffix("[e]").ok_or(ParseError {
            line,
            reason: format!("unknown ring '{}'", tok),
        })?;
        Ring::DualNumbers(p.parse().map_err(|_| ParseError {
            line,
            reason: format!("bad prime '{}'", p),
        })?)
    } else {
        return perr(line, format!("unknown ring '{}'", tok));
    };
    r.validate().map_err(|e| ParseError {
        line,
        reason: format!("{}", e),
    })?;
    Ok(r)
}

/// Parse a whole instance document.
pub fn parse(text: &str) -> Result<InstanceFile, ParseError> {
    let mut stmts = Vec::new();
    let mut ring: Option<Ring> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim_end();
        if trimmed.trim_start().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let mut cur = Cursor::new(trimmed, line);
        let head = cur.ident()?;
        match head.as_str() {
            "ring" => {
                let tok = cur.word()?;
                let r = parse_ring(&tok, line)?;
                ring = Some(r);
                stmts.push(Stmt::Ring(r));
            }
            "module" => {
                let r = ring.ok_or(ParseError {
                    line,
                    reason: "ring must be declared first".into(),
                })?;
                let name = cur.ident()?;
                cur.expect("=")?;
                let rels = parse_mat(&mut cur, r)?;
                stmts.push(Stmt::Module { name, rels });
            }
            "complex" => {
                let r = ring.ok_or(ParseError {
                    line,
                    reason: "ring must be declared first".into(),
                })?;
                let name = cur.ident()?;
                cur.expect("=")?;
                cur.expect("lo")?;
                let lo = cur.int()?;
                cur.expect("terms")?;
                let terms = parse_name_list(&mut cur)?;
                cur.expect("diffs")?;
                let diffs = parse_mat_list(&mut cur, r)?;
                stmts.push(Stmt::Complex {
                    name,
                    lo,
                    terms,
                    diffs,
                });
            }
            "chainmap" => {
                let r = ring.ok_or(ParseError {
                    line,
                    reason: "ring must be declared first".into(),
                })?;
                let name = cur.ident()?;
                cur.expect("=")?;
                let from = cur.ident()?;
                cur.expect("->")?;
                let to = cur.ident()?;
                cur.expect("deg")?;
                let degree = cur.int()?;
                cur.expect("comps")?;
                cur.expect("(")?;
                let mut comps = Vec::new();
                if cur.peek() != Some(')') {
                    loop {
                        let d = cur.int()?;
                        cur.expect(":")?;
                        let m = parse_mat(&mut cur, r)?;
                        comps.push((d, m));
                        if cur.eat(",") {
                            continue;
                        }
                        break;
                    }
                }
                cur.expect(")")?;
                stmts.push(Stmt::ChainMapDecl {
                    name,
                    from,
                    to,
                    degree,
                    comps,
                });
            }
            "dgcat" => {
                let name = cur.ident()?;
                cur.expect("=")?;
                if cur.eat("concrete") {
                    let complexes = parse_name_list(&mut cur)?;
                    stmts.push(Stmt::DgcatConcrete {
                        name,
                        complexes,
                    });
                } else {
                    cur.expect("tabular")?;
                    let objects = parse_name_list(&mut cur)?;
                    stmts.push(Stmt::DgcatTabular { name, objects });
                }
            }
            "hom" => {
                let r = ring.ok_or(ParseError {
                    line,
                    reason: "ring must be declared first".into(),
                })?;
                let cat = cur.ident()?;
                let x = cur.ident()?;
                let y = cur.ident()?;
                cur.expect("=")?;
                cur.expect("lo")?;
                let lo = cur.int()?;
                cur.expect("terms")?;
                let terms = parse_name_list(&mut cur)?;
                cur.expect("diffs")?;
                let diffs = parse_mat_list(&mut cur, r)?;
                stmts.push(Stmt::Hom {
                    cat,
                    x,
                    y,
                    lo,
                    terms,
                    diffs,
                });
            }
            "unit" => {
                let r = ring.ok_or(ParseError {
                    line,
                    reason: "ring must be declared first".into(),
                })?;
                let cat = cur.ident()?;
                let x = cur.ident()?;
                cur.expect("=")?;
                let coords = parse_mat(&mut cur, r)?;
                stmts.push(Stmt::Unit { cat, x, coords });
            }
            "comp" => {
                let r = ring.ok_or(ParseError {
                    line,
                    reason: "ring must be declared first".into(),
                })?;
                let cat = cur.ident()?;
                let x = cur.ident()?;
                let y = cur.ident()?;
                let z = cur.ident()?;
                let p = cur.int()?;
                let q = cur.int()?;
                cur.expect("=")?;
                cur.expect("(")?;
                let mut cells = Vec::new();
                if cur.peek() != Some(')') {
                    loop {
                        cur.expect("(")?;
                        let i = cur.int()? as usize;
                        cur.expect(",")?;
                        let j = cur.int()? as usize;
                        cur.expect(")")?;
                        cur.expect(":")?;
                        let m = parse_mat(&mut cur, r)?;
                        cells.push((i, j, m));
                        if cur.eat(",") {
                            continue;
                        }
                        break;
                    }
                }
                cur.expect(")")?;
                stmts.push(Stmt::Comp {
                    cat,
                    x,
                    y,
                    z,
                    p,
                    q,
                    cells,
                });
            }
            "functor" => {
                let r = ring.ok_or(ParseError {
                    line,
                    reason: "ring must be declared first".into(),
                })?;
                let name = cur.ident()?;
                cur.expect("=")?;
                let from = cur.ident()?;
                cur.expect("->")?;
                let to = cur.ident()?;
                cur.expect("objects")?;
                let objects = parse_name_list(&mut cur)?;
                cur.expect("maps")?;
                cur.expect("(")?;
                let mut maps = Vec::new();
                if cur.peek() != Some(')') {
                    loop {
                        let x = cur.ident()?;
                        let y = cur.ident()?;
                        let d = cur.int()?;
                        cur.expect(":")?;
                        let m = parse_mat(&mut cur, r)?;
                        maps.push((x, y, d, m));
                        if cur.eat(",") {
                            continue;
                        }
                        break;
                    }
                }
                cur.expect(")")?;
                stmts.push(Stmt::FunctorDecl {
                    name,
                    from,
                    to,
                    objects,
                    maps,
                });
            }
            "note" => {
                cur.skip_ws();
                let rest = cur.s[cur.pos..].trim();
                let inner = rest
                    .strip_prefix('"')
                    .and_then(|r| r.strip_suffix('"'))
                    .ok_or(ParseError {
                        line,
                        reason: "note text must be double-quoted".into(),
                    })?;
                stmts.push(Stmt::Note(inner.to_string()));
                continue;
            }
            "task" => {
                let name = cur.ident()?;
                cur.expect("=")?;
                let kind = cur.ident()?;
                let task = parse_task(&mut cur, name, &kind)?;
                stmts.push(Stmt::Task(task));
            }
            other => return perr(line, format!("unknown statement '{}'", other)),
        }
        if !cur.done() {
            return perr(line, format!("trailing input near '{}'", &cur.s[cur.pos..]));
        }
    }
    Ok(InstanceFile { stmts })
}

fn parse_task(cur: &mut Cursor, name: String, kind: &str) -> Result<Task, ParseError> {
    match kind {
        "cohomology" => {
            if cur.eat("complex") {
                let complex = cur.ident()?;
                cur.expect("degree")?;
                let degree = cur.int()?;
                Ok(Task::Cohomology {
                    name,
                    complex,
                    degree,
                })
            } else {
                cur.expect("hom")?;
                let source = cur.ident()?;
                let target = cur.ident()?;
                cur.expect("degrees")?;
                let lo = cur.int()?;
                let hi = cur.int()?;
                Ok(Task::HomCohomology {
                    name,
                    source,
                    target,
                    lo,
                    hi,
                })
            }
        }
        "cone" => {
            cur.expect("map")?;
            Ok(Task::Cone {
                name,
                map: cur.ident()?,
            })
        }
        "homotopy" => {
            cur.expect("map")?;
            Ok(Task::Homotopy {
                name,
                map: cur.ident()?,
            })
        }
        "quotient" => {
            cur.expect("dgcat")?;
            let dgcat = cur.ident()?;
            cur.expect("kill")?;
            let kill = parse_name_list(cur)?;
            cur.expect("cap")?;
            let cap = cur.int()? as usize;
            cur.expect("policy")?;
            let policy = cur.ident()?;
            if policy != "reject" && policy != "track" {
                return perr(cur.line, "policy must be 'reject' or 'track'");
            }
            cur.expect("pair")?;
            let x = cur.ident()?;
            let y = cur.ident()?;
            cur.expect("degree")?;
            let degree = cur.int()?;
            let oracle = if cur.eat("oracle") {
                let entries = cur.int()? as usize;
                cur.expect("shifts")?;
                let lo = cur.int()?;
                let hi = cur.int()?;
                Some((entries, lo, hi))
            } else {
                None
            };
            Ok(Task::Quotient {
                name,
                dgcat,
                kill,
                cap,
                policy,
                pair: (x, y),
                degree,
                oracle,
            })
        }
        "pullback" => {
            cur.expect("f1")?;
            let f1 = cur.ident()?;
            cur.expect("f2")?;
            let f2 = cur.ident()?;
            Ok(Task::Pullback { name, f1, f2 })
        }
        "holim-cover" => {
            cur.expect("n")?;
            let n = cur.int()? as usize;
            cur.expect("layers")?;
            cur.expect("(")?;
            let mut layers = Vec::new();
            loop {
                let mask = cur.ident()?;
                cur.expect(":")?;
                let cat = cur.ident()?;
                layers.push((mask, cat));
                if cur.eat(",") {
                    continue;
                }
                break;
            }
            cur.expect(")")?;
            cur.expect("maps")?;
            cur.expect("(")?;
            let mut maps = Vec::new();
            if cur.peek() != Some(')') {
                loop {
                    let a = cur.ident()?;
                    let b = cur.ident()?;
                    cur.expect(":")?;
                    let f = cur.ident()?;
                    maps.push((a, b, f));
                    if cur.eat(",") {
                        continue;
                    }
                    break;
                }
            }
            cur.expect(")")?;
            Ok(Task::HolimCover {
                name,
                n,
                layers,
                maps,
            })
        }
        "genwit" => {
            cur.expect("complex")?;
            Ok(Task::Genwit {
                name,
                complex: cur.ident()?,
            })
        }
        "zigzag-compat" => {
            cur.expect("v1")?;
            let v1 = cur.ident()?;
            cur.expect("v2")?;
            let v2 = cur.ident()?;
            cur.expect("v3")?;
            let v3 = cur.ident()?;
            cur.expect("n")?;
            let n = cur.int()?;
            cur.expect("k")?;
            let k = cur.int()?;
            cur.expect("l")?;
            let l = cur.int()?;
            Ok(Task::ZigzagCompat {
                name,
                v1,
                v2,
                v3,
                n,
                k,
                l,
            })
        }
        "critpb" => {
            cur.expect("dgcat")?;
            let dgcat = cur.ident()?;
            cur.expect("d1")?;
            let d1 = parse_name_list(cur)?;
            cur.expect("d2")?;
            let d2 = parse_name_list(cur)?;
            cur.expect("cap")?;
            let cap = cur.int()? as usize;
            cur.expect("window")?;
            let wlo = cur.int()?;
            let whi = cur.int()?;
            cur.expect("entries")?;
            let entries = cur.int()? as usize;
            cur.expect("shifts")?;
            let slo = cur.int()?;
            let shi = cur.int()?;
            Ok(Task::Critpb {
                name,
                dgcat,
                d1,
                d2,
                cap,
                window: (wlo, whi),
                entries,
                shifts: (slo, shi),
            })
        }
        other => perr(cur.line, format!("unknown task kind '{}'", other)),
    }
}

/// Canonical serialization: one statement per line, single spaces.
pub fn serialize(f: &InstanceFile) -> String {
    let mut out = String::new();
    for stmt in &f.stmts {
        match stmt {
            Stmt::Ring(r) => {
                let _ = writeln!(out, "ring {}", ring_to_string(*r));
            }
            Stmt::Module { name, rels } => {
                let _ = writeln!(out, "module {} = {}", name, mat_to_string(rels));
            }
            Stmt::Complex {
                name,
                lo,
                terms,
                diffs,
            } => {
                let _ = writeln!(
                    out,
                    "complex {} = lo {} terms ({}) diffs ({})",
                    name,
                    lo,
                    terms.join(", "),
                    diffs.iter().map(mat_to_string).collect::<Vec<_>>().join(", ")
                );
            }
            Stmt::ChainMapDecl {
                name,
                from,
                to,
                degree,
                comps,
            } => {
                let body = comps
                    .iter()
                    .map(|(d, m)| format!("{}: {}", d, mat_to_string(m)))
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = writeln!(
                    out,
                    "chainmap {} = {} -> {} deg {} comps ({})",
                    name, from, to, degree, body
                );
            }
            Stmt::DgcatConcrete { name, complexes } => {
                let _ = writeln!(out, "dgcat {} = concrete ({})", name, complexes.join(", "));
            }
            Stmt::DgcatTabular { name, objects } => {
                let _ = writeln!(out, "dgcat {} = tabular ({})", name, objects.join(", "));
            }
            Stmt::Hom {
                cat,
                x,
                y,
                lo,
                terms,
                diffs,
            } => {
                let _ = writeln!(
                    out,
                    "hom {} {} {} = lo {} terms ({}) diffs ({})",
                    cat,
                    x,
                    y,
                    lo,
                    terms.join(", "),
                    diffs.iter().map(mat_to_string).collect::<Vec<_>>().join(", ")
                );
            }
            Stmt::Unit { cat, x, coords } => {
                let _ = writeln!(out, "unit {} {} = {}", cat, x, mat_to_string(coords));
            }
            Stmt::Comp {
                cat,
                x,
                y,
                z,
                p,
                q,
                cells,
            } => {
                let body = cells
                    .iter()
                    .map(|(i, j, m)| format!("({},{}): {}", i, j, mat_to_string(m)))
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = writeln!(
                    out,
                    "comp {} {} {} {} {} {} = ({})",
                    cat, x, y, z, p, q, body
                );
            }
            Stmt::FunctorDecl {
                name,
                from,
                to,
                objects,
                maps,
            } => {
                let body = maps
                    .iter()
                    .map(|(x, y, d, m)| format!("{} {} {}: {}", x, y, d, mat_to_string(m)))
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = writeln!(
                    out,
                    "functor {} = {} -> {} objects ({}) maps ({})",
                    name,
                    from,
                    to,
                    objects.join(", "),
                    body
                );
            }
            Stmt::Note(n) => {
                let _ = writeln!(out, "note \"{}\"", n);
            }
            Stmt::Task(t) => {
                let _ = writeln!(out, "{}", task_to_string(t));
            }
        }
    }
    out
}

fn task_to_string(t: &Task) -> String {
    match t {
        Task::Cohomology {
            name,
            complex,
            degree,
        } => format!("task {} = cohomology complex {} degree {}", name, complex, degree),
        Task::HomCohomology {
            name,
            source,
            target,
            lo,
            hi,
        } => format!(
            "task {} = cohomology hom {} {} degrees {} {}",
            name, source, target, lo, hi
        ),
        Task::Cone { name, map } => format!("task {} = cone map {}", name, map),
        Task::Homotopy { name, map } => format!("task {} = homotopy map {}", name, map),
        Task::Quotient {
            name,
            dgcat,
            kill,
            cap,
            policy,
            pair,
            degree,
            oracle,
        } => {
            let mut s = format!(
                "task {} = quotient dgcat {} kill ({}) cap {} policy {} pair {} {} degree {}",
                name,
                dgcat,
                kill.join(", "),
                cap,
                policy,
                pair.0,
                pair.1,
                degree
            );
            if let Some((e, lo, hi)) = oracle {
                let _ = write!(s, " oracle {} shifts {} {}", e, lo, hi);
            }
            s
        }
        Task::Pullback { name, f1, f2 } => {
            format!("task {} = pullback f1 {} f2 {}", name, f1, f2)
        }
        Task::HolimCover {
            name,
            n,
            layers,
            maps,
        } => {
            let ls = layers
                .iter()
                .map(|(m, c)| format!("{}: {}", m, c))
                .collect::<Vec<_>>()
                .join(", ");
            let ms = maps
                .iter()
                .map(|(a, b, f)| format!("{} {}: {}", a, b, f))
                .collect::<Vec<_>>()
                .join(", ");
            format!(
                "task {} = holim-cover n {} layers ({}) maps ({})",
                name, n, ls, ms
            )
        }
        Task::Genwit { name, complex } => format!("task {} = genwit complex {}", name, complex),
        Task::ZigzagCompat {
            name,
            v1,
            v2,
            v3,
            n,
            k,
            l,
        } => format!(
            "task {} = zigzag-compat v1 {} v2 {} v3 {} n {} k {} l {}",
            name, v1, v2, v3, n, k, l
        ),
        Task::Critpb {
            name,
            dgcat,
            d1,
            d2,
            cap,
            window,
            entries,
            shifts,
        } => format!(
            "task {} = critpb dgcat {} d1 ({}) d2 ({}) cap {} window {} {} entries {} shifts {} {}",
            name,
            dgcat,
            d1.join(", "),
            d2.join(", "),
            cap,
            window.0,
            window.1,
            entries,
            shifts.0,
            shifts.1
        ),
    }
}

// ---------------------------------------------------------------------------
// resolution into semantic objects

/// Resolved objects of an instance, built during checking.
pub struct Resolved {
    pub ring: Ring,
    pub modules: BTreeMap<String, FpModule>,
    pub complexes: BTreeMap<String, Complex>,
    pub chainmaps: BTreeMap<String, ChainMap>,
    pub dgcats: BTreeMap<String, Arc<DgCat>>,
    pub functors: BTreeMap<String, DgFunctor>,
    /// per-item check lines: (item, ok, detail)
    pub checks: Vec<(String, bool, String)>,
}

pub fn resolve(file: &InstanceFile) -> Result<Resolved, ParseError> {
    let ring = file.ring().ok_or(ParseError {
        line: 0,
        reason: "no ring declared".into(),
    })?;
    let mut res = Resolved {
        ring,
        modules: BTreeMap::new(),
        complexes: BTreeMap::new(),
        chainmaps: BTreeMap::new(),
        dgcats: BTreeMap::new(),
        functors: BTreeMap::new(),
        checks: Vec::new(),
    };
    // collect tabular data first
    let mut tab_homs: BTreeMap<(String, String, String), (i64, Vec<String>, Vec<Mat>)> =
        BTreeMap::new();
    let mut tab_units: BTreeMap<(String, String), Mat> = BTreeMap::new();
    let mut tab_comps: BTreeMap<(String, String, String, String), BTreeMap<(i64, i64), Vec<(usize, usize, Mat)>>> =
        BTreeMap::new();
    for stmt in &file.stmts {
        match stmt {
            Stmt::Hom {
                cat,
                x,
                y,
                lo,
                terms,
                diffs,
            } => {
                tab_homs.insert(
                    (cat.clone(), x.clone(), y.clone()),
                    (*lo, terms.clone(), diffs.clone()),
                );
            }
            Stmt::Unit { cat, x, coords } => {
                tab_units.insert((cat.clone(), x.clone()), coords.clone());
            }
            Stmt::Comp {
                cat,
                x,
                y,
                z,
                p,
                q,
                cells,
            } => {
                tab_comps
                    .entry((cat.clone(), x.clone(), y.clone(), z.clone()))
                    .or_default()
                    .insert((*p, *q), cells.clone());
            }
            _ => {}
        }
    }
    for stmt in &file.stmts {
        match stmt {
            Stmt::Module { name, rels } => {
                let m = FpModule::new(ring, rels.rows, rels.clone());
                res.checks.push((format!("module {}", name), true, m.iso_label()));
                res.modules.insert(name.clone(), m);
            }
            Stmt::Complex {
                name,
                lo,
                terms,
                diffs,
            } => {
                let mut mods = Vec::new();
                for t in terms {
                    match res.modules.get(t) {
                        Some(m) => mods.push(m.clone()),
                        None => {
                            return perr(0, format!("complex {} references unknown module {}", name, t))
                        }
                    }
                }
                let mut maps = Vec::new();
                let mut ok = true;
                let mut detail = String::new();
                for (k, d) in diffs.iter().enumerate() {
                    if d.rows != mods[k + 1].gens || d.cols != mods[k].gens {
                        ok = false;
                        detail = format!("differential {} has the wrong shape", k);
                        break;
                    }
                    maps.push(ModMap::new_unchecked(mods[k].clone(), mods[k + 1].clone(), d.clone()));
                }
                if ok {
                    match Complex::new(ring, *lo, mods, maps) {
                        Ok(c) => {
                            res.checks.push((format!("complex {}", name), true, "d^2 = 0".into()));
                            res.complexes.insert(name.clone(), c);
                        }
                        Err(e) => {
                            ok = false;
                            detail = format!("{}", e);
                        }
                    }
                }
                if !ok {
                    res.checks.push((format!("complex {}", name), false, detail));
                }
            }
            Stmt::ChainMapDecl {
                name,
                from,
                to,
                degree,
                comps,
            } => {
                let (Some(a), Some(b)) = (res.complexes.get(from), res.complexes.get(to)) else {
                    return perr(0, format!("chainmap {} references unknown complexes", name));
                };
                let mut cm = BTreeMap::new();
                let mut ok = true;
                let mut detail = String::new();
                for (d, m) in comps {
                    let src = a.term(*d);
                    let tgt = b.term(d + degree);
                    if m.rows != tgt.gens || m.cols != src.gens {
                        ok = false;
                        detail = format!("component at degree {} has the wrong shape", d);
                        break;
                    }
                    let mm = ModMap::new_unchecked(src, tgt, m.clone());
                    if !mm.is_well_defined() {
                        ok = false;
                        detail = format!("component at degree {} is not well-defined", d);
                        break;
                    }
                    cm.insert(*d, mm);
                }
                if ok {
                    let f = ChainMap::from_comps(a, b, *degree, cm);
                    let closed = f.closedness_failure();
                    match closed {
                        None => {
                            res.checks.push((format!("chainmap {}", name), true, "closed".into()));
                        }
                        Some(d) => {
                            res.checks.push((
                                format!("chainmap {}", name),
                                false,
                                format!("not closed at degree {}", d),
                            ));
                        }
                    }
                    res.chainmaps.insert(name.clone(), f);
                } else {
                    res.checks.push((format!("chainmap {}", name), false, detail));
                }
            }
            Stmt::DgcatConcrete { name, complexes } => {
                let mut objs = Vec::new();
                for c in complexes {
                    match res.complexes.get(c) {
                        Some(cx) => objs.push((c.clone(), cx.clone())),
                        None => return perr(0, format!("dgcat {} references unknown complex {}", name, c)),
                    }
                }
                match DgCat::concrete(ring, objs) {
                    Ok(cat) => {
                        let report = cat.check_axioms();
                        res.checks.push((
                            format!("dgcat {}", name),
                            report.passed(),
                            if report.passed() {
                                "axioms pass".into()
                            } else {
                                format!("{}", report.violations[0])
                            },
                        ));
                        res.dgcats.insert(name.clone(), Arc::new(cat));
                    }
                    Err(e) => {
                        res.checks.push((format!("dgcat {}", name), false, format!("{}", e)));
                    }
                }
            }
            Stmt::DgcatTabular { name, objects } => {
                let base = ring.hom_base();
                let n = objects.len();
                let mut homs = Vec::new();
                let mut build_ok = true;
                let mut detail = String::new();
                for x in objects {
                    for y in objects {
                        let key = (name.clone(), x.clone(), y.clone());
                        match tab_homs.get(&key) {
                            None => homs.push(Complex::zero(base)),
                            Some((lo, terms, diffs)) => {
                                let mut mods = Vec::new();
                                for t in terms {
                                    match res.modules.get(t) {
                                        Some(m) => mods.push(m.clone()),
                                        None => {
                                            build_ok = false;
                                            detail = format!("unknown module {}", t);
                                        }
                                    }
                                }
                                if !build_ok {
                                    break;
                                }
                                let mut maps = Vec::new();
                                for (k, d) in diffs.iter().enumerate() {
                                    maps.push(ModMap::new_unchecked(
                                        mods[k].clone(),
                                        mods[k + 1].clone(),
                                        d.clone(),
                                    ));
                                }
                                match Complex::new(base, *lo, mods, maps) {
                                    Ok(c) => homs.push(c),
                                    Err(e) => {
                                        build_ok = false;
                                        detail = format!("hom {} {}: {}", x, y, e);
                                    }
                                }
                            }
                        }
                    }
                    if !build_ok {
                        break;
                    }
                }
                if !build_ok {
                    res.checks.push((format!("dgcat {}", name), false, detail));
                    continue;
                }
                let mut units = Vec::new();
                for (xi, x) in objects.iter().enumerate() {
                    match tab_units.get(&(name.clone(), x.clone())) {
                        Some(v) => units.push(El {
                            deg: 0,
                            v: v.clone(),
                        }),
                        None => {
                            let hom = &homs[xi * n + xi];
                            units.push(hom.zero_el(0));
                        }
                    }
                }
                let mut comp: CompTable = BTreeMap::new();
                for (xi, x) in objects.iter().enumerate() {
                    for (yi, y) in objects.iter().enumerate() {
                        for (zi, z) in objects.iter().enumerate() {
                            let key = (name.clone(), x.clone(), y.clone(), z.clone());
                            let Some(bydeg) = tab_comps.get(&key) else {
                                continue;
                            };
                            let mut degs: BTreeMap<(i64, i64), Vec<Vec<Mat>>> = BTreeMap::new();
                            for ((p, q), cells) in bydeg {
                                let gp = homs[yi * n + zi].term(*p).gens;
                                let gq = homs[xi * n + yi].term(*q).gens;
                                let out_gens = homs[xi * n + zi].term(p + q).gens;
                                let mut table =
                                    vec![vec![Mat::zeros(base, out_gens, 1); gq]; gp];
                                for (i, j, m) in cells {
                                    if m.rows != out_gens || m.cols != 1 {
                                        build_ok = false;
                                        detail = format!(
                                            "composition cell ({} {} {} at {},{}) has the wrong shape",
                                            x, y, z, p, q
                                        );
                                        continue;
                                    }
                                    if *i < gp && *j < gq {
                                        table[*i][*j] = m.clone();
                                    }
                                }
                                degs.insert((*p, *q), table);
                            }
                            comp.insert((xi, yi, zi), degs);
                        }
                    }
                }
                if !build_ok {
                    res.checks.push((format!("dgcat {}", name), false, detail));
                    continue;
                }
                match DgCat::from_parts(base, objects.clone(), homs, units, comp) {
                    Ok(cat) => {
                        let report = cat.check_axioms();
                        res.checks.push((
                            format!("dgcat {}", name),
                            report.passed(),
                            if report.passed() {
                                "axioms pass".into()
                            } else {
                                format!("{}", report.violations[0])
                            },
                        ));
                        res.dgcats.insert(name.clone(), Arc::new(cat));
                    }
                    Err(e) => {
                        res.checks.push((format!("dgcat {}", name), false, format!("{}", e)));
                    }
                }
            }
            Stmt::FunctorDecl {
                name,
                from,
                to,
                objects,
                maps,
            } => {
                let (Some(src), Some(tgt)) = (res.dgcats.get(from), res.dgcats.get(to)) else {
                    return perr(0, format!("functor {} references unknown categories", name));
                };
                let mut obj_map = Vec::new();
                for o in objects {
                    match tgt.object_index(o) {
                        Some(i) => obj_map.push(i),
                        None => return perr(0, format!("functor {}: unknown target object {}", name, o)),
                    }
                }
                let mut grouped: BTreeMap<(usize, usize), BTreeMap<i64, ModMap>> = BTreeMap::new();
                let mut ok = true;
                let mut detail = String::new();
                for (x, y, d, m) in maps {
                    let (Some(xi), Some(yi)) = (src.object_index(x), src.object_index(y)) else {
                        return perr(0, format!("functor {}: unknown source object", name));
                    };
                    let s = src.hom(xi, yi).term(*d);
                    let t = tgt.hom(obj_map[xi], obj_map[yi]).term(*d);
                    if m.rows != t.gens || m.cols != s.gens {
                        ok = false;
                        detail = format!("hom map {} {} degree {} has the wrong shape", x, y, d);
                        break;
                    }
                    grouped
                        .entry((xi, yi))
                        .or_default()
                        .insert(*d, ModMap::new_unchecked(s, t, m.clone()));
                }
                if ok {
                    let mut hom_maps = BTreeMap::new();
                    for x in 0..src.objects.len() {
                        for y in 0..src.objects.len() {
                            let comps = grouped.remove(&(x, y)).unwrap_or_default();
                            hom_maps.insert(
                                (x, y),
                                ChainMap::from_comps(
                                    src.hom(x, y),
                                    tgt.hom(obj_map[x], obj_map[y]),
                                    0,
                                    comps,
                                ),
                            );
                        }
                    }
                    let f = DgFunctor {
                        src: src.clone(),
                        tgt: tgt.clone(),
                        obj_map,
                        hom_maps,
                    };
                    match f.validate() {
                        Ok(()) => {
                            res.checks.push((format!("functor {}", name), true, "functor laws hold".into()));
                            res.functors.insert(name.clone(), f);
                        }
                        Err(e) => {
                            res.checks.push((format!("functor {}", name), false, format!("{}", e)));
                        }
                    }
                } else {
                    res.checks.push((format!("functor {}", name), false, detail));
                }
            }
            _ => {}
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "ring Z/4\n\
module M = [1x0:]\n\
module T = [1x1: 2]\n\
complex A = lo 0 terms (M, M) diffs ([1x1: 2])\n\
chainmap f = A -> A deg 0 comps (0: [1x1: 2], 1: [1x1: 2])\n\
dgcat C = concrete (A)\n\
note \"sample\"\n\
task t1 = cohomology complex A degree 1\n\
task t2 = homotopy map f\n";

    #[test]
    fn parse_and_roundtrip() {
        let f = parse(SAMPLE).unwrap();
        let s = serialize(&f);
        assert_eq!(s, SAMPLE);
        let f2 = parse(&s).unwrap();
        assert_eq!(f.stmts, f2.stmts);
    }

    #[test]
    fn resolve_sample() {
        let f = parse(SAMPLE).unwrap();
        let r = resolve(&f).unwrap();
        assert!(r.checks.iter().all(|(_, ok, _)| *ok));
        assert!(r.complexes.contains_key("A"));
        assert!(r.dgcats.contains_key("C"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "ring Z/4\nmodule M = [1x1: zz]\n";
        let e = parse(bad).unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn dual_number_entries() {
        let txt = "ring F2[e]\nmodule M = [1x1: 1+x]\n";
        let f = parse(txt).unwrap();
        let s = serialize(&f);
        assert_eq!(s, txt);
    }

    #[test]
    fn missing_reference_is_an_error() {
        let txt = "ring Z/4\ncomplex A = lo 0 terms (M) diffs ()\n";
        let f = parse(txt).unwrap();
        assert!(resolve(&f).is_err());
    }
}
