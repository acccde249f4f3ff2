use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Diagnostic, Severity};
use crate::experiment::{Element, ExperimentGraph, SourceNode, Subject};
use crate::fock::{AncillaId, FockSpace, MAX_ANCILLAS, MAX_MODES};
use crate::measurement::{AbsorbingDetector, NonAbsorbingDetector, ReadoutBasis};
use crate::optics::PhaseShifter;

/// A successfully parsed graph plus any warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub graph: ExperimentGraph,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

enum Stmt<'a> {
    Mode(Token<'a>),
    Ancilla { name: Token<'a>, overlap: f64, overlap_tok: Token<'a> },
    Source { name: Token<'a>, mode: Token<'a> },
    BeamSplitter { name: Token<'a>, ports: [Token<'a>; 4], time: i64 },
    Phase { mode: Token<'a>, theta: f64, time: i64 },
    NDetector { name: Token<'a>, mode: Token<'a>, ancilla: Token<'a>, interact: i64, readout: i64, basis: ReadoutBasis },
    Detector { name: Token<'a>, mode: Token<'a>, time: i64 },
}

struct Diags<'f> {
    file: &'f str,
    list: Vec<Diagnostic>,
}

impl Diags<'_> {
    fn push(&mut self, severity: Severity, line: usize, column: usize, token: &str, message: String) {
        self.list.push(Diagnostic { severity, file: self.file.to_string(), line, column, message, token: token.into() });
    }

    fn error_at(&mut self, tok: &Token<'_>, message: String) {
        self.push(Severity::Error, tok.line, tok.col, tok.text, message);
    }

    fn has_errors(&self) -> bool {
        self.list.iter().any(Diagnostic::is_error)
    }
}

fn tokenize(line: &str, lineno: usize) -> (Vec<Token<'_>>, usize) {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut col = 0;
    let mut end = line.len();
    for (byte, ch) in line.char_indices() {
        col += 1;
        if ch == '#' {
            end = byte;
            break;
        }
        match (ch.is_whitespace(), start) {
            (true, Some((b, c))) => {
                tokens.push(Token { text: &line[b..byte], line: lineno, col: c });
                start = None;
            }
            (false, None) => start = Some((byte, col)),
            _ => {}
        }
    }
    if let Some((b, c)) = start {
        tokens.push(Token { text: &line[b..end], line: lineno, col: c });
    }
    let end_col = tokens.last().map(|t| t.col + t.text.chars().count()).unwrap_or(1);
    (tokens, end_col)
}

struct Cursor<'a, 't> {
    tokens: &'t [Token<'a>],
    pos: usize,
    line: usize,
    end_col: usize,
}

type Step<T> = Result<T, (usize, usize, String, String)>;

impl<'a> Cursor<'a, '_> {
    fn next(&mut self, what: &str) -> Step<Token<'a>> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(*t)
            }
            None => Err((self.line, self.end_col, String::new(), format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Step<Token<'a>> {
        let t = self.next(&format!("`{kw}`"))?;
        if t.text == kw {
            Ok(t)
        } else {
            Err(fail(&t, format!("expected `{kw}`, found `{}`", t.text)))
        }
    }

    fn name(&mut self, what: &str) -> Step<Token<'a>> {
        let t = self.next(&format!("{what} name"))?;
        let mut chars = t.text.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if ok {
            Ok(t)
        } else {
            Err(fail(&t, format!("invalid {what} name `{}`", t.text)))
        }
    }

    fn float(&mut self, what: &str) -> Step<(f64, Token<'a>)> {
        let t = self.next(what)?;
        match t.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((v, t)),
            Ok(_) => Err(fail(&t, format!("non-finite number `{}`", t.text))),
            Err(_) => Err(fail(&t, format!("invalid number `{}`", t.text))),
        }
    }

    fn int(&mut self, what: &str) -> Step<i64> {
        let t = self.next(what)?;
        t.text.parse::<i64>().map_err(|_| fail(&t, format!("invalid integer `{}`", t.text)))
    }

    fn keyed_int(&mut self, kw: &str) -> Step<i64> {
        self.keyword(kw)?;
        self.int(&format!("integer after `{kw}`"))
    }

    fn finish(&mut self) -> Step<()> {
        match self.tokens.get(self.pos) {
            Some(t) => Err(fail(t, format!("unexpected token `{}`", t.text))),
            None => Ok(()),
        }
    }

    fn has_more(&self) -> bool {
        self.pos < self.tokens.len()
    }
}

fn fail(t: &Token<'_>, message: String) -> (usize, usize, String, String) {
    (t.line, t.col, t.text.into(), message)
}

fn parse_statement<'a>(cur: &mut Cursor<'a, '_>) -> Step<Stmt<'a>> {
    let kw = cur.next("statement")?;
    let stmt = match kw.text {
        "mode" => Stmt::Mode(cur.name("mode")?),
        "ancilla" => {
            let name = cur.name("ancilla")?;
            cur.keyword("overlap")?;
            let (overlap, overlap_tok) = cur.float("overlap value")?;
            Stmt::Ancilla { name, overlap, overlap_tok }
        }
        "source" => {
            let name = cur.name("source")?;
            cur.keyword("->")?;
            Stmt::Source { name, mode: cur.name("mode")? }
        }
        "beamsplitter" => {
            let name = cur.name("beamsplitter")?;
            cur.keyword("in")?;
            let in_a = cur.name("mode")?;
            let in_b = cur.name("mode")?;
            cur.keyword("out")?;
            let out_a = cur.name("mode")?;
            let out_b = cur.name("mode")?;
            let time = cur.keyed_int("time")?;
            Stmt::BeamSplitter { name, ports: [in_a, in_b, out_a, out_b], time }
        }
        "phase" => {
            let mode = cur.name("mode")?;
            let (theta, _) = cur.float("phase angle")?;
            let time = cur.keyed_int("time")?;
            Stmt::Phase { mode, theta, time }
        }
        "ndetector" => {
            let name = cur.name("ndetector")?;
            cur.keyword("on")?;
            let mode = cur.name("mode")?;
            cur.keyword("ancilla")?;
            let ancilla = cur.name("ancilla")?;
            let interact = cur.keyed_int("interact")?;
            let readout = cur.keyed_int("readout")?;
            let mut basis = ReadoutBasis::Computational;
            if cur.has_more() {
                cur.keyword("basis")?;
                let t = cur.next("`computational` or `plusminus`")?;
                basis = match t.text {
                    "computational" => ReadoutBasis::Computational,
                    "plusminus" => ReadoutBasis::PlusMinus,
                    other => return Err(fail(&t, format!("expected `computational` or `plusminus`, found `{other}`"))),
                };
            }
            Stmt::NDetector { name, mode, ancilla, interact, readout, basis }
        }
        "detector" => {
            let name = cur.name("detector")?;
            cur.keyword("on")?;
            let mode = cur.name("mode")?;
            let time = cur.keyed_int("time")?;
            Stmt::Detector { name, mode, time }
        }
        other => return Err(fail(&kw, format!("unknown statement `{other}`"))),
    };
    cur.finish()?;
    Ok(stmt)
}

/// Decodes UTF-8 and parses; invalid bytes become a diagnostic.
pub fn parse_bytes(bytes: &[u8], file: &str) -> Result<Parsed, Vec<Diagnostic>> {
    match core::str::from_utf8(bytes) {
        Ok(text) => parse(text, file),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = valid.iter().rposition(|&b| b == b'\n').map(|p| p + 1).unwrap_or(0);
            // the prefix up to valid_up_to is valid UTF-8 by construction
            let column = core::str::from_utf8(&valid[line_start..]).map(|s| s.chars().count()).unwrap_or(0) + 1;
            Err(alloc::vec![Diagnostic {
                severity: Severity::Error,
                file: file.into(),
                line,
                column,
                message: "invalid UTF-8".into(),
                token: String::new(),
            }])
        }
    }
}

/// Parses and validates an experiment description.
///
/// Never panics on malformed input; every problem is reported as a
/// [`Diagnostic`], sorted by position.
pub fn parse(text: &str, file: &str) -> Result<Parsed, Vec<Diagnostic>> {
    let mut diags = Diags { file, list: Vec::new() };
    let mut stmts = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let (tokens, end_col) = tokenize(raw, i + 1);
        if tokens.is_empty() {
            continue;
        }
        let mut cur = Cursor { tokens: &tokens, pos: 0, line: i + 1, end_col };
        match parse_statement(&mut cur) {
            Ok(s) => stmts.push(s),
            Err((line, col, tok, msg)) => diags.push(Severity::Error, line, col, &tok, msg),
        }
    }

    let graph = build(&stmts, &mut diags);
    let mut list = diags.list;
    list.sort_by_key(|a| (a.line, a.column, a.severity));
    match graph {
        Some(graph) if !list.iter().any(Diagnostic::is_error) => Ok(Parsed { graph, warnings: list }),
        _ => Err(list),
    }
}

fn build<'a>(stmts: &[Stmt<'a>], diags: &mut Diags<'_>) -> Option<ExperimentGraph> {
    let mut space = FockSpace::default();
    let mut mode_decl: BTreeMap<&str, Token<'a>> = BTreeMap::new();
    let mut ancilla_decl: BTreeMap<&str, Token<'a>> = BTreeMap::new();
    let mut mode_order: Vec<Token<'a>> = Vec::new();
    for s in stmts {
        match s {
            Stmt::Mode(name) => {
                if mode_decl.contains_key(name.text) {
                    diags.error_at(name, format!("duplicate mode `{}`", name.text));
                } else if mode_decl.len() >= MAX_MODES {
                    diags.error_at(name, format!("too many modes (at most {MAX_MODES})"));
                } else {
                    mode_decl.insert(name.text, *name);
                    mode_order.push(*name);
                }
            }
            Stmt::Ancilla { name, overlap, overlap_tok } => {
                if ancilla_decl.contains_key(name.text) {
                    diags.error_at(name, format!("duplicate ancilla `{}`", name.text));
                } else if ancilla_decl.len() >= MAX_ANCILLAS {
                    diags.error_at(name, format!("too many ancillas (at most {MAX_ANCILLAS})"));
                } else if !(0.0..=1.0).contains(overlap) {
                    diags.error_at(overlap_tok, format!("overlap {overlap} outside [0, 1]"));
                } else {
                    ancilla_decl.insert(name.text, *name);
                    let next = AncillaId::new(space.ancillas().len(), name.text, *overlap).and_then(|a| space.with_ancilla(a));
                    match next {
                        Ok(s) => space = s,
                        Err(e) => diags.error_at(name, e.to_string()),
                    }
                }
            }
            _ => {}
        }
    }
    let ancilla_space = space;
    let mut space = match FockSpace::new(mode_order.iter().map(|t| t.text)) {
        Ok(s) => s,
        Err(e) => {
            diags.push(Severity::Error, 1, 1, "", e.to_string());
            return None;
        }
    };
    for a in ancilla_space.ancillas() {
        match space.with_ancilla(a.clone()) {
            Ok(s) => space = s,
            Err(e) => {
                diags.push(Severity::Error, 1, 1, "", e.to_string());
                return None;
            }
        }
    }

    let mut used_modes: BTreeSet<&str> = BTreeSet::new();
    let mut used_ancillas: BTreeSet<&str> = BTreeSet::new();
    let mut resolve = |t: &Token<'a>, diags: &mut Diags<'_>| -> Option<usize> {
        used_modes.insert(t.text);
        let m = space.mode(t.text);
        if m.is_none() {
            diags.error_at(t, format!("undeclared mode `{}`", t.text));
        }
        m
    };

    let mut graph = ExperimentGraph::new(space.clone());
    let mut source_anchor = Vec::new();
    let mut elements: Vec<(i64, usize, Element, Token<'a>)> = Vec::new();
    let mut nd_anchor = Vec::new();
    let mut det_anchor = Vec::new();
    for s in stmts {
        match s {
            Stmt::Mode(_) | Stmt::Ancilla { .. } => {}
            Stmt::Source { name, mode } => {
                if let Some(m) = resolve(mode, diags) {
                    graph.sources.push(SourceNode::new(name.text, m));
                    source_anchor.push(*name);
                }
            }
            Stmt::BeamSplitter { name, ports, time } => {
                let resolved: Vec<Option<usize>> = ports.iter().map(|p| resolve(p, diags)).collect();
                if let [Some(in_a), Some(in_b), Some(out_a), Some(out_b)] = resolved[..] {
                    let e = Element::BeamSplitter { label: name.text.into(), in_a, in_b, out_a, out_b, time: *time };
                    elements.push((*time, elements.len(), e, *name));
                }
            }
            Stmt::Phase { mode, theta, time } => {
                if let Some(m) = resolve(mode, diags) {
                    let e = Element::Phase { shifter: PhaseShifter { mode: m, theta: *theta }, time: *time };
                    elements.push((*time, elements.len(), e, *mode));
                }
            }
            Stmt::NDetector { name, mode, ancilla, interact, readout, basis } => {
                let m = resolve(mode, diags);
                used_ancillas.insert(ancilla.text);
                let a = space.ancilla(ancilla.text);
                if a.is_none() {
                    diags.error_at(ancilla, format!("undeclared ancilla `{}`", ancilla.text));
                }
                if let (Some(mode), Some(ancilla)) = (m, a) {
                    graph.ndetectors.push(NonAbsorbingDetector {
                        label: name.text.into(),
                        mode,
                        ancilla,
                        interaction_time: *interact,
                        readout_time: *readout,
                        basis: *basis,
                    });
                    nd_anchor.push(*name);
                }
            }
            Stmt::Detector { name, mode, time } => {
                if let Some(m) = resolve(mode, diags) {
                    graph.detectors.push(AbsorbingDetector { label: name.text.into(), mode: m, click_time: *time });
                    det_anchor.push(*name);
                }
            }
        }
    }
    elements.sort_by_key(|(t, i, ..)| (*t, *i));
    let el_anchor: Vec<Token<'a>> = elements.iter().map(|(.., a)| *a).collect();
    graph.elements = elements.into_iter().map(|(_, _, e, _)| e).collect();

    if diags.has_errors() {
        return None;
    }
    for t in &mode_order {
        if !used_modes.contains(t.text) {
            diags.push(Severity::Warning, t.line, t.col, t.text, format!("mode `{}` is never used", t.text));
        }
    }
    for t in ancilla_decl.values() {
        if !used_ancillas.contains(t.text) {
            diags.push(Severity::Warning, t.line, t.col, t.text, format!("ancilla `{}` is never used", t.text));
        }
    }

    for v in graph.violations() {
        let anchor = match v.subject {
            Subject::Source(i) => source_anchor.get(i),
            Subject::Element(i) => el_anchor.get(i),
            Subject::NDetector(i) => nd_anchor.get(i),
            Subject::Detector(i) => det_anchor.get(i),
            Subject::Mode(i) => mode_order.get(i),
            Subject::Ancilla(_) | Subject::Graph => None,
        };
        match anchor {
            Some(t) => diags.error_at(t, v.message),
            None => diags.push(Severity::Error, 1, 1, "", v.message),
        }
    }
    Some(graph)
}
