//! A line-oriented text format for profile systems.
//!
//! ```text
//! # comment
//! agents Alice Bob
//! param v >= 1
//! def d(n) = node Alice l (node Bob r d(n+1) (leaf { Alice: n + 1, Bob: n + v })) (leaf { Alice: n + v, Bob: n })
//! root d(0)
//! ```
//!
//! A child is a reference `name(n)` / `name(n+K)` or a parenthesized body.
//! Utilities are affine in `n` and the declared parameters, with `*` only by
//! an integer literal.

use std::fmt::{self, Write as _};

use crate::affine::AffineExpr;
use crate::model::{AgentId, Child, Choice, Diagnostic, ProfileDef, ProfileSystem, Ref, Root, UtilityFn};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("invalid system: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
        }
    }
}

const SYMBOLS: [&str; 11] = [">=", "=", "(", ")", "{", "}", ":", ",", "+", "-", "*"];

struct Lexer {
    line: usize,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

impl Lexer {
    fn new(line_no: usize, text: &str) -> Result<Self, ParseError> {
        let mut toks = Vec::new();
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        'outer: while i < chars.len() {
            let c = chars[i];
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let col = i + 1;
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse().map_err(|_| syntax(line_no, col, format!("integer `{s}` out of range")))?;
                toks.push((Tok::Int(v), col));
                continue;
            }
            for sym in SYMBOLS {
                let sc: Vec<char> = sym.chars().collect();
                if chars[i..].starts_with(&sc) {
                    toks.push((Tok::Sym(sym), col));
                    i += sc.len();
                    continue 'outer;
                }
            }
            return Err(syntax(line_no, col, format!("unexpected character `{c}`")));
        }
        Ok(Self {
            line: line_no,
            toks,
            pos: 0,
            end_col: text.chars().count() + 1,
        })
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        syntax(self.line, self.col(), message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self, what: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some((t, _)) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.err(format!("expected {what}, found end of line"))),
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == sym => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected `{sym}`, found {t}"))),
            None => Err(self.err(format!("expected `{sym}`, found end of line"))),
        }
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        let col = self.col();
        match self.next(what)? {
            Tok::Ident(s) => Ok(s),
            t => Err(syntax(self.line, col, format!("expected {what}, found {t}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let col = self.col();
        match self.next(&format!("`{kw}`"))? {
            Tok::Ident(s) if s == kw => Ok(()),
            t => Err(syntax(self.line, col, format!("expected `{kw}`, found {t}"))),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat_sym("-");
        let col = self.col();
        match self.next("an integer")? {
            Tok::Int(v) => Ok(if neg { -v } else { v }),
            t => Err(syntax(self.line, col, format!("expected an integer, found {t}"))),
        }
    }

    fn done(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.err(format!("unexpected {t} after the end of the statement"))),
        }
    }

    fn body(&mut self) -> Result<ProfileDef, ParseError> {
        let col = self.col();
        match self.ident("`leaf` or `node`")?.as_str() {
            "leaf" => self.leaf(),
            "node" => {
                let agent = self.ident("an agent")?;
                let col = self.col();
                let choice = match self.ident("`l` or `r`")?.as_str() {
                    "l" => Choice::Left,
                    "r" => Choice::Right,
                    other => return Err(syntax(self.line, col, format!("expected `l` or `r`, found `{other}`"))),
                };
                let left = self.child()?;
                let right = self.child()?;
                Ok(ProfileDef::node(AgentId::new(agent), choice, left, right))
            }
            other => Err(syntax(self.line, col, format!("expected `leaf` or `node`, found `{other}`"))),
        }
    }

    fn leaf(&mut self) -> Result<ProfileDef, ParseError> {
        self.expect_sym("{")?;
        let mut f = UtilityFn::new();
        if !self.eat_sym("}") {
            loop {
                let col = self.col();
                let agent = AgentId::new(self.ident("an agent")?);
                self.expect_sym(":")?;
                let e = self.expr()?;
                if f.insert(agent.clone(), e).is_some() {
                    return Err(syntax(self.line, col, format!("utility for `{agent}` given twice")));
                }
                if self.eat_sym("}") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        Ok(ProfileDef::Leaf(f))
    }

    fn child(&mut self) -> Result<Child, ParseError> {
        if self.eat_sym("(") {
            let b = self.body()?;
            self.expect_sym(")")?;
            return Ok(Child::Inline(b));
        }
        let target = self.ident("a reference or `(`")?;
        self.expect_sym("(")?;
        self.keyword("n")?;
        let shift = if self.eat_sym("+") {
            let col = self.col();
            match self.next("a shift")? {
                Tok::Int(k) => k as u64,
                t => return Err(syntax(self.line, col, format!("expected a shift, found {t}"))),
            }
        } else if matches!(self.peek(), Some(Tok::Sym("-"))) {
            return Err(self.err("negative shift"));
        } else {
            0
        };
        self.expect_sym(")")?;
        Ok(Child::Ref(Ref::new(target, shift)))
    }

    fn expr(&mut self) -> Result<AffineExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat_sym("+") {
                acc = acc + self.term()?;
            } else if self.eat_sym("-") {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<AffineExpr, ParseError> {
        if self.eat_sym("-") {
            return Ok(-self.term()?);
        }
        let col = self.col();
        match self.next("a term")? {
            Tok::Int(k) => {
                if self.eat_sym("*") {
                    Ok(self.atom()? * k)
                } else {
                    Ok(AffineExpr::constant(k))
                }
            }
            Tok::Ident(name) => {
                let a = atom_of(name);
                if self.eat_sym("*") {
                    let k = self.int()?;
                    Ok(a * k)
                } else {
                    Ok(a)
                }
            }
            t => Err(syntax(self.line, col, format!("expected a term, found {t}"))),
        }
    }

    fn atom(&mut self) -> Result<AffineExpr, ParseError> {
        Ok(atom_of(self.ident("`n` or a parameter")?))
    }
}

fn atom_of(name: String) -> AffineExpr {
    if name == "n" {
        AffineExpr::n()
    } else {
        AffineExpr::param(name)
    }
}

/// Parses and validates a system. Syntax errors stop at the first one;
/// validation reports every diagnostic.
pub fn parse(text: &str) -> Result<ProfileSystem, ParseError> {
    let mut agents: Option<Vec<AgentId>> = None;
    let mut sys = ProfileSystem::new(Vec::<AgentId>::new(), "", 0);
    let mut root: Option<Root> = None;
    for (i, raw) in text.lines().enumerate() {
        let mut lx = Lexer::new(i + 1, raw)?;
        let Some(first) = lx.peek().cloned() else {
            continue;
        };
        let col = lx.col();
        let Tok::Ident(kw) = first else {
            return Err(lx.err(format!("expected a statement, found {first}")));
        };
        lx.pos += 1;
        match kw.as_str() {
            "agents" => {
                if agents.is_some() {
                    return Err(syntax(i + 1, col, "agents declared twice"));
                }
                let mut list = Vec::new();
                while lx.peek().is_some() {
                    list.push(AgentId::new(lx.ident("an agent")?));
                }
                agents = Some(list);
            }
            "param" => {
                let name = lx.ident("a parameter name")?;
                if name == "n" {
                    return Err(syntax(i + 1, col, "`n` is reserved"));
                }
                lx.expect_sym(">=")?;
                let bound = lx.int()?;
                if sys.params.insert(name.clone(), bound).is_some() {
                    return Err(syntax(i + 1, col, format!("parameter `{name}` declared twice")));
                }
            }
            "def" => {
                let name = lx.ident("a definition name")?;
                lx.expect_sym("(")?;
                lx.keyword("n")?;
                lx.expect_sym(")")?;
                lx.expect_sym("=")?;
                let body = lx.body()?;
                if sys.defs.insert(name.clone(), body).is_some() {
                    return Err(syntax(i + 1, col, format!("definition `{name}` given twice")));
                }
            }
            "root" => {
                if root.is_some() {
                    return Err(syntax(i + 1, col, "root declared twice"));
                }
                let def = lx.ident("a definition name")?;
                lx.expect_sym("(")?;
                let n0 = lx.int()?;
                if n0 < 0 {
                    return Err(syntax(i + 1, col, "root index must be non-negative"));
                }
                lx.expect_sym(")")?;
                root = Some(Root { def, n0: n0 as u64 });
            }
            other => return Err(syntax(i + 1, col, format!("unknown statement `{other}`"))),
        }
        lx.done()?;
    }
    let end = text.lines().count() + 1;
    sys.agents = agents.ok_or_else(|| syntax(end, 1, "missing `agents` line"))?;
    sys.root = root.ok_or_else(|| syntax(end, 1, "missing `root` line"))?;
    let diags = sys.validate();
    if diags.is_empty() {
        Ok(sys)
    } else {
        Err(ParseError::Invalid(diags))
    }
}

/// A single `leaf { ... }` body, as used for padding files.
pub fn parse_leaf(text: &str) -> Result<UtilityFn, ParseError> {
    let mut found = None;
    for (i, raw) in text.lines().enumerate() {
        let mut lx = Lexer::new(i + 1, raw)?;
        if lx.peek().is_none() {
            continue;
        }
        if found.is_some() {
            return Err(lx.err("expected a single leaf"));
        }
        lx.keyword("leaf")?;
        let ProfileDef::Leaf(f) = lx.leaf()? else {
            unreachable!()
        };
        lx.done()?;
        found = Some(f);
    }
    found.ok_or_else(|| syntax(1, 1, "expected `leaf { ... }`"))
}

fn print_body(out: &mut String, d: &ProfileDef) {
    match d {
        ProfileDef::Leaf(f) => {
            out.push_str("leaf {");
            for (i, (a, e)) in f.iter().enumerate() {
                let sep = if i == 0 { " " } else { ", " };
                let _ = write!(out, "{sep}{a}: {e}");
            }
            out.push_str(" }");
        }
        ProfileDef::Node {
            agent,
            choice,
            left,
            right,
        } => {
            let _ = write!(out, "node {agent} {choice}");
            for c in [left, right] {
                out.push(' ');
                match c.as_ref() {
                    Child::Ref(r) if r.shift == 0 => {
                        let _ = write!(out, "{}(n)", r.target);
                    }
                    Child::Ref(r) => {
                        let _ = write!(out, "{}(n+{})", r.target, r.shift);
                    }
                    Child::Inline(b) => {
                        out.push('(');
                        print_body(out, b);
                        out.push(')');
                    }
                }
            }
        }
    }
}

/// Normal form: agents in declaration order, parameters and definitions by
/// name, leaf entries by agent, expressions in canonical form.
pub fn print(sys: &ProfileSystem) -> String {
    let mut out = String::new();
    out.push_str("agents");
    for a in &sys.agents {
        let _ = write!(out, " {a}");
    }
    out.push('\n');
    for (p, b) in &sys.params {
        let _ = writeln!(out, "param {p} >= {b}");
    }
    for (name, d) in &sys.defs {
        let _ = write!(out, "def {name}(n) = ");
        print_body(&mut out, d);
        out.push('\n');
    }
    let _ = writeln!(out, "root {}({})", sys.root.def, sys.root.n0);
    out
}

/// Renders a utility function as a `leaf { ... }` body.
pub fn print_leaf(f: &UtilityFn) -> String {
    let mut out = String::new();
    print_body(&mut out, &ProfileDef::Leaf(f.clone()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dollar::{build_profile, DollarConfig, DollarProfile};
    use crate::model::{bisimilar, Graph, ProfileInstance};
    use proptest::prelude::*;

    const DOLLAR: &str = "agents Alice Bob
param v >= 1
def dolAcBs(n) = node Alice l (node Bob r dolAcBs(n+1) (leaf { Alice: n + 1, Bob: n + v })) (leaf { Alice: n + v, Bob: n })
root dolAcBs(0)
";

    #[test]
    fn dollar_text_matches_builder() {
        let sys = parse(DOLLAR).unwrap();
        let built = build_profile(DollarProfile::AcBs, &DollarConfig::default());
        assert_eq!(sys, built);
        let (g1, g2) = (Graph::new(sys).unwrap(), Graph::new(built).unwrap());
        let i = ProfileInstance::symbolic("dolAcBs", 0);
        assert!(bisimilar(&g1, &i, &g2, &i).unwrap());
        assert_eq!(print(g1.system()), DOLLAR);
    }

    #[test]
    fn one_leaf() {
        let sys = parse("agents A\ndef x(n) = leaf { A: 0 }\nroot x(0)").unwrap();
        assert_eq!(sys.defs.len(), 1);
        assert_eq!(sys.defs["x"], ProfileDef::leaf([("A", 0)]));
    }

    #[test]
    fn negative_shift_is_rejected() {
        let err = parse("agents A\ndef x(n) = node A l x(n-1) x(n)\nroot x(0)").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: 2,
                col: 24,
                message: "negative shift".into()
            }
        );
    }

    #[test]
    fn validation_diagnostics_surface() {
        let err = parse("agents A\ndef x(n) = node B l y(n) (leaf { A: w })\nroot x(0)").unwrap_err();
        let ParseError::Invalid(d) = err else { panic!() };
        assert_eq!(d.len(), 3, "{d:?}");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("agents A\n\ndef x(n) = leaf { A: 0 \nroot x(0)").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 3, .. }), "{err}");
        let err = parse("agents A\ndef x(n) leaf { A: 0 }\nroot x(0)").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }), "{err}");
        assert!(parse("agents A\nroot x(0)\nbogus").is_err());
        assert!(parse("def x(n) = leaf { A: 0 }").is_err());
    }

    #[test]
    fn expressions() {
        let f = parse_leaf("leaf { A: -2*n + 3, B: v*2 - 1, C: -(n) }");
        assert!(f.is_err());
        let f = parse_leaf("# padding\nleaf { A: -2*n + 3, B: v*2 - 1, C: - n - -1 }").unwrap();
        assert_eq!(f[&AgentId::from("A")].to_string(), "-2*n + 3");
        assert_eq!(f[&AgentId::from("B")].to_string(), "2*v - 1");
        assert_eq!(f[&AgentId::from("C")].to_string(), "-n + 1");
    }

    fn arb_expr() -> impl Strategy<Value = AffineExpr> {
        (-3i64..=3, -3i64..=3, -3i64..=3, -5i64..=5).prop_map(|(a, b, c, k)| {
            AffineExpr::n() * a + AffineExpr::param("v") * b + AffineExpr::param("w") * c + AffineExpr::constant(k)
        })
    }

    proptest! {
        #[test]
        fn printed_expressions_parse_back(e in arb_expr()) {
            let f: UtilityFn = [(AgentId::from("A"), e)].into();
            prop_assert_eq!(parse_leaf(&print_leaf(&f)).unwrap(), f);
        }

        #[test]
        fn random_systems_round_trip(seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let sys = crate::generate::random_affine_system(&mut rng);
            let text = print(&sys);
            let back = parse(&text).unwrap();
            prop_assert_eq!(&back, &sys);
            prop_assert_eq!(print(&back), text);
        }
    }
}
