//! Bounded existential formulas: a single block of existential quantifiers
//! over domain tuples of a finite partial function, with a quantifier-free
//! matrix in disjunctive normal form over <, =, > atoms.
//!
//! Concrete syntax:
//!
//! ```text
//! formula := "bef" "q=" NAT "t=" NAT "r=" NAT ":" dnf
//! dnf     := conj { "|" conj }
//! conj    := lit { "&" lit }
//! lit     := [ "!" ] atom
//! atom    := term ("<" | "=" | ">") term
//! term    := "x" NAT | "y" NAT | "f" NAT
//! ```
//!
//! Parentheses around a conjunction or an atom are accepted on input; the
//! printer emits the canonical unparenthesized form. x-indices range over
//! 1..q, y-indices over 1..r*t, and f-indices over 1..t, where `f j` denotes
//! the function symbol applied to the j-th r-block of y.

use std::fmt;

use crate::error::{Error, Result};
use crate::tuple::{ScalarMap, Tuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    X(usize),
    Y(usize),
    F(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cmp {
    Lt,
    Eq,
    Gt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub lhs: Term,
    pub op: Cmp,
    pub rhs: Term,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub negated: bool,
    pub atom: Atom,
}

/// A parsed bounded existential formula with declared shape (q, t, r).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BefFormula {
    pub q: usize,
    pub t: usize,
    pub r: usize,
    /// Disjunction of conjunctions of literals.
    pub matrix: Vec<Vec<Literal>>,
}

impl BefFormula {
    /// True when some literal mentions an f-term under negation; the
    /// monotonicity law is only asserted for formulas without such literals.
    pub fn has_negated_f_atom(&self) -> bool {
        self.matrix.iter().flatten().any(|lit| {
            lit.negated
                && (matches!(lit.atom.lhs, Term::F(_)) || matches!(lit.atom.rhs, Term::F(_)))
        })
    }

    /// Truth of the formula in `f` at the given q arguments: some assignment
    /// of t domain-tuples, all coordinates below max(args), satisfies the
    /// matrix with each f-term bound to the value of `f` at its block.
    pub fn eval(&self, f: &ScalarMap, args: &[u64]) -> bool {
        assert_eq!(args.len(), self.q, "argument count must equal q");
        let bound = args.iter().copied().max().unwrap_or(0);
        let domain: Vec<&Tuple> = f
            .keys()
            .filter(|t| t.arity() == self.r && t.sup() < bound)
            .collect();
        let mut choice = vec![0usize; self.t];
        if domain.is_empty() {
            return false;
        }
        loop {
            let mut ys = Vec::with_capacity(self.r * self.t);
            let mut fs = Vec::with_capacity(self.t);
            for &c in &choice {
                let block = domain[c];
                ys.extend_from_slice(block.coords());
                fs.push(f[block]);
            }
            if self.eval_matrix(args, &ys, &fs) {
                return true;
            }
            let mut pos = self.t;
            loop {
                if pos == 0 {
                    return false;
                }
                pos -= 1;
                choice[pos] += 1;
                if choice[pos] < domain.len() {
                    break;
                }
                choice[pos] = 0;
            }
        }
    }

    fn eval_matrix(&self, xs: &[u64], ys: &[u64], fs: &[u64]) -> bool {
        let term = |t: Term| match t {
            Term::X(i) => xs[i - 1],
            Term::Y(i) => ys[i - 1],
            Term::F(j) => fs[j - 1],
        };
        self.matrix.iter().any(|conj| {
            conj.iter().all(|lit| {
                let a = term(lit.atom.lhs);
                let b = term(lit.atom.rhs);
                let truth = match lit.atom.op {
                    Cmp::Lt => a < b,
                    Cmp::Eq => a == b,
                    Cmp::Gt => a > b,
                };
                truth != lit.negated
            })
        })
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.q == 0 || self.t == 0 || self.r == 0 {
            return Err("q, t, r must all be positive".into());
        }
        for lit in self.matrix.iter().flatten() {
            for term in [lit.atom.lhs, lit.atom.rhs] {
                let (name, idx, max) = match term {
                    Term::X(i) => ("x", i, self.q),
                    Term::Y(i) => ("y", i, self.r * self.t),
                    Term::F(i) => ("f", i, self.t),
                };
                if idx == 0 || idx > max {
                    return Err(format!(
                        "index {name}{idx} out of range 1..{max} for declared shape"
                    ));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for BefFormula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "bef q={} t={} r={} : ", self.q, self.t, self.r)?;
        for (ci, conj) in self.matrix.iter().enumerate() {
            if ci > 0 {
                write!(out, " | ")?;
            }
            for (li, lit) in conj.iter().enumerate() {
                if li > 0 {
                    write!(out, " & ")?;
                }
                if lit.negated {
                    write!(out, "!")?;
                }
                let t = |t: Term| match t {
                    Term::X(i) => format!("x{i}"),
                    Term::Y(i) => format!("y{i}"),
                    Term::F(i) => format!("f{i}"),
                };
                let op = match lit.atom.op {
                    Cmp::Lt => "<",
                    Cmp::Eq => "=",
                    Cmp::Gt => ">",
                };
                write!(out, "{} {} {}", t(lit.atom.lhs), op, t(lit.atom.rhs))?;
            }
        }
        Ok(())
    }
}

pub fn parse_bef(text: &str) -> Result<BefFormula> {
    Parser::new(text).formula()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.bump();
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(got) if got == c => {
                self.bump();
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected '{}', found '{}'", c as char, got as char))),
            None => Err(self.err(format!("expected '{}', found end of input", c as char))),
        }
    }

    fn nat(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.bump();
        }
        if self.pos == start {
            return Err(self.err("expected a natural number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(kw.as_bytes()) {
            for _ in 0..kw.len() {
                self.bump();
            }
            Ok(())
        } else {
            Err(self.err(format!("expected '{kw}'")))
        }
    }

    fn formula(&mut self) -> Result<BefFormula> {
        self.keyword("bef")?;
        self.keyword("q")?;
        self.expect(b'=')?;
        let q = self.nat()?;
        self.keyword("t")?;
        self.expect(b'=')?;
        let t = self.nat()?;
        self.keyword("r")?;
        self.expect(b'=')?;
        let r = self.nat()?;
        self.expect(b':')?;
        let matrix = self.dnf()?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(self.err("trailing input after formula"));
        }
        let f = BefFormula { q, t, r, matrix };
        f.validate().map_err(|msg| self.err(msg))?;
        Ok(f)
    }

    fn dnf(&mut self) -> Result<Vec<Vec<Literal>>> {
        let mut conjs = vec![self.conj()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(b'|') {
                self.bump();
                conjs.push(self.conj()?);
            } else {
                return Ok(conjs);
            }
        }
    }

    fn conj(&mut self) -> Result<Vec<Literal>> {
        self.skip_ws();
        // parenthesized conjunction, as in "(a & b) | c"
        if self.peek() == Some(b'(') {
            let save = (self.pos, self.line, self.col);
            self.bump();
            if let Ok(inner) = self.conj() {
                self.skip_ws();
                if self.peek() == Some(b')') {
                    self.bump();
                    self.skip_ws();
                    // a ')' followed by '&' would mix grouping styles
                    if self.peek() != Some(b'&') {
                        return Ok(inner);
                    }
                }
            }
            (self.pos, self.line, self.col) = save;
        }
        let mut lits = vec![self.literal()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(b'&') {
                self.bump();
                lits.push(self.literal()?);
            } else {
                return Ok(lits);
            }
        }
    }

    fn literal(&mut self) -> Result<Literal> {
        self.skip_ws();
        let negated = if self.peek() == Some(b'!') {
            self.bump();
            true
        } else {
            false
        };
        let atom = self.atom()?;
        Ok(Literal { negated, atom })
    }

    fn atom(&mut self) -> Result<Atom> {
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.bump();
            let a = self.atom()?;
            self.expect(b')')?;
            return Ok(a);
        }
        let lhs = self.term()?;
        self.skip_ws();
        let op = match self.bump() {
            Some(b'<') => Cmp::Lt,
            Some(b'=') => Cmp::Eq,
            Some(b'>') => Cmp::Gt,
            _ => return Err(self.err("expected comparison operator '<', '=', or '>'")),
        };
        let rhs = self.term()?;
        Ok(Atom { lhs, op, rhs })
    }

    fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        let kind = self.bump();
        let idx = self.nat()?;
        match kind {
            Some(b'x') => Ok(Term::X(idx)),
            Some(b'y') => Ok(Term::Y(idx)),
            Some(b'f') => Ok(Term::F(idx)),
            _ => Err(self.err("expected a term: xN, yN, or fN")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom() {
        let f = parse_bef("bef q=2 t=1 r=1 : f1 < x2").unwrap();
        assert_eq!((f.q, f.t, f.r), (2, 1, 1));
        assert_eq!(f.matrix.len(), 1);
        assert_eq!(f.matrix[0].len(), 1);
    }

    #[test]
    fn parenthesized_dnf() {
        let f = parse_bef("bef q=2 t=1 r=1 : (y1 < x1 & f1 = x2) | !(x1 < x2)").unwrap();
        assert_eq!(f.matrix.len(), 2);
        assert_eq!(f.matrix[0].len(), 2);
        assert!(f.matrix[1][0].negated);
    }

    #[test]
    fn f_index_out_of_range() {
        let e = parse_bef("bef q=1 t=1 r=1 : f2 < x1").unwrap_err();
        assert!(e.to_string().contains("out of range"), "{e}");
    }

    #[test]
    fn printer_round_trip() {
        let texts = [
            "bef q=2 t=1 r=1 : f1 < x2",
            "bef q=2 t=1 r=1 : y1 < x1 & f1 = x2 | !x1 < x2",
            "bef q=3 t=2 r=2 : y1 < y4 & !f2 > x3",
        ];
        for t in texts {
            let ast = parse_bef(t).unwrap();
            assert_eq!(ast.to_string(), t);
            assert_eq!(parse_bef(&ast.to_string()).unwrap(), ast);
        }
    }

    #[test]
    fn empty_function_is_always_false() {
        let f = parse_bef("bef q=1 t=1 r=1 : x1 = x1").unwrap();
        assert!(!f.eval(&ScalarMap::new(), &[5]));
    }

    #[test]
    fn tautology_with_witness() {
        let f = parse_bef("bef q=1 t=1 r=1 : x1 = x1").unwrap();
        let mut m = ScalarMap::new();
        m.insert(Tuple::scalar(0), 0);
        assert!(f.eval(&m, &[1]));
        assert!(!f.eval(&m, &[0])); // no block below the bound
    }

    #[test]
    fn enumerates_witnesses() {
        let f = parse_bef("bef q=2 t=1 r=1 : f1 < x1").unwrap();
        let mut m = ScalarMap::new();
        m.insert(Tuple::scalar(0), 0);
        m.insert(Tuple::scalar(2), 0);
        assert!(f.eval(&m, &[3, 5]));
        assert!(!f.eval(&m, &[0, 1]));
    }

    #[test]
    fn error_carries_position() {
        match parse_bef("bef q=2 t=1 r=1 :\n  f1 << x2") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
