//! Abstract syntax of BBI formulae and the ASCII concrete syntax.
//!
//! Tokens: `T` (top), `F` (bottom), `T*` or `emp` (multiplicative unit),
//! `~`, `&`, `|`, `->`, `*`, `-*`, parentheses and identifiers.
//! Binding strength, tightest first: `~`, `*`, `&`, `|`, `-*`, `->`.
//! Every binary connective associates to the right.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A BBI formula.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Arc<str>),
    Top,
    Bot,
    /// The multiplicative unit, written `T*`.
    MEmp,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Star(Box<Formula>, Box<Formula>),
    Wand(Box<Formula>, Box<Formula>),
}

/// Binary connectives, used for generic construction and printing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    And,
    Or,
    Imp,
    Star,
    Wand,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Star => 5,
            BinOp::And => 4,
            BinOp::Or => 3,
            BinOp::Wand => 2,
            BinOp::Imp => 1,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Imp => "->",
            BinOp::Star => "*",
            BinOp::Wand => "-*",
        }
    }
}

const NOT_PRECEDENCE: u8 = 6;
const ATOMIC_PRECEDENCE: u8 = 7;

/// Words that may not be used as atom names.
///
/// `T`, `F` and `emp` are constants; `eps` is the spelling of the unit label
/// in proof files and is kept out of the atom namespace to avoid confusion.
pub const RESERVED: [&str; 4] = ["T", "F", "emp", "eps"];

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(Arc::from(name))
    }

    pub fn negation(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn binary(op: BinOp, l: Formula, r: Formula) -> Formula {
        let (l, r) = (Box::new(l), Box::new(r));
        match op {
            BinOp::And => Formula::And(l, r),
            BinOp::Or => Formula::Or(l, r),
            BinOp::Imp => Formula::Imp(l, r),
            BinOp::Star => Formula::Star(l, r),
            BinOp::Wand => Formula::Wand(l, r),
        }
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::binary(BinOp::And, l, r)
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::binary(BinOp::Or, l, r)
    }

    pub fn imp(l: Formula, r: Formula) -> Formula {
        Formula::binary(BinOp::Imp, l, r)
    }

    pub fn star(l: Formula, r: Formula) -> Formula {
        Formula::binary(BinOp::Star, l, r)
    }

    pub fn wand(l: Formula, r: Formula) -> Formula {
        Formula::binary(BinOp::Wand, l, r)
    }

    /// Splits a binary formula into its connective and operands.
    pub fn as_binary(&self) -> Option<(BinOp, &Formula, &Formula)> {
        match self {
            Formula::And(l, r) => Some((BinOp::And, l, r)),
            Formula::Or(l, r) => Some((BinOp::Or, l, r)),
            Formula::Imp(l, r) => Some((BinOp::Imp, l, r)),
            Formula::Star(l, r) => Some((BinOp::Star, l, r)),
            Formula::Wand(l, r) => Some((BinOp::Wand, l, r)),
            _ => None,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(_))
    }

    /// Number of connectives; the units count as zero-ary connectives.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Top | Formula::Bot | Formula::MEmp => 1,
            Formula::Not(f) => 1 + f.size(),
            _ => {
                let (_, l, r) = self.as_binary().expect("binary");
                1 + l.size() + r.size()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bot | Formula::MEmp => 0,
            Formula::Not(f) => 1 + f.depth(),
            _ => {
                let (_, l, r) = self.as_binary().expect("binary");
                1 + l.depth().max(r.depth())
            }
        }
    }

    /// Atom names occurring in the formula, sorted.
    pub fn atoms(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Top | Formula::Bot | Formula::MEmp => {}
            Formula::Not(f) => f.collect_atoms(out),
            _ => {
                let (_, l, r) = self.as_binary().expect("binary");
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Not(_) => NOT_PRECEDENCE,
            _ => match self.as_binary() {
                Some((op, _, _)) => op.precedence(),
                None => ATOMIC_PRECEDENCE,
            },
        }
    }
}

/// Renders a formula with the minimal parentheses needed to re-parse it.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Atom(a) => out.push_str(a),
        Formula::Top => out.push('T'),
        Formula::Bot => out.push('F'),
        Formula::MEmp => out.push_str("T*"),
        Formula::Not(g) => {
            out.push('~');
            write_operand(g, g.precedence() < NOT_PRECEDENCE, out);
        }
        _ => {
            let (op, l, r) = f.as_binary().expect("binary");
            let p = op.precedence();
            write_operand(l, l.precedence() <= p, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_operand(r, r.precedence() < p, out);
        }
    }
}

fn write_operand(f: &Formula, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Errors reported by [`parse`]. Positions are byte offsets into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character {found:?} at offset {pos}")]
    Lexical { pos: usize, found: char },
    #[error("syntax error at offset {pos}: found {found}, expected one of {}", expected.join(", "))]
    Syntax {
        pos: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("reserved word `{word}` at offset {pos} cannot name an atom")]
    ReservedWord { pos: usize, word: String },
    #[error("formula nests deeper than {MAX_NESTING} levels at offset {pos}")]
    TooDeep { pos: usize },
}

/// Deepest operator nesting [`parse`] accepts.
pub const MAX_NESTING: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Top,
    Bot,
    Emp,
    Not,
    Bin(BinOp),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("atom `{s}`"),
            Tok::Top => "`T`".into(),
            Tok::Bot => "`F`".into(),
            Tok::Emp => "`T*`".into(),
            Tok::Not => "`~`".into(),
            Tok::Bin(op) => format!("`{}`", op.symbol()),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => toks.push((start, Tok::LParen)),
            b')' => toks.push((start, Tok::RParen)),
            b'~' => toks.push((start, Tok::Not)),
            b'&' => toks.push((start, Tok::Bin(BinOp::And))),
            b'|' => toks.push((start, Tok::Bin(BinOp::Or))),
            b'*' => toks.push((start, Tok::Bin(BinOp::Star))),
            b'-' => match bytes.get(i + 1) {
                Some(b'>') => {
                    toks.push((start, Tok::Bin(BinOp::Imp)));
                    i += 1;
                }
                Some(b'*') => {
                    toks.push((start, Tok::Bin(BinOp::Wand)));
                    i += 1;
                }
                _ => {
                    let found = text[i + 1..].chars().next().unwrap_or('-');
                    return Err(ParseError::Lexical {
                        pos: i + 1,
                        found,
                    });
                }
            },
            c if c.is_ascii_alphabetic() => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = &text[i..j];
                let tok = match word {
                    "T" if bytes.get(j) == Some(&b'*') => {
                        j += 1;
                        Tok::Emp
                    }
                    "T" => Tok::Top,
                    "F" => Tok::Bot,
                    "emp" => Tok::Emp,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((start, tok));
                i = j;
                continue;
            }
            _ => {
                let found = text[i..].chars().next().expect("non-empty");
                return Err(ParseError::Lexical { pos: i, found });
            }
        }
        i += 1;
    }
    toks.push((text.len(), Tok::End));
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &(usize, Tok) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax_error(&self, expected: &[&str]) -> ParseError {
        let (pos, tok) = self.peek();
        ParseError::Syntax {
            pos: *pos,
            found: tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Precedence climbing; right associativity means the right operand is
    /// parsed at the same minimum precedence as the operator itself.
    fn formula(&mut self, min_prec: u8) -> Result<Formula, ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ParseError::TooDeep { pos: self.peek().0 });
        }
        let f = self.climb(min_prec);
        self.depth -= 1;
        f
    }

    fn climb(&mut self, min_prec: u8) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match &self.peek().1 {
                Tok::Bin(op) if op.precedence() >= min_prec => *op,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.formula(op.precedence())?;
            lhs = Formula::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        const OPERAND: [&str; 7] = ["atom", "`T`", "`F`", "`T*`", "`emp`", "`~`", "`(`"];
        let (pos, tok) = self.peek().clone();
        match tok {
            Tok::Not => {
                self.bump();
                self.depth += 1;
                if self.depth > MAX_NESTING {
                    return Err(ParseError::TooDeep { pos });
                }
                let f = self.unary()?;
                self.depth -= 1;
                Ok(Formula::negation(f))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula(0)?;
                match self.peek().1 {
                    Tok::RParen => {
                        self.bump();
                        Ok(f)
                    }
                    _ => Err(self.syntax_error(&["binary connective", "`)`"])),
                }
            }
            Tok::Top => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Bot => {
                self.bump();
                Ok(Formula::Bot)
            }
            Tok::Emp => {
                self.bump();
                Ok(Formula::MEmp)
            }
            Tok::Ident(name) => {
                if RESERVED.contains(&name.as_str()) {
                    return Err(ParseError::ReservedWord { pos, word: name });
                }
                self.bump();
                Ok(Formula::atom(&name))
            }
            _ => Err(self.syntax_error(&OPERAND)),
        }
    }
}

/// Parses a formula from its ASCII concrete syntax.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        depth: 0,
    };
    let f = p.formula(0)?;
    match p.peek().1 {
        Tok::End => Ok(f),
        _ => Err(p.syntax_error(&["binary connective", "end of input"])),
    }
}

/// One formula read from a suite file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteEntry {
    /// 1-based line number in the suite file.
    pub line: usize,
    pub text: String,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {source}")]
pub struct SuiteError {
    pub line: usize,
    #[source]
    pub source: ParseError,
}

/// Parses a suite file: one formula per line, `#` starts a comment, blank
/// lines are ignored.
pub fn parse_suite(text: &str) -> Result<Vec<SuiteEntry>, SuiteError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let formula = parse(body).map_err(|source| SuiteError { line: i + 1, source })?;
        out.push(SuiteEntry {
            line: i + 1,
            text: body.to_string(),
            formula,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Formula {
        Formula::atom(n)
    }

    #[test]
    fn parses_documented_examples() {
        assert_eq!(
            parse("a -> T* * a").unwrap(),
            Formula::imp(a("a"), Formula::star(Formula::MEmp, a("a")))
        );
        assert_eq!(parse("T").unwrap(), Formula::Top);
        assert_eq!(
            parse("a * b -> c").unwrap(),
            Formula::imp(Formula::star(a("a"), a("b")), a("c"))
        );
        let expected = Formula::negation(Formula::and(
            Formula::wand(a("a"), Formula::negation(Formula::star(a("a"), a("b")))),
            Formula::and(
                Formula::wand(Formula::negation(a("a")), Formula::negation(a("b"))),
                a("b"),
            ),
        ));
        assert_eq!(
            parse("~((a -* ~(a * b)) & ((~a -* ~b) & b))").unwrap(),
            expected
        );
    }

    #[test]
    fn unit_token_is_longest_match() {
        assert_eq!(parse("T*").unwrap(), Formula::MEmp);
        assert_eq!(parse("emp").unwrap(), Formula::MEmp);
        assert_eq!(
            parse("T * a").unwrap(),
            Formula::star(Formula::Top, a("a"))
        );
        assert_eq!(
            parse("T** a").unwrap(),
            Formula::star(Formula::MEmp, a("a"))
        );
    }

    #[test]
    fn binaries_are_right_associative() {
        assert_eq!(
            parse("a -> b -> c").unwrap(),
            Formula::imp(a("a"), Formula::imp(a("b"), a("c")))
        );
        assert_eq!(
            parse("a * b * c").unwrap(),
            Formula::star(a("a"), Formula::star(a("b"), a("c")))
        );
        assert_eq!(
            parse("a -* b -> c").unwrap(),
            Formula::imp(Formula::wand(a("a"), a("b")), a("c"))
        );
    }

    #[test]
    fn prints_minimal_parentheses() {
        let f = Formula::imp(a("a"), Formula::star(Formula::MEmp, a("a")));
        assert_eq!(print(&f), "a -> T* * a");
        assert_eq!(print(&Formula::Top), "T");
        let f = Formula::star(Formula::star(a("a"), a("b")), a("c"));
        assert_eq!(print(&f), "(a * b) * c");
        let f = Formula::negation(Formula::negation(Formula::MEmp));
        assert_eq!(print(&f), "~~T*");
        let f = Formula::star(Formula::Top, a("a"));
        assert_eq!(parse(&print(&f)).unwrap(), f);
    }

    #[test]
    fn reports_errors() {
        assert!(matches!(parse("a $ b"), Err(ParseError::Lexical { pos: 2, found: '$' })));
        assert!(matches!(parse("a - b"), Err(ParseError::Lexical { pos: 3, .. })));
        match parse("a &") {
            Err(ParseError::Syntax { pos, expected, .. }) => {
                assert_eq!(pos, 3);
                assert!(expected.contains(&"`(`".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("(a"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("a b"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(
            parse("eps & a"),
            Err(ParseError::ReservedWord { pos: 0, .. })
        ));
        assert!(parse("").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error() {
        let n = MAX_NESTING * 4;
        for text in ["(".repeat(n) + "a" + &")".repeat(n), "~".repeat(n) + "a", "a * ".repeat(n) + "a"] {
            assert!(matches!(parse(&text), Err(ParseError::TooDeep { .. })));
        }
        assert!(parse(&("~".repeat(100) + "a")).is_ok());
    }

    #[test]
    fn size_counts_connectives() {
        assert_eq!(parse("a").unwrap().size(), 0);
        assert_eq!(parse("a -> T* * a").unwrap().size(), 3);
        assert_eq!(parse("~(a & b)").unwrap().size(), 2);
    }

    #[test]
    fn suite_skips_comments_and_blanks() {
        let text = "# header\n\na -> a   # trailing\n  T*\n";
        let suite = parse_suite(text).unwrap();
        assert_eq!(suite.len(), 2);
        assert_eq!(suite[0].line, 3);
        assert_eq!(suite[0].text, "a -> a");
        assert_eq!(suite[1].formula, Formula::MEmp);
        let err = parse_suite("a\n(b\n").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
