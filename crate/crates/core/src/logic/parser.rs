use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::{free_vars, Bound, Formula, Func, PathVar, ProbBody, ProbTerm, Rel};
use crate::numeric::parse_rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("column {col}: {message}")]
    Syntax { col: usize, message: String },
    #[error("column {col}: path variable `{var}` is already quantified in this scope")]
    NotFresh { col: usize, var: String },
    #[error("formula must be closed but has free path variables: {vars}")]
    NotClosed { vars: String },
}

impl ParseError {
    fn col(&self) -> usize {
        match self {
            ParseError::Syntax { col, .. } | ParseError::NotFresh { col, .. } => *col,
            ParseError::NotClosed { .. } => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    At,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Bang,
    Amp,
    Bar,
    Implies,
    Lt,
    Le,
    Gt,
    Ge,
    EqSign,
    Plus,
    Minus,
    Star,
    Slash,
    Tilde,
    Caret,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Num(s) => format!("`{s}`"),
            Tok::End => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::At => "@",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Implies => "=>",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqSign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Tilde => "~",
            Tok::Caret => "^",
            _ => "",
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            out.push((Tok::Num(chars[start..i].iter().collect()), col));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('=', Some('>')) => (Tok::Implies, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('&', Some('&')) => (Tok::Amp, 2),
            ('|', Some('|')) => (Tok::Bar, 2),
            ('@', _) => (Tok::At, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            (',', _) => (Tok::Comma, 1),
            ('!', _) | ('¬', _) => (Tok::Bang, 1),
            ('&', _) | ('∧', _) => (Tok::Amp, 1),
            ('|', _) | ('∨', _) => (Tok::Bar, 1),
            ('⇒', _) | ('→', _) => (Tok::Implies, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('≤', _) => (Tok::Le, 1),
            ('≥', _) => (Tok::Ge, 1),
            ('=', _) => (Tok::EqSign, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) | ('−', _) => (Tok::Minus, 1),
            ('*', _) | ('×', _) => (Tok::Star, 1),
            ('/', _) | ('÷', _) => (Tok::Slash, 1),
            ('~', _) | ('≈', _) => (Tok::Tilde, 1),
            ('^', _) => (Tok::Caret, 1),
            _ => {
                return Err(ParseError::Syntax {
                    col,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((tok, col));
        i += len;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    scope: Vec<PathVar>,
}

type PResult<T> = Result<T, ParseError>;

/// Parses a formula; derived operators are desugared into the core AST.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        scope: Vec::new(),
    };
    let f = p.implies()?;
    p.expect(&Tok::End)?;
    Ok(f)
}

/// Like [`parse_formula`] but rejects formulas with free path variables.
pub fn parse_closed_formula(text: &str) -> Result<Formula, ParseError> {
    let f = parse_formula(text)?;
    let free = free_vars(&f);
    if free.is_empty() {
        Ok(f)
    } else {
        let vars: Vec<_> = free.iter().map(|v| v.0.as_str()).collect();
        Err(ParseError::NotClosed {
            vars: vars.join(", "),
        })
    }
}

const KEYWORDS: &[&str] = &["X", "F", "G", "U", "P", "true", "false", "pow", "exp", "ln"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError::Syntax {
            col: self.col(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: &Tok) -> PResult<()> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            let found = self.peek().describe();
            let want = match tok {
                Tok::End => "end of input".to_string(),
                t => format!("`{}`", t.text()),
            };
            self.error(format!("expected {want}, found {found}"))
        }
    }

    /// Is the current token the keyword `kw` (an identifier not used as an atom)?
    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw) && *self.peek_at(1) != Tok::At
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    fn implies(&mut self) -> PResult<Formula> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Formula> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Formula> {
        let mut lhs = self.until()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> PResult<Formula> {
        let lhs = self.unary()?;
        if self.at_keyword("U") {
            self.bump();
            let bound = self.bound()?;
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs, bound));
        }
        Ok(lhs)
    }

    fn bound(&mut self) -> PResult<Bound> {
        if *self.peek() != Tok::Le {
            return Ok(Bound::Unbounded);
        }
        self.bump();
        Ok(Bound::Steps(self.integer("step bound")?))
    }

    fn integer(&mut self, what: &str) -> PResult<usize> {
        match self.peek().clone() {
            Tok::Num(s) => match s.parse::<usize>() {
                Ok(k) => {
                    self.bump();
                    Ok(k)
                }
                Err(_) => self.error(format!("{what} must be a non-negative integer")),
            },
            other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    fn unary(&mut self) -> PResult<Formula> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        if self.at_keyword("X") {
            self.bump();
            let mut count = 1;
            if *self.peek() == Tok::Caret {
                self.bump();
                count = if *self.peek() == Tok::LParen {
                    self.bump();
                    let n = self.integer("repetition count")?;
                    self.expect(&Tok::RParen)?;
                    n
                } else {
                    self.integer("repetition count")?
                };
            }
            return Ok(Formula::next_n(self.unary()?, count));
        }
        if self.at_keyword("F") {
            self.bump();
            let bound = self.bound()?;
            return Ok(Formula::eventually(self.unary()?, bound));
        }
        if self.at_keyword("G") {
            self.bump();
            let bound = self.bound()?;
            return Ok(Formula::globally(self.unary()?, bound));
        }
        self.primary()
    }

    fn starts_term(&self) -> bool {
        match self.peek() {
            Tok::Num(_) | Tok::Minus => true,
            Tok::Ident(s) if s == "P" => *self.peek_at(1) == Tok::LBrack,
            Tok::Ident(s) if s == "pow" || s == "exp" || s == "ln" => {
                *self.peek_at(1) == Tok::LParen
            }
            _ => false,
        }
    }

    fn primary(&mut self) -> PResult<Formula> {
        if self.at_keyword("true") {
            self.bump();
            return Ok(Formula::True);
        }
        if self.at_keyword("false") {
            self.bump();
            return Ok(Formula::not(Formula::True));
        }
        if self.starts_term() {
            return self.comparison();
        }
        match self.peek().clone() {
            Tok::LParen => {
                let f = self.alternatives(|p| p.comparison(), |p| {
                    p.bump();
                    let f = p.implies()?;
                    p.expect(&Tok::RParen)?;
                    Ok(f)
                })?;
                if *self.peek() == Tok::At {
                    self.bump();
                    let pv = self.ident("path variable")?;
                    return Ok(Formula::Assoc(Box::new(f), PathVar(pv)));
                }
                Ok(f)
            }
            Tok::Ident(name) => {
                if KEYWORDS.contains(&name.as_str()) && *self.peek_at(1) != Tok::At {
                    return self.error(format!("unexpected keyword `{name}`"));
                }
                self.bump();
                self.expect(&Tok::At)?;
                let pv = self.ident("path variable")?;
                Ok(Formula::Atom {
                    ap: name,
                    pv: PathVar(pv),
                })
            }
            other => self.error(format!("expected a formula, found {}", other.describe())),
        }
    }

    /// Tries `first`; on failure rewinds and tries `second`, reporting the
    /// error that got further.
    fn alternatives<T>(
        &mut self,
        first: impl FnOnce(&mut Self) -> PResult<T>,
        second: impl FnOnce(&mut Self) -> PResult<T>,
    ) -> PResult<T> {
        let start = self.pos;
        let depth = self.scope.len();
        match first(self) {
            Ok(v) => Ok(v),
            Err(e1) => {
                // Freshness violations are definitive.
                if matches!(e1, ParseError::NotFresh { .. }) {
                    return Err(e1);
                }
                self.pos = start;
                self.scope.truncate(depth);
                match second(self) {
                    Ok(v) => Ok(v),
                    Err(e2) => {
                        self.scope.truncate(depth);
                        if matches!(e2, ParseError::NotFresh { .. }) || e2.col() >= e1.col() {
                            Err(e2)
                        } else {
                            Err(e1)
                        }
                    }
                }
            }
        }
    }

    fn relation(&mut self) -> PResult<Option<RelOp>> {
        let rel = match self.peek() {
            Tok::Lt => RelOp::Plain(Rel::Lt),
            Tok::Le => RelOp::Plain(Rel::Le),
            Tok::Gt => RelOp::Plain(Rel::Gt),
            Tok::Ge => RelOp::Plain(Rel::Ge),
            Tok::EqSign => RelOp::Plain(Rel::Eq),
            Tok::Tilde => {
                self.bump();
                self.expect(&Tok::LBrack)?;
                let eps = self.term()?;
                if *self.peek() != Tok::RBrack {
                    let found = self.peek().describe();
                    return self.error(format!("expected `]`, found {found}"));
                }
                return {
                    self.bump();
                    Ok(Some(RelOp::Approx(eps)))
                };
            }
            _ => return Ok(None),
        };
        self.bump();
        Ok(Some(rel))
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let first = self.term()?;
        let Some(rel) = self.relation()? else {
            let found = self.peek().describe();
            return self.error(format!("expected a comparison operator, found {found}"));
        };
        let mut lhs = first;
        let mut rel = rel;
        let mut out: Option<Formula> = None;
        loop {
            let rhs = self.term()?;
            let cmp = match rel {
                RelOp::Plain(r) => Formula::compare(lhs, r, rhs.clone()),
                RelOp::Approx(eps) => Formula::approx_eq(lhs, rhs.clone(), eps),
            };
            out = Some(match out {
                None => cmp,
                Some(prev) => Formula::and(prev, cmp),
            });
            match self.relation()? {
                Some(next) => {
                    rel = next;
                    lhs = rhs;
                }
                None => break,
            }
        }
        Ok(out.expect("at least one comparison"))
    }

    fn term(&mut self) -> PResult<ProbTerm> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => Func::Add,
                Tok::Minus => Func::Sub,
                _ => return Ok(lhs),
            };
            let col = self.col();
            self.bump();
            let rhs = self.product()?;
            lhs = fold(op, lhs, rhs, col)?;
        }
    }

    fn product(&mut self) -> PResult<ProbTerm> {
        let mut lhs = self.signed()?;
        loop {
            let op = match self.peek() {
                Tok::Star => Func::Mul,
                Tok::Slash => Func::Div,
                _ => return Ok(lhs),
            };
            let col = self.col();
            self.bump();
            let rhs = self.signed()?;
            lhs = fold(op, lhs, rhs, col)?;
        }
    }

    fn signed(&mut self) -> PResult<ProbTerm> {
        if *self.peek() == Tok::Minus {
            let col = self.col();
            self.bump();
            let inner = self.signed()?;
            return fold(Func::Sub, ProbTerm::Const(BigRational::zero()), inner, col);
        }
        self.term_atom()
    }

    fn term_atom(&mut self) -> PResult<ProbTerm> {
        match self.peek().clone() {
            Tok::Num(s) => match parse_rational(&s) {
                Some(v) => {
                    self.bump();
                    Ok(ProbTerm::Const(v))
                }
                None => self.error(format!("invalid number `{s}`")),
            },
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if s == "P" && *self.peek_at(1) == Tok::LBrack => self.prob(),
            Tok::Ident(s) if *self.peek_at(1) == Tok::LParen && FUNCS.iter().any(|(n, _)| *n == s) => {
                let op = FUNCS.iter().find(|(n, _)| *n == s).unwrap().1;
                self.bump();
                self.bump();
                let mut args = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
                if args.len() != op.arity() {
                    return self.error(format!(
                        "`{s}` takes {} argument(s), got {}",
                        op.arity(),
                        args.len()
                    ));
                }
                self.expect(&Tok::RParen)?;
                Ok(ProbTerm::Func(op, args))
            }
            other => self.error(format!(
                "expected a probability term, found {}",
                other.describe()
            )),
        }
    }

    fn prob(&mut self) -> PResult<ProbTerm> {
        self.bump();
        self.expect(&Tok::LBrack)?;
        let depth = self.scope.len();
        let mut pvs: Vec<PathVar> = Vec::new();
        loop {
            let col = self.col();
            let name = PathVar(self.ident("path variable")?);
            if self.scope.contains(&name) || pvs.contains(&name) {
                self.scope.truncate(depth);
                return Err(ParseError::NotFresh { col, var: name.0 });
            }
            pvs.push(name);
            if *self.peek() == Tok::Comma {
                self.bump();
                continue;
            }
            break;
        }
        self.expect(&Tok::RBrack)?;
        self.expect(&Tok::LParen)?;
        self.scope.extend(pvs.iter().cloned());
        let body = self.alternatives(
            |p| {
                let f = p.implies()?;
                p.expect(&Tok::RParen)?;
                Ok(ProbBody::Path(Box::new(f)))
            },
            |p| {
                let t = p.term()?;
                p.expect(&Tok::RParen)?;
                Ok(ProbBody::Term(Box::new(t)))
            },
        );
        self.scope.truncate(depth);
        Ok(ProbTerm::Prob { pvs, body: body? })
    }
}

enum RelOp {
    Plain(Rel),
    Approx(ProbTerm),
}

const FUNCS: &[(&str, Func)] = &[("pow", Func::Pow), ("exp", Func::Exp), ("ln", Func::Ln)];

fn fold(op: Func, lhs: ProbTerm, rhs: ProbTerm, col: usize) -> PResult<ProbTerm> {
    if let (ProbTerm::Const(a), ProbTerm::Const(b)) = (&lhs, &rhs) {
        let v = match op {
            Func::Add => a + b,
            Func::Sub => a - b,
            Func::Mul => a * b,
            Func::Div => {
                if b.is_zero() {
                    return Err(ParseError::Syntax {
                        col,
                        message: "division by zero".into(),
                    });
                }
                a / b
            }
            _ => unreachable!("only arithmetic operators fold"),
        };
        return Ok(ProbTerm::Const(v));
    }
    Ok(ProbTerm::Func(op, vec![lhs, rhs]))
}
