use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{Dtmc, Edge, ModelError};
use crate::numeric::parse_rational;

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let line = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (idx, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..idx],
                    col: line[..s].chars().count() + 1,
                });
                start = None;
            }
            (false, None) => start = Some(idx),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            col: line[..s].chars().count() + 1,
        });
    }
    out
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

struct Transition {
    line: usize,
    src: usize,
    src_col: usize,
    dst: usize,
    dst_col: usize,
    prob: BigRational,
}

struct Cursor<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
    pos: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<&Token<'a>, ModelError> {
        let tok = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| syntax(self.line, self.end_col, format!("expected {what}")))?;
        self.pos += 1;
        Ok(tok)
    }

    fn usize(&mut self, what: &str) -> Result<(usize, usize), ModelError> {
        let line = self.line;
        let tok = self.next(what)?;
        let value = tok
            .text
            .parse::<usize>()
            .map_err(|_| syntax(line, tok.col, format!("expected {what}, found `{}`", tok.text)))?;
        Ok((value, tok.col))
    }

    fn rest(&mut self) -> &[Token<'a>] {
        let rest = &self.tokens[self.pos..];
        self.pos = self.tokens.len();
        rest
    }

    fn finish(&self) -> Result<(), ModelError> {
        match self.tokens.get(self.pos) {
            Some(tok) => Err(syntax(
                self.line,
                tok.col,
                format!("unexpected `{}`", tok.text),
            )),
            None => Ok(()),
        }
    }
}

/// Parses the line-oriented model format:
///
/// ```text
/// dtmc
/// states 2
/// initial 0
/// props done
/// trans 0 1 0.5
/// trans 0 0 1/2
/// trans 1 1 1
/// label 1 done
/// ```
pub fn parse_model(text: &str) -> Result<Dtmc, ModelError> {
    let mut header = false;
    let mut count: Option<usize> = None;
    let mut initial: Option<(usize, usize, usize)> = None;
    let mut props: Option<Vec<String>> = None;
    let mut trans: Vec<Transition> = Vec::new();
    let mut labels: Vec<(usize, usize, usize, Vec<(String, usize)>)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let end_col = raw.chars().count() + 1;
        let mut cur = Cursor {
            line,
            tokens,
            pos: 0,
            end_col,
        };
        let (keyword, kw_col) = {
            let tok = cur.next("keyword")?;
            (tok.text, tok.col)
        };
        if !header {
            if keyword != "dtmc" {
                return Err(syntax(line, kw_col, "model must start with `dtmc`"));
            }
            header = true;
            cur.finish()?;
            continue;
        }
        match keyword {
            "dtmc" => {
                return Err(ModelError::Duplicate {
                    line,
                    col: kw_col,
                    what: "`dtmc` header".into(),
                })
            }
            "states" => {
                if count.is_some() {
                    return Err(ModelError::Duplicate {
                        line,
                        col: kw_col,
                        what: "state count".into(),
                    });
                }
                let (n, col) = cur.usize("state count")?;
                if n == 0 {
                    return Err(syntax(line, col, "a model needs at least one state"));
                }
                count = Some(n);
            }
            "initial" => {
                if initial.is_some() {
                    return Err(ModelError::Duplicate {
                        line,
                        col: kw_col,
                        what: "initial state".into(),
                    });
                }
                let (s, col) = cur.usize("state id")?;
                initial = Some((s, line, col));
            }
            "props" => {
                if props.is_some() {
                    return Err(ModelError::Duplicate {
                        line,
                        col: kw_col,
                        what: "proposition list".into(),
                    });
                }
                let mut names: Vec<String> = Vec::new();
                for tok in cur.rest() {
                    if !is_identifier(tok.text) {
                        return Err(syntax(
                            line,
                            tok.col,
                            format!("invalid proposition name `{}`", tok.text),
                        ));
                    }
                    if names.iter().any(|n| n == tok.text) {
                        return Err(ModelError::Duplicate {
                            line,
                            col: tok.col,
                            what: format!("proposition `{}`", tok.text),
                        });
                    }
                    names.push(tok.text.to_string());
                }
                props = Some(names);
            }
            "trans" => {
                let (src, src_col) = cur.usize("source state")?;
                let (dst, dst_col) = cur.usize("target state")?;
                let tok = cur.next("probability")?;
                let prob = parse_rational(tok.text).ok_or_else(|| {
                    syntax(line, tok.col, format!("invalid probability `{}`", tok.text))
                })?;
                if prob <= BigRational::from_integer(BigInt::from(0)) {
                    return Err(syntax(
                        line,
                        tok.col,
                        "transition probabilities must be positive (omit zero edges)",
                    ));
                }
                if prob > BigRational::from_integer(BigInt::from(1)) {
                    return Err(syntax(line, tok.col, "probability exceeds 1"));
                }
                trans.push(Transition {
                    line,
                    src,
                    src_col,
                    dst,
                    dst_col,
                    prob,
                });
            }
            "label" => {
                let (s, col) = cur.usize("state id")?;
                let names = cur
                    .rest()
                    .iter()
                    .map(|t| (t.text.to_string(), t.col))
                    .collect();
                labels.push((s, line, col, names));
            }
            other => {
                return Err(syntax(line, kw_col, format!("unknown keyword `{other}`")));
            }
        }
        cur.finish()?;
    }

    let missing = |what: &str| syntax(last_line.max(1), 1, format!("missing `{what}` declaration"));
    if !header {
        return Err(syntax(1, 1, "model must start with `dtmc`"));
    }
    let count = count.ok_or_else(|| missing("states"))?;
    let (initial, init_line, init_col) = initial.ok_or_else(|| missing("initial"))?;
    let props = props.unwrap_or_default();
    if initial >= count {
        return Err(ModelError::DanglingState {
            line: init_line,
            col: init_col,
            state: initial,
            count,
        });
    }

    let mut rows: Vec<Vec<Edge>> = vec![Vec::new(); count];
    let mut seen_edges = HashSet::new();
    for Transition {
        line,
        src,
        src_col: col,
        dst,
        dst_col,
        prob,
    } in trans
    {
        if src >= count {
            return Err(ModelError::DanglingState {
                line,
                col,
                state: src,
                count,
            });
        }
        if dst >= count {
            return Err(ModelError::DanglingState {
                line,
                col: dst_col,
                state: dst,
                count,
            });
        }
        if !seen_edges.insert((src, dst)) {
            return Err(ModelError::Duplicate {
                line,
                col,
                what: format!("transition {src} -> {dst}"),
            });
        }
        rows[src].push(Edge { target: dst, prob });
    }

    let mut label_names: Vec<Vec<String>> = vec![Vec::new(); count];
    let mut labeled = HashSet::new();
    for (state, line, col, names) in labels {
        if state >= count {
            return Err(ModelError::DanglingState {
                line,
                col,
                state,
                count,
            });
        }
        if !labeled.insert(state) {
            return Err(ModelError::Duplicate {
                line,
                col,
                what: format!("label line for state {state}"),
            });
        }
        for (name, name_col) in names {
            if !props.contains(&name) {
                return Err(syntax(
                    line,
                    name_col,
                    format!("proposition `{name}` is not declared in `props`"),
                ));
            }
            label_names[state].push(name);
        }
    }

    Dtmc::new(initial, rows, props, label_names)
}

pub(crate) fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
