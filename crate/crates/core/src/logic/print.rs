use std::fmt;

use num_traits::{One, Signed};

use super::{Bound, Formula, Func, ProbBody, ProbTerm};

// Path precedence: 0 implication, 2 conjunction, 3 until, 4 unary/primary.
// Term precedence: 1 sum, 2 product, 3 unary/primary.

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}

impl fmt::Display for ProbTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 1)
    }
}

fn formula_level(x: &Formula) -> u8 {
    match x {
        Formula::And(..) => 2,
        Formula::Until { .. } => 3,
        _ => 4,
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, x: &Formula, min: u8) -> fmt::Result {
    if formula_level(x) < min {
        f.write_str("(")?;
        write_formula(f, x, 0)?;
        return f.write_str(")");
    }
    match x {
        Formula::True => f.write_str("true"),
        Formula::Atom { ap, pv } => write!(f, "{ap}@{pv}"),
        Formula::Assoc(body, pv) => {
            f.write_str("(")?;
            write_formula(f, body, 0)?;
            write!(f, ")@{pv}")
        }
        Formula::Not(a) => {
            f.write_str("!")?;
            write_formula(f, a, 4)
        }
        Formula::Next(a) => {
            let mut count = 1;
            let mut inner = a.as_ref();
            while let Formula::Next(b) = inner {
                count += 1;
                inner = b;
            }
            if count == 1 {
                f.write_str("X ")?;
            } else {
                write!(f, "X^{count} ")?;
            }
            write_formula(f, inner, 4)
        }
        Formula::And(a, b) => {
            write_formula(f, a, 2)?;
            f.write_str(" & ")?;
            write_formula(f, b, 3)
        }
        Formula::Until { lhs, rhs, bound } => {
            write_formula(f, lhs, 4)?;
            match bound {
                Bound::Steps(k) => write!(f, " U<={k} ")?,
                Bound::Unbounded => f.write_str(" U ")?,
            }
            write_formula(f, rhs, 3)
        }
        Formula::Compare { lhs, rel, rhs } => {
            write_term(f, lhs, 1)?;
            write!(f, " {} ", rel.symbol())?;
            write_term(f, rhs, 1)
        }
    }
}

fn term_level(t: &ProbTerm) -> u8 {
    match t {
        ProbTerm::Const(c) if !c.denom().is_one() => 2,
        ProbTerm::Func(Func::Add | Func::Sub, _) => 1,
        ProbTerm::Func(Func::Mul | Func::Div, _) => 2,
        _ => 3,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &ProbTerm, min: u8) -> fmt::Result {
    if term_level(t) < min {
        f.write_str("(")?;
        write_term(f, t, 1)?;
        return f.write_str(")");
    }
    match t {
        ProbTerm::Const(c) => {
            if c.is_negative() {
                f.write_str("-")?;
            }
            write!(f, "{}", c.numer().abs())?;
            if !c.denom().is_one() {
                write!(f, "/{}", c.denom())?;
            }
            Ok(())
        }
        ProbTerm::Func(op, args) => match op {
            Func::Add | Func::Sub | Func::Mul | Func::Div => {
                let (sym, lhs_min, rhs_min) = match op {
                    Func::Add => (" + ", 1, 2),
                    Func::Sub => (" - ", 1, 2),
                    Func::Mul => (" * ", 2, 3),
                    _ => (" / ", 2, 3),
                };
                write_term(f, &args[0], lhs_min)?;
                f.write_str(sym)?;
                write_term(f, &args[1], rhs_min)
            }
            Func::Pow | Func::Exp | Func::Ln => {
                let name = match op {
                    Func::Pow => "pow",
                    Func::Exp => "exp",
                    _ => "ln",
                };
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_term(f, a, 1)?;
                }
                f.write_str(")")
            }
        },
        ProbTerm::Prob { pvs, body } => {
            f.write_str("P[")?;
            for (i, v) in pvs.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("](")?;
            match body {
                ProbBody::Path(x) => write_formula(f, x, 0)?,
                ProbBody::Term(x) => write_term(f, x, 1)?,
            }
            f.write_str(")")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_formula, PathVar, Rel};
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    #[test]
    fn prints_readably() {
        let f = parse_formula("P[p1,p2]((a@p1 & a@p2) & F<=2 b@p1) > 1/6").unwrap();
        assert_eq!(
            f.to_string(),
            "P[p1,p2](a@p1 & a@p2 & true U<=2 b@p1) > 1/6"
        );
        let f = parse_formula("P[a](x@a) * (1/3) - 2 < -1/2").unwrap();
        assert_eq!(f.to_string(), "P[a](x@a) * (1/3) - 2 < -1/2");
    }

    const APS: &[&str] = &["a", "b", "F", "X"];

    fn arb_const() -> impl Strategy<Value = ProbTerm> {
        (-20i64..20, 1i64..7).prop_map(|(n, d)| ProbTerm::Const(BigRational::new(n.into(), d.into())))
    }

    fn arb_formula(depth: u32, free: Vec<String>, next_var: u32) -> BoxedStrategy<Formula> {
        let atom_vars = free.clone();
        let leaf = prop_oneof![
            Just(Formula::True),
            (0..APS.len(), 0..atom_vars.len().max(1)).prop_map(move |(a, v)| {
                let pv = atom_vars.get(v).cloned().unwrap_or_else(|| "z".into());
                Formula::Atom {
                    ap: APS[a].into(),
                    pv: PathVar(pv),
                }
            }),
        ];
        if depth == 0 {
            return leaf.boxed();
        }
        let term_vars = free.clone();
        let sub = move || arb_formula(depth - 1, free.clone(), next_var + 1);
        prop_oneof![
            2 => leaf,
            1 => sub().prop_map(Formula::not),
            1 => sub().prop_map(Formula::next),
            1 => (sub(), sub()).prop_map(|(a, b)| Formula::and(a, b)),
            1 => (sub(), sub(), prop::option::of(0usize..5)).prop_map(|(a, b, k)| {
                Formula::until(a, b, k.map_or(Bound::Unbounded, Bound::Steps))
            }),
            1 => (sub(), "[pq][0-9]").prop_map(|(a, v)| Formula::Assoc(Box::new(a), PathVar(v))),
            1 => (
                arb_term(depth - 1, term_vars.clone(), next_var),
                0..5usize,
                arb_term(depth - 1, term_vars, next_var + 7),
            )
                .prop_map(|(l, r, rhs)| {
                    let rel = [Rel::Lt, Rel::Le, Rel::Eq, Rel::Ge, Rel::Gt][r];
                    Formula::compare(l, rel, rhs)
                }),
        ]
        .boxed()
    }

    fn arb_term(depth: u32, free: Vec<String>, next_var: u32) -> BoxedStrategy<ProbTerm> {
        let var = format!("v{next_var}");
        let mut inner_free = free.clone();
        inner_free.push(var.clone());
        let prob = {
            let var = var.clone();
            arb_formula(depth.saturating_sub(1), inner_free, next_var + 1).prop_map(move |body| {
                ProbTerm::Prob {
                    pvs: vec![PathVar(var.clone())],
                    body: ProbBody::Path(Box::new(body)),
                }
            })
        };
        if depth == 0 {
            return prop_oneof![arb_const(), prob].boxed();
        }
        let sub = move || arb_term(depth - 1, free.clone(), next_var + 13);
        prop_oneof![
            1 => arb_const(),
            2 => prob,
            1 => (sub(), sub(), 0..4usize).prop_filter_map("unfolded constant", |(a, b, k)| {
                if matches!(a, ProbTerm::Const(_)) && matches!(b, ProbTerm::Const(_)) {
                    return None;
                }
                let op = [Func::Add, Func::Sub, Func::Mul, Func::Div][k];
                Some(ProbTerm::Func(op, vec![a, b]))
            }),
            1 => (sub(), sub()).prop_map(|(a, b)| ProbTerm::Func(Func::Pow, vec![a, b])),
            1 => sub().prop_map(|a| ProbTerm::Func(Func::Exp, vec![a])),
            1 => sub().prop_map(|a| ProbTerm::Func(Func::Ln, vec![a])),
        ]
        .boxed()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]
        #[test]
        fn print_parse_round_trip(f in arb_formula(4, vec!["p".into(), "q".into()], 0)) {
            let text = f.to_string();
            let back = parse_formula(&text);
            prop_assert_eq!(back.as_ref(), Ok(&f), "text: {}", text);
        }
    }
}
