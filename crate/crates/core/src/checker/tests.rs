use num_rational::BigRational;

use super::*;
use crate::dtmc::fixtures::{FIG3, FIG5};
use crate::dtmc::{parse_model, Dtmc};
use crate::logic::{parse_formula, Value};

const JOINT: &str = "P[p1,p2]((ap1@p1 & ap1@p2) & F (ap2@p1 & ap2@p2))";

fn model(text: &str) -> Dtmc {
    parse_model(text).unwrap()
}

fn formula(text: &str) -> Formula {
    parse_formula(text).unwrap()
}

fn exact(num: i64, den: i64) -> Value {
    Value::Exact(BigRational::new(num.into(), den.into()))
}

#[test]
fn compile_linear_sum_into_one_region() {
    let f = formula("P[p1](F ap@p1) + P[p2](G<=3 ap@p2) > 0.8");
    assert_eq!(compile(&f, 0.05, None).unwrap_err(), CompileError::UnboundedHorizon);
    let plan = compile(&f, 0.05, Some(10)).unwrap();
    assert_eq!(plan.dim(), 2);
    assert_eq!(plan.orientation, Orientation::Violated);
    assert_eq!(plan.pieces.len(), 1);
    let Test::Multi(region) = &plan.pieces[0].test else {
        panic!("expected a two-dimensional test");
    };
    let s = 2f64.sqrt();
    let (a, b) = region.f0().affine().unwrap();
    assert!((a[0] - 1.0 / s).abs() < 1e-12 && (a[1] - 1.0 / s).abs() < 1e-12);
    assert!((b - (-0.8 / s + 0.05)).abs() < 1e-12);
    assert_eq!(plan.sources[0].horizon, 10);
    assert_eq!(plan.sources[1].horizon, 3);
}

#[test]
fn compile_single_source_uses_scalar_test() {
    let plan = compile(&formula("P[p1,p2](a@p1 U<=2 a@p2) > 0.5"), 0.05, None).unwrap();
    assert_eq!(plan.dim(), 1);
    match &plan.pieces[0].test {
        Test::Scalar { source: 0, spec } => {
            assert!((spec.p - 0.5).abs() < 1e-15 && spec.epsilon == 0.05);
            assert!(spec.h1_above());
        }
        other => panic!("{other:?}"),
    }
    let plan = compile(&formula("2 * P[p](a@p) < 0.5"), 0.05, None).unwrap();
    match &plan.pieces[0].test {
        Test::Scalar { spec, .. } => assert!((spec.p - 0.25).abs() < 1e-15 && !spec.h1_above()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn compile_rejects_equality_and_open_formulas() {
    let err = compile(&formula("P[p1](a@p1) = P[p2](b@p2)"), 0.05, None).unwrap_err();
    assert_eq!(err, CompileError::Equality);
    assert!(err.to_string().contains("~[eps]"));
    assert!(matches!(
        compile(&formula("a@p & P[q](a@q) > 0.5"), 0.05, None),
        Err(CompileError::NotClosed(_))
    ));
    assert_eq!(compile(&formula("P[q](a@q) > 0.5"), 0.0, None).unwrap_err(), CompileError::Margin(0.0));
}

#[test]
fn approximate_equality_splits_violation_into_two_halfspaces() {
    let plan = compile(&formula("P[p](a@p) ~[0.1] P[q](b@q)"), 0.01, None).unwrap();
    assert_eq!(plan.orientation, Orientation::Violated);
    assert_eq!(plan.pieces.len(), 2);
    assert_eq!(plan.dim(), 2);

    let plan = compile(&formula("P[p](a@p) > 0.7 | P[q](b@q) > 0.7"), 0.01, None).unwrap();
    assert_eq!(plan.orientation, Orientation::Satisfied);
    assert_eq!(plan.pieces.len(), 2);

    let mixed = "(P[p](a@p) > 0.5 & P[q](b@q) > 0.5) | P[r](c@r) > 0.5";
    assert!(matches!(compile(&formula(mixed), 0.01, None), Err(CompileError::Unsupported(_))));
}

#[test]
fn constant_comparisons_need_no_sampling() {
    let plan = compile(&formula("1/2 < 2/3 | P[p](a@p) > 0.5"), 0.05, None).unwrap();
    assert_eq!(plan.decided, Some(true));
    let plan = compile(&formula("1/2 > 2/3"), 0.05, None).unwrap();
    assert_eq!(plan.decided, Some(false));
}

#[test]
fn nested_operators_compile_into_inner_plans() {
    let f = formula("P[p1]((P[p2](a@p2 U<=2 a@p1) > 0.3)@p1) > 0.5");
    let plan = compile(&f, 0.05, None).unwrap();
    assert_eq!(plan.depth(), 2);
    assert_eq!(plan.prob_count(), 2);
    let inner = &plan.sources[0].nested[0].plan;
    assert_eq!(plan.sources[0].start, StartSpec::Initial);
    assert_eq!(inner.sources[0].start, StartSpec::Enclosing);
    assert_eq!(inner.sources[0].horizon, 2);
}

#[test]
fn oracle_joint_reachability_is_one_quarter() {
    let m = model(FIG3);
    let r = brute_force_check(&m, &formula(&format!("{JOINT} > 1/6")), Some(5)).unwrap();
    assert!(r.holds);
    assert_eq!(r.probabilities.len(), 1);
    assert_eq!(r.probabilities[0].1, exact(1, 4));
    let r = brute_force_check(&m, &formula(&format!("{JOINT} > 0.4")), Some(5)).unwrap();
    assert!(!r.holds);
    assert_eq!(
        brute_force_check(&m, &formula(&format!("{JOINT} > 0.4")), None).unwrap_err(),
        OracleError::UnboundedHorizon
    );
}

#[test]
fn oracle_ratio_is_one_half() {
    let m = model(FIG5);
    let f = formula("P[p1](init@p1 => F (ap1@p1 & ap2@p1)) / P[p2](init@p2 => F ap2@p2) = 1/2");
    let r = brute_force_check(&m, &f, Some(3)).unwrap();
    assert!(r.holds);
    let values: Vec<&Value> = r.probabilities.iter().map(|(_, v)| v).collect();
    assert_eq!(values, vec![&exact(1, 3), &exact(2, 3)]);
}

#[test]
fn oracle_on_unlabeled_chain() {
    let m = model("dtmc\nstates 1\ninitial 0\nprops ap\ntrans 0 0 1\n");
    let r = brute_force_check(&m, &formula("P[p](F<=3 ap@p) > 0"), None).unwrap();
    assert!(!r.holds);
    assert_eq!(r.probabilities[0].1, exact(0, 1));
}

#[test]
fn oracle_reports_enumeration_cap() {
    let m = model(FIG5);
    let err = oracle::brute_force_check_capped(&m, &formula("P[p,q](F<=2 ap1@p) > 0"), None, 5);
    assert!(matches!(err, Err(OracleError::Enumerate(_))));
}

#[test]
fn check_fig3_thresholds() {
    let m = model(FIG3);
    let sampler = m.sampler();
    let budget = ErrorBudget::new(0.01, 0.01).unwrap();
    for (threshold, want) in [("1/6", Some(true)), ("0.4", Some(false))] {
        let f = formula(&format!("{JOINT} > {threshold}"));
        let mut agree = 0;
        for seed in 0..20 {
            let mut task = CheckTask::new(&sampler, f.clone(), budget, 0.05);
            task.horizon = Some(2);
            task.seed = seed;
            let r = check(&task).unwrap();
            assert!(r.truncated);
            agree += (r.holds() == want) as usize;
        }
        assert!(agree >= 19, "{threshold}: {agree}/20");
    }
}

#[test]
fn zero_sample_cap_is_undecided() {
    let m = model(FIG3);
    let sampler = m.sampler();
    let mut task = CheckTask::new(
        &sampler,
        formula("P[p](F<=2 ap2@p) > 0.2"),
        ErrorBudget::new(0.05, 0.05).unwrap(),
        0.05,
    );
    task.max_samples = 0;
    let r = check(&task).unwrap();
    assert_eq!(r.verdict, Verdict::undecided(0));
    assert_eq!(r.holds(), None);
}

#[test]
fn nested_budget_must_fit_inside_margin() {
    let m = model(FIG3);
    let sampler = m.sampler();
    let f = formula("P[p1]((P[p2](ap2@p2 U<=2 ap1@p1) > 0.3)@p1) > 0.5");
    let task = CheckTask::new(&sampler, f, ErrorBudget::new(0.4, 0.4).unwrap(), 0.1);
    assert!(matches!(check(&task), Err(CheckError::NestedBudget { .. })));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let m = model(FIG5);
    let sampler = m.sampler();
    let f = formula("P[p](F<=1 ap1@p) ~[0.1] P[q](F<=1 ap2@q)");
    let mut task = CheckTask::new(&sampler, f, ErrorBudget::new(0.05, 0.05).unwrap(), 0.02);
    task.batch = 16;
    task.seed = 99;
    let one = check(&task).unwrap();
    task.workers = 4;
    let four = check(&task).unwrap();
    assert_eq!(one.verdict, four.verdict);
    assert_eq!(one.counts, four.counts);
    assert_eq!(one.holds(), Some(true));
}
