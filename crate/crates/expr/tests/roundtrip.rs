use drift_ode_expr::{parse, BinOp, Bindings, Constant, Expr, Func, Var};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        prop::num::f64::POSITIVE.prop_map(Expr::Num),
        (0u32..100).prop_map(|n| Expr::Num(n as f64 / 4.0)),
        Just(Expr::Var(Var::T)),
        Just(Expr::Var(Var::I)),
        Just(Expr::Const(Constant::Pi)),
        Just(Expr::Const(Constant::E)),
    ]
}

fn op() -> impl Strategy<Value = BinOp> {
    prop_oneof![
        Just(BinOp::Add),
        Just(BinOp::Sub),
        Just(BinOp::Mul),
        Just(BinOp::Div),
        Just(BinOp::Pow),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (op(), inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::binary(o, l, r)),
            (prop::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, a)| Expr::call(f, a)),
        ]
    })
}

fn same_value(a: &Expr, b: &Expr, env: &Bindings) -> bool {
    match (a.eval(env), b.eval(env)) {
        (Ok(x), Ok(y)) => x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()),
        (Err(x), Err(y)) => x == y,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_then_parse_is_identity(e in expr(), t in -4.0f64..4.0, i in 1u32..12) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(&back, &e, "printed as {}", printed);
        prop_assert_eq!(back.to_string(), printed);
        let env = Bindings::ti(i as f64, t);
        prop_assert!(same_value(&e, &back, &env));
    }

    #[test]
    fn products_bind_tighter_than_sums(a in 0.0f64..100.0, b in 0.0f64..100.0, c in 0.0f64..100.0) {
        prop_assert_eq!(parse(&format!("{a}+{b}*{c}")).unwrap(), parse(&format!("{a}+({b}*{c})")).unwrap());
        prop_assert_eq!(parse(&format!("{a}-{b}/{c}")).unwrap(), parse(&format!("{a}-({b}/{c})")).unwrap());
    }

    #[test]
    fn powers_associate_right(a in 0.0f64..3.0, b in 0.0f64..3.0, c in 0.0f64..3.0) {
        let lhs = parse(&format!("{a}^{b}^{c}")).unwrap();
        let rhs = parse(&format!("{a}^({b}^{c})")).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        prop_assert!(same_value(&lhs, &rhs, &Bindings::default()));
    }
}
