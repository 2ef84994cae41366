use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use proptest::prelude::*;

use tribrep::baker::{self, GammaModel};
use tribrep::real::{bits_for_digits, compute_constants, CertifiedReal};
use tribrep::reduction::{self, reduce_homogeneous, theta_cf, two_stage_reduce, ContinuedFraction};
use tribrep::search::{exhaustive_search, SearchSpace};
use tribrep::Equation;

fn interval(x: &CertifiedReal) -> (BigRational, BigRational) {
    let den = BigInt::one() << x.bits();
    (
        BigRational::new(x.lower_scaled(), den.clone()),
        BigRational::new(x.upper_scaled(), den),
    )
}

fn contains(x: &CertifiedReal, v: &BigRational) -> bool {
    let (lo, hi) = interval(x);
    &lo <= v && v <= &hi
}

#[derive(Clone, Debug)]
enum Expr {
    Leaf(i64, i64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = (-50i64..50, 1i64..20).prop_map(|(n, d)| Expr::Leaf(n, d));
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
        ]
    })
}

/// Exact value, or `None` on division by zero.
fn exact(e: &Expr) -> Option<BigRational> {
    Some(match e {
        Expr::Leaf(n, d) => BigRational::new((*n).into(), (*d).into()),
        Expr::Add(a, b) => exact(a)? + exact(b)?,
        Expr::Sub(a, b) => exact(a)? - exact(b)?,
        Expr::Mul(a, b) => exact(a)? * exact(b)?,
        Expr::Div(a, b) => {
            let d = exact(b)?;
            if d == BigRational::from_integer(0.into()) {
                return None;
            }
            exact(a)? / d
        }
    })
}

fn ball(e: &Expr, bits: u32) -> Option<CertifiedReal> {
    Some(match e {
        Expr::Leaf(n, d) => CertifiedReal::from_ratio(*n, *d, bits).ok()?,
        Expr::Add(a, b) => ball(a, bits)?.add(&ball(b, bits)?),
        Expr::Sub(a, b) => ball(a, bits)?.sub(&ball(b, bits)?),
        Expr::Mul(a, b) => ball(a, bits)?.mul(&ball(b, bits)?),
        Expr::Div(a, b) => ball(a, bits)?.div(&ball(b, bits)?).ok()?,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expression_enclosures_contain_exact_value(e in expr()) {
        if let (Some(v), Some(b)) = (exact(&e), ball(&e, bits_for_digits(40))) {
            prop_assert!(contains(&b, &v));
        }
    }

    #[test]
    fn doubling_precision_tightens(e in expr()) {
        let p = bits_for_digits(40);
        if let (Some(v), Some(lo), Some(hi)) = (exact(&e), ball(&e, p), ball(&e, 2 * p)) {
            prop_assert!(contains(&lo, &v) && contains(&hi, &v));
            // both enclose v; the finer one is much narrower
            let (a, b) = interval(&lo);
            let (c, d) = interval(&hi);
            prop_assert!((d - c) <= (b - a) + BigRational::new(1.into(), BigInt::one() << (p - 8)));
        }
    }

    #[test]
    fn ln_of_positive_rationals_is_consistent(n in 1i64..10_000, d in 1i64..10_000) {
        let bits = bits_for_digits(60);
        let x = CertifiedReal::from_ratio(n, d, bits).unwrap();
        let y = CertifiedReal::from_ratio(d, n, bits).unwrap();
        let s = x.ln().unwrap().add(&y.ln().unwrap());
        prop_assert!(s.overlaps(&CertifiedReal::zero(bits)));
        prop_assert!(s.radius_at_most_pow10(-55));
    }
}

#[test]
fn alpha_width_shrinks_geometrically() {
    let widths: Vec<f64> = [60, 120, 240].iter().map(|&d| compute_constants(d).unwrap().alpha.radius_log10()).collect();
    assert!(widths[1] < widths[0] - 50.0, "{widths:?}");
    assert!(widths[2] < widths[1] - 100.0, "{widths:?}");
}

#[test]
fn convergent_invariants() {
    let consts = compute_constants(200).unwrap();
    let theta = reduction::theta(&consts).unwrap();
    let cf = theta_cf(60, 200).unwrap();
    for k in 1..=60 {
        let det = reduction::determinant(&cf, k).unwrap();
        let expected = if k % 2 == 1 { BigInt::one() } else { -BigInt::one() };
        assert_eq!(det, expected, "k = {k}");
    }
    let (lo, hi) = interval(&theta);
    for k in 0..60 {
        let (c, next) = (&cf.convergents[k], &cf.convergents[k + 1]);
        let approx = BigRational::new(c.p.clone(), c.q.clone());
        let gap = BigRational::new(BigInt::one(), &c.q * &next.q);
        assert!((&lo - &approx).abs() < gap && (&hi - &approx).abs() < gap, "k = {k}");
    }
}

#[test]
fn homogeneous_bound_monotonicity() {
    let bits = 200;
    let one = CertifiedReal::one(bits);
    let log10 = CertifiedReal::from_int(10, bits).ln().unwrap();
    let cf = theta_cf(60, 200).unwrap();
    let parse = |s: &str| s.parse::<f64>().unwrap();
    let base = reduce_homogeneous(&cf, &one, &one, 1000, &log10).unwrap();
    let wider = reduce_homogeneous(&cf, &one, &one, 10_000, &log10).unwrap();
    let gap = parse(&wider.upper) - parse(&base.upper);
    // X0 -> 10 X0 moves the bound by log 10 plus any growth of A
    assert!(gap >= std::f64::consts::LN_10 - 1e-9);
    let a_ratio = (wider.a_max.clone() + 2u8).to_string().parse::<f64>().unwrap()
        / (base.a_max.clone() + 2u8).to_string().parse::<f64>().unwrap();
    assert!((gap - std::f64::consts::LN_10 - a_ratio.ln()).abs() < 1e-3);

    let short = ContinuedFraction::from_ball(&one, 5);
    assert!(reduce_homogeneous(&short, &one, &one, 1000, &log10).is_err());
}

#[test]
fn reduced_bounds_dominate() {
    let consts = compute_constants(100).unwrap();
    for eq in Equation::SHIFTED {
        for model in GammaModel::ALL {
            let (chain, _) = two_stage_reduce(eq, model, 200).unwrap();
            let s: Vec<u64> = chain.stages.iter().map(|s| s.new_bound).collect();
            assert!(s[1] <= s[0] && s[0] <= chain.initial.bound, "{eq} {model:?}: {s:?}");
            for st in &chain.stages {
                assert!(st.q > BigInt::from(st.x0));
                assert_eq!(st.checked_cases.len(), baker::factor_counts(eq).unwrap().count() * 9);
            }
            // delta = 0.6 below rho log(alpha), and c covers the coefficient
            let (num, den) = model.decay();
            let rho_log = consts.log_alpha.mul_int(num).div_int(den).unwrap();
            assert!(CertifiedReal::from_decimal("0.6", consts.bits()).unwrap().certainly_lt(&rho_log));
            assert!(chain.lambda_c >= chain.initial.coefficient);
        }
    }
}

#[test]
fn search_reports_are_schedule_independent() {
    let space = SearchSpace::new(Equation::Eq3, 40).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| exhaustive_search(&space)).unwrap();
    let b = four.install(|| exhaustive_search(&space)).unwrap();
    assert_eq!(a.digest, b.digest);
    assert_eq!(a.counts, b.counts);
    assert_eq!(a.candidates_scanned, 40 * 42);
}
