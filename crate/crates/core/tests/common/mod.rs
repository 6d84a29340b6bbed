//! Strategies and checks shared by the property and acceptance suites.

#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use quadroot::problems::{EvalCounter, Function, Polynomial};
use quadroot::quadrature::{approx_dfy, approx_dfz, solve_nu, solve_omega};
use quadroot::solvers::step;
use quadroot::{MethodId, MethodParams, PrecisionContext, Scalar};

pub const DIGITS: u32 = 2048;

pub fn ctx() -> PrecisionContext {
    PrecisionContext::new(DIGITS).unwrap()
}

/// Rational `num / den` as a scalar.
pub fn q(num: i64, den: i64) -> Scalar {
    Scalar::ratio(num, den, ctx())
}

/// `|a - b| / max(1, |b|)`.
pub fn rel_err(a: &Scalar, b: &Scalar) -> Scalar {
    (a - b).abs() / Scalar::one(ctx()).max(&b.abs())
}

pub fn tol() -> Scalar {
    ctx().noise_floor(24)
}

fn close(what: &str, a: &Scalar, b: &Scalar) -> Result<(), TestCaseError> {
    let e = rel_err(a, b);
    if e < tol() {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!(
            "{what}: {a:.20} vs {b:.20} (rel {e:.3})"
        )))
    }
}

/// Node in [-10, 10] on a 1/1000 grid.
pub fn node() -> impl Strategy<Value = i64> {
    -10_000i64..=10_000
}

/// Two or three nodes at least 0.05 apart.
pub fn nodes(n: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(node(), n).prop_filter("nodes too close", |v| {
        v.iter()
            .enumerate()
            .all(|(i, a)| v[i + 1..].iter().all(|b| (a - b).abs() >= 50))
    })
}

pub fn coeffs(degree: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-50i64..=50, degree + 1)
}

fn at(n: i64) -> Scalar {
    q(n, 1000)
}

/// `approx_dfy` is exact for degree ≤ 2, `approx_dfz` for degree ≤ 3.
pub fn check_polynomial_exactness(c2: &[i64], c3: &[i64], n: &[i64]) -> Result<(), TestCaseError> {
    let (x, y, z) = (at(n[0]), at(n[1]), at(n[2]));

    let p = Polynomial::from_i64(c2, ctx());
    let est = approx_dfy(
        &p.value(&x).unwrap(),
        &p.value(&y).unwrap(),
        &p.first_derivative(&x).unwrap(),
        &x,
        &y,
    )
    .unwrap();
    close("dfy", &est, &p.first_derivative(&y).unwrap())?;

    let p = Polynomial::from_i64(c3, ctx());
    let est = approx_dfz(
        &p.value(&x).unwrap(),
        &p.value(&y).unwrap(),
        &p.value(&z).unwrap(),
        &p.first_derivative(&x).unwrap(),
        &x,
        &y,
        &z,
    )
    .unwrap();
    close("dfz", &est, &p.first_derivative(&z).unwrap())
}

/// Moment-system weights against the closed forms, with arbitrary data.
pub fn check_weight_equivalence(n: &[i64], data: &[i64]) -> Result<(), TestCaseError> {
    let (x, y, z) = (at(n[0]), at(n[1]), at(n[2]));
    let (fx, fy, fz, dfx) = (q(data[0], 7), q(data[1], 7), q(data[2], 7), q(data[3], 7));

    let w = solve_omega(&x, &y).unwrap();
    let h = &y - &x;
    close("w1", &w.w1, &(q(-2, 1) / &h))?;
    close("w2", &w.w2, &(q(2, 1) / &h))?;
    close("w3", &w.w3, &q(-2, 1))?;

    let v = solve_nu(&x, &y, &z).unwrap();
    let via_weights = v.derivative_at_z(&fx, &fy, &fz, &dfx);
    let closed = approx_dfz(&fx, &fy, &fz, &dfx, &x, &y, &z).unwrap();
    close("nu", &via_weights, &closed)
}

/// One step of every method from `x0` lands on the root of `a + b t`.
pub fn check_affine_one_step(a: i64, b: i64, x0: i64) -> Result<(), TestCaseError> {
    let f = Polynomial::from_i64(&[a, b], ctx());
    let root = q(-a, b);
    let x0 = q(x0, 100);
    let params = MethodParams::defaults(ctx());
    for m in MethodId::ALL {
        let mut c = EvalCounter::default();
        let next = step(m, &f, &x0, &params, &mut c)
            .map_err(|e| TestCaseError::fail(format!("{m}: {e}")))?;
        let e = (&next - &root).abs();
        if !(e <= ctx().noise_floor(8) * Scalar::one(ctx()).max(&root.abs())) {
            return Err(TestCaseError::fail(format!(
                "{m}: {next:.20} vs {root:.20}"
            )));
        }
    }
    Ok(())
}
