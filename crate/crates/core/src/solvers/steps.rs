//! Single-iteration transition functions.
//!
//! Every step evaluates exactly the values its formula names, in formula
//! order, so the evaluation cost per iteration is fixed per method. A
//! correction whose leading factor is an exact zero is skipped rather than
//! risking `0/0` in a weight; the evaluations are still charged.

use super::{MethodParams, StepError};
use crate::mp::Scalar;
use crate::problems::{evaluate, EvalCounter, EvalKind, Function};
use crate::quadrature::{approx_dfy, approx_dfz, nodes_coincide};

fn f_at<F: Function + ?Sized>(f: &F, x: &Scalar, c: &mut EvalCounter) -> Result<Scalar, StepError> {
    Ok(evaluate(f, EvalKind::F, x, c)?)
}

fn df_at<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    c: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    Ok(evaluate(f, EvalKind::Df, x, c)?)
}

fn d2f_at<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    c: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    Ok(evaluate(f, EvalKind::D2f, x, c)?)
}

/// `num / den`, refusing denominators below `10^(-digits+8) * scale`.
fn ratio(
    num: &Scalar,
    den: &Scalar,
    scale: &Scalar,
    what: &'static str,
) -> Result<Scalar, StepError> {
    let floor = den.ctx().noise_floor(8) * scale;
    if !(den.abs() > floor) {
        return Err(StepError::Degenerate(what));
    }
    Ok(num / den)
}

/// `value / derivative` with the derivative tested against the absolute
/// threshold.
fn quotient(value: &Scalar, derivative: &Scalar, what: &'static str) -> Result<Scalar, StepError> {
    if value.is_zero() {
        return Ok(value.clone());
    }
    ratio(value, derivative, &value.lift(1), what)
}

/// `weight(num/den) * q`, where a zero `q` makes the weight irrelevant.
fn weighted(
    q: &Scalar,
    num: &Scalar,
    den: &Scalar,
    scale: &Scalar,
    what: &'static str,
) -> Result<Scalar, StepError> {
    if q.is_zero() {
        return Ok(q.clone());
    }
    Ok(ratio(num, den, scale, what)? * q)
}

pub fn step_nm<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    let fx = f_at(f, x, counter)?;
    let dfx = df_at(f, x, counter)?;
    Ok(x - quotient(&fx, &dfx, "f'(x) vanishes")?)
}

/// Newton substep followed by a Newton-like correction whose `f'(y)` comes
/// from the three-point quadrature estimate.
pub fn step_m4<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    let fx = f_at(f, x, counter)?;
    let dfx = df_at(f, x, counter)?;
    let y = x - quotient(&fx, &dfx, "f'(x) vanishes")?;
    let fy = f_at(f, &y, counter)?;
    m4_substep(x, &y, &fx, &fy, &dfx)
}

// y already sits on the root to working precision when it coincides with x
fn m4_substep(
    x: &Scalar,
    y: &Scalar,
    fx: &Scalar,
    fy: &Scalar,
    dfx: &Scalar,
) -> Result<Scalar, StepError> {
    if fy.is_zero() || nodes_coincide(x, y) {
        return Ok(y.clone());
    }
    let dfy =
        approx_dfy(fx, fy, dfx, x, y).map_err(|_| StepError::Degenerate("x and y coincide"))?;
    Ok(y - quotient(fy, &dfy, "estimated f'(y) vanishes")?)
}

/// The fourth-order step followed by a Newton-like correction whose `f'(z)`
/// comes from the four-point quadrature estimate.
pub fn step_m8<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    let fx = f_at(f, x, counter)?;
    let dfx = df_at(f, x, counter)?;
    let y = x - quotient(&fx, &dfx, "f'(x) vanishes")?;
    let fy = f_at(f, &y, counter)?;
    let z = m4_substep(x, &y, &fx, &fy, &dfx)?;
    let fz = f_at(f, &z, counter)?;
    if fz.is_zero() || nodes_coincide(&y, &z) || nodes_coincide(x, &y) {
        return Ok(z);
    }
    let dfz = approx_dfz(&fx, &fy, &fz, &dfx, x, &y, &z)
        .map_err(|_| StepError::Degenerate("x, y, z coincide"))?;
    Ok(&z - quotient(&fz, &dfz, "estimated f'(z) vanishes")?)
}

/// Two King-type substeps, each preceded by a Newton step.
pub fn step_lmm<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    let fx = f_at(f, x, counter)?;
    let dfx = df_at(f, x, counter)?;
    let y = x - quotient(&fx, &dfx, "f'(x) vanishes")?;
    let fy = f_at(f, &y, counter)?;
    let z = &y - king(&fx, &fy, &dfx)?;
    let fz = f_at(f, &z, counter)?;
    let dfz = df_at(f, &z, counter)?;
    let w = &z - quotient(&fz, &dfz, "f'(z) vanishes")?;
    let fw = f_at(f, &w, counter)?;
    Ok(&w - king(&fz, &fw, &dfz)?)
}

// (2 f(a) - f(b)) / (2 f(a) - 5 f(b)) * f(b) / f'(a)
fn king(fa: &Scalar, fb: &Scalar, dfa: &Scalar) -> Result<Scalar, StepError> {
    let q = quotient(fb, dfa, "f' vanishes")?;
    let num = fa * 2 - fb;
    let den = fa * 2 - fb * 5;
    let scale = fa.abs() * 2 + fb.abs() * 5;
    weighted(&q, &num, &den, &scale, "2f(a) - 5f(b) vanishes")
}

// Jarratt-type first two substeps shared by RWB and WKL; returns (f'(y), z)
fn jarratt<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    fx: &Scalar,
    dfx: &Scalar,
    counter: &mut EvalCounter,
) -> Result<(Scalar, Scalar), StepError> {
    let u = quotient(fx, dfx, "f'(x) vanishes")?;
    let y = x - &u * 2 / 3;
    let dfy = df_at(f, &y, counter)?;
    let num = &dfy * 3 + dfx;
    let den = &dfy * 6 - dfx * 2;
    let scale = dfy.abs() * 6 + dfx.abs() * 2;
    let z = x - weighted(&u, &num, &den, &scale, "6f'(y) - 2f'(x) vanishes")?;
    Ok((dfy, z))
}

pub fn step_rwb<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    params: &MethodParams,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    let fx = f_at(f, x, counter)?;
    let dfx = df_at(f, x, counter)?;
    let (dfy, z) = jarratt(f, x, &fx, &dfx, counter)?;
    let fz = f_at(f, &z, counter)?;
    let (a, b, c) = (&params.a, &params.b, &params.c);
    let num = (a * 2 - b) * &dfx + b * &dfy + c * &fx;
    let den = (-a - b) * &dfx + (a * 3 + b) * &dfy + c * &fx;
    let scale = (a * 3 + b).abs() * dfy.abs() + (a + b).abs() * dfx.abs() + c.abs() * fx.abs();
    let q = quotient(&fz, &dfx, "f'(x) vanishes")?;
    Ok(&z - weighted(&q, &num, &den, &scale, "RWB weight denominator vanishes")?)
}

pub fn step_wkl<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    params: &MethodParams,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    let fx = f_at(f, x, counter)?;
    let dfx = df_at(f, x, counter)?;
    let (dfy, z) = jarratt(f, x, &fx, &dfx, counter)?;
    let fz = f_at(f, &z, counter)?;
    let (al, be) = (&params.alpha, &params.beta);
    let num = (al * 5 + be * 3) * &dfx - (al * 3 + be) * &dfy;
    let den = al * 2 * &dfx + be * 2 * &dfy;
    let scale = (al.abs() * dfx.abs() + be.abs() * dfy.abs()) * 2;
    let q = quotient(&fz, &dfx, "f'(x) vanishes")?;
    Ok(&z - weighted(&q, &num, &den, &scale, "WKL weight denominator vanishes")?)
}

pub fn step_neta<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    params: &MethodParams,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    let a = &params.a_neta;
    let fx = f_at(f, x, counter)?;
    let dfx = df_at(f, x, counter)?;
    let y = x - quotient(&fx, &dfx, "f'(x) vanishes")?;
    let fy = f_at(f, &y, counter)?;
    let qy = quotient(&fy, &dfx, "f'(x) vanishes")?;
    let num = &fx + a * &fy;
    let den = &fx + (a - 2) * &fy;
    let scale = fx.abs() + (a - 2).abs() * fy.abs();
    let z = &y - weighted(&qy, &num, &den, &scale, "f(x) + (a-2)f(y) vanishes")?;
    let fz = f_at(f, &z, counter)?;
    let qz = quotient(&fz, &dfx, "f'(x) vanishes")?;
    let num = &fx - &fy;
    let den = &fx - &fy * 3;
    let scale = fx.abs() + fy.abs() * 3;
    Ok(&z - weighted(&qz, &num, &den, &scale, "f(x) - 3f(y) vanishes")?)
}

pub fn step_ch<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    params: &MethodParams,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    let beta = &params.beta_ch;
    let fx = f_at(f, x, counter)?;
    let dfx = df_at(f, x, counter)?;
    let y = x - quotient(&fx, &dfx, "f'(x) vanishes")?;
    let fy = f_at(f, &y, counter)?;
    let qy = quotient(&fy, &dfx, "f'(x) vanishes")?;
    let den = &fx - &fy * 2;
    let scale = fx.abs() + fy.abs() * 2;
    let z = &y - weighted(&qy, &fx, &den, &scale, "f(x) - 2f(y) vanishes")?;
    let fz = f_at(f, &z, counter)?;
    let qz = quotient(&fz, &dfx, "f'(x) vanishes")?;
    if qz.is_zero() {
        return Ok(z);
    }
    // H(u) = (1 + (beta+2) u) / (1 + beta u), u = f(y)/f(x)
    let u = ratio(&fy, &fx, &fy.abs(), "f(x) vanishes")?;
    let num = (beta + 2) * &u + 1;
    let den = beta * &u + 1;
    let scale = (beta.abs() * u.abs()) + 1;
    let h = ratio(&num, &den, &scale, "1 + beta u vanishes")?;
    Ok(&z - h * qz)
}

pub fn step_cm<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    let fx = f_at(f, x, counter)?;
    let dfx = df_at(f, x, counter)?;
    let d2fx = d2f_at(f, x, counter)?;
    let u = quotient(&fx, &dfx, "f'(x) vanishes")?;
    if u.is_zero() {
        return Ok(x.clone());
    }
    // 1 + (1/2) f'' f / f'^2 = 1 + (1/2) f'' u / f'
    let factor = &d2fx * &u / &dfx / 2 + 1;
    Ok(x - u * factor)
}

pub fn step_hm<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    let fx = f_at(f, x, counter)?;
    let dfx = df_at(f, x, counter)?;
    let d2fx = d2f_at(f, x, counter)?;
    let u = quotient(&fx, &dfx, "f'(x) vanishes")?;
    let dfx2 = (&dfx * &dfx) * 2;
    let den = &dfx2 - &d2fx * &fx;
    let scale = dfx2.abs() + (&d2fx * &fx).abs();
    Ok(x - weighted(&u, &dfx2, &den, &scale, "2f'^2 - f''f vanishes")?)
}
