//! Derivative estimates from quadrature of `f''`.
//!
//! Writing `f'(b) = f'(a) + ∫_a^b f''(t) dt` and replacing the integral by a
//! weighted sum of values that a multipoint step already holds gives
//! derivative estimates that cost no extra evaluations:
//!
//! * three data `f(x), f(y), f'(x)` with weights fixed by exactness on
//!   `1, t, t²` give `f'(y) ≈ 2 f[x, y] - f'(x)`;
//! * four data `f(x), f(y), f(z), f'(x)` with exactness on `1, t, t², t³`
//!   give the estimate of `f'(z)` used by the eighth-order step.
//!
//! The closed forms are what the solvers call. [`solve_omega`] and
//! [`solve_nu`] build and solve the moment systems by elimination so the
//! closed forms can be checked against them.

use thiserror::Error;

use crate::mp::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadratureError {
    #[error("quadrature nodes coincide to working precision")]
    DegenerateNodes,
    #[error("moment system is singular to working precision")]
    Singular,
}

/// Weights of `∫_x^y f'' ≈ w1 f(x) + w2 f(y) + w3 f'(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaWeights {
    pub w1: Scalar,
    pub w2: Scalar,
    pub w3: Scalar,
}

impl OmegaWeights {
    /// `f'(x) + ∫_x^y f''` reconstructed from the weights.
    pub fn derivative_at_y(&self, fx: &Scalar, fy: &Scalar, dfx: &Scalar) -> Scalar {
        dfx + &self.w1 * fx + &self.w2 * fy + &self.w3 * dfx
    }
}

/// Weights of `∫_x^z f'' ≈ v1 f(x) + v2 f(y) + v3 f(z) + v4 f'(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuWeights {
    pub v1: Scalar,
    pub v2: Scalar,
    pub v3: Scalar,
    pub v4: Scalar,
}

impl NuWeights {
    pub fn derivative_at_z(&self, fx: &Scalar, fy: &Scalar, fz: &Scalar, dfx: &Scalar) -> Scalar {
        dfx + &self.v1 * fx + &self.v2 * fy + &self.v3 * fz + &self.v4 * dfx
    }
}

/// True when `a` and `b` are closer than `10^(-digits+8) * max(1, |a|, |b|)`.
pub fn nodes_coincide(a: &Scalar, b: &Scalar) -> bool {
    let ctx = a.ctx().max(b.ctx());
    let scale = Scalar::one(ctx).max(&a.abs()).max(&b.abs());
    (a - b).abs() < ctx.noise_floor(8) * scale
}

fn distinct(nodes: &[&Scalar]) -> Result<(), QuadratureError> {
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if nodes_coincide(a, b) {
                return Err(QuadratureError::DegenerateNodes);
            }
        }
    }
    Ok(())
}

/// Solves the three-node moment system for `x != y`.
///
/// Rows are exactness of the rule on `1`, `t` and `t²`:
///
/// ```text
/// w1 + w2                     = 0
/// w1 x  + w2 y  + w3          = 0
/// w1 x² + w2 y² + 2 w3 x      = 2 (y - x)
/// ```
pub fn solve_omega(x: &Scalar, y: &Scalar) -> Result<OmegaWeights, QuadratureError> {
    distinct(&[x, y])?;
    let one = x.lift(1);
    let zero = x.lift(0);
    let a = vec![
        vec![one.clone(), one.clone(), zero.clone()],
        vec![x.clone(), y.clone(), one],
        vec![x * x, y * y, x * 2],
    ];
    let b = vec![zero.clone(), zero, (y - x) * 2];
    let w = solve_linear(a, b)?;
    let [w1, w2, w3]: [Scalar; 3] = w.try_into().expect("three unknowns");
    Ok(OmegaWeights { w1, w2, w3 })
}

/// Solves the four-node moment system for pairwise distinct `x, y, z`.
///
/// Rows are exactness on `1, t, t², t³`; the right-hand side is
/// `∫_x^z (t^k)'' dt = k (z^(k-1) - x^(k-1))`.
pub fn solve_nu(x: &Scalar, y: &Scalar, z: &Scalar) -> Result<NuWeights, QuadratureError> {
    distinct(&[x, y, z])?;
    let one = x.lift(1);
    let zero = x.lift(0);
    let a = vec![
        vec![one.clone(), one.clone(), one.clone(), zero.clone()],
        vec![x.clone(), y.clone(), z.clone(), one],
        vec![x * x, y * y, z * z, x * 2],
        vec![x.powi(3), y.powi(3), z.powi(3), x * x * 3],
    ];
    let b = vec![zero.clone(), zero, (z - x) * 2, (z * z - x * x) * 3];
    let v = solve_linear(a, b)?;
    let [v1, v2, v3, v4]: [Scalar; 4] = v.try_into().expect("four unknowns");
    Ok(NuWeights { v1, v2, v3, v4 })
}

/// `f'(y) ≈ 2 (f(y) - f(x)) / (y - x) - f'(x)`; exact for quadratics.
pub fn approx_dfy(
    fx: &Scalar,
    fy: &Scalar,
    dfx: &Scalar,
    x: &Scalar,
    y: &Scalar,
) -> Result<Scalar, QuadratureError> {
    distinct(&[x, y])?;
    Ok((fy - fx) / (y - x) * 2 - dfx)
}

/// Closed-form `f'(z)` estimate from `f(x), f(y), f(z), f'(x)`; exact for
/// cubics.
///
/// With `D = (x-y)² (y-z) (x-z)` the estimate is `B / D` where
///
/// ```text
/// B = (y-z)² (x-z) (x-y) f'(x) - (x-y)² (x+2y-3z) f(z)
///   + (x-z)³ f(y) - (y-z)² (3x-2y-z) f(x)
/// ```
pub fn approx_dfz(
    fx: &Scalar,
    fy: &Scalar,
    fz: &Scalar,
    dfx: &Scalar,
    x: &Scalar,
    y: &Scalar,
    z: &Scalar,
) -> Result<Scalar, QuadratureError> {
    distinct(&[x, y, z])?;
    let xy = x - y;
    let yz = y - z;
    let xz = x - z;
    let xy2 = &xy * &xy;
    let yz2 = &yz * &yz;
    let bracket = &yz2 * &xz * &xy * dfx - &xy2 * (x + y * 2 - z * 3) * fz + xz.powi(3) * fy
        - &yz2 * (x * 3 - y * 2 - z) * fx;
    let denom = xy2 * yz * xz;
    Ok(bracket / denom)
}

/// Gaussian elimination with partial pivoting at the precision of the
/// inputs. A pivot below `10^(-digits+8)` times the largest entry of the
/// matrix is treated as singular.
pub fn solve_linear(
    mut a: Vec<Vec<Scalar>>,
    mut b: Vec<Scalar>,
) -> Result<Vec<Scalar>, QuadratureError> {
    let n = b.len();
    assert!(
        a.len() == n && a.iter().all(|r| r.len() == n),
        "square system"
    );
    let ctx = b[0].ctx();
    let scale = a
        .iter()
        .flatten()
        .fold(Scalar::zero(ctx), |m, v| m.max(&v.abs()));
    let tiny = ctx.noise_floor(8) * scale;

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty range");
        if !(a[pivot][col].abs() > tiny) {
            return Err(QuadratureError::Singular);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = &a[row][col] / &a[col][col];
            if factor.is_zero() {
                continue;
            }
            let pivot_row = a[col].clone();
            for (v, p) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                *v = &*v - &factor * p;
            }
            let delta = &factor * &b[col];
            b[row] = &b[row] - &delta;
        }
    }

    let mut x = vec![Scalar::zero(ctx); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - &a[row][k] * &x[k];
        }
        x[row] = acc / &a[row][row];
    }
    Ok(x)
}
