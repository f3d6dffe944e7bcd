//! Correlation machinery shared by the CI tests.

use crate::Scalar;

pub fn mean<T: Scalar>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / T::of(x.len() as f64)
}

pub fn centered<T: Scalar>(x: &[T]) -> Vec<T> {
    let m = mean(x);
    x.iter().map(|&v| v - m).collect()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Pearson correlation, `None` when either input has zero variance.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    let (xc, yc) = (centered(x), centered(y));
    let (sxx, syy) = (dot(&xc, &xc), dot(&yc, &yc));
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    let r = dot(&xc, &yc) / (sxx.sqrt() * syy.sqrt());
    Some(r.max(-T::one()).min(T::one()))
}

/// Whether every entry equals the first.
pub fn is_constant<T: Scalar>(x: &[T]) -> bool {
    x.windows(2).all(|w| w[0] == w[1])
}

/// Solves the symmetric system `a * beta = b` by Gauss-Jordan elimination with
/// partial pivoting. Directions whose pivot falls below a relative tolerance
/// are treated as linearly dependent and get coefficient zero.
fn solve_normal<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Vec<T> {
    let k = b.len();
    let scale = (0..k).map(|i| a[i][i].abs()).fold(T::zero(), T::max);
    let tol = scale * T::epsilon() * T::of(1e3);
    let mut active = vec![true; k];
    for col in 0..k {
        let pivot_row = (col..k).max_by(|&p, &q| a[p][col].abs().partial_cmp(&a[q][col].abs()).expect("finite"));
        let Some(p) = pivot_row else { break };
        if a[p][col].abs() <= tol {
            active[col] = false;
            continue;
        }
        a.swap(col, p);
        b.swap(col, p);
        let piv = a[col][col];
        for r in 0..k {
            if r != col {
                let f = a[r][col] / piv;
                if f != T::zero() {
                    for c in col..k {
                        let v = a[col][c];
                        a[r][c] = a[r][c] - f * v;
                    }
                    b[r] = b[r] - f * b[col];
                }
            }
        }
    }
    (0..k).map(|i| if active[i] && a[i][i] != T::zero() { b[i] / a[i][i] } else { T::zero() }).collect()
}

/// Residual of `y` after least-squares projection on `conds` (with intercept).
pub fn residualize<T: Scalar>(y: &[T], conds: &[Vec<T>]) -> Vec<T> {
    let yc = centered(y);
    if conds.is_empty() {
        return yc;
    }
    let zc: Vec<Vec<T>> = conds.iter().map(|z| centered(z)).collect();
    let k = zc.len();
    let gram: Vec<Vec<T>> = (0..k).map(|i| (0..k).map(|j| dot(&zc[i], &zc[j])).collect()).collect();
    let rhs: Vec<T> = zc.iter().map(|z| dot(z, &yc)).collect();
    let beta = solve_normal(gram, rhs);
    (0..yc.len()).map(|r| yc[r] - (0..k).map(|i| beta[i] * zc[i][r]).sum::<T>()).collect()
}

/// Partial correlation of `x` and `y` given `conds`, by correlating
/// regression residuals. A residual with no variance left (the variable is a
/// linear function of the conditioning set) yields zero.
pub fn partial_correlation<T: Scalar>(x: &[T], y: &[T], conds: &[Vec<T>]) -> T {
    let rx = residualize(x, conds);
    let ry = residualize(y, conds);
    let tiny = T::epsilon().sqrt();
    let var_x = dot(&centered(x), &centered(x));
    let var_y = dot(&centered(y), &centered(y));
    if dot(&rx, &rx) <= tiny * var_x || dot(&ry, &ry) <= tiny * var_y {
        return T::zero();
    }
    pearson(&rx, &ry).unwrap_or_else(T::zero)
}

/// Two-sided standard normal tail probability `P(|Z| >= z)`.
pub fn two_sided_normal_p(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}
