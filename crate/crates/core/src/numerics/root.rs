use crate::{Error, Result};

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

const MAX_ITER: usize = 400;

/// Bracketed bisection.
///
/// Returns the midpoint of the final bracket once its width is at most `tol`
/// (or an exact zero if one is hit). Fully deterministic.
pub fn find_root<F>(mut f: F, bracket: (f64, f64), tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { a, fa, b, fb });
    }
    for _ in 0..MAX_ITER {
        let m = a + 0.5 * (b - a);
        if b - a <= tol || m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(a + 0.5 * (b - a))
}
