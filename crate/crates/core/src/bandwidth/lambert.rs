//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::{LabError, Result};

const INV_E: f64 = 1.0 / E;
// e split into a double plus its rounding error, for accurate 1 + e·x near -1/e.
const E_HI: f64 = E;
const E_LO: f64 = 1.445_646_891_729_250_2e-16;

/// W₀(x): the solution w ≥ -1 of w·eʷ = x, for x ≥ -1/e.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(LabError::domain("lambert_w0 of NaN"));
    }
    let offset = x.mul_add(E_HI, 1.0) + x * E_LO;
    if offset < 0.0 {
        if offset > -4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(LabError::domain(format!("lambert_w0 requires x >= -1/e, got {x}")));
    }
    Ok(w0_with_offset(x, offset))
}

/// W₀ given both x and its distance to the branch point `offset = 1 + e·x`,
/// which callers can often compute without cancellation.
pub(crate) fn w0_with_offset(x: f64, offset: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut w = initial_guess(x, offset);
    if offset < 1e-6 {
        // The branch-point series is already at machine precision here, and
        // Halley's denominator vanishes at w = -1.
        return w;
    }
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            break;
        }
        let next = w - step;
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next.max(-1.0);
        if done {
            break;
        }
    }
    w
}

fn initial_guess(x: f64, offset: f64) -> f64 {
    if offset < 0.5 {
        // series about the branch point in p = sqrt(2(1 + e·x))
        let p = (2.0 * offset).sqrt();
        -1.0 + p * (1.0
            + p * (-1.0 / 3.0
                + p * (11.0 / 72.0
                    + p * (-43.0 / 540.0 + p * (769.0 / 17280.0 + p * (-221.0 / 8505.0))))))
    } else if x < 3.0 {
        // Padé-like start that is good on the moderate range
        let l = x.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// Position of the branch point, -1/e.
pub const BRANCH_POINT: f64 = -INV_E;
