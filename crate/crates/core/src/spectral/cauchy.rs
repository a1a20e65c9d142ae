//! Three independent evaluators of the Cauchy transform `G(z) = ∫ dμ(x)/(z − x)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::chebyshev::chebyshev_u_complex;
use super::measure::{DiscreteMeasure, JacobiParams};

pub const DENOMINATOR_FLOOR: f64 = 1e-300;

fn check_upper(z: Complex64) -> Result<()> {
    if z.im > 0.0 {
        Ok(())
    } else {
        Err(Error::NotInUpperHalfPlane(z.im))
    }
}

/// `Σ b_i / (z − z_i)`.
pub fn cauchy_rational(measure: &DiscreteMeasure, z: Complex64) -> Result<Complex64> {
    check_upper(z)?;
    Ok(measure.atoms.iter().map(|a| a.b / (z - a.z)).sum())
}

/// Continued fraction `1/(z − α_0 − β_0/(z − α_1 − β_1/(…)))` with `depth`
/// levels, evaluated bottom-up.
pub fn cauchy_cfrac(params: &JacobiParams, z: Complex64, depth: usize) -> Result<Complex64> {
    check_upper(z)?;
    let mut g = Complex64::default();
    for level in (0..depth).rev() {
        let denom = z - params.alpha(level) - params.beta(level) * g;
        if denom.norm() < DENOMINATOR_FLOOR {
            return Err(Error::NearZeroDenominator { level });
        }
        g = denom.inv();
    }
    Ok(g)
}

/// Exact finite continued fraction of the m-truncated vacuum measure.
pub fn cauchy_cfrac_truncated(m: usize, t: f64, z: Complex64) -> Result<Complex64> {
    cauchy_cfrac(&JacobiParams::truncated(m, t), z, m + 1)
}

/// `G_t^(m)(z) = 1/(z − G_1^(m−1)(z/√t)/√t)` with the free transform
/// `G_1^(m−1)(w) = U_{m−1}(w/2)/U_m(w/2)`.
pub fn cauchy_hierarchy(m: usize, t: f64, z: Complex64) -> Result<Complex64> {
    if m < 1 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    check_upper(z)?;
    let st = t.sqrt();
    let w = z / st;
    let den = chebyshev_u_complex(m, w / 2.0);
    if den.norm() < DENOMINATOR_FLOOR {
        return Err(Error::NearZeroDenominator { level: 1 });
    }
    let free = chebyshev_u_complex(m - 1, w / 2.0) / den;
    let outer = z - free / st;
    if outer.norm() < DENOMINATOR_FLOOR {
        return Err(Error::NearZeroDenominator { level: 0 });
    }
    Ok(outer.inv())
}
