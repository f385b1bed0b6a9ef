//! Coefficient filters in harmonic and degree.

use crate::error::{Error, Result};
use crate::series::Series;

/// Mean over (θ, t): keeps the (l, m) = (0, 0) coefficients.
pub fn average(f: &Series) -> Series {
    f.filter(|l, m, _| l == 0 && m == 0)
}

/// `f − average(f)`.
pub fn fluctuation(f: &Series) -> Series {
    f.filter(|l, m, _| l != 0 || m != 0)
}

fn check_degree(f: &Series, k: usize) -> Result<()> {
    if k > f.trunc().n_x {
        return Err(Error::InvalidParameter(format!(
            "degree {k} exceeds N_x = {}",
            f.trunc().n_x
        )));
    }
    Ok(())
}

/// Keeps the xᵏ terms.
pub fn project_degree(f: &Series, k: usize) -> Result<Series> {
    check_degree(f, k)?;
    Ok(f.filter(|_, _, n| n == k))
}

pub fn project_degree_ge(f: &Series, k: usize) -> Result<Series> {
    check_degree(f, k)?;
    Ok(f.filter(|_, _, n| n >= k))
}

pub fn project_degree_le(f: &Series, k: usize) -> Result<Series> {
    check_degree(f, k)?;
    Ok(f.filter(|_, _, n| n <= k))
}

/// Part kept by the static normal form: the mean of the degree-0 terms
/// plus everything of degree ≥ 2.
pub fn r_static(f: &Series) -> Series {
    f.filter(|l, m, n| n >= 2 || (n == 0 && l == 0 && m == 0))
}

/// Complement of [`r_static`]: fluctuating degree-0 terms plus the degree-1 terms.
pub fn n_static(f: &Series) -> Series {
    f.filter(|l, m, n| n == 1 || (n == 0 && (l != 0 || m != 0)))
}
