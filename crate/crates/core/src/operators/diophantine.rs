//! Lattice scan for the Diophantine constant of a frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Divisors with modulus below this are treated as exact resonances.
pub const RESONANCE_EPS: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineEstimate {
    pub gamma: f64,
    pub l: i32,
    pub m: i32,
    pub k_scan: usize,
}

/// `γ̂ = min |ω m + l| (|l| + |m|)^τ` over `0 < |l| + |m| ≤ k_scan`, with the
/// minimizing pair. Pairs are visited shell by shell and only one of
/// `(l, m)`, `(−l, −m)` is kept: the one with `m > 0`, or `l > 0` when `m = 0`.
pub fn estimate_diophantine(omega: f64, tau: f64, k_scan: usize) -> Result<DiophantineEstimate> {
    if k_scan == 0 {
        return Err(Error::InvalidParameter("k_scan must be at least 1".into()));
    }
    if !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "frequency must be finite, got {omega}"
        )));
    }
    let mut best = DiophantineEstimate {
        gamma: f64::INFINITY,
        l: 0,
        m: 0,
        k_scan,
    };
    for k in 1..=k_scan as i32 {
        for m in (0..=k).rev() {
            let rest = k - m;
            let ls: &[i32] = if rest == 0 {
                &[0]
            } else if m == 0 {
                &[1]
            } else {
                &[-1, 1]
            };
            for &sign in ls {
                let l = sign * rest;
                let divisor = (omega * m as f64 + l as f64).abs();
                if divisor < RESONANCE_EPS {
                    return Err(Error::Resonance { l, m });
                }
                let g = divisor * (k as f64).powf(tau);
                if g < best.gamma {
                    best = DiophantineEstimate {
                        gamma: g,
                        l,
                        m,
                        k_scan,
                    };
                }
            }
        }
    }
    Ok(best)
}
