//! Exponentials of the generator and the transformed perturbation V_*.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{Generator, TopOperators};
use crate::series::Series;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieSeriesConfig {
    /// Stop once a term's majorant norm falls below this.
    pub tol: f64,
    /// Norm index used for the stopping test.
    pub r: f64,
    pub max_terms: usize,
    /// Number of consecutive non-decreasing term norms treated as divergence.
    pub stall_window: usize,
}

impl Default for LieSeriesConfig {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            r: 0.5,
            max_terms: 40,
            stall_window: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieSeriesOutcome {
    pub value: Series,
    pub terms: usize,
    pub tail_norm: f64,
}

/// Sums `Σ_{k≥1} u_k` with `u_0 = first`, `u_k = gen(u_{k−1}) / (k + offset)`.
fn sum_terms(
    gen: &Generator,
    first: &Series,
    offset: usize,
    cfg: &LieSeriesConfig,
) -> Result<LieSeriesOutcome> {
    let mut term = first.clone();
    let mut total = Series::zero(first.rho(), first.trunc())?;
    let mut prev = f64::INFINITY;
    let mut stalled = 0;
    let mut tail = 0.0;
    for k in 1..=cfg.max_terms {
        term = gen.apply(&term)?.scale_real(1.0 / (k + offset) as f64);
        total = total.add(&term)?;
        tail = term.majorant(cfg.r);
        if tail < cfg.tol {
            return Ok(LieSeriesOutcome {
                value: total,
                terms: k,
                tail_norm: tail,
            });
        }
        stalled = if tail >= prev { stalled + 1 } else { 0 };
        if stalled >= cfg.stall_window {
            return Err(Error::Divergence {
                terms: k,
                norm: tail,
            });
        }
        prev = tail;
    }
    Ok(LieSeriesOutcome {
        value: total,
        terms: cfg.max_terms,
        tail_norm: tail,
    })
}

/// `e^{gen} g = Σ genⁿ g / n!`.
pub fn lie_exp_apply(
    gen: &Generator,
    g: &Series,
    cfg: &LieSeriesConfig,
) -> Result<LieSeriesOutcome> {
    let rest = sum_terms(gen, g, 0, cfg)?;
    Ok(LieSeriesOutcome {
        value: g.add(&rest.value)?,
        ..rest
    })
}

/// Output of one conjugation step.
#[derive(Clone, Debug, PartialEq)]
pub struct LieTransformResult {
    pub v_star: Series,
    /// ℛV, the part absorbed into the new unperturbed derivation.
    pub rv: Series,
    /// Q + ∂²ₓₓ(ℛV) at x = 0.
    pub q_star: Series,
    pub series_terms_used: usize,
    pub tail_norm: f64,
}

/// `V_* = Σ_{l≥1} (ΓV)ˡ V / l! − Σ_{k≥1} (ΓV)ᵏ 𝒩V / (k+1)!`, i.e.
/// `(e^{ΓV} − 1)V − ((e^{ΓV} − 1 − ΓV)/ΓV) 𝒩V` expanded as power series.
pub fn compute_v_star(
    v: &Series,
    ops: &TopOperators,
    cfg: &LieSeriesConfig,
) -> Result<LieTransformResult> {
    let gen = ops.generator(v)?;
    let nv = ops.n_proj(v)?;
    let rv = v.sub(&nv)?;
    let first = sum_terms(&gen, v, 0, cfg)?;
    let second = sum_terms(&gen, &nv, 1, cfg)?;
    let tail_norm = first.tail_norm.max(second.tail_norm);
    if tail_norm >= cfg.tol && !(first.value.is_zero() && second.value.is_zero()) {
        return Err(Error::NotConverged {
            terms: cfg.max_terms,
            tail: tail_norm,
            tol: cfg.tol,
        });
    }
    let v_star = first.value.sub(&second.value)?;
    let curvature = rv.dx().dx().filter(|_, _, n| n == 0);
    let q_star = ops
        .q()
        .add(&curvature)?
        .resized(ops.q().trunc().merge(&curvature.trunc()));
    Ok(LieTransformResult {
        v_star,
        rv,
        q_star,
        series_terms_used: first.terms.max(second.terms),
        tail_norm,
    })
}

/// Largest windowed norm, over the probes g, of
/// `e^{ΓV}(ℋ + {V,·})(e^{−ΓV} g) − (ℋ g + {ℛV, g} + {V_*, g})`.
pub fn conjugacy_residual(
    v: &Series,
    ops: &TopOperators,
    step: &LieTransformResult,
    probes: &[Series],
    cfg: &LieSeriesConfig,
) -> Result<f64> {
    let gen = ops.generator(v)?;
    let back = gen.neg();
    let mut worst = 0.0f64;
    for g in probes {
        let pulled = lie_exp_apply(&back, g, cfg)?.value;
        let moved = ops.unperturbed(&pulled)?.add(&v.bracket(&pulled)?)?;
        let lhs = lie_exp_apply(&gen, &moved, cfg)?.value;
        let rhs = ops
            .unperturbed(g)?
            .add(&step.rv.bracket(g)?)?
            .add(&step.v_star.bracket(g)?)?;
        worst = worst.max(lhs.sub(&rhs)?.windowed().majorant(cfg.r));
    }
    Ok(worst)
}

/// Least-squares fit of `log y = slope · log x + log κ`; returns (slope, κ).
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter(
            "power-law fit needs two or more positive pairs".into(),
        ));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mx).exp()))
}
