//! Truncated Fourier–Taylor series in (x, θ, t).
//!
//! A [`Series`] stores the coefficients of
//! `Σ c[l, m, n] xⁿ e^{i(l t + m θ)}` densely over the box
//! `|l| ≤ L_t`, `|m| ≤ L_θ`, `0 ≤ n ≤ N_x`. The bracket is the reduced
//! Poisson bracket `{F, G} = (F_x G_θ − F_θ G_x) / ρ`.

mod json;
mod norm;

pub use json::{CoeffRecord, SeriesDocument};
pub use norm::{cauchy_bound_check, CauchyMargin, CauchyReport, NormEstimate, NormKind, NormScale};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const REALITY_TOL: f64 = 1e-12;

/// Index bounds of a truncated series, plus the safety margin used when
/// identities are compared on the inner window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    #[serde(rename = "N_x")]
    pub n_x: usize,
    #[serde(rename = "L_theta")]
    pub l_theta: usize,
    #[serde(rename = "L_t")]
    pub l_t: usize,
    pub pad: usize,
}

/// Inclusive bounds of the inner window, `bounds − 2·pad` in every direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub l_max: i32,
    pub m_max: i32,
    pub n_max: i32,
}

impl TruncationSpec {
    pub fn new(n_x: usize, l_theta: usize, l_t: usize, pad: usize) -> Result<Self> {
        let spec = Self {
            n_x,
            l_theta,
            l_t,
            pad,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pad > self.n_x.min(self.l_theta).min(self.l_t) {
            return Err(Error::InvalidParameter(format!(
                "pad {} exceeds min(N_x, L_theta, L_t) of {:?}",
                self.pad, self
            )));
        }
        Ok(())
    }

    /// Elementwise maximum of two truncations. The pad is kept admissible.
    pub fn merge(&self, other: &Self) -> Self {
        let n_x = self.n_x.max(other.n_x);
        let l_theta = self.l_theta.max(other.l_theta);
        let l_t = self.l_t.max(other.l_t);
        let pad = self.pad.max(other.pad).min(n_x.min(l_theta).min(l_t));
        Self {
            n_x,
            l_theta,
            l_t,
            pad,
        }
    }

    pub fn contains(&self, l: i32, m: i32, n: usize) -> bool {
        l.unsigned_abs() as usize <= self.l_t
            && m.unsigned_abs() as usize <= self.l_theta
            && n <= self.n_x
    }

    pub fn window(&self) -> Window {
        let shrink = 2 * self.pad as i32;
        Window {
            l_max: self.l_t as i32 - shrink,
            m_max: self.l_theta as i32 - shrink,
            n_max: self.n_x as i32 - shrink,
        }
    }

    fn len(&self) -> usize {
        (2 * self.l_t + 1) * (2 * self.l_theta + 1) * (self.n_x + 1)
    }

    fn index(&self, l: i32, m: i32, n: usize) -> usize {
        let dm = 2 * self.l_theta + 1;
        let dn = self.n_x + 1;
        let li = (l + self.l_t as i32) as usize;
        let mi = (m + self.l_theta as i32) as usize;
        (li * dm + mi) * dn + n
    }

    fn unindex(&self, idx: usize) -> (i32, i32, usize) {
        let dm = 2 * self.l_theta + 1;
        let dn = self.n_x + 1;
        let n = idx % dn;
        let rest = idx / dn;
        let mi = rest % dm;
        let li = rest / dm;
        (
            li as i32 - self.l_t as i32,
            mi as i32 - self.l_theta as i32,
            n,
        )
    }
}

impl Window {
    pub fn contains(&self, l: i32, m: i32, n: usize) -> bool {
        l.abs() <= self.l_max && m.abs() <= self.m_max && (n as i32) <= self.n_max
    }
}

/// A truncated Fourier–Taylor series with its Casimir value ρ.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    rho: f64,
    trunc: TruncationSpec,
    coeffs: Vec<Complex64>,
}

impl Series {
    pub fn zero(rho: f64, trunc: TruncationSpec) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rho must be positive, got {rho}"
            )));
        }
        trunc.validate()?;
        Ok(Self::zero_unchecked(rho, trunc))
    }

    fn zero_unchecked(rho: f64, trunc: TruncationSpec) -> Self {
        Self {
            rho,
            trunc,
            coeffs: vec![Complex64::new(0.0, 0.0); trunc.len()],
        }
    }

    pub fn constant(rho: f64, trunc: TruncationSpec, value: f64) -> Result<Self> {
        let mut s = Self::zero(rho, trunc)?;
        s.set(0, 0, 0, Complex64::new(value, 0.0))?;
        Ok(s)
    }

    /// The single term `c xⁿ e^{i(l t + m θ)}`, which is complex unless (l, m) = (0, 0).
    pub fn monomial(
        rho: f64,
        trunc: TruncationSpec,
        l: i32,
        m: i32,
        n: usize,
        c: Complex64,
    ) -> Result<Self> {
        let mut s = Self::zero(rho, trunc)?;
        s.set(l, m, n, c)?;
        Ok(s)
    }

    /// Builds a real series from `(l, m, n, c)` terms, each meaning
    /// `c xⁿ e^{i(lt+mθ)} + conj`, or `Re(c) xⁿ` when (l, m) = (0, 0).
    pub fn real_from_terms(
        rho: f64,
        trunc: TruncationSpec,
        terms: &[(i32, i32, usize, Complex64)],
    ) -> Result<Self> {
        let mut s = Self::zero(rho, trunc)?;
        for &(l, m, n, c) in terms {
            if !trunc.contains(l, m, n) {
                return Err(Error::OutOfBounds { l, m, n });
            }
            if l == 0 && m == 0 {
                s.coeffs[trunc.index(0, 0, n)] += Complex64::new(c.re, 0.0);
            } else {
                s.coeffs[trunc.index(l, m, n)] += c;
                s.coeffs[trunc.index(-l, -m, n)] += c.conj();
            }
        }
        Ok(s)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn trunc(&self) -> TruncationSpec {
        self.trunc
    }

    pub fn coeff(&self, l: i32, m: i32, n: usize) -> Complex64 {
        if self.trunc.contains(l, m, n) {
            self.coeffs[self.trunc.index(l, m, n)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, l: i32, m: i32, n: usize, c: Complex64) -> Result<()> {
        if !self.trunc.contains(l, m, n) {
            return Err(Error::OutOfBounds { l, m, n });
        }
        let idx = self.trunc.index(l, m, n);
        self.coeffs[idx] = c;
        Ok(())
    }

    /// Nonzero coefficients as `(l, m, n, c)`.
    pub fn terms(&self) -> impl Iterator<Item = (i32, i32, usize, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(idx, &c)| {
                let (l, m, n) = self.trunc.unindex(idx);
                (l, m, n, c)
            })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of `c[-l,-m,n] = conj(c[l,m,n])`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let (l, m, n) = self.trunc.unindex(idx);
            let mirror = self.coeffs[self.trunc.index(-l, -m, n)];
            worst = worst.max((c - mirror.conj()).norm());
        }
        worst
    }

    pub fn is_real(&self) -> bool {
        self.reality_defect() <= REALITY_TOL * self.max_abs().max(1.0)
    }

    /// Projection onto real series: `(f + conj-mirror(f)) / 2`.
    pub fn realized(&self) -> Self {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            let (l, m, n) = self.trunc.unindex(idx);
            let mirror = self.coeffs[self.trunc.index(-l, -m, n)];
            *c = (self.coeffs[idx] + mirror.conj()) * 0.5;
        }
        out
    }

    /// Re-embeds into another truncation, dropping coefficients that do not fit.
    pub fn resized(&self, trunc: TruncationSpec) -> Self {
        let mut out = Self::zero_unchecked(self.rho, trunc);
        for (l, m, n, c) in self.terms() {
            if trunc.contains(l, m, n) {
                out.coeffs[trunc.index(l, m, n)] = c;
            }
        }
        out
    }

    /// Zeroes every coefficient outside the inner window.
    pub fn windowed(&self) -> Self {
        let window = self.trunc.window();
        self.filter(|l, m, n| window.contains(l, m, n))
    }

    /// Keeps the coefficients whose indices satisfy `keep`.
    pub fn filter(&self, keep: impl Fn(i32, i32, usize) -> bool) -> Self {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            let (l, m, n) = self.trunc.unindex(idx);
            if !keep(l, m, n) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Coefficientwise map `c[l,m,n] ↦ g(l, m, n, c)`.
    pub fn map(&self, g: impl Fn(i32, i32, usize, Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            let (l, m, n) = self.trunc.unindex(idx);
            *c = g(l, m, n, *c);
        }
        out
    }

    fn check_rho(&self, other: &Self) -> Result<()> {
        if self.rho != other.rho {
            return Err(Error::RhoMismatch(self.rho, other.rho));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, alpha: f64) -> Result<Self> {
        self.check_rho(other)?;
        if self.trunc == other.trunc {
            let mut out = self.clone();
            for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
                *a += b * alpha;
            }
            return Ok(out);
        }
        let trunc = self.trunc.merge(&other.trunc);
        let mut out = self.resized(trunc);
        for (l, m, n, c) in other.terms() {
            out.coeffs[trunc.index(l, m, n)] += c * alpha;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|a| *a *= c);
        out
    }

    pub fn scale_real(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|a| *a *= c);
        out
    }

    pub fn neg(&self) -> Self {
        self.scale_real(-1.0)
    }

    /// Truncated product. Coefficients outside the merged box are dropped.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_rho(other)?;
        let trunc = self.trunc.merge(&other.trunc);
        let mut out = Self::zero_unchecked(self.rho, trunc);
        let a: Vec<_> = self.terms().collect();
        let b: Vec<_> = other.terms().collect();
        for &(l1, m1, n1, c1) in &a {
            for &(l2, m2, n2, c2) in &b {
                let (l, m, n) = (l1 + l2, m1 + m2, n1 + n2);
                if trunc.contains(l, m, n) {
                    out.coeffs[trunc.index(l, m, n)] += c1 * c2;
                }
            }
        }
        out.debug_check_reality(self, other);
        Ok(out)
    }

    /// Truncated product together with the dropped tail, returned as a series
    /// on the enlarged box (zero inside the truncation box).
    pub fn mul_with_tail(&self, other: &Self) -> Result<(Self, Self)> {
        self.check_rho(other)?;
        let trunc = self.trunc.merge(&other.trunc);
        let wide = TruncationSpec {
            n_x: self.trunc.n_x + other.trunc.n_x,
            l_theta: self.trunc.l_theta + other.trunc.l_theta,
            l_t: self.trunc.l_t + other.trunc.l_t,
            pad: 0,
        };
        let mut full = Self::zero_unchecked(self.rho, wide);
        let b: Vec<_> = other.terms().collect();
        for (l1, m1, n1, c1) in self.terms() {
            for &(l2, m2, n2, c2) in &b {
                full.coeffs[wide.index(l1 + l2, m1 + m2, n1 + n2)] += c1 * c2;
            }
        }
        let kept = full.resized(trunc);
        let tail = full.filter(|l, m, n| !trunc.contains(l, m, n));
        Ok((kept, tail))
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero_unchecked(self.rho, self.trunc);
        for (l, m, n, c) in self.terms() {
            if n > 0 {
                out.coeffs[self.trunc.index(l, m, n - 1)] = c * n as f64;
            }
        }
        out
    }

    pub fn dtheta(&self) -> Self {
        self.map(|_, m, _, c| c * Complex64::new(0.0, m as f64))
    }

    pub fn dt(&self) -> Self {
        self.map(|l, _, _, c| c * Complex64::new(0.0, l as f64))
    }

    /// Multiplication by x; the top degree is dropped.
    pub fn x_times(&self) -> Self {
        let mut out = Self::zero_unchecked(self.rho, self.trunc);
        for (l, m, n, c) in self.terms() {
            if n < self.trunc.n_x {
                out.coeffs[self.trunc.index(l, m, n + 1)] = c;
            }
        }
        out
    }

    /// `{self, other} = (∂_x self ∂_θ other − ∂_θ self ∂_x other) / ρ`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check_rho(other)?;
        let first = self.dx().mul(&other.dtheta())?;
        let second = self.dtheta().mul(&other.dx())?;
        Ok(first.sub(&second)?.scale_real(1.0 / self.rho))
    }

    /// Complex value of the series at (x, θ, t).
    pub fn evaluate_complex(&self, x: f64, theta: f64, t: f64) -> Complex64 {
        let lt = self.trunc.l_t as i32;
        let lm = self.trunc.l_theta as i32;
        let time: Vec<Complex64> = (-lt..=lt)
            .map(|l| Complex64::from_polar(1.0, l as f64 * t))
            .collect();
        let angle: Vec<Complex64> = (-lm..=lm)
            .map(|m| Complex64::from_polar(1.0, m as f64 * theta))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (l, m, n, c) in self.terms() {
            total += c * x.powi(n as i32) * time[(l + lt) as usize] * angle[(m + lm) as usize];
        }
        total
    }

    /// Real value at (x, θ, t) with the default domain radius of [`NormScale`].
    pub fn evaluate(&self, x: f64, theta: f64, t: f64) -> Result<f64> {
        NormScale::default().evaluate(self, x, theta, t)
    }

    /// Majorant norm with the default scale, skipping the budget check.
    pub fn majorant(&self, r: f64) -> f64 {
        NormScale::default().majorant_value(self, r)
    }

    fn debug_check_reality(&self, a: &Self, b: &Self) {
        if cfg!(debug_assertions) && a.is_real() && b.is_real() {
            let defect = self.reality_defect();
            debug_assert!(
                defect <= REALITY_TOL * self.max_abs().max(1.0),
                "product of real series lost reality (defect {defect:e})"
            );
        }
    }
}
