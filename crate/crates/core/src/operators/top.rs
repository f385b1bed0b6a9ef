use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::projectors::{n_static, r_static};
use super::AlgebraParams;
use crate::error::{Error, Result};
use crate::series::Series;

/// How small divisors `ω m + l` are policed: below `floor` is a hard error,
/// below `warn_below` is logged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorPolicy {
    pub floor: f64,
    pub warn_below: f64,
}

impl Default for DivisorPolicy {
    fn default() -> Self {
        Self {
            floor: 1e-13,
            warn_below: 1e-6,
        }
    }
}

impl DivisorPolicy {
    fn divisor(&self, omega: f64, l: i32, m: i32) -> Result<f64> {
        let d = omega * m as f64 + l as f64;
        if d.abs() < self.floor {
            if d.abs() < super::RESONANCE_EPS {
                return Err(Error::Resonance { l, m });
            }
            return Err(Error::SmallDivisor {
                l,
                m,
                value: d,
                floor: self.floor,
            });
        }
        if d.abs() < self.warn_below {
            log::warn!("near resonance at (l, m) = ({l}, {m}): divisor {d:e}");
        }
        Ok(d)
    }
}

/// Solves `(ω∂_θ + ∂_t) u = χ P_{≤1} f`:
/// `u = Σ_{(l,m)≠(0,0)} −i f_{l,m,n} / (ω m + l) xⁿ e^{i(lt+mθ)}` for n ≤ 1.
pub fn g_s(f: &Series, params: &AlgebraParams, policy: &DivisorPolicy) -> Result<Series> {
    let omega = params.omega();
    let mut out = Series::zero(f.rho(), f.trunc())?;
    for (l, m, n, c) in f.terms() {
        if n > 1 || (l == 0 && m == 0) {
            continue;
        }
        let d = policy.divisor(omega, l, m)?;
        out.set(l, m, n, Complex64::new(0.0, -1.0) * c / d)?;
    }
    Ok(out)
}

/// A derivation of the form `g ↦ {s, g} − shift · ∂_x g`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub s: Series,
    pub shift: Complex64,
}

impl Generator {
    pub fn apply(&self, g: &Series) -> Result<Series> {
        let flow = self.s.bracket(g)?;
        if self.shift == Complex64::new(0.0, 0.0) {
            return Ok(flow);
        }
        flow.sub(&g.dx().scale(self.shift))
    }

    pub fn neg(&self) -> Self {
        Self {
            s: self.s.neg(),
            shift: -self.shift,
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            s: self.s.scale_real(c),
            shift: self.shift * c,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.s.is_zero() && self.shift == Complex64::new(0.0, 0.0)
    }
}

/// The operator family attached to one unperturbed derivation
/// `ℋ = ω∂_θ + ∂_t + {½Qx², ·}`, with Q a function of (θ, t) only.
#[derive(Clone, Debug)]
pub struct TopOperators {
    params: AlgebraParams,
    q: Series,
    q00: f64,
    half_q_x2: Series,
    policy: DivisorPolicy,
}

impl TopOperators {
    /// Fails if Q depends on x, carries a different ρ, or `|Q₀₀| < min_twist`.
    pub fn new(params: AlgebraParams, q: Series, min_twist: f64) -> Result<Self> {
        params.validate()?;
        if q.rho() != params.rho {
            return Err(Error::RhoMismatch(q.rho(), params.rho));
        }
        if q.terms().any(|(_, _, n, _)| n > 0) {
            return Err(Error::InvalidParameter("Q must not depend on x".into()));
        }
        let q00 = q.coeff(0, 0, 0).re;
        if !(q00.abs() >= min_twist) {
            return Err(Error::Degenerate {
                q00: q00.abs(),
                q: min_twist,
            });
        }
        let half_q_x2 = q.x_times().x_times().scale_real(0.5);
        Ok(Self {
            params,
            q,
            q00,
            half_q_x2,
            policy: DivisorPolicy::default(),
        })
    }

    pub fn with_policy(mut self, policy: DivisorPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn params(&self) -> &AlgebraParams {
        &self.params
    }

    pub fn q(&self) -> &Series {
        &self.q
    }

    pub fn q00(&self) -> f64 {
        self.q00
    }

    pub fn policy(&self) -> &DivisorPolicy {
        &self.policy
    }

    pub fn g_s(&self, f: &Series) -> Result<Series> {
        g_s(f, &self.params, &self.policy)
    }

    /// `𝒜f = [f_{0,0,1} − ρ⁻¹ Σ_{(l,m)≠0} m Q_{−l,−m} f_{l,m,0} / (ωm + l)] / Q₀₀`.
    pub fn a_op(&self, f: &Series) -> Result<Complex64> {
        let omega = self.params.omega();
        let mut sum = Complex64::new(0.0, 0.0);
        for (l, m, n, c) in f.terms() {
            if n != 0 || m == 0 {
                continue;
            }
            let d = self.policy.divisor(omega, l, m)?;
            sum += self.q.coeff(-l, -m, 0) * c * (m as f64 / d);
        }
        Ok((f.coeff(0, 0, 1) - sum / self.params.rho) / self.q00)
    }

    /// `w(f) = Q 𝒜f + ρ⁻¹ Q ∂_θ 𝒢_s P₀ f`.
    pub fn w(&self, f: &Series) -> Result<Series> {
        let a = self.a_op(f)?;
        let p0 = f.filter(|_, _, n| n == 0);
        let twisted = self
            .q
            .mul(&self.g_s(&p0)?.dtheta())?
            .scale_real(1.0 / self.params.rho);
        self.q.scale(a).add(&twisted)
    }

    /// The derivation Γf = {𝒢_s f − x 𝒢_s w(f), ·} − (𝒜f) ∂_x.
    pub fn generator(&self, f: &Series) -> Result<Generator> {
        let shift = self.a_op(f)?;
        let s = self.g_s(f)?.sub(&self.g_s(&self.w(f)?)?.x_times())?;
        Ok(Generator { s, shift })
    }

    /// (Γf) g.
    pub fn gamma_apply(&self, f: &Series, g: &Series) -> Result<Series> {
        self.generator(f)?.apply(g)
    }

    /// `𝒦f = ρ²x₀Δ 𝒜f + {½Qx², x 𝒢_s(P₀∂_x f − w(f))}`.
    pub fn k_op(&self, f: &Series) -> Result<Series> {
        let a = self.a_op(f)?;
        let p0_dx = f.dx().filter(|_, _, n| n == 0);
        let inner = self.g_s(&p0_dx.sub(&self.w(f)?)?)?.x_times();
        let mut k = self.half_q_x2.bracket(&inner)?;
        let c = self.params.rho * self.params.rho * self.params.x0 * self.params.delta() * a;
        k.set(0, 0, 0, k.coeff(0, 0, 0) + c)?;
        Ok(k)
    }

    /// ℛ = ℛ_s − 𝒦.
    pub fn r_proj(&self, f: &Series) -> Result<Series> {
        r_static(f).sub(&self.k_op(f)?)
    }

    /// 𝒩 = 𝒩_s + 𝒦.
    pub fn n_proj(&self, f: &Series) -> Result<Series> {
        n_static(f).add(&self.k_op(f)?)
    }

    /// ℋg = ω∂_θ g + ∂_t g + {½Qx², g}.
    pub fn unperturbed(&self, g: &Series) -> Result<Series> {
        let transport = g.dtheta().scale_real(self.params.omega()).add(&g.dt())?;
        transport.add(&self.half_q_x2.bracket(g)?)
    }

    /// max over probes g of `‖W(ℋ(Γf g) − Γf(ℋg) − {𝒩f, g})‖_r / (‖f‖_r ‖g‖_r)`,
    /// W the inner-window restriction.
    pub fn homological_residual(&self, f: &Series, probes: &[Series], r: f64) -> Result<f64> {
        let gen = self.generator(f)?;
        let nf = self.n_proj(f)?;
        let fnorm = f.majorant(r);
        let mut worst = 0.0f64;
        for g in probes {
            let lhs = self
                .unperturbed(&gen.apply(g)?)?
                .sub(&gen.apply(&self.unperturbed(g)?)?)?;
            let residual = lhs.sub(&nf.bracket(g)?)?.windowed().majorant(r);
            worst = worst.max(relative(residual, fnorm * g.majorant(r)));
        }
        Ok(worst)
    }

    /// max over probes of `‖W(Γ(ℛf) g)‖_r / (‖f‖_r ‖g‖_r)`.
    pub fn gr_zero_residual(&self, f: &Series, probes: &[Series], r: f64) -> Result<f64> {
        let gen = self.generator(&self.r_proj(f)?)?;
        let fnorm = f.majorant(r);
        let mut worst = 0.0f64;
        for g in probes {
            let residual = gen.apply(g)?.windowed().majorant(r);
            worst = worst.max(relative(residual, fnorm * g.majorant(r)));
        }
        Ok(worst)
    }
}

pub(crate) fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}
