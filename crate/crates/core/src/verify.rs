//! Randomized checks of the operator identities and the bound certificates.
//!
//! Every trial draws its inputs from `trial_rng(seed, trial)`, so a suite run
//! is reproducible and trials can be evaluated in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal_form::{certify_bounds, BoundConstants, BoundReport};
use crate::operators::{
    estimate_diophantine, n_static, r_static, AlgebraParams, DiophantineEstimate,
    DiophantineParams, TopOperators,
};
use crate::presets::noble_frequency;
use crate::sample::{random_series, random_twist, trial_rng, SeriesShape};
use crate::series::{Series, TruncationSpec, Window};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub rho: f64,
    pub i_perp: f64,
    pub i_3: f64,
    pub omega: f64,
    pub trunc: TruncationSpec,
    /// Norm index for the relative residuals.
    pub r: f64,
    /// Majorant norm of the fluctuating part of Q.
    pub twist_spread: f64,
    pub probes: usize,
    /// Constants for the bound certificates; γ ≤ 0 means "use the lattice estimate".
    pub diophantine: DiophantineParams,
    /// Losses d = δ = bound_loss · r.
    pub bound_loss: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1000,
            rho: 2.0,
            i_perp: 2.0,
            i_3: 3.0,
            omega: noble_frequency(),
            trunc: TruncationSpec {
                n_x: 6,
                l_theta: 8,
                l_t: 8,
                pad: 2,
            },
            r: 0.5,
            twist_spread: 0.05,
            probes: 2,
            diophantine: DiophantineParams {
                gamma: 0.0,
                tau: 1.0,
                q: 0.5,
                k_scan: 50,
            },
            bound_loss: 0.1,
        }
    }
}

/// Inputs shared by all checks in one trial.
#[derive(Clone, Debug)]
pub struct TrialInputs {
    pub ops: TopOperators,
    /// Random series filling the whole box.
    pub f: Series,
    /// Low-degree, low-harmonic test functions.
    pub probes: Vec<Series>,
    /// Small (W, Z, Q) triple for the bound certificates.
    pub triple: (Series, Series, Series),
    pub dio: DiophantineParams,
    pub r: f64,
    pub loss: f64,
}

pub trait IdentityCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn tolerance(&self) -> f64;
    /// Residual of one trial; the check passes when every residual is ≤ tolerance.
    fn residual(&self, input: &TrialInputs) -> Result<f64>;
}

fn norm(s: &Series, r: f64) -> f64 {
    s.windowed().majorant(r)
}

fn rel(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

struct RIdempotent;
impl IdentityCheck for RIdempotent {
    fn name(&self) -> &'static str {
        "r_idempotent"
    }
    fn tolerance(&self) -> f64 {
        1e-10
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        let rf = x.ops.r_proj(&x.f)?;
        Ok(rel(
            norm(&x.ops.r_proj(&rf)?.sub(&rf)?, x.r),
            x.f.majorant(x.r),
        ))
    }
}

struct NAnnihilatesR;
impl IdentityCheck for NAnnihilatesR {
    fn name(&self) -> &'static str {
        "n_annihilates_r"
    }
    fn tolerance(&self) -> f64 {
        1e-10
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        let rf = x.ops.r_proj(&x.f)?;
        Ok(rel(norm(&x.ops.n_proj(&rf)?, x.r), x.f.majorant(x.r)))
    }
}

struct RPlusN;
impl IdentityCheck for RPlusN {
    fn name(&self) -> &'static str {
        "r_plus_n"
    }
    fn tolerance(&self) -> f64 {
        1e-12
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        let sum = x.ops.r_proj(&x.f)?.add(&x.ops.n_proj(&x.f)?)?;
        Ok(rel(sum.sub(&x.f)?.majorant(x.r), x.f.majorant(x.r)))
    }
}

struct GammaAnnihilatesR;
impl IdentityCheck for GammaAnnihilatesR {
    fn name(&self) -> &'static str {
        "gamma_annihilates_r"
    }
    fn tolerance(&self) -> f64 {
        1e-9
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        x.ops.gr_zero_residual(&x.f, &x.probes, x.r)
    }
}

struct Homological;
impl IdentityCheck for Homological {
    fn name(&self) -> &'static str {
        "homological"
    }
    fn tolerance(&self) -> f64 {
        1e-9
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        x.ops.homological_residual(&x.f, &x.probes, x.r)
    }
}

/// (ω∂_θ + ∂_t) 𝒢_s f = χ P_{≤1} f.
struct GsHomological;
impl IdentityCheck for GsHomological {
    fn name(&self) -> &'static str {
        "gs_homological"
    }
    fn tolerance(&self) -> f64 {
        1e-12
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        let u = x.ops.g_s(&x.f)?;
        let lhs = u.dtheta().scale_real(x.ops.params().omega()).add(&u.dt())?;
        let rhs = x.f.filter(|l, m, n| n <= 1 && (l != 0 || m != 0));
        Ok(rel(lhs.sub(&rhs)?.majorant(x.r), x.f.majorant(x.r)))
    }
}

struct GsAnnihilatesRs;
impl IdentityCheck for GsAnnihilatesRs {
    fn name(&self) -> &'static str {
        "gs_annihilates_rs"
    }
    fn tolerance(&self) -> f64 {
        1e-12
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        Ok(rel(
            x.ops.g_s(&r_static(&x.f))?.majorant(x.r),
            x.f.majorant(x.r),
        ))
    }
}

struct AAnnihilatesRs;
impl IdentityCheck for AAnnihilatesRs {
    fn name(&self) -> &'static str {
        "a_annihilates_rs"
    }
    fn tolerance(&self) -> f64 {
        1e-12
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        Ok(rel(x.ops.a_op(&r_static(&x.f))?.norm(), x.f.majorant(x.r)))
    }
}

/// 𝒦f has only a constant and x² terms, so the static complement kills it.
struct KRange;
impl IdentityCheck for KRange {
    fn name(&self) -> &'static str {
        "k_range"
    }
    fn tolerance(&self) -> f64 {
        1e-10
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        Ok(rel(
            norm(&n_static(&x.ops.k_op(&x.f)?), x.r),
            x.f.majorant(x.r),
        ))
    }
}

/// Γf{g, h} = {Γf g, h} + {g, Γf h}.
struct GammaDerivation;
impl IdentityCheck for GammaDerivation {
    fn name(&self) -> &'static str {
        "gamma_derivation"
    }
    fn tolerance(&self) -> f64 {
        1e-10
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        let gen = x.ops.generator(&x.f)?;
        let mut worst = 0.0f64;
        for (i, g) in x.probes.iter().enumerate() {
            for h in &x.probes[i + 1..] {
                let lhs = gen.apply(&g.bracket(h)?)?;
                let rhs = gen.apply(g)?.bracket(h)?.add(&g.bracket(&gen.apply(h)?)?)?;
                let scale = x.f.majorant(x.r) * g.majorant(x.r) * h.majorant(x.r);
                worst = worst.max(rel(norm(&lhs.sub(&rhs)?, x.r), scale));
            }
        }
        Ok(worst)
    }
}

struct BracketJacobi;
impl IdentityCheck for BracketJacobi {
    fn name(&self) -> &'static str {
        "bracket_jacobi"
    }
    fn tolerance(&self) -> f64 {
        1e-10
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        let f = &x.f;
        let mut worst = 0.0f64;
        for (i, g) in x.probes.iter().enumerate() {
            for h in &x.probes[i + 1..] {
                let sum = f
                    .bracket(&g.bracket(h)?)?
                    .add(&g.bracket(&h.bracket(f)?)?)?
                    .add(&h.bracket(&f.bracket(g)?)?)?;
                let scale = f.majorant(x.r) * g.majorant(x.r) * h.majorant(x.r);
                worst = worst.max(rel(norm(&sum, x.r), scale));
            }
        }
        Ok(worst)
    }
}

/// Worst measured/bound ratio over the three certified estimates; ≤ 1 means
/// every margin is non-negative.
struct BoundMargins;
impl IdentityCheck for BoundMargins {
    fn name(&self) -> &'static str {
        "bound_margins"
    }
    fn tolerance(&self) -> f64 {
        1.0
    }
    fn residual(&self, x: &TrialInputs) -> Result<f64> {
        let (w, z, q) = &x.triple;
        let rep = certify_bounds(w, z, q, x.ops.params(), &x.dio, x.r, x.loss, x.loss)?;
        Ok([rep.gamma_term, rep.n_term, rep.r_term]
            .iter()
            .map(|m| rel(m.measured, m.bound))
            .fold(0.0, f64::max))
    }
}

pub fn registry() -> Vec<Box<dyn IdentityCheck>> {
    vec![
        Box::new(RIdempotent),
        Box::new(NAnnihilatesR),
        Box::new(RPlusN),
        Box::new(GammaAnnihilatesR),
        Box::new(Homological),
        Box::new(GsHomological),
        Box::new(GsAnnihilatesRs),
        Box::new(AAnnihilatesRs),
        Box::new(KRange),
        Box::new(GammaDerivation),
        Box::new(BracketJacobi),
        Box::new(BoundMargins),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub trials: usize,
    pub max_residual: f64,
    pub window: Window,
    pub seed: u64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: VerifyConfig,
    pub diophantine: DiophantineEstimate,
    pub identities: Vec<IdentityReport>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn first_failure(&self) -> Option<&IdentityReport> {
        self.identities.iter().find(|r| !r.passed)
    }
}

/// Random bound-certificate inputs: W and Z with harmonics and degree ≤ 2,
/// Q the given mean plus a first-harmonic fluctuation of norm `spread` at `r`.
pub fn random_triple(
    rng: &mut impl rand::Rng,
    rho: f64,
    q00: f64,
    spread: f64,
    r: f64,
) -> Result<(Series, Series, Series)> {
    let small = TruncationSpec::new(2, 2, 2, 0)?;
    let low = SeriesShape::low(2, 2, 1.0);
    let w = random_series(rng, rho, small, &low)?;
    let z = random_series(rng, rho, small, &low)?;
    let q = random_twist(rng, rho, small, q00, 1, spread, r)?;
    Ok((w, z, q))
}

fn draw(
    cfg: &VerifyConfig,
    params: &AlgebraParams,
    dio: &DiophantineParams,
    trial: u64,
) -> Result<TrialInputs> {
    let mut rng = trial_rng(cfg.seed, trial);
    let trunc = cfg.trunc;
    let f = random_series(&mut rng, cfg.rho, trunc, &SeriesShape::full(trunc))?;
    let q = random_twist(
        &mut rng,
        cfg.rho,
        trunc,
        params.twist(),
        1,
        cfg.twist_spread,
        cfg.r,
    )?;
    let probes = (0..cfg.probes)
        .map(|_| random_series(&mut rng, cfg.rho, trunc, &SeriesShape::low(1, 1, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    let triple = random_triple(&mut rng, cfg.rho, params.twist(), cfg.twist_spread, cfg.r)?;
    let ops = TopOperators::new(*params, q, dio.q)?;
    Ok(TrialInputs {
        ops,
        f,
        probes,
        triple,
        dio: *dio,
        r: cfg.r,
        loss: cfg.bound_loss * cfg.r,
    })
}

/// Runs every check on `cfg.trials` seeded trials. Fails up front if the
/// frequency is resonant inside the scan radius; identity failures are
/// reported, not returned as errors.
pub fn run_suite(cfg: &VerifyConfig, checks: &[Box<dyn IdentityCheck>]) -> Result<SuiteReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    if cfg.probes < 2 {
        return Err(Error::InvalidParameter("need at least two probes".into()));
    }
    cfg.trunc.validate()?;
    let params = AlgebraParams::with_frequency(cfg.rho, cfg.i_perp, cfg.i_3, cfg.omega)?;
    let k = cfg
        .diophantine
        .k_scan
        .max(cfg.trunc.l_t + cfg.trunc.l_theta);
    let diophantine = estimate_diophantine(cfg.omega, cfg.diophantine.tau, k)?;
    let mut dio = cfg.diophantine;
    if dio.gamma <= 0.0 {
        dio.gamma = diophantine.gamma;
    }
    dio.validate()?;

    let per_trial: Vec<Vec<f64>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let input = draw(cfg, &params, &dio, trial)?;
            checks
                .iter()
                .map(|c| c.residual(&input))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let identities: Vec<IdentityReport> = checks
        .iter()
        .enumerate()
        .map(|(j, c)| {
            // NaN residuals must fail, so fold with a NaN-propagating max.
            let max_residual = per_trial.iter().map(|row| row[j]).fold(0.0, |a: f64, b| {
                if b.is_nan() || b > a {
                    b
                } else {
                    a
                }
            });
            IdentityReport {
                identity: c.name().to_string(),
                trials: cfg.trials,
                max_residual,
                window: cfg.trunc.window(),
                seed: cfg.seed,
                tolerance: c.tolerance(),
                passed: max_residual <= c.tolerance(),
            }
        })
        .collect();
    let passed = identities.iter().all(|r| r.passed);
    Ok(SuiteReport {
        config: *cfg,
        diophantine,
        identities,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSweepConfig {
    pub seed: u64,
    pub trials: usize,
    pub rho: f64,
    pub i_perp: f64,
    pub i_3: f64,
    pub omega: f64,
    pub tau: f64,
    /// Lattice radius for the γ scan.
    pub k_scan: usize,
    pub q: f64,
    pub r: f64,
    /// Norm of the fluctuating part of the random Q at r.
    pub twist_spread: f64,
    /// Each entry f runs the certificates at d = δ = f·r.
    pub loss_fractions: Vec<f64>,
}

impl Default for BoundSweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 200,
            rho: 2.0,
            i_perp: 2.0,
            i_3: 3.0,
            omega: noble_frequency(),
            tau: 1.0,
            k_scan: 50,
            q: 0.5,
            r: 0.5,
            twist_spread: 0.5,
            loss_fractions: vec![0.2, 0.1, 0.05],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossSummary {
    pub loss_fraction: f64,
    pub constants: BoundConstants,
    /// Smallest bound − measured over trials and the three estimates.
    pub min_margin: f64,
    /// Largest measured / bound.
    pub max_ratio: f64,
    pub worst_trial: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSweep {
    pub config: BoundSweepConfig,
    pub diophantine: DiophantineEstimate,
    pub losses: Vec<LossSummary>,
    pub passed: bool,
}

/// Certifies the three analytic bounds on `trials` random admissible triples
/// for every loss in the sweep, with γ taken from the lattice scan.
pub fn sweep_bounds(cfg: &BoundSweepConfig) -> Result<BoundSweep> {
    if cfg.trials == 0 || cfg.loss_fractions.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one trial and one loss fraction".into(),
        ));
    }
    let params = AlgebraParams::with_frequency(cfg.rho, cfg.i_perp, cfg.i_3, cfg.omega)?;
    // Triples live in a box with |l|, |m| ≤ 2, so the certificate scans at least to 10.
    let diophantine = estimate_diophantine(cfg.omega, cfg.tau, cfg.k_scan.max(10))?;
    let dio = DiophantineParams {
        gamma: diophantine.gamma,
        tau: cfg.tau,
        q: cfg.q,
        k_scan: cfg.k_scan,
    };
    dio.validate()?;

    let per_trial: Vec<Vec<BoundReport>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let (w, z, q) =
                random_triple(&mut rng, cfg.rho, params.twist(), cfg.twist_spread, cfg.r)?;
            cfg.loss_fractions
                .iter()
                .map(|f| certify_bounds(&w, &z, &q, &params, &dio, cfg.r, f * cfg.r, f * cfg.r))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut losses = Vec::with_capacity(cfg.loss_fractions.len());
    for (j, &frac) in cfg.loss_fractions.iter().enumerate() {
        let mut summary = LossSummary {
            loss_fraction: frac,
            constants: per_trial[0][j].constants,
            min_margin: f64::INFINITY,
            max_ratio: 0.0,
            worst_trial: 0,
        };
        for (trial, reports) in per_trial.iter().enumerate() {
            let rep = &reports[j];
            for m in [rep.gamma_term, rep.n_term, rep.r_term] {
                if m.margin < summary.min_margin || m.margin.is_nan() {
                    summary.min_margin = m.margin;
                    summary.worst_trial = trial as u64;
                }
                summary.max_ratio = summary.max_ratio.max(rel(m.measured, m.bound));
            }
        }
        losses.push(summary);
    }
    let passed = losses.iter().all(|l| l.min_margin >= 0.0);
    Ok(BoundSweep {
        config: cfg.clone(),
        diophantine,
        losses,
        passed,
    })
}
