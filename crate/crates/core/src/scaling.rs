//! Curvature classification along the gradient and Hessian-aware scalings.
//!
//! Given `g` and `Hg`, the gradient direction is classified as strong
//! positive curvature (SPC), limited positive curvature (LPC) or negative
//! curvature (NC). SPC steps use one of the second-order scalings
//!
//! * CG: `||g||^2 / <g, Hg>` (inverse Rayleigh quotient of `H` along `g`),
//! * MR: `<g, Hg> / ||Hg||^2` (one-dimensional least-squares Newton residual),
//! * GM: `||g|| / ||Hg||` (geometric mean of the two),
//!
//! or alternate between CG and MR. LPC and NC steps fall back to fixed scalings.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::oracle::Vector;

/// Below this, `||Hg||^2` under an SPC flag is treated as floating-point pathology.
pub const HG_UNDERFLOW: f64 = 1e-300;

/// Cached gradient/curvature quantities for one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProbe {
    g: Vector,
    hg: Vector,
    g_hg: f64,
    gnorm2: f64,
    hgnorm2: f64,
}

impl CurvatureProbe {
    pub fn new(g: Vector, hg: Vector) -> Result<Self> {
        if g.len() != hg.len() {
            return Err(Error::InvalidInput(format!(
                "gradient has length {} but Hg has length {}",
                g.len(),
                hg.len()
            )));
        }
        let gnorm2 = g.dot(&g);
        if gnorm2 <= 0.0 {
            return Err(Error::InvalidInput("curvature probe requires a nonzero gradient".into()));
        }
        let g_hg = g.dot(&hg);
        let hgnorm2 = hg.dot(&hg);
        if !(g_hg.is_finite() && gnorm2.is_finite() && hgnorm2.is_finite()) {
            return Err(Error::NumericalFailure { what: "curvature probe", x: g.as_slice().to_vec() });
        }
        Ok(Self { g, hg, g_hg, gnorm2, hgnorm2 })
    }

    pub fn g(&self) -> &Vector {
        &self.g
    }

    pub fn hg(&self) -> &Vector {
        &self.hg
    }

    /// `<g, Hg>`
    pub fn g_hg(&self) -> f64 {
        self.g_hg
    }

    /// `||g||^2`
    pub fn gnorm2(&self) -> f64 {
        self.gnorm2
    }

    /// `||Hg||^2`
    pub fn hgnorm2(&self) -> f64 {
        self.hgnorm2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurvatureFlag {
    Spc,
    Lpc,
    Nc,
}

impl CurvatureFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            CurvatureFlag::Spc => "SPC",
            CurvatureFlag::Lpc => "LPC",
            CurvatureFlag::Nc => "NC",
        }
    }
}

impl fmt::Display for CurvatureFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single second-order scaling formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpcScaling {
    Cg,
    Mr,
    Gm,
}

/// How SPC steps pick their scaling, including the alternating rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpcRule {
    Cg,
    Mr,
    Gm,
    /// Alternate CG, MR, CG, ... across SPC steps.
    CgMr,
    /// Alternate MR, CG, MR, ... across SPC steps.
    MrCg,
}

impl SpcRule {
    pub const ALL: [SpcRule; 5] = [SpcRule::Cg, SpcRule::Mr, SpcRule::Gm, SpcRule::CgMr, SpcRule::MrCg];

    pub fn as_str(self) -> &'static str {
        match self {
            SpcRule::Cg => "CG",
            SpcRule::Mr => "MR",
            SpcRule::Gm => "GM",
            SpcRule::CgMr => "CGMR",
            SpcRule::MrCg => "MRCG",
        }
    }
}

impl fmt::Display for SpcRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpcRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CG" => Ok(SpcRule::Cg),
            "MR" => Ok(SpcRule::Mr),
            "GM" => Ok(SpcRule::Gm),
            "CGMR" => Ok(SpcRule::CgMr),
            "MRCG" => Ok(SpcRule::MrCg),
            other => Err(Error::InvalidInput(format!("unknown scaling rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingConfig {
    /// SPC tolerance; zero only in strongly convex mode.
    pub sigma: f64,
    pub s_lpc: f64,
    pub s_nc: f64,
    pub spc_rule: SpcRule,
    /// Declares curvature along gradients is bounded below, making LPC/NC unreachable.
    pub strongly_convex: bool,
}

impl ScalingConfig {
    pub const DEFAULT_SIGMA: f64 = 1e-6;

    /// General (possibly nonconvex) configuration: `s_lpc = 1/sigma`, `s_nc = 1`.
    pub fn new(sigma: f64, spc_rule: SpcRule) -> Self {
        Self { sigma, s_lpc: 1.0 / sigma, s_nc: 1.0, spc_rule, strongly_convex: false }
    }

    /// `sigma = 0` for problems known to be strongly convex.
    pub fn strongly_convex(spc_rule: SpcRule) -> Self {
        Self { sigma: 0.0, s_lpc: f64::INFINITY, s_nc: 1.0, spc_rule, strongly_convex: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if self.sigma == 0.0 {
            if !self.strongly_convex {
                return Err(Error::InvalidInput(
                    "sigma = 0 requires the strongly convex declaration".into(),
                ));
            }
        } else if !(self.s_lpc > 0.0 && self.s_lpc <= 1.0 / self.sigma) {
            return Err(Error::InvalidInput(format!(
                "s_lpc must lie in (0, 1/sigma] = (0, {:e}], got {:e}",
                1.0 / self.sigma,
                self.s_lpc
            )));
        }
        if !(self.s_nc > 0.0 && self.s_nc.is_finite()) {
            return Err(Error::InvalidInput(format!("s_nc must be finite and > 0, got {}", self.s_nc)));
        }
        Ok(())
    }
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self::new(Self::DEFAULT_SIGMA, SpcRule::CgMr)
    }
}

/// Which formula the next SPC step of an alternating rule uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlternationState {
    next_spc_rule: SpcScaling,
}

impl AlternationState {
    pub fn for_rule(rule: SpcRule) -> Self {
        let next_spc_rule = match rule {
            SpcRule::MrCg | SpcRule::Mr => SpcScaling::Mr,
            SpcRule::Gm => SpcScaling::Gm,
            SpcRule::Cg | SpcRule::CgMr => SpcScaling::Cg,
        };
        Self { next_spc_rule }
    }

    pub fn next_spc_rule(&self) -> SpcScaling {
        self.next_spc_rule
    }

    fn take(&mut self, rule: SpcRule) -> SpcScaling {
        match rule {
            SpcRule::Cg => SpcScaling::Cg,
            SpcRule::Mr => SpcScaling::Mr,
            SpcRule::Gm => SpcScaling::Gm,
            SpcRule::CgMr | SpcRule::MrCg => {
                let used = self.next_spc_rule;
                self.next_spc_rule = match used {
                    SpcScaling::Cg => SpcScaling::Mr,
                    _ => SpcScaling::Cg,
                };
                used
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingDecision {
    pub flag: CurvatureFlag,
    pub s: f64,
    /// `-s * g`
    pub p: Vector,
    /// The SPC formula used, `None` on LPC/NC steps.
    pub rule_used: Option<SpcScaling>,
}

pub fn classify_curvature(probe: &CurvatureProbe, sigma: f64) -> CurvatureFlag {
    if probe.g_hg > sigma * probe.gnorm2 {
        CurvatureFlag::Spc
    } else if probe.g_hg >= 0.0 {
        CurvatureFlag::Lpc
    } else {
        CurvatureFlag::Nc
    }
}

/// SPC scaling for one formula. Caller guarantees the probe classified as SPC.
pub fn spc_scaling(probe: &CurvatureProbe, rule: SpcScaling) -> Result<f64> {
    if probe.hgnorm2 < HG_UNDERFLOW {
        return Err(Error::InternalContradiction(format!(
            "||Hg||^2 = {:e} under an SPC flag (<g,Hg> = {:e})",
            probe.hgnorm2, probe.g_hg
        )));
    }
    let s = match rule {
        SpcScaling::Cg => probe.gnorm2 / probe.g_hg,
        SpcScaling::Mr => probe.g_hg / probe.hgnorm2,
        SpcScaling::Gm => (probe.gnorm2 / probe.hgnorm2).sqrt(),
    };
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InternalContradiction(format!("SPC scaling {rule:?} evaluated to {s:e}")));
    }
    Ok(s)
}

/// Classify the probe and return the scaled direction `p = -s g`.
pub fn select_scaling(
    probe: &CurvatureProbe,
    config: &ScalingConfig,
    state: &mut AlternationState,
) -> Result<ScalingDecision> {
    let flag = classify_curvature(probe, config.sigma);
    if config.strongly_convex && flag != CurvatureFlag::Spc {
        return Err(Error::ContractViolation(format!(
            "{flag} curvature (<g,Hg> = {:e}, ||g||^2 = {:e}) on a problem declared strongly convex",
            probe.g_hg, probe.gnorm2
        )));
    }
    let (s, rule_used) = match flag {
        CurvatureFlag::Spc => {
            let rule = state.take(config.spc_rule);
            (spc_scaling(probe, rule)?, Some(rule))
        }
        CurvatureFlag::Lpc => (config.s_lpc, None),
        CurvatureFlag::Nc => (config.s_nc, None),
    };
    let p = probe.g() * (-s);
    Ok(ScalingDecision { flag, s, p, rule_used })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe(g: &[f64], hg: &[f64]) -> CurvatureProbe {
        CurvatureProbe::new(Vector::from_column_slice(g), Vector::from_column_slice(hg)).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_curvature(&probe(&[3.0, 4.0], &[3.0, 4.0]), 1e-6), CurvatureFlag::Spc);
        assert_eq!(classify_curvature(&probe(&[3.0, 4.0], &[0.0, 0.0]), 1e-6), CurvatureFlag::Lpc);
        assert_eq!(classify_curvature(&probe(&[3.0, 4.0], &[-3.0, -4.0]), 1e-6), CurvatureFlag::Nc);
    }

    #[test]
    fn classification_boundary_is_exact() {
        // <g,Hg> == sigma ||g||^2 exactly is LPC, not SPC.
        let p = probe(&[1.0, 0.0], &[0.5, 0.0]);
        assert_eq!(classify_curvature(&p, 0.5), CurvatureFlag::Lpc);
        assert_eq!(classify_curvature(&p, 0.4999999), CurvatureFlag::Spc);
    }

    #[test]
    fn diag_quadratic_scalings() {
        let p = probe(&[1.0, 4.0], &[1.0, 16.0]);
        let cg = spc_scaling(&p, SpcScaling::Cg).unwrap();
        let mr = spc_scaling(&p, SpcScaling::Mr).unwrap();
        let gm = spc_scaling(&p, SpcScaling::Gm).unwrap();
        assert!((cg - 17.0 / 65.0).abs() < 1e-15);
        assert!((mr - 65.0 / 257.0).abs() < 1e-15);
        assert!((gm - (17.0f64 / 257.0).sqrt()).abs() < 1e-15);
        assert!((cg - 0.261538).abs() < 1e-6 && (mr - 0.252918).abs() < 1e-6 && (gm - 0.257192).abs() < 1e-6);
    }

    #[test]
    fn identity_hessian_gives_unit_scalings() {
        let p = probe(&[3.0, 4.0], &[3.0, 4.0]);
        for r in [SpcScaling::Cg, SpcScaling::Mr, SpcScaling::Gm] {
            assert!((spc_scaling(&p, r).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn one_dimensional_scalings_are_newton() {
        let (g, h) = (0.7, 2.5);
        let p = probe(&[g], &[h * g]);
        for r in [SpcScaling::Cg, SpcScaling::Mr, SpcScaling::Gm] {
            let s = spc_scaling(&p, r).unwrap();
            assert!((s - 1.0 / h).abs() < 1e-15);
            assert!((s * g - g / h).abs() < 1e-15);
        }
    }

    #[test]
    fn alternation_toggles_on_spc_only() {
        let cfg = ScalingConfig::new(1e-6, SpcRule::CgMr);
        let mut st = AlternationState::for_rule(cfg.spc_rule);
        let spc = probe(&[1.0, 4.0], &[1.0, 16.0]);
        let nc = probe(&[1.0, 0.0], &[-1.0, 0.0]);
        let d1 = select_scaling(&spc, &cfg, &mut st).unwrap();
        assert_eq!(d1.rule_used, Some(SpcScaling::Cg));
        let d2 = select_scaling(&nc, &cfg, &mut st).unwrap();
        assert_eq!(d2.flag, CurvatureFlag::Nc);
        assert_eq!(st.next_spc_rule(), SpcScaling::Mr);
        let d3 = select_scaling(&spc, &cfg, &mut st).unwrap();
        assert_eq!(d3.rule_used, Some(SpcScaling::Mr));
        let d4 = select_scaling(&spc, &cfg, &mut st).unwrap();
        assert_eq!(d4.rule_used, Some(SpcScaling::Cg));

        let mut st = AlternationState::for_rule(SpcRule::MrCg);
        let cfg = ScalingConfig::new(1e-6, SpcRule::MrCg);
        assert_eq!(select_scaling(&spc, &cfg, &mut st).unwrap().rule_used, Some(SpcScaling::Mr));
        assert_eq!(select_scaling(&spc, &cfg, &mut st).unwrap().rule_used, Some(SpcScaling::Cg));
    }

    #[test]
    fn lpc_and_nc_defaults() {
        let cfg = ScalingConfig::new(1e-6, SpcRule::Cg);
        let mut st = AlternationState::for_rule(cfg.spc_rule);
        let d = select_scaling(&probe(&[3.0, 4.0], &[0.0, 0.0]), &cfg, &mut st).unwrap();
        assert_eq!(d.flag, CurvatureFlag::Lpc);
        assert!((d.s - 1e6).abs() <= 1e-9 * 1e6);
        let d = select_scaling(&probe(&[3.0, 4.0], &[-3.0, -4.0]), &cfg, &mut st).unwrap();
        assert_eq!((d.flag, d.s), (CurvatureFlag::Nc, 1.0));
        assert_eq!(d.p, Vector::from_column_slice(&[-3.0, -4.0]));
    }

    #[test]
    fn direction_is_bit_exact_negative_scaled_gradient() {
        let cfg = ScalingConfig::new(1e-6, SpcRule::Gm);
        let mut st = AlternationState::for_rule(cfg.spc_rule);
        let pr = probe(&[0.3, -1.7, 2.2], &[1.1, -3.0, 5.0]);
        let d = select_scaling(&pr, &cfg, &mut st).unwrap();
        for (pi, gi) in d.p.iter().zip(pr.g().iter()) {
            assert_eq!(*pi, -d.s * gi);
        }
    }

    #[test]
    fn strongly_convex_mode_surfaces_lpc_and_nc() {
        let cfg = ScalingConfig::strongly_convex(SpcRule::Cg);
        cfg.validate().unwrap();
        let mut st = AlternationState::for_rule(cfg.spc_rule);
        let err = select_scaling(&probe(&[1.0], &[0.0]), &cfg, &mut st).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)));
        let err = select_scaling(&probe(&[1.0], &[-1.0]), &cfg, &mut st).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)));
    }

    #[test]
    fn underflowing_hg_under_spc_aborts() {
        // <g,Hg> > 0 yet ||Hg||^2 underflows to zero.
        let pr = probe(&[1e100], &[1e-160]);
        assert_eq!(classify_curvature(&pr, 0.0), CurvatureFlag::Spc);
        assert!(matches!(spc_scaling(&pr, SpcScaling::Mr), Err(Error::InternalContradiction(_))));
    }

    #[test]
    fn config_validation() {
        assert!(ScalingConfig::new(1e-6, SpcRule::Cg).validate().is_ok());
        let mut c = ScalingConfig::new(1e-6, SpcRule::Cg);
        c.s_lpc = 2e6;
        assert!(c.validate().is_err());
        let mut c = ScalingConfig::new(1e-6, SpcRule::Cg);
        c.sigma = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn probe_rejects_zero_gradient() {
        assert!(CurvatureProbe::new(Vector::zeros(2), Vector::zeros(2)).is_err());
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("cgmr".parse::<SpcRule>().unwrap(), SpcRule::CgMr);
        assert!("newton".parse::<SpcRule>().is_err());
    }
}
