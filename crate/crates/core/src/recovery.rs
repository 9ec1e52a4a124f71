//! Iterative hard thresholding with exact (Model-IHT, MEIHT) or head/tail
//! approximate (AM-IHT, AM-EIHT) model projections.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{head_greedy, tail_budget, tail_lp_round, ApproxError};
use crate::benders::{benders_project, BendersError};
use crate::dp::{DpError, DpProjector};
use crate::model::{apply_support, brute_force_projection, weights_from_signal, GroupModel, ModelError, NormMode, ProjectionResult};
use crate::sensing::{median_op, SensingError, SensingMatrix};

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Benders(#[from] BendersError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error("{0} needs an expander matrix")]
    NeedsExpander(Variant),
    #[error("ground truth has zero norm")]
    ZeroTruth,
    #[error("invalid accuracy parameters alpha = {alpha}, beta = {beta}")]
    BadAccuracy { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    ModelIht,
    Meiht,
    AmIht,
    AmEiht,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::ModelIht, Variant::Meiht, Variant::AmIht, Variant::AmEiht];

    pub fn name(self) -> &'static str {
        match self {
            Variant::ModelIht => "model-iht",
            Variant::Meiht => "meiht",
            Variant::AmIht => "am-iht",
            Variant::AmEiht => "am-eiht",
        }
    }

    /// Median-operator variants, which run on expander matrices.
    pub fn uses_expander(self) -> bool {
        matches!(self, Variant::Meiht | Variant::AmEiht)
    }

    pub fn is_approximate(self) -> bool {
        matches!(self, Variant::AmIht | Variant::AmEiht)
    }

    /// l1 for expander runs, l2 for Gaussian runs.
    pub fn default_norm(self) -> NormMode {
        if self.uses_expander() {
            NormMode::L1
        } else {
            NormMode::L2
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| format!("unknown variant {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectorKind {
    Dp,
    Benders,
    Brute,
}

impl ProjectorKind {
    pub fn name(self) -> &'static str {
        match self {
            ProjectorKind::Dp => "dp",
            ProjectorKind::Benders => "benders",
            ProjectorKind::Brute => "brute",
        }
    }
}

impl FromStr for ProjectorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dp" => Ok(ProjectorKind::Dp),
            "benders" => Ok(ProjectorKind::Benders),
            "brute" => Ok(ProjectorKind::Brute),
            _ => Err(format!("unknown solver {s:?}")),
        }
    }
}

/// An exact model projection, with any per-model setup done once.
#[derive(Debug, Clone)]
pub enum Projector {
    Dp(Box<DpProjector>),
    Benders(GroupModel),
    Brute(GroupModel),
}

impl Projector {
    pub fn new(kind: ProjectorKind, model: &GroupModel) -> Result<Self, RecoveryError> {
        Ok(match kind {
            ProjectorKind::Dp => Projector::Dp(Box::new(DpProjector::new(model)?)),
            ProjectorKind::Benders => Projector::Benders(model.clone()),
            ProjectorKind::Brute => Projector::Brute(model.clone()),
        })
    }

    pub fn model(&self) -> &GroupModel {
        match self {
            Projector::Dp(p) => p.model(),
            Projector::Benders(m) | Projector::Brute(m) => m,
        }
    }

    pub fn project_weights(&self, w: &crate::model::WeightVector) -> Result<ProjectionResult, RecoveryError> {
        Ok(match self {
            Projector::Dp(p) => p.project(w)?,
            Projector::Benders(m) => match benders_project(m, w) {
                Ok(r) => r,
                Err(BendersError::IterationCap { cap, best }) => {
                    log::warn!("Benders cap {cap} hit during recovery; using the incumbent");
                    *best
                }
                Err(e) => return Err(e.into()),
            },
            Projector::Brute(m) => brute_force_projection(m, w)?,
        })
    }

    /// Closest model-sparse vector to `x` in the given norm.
    pub fn project(&self, x: &[f64], mode: NormMode) -> Result<Vec<f64>, RecoveryError> {
        let r = self.project_weights(&weights_from_signal(x, mode))?;
        debug_assert!(r.is_feasible(self.model(), &weights_from_signal(x, mode)));
        Ok(apply_support(x, &r.support)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub max_iterations: usize,
    pub step_tolerance: f64,
    /// Defaults to the variant's norm.
    pub norm: Option<NormMode>,
    pub alpha: f64,
    pub beta: f64,
    pub projector: ProjectorKind,
    pub variant: Variant,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            max_iterations: 1000,
            step_tolerance: 1e-5,
            norm: None,
            alpha: 0.95,
            beta: 1.05,
            projector: ProjectorKind::Dp,
            variant: Variant::ModelIht,
        }
    }
}

impl RecoveryConfig {
    pub fn for_variant(variant: Variant) -> Self {
        RecoveryConfig { variant, ..RecoveryConfig::default() }
    }

    pub fn norm_mode(&self) -> NormMode {
        self.norm.unwrap_or(self.variant.default_norm())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub x_hat: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// An iterate became non-finite and the run was stopped.
    pub diverged: bool,
    pub step_norms: Vec<f64>,
    pub relative_error: Option<f64>,
    /// Head/tail accuracy condition, for the approximate variants.
    pub condition_holds: Option<bool>,
}

/// `alpha^2 > 1 - (1 + beta)^-2`.
pub fn check_amiht_condition(alpha: f64, beta: f64) -> bool {
    alpha * alpha > 1.0 - (1.0 + beta).powi(-2)
}

/// `||x - x_hat||_p / ||x||_p`.
pub fn relative_error(x: &[f64], x_hat: &[f64], p: NormMode) -> Result<f64, RecoveryError> {
    if x.len() != x_hat.len() {
        return Err(ModelError::LengthMismatch { expected: x.len(), got: x_hat.len() }.into());
    }
    let denom = p.norm(x);
    if denom == 0.0 {
        return Err(RecoveryError::ZeroTruth);
    }
    let diff: Vec<f64> = x.iter().zip(x_hat).map(|(a, b)| a - b).collect();
    Ok(p.norm(&diff) / denom)
}

/// Head/tail settings derived from `(alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracies {
    /// `None`: the head keeps the whole vector.
    pub head_eps: Option<f64>,
    /// `None`: the tail is the exact projection.
    pub tail_eps: Option<f64>,
    pub head_budget: usize,
}

impl Accuracies {
    /// For `p = 2` the weights are squares, so `eps_head = 1 - alpha^2` and
    /// `eps_tail = beta^2 - 1`; for `p = 1` they are `1 - alpha` and `beta - 1`.
    pub fn new(model: &GroupModel, alpha: f64, beta: f64, p: NormMode) -> Result<Self, RecoveryError> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(RecoveryError::BadAccuracy { alpha, beta });
        }
        let (he, te) = match p {
            NormMode::L2 => (1.0 - alpha * alpha, beta * beta - 1.0),
            NormMode::L1 => (1.0 - alpha, beta - 1.0),
        };
        let head_eps = (alpha < 1.0).then_some(he);
        let tail_eps = (beta > 1.0).then_some(te);
        let g = model.budget();
        let g_tail = match tail_eps {
            Some(eps) => tail_budget(g, model.frequency(), eps),
            None => g,
        };
        Ok(Accuracies { head_eps, tail_eps, head_budget: g_tail + g })
    }
}

/// Reusable recovery driver for one model and configuration.
#[derive(Debug, Clone)]
pub struct Recoverer {
    config: RecoveryConfig,
    projector: Option<Projector>,
    model: GroupModel,
    accuracies: Option<Accuracies>,
    condition: Option<bool>,
}

impl Recoverer {
    pub fn new(model: &GroupModel, config: RecoveryConfig) -> Result<Self, RecoveryError> {
        let p = config.norm_mode();
        let (accuracies, condition) = if config.variant.is_approximate() {
            let acc = Accuracies::new(model, config.alpha, config.beta, p)?;
            let ok = check_amiht_condition(config.alpha.min(1.0), config.beta.max(1.0));
            if !ok {
                log::warn!("head/tail accuracies ({}, {}) fail the convergence condition", config.alpha, config.beta);
            }
            if model.sparsity_active() {
                log::warn!("approximate variants ignore the element budget K");
            }
            (Some(acc), Some(ok))
        } else {
            (None, None)
        };
        let needs_exact = accuracies.is_none_or(|a| a.tail_eps.is_none());
        let projector = if needs_exact { Some(Projector::new(config.projector, model)?) } else { None };
        Ok(Recoverer { config, projector, model: model.clone(), accuracies, condition })
    }

    pub fn config(&self) -> &RecoveryConfig {
        &self.config
    }

    pub fn accuracies(&self) -> Option<Accuracies> {
        self.accuracies
    }

    fn head(&self, g: Vec<f64>, acc: &Accuracies, p: NormMode) -> Result<Vec<f64>, RecoveryError> {
        let Some(eps) = acc.head_eps else { return Ok(g) };
        let h = head_greedy(&self.model, &weights_from_signal(&g, p), acc.head_budget, eps)?;
        Ok(apply_support(&g, &h.support)?)
    }

    fn tail(&self, v: &[f64], acc: &Accuracies, p: NormMode) -> Result<Vec<f64>, RecoveryError> {
        match acc.tail_eps {
            None => self.exact(v, p),
            Some(eps) => {
                let t = tail_lp_round(&self.model, &weights_from_signal(v, p), self.model.budget(), eps)?;
                Ok(apply_support(v, &t.support)?)
            }
        }
    }

    fn exact(&self, v: &[f64], p: NormMode) -> Result<Vec<f64>, RecoveryError> {
        self.projector.as_ref().expect("exact projector is built when needed").project(v, p)
    }

    /// Runs the configured variant from `x = 0`; `truth` adds the relative error.
    pub fn run(&self, a: &SensingMatrix, y: &[f64], truth: Option<&[f64]>) -> Result<RecoveryResult, RecoveryError> {
        let n = self.model.ground_size();
        if a.cols() != n {
            return Err(SensingError::DimensionMismatch { expected: n, got: a.cols() }.into());
        }
        if y.len() != a.rows() {
            return Err(SensingError::DimensionMismatch { expected: a.rows(), got: y.len() }.into());
        }
        let variant = self.config.variant;
        let expander = match (variant.uses_expander(), a.as_expander()) {
            (true, None) => return Err(RecoveryError::NeedsExpander(variant)),
            (true, Some(e)) => Some(e),
            (false, _) => None,
        };
        let p = self.config.norm_mode();
        let mut x = vec![0.0; n];
        let mut step_norms = Vec::new();
        let mut converged = false;
        let mut diverged = false;
        for _ in 0..self.config.max_iterations {
            let ax = a.apply(&x)?;
            let residual: Vec<f64> = y.iter().zip(&ax).map(|(yi, v)| yi - v).collect();
            let g = match expander {
                Some(e) => median_op(e, &residual)?,
                None => a.apply_adjoint(&residual)?,
            };
            // projection weights must stay finite; past that the run has diverged
            let finite = |v: &[f64]| p.power_sum(v).is_finite();
            if !finite(&g) {
                diverged = true;
                break;
            }
            let v: Vec<f64> = match &self.accuracies {
                None => x.iter().zip(&g).map(|(xi, gi)| xi + gi).collect(),
                Some(acc) => {
                    let h = self.head(g, acc, p)?;
                    x.iter().zip(&h).map(|(xi, hi)| xi + hi).collect()
                }
            };
            if !finite(&v) {
                diverged = true;
                break;
            }
            let next = match &self.accuracies {
                None => self.exact(&v, p)?,
                Some(acc) => self.tail(&v, acc, p)?,
            };
            let diff: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
            let step = p.norm(&diff);
            step_norms.push(step);
            x = next;
            if step < self.config.step_tolerance {
                converged = true;
                break;
            }
        }
        let relative_error = match truth {
            Some(t) => Some(relative_error(t, &x, p)?),
            None => None,
        };
        Ok(RecoveryResult {
            iterations: step_norms.len(),
            x_hat: x,
            converged,
            diverged,
            step_norms,
            relative_error,
            condition_holds: self.condition,
        })
    }
}

pub fn recover(
    a: &SensingMatrix,
    y: &[f64],
    model: &GroupModel,
    config: &RecoveryConfig,
) -> Result<RecoveryResult, RecoveryError> {
    Recoverer::new(model, config.clone())?.run(a, y, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{gen_expander, gen_gaussian, DenseMatrix};

    fn chain_model(n: usize, g: usize) -> GroupModel {
        let groups: Vec<Vec<usize>> = (0..n - 1).step_by(2).map(|s| (s..(s + 4).min(n)).collect()).collect();
        GroupModel::new(n, groups, g, n).unwrap()
    }

    #[test]
    fn condition_examples() {
        assert!(check_amiht_condition(0.95, 1.05));
        assert!(check_amiht_condition(1.0, 7.0));
        assert!(!check_amiht_condition(0.5, 1.05));
    }

    #[test]
    fn relative_error_examples() {
        let x = [3.0, 4.0];
        assert_eq!(relative_error(&x, &x, NormMode::L2).unwrap(), 0.0);
        assert_eq!(relative_error(&x, &[0.0, 0.0], NormMode::L2).unwrap(), 1.0);
        assert!((relative_error(&x, &[3.0, 0.0], NormMode::L2).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(relative_error(&[0.0], &[1.0], NormMode::L2), Err(RecoveryError::ZeroTruth)));
    }

    #[test]
    fn identity_matrix_fixed_point() {
        let model = chain_model(12, 1);
        let mut x = vec![0.0; 12];
        x[2] = 1.5;
        x[4] = -2.0;
        let a = SensingMatrix::Dense(DenseMatrix::identity(12));
        let y = a.apply(&x).unwrap();
        let r = Recoverer::new(&model, RecoveryConfig::default()).unwrap().run(&a, &y, Some(&x)).unwrap();
        assert!(r.converged && r.iterations <= 2);
        assert_eq!(r.x_hat, x);
    }

    #[test]
    fn full_budget_keeps_everything() {
        let model = chain_model(12, 6);
        let x: Vec<f64> = (0..12).map(|i| i as f64 - 5.5).collect();
        let a = SensingMatrix::Dense(DenseMatrix::identity(12));
        let r = recover(&a, &x, &model, &RecoveryConfig::default()).unwrap();
        assert_eq!(r.x_hat, x);
        assert!(r.iterations <= 2);
    }

    #[test]
    fn divergence_is_reported() {
        // plain IHT with a wide square Gaussian matrix blows up
        let model = chain_model(40, 20);
        let a = SensingMatrix::Dense(gen_gaussian(40, 40, 3).unwrap());
        let y = vec![1.0; 40];
        let r = recover(&a, &y, &model, &RecoveryConfig::default()).unwrap();
        assert!(r.diverged && !r.converged);
        assert!(r.x_hat.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn zero_measurements() {
        let model = chain_model(10, 2);
        for variant in Variant::ALL {
            let a = if variant.uses_expander() {
                SensingMatrix::Expander(gen_expander(6, 10, 2, 1).unwrap())
            } else {
                SensingMatrix::Dense(gen_gaussian(6, 10, 1).unwrap())
            };
            let r = recover(&a, &[0.0; 6], &model, &RecoveryConfig::for_variant(variant)).unwrap();
            assert_eq!((r.iterations, r.converged), (1, true), "{variant}");
            assert!(r.x_hat.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn variant_needs_matching_matrix() {
        let model = chain_model(10, 2);
        let a = SensingMatrix::Dense(gen_gaussian(6, 10, 1).unwrap());
        let err = recover(&a, &[0.0; 6], &model, &RecoveryConfig::for_variant(Variant::Meiht)).unwrap_err();
        assert!(matches!(err, RecoveryError::NeedsExpander(Variant::Meiht)));
        assert!(recover(&a, &[0.0; 5], &model, &RecoveryConfig::default()).is_err());
    }

    #[test]
    fn accuracies_conversion() {
        let model = chain_model(20, 2);
        let acc = Accuracies::new(&model, 0.95, 1.05, NormMode::L2).unwrap();
        assert!((acc.head_eps.unwrap() - 0.0975).abs() < 1e-12);
        assert!((acc.tail_eps.unwrap() - 0.1025).abs() < 1e-12);
        let acc = Accuracies::new(&model, 0.95, 1.05, NormMode::L1).unwrap();
        assert!((acc.tail_eps.unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(acc.head_budget, tail_budget(2, 2, acc.tail_eps.unwrap()) + 2);
        let exact = Accuracies::new(&model, 1.0, 1.0, NormMode::L2).unwrap();
        assert_eq!((exact.head_eps, exact.tail_eps, exact.head_budget), (None, None, 4));
    }

    #[test]
    fn exact_oracles_match_model_iht() {
        let model = chain_model(30, 2);
        let mut x = vec![0.0; 30];
        for (i, v) in [(4, 1.0), (5, -0.5), (7, 2.0), (20, 1.2), (21, 0.3)] {
            x[i] = v;
        }
        let a = SensingMatrix::Dense(gen_gaussian(18, 30, 5).unwrap());
        let y = a.apply(&x).unwrap();
        let iht = recover(&a, &y, &model, &RecoveryConfig::default()).unwrap();
        let cfg = RecoveryConfig { variant: Variant::AmIht, alpha: 1.0, beta: 1.0, ..RecoveryConfig::default() };
        let am = recover(&a, &y, &model, &cfg).unwrap();
        assert_eq!(iht, RecoveryResult { condition_holds: None, ..am });
    }
}
