use rand::Rng;
use serde::Serialize;

use super::random_suite;
use crate::approx::{head_greedy, head_rounds, tail_budget, tail_lp_round};
use crate::benders::benders_project;
use crate::dp::{DpProjector, MAX_DP_WIDTH};
use crate::model::brute_force_projection;
use crate::recovery::check_amiht_condition;
use crate::rng;
use crate::sensing::{expander_from_rng, SensingMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<SelftestCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn same_value(a: f64, b: f64, exact: bool) -> bool {
    if exact {
        a == b
    } else {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }
}

fn check(name: &str, failures: Vec<String>, total: usize) -> SelftestCheck {
    let detail = match failures.first() {
        None => format!("{total} cases"),
        Some(first) => format!("{} of {total} cases failed; first: {first}", failures.len()),
    };
    SelftestCheck { name: name.to_string(), passed: failures.is_empty(), detail }
}

/// Projector agreement, head and tail guarantees, the expander l1 upper bound
/// and the head/tail accuracy condition, on `instances` random models.
pub fn selftest(instances: usize, seed: u64) -> SelftestReport {
    let mut checks = Vec::new();

    let mut failures = Vec::new();
    let mut cases = 0;
    for float in [false, true] {
        for (idx, inst) in random_suite(instances, seed ^ u64::from(float), float).into_iter().enumerate() {
            cases += 1;
            let (model, w) = (&inst.model, &inst.weights);
            let oracle = match brute_force_projection(model, w) {
                Ok(r) => r.covered_weight,
                Err(e) => {
                    failures.push(format!("instance {idx}: oracle failed: {e}"));
                    continue;
                }
            };
            match benders_project(model, w) {
                Ok(r) if same_value(r.covered_weight, oracle, !float) => {}
                other => failures.push(format!("instance {idx}: benders {other:?} vs oracle {oracle}")),
            }
            if let Ok(dp) = DpProjector::new(model) {
                debug_assert!(dp.width() <= MAX_DP_WIDTH);
                match dp.project(w) {
                    Ok(r) if same_value(r.covered_weight, oracle, !float) => {}
                    other => failures.push(format!("instance {idx}: dp {other:?} vs oracle {oracle}")),
                }
            }
        }
    }
    checks.push(check("projector agreement (dp, benders, brute force)", failures, cases));

    let suite = random_suite(instances, seed.wrapping_add(1), false);
    let mut failures = Vec::new();
    let mut cases = 0;
    for (idx, inst) in suite.iter().enumerate() {
        let model = inst.model.with_sparsity(inst.model.ground_size()).expect("K = N is valid");
        let opt = brute_force_projection(&model, &inst.weights).expect("small suite").covered_weight;
        for eps in [0.5, 0.25, 0.05] {
            cases += 1;
            match head_greedy(&model, &inst.weights, model.budget(), eps) {
                Ok(h)
                    if h.covered_weight >= (1.0 - eps) * opt - 1e-9
                        && h.selected_groups.len() <= head_rounds(model.budget(), eps) => {}
                other => failures.push(format!("instance {idx}, eps {eps}: {other:?}, optimum {opt}")),
            }
        }
    }
    checks.push(check("head guarantee", failures, cases));

    let mut failures = Vec::new();
    let mut cases = 0;
    for (idx, inst) in suite.iter().enumerate() {
        let model = inst.model.with_sparsity(inst.model.ground_size()).expect("K = N is valid");
        let opt = brute_force_projection(&model, &inst.weights).expect("small suite").covered_weight;
        let best_residual = inst.weights.total() - opt;
        for eps in [1.0, 0.5, 1.0 / 19.0] {
            cases += 1;
            let bound = tail_budget(model.budget(), model.frequency(), eps);
            match tail_lp_round(&model, &inst.weights, model.budget(), eps) {
                Ok(t)
                    if t.residual_weight <= (1.0 + eps) * best_residual + 1e-9
                        && t.selected_groups.len() <= bound => {}
                other => failures.push(format!("instance {idx}, eps {eps}: {other:?}, best residual {best_residual}")),
            }
        }
    }
    checks.push(check("tail guarantee", failures, cases));

    let mut failures = Vec::new();
    let mut r = rng::stream(seed, &[0x21b1]);
    let pairs = instances.max(1);
    for idx in 0..pairs {
        let m = r.random_range(4..=40);
        let n = r.random_range(1..=60);
        let d = r.random_range(1..=m.min(8));
        let a = SensingMatrix::Expander(expander_from_rng(m, n, d, &mut r).expect("valid degree"));
        // dyadic entries keep every sum exact
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-1024i32..=1024) as f64 / 256.0).collect();
        let lhs: f64 = a.apply(&x).expect("dimensions match").iter().map(|v| v.abs()).sum();
        let rhs = d as f64 * x.iter().map(|v| v.abs()).sum::<f64>();
        if lhs > rhs {
            failures.push(format!("pair {idx}: {lhs} > {rhs}"));
        }
    }
    checks.push(check("expander l1 upper bound", failures, pairs));

    let gate = check_amiht_condition(0.95, 1.05) && !check_amiht_condition(0.5, 1.05);
    checks.push(SelftestCheck {
        name: "head/tail accuracy condition".into(),
        passed: gate,
        detail: format!(
            "(0.95, 1.05) -> {}, (0.5, 1.05) -> {}",
            check_amiht_condition(0.95, 1.05),
            check_amiht_condition(0.5, 1.05)
        ),
    });

    SelftestReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_selftest_passes() {
        let report = selftest(40, 1);
        assert!(report.passed(), "{report:#?}");
        assert_eq!(report.checks.len(), 5);
    }
}
