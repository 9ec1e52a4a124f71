//! Greedy head and LP-rounding tail approximations against the exact optimum
//! on an overlapping block model.

use groupsparse::approx::{head_greedy, head_rounds, lp_solve, tail_budget, tail_lp_round};
use groupsparse::bench::{gen_block_model, OverlapMode};
use groupsparse::dp::DpProjector;
use groupsparse::model::{weights_from_signal, NormMode};
use groupsparse::rng;
use rand::Rng;

fn main() {
    let g = 3;
    let model = gen_block_model(300, OverlapMode::Full).unwrap().with_budget(g).unwrap();
    let mut r = rng::stream(7, &[]);
    let x: Vec<f64> = (0..300).map(|_| r.random_range(-1.0..1.0)).collect();
    let w = weights_from_signal(&x, NormMode::L2);
    let exact = DpProjector::new(&model).unwrap().project(&w).unwrap();
    let best_residual = w.total() - exact.covered_weight;
    println!("frequency {}, exact optimum {:.4}, residual {:.4}", model.frequency(), exact.covered_weight, best_residual);

    for eps in [0.5, 0.25, 0.05] {
        let h = head_greedy(&model, &w, g, eps).unwrap();
        println!(
            "head eps={eps}: {} groups (bound {}), covers {:.4} >= {:.4}",
            h.selected_groups.len(),
            head_rounds(g, eps),
            h.covered_weight,
            (1.0 - eps) * exact.covered_weight
        );
    }
    let lp = lp_solve(&model, &w, g).unwrap();
    println!("LP relaxation bound {:.4}", lp.objective);
    for eps in [1.0, 0.5, 1.0 / 19.0] {
        let t = tail_lp_round(&model, &w, g, eps).unwrap();
        println!(
            "tail eps={eps:.4}: {} groups (bound {}), residual {:.4} <= {:.4}",
            t.selected_groups.len(),
            tail_budget(g, model.frequency(), eps),
            t.residual_weight,
            (1.0 + eps) * best_residual
        );
    }
}
