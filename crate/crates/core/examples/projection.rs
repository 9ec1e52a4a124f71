//! Exact projection of a weight vector onto a small group model with the three
//! exact solvers, with and without an element budget.

use groupsparse::benders::benders_project;
use groupsparse::dp::DpProjector;
use groupsparse::model::{brute_force_projection, weights_from_signal, GroupModel, NormMode};

fn main() {
    // groups A = {1,2}, B = {1,2,3}, C = {2,4}, D = {3,4}
    let groups: [&[usize]; 4] = [&[1, 2], &[1, 2, 3], &[2, 4], &[3, 4]];
    let x = [2.0, -1.0, std::f64::consts::SQRT_2, 3.0];
    let w = weights_from_signal(&x, NormMode::L2);

    for (g, k) in [(1, 4), (2, 4), (2, 2)] {
        let model = GroupModel::from_one_based(4, &groups, g, k).unwrap();
        let dp = DpProjector::new(&model).unwrap().project(&w).unwrap();
        let benders = benders_project(&model, &w).unwrap();
        let brute = brute_force_projection(&model, &w).unwrap();
        println!(
            "G={g} K={k}: dp {:.3} groups {:?}, benders {:.3}, brute force {:.3}",
            dp.covered_weight, dp.selected_groups, benders.covered_weight, brute.covered_weight
        );
        let projected = dp.with_signal(&x).unwrap().projected_vector.unwrap();
        println!("    projected signal {projected:?}");
    }
}
