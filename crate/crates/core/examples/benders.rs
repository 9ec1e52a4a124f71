//! Benders' decomposition for an element-budgeted projection: the closed-form
//! dual of the coverage subproblem, the cut it induces and the cut log.

use groupsparse::benders::{benders_project_with, cut_log_csv, subproblem_closed_form, BendersOptions, OptimalityCut};
use groupsparse::model::{GroupModel, NormMode, WeightVector};

fn main() {
    let model = GroupModel::from_one_based(4, &[&[1, 2], &[1, 2, 3], &[2, 4], &[3, 4]], 2, 2).unwrap();
    let w = WeightVector::new(vec![4.0, 1.0, 2.0, 9.0], NormMode::L2).unwrap();

    let dual = subproblem_closed_form(&model, &[1], &w, 2);
    println!("dual at v = e_B: alpha {}, beta {:?}, gamma {:?}", dual.alpha, dual.beta, dual.gamma);
    let cut = OptimalityCut::new(&model, dual, 2);
    println!("cut: mu <= {} + {:?} . v, value at e_B = {}", cut.constant(), cut.coefficients, cut.value(&[1]));

    let out = benders_project_with(&model, &w, &BendersOptions { max_iterations: None, record_cuts: true }).unwrap();
    println!(
        "optimum {} with groups {:?} and support {:?} after {} iterations ({} cuts)",
        out.result.covered_weight,
        out.result.selected_groups,
        out.result.support,
        out.iterations,
        out.state.cuts.len()
    );
    print!("{}", cut_log_csv(&out.log));
}
