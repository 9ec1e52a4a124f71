//! Incidence and intersection graphs of a group model, their tree
//! decompositions and the nice decomposition the DP runs on.

use groupsparse::graphs::{
    build_graphs, compute_decomposition, lift_intersection_to_incidence, to_nice, write_decomposition, NiceKind,
    DEFAULT_EXACT_WIDTH_LIMIT,
};
use groupsparse::model::GroupModel;

fn main() {
    let model = GroupModel::from_one_based(4, &[&[1, 2], &[1, 2, 3], &[2, 4], &[3, 4]], 1, 4).unwrap();
    let (incidence, intersection) = build_graphs(&model);
    println!(
        "incidence graph: {} vertices, {} edges; intersection graph edges {:?}",
        incidence.graph.num_vertices(),
        incidence.graph.num_edges(),
        intersection.graph.edges()
    );

    let td = compute_decomposition(&intersection.graph, DEFAULT_EXACT_WIDTH_LIMIT);
    println!("intersection graph decomposition, width {}:\n{}", td.width(), write_decomposition(&td));

    let lifted = lift_intersection_to_incidence(&td, &model).unwrap();
    lifted.validate(&incidence.graph).unwrap();
    println!("lifted to the incidence graph: width {}", lifted.width());

    let direct = compute_decomposition(&incidence.graph, DEFAULT_EXACT_WIDTH_LIMIT);
    let nice = to_nice(&direct);
    nice.validate(&incidence.graph).unwrap();
    let count = |f: fn(&NiceKind) -> bool| nice.kinds().iter().filter(|k| f(k)).count();
    println!(
        "incidence graph decomposition of width {}; nice form has {} nodes ({} joins, {} introduce, {} forget)",
        direct.width(),
        nice.nodes().len(),
        count(|k| matches!(k, NiceKind::Join)),
        count(|k| matches!(k, NiceKind::Introduce(_))),
        count(|k| matches!(k, NiceKind::Forget(_))),
    );
}
