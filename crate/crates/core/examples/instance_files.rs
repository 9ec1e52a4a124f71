//! Reading and writing instance and tree decomposition text files.

use groupsparse::graphs::{compute_decomposition, incidence_graph, parse_decomposition, write_decomposition};
use groupsparse::model::instance::{parse_instance, write_instance};

fn main() {
    let text = "4 4 1 4\n1 2\n1 2 3\n2 4\n3 4\n4 1 2 9\n";
    let inst = parse_instance(text).unwrap();
    println!("parsed {} groups over {} elements", inst.model.num_groups(), inst.model.ground_size());
    assert_eq!(write_instance(&inst.model, inst.weights.as_ref()), text);

    match parse_instance("4 2 1 4\n1 2\n3 9\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }

    let inc = incidence_graph(&inst.model);
    let td = compute_decomposition(&inc.graph, 16);
    let written = write_decomposition(&td);
    print!("{written}");
    assert_eq!(parse_decomposition(&written).unwrap(), td);
}
