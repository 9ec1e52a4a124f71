//! The four recovery algorithms on one overlapping block-model signal.

use groupsparse::bench::{expander_degree, gen_block_model, gen_instance, MatrixKind, OverlapMode};
use groupsparse::recovery::{Recoverer, RecoveryConfig, Variant};
use groupsparse::rng;

fn main() {
    let (n, g, m) = (200, 5, 140);
    let model = gen_block_model(n, OverlapMode::Half).unwrap().with_budget(g).unwrap();
    let d = expander_degree(n, g, 4);
    for variant in Variant::ALL {
        let kind = if variant.uses_expander() { MatrixKind::Expander } else { MatrixKind::Gaussian };
        let mut found = None;
        // first seed whose instance this variant recovers
        for seed in 0..10 {
            let inst = gen_instance(&model, g, m, kind, d, &mut rng::stream(seed, &[])).unwrap();
            let r = Recoverer::new(&model, RecoveryConfig::for_variant(variant)).unwrap();
            let result = r.run(&inst.a, &inst.y, Some(&inst.x)).unwrap();
            if result.relative_error.unwrap() < 1e-5 {
                found = Some((seed, result));
                break;
            }
        }
        match found {
            Some((seed, r)) => println!(
                "{variant:>9}: seed {seed}, {} iterations, relative error {:.2e}, last steps {:?}",
                r.iterations,
                r.relative_error.unwrap(),
                &r.step_norms[r.step_norms.len().saturating_sub(3)..]
            ),
            None => println!("{variant:>9}: no recovery in 10 seeds at m = {m}"),
        }
    }
}
