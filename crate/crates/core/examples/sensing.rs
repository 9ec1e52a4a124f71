//! Gaussian and expander measurement matrices, the median operator and the
//! binary matrix files.

use groupsparse::sensing::{gen_expander, gen_gaussian, median_op, SensingMatrix};

fn main() {
    let n = 60;
    let mut x = vec![0.0; n];
    x[5] = 1.5;
    x[40] = -2.0;

    let gauss = SensingMatrix::Dense(gen_gaussian(30, n, 1).unwrap());
    let y = gauss.apply(&x).unwrap();
    let back = gauss.apply_adjoint(&y).unwrap();
    println!("gaussian: |y|_2 = {:.4}, (A^T y)[5] = {:.4}, (A^T y)[40] = {:.4}", l2(&y), back[5], back[40]);

    let exp = gen_expander(30, n, 4, 1).unwrap();
    let a = SensingMatrix::Expander(exp.clone());
    let y = a.apply(&x).unwrap();
    let l1_y: f64 = y.iter().map(|v| v.abs()).sum();
    let l1_x: f64 = x.iter().map(|v| v.abs()).sum();
    println!("expander d=4: |Ax|_1 = {l1_y} <= d |x|_1 = {}", 4.0 * l1_x);
    let med = median_op(&exp, &y).unwrap();
    println!("median operator at the support: {} {}", med[5], med[40]);

    let dir = std::env::temp_dir().join("groupsparse-sensing-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("expander.bin");
    a.save(&path).unwrap();
    assert_eq!(SensingMatrix::load(&path).unwrap(), a);
    println!("round-tripped {} ({} bytes)", path.display(), std::fs::metadata(&path).unwrap().len());
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
