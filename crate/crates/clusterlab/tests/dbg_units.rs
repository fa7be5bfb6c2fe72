use clusterlab::arith::dirichlet::dirichlet_group;

#[test]
fn probe() {
    for n in 1..=12u64 {
        println!("n = {n}: {}", dirichlet_group(n).len());
    }
}
