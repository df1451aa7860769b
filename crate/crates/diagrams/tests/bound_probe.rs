// scale probe for the largest CLI-reachable enumerations

#[test]
#[ignore]
fn enumeration_scale_at_cli_ceiling() {
    for b in [6u32, 7, 8] {
        let t0 = std::time::Instant::now();
        let n = diagrams::enumerate_rev_circuits(b, &[]).len();
        eprintln!("rev circuits bound {b}: {n} classes in {:?}", t0.elapsed());
    }
    let t0 = std::time::Instant::now();
    let n = diagrams::enumerate_lg_circuits(8).len();
    eprintln!("lg circuits bound 8: {n} classes in {:?}", t0.elapsed());
    let t0 = std::time::Instant::now();
    let n = diagrams::enumerate_reversion_trees(8).len();
    eprintln!("rev trees bound 8: {n} classes in {:?}", t0.elapsed());
}
