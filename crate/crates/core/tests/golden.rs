use spi_ising::problems::{brute_force, random_max_cut_instance};
use spi_ising::Instance;

const MAXCUT_N6_SEED1: &str = include_str!("golden/maxcut_n6_seed1.txt");

#[test]
fn generated_maxcut_matches_golden_file() {
    let generated = Instance::MaxCut(random_max_cut_instance(6, 1).unwrap());
    assert_eq!(generated.to_text(), MAXCUT_N6_SEED1);
    assert_eq!(Instance::parse(MAXCUT_N6_SEED1).unwrap(), generated);
}

#[test]
fn golden_maxcut_oracle_agrees_with_encoding() {
    let inst = Instance::parse(MAXCUT_N6_SEED1).unwrap();
    let opt = brute_force(&inst).unwrap();
    let w = inst.encode();
    let intensity = spi_ising::ideal_intensity(&opt.witness, &w).unwrap();
    assert!((intensity - 2.0 * opt.value).abs() < 1e-9);
}
