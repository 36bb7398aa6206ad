mod oracles;

use claimforge::eval::fleiss_kappa;
use proptest::prelude::*;

#[test]
fn two_hundred_random_instances() {
    for seed in 0..200 {
        oracles::check_metrics(seed).unwrap();
    }
}

#[test]
fn kappa_hand_case() {
    let k = fleiss_kappa(&[vec!['C', 'C', 'C'], vec!['C', 'C', 'I']]).unwrap();
    assert_eq!(k.kappa, -0.2);
}

proptest! {
    #[test]
    fn any_seed_agrees(seed in any::<u64>()) {
        prop_assert_eq!(oracles::check_metrics(seed), Ok(()));
    }
}
