//! Independent brute-force reimplementations checked against the library.

mod common;

use common::{naive_doo, naive_sequool, replay};
use xarmed::algorithms::{Doo, SequOol, SmoothnessParams};
use xarmed::{BinaryPartition, Domain, Garland};

#[test]
fn doo_matches_naive_rescans() {
    for budget in 1..=32 {
        let mut doo = Doo::new(
            Domain::unit(1),
            Box::new(BinaryPartition),
            SmoothnessParams::default(),
            budget,
        )
        .unwrap();
        let got = replay(&mut doo, budget, Garland::value);
        assert_eq!(
            got,
            naive_doo(budget as usize, 1.0, 0.5, Garland::value),
            "budget {budget}"
        );
    }
}

#[test]
fn sequool_matches_naive_schedule() {
    for budget in [10u64, 37, 100, 250] {
        let mut s = SequOol::new(Domain::unit(1), Box::new(BinaryPartition), budget).unwrap();
        let got = replay(&mut s, budget, Garland::value);
        assert_eq!(
            got,
            naive_sequool(budget as usize, Garland::value),
            "budget {budget}"
        );
    }
}
