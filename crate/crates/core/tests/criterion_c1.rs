mod common;

use chabauty_core::chabauty::{criterion, CriterionConfig, Verdict};

#[test]
fn c1_unique_in_ball_at_109() {
    let fx = common::c1();
    let cfg = CriterionConfig::default();
    for q in &fx.points {
        let data = criterion(&fx.k, &fx.curve, &fx.gens, q, 109, &cfg).unwrap();
        println!("h {} rank {} m {:?}", data.h, data.rank, data.m_mod_p);
        assert_eq!(data.h, 3);
        assert_eq!(data.verdict, Verdict::UniqueInBall);
    }
}
