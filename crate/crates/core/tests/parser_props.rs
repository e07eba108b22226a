mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zone_slicer::ir::{build_cfg, parse_program};

proptest! {
    #[test]
    fn canonical_source_round_trips(seed in any::<u64>(), nvars in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = common::random_program(&mut rng, nvars);
        let program = parse_program(&src).unwrap();
        let canonical = program.to_source();
        let reparsed = parse_program(&canonical).unwrap();
        prop_assert_eq!(&reparsed.to_source(), &canonical);
        prop_assert_eq!(reparsed, program);
    }

    #[test]
    fn arbitrary_text_never_panics(src in "[a-z0-9 ;:=<>!+\\-(){}\n/]{0,80}") {
        let _ = parse_program(&src);
        let _ = parse_program(&format!("int x; int y;\n{src}"));
    }

    #[test]
    fn cfg_blocks_reach_from_entry(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = build_cfg(&parse_program(&common::random_program(&mut rng, 3)).unwrap());
        let order = cfg.reverse_postorder();
        prop_assert_eq!(order[0], cfg.entry);
        for &w in &cfg.widen_points {
            prop_assert!(order.contains(&w));
        }
    }
}
