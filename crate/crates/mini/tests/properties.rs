use lsq_mini::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const FUEL: u64 = 200_000;
/// Normalization multiplies statement counts, so compiled runs get more fuel.
const COMPILED_FUEL: u64 = 20 * FUEL;

fn generated(seed: u64) -> GeneratedMini {
    gen_mini_program(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let g = generated(seed);
        let text = g.program.to_string();
        prop_assert_eq!(parse_mini(&text).unwrap(), g.program);
    }

    #[test]
    fn normalize_is_idempotent_and_restricted(seed in any::<u64>()) {
        let g = generated(seed);
        let once = normalize(&g.program);
        prop_assert!(is_restricted(&once), "{}", once);
        prop_assert_eq!(normalize(&once), once);
    }

    #[test]
    fn normalize_preserves_behaviour(seed in any::<u64>()) {
        let g = generated(seed);
        let before = direct_run(&g.program, &g.entry, g.args.clone(), FUEL).unwrap();
        let after = direct_run(&normalize(&g.program), &g.entry, g.args.clone(), FUEL).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn compiled_agrees_with_direct(seed in any::<u64>()) {
        let g = generated(seed);
        let expected = direct_run(&g.program, &g.entry, g.args.clone(), FUEL).unwrap();
        for optimize in [true, false] {
            let p = Arc::new(compile(&g.program, CompileOptions { optimize }).unwrap());
            let got = run_compiled(&p, &g.entry, g.args.clone(), COMPILED_FUEL).unwrap();
            prop_assert_eq!(&got, &expected, "optimize={}\n{}", optimize, g.program);
        }
    }

    #[test]
    fn optimized_sets_are_subsets_of_unoptimized(seed in any::<u64>()) {
        let g = generated(seed);
        let opt = compile(&g.program, CompileOptions { optimize: true }).unwrap();
        let plain = compile(&g.program, CompileOptions { optimize: false }).unwrap();
        for (a, b) in opt.coroutines.iter().zip(&plain.coroutines) {
            for (la, lb) in a.report.loads.iter().zip(&b.report.loads) {
                prop_assert!(la.is_subset(lb));
            }
            for (sa, sb) in a.report.stores.iter().zip(&b.report.stores) {
                for (x, y) in sa.iter().zip(sb) {
                    prop_assert!(x.is_subset(y));
                }
            }
        }
    }

    #[test]
    fn every_suspension_point_starts_a_segment(seed in any::<u64>()) {
        let g = generated(seed);
        let p = compile(&g.program, CompileOptions::default()).unwrap();
        for c in &p.coroutines {
            let suspensions = c.resolved.stmts.iter()
                .filter(|s| matches!(s.kind, resolve::SKind::Yield { .. } | resolve::SKind::Call { .. }))
                .count();
            prop_assert_eq!(c.segments.len(), suspensions + 1);
            prop_assert_eq!(c.segments[0].kind, EntryKind::MethodEntry);
            // Every plain statement of the body shows up in some segment.
            let mut covered = vec![false; c.resolved.stmts.len()];
            for cfg in &c.segment_cfgs {
                for n in &cfg.nodes {
                    if let Some(s) = n.kind.sid() { covered[s] = true; }
                }
            }
            prop_assert!(covered.iter().all(|&b| b));
        }
    }
}
