use proptest::collection::vec;
use proptest::prelude::*;
use ued_core::curriculum::{rank_priority, replay_mixture, RankOrder};
use ued_core::diversity::{greedy_select, level_div_score, marginal_gain, rep_score, CosineKernel, RepresentativeSet};
use ued_core::env::{discounted_return, Environment, Observation, Trajectory, TrajectoryStep};
use ued_core::learner::{gae_advantages, gae_score, GaeConfig};
use ued_core::maze::{
    build_level, is_solvable, parse_ascii, render_ascii, Cell, DesignAction, MazeConfig, MazeEnv, CHANNELS,
};

const TOL: f64 = 1e-12;

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(-3.0f64..3.0, d)
}

fn trajectory() -> impl Strategy<Value = Trajectory> {
    (vec((-1.0f64..1.0, -1.0f64..1.0), 1..40), any::<bool>(), -1.0f64..1.0).prop_map(|(rv, terminal, bootstrap)| {
        let n = rv.len();
        Trajectory {
            steps: rv
                .into_iter()
                .enumerate()
                .map(|(i, (reward, value_estimate))| TrajectoryStep {
                    obs: Observation::new(vec![0.0]),
                    action: 0,
                    reward,
                    value_estimate,
                    terminal: terminal && i + 1 == n,
                })
                .collect(),
            bootstrap_value: if terminal { 0.0 } else { bootstrap },
        }
    })
}

fn design() -> impl Strategy<Value = (Vec<DesignAction>, u64)> {
    (0usize..169, 0usize..169, vec(0usize..169, 0..40), any::<u64>()).prop_map(|(s, g, blocks, seed)| {
        let g = if g == s { (g + 1) % 169 } else { g };
        let mut actions = vec![DesignAction::start(s), DesignAction::goal(g)];
        actions.extend(blocks.into_iter().map(DesignAction::block));
        (actions, seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernel_is_symmetric_and_bounded(a in point(6), b in point(6)) {
        let k = CosineKernel::default();
        let ab = k.eval(&a, &b).unwrap();
        prop_assert_eq!(ab, k.eval(&b, &a).unwrap());
        prop_assert!((-1.0 - TOL..=1.0 + TOL).contains(&ab));
    }

    #[test]
    fn kernel_ignores_positive_scale(a in point(5), b in point(5), s in 0.01f64..100.0) {
        let k = CosineKernel::default();
        let scaled: Vec<f64> = a.iter().map(|x| x * s).collect();
        prop_assert!((k.eval(&a, &b).unwrap() - k.eval(&scaled, &b).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn rep_score_is_monotone_and_submodular(
        observed in vec(point(4), 1..12),
        small in vec(point(4), 1..4),
        extra in vec(point(4), 0..4),
        cand in point(4),
    ) {
        let k = CosineKernel::default();
        let mut large = small.clone();
        large.extend(extra);
        let f_small = rep_score(&k, &small, &observed).unwrap();
        let f_large = rep_score(&k, &large, &observed).unwrap();
        prop_assert!(f_large >= f_small - TOL);
        let g_small = marginal_gain(&k, &cand, &small, &observed).unwrap();
        let g_large = marginal_gain(&k, &cand, &large, &observed).unwrap();
        prop_assert!(g_small >= g_large - TOL);
        prop_assert!(g_large >= -TOL);
        let mut with = small.clone();
        with.push(cand.clone());
        let direct = rep_score(&k, &with, &observed).unwrap() - f_small;
        prop_assert!((direct - g_small).abs() < 1e-9);
    }

    #[test]
    fn greedy_fills_to_n_with_distinct_indices(pool in vec(point(3), 1..20), n in 1usize..8) {
        let picks = greedy_select(&CosineKernel::default(), &pool, n).unwrap();
        prop_assert_eq!(picks.len(), n.min(pool.len()));
        let mut sorted = picks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), picks.len());
    }

    #[test]
    fn level_div_is_scale_invariant(
        target in vec(point(3), 1..5),
        other in vec(point(3), 1..5),
        s in 0.1f64..10.0,
    ) {
        let k = CosineKernel::default();
        let set = |v: Vec<Vec<f64>>| RepresentativeSet { level_ref: 0, capacity: v.len(), vectors: v };
        let scale = |v: &[Vec<f64>]| v.iter().map(|p| p.iter().map(|x| x * s).collect()).collect::<Vec<Vec<f64>>>();
        let base = level_div_score(&k, &set(target.clone()), &[&set(other.clone())]).unwrap();
        let scaled = level_div_score(&k, &set(scale(&target)), &[&set(scale(&other))]).unwrap();
        prop_assert!((base - scaled).abs() < 1e-9);
        prop_assert!(base <= target.len() as f64 + 1e-9);
    }

    #[test]
    fn rank_priorities_are_distributions(
        scores in vec(-5.0f64..5.0, 1..40),
        beta in 0.05f64..5.0,
        rho in 0.0f64..=1.0,
    ) {
        let gae = rank_priority(&scores, RankOrder::Descending, beta).unwrap();
        let div = rank_priority(&scores, RankOrder::Ascending, beta).unwrap();
        let mix = replay_mixture(&gae, &div, rho).unwrap();
        for p in [&gae, &div, &mix] {
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < TOL);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
        }
        let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let first_top = scores.iter().position(|&s| s == top).unwrap();
        let pmax = gae.iter().cloned().fold(0.0, f64::max);
        prop_assert_eq!(gae[first_top], pmax);
    }

    #[test]
    fn gae_score_is_non_negative_and_bounded_by_magnitude(
        traj in trajectory(),
        gamma in 0.5f64..=1.0,
        lambda in 0.0f64..=1.0,
    ) {
        let cfg = GaeConfig { gamma, lambda };
        let adv = gae_advantages(&traj, &cfg).unwrap();
        let score = gae_score(&traj, &cfg).unwrap();
        prop_assert!(score >= 0.0);
        let mean_abs = adv.iter().map(|a| a.abs()).sum::<f64>() / adv.len() as f64;
        prop_assert!(score <= mean_abs + TOL);
    }

    #[test]
    fn undiscounted_return_is_the_reward_sum(traj in trajectory()) {
        let sum: f64 = traj.rewards().sum();
        prop_assert!((discounted_return(&traj, 1.0).unwrap() - sum).abs() < 1e-12);
    }

    #[test]
    fn built_levels_respect_construction_rules((actions, seed) in design()) {
        let cfg = MazeConfig::default();
        let level = build_level(&actions, seed, &cfg).unwrap();
        prop_assert!(level.check().is_ok());
        prop_assert!(level.walls.len() <= cfg.max_blocks);
        prop_assert!(!level.walls.contains(&level.start));
        prop_assert!(!level.walls.contains(&level.goal));
        prop_assert_ne!(level.start, level.goal);
        let text = render_ascii(&level);
        let back = parse_ascii(&text).unwrap();
        prop_assert_eq!(&back.walls, &level.walls);
        prop_assert_eq!(back.start, level.start);
        prop_assert_eq!(back.goal, level.goal);
    }

    #[test]
    fn observations_are_one_hot_per_slot(
        (actions, seed) in design(),
        moves in vec(0usize..3, 0..60),
    ) {
        let cfg = MazeConfig::default();
        let level = build_level(&actions, seed, &cfg).unwrap();
        let mut env = MazeEnv::new(cfg).unwrap();
        let mut obs = env.reset_level(level).unwrap();
        let k2 = cfg.view_size * cfg.view_size;
        for a in moves.into_iter().chain(std::iter::once(0)) {
            prop_assert_eq!(obs.features.len(), cfg.obs_dim());
            for slot in 0..k2 {
                let hot: f64 = obs.features[slot * CHANNELS..(slot + 1) * CHANNELS].iter().sum();
                prop_assert_eq!(hot, 1.0);
            }
            let facing: f64 = obs.features[CHANNELS * k2..].iter().sum();
            prop_assert_eq!(facing, 1.0);
            prop_assert!(obs.features.iter().all(|&x| x == 0.0 || x == 1.0));
            let out = env.step(a).unwrap();
            obs = out.obs;
            if out.terminal || out.truncated {
                break;
            }
        }
    }

    #[test]
    fn walls_never_block_an_empty_room(sx in 0usize..13, sy in 0usize..13, gx in 0usize..13, gy in 0usize..13) {
        prop_assume!((sx, sy) != (gx, gy));
        let level = ued_core::maze::MazeLevel::empty(13, 13, Cell::new(sx, sy), Cell::new(gx, gy)).unwrap();
        prop_assert!(is_solvable(&level));
    }
}
