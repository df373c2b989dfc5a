use active_altruism::*;
use proptest::prelude::*;

fn game_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = AltruismGame> {
    (1..=max_rows, 1..=max_cols)
        .prop_flat_map(|(m, n)| {
            prop::collection::vec(prop::collection::vec((-10i32..=10, -10i32..=10), n), m)
        })
        .prop_map(|grid| {
            let rewards: Vec<Vec<(f64, f64)>> = grid
                .iter()
                .map(|row| row.iter().map(|&(a, b)| (a as f64, b as f64)).collect())
                .collect();
            AltruismGame::from_rewards(&rewards).unwrap()
        })
}

/// A belief on the game's partition: uniform on a random sub-range, or
/// random masses per cell.
fn belief_for(game: &AltruismGame, pick: (bool, f64, f64, Vec<f64>)) -> IntervalBelief {
    let partition = partition_domain(game);
    let (ranged, a, b, raw) = pick;
    if ranged {
        let lo = a.min(b);
        let hi = (a.max(b)).max(lo + 1e-3).min(1.0);
        IntervalBelief::uniform_range(AlphaRange::new(lo, hi).unwrap())
            .refined(partition.interior())
    } else {
        let masses: Vec<f64> = (0..partition.len())
            .map(|k| raw[k % raw.len()] + 1e-3)
            .collect();
        let total: f64 = masses.iter().sum();
        IntervalBelief::from_cells(
            partition.breakpoints().to_vec(),
            masses.iter().map(|m| m / total).collect(),
        )
        .unwrap()
    }
}

fn belief_pick() -> impl Strategy<Value = (bool, f64, f64, Vec<f64>)> {
    (
        any::<bool>(),
        0.0..1.0f64,
        0.0..1.0f64,
        prop::collection::vec(0.0..1.0f64, 1..8),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn altruistic_reward_is_affine_with_own_and_other_endpoints(
        game in game_strategy(3, 3), alpha in 0.0..=1.0f64, i in 0usize..3, j in 0usize..3,
    ) {
        let (i, j) = (i % game.leader_count(), j % game.follower_count());
        let cell = game.reward(i, j);
        for (player, own, other) in [
            (Player::Leader, cell.leader, cell.follower),
            (Player::Follower, cell.follower, cell.leader),
        ] {
            prop_assert_eq!(game.altruistic_reward(i, j, player, 0.0).unwrap(), own);
            prop_assert_eq!(game.altruistic_reward(i, j, player, 1.0).unwrap(), other);
            let mid = game.altruistic_reward(i, j, player, alpha).unwrap();
            prop_assert!((mid - ((1.0 - alpha) * own + alpha * other)).abs() < 1e-12);
        }
    }

    #[test]
    fn best_response_changes_only_at_intersection_points(game in game_strategy(3, 4), i in 0usize..3) {
        let i = i % game.leader_count();
        let points = game.intersection_points(i);
        let mut edges = vec![0.0];
        edges.extend(points.iter().copied());
        edges.push(1.0);
        for w in edges.windows(2) {
            let probes: Vec<f64> = (1..10).map(|k| w[0] + (w[1] - w[0]) * k as f64 / 10.0).collect();
            let first = game.follower_best_response(i, probes[0]).unwrap();
            let value = game.leader_reward_given_alpha(i, probes[0]).unwrap();
            for &a in &probes[1..] {
                prop_assert_eq!(game.follower_best_response(i, a).unwrap(), first);
                prop_assert_eq!(game.leader_reward_given_alpha(i, a).unwrap(), value);
            }
        }
    }

    #[test]
    fn positive_rescaling_keeps_equilibrium_actions(
        game in game_strategy(4, 4), scale in 0.1..20.0f64, alpha in 0.0..=1.0f64,
    ) {
        let scaled: Vec<Vec<RewardPair>> = game
            .rewards()
            .iter()
            .map(|row| row.iter().map(|r| RewardPair::new(scale * r.leader, scale * r.follower)).collect())
            .collect();
        let other = AltruismGame::new(
            game.leader_actions().to_vec(),
            game.follower_actions().to_vec(),
            scaled,
            game.alpha_leader(),
        )
        .unwrap();
        let a = game.stackelberg_equilibrium(alpha).unwrap();
        let b = other.stackelberg_equilibrium(alpha).unwrap();
        prop_assert_eq!((a.leader_action, a.follower_action), (b.leader_action, b.follower_action));
    }

    #[test]
    fn passive_update_never_widens(c in 0.0..=1.0f64, d in 0.0..=1.0f64, e in 0.0..=1.0f64, f in 0.0..=1.0f64) {
        let current = AlphaRange::new(c.min(d), c.max(d)).unwrap();
        let observed = AlphaRange::new(e.min(f), e.max(f)).unwrap();
        let next = passive_update(current, observed);
        prop_assert!(next.width() <= current.width());
        prop_assert!(next.lo >= current.lo && next.hi <= current.hi);
    }

    #[test]
    fn bayes_update_conserves_mass_inside_the_domain(
        game in game_strategy(3, 3), pick in belief_pick(), i in 0usize..3,
        raw in prop::collection::vec(0.01..1.0f64, 3),
    ) {
        let b = belief_for(&game, pick);
        let i = i % game.leader_count();
        let likelihoods = &raw[..game.follower_count()];
        let post = b.bayes_update(&game, i, likelihoods).unwrap();
        prop_assert!((post.total_mass() - 1.0).abs() < 1e-9);
        prop_assert!(post.breakpoints().first() == Some(&0.0) && post.breakpoints().last() == Some(&1.0));
        prop_assert!(post.masses().iter().all(|m| *m >= 0.0));
    }

    #[test]
    fn one_hot_bayes_equals_conditioning(game in game_strategy(3, 3), i in 0usize..3, j in 0usize..3) {
        let i = i % game.leader_count();
        let j = j % game.follower_count();
        let b = IntervalBelief::uniform_on(&partition_domain(&game));
        let mut likelihoods = vec![0.0; game.follower_count()];
        likelihoods[j] = 1.0;
        let set = game.response_set(i, j).unwrap();
        let via_bayes = b.bayes_update(&game, i, &likelihoods);
        if set.intervals().iter().all(|iv| iv.width() == 0.0) {
            prop_assert!(via_bayes.is_err());
        } else {
            let via_bayes = via_bayes.unwrap();
            prop_assert!((via_bayes.mass_in(&set) - 1.0).abs() < 1e-9);
            // every piece of the response set keeps its prior proportion
            let total: f64 = set.intervals().iter().map(|iv| iv.width()).sum();
            for iv in set.intervals() {
                prop_assert!((via_bayes.mass_in_interval(iv) - iv.width() / total).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn successive_updates_multiply(
        game in game_strategy(3, 3), pick in belief_pick(), i in 0usize..3,
        l1 in prop::collection::vec(0.01..1.0f64, 3), l2 in prop::collection::vec(0.01..1.0f64, 3),
    ) {
        let b = belief_for(&game, pick);
        let i = i % game.leader_count();
        let n = game.follower_count();
        let twice = b.bayes_update(&game, i, &l1[..n]).unwrap().bayes_update(&game, i, &l2[..n]).unwrap();
        let product: Vec<f64> = l1[..n].iter().zip(&l2[..n]).map(|(a, b)| a * b).collect();
        let once = b.bayes_update(&game, i, &product).unwrap();
        prop_assert_eq!(twice.breakpoints(), once.breakpoints());
        for (a, b) in twice.masses().iter().zip(once.masses()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn full_uniform_has_maximal_entropy(lo in 0.0..1.0f64, width in 1e-3..1.0f64) {
        let hi = (lo + width).min(1.0);
        let b = IntervalBelief::uniform_range(AlphaRange::new(lo, hi).unwrap());
        prop_assert!(b.entropy() <= IntervalBelief::uniform().entropy() + 1e-12);
        prop_assert!(IntervalBelief::uniform().entropy().abs() < 1e-12);
    }

    #[test]
    fn bonuses_are_nonnegative(game in game_strategy(4, 3), pick in belief_pick()) {
        let b = belief_for(&game, pick);
        for i in 0..game.leader_count() {
            prop_assert!(info_gain_bonus(&game, &b, i).unwrap() >= 0.0);
            prop_assert!(expected_reward_gain_bonus(&game, &b, i, false).unwrap() >= 0.0);
            prop_assert!(expected_reward_gain_bonus(&game, &b, i, true).unwrap() >= 0.0);
        }
    }

    #[test]
    fn zero_lambda_reduces_to_passive(game in game_strategy(4, 3), pick in belief_pick()) {
        let b = belief_for(&game, pick);
        let passive = select_action(&game, &b, &ExplorationStrategy::passive()).unwrap().chosen;
        for kind in [StrategyKind::InfoGain, StrategyKind::ExpectedRewardGain] {
            let s = ExplorationStrategy::new(kind, 0.0).unwrap();
            prop_assert_eq!(select_action(&game, &b, &s).unwrap().chosen, passive);
        }
    }

    #[test]
    fn reward_gain_vanishes_when_the_support_sits_in_one_cell(game in game_strategy(4, 3), k in 0usize..16, t in 0.1..0.9f64) {
        let partition = partition_domain(&game);
        let cells: Vec<(f64, f64)> = partition.cells().collect();
        let (lo, hi) = cells[k % cells.len()];
        let a = lo + t * (hi - lo) * 0.5;
        let b = hi - (1.0 - t) * (hi - lo) * 0.5;
        let belief = IntervalBelief::uniform_range(AlphaRange::new(a, b).unwrap()).refined(partition.interior());
        for i in 0..game.leader_count() {
            prop_assert_eq!(expected_reward_gain_bonus(&game, &belief, i, false).unwrap(), 0.0);
        }
        let passive = select_action(&game, &belief, &ExplorationStrategy::passive()).unwrap().chosen;
        let rg = ExplorationStrategy::new(StrategyKind::ExpectedRewardGain, 5.0).unwrap();
        prop_assert_eq!(select_action(&game, &belief, &rg).unwrap().chosen, passive);
    }

    #[test]
    fn rescaling_keeps_passive_and_reward_gain_choices(
        game in game_strategy(4, 3), pick in belief_pick(), scale in 0.1..20.0f64,
    ) {
        let b = belief_for(&game, pick);
        let scaled: Vec<Vec<(f64, f64)>> = game
            .rewards()
            .iter()
            .map(|row| row.iter().map(|r| (scale * r.leader, scale * r.follower)).collect())
            .collect();
        let other = AltruismGame::from_rewards(&scaled).unwrap();
        for kind in [StrategyKind::Passive, StrategyKind::ExpectedRewardGain] {
            let s = ExplorationStrategy::new(kind, 1.0).unwrap();
            let a = select_action(&game, &b, &s).unwrap();
            let c = select_action(&other, &b, &s).unwrap();
            // the choice is only stable when it is not a numerical near-tie
            let best = a.evaluations[a.chosen].total;
            let runner_up = a
                .evaluations
                .iter()
                .filter(|e| e.action != a.chosen)
                .map(|e| e.total)
                .fold(f64::NEG_INFINITY, f64::max);
            if best - runner_up > 1e-6 * (1.0 + best.abs()) {
                prop_assert_eq!(a.chosen, c.chosen);
            }
        }
    }

    #[test]
    fn zero_controls_keep_speed_and_heading(
        x in -5.0..5.0f64, y in -50.0..50.0f64, v in 0.0..30.0f64, theta in -0.5..0.5f64,
    ) {
        let s = VehicleState::new(x, y, v, theta);
        let n = step(&s, Control::default(), 0.2, &VehicleParams::default()).unwrap();
        prop_assert_eq!(n.v, s.v);
        prop_assert_eq!(n.theta, s.theta);
    }

    #[test]
    fn feature_ranges_and_symmetries(
        x1 in -6.0..6.0f64, y1 in -20.0..20.0f64, v1 in 0.0..30.0f64, t1 in -0.5..0.5f64,
        x2 in -6.0..6.0f64, y2 in -20.0..20.0f64, v2 in 0.0..30.0f64,
    ) {
        let p = FeatureParams::default();
        let a = VehicleState::new(x1, y1, v1, t1);
        let b = VehicleState::new(x2, y2, v2, 0.0);
        let fa = features(&a, &b, &p);
        let fb = features(&b, &a, &p);
        for phi in &fa[..4] {
            prop_assert!((0.0..=1.0).contains(phi));
        }
        prop_assert!(fa[4] <= 0.0 && fa[4] >= -1.0);
        prop_assert!(fa[5] > -1.0 - 1e-15 && fa[5] < 1.0 + 1e-15);
        prop_assert!((fa[5] + fb[5]).abs() < 1e-12);
        // reflection through the other vehicle's axes
        let mirrored = VehicleState::new(2.0 * x2 - x1, 2.0 * y2 - y1, v1, t1);
        let lateral_flip = VehicleState::new(2.0 * x2 - x1, y1, v1, t1);
        prop_assert!((features(&mirrored, &b, &p)[4] - fa[4]).abs() < 1e-12);
        prop_assert!((features(&lateral_flip, &b, &p)[4] - fa[4]).abs() < 1e-12);
    }

    #[test]
    fn softmax_likelihoods_sum_to_one(logits in prop::collection::vec(-50.0..50.0f64, 1..6), t in 0.05..5.0f64) {
        let l = softmax_likelihoods(&logits, t).unwrap();
        prop_assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(l.iter().all(|p| *p >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn plans_replay_and_repeat(
        lw in prop::array::uniform6(-2.0..2.0f64), fw in prop::array::uniform6(-2.0..2.0f64),
        gap in -10.0..10.0f64, v in 5.0..20.0f64,
    ) {
        let planner = Planner::default();
        let request = PlanRequest {
            leader: VehicleState::new(2.5, 0.0, v, 0.0),
            follower: VehicleState::new(-2.5, gap, v, 0.0),
            leader_weights: lw,
            follower_weights: fw,
        };
        let plan = planner.bilevel_plan(&request).unwrap();
        let replay = rollout(&request.leader, &plan.leader_controls, planner.config.dt, &planner.vehicle).unwrap();
        prop_assert_eq!(&replay, &plan.leader_trajectory);
        let replay = rollout(&request.follower, &plan.follower_controls, planner.config.dt, &planner.vehicle).unwrap();
        prop_assert_eq!(&replay, &plan.follower_trajectory);
        prop_assert_eq!(&planner.bilevel_plan(&request).unwrap(), &plan);

        // never worse than the zero-control leader baseline
        let zero = vec![Control::default(); planner.config.horizon];
        let response = planner.follower_plan(&request.follower, &request.leader, &zero, &fw).unwrap();
        let lt = rollout(&request.leader, &zero, planner.config.dt, &planner.vehicle).unwrap();
        let ft = rollout(&request.follower, &response, planner.config.dt, &planner.vehicle).unwrap();
        let baseline = cost(&lt, &ft, &lw, &planner.features).unwrap();
        prop_assert!(plan.leader_cost >= baseline);
    }
}
