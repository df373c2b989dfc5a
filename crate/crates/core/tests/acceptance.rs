//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use active_altruism::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BONUS_TOLERANCE: f64 = 0.01;
const PASSIVE_TOLERANCE: f64 = 1e-9;
const MC_TOLERANCE: f64 = 1e-2;
const FAST_LIMIT: Duration = Duration::from_secs(1);
const EPISODE_LIMIT: Duration = Duration::from_secs(60);
const SUITE_LIMIT: Duration = Duration::from_secs(300);

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: impl Into<String>) -> Self {
        Self {
            ok,
            detail: detail.into(),
        }
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn nudge_game() -> AltruismGame {
    AltruismGame::from_rewards(&[
        vec![(3.0, 0.0), (-5.0, 7.0)],
        vec![(-1.0, 2.0), (1.0, 1.0)],
        vec![(-1.0, 2.0), (2.0, 2.0)],
    ])
    .unwrap()
}

fn sufficiency_game() -> AltruismGame {
    AltruismGame::from_rewards(&[
        vec![(5.0, -4.0), (-2.0, 1.0)],
        vec![(1.0, -4.0), (0.0, 1.0)],
    ])
    .unwrap()
}

fn lane_merge_game() -> AltruismGame {
    AltruismGame::from_rewards(&[
        vec![(3.0, -2.0), (-10.0, 3.0)],
        vec![(0.0, -2.0), (1.0, 3.0)],
        vec![(2.0, 0.0), (-1.0, 3.0)],
    ])
    .unwrap()
}

fn responsibility_game() -> AltruismGame {
    use OutcomeLabel::*;
    let labels: Vec<Vec<CellLabels>> = vec![
        vec![
            (GoalAchieved, Neutral).into(),
            (AccidentResponsible, AccidentResponsible).into(),
        ],
        vec![
            (AccidentResponsible, AccidentResponsible).into(),
            (Neutral, GoalAchieved).into(),
        ],
        vec![
            (GoalAchieved, Neutral).into(),
            (Neutral, GoalAchieved).into(),
        ],
    ];
    AltruismGame::from_labels(
        vec!["A".into(), "B".into(), "E".into()],
        vec!["Behind".into(), "Ahead".into()],
        &labels,
        0.0,
    )
    .unwrap()
}

fn uniform(game: &AltruismGame) -> IntervalBelief {
    IntervalBelief::uniform_on(&partition_domain(game))
}

fn uniform_on_range(game: &AltruismGame, lo: f64, hi: f64) -> IntervalBelief {
    IntervalBelief::uniform_range(AlphaRange::new(lo, hi).unwrap())
        .refined(partition_domain(game).interior())
}

fn scenario(file: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(file);
    Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(base: &Scenario, alpha: f64, strategy: ExplorationStrategy) -> (Episode, Duration) {
    let mut s = base.clone();
    s.true_alpha = alpha;
    s.strategy = strategy;
    let start = Instant::now();
    let episode = run_episode(&s).expect("episode runs");
    (episode, start.elapsed())
}

fn actions(episode: &Episode) -> String {
    episode.summary.chosen_actions.concat()
}

fn criterion_1() -> Outcome {
    let nudge = nudge_game();
    let sufficiency = sufficiency_game();
    let merge = lane_merge_game();
    let ok = nudge.intersection_points_exact(0) == vec![ratio(7, 15)]
        && nudge.intersection_points_exact(1) == vec![ratio(1, 3)]
        && nudge.intersection_points_exact(2).is_empty()
        && sufficiency.intersection_points_exact(0) == vec![ratio(5, 12)]
        && sufficiency.intersection_points_exact(1) == vec![ratio(5, 6)]
        && partition_domain(&sufficiency).interior() == [5.0 / 12.0, 5.0 / 6.0]
        && merge.intersection_points_exact(0) == vec![ratio(5, 18)]
        && merge.intersection_points_exact(1).is_empty()
        && merge.row_crossings_exact(1) == vec![ratio(5, 4)]
        && merge.intersection_points_exact(2) == vec![ratio(1, 2)];
    Outcome::check(
        ok,
        "A1 7/15, A2 1/3, A3 none; 5/12, 5/6; A 5/18, B 5/4 (outside), E 1/2",
    )
}

fn criterion_2() -> Outcome {
    let g = sufficiency_game();
    let table = |b: &IntervalBelief| {
        let ig: Vec<f64> = (0..2).map(|i| info_gain_bonus(&g, b, i).unwrap()).collect();
        let rg: Vec<f64> = (0..2)
            .map(|i| expected_reward_gain_bonus(&g, b, i, false).unwrap())
            .collect();
        (ig, rg)
    };
    let close = |got: &[f64], want: [f64; 2]| {
        got.iter()
            .zip(want)
            .all(|(g, w)| (g - w).abs() <= BONUS_TOLERANCE)
    };
    let (ig_full, rg_full) = table(&uniform(&g));
    let (ig_part, rg_part) = table(&uniform_on_range(&g, 5.0 / 12.0, 1.0));
    let ok = close(&ig_full, [0.68, 0.45])
        && close(&rg_full, [3.54, 1.25])
        && close(&ig_part, [0.0, 0.6])
        && close(&rg_part, [0.0, 0.41]);
    Outcome::check(
        ok,
        format!(
            "U(0,1): IG {ig_full:.3?} RG {rg_full:.3?}; U(5/12,1): IG {ig_part:.3?} RG {rg_part:.3?} (±{BONUS_TOLERANCE})"
        ),
    )
}

fn criterion_3() -> Outcome {
    let g = nudge_game();
    let b = uniform(&g);
    let pick = |kind| select_action(&g, &b, &ExplorationStrategy::new(kind, 1.0).unwrap()).unwrap();
    let passive = pick(StrategyKind::Passive);
    let ig = pick(StrategyKind::InfoGain);
    let rg = pick(StrategyKind::ExpectedRewardGain);
    let expected: Vec<f64> = passive
        .evaluations
        .iter()
        .map(|e| e.expected_reward)
        .collect();
    let values_ok = expected
        .iter()
        .zip([-11.0 / 15.0, 1.0 / 3.0, 2.0])
        .all(|(g, w)| (g - w).abs() <= PASSIVE_TOLERANCE);
    let ok = passive.chosen == 2 && ig.chosen == 2 && rg.chosen == 1 && values_ok;
    Outcome::check(
        ok,
        format!(
            "passive A{}, info-gain A{}, reward-gain A{}; expected rewards {expected:.6?}",
            passive.chosen + 1,
            ig.chosen + 1,
            rg.chosen + 1
        ),
    )
}

fn criterion_4() -> Outcome {
    let g = lane_merge_game();
    let d = select_action(
        &g,
        &uniform(&g),
        &ExplorationStrategy::new(StrategyKind::InfoGain, 1.0).unwrap(),
    )
    .unwrap();
    let totals: Vec<f64> = d.evaluations.iter().map(|e| e.total).collect();
    let ok = totals
        .iter()
        .zip([-0.02, 1.0, 1.19])
        .all(|(g, w)| (g - w).abs() <= BONUS_TOLERANCE);
    Outcome::check(ok, format!("(A, B, E) = {totals:.3?} (±{BONUS_TOLERANCE})"))
}

fn criterion_5() -> Outcome {
    let region = conflict_region(&responsibility_game());
    let expected = AlphaInterval {
        lo: 0.0,
        hi: 0.5,
        lo_closed: true,
        hi_closed: false,
    };
    let ok = region.intervals() == [expected] && !region.contains(0.9);
    Outcome::check(ok, format!("conflict region {region}"))
}

struct EpisodeCheck {
    episodes: Vec<Episode>,
    slowest: Duration,
}

impl EpisodeCheck {
    fn new() -> Self {
        Self {
            episodes: Vec::new(),
            slowest: Duration::ZERO,
        }
    }

    fn run(&mut self, base: &Scenario, alpha: f64, strategy: ExplorationStrategy) -> Episode {
        let (episode, elapsed) = run(base, alpha, strategy);
        self.slowest = self.slowest.max(elapsed);
        self.episodes.push(episode.clone());
        episode
    }
}

fn criterion_6(log: &mut EpisodeCheck) -> Outcome {
    let base = scenario("lane_merge.toml");
    let mut ok = true;
    let mut detail = Vec::new();
    for alpha in [0.2, 0.9] {
        for kind in StrategyKind::ALL {
            let ep = log.run(&base, alpha, ExplorationStrategy::new(kind, 1.0).unwrap());
            let outcome = ep.summary.outcome;
            let want = if alpha > 0.5 && kind == StrategyKind::ExpectedRewardGain {
                RelativeOutcome::Ahead
            } else {
                RelativeOutcome::Behind
            };
            ok &= outcome == want;
            if alpha < 0.5 && kind == StrategyKind::ExpectedRewardGain {
                let seq = actions(&ep);
                ok &= ["E", "A", "B"].iter().all(|a| seq.contains(a));
            }
            detail.push(format!("α={alpha} {kind}: {} {:?}", actions(&ep), outcome));
        }
    }
    ok &= log.slowest < EPISODE_LIMIT;
    Outcome::check(
        ok,
        format!("{}; slowest episode {:.2?}", detail.join("; "), log.slowest),
    )
}

fn criterion_7(log: &mut EpisodeCheck) -> Outcome {
    let base = scenario("lane_merge_conflict.toml");
    let mut ok = true;
    let mut detail = Vec::new();
    for alpha in [0.2, 0.9] {
        let unaware = log.run(&base, alpha, base.strategy.with_conflict_awareness(false));
        let aware = log.run(&base, alpha, base.strategy.with_conflict_awareness(true));
        let want = if alpha < 0.5 {
            RelativeOutcome::Behind
        } else {
            RelativeOutcome::Ahead
        };
        ok &= unaware.summary.chosen_actions[0] == "A";
        ok &= aware.summary.chosen_actions[0] == "E";
        ok &= aware.summary.outcome == want;
        detail.push(format!(
            "α={alpha} unaware: {}; aware: {} {:?}",
            actions(&unaware),
            actions(&aware),
            aware.summary.outcome
        ));
    }
    Outcome::check(ok, detail.join("; "))
}

/// Integer oracle for the Stackelberg equilibrium with α = k/100.
fn oracle_equilibrium(
    rewards: &[Vec<(i64, i64)>],
    k_follower: i64,
    k_leader: i64,
) -> (usize, usize) {
    let follower = |r: (i64, i64)| (100 - k_follower) * r.1 + k_follower * r.0;
    let leader = |r: (i64, i64)| (100 - k_leader) * r.0 + k_leader * r.1;
    let mut best: Option<(i64, usize, usize)> = None;
    for (i, row) in rewards.iter().enumerate() {
        let top = row.iter().map(|&r| follower(r)).max().unwrap();
        let rational: Vec<usize> = (0..row.len())
            .filter(|&j| follower(row[j]) == top)
            .collect();
        let lead_top = rational.iter().map(|&j| leader(row[j])).max().unwrap();
        let j = *rational
            .iter()
            .find(|&&j| leader(row[j]) == lead_top)
            .unwrap();
        if best.map_or(true, |(v, _, _)| lead_top > v) {
            best = Some((lead_top, i, j));
        }
    }
    let (_, i, j) = best.unwrap();
    (i, j)
}

fn random_game(
    rng: &mut ChaCha8Rng,
    max_dim: usize,
    bound: i64,
) -> (Vec<Vec<(i64, i64)>>, AltruismGame) {
    let m = rng.gen_range(1..=max_dim);
    let n = rng.gen_range(1..=max_dim);
    let ints: Vec<Vec<(i64, i64)>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| (rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound)))
                .collect()
        })
        .collect();
    let floats: Vec<Vec<(f64, f64)>> = ints
        .iter()
        .map(|row| row.iter().map(|&(a, b)| (a as f64, b as f64)).collect())
        .collect();
    (ints, AltruismGame::from_rewards(&floats).unwrap())
}

fn equilibrium_oracle(rng: &mut ChaCha8Rng) -> (bool, String) {
    let matrices = 10_000;
    let mut mismatches = 0;
    for _ in 0..matrices {
        let (ints, game) = random_game(rng, 4, 10);
        let k_leader = rng.gen_range(0..=100);
        let game = game.with_alpha_leader(k_leader as f64 / 100.0).unwrap();
        for _ in 0..5 {
            let k = rng.gen_range(0..=100);
            let eq = game.stackelberg_equilibrium(k as f64 / 100.0).unwrap();
            if (eq.leader_action, eq.follower_action) != oracle_equilibrium(&ints, k, k_leader) {
                mismatches += 1;
            }
        }
    }
    (
        mismatches == 0,
        format!("equilibria {matrices} matrices × 5 α, {mismatches} mismatches"),
    )
}

fn random_belief(rng: &mut ChaCha8Rng, game: &AltruismGame) -> IntervalBelief {
    let partition = partition_domain(game);
    if rng.gen_bool(0.5) {
        let a: f64 = rng.gen();
        let b: f64 = rng.gen();
        let (lo, hi) = (a.min(b), a.max(b).max(a.min(b) + 1e-3).min(1.0));
        IntervalBelief::uniform_range(AlphaRange::new(lo, hi).unwrap())
            .refined(partition.interior())
    } else {
        let masses: Vec<f64> = (0..partition.len())
            .map(|_| rng.gen_range(0.0..1.0))
            .collect();
        let total: f64 = masses.iter().sum();
        IntervalBelief::from_cells(
            partition.breakpoints().to_vec(),
            masses.iter().map(|m| m / total).collect(),
        )
        .unwrap()
    }
}

fn bonus_properties(rng: &mut ChaCha8Rng) -> (bool, String) {
    let pairs = 1_000;
    let mut failures = 0;
    for _ in 0..pairs {
        let (_, game) = random_game(rng, 4, 10);
        let b = random_belief(rng, &game);
        for i in 0..game.leader_count() {
            let ig = info_gain_bonus(&game, &b, i).unwrap();
            let rg = expected_reward_gain_bonus(&game, &b, i, false).unwrap();
            if ig < 0.0 || rg < 0.0 {
                failures += 1;
            }
        }
        let passive = select_action(&game, &b, &ExplorationStrategy::passive())
            .unwrap()
            .chosen;
        for kind in [StrategyKind::InfoGain, StrategyKind::ExpectedRewardGain] {
            let zero = ExplorationStrategy::new(kind, 0.0).unwrap();
            if select_action(&game, &b, &zero).unwrap().chosen != passive {
                failures += 1;
            }
        }
    }
    (
        failures == 0,
        format!("bonuses ≥ 0 and λ=0 reduction on {pairs} pairs, {failures} failures"),
    )
}

/// Bonuses from an α grid, independent of the partition representation.
fn grid_bonuses(game: &AltruismGame, lo: f64, hi: f64, i: usize, points: usize) -> (f64, f64) {
    let h = (hi - lo) / points as f64;
    let alphas: Vec<f64> = (0..points).map(|k| lo + (k as f64 + 0.5) * h).collect();
    let entropy = |count: usize| (count as f64 * h).ln();
    let mean_total = |subset: &[f64]| -> f64 {
        (0..game.leader_count())
            .map(|a| {
                subset
                    .iter()
                    .map(|&x| game.leader_reward_given_alpha(a, x).unwrap())
                    .sum::<f64>()
                    / subset.len() as f64
            })
            .sum()
    };
    let prior_total = mean_total(&alphas);
    let mut info = entropy(points);
    let mut reward = 0.0;
    for j in 0..game.follower_count() {
        let subset: Vec<f64> = alphas
            .iter()
            .copied()
            .filter(|&x| game.follower_best_response(i, x).unwrap() == j)
            .collect();
        if subset.is_empty() {
            continue;
        }
        let p = subset.len() as f64 / points as f64;
        info -= p * entropy(subset.len());
        reward += p * (mean_total(&subset) - prior_total).abs();
    }
    (info, reward)
}

fn monte_carlo_agreement(rng: &mut ChaCha8Rng) -> (bool, String) {
    // 2×2 and 3×2 integer matrices, entries in [-5, 5]
    let cases = 300;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let m = rng.gen_range(2..=3);
        let rewards: Vec<Vec<(f64, f64)>> = (0..m)
            .map(|_| {
                (0..2)
                    .map(|_| (rng.gen_range(-5..=5) as f64, rng.gen_range(-5..=5) as f64))
                    .collect()
            })
            .collect();
        let game = AltruismGame::from_rewards(&rewards).unwrap();
        let a: f64 = rng.gen();
        let w: f64 = rng.gen_range(0.05..=1.0);
        let (lo, hi) = ((a * (1.0 - w)).max(0.0), (a * (1.0 - w) + w).min(1.0));
        let b = uniform_on_range(&game, lo, hi);
        for i in 0..game.leader_count() {
            let (ig_grid, rg_grid) = grid_bonuses(&game, lo, hi, i, 10_000);
            let ig = info_gain_bonus(&game, &b, i).unwrap();
            let rg = expected_reward_gain_bonus(&game, &b, i, false).unwrap();
            worst = worst.max((ig - ig_grid).abs()).max((rg - rg_grid).abs());
        }
    }
    (
        worst <= MC_TOLERANCE,
        format!("grid oracle on {cases} beliefs, worst gap {worst:.2e} (≤ {MC_TOLERANCE})"),
    )
}

fn mass_conservation(episodes: &[Episode]) -> (bool, String) {
    let steps: usize = episodes.iter().map(|e| e.records.len()).sum();
    let ok = episodes
        .iter()
        .flat_map(|e| &e.records)
        .all(|r| (r.belief.total_mass() - 1.0).abs() <= 1e-9);
    (
        ok && steps > 0,
        format!("belief mass 1 on all {steps} episode steps"),
    )
}

fn criterion_8(episodes: &[Episode]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let checks = [
        equilibrium_oracle(&mut rng),
        bonus_properties(&mut rng),
        monte_carlo_agreement(&mut rng),
        mass_conservation(episodes),
    ];
    let ok = checks.iter().all(|(ok, _)| *ok);
    Outcome::check(
        ok,
        checks
            .iter()
            .map(|(_, d)| d.as_str())
            .collect::<Vec<_>>()
            .join("; "),
    )
}

fn main() {
    let suite = Instant::now();
    let mut all_ok = true;
    let mut report =
        |n: usize, name: &str, limit: Option<Duration>, f: &mut dyn FnMut() -> Outcome| {
            let start = Instant::now();
            let mut outcome = f();
            let elapsed = start.elapsed();
            if let Some(limit) = limit {
                if elapsed >= limit {
                    outcome.ok = false;
                    outcome
                        .detail
                        .push_str(&format!("; took {elapsed:.2?}, limit {limit:.0?}"));
                }
            }
            all_ok &= outcome.ok;
            let status = if outcome.ok { "PASS" } else { "FAIL" };
            println!(
                "criterion {n} {status} {name} ({elapsed:.2?}): {}",
                outcome.detail
            );
        };
    let mut episodes = EpisodeCheck::new();
    report(1, "intersection values", Some(FAST_LIMIT), &mut criterion_1);
    report(
        2,
        "sufficiency bonus table",
        Some(FAST_LIMIT),
        &mut criterion_2,
    );
    report(3, "nudge argmax", Some(FAST_LIMIT), &mut criterion_3);
    report(
        4,
        "lane-merge step-0 values",
        Some(FAST_LIMIT),
        &mut criterion_4,
    );
    report(5, "conflict region", Some(FAST_LIMIT), &mut criterion_5);
    report(6, "lane-merge behaviour classes", None, &mut || {
        criterion_6(&mut episodes)
    });
    report(7, "conflict behaviour classes", None, &mut || {
        criterion_7(&mut episodes)
    });
    report(8, "property suites", None, &mut || {
        criterion_8(&episodes.episodes)
    });
    let total = suite.elapsed();
    if total >= SUITE_LIMIT {
        all_ok = false;
        println!("suite FAIL total {total:.2?} exceeds {SUITE_LIMIT:.0?}");
    }
    println!(
        "acceptance {} in {total:.2?}",
        if all_ok { "PASS" } else { "FAIL" }
    );
    if !all_ok {
        std::process::exit(1);
    }
}
