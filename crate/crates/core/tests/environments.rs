use pdg_core::environment::{gen_cubicles, gen_random_passage, gen_shelves, sample_ik, sample_task, TaskMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn shelves_ik_feasible_for_most_seeds() {
    let seeds = 200;
    let mut feasible = 0;
    for seed in 0..seeds {
        let env = gen_shelves(seed);
        let TaskMode::IkRegion { targets, tolerance } = &env.task_mode else {
            panic!("shelves use ik tasks")
        };
        let oracle = env.oracle();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let found = targets.iter().any(|t| match sample_ik(&env, &oracle, t, *tolerance, &mut rng) {
            Ok(c) => {
                let ee = env.robot.end_effector(&c);
                let d = ((ee[0] - t[0]).powi(2) + (ee[1] - t[1]).powi(2) + (ee[2] - t[2]).powi(2)).sqrt();
                assert!(d <= *tolerance);
                assert!(oracle.is_valid_uncounted(&c));
                true
            }
            Err(_) => false,
        });
        feasible += found as usize;
    }
    assert!(feasible * 100 >= 95 * seeds as usize, "only {feasible}/{seeds} seeds feasible");
}

#[test]
fn sampled_task_endpoints_are_valid() {
    for seed in 0..5 {
        for env in [gen_random_passage(seed, 8), gen_cubicles(seed), gen_shelves(seed)] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = sample_task(&env, &env.task_mode, &mut rng).unwrap();
            let o = env.oracle();
            assert_eq!(o.validate_batch(&[t.start.clone(), t.goal.clone()]).unwrap(), vec![true, true]);
            assert_eq!(o.stats().batch_calls, 1);
        }
    }
}
