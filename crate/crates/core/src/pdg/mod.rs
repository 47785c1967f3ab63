//! Path-database guided search (PDG): grow a tree from the start, always
//! expanding the node whose database value is lowest, and fall back to
//! RRT/RSG exploration when no node can attach to a stored path.

mod search;
mod value;

pub use search::{bipdg_plan, pdg_plan, PdgParams, PdgSearch, RunReport, Step};
pub use value::{
    database_value, filter_goal, optimal_path_value, path_value, update_path, GoalFilteredDb,
    PathUpdate, PathValue,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::{CachedValidator, Obstacle, RobotModel, ValidityOracle};
    use crate::path::Path;
    use crate::pathdb::PathDatabase;
    use crate::planners::{explore_step, Budget, PlannerParams, SearchTree};
    use crate::space::{Configuration, SpaceSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64, y: f64) -> Configuration {
        Configuration::from_raw(vec![x, y])
    }

    fn space() -> SpaceSpec {
        SpaceSpec::euclidean(&[(0.0, 20.0), (0.0, 20.0)]).unwrap()
    }

    fn oracle(obstacles: Vec<Obstacle>) -> ValidityOracle {
        ValidityOracle::new(space(), RobotModel::point2d(), obstacles, 0.05)
            .unwrap()
            .with_audit()
    }

    fn db(paths: &[&[(f64, f64)]]) -> PathDatabase {
        let s = space();
        let paths = paths
            .iter()
            .map(|p| Path::new(&s, p.iter().map(|&(x, y)| c(x, y)).collect()))
            .collect();
        PathDatabase::new(s, paths)
    }

    #[test]
    fn filter_keeps_path_through_goal() {
        let o = oracle(vec![]);
        let d = db(&[&[(1.0, 1.0), (5.0, 5.0), (9.0, 9.0)]]);
        let mut v = &o;
        let f = filter_goal(&d, &c(9.0, 9.0), 2.0, &mut v);
        assert_eq!(f.db.len(), 1);
        assert_eq!(f.db.path(0).states(), d.path(0).states());
        assert_eq!(o.stats().edges_checked, 0);
    }

    #[test]
    fn filter_drops_far_paths_without_checks() {
        let o = oracle(vec![]);
        let d = db(&[&[(1.0, 1.0), (2.0, 1.0)]]);
        let mut v = &o;
        let f = filter_goal(&d, &c(15.0, 15.0), 3.0, &mut v);
        assert!(f.db.is_empty());
        assert_eq!(o.stats(), Default::default());
    }

    #[test]
    fn filter_truncates_after_closest_state() {
        let t = c(10.0, 10.0);
        // distances to t: 3, 1, 2
        let d = db(&[&[(7.0, 10.0), (10.0, 11.0), (12.0, 10.0)]]);
        let o = oracle(vec![]);
        let mut v = &o;
        let f = filter_goal(&d, &t, 1.5, &mut v);
        let brute = (0..3)
            .min_by(|&a, &b| {
                let da = o.space().distance(d.path(0).state(a), &t);
                let db_ = o.space().distance(d.path(0).state(b), &t);
                da.partial_cmp(&db_).unwrap()
            })
            .unwrap();
        assert_eq!(brute, 1);
        assert_eq!(f.db.path(0).states(), &[c(7.0, 10.0), c(10.0, 11.0), t.clone()]);
        assert_eq!(f.db.path(0).suffix_cost(1), 1.0);
        assert_eq!(o.stats().edges_checked, 1);

        // same path with the goal edge blocked is dropped
        let blocked = oracle(vec![Obstacle::rect([9.0, 10.4], [11.0, 10.6])]);
        let mut v = &blocked;
        assert!(filter_goal(&d, &t, 1.5, &mut v).db.is_empty());
    }

    #[test]
    fn value_at_last_state_before_goal() {
        let o = oracle(vec![]);
        let d = db(&[&[(1.0, 1.0), (4.0, 1.0), (4.0, 5.0)]]);
        let mut v = &o;
        let pv = path_value(&c(4.0, 1.0), &d, 0, &mut v).unwrap();
        assert_eq!(pv.attach, 2);
        assert_eq!(pv.value, 4.0);
        assert_eq!(o.stats().edges_checked, 1);
    }

    #[test]
    fn blocked_attachment_is_infinite() {
        let o = oracle(vec![Obstacle::rect([5.0, 0.0], [6.0, 20.0])]);
        let d = db(&[&[(1.0, 1.0), (8.0, 1.0), (8.0, 5.0)]]);
        let mut v = &o;
        let pv = path_value(&c(2.0, 2.0), &d, 0, &mut v).unwrap();
        assert_eq!(pv.attach, 1);
        assert!(pv.value.is_infinite());
    }

    #[test]
    fn off_path_value_matches_formula_and_dominates_optimal() {
        let o = oracle(vec![]);
        let d = db(&[&[(1.0, 1.0), (5.0, 1.0), (9.0, 1.0), (9.0, 9.0)]]);
        let x = c(5.5, 2.0);
        let mut v = CachedValidator::new(&o);
        let pv = path_value(&x, &d, 0, &mut v).unwrap();
        let s = o.space();
        assert_eq!(pv.closest, 1);
        let want = s.distance(&x, &c(9.0, 1.0)) + 8.0;
        assert!((pv.value - want).abs() < 1e-12);
        let opt = optimal_path_value(&x, &d, 0, &mut v);
        assert!(opt <= pv.value);
        // straight visible path with x on it: remaining length
        let line = db(&[&[(1.0, 1.0), (5.0, 1.0), (9.0, 1.0)]]);
        assert!((optimal_path_value(&c(3.0, 1.0), &line, 0, &mut v) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn occluded_path_has_infinite_optimal_value() {
        let o = oracle(vec![Obstacle::rect([0.0, 4.0], [20.0, 5.0])]);
        let d = db(&[&[(1.0, 8.0), (9.0, 8.0), (9.0, 12.0)]]);
        let mut v = &o;
        assert!(optimal_path_value(&c(3.0, 1.0), &d, 0, &mut v).is_infinite());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn closest_value_never_beats_optimal(
            pts in prop::collection::vec((0.5..19.5f64, 0.5..19.5f64), 2..7),
            x in (0.5..19.5f64, 0.5..19.5f64),
            wall in (2.0..16.0f64, 2.0..16.0f64),
        ) {
            let o = oracle(vec![Obstacle::rect([wall.0, wall.1], [wall.0 + 2.0, wall.1 + 0.5])]);
            let d = db(&[&pts]);
            let x = c(x.0, x.1);
            let mut v = CachedValidator::new(&o);
            let pv = path_value(&x, &d, 0, &mut v).unwrap();
            let opt = optimal_path_value(&x, &d, 0, &mut v);
            if pv.value.is_finite() {
                prop_assert!(opt <= pv.value + 1e-12);
            }
        }
    }

    #[test]
    fn database_value_minimum_over_candidates() {
        let o = oracle(vec![Obstacle::rect([11.0, 0.0], [12.0, 3.0])]);
        let d = db(&[
            &[(10.0, 1.0), (13.0, 1.0), (18.0, 1.0)],
            &[(10.0, 2.0), (10.0, 6.0), (18.0, 6.0)],
            &[(9.0, 3.0), (14.0, 8.0), (18.0, 1.0)],
            &[(1.0, 19.0), (2.0, 19.0)],
        ]);
        let x = c(10.0, 3.0);
        let mut v = CachedValidator::new(&o);
        let (vals, best) = database_value(&x, &d, 2.5, &mut v);
        assert_eq!(vals.iter().map(|p| p.path).collect::<Vec<_>>(), vec![0, 1, 2]);
        let per: Vec<f64> = (0..3).map(|p| path_value(&x, &d, p, &mut v).unwrap().value).collect();
        assert!(per[0].is_infinite());
        let want = if per[1] <= per[2] { 1 } else { 2 };
        assert_eq!(vals[best.unwrap()].path, want);
        assert_eq!(vals[best.unwrap()].value, per[want]);

        let (_, none) = database_value(&c(5.0, 15.0), &d, 1.0, &mut v);
        assert!(none.is_none());
        let (single, b) = database_value(&c(1.5, 18.5), &d, 1.0, &mut v);
        assert_eq!(single.len(), 1);
        assert_eq!(b, Some(0));
        // the cache makes the per-path re-evaluations free
        assert_eq!(o.take_audit().unwrap().duplicate_edges(), 0);
    }

    #[test]
    fn equal_values_tie_to_lowest_path() {
        let o = oracle(vec![]);
        let d = db(&[&[(5.0, 6.0), (9.0, 6.0)], &[(5.0, 4.0), (9.0, 4.0)]]);
        let mut v = &o;
        let (vals, best) = database_value(&c(5.0, 5.0), &d, 2.0, &mut v);
        assert_eq!(vals[0].value, vals[1].value);
        assert_eq!(best, Some(0));
    }

    #[test]
    fn update_rules() {
        let mut d = db(&[&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0)]]);
        let u = update_path(&mut d, 0, 1, true);
        assert_eq!((u.start, u.retired), (1, false));
        let u = update_path(&mut d, 0, 1, false);
        assert_eq!((u.start, u.retired), (2, false));
        assert!(d.delta_ball_query(&c(2.0, 1.0), 0.1).is_empty());
        let u = update_path(&mut d, 0, 3, true);
        assert!(u.retired);
        assert!(d.delta_ball_query(&c(4.0, 1.0), 0.1).is_empty());
    }

    fn params(tau: f64) -> PdgParams {
        PdgParams {
            delta_goal: 3.0,
            delta_value: 3.0,
            explore: PlannerParams {
                tau,
                p_goal: 0.05,
                r_attach: tau,
                ..Default::default()
            },
        }
    }

    #[test]
    fn valid_database_path_is_followed_without_exploring() {
        let o = oracle(vec![]);
        let d = db(&[&[(1.0, 1.0), (4.0, 8.0), (12.0, 9.0), (18.0, 18.0)]]);
        let mut v = CachedValidator::new(&o);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = pdg_plan(&mut v, &c(1.0, 1.0), &c(18.0, 18.0), &d, &params(1.0), &Budget::configs(1 << 20), &mut rng);
        let p = r.path.clone().unwrap();
        assert_eq!(p.states(), d.path(0).states());
        assert_eq!(r.explore, 0);
        assert_eq!(r.exploit, 3);
        assert_eq!(r.ee_ratio(), 1.0);
    }

    #[test]
    fn empty_database_reproduces_rrt_expansions() {
        let obstacles = vec![Obstacle::rect([8.0, 0.0], [9.0, 15.0])];
        let empty = PathDatabase::new(space(), vec![]);
        let (s, t) = (c(2.0, 2.0), c(18.0, 2.0));
        let p = params(1.5);
        let clock = Budget::default().start(Default::default());

        let oa = oracle(obstacles.clone());
        let mut va = &oa;
        let mut ra = ChaCha8Rng::seed_from_u64(42);
        let mut search = PdgSearch::new(&s, &t, &empty, &p, &mut va);

        let ob = oracle(obstacles);
        let mut vb = &ob;
        let mut rb = ChaCha8Rng::seed_from_u64(42);
        let mut tree = SearchTree::new(s.clone());

        for _ in 0..400 {
            let step = search.step(&mut va, &mut ra, &clock);
            let (_, g) = explore_step(&mut tree, &t, &p.explore, &mut vb, &mut rb);
            assert_eq!(search.tree().nodes(), tree.nodes());
            assert_eq!(oa.stats(), ob.stats());
            if g.is_some() {
                assert!(matches!(step, Step::Solved(_)));
                break;
            }
        }
        assert_eq!(search.exploit, 0);
    }

    #[test]
    fn empty_database_plan_matches_rrt_plan() {
        let o = oracle(vec![Obstacle::rect([8.0, 0.0], [9.0, 15.0])]);
        let empty = PathDatabase::new(space(), vec![]);
        let (s, t) = (c(2.0, 2.0), c(18.0, 2.0));
        let p = params(1.5);
        let budget = Budget::configs(5_000_000);
        let a = o.fresh();
        let mut va = &a;
        let r1 = pdg_plan(&mut va, &s, &t, &empty, &p, &budget, &mut ChaCha8Rng::seed_from_u64(3));
        let b = o.fresh();
        let mut vb = &b;
        let r2 = crate::planners::rrt_plan(&mut vb, &s, &t, &p.explore, &budget, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(r1.path, r2.path);
        assert_eq!(r1.stats, r2.stats);
        assert_eq!(r1.explore, r2.iterations);
    }

    /// A wall with a gap; one stored path runs into the wall before the
    /// gap, another passes through the gap.
    fn wall_fixture() -> (ValidityOracle, PathDatabase) {
        let o = oracle(vec![
            Obstacle::rect([9.5, 0.0], [10.5, 9.0]),
            Obstacle::rect([9.5, 11.0], [10.5, 20.0]),
        ]);
        let d = db(&[
            &[(2.0, 3.0), (6.0, 4.0), (10.0, 4.0), (14.0, 4.0), (18.0, 8.0)],
            &[(2.0, 16.0), (8.0, 10.0), (12.0, 10.0), (18.0, 9.0)],
        ]);
        (o, d)
    }

    #[test]
    fn blocked_path_is_trimmed_and_search_recovers() {
        let (o, d) = wall_fixture();
        let (s, t) = (c(2.0, 3.0), c(18.0, 8.0));
        let mut p = params(1.5);
        p.delta_goal = 4.0;
        p.delta_value = 4.0;
        let mut v = CachedValidator::new(&o);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = pdg_plan(&mut v, &s, &t, &d, &p, &Budget::configs(10_000_000), &mut rng);
        let path = r.path.expect("solvable");
        assert!(o.path_is_valid(path.states()));
        assert!(r.path_updates >= 1);
        assert!(r.exploit >= 2);
        assert_eq!(o.take_audit().unwrap().duplicate_edges(), 0);
    }

    #[test]
    fn no_edge_checked_twice_across_seeds() {
        for seed in 0..10 {
            let (o, d) = wall_fixture();
            let mut v = CachedValidator::new(&o);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = pdg_plan(&mut v, &c(3.0, 15.0), &c(18.0, 8.0), &d, &params(2.0), &Budget::configs(10_000_000), &mut rng);
            assert!(r.solved());
            assert!(r.ee_ratio() >= 0.0 && r.ee_ratio() <= 1.0);
            assert_eq!(o.take_audit().unwrap().duplicate_edges(), 0);
        }
    }

    #[test]
    fn pdg_is_deterministic() {
        let run = |seed| {
            let (o, d) = wall_fixture();
            let mut v = CachedValidator::new(&o);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = pdg_plan(&mut v, &c(2.0, 3.0), &c(18.0, 8.0), &d, &params(1.0), &Budget::configs(10_000_000), &mut rng);
            (r.path, r.stats, r.explore, r.exploit)
        };
        assert_eq!(run(5), run(5));
    }

    #[test]
    fn bidirectional_cases() {
        let o = oracle(vec![]);
        let d = PathDatabase::new(space(), vec![]);
        let mut v = CachedValidator::new(&o);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = params(2.0);
        let budget = Budget::configs(1 << 22);
        let r = bipdg_plan(&mut v, &c(2.0, 2.0), &c(2.0, 2.0), &d, &p, &budget, &mut rng);
        assert_eq!(r.path.unwrap().len(), 1);
        let r = bipdg_plan(&mut v, &c(2.0, 2.0), &c(15.0, 12.0), &d, &p, &budget, &mut rng);
        assert!(r.solved());
        assert!(r.expansions() <= 30, "{}", r.expansions());

        // symmetric corridor, solved from either direction
        let (o, d) = wall_fixture();
        // stored paths are directional, so only the forward query can exploit
        for (s, t, exploits) in [(c(2.0, 16.0), c(18.0, 9.0), true), (c(18.0, 9.0), c(2.0, 16.0), false)] {
            let mut v = CachedValidator::new(&o);
            let r = bipdg_plan(&mut v, &s, &t, &d, &p, &budget, &mut rng);
            let path = r.path.clone().expect("solvable");
            assert_eq!(path.start(), &s);
            assert_eq!(path.end(), &t);
            assert!(o.path_is_valid(path.states()));
            assert_eq!(r.exploit > 0, exploits);
        }
    }
}
