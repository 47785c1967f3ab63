use crate::path::Path;
use crate::space::SpaceSpec;

/// Dynamic time warping distance between two paths.
///
/// Symmetric step pattern, no slope constraint, no normalization:
/// `D(i,j) = d(p_i, q_j) + min(D(i-1,j), D(i,j-1), D(i-1,j-1))`.
pub fn dtw(space: &SpaceSpec, p: &Path, q: &Path) -> f64 {
    dtw_bounded(space, p, q, f64::INFINITY)
}

/// DTW with early abandoning: returns `INFINITY` as soon as every cell of a
/// row exceeds `bound`.
pub fn dtw_bounded(space: &SpaceSpec, p: &Path, q: &Path, bound: f64) -> f64 {
    let (a, b) = (p.states(), q.states());
    assert!(
        !a.is_empty() && !b.is_empty(),
        "contract violation: dtw of an empty path"
    );
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![0.0; m];
    for (i, x) in a.iter().enumerate() {
        let mut row_min = f64::INFINITY;
        for j in 0..m {
            let cost = space.distance(x, &b[j]);
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(cur[j - 1]).min(prev[j - 1]),
            };
            cur[j] = cost + best;
            row_min = row_min.min(cur[j]);
        }
        if row_min > bound {
            return f64::INFINITY;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Configuration;
    use proptest::prelude::*;

    fn space() -> SpaceSpec {
        SpaceSpec::euclidean(&[(-10.0, 10.0), (-10.0, 10.0)]).unwrap()
    }

    fn path(s: &SpaceSpec, pts: &[(f64, f64)]) -> Path {
        let states = pts
            .iter()
            .map(|&(x, y)| Configuration::from_raw(vec![x, y]))
            .collect();
        Path::new(s, states)
    }

    /// Minimum over every monotone alignment, enumerated recursively.
    fn exhaustive(s: &SpaceSpec, p: &Path, q: &Path) -> f64 {
        fn go(s: &SpaceSpec, p: &Path, q: &Path, i: usize, j: usize) -> f64 {
            let c = s.distance(p.state(i), q.state(j));
            if i == p.len() - 1 && j == q.len() - 1 {
                return c;
            }
            let mut best = f64::INFINITY;
            if i + 1 < p.len() {
                best = best.min(go(s, p, q, i + 1, j));
            }
            if j + 1 < q.len() {
                best = best.min(go(s, p, q, i, j + 1));
            }
            if i + 1 < p.len() && j + 1 < q.len() {
                best = best.min(go(s, p, q, i + 1, j + 1));
            }
            c + best
        }
        go(s, p, q, 0, 0)
    }

    #[test]
    fn identity_and_single_states() {
        let s = space();
        let p = path(&s, &[(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]);
        assert_eq!(dtw(&s, &p, &p), 0.0);
        let a = path(&s, &[(0.0, 0.0)]);
        let b = path(&s, &[(3.0, 4.0)]);
        assert_eq!(dtw(&s, &a, &b), 5.0);
    }

    #[test]
    fn small_example_matches_exhaustive_alignment() {
        let s = space();
        let p = path(&s, &[(0.0, 0.0), (1.0, 0.0)]);
        let q = path(&s, &[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]);
        let want = exhaustive(&s, &p, &q);
        assert!((want - (2.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((dtw(&s, &p, &q) - want).abs() < 1e-12);
    }

    #[test]
    fn early_abandon_only_when_over_bound() {
        let s = space();
        let p = path(&s, &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let q = path(&s, &[(0.0, 5.0), (1.0, 5.0), (2.0, 5.0)]);
        assert_eq!(dtw_bounded(&s, &p, &q, 16.0), 15.0);
        assert_eq!(dtw_bounded(&s, &p, &q, 14.0), f64::INFINITY);
    }

    fn arb_path() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..=6)
    }

    proptest! {
        #[test]
        fn matches_oracle_and_is_symmetric(a in arb_path(), b in arb_path()) {
            let s = space();
            let (p, q) = (path(&s, &a), path(&s, &b));
            let d = dtw(&s, &p, &q);
            prop_assert!((d - exhaustive(&s, &p, &q)).abs() < 1e-9);
            prop_assert!((d - dtw(&s, &q, &p)).abs() < 1e-9);
            prop_assert!(d >= 0.0);
            if d == 0.0 {
                prop_assert_eq!(p.states(), q.states());
            }
        }
    }
}
