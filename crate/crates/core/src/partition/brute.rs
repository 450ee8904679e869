use crate::cloud::CloudId;
use crate::objective::{Assignment, ObjectiveParams, Problem};

use super::PartitionError;

pub const DEFAULT_BRUTE_FORCE_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub assignment: Assignment,
    pub objective: f64,
    pub evaluated: u64,
}

/// Exhaustive search over all `|C|^|V|` assignments.
///
/// Assignments are visited in lexicographic order and only a strictly better
/// objective replaces the incumbent, so ties resolve to the lexicographically
/// smallest vector.
pub fn brute_force_optimal(
    problem: &Problem<'_>,
    params: &ObjectiveParams,
    cap: u64,
) -> Result<BruteForceResult, PartitionError> {
    params.validate()?;
    let n = problem.n_users();
    let k = problem.n_clouds() as u64;
    let needed = (0..n).try_fold(1u64, |acc, _| acc.checked_mul(k));
    match needed {
        Some(count) if count <= cap => {}
        _ => {
            let needed = match needed {
                Some(c) => c.to_string(),
                None => format!("{k}^{n}"),
            };
            return Err(PartitionError::TooLarge { needed, cap });
        }
    }

    let mut current = Assignment::uniform(n, CloudId(0));
    let mut best = current.clone();
    let mut best_value = problem.total_objective(&current, params);
    let mut evaluated = 1u64;

    'search: loop {
        // Odometer increment, last user fastest.
        let mut i = n;
        loop {
            if i == 0 {
                break 'search;
            }
            i -= 1;
            let next = current.cloud(crate::graph::UserId(i)).0 + 1;
            if (next as u64) < k {
                current.set(crate::graph::UserId(i), CloudId(next));
                break;
            }
            current.set(crate::graph::UserId(i), CloudId(0));
        }
        evaluated += 1;
        let value = problem.total_objective(&current, params);
        if value > best_value {
            best_value = value;
            best = current.clone();
        }
    }

    Ok(BruteForceResult { assignment: best, objective: best_value, evaluated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::PricingMatrix;
    use crate::graph::UserId;
    use crate::objective::tests::{graph, model_with};
    use crate::objective::PreferenceMode;

    #[test]
    fn single_user_takes_argmax() {
        let g = graph(1, &[]);
        let m = model_with(&[vec![0.1, 0.7, 0.2, 0.7]], PricingMatrix::uniform(4, 1.0, 0.0));
        let p = Problem::new(&g, &m).unwrap();
        let r = brute_force_optimal(&p, &ObjectiveParams::default(), DEFAULT_BRUTE_FORCE_CAP).unwrap();
        assert_eq!(r.assignment.cloud(UserId(0)), CloudId(1));
        assert_eq!(r.evaluated, 4);
    }

    #[test]
    fn alpha_zero_connected_is_single_cloud() {
        let g = graph(4, &[(0, 1, 1.0), (1, 2, 2.0), (3, 2, 0.5), (2, 0, 1.0)]);
        let m = model_with(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.2, 0.3, 0.5]], PricingMatrix::uniform(3, 1.0, 0.0));
        let p = Problem::new(&g, &m).unwrap();
        let r = brute_force_optimal(&p, &ObjectiveParams::new(0.0, 1.0).unwrap(), DEFAULT_BRUTE_FORCE_CAP).unwrap();
        assert_eq!(r.objective, 0.0);
        // Lexicographically smallest optimum: everyone on cloud 0.
        assert!(r.assignment.as_slice().iter().all(|&c| c == CloudId(0)));
    }

    #[test]
    fn ten_users_three_clouds_enumerates_all() {
        let g = graph(10, &[(0, 1, 1.0), (5, 9, 2.0)]);
        let m = model_with(&vec![vec![0.2, 0.3, 0.5]; 10], PricingMatrix::uniform(3, 1.0, 0.0));
        let p = Problem::new(&g, &m).unwrap();
        let r = brute_force_optimal(&p, &ObjectiveParams::default(), DEFAULT_BRUTE_FORCE_CAP).unwrap();
        assert_eq!(r.evaluated, 59_049);
        assert!(r.assignment.as_slice().iter().all(|&c| c == CloudId(2)));
    }

    #[test]
    fn refuses_above_cap() {
        let g = graph(20, &[]);
        let m = model_with(&vec![vec![1.0, 1.0, 1.0]; 20], PricingMatrix::uniform(3, 1.0, 0.0));
        let p = Problem::new(&g, &m).unwrap();
        let e = brute_force_optimal(&p, &ObjectiveParams::default(), DEFAULT_BRUTE_FORCE_CAP).unwrap_err();
        assert_eq!(e, PartitionError::TooLarge { needed: "3486784401".into(), cap: DEFAULT_BRUTE_FORCE_CAP });
        assert!(e.to_string().contains("10000000"));
    }

    #[test]
    fn matches_hand_table() {
        // Same instance as the objective's two-user enumeration table; optimum is (0, 0) at 2.0.
        let g = graph(2, &[(0, 1, 2.0), (1, 0, 1.0)]);
        let m = model_with(&[vec![3.0, 1.0], vec![1.0, 2.0]], PricingMatrix::uniform(2, 1.0, 0.0));
        let p = Problem::new(&g, &m).unwrap();
        let params = ObjectiveParams::new(0.5, 1.0).unwrap().with_preference(PreferenceMode::Raw);
        let r = brute_force_optimal(&p, &params, 10).unwrap();
        assert_eq!(r.objective, 2.0);
        assert_eq!(r.assignment.as_slice(), [CloudId(0), CloudId(0)]);
    }
}
