//! Exact min-cost bipartite assignment.
//!
//! Successive shortest augmenting paths with dual potentials on a dense,
//! complete bipartite graph. Each phase inserts one row and runs a
//! Dijkstra-style scan over reduced costs, so the whole solve is
//! `O(rows^2 * cols)` — more than enough for batches of users against
//! slot-expanded chargers.

use thiserror::Error;

use crate::numeric::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("assignment needs rows <= cols, got {rows} rows and {cols} cols")]
    TooFewColumns { rows: usize, cols: usize },
}

/// Assign each row to a distinct column minimizing the total cost.
///
/// `cost(r, c)` must be finite for every pair. Returns the column matched to
/// each row. Ties are resolved deterministically toward lower column indices.
pub fn min_cost_assignment<R, F>(
    rows: usize,
    cols: usize,
    cost: F,
) -> Result<Vec<usize>, MatchingError>
where
    R: Real,
    F: Fn(usize, usize) -> R,
{
    if rows > cols {
        return Err(MatchingError::TooFewColumns { rows, cols });
    }
    if rows == 0 {
        return Ok(Vec::new());
    }

    // Column `cols` is a virtual sentinel that hosts the row being inserted.
    let mut row_of_col: Vec<Option<usize>> = vec![None; cols + 1];
    let mut row_potential: Vec<R> = vec![R::zero(); rows];
    let mut col_potential: Vec<R> = vec![R::zero(); cols + 1];

    for row in 0..rows {
        row_of_col[cols] = Some(row);
        let mut cur_col = cols;
        let mut min_reduced: Vec<R> = vec![R::infinity(); cols + 1];
        let mut prev_col: Vec<usize> = vec![usize::MAX; cols + 1];
        let mut in_tree: Vec<bool> = vec![false; cols + 1];

        // Grow the alternating tree until it reaches a free column.
        while let Some(tree_row) = row_of_col[cur_col] {
            in_tree[cur_col] = true;
            let mut delta = R::infinity();
            let mut next_col = cols;
            for c in 0..cols {
                if in_tree[c] {
                    continue;
                }
                let reduced = cost(tree_row, c) - row_potential[tree_row] - col_potential[c];
                if reduced < min_reduced[c] {
                    min_reduced[c] = reduced;
                    prev_col[c] = cur_col;
                }
                if min_reduced[c] < delta {
                    delta = min_reduced[c];
                    next_col = c;
                }
            }
            debug_assert!(delta.is_finite(), "complete graph always offers an edge");
            for c in 0..=cols {
                if in_tree[c] {
                    if let Some(r) = row_of_col[c] {
                        row_potential[r] = row_potential[r] + delta;
                    }
                    col_potential[c] = col_potential[c] - delta;
                } else {
                    min_reduced[c] = min_reduced[c] - delta;
                }
            }
            cur_col = next_col;
        }

        // Walk the parent pointers back, shifting matches along the path.
        while cur_col != cols {
            let parent = prev_col[cur_col];
            row_of_col[cur_col] = row_of_col[parent];
            cur_col = parent;
        }
    }

    let mut assignment = vec![usize::MAX; rows];
    for (col, row) in row_of_col.iter().take(cols).enumerate() {
        if let Some(row) = row {
            assignment[*row] = col;
        }
    }
    debug_assert!(assignment.iter().all(|&c| c != usize::MAX));
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn total(cost: &[Vec<f64>], assignment: &[usize]) -> f64 {
        assignment
            .iter()
            .enumerate()
            .map(|(r, &c)| cost[r][c])
            .sum()
    }

    /// Exhaustive minimum over all injective row-to-column maps.
    fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
        let rows = cost.len();
        let cols = cost[0].len();
        let mut best = f64::INFINITY;
        let mut pick = vec![usize::MAX; rows];
        fn rec(
            r: usize,
            rows: usize,
            cols: usize,
            cost: &[Vec<f64>],
            used: &mut Vec<bool>,
            pick: &mut Vec<usize>,
            best: &mut f64,
        ) {
            if r == rows {
                let t: f64 = pick.iter().enumerate().map(|(i, &c)| cost[i][c]).sum();
                if t < *best {
                    *best = t;
                }
                return;
            }
            for c in 0..cols {
                if !used[c] {
                    used[c] = true;
                    pick[r] = c;
                    rec(r + 1, rows, cols, cost, used, pick, best);
                    used[c] = false;
                }
            }
        }
        let mut used = vec![false; cols];
        rec(0, rows, cols, cost, &mut used, &mut pick, &mut best);
        best
    }

    #[test]
    fn three_by_three_known_case() {
        let cost = vec![
            vec![8.0, 5.0, 9.0],
            vec![4.0, 2.0, 4.0],
            vec![7.0, 3.0, 8.0],
        ];
        let assignment = min_cost_assignment(3, 3, |r, c| cost[r][c]).unwrap();
        assert_eq!(total(&cost, &assignment), 15.0);
        assert_eq!(assignment, vec![0, 2, 1]);
    }

    #[test]
    fn single_row_picks_first_minimum() {
        let cost = [vec![3.0, 1.0, 1.0, 2.0]];
        let assignment = min_cost_assignment(1, 4, |r, c| cost[r][c]).unwrap();
        assert_eq!(assignment, vec![1]);
    }

    #[test]
    fn empty_and_rectangular_edges() {
        assert_eq!(
            min_cost_assignment(0, 3, |_, _| 0.0f64).unwrap(),
            Vec::<usize>::new()
        );
        assert!(matches!(
            min_cost_assignment(2, 1, |_, _| 0.0f64),
            Err(MatchingError::TooFewColumns { .. })
        ));
    }

    #[test]
    fn works_in_f32() {
        let cost = [vec![2.0f32, 1.0], vec![1.0, 2.0]];
        let assignment = min_cost_assignment(2, 2, |r, c| cost[r][c]).unwrap();
        assert_eq!(assignment, vec![1, 0]);
    }

    proptest! {
        #[test]
        fn matches_brute_force_on_random_instances(
            rows in 1usize..5,
            extra in 0usize..3,
            values in proptest::collection::vec(0.0..100.0f64, 35),
        ) {
            let cols = rows + extra;
            let cost: Vec<Vec<f64>> = (0..rows)
                .map(|r| (0..cols).map(|c| values[(r * cols + c) % values.len()]).collect())
                .collect();
            let assignment = min_cost_assignment(rows, cols, |r, c| cost[r][c]).unwrap();

            // Columns are distinct.
            let mut seen = std::collections::HashSet::new();
            prop_assert!(assignment.iter().all(|c| seen.insert(*c)));

            let got = total(&cost, &assignment);
            let want = brute_force_min(&cost);
            prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "solver total {got} vs brute force {want}");
        }
    }
}
