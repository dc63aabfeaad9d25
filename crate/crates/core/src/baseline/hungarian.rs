use serde::{Deserialize, Serialize};

use crate::descriptor::CostMatrix;
use crate::{Error, Result, Scalar};

/// Row `i` is assigned column `permutation[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Assignment<T> {
    pub permutation: Vec<usize>,
    pub total_cost: T,
}

/// Minimum-cost perfect assignment on a square matrix.
///
/// Shortest augmenting paths with row/column potentials (the Jonker-Volgenant
/// formulation of the Hungarian method): one Dijkstra-like sweep per row,
/// each sweep `O(n^2)`, so `O(n^3)` overall.
pub fn hungarian<T: Scalar>(m: &CostMatrix<T>) -> Result<Assignment<T>> {
    if m.rows() != m.cols() {
        return Err(Error::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let inf = T::infinity();
    // 1-based; index 0 is the virtual start column
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_slack = vec![inf; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        min_slack.iter_mut().for_each(|s| *s = inf);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let row = m.row(i0 - 1);
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < min_slack[j] {
                    min_slack[j] = cur;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] = u[row_of[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    min_slack[j] = min_slack[j] - delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut permutation = vec![0; n];
    for j in 1..=n {
        permutation[row_of[j] - 1] = j - 1;
    }
    let total_cost = permutation.iter().enumerate().map(|(i, &j)| m.get(i, j)).sum();
    Ok(Assignment { permutation, total_cost })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let m = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(hungarian(&m).unwrap(), Assignment { permutation: vec![0, 1], total_cost: 2.0 });
        let m = CostMatrix::from_rows(&[vec![5.0, 1.0], vec![1.0, 5.0]]).unwrap();
        assert_eq!(hungarian(&m).unwrap().permutation, vec![1, 0]);
    }

    #[test]
    fn zero_matrix() {
        let a = hungarian(&CostMatrix::new(5, 5, vec![0.0; 25]).unwrap()).unwrap();
        assert_eq!(a.total_cost, 0.0);
        let mut seen = a.permutation.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..5).collect::<Vec<_>>());
    }

    #[test]
    fn classic_example() {
        let m = CostMatrix::from_rows(&[
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ])
        .unwrap();
        assert_eq!(hungarian(&m).unwrap().total_cost, 5.0);
    }

    #[test]
    fn rejects_non_square_and_handles_empty() {
        let m = CostMatrix::new(2, 3, vec![0.0; 6]).unwrap();
        assert_eq!(hungarian(&m), Err(Error::NonSquare { rows: 2, cols: 3 }));
        let e = hungarian(&CostMatrix::<f64>::new(0, 0, vec![]).unwrap()).unwrap();
        assert!(e.permutation.is_empty());
    }
}
