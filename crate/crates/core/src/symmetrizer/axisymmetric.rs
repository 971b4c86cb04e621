use std::collections::{BTreeMap, VecDeque};

use super::DiagonalSymmetrizer;
use crate::certify::sylvester_residual;
use crate::error::{Error, Result};
use crate::matrix::{rel_tol, DenseMatrix};

/// Default relative tolerance on connection equations.
pub const DEFAULT_CONNECTION_TOL: f64 = 1e-10;
/// Relative bound on the certified Sylvester residual.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Diagonal plus paired off-diagonal entries: `a_ij` at `(i, j)` and `b_ji`
/// at `(j, i)` for `j < i`, with `a_ij * b_ji > 0` for every stored pair.
/// Pairs with both entries zero are simply absent. Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymmetricMatrix {
    d: Vec<f64>,
    lower: BTreeMap<(usize, usize), f64>,
    upper: BTreeMap<(usize, usize), f64>,
}

fn check_pair(i: usize, j: usize, a: f64, b: f64) -> Result<()> {
    let same_sign = a != 0.0 && b != 0.0 && a.is_sign_positive() == b.is_sign_positive();
    if !same_sign || !a.is_finite() || !b.is_finite() {
        return Err(Error::SignViolation {
            row: i,
            col: j,
            lower: a,
            upper: b,
        });
    }
    Ok(())
}

impl AxisymmetricMatrix {
    /// `pairs` holds `(i, j, a_ij, b_ji)` with `j < i`. Pairs where both
    /// values are zero are dropped.
    pub fn new(d: Vec<f64>, pairs: impl IntoIterator<Item = (usize, usize, f64, f64)>) -> Result<Self> {
        let n = d.len();
        if let Some(k) = d.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k, col: k });
        }
        let mut lower = BTreeMap::new();
        let mut upper = BTreeMap::new();
        for (i, j, a, b) in pairs {
            if j >= i || i >= n {
                return Err(Error::DimensionMismatch(format!(
                    "pair ({}, {}) is not strictly lower triangular in a {}x{} matrix",
                    i, j, n, n
                )));
            }
            if a == 0.0 && b == 0.0 {
                continue;
            }
            check_pair(i, j, a, b)?;
            if lower.insert((i, j), a).is_some() {
                return Err(Error::DimensionMismatch(format!("duplicate pair ({}, {})", i, j)));
            }
            upper.insert((j, i), b);
        }
        Ok(Self { d, lower, upper })
    }

    /// Reads the structure off a dense square matrix, validating the sign
    /// rule on every mirrored pair.
    pub fn from_dense(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "axisymmetric matrix must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let pairs: Vec<_> = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, a[(i, j)], a[(j, i)]))
            .collect();
        Self::new(a.diagonal(), pairs)
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.d
    }

    /// Stored pairs as `(i, j, a_ij, b_ji)` with `j < i`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        self.lower
            .iter()
            .map(move |(&(i, j), &a)| (i, j, a, self.upper[&(j, i)]))
    }

    pub fn lower(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.lower
    }

    pub fn upper(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.upper
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::from_diag(&self.d);
        for (i, j, a, b) in self.pairs() {
            m[(i, j)] = a;
            m[(j, i)] = b;
        }
        m
    }

    /// Rank-perturbation form `A = D' + sum_j (a_j e_j^T + e_j b_j^T)` with
    /// `D' = diag(d - 2)`, `a_j = (0,..,0,1,a_{j+1,j},..,a_{n,j})` and
    /// `b_j = (0,..,0,1,b_{j,j+1},..,b_{j,n})`.
    pub fn rank_perturbation(&self) -> (Vec<f64>, Vec<(Vec<f64>, Vec<f64>)>) {
        let n = self.n();
        let shifted = self.d.iter().map(|v| v - 2.0).collect();
        let mut terms: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .map(|j| {
                let mut a = vec![0.0; n];
                let mut b = vec![0.0; n];
                a[j] = 1.0;
                b[j] = 1.0;
                (a, b)
            })
            .collect();
        for (i, j, a, b) in self.pairs() {
            terms[j].0[i] = a;
            terms[j].1[i] = b;
        }
        (shifted, terms)
    }

    /// Sums the rank-perturbation terms back into a dense matrix.
    pub fn assemble_rank_perturbation(shifted: &[f64], terms: &[(Vec<f64>, Vec<f64>)]) -> DenseMatrix {
        let mut m = DenseMatrix::from_diag(shifted);
        for (j, (a, b)) in terms.iter().enumerate() {
            for (i, &v) in a.iter().enumerate() {
                m[(i, j)] += v;
            }
            for (i, &v) in b.iter().enumerate() {
                m[(j, i)] += v;
            }
        }
        m
    }
}

/// Undirected graph on indices with one edge per stored pair. Each
/// adjacency entry `(k, r)` of node `v` means `s_k = r * s_v`.
#[derive(Debug, Clone)]
pub struct CoordinateGraph {
    pub n: usize,
    /// `(i, j)` with `j < i`, one per stored pair.
    pub edges: Vec<(usize, usize)>,
    pub adjacency: Vec<Vec<(usize, f64)>>,
    /// Connected components in order of their lowest node; nodes sorted.
    pub components: Vec<Vec<usize>>,
    /// Lowest-index node of each component.
    pub seeds: Vec<usize>,
}

pub fn build_coordinate_graph(a: &AxisymmetricMatrix) -> CoordinateGraph {
    let n = a.n();
    let mut adjacency = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for (i, j, aij, bji) in a.pairs() {
        // a_ij s_i = b_ji s_j
        adjacency[j].push((i, bji / aij));
        adjacency[i].push((j, aij / bji));
        edges.push((i, j));
    }
    let mut component_of = vec![usize::MAX; n];
    let mut components = Vec::new();
    for start in 0..n {
        if component_of[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        component_of[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(k, _) in &adjacency[v] {
                if component_of[k] == usize::MAX {
                    component_of[k] = id;
                    members.push(k);
                    queue.push_back(k);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    let seeds = components.iter().map(|c| c[0]).collect();
    CoordinateGraph {
        n,
        edges,
        adjacency,
        components,
        seeds,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Traversal {
    BreadthFirst,
    DepthFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedRule {
    Lowest,
    Highest,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub traversal: Traversal,
    pub seed_rule: SeedRule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_CONNECTION_TOL,
            traversal: Traversal::BreadthFirst,
            seed_rule: SeedRule::Lowest,
        }
    }
}

/// Propagates `s` from a unit seed per component along a breadth-first
/// spanning tree and checks every connection equation.
pub fn solve_diagonal_symmetrizer(a: &AxisymmetricMatrix, tol: f64) -> Result<DiagonalSymmetrizer> {
    solve_diagonal_symmetrizer_with(
        a,
        SolveOptions {
            tol,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_diagonal_symmetrizer_with(
    a: &AxisymmetricMatrix,
    opts: SolveOptions,
) -> Result<DiagonalSymmetrizer> {
    let graph = build_coordinate_graph(a);
    let n = graph.n;
    let mut s = vec![0.0; n];
    let mut done = vec![false; n];

    for comp in &graph.components {
        let seed = match opts.seed_rule {
            SeedRule::Lowest => comp[0],
            SeedRule::Highest => *comp.last().expect("components are non-empty"),
        };
        // (node, value it would receive); first pop wins, giving a spanning tree
        let mut frontier = VecDeque::from([(seed, 1.0)]);
        loop {
            let next = match opts.traversal {
                Traversal::BreadthFirst => frontier.pop_front(),
                Traversal::DepthFirst => frontier.pop_back(),
            };
            let Some((v, value)) = next else { break };
            if done[v] {
                continue;
            }
            done[v] = true;
            s[v] = value;
            for &(k, ratio) in &graph.adjacency[v] {
                if !done[k] {
                    frontier.push_back((k, ratio * value));
                }
            }
        }
    }

    if let Some((index, &value)) = s.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositive { index, value });
    }

    let mut worst = (0.0, 0, 0);
    for (i, j, aij, bji) in a.pairs() {
        let predicted = bji / aij * s[j];
        let violation = (s[i] - predicted).abs() / s[i].max(predicted);
        if violation > worst.0 {
            worst = (violation, i, j);
        }
    }
    if worst.0 > opts.tol {
        return Err(Error::InconsistentConnection {
            row: worst.1,
            col: worst.2,
            violation: worst.0,
        });
    }

    let dense = a.to_dense();
    let residual = sylvester_residual(&dense, &DenseMatrix::from_diag(&s))?;
    let tolerance = rel_tol(RESIDUAL_TOL, dense.frobenius_norm());
    if residual > tolerance {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance,
        });
    }
    Ok(DiagonalSymmetrizer {
        s,
        residual,
        consistency_violation: worst.0,
    })
}

/// Eigenvalue inclusion discs `|lambda - d_i| <= sum_j sqrt(a_ij b_ji)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GershgorinReport {
    /// `(center, radius)` per row.
    pub intervals: Vec<(f64, f64)>,
    /// `radius_i < d_i` for every row, which forces positive eigenvalues.
    pub all_positive: bool,
}

impl GershgorinReport {
    pub fn contains(&self, lambda: f64, slack: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(c, r)| (lambda - c).abs() <= r + slack)
    }
}

pub fn gershgorin_intervals(a: &AxisymmetricMatrix) -> GershgorinReport {
    let mut radius = vec![0.0; a.n()];
    for (i, j, aij, bji) in a.pairs() {
        let r = (aij * bji).sqrt();
        radius[i] += r;
        radius[j] += r;
    }
    let intervals: Vec<(f64, f64)> = a.diag().iter().copied().zip(radius).collect();
    let all_positive = intervals.iter().all(|&(c, r)| r < c);
    GershgorinReport {
        intervals,
        all_positive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    /// Example 3.1 sparsity pattern with values satisfying its connection
    /// equation: s = (1, 1, 2, 4, 0.5).
    pub(crate) fn example_31() -> AxisymmetricMatrix {
        // s_i = (b_ji / a_ij) s_j for each pair (i, j)
        AxisymmetricMatrix::new(
            vec![10.0, 11.0, 12.0, 13.0, 14.0],
            [
                (2, 1, 1.0, 2.0),   // s3 = 2 s2
                (3, 2, 1.0, 2.0),   // s4 = 2 s3
                (4, 1, 2.0, 1.0),   // s5 = 0.5 s2
                (4, 2, 4.0, 1.0),   // s5 = 0.25 s3
            ],
        )
        .unwrap()
    }

    pub(crate) fn example_32() -> AxisymmetricMatrix {
        // target s = (1, 2, 3, 0.5, 4)
        let s = [1.0, 2.0, 3.0, 0.5, 4.0];
        let pattern = [(2, 0), (2, 1), (3, 0), (3, 2), (4, 0), (4, 1), (4, 3)];
        let pairs = pattern.iter().enumerate().map(|(k, &(i, j))| {
            let a = 0.5 + k as f64 * 0.25;
            (i, j, a, a * s[i] / s[j])
        });
        AxisymmetricMatrix::new(vec![5.0; 5], pairs).unwrap()
    }

    #[test]
    fn example_31_two_components() {
        let g = build_coordinate_graph(&example_31());
        assert_eq!(g.components, vec![vec![0], vec![1, 2, 3, 4]]);
        assert_eq!(g.seeds, vec![0, 1]);
        let sym = solve_diagonal_symmetrizer(&example_31(), DEFAULT_CONNECTION_TOL).unwrap();
        assert_eq!(sym.s, vec![1.0, 1.0, 2.0, 4.0, 0.5]);
        assert_eq!(sym.residual, 0.0);
    }

    #[test]
    fn example_32_single_component() {
        let g = build_coordinate_graph(&example_32());
        assert_eq!(g.components.len(), 1);
        assert_eq!(g.components[0], vec![0, 1, 2, 3, 4]);
        let sym = solve_diagonal_symmetrizer(&example_32(), DEFAULT_CONNECTION_TOL).unwrap();
        for (got, want) in sym.s.iter().zip([1.0, 2.0, 3.0, 0.5, 4.0]) {
            assert!((got - want).abs() <= 1e-15 * want);
        }
    }

    #[test]
    fn diagonal_only() {
        let a = AxisymmetricMatrix::new(vec![1.0, 2.0, 3.0], []).unwrap();
        let g = build_coordinate_graph(&a);
        assert_eq!(g.components.len(), 3);
        assert_eq!(g.seeds, vec![0, 1, 2]);
        let sym = solve_diagonal_symmetrizer(&a, DEFAULT_CONNECTION_TOL).unwrap();
        assert_eq!(sym.s, vec![1.0; 3]);
    }

    #[test]
    fn three_by_three_example() {
        let a = AxisymmetricMatrix::from_dense(&presets::ex1_a()).unwrap();
        let sym = solve_diagonal_symmetrizer(&a, DEFAULT_CONNECTION_TOL).unwrap();
        assert_eq!(sym.s[0], 1.0);
        assert_eq!(sym.s[1], 1.0);
        assert!((sym.s[2] - 2.0 / 3.0).abs() < 1e-16);
        assert!(sym.residual <= 1e-14);
    }

    #[test]
    fn single_edge() {
        let a = AxisymmetricMatrix::new(vec![0.0, 7.0], [(1, 0, 1.0, 2.0)]).unwrap();
        let sym = solve_diagonal_symmetrizer(&a, DEFAULT_CONNECTION_TOL).unwrap();
        assert_eq!(sym.s, vec![1.0, 2.0]);
    }

    #[test]
    fn sign_violations() {
        let bad = DenseMatrix::from_rows(&[[1.0, -1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            AxisymmetricMatrix::from_dense(&bad),
            Err(Error::SignViolation { row: 1, col: 0, .. })
        ));
        let half = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            AxisymmetricMatrix::from_dense(&half),
            Err(Error::SignViolation { .. })
        ));
    }

    #[test]
    fn inconsistent_cycle_rejected() {
        // s2 = 2 s1, s3 = s1, s3 = s2 cannot all hold
        let a = AxisymmetricMatrix::new(
            vec![1.0; 3],
            [(1, 0, 1.0, 2.0), (2, 0, 1.0, 1.0), (2, 1, 1.0, 1.0)],
        )
        .unwrap();
        assert!(matches!(
            solve_diagonal_symmetrizer(&a, DEFAULT_CONNECTION_TOL),
            Err(Error::InconsistentConnection { .. })
        ));
    }

    #[test]
    fn gershgorin_cases() {
        let diag = AxisymmetricMatrix::new(vec![1.0, 2.0], []).unwrap();
        let g = gershgorin_intervals(&diag);
        assert_eq!(g.intervals, vec![(1.0, 0.0), (2.0, 0.0)]);
        assert!(g.all_positive);

        let a = AxisymmetricMatrix::from_dense(&presets::ex1_a()).unwrap();
        let g = gershgorin_intervals(&a);
        let r12 = 2.0 + 6f64.sqrt();
        let r3 = 2.0 * 6f64.sqrt();
        assert_eq!(g.intervals[0].0, 4.5);
        assert_eq!(g.intervals[2].0, 7.0);
        assert!((g.intervals[0].1 - r12).abs() < 1e-15);
        assert!((g.intervals[1].1 - r12).abs() < 1e-15);
        assert!((g.intervals[2].1 - r3).abs() < 1e-15);
        assert!(g.all_positive);

        let boundary = AxisymmetricMatrix::new(vec![1.0, 5.0], [(1, 0, 1.0, 1.0)]).unwrap();
        let g = gershgorin_intervals(&boundary);
        assert_eq!(g.intervals[0], (1.0, 1.0));
        assert!(!g.all_positive);
    }

    #[test]
    fn rank_perturbation_dyadic_is_exact() {
        let a = example_31();
        let (shifted, terms) = a.rank_perturbation();
        let back = AxisymmetricMatrix::assemble_rank_perturbation(&shifted, &terms);
        assert_eq!(back.as_slice(), a.to_dense().as_slice());
    }
}
