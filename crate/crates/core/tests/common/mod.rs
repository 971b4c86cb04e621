#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sobflow::saddle::SaddlePointBlocks;
use sobflow::symmetrizer::AxisymmetricMatrix;
use sobflow::DenseMatrix;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0f64..1.0).exp()
}

fn signed(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseMatrix::from_row_major(rows, cols, data).unwrap()
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    random_matrix(rng, n, n).symmetric_part()
}

/// `G G^T + shift I`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DenseMatrix {
    let g = random_matrix(rng, n, n);
    let mut m = (&g * &g.transpose()).symmetric_part();
    for i in 0..n {
        m[(i, i)] += shift;
    }
    m
}

/// `A = S^{-1} H` with `S` SPD and `H` symmetric, so `S A = H`. With
/// `positive` the spectrum of `A` is positive.
pub fn random_symmetrizable(rng: &mut ChaCha8Rng, n: usize, positive: bool) -> (DenseMatrix, DenseMatrix) {
    let s = random_spd(rng, n, 0.5);
    let h = if positive { random_spd(rng, n, 0.5) } else { random_symmetric(rng, n) };
    let a = s.solve(&h).unwrap();
    (a, s)
}

/// Axisymmetric matrix whose connection equations hold, built from a
/// random positive `s`. Edge signs are random; diagonals sit near the
/// Gershgorin radii so both outcomes of the positivity test occur.
pub fn random_axisymmetric(rng: &mut ChaCha8Rng, max_n: usize) -> AxisymmetricMatrix {
    let n = rng.random_range(1..=max_n);
    let s: Vec<f64> = (0..n).map(|_| log_uniform(rng)).collect();
    let density = rng.random_range(0.15..0.7);
    let mut pairs = Vec::new();
    let mut radius = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            if rng.random_bool(density) {
                let a = signed(rng) * log_uniform(rng);
                let b = a * s[i] / s[j];
                let r = (a * b).sqrt();
                radius[i] += r;
                radius[j] += r;
                pairs.push((i, j, a, b));
            }
        }
    }
    let d = radius.iter().map(|r| r + rng.random_range(-0.5..1.5)).collect();
    AxisymmetricMatrix::new(d, pairs).unwrap()
}

/// Blocks with `P` SPD, `Q` generically of full row rank, `R` PSD and
/// possibly singular.
pub fn random_blocks(rng: &mut ChaCha8Rng) -> SaddlePointBlocks {
    loop {
        let n = rng.random_range(1..=5);
        let m = rng.random_range(0..=n);
        let shift = rng.random_range(0.2..2.0);
        let p = random_spd(rng, n, shift);
        let q = random_matrix(rng, m, n).scale(rng.random_range(0.05..1.0));
        let k = rng.random_range(0..=m);
        let g = random_matrix(rng, m, k).scale(0.5);
        let r = (&g * &g.transpose()).symmetric_part();
        if let Ok(b) = SaddlePointBlocks::new(p, q, r) {
            return b;
        }
    }
}

/// `(d, a, b)` satisfying the diagonal-plus-rank-one hypotheses.
pub fn random_rank_one(rng: &mut ChaCha8Rng, max_n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = rng.random_range(1..=max_n);
    let mut d = Vec::with_capacity(n);
    let mut acc = 0.0;
    for _ in 0..n {
        acc += rng.random_range(0.1..2.0);
        d.push(acc);
    }
    let a: Vec<f64> = (0..n).map(|_| signed(rng) * log_uniform(rng)).collect();
    let b: Vec<f64> = a.iter().map(|ai| ai.signum() * log_uniform(rng)).collect();
    (d, a, b)
}

/// Structure of the two-component example: entries at (3,2), (4,3), (5,2),
/// (5,3) in 1-based indexing, with a consistent connection equation.
pub fn example_a1() -> AxisymmetricMatrix {
    AxisymmetricMatrix::new(
        vec![10.0, 11.0, 12.0, 13.0, 14.0],
        [(2, 1, 1.0, 2.0), (3, 2, 1.0, 2.0), (4, 1, 2.0, 1.0), (4, 2, 4.0, 1.0)],
    )
    .unwrap()
}

/// Structure of the single-component example: lower entries at (3,1),
/// (3,2), (4,1), (4,3), (5,1), (5,2), (5,4) in 1-based indexing.
pub fn example_a2() -> AxisymmetricMatrix {
    let s = [1.0, 2.0, 3.0, 0.5, 4.0];
    let pattern = [(2, 0), (2, 1), (3, 0), (3, 2), (4, 0), (4, 1), (4, 3)];
    let pairs = pattern.iter().enumerate().map(|(k, &(i, j))| {
        let a = 0.5 + k as f64 * 0.25;
        (i, j, a, a * s[i] / s[j])
    });
    AxisymmetricMatrix::new(vec![5.0; 5], pairs).unwrap()
}

/// `(g(X + h W) - g(X - h W)) / 2h`.
pub fn central_difference(problem: &sobflow::flow::FlowProblem, x: &DenseMatrix, w: &DenseMatrix, h: f64) -> f64 {
    let g = |t: f64| sobflow::flow::potential(problem, &x.axpy(t, w)).unwrap();
    (g(h) - g(-h)) / (2.0 * h)
}
