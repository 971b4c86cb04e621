//! Reference problems: the 3x3 axisymmetric example with its diagonal
//! symmetrizer, and the 5x5 saddle-point example with its block symmetrizer
//! at `epsilon = 1/2`.

use crate::flow::{IntegrateConfig, StepMode};
use crate::matrix::DenseMatrix;
use crate::saddle::SaddlePointBlocks;

fn m(rows: &[&[f64]]) -> DenseMatrix {
    DenseMatrix::from_rows(rows).expect("preset matrices are well formed")
}

pub fn ex1_a() -> DenseMatrix {
    m(&[&[4.5, -2.0, 2.0], &[-2.0, 4.5, 2.0], &[3.0, 3.0, 7.0]])
}

pub fn ex1_s() -> DenseMatrix {
    DenseMatrix::from_diag(&[1.0, 1.0, 2.0 / 3.0])
}

pub fn ex1_x1() -> DenseMatrix {
    m(&[&[1.0, 0.0, -1.0], &[0.0, -1.0, 1.0], &[-2.0, -1.0, 0.0]])
}

/// Reference eigenvalues of [`ex1_a`], descending.
pub const EX1_EIGENVALUES: [f64; 3] = [8.880677910464575, 6.500000000000001, 0.6193220895354239];

pub fn saddle_blocks() -> SaddlePointBlocks {
    let p = DenseMatrix::from_diag(&[1.0, 2.0, 3.0]);
    let q = m(&[&[0.25, 0.0, 0.0], &[0.0, 0.25, 0.0]]);
    let r = m(&[&[1.0 / 6.0, -1.0 / 12.0], &[-1.0 / 12.0, 1.0 / 6.0]]);
    SaddlePointBlocks::new(p, q, r).expect("preset blocks are valid")
}

pub const SADDLE_EPSILON: f64 = 0.5;

/// The assembled 5x5 saddle-point matrix, written out entry by entry.
pub fn saddle_a() -> DenseMatrix {
    m(&[
        &[1.0, 0.0, 0.0, 0.25, 0.0],
        &[0.0, 2.0, 0.0, 0.0, 0.25],
        &[0.0, 0.0, 3.0, 0.0, 0.0],
        &[-0.25, 0.0, 0.0, 1.0 / 6.0, -1.0 / 12.0],
        &[0.0, -0.25, 0.0, -1.0 / 12.0, 1.0 / 6.0],
    ])
}

/// The block symmetrizer at `epsilon = 1/2`, written out entry by entry.
pub fn saddle_s_half() -> DenseMatrix {
    m(&[
        &[0.5, 0.0, 0.0, 0.25, 0.0],
        &[0.0, 1.5, 0.0, 0.0, 0.25],
        &[0.0, 0.0, 2.5, 0.0, 0.0],
        &[0.25, 0.0, 0.0, 1.0 / 3.0, 1.0 / 12.0],
        &[0.0, 0.25, 0.0, 1.0 / 12.0, 1.0 / 3.0],
    ])
}

pub fn saddle_x1_b3() -> DenseMatrix {
    m(&[
        &[1.0, 0.0, -1.0],
        &[0.0, -1.0, 1.0],
        &[-2.0, -1.0, 0.0],
        &[0.0, 1.0, 1.0],
        &[2.0, -1.0, 0.0],
    ])
}

pub fn saddle_x1_b5() -> DenseMatrix {
    m(&[
        &[1.0, 0.0, -1.0, 2.0, 3.0],
        &[0.0, -1.0, 1.0, 6.0, 1.0],
        &[-2.0, -1.0, 0.0, 1.0, 9.0],
        &[0.0, -1.0, 1.0, -3.0, 4.0],
        &[-2.0, -1.0, 0.0, 1.0, 3.0],
    ])
}

/// Reference eigenvalues of [`saddle_a`], descending.
pub const SADDLE_EIGENVALUES: [f64; 5] = [
    3.0,
    1.965176851692632,
    0.9153889054734862,
    0.3188183561243709,
    0.1339492200428448,
];

/// `diag(m, m-1, ..., 1)`.
pub fn descending_b(m: usize) -> Vec<f64> {
    (1..=m).rev().map(|v| v as f64).collect()
}

/// A named flow run: matrix, symmetrizer, weights, start point and stepping.
#[derive(Debug, Clone)]
pub struct SolvePreset {
    pub name: &'static str,
    pub description: &'static str,
    pub a: DenseMatrix,
    pub s: DenseMatrix,
    pub b: Vec<f64>,
    pub x0: DenseMatrix,
    pub config: IntegrateConfig,
    pub expected: Vec<f64>,
}

pub const SOLVE_PRESETS: [&str; 7] = [
    "paper-ex1",
    "paper-ex1-variable",
    "paper-liesen-b3",
    "paper-liesen-b3-variable",
    "paper-liesen-b5",
    "paper-liesen-b5-variable",
    "paper-liesen",
];

fn fixed(gamma: f64, max_iters: usize) -> IntegrateConfig {
    IntegrateConfig {
        mode: StepMode::Fixed(gamma),
        max_iters,
        ..IntegrateConfig::default()
    }
}

fn variable(max_iters: usize) -> IntegrateConfig {
    IntegrateConfig {
        mode: StepMode::Variable,
        max_iters,
        ..IntegrateConfig::default()
    }
}

/// Looks up a solve preset. `paper-liesen` is a symmetrize-only preset and
/// is not returned here.
pub fn solve_preset(name: &str) -> Option<SolvePreset> {
    let ex1 = |description, config| SolvePreset {
        name: "",
        description,
        a: ex1_a(),
        s: ex1_s(),
        b: descending_b(3),
        x0: ex1_x1(),
        config,
        expected: EX1_EIGENVALUES.to_vec(),
    };
    let saddle_example = |description, x0: DenseMatrix, config| {
        let cols = x0.cols();
        SolvePreset {
            name: "",
            description,
            a: saddle_a(),
            s: saddle_s_half(),
            b: descending_b(cols),
            x0,
            config,
            expected: SADDLE_EIGENVALUES[..cols].to_vec(),
        }
    };
    let mut preset = match name {
        "paper-ex1" => ex1("3x3 axisymmetric example, fixed step 0.01", fixed(0.01, 100_000)),
        "paper-ex1-variable" => ex1("3x3 axisymmetric example, optimal variable step", variable(100_000)),
        "paper-liesen-b3" => saddle_example(
            "5x5 saddle-point example, three largest eigenpairs, fixed step 0.001",
            saddle_x1_b3(),
            fixed(0.001, 1_000_000),
        ),
        "paper-liesen-b3-variable" => saddle_example(
            "5x5 saddle-point example, three largest eigenpairs, optimal variable step",
            saddle_x1_b3(),
            variable(100_000),
        ),
        "paper-liesen-b5" => saddle_example(
            "5x5 saddle-point example, all eigenpairs, fixed step 0.001",
            saddle_x1_b5(),
            fixed(0.001, 2_000_000),
        ),
        "paper-liesen-b5-variable" => saddle_example(
            "5x5 saddle-point example, all eigenpairs, optimal variable step",
            saddle_x1_b5(),
            variable(100_000),
        ),
        _ => return None,
    };
    preset.name = SOLVE_PRESETS.iter().find(|&&n| n == name).copied().unwrap();
    Some(preset)
}

/// Description of presets that only provide a matrix and its symmetrizer.
pub fn symmetrize_only_description(name: &str) -> &'static str {
    match name {
        "paper-liesen" => "5x5 saddle-point blocks P, Q, R; symmetrizer S_eps for the chosen --epsilon",
        _ => "",
    }
}
