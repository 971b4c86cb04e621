use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CliError, Family, SourceArgs};
use crate::certify::sylvester_residual;
use crate::eigh::is_positive_definite;
use crate::matrix::DenseMatrix;
use crate::presets;
use crate::saddle::{assemble_s_epsilon, assemble_saddle, check_pd_conditions, epsilon_window, SaddlePointBlocks};
use crate::symmetrizer::{
    build_coordinate_graph, gershgorin_intervals, rank_one_matrix, rank_one_symmetrizer, solve_diagonal_symmetrizer,
    symmetrizer_from_eigenbasis, AxisymmetricMatrix, DEFAULT_CONNECTION_TOL,
};
use crate::textio::{format_value, parse_labelled, read_matrix_file};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonChoice {
    /// Midpoint of the admissible window.
    Auto,
    Value(f64),
}

impl FromStr for EpsilonChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Self::Value)
            .ok_or_else(|| format!("expected a number or 'auto', got '{s}'"))
    }
}

/// A matrix, its symmetrizer and the certificate fields.
#[derive(Debug, Clone)]
pub(crate) struct Built {
    pub a: DenseMatrix,
    pub s: DenseMatrix,
    pub residual: f64,
    pub pd: bool,
    pub window: Option<(f64, f64)>,
    /// Family condition that failed, reported after the certificate.
    pub violation: Option<String>,
}

impl Built {
    pub fn certificate_line(&self) -> String {
        let mut line = format!("residual={} pd={}", format_value(self.residual), self.pd);
        if let Some((lo, hi)) = self.window {
            line.push_str(&format!(" window=[{},{}]", format_value(lo), format_value(hi)));
        }
        line
    }
}

enum Source {
    Dense(DenseMatrix),
    Labelled(Vec<(String, DenseMatrix)>),
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))
}

fn preset_source(name: &str) -> Result<(Family, Source), CliError> {
    if !presets::SOLVE_PRESETS.contains(&name) {
        return Err(CliError::input(format!(
            "unknown preset '{name}' (see 'preset list')"
        )));
    }
    if name.starts_with("paper-ex1") {
        Ok((Family::Axisymmetric, Source::Dense(presets::ex1_a())))
    } else {
        let b = presets::saddle_blocks();
        Ok((
            Family::Saddle,
            Source::Labelled(vec![
                ("P".into(), b.p().clone()),
                ("Q".into(), b.q().clone()),
                ("R".into(), b.r().clone()),
            ]),
        ))
    }
}

fn resolve(args: &SourceArgs) -> Result<(Family, Source), CliError> {
    match (&args.preset, &args.input) {
        (Some(_), Some(_)) => Err(CliError::input("give either an input file or --preset, not both")),
        (Some(name), None) => {
            let (family, source) = preset_source(name)?;
            if let Some(f) = args.family {
                if f != family {
                    return Err(CliError::input(format!(
                        "preset '{name}' belongs to the {family:?} family"
                    )));
                }
            }
            Ok((family, source))
        }
        (None, Some(path)) => {
            let family = args.family.unwrap_or(Family::Axisymmetric);
            let source = match family {
                Family::Axisymmetric | Family::Eigenbasis => Source::Dense(read_matrix_file(path)?),
                Family::Saddle | Family::RankOne => Source::Labelled(parse_labelled(&read_text(path)?)?),
            };
            Ok((family, source))
        }
        (None, None) => Err(CliError::input("an input file or --preset is required")),
    }
}

fn labelled<'a>(items: &'a [(String, DenseMatrix)], label: &str) -> Result<&'a DenseMatrix, CliError> {
    items
        .iter()
        .find(|(l, _)| l.eq_ignore_ascii_case(label))
        .map(|(_, m)| m)
        .ok_or_else(|| CliError::input(format!("missing block '{label}'")))
}

fn row_vector(items: &[(String, DenseMatrix)], label: &str) -> Result<Vec<f64>, CliError> {
    let m = labelled(items, label)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(CliError::input(format!(
            "'{label}' must be a row or column vector, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.as_slice().to_vec())
}

/// Comma-separated positive numbers.
fn parse_list(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::input(format!("'{t}' is not a number in list '{spec}'")))
        })
        .collect()
}

/// Weights from a file (row, column, or diagonal matrix) or an inline list
/// such as `3,2,1`.
pub fn parse_b_spec(spec: &str) -> Result<Vec<f64>, CliError> {
    let path = Path::new(spec);
    if path.is_file() {
        let m = read_matrix_file(path)?;
        if m.rows() == 1 || m.cols() == 1 {
            return Ok(m.as_slice().to_vec());
        }
        if m.is_square() {
            let d = DenseMatrix::from_diag(&m.diagonal());
            if d == m {
                return Ok(m.diagonal());
            }
        }
        return Err(CliError::input(format!("{spec}: B must be a vector or a diagonal matrix")));
    }
    parse_list(spec)
}

/// Seeded uniform `(-1, 1)` start with full column rank.
pub fn random_start(n: usize, m: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let data: Vec<f64> = (0..n * m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = DenseMatrix::from_row_major(n, m, data).expect("finite entries");
        if crate::flow::is_full_rank(&x) {
            return x;
        }
    }
}

fn report(out: &mut dyn Write, line: String) -> Result<(), CliError> {
    writeln!(out, "# {line}")?;
    Ok(())
}

pub(crate) fn load_source(args: &SourceArgs, out: &mut dyn Write) -> Result<Built, CliError> {
    let (family, source) = resolve(args)?;
    match (family, source) {
        (Family::Axisymmetric, Source::Dense(a)) => {
            let axi = AxisymmetricMatrix::from_dense(&a)
                .map_err(|e| CliError::input(format!("not an axisymmetric structure matrix: {e}")))?;
            if args.validate {
                let graph = build_coordinate_graph(&axi);
                let gersh = gershgorin_intervals(&axi);
                report(
                    out,
                    format!(
                        "axisymmetric n={} pairs={} components={}",
                        axi.n(),
                        axi.lower().len(),
                        graph.components.len()
                    ),
                )?;
                report(out, format!("gershgorin_positive={}", gersh.all_positive))?;
            }
            let sym = solve_diagonal_symmetrizer(&axi, DEFAULT_CONNECTION_TOL)?;
            Ok(Built {
                a,
                s: sym.to_dense(),
                residual: sym.residual,
                pd: true,
                window: None,
                violation: None,
            })
        }
        (Family::Saddle, Source::Labelled(items)) => {
            let blocks = SaddlePointBlocks::new(
                labelled(&items, "P")?.clone(),
                labelled(&items, "Q")?.clone(),
                labelled(&items, "R")?.clone(),
            )?;
            let window = epsilon_window(&blocks);
            if args.validate {
                report(
                    out,
                    format!(
                        "saddle n={} m={} lambda_min(P)={} sigma_max(Q)={} lambda_max(R)={}",
                        blocks.n(),
                        blocks.m(),
                        format_value(window.lambda_min_p),
                        format_value(window.sigma_max_q),
                        format_value(window.lambda_max_r)
                    ),
                )?;
            }
            let epsilon = match args.epsilon {
                EpsilonChoice::Value(e) => e,
                EpsilonChoice::Auto if window.exists => window.midpoint(),
                EpsilonChoice::Auto => {
                    return Err(CliError::input(format!(
                        "epsilon window is empty: 2 sigma_max(Q) = {} exceeds lambda_min(P) - lambda_max(R) = {}",
                        format_value(2.0 * window.sigma_max_q),
                        format_value(window.lambda_min_p - window.lambda_max_r)
                    )))
                }
            };
            let a = assemble_saddle(&blocks);
            let s = assemble_s_epsilon(&blocks, epsilon);
            let residual = sylvester_residual(&a, &s)?;
            let (pd, violation) = match check_pd_conditions(&blocks, epsilon) {
                Ok(r) => {
                    let failed = [
                        (r.cond_i, "P - eps I > 0"),
                        (r.cond_ii, "eps I - R > 0"),
                        (r.cond_iii, "Q (P - eps I)^-1 Q^T < eps I - R"),
                    ]
                    .iter()
                    .find(|(ok, _)| !ok)
                    .map(|(_, name)| format!("S_eps is not positive definite at eps={epsilon}: {name} fails"));
                    (r.is_positive_definite(), failed)
                }
                Err(e) => (false, Some(format!("eps={epsilon}: {e}"))),
            };
            if args.validate {
                report(out, format!("epsilon={}", format_value(epsilon)))?;
            }
            Ok(Built {
                a,
                s,
                residual,
                pd,
                window: window.exists.then_some((window.eps_minus, window.eps_plus)),
                violation,
            })
        }
        (Family::RankOne, Source::Labelled(items)) => {
            let (d, av, bv) = (row_vector(&items, "d")?, row_vector(&items, "a")?, row_vector(&items, "b")?);
            let sym = rank_one_symmetrizer(&d, &av, &bv)
                .map_err(|e| CliError::input(format!("rank-one hypotheses fail: {e}")))?;
            if args.validate {
                report(out, format!("rank-one n={} hypotheses hold", d.len()))?;
            }
            Ok(Built {
                a: rank_one_matrix(&d, &av, &bv)?,
                s: sym.to_dense(),
                residual: sym.residual,
                pd: true,
                window: None,
                violation: None,
            })
        }
        (Family::Eigenbasis, Source::Dense(a)) => {
            let basis = args
                .basis
                .as_ref()
                .ok_or_else(|| CliError::input("the eigenbasis family needs --basis"))?;
            let v = read_matrix_file(basis)?;
            let z = match &args.z {
                Some(spec) => parse_list(spec)?,
                None => vec![1.0; a.rows()],
            };
            let s = symmetrizer_from_eigenbasis(&a, &v, &z)
                .map_err(|e| CliError::input(format!("eigenbasis construction failed: {e}")))?;
            let residual = sylvester_residual(&a, &s)?;
            let pd = is_positive_definite(&s)?;
            Ok(Built {
                a,
                s,
                residual,
                pd,
                window: None,
                violation: None,
            })
        }
        _ => unreachable!("source layout follows the family"),
    }
}
