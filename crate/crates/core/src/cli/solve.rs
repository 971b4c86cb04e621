use std::io::Write;
use std::path::{Path, PathBuf};

use super::inputs::{load_source, parse_b_spec, random_start};
use super::{CliError, CliResult, ModeArg, SolveArgs, EXIT_DIVERGED, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::error::Error;
use crate::flow::{
    eigenpair_rows, eigenpairs_at, integrate, trajectory_csv, FlowProblem, IntegrateConfig, StepMode, StopReason,
    Trajectory,
};
use crate::matrix::DenseMatrix;
use crate::oracle::{reference_eigenpairs, ReferenceSpectrum};
use crate::presets::{self, SolvePreset};
use crate::textio::{format_value, read_matrix_file};

struct Setup {
    problem: FlowProblem,
    x0: DenseMatrix,
    config: IntegrateConfig,
    /// Step for the fixed half of `--compare`.
    compare_gamma: Option<f64>,
}

fn preset_fixed_gamma(preset: &SolvePreset) -> Option<f64> {
    if let StepMode::Fixed(g) = preset.config.mode {
        return Some(g);
    }
    let sibling = preset.name.strip_suffix("-variable")?;
    match presets::solve_preset(sibling)?.config.mode {
        StepMode::Fixed(g) => Some(g),
        StepMode::Variable => None,
    }
}

fn setup(args: &SolveArgs, out: &mut dyn Write) -> Result<Setup, CliError> {
    let preset = args.source.preset.as_deref().and_then(presets::solve_preset);
    let (a, s) = match (&preset, &args.s) {
        (Some(p), None) => (p.a.clone(), p.s.clone()),
        (_, Some(s_path)) => {
            let input = args
                .source
                .input
                .as_ref()
                .ok_or_else(|| CliError::input("--s needs a dense A input file"))?;
            (read_matrix_file(input)?, read_matrix_file(s_path)?)
        }
        (None, None) => {
            let built = load_source(&args.source, out)?;
            if let Some(v) = built.violation {
                return Err(CliError::input(v));
            }
            (built.a, built.s)
        }
    };
    let n = a.rows();
    let b = match (&args.b, &preset) {
        (Some(spec), _) => parse_b_spec(spec)?,
        (None, Some(p)) => p.b.clone(),
        (None, None) => presets::descending_b(n),
    };
    let x0 = match (&args.x0, &preset) {
        (Some(path), _) => read_matrix_file(path)?,
        (None, Some(p)) if p.x0.cols() == b.len() => p.x0.clone(),
        _ => random_start(n, b.len(), args.seed),
    };

    let mut config = preset.as_ref().map(|p| p.config.clone()).unwrap_or_default();
    let mode = args.mode.or(args.gamma.map(|_| ModeArg::Fixed));
    match mode {
        Some(ModeArg::Variable) => config.mode = StepMode::Variable,
        Some(ModeArg::Fixed) => {
            let gamma = args
                .gamma
                .or(preset.as_ref().and_then(preset_fixed_gamma))
                .ok_or_else(|| CliError::input("fixed mode needs --gamma"))?;
            config.mode = StepMode::Fixed(gamma);
        }
        None => {}
    }
    if let StepMode::Fixed(g) = config.mode {
        if !(g > 0.0) {
            return Err(CliError::input(format!("--gamma must be positive, got {g}")));
        }
    }
    if let Some(m) = args.max_iters {
        config.max_iters = m;
    }
    if let Some(t) = args.tol {
        config.tol_abs = t;
        config.tol_rel = t;
    }
    if let Some(k) = args.stride {
        config.stride = k;
    }
    config.audit = args.audit;
    let compare_gamma = args.gamma.or(preset.as_ref().and_then(preset_fixed_gamma));

    let problem = FlowProblem::new(a, b, s)?;
    if problem.require_sorting_weights().is_err() {
        writeln!(out, "# weights are not strictly decreasing; L need not become diagonal")?;
    }
    Ok(Setup {
        problem,
        x0,
        config,
        compare_gamma,
    })
}

fn mode_label(mode: StepMode) -> String {
    match mode {
        StepMode::Fixed(g) => format!("fixed gamma={}", format_value(g)),
        StepMode::Variable => "variable".into(),
    }
}

fn stop_label(reason: StopReason) -> &'static str {
    match reason {
        StopReason::ResidualSmall => "residual-small",
        StopReason::MaxIterations => "max-iterations",
        StopReason::Diverged => "diverged",
    }
}

fn exit_code(t: &Trajectory) -> i32 {
    match t.stop_reason {
        StopReason::ResidualSmall => EXIT_OK,
        StopReason::MaxIterations => EXIT_NOT_CONVERGED,
        StopReason::Diverged => EXIT_DIVERGED,
    }
}

fn write_report(
    out: &mut dyn Write,
    problem: &FlowProblem,
    config: &IntegrateConfig,
    t: &Trajectory,
    oracle: &ReferenceSpectrum,
) -> Result<(), CliError> {
    writeln!(out, "run: {}", mode_label(config.mode))?;
    writeln!(
        out,
        "iterations={} stop={} field_norm={} offdiag_max={} potential={}",
        t.iterations(),
        stop_label(t.stop_reason),
        format_value(t.field_norm),
        format_value(t.offdiag_max()),
        format_value(t.final_state.potential)
    )?;
    if let Some(worst) = t
        .audits
        .iter()
        .flatten()
        .filter(|s| s.resolvable())
        .map(|s| s.rel_error)
        .reduce(f64::max)
    {
        writeln!(out, "audit_max_rel_error={}", format_value(worst))?;
    }
    let pairs = eigenpairs_at(problem, &t.final_state.x);
    for (i, p) in pairs.iter().enumerate() {
        let reference = oracle.eigenvalues[i];
        writeln!(
            out,
            "lambda_{}={} oracle={} abs_err={} residual={} sqrt_s_residual={}",
            i + 1,
            format_value(p.lambda),
            format_value(reference),
            format_value((p.lambda - reference).abs()),
            format_value(p.residual),
            format_value(p.sqrt_s_residual)
        )?;
    }
    writeln!(out, "# eigenpairs: lambda,residual,components...")?;
    out.write_all(eigenpair_rows(&pairs).as_bytes())?;
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_files(prefix: &Path, tag: &str, problem: &FlowProblem, t: &Trajectory) -> Result<(), CliError> {
    std::fs::write(with_suffix(prefix, &format!("{tag}.csv")), trajectory_csv(t))?;
    let pairs = eigenpairs_at(problem, &t.final_state.x);
    std::fs::write(with_suffix(prefix, &format!("{tag}.eigen.csv")), eigenpair_rows(&pairs))?;
    Ok(())
}

fn finish(result: Result<Trajectory, Error>) -> Result<Trajectory, CliError> {
    result.map_err(CliError::from)
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> CliResult {
    let setup = setup(args, out)?;
    let problem = &setup.problem;
    let oracle = reference_eigenpairs(problem.a(), problem.s())?;

    if !args.compare {
        let t = finish(integrate(problem, &setup.x0, &setup.config))?;
        write_report(out, problem, &setup.config, &t, &oracle)?;
        if let Some(prefix) = &args.output {
            write_files(prefix, "", problem, &t)?;
        }
        return Ok(exit_code(&t));
    }

    let gamma = setup
        .compare_gamma
        .ok_or_else(|| CliError::input("--compare needs --gamma for the fixed run"))?;
    let fixed = IntegrateConfig {
        mode: StepMode::Fixed(gamma),
        ..setup.config.clone()
    };
    let variable = IntegrateConfig {
        mode: StepMode::Variable,
        ..setup.config.clone()
    };
    let (tf, tv) = std::thread::scope(|scope| {
        let hf = scope.spawn(|| integrate(problem, &setup.x0, &fixed));
        let tv = integrate(problem, &setup.x0, &variable);
        (hf.join().expect("fixed-step run panicked"), tv)
    });
    let (tf, tv) = (finish(tf)?, finish(tv)?);
    write_report(out, problem, &fixed, &tf, &oracle)?;
    write_report(out, problem, &variable, &tv, &oracle)?;
    writeln!(
        out,
        "speedup={}",
        format_value(tf.iterations() as f64 / tv.iterations().max(1) as f64)
    )?;
    if let Some(prefix) = &args.output {
        write_files(prefix, ".fixed", problem, &tf)?;
        write_files(prefix, ".variable", problem, &tv)?;
    }
    Ok(exit_code(&tf).max(exit_code(&tv)))
}
