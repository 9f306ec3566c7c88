use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rcfrac::collocation::{CollocationSystem, NewtonOptions, ScalarFn, SolveReport};
use rcfrac::oracle::{GridFunction, IntegralRepresentation, OracleOptions};
use rcfrac::problems::{example1, example2, manufactured_linear};
use rcfrac::{BoundaryCondition, Error, FractionalOrder, ProblemSpec, SplineBasis};
use serde::Serialize;

use crate::config::{parse_fraction, Rhs, SolveConfig};
use crate::expr::Expr;
use crate::{Failure, Format, VerifyProblem};

type Outcome = Result<(), Failure>;

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn order(alpha: f64) -> Result<FractionalOrder, Failure> {
    FractionalOrder::new(alpha).map_err(usage)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ReportJson {
    iterations: usize,
    final_residual_norm: f64,
    converged: bool,
    jacobian_condition_estimate: Option<f64>,
}

impl From<&SolveReport> for ReportJson {
    fn from(r: &SolveReport) -> Self {
        Self {
            iterations: r.iterations,
            final_residual_norm: r.final_residual_norm,
            converged: r.converged,
            jacobian_condition_estimate: r.jacobian_condition_estimate,
        }
    }
}

pub struct TableArgs {
    pub example: u8,
    pub degrees: Vec<usize>,
    pub alphas: Vec<f64>,
    pub steps: Vec<String>,
    pub grid_size: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, Serialize)]
struct TableRow {
    alpha: f64,
    n: usize,
    h: String,
    err_inf: Option<f64>,
    iters: usize,
    converged: bool,
    report: Option<ReportJson>,
}

pub const CSV_HEADER: &str = "alpha,n,h,err_inf,iters,converged";

fn label(step: &str) -> String {
    step.chars().filter(|c| !c.is_whitespace()).collect()
}

pub fn table(args: &TableArgs) -> Outcome {
    if args.steps.is_empty() || args.steps.iter().any(|s| s.trim().is_empty()) {
        return Err(Failure::Usage("the h list is empty".into()));
    }
    if args.alphas.is_empty() {
        return Err(Failure::Usage("the alpha list is empty".into()));
    }
    if args.grid_size < 2 {
        return Err(Failure::Usage("grid size must be at least 2".into()));
    }
    let mut steps: Vec<(f64, String)> = args
        .steps
        .iter()
        .map(|s| parse_fraction(s).map(|v| (v, label(s))))
        .collect::<Result<_, _>>()
        .map_err(Failure::Usage)?;
    steps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut degrees = args.degrees.clone();
    degrees.sort_unstable();
    degrees.dedup();
    let mut alphas = args.alphas.clone();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let orders: Vec<FractionalOrder> = alphas.iter().map(|&a| order(a)).collect::<Result<_, _>>()?;
    let mut bases = Vec::new();
    for &n in &degrees {
        for (h, _) in &steps {
            bases.push(SplineBasis::new(n, *h, 1.0).map_err(usage)?);
        }
    }

    let mut rows = Vec::new();
    let opts = NewtonOptions::default();
    for &n in &degrees {
        for &alpha in &orders {
            let problem = match args.example {
                1 => example1(alpha),
                _ => example2(alpha),
            }
            .map_err(usage)?;
            for (h, name) in &steps {
                let basis = SplineBasis::new(n, *h, 1.0).map_err(usage)?;
                let solved = CollocationSystem::new(problem.spec(), &basis).and_then(|s| s.solve(&opts));
                let row = match solved {
                    Ok((sol, rep)) => TableRow {
                        alpha: alpha.value(),
                        n,
                        h: name.clone(),
                        err_inf: sol.error_inf_norm(|x| problem.exact(x), args.grid_size).ok(),
                        iters: rep.iterations,
                        converged: rep.converged,
                        report: Some((&rep).into()),
                    },
                    Err(e) => {
                        eprintln!("alpha = {}, n = {n}, h = {name}: {e}", alpha.value());
                        TableRow {
                            alpha: alpha.value(),
                            n,
                            h: name.clone(),
                            err_inf: None,
                            iters: 0,
                            converged: false,
                            report: None,
                        }
                    }
                };
                rows.push(row);
            }
        }
    }

    let text = match args.format {
        Format::Csv => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for r in &rows {
                let err = r.err_inf.map_or("nan".to_string(), |e| format!("{e:e}"));
                s.push_str(&format!("{},{},{},{},{},{}\n", r.alpha, r.n, r.h, err, r.iters, r.converged));
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&rows).map_err(usage)? + "\n",
    };
    emit(args.out.as_deref(), &text)?;
    eprint!("{}", pivot(&rows, &degrees, &alphas, &steps));

    let failed = rows.iter().filter(|r| !r.converged).count();
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} of {} solves did not converge", rows.len())));
    }
    Ok(())
}

/// Human-readable layout: one block per degree, h down, alpha across.
fn pivot(rows: &[TableRow], degrees: &[usize], alphas: &[f64], steps: &[(f64, String)]) -> String {
    let mut s = String::new();
    for &n in degrees {
        s.push_str(&format!("n = {n}\n{:>8}", "h"));
        for a in alphas {
            s.push_str(&format!(" {:>12}", format!("alpha={a}")));
        }
        s.push('\n');
        for (_, name) in steps {
            s.push_str(&format!("{name:>8}"));
            for &a in alphas {
                let cell = rows
                    .iter()
                    .find(|r| r.n == n && r.alpha == a && &r.h == name)
                    .and_then(|r| r.err_inf)
                    .map_or("-".to_string(), |e| format!("{e:.2e}"));
                s.push_str(&format!(" {cell:>12}"));
            }
            s.push('\n');
        }
    }
    s
}

fn bc_message(e: Error) -> Failure {
    match e {
        Error::DegenerateBoundary { order } => Failure::Usage(format!(
            "boundary condition of order {order} has a + b = 0; the problem is only well posed for a_i + b_i != 0"
        )),
        other => usage(other),
    }
}

fn build_problem(cfg: &SolveConfig) -> Result<ProblemSpec, Failure> {
    let alpha = order(cfg.alpha)?;
    let bcs = match &cfg.bc {
        Some(list) => {
            if list.len() != 2 {
                return Err(Failure::Usage(format!("expected 2 boundary conditions, got {}", list.len())));
            }
            let mut out = Vec::new();
            for b in list {
                out.push(BoundaryCondition::new(b.order, b.a, b.b, b.c).map_err(bc_message)?);
            }
            Some([out[0], out[1]])
        }
        None => None,
    };
    let exact: Option<ScalarFn> = match &cfg.exact {
        Some(src) => {
            let e = Expr::parse(src).map_err(|e| Failure::Usage(format!("exact: {e}")))?;
            if e.uses_u() {
                return Err(Failure::Usage("exact: the solution may depend on x only".into()));
            }
            Some(Arc::new(move |x| e.eval(x, 0.0)))
        }
        None => None,
    };
    let mut spec = match &cfg.rhs {
        Rhs::Example { example } => {
            let p = match example {
                1 => example1(alpha),
                2 => example2(alpha),
                other => return Err(Failure::Usage(format!("unknown example {other}; expected 1 or 2"))),
            }
            .map_err(usage)?;
            if cfg.length.is_some_and(|l| l != 1.0) {
                return Err(Failure::Usage("the examples are posed on [0, 1]".into()));
            }
            let mut s = p.spec().clone();
            if let Some(b) = bcs {
                let f = s.source().clone();
                let mut t = ProblemSpec::new(alpha, 1.0, f, b).map_err(bc_message)?;
                if let Some(e) = s.exact() {
                    t = t.with_exact(e.clone());
                }
                s = t;
            }
            s
        }
        Rhs::Expression(src) => {
            let e = Expr::parse(src).map_err(|e| Failure::Usage(format!("rhs: {e}")))?;
            let b = bcs.ok_or_else(|| Failure::Usage("a custom right-hand side needs 'bc'".into()))?;
            let len = cfg.length.unwrap_or(1.0);
            ProblemSpec::new(alpha, len, Arc::new(move |x, u| e.eval(x, u)), b).map_err(bc_message)?
        }
    };
    if let Some(e) = exact {
        spec = spec.with_exact(e);
    }
    Ok(spec)
}

#[derive(Debug, Serialize)]
struct SolveJson {
    alpha: f64,
    n: usize,
    h: String,
    report: ReportJson,
    err_inf: Option<f64>,
    samples: Vec<[f64; 2]>,
}

pub fn solve(path: &Path, out: Option<&Path>, format: Format, grid_size: usize) -> Outcome {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let cfg: SolveConfig =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let h = parse_fraction(&cfg.h).map_err(Failure::Usage)?;
    if cfg.samples < 2 {
        return Err(Failure::Usage("samples must be at least 2".into()));
    }
    let spec = build_problem(&cfg)?;
    let basis = SplineBasis::new(cfg.degree, h, spec.length()).map_err(usage)?;
    let opts = NewtonOptions {
        tol: cfg.newton_tol,
        max_iter: cfg.max_iter,
        ..NewtonOptions::default()
    };
    let system = CollocationSystem::new(&spec, &basis).map_err(usage)?;
    let (sol, rep) = system.solve(&opts).map_err(|e| Failure::Numerical(e.to_string()))?;
    let len = spec.length();
    let last = cfg.samples - 1;
    let samples: Vec<[f64; 2]> = (0..cfg.samples)
        .map(|i| {
            let x = if i == last { len } else { len * i as f64 / last as f64 };
            Ok([x, sol.eval(x)?])
        })
        .collect::<Result<_, Error>>()
        .map_err(|e| Failure::Numerical(e.to_string()))?;
    let err_inf = match spec.exact() {
        Some(e) => Some(sol.error_inf_norm(|x| e(x), grid_size).map_err(usage)?),
        None => None,
    };
    let body = match format {
        Format::Csv => {
            let mut s = format!(
                "# iterations={} final_residual_norm={:e} converged={} jacobian_condition_estimate={}\n",
                rep.iterations,
                rep.final_residual_norm,
                rep.converged,
                rep.jacobian_condition_estimate.map_or("none".into(), |c| format!("{c:e}"))
            );
            if let Some(e) = err_inf {
                s.push_str(&format!("# err_inf={e:e}\n"));
            }
            s.push_str("x,u\n");
            for [x, u] in &samples {
                s.push_str(&format!("{x},{u}\n"));
            }
            s
        }
        Format::Json => {
            let j = SolveJson {
                alpha: cfg.alpha,
                n: cfg.degree,
                h: label(&cfg.h),
                report: (&rep).into(),
                err_inf,
                samples,
            };
            serde_json::to_string_pretty(&j).map_err(usage)? + "\n"
        }
    };
    emit(out, &body)?;
    if !rep.converged {
        return Err(Failure::Numerical(format!(
            "Newton iteration stopped after {} iterations with residual {:e}",
            rep.iterations, rep.final_residual_norm
        )));
    }
    Ok(())
}

pub struct VerifyArgs {
    pub problem: VerifyProblem,
    pub alpha: f64,
    pub degree: usize,
    pub h: String,
    pub lambda: f64,
    pub threshold: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Serialize)]
struct VerifyJson {
    problem: String,
    alpha: f64,
    n: usize,
    h: String,
    distance: f64,
    threshold: f64,
    passed: bool,
    picard_iterations: usize,
    picard_distances: Vec<f64>,
    collocation: ReportJson,
    collocation_vs_exact: Option<f64>,
    picard_vs_exact: Option<f64>,
}

pub fn verify(args: &VerifyArgs) -> Outcome {
    let alpha = order(args.alpha)?;
    let h = parse_fraction(&args.h).map_err(Failure::Usage)?;
    let spec = match args.problem {
        VerifyProblem::Zero => ProblemSpec::new(
            alpha,
            1.0,
            Arc::new(|_, _| 0.0),
            [
                BoundaryCondition::new(0, 1.0, 1.0, 1.0).map_err(usage)?,
                BoundaryCondition::new(1, 1.0, 1.0, 0.0).map_err(usage)?,
            ],
        )
        .map_err(usage)?
        .with_exact(Arc::new(|_| 0.5)),
        VerifyProblem::Linear => manufactured_linear(alpha, args.lambda).map_err(usage)?.spec().clone(),
        VerifyProblem::One => example1(alpha).map_err(usage)?.spec().clone(),
        VerifyProblem::Two => example2(alpha).map_err(usage)?.spec().clone(),
    };
    let basis = SplineBasis::new(args.degree, h, 1.0).map_err(usage)?;
    let (sol, rep) = CollocationSystem::new(&spec, &basis)
        .and_then(|s| s.solve(&NewtonOptions::default()))
        .map_err(|e| Failure::Numerical(format!("collocation: {e}")))?;
    if !rep.converged {
        return Err(Failure::Numerical("collocation: Newton iteration did not converge".into()));
    }
    let rep_int = IntegralRepresentation::new(&spec, &OracleOptions::default()).map_err(usage)?;
    let picard = rep_int
        .picard_solve(args.picard_tol, args.picard_max_iter)
        .map_err(|e| Failure::Numerical(format!("Picard iteration failed, distance not computed: {e}")))?;
    let grid = rep_int.grid().clone();
    let coll = GridFunction::new(
        grid.clone(),
        grid.nodes().iter().map(|&x| sol.eval(x)).collect::<Result<_, _>>().map_err(usage)?,
    )
    .map_err(usage)?;
    let distance = picard.solution.distance(&coll);
    let (coll_exact, pic_exact) = match spec.exact() {
        Some(e) => {
            let ex = GridFunction::sample(grid, |x| e(x));
            (Some(coll.distance(&ex)), Some(picard.solution.distance(&ex)))
        }
        None => (None, None),
    };
    let passed = distance <= args.threshold;
    let name = match args.problem {
        VerifyProblem::Zero => "zero",
        VerifyProblem::Linear => "linear",
        VerifyProblem::One => "1",
        VerifyProblem::Two => "2",
    };
    let report = VerifyJson {
        problem: name.into(),
        alpha: args.alpha,
        n: args.degree,
        h: label(&args.h),
        distance,
        threshold: args.threshold,
        passed,
        picard_iterations: picard.iterations,
        picard_distances: picard.distances,
        collocation: (&rep).into(),
        collocation_vs_exact: coll_exact,
        picard_vs_exact: pic_exact,
    };
    let body = match args.format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(usage)? + "\n",
        Format::Csv => {
            let opt = |v: Option<f64>| v.map_or("none".into(), |d| format!("{d:e}"));
            format!(
                "key,value\nproblem,{}\nalpha,{}\nn,{}\nh,{}\ndistance,{:e}\nthreshold,{:e}\npassed,{}\npicard_iterations,{}\ncollocation_vs_exact,{}\npicard_vs_exact,{}\n",
                report.problem,
                report.alpha,
                report.n,
                report.h,
                report.distance,
                report.threshold,
                report.passed,
                report.picard_iterations,
                opt(report.collocation_vs_exact),
                opt(report.picard_vs_exact)
            )
        }
    };
    emit(args.out.as_deref(), &body)?;
    if !passed {
        return Err(Failure::Numerical(format!(
            "distance {distance:e} between Picard and collocation exceeds threshold {:e}",
            args.threshold
        )));
    }
    Ok(())
}
