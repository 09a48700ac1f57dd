//! Randomized meaningfulness oracle.
//!
//! A value computed from scale readings is meaningful when re-describing every
//! reading under an admissible transformation changes the result only by the
//! action of that transformation on the result's sort. The oracle samples
//! transformations and looks for a counterexample. In typed mode it evaluates
//! through the value algebra; in raw mode sorts are erased and the expected
//! action is the sort the checker would assign, or invariance when the
//! expression has no sort.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ErrorCode, MeasureError, Result};
use crate::exec::Execution;
use crate::lang::ast::{Expr, ExprKind, Program, Stmt, StmtKind};
use crate::lang::check::{check_program, infer_sort, SortEnv, StmtSort};
use crate::lang::diagnostic::Diagnostic;
use crate::lang::eval::{eval_expr, eval_raw, Env};
use crate::lang::printer::print_stmt;
use crate::quantity::Quantity;
use crate::registry::{FamilyId, FamilyKind, Registry};
use crate::sort::Sort;
use crate::transform::Transformation;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Deviations below this absolute size never count, whatever the magnitude
/// of the expected value.
pub const ABSOLUTE_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Typed,
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Meaningful,
    NotMeaningful,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// One transformation per registered family, indexed by family id.
    pub transformations: Vec<Transformation>,
    /// First family the statement reads from.
    pub family: Option<FamilyId>,
    pub y: f64,
    pub y_transformed: f64,
    /// The transformation's action on `y`: what `y_transformed` should be.
    pub expected: f64,
    pub deviation: f64,
}

impl Witness {
    /// The `(p, q)` reported for the witness family.
    pub fn pq(&self) -> (f64, f64) {
        self.family
            .map(|f| {
                let t = self.transformations[f.0 as usize];
                (t.p, t.q)
            })
            .unwrap_or((0.0, 1.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeaningVerdict {
    pub status: Status,
    pub trials: usize,
    pub witness: Option<Witness>,
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub mode: Mode,
    pub execution: Execution,
}

impl Options {
    pub fn new(trials: usize, seed: u64) -> Self {
        Options {
            trials,
            seed,
            tolerance: DEFAULT_TOLERANCE,
            mode: Mode::Typed,
            execution: Execution::default(),
        }
    }

    pub fn mode(self, mode: Mode) -> Self {
        Options { mode, ..self }
    }

    pub fn execution(self, execution: Execution) -> Self {
        Options { execution, ..self }
    }
}

/// `|actual - expected|`, relative to `|expected|` but never to less than
/// `ABSOLUTE_FLOOR / tolerance`, so that absolute errors under the floor
/// stay under the tolerance.
pub fn deviation(actual: f64, expected: f64, tolerance: f64) -> f64 {
    let diff = (actual - expected).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / expected.abs().max(ABSOLUTE_FLOOR / tolerance)
}

/// The transformations used by trial `index`: one per family, drawn from
/// stream `index` of a ChaCha8 generator keyed by `seed`.
pub fn trial_transformations(registry: &Registry, seed: u64, index: usize) -> Vec<Transformation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    registry
        .families()
        .map(|(id, fam)| Transformation::random_admissible(id, fam.kind, rng.next_u64()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trial {
    pub y: f64,
    pub y_transformed: f64,
    pub expected: f64,
    pub deviation: f64,
}

fn eval_error(d: Diagnostic) -> MeasureError {
    MeasureError::new(ErrorCode::Eval, format!("{}: {}", d.code, d.message))
}

fn sort_env(bindings: &Env) -> SortEnv {
    bindings
        .iter()
        .map(|(k, v)| (k.clone(), Some(v.sort)))
        .collect()
}

struct Context<'a> {
    registry: &'a Registry,
    bindings: &'a Env,
    sorts: SortEnv,
    mode: Mode,
    tolerance: f64,
}

impl Context<'_> {
    /// Value and sort of one side, with every leaf transformed by `ts`.
    fn side(&self, expr: &Expr, ts: Option<&[Transformation]>) -> Result<(f64, Sort)> {
        let map = |q: &Quantity| match q.sort.family() {
            Some(f) => ts.map_or(Ok(*q), |ts| ts[f.0 as usize].apply(q)),
            None => Ok(*q),
        };
        match self.mode {
            Mode::Typed => {
                let q = eval_expr(expr, self.bindings, self.registry, Some(&map))
                    .map_err(eval_error)?;
                Ok((q.value, q.sort))
            }
            Mode::Raw => {
                let y =
                    eval_raw(expr, self.bindings, self.registry, Some(&map)).map_err(eval_error)?;
                let sort = infer_sort(expr, &self.sorts, self.registry).unwrap_or(Sort::Scalar);
                Ok((y, sort))
            }
        }
    }

    fn trial(&self, sides: &[&Expr], ts: &[Transformation]) -> Result<Trial> {
        let mut worst: Option<Trial> = None;
        for expr in sides {
            let (y, sort) = self.side(expr, None)?;
            let (y_transformed, _) = self.side(expr, Some(ts))?;
            let expected = match sort.family() {
                Some(f) => ts[f.0 as usize].act(sort, y),
                None => y,
            };
            let t = Trial {
                y,
                y_transformed,
                expected,
                deviation: deviation(y_transformed, expected, self.tolerance),
            };
            if worst.is_none_or(|w| t.deviation > w.deviation) {
                worst = Some(t);
            }
        }
        Ok(worst.expect("at least one side"))
    }

    fn first_family(&self, sides: &[&Expr]) -> Option<FamilyId> {
        sides
            .iter()
            .find_map(|e| first_family(e, self.bindings, self.registry))
    }

    fn verdict(&self, sides: &[&Expr], opts: &Options) -> Result<MeaningVerdict> {
        assert!(opts.trials >= 1, "at least one trial is required");
        // a failure on the untransformed values is an error, not a verdict
        for e in sides {
            self.side(e, None)?;
        }
        let found = opts.execution.find_map_first(opts.trials, |i| {
            let ts = trial_transformations(self.registry, opts.seed, i);
            match self.trial(sides, &ts) {
                Ok(t) if t.deviation > opts.tolerance => Some((i, Ok((t, ts)))),
                Ok(_) => None,
                Err(e) => Some((i, Err(e))),
            }
        });
        Ok(match found {
            None => MeaningVerdict {
                status: Status::Meaningful,
                trials: opts.trials,
                witness: None,
            },
            Some((i, Err(_))) => MeaningVerdict {
                status: Status::Indeterminate,
                trials: i + 1,
                witness: None,
            },
            Some((i, Ok((t, transformations)))) => MeaningVerdict {
                status: Status::NotMeaningful,
                trials: i + 1,
                witness: Some(Witness {
                    transformations,
                    family: self.first_family(sides),
                    y: t.y,
                    y_transformed: t.y_transformed,
                    expected: t.expected,
                    deviation: t.deviation,
                }),
            },
        })
    }
}

fn first_family(expr: &Expr, bindings: &Env, registry: &Registry) -> Option<FamilyId> {
    let transformable = |f: FamilyId| registry.family(f).kind != FamilyKind::Absolute;
    match &expr.kind {
        ExprKind::Number { unit, .. } => unit
            .as_ref()
            .and_then(|u| registry.scale_id(&u.scale.name))
            .map(|s| registry.scale(s).family)
            .filter(|&f| transformable(f)),
        ExprKind::Name(n) => bindings.get(n).and_then(|q| q.sort.family()),
        ExprKind::Binary { lhs, rhs, .. } => {
            first_family(lhs, bindings, registry).or_else(|| first_family(rhs, bindings, registry))
        }
        ExprKind::Neg(e) | ExprKind::Paren(e) | ExprKind::Power { base: e, .. } => {
            first_family(e, bindings, registry)
        }
        ExprKind::Mix(args) => args
            .iter()
            .find_map(|(_, e)| first_family(e, bindings, registry)),
    }
}

fn context<'a>(
    registry: &'a Registry,
    bindings: &'a Env,
    mode: Mode,
    tolerance: f64,
) -> Context<'a> {
    Context {
        registry,
        bindings,
        sorts: sort_env(bindings),
        mode,
        tolerance,
    }
}

/// Deviation of `expr` under one set of transformations (one per family).
pub fn check_trial(
    registry: &Registry,
    expr: &Expr,
    bindings: &Env,
    transformations: &[Transformation],
    mode: Mode,
) -> Result<Trial> {
    context(registry, bindings, mode, DEFAULT_TOLERANCE).trial(&[expr], transformations)
}

pub fn check_meaningful(
    registry: &Registry,
    expr: &Expr,
    bindings: &Env,
    opts: &Options,
) -> Result<MeaningVerdict> {
    context(registry, bindings, opts.mode, opts.tolerance).verdict(&[expr], opts)
}

/// Like [`check_meaningful`] for a comparison: both sides must transform by
/// their sort's action. The witness is the worse side.
pub fn check_comparison(
    registry: &Registry,
    lhs: &Expr,
    rhs: &Expr,
    bindings: &Env,
    opts: &Options,
) -> Result<MeaningVerdict> {
    context(registry, bindings, opts.mode, opts.tolerance).verdict(&[lhs, rhs], opts)
}

#[derive(Clone, Debug)]
pub struct StatementVerdict {
    pub stmt_index: usize,
    pub statement: String,
    pub mode: Mode,
    pub verdict: MeaningVerdict,
}

#[derive(Clone, Debug)]
pub struct Survey {
    pub registry: Registry,
    pub verdicts: Vec<StatementVerdict>,
    /// Static diagnostics, a `W_RAW_MODE` warning per statement surveyed
    /// in raw mode and any evaluation errors.
    pub diagnostics: Vec<Diagnostic>,
}

fn uses_any(stmt: &Stmt, names: &[String]) -> bool {
    let exprs: Vec<&Expr> = match &stmt.kind {
        StmtKind::Let { value, .. } => vec![value],
        StmtKind::Check(e) => vec![e],
        StmtKind::Assert { lhs, rhs, .. } => vec![lhs, rhs],
        _ => vec![],
    };
    exprs
        .iter()
        .flat_map(|e| e.free_names())
        .any(|n| names.iter().any(|p| p == n))
}

/// One verdict per check and assert statement: typed for statements that
/// sort-check, raw (with a warning) for those that do not. Statements reading
/// a binding that could not be evaluated are indeterminate.
pub fn survey_program(program: &Program, trials: usize, seed: u64, execution: Execution) -> Survey {
    let checked = check_program(program);
    let registry = checked.registry;
    let mut diagnostics = checked.diagnostics;
    let mut verdicts = Vec::new();
    let mut env = Env::new();
    let mut poisoned: Vec<String> = Vec::new();
    let opts = Options::new(trials, seed).execution(execution);

    for (index, (stmt, sort)) in program
        .statements
        .iter()
        .zip(&checked.statements)
        .enumerate()
    {
        let well_sorted = match sort {
            StmtSort::Declaration => continue,
            StmtSort::Let(s) | StmtSort::Check(s) | StmtSort::Assert(s) => s.is_some(),
        };
        let blocked = uses_any(stmt, &poisoned);
        if let StmtKind::Let { name, value } = &stmt.kind {
            let bound = if well_sorted && !blocked {
                eval_expr(value, &env, &registry, None)
                    .map_err(|d| diagnostics.push(d))
                    .ok()
            } else {
                None
            };
            match bound {
                Some(q) => {
                    env.insert(name.name.clone(), q);
                }
                None => poisoned.push(name.name.clone()),
            }
            continue;
        }
        let mode = if well_sorted { Mode::Typed } else { Mode::Raw };
        if !well_sorted {
            diagnostics.push(Diagnostic::warning(
                ErrorCode::RawMode,
                "statement does not sort-check; surveyed with sorts erased",
                stmt.span,
            ));
        }
        let opts = opts.mode(mode);
        let verdict = if blocked {
            Ok(MeaningVerdict {
                status: Status::Indeterminate,
                trials: 0,
                witness: None,
            })
        } else {
            match &stmt.kind {
                StmtKind::Check(e) => check_meaningful(&registry, e, &env, &opts),
                StmtKind::Assert { lhs, rhs, .. } => {
                    check_comparison(&registry, lhs, rhs, &env, &opts)
                }
                _ => unreachable!("declarations and lets are handled above"),
            }
        };
        let verdict = verdict.unwrap_or_else(|e| {
            diagnostics.push(Diagnostic::from_error(e, stmt.span));
            MeaningVerdict {
                status: Status::Indeterminate,
                trials: 0,
                witness: None,
            }
        });
        verdicts.push(StatementVerdict {
            stmt_index: index,
            statement: print_stmt(stmt),
            mode,
            verdict,
        });
    }
    crate::lang::diagnostic::sort_diagnostics(&mut diagnostics);
    Survey {
        registry,
        verdicts,
        diagnostics,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessJson {
    pub p: f64,
    pub q: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub y: f64,
    pub y_transformed: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictJson {
    pub statement: String,
    pub status: Status,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
}

impl VerdictJson {
    pub fn new(registry: &Registry, v: &StatementVerdict) -> Self {
        VerdictJson {
            statement: v.statement.clone(),
            status: v.verdict.status,
            trials: v.verdict.trials,
            witness: v.verdict.witness.as_ref().map(|w| {
                let (p, q) = w.pq();
                WitnessJson {
                    p,
                    q,
                    family: w.family.map(|f| registry.family(f).name.clone()),
                    y: w.y,
                    y_transformed: w.y_transformed,
                    deviation: w.deviation,
                }
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_expr, parse_program};

    const TIME: &str = "family time kind affine\nscale s of time\n";

    fn setup() -> (Registry, Env) {
        let mut reg = Registry::new();
        let time = reg
            .register_family("time", FamilyKind::Affine, None)
            .unwrap();
        let s = reg.register_scale("s", time, 0.0, 1.0).unwrap();
        let mut env = Env::new();
        for (name, v) in [("t1", 10.0), ("t2", 20.0), ("t3", 35.0)] {
            env.insert(name.into(), Quantity::point(&reg, v, s).unwrap());
        }
        (reg, env)
    }

    #[test]
    fn raw_point_ratio_deviation_example() {
        let (reg, env) = setup();
        let time = reg.family_id("time").unwrap();
        let e = parse_expr("t1/t2").unwrap();
        let ts = [Transformation::unchecked(time, 30.0, 1.0)];
        let t = check_trial(&reg, &e, &env, &ts, Mode::Raw).unwrap();
        assert_eq!(t.y, 0.5);
        assert_eq!(t.y_transformed, 0.8);
        assert!((t.deviation - 0.6).abs() < 1e-12);
    }

    #[test]
    fn ratio_of_differences_cancels() {
        let (reg, env) = setup();
        let time = reg.family_id("time").unwrap();
        let e = parse_expr("(t2-t1)/(t3-t1)").unwrap();
        let ts = [Transformation::unchecked(time, -73.0, 4.5)];
        let t = check_trial(&reg, &e, &env, &ts, Mode::Typed).unwrap();
        assert!(t.deviation < 1e-12);
        let scalar = parse_expr("2+3").unwrap();
        assert_eq!(
            check_trial(&reg, &scalar, &env, &ts, Mode::Typed)
                .unwrap()
                .deviation,
            0.0
        );
    }

    #[test]
    fn verdicts() {
        let (reg, env) = setup();
        let raw = Options::new(50, 0).mode(Mode::Raw);
        let v = check_meaningful(&reg, &parse_expr("t1/t2").unwrap(), &env, &raw).unwrap();
        assert_eq!(v.status, Status::NotMeaningful);
        let w = v.witness.unwrap();
        assert!(w.deviation > DEFAULT_TOLERANCE);
        assert_eq!(w.family, reg.family_id("time"));

        let mean = parse_expr("mix(1/3: t1, 1/3: t2, 1/3: t3)").unwrap();
        let v = check_meaningful(&reg, &mean, &env, &Options::new(100, 7)).unwrap();
        assert_eq!((v.status, v.trials), (Status::Meaningful, 100));

        let zero = parse_expr("0").unwrap();
        let v = check_meaningful(&reg, &zero, &env, &Options::new(3, 1)).unwrap();
        assert_eq!(v.status, Status::Meaningful);
    }

    #[test]
    fn witness_replays() {
        let (reg, env) = setup();
        let e = parse_expr("t1 * t2 + t3").unwrap();
        let v = check_meaningful(&reg, &e, &env, &Options::new(20, 5).mode(Mode::Raw)).unwrap();
        let w = v.witness.unwrap();
        let again = check_trial(&reg, &e, &env, &w.transformations, Mode::Raw).unwrap();
        assert!((again.deviation - w.deviation).abs() <= 1e-12 * w.deviation.max(1.0));
    }

    #[test]
    fn deterministic_across_execution_paths() {
        let (reg, env) = setup();
        let e = parse_expr("t3 / (t2 - t1)").unwrap();
        let base = Options::new(40, 11).mode(Mode::Raw);
        let a = check_meaningful(&reg, &e, &env, &base.execution(Execution::Sequential)).unwrap();
        let b = check_meaningful(&reg, &e, &env, &base.execution(Execution::Parallel)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn evaluation_failure_is_an_error() {
        let (reg, env) = setup();
        let e = parse_expr("(t1 - t2) / (t1 - t1)").unwrap();
        let err = check_meaningful(&reg, &e, &env, &Options::new(5, 0)).unwrap_err();
        assert_eq!(err.code, ErrorCode::Eval);
    }

    #[test]
    fn survey_mixes_static_and_dynamic_verdicts() {
        let src = format!(
            "{TIME}let t1 = 10 @s; let t2 = 20 @s\ncheck t1 / t2\ncheck t2 - t1\nassert t1 < t2"
        );
        let s = survey_program(&parse_program(&src).unwrap(), 50, 0, Execution::default());
        let codes: Vec<_> = s.diagnostics.iter().map(|d| d.code).collect();
        assert_eq!(codes, [ErrorCode::RawMode, ErrorCode::PointRatio]);
        let statuses: Vec<_> = s.verdicts.iter().map(|v| v.verdict.status).collect();
        assert_eq!(
            statuses,
            [
                Status::NotMeaningful,
                Status::Meaningful,
                Status::Meaningful
            ]
        );
        assert_eq!(s.verdicts[0].mode, Mode::Raw);
        assert_eq!(s.verdicts[0].statement, "check t1 / t2");
    }

    #[test]
    fn survey_edge_cases() {
        let empty = survey_program(&Program::default(), 10, 0, Execution::default());
        assert!(empty.verdicts.is_empty());
        let src = format!("{TIME}let bad = 1 @s * 2 @s\ncheck bad + 1");
        let s = survey_program(&parse_program(&src).unwrap(), 10, 0, Execution::default());
        assert_eq!(s.verdicts[0].verdict.status, Status::Indeterminate);
    }
}
