//! Random expressions and programs over a fixed set of families.
//!
//! The sort-directed generator only builds well-sorted trees; the
//! unconstrained one ignores sorts and is used to probe the checker and the
//! raw-mode oracle.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::lang::ast::{Expr, Program, Rational, UnitKind};
use crate::lang::check::load_registry;
use crate::lang::eval::{eval_expr, Env};
use crate::lang::parser::{parse_expr, parse_program};
use crate::lang::printer::print_expr;
use crate::registry::{FamilyId, FamilyKind, Registry};
use crate::sort::{BinOp, Sort};

/// Upper bound on generated tree depth.
pub const MAX_DEPTH: usize = 5;

pub const STANDARD_DECLARATIONS: &str = "\
family temperature kind affine
scale C of temperature
scale F of temperature offset -160/9 factor 5/9
scale K of temperature offset -273.15 factor 1
family time kind affine
scale s of time
scale min of time offset 0 factor 60
family mass kind linear
scale kg of mass
scale g of mass offset 0 factor 1/1000
scale lb of mass offset 0 factor 0.45359237
family count kind absolute
";

pub const STANDARD_BINDINGS: &str = "\
let t1 = 12 @s
let t2 = 1.5 @min
let t3 = 250 @s
let a = 20 @C
let b = 68.5 @F
let c = 300 @K
let d1 = 30 d@s
let d2 = 2 d@min
let m1 = 2.5 d@kg
let m2 = 800 d@g
let k = 3
";

/// Registry, bound values and their sorts for generated expressions.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub registry: Registry,
    pub env: Env,
    pub bindings: Vec<(String, Sort)>,
}

impl Fixture {
    pub fn standard() -> Fixture {
        let (registry, diags) =
            load_registry(&parse_program(STANDARD_DECLARATIONS).expect("parses"));
        assert!(diags.is_empty(), "{diags:?}");
        let mut fixture = Fixture {
            registry,
            env: Env::new(),
            bindings: Vec::new(),
        };
        for line in STANDARD_BINDINGS.lines() {
            let (name, src) = line
                .trim_start_matches("let ")
                .split_once(" = ")
                .expect("let line");
            fixture.bind(name, &parse_expr(src).expect("parses"));
        }
        fixture
    }

    /// Evaluates `expr` and binds it; panics if it does not evaluate.
    pub fn bind(&mut self, name: &str, expr: &Expr) {
        let q = eval_expr(expr, &self.env, &self.registry, None)
            .unwrap_or_else(|d| panic!("{}: {}", print_expr(expr), d.message));
        self.env.insert(name.to_string(), q);
        self.bindings.push((name.to_string(), q.sort));
    }

    pub fn family(&self, name: &str) -> FamilyId {
        self.registry.family_id(name).expect("standard family")
    }

    /// `.msr` text declaring the fixture: declarations then bindings.
    pub fn source(&self) -> String {
        format!("{STANDARD_DECLARATIONS}{STANDARD_BINDINGS}")
    }

    /// Sorts a well-sorted generator may be asked for.
    pub fn targets(&self) -> Vec<Sort> {
        let (temp, time, mass) = (
            self.family("temperature"),
            self.family("time"),
            self.family("mass"),
        );
        vec![
            Sort::Scalar,
            Sort::Scalar,
            Sort::Point(time),
            Sort::Point(temp),
            Sort::Power(time, 1),
            Sort::Power(temp, 1),
            Sort::Power(mass, 1),
            Sort::Power(time, 2),
            Sort::Power(mass, -1),
            Sort::Power(temp, 3),
        ]
    }
}

#[derive(Clone, Copy, Debug)]
enum Prod {
    Bin(BinOp, Sort, Sort),
    Neg(Sort),
    Pow(Sort, i32),
    Mix(FamilyId),
    Paren(Sort),
}

/// Sorts with a literal form (`x`, `x @S`, `x d@S`).
fn leafable(s: Sort) -> bool {
    matches!(s, Sort::Scalar | Sort::Point(_) | Sort::Power(_, 1))
}

fn rational(num: i32, den: Option<u32>) -> Rational {
    Rational {
        negative: num < 0,
        numerator: f64::from(num.unsigned_abs()),
        denominator: den.map(f64::from),
    }
}

/// Weights `w/8`, nonzero, summing to one.
fn mix_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    loop {
        let mut ws: Vec<i32> = (0..n - 1).map(|_| rng.random_range(-3..=7)).collect();
        let last = 8 - ws.iter().sum::<i32>();
        ws.push(last);
        if ws.iter().all(|&w| w != 0) {
            return ws.into_iter().map(|w| rational(w, Some(8))).collect();
        }
    }
}

/// Decimal with one fractional digit in `[lo, hi]`, never zero.
fn reading<R: Rng>(rng: &mut R, lo: i32, hi: i32) -> f64 {
    loop {
        let tenths = rng.random_range(lo * 10..=hi * 10);
        if tenths != 0 {
            return f64::from(tenths) / 10.0;
        }
    }
}

pub struct Generator<'a> {
    pub registry: &'a Registry,
    pub bindings: &'a [(String, Sort)],
    /// Probability of a bound name where a leaf of its sort is wanted.
    pub name_bias: f64,
}

impl<'a> Generator<'a> {
    pub fn new(fixture: &'a Fixture) -> Self {
        Generator {
            registry: &fixture.registry,
            bindings: &fixture.bindings,
            name_bias: 0.4,
        }
    }

    /// Same vocabulary, literals only.
    pub fn literals_only(self) -> Self {
        Generator {
            name_bias: 0.0,
            ..self
        }
    }

    fn scale_name<R: Rng>(&self, rng: &mut R, f: FamilyId) -> String {
        let ids: Vec<_> = self.registry.scales_of(f).collect();
        let id = *ids.choose(rng).expect("every family has a reference scale");
        self.registry.scale(id).name.clone()
    }

    fn leaf<R: Rng>(&self, rng: &mut R, sort: Sort) -> Expr {
        let names: Vec<&str> = self
            .bindings
            .iter()
            .filter(|(_, s)| *s == sort)
            .map(|(n, _)| n.as_str())
            .collect();
        if !names.is_empty() && rng.random_bool(self.name_bias) {
            return Expr::name(names.choose(rng).expect("nonempty"));
        }
        match sort {
            Sort::Scalar => Expr::number(reading(rng, -10, 10)),
            Sort::Point(f) => {
                let scale = self.scale_name(rng, f);
                Expr::literal(reading(rng, -50, 150), UnitKind::Point, &scale)
            }
            Sort::Power(f, 1) => {
                let scale = self.scale_name(rng, f);
                Expr::literal(reading(rng, -20, 20), UnitKind::Difference, &scale)
            }
            Sort::Power(f, k) => Expr::power(self.leaf(rng, Sort::Power(f, 1)), k),
        }
    }

    fn productions(&self, sort: Sort, child_budget: usize) -> Vec<Prod> {
        use BinOp::*;
        let ok = |s: Sort| child_budget > 0 || leafable(s);
        let power_families: Vec<FamilyId> = self
            .registry
            .families()
            .filter(|(_, f)| f.kind.admits_powers())
            .map(|(id, _)| id)
            .collect();
        let mut out = vec![Prod::Paren(sort)];
        match sort {
            Sort::Scalar => {
                let s = Sort::Scalar;
                out.extend([
                    Prod::Bin(Add, s, s),
                    Prod::Bin(Sub, s, s),
                    Prod::Bin(Mul, s, s),
                    Prod::Bin(Div, s, s),
                    Prod::Neg(s),
                    Prod::Pow(s, 2),
                    Prod::Pow(s, -1),
                ]);
                for f in power_families {
                    let d = Sort::Power(f, 1);
                    out.push(Prod::Bin(Div, d, d));
                    if ok(Sort::Power(f, -1)) {
                        out.push(Prod::Bin(Mul, d, Sort::Power(f, -1)));
                    }
                }
            }
            Sort::Power(f, k) => {
                let p = sort;
                let s = Sort::Scalar;
                let d = Sort::Power(f, 1);
                out.extend([
                    Prod::Bin(Add, p, p),
                    Prod::Bin(Sub, p, p),
                    Prod::Bin(Mul, s, p),
                    Prod::Bin(Mul, p, s),
                    Prod::Bin(Div, p, s),
                    Prod::Neg(p),
                ]);
                if k - 1 != 0 && (k - 1).abs() <= 3 {
                    out.push(Prod::Bin(Mul, d, Sort::Power(f, k - 1)));
                }
                if k + 1 != 0 && (k + 1).abs() <= 3 {
                    out.push(Prod::Bin(Div, Sort::Power(f, k + 1), d));
                }
                if k == -1 {
                    out.push(Prod::Bin(Div, s, d));
                }
                if k != 1 {
                    out.push(Prod::Pow(d, k));
                }
                if k == 1 && self.registry.family(f).kind == FamilyKind::Affine {
                    let pt = Sort::Point(f);
                    out.extend([Prod::Bin(Sub, pt, pt), Prod::Bin(Sub, pt, pt)]);
                }
            }
            Sort::Point(f) => {
                let d = Sort::Power(f, 1);
                out.extend([
                    Prod::Bin(Add, sort, d),
                    Prod::Bin(Add, d, sort),
                    Prod::Bin(Sub, sort, d),
                    Prod::Mix(f),
                ]);
            }
        }
        out.retain(|p| match *p {
            Prod::Bin(_, a, b) => ok(a) && ok(b),
            Prod::Neg(a) | Prod::Pow(a, _) | Prod::Paren(a) => ok(a),
            Prod::Mix(_) => true,
        });
        out
    }

    /// A well-sorted expression of `sort` whose depth is at most `budget`
    /// (plus one when `sort` is a power without a literal form and
    /// `budget` is zero).
    pub fn typed<R: Rng>(&self, rng: &mut R, sort: Sort, budget: usize) -> Expr {
        if budget == 0 || rng.random_bool(0.2) {
            return self.leaf(rng, sort);
        }
        let prods = self.productions(sort, budget - 1);
        let sub = |rng: &mut R, s: Sort| self.typed(rng, s, budget - 1);
        match *prods.choose(rng).expect("paren is always available") {
            Prod::Bin(op, a, b) => {
                let lhs = sub(rng, a);
                let rhs = sub(rng, b);
                Expr::binary(op, lhs, rhs)
            }
            Prod::Neg(a) => Expr::negation(sub(rng, a)),
            Prod::Pow(a, n) => Expr::power(sub(rng, a), n),
            Prod::Paren(a) => Expr::paren(sub(rng, a)),
            Prod::Mix(f) => {
                let n = rng.random_range(2..=3);
                let weights = mix_weights(rng, n);
                let args = weights
                    .into_iter()
                    .map(|w| (w, sub(rng, Sort::Point(f))))
                    .collect();
                Expr::mix(args)
            }
        }
    }

    /// A well-sorted expression of depth at most [`MAX_DEPTH`] and a random
    /// target sort, returned with that sort.
    pub fn random_typed<R: Rng>(&self, rng: &mut R, targets: &[Sort]) -> (Expr, Sort) {
        let sort = *targets.choose(rng).expect("nonempty targets");
        let budget = rng.random_range(1..=MAX_DEPTH);
        let budget = if leafable(sort) { budget } else { budget - 1 };
        (self.typed(rng, sort, budget), sort)
    }

    fn any_leaf<R: Rng>(&self, rng: &mut R) -> Expr {
        let families: Vec<(FamilyId, FamilyKind)> = self
            .registry
            .families()
            .map(|(id, f)| (id, f.kind))
            .collect();
        let (f, kind) = *families.choose(rng).expect("families");
        let sort = match (kind, rng.random_range(0..3)) {
            (FamilyKind::Absolute, _) | (_, 0) => Sort::Scalar,
            (FamilyKind::Affine, 1) => Sort::Point(f),
            _ => Sort::Power(f, 1),
        };
        self.leaf(rng, sort)
    }

    /// An expression built without regard to sorts, depth at most `budget`.
    pub fn unconstrained<R: Rng>(&self, rng: &mut R, budget: usize) -> Expr {
        if budget == 0 || rng.random_bool(0.2) {
            return self.any_leaf(rng);
        }
        let sub = |rng: &mut R| self.unconstrained(rng, budget - 1);
        match rng.random_range(0..10) {
            0..=6 => {
                let op = *BinOp::ALL.choose(rng).expect("ops");
                let lhs = sub(rng);
                let rhs = sub(rng);
                Expr::binary(op, lhs, rhs)
            }
            7 => Expr::negation(sub(rng)),
            8 => {
                let n = *[2, 3, -1].choose(rng).expect("exponents");
                Expr::power(sub(rng), n)
            }
            _ => {
                let n = rng.random_range(2..=3);
                let weights = mix_weights(rng, n);
                Expr::mix(weights.into_iter().map(|w| (w, sub(rng))).collect())
            }
        }
    }
}

/// A standalone program over the standard fixture: declarations, bindings,
/// then `statements` generated checks, asserts and lets. With
/// `ill_sorted_rate > 0` some statements are drawn from the unconstrained
/// generator.
pub fn random_program<R: Rng>(rng: &mut R, statements: usize, ill_sorted_rate: f64) -> String {
    let mut fixture = Fixture::standard();
    let targets = fixture.targets();
    let mut out = fixture.source();
    for i in 0..statements {
        let generator = Generator::new(&fixture);
        if rng.random_bool(ill_sorted_rate) {
            let depth = rng.random_range(1..=MAX_DEPTH);
            let e = generator.unconstrained(rng, depth);
            out.push_str(&format!("check {}\n", print_expr(&e)));
            continue;
        }
        let (e, sort) = generator.random_typed(rng, &targets);
        match rng.random_range(0..6) {
            0 => {
                let (rhs, _) = loop {
                    let (r, s) = generator.random_typed(rng, &[sort]);
                    if s == sort {
                        break (r, s);
                    }
                };
                let cmp = *["==", "!=", "<", "<=", ">", ">="]
                    .choose(rng)
                    .expect("cmps");
                out.push_str(&format!(
                    "assert {} {cmp} {}\n",
                    print_expr(&e),
                    print_expr(&rhs)
                ));
            }
            1 => {
                let name = format!("v{i}");
                let line = format!("let {name} = {}\n", print_expr(&e));
                // only bind values that evaluate, so later statements stay total
                if eval_expr(&e, &fixture.env, &fixture.registry, None).is_ok() {
                    fixture.bind(&name, &e);
                    out.push_str(&line);
                }
            }
            _ => out.push_str(&format!("check {}\n", print_expr(&e))),
        }
    }
    out
}

/// Parses a generated program; generated text always parses.
pub fn parse_generated(source: &str) -> Program {
    parse_program(source)
        .unwrap_or_else(|d| panic!("generated program does not parse: {d:?}\n{source}"))
}
