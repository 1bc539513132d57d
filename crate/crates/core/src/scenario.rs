//! Scenario files and the suite runner.
//!
//! A scenario is flat UTF-8 text: `key = value` lines, `[section]` headers,
//! `#` comments. Repeated items use dotted keys (`unit.1`, `row.2`,
//! `coeff.0`). Literals:
//!
//! * p-adic: `<valuation>: d0 d1 d2 ...` with base-`p` digits, least
//!   significant first, or `zero`;
//! * quadratic `a + bω`: `<p-adic> | <p-adic>`;
//! * rational: `n` or `n/d`;
//! * lists: whitespace or comma separated.
//!
//! ```text
//! name = t1-split
//! prime = 5            # default 5
//! t = 1                # r = 2^t characters, default 1
//! precision = 40       # default 40
//! degree = 6           # truncation degree, default 2r + 2
//! free_rank = 2        # default r
//! floor = 30           # default 30
//! suites = sign, gz    # default: every suite
//!
//! [curve]
//! tate_period = 1: 1   # required
//! a_p = 1              # required, ±1
//! a_primes = 1 1       # optional, must repeat a_p
//! epsilon = 1          # global root number, default 1
//!
//! [group]
//! torsion = 2          # cyclic factor orders, default none
//! chi = 1 -1           # ±1 values on group elements, default trivial
//! xi = 1 1
//!
//! [characters]
//! row.1 = 1 1          # optional; default is the lexicographic table
//! row.2 = 1 -1
//! twists = 0 1         # class of each τ in (Z/2)^t, default 0..r
//!
//! [family]
//! c_chi = 9/4          # default 1
//! k = 1 2              # default all 1
//! unit.1 = 0: 3 1 | 1: 2
//! unit.2 = ...
//!
//! [invariant]
//! coeff.0 = 1: 4 4 2   # coefficient of each group element, default zero
//! ```
//!
//! Literals are exact: a run at precision `N` reads every literal modulo
//! `p^N`, padding with zero digits.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grpalg::{check_graded_injectivity, degree_monomials, GroupAlgebraElem, GroupShape};
use crate::padic::{Padic, QuadExt};
use crate::plectic::{
    algebraicity_check, character_table, drec, factorization_check, forward_invariant, gz_leading_term, lift_piece,
    sign_check, LocalPoints, PlecticConfig, PlecticError, PlecticInvariant, SyntheticPointFamily,
};
use crate::report::{CheckResult, Report, Verdict};
use crate::symalg::{sqrt_ratio, SymAlgError, SymTensor};
use crate::tate::{CurvePoint, TateCurve};
use crate::units::{sigma_on_completion, UnitBasis};

pub const SUITES: [&str; 8] = ["units", "tate", "grpalg", "symalg", "gz", "sign", "factorization", "algebraicity"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {message}")]
    Validation { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation { key: key.to_string(), message: message.into() }
}

/// A p-adic literal as written: valuation plus digits, or zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicLiteral {
    pub valuation: i64,
    pub digits: Vec<u32>,
}

impl PadicLiteral {
    pub fn zero() -> Self {
        PadicLiteral { valuation: 0, digits: Vec::new() }
    }

    pub fn from_padic(x: &Padic) -> Self {
        match x.valuation() {
            None => Self::zero(),
            Some(v) => PadicLiteral { valuation: v, digits: x.digits() },
        }
    }

    pub fn at(&self, p: u32, prec: i64) -> Padic {
        Padic::from_digits(p, self.valuation, &self.digits, prec)
    }

    fn parse(text: &str, p: u32) -> Result<Self, String> {
        let text = text.trim();
        if text == "zero" {
            return Ok(Self::zero());
        }
        let (v, ds) = text.split_once(':').ok_or("p-adic literal needs `<valuation>: <digits>` or `zero`")?;
        let valuation = v.trim().parse::<i64>().map_err(|_| format!("bad valuation `{}`", v.trim()))?;
        let digits = ds
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| match s.parse::<u32>() {
                Ok(d) if d < p => Ok(d),
                _ => Err(format!("`{s}` is not a base-{p} digit")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PadicLiteral { valuation, digits })
    }

    pub fn render(&self) -> String {
        if self.digits.iter().all(|&d| d == 0) {
            return "zero".into();
        }
        let ds: Vec<String> = self.digits.iter().map(u32::to_string).collect();
        format!("{}: {}", self.valuation, ds.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadLiteral {
    pub re: PadicLiteral,
    pub im: PadicLiteral,
}

impl QuadLiteral {
    pub fn from_quad(x: &QuadExt) -> Self {
        QuadLiteral { re: PadicLiteral::from_padic(x.re()), im: PadicLiteral::from_padic(x.im()) }
    }

    pub fn at(&self, p: u32, prec: i64) -> QuadExt {
        QuadExt::new(self.re.at(p, prec), self.im.at(p, prec))
    }

    fn parse(text: &str, p: u32) -> Result<Self, String> {
        let (a, b) = text.split_once('|').ok_or("quadratic literal needs `<p-adic> | <p-adic>`")?;
        Ok(QuadLiteral { re: PadicLiteral::parse(a, p)?, im: PadicLiteral::parse(b, p)? })
    }

    pub fn render(&self) -> String {
        format!("{} | {}", self.re.render(), self.im.render())
    }
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub prime: u32,
    pub t: u32,
    pub precision: i64,
    pub degree: usize,
    pub free_rank: usize,
    pub floor: i64,
    pub suites: Vec<String>,
    pub tate_period: PadicLiteral,
    pub a_p: i64,
    pub epsilon: i64,
    pub torsion: Vec<u32>,
    pub chi: Vec<i64>,
    pub xi: Vec<i64>,
    pub table: Vec<Vec<i64>>,
    pub twists: Vec<usize>,
    pub c_chi: (i64, i64),
    pub k: Vec<(i64, i64)>,
    pub units: Vec<QuadLiteral>,
    pub coeffs: Vec<PadicLiteral>,
}

impl Scenario {
    pub fn r(&self) -> usize {
        1 << self.t
    }

    pub fn config(&self) -> Result<PlecticConfig, ScenarioError> {
        let p = self.prime;
        let n = self.precision;
        let q = self.tate_period.at(p, n);
        let curve = TateCurve::new(q, n, self.a_p).map_err(|e| invalid("curve.tate_period", e.to_string()))?;
        let shape = GroupShape::new(self.torsion.clone(), self.free_rank, self.degree, p, n)
            .map_err(|e| invalid("group.torsion", e.to_string()))?;
        PlecticConfig::new(
            self.t,
            self.epsilon,
            curve,
            shape,
            self.table.clone(),
            self.twists.clone(),
            self.chi.clone(),
            self.xi.clone(),
        )
        .map_err(|e| match e {
            PlecticError::InvalidConfig(m) => invalid("config", m),
            other => invalid("characters", other.to_string()),
        })
    }

    pub fn family(&self) -> Result<SyntheticPointFamily, ScenarioError> {
        let p = self.prime;
        let n = self.precision;
        let ratio =
            |key: &str, (a, b): (i64, i64)| Padic::from_ratio(p, a, b, n).map_err(|e| invalid(key, e.to_string()));
        Ok(SyntheticPointFamily {
            units: self.units.iter().map(|u| u.at(p, n)).collect(),
            k: self.k.iter().map(|&k| ratio("family.k", k)).collect::<Result<_, _>>()?,
            c_chi: ratio("family.c_chi", self.c_chi)?,
            c_chi_rational: Some((BigInt::from(self.c_chi.0), BigInt::from(self.c_chi.1))),
        })
    }

    pub fn invariant(&self) -> PlecticInvariant {
        PlecticInvariant { r: self.r(), coeffs: self.coeffs.iter().map(|c| c.at(self.prime, self.precision)).collect() }
    }

    /// The same scenario read at another precision.
    pub fn with_precision(&self, precision: i64) -> Result<Scenario, ScenarioError> {
        let mut s = self.clone();
        s.precision = precision;
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.precision < 20 {
            return Err(invalid("precision", "at least 20 digits are needed"));
        }
        let config = self.config()?;
        let family = self.family()?;
        if family.k.iter().any(Padic::is_zero) {
            return Err(invalid("family.k", "constants must be nonzero"));
        }
        if family.c_chi.is_zero() {
            return Err(invalid("family.c_chi", "must be nonzero"));
        }
        let local = LocalPoints::new(&config.curve).map_err(|e| invalid("curve", e.to_string()))?;
        for (i, u) in family.units.iter().enumerate() {
            local.complete_point(u).map_err(|e| invalid(&format!("family.unit.{}", i + 1), e.to_string()))?;
        }
        Ok(())
    }

    /// Renders the scenario in the file format; `parse_scenario` reads it back.
    pub fn render(&self) -> String {
        let list = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        let ratio = |(a, b): (i64, i64)| if b == 1 { a.to_string() } else { format!("{a}/{b}") };
        let mut out = String::new();
        out +=
            &format!("name = {}\nprime = {}\nt = {}\nprecision = {}\n", self.name, self.prime, self.t, self.precision);
        out += &format!("degree = {}\nfree_rank = {}\nfloor = {}\n", self.degree, self.free_rank, self.floor);
        out += &format!("suites = {}\n", self.suites.join(", "));
        out += &format!("\n[curve]\ntate_period = {}\na_p = {}\n", self.tate_period.render(), self.a_p);
        out += &format!("a_primes = {}\nepsilon = {}\n", list(&vec![self.a_p; self.r()]), self.epsilon);
        let torsion: Vec<i64> = self.torsion.iter().map(|&d| d as i64).collect();
        out +=
            &format!("\n[group]\ntorsion = {}\nchi = {}\nxi = {}\n", list(&torsion), list(&self.chi), list(&self.xi));
        out += "\n[characters]\n";
        for (i, row) in self.table.iter().enumerate() {
            out += &format!("row.{} = {}\n", i + 1, list(row));
        }
        let twists: Vec<i64> = self.twists.iter().map(|&g| g as i64).collect();
        out += &format!("twists = {}\n", list(&twists));
        out += &format!("\n[family]\nc_chi = {}\n", ratio(self.c_chi));
        out += &format!("k = {}\n", self.k.iter().map(|&k| ratio(k)).collect::<Vec<_>>().join(" "));
        for (i, u) in self.units.iter().enumerate() {
            out += &format!("unit.{} = {}\n", i + 1, u.render());
        }
        out += "\n[invariant]\n";
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.digits.iter().any(|&d| d != 0) {
                out += &format!("coeff.{i} = {}\n", c.render());
            }
        }
        out
    }
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).map(|(_, v)| v)
    }

    fn parsed<T>(&mut self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, ScenarioError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => f(&v).map(Some).map_err(|m| invalid(key, m)),
        }
    }

    /// Values of `prefix.1 ... prefix.n` (or `.0 ... .n-1` when `zero_based`).
    fn indexed(
        &mut self,
        prefix: &str,
        n: usize,
        zero_based: bool,
    ) -> Result<Vec<Option<(String, String)>>, ScenarioError> {
        let lead = format!("{prefix}.");
        let base = usize::from(!zero_based);
        let mut out = vec![None; n];
        let keys: Vec<String> = self.map.keys().filter(|k| k.starts_with(&lead)).cloned().collect();
        for key in keys {
            let idx = key[lead.len()..].parse::<usize>().ok().filter(|&i| i >= base && i < n + base);
            let Some(i) = idx else {
                return Err(invalid(&key, format!("index out of range {base}..{}", n + base - 1)));
            };
            out[i - base] = Some((key.clone(), self.take(&key).unwrap_or_default()));
        }
        Ok(out)
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c.is_whitespace() || c == ',').filter(|x| !x.is_empty())
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim().trim_start_matches('+').parse::<T>().map_err(|_| format!("`{}` is not an integer", s.trim()))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    split_list(s).map(parse_int).collect()
}

fn parse_ratio(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = match s.trim().split_once('/') {
        Some((a, b)) => (parse_int(a)?, parse_int(b)?),
        None => (parse_int(s)?, 1),
    };
    if b == 0 {
        return Err("zero denominator".into());
    }
    Ok((a, b))
}

fn parse_sign(s: &str) -> Result<i64, String> {
    match parse_int::<i64>(s)? {
        v @ (1 | -1) => Ok(v),
        v => Err(format!("expected ±1, got {v}")),
    }
}

fn lex(text: &str) -> Result<Entries, ScenarioError> {
    let mut map = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or_default().trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name =
                name.strip_suffix(']').ok_or(ScenarioError::Parse { line, message: "unclosed section".into() })?;
            section = name.trim().to_string();
            if section.is_empty() {
                return Err(ScenarioError::Parse { line, message: "empty section name".into() });
            }
            continue;
        }
        let (k, v) =
            body.split_once('=').ok_or(ScenarioError::Parse { line, message: "expected `key = value`".into() })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ScenarioError::Parse { line, message: "missing key".into() });
        }
        let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        if let Some((first, _)) = map.insert(key.clone(), (line, v.trim().to_string())) {
            return Err(ScenarioError::Parse { line, message: format!("`{key}` already set on line {first}") });
        }
    }
    Ok(Entries { map })
}

/// Parses and validates a scenario; errors name the first offending key.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut e = lex(text)?;
    let name = e.take("name").unwrap_or_else(|| "unnamed".into());
    let prime = e.parsed("prime", parse_int::<u32>)?.unwrap_or(5);
    crate::padic::check_prime(prime).map_err(|m| invalid("prime", m.to_string()))?;
    let t = e.parsed("t", parse_int::<u32>)?.unwrap_or(1);
    if t > 3 {
        return Err(invalid("t", "at most 3 (r ≤ 8)"));
    }
    let r = 1usize << t;
    let precision = e.parsed("precision", parse_int::<i64>)?.unwrap_or(40);
    let degree = e.parsed("degree", parse_int::<usize>)?.unwrap_or(2 * r + 2);
    let free_rank = e.parsed("free_rank", parse_int::<usize>)?.unwrap_or(r);
    let floor = e.parsed("floor", parse_int::<i64>)?.unwrap_or(30);
    let suites = match e.take("suites") {
        None => SUITES.iter().map(|s| s.to_string()).collect(),
        Some(v) => {
            let list: Vec<String> = split_list(&v).map(str::to_string).collect();
            if let Some(bad) = list.iter().find(|s| !SUITES.contains(&s.as_str())) {
                return Err(invalid("suites", format!("unknown suite `{bad}`")));
            }
            list
        }
    };

    let tate_period = e
        .parsed("curve.tate_period", |v| PadicLiteral::parse(v, prime))?
        .ok_or_else(|| invalid("curve.tate_period", "tate_period required"))?;
    let a_p = e.parsed("curve.a_p", parse_sign)?.ok_or_else(|| invalid("curve.a_p", "a_p required"))?;
    if let Some(a_primes) = e.parsed("curve.a_primes", parse_list::<i64>)? {
        if a_primes.len() != r {
            return Err(invalid("curve.a_primes", format!("need {r} values")));
        }
        if a_primes.iter().any(|&a| a != a_p) {
            return Err(invalid("curve.a_primes", "every a_𝔭 must equal a_p"));
        }
    }
    let epsilon = e.parsed("curve.epsilon", parse_sign)?.unwrap_or(1);

    let torsion = e.parsed("group.torsion", parse_list::<u32>)?.unwrap_or_default();
    let order: usize = torsion.iter().map(|&d| d as usize).product();
    let chi = e.parsed("group.chi", parse_list::<i64>)?.unwrap_or_else(|| vec![1; order]);
    let xi = e.parsed("group.xi", parse_list::<i64>)?.unwrap_or_else(|| vec![1; order]);

    let rows = e.indexed("characters.row", r, false)?;
    let table = if rows.iter().all(Option::is_none) {
        character_table(t)
    } else {
        let mut table = Vec::with_capacity(r);
        for (i, row) in rows.into_iter().enumerate() {
            let (key, v) = row.ok_or_else(|| invalid(&format!("characters.row.{}", i + 1), "missing row"))?;
            let row: Vec<i64> = parse_list(&v).map_err(|m| invalid(&key, m))?;
            if row.len() != r {
                return Err(invalid(&key, format!("need {r} entries")));
            }
            table.push(row);
        }
        crate::plectic::validate_character_table(&table).map_err(|m| invalid("characters", m.to_string()))?;
        table
    };
    let twists = e.parsed("characters.twists", parse_list::<usize>)?.unwrap_or_else(|| (0..r).collect());

    let c_chi = e.parsed("family.c_chi", parse_ratio)?.unwrap_or((1, 1));
    let k = match e.take("family.k") {
        None => vec![(1, 1); r],
        Some(v) => {
            split_list(&v).map(parse_ratio).collect::<Result<Vec<_>, _>>().map_err(|m| invalid("family.k", m))?
        }
    };
    if k.len() != r {
        return Err(invalid("family.k", format!("need {r} constants")));
    }
    let mut units = Vec::with_capacity(r);
    for (i, u) in e.indexed("family.unit", r, false)?.into_iter().enumerate() {
        let (key, v) = u.ok_or_else(|| invalid(&format!("family.unit.{}", i + 1), "unit required"))?;
        units.push(QuadLiteral::parse(&v, prime).map_err(|m| invalid(&key, m))?);
    }
    let mut coeffs = Vec::with_capacity(order);
    for c in e.indexed("invariant.coeff", order, true)? {
        coeffs.push(match c {
            None => PadicLiteral::zero(),
            Some((key, v)) => PadicLiteral::parse(&v, prime).map_err(|m| invalid(&key, m))?,
        });
    }
    if let Some(key) = e.map.keys().next() {
        return Err(invalid(key, "unknown key"));
    }

    let scenario = Scenario {
        name,
        prime,
        t,
        precision,
        degree,
        free_rank,
        floor,
        suites,
        tate_period,
        a_p,
        epsilon,
        torsion,
        chi,
        xi,
        table,
        twists,
        c_chi,
        k,
        units,
        coeffs,
    };
    scenario.validate()?;
    Ok(scenario)
}

enum Outcome {
    Pass(i64),
    Fail(i64, String),
    Inconsistent(String),
}

fn timed(report: &mut Report, name: &str, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let outcome = f();
    let time_ms = start.elapsed().as_millis();
    let (verdict, margin, detail) = match outcome {
        Outcome::Pass(m) => (Verdict::Pass, m, String::new()),
        Outcome::Fail(m, d) => (Verdict::Fail, m, d),
        Outcome::Inconsistent(d) => (Verdict::Inconsistent, 0, d),
    };
    report.push(CheckResult { name: name.to_string(), verdict, margin, time_ms, detail });
}

fn failed(e: impl std::fmt::Display) -> Outcome {
    Outcome::Fail(0, e.to_string())
}

fn plectic_failure(e: PlecticError) -> Outcome {
    match e {
        PlecticError::IdentityFails { margin, .. } => Outcome::Fail(margin.max(0), e.to_string()),
        PlecticError::InconsistentSigns => Outcome::Inconsistent(e.to_string()),
        other => failed(other),
    }
}

/// Number of random samples per property check.
const SAMPLES: usize = 10;

struct Context {
    scenario: Scenario,
    config: PlecticConfig,
    local: LocalPoints,
    family: SyntheticPointFamily,
    invariant: PlecticInvariant,
}

/// Runs the selected suites in dependency order. Unknown suite names are
/// reported as failing checks. Deterministic given the scenario and seed.
pub fn run(scenario: &Scenario, suites: &[String], seed: u64) -> Report {
    let mut report = Report::new(&scenario.name, scenario.floor);
    for bad in suites.iter().filter(|s| !SUITES.contains(&s.as_str())) {
        timed(&mut report, &format!("{bad}.selection"), || Outcome::Fail(0, "unknown suite".into()));
    }
    if suites.is_empty() {
        return report;
    }
    let ctx = match build_context(scenario) {
        Ok(ctx) => ctx,
        Err(e) => {
            timed(&mut report, "scenario.build", || failed(e));
            return report;
        }
    };
    for (i, suite) in SUITES.iter().enumerate() {
        if !suites.iter().any(|s| s == suite) {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((i as u64 + 1) << 32));
        match *suite {
            "units" => units_suite(&ctx, &mut rng, &mut report),
            "tate" => tate_suite(&ctx, &mut rng, &mut report),
            "grpalg" => grpalg_suite(&ctx, &mut rng, &mut report),
            "symalg" => symalg_suite(&ctx, &mut rng, &mut report),
            "gz" => gz_suite(&ctx, &mut report),
            "sign" => sign_suite(&ctx, &mut report),
            "factorization" => factorization_suite(&ctx, &mut report),
            _ => algebraicity_suite(&ctx, &mut report),
        }
    }
    report
}

fn build_context(scenario: &Scenario) -> Result<Context, ScenarioError> {
    let config = scenario.config()?;
    let local = LocalPoints::new(&config.curve).map_err(|e| invalid("curve", e.to_string()))?;
    Ok(Context {
        family: scenario.family()?,
        invariant: scenario.invariant(),
        scenario: scenario.clone(),
        config,
        local,
    })
}

fn units_suite(ctx: &Context, rng: &mut ChaCha8Rng, report: &mut Report) {
    let p = ctx.config.prime();
    let n = ctx.config.precision();
    let samples: Vec<(QuadExt, QuadExt)> = (0..SAMPLES)
        .map(|_| {
            let u = QuadExt::random_unit(p, n, rng).shift(rng.gen_range(-2..3));
            (u, QuadExt::random_unit(p, n, rng))
        })
        .collect();
    let basis = match UnitBasis::new(p, n) {
        Ok(b) => b,
        Err(e) => return timed(report, "units.basis", || failed(e)),
    };
    timed(report, "units.homomorphism", || {
        let mut margin = n;
        for (u, w) in &samples {
            let lhs = match basis.complete(&(u * w)) {
                Ok(c) => c,
                Err(e) => return failed(e),
            };
            let (cu, cw) = match (basis.complete(u), basis.complete(w)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return failed("completion failed"),
            };
            margin = margin.min(lhs.agreement(&(&cu + &cw)));
        }
        Outcome::Pass(margin)
    });
    timed(report, "units.frobenius", || {
        let mut margin = n;
        for (u, _) in &samples {
            match (basis.complete(&u.frobenius()), basis.complete(u)) {
                (Ok(a), Ok(b)) => margin = margin.min(a.agreement(&sigma_on_completion(&b))),
                _ => return failed("completion failed"),
            }
        }
        Outcome::Pass(margin)
    });
}

fn tate_suite(ctx: &Context, rng: &mut ChaCha8Rng, report: &mut Report) {
    let curve = &ctx.config.curve;
    let p = ctx.config.prime();
    let n = ctx.config.precision();
    timed(report, "tate.homomorphism", || {
        let mut margin = n;
        for _ in 0..SAMPLES {
            let u = QuadExt::random_unit(p, n, rng);
            let w = QuadExt::random_unit(p, n, rng);
            let sum = curve.phi(&u).and_then(|a| curve.phi(&w).and_then(|b| curve.add_points(&a, &b)));
            match (curve.phi(&(&u * &w)), sum) {
                (Ok(lhs), Ok(rhs)) => margin = margin.min(lhs.agreement(&rhs)),
                (Err(e), _) | (_, Err(e)) => return failed(e),
            }
        }
        Outcome::Pass(margin)
    });
    timed(report, "tate.kernel", || {
        let q = QuadExt::from_base(curve.period().clone());
        for k in -2i64..=2 {
            let qk = if k >= 0 { q.pow(k as u64) } else { q.pow((-k) as u64).inverse().unwrap_or_else(|_| q.clone()) };
            match curve.phi(&qk) {
                Ok(CurvePoint::Infinity) => {}
                Ok(_) => return Outcome::Fail(0, format!("q^{k} maps to an affine point")),
                Err(e) => return failed(e),
            }
        }
        Outcome::Pass(n)
    });
    timed(report, "tate.period_from_j", || {
        let back = curve.j_invariant().and_then(|j| TateCurve::from_j(&j, n, curve.reduction_sign()));
        match back {
            Ok(c) => Outcome::Pass(c.period().agreement(curve.period()).min(n)),
            Err(e) => failed(e),
        }
    });
}

fn random_sparse(shape: &GroupShape, degree: usize, rng: &mut ChaCha8Rng) -> GroupAlgebraElem {
    let monomials = degree_monomials(shape.free_rank(), degree);
    let mut x = GroupAlgebraElem::zero(shape);
    for _ in 0..4 {
        let alpha = &monomials[rng.gen_range(0..monomials.len())];
        let q = rng.gen_range(0..shape.order());
        let c = Padic::random_integer(shape.prime(), shape.precision(), rng);
        x = &x + &GroupAlgebraElem::monomial(shape, q, alpha, c);
    }
    x
}

fn grpalg_suite(ctx: &Context, rng: &mut ChaCha8Rng, report: &mut Report) {
    let s = ctx.scenario.clone();
    let n = s.precision;
    let top = s.r().min(4);
    timed(report, "grpalg.involution_diagram", || {
        let shape = match GroupShape::new(s.torsion.clone(), s.free_rank, top + 1, s.prime, n) {
            Ok(sh) => sh,
            Err(e) => return failed(e),
        };
        let mut margin = n;
        for i in 0..SAMPLES {
            let deg = 1 + i % top;
            let x = random_sparse(&shape, deg, rng);
            let lhs = x.involution().leading_term(deg);
            let rhs = x.leading_term(deg);
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => {
                    let sign = Padic::from_i64(s.prime, if deg.is_multiple_of(2) { 1 } else { -1 }, n);
                    margin = margin.min(l.agreement(&r.involution_q().scale(&sign)));
                }
                (Err(e), _) | (_, Err(e)) => return failed(e),
            }
        }
        Outcome::Pass(margin.min(n))
    });
    timed(report, "grpalg.graded_injectivity", || {
        let shape = match GroupShape::new(s.torsion.clone(), s.free_rank, top, s.prime, n) {
            Ok(sh) => sh,
            Err(e) => return failed(e),
        };
        match check_graded_injectivity(&shape, top) {
            Ok(cert) if cert.rank == cert.columns => Outcome::Pass(n),
            Ok(cert) => Outcome::Fail(0, format!("rank {} of {}", cert.rank, cert.columns)),
            Err(e) => failed(e),
        }
    });
}

fn symalg_suite(ctx: &Context, rng: &mut ChaCha8Rng, report: &mut Report) {
    let p = ctx.config.prime();
    let n = ctx.config.precision();
    let r = ctx.config.r();
    let monomials: Vec<Vec<u16>> = (0..=r as u16).map(|i| vec![i, r as u16 - i]).collect();
    timed(report, "symalg.sqrt_ratio", || {
        let mut margin = n;
        for _ in 0..SAMPLES {
            let mut y = SymTensor::zero(2, r);
            for m in &monomials {
                let term = SymTensor::monomial(m, Padic::random_integer(p, n, rng));
                y = y.add(&term).unwrap_or(y);
            }
            y = y.add(&SymTensor::monomial(&monomials[0], Padic::one(p, n))).unwrap_or(y);
            if y.is_zero() {
                continue;
            }
            let a = Padic::random_unit(p, n, rng);
            match sqrt_ratio(&y.scale(&a), &y) {
                Ok(root) => margin = margin.min(root.root.agreement(&a)),
                Err(e) => return failed(e),
            }
            let bumped = y.scale(&a).add(&SymTensor::monomial(&monomials[r], Padic::one(p, n).shift(n / 2)));
            match bumped.map(|b| sqrt_ratio(&b, &y)) {
                Ok(Err(SymAlgError::NotProportional)) => {}
                _ => return Outcome::Fail(0, "perturbation not detected".into()),
            }
        }
        Outcome::Pass(margin)
    });
}

fn gz_suite(ctx: &Context, report: &mut Report) {
    let n = ctx.config.precision();
    let shape = &ctx.config.shape;
    let q = &ctx.invariant;
    timed(report, "gz.leading_term", || {
        let lhs = gz_leading_term(q, shape).and_then(|lead| {
            Ok(lift_piece(&lead).leading_term(q.r)?.scale(&Padic::from_i64(shape.prime(), 1 << q.r, n)))
        });
        let rhs = drec(&q.involution(shape), shape);
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => Outcome::Pass(l.agreement(&r).min(n)),
            (Err(e), _) | (_, Err(e)) => plectic_failure(e),
        }
    });
}

fn sign_suite(ctx: &Context, report: &mut Report) {
    timed(report, "sign.functional_equation", || {
        if ctx.invariant.is_zero() {
            return Outcome::Pass(ctx.config.precision());
        }
        match sign_check(&ctx.config, &ctx.invariant) {
            Ok(v) => Outcome::Pass(v.margin),
            Err(e) => plectic_failure(e),
        }
    });
}

fn factorization_suite(ctx: &Context, report: &mut Report) {
    timed(report, "factorization.identity", || {
        match factorization_check(&ctx.config, &ctx.local, &ctx.family, &ctx.invariant, ctx.scenario.floor) {
            Ok(v) => {
                let square = match v.c_is_rational_square {
                    Some(true) => "C is a rational square",
                    Some(false) => "C is not a rational square",
                    None => "",
                };
                match v.margin() {
                    m if m >= ctx.scenario.floor => Outcome::Pass(m),
                    m => Outcome::Fail(m, square.into()),
                }
            }
            Err(e) => plectic_failure(e),
        }
    });
}

fn algebraicity_suite(ctx: &Context, report: &mut Report) {
    timed(report, "algebraicity.identity", || {
        let root = match factorization_check(&ctx.config, &ctx.local, &ctx.family, &ctx.invariant, 0) {
            Ok(v) => v.sqrt_c,
            Err(e) => return Outcome::Fail(0, format!("no square root of C: {e}")),
        };
        match algebraicity_check(&ctx.config, &ctx.local, &ctx.family, &ctx.invariant, &root, ctx.scenario.floor) {
            Ok(v) => Outcome::Pass(v.margin()),
            Err(e) => plectic_failure(e),
        }
    });
}

/// Builds a scenario whose invariant is produced by the forward
/// factorization, so every suite passes. Units are drawn from `seed`,
/// `k_η = η`, `C = 9/4`, and literals carry `digits` p-adic digits.
pub fn forge_scenario(name: &str, t: u32, a_p: i64, seed: u64, digits: i64) -> Result<Scenario, ScenarioError> {
    let p = 5;
    let r = 1usize << t;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let units: Vec<QuadExt> = (0..r).map(|_| QuadExt::random_unit(p, digits, &mut rng)).collect();
    let torsion = vec![2];
    let mut scenario = Scenario {
        name: name.to_string(),
        prime: p,
        t,
        precision: digits,
        degree: 2 * r + 2,
        free_rank: r,
        floor: 30,
        suites: SUITES.iter().map(|s| s.to_string()).collect(),
        tate_period: PadicLiteral { valuation: 1, digits: vec![1] },
        a_p,
        epsilon: (-a_p).pow(r as u32) * if r.is_multiple_of(2) { 1 } else { -1 },
        torsion,
        chi: vec![1, 1],
        xi: vec![1, -1],
        table: character_table(t),
        twists: (0..r).collect(),
        c_chi: (9, 4),
        k: (1..=r as i64).map(|k| (k, 1)).collect(),
        units: units.iter().map(QuadLiteral::from_quad).collect(),
        coeffs: vec![PadicLiteral::zero(); 2],
    };
    let config = scenario.config()?;
    let local = LocalPoints::new(&config.curve).map_err(|e| invalid("curve", e.to_string()))?;
    let family = scenario.family()?;
    let root = Padic::from_ratio(p, 3, 2, digits).map_err(|e| invalid("family.c_chi", e.to_string()))?;
    let q = forward_invariant(&local, &family, a_p, &root, config.shape.order())
        .map_err(|e| invalid("family", e.to_string()))?;
    scenario.coeffs = q.coeffs.iter().map(PadicLiteral::from_padic).collect();
    scenario.precision = 40;
    scenario.validate()?;
    Ok(scenario)
}
