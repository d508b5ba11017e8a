//! Subcommand implementations. Each returns a rendered result or a failure.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use mfbwalk::characteristic::{root_derivatives, root_derivatives_at, roots_at};
use mfbwalk::homogeneous::*;
use mfbwalk::mc::{mc_run, EscapePolicy, McConfig};
use mfbwalk::modified::*;
use mfbwalk::verify::{kind_name, random_suite, verify_suite, OracleKind};
use mfbwalk::walk_model::*;

use crate::failure::Failure;
use crate::output::{num, record, scalar, state_vector, Rendered, ResultDocument, Table};
use crate::specfile::{parse_spec, LoadedSpec};

/// Environment variable overriding the default worker count.
pub const THREADS_ENV: &str = "MFBWALK_THREADS";

/// Inclusive state range written `A..B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateRange {
    pub lo: i64,
    pub hi: i64,
}

impl FromStr for StateRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..=")
            .or_else(|| s.split_once(".."))
            .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
        let lo: i64 = a.trim().parse().map_err(|e| format!("bad lower bound {a:?}: {e}"))?;
        let hi: i64 = b.trim().parse().map_err(|e| format!("bad upper bound {b:?}: {e}"))?;
        if lo > hi {
            return Err(format!("empty range {lo}..{hi}"));
        }
        Ok(Self { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Auto,
    System,
    Display,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Auto => Route::Auto,
            RouteArg::System => Route::System,
            RouteArg::Display => Route::Display,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Comb,
    Pgf,
    Dp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Dense,
    Dp,
    Mc,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SpecStart {
    /// Walk description (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Start state; defaults to the document's `start`.
    #[arg(long)]
    pub start: Option<i64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ArrivalsArgs {
    #[command(flatten)]
    pub base: SpecStart,
    /// Inclusive range of states to report; required on infinite domains.
    #[arg(long, allow_hyphen_values = true)]
    pub states: Option<StateRange>,
    /// Report the probability of ever reaching this state instead.
    #[arg(long)]
    pub hit: Option<i64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub route: RouteArg,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct AbsorbArgs {
    #[command(flatten)]
    pub base: SpecStart,
    #[arg(long, allow_hyphen_values = true)]
    pub states: Option<StateRange>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TimesArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Single start state.
    #[arg(long)]
    pub at: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub states: Option<StateRange>,
    #[arg(long, value_enum, default_value = "auto")]
    pub route: RouteArg,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub s: f64,
}

impl RegimeArgs {
    fn params(&self) -> Result<PqrsParams, Failure> {
        let p = PqrsParams::new(self.p, self.q, self.r, self.s);
        p.ensure_valid()?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct NstepArgs {
    #[command(flatten)]
    pub regime: RegimeArgs,
    /// Number of steps.
    #[arg(short = 'n')]
    pub n: usize,
    #[arg(long, value_enum, default_value = "comb")]
    pub method: MethodArg,
    /// Report only the displacement `k`.
    #[arg(long)]
    pub k: Option<i64>,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    #[command(flatten)]
    pub regime: RegimeArgs,
    #[arg(long, default_value_t = 1.0)]
    pub z: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub base: SpecStart,
    #[arg(long)]
    pub replicas: u64,
    #[arg(long)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// States whose visit counts are estimated.
    #[arg(long, allow_hyphen_values = true)]
    pub states: Option<StateRange>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["spec", "random_suite"]))]
pub struct VerifyArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Verify a generated suite of this many walks.
    #[arg(long)]
    pub random_suite: Option<usize>,
    #[arg(long, value_enum, default_value = "dense")]
    pub oracle: OracleArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn start_of(loaded: &LoadedSpec, start: Option<i64>) -> Result<i64, Failure> {
    let i0 = start
        .or(loaded.file.start)
        .ok_or_else(|| Failure::usage("no start state: pass --start or set \"start\" in the spec"))?;
    if !loaded.spec.contains(i0) {
        return Err(Failure::validation("start", format!("start {i0} lies outside the domain")));
    }
    Ok(i0)
}

/// States to report: the whole interval on `[0, N]`, else `--states`.
fn states_of(spec: &WalkSpec, states: Option<StateRange>) -> Result<(i64, i64), Failure> {
    let r = match (states, spec.lower(), spec.upper()) {
        (Some(r), _, _) => r,
        (None, Some(lo), Some(hi)) => StateRange { lo, hi },
        (None, _, _) => {
            return Err(Failure::usage(
                "--states A..B is required for vector output on an infinite domain",
            ))
        }
    };
    if !spec.contains(r.lo) || !spec.contains(r.hi) {
        return Err(Failure::usage(format!("--states {}..{} leaves the domain", r.lo, r.hi)));
    }
    Ok((r.lo, r.hi))
}

fn document(command: &'static str, quantity: &str, loaded: Option<&LoadedSpec>, parameters: Value) -> ResultDocument {
    ResultDocument {
        command,
        quantity: quantity.to_string(),
        spec: loaded.map(|l| l.file.clone()),
        parameters,
        provenance: String::new(),
        tolerance: None,
        values: Value::Null,
    }
}

/// Occupancy from `i0` as a function of the state.
struct Occ {
    at: Box<dyn Fn(i64) -> f64>,
    provenance: Provenance,
}

fn occupancy(spec: &WalkSpec, i0: i64, route: Route) -> Result<Occ, Failure> {
    fn boxed(o: impl Occupancy + 'static) -> Occ {
        let provenance = o.provenance();
        Occ {
            at: Box::new(move |n| o.at(n)),
            provenance,
        }
    }
    fn profile(p: ArrivalProfile) -> Occ {
        let provenance = p.provenance;
        Occ {
            at: Box::new(move |n| p.get(n).unwrap_or(0.0)),
            provenance,
        }
    }
    Ok(match spec {
        WalkSpec::Finite(s) => profile(finite_arrivals(s, i0)?),
        WalkSpec::HalfLine(s) => boxed(halfline_arrivals(s, i0)?),
        WalkSpec::FullLine(s) => boxed(fullline_profile(s, i0)?),
        WalkSpec::ModifiedFinite(s) => profile(mfinite_arrivals_via(s, i0, route)?),
        WalkSpec::ModifiedHalfLine(s) => boxed(mhalfline_arrivals(s, i0)?),
        WalkSpec::ModifiedFullLine(s) => boxed(mfullline_arrivals_via(s, i0, route)?),
    })
}

fn hit_probability(spec: &WalkSpec, i: i64, j: i64, route: Route) -> Result<(f64, Provenance), Failure> {
    let closed = match spec {
        WalkSpec::Finite(s) => Some(finite_arrival_probability(s, i, j)?),
        WalkSpec::HalfLine(s) => Some(halfline_arrival_probability(s, i, j)?),
        WalkSpec::FullLine(s) => Some(fullline_arrival_probability(s, i, j)?),
        _ => None,
    };
    if let Some(f) = closed {
        return Ok((f, Provenance::ClosedForm));
    }
    let from_i = occupancy(spec, i, route)?;
    let xjj = if i == j { (from_i.at)(j) } else { (occupancy(spec, j, route)?.at)(j) };
    let f = if i == j { 1.0 - 1.0 / xjj } else { (from_i.at)(j) / xjj };
    Ok((f, from_i.provenance))
}

pub fn arrivals(args: &ArrivalsArgs) -> Result<Rendered, Failure> {
    let loaded = parse_spec(&args.base.spec)?;
    let i0 = start_of(&loaded, args.base.start)?;
    let route = Route::from(args.route);
    if let Some(j) = args.hit {
        if !loaded.spec.contains(j) {
            return Err(Failure::validation("hit", format!("state {j} lies outside the domain")));
        }
        let (f, prov) = hit_probability(&loaded.spec, i0, j, route)?;
        let mut doc = document("arrivals", "hit_probability", Some(&loaded), json!({ "start": i0, "target": j }));
        let (values, table) = scalar("hit_probability", f);
        doc.values = values;
        doc.provenance = prov.as_str().into();
        return Ok(Rendered { doc, table });
    }
    let (lo, hi) = states_of(&loaded.spec, args.states)?;
    let occ = occupancy(&loaded.spec, i0, route)?;
    let rows: Vec<(i64, f64)> = (lo..=hi).map(|n| (n, (occ.at)(n))).collect();
    let mut doc = document("arrivals", "expected_arrivals", Some(&loaded), json!({ "start": i0 }));
    let (values, table) = state_vector(&rows);
    doc.values = values;
    doc.provenance = occ.provenance.as_str().into();
    Ok(Rendered { doc, table })
}

/// Long-format rows `quantity,state,value`.
struct Long {
    table: Table,
}

impl Long {
    fn new() -> Self {
        Self {
            table: Table::new(&["quantity", "state", "value"]),
        }
    }

    fn add(&mut self, quantity: &str, state: Option<i64>, v: f64) {
        self.table
            .push(vec![quantity.into(), state.map_or(String::new(), |s| s.to_string()), num(v)]);
    }
}

pub fn absorb(args: &AbsorbArgs) -> Result<Rendered, Failure> {
    let loaded = parse_spec(&args.base.spec)?;
    let spec = &loaded.spec;
    let i0 = start_of(&loaded, args.base.start)?;
    let range = match (args.states, spec.lower(), spec.upper()) {
        (None, lo, hi) if lo.is_none() || hi.is_none() => None,
        (r, _, _) => Some(states_of(spec, r)?),
    };

    let (mean, provenance) = match spec {
        WalkSpec::Finite(s) => {
            let a = finite_absorption(s, i0)?;
            (a.mean_time, a.provenance)
        }
        WalkSpec::HalfLine(s) => (halfline_absorption_time(s, i0)?, Provenance::ClosedForm),
        WalkSpec::FullLine(s) => (fullline_absorption(s)?, Provenance::ClosedForm),
        WalkSpec::ModifiedFinite(s) => {
            let a = mfinite_absorption(s, i0)?;
            (a.mean_time, a.provenance)
        }
        WalkSpec::ModifiedHalfLine(s) => mhalfline_absorption_time_traced(s, i0, Route::Auto)?,
        WalkSpec::ModifiedFullLine(s) => mfullline_absorption_time_traced(s, i0, Route::Auto)?,
    };
    let defective = |j: i64| -> Result<Option<f64>, Failure> {
        Ok(match spec {
            WalkSpec::Finite(s) => finite_absorption(s, i0)?
                .defective_times
                .map(|d| d[j as usize]),
            WalkSpec::HalfLine(s) => Some(halfline_defective_time(s, i0, j)?),
            WalkSpec::FullLine(s) => Some(fullline_defective_time(s, j - i0)?),
            _ => None,
        })
    };

    let mut long = Long::new();
    long.add("mean_time", None, mean);
    let mut values = serde_json::Map::new();
    values.insert("mean_time".into(), json!(mean));
    if let Some((lo, hi)) = range {
        let occ = occupancy(spec, i0, Route::Auto)?;
        let finite_domain = spec.upper().is_some() && spec.lower().is_some();
        let mut total = 0.0;
        let mut states = Vec::new();
        for j in lo..=hi {
            let p = spec.site(j).absorb * (occ.at)(j);
            total += p;
            long.add("probability", Some(j), p);
            let mut entry = json!({ "state": j, "probability": p });
            if let Some(d) = defective(j)? {
                long.add("defective_time", Some(j), d);
                entry["defective_time"] = json!(d);
            }
            states.push(entry);
        }
        let key = if finite_domain { "total_probability" } else { "range_probability" };
        long.add(key, None, total);
        values.insert(key.into(), json!(total));
        values.insert("states".into(), Value::Array(states));
    }
    let mut doc = document("absorb", "absorption", Some(&loaded), json!({ "start": i0 }));
    doc.values = Value::Object(values);
    doc.provenance = provenance.as_str().into();
    Ok(Rendered { doc, table: long.table })
}

pub fn times(args: &TimesArgs) -> Result<Rendered, Failure> {
    let loaded = parse_spec(&args.spec)?;
    let spec = &loaded.spec;
    let route = Route::from(args.route);
    let mut doc = document("times", "mean_absorption_time", Some(&loaded), Value::Null);

    if let WalkSpec::FullLine(s) = spec {
        // Position independent.
        let (values, table) = scalar("m", fullline_absorption(s)?);
        doc.values = values;
        doc.provenance = Provenance::ClosedForm.as_str().into();
        return Ok(Rendered { doc, table });
    }
    let m_at = |i: i64| -> Result<(f64, Provenance), Failure> {
        Ok(match spec {
            WalkSpec::Finite(s) => {
                let a = finite_absorption(s, i)?;
                (a.mean_time, a.provenance)
            }
            WalkSpec::HalfLine(s) => (halfline_absorption_time(s, i)?, Provenance::ClosedForm),
            WalkSpec::ModifiedFinite(s) => (mfinite_absorption(s, i)?.mean_time, Provenance::ProofSystem),
            WalkSpec::ModifiedHalfLine(s) => mhalfline_absorption_time_traced(s, i, route)?,
            WalkSpec::ModifiedFullLine(s) => mfullline_absorption_time_traced(s, i, route)?,
            WalkSpec::FullLine(_) => unreachable!(),
        })
    };
    if let Some(i) = args.at {
        if !spec.contains(i) {
            return Err(Failure::validation("at", format!("state {i} lies outside the domain")));
        }
        let (m, prov) = m_at(i)?;
        doc.parameters = json!({ "at": i });
        let (values, table) = scalar("m", m);
        doc.values = values;
        doc.provenance = prov.as_str().into();
        return Ok(Rendered { doc, table });
    }
    let (lo, hi) = states_of(spec, args.states)?;
    let mut rows = Vec::new();
    let mut provs = Vec::new();
    for i in lo..=hi {
        let (m, prov) = m_at(i)?;
        rows.push((i, m));
        if !provs.contains(&prov) {
            provs.push(prov);
        }
    }
    let (values, table) = state_vector(&rows);
    doc.values = values;
    doc.provenance = provs.iter().map(|p| p.as_str()).collect::<Vec<_>>().join("+");
    Ok(Rendered { doc, table })
}

pub fn nstep(args: &NstepArgs) -> Result<Rendered, Failure> {
    let params = args.regime.params()?;
    let (method, prov) = match args.method {
        MethodArg::Comb => (NstepMethod::Comb, "closed-form (combinatorial)"),
        MethodArg::Pgf => (NstepMethod::Pgf, "closed-form (generating function)"),
        MethodArg::Dp => (NstepMethod::Dp, "dp"),
    };
    let dist = nstep_distribution(&params, args.n, method)?;
    let n = args.n as i64;
    let mut doc = document(
        "nstep",
        "step_distribution",
        None,
        json!({ "p": params.p, "q": params.q, "r": params.r, "s": params.s, "n": args.n, "method": format!("{:?}", args.method).to_lowercase() }),
    );
    doc.provenance = prov.into();
    if let Some(k) = args.k {
        let (values, table) = scalar("probability", dist.at(k));
        doc.quantity = "step_probability".into();
        doc.parameters["k"] = json!(k);
        doc.values = values;
        return Ok(Rendered { doc, table });
    }
    let mut table = Table::new(&["k", "value"]);
    let probs: Vec<Value> = (-n..=n)
        .map(|k| {
            table.push(vec![k.to_string(), num(dist.at(k))]);
            json!({ "k": k, "value": dist.at(k) })
        })
        .collect();
    doc.values = json!({ "survival": dist.survival(), "absorbed": dist.absorbed, "distribution": probs });
    Ok(Rendered { doc, table })
}

pub fn roots(args: &RootsArgs) -> Result<Rendered, Failure> {
    let params = args.regime.params()?;
    let r = roots_at(&params, args.z)?;
    let d = if args.z == 1.0 {
        root_derivatives(&params)?
    } else {
        root_derivatives_at(&params, args.z)?
    };
    let mut doc = document(
        "roots",
        "characteristic_roots",
        None,
        json!({ "p": params.p, "q": params.q, "r": params.r, "s": params.s, "z": args.z }),
    );
    let (values, table) = record(&[
        ("xi1", r.xi1),
        ("xi2", r.xi2),
        ("zeta", r.zeta),
        ("lambda", r.lambda),
        ("dxi1", d.dxi1),
        ("dxi2", d.dxi2),
        ("dzeta", d.dzeta),
    ]);
    doc.values = values;
    doc.provenance = Provenance::ClosedForm.as_str().into();
    Ok(Rendered { doc, table })
}

pub fn escape(args: &SpecStart) -> Result<Rendered, Failure> {
    let loaded = parse_spec(&args.spec)?;
    let i0 = start_of(&loaded, args.start)?;
    let WalkSpec::ModifiedFullLine(s) = &loaded.spec else {
        return Err(Failure::validation("domain", "escape needs a modified full-line walk"));
    };
    let e = mfullline_escape(s, i0)?;
    let mut doc = document("escape", "escape_probabilities", Some(&loaded), json!({ "start": i0 }));
    let (values, table) = record(&[("absorbed", e.absorbed), ("plus_infinity", e.plus), ("minus_infinity", e.minus)]);
    doc.values = values;
    doc.provenance = Provenance::ClosedForm.as_str().into();
    Ok(Rendered { doc, table })
}

fn default_workers() -> Result<usize, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<Rendered, Failure> {
    let loaded = parse_spec(&args.base.spec)?;
    let i0 = start_of(&loaded, args.base.start)?;
    let workers = match args.workers {
        Some(w) => w,
        None => default_workers()?,
    };
    let mut cfg = McConfig::new(args.replicas, args.seed).workers(workers);
    if let WalkSpec::ModifiedFullLine(s) = &loaded.spec {
        if s.pos_regime.s == 0.0 && s.neg_regime.s == 0.0 {
            cfg = cfg.escape(EscapePolicy::standard());
        }
    }
    if let Some(r) = args.states {
        cfg = cfg.visit_window(r.lo, r.hi);
    }
    let report = mc_run(&loaded.spec, i0, &cfg)?;

    let mut table = Table::new(&["quantity", "state", "mean", "std_error"]);
    let mut row = |q: &str, state: Option<i64>, mean: f64, se: f64| {
        table.push(vec![q.into(), state.map_or(String::new(), |s| s.to_string()), num(mean), num(se)]);
    };
    for a in &report.absorption {
        row("absorption", Some(a.state), a.estimate.mean, a.estimate.std_error);
    }
    if let Some(m) = report.mean_time {
        row("mean_time", None, m.mean, m.std_error);
    }
    for v in &report.visits {
        row("visits", Some(v.state), v.estimate.mean, v.estimate.std_error);
    }
    if let Some(e) = report.escape {
        row("absorbed", None, e.absorbed.mean, e.absorbed.std_error);
        row("plus_infinity", None, e.plus.mean, e.plus.std_error);
        row("minus_infinity", None, e.minus.mean, e.minus.std_error);
    }
    // Worker count is deliberately left out: the output must not depend on it.
    let mut doc = document(
        "simulate",
        "monte_carlo",
        Some(&loaded),
        json!({ "start": i0, "replicas": args.replicas, "seed": args.seed }),
    );
    doc.values = serde_json::to_value(&report).map_err(|e| Failure::usage(e.to_string()))?;
    doc.provenance = Provenance::MonteCarlo.as_str().into();
    Ok(Rendered { doc, table })
}

/// The rendered report, and whether every check passed.
pub fn verify(args: &VerifyArgs) -> Result<(Rendered, bool), Failure> {
    let (specs, loaded) = match (&args.spec, args.random_suite) {
        (Some(path), _) => {
            let l = parse_spec(path)?;
            (vec![l.spec], Some(l))
        }
        (None, Some(count)) => (random_suite(args.seed, count), None),
        (None, None) => return Err(Failure::usage("pass --spec or --random-suite")),
    };
    if !(args.tol > 0.0) {
        return Err(Failure::usage("--tol must be positive"));
    }
    let oracle = match args.oracle {
        OracleArg::Dense => OracleKind::Dense,
        OracleArg::Dp => OracleKind::Dp,
        OracleArg::Mc => OracleKind::Mc,
    };
    let report = verify_suite(&specs, oracle, args.tol, args.seed);

    let mut table = Table::new(&["spec", "kind", "quantity", "deviation", "tolerance", "passed"]);
    for o in &report.specs {
        table.push(vec![
            o.spec.to_string(),
            o.kind.clone(),
            "worst".into(),
            num(o.worst),
            num(report.tolerance),
            o.passed.to_string(),
        ]);
    }
    for c in &report.failures {
        table.push(vec![
            c.spec.to_string(),
            kind_name(&specs[c.spec]).into(),
            c.quantity.clone(),
            num(c.deviation),
            num(c.tolerance),
            "false".into(),
        ]);
    }
    let mut doc = document(
        "verify",
        "verification",
        loaded.as_ref(),
        json!({ "oracle": oracle, "seed": args.seed, "specs": specs.len(), "random_suite": args.random_suite }),
    );
    doc.tolerance = Some(report.tolerance);
    doc.provenance = match oracle {
        OracleKind::Dense => "dense-oracle",
        OracleKind::Dp => "dp",
        OracleKind::Mc => "monte-carlo",
    }
    .into();
    let passed = report.passed();
    doc.values = json!({
        "passed": passed,
        "failures": report.failures,
        "specs": report.specs,
    });
    Ok((Rendered { doc, table }, passed))
}
