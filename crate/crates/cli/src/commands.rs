use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};

use qjets::bounds::{check_loop_lemma, check_totneg_lemma_capped, dim_r_double, dim_x, mustata_ledger, Dimensions};
use qjets::cache::CountCache;
use qjets::count::{count_multiplicative_fiber, normalized_sequence, rational_json, CountOptions, Method};
use qjets::forms::{fundamental_domain_contains, is_totally_negative};
use qjets::graph::bridges;
use qjets::mukai::{
    cross_check_gloop, ext_quiver_from_mukai, is_positive, is_primitive, parse_vectors, sym_form_identity_check,
    NsLattice,
};
use qjets::simple::{has_property_p, simple_module_exists};
use qjets::strata::{
    aux_quiver, enumerate_semisimple_types, sort_by_stabilizer, OraclePolicy, SemisimpleType, DEFAULT_TOP_TYPE_CAP,
    DEFAULT_TYPE_CAP,
};
use qjets::suite::{criterion_ids, run_criterion};
use qjets::{DimVector, Quiver};

use crate::manifest::{sha256_file, RunManifest};
use crate::{Command, Global};

/// A command's JSON body, optional CSV rendering and the invariants it
/// asserted.
pub struct Report {
    pub command: &'static str,
    pub params: Value,
    pub body: Map<String, Value>,
    pub csv: Option<String>,
    pub assertions: Vec<(String, bool)>,
}

impl Report {
    fn new(command: &'static str, params: Value) -> Self {
        Report { command, params, body: Map::new(), csv: None, assertions: Vec::new() }
    }

    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.body.insert(key.to_string(), value.into());
    }

    fn assert(&mut self, name: impl Into<String>, holds: bool) {
        self.assertions.push((name.into(), holds));
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|(_, ok)| *ok)
    }

    pub fn json(&self) -> Value {
        let mut out = Map::new();
        out.insert("command".into(), json!(self.command));
        out.insert("params".into(), self.params.clone());
        out.extend(self.body.clone());
        let asserted: Map<String, Value> = self.assertions.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        out.insert("assertions".into(), Value::Object(asserted));
        out.insert("passed".into(), json!(self.passed()));
        Value::Object(out)
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub quiver: PathBuf,
    /// `v1=2,v2=1` or positional `2,1`.
    #[arg(long)]
    pub dim: String,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Policy {
    Strict,
    Permissive,
}

#[derive(Args, Debug)]
pub struct TypesArgs {
    pub quiver: PathBuf,
    #[arg(long)]
    pub dim: String,
    #[arg(long, value_enum, default_value_t = Policy::Strict)]
    pub policy: Policy,
    #[arg(long, default_value_t = DEFAULT_TYPE_CAP)]
    pub cap: usize,
    /// Order by stabilizer dimension, largest first.
    #[arg(long)]
    pub by_stabilizer: bool,
}

#[derive(Args, Debug)]
pub struct AuxArgs {
    pub quiver: PathBuf,
    /// Semisimple type JSON file, or the JSON itself.
    #[arg(long = "type")]
    pub tau: String,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    pub quiver: PathBuf,
    #[arg(long)]
    pub dim: String,
    /// Also check the loop lemma at `g,d`.
    #[arg(long)]
    pub loop_lemma: Option<String>,
    /// Replay the jet-dimension ledger for m up to this value.
    #[arg(long)]
    pub ledger: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_TOP_TYPE_CAP)]
    pub cap: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum MethodArg {
    Kernel,
    Brute,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Kernel => Method::Kernel,
            MethodArg::Brute => Method::Brute,
        }
    }
}

#[derive(Args, Debug)]
pub struct CountArgs {
    pub quiver: PathBuf,
    #[arg(long)]
    pub dim: String,
    #[arg(long)]
    pub q: u64,
    /// Largest truncation order; counts n = 1..=N.
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Kernel)]
    pub method: MethodArg,
    /// Maximum number of enumerated points per count.
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Args, Debug)]
pub struct MpaCountArgs {
    pub quiver: PathBuf,
    #[arg(long)]
    pub dim: String,
    #[arg(long)]
    pub q: u64,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Scalar per vertex, `v1=1,v2=2` or positional.
    #[arg(long)]
    pub alpha: String,
    /// Arrow indices in product order, e.g. `1,0`.
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ExtquiverArgs {
    /// Gram matrix of the divisor lattice as JSON; defaults to rank zero.
    #[arg(long)]
    pub gram: Option<String>,
    /// `(r,(c...),a);(r,(c...),a)`.
    #[arg(long)]
    pub vectors: Option<String>,
    /// Treat every divisor component as effective when judging positivity.
    #[arg(long)]
    pub effective: bool,
    /// Compare against the auxiliary quiver of the g-loop quiver.
    #[arg(long)]
    pub check_gloop: Option<u32>,
    /// Multiples of the genus vector for the g-loop check.
    #[arg(long, requires = "check_gloop")]
    pub m: Option<String>,
    /// Multiplicities for the g-loop check (default all 1).
    #[arg(long, requires = "check_gloop")]
    pub e: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub identity_trials: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Level {
    Desk,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    #[arg(long, value_enum, default_value_t = Level::Desk)]
    pub level: Level,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub criterion: Vec<u32>,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Files a command reads, for the manifest.
pub fn inputs(cmd: &Command) -> Vec<PathBuf> {
    match cmd {
        Command::Check(a) => vec![a.quiver.clone()],
        Command::Types(a) => vec![a.quiver.clone()],
        Command::Aux(a) => {
            let mut v = vec![a.quiver.clone()];
            if Path::new(&a.tau).is_file() {
                v.push(PathBuf::from(&a.tau));
            }
            v
        }
        Command::Bounds(a) => vec![a.quiver.clone()],
        Command::Count(a) => vec![a.quiver.clone()],
        Command::MpaCount(a) => vec![a.quiver.clone()],
        Command::Replay(a) => vec![a.manifest.clone()],
        Command::Extquiver(_) | Command::Suite(_) => Vec::new(),
    }
}

fn load_quiver(path: &Path) -> anyhow::Result<Quiver> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Quiver::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_pair(path: &Path, dim: &str) -> anyhow::Result<(Quiver, DimVector)> {
    let q = load_quiver(path)?;
    let d = DimVector::parse_text(&q, dim).context("parsing --dim")?;
    Ok((q, d))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> anyhow::Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| anyhow::anyhow!("{what}: `{s}` is not a valid number")))
        .collect()
}

fn count_options(global: &Global, budget: Option<u64>) -> CountOptions {
    let mut opts = global.threads.map_or_else(CountOptions::default, CountOptions::with_threads);
    if let Some(b) = budget {
        opts.budget = b;
    }
    opts
}

pub fn execute(cmd: &Command, global: &Global) -> anyhow::Result<Report> {
    match cmd {
        Command::Check(a) => check(a),
        Command::Types(a) => types(a),
        Command::Aux(a) => aux(a),
        Command::Bounds(a) => bounds(a),
        Command::Count(a) => count(a, global),
        Command::MpaCount(a) => mpa_count(a, global),
        Command::Extquiver(a) => extquiver(a),
        Command::Suite(a) => suite(a, global),
        Command::Replay(a) => replay(a),
    }
}

fn check(a: &CheckArgs) -> anyhow::Result<Report> {
    let (q, d) = load_pair(&a.quiver, &a.dim)?;
    let mut r = Report::new("check", json!({"dim": d.to_json(&q)}));
    let tn = is_totally_negative(&q);
    let simple = simple_module_exists(&q, &d)?;
    let br: Vec<Value> = bridges(&q)?
        .into_iter()
        .map(|k| {
            let arrow = q.arrows()[k];
            json!({"arrow": k, "src": q.vertices()[arrow.src], "tgt": q.vertices()[arrow.tgt]})
        })
        .collect();
    r.set("quiver_hash", q.canonical_hash());
    r.set("totally_negative", tn.totally_negative);
    r.set("witness", serde_json::to_value(tn.witness)?);
    r.set("property_P", has_property_p(&q, &d)?);
    r.set("fundamental_domain", fundamental_domain_contains(&q, &d)?);
    r.set("simple_exists", serde_json::to_value(simple)?);
    r.set("bridges", br);
    Ok(r)
}

fn types(a: &TypesArgs) -> anyhow::Result<Report> {
    let (q, d) = load_pair(&a.quiver, &a.dim)?;
    let policy = match a.policy {
        Policy::Strict => OraclePolicy::Strict,
        Policy::Permissive => OraclePolicy::Permissive,
    };
    let mut list = enumerate_semisimple_types(&q, &d, policy, a.cap)?;
    if a.by_stabilizer {
        sort_by_stabilizer(&mut list);
    }
    let mut r = Report::new(
        "types",
        json!({"dim": d.to_json(&q), "policy": format!("{:?}", a.policy).to_lowercase(), "cap": a.cap, "by_stabilizer": a.by_stabilizer}),
    );
    r.set("quiver_hash", q.canonical_hash());
    r.set("count", list.len());
    r.set(
        "types",
        list.iter().map(|t| json!({"type": t.to_json(&q), "stabilizer_dim": t.stabilizer_dim()})).collect::<Vec<_>>(),
    );
    Ok(r)
}

fn aux(a: &AuxArgs) -> anyhow::Result<Report> {
    let q = load_quiver(&a.quiver)?;
    let text = if Path::new(&a.tau).is_file() {
        std::fs::read_to_string(&a.tau).with_context(|| format!("reading {}", a.tau))?
    } else {
        a.tau.clone()
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| qjets::Error::Parse(format!("--type: {e}")))?;
    let tau = SemisimpleType::from_json(&q, &value)?;
    let (aq, e) = aux_quiver(&q, &tau)?;
    let mut r = Report::new("aux", json!({"type": tau.to_json(&q)}));
    r.set("quiver_hash", q.canonical_hash());
    r.set("aux_quiver", aq.to_json());
    r.set("aux_hash", aq.canonical_hash());
    r.set("e", e.to_json(&aq));
    r.set("totally_negative", is_totally_negative(&aq).totally_negative);
    r.set("property_P", has_property_p(&aq, &e)?);
    Ok(r)
}

fn bounds(a: &BoundsArgs) -> anyhow::Result<Report> {
    let (q, d) = load_pair(&a.quiver, &a.dim)?;
    let mut r = Report::new(
        "bounds",
        json!({"dim": d.to_json(&q), "loop_lemma": a.loop_lemma, "ledger": a.ledger, "cap": a.cap}),
    );
    r.set("quiver_hash", q.canonical_hash());
    let dims = Dimensions::of(&q, &d)?;
    let dd: u64 = d.entries().iter().map(|&x| u64::from(x).pow(2)).sum();
    r.assert("sum_identity", dims.sum_identity_holds());
    r.assert("codim_identity", dim_r_double(&q, &d)? - dim_x(&q, &d)? == num_bigint::BigInt::from(dd) - 1);
    r.set("dimensions", dims.to_json());
    if !dims.property_p {
        r.set("totneg_lemma", json!({"skipped": "(Q, d) does not have property (P)"}));
    } else if d.is_ones_on_support() {
        r.set("totneg_lemma", json!({"skipped": "d is one on its support"}));
    } else {
        let (report, sq) = check_totneg_lemma_capped(&q, &d, a.cap)?;
        r.assert("totneg_lemma", report.verdict);
        r.assert("remainder", report.remainder.holds);
        r.assert("decomposition", report.decomposition_exact);
        r.set("totneg_lemma", report.to_json(&sq));
    }
    if let Some(text) = &a.loop_lemma {
        let gd: Vec<u32> = parse_list(text, "--loop-lemma")?;
        let [g, dl] = gd[..] else { bail!("--loop-lemma expects `g,d`") };
        let report = check_loop_lemma(g, dl)?;
        r.assert("loop_lemma", report.verdict);
        r.set("loop_lemma", report.to_json());
    }
    if let Some(m) = a.ledger {
        let ledger = mustata_ledger(&q, &d, m)?;
        r.assert("ledger", ledger.verdict);
        r.set("mustata_ledger", ledger.to_json());
    }
    Ok(r)
}

fn count(a: &CountArgs, global: &Global) -> anyhow::Result<Report> {
    let (q, d) = load_pair(&a.quiver, &a.dim)?;
    let opts = count_options(global, a.budget);
    let cache = global.cache.as_ref().map(CountCache::open).transpose()?;
    let method = Method::from(a.method);
    let seq = normalized_sequence(&q, &d, a.q, a.n, method, opts, cache.as_ref())?;
    let mut r = Report::new(
        "count",
        json!({"dim": d.to_json(&q), "q": a.q, "n": a.n, "method": method.as_str(), "budget": opts.budget}),
    );
    r.set("quiver_hash", q.canonical_hash());
    r.set("records", seq.records.iter().map(|rec| rec.to_json(&q)).collect::<Vec<_>>());
    r.set("differences", seq.differences.iter().map(rational_json).collect::<Vec<_>>());
    r.set("strictly_increasing", seq.strictly_increasing());
    r.set("differences_contract", seq.differences_contract());
    let mut csv = String::from("n,count,normalized_num,normalized_den\n");
    for rec in &seq.records {
        csv.push_str(&format!("{},{},{},{}\n", rec.n, rec.count, rec.normalized.numer(), rec.normalized.denom()));
    }
    r.csv = Some(csv);
    Ok(r)
}

fn mpa_count(a: &MpaCountArgs, global: &Global) -> anyhow::Result<Report> {
    let (q, d) = load_pair(&a.quiver, &a.dim)?;
    let alpha = DimVector::parse_text(&q, &a.alpha).context("parsing --alpha")?;
    alpha.check_against(&q)?;
    let alpha_u: Vec<u64> = alpha.entries().iter().map(|&x| u64::from(x)).collect();
    let order: Option<Vec<usize>> = a.order.as_deref().map(|t| parse_list(t, "--order")).transpose()?;
    let opts = count_options(global, a.budget);
    let count = count_multiplicative_fiber(&q, &d, a.q, &alpha_u, a.n, order.as_deref(), opts)?;
    let mut r = Report::new(
        "mpa-count",
        json!({"dim": d.to_json(&q), "q": a.q, "n": a.n, "alpha": alpha.to_json(&q), "order": order, "budget": opts.budget}),
    );
    r.set("quiver_hash", q.canonical_hash());
    r.set("count", count.to_string());
    Ok(r)
}

fn extquiver(a: &ExtquiverArgs) -> anyhow::Result<Report> {
    let mut r = Report::new(
        "extquiver",
        json!({"gram": a.gram, "vectors": a.vectors, "effective": a.effective, "check_gloop": a.check_gloop, "m": a.m, "e": a.e}),
    );
    if a.vectors.is_none() && a.check_gloop.is_none() {
        bail!("extquiver needs --vectors or --check-gloop");
    }
    if let Some(text) = &a.vectors {
        let lattice = match &a.gram {
            Some(g) => NsLattice::parse(g)?,
            None => NsLattice::trivial(),
        };
        let vectors = parse_vectors(text, &lattice)?;
        let ext = ext_quiver_from_mukai(&vectors, &lattice)?;
        let per_vector = vectors
            .iter()
            .map(|v| {
                Ok(json!({
                    "vector": v.to_json(),
                    "primitive": is_primitive(v),
                    "positive": is_positive(v, &lattice, a.effective)?,
                }))
            })
            .collect::<qjets::Result<Vec<_>>>()?;
        r.set("vectors", per_vector);
        r.set("underlying_hash", ext.underlying.canonical_hash());
        r.set("ext_quiver", ext.to_json());
        r.set("verdict", ext.totally_negative);
        r.assert("verdict_matches_structure", ext.totally_negative == is_totally_negative(&ext.underlying).totally_negative);
        r.assert("sym_form_identity", sym_form_identity_check(&vectors, &lattice, a.identity_trials, 0)?);
    }
    if let Some(g) = a.check_gloop {
        let Some(m_text) = &a.m else { bail!("--check-gloop needs --m") };
        let m: Vec<u32> = parse_list(m_text, "--m")?;
        let e: Vec<u32> = match &a.e {
            Some(t) => parse_list(t, "--e")?,
            None => vec![1; m.len()],
        };
        let c = cross_check_gloop(g, &m, &e)?;
        r.set(
            "gloop_check",
            json!({"g": g, "m": m, "e": e, "ext_counts": c.ext_counts, "aux_counts": c.aux_counts, "formula_counts": c.formula_counts, "equal": c.equal}),
        );
        r.assert("gloop_equal", c.equal);
    }
    Ok(r)
}

fn suite(a: &SuiteArgs, global: &Global) -> anyhow::Result<Report> {
    let ids = if a.criterion.is_empty() { criterion_ids() } else { a.criterion.clone() };
    let opts = count_options(global, None);
    let mut r = Report::new("suite", json!({"level": format!("{:?}", a.level).to_lowercase(), "criteria": ids}));
    let mut results = Vec::new();
    for id in ids {
        let Some(res) = run_criterion(id, opts) else { bail!("unknown criterion {id}") };
        eprintln!("{}", res.line());
        r.assert(format!("criterion_{id}"), res.passed);
        results.push(res.to_json());
    }
    r.set("results", results);
    Ok(r)
}

fn replay(a: &ReplayArgs) -> anyhow::Result<Report> {
    let m = RunManifest::read(&a.manifest)?;
    let mut r = Report::new("replay", json!({"manifest": a.manifest.display().to_string()}));
    let mut inputs_match = true;
    for input in &m.inputs {
        let now = sha256_file(Path::new(&input.path)).ok();
        inputs_match &= now.as_deref() == Some(input.sha256.as_str());
    }
    let mut argv = vec!["qjets".to_string()];
    argv.extend(m.argv.iter().cloned());
    let (bytes, passed, _) = crate::run(&argv)?;
    let digest = crate::manifest::sha256_bytes(&bytes);
    r.set("replayed_command", m.command.clone());
    r.set("output_sha256", digest.clone());
    r.assert("inputs_match", inputs_match);
    r.assert("output_matches", digest == m.output.sha256);
    r.assert("replayed_passed", passed);
    Ok(r)
}
