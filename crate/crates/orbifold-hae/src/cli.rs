//! Command-line front end: configuration, caching, subcommand dispatch and
//! the one-shot `verify-all` run.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails
//! (or a computation breaks down), 2 for usage and configuration errors.

use crate::cache::Cache;
use crate::cohft::{
    self, gw_expansion, potential_json, required_depth, t_derivative, Convention, GraphStore, GraphSum, HaeOptions,
    Potential, SeriesSide, Symbolic, VertexConvention,
};
use crate::cyclo::Cyc;
use crate::field::{q, q_from_str, qi, Field};
use crate::freering::Poly;
use crate::graphs;
use crate::intnum::PsiCache;
use crate::mirror::{build_all, MirrorData};
use crate::report::{all_pass, render, Check};
use crate::rmatrix::{FrobeniusData, Poison, RSeries, RTable};
use crate::series::coeff_json;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::path::PathBuf;

// stdout writes ignore errors, so a closed pipe (`| head`) ends output quietly
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

#[derive(Parser, Debug)]
#[command(name = "orbifold-hae", version, about = "Exact graph-sum potentials of [C^5/Z_5] and their anomaly equations")]
pub struct Cli {
    /// Truncation order N of every x-series.
    #[arg(long, global = true, default_value_t = 40)]
    pub order: i64,
    /// Number of R-matrix levels to solve.
    #[arg(long, global = true, default_value_t = 8)]
    pub max_k: usize,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Text)]
    pub emit: Emit,
    /// Cache directory (falls back to $ORBIFOLD_HAE_CACHE; no caching if neither is set).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads for the graph sums.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Test hook: perturb the integration constant at LEVEL by DELTA (default 2:1).
    #[arg(long, global = true, value_name = "LEVEL[:DELTA]", num_args = 0..=1, default_missing_value = "2")]
    pub poison_constant: Option<String>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Probe: vertex t-coefficient indexing.
    #[arg(long, global = true, hide = true, value_enum, default_value_t = VertexIndex::Derived)]
    pub vertex_index: VertexIndex,
    /// Probe: denominator of the vertex t-coefficient.
    #[arg(long, global = true, hide = true, default_value_t = 5)]
    pub t_denominator: i64,
    /// Probe: factor in front of both anomaly right-hand sides.
    #[arg(long, global = true, hide = true, default_value = "1/2")]
    pub hae_factor: String,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VertexIndex {
    Derived,
    Printed,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Print the mirror-map series.
    MirrorSeries,
    /// Check every mirror identity through order N.
    VerifyIdentities,
    /// A single ψ-class intersection number.
    Intersection {
        #[arg(long)]
        genus: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        exps: Vec<u32>,
    },
    /// Stable graphs of type (g, n) as JSON.
    Graphs {
        #[arg(long)]
        genus: u32,
        #[arg(long, default_value_t = 0)]
        legs: usize,
        /// List every Z_5-decorated graph up to isomorphism.
        #[arg(long)]
        decorated: bool,
    },
    /// Solve the R-matrix and run its checks.
    Rmatrix,
    /// One potential F_{g,n}(φ_c1, …, φ_cn).
    Potential {
        #[arg(long)]
        genus: u32,
        #[arg(long, value_delimiter = ',')]
        insertions: Vec<u8>,
    },
    /// Gromov–Witten invariants: the Θ-expansion of a potential.
    Gw {
        #[arg(long)]
        genus: u32,
        #[arg(long, value_delimiter = ',')]
        insertions: Vec<u8>,
        #[arg(long, default_value_t = 10)]
        max_degree: i64,
    },
    /// Both anomaly equations at each genus.
    VerifyHae {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        genus: Vec<u32>,
    },
    /// Everything, in order.
    VerifyAll {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        genus: Vec<u32>,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Compute(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Compute(_) => 1,
        }
    }
}

fn compute<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Compute(e.to_string())
}

/// Validated run parameters.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub order: i64,
    pub max_k: usize,
    pub genus: Vec<u32>,
    pub cache_dir: Option<PathBuf>,
    pub emit: Emit,
    pub jobs: Option<usize>,
    pub report: Option<PathBuf>,
    pub poison: Option<Poison>,
    pub conv: Convention,
    pub hae: HaeOptions,
}

impl RunConfig {
    fn from_cli(cli: &Cli, genus: Vec<u32>) -> Result<Self, Failure> {
        let poison = cli.poison_constant.as_deref().map(parse_poison).transpose()?;
        let factor =
            q_from_str(&cli.hae_factor).ok_or_else(|| Failure::Config(format!("bad --hae-factor {:?}", cli.hae_factor)))?;
        if cli.t_denominator == 0 {
            return Err(Failure::Config("--t-denominator must be nonzero".into()));
        }
        let vertex = match cli.vertex_index {
            VertexIndex::Derived => VertexConvention::Derived,
            VertexIndex::Printed => VertexConvention::AsPrinted,
        };
        let cfg = RunConfig {
            order: cli.order,
            max_k: cli.max_k,
            genus,
            cache_dir: cli.cache_dir.clone(),
            emit: cli.emit,
            jobs: cli.jobs,
            report: cli.report.clone(),
            poison,
            conv: Convention { vertex, t_denominator: cli.t_denominator },
            hae: HaeOptions { rhs_factor: factor },
        };
        cfg.check_order()?;
        Ok(cfg)
    }

    fn max_genus(&self) -> u32 {
        self.genus.iter().copied().max().unwrap_or(0)
    }

    fn check_order(&self) -> Result<(), Failure> {
        let floor = 5 * self.max_genus() as i64 + 10;
        if self.order < floor.max(1) {
            return Err(Failure::Config(format!(
                "--order {} is below the floor {} for genus {}",
                self.order,
                floor,
                self.max_genus()
            )));
        }
        Ok(())
    }

    fn need_depth(&self, k: usize, what: &str) -> Result<(), Failure> {
        if self.max_k < k {
            return Err(Failure::Config(format!("{what} needs R-matrix level {k}: rerun with --max-k {k} or more")));
        }
        Ok(())
    }
}

fn parse_poison(s: &str) -> Result<Poison, Failure> {
    let bad = || Failure::Config(format!("bad --poison-constant {s:?}, expected LEVEL or LEVEL:num/den"));
    let (lv, d) = match s.split_once(':') {
        Some((a, b)) => (a, q_from_str(b).ok_or_else(bad)?),
        None => (s, qi(1)),
    };
    let level: usize = lv.trim().parse().map_err(|_| bad())?;
    if level == 0 {
        return Err(bad());
    }
    Ok(Poison { level, delta: d })
}

/// Shared state for one invocation.
struct Workbench {
    cfg: RunConfig,
    cache: Cache,
    psi: PsiCache,
    graphs: GraphStore,
}

impl Workbench {
    fn new(cfg: RunConfig) -> Self {
        let cache = Cache::resolve(cfg.cache_dir.clone());
        let psi = PsiCache::new();
        // an unreadable cache only costs recomputation
        let _ = cache.load_psi(&psi);
        let graphs = GraphStore::with_cache(cache.clone());
        Workbench { cfg, cache, psi, graphs }
    }

    fn finish(&self) {
        let _ = self.cache.store_psi(&self.psi);
    }

    fn mirror(&self) -> Result<MirrorData, Failure> {
        build_all(self.cfg.order).map_err(compute)
    }

    fn table(&self) -> Result<RTable, Failure> {
        let (k, n) = (self.cfg.max_k, self.cfg.order);
        if self.cfg.poison.is_none() {
            if let Ok(Some(t)) = self.cache.load_rtable(k, n) {
                return Ok(t);
            }
        }
        let t = RTable::solve(k, self.cfg.poison.clone()).map_err(compute)?;
        let _ = self.cache.store_rtable(&t, n);
        Ok(t)
    }

    fn rseries(&self, m: &MirrorData) -> Result<RSeries, Failure> {
        RSeries::solve(m, self.cfg.max_k, self.cfg.poison.as_ref()).map_err(compute)
    }
}

/// Parse and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return 2;
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(f) => {
            match &f {
                Failure::Config(s) => eprintln!("error: {s}"),
                Failure::Compute(s) => eprintln!("computation failed: {s}"),
            }
            f.code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, Failure> {
    let genus = match &cli.cmd {
        Cmd::VerifyHae { genus } | Cmd::VerifyAll { genus } => genus.clone(),
        Cmd::Potential { genus, .. } | Cmd::Gw { genus, .. } => vec![*genus],
        _ => vec![],
    };
    let cfg = RunConfig::from_cli(cli, genus)?;
    let wb = Workbench::new(cfg);
    let out = match &cli.cmd {
        Cmd::MirrorSeries => mirror_series(&wb),
        Cmd::VerifyIdentities => {
            let m = wb.mirror()?;
            emit_sections(&wb, &[("mirror identities".into(), m.check_identities())], None)
        }
        Cmd::Intersection { genus, exps } => intersection(&wb, *genus, exps),
        Cmd::Graphs { genus, legs, decorated } => graph_list(*genus, *legs, *decorated),
        Cmd::Rmatrix => rmatrix(&wb),
        Cmd::Potential { genus, insertions } => potential(&wb, *genus, insertions),
        Cmd::Gw { genus, insertions, max_degree } => gw(&wb, *genus, insertions, *max_degree),
        Cmd::VerifyHae { genus } => verify_hae(&wb, genus),
        Cmd::VerifyAll { .. } => verify_all(&wb),
    };
    wb.finish();
    out
}

type Section = (String, Vec<Check>);

fn sections_json(sections: &[Section]) -> Value {
    let all: Vec<Check> = sections.iter().flat_map(|(_, c)| c.clone()).collect();
    json!({
        "sections": sections.iter().map(|(name, checks)| json!({"name": name, "checks": checks})).collect::<Vec<_>>(),
        "all_pass": all_pass(&all),
    })
}

fn write_report(wb: &Workbench, v: &Value) -> Result<(), Failure> {
    if let Some(p) = &wb.cfg.report {
        let s = serde_json::to_string_pretty(v).map_err(compute)?;
        std::fs::write(p, s + "\n").map_err(|e| Failure::Config(format!("cannot write report {}: {e}", p.display())))?;
    }
    Ok(())
}

/// Print sections (plus optional extra JSON payload) and turn them into an exit code.
fn emit_sections(wb: &Workbench, sections: &[Section], extra: Option<(&str, Value)>) -> Result<i32, Failure> {
    let mut v = sections_json(sections);
    if let Some((k, x)) = &extra {
        v[*k] = x.clone();
    }
    write_report(wb, &v)?;
    match wb.cfg.emit {
        Emit::Json => outln!("{}", serde_json::to_string_pretty(&v).map_err(compute)?),
        Emit::Text => {
            for (name, checks) in sections {
                outln!("== {name} ==");
                out!("{}", render(checks));
            }
            let all: Vec<Check> = sections.iter().flat_map(|(_, c)| c.clone()).collect();
            let failed = all.iter().filter(|c| !c.residual_zero).count();
            outln!("{} checks, {} failed", all.len(), failed);
        }
    }
    Ok(if v["all_pass"].as_bool() == Some(true) { 0 } else { 1 })
}

fn mirror_series(wb: &Workbench) -> Result<i32, Failure> {
    let m = wb.mirror()?;
    let n = wb.cfg.order;
    match wb.cfg.emit {
        Emit::Json => {
            let mut o = serde_json::Map::new();
            for (name, s) in m.named() {
                o.insert(name, s.to_json(n));
            }
            outln!("{}", serde_json::to_string_pretty(&Value::Object(o)).map_err(compute)?);
        }
        Emit::Text => {
            for (name, s) in m.named() {
                let lo = s.valuation().unwrap_or(0).min(0);
                let terms: Vec<String> = (lo..=n.min(s.order()))
                    .filter(|&k| !s.coeff(k).is_zero())
                    .map(|k| format!("({})x^{k}", s.coeff(k)))
                    .collect();
                outln!("{name} = {} + O(x^{})", if terms.is_empty() { "0".into() } else { terms.join(" + ") }, n + 1);
            }
        }
    }
    Ok(0)
}

fn intersection(wb: &Workbench, g: u32, exps: &[u32]) -> Result<i32, Failure> {
    let v = wb.psi.psi_integral(g, exps).map_err(|e| Failure::Config(e.to_string()))?;
    match wb.cfg.emit {
        Emit::Json => outln!("{}", json!({"genus": g, "exps": exps, "value": v.to_string()})),
        Emit::Text => outln!("{v}"),
    }
    Ok(0)
}

fn graph_list(g: u32, n: usize, decorated: bool) -> Result<i32, Failure> {
    let gs = graphs::enumerate(g, n).map_err(|e| Failure::Config(e.to_string()))?;
    let v = if decorated {
        let all: Vec<_> = gs.iter().flat_map(graphs::decorations).collect();
        serde_json::to_value(all).map_err(compute)?
    } else {
        serde_json::to_value(&gs).map_err(compute)?
    };
    outln!("{}", serde_json::to_string_pretty(&v).map_err(compute)?);
    Ok(0)
}

fn rmatrix(wb: &Workbench) -> Result<i32, Failure> {
    let m = wb.mirror()?;
    let t = wb.table()?;
    let rs = wb.rseries(&m)?;
    let sections = vec![
        ("R-matrix (symbolic)".to_string(), t.checks()),
        ("R-matrix (series)".to_string(), rs.checks(&m, &t, wb.cfg.order)),
    ];
    if wb.cfg.emit == Emit::Text {
        for k in 0..=t.max_k {
            for i in 0..5 {
                outln!("P~^{k}_{i} = {}", t.rows[k][i]);
            }
        }
    }
    emit_sections(wb, &sections, Some(("table", t.to_json())))
}

fn check_insertions(ins: &[u8]) -> Result<(), Failure> {
    match ins.iter().find(|&&c| c > 4) {
        Some(c) => Err(Failure::Config(format!("insertion index {c} is not in 0..5"))),
        None => Ok(()),
    }
}

fn symbolic_potential<'a>(
    wb: &'a Workbench,
    t: &'a RTable,
    g: u32,
    ins: &[u8],
) -> Result<(GraphSum<'a, Symbolic<'a>>, Potential<Poly<Cyc>>), Failure> {
    check_insertions(ins)?;
    wb.cfg.need_depth(required_depth(g, ins.len()), &format!("F_{{{g},{}}}", ins.len()))?;
    let gs = GraphSum::new(Symbolic { table: t }, &wb.psi, &wb.graphs, wb.cfg.conv);
    let p = gs.potential(g, ins).map_err(compute)?;
    Ok((gs, p))
}

fn potential(wb: &Workbench, g: u32, ins: &[u8]) -> Result<i32, Failure> {
    let m = wb.mirror()?;
    let t = wb.table()?;
    let rs = wb.rseries(&m)?;
    let (_, p) = symbolic_potential(wb, &t, g, ins)?;
    let ss = GraphSum::new(SeriesSide::new(&m, &rs).map_err(compute)?, &wb.psi, &wb.graphs, wb.cfg.conv);
    let sp = ss.potential(g, ins).map_err(compute)?;
    let ev = cohft::ev(&p.value, &m).map_err(compute)?;
    let n = wb.cfg.order;
    let mut checks = Vec::new();
    if ins.is_empty() {
        checks.push(Check::new("ring element lies in F", p.value.in_f()));
    }
    checks.push(Check::new("symbolic = series graph sum", sp.value.order() >= n && ev.sub(&sp.value).truncate(n).is_zero()));
    let v = potential_json(&p, Some(&ev), n, &checks);
    write_report(wb, &v)?;
    match wb.cfg.emit {
        Emit::Json => outln!("{}", serde_json::to_string_pretty(&v).map_err(compute)?),
        Emit::Text => {
            outln!("F_{{{g},{}}}{:?} = {}", ins.len(), ins, p.value);
            outln!("{} graphs, {} flag assignments", p.graphs, p.assignments);
            out!("{}", render(&checks));
        }
    }
    Ok(if all_pass(&checks) { 0 } else { 1 })
}

fn gw(wb: &Workbench, g: u32, ins: &[u8], d_max: i64) -> Result<i32, Failure> {
    if d_max < 0 || d_max > wb.cfg.order {
        return Err(Failure::Config(format!("--max-degree must lie in 0..={}", wb.cfg.order)));
    }
    let m = wb.mirror()?;
    let t = wb.table()?;
    let (_, p) = symbolic_potential(wb, &t, g, ins)?;
    let s = cohft::ev(&p.value, &m).map_err(compute)?;
    let cs = gw_expansion(&s, &m, d_max).map_err(compute)?;
    match wb.cfg.emit {
        Emit::Json => {
            let v = json!({
                "genus": g,
                "insertions": ins,
                "invariants": cs.iter().map(coeff_json).collect::<Vec<_>>(),
            });
            outln!("{}", serde_json::to_string_pretty(&v).map_err(compute)?);
        }
        Emit::Text => {
            for (d, c) in cs.iter().enumerate() {
                outln!("d = {d}: {c}");
            }
        }
    }
    Ok(0)
}

fn hae_sections(wb: &Workbench, t: &RTable, m: &MirrorData, genus: &[u32]) -> Result<Vec<Section>, Failure> {
    let gs = GraphSum::new(Symbolic { table: t }, &wb.psi, &wb.graphs, wb.cfg.conv);
    let mut out = Vec::new();
    for &g in genus {
        if g < 2 {
            return Err(Failure::Config(format!("the anomaly equations need genus >= 2, got {g}")));
        }
        wb.cfg.need_depth(required_depth(g, 0), &format!("genus {g}"))?;
        let h = gs.hae(g, &wb.cfg.hae).map_err(compute)?;
        out.push((format!("anomaly equations, g = {g}"), h.checks(Some(m))));
    }
    Ok(out)
}

fn verify_hae(wb: &Workbench, genus: &[u32]) -> Result<i32, Failure> {
    let m = wb.mirror()?;
    let t = wb.table()?;
    let s = hae_sections(wb, &t, &m, genus)?;
    emit_sections(wb, &s, None)
}

/// Smallest R-matrix depth `verify-all` needs for these genera.
pub fn verify_all_depth(genus: &[u32]) -> usize {
    let g = genus.iter().copied().max().unwrap_or(2);
    // F_{1,4} and F_{2,1} for the t-derivative checks
    required_depth(g, 0).max(5)
}

/// The stable keys the Witten–Kontsevich consistency checks sweep.
fn wk_section(psi: &PsiCache) -> Vec<Check> {
    let mut out = vec![
        Check::new("<tau_0^3>_0 = 1", psi.value(0, &[0, 0, 0]) == qi(1)),
        Check::new("<tau_1>_1 = 1/24", psi.value(1, &[1]) == q(1, 24)),
        Check::new("<tau_4>_2 = 1/1152", psi.value(2, &[4]) == q(1, 1152)),
    ];
    let (mut ns, mut bs, mut nd, mut bd) = (0, 0, 0, 0);
    for g in 0..=3u32 {
        for n in 1..=5usize {
            let dim = 3 * g as i64 - 3 + n as i64;
            if dim < 0 {
                continue;
            }
            for e in nondecreasing(n, dim as u32) {
                if let Some(ok) = psi.string_consistent(g, &e) {
                    ns += 1;
                    bs += usize::from(!ok);
                }
                if let Some(ok) = psi.dilaton_consistent(g, &e) {
                    nd += 1;
                    bd += usize::from(!ok);
                }
            }
        }
    }
    out.push(Check::new(format!("string equation = DVV on {ns} keys, g <= 3"), bs == 0));
    out.push(Check::new(format!("dilaton equation = DVV on {nd} keys, g <= 3"), bd == 0));
    out
}

/// Nondecreasing n-tuples with the given sum.
fn nondecreasing(n: usize, sum: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, sum: u32, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            if sum == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for a in min..=sum {
            if a * n as u32 > sum {
                break;
            }
            cur.push(a);
            rec(n - 1, sum - a, a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, sum, 0, &mut Vec::new(), &mut out);
    out
}

fn potential_name(g: u32, ins: &[u8]) -> String {
    let s: Vec<String> = ins.iter().map(|c| format!("phi{c}")).collect();
    format!("F_{g}({})", s.join(","))
}

fn verify_all(wb: &Workbench) -> Result<i32, Failure> {
    let cfg = &wb.cfg;
    if cfg.genus.is_empty() {
        return Err(Failure::Config("no genus requested".into()));
    }
    cfg.need_depth(verify_all_depth(&cfg.genus), "verify-all")?;
    let n = cfg.order;
    let m = wb.mirror()?;
    let t = wb.table()?;
    let rs = wb.rseries(&m)?;
    let mut sections: Vec<Section> = vec![("mirror identities".into(), m.check_identities())];
    sections.push(("Frobenius data".into(), FrobeniusData::new().checks()));

    let mut sym = t.checks();
    let lemmas: Vec<Check> = sym.split_off(sym.len() - 2);
    sym.extend(rs.checks(&m, &t, n));
    sections.push(("R-matrix".into(), sym));

    let gs = GraphSum::new(Symbolic { table: &t }, &wb.psi, &wb.graphs, cfg.conv);
    let ss = GraphSum::new(SeriesSide::new(&m, &rs).map_err(compute)?, &wb.psi, &wb.graphs, cfg.conv);
    let mut lem = lemmas;
    lem.extend(gs.edge_checks(4));
    sections.push(("derivative lemmas".into(), lem));
    sections.push(("Witten-Kontsevich".into(), wk_section(&wb.psi)));

    // every potential the later sections touch, in a fixed order
    let mut keys: Vec<(u32, Vec<u8>)> = (1..=3).map(|k| (1, vec![1u8; k])).collect();
    for &g in &cfg.genus {
        keys.push((g, vec![]));
        for c in [1u8, 2] {
            keys.push((g - 1, vec![c, c]));
            for i in 1..g {
                keys.push((i, vec![c]));
            }
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    keys.retain(|k| seen.insert(k.clone()));

    let mut fin = Vec::new();
    for &g in &cfg.genus {
        let p = gs.potential(g, &[]).map_err(compute)?;
        fin.push(Check::new(format!("F_{g} lies in F"), p.value.in_f()));
    }
    for k in 1..=3usize {
        let p = gs.potential(1, &vec![1u8; k]).map_err(compute)?;
        let d = p.value.c1_inv_degree();
        fin.push(Check::new(format!("C1^-1 degree of {} is {k}", potential_name(1, &vec![1u8; k])), d == Some(k as i32)));
    }
    sections.push(("finite generation".into(), fin));

    let mut two = Vec::new();
    for (g, ins) in &keys {
        let p = gs.potential(*g, ins).map_err(compute)?;
        let s = ss.potential(*g, ins).map_err(compute)?;
        let e = cohft::ev(&p.value, &m).map_err(compute)?;
        let ok = s.value.order() >= n && e.sub(&s.value).truncate(n).is_zero();
        two.push(Check::new(format!("symbolic = series for {}", potential_name(*g, ins)), ok));
    }
    sections.push(("two pipelines".into(), two));

    let mut td = Vec::new();
    let bases = [(gs.potential(1, &[1]).map_err(compute)?, 3usize), (gs.potential(2, &[]).map_err(compute)?, 1)];
    for (base, kmax) in &bases {
        for k in 1..=*kmax {
            let name = format!("d^{k}/dT^{k} {} = graph sum with {k} more phi1", potential_name(base.genus, &base.insertions));
            td.push(match t_derivative(&gs, &m, base, k) {
                Ok(_) => Check::new(name, true),
                Err(cohft::CohftError::Mismatch { .. }) => Check::new(name, false),
                Err(e) => return Err(compute(e)),
            });
        }
    }
    sections.push(("t-derivative".into(), td));
    sections.extend(hae_sections(wb, &t, &m, &cfg.genus)?);
    emit_sections(wb, &sections, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poison_parsing() {
        let p = parse_poison("2").unwrap();
        assert_eq!(p.level, 2);
        assert_eq!(p.delta, qi(1));
        assert_eq!(parse_poison("4:1/7").unwrap().delta, q(1, 7));
        assert!(parse_poison("0").is_err());
        assert!(parse_poison("x:1").is_err());
    }

    #[test]
    fn nondecreasing_tuples() {
        assert_eq!(nondecreasing(2, 2), vec![vec![0, 2], vec![1, 1]]);
        assert_eq!(nondecreasing(3, 0), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn depth_requirement() {
        assert_eq!(verify_all_depth(&[2]), 5);
        assert_eq!(verify_all_depth(&[3]), 7);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["orbifold-hae", "bogus"]), 2);
        assert_eq!(run(["orbifold-hae", "verify-all", "--order", "5"]), 2);
        assert_eq!(run(["orbifold-hae", "verify-all", "--max-k", "3"]), 2);
        assert_eq!(run(["orbifold-hae", "potential", "--genus", "1", "--insertions", "7"]), 2);
        assert_eq!(run(["orbifold-hae", "intersection", "--genus", "0", "--exps", "0"]), 2);
    }

    #[test]
    fn intersection_runs() {
        assert_eq!(run(["orbifold-hae", "intersection", "--genus", "2", "--exps", "4"]), 0);
    }
}
