//! One line per acceptance criterion, then a nonzero exit if any failed.
//!
//! Runs without the libtest harness so the lines are always printed.
//! `GW5_SKIP_G3=1` leaves out the genus 3 parts of criteria 5 to 7.

use orbifold_hae::cohft::{
    ev, t_derivative, Convention, CohftError, GraphStore, GraphSum, HaeOptions, SeriesSide, Symbolic,
    VertexConvention,
};
use orbifold_hae::field::{q, qi};
use orbifold_hae::intnum::PsiCache;
use orbifold_hae::mirror::{build_all, MirrorData};
use orbifold_hae::report::{all_pass, Check};
use orbifold_hae::rmatrix::{Poison, RSeries, RTable};
use rand::{rngs::StdRng, Rng, SeedableRng};
use std::time::{Duration, Instant};

const N: i64 = 40;
const K: usize = 8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(checks: &[Check]) -> Outcome {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.residual_zero)
        .map(|c| match &c.note {
            Some(n) => format!("{} ({n})", c.name),
            None => c.name.clone(),
        })
        .collect();
    if failed.is_empty() {
        Outcome { pass: true, detail: format!("{} checks", checks.len()) }
    } else {
        Outcome { pass: false, detail: format!("failed: {}", failed.join("; ")) }
    }
}

struct Ctx {
    m: MirrorData,
    t: RTable,
    rs: RSeries,
    psi: PsiCache,
    graphs: GraphStore,
    genera: Vec<u32>,
}

impl Ctx {
    fn symbolic(&self, conv: Convention) -> GraphSum<'_, Symbolic<'_>> {
        GraphSum::new(Symbolic { table: &self.t }, &self.psi, &self.graphs, conv)
    }
}

fn within(c: &mut Vec<Check>, what: &str, took: Duration, limit: Duration) {
    c.push(Check::new(format!("{what} runtime {:.1?} < {limit:?}", took), took < limit));
}

fn criterion_1(_: &Ctx) -> Outcome {
    let t0 = Instant::now();
    let m = build_all(N).unwrap();
    let mut c = m.check_identities();
    within(&mut c, "mirror", t0.elapsed(), Duration::from_secs(5));
    outcome(&c)
}

fn criterion_2(cx: &Ctx) -> Outcome {
    let t0 = Instant::now();
    let t = RTable::solve(K, None).unwrap();
    let rs = RSeries::solve(&cx.m, K, None).unwrap();
    let mut c: Vec<Check> = t.checks().into_iter().filter(|c| !c.name.contains("lemma")).collect();
    c.extend(rs.checks(&cx.m, &t, N));
    within(&mut c, "R-matrix", t0.elapsed(), Duration::from_secs(60));
    outcome(&c)
}

fn criterion_3(cx: &Ctx) -> Outcome {
    outcome(&[
        Check::new("dP~/dA2 lemma, k <= 8", cx.t.a2_lemma()),
        Check::new("dP~/dD2A1 lemma, k <= 8", cx.t.d2a1_lemma()),
    ])
}

fn criterion_4(cx: &Ctx) -> Outcome {
    outcome(&cx.symbolic(Convention::default()).edge_checks(4))
}

fn criterion_5(cx: &Ctx) -> Outcome {
    let gs = cx.symbolic(Convention::default());
    let mut c = Vec::new();
    for &g in &cx.genera {
        let p = gs.potential(g, &[]).unwrap();
        c.push(Check::new(format!("F_{g} in F"), p.value.in_f()));
    }
    for n in 1..=3usize {
        let p = gs.potential(1, &vec![1; n]).unwrap();
        c.push(Check::new(format!("C1^-1 degree of F_1(phi1^{n}) = {n}"), p.value.c1_inv_degree() == Some(n as i32)));
    }
    outcome(&c)
}

fn criterion_6(cx: &Ctx) -> Outcome {
    let gs = cx.symbolic(Convention::default());
    let mut c = Vec::new();
    for &g in &cx.genera {
        let t0 = Instant::now();
        let h = gs.hae(g, &HaeOptions::default()).unwrap();
        c.extend(h.checks(Some(&cx.m)));
        let limit = if g == 2 { Duration::from_secs(300) } else { Duration::from_secs(7200) };
        within(&mut c, &format!("g = {g}"), t0.elapsed(), limit);
    }
    outcome(&c)
}

/// Every potential criteria 5 and 6 touch.
fn potentials(genera: &[u32]) -> Vec<(u32, Vec<u8>)> {
    let mut keys: Vec<(u32, Vec<u8>)> = (1..=3).map(|n| (1, vec![1; n])).collect();
    for &g in genera {
        keys.push((g, vec![]));
        for c in [1u8, 2] {
            keys.push((g - 1, vec![c, c]));
            for i in 1..g {
                keys.push((i, vec![c]));
            }
        }
    }
    keys.sort();
    keys.dedup();
    keys
}

fn criterion_7(cx: &Ctx) -> Outcome {
    let gs = cx.symbolic(Convention::default());
    let ss = GraphSum::new(SeriesSide::new(&cx.m, &cx.rs).unwrap(), &cx.psi, &cx.graphs, Convention::default());
    let mut c = Vec::new();
    for (g, ins) in potentials(&cx.genera) {
        let p = gs.potential(g, &ins).unwrap();
        let s = ss.potential(g, &ins).unwrap();
        let e = ev(&p.value, &cx.m).unwrap();
        let ok = s.value.order() >= N && e.sub(&s.value).truncate(N).is_zero();
        c.push(Check::new(format!("F_{g}{ins:?}"), ok));
    }
    outcome(&c)
}

fn criterion_8(_: &Ctx) -> Outcome {
    let t0 = Instant::now();
    let psi = PsiCache::new();
    let mut c = vec![
        Check::new("<tau_0^3>_0 = 1", psi.psi_integral(0, &[0, 0, 0]).unwrap() == qi(1)),
        Check::new("<tau_1>_1 = 1/24", psi.psi_integral(1, &[1]).unwrap() == q(1, 24)),
        Check::new("<tau_4>_2 = 1/1152", psi.psi_integral(2, &[4]).unwrap() == q(1, 1152)),
    ];
    let mut rng = StdRng::seed_from_u64(5);
    let (mut ok, mut drawn) = (true, 0);
    while drawn < 100 {
        let g = rng.gen_range(0..=3u32);
        let n = rng.gen_range(1..=5usize);
        if 2 * g as usize + n < 3 {
            continue;
        }
        drawn += 1;
        let dim = 3 * g as usize + n - 3;
        let mut e = vec![0u32; n];
        for _ in 0..dim {
            e[rng.gen_range(0..n)] += 1;
        }
        // string: add τ_0 after raising one exponent so the dimension still matches
        let mut up = e.clone();
        up[0] += 1;
        let mut with0 = up.clone();
        with0.push(0);
        let mut rhs = qi(0);
        for j in 0..up.len() {
            if up[j] > 0 {
                let mut r = up.clone();
                r[j] -= 1;
                rhs += psi.value(g, &r);
            }
        }
        ok &= psi.value(g, &with0) == rhs;
        let mut with1 = e.clone();
        with1.push(1);
        ok &= psi.value(g, &with1) == psi.value(g, &e) * qi(2 * g as i64 - 2 + n as i64);
        ok &= psi.string_consistent(g, &e).unwrap_or(true);
        ok &= psi.dilaton_consistent(g, &e).unwrap_or(true);
    }
    c.push(Check::new("string and dilaton on 100 random stable keys, g <= 3", ok));
    within(&mut c, "WK", t0.elapsed(), Duration::from_secs(5));
    outcome(&c)
}

/// A control passes when the perturbation makes some check fail that the
/// unperturbed run passes.
fn criterion_9(cx: &Ctx) -> Outcome {
    let mut c = Vec::new();

    let poisoned = RTable::solve(K, Some(Poison { level: 2, delta: qi(1) })).unwrap();
    let sym_fail = poisoned.checks().iter().any(|c| c.name.starts_with("symplectic") && !c.residual_zero);
    c.push(Check::new("poisoned c_2 breaks the symplectic check", sym_fail && all_pass(&cx.t.checks())));

    // with the derived vertex weights F_2 = 0 and the first equation cannot
    // see the factor, so the probe uses the printed weights
    let printed = Convention { vertex: VertexConvention::AsPrinted, t_denominator: 5 };
    let gp = cx.symbolic(printed);
    let base = gp.hae(2, &HaeOptions::default()).unwrap();
    let base_ok = base.first.is_zero() && !base.first_lhs_zero;
    for f in [q(1, 3), qi(1), q(1, 4)] {
        let h = gp.hae(2, &HaeOptions { rhs_factor: f.clone() }).unwrap();
        c.push(Check::new(format!("factor {f} instead of 1/2 breaks the first equation"), base_ok && !h.first.is_zero()));
    }

    let f11 = cx.symbolic(Convention::default()).potential(1, &[1]).unwrap();
    let base_ok = t_derivative(&cx.symbolic(Convention::default()), &cx.m, &f11, 1).is_ok();
    for d in [1, 4, 6, 25] {
        let conv = Convention { vertex: VertexConvention::Derived, t_denominator: d };
        let gs = cx.symbolic(conv);
        let f = gs.potential(1, &[1]).unwrap();
        let broken = matches!(t_derivative(&gs, &cx.m, &f, 1), Err(CohftError::Mismatch { .. }));
        c.push(Check::new(format!("t denominator {d} breaks the t-derivative check"), base_ok && broken));
    }
    outcome(&c)
}

type Criterion = (&'static str, fn(&Ctx) -> Outcome);

fn main() {
    let skip_g3 = std::env::var("GW5_SKIP_G3").is_ok_and(|v| v == "1");
    let t0 = Instant::now();
    let cx = Ctx {
        m: build_all(N).unwrap(),
        t: RTable::solve(K, None).unwrap(),
        rs: RSeries::solve(&build_all(N).unwrap(), K, None).unwrap(),
        psi: PsiCache::new(),
        graphs: GraphStore::new(),
        genera: if skip_g3 { vec![2] } else { vec![2, 3] },
    };
    println!("setup {:.1?}", t0.elapsed());
    let criteria: [Criterion; 9] = [
        ("mirror identities through order 40", criterion_1),
        ("R-matrix flatness, Laurent row 0, symplectic, k <= 8", criterion_2),
        ("R-matrix derivative lemmas", criterion_3),
        ("edge-derivative lemmas, b1+b2 <= 4", criterion_4),
        ("finite generation", criterion_5),
        ("holomorphic anomaly equations", criterion_6),
        ("symbolic and series pipelines agree", criterion_7),
        ("Witten-Kontsevich suite", criterion_8),
        ("negative controls", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f(&cx);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name} [{}] ({:.1?})", i + 1, o.detail, t.elapsed());
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if skip_g3 {
        println!("note: genus 3 skipped (GW5_SKIP_G3=1)");
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
