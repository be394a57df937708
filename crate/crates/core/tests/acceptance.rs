//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use coho32::bar::{class_is_zero, classes_equal, coboundary_matrix, extension_cocycle, Cochain};
use coho32::catalog::{entry, subgroup, symbols};
use coho32::f2::BitMatrix;
use coho32::pc::{builtin, Element, PcPresentation};
use coho32::resolution::{load_or_compute, MinClass, MinimalResolution};
use coho32::ring::{match_presentation, RingPresentation, K_PRESENTATION, RESULT_PRESENTATION};
use coho32::verify::{self, Config, Inputs, Status, CHECK_IDS};
use rand::{Rng, SeedableRng};

type Exps = [u8; 5];

fn exps(g: &PcPresentation, x: Element) -> Exps {
    let mut out = [0; 5];
    for (i, e) in g.exponents(x).into_iter().enumerate() {
        out[i] = e;
    }
    out
}

/// Product of 32G3f by the closed-form law.
fn law(x: Exps, y: Exps) -> Exps {
    let [a1, b1, c1, d1, e1] = x;
    let [a2, b2, c2, d2, e2] = y;
    let ct = b1 & a2 ^ b1 & b2;
    let dt = a1 & a2;
    let et = d1 & d2 ^ a1 & a2 & d2 ^ a1 & d1 & a2 ^ c1 & c2 ^ b1 & b2 & c2 ^ b1 & c1 & b2
        ^ b1 & a2 & c2 ^ b1 & c1 & a2 ^ c1 & a2 ^ b1 & a2 & b2;
    [a1 ^ a2, b1 ^ b2, c1 ^ c2 ^ ct, d1 ^ d2 ^ dt, e1 ^ e2 ^ et]
}

fn xi(p: Exps, q: Exps) -> u8 {
    let ([_, b1, c1, ..], [a2, b2, c2, ..]) = (p, q);
    c1 & c2 ^ b1 & a2 & c2 ^ b1 & c1 & a2 ^ b1 & b2 & c2 ^ b1 & c1 & b2 ^ c1 & a2 ^ b1 & a2 & b2
}

fn xrep(p: Exps, q: Exps) -> u8 {
    let ([a1, _, _, d1, _], [a2, _, _, d2, _]) = (p, q);
    d1 & d2 ^ a1 & a2 & d2 ^ a1 & d1 & a2
}

fn yrep(p: Exps, q: Exps, r: Exps) -> u8 {
    let ([_, b1, c1, _, e1], [a2, _, c2, d2, e2], [a3, _, _, d3, _]) = (p, q, r);
    let (x12, w12) = (xrep(p, q), xi(p, q));
    let inner = x12 & w12 ^ (e1 ^ e2) & (x12 ^ w12) ^ b1 & c1 & a2 ^ b1 & c1 & a2 & c2 ^ b1 & d2
        ^ c1 & a2 & c2 ^ e1 & a2 ^ e1 & e2;
    inner & a3 ^ x12 & d3
}

fn e_deviation(p: Exps, q: Exps) -> u8 {
    law(p, q)[4] ^ p[4] ^ q[4]
}

struct Criterion {
    pass: bool,
    detail: String,
}

fn timed(limit: Duration, f: impl FnOnce() -> (bool, String)) -> Criterion {
    let t = Instant::now();
    let (ok, detail) = f();
    let el = t.elapsed();
    Criterion {
        pass: ok && el < limit,
        detail: format!("{detail}; {:.2}s of {}s", el.as_secs_f64(), limit.as_secs()),
    }
}

fn criterion_1() -> Criterion {
    timed(Duration::from_secs(1), || {
        let g = builtin("32G3f").unwrap();
        let law_ok = g
            .elements()
            .all(|x| g.elements().all(|y| exps(&g, g.mul(x, y)) == law(exps(&g, x), exps(&g, y))));
        let mut rng = rand::rngs::StdRng::seed_from_u64(0x32f);
        let n = g.order() as u32;
        let assoc_ok = (0..1_000_000).all(|_| {
            let (x, y, z) = (
                Element(rng.gen_range(0..n)),
                Element(rng.gen_range(0..n)),
                Element(rng.gen_range(0..n)),
            );
            g.mul(g.mul(x, y), z) == g.mul(x, g.mul(y, z))
        });
        (law_ok && assoc_ok, format!("1024 pairs match: {law_ok}, 10^6 triples associative: {assoc_ok}"))
    })
}

/// Coboundary of a closed-form 2-cochain, tested on every triple.
fn closed_form_cocycle_2(g: &PcPresentation, f: impl Fn(Exps, Exps) -> u8) -> bool {
    let e = |x| exps(g, x);
    g.elements().all(|x| {
        g.elements().all(|y| {
            g.elements().all(|z| {
                f(e(y), e(z)) ^ f(e(g.mul(x, y)), e(z)) ^ f(e(x), e(g.mul(y, z))) ^ f(e(x), e(y)) == 0
            })
        })
    })
}

fn criterion_2() -> Criterion {
    timed(Duration::from_secs(30), || {
        let d8 = builtin("D8").unwrap();
        let g16 = builtin("16G2c2").unwrap();
        let g32 = builtin("32G3f").unwrap();
        let xi_ok = closed_form_cocycle_2(&d8, xi) && entry("D8", "w").unwrap().is_cocycle().unwrap();
        let x_ok = closed_form_cocycle_2(&g16, xrep) && entry("16G2c2", "x").unwrap().is_cocycle().unwrap();
        let table: Vec<Exps> = g32.elements().map(|x| exps(&g32, x)).collect();
        let m = |x: usize, y: usize| g32.mul(Element(x as u32), Element(y as u32)).index();
        let mut y_ok = true;
        for x1 in 0..32 {
            for x2 in 0..32 {
                for x3 in 0..32 {
                    for x4 in 0..32 {
                        let t = |i: usize| table[i];
                        let v = yrep(t(x2), t(x3), t(x4))
                            ^ yrep(t(m(x1, x2)), t(x3), t(x4))
                            ^ yrep(t(x1), t(m(x2, x3)), t(x4))
                            ^ yrep(t(x1), t(x2), t(m(x3, x4)))
                            ^ yrep(t(x1), t(x2), t(x3));
                        y_ok &= v == 0;
                    }
                }
            }
        }
        y_ok &= entry("32G3f", "y").unwrap().is_cocycle().unwrap();
        (
            xi_ok && x_ok && y_ok,
            format!("w on D8: {xi_ok}, x on 16G2c2: {x_ok}, y on 32G3f: {y_ok}"),
        )
    })
}

fn criterion_3() -> Criterion {
    timed(Duration::from_secs(5), || {
        let g16 = builtin("16G2c2").unwrap();
        let g32 = builtin("32G3f").unwrap();
        let q2 = extension_cocycle(&g16, g16.generator(3), "D8").unwrap();
        let d8 = q2.group().clone();
        let q2_ok = d8.elements().all(|x| {
            d8.elements().all(|y| {
                let (p, q) = (exps(&d8, x), exps(&d8, y));
                q2.value(&[x, y]).unwrap() as u8 == p[0] & q[0]
            })
        });
        let q1 = extension_cocycle(&g32, g32.generator(4), "16G2c2").unwrap();
        let h = q1.group().clone();
        let q1_ok = h.elements().all(|x| {
            h.elements().all(|y| q1.value(&[x, y]).unwrap() as u8 == e_deviation(exps(&h, x), exps(&h, y)))
        });
        let q1 = Cochain::from_values(g16.clone(), 2, q1.values().clone()).unwrap();
        let wx = entry("16G2c2", "w").unwrap().add(&entry("16G2c2", "x").unwrap()).unwrap();
        let class_ok = classes_equal(&q1, &wx).unwrap();
        (
            q2_ok && q1_ok && class_ok,
            format!("(II) = a1a2: {q2_ok}, (I) = e deviation: {q1_ok}, class w + x: {class_ok}"),
        )
    })
}

fn criterion_4() -> Criterion {
    timed(Duration::from_secs(60), || {
        let (u, w) = (entry("D8", "u").unwrap(), entry("D8", "w").unwrap());
        let uw = u.cup(&w).unwrap();
        let sq1_w = classes_equal(&w.sq(1).unwrap(), &uw).unwrap();
        let sq1_u2 = class_is_zero(&u.cup(&u).unwrap().sq(1).unwrap()).unwrap();
        let rhs = u.cup(&u).unwrap().cup(&uw).unwrap().add(&uw.cup(&w).unwrap()).unwrap();
        let sq2_uw = classes_equal(&uw.sq(2).unwrap(), &rhs).unwrap();
        let sq1_x = class_is_zero(&entry("16G2c2", "x").unwrap().sq(1).unwrap()).unwrap();
        let mut agree = true;
        let mut count = 0;
        for g in ["D8", "C2", "16G2c2", "32G3f", "K", "P1", "P2"] {
            for s in symbols(g) {
                let c = entry(g, s).unwrap();
                if c.degree() <= 2 {
                    agree &= classes_equal(&c.sq(1).unwrap(), &c.bockstein().unwrap()).unwrap();
                    count += 1;
                }
            }
        }
        (
            sq1_w && sq1_u2 && sq2_uw && sq1_x && agree,
            format!(
                "Sq1(w)~uw: {sq1_w}, Sq1(u^2)~0: {sq1_u2}, Sq2(uw)~u^3w+uw^2: {sq2_uw}, Sq1(x)~0: {sq1_x}, cup-1 = Bockstein on {count} classes: {agree}"
            ),
        )
    })
}

fn cup_all(group: &Arc<PcPresentation>, degree: usize, terms: &[&[Cochain]]) -> Cochain {
    let mut acc = Cochain::zero(group.clone(), degree).unwrap();
    for m in terms {
        let mut p = Cochain::constant(group.clone(), true);
        for c in *m {
            p = p.cup(c).unwrap();
        }
        acc = acc.add(&p).unwrap();
    }
    acc
}

fn criterion_5() -> Criterion {
    timed(Duration::from_secs(30), || {
        let mut results = Vec::new();
        for (sub, prime) in [("P1", ""), ("P2", "'")] {
            let s = subgroup(sub).unwrap();
            let c = |n: &str| entry(sub, &format!("{n}{prime}")).unwrap();
            let (p, q, r) = (c("p"), c("q"), c("r"));
            let table: [(&str, Cochain); 4] = if sub == "P1" {
                [
                    ("u", q.clone()),
                    ("v", Cochain::zero(s.group.clone(), 1).unwrap()),
                    ("w", cup_all(&s.group, 2, &[&[p.clone(), p.clone()], &[p.clone(), q.clone()]])),
                    ("x", r.clone()),
                ]
            } else {
                [
                    ("u", Cochain::zero(s.group.clone(), 1).unwrap()),
                    ("v", q.clone()),
                    ("w", r.clone()),
                    ("x", cup_all(&s.group, 2, &[&[p.clone(), p.clone()]])),
                ]
            };
            for (sym, want) in table {
                let got = entry("16G2c2", sym).unwrap().restrict(&s.embedding).unwrap();
                results.push(classes_equal(&got, &want).unwrap());
            }
        }
        let k = subgroup("K").unwrap();
        let (xi, phi) = (entry("K", "xi").unwrap(), entry("K", "phi").unwrap());
        let ktable = [
            ("u", Cochain::zero(k.group.clone(), 1).unwrap()),
            ("v", phi),
            ("W", cup_all(&k.group, 2, &[&[xi.clone(), xi.clone()]])),
            ("y", cup_all(&k.group, 3, &[&[xi.clone(), xi.clone(), xi.clone()]])),
        ];
        for (sym, want) in ktable {
            let got = entry("32G3f", sym).unwrap().restrict(&k.embedding).unwrap();
            results.push(classes_equal(&got, &want).unwrap());
        }
        let held = results.iter().filter(|&&b| b).count();
        (held == 12, format!("{held} of 12 restriction statements hold"))
    })
}

/// Normalized tuples of length `n` as element-index vectors.
fn tuples(order: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..order).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

fn tuple_index(order: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &x| acc * (order - 1) + (x - 1))
}

/// Transposed coboundary `C^{n-1} -> C^n` of normalized cochains restricted to the
/// listed n-tuples: row per (n-1)-tuple, column per listed n-tuple.
fn coboundary_columns(g: &PcPresentation, n: usize, cols: &[Vec<usize>]) -> BitMatrix {
    let order = g.order();
    let rows = (order - 1).pow(n as u32 - 1);
    let mut m = BitMatrix::zeros(rows, cols.len()).unwrap();
    let mul = |x: usize, y: usize| g.mul(Element(x as u32), Element(y as u32)).index();
    for (j, t) in cols.iter().enumerate() {
        let mut faces = vec![t[1..].to_vec()];
        for i in 0..n - 1 {
            let mut f = t[..i].to_vec();
            f.push(mul(t[i], t[i + 1]));
            f.extend_from_slice(&t[i + 2..]);
            faces.push(f);
        }
        faces.push(t[..n - 1].to_vec());
        for f in faces {
            if f.iter().all(|&x| x != 0) {
                m.flip(tuple_index(order, &f), j);
            }
        }
    }
    m
}

fn coboundary_rank(g: &PcPresentation, n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    coboundary_columns(g, n, &tuples(g.order(), n)).rank()
}

/// dim Z^n - dim B^n from complete coboundary ranks.
fn bar_betti_oracle(g: &PcPresentation, n: usize) -> usize {
    (g.order() - 1).pow(n as u32) - coboundary_rank(g, n + 1) - coboundary_rank(g, n)
}

/// Elements generating `g`, chosen greedily from the pc generators.
fn generating_set(g: &PcPresentation) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut span = vec![0usize];
    for i in 0..g.k() {
        let x = g.generator(i).index();
        if span.contains(&x) {
            continue;
        }
        gens.push(x);
        let mut k = 0;
        while k < span.len() {
            for &h in &gens {
                let y = g.mul(Element(span[k] as u32), Element(h as u32)).index();
                if !span.contains(&y) {
                    span.push(y);
                }
            }
            k += 1;
        }
    }
    gens
}

/// Rank of the coboundary `C^3 -> C^4` from the 4-tuples whose first entry is a generator.
/// Expanding the vanishing of the double coboundary at `(g, h, x2, x3, x4)` writes the
/// value at `(gh, x2, x3, x4)` through values with first entry `g` or `h`, so these
/// tuples see the full rank.
fn coboundary_rank_4(g: &PcPresentation) -> usize {
    let cols: Vec<Vec<usize>> = generating_set(g)
        .into_iter()
        .flat_map(|x| tuples(g.order(), 3).into_iter().map(move |t| [vec![x], t].concat()))
        .collect();
    coboundary_columns(g, 4, &cols).rank()
}

fn criterion_6() -> Criterion {
    timed(Duration::from_secs(300), || {
        let g = builtin("32G3f").unwrap();
        let r = MinimalResolution::compute(g.clone(), 8).unwrap();
        let hilbert = RingPresentation::parse(RESULT_PRESENTATION).unwrap().hilbert(8).unwrap();
        let betti_ok = r.betti() == hilbert.as_slice();
        let mut bar = (0..=2).map(|n| bar_betti_oracle(&g, n)).collect::<Vec<_>>();
        bar.push((g.order() - 1).pow(3) - coboundary_rank_4(&g) - coboundary_rank(&g, 3));
        let bar_ok = bar[..] == r.betti()[..4];
        (
            betti_ok && bar_ok,
            format!(
                "betti {:?}, hilbert {:?}, bar n<=3 {:?}",
                r.betti(),
                hilbert,
                bar
            ),
        )
    })
}

fn result_assignment(r: &MinimalResolution, maxdeg: usize) -> (coho32::resolution::RingTables, Vec<(String, MinClass)>) {
    let t = r.ring_tables(maxdeg).unwrap();
    let cls = |s: &str| r.transfer_from_bar(&entry("32G3f", s).unwrap()).unwrap();
    let mut a: Vec<(String, MinClass)> =
        ["u", "v", "W", "y"].iter().map(|s| (s.to_string(), cls(s))).collect();
    let dec = t.decomposables(4);
    let z = (0..t.betti[4])
        .map(|i| MinClass::unit(4, t.betti[4], i))
        .find(|c| !dec.contains(&c.coeffs))
        .unwrap();
    a.push(("z".into(), z));
    (t, a)
}

fn criterion_7() -> Criterion {
    timed(Duration::from_secs(600), || {
        let r = MinimalResolution::compute(builtin("32G3f").unwrap(), 8).unwrap();
        let (t, a) = result_assignment(&r, 8);
        let p = RingPresentation::parse(RESULT_PRESENTATION).unwrap();
        let rep = match_presentation(&t, &p, &a, 8).unwrap();
        let get = |s: &str| a.iter().find(|(n, _)| n == s).unwrap().1.clone();
        let (u, w, y) = (get("u"), get("W"), get("y"));
        let y2 = t.multiply(&y, &y).unwrap();
        let w3 = t.multiply(&t.multiply(&w, &w).unwrap(), &w).unwrap();
        let facts = y2 == w3 && !y2.is_zero() && t.multiply(&u, &y).unwrap().is_zero();
        (
            rep.isomorphic && facts,
            format!("isomorphic through 8: {}, y^2 = W^3 != 0 and uy = 0: {facts}", rep.isomorphic),
        )
    })
}

fn criterion_8() -> Criterion {
    timed(Duration::from_secs(600), || {
        let r = MinimalResolution::compute(builtin("32G3f").unwrap(), 6).unwrap();
        let (t, a) = result_assignment(&r, 6);
        let get = |s: &str| a.iter().find(|(n, _)| n == s).unwrap().1.clone();
        let (w, y) = (get("W"), get("y"));
        let y2w3 = t.multiply(&y, &y).unwrap() == t.multiply(&t.multiply(&w, &w).unwrap(), &w).unwrap();
        let k = subgroup("K").unwrap();
        let xi = entry("K", "xi").unwrap();
        let res = entry("32G3f", "W").unwrap().restrict(&k.embedding).unwrap();
        let res_ok = classes_equal(&res, &xi.cup(&xi).unwrap()).unwrap();
        let kp = RingPresentation::parse(K_PRESENTATION).unwrap();
        let xi_r = kp.generator("xi").unwrap();
        let non_nil = (1..=24u32).all(|e| !kp.pow(&xi_r, e).unwrap().is_zero());
        (
            y2w3 && res_ok && non_nil,
            format!("y^2 = W^3: {y2w3}, res_K(W) ~ xi^2: {res_ok}, xi^k != 0 for k <= 24: {non_nil}"),
        )
    })
}

fn criterion_9() -> Criterion {
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let outcome = (|| {
        let g = builtin("Phi4").unwrap();
        // x = f1, y = f2: y^16 = 1, x^4 = y^8, y^x = y^15
        let (x, y) = (g.generator(0), g.generator(1));
        let rel_ok = g.pow(y, 16).is_identity()
            && g.pow(x, 4) == g.pow(y, 8)
            && g.conjugate(y, x) == g.pow(y, 15)
            && g.order() == 64;
        let cold = load_or_compute(g.clone(), 8, Some(dir.path()), |_, _| {}).unwrap();
        let cold_time = t.elapsed();
        let t2 = Instant::now();
        let warm = load_or_compute(g.clone(), 8, Some(dir.path()), |_, _| {}).unwrap();
        let warm_time = t2.elapsed();
        let p = RingPresentation::parse(RESULT_PRESENTATION).unwrap();
        let hilbert = p.hilbert(8).unwrap();
        let tables = warm.ring_tables(8).unwrap();
        let cold_tables = cold.ring_tables(8).unwrap();
        let mut same_products = true;
        for i in 0..=8 {
            for j in 0..=8 - i {
                for a in 0..tables.betti[i] {
                    for b in 0..tables.betti[j] {
                        let (x, y) = (MinClass::unit(i, tables.betti[i], a), MinClass::unit(j, tables.betti[j], b));
                        same_products &= tables.multiply(&x, &y).unwrap() == cold_tables.multiply(&x, &y).unwrap();
                    }
                }
            }
        }
        let cached = std::fs::read_dir(dir.path()).unwrap().count() == 1;
        let (found, _) = verify::search_conjecture_assignment(&tables, &p, 8).unwrap();
        let ok = rel_ok
            && cold.betti() == hilbert.as_slice()
            && warm.betti() == cold.betti()
            && same_products
            && cached
            && found.is_some()
            && cold_time < Duration::from_secs(1200)
            && warm_time < Duration::from_secs(10);
        (
            ok,
            format!(
                "relations: {rel_ok}, betti {:?}, cache written: {cached}, identical products: {same_products}, assignment found: {}, cold {:.2}s, warm {:.2}s",
                cold.betti(),
                found.is_some(),
                cold_time.as_secs_f64(),
                warm_time.as_secs_f64()
            ),
        )
    })();
    Criterion {
        pass: outcome.0,
        detail: outcome.1,
    }
}

fn criterion_10() -> Criterion {
    timed(Duration::from_secs(120), || {
        let mut rows = BTreeMap::new();
        let mut ok = true;
        for name in ["C2", "C4xC2", "D8", "16G2c2", "C8xC2"] {
            let g = builtin(name).unwrap();
            let r = MinimalResolution::compute(g.clone(), 3).unwrap();
            let bar: Vec<usize> = (0..=3).map(|n| bar_betti_oracle(&g, n)).collect();
            ok &= bar == r.betti();
            rows.insert(name, bar);
        }
        // the library's own bar Betti routine agrees with the oracle on D8
        let d8 = builtin("D8").unwrap();
        ok &= coho32::bar::bar_betti(&d8, 3).unwrap() == bar_betti_oracle(&d8, 3);
        ok &= coboundary_matrix(&d8, 2, true).unwrap().rank() == coboundary_rank(&d8, 2);
        (ok, format!("{rows:?}"))
    })
}

fn criterion_11() -> Criterion {
    timed(Duration::from_secs(1200), || {
        let cfg = Config::default();
        let standard = Inputs::standard().unwrap();
        let mut detected = Vec::new();
        let mut missed = Vec::new();
        for id in CHECK_IDS {
            let c = verify::run_check(id, &Inputs::mutated(id).unwrap(), &cfg).unwrap();
            if c.status == Status::Fail {
                detected.push(id);
            } else {
                missed.push(id);
            }
        }
        let baseline_failing: Vec<&str> = CHECK_IDS
            .iter()
            .copied()
            .filter(|id| verify::run_check(id, &standard, &cfg).unwrap().status != Status::Pass)
            .collect();
        (
            missed.is_empty(),
            format!(
                "{} of 17 mutations detected, missed {missed:?}; checks failing without mutation: {baseline_failing:?}",
                detected.len()
            ),
        )
    })
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let criteria: [(&str, fn() -> Criterion); 11] = [
        ("group law", criterion_1),
        ("stated cocycles", criterion_2),
        ("extension cocycles", criterion_3),
        ("Steenrod identities", criterion_4),
        ("restriction tables", criterion_5),
        ("Betti numbers", criterion_6),
        ("ring structure", criterion_7),
        ("non-nilpotence chain", criterion_8),
        ("conjecture evidence", criterion_9),
        ("oracle equivalence", criterion_10),
        ("fault injection", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let c = f();
        if !c.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {name}: {} ({})",
            i + 1,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    println!("acceptance: {} of 11 criteria pass", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
