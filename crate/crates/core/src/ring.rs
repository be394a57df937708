//! Finitely presented graded commutative F2-algebras, handled degree by degree.
//!
//! In characteristic 2 graded commutativity is plain commutativity, so a presentation
//! is a polynomial ring on generators of positive degree modulo homogeneous relations.
//! Each degree is the span of its monomials modulo the span of all `m * rel`; normal
//! forms are coordinates over the non-pivot monomials of that relation span.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::{BitMatrix, BitVec, Echelon, Schedule, Subspace};
use crate::resolution::{MinClass, RingTables};

/// Default limit on the number of monomials in one degree.
pub const DEFAULT_MONOMIAL_CAP: usize = 200_000;

pub type Exponents = Vec<u32>;

/// A polynomial over F2 as a set of exponent vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeSet<Exponents>,
}

impl Poly {
    pub fn terms(&self) -> impl Iterator<Item = &Exponents> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn toggle(&mut self, m: Exponents) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }
}

struct DegreeData {
    monomials: Vec<Exponents>,
    index: HashMap<Exponents, usize>,
    relations: Echelon,
    /// Monomial indices that survive as the normal-form basis.
    normal: Vec<usize>,
}

pub struct RingPresentation {
    names: Vec<String>,
    degrees: Vec<usize>,
    relations: Vec<(Poly, usize, String)>,
    monomial_cap: usize,
    cache: Mutex<HashMap<usize, Arc<DegreeData>>>,
}

impl fmt::Debug for RingPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingPresentation({self})")
    }
}

impl fmt::Display for RingPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self
            .names
            .iter()
            .zip(&self.degrees)
            .map(|(n, d)| format!("{n}:{d}"))
            .collect();
        let rels: Vec<String> = self.relations.iter().map(|(_, _, t)| t.clone()).collect();
        write!(f, "gens: {}; rels: {}", gens.join(" "), rels.join(", "))
    }
}

impl RingPresentation {
    pub fn new(generators: &[(&str, usize)], relations: &[&str]) -> Result<Self> {
        let mut names = Vec::new();
        let mut degrees = Vec::new();
        for &(n, d) in generators {
            if d == 0 {
                return Err(Error::InvalidArgument(format!("generator {n} has degree 0")));
            }
            if !valid_name(n) {
                return Err(Error::Parse(format!("bad generator name `{n}`")));
            }
            if names.iter().any(|m| m == n) {
                return Err(Error::Parse(format!("duplicate generator `{n}`")));
            }
            names.push(n.to_string());
            degrees.push(d);
        }
        let mut p = RingPresentation {
            names,
            degrees,
            relations: Vec::new(),
            monomial_cap: DEFAULT_MONOMIAL_CAP,
            cache: Mutex::new(HashMap::new()),
        };
        for r in relations {
            let poly = p.parse_poly(r)?;
            if poly.is_zero() {
                continue;
            }
            let d = p.homogeneous_degree(&poly).ok_or_else(|| {
                Error::InvalidArgument(format!("relation `{r}` is not homogeneous"))
            })?;
            p.relations.push((poly, d, r.split_whitespace().collect()));
        }
        Ok(p)
    }

    /// Parses `gens: u:1 v:1 W:2; rels: v^2+u*v, u^2` (whitespace-insensitive).
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let body = compact
            .strip_prefix("gens:")
            .ok_or_else(|| Error::Parse("presentation must start with `gens:`".into()))?;
        let (gens_part, rels_part) = match body.split_once(';') {
            Some((g, r)) => {
                let r = r.trim_end_matches(';');
                let r = if r.is_empty() {
                    ""
                } else {
                    r.strip_prefix("rels:")
                        .ok_or_else(|| Error::Parse("expected `rels:` after `;`".into()))?
                };
                (g, r)
            }
            None => (body, ""),
        };
        // re-split the generator list on the original text so names and degrees can be
        // separated by whitespace, commas or nothing at all
        let mut gens = Vec::new();
        let chars: Vec<char> = gens_part.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            if chars[i] == ',' {
                i += 1;
                continue;
            }
            let start = i;
            while i < chars.len() && chars[i] != ':' {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            if i == chars.len() {
                return Err(Error::Parse(format!("generator `{name}` needs `:degree`")));
            }
            i += 1;
            let dstart = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[dstart..i].iter().collect();
            let d: usize = digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad degree for `{name}`")))?;
            gens.push((name, d));
        }
        let gens_ref: Vec<(&str, usize)> = gens.iter().map(|(n, d)| (n.as_str(), *d)).collect();
        let rels: Vec<&str> = if rels_part.is_empty() {
            Vec::new()
        } else {
            rels_part.split(',').collect()
        };
        RingPresentation::new(&gens_ref, &rels)
    }

    pub fn with_monomial_cap(mut self, cap: usize) -> Self {
        self.monomial_cap = cap;
        self.cache.lock().expect("degree cache").clear();
        self
    }

    pub fn generator_names(&self) -> &[String] {
        &self.names
    }

    pub fn generator_degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn relations(&self) -> impl Iterator<Item = &Poly> {
        self.relations.iter().map(|(p, _, _)| p)
    }

    fn generator_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownSymbol {
                group: "presentation".into(),
                symbol: name.to_string(),
            })
    }

    pub fn monomial_degree(&self, m: &[u32]) -> usize {
        m.iter().zip(&self.degrees).map(|(&e, &d)| e as usize * d).sum()
    }

    fn homogeneous_degree(&self, p: &Poly) -> Option<usize> {
        let mut degs = p.terms.iter().map(|m| self.monomial_degree(m));
        let d = degs.next()?;
        degs.all(|e| e == d).then_some(d)
    }

    pub fn format_monomial(&self, m: &[u32]) -> String {
        let parts: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    self.names[i].clone()
                } else {
                    format!("{}^{e}", self.names[i])
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn format_poly(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".into();
        }
        p.terms
            .iter()
            .rev()
            .map(|m| self.format_monomial(m))
            .collect::<Vec<_>>()
            .join("+")
    }

    /// Parses a polynomial in the generators: `+` sums of `*` products of `name^k`.
    pub fn parse_poly(&self, text: &str) -> Result<Poly> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut poly = Poly::default();
        if text.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        for term in text.split('+') {
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in `{text}`")));
            }
            let mut m = vec![0u32; self.names.len()];
            let mut zero = false;
            for factor in term.split('*') {
                let (name, power) = match factor.split_once('^') {
                    Some((n, p)) => (
                        n,
                        p.parse::<u32>()
                            .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?,
                    ),
                    None => (factor, 1),
                };
                match name {
                    "1" => {}
                    "0" => zero = true,
                    _ => m[self.generator_index(name)?] += power,
                }
            }
            if !zero {
                poly.toggle(m);
            }
        }
        Ok(poly)
    }

    fn monomials_of_degree(&self, d: usize) -> Result<Vec<Exponents>> {
        fn rec(
            degs: &[usize],
            i: usize,
            left: usize,
            cur: &mut Exponents,
            out: &mut Vec<Exponents>,
            cap: usize,
        ) -> bool {
            if i == degs.len() {
                if left == 0 {
                    out.push(cur.clone());
                    return out.len() <= cap;
                }
                return true;
            }
            for e in (0..=left / degs[i]).rev() {
                cur[i] = e as u32;
                if !rec(degs, i + 1, left - e * degs[i], cur, out, cap) {
                    return false;
                }
            }
            cur[i] = 0;
            true
        }
        let mut out = Vec::new();
        let mut cur = vec![0; self.names.len()];
        if !rec(&self.degrees, 0, d, &mut cur, &mut out, self.monomial_cap) {
            return Err(Error::MonomialCap {
                degree: d,
                count: out.len(),
                cap: self.monomial_cap,
            });
        }
        Ok(out)
    }

    fn degree_data(&self, d: usize) -> Result<Arc<DegreeData>> {
        if let Some(dd) = self.cache.lock().expect("degree cache").get(&d) {
            return Ok(dd.clone());
        }
        // Monomials come in descending lexicographic order, so pivots land on the
        // lexicographically largest terms.
        let monomials = self.monomials_of_degree(d)?;
        let index: HashMap<Exponents, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut rows = Vec::new();
        for (rel, rd, _) in &self.relations {
            if *rd > d {
                continue;
            }
            for m in self.monomials_of_degree(d - rd)? {
                let mut v = BitVec::zeros(monomials.len());
                for t in &rel.terms {
                    let prod: Exponents = t.iter().zip(&m).map(|(a, b)| a + b).collect();
                    v.flip(index[&prod]);
                }
                rows.push(v);
            }
        }
        let relations = Echelon::new(&BitMatrix::from_rows(&rows, monomials.len())?, Schedule::Sequential);
        let pivots: BTreeSet<usize> = relations.pivots().iter().copied().collect();
        let normal = (0..monomials.len()).filter(|i| !pivots.contains(i)).collect();
        let dd = Arc::new(DegreeData {
            monomials,
            index,
            relations,
            normal,
        });
        self.cache.lock().expect("degree cache").insert(d, dd.clone());
        Ok(dd)
    }

    /// Dimensions of degrees `0..=n`.
    pub fn hilbert(&self, n: usize) -> Result<Vec<usize>> {
        (0..=n).map(|d| Ok(self.degree_data(d)?.normal.len())).collect()
    }

    /// Monomials forming the normal-form basis of degree `d`.
    pub fn basis_monomials(&self, d: usize) -> Result<Vec<Exponents>> {
        let dd = self.degree_data(d)?;
        Ok(dd.normal.iter().map(|&i| dd.monomials[i].clone()).collect())
    }

    fn reduce(&self, d: usize, terms: impl IntoIterator<Item = Exponents>) -> Result<RingElement> {
        let dd = self.degree_data(d)?;
        let mut v = BitVec::zeros(dd.monomials.len());
        for t in terms {
            v.flip(dd.index[&t]);
        }
        dd.relations.reduce(&mut v);
        Ok(RingElement {
            degree: d,
            coeffs: BitVec::from_bools(dd.normal.iter().map(|&i| v.get(i))),
        })
    }

    /// Normal form of a homogeneous polynomial.
    pub fn element(&self, p: &Poly) -> Result<RingElement> {
        match self.homogeneous_degree(p) {
            Some(d) => self.reduce(d, p.terms.iter().cloned()),
            None if p.is_zero() => Ok(RingElement::zero(0, 1)),
            None => Err(Error::InvalidArgument("polynomial is not homogeneous".into())),
        }
    }

    pub fn parse_element(&self, text: &str) -> Result<RingElement> {
        self.element(&self.parse_poly(text)?)
    }

    pub fn one(&self) -> RingElement {
        RingElement {
            degree: 0,
            coeffs: BitVec::from_bools([true]),
        }
    }

    pub fn generator(&self, name: &str) -> Result<RingElement> {
        let i = self.generator_index(name)?;
        let mut m = vec![0; self.names.len()];
        m[i] = 1;
        self.reduce(self.degrees[i], [m])
    }

    pub fn zero(&self, degree: usize) -> Result<RingElement> {
        Ok(RingElement::zero(degree, self.degree_data(degree)?.normal.len()))
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        if a.degree != b.degree {
            return Err(Error::InvalidArgument(format!(
                "adding elements of degrees {} and {}",
                a.degree, b.degree
            )));
        }
        Ok(RingElement {
            degree: a.degree,
            coeffs: a.coeffs.xor(&b.coeffs),
        })
    }

    pub fn multiply(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        let (da, db) = (self.degree_data(a.degree)?, self.degree_data(b.degree)?);
        let mut terms = Poly::default();
        for i in a.coeffs.iter_ones() {
            for j in b.coeffs.iter_ones() {
                let (x, y) = (&da.monomials[da.normal[i]], &db.monomials[db.normal[j]]);
                terms.toggle(x.iter().zip(y).map(|(p, q)| p + q).collect());
            }
        }
        self.reduce(a.degree + b.degree, terms.terms)
    }

    pub fn pow(&self, a: &RingElement, k: u32) -> Result<RingElement> {
        let mut acc = self.one();
        for _ in 0..k {
            acc = self.multiply(&acc, a)?;
        }
        Ok(acc)
    }

    /// True iff `e^k = 0` for some `k` with `k * deg(e) <= n`.
    pub fn is_nilpotent_up_to(&self, e: &RingElement, n: usize) -> Result<bool> {
        if e.is_zero() {
            return Ok(true);
        }
        if e.degree == 0 {
            return Ok(false);
        }
        let mut acc = e.clone();
        let mut deg = e.degree;
        while deg + e.degree <= n {
            acc = self.multiply(&acc, e)?;
            deg += e.degree;
            if acc.is_zero() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The polynomial of a normal form.
    pub fn to_poly(&self, e: &RingElement) -> Result<Poly> {
        let dd = self.degree_data(e.degree)?;
        let mut p = Poly::default();
        for i in e.coeffs.iter_ones() {
            p.toggle(dd.monomials[dd.normal[i]].clone());
        }
        Ok(p)
    }
}

fn valid_name(n: &str) -> bool {
    let mut chars = n.chars();
    chars.next().is_some_and(|c| c.is_alphabetic())
        && chars.all(|c| c.is_alphanumeric() || c == '\'' || c == '_')
}

/// A homogeneous element in normal-form coordinates of its presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingElement {
    pub degree: usize,
    pub coeffs: BitVec,
}

impl RingElement {
    fn zero(degree: usize, dim: usize) -> Self {
        RingElement {
            degree,
            coeffs: BitVec::zeros(dim),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchReport {
    pub isomorphic: bool,
    pub degree: usize,
    pub hilbert: Vec<usize>,
    pub betti: Vec<usize>,
    /// Description of the first failing condition.
    pub failure: Option<String>,
    /// All relations that do not vanish under the assignment.
    pub failing_relations: Vec<String>,
}

/// Decides whether `p` describes the computed ring through degree `n`: relations
/// vanish under `assignment`, generator monomials span every degree, and the
/// Hilbert function equals the Betti numbers.
pub fn match_presentation(
    tables: &RingTables,
    p: &RingPresentation,
    assignment: &[(String, MinClass)],
    n: usize,
) -> Result<MatchReport> {
    if n > tables.maxdeg {
        return Err(Error::DegreeOverflow {
            degree: n,
            length: tables.maxdeg,
        });
    }
    let hilbert = p.hilbert(n)?;
    let betti = tables.betti[..=n].to_vec();
    let mut report = MatchReport {
        isomorphic: false,
        degree: n,
        hilbert: hilbert.clone(),
        betti: betti.clone(),
        failure: None,
        failing_relations: Vec::new(),
    };
    let mut gens = Vec::new();
    for (name, deg) in p.names.iter().zip(&p.degrees) {
        match assignment.iter().find(|(a, _)| a == name) {
            Some((_, c)) if c.degree == *deg && c.coeffs.len() == tables.betti.get(*deg).copied().unwrap_or(0) => {
                gens.push(c.clone())
            }
            Some(_) => {
                report.failure = Some(format!("assignment for {name} has the wrong degree"));
                return Ok(report);
            }
            None if *deg > n => gens.push(MinClass::zero(*deg, 0)),
            None => {
                report.failure = Some(format!("no class assigned to {name}"));
                return Ok(report);
            }
        }
    }
    let mut memo: HashMap<Exponents, MinClass> = HashMap::new();
    let mut eval = |m: &Exponents| -> Result<MinClass> { eval_monomial(tables, p, &gens, m, &mut memo) };
    for (rel, d, text) in &p.relations {
        if *d > n {
            continue;
        }
        let mut acc = MinClass::zero(*d, tables.betti[*d]);
        for t in &rel.terms {
            acc = acc.add(&eval(t)?)?;
        }
        if !acc.is_zero() {
            report.failing_relations.push(text.clone());
        }
    }
    if let Some(first) = report.failing_relations.first() {
        report.failure = Some(format!("relation {first} does not vanish"));
        return Ok(report);
    }
    for d in 0..=n {
        let mut span = Subspace::new(tables.betti[d]);
        for m in p.monomials_of_degree(d)? {
            span.insert(&eval(&m)?.coeffs);
        }
        if span.dim() != tables.betti[d] {
            report.failure = Some(format!(
                "monomials span {} of {} dimensions in degree {d}",
                span.dim(),
                tables.betti[d]
            ));
            return Ok(report);
        }
    }
    if hilbert != betti {
        let d = (0..=n).find(|&d| hilbert[d] != betti[d]).unwrap_or(0);
        report.failure = Some(format!(
            "Hilbert function {} differs from Betti number {} in degree {d}",
            hilbert[d], betti[d]
        ));
        return Ok(report);
    }
    report.isomorphic = true;
    Ok(report)
}

fn eval_monomial(
    tables: &RingTables,
    p: &RingPresentation,
    gens: &[MinClass],
    m: &Exponents,
    memo: &mut HashMap<Exponents, MinClass>,
) -> Result<MinClass> {
    if let Some(c) = memo.get(m) {
        return Ok(c.clone());
    }
    let c = match m.iter().position(|&e| e > 0) {
        None => tables.unit(),
        Some(i) => {
            let mut rest = m.clone();
            rest[i] -= 1;
            let r = eval_monomial(tables, p, gens, &rest, memo)?;
            tables.multiply(&r, &gens[i])?
        }
    };
    debug_assert_eq!(c.degree, p.monomial_degree(m));
    memo.insert(m.clone(), c.clone());
    Ok(c)
}

/// Presentation text of the cohomology ring of 32G3f (also the conjectured ring of `Phi_n`).
pub const RESULT_PRESENTATION: &str =
    "gens: u:1 v:1 W:2 y:3 z:4; rels: v^2+u*v, u^2, u*W, y^2+W^3, u*y";
pub const D8_PRESENTATION: &str = "gens: u:1 v:1 w:2; rels: v^2+u*v";
pub const K_PRESENTATION: &str = "gens: xi:1 phi:1 chi:2; rels: phi^2";
pub const C2_PRESENTATION: &str = "gens: t:1";
