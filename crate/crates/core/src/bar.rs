//! Inhomogeneous bar cochains with F2 coefficients.
//!
//! A degree-`n` cochain is a function `G^n -> F2` stored as a bit vector over all
//! `n`-tuples. The tuple `(g_1, ..., g_n)` has index `g_1 * |G|^(n-1) + ... + g_n`
//! using the element indices of [`crate::pc`], so coordinate `i` of argument `s`
//! (both counted from the left, `s` 1-based) is bit `(n - s) * k + (k - 1 - i)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2::{check_dense, BitMatrix, BitVec, Echelon, Schedule};
use crate::pc::{canonical_section, quotient_by_central, Element, GroupMap, MapKind, PcPresentation};

/// Longest tuple the evaluators handle.
const MAX_DEGREE: usize = 62;

#[derive(Clone, PartialEq, Eq)]
pub struct Cochain {
    group: Arc<PcPresentation>,
    degree: usize,
    values: BitVec,
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Cochain({}, degree {}, {} ones)",
            self.group.name(),
            self.degree,
            self.values.count_ones()
        )
    }
}

fn tuple_count(g: &PcPresentation, n: usize) -> Result<usize> {
    if n > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!("degree {n} is beyond {MAX_DEGREE}")));
    }
    let bits = g.k() as u128 * n as u128;
    check_dense(&format!("degree-{n} cochain over {}", g.name()), 1, 1u128 << bits)?;
    Ok(1usize << bits)
}

/// Fills a bit vector of length `len` by evaluating `f` at every index, in parallel.
fn tabulate(len: usize, f: impl Fn(usize) -> bool + Sync) -> BitVec {
    let nwords = len.div_ceil(64);
    let words: Vec<u64> = (0..nwords)
        .into_par_iter()
        .map(|w| {
            let mut word = 0u64;
            for b in 0..64 {
                let i = w * 64 + b;
                if i >= len {
                    break;
                }
                if f(i) {
                    word |= 1 << b;
                }
            }
            word
        })
        .collect();
    BitVec::from_words(len, words)
}

#[derive(Clone, Copy)]
struct Layout {
    k: usize,
    mask: usize,
}

impl Layout {
    fn of(g: &PcPresentation) -> Self {
        Layout {
            k: g.k(),
            mask: g.order() - 1,
        }
    }

    #[inline]
    fn decode(self, idx: usize, n: usize, out: &mut [u32]) {
        for (s, slot) in out.iter_mut().enumerate().take(n) {
            *slot = ((idx >> ((n - 1 - s) * self.k)) & self.mask) as u32;
        }
    }

    #[inline]
    fn encode(self, args: impl IntoIterator<Item = u32>) -> usize {
        args.into_iter()
            .fold(0usize, |acc, a| (acc << self.k) | a as usize)
    }
}

/// Index of the face of `x` (vertices `0..=n`) that keeps the vertices in `keep`.
/// The face has arguments `x_{v_{j-1}+1} ... x_{v_j}`.
#[inline]
fn face_index(g: &PcPresentation, lay: Layout, x: &[u32], keep: &[usize]) -> usize {
    let mut idx = 0usize;
    for w in keep.windows(2) {
        let mut h = Element::IDENTITY;
        for &xi in &x[w[0]..w[1]] {
            h = g.mul(h, Element(xi));
        }
        idx = (idx << lay.k) | h.index();
    }
    idx
}

impl Cochain {
    pub fn zero(group: Arc<PcPresentation>, degree: usize) -> Result<Self> {
        let len = tuple_count(&group, degree)?;
        Ok(Cochain {
            group,
            degree,
            values: BitVec::zeros(len),
        })
    }

    pub fn from_values(group: Arc<PcPresentation>, degree: usize, values: BitVec) -> Result<Self> {
        let len = tuple_count(&group, degree)?;
        if values.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: values.len(),
            });
        }
        Ok(Cochain {
            group,
            degree,
            values,
        })
    }

    /// Evaluates `f` on every tuple.
    pub fn from_fn(
        group: Arc<PcPresentation>,
        degree: usize,
        f: impl Fn(&[Element]) -> bool + Sync,
    ) -> Result<Self> {
        let len = tuple_count(&group, degree)?;
        let lay = Layout::of(&group);
        let values = tabulate(len, |idx| {
            let mut raw = [0u32; MAX_DEGREE];
            lay.decode(idx, degree, &mut raw);
            let args: Vec<Element> = raw[..degree].iter().map(|&a| Element(a)).collect();
            f(&args)
        });
        Ok(Cochain {
            group,
            degree,
            values,
        })
    }

    /// The degree-0 cochain with the given value.
    pub fn constant(group: Arc<PcPresentation>, value: bool) -> Self {
        Cochain {
            group,
            degree: 0,
            values: BitVec::from_bools([value]),
        }
    }

    pub fn group(&self) -> &Arc<PcPresentation> {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &BitVec {
        &self.values
    }

    pub fn value(&self, args: &[Element]) -> Result<bool> {
        if args.len() != self.degree {
            return Err(Error::LengthMismatch {
                expected: self.degree,
                got: args.len(),
            });
        }
        if let Some(a) = args.iter().find(|a| !self.group.contains(**a)) {
            return Err(Error::GroupMismatch(format!(
                "{} is not an element of {}",
                a.0,
                self.group.name()
            )));
        }
        let idx = Layout::of(&self.group).encode(args.iter().map(|a| a.0));
        Ok(self.values.get(idx))
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_zero()
    }

    /// Zero on every tuple with an identity argument.
    pub fn is_normalized(&self) -> bool {
        let lay = Layout::of(&self.group);
        let n = self.degree;
        let mut raw = [0u32; MAX_DEGREE];
        self.values.iter_ones().all(|idx| {
            lay.decode(idx, n, &mut raw);
            raw[..n].iter().all(|&a| a != 0)
        })
    }

    fn check_same(&self, other: &Cochain, degree: bool) -> Result<()> {
        if self.group.fingerprint() != other.group.fingerprint() {
            return Err(Error::GroupMismatch(format!(
                "cochains over {} and {}",
                self.group.name(),
                other.group.name()
            )));
        }
        if degree && self.degree != other.degree {
            return Err(Error::InvalidArgument(format!(
                "degrees {} and {} differ",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.check_same(other, true)?;
        Ok(Cochain {
            group: self.group.clone(),
            degree: self.degree,
            values: self.values.xor(&other.values),
        })
    }

    /// `δc(g_1..g_{n+1}) = c(g_2..) + Σ c(..g_i g_{i+1}..) + c(..g_n)`.
    pub fn coboundary(&self) -> Result<Cochain> {
        let n = self.degree;
        let len = tuple_count(&self.group, n + 1)?;
        let g = &*self.group;
        let lay = Layout::of(g);
        let low = (1usize << (n * lay.k)) - 1;
        let values = tabulate(len, |idx| {
            let mut raw = [0u32; MAX_DEGREE + 1];
            lay.decode(idx, n + 1, &mut raw);
            let x = &raw[..n + 1];
            let mut acc = self.values.get(idx & low) ^ self.values.get(idx >> lay.k);
            for i in 0..n {
                let merged = g.mul(Element(x[i]), Element(x[i + 1])).0;
                let face = lay.encode(
                    x[..i]
                        .iter()
                        .copied()
                        .chain(std::iter::once(merged))
                        .chain(x[i + 2..].iter().copied()),
                );
                acc ^= self.values.get(face);
            }
            acc
        });
        Ok(Cochain {
            group: self.group.clone(),
            degree: n + 1,
            values,
        })
    }

    pub fn is_cocycle(&self) -> Result<bool> {
        Ok(self.coboundary()?.is_zero())
    }

    fn require_cocycle(&self, what: &str) -> Result<()> {
        if !self.is_cocycle()? {
            return Err(Error::NotCocycle(format!(
                "{what}: degree-{} cochain over {} has nonzero coboundary",
                self.degree,
                self.group.name()
            )));
        }
        Ok(())
    }

    /// `(a ∪ b)(g_1..g_{p+q}) = a(g_1..g_p) b(g_{p+1}..g_{p+q})`.
    pub fn cup(&self, other: &Cochain) -> Result<Cochain> {
        self.check_same(other, false)?;
        let (p, q) = (self.degree, other.degree);
        let len = tuple_count(&self.group, p + q)?;
        let shift = q * self.group.k();
        let low = (1usize << shift) - 1;
        let values = tabulate(len, |idx| {
            self.values.get(idx >> shift) && other.values.get(idx & low)
        });
        Ok(Cochain {
            group: self.group.clone(),
            degree: p + q,
            values,
        })
    }

    /// Cup-`i` product of degree `p + q - i`.
    ///
    /// With `n = p + q - i` and vertices `0..=n`, sums over subsets
    /// `U = {u_1 < ... < u_{n-i}}` split into `U0 = {u_j : u_j + j even}` and
    /// `U1 = {u_j : u_j + j odd}`; `a` is evaluated on the face missing `U0` and `b`
    /// on the face missing `U1`. For `i = 0` this is the front/back-face cup product.
    pub fn cup_i(&self, other: &Cochain, i: usize) -> Result<Cochain> {
        self.check_same(other, false)?;
        let (p, q) = (self.degree, other.degree);
        if i > p.min(q) {
            return Err(Error::InvalidArgument(format!(
                "cup_{i} needs i <= min({p}, {q})"
            )));
        }
        let n = p + q - i;
        let len = tuple_count(&self.group, n)?;
        let terms = cup_i_terms(n, i, p, q);
        let g = &*self.group;
        let lay = Layout::of(g);
        let values = tabulate(len, |idx| {
            let mut raw = [0u32; MAX_DEGREE];
            lay.decode(idx, n, &mut raw);
            let x = &raw[..n];
            let mut acc = false;
            for (ka, kb) in &terms {
                if self.values.get(face_index(g, lay, x, ka))
                    && other.values.get(face_index(g, lay, x, kb))
                {
                    acc = !acc;
                }
            }
            acc
        });
        Ok(Cochain {
            group: self.group.clone(),
            degree: n,
            values,
        })
    }

    /// Representative of `Sq^k` of a cocycle of degree `n`: `c ∪_{n-k} c`.
    pub fn sq(&self, k: usize) -> Result<Cochain> {
        if k > self.degree {
            return Err(Error::InvalidArgument(format!(
                "Sq^{k} on a degree-{} class",
                self.degree
            )));
        }
        self.require_cocycle("sq")?;
        self.cup_i(self, self.degree - k)
    }

    /// `Sq^1` as the Bockstein: lift to values 0/1 mod 4, take the signed coboundary,
    /// halve.
    pub fn bockstein(&self) -> Result<Cochain> {
        self.require_cocycle("bockstein")?;
        let n = self.degree;
        let len = tuple_count(&self.group, n + 1)?;
        let g = &*self.group;
        let lay = Layout::of(g);
        let low = (1usize << (n * lay.k)) - 1;
        let values = tabulate(len, |idx| {
            let mut raw = [0u32; MAX_DEGREE + 1];
            lay.decode(idx, n + 1, &mut raw);
            let x = &raw[..n + 1];
            let val = |face: usize| self.values.get(face) as i32;
            let mut acc = val(idx & low);
            for i in 0..n {
                let merged = g.mul(Element(x[i]), Element(x[i + 1])).0;
                let face = lay.encode(
                    x[..i]
                        .iter()
                        .copied()
                        .chain(std::iter::once(merged))
                        .chain(x[i + 2..].iter().copied()),
                );
                let sign = if i % 2 == 0 { -1 } else { 1 };
                acc += sign * val(face);
            }
            let sign = if (n + 1) % 2 == 0 { 1 } else { -1 };
            acc += sign * val(idx >> lay.k);
            let r = acc.rem_euclid(4);
            debug_assert!(r % 2 == 0);
            r == 2
        });
        Ok(Cochain {
            group: self.group.clone(),
            degree: n + 1,
            values,
        })
    }

    /// Precomposition with `map` in every argument; `map` must land in this cochain's group.
    pub fn pullback(&self, map: &GroupMap) -> Result<Cochain> {
        if map.codomain().fingerprint() != self.group.fingerprint() {
            return Err(Error::GroupMismatch(format!(
                "map into {} applied to a cochain over {}",
                map.codomain().name(),
                self.group.name()
            )));
        }
        let n = self.degree;
        let dom = map.domain().clone();
        let len = tuple_count(&dom, n)?;
        let dl = Layout::of(&dom);
        let cl = Layout::of(&self.group);
        let values = tabulate(len, |idx| {
            let mut raw = [0u32; MAX_DEGREE];
            dl.decode(idx, n, &mut raw);
            let img = cl.encode(raw[..n].iter().map(|&a| map.apply(Element(a)).0));
            self.values.get(img)
        });
        Ok(Cochain {
            group: dom,
            degree: n,
            values,
        })
    }

    pub fn restrict(&self, embedding: &GroupMap) -> Result<Cochain> {
        if embedding.kind() != MapKind::Embedding {
            return Err(Error::InvalidArgument("restriction needs an embedding".into()));
        }
        self.pullback(embedding)
    }

    pub fn inflate(&self, quotient: &GroupMap) -> Result<Cochain> {
        if quotient.kind() != MapKind::Quotient {
            return Err(Error::InvalidArgument("inflation needs a quotient map".into()));
        }
        self.pullback(quotient)
    }

    pub fn to_json(&self) -> CochainJson {
        CochainJson {
            group: self.group.name().to_string(),
            degree: self.degree,
            values: self.values.to_hex(),
        }
    }

    pub fn from_json(group: Arc<PcPresentation>, doc: &CochainJson) -> Result<Cochain> {
        if doc.group != group.name() {
            return Err(Error::GroupMismatch(format!(
                "document is over {}, expected {}",
                doc.group,
                group.name()
            )));
        }
        let len = tuple_count(&group, doc.degree)?;
        let values = BitVec::from_hex(len, &doc.values)?;
        Cochain::from_values(group, doc.degree, values)
    }
}

/// Face pairs `(kept by a, kept by b)` contributing to `a ∪_i b` in degree `n`.
fn cup_i_terms(n: usize, i: usize, p: usize, q: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let size = n - i;
    let mut out = Vec::new();
    let verts = n + 1;
    for mask in 0u64..(1u64 << verts) {
        if mask.count_ones() as usize != size {
            continue;
        }
        let mut u0 = 0u64;
        let mut u1 = 0u64;
        let mut j = 0;
        for v in 0..verts {
            if mask >> v & 1 == 1 {
                j += 1;
                if (v + j) % 2 == 0 {
                    u0 |= 1 << v;
                } else {
                    u1 |= 1 << v;
                }
            }
        }
        if u0.count_ones() as usize != n - p || u1.count_ones() as usize != n - q {
            continue;
        }
        let keep = |drop: u64| (0..verts).filter(|v| drop >> v & 1 == 0).collect::<Vec<_>>();
        out.push((keep(u0), keep(u1)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CochainJson {
    pub group: String,
    pub degree: usize,
    /// Little-endian packed bits, see [`BitVec::to_hex`].
    pub values: String,
}

/// The factor set `(g_1, g_2) ↦ σ(g_1) σ(g_2) σ(g_1 g_2)^{-1}` of a central extension
/// with kernel the last generator, read off as that generator's exponent.
pub fn factor_set(quotient: &GroupMap, section: &GroupMap) -> Result<Cochain> {
    let g = quotient.domain();
    let q = quotient.codomain();
    if section.domain().fingerprint() != q.fingerprint()
        || section.codomain().fingerprint() != g.fingerprint()
    {
        return Err(Error::GroupMismatch("section does not match the quotient map".into()));
    }
    if q.elements().any(|x| quotient.apply(section.apply(x)) != x) {
        return Err(Error::InvalidArgument("section is not right inverse to the quotient".into()));
    }
    let z = g.generator(g.k() - 1);
    let value = |x: Element, y: Element| {
        g.mul(
            g.mul(section.apply(x), section.apply(y)),
            g.inv(section.apply(q.mul(x, y))),
        )
    };
    for x in q.elements() {
        for y in q.elements() {
            let v = value(x, y);
            if !v.is_identity() && v != z {
                return Err(Error::InvalidArgument(format!(
                    "factor set value at ({}, {}) is outside the kernel",
                    x.0, y.0
                )));
            }
        }
    }
    let c = Cochain::from_fn(q.clone(), 2, |args| value(args[0], args[1]) == z)?;
    Ok(c)
}

/// Extension cocycle of `G` over `G/<z>` using the canonical section; the quotient is
/// named `quotient_name`.
pub fn extension_cocycle(
    g: &Arc<PcPresentation>,
    z: Element,
    quotient_name: &str,
) -> Result<Cochain> {
    let (_, quot) = quotient_by_central(g, z, quotient_name)?;
    let sigma = canonical_section(&quot)?;
    factor_set(&quot, &sigma)
}

/// A formal F2 polynomial in coordinate functions `s_j` (coordinate `s` of argument `j`).
///
/// Text form: `+`-separated monomials of `<symbol><argument>` factors, joined by `*`
/// or juxtaposition, with parentheses, `0` and `1`; e.g. `b1*a2*c2 + c1a2`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoordExpr {
    terms: BTreeSet<Monomial>,
}

/// A product of coordinate functions; the empty product is 1.
pub type Monomial = BTreeSet<(usize, String)>;

impl CoordExpr {
    pub fn zero() -> Self {
        CoordExpr::default()
    }

    pub fn one() -> Self {
        CoordExpr {
            terms: BTreeSet::from([Monomial::new()]),
        }
    }

    /// The coordinate function `symbol` of argument `arg` (1-based).
    pub fn var(symbol: &str, arg: usize) -> Self {
        CoordExpr {
            terms: BTreeSet::from([Monomial::from([(arg, symbol.to_string())])]),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.iter()
    }

    fn toggle(&mut self, m: Monomial) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn add(&self, other: &CoordExpr) -> CoordExpr {
        let mut out = self.clone();
        for m in &other.terms {
            out.toggle(m.clone());
        }
        out
    }

    /// Product; coordinates are bits, so repeated factors collapse.
    pub fn mul(&self, other: &CoordExpr) -> CoordExpr {
        let mut out = CoordExpr::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.toggle(a.union(b).cloned().collect());
            }
        }
        out
    }

    /// Largest argument subscript used.
    pub fn max_arg(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|m| m.iter().map(|(a, _)| *a))
            .max()
            .unwrap_or(0)
    }

    pub fn parse(text: &str) -> Result<CoordExpr> {
        let mut p = ExprParser {
            chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let e = p.sum()?;
        if p.pos != p.chars.len() {
            return Err(Error::Parse(format!(
                "unexpected `{}` at offset {} in `{text}`",
                p.chars[p.pos], p.pos
            )));
        }
        Ok(e)
    }
}

impl fmt::Display for CoordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|m| {
                if m.is_empty() {
                    "1".to_string()
                } else {
                    m.iter()
                        .map(|(a, s)| format!("{s}{a}"))
                        .collect::<Vec<_>>()
                        .join("*")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl std::str::FromStr for CoordExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CoordExpr::parse(s)
    }
}

struct ExprParser {
    chars: Vec<char>,
    pos: usize,
}

impl ExprParser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<CoordExpr> {
        let mut acc = self.product()?;
        while self.peek() == Some('+') {
            self.pos += 1;
            acc = acc.add(&self.product()?);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<CoordExpr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(c) if c == '(' || c.is_alphanumeric() => acc = acc.mul(&self.factor()?),
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<CoordExpr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(Error::Parse(format!("missing `)` at offset {}", self.pos)));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('0') => {
                self.pos += 1;
                Ok(CoordExpr::zero())
            }
            Some('1') => {
                self.pos += 1;
                Ok(CoordExpr::one())
            }
            Some(c) if c.is_alphabetic() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_alphabetic()) {
                    self.pos += 1;
                }
                let symbol: String = self.chars[start..self.pos].iter().collect();
                let dstart = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                if dstart == self.pos {
                    return Err(Error::Parse(format!("`{symbol}` needs an argument subscript")));
                }
                let digits: String = self.chars[dstart..self.pos].iter().collect();
                let arg: usize = digits
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad subscript `{digits}`")))?;
                if arg == 0 {
                    return Err(Error::Parse(format!("subscripts start at 1 in `{symbol}0`")));
                }
                Ok(CoordExpr::var(&symbol, arg))
            }
            Some(c) => Err(Error::Parse(format!("unexpected `{c}` at offset {}", self.pos))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

/// Pointwise evaluation of a coordinate expression on `G^degree`.
pub fn from_expr(group: Arc<PcPresentation>, degree: usize, expr: &CoordExpr) -> Result<Cochain> {
    let k = group.k();
    let mut masks = Vec::with_capacity(expr.terms.len());
    for m in &expr.terms {
        let mut mask = 0usize;
        for (arg, sym) in m {
            if *arg == 0 || *arg > degree {
                return Err(Error::InvalidArgument(format!(
                    "subscript {arg} of `{sym}` outside 1..={degree}"
                )));
            }
            let i = group.coordinate_index(sym).ok_or_else(|| Error::UnknownSymbol {
                group: group.name().to_string(),
                symbol: sym.clone(),
            })?;
            mask |= 1 << ((degree - arg) * k + (k - 1 - i));
        }
        masks.push(mask);
    }
    let len = tuple_count(&group, degree)?;
    let values = tabulate(len, |idx| {
        masks.iter().filter(|&&m| idx & m == m).count() % 2 == 1
    });
    Ok(Cochain {
        group,
        degree,
        values,
    })
}

/// Parses and evaluates in one step.
pub fn parse_cochain(group: Arc<PcPresentation>, degree: usize, text: &str) -> Result<Cochain> {
    from_expr(group, degree, &CoordExpr::parse(text)?)
}

fn normalized_index_map(g: &PcPresentation, n: usize) -> Result<(usize, Vec<u32>)> {
    // full tuple index -> position among tuples without identity arguments (u32::MAX if none)
    let len = tuple_count(g, n)?;
    let lay = Layout::of(g);
    let mut map = vec![u32::MAX; len];
    let mut next = 0u32;
    let mut raw = [0u32; MAX_DEGREE];
    for (idx, slot) in map.iter_mut().enumerate() {
        lay.decode(idx, n, &mut raw);
        if raw[..n].iter().all(|&a| a != 0) {
            *slot = next;
            next += 1;
        }
    }
    Ok((next as usize, map))
}

/// Matrix of `δ: C^{n-1} -> C^n`, rows indexed by `(n-1)`-tuples and columns by
/// `n`-tuples; with `normalized` only tuples without identity arguments are used.
pub fn coboundary_matrix(g: &PcPresentation, n: usize, normalized: bool) -> Result<BitMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("no coboundaries into degree 0".into()));
    }
    let ncols_full = tuple_count(g, n)?;
    let nrows_full = tuple_count(g, n - 1)?;
    let (rmap, cmap, rows, cols) = if normalized {
        let m = (g.order() - 1) as u128;
        check_dense("coboundary matrix", m.pow(n as u32 - 1), m.pow(n as u32))?;
        let (r, rmap) = normalized_index_map(g, n - 1)?;
        let (c, cmap) = normalized_index_map(g, n)?;
        (Some(rmap), Some(cmap), r, c)
    } else {
        (None, None, nrows_full, ncols_full)
    };
    check_dense("coboundary matrix", rows as u128, cols as u128)?;
    let mut m = BitMatrix::zeros(rows, cols)?;
    let lay = Layout::of(g);
    let low = (1usize << ((n - 1) * lay.k)) - 1;
    let mut raw = [0u32; MAX_DEGREE];
    for idx in 0..ncols_full {
        let col = match &cmap {
            Some(cm) if cm[idx] == u32::MAX => continue,
            Some(cm) => cm[idx] as usize,
            None => idx,
        };
        lay.decode(idx, n, &mut raw);
        let x = &raw[..n];
        let mut faces = Vec::with_capacity(n + 1);
        faces.push(idx & low);
        for i in 0..n - 1 {
            let merged = g.mul(Element(x[i]), Element(x[i + 1])).0;
            faces.push(
                lay.encode(
                    x[..i]
                        .iter()
                        .copied()
                        .chain(std::iter::once(merged))
                        .chain(x[i + 2..].iter().copied()),
                ),
            );
        }
        faces.push(idx >> lay.k);
        for f in faces {
            let row = match &rmap {
                Some(rm) if rm[f] == u32::MAX => continue,
                Some(rm) => rm[f] as usize,
                None => f,
            };
            m.flip(row, col);
        }
    }
    Ok(m)
}

type EchelonKey = (String, usize, bool);

fn coboundary_echelon(g: &PcPresentation, n: usize, normalized: bool) -> Result<Arc<Echelon>> {
    static CACHE: OnceLock<Mutex<HashMap<EchelonKey, Arc<Echelon>>>> = OnceLock::new();
    let key = (g.fingerprint().to_string(), n, normalized);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(e) = cache.lock().expect("echelon cache").get(&key) {
        return Ok(e.clone());
    }
    let m = coboundary_matrix(g, n, normalized)?;
    log::debug!(
        "coboundary echelon for {} degree {n}: {} x {}",
        g.name(),
        m.rows(),
        m.cols()
    );
    let e = Arc::new(Echelon::with_transform(&m, Schedule::Parallel)?);
    cache.lock().expect("echelon cache").insert(key, e.clone());
    Ok(e)
}

/// A cochain `b` with `δb = c`, if `c` is a coboundary. `c` must be a cocycle.
pub fn coboundary_witness(c: &Cochain) -> Result<Option<Cochain>> {
    c.require_cocycle("class decision")?;
    let n = c.degree();
    let g = c.group().clone();
    if n == 0 {
        return Ok(c.is_zero().then(|| Cochain::constant(g, false)));
    }
    let normalized = c.is_normalized();
    let e = coboundary_echelon(&g, n, normalized)?;
    let target = if normalized {
        let (_, cmap) = normalized_index_map(&g, n)?;
        let mut v = BitVec::zeros(e.cols());
        for idx in c.values().iter_ones() {
            v.set(cmap[idx] as usize, true);
        }
        v
    } else {
        c.values().clone()
    };
    let Some(w) = e.solve(&target) else {
        return Ok(None);
    };
    let values = if normalized {
        let (_, rmap) = normalized_index_map(&g, n - 1)?;
        let mut full = BitVec::zeros(rmap.len());
        for (idx, &r) in rmap.iter().enumerate() {
            if r != u32::MAX && w.get(r as usize) {
                full.set(idx, true);
            }
        }
        full
    } else {
        w
    };
    Ok(Some(Cochain::from_values(g, n - 1, values)?))
}

pub fn class_is_zero(c: &Cochain) -> Result<bool> {
    Ok(coboundary_witness(c)?.is_some())
}

pub fn classes_equal(a: &Cochain, b: &Cochain) -> Result<bool> {
    class_is_zero(&a.add(b)?)
}

/// `dim H^n` of the bar complex: `dim C^n - rank δ_n - rank δ_{n-1}` on normalized cochains.
pub fn bar_betti(g: &PcPresentation, n: usize) -> Result<usize> {
    let m = (g.order() - 1) as u128;
    let dim = m.pow(n as u32);
    let rank_out = coboundary_matrix(g, n + 1, true)?.rank() as u128;
    let rank_in = if n == 0 {
        0
    } else {
        coboundary_matrix(g, n, true)?.rank() as u128
    };
    Ok((dim - rank_out - rank_in) as usize)
}
