//! Finite 2-groups given by polycyclic presentations in which every relative order is 2.
//!
//! A presentation on generators `g_1..g_k` fixes `g_i^2` and the conjugates
//! `g_i^{g_j} = g_j^{-1} g_i g_j` (for `j < i`) as words in later generators. Every
//! element then has a unique normal form `g_1^{a_1} ... g_k^{a_k}` with `a_i` in `{0, 1}`.
//!
//! Elements are identified with the integer whose binary digits are the exponents,
//! first generator most significant: `f_1^a f_2^b f_3^c` in a 3-generator group is
//! `4a + 2b + c`. All cochain indexing downstream relies on this convention.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplication tables are precomputed up to this order.
const TABLE_MAX_ORDER: usize = 1 << 10;
/// Presentations up to this order are checked for associativity exhaustively on construction.
const EXHAUSTIVE_CHECK_ORDER: usize = 256;
/// Generator count limit (element indices are `u32`).
pub const MAX_GENERATORS: usize = 24;

/// A group element in normal form, stored as its index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize, Deserialize)]
pub struct Element(pub u32);

impl Element {
    pub const IDENTITY: Element = Element(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_identity(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone)]
pub struct PcPresentation {
    name: String,
    k: usize,
    coords: Vec<String>,
    power: Vec<Element>,
    /// `conj[j][i]` is `g_i^{g_j}` for `j < i`.
    conj: Vec<Vec<Element>>,
    table: Vec<u32>,
    inverse: Vec<u32>,
    fingerprint: String,
}

impl fmt::Debug for PcPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PcPresentation")
            .field("name", &self.name)
            .field("k", &self.k)
            .field("power", &self.power)
            .finish_non_exhaustive()
    }
}

impl PartialEq for PcPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
    }
}

impl Eq for PcPresentation {}

fn default_coords(k: usize) -> Vec<String> {
    (0..k).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

impl PcPresentation {
    /// Builds and validates a presentation.
    ///
    /// `conjugates` lists the nontrivial relations `((j, i), g_i^{g_j})` with 0-based
    /// `j < i`; all other pairs commute.
    pub fn new(
        name: impl Into<String>,
        k: usize,
        power: Vec<Element>,
        conjugates: &[((usize, usize), Element)],
    ) -> Result<Self> {
        let name = name.into();
        if k > MAX_GENERATORS {
            return Err(Error::InvalidPresentation(format!(
                "{name}: {k} generators exceeds the limit of {MAX_GENERATORS}"
            )));
        }
        if power.len() != k {
            return Err(Error::InvalidPresentation(format!(
                "{name}: expected {k} power relations, got {}",
                power.len()
            )));
        }
        let order = 1u64 << k;
        let bit = |i: usize| 1u32 << (k - 1 - i);
        for (i, p) in power.iter().enumerate() {
            if p.0 as u64 >= order || p.0 >= bit(i) {
                return Err(Error::InvalidPresentation(format!(
                    "{name}: power relation of g{} must only involve later generators",
                    i + 1
                )));
            }
        }
        let mut conj: Vec<Vec<Element>> = (0..k)
            .map(|_| (0..k).map(|i| Element(bit(i))).collect())
            .collect();
        for &((j, i), img) in conjugates {
            if !(j < i && i < k) {
                return Err(Error::InvalidPresentation(format!(
                    "{name}: conjugate relation ({}, {}) needs j < i <= k",
                    j + 1,
                    i + 1
                )));
            }
            if img.0 >= bit(j) || img.is_identity() {
                return Err(Error::InvalidPresentation(format!(
                    "{name}: conjugate g{}^g{} must be a nontrivial word in generators after g{}",
                    i + 1,
                    j + 1,
                    j + 1
                )));
            }
            conj[j][i] = img;
        }
        let fingerprint = {
            let mut s = format!("{name}|{k}|");
            for p in &power {
                s.push_str(&format!("{},", p.0));
            }
            for j in 0..k {
                for i in j + 1..k {
                    s.push_str(&format!(";{}", conj[j][i].0));
                }
            }
            s
        };
        let mut g = PcPresentation {
            name,
            k,
            coords: default_coords(k),
            power,
            conj,
            table: Vec::new(),
            inverse: Vec::new(),
            fingerprint,
        };
        g.build_tables();
        g.check_consistency()?;
        Ok(g)
    }

    /// Replaces the coordinate symbols used by coordinate expressions.
    pub fn with_coordinate_names<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self> {
        if names.len() != self.k {
            return Err(Error::InvalidArgument(format!(
                "{} coordinate names for {} generators",
                names.len(),
                self.k
            )));
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for n in &names {
            if n.is_empty() || !n.chars().all(|c| c.is_alphabetic()) {
                return Err(Error::InvalidArgument(format!("bad coordinate name `{n}`")));
            }
        }
        let unique: HashSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::InvalidArgument("duplicate coordinate names".into()));
        }
        self.coords = names;
        Ok(self)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        let name = name.into();
        self.fingerprint = format!("{name}|{}", self.fingerprint.split_once('|').map_or("", |x| x.1));
        self.name = name;
        self
    }

    fn build_tables(&mut self) {
        let n = self.order();
        if n > TABLE_MAX_ORDER {
            return;
        }
        let mut table = vec![0u32; n * n];
        for x in 0..n as u32 {
            for y in 0..n as u32 {
                table[x as usize * n + y as usize] = self.collect(x, y);
            }
        }
        self.table = table;
        let mut inverse = vec![0u32; n];
        for x in 0..n {
            inverse[x] = (0..n as u32)
                .find(|&y| self.table[x * n + y as usize] == 0)
                .unwrap_or(u32::MAX);
        }
        self.inverse = inverse;
    }

    /// Collection from the left: multiplies the normal form `x` by the letters of `y`.
    fn collect(&self, x: u32, y: u32) -> u32 {
        let k = self.k;
        let mut acc = x;
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        push_letters(&mut stack, k, y);
        let mut pending: Vec<usize> = Vec::with_capacity(32);
        while let Some(i) = stack.pop() {
            let bit = 1u32 << (k - 1 - i);
            let tail = acc & (bit - 1);
            let had = acc & bit != 0;
            acc &= !((bit << 1).wrapping_sub(1));
            pending.clear();
            if had {
                letters_into(&mut pending, k, self.power[i].0);
            } else {
                acc |= bit;
            }
            // Move the tail letters past g_i, in ascending generator order.
            let mut t = tail;
            let mut gens = Vec::new();
            while t != 0 {
                let pos = 31 - t.leading_zeros();
                gens.push(k - 1 - pos as usize);
                t &= !(1 << pos);
            }
            for j in gens {
                letters_into(&mut pending, k, self.conj[i][j].0);
            }
            stack.extend(pending.iter().rev());
        }
        acc
    }

    fn check_consistency(&self) -> Result<()> {
        let n = self.order();
        for x in 0..n as u32 {
            if self.inv(Element(x)).0 as usize >= n {
                return Err(Error::InvalidPresentation(format!(
                    "{}: element {x} has no inverse under collection",
                    self.name
                )));
            }
        }
        // The defining relations must hold in the collected law.
        for i in 0..self.k {
            let gi = self.generator(i);
            if self.mul(gi, gi) != self.power[i] {
                return Err(Error::InvalidPresentation(format!(
                    "{}: collected square of g{} disagrees with its power relation",
                    self.name,
                    i + 1
                )));
            }
            for j in 0..i {
                let gj = self.generator(j);
                if self.mul(self.mul(self.inv(gj), gi), gj) != self.conj[j][i] {
                    return Err(Error::InvalidPresentation(format!(
                        "{}: collected conjugate g{}^g{} disagrees with its relation",
                        self.name,
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if n <= EXHAUSTIVE_CHECK_ORDER {
            if let Some((x, y, z)) = self.find_nonassociative_triple() {
                return Err(Error::InvalidPresentation(format!(
                    "{}: inconsistent presentation, ({x}*{y})*{z} != {x}*({y}*{z})",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Exhaustive associativity search; `None` when the law is associative.
    pub fn find_nonassociative_triple(&self) -> Option<(u32, u32, u32)> {
        let n = self.order() as u32;
        for x in 0..n {
            for y in 0..n {
                let xy = self.mul(Element(x), Element(y));
                for z in 0..n {
                    let l = self.mul(xy, Element(z));
                    let r = self.mul(Element(x), self.mul(Element(y), Element(z)));
                    if l != r {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of pc generators.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        1 << self.k
    }

    /// Identifies the presentation (name and relations) for caching and compatibility checks.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn coordinate_names(&self) -> &[String] {
        &self.coords
    }

    pub fn coordinate_index(&self, symbol: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == symbol)
    }

    /// The `i`-th pc generator (0-based).
    pub fn generator(&self, i: usize) -> Element {
        Element(1 << (self.k - 1 - i))
    }

    pub fn generators(&self) -> Vec<Element> {
        (0..self.k).map(|i| self.generator(i)).collect()
    }

    pub fn power_relation(&self, i: usize) -> Element {
        self.power[i]
    }

    /// `g_i^{g_j}` for `j < i`.
    pub fn conjugate_relation(&self, j: usize, i: usize) -> Element {
        assert!(j < i);
        self.conj[j][i]
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        (0..self.order() as u32).map(Element)
    }

    pub fn contains(&self, x: Element) -> bool {
        x.index() < self.order()
    }

    /// Exponent of generator `i` in the normal form of `x`.
    #[inline]
    pub fn exponent(&self, x: Element, i: usize) -> u8 {
        ((x.0 >> (self.k - 1 - i)) & 1) as u8
    }

    pub fn exponents(&self, x: Element) -> Vec<u8> {
        (0..self.k).map(|i| self.exponent(x, i)).collect()
    }

    pub fn element(&self, exponents: &[u8]) -> Result<Element> {
        if exponents.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: exponents.len(),
            });
        }
        let mut idx = 0u32;
        for &e in exponents {
            if e > 1 {
                return Err(Error::InvalidArgument(format!("exponent {e} is not a bit")));
            }
            idx = (idx << 1) | e as u32;
        }
        Ok(Element(idx))
    }

    #[inline]
    pub fn mul(&self, x: Element, y: Element) -> Element {
        if self.table.is_empty() {
            Element(self.collect(x.0, y.0))
        } else {
            Element(self.table[x.index() * self.order() + y.index()])
        }
    }

    /// Multiplication with range checks on both operands.
    pub fn multiply(&self, x: Element, y: Element) -> Result<Element> {
        for e in [x, y] {
            if !self.contains(e) {
                return Err(Error::GroupMismatch(format!(
                    "element {} is not a normal form over {} (order {})",
                    e.0,
                    self.name,
                    self.order()
                )));
            }
        }
        Ok(self.mul(x, y))
    }

    #[inline]
    pub fn inv(&self, x: Element) -> Element {
        if self.inverse.is_empty() {
            let n = self.element_order(x);
            self.pow(x, n - 1)
        } else {
            Element(self.inverse[x.index()])
        }
    }

    pub fn pow(&self, x: Element, n: u64) -> Element {
        let mut acc = Element::IDENTITY;
        let mut base = x;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// Least `n >= 1` with `x^n = e`.
    pub fn element_order(&self, x: Element) -> u64 {
        let mut n = 1;
        let mut acc = x;
        while !acc.is_identity() {
            acc = self.mul(acc, x);
            n += 1;
        }
        n
    }

    /// `y^{-1} x y`.
    pub fn conjugate(&self, x: Element, y: Element) -> Element {
        self.mul(self.mul(self.inv(y), x), y)
    }

    pub fn commutes(&self, x: Element, y: Element) -> bool {
        self.mul(x, y) == self.mul(y, x)
    }

    pub fn is_central(&self, z: Element) -> bool {
        self.generators().into_iter().all(|g| self.commutes(g, z))
    }

    pub fn is_abelian(&self) -> bool {
        let gens = self.generators();
        gens.iter().all(|&x| gens.iter().all(|&y| self.commutes(x, y)))
    }

    /// Number of elements of each order.
    pub fn order_statistics(&self) -> BTreeMap<u64, usize> {
        let mut m = BTreeMap::new();
        for x in self.elements() {
            *m.entry(self.element_order(x)).or_insert(0) += 1;
        }
        m
    }

    /// Orders of the cyclic factors (descending) if the group is abelian.
    pub fn abelian_invariants(&self) -> Option<Vec<u64>> {
        if !self.is_abelian() {
            return None;
        }
        let stats = self.order_statistics();
        // |{x : x^(2^j) = 1}| = 2^(number of factors of order >= 2^1 .. counted with multiplicity)
        let omega = |j: u32| -> usize {
            stats
                .iter()
                .filter(|(&o, _)| o <= 1 << j)
                .map(|(_, &c)| c)
                .sum()
        };
        let mut at_least = Vec::new();
        let mut j = 1;
        loop {
            let step = (omega(j) / omega(j - 1)).trailing_zeros() as usize;
            if step == 0 {
                break;
            }
            at_least.push(step);
            j += 1;
        }
        let mut factors = Vec::new();
        for (j, &cnt) in at_least.iter().enumerate() {
            let next = at_least.get(j + 1).copied().unwrap_or(0);
            for _ in 0..cnt - next {
                factors.push(1u64 << (j + 1));
            }
        }
        factors.sort_unstable_by(|a, b| b.cmp(a));
        Some(factors)
    }

    /// Short structural description, e.g. `C8xC2` for abelian groups.
    pub fn describe(&self) -> String {
        match self.abelian_invariants() {
            Some(f) if f.is_empty() => "1".into(),
            Some(f) => f
                .iter()
                .map(|o| format!("C{o}"))
                .collect::<Vec<_>>()
                .join("x"),
            None => format!(
                "nonabelian of order {} with element orders {:?}",
                self.order(),
                self.order_statistics()
            ),
        }
    }

    /// Normal-form word of an element as text, e.g. `f1*f3`.
    pub fn format_element(&self, x: Element) -> String {
        let parts: Vec<String> = (0..self.k)
            .filter(|&i| self.exponent(x, i) == 1)
            .map(|i| format!("f{}", i + 1))
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn to_json(&self) -> PresentationJson {
        let bits = |e: Element| self.exponents(e);
        let mut conjugate_relations = BTreeMap::new();
        for j in 0..self.k {
            for i in j + 1..self.k {
                conjugate_relations.insert(format!("{},{}", j + 1, i + 1), bits(self.conj[j][i]));
            }
        }
        PresentationJson {
            name: self.name.clone(),
            k: self.k,
            power_relations: self.power.iter().map(|&p| bits(p)).collect(),
            conjugate_relations,
            coordinates: (self.coords != default_coords(self.k)).then(|| self.coords.clone()),
        }
    }

    pub fn from_json(doc: &PresentationJson) -> Result<Self> {
        let k = doc.k;
        let to_elem = |bits: &[u8]| -> Result<Element> {
            if bits.len() != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    got: bits.len(),
                });
            }
            let mut idx = 0u32;
            for &b in bits {
                if b > 1 {
                    return Err(Error::InvalidPresentation(format!("exponent {b} is not a bit")));
                }
                idx = (idx << 1) | b as u32;
            }
            Ok(Element(idx))
        };
        let power = doc
            .power_relations
            .iter()
            .map(|b| to_elem(b))
            .collect::<Result<Vec<_>>>()?;
        let mut conj = Vec::new();
        for (key, bits) in &doc.conjugate_relations {
            let (j, i) = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
                .ok_or_else(|| Error::Parse(format!("bad conjugate key `{key}`")))?;
            if j == 0 || i == 0 {
                return Err(Error::Parse(format!("conjugate key `{key}` is 1-based")));
            }
            let img = to_elem(bits)?;
            if img.0 != 1 << (k - i) {
                conj.push(((j - 1, i - 1), img));
            }
        }
        let g = PcPresentation::new(doc.name.clone(), k, power, &conj)?;
        match &doc.coordinates {
            Some(names) => g.with_coordinate_names(names),
            None => Ok(g),
        }
    }
}

fn push_letters(stack: &mut Vec<usize>, k: usize, word: u32) {
    // Stack is popped from the end, so push the last letter first.
    for i in (0..k).rev() {
        if (word >> (k - 1 - i)) & 1 == 1 {
            stack.push(i);
        }
    }
}

fn letters_into(out: &mut Vec<usize>, k: usize, word: u32) {
    for i in 0..k {
        if (word >> (k - 1 - i)) & 1 == 1 {
            out.push(i);
        }
    }
}

/// JSON form of a presentation. Exponent tuples list generators in order; conjugate
/// keys are `"j,i"` with 1-based indices meaning `g_i^{g_j}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationJson {
    pub name: String,
    pub k: usize,
    pub power_relations: Vec<Vec<u8>>,
    pub conjugate_relations: BTreeMap<String, Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Embedding,
    Quotient,
    /// A set map, not necessarily a homomorphism.
    Section,
}

#[derive(Clone, Debug)]
pub struct GroupMap {
    domain: Arc<PcPresentation>,
    codomain: Arc<PcPresentation>,
    kind: MapKind,
    generator_images: Vec<Element>,
    images: Vec<Element>,
}

impl GroupMap {
    /// The homomorphism determined by generator images (`kind` must not be `Section`).
    pub fn from_generator_images(
        domain: Arc<PcPresentation>,
        codomain: Arc<PcPresentation>,
        kind: MapKind,
        generator_images: Vec<Element>,
    ) -> Result<Self> {
        if kind == MapKind::Section {
            return Err(Error::InvalidArgument("sections are given by full image tables".into()));
        }
        if generator_images.len() != domain.k() {
            return Err(Error::LengthMismatch {
                expected: domain.k(),
                got: generator_images.len(),
            });
        }
        if let Some(bad) = generator_images.iter().find(|g| !codomain.contains(**g)) {
            return Err(Error::GroupMismatch(format!(
                "image {} is not an element of {}",
                bad.0,
                codomain.name()
            )));
        }
        let images = domain
            .elements()
            .map(|x| {
                (0..domain.k())
                    .filter(|&i| domain.exponent(x, i) == 1)
                    .fold(Element::IDENTITY, |acc, i| codomain.mul(acc, generator_images[i]))
            })
            .collect();
        let map = GroupMap {
            domain,
            codomain,
            kind,
            generator_images,
            images,
        };
        if !map.is_homomorphism() {
            return Err(Error::InvalidArgument(format!(
                "generator images do not define a homomorphism {} -> {}",
                map.domain.name(),
                map.codomain.name()
            )));
        }
        match kind {
            MapKind::Embedding if !map.is_injective() => Err(Error::InvalidArgument(
                "embedding is not injective".into(),
            )),
            MapKind::Quotient if !map.is_surjective() => Err(Error::InvalidArgument(
                "quotient map is not surjective".into(),
            )),
            _ => Ok(map),
        }
    }

    pub fn section(
        domain: Arc<PcPresentation>,
        codomain: Arc<PcPresentation>,
        images: Vec<Element>,
    ) -> Result<Self> {
        if images.len() != domain.order() {
            return Err(Error::LengthMismatch {
                expected: domain.order(),
                got: images.len(),
            });
        }
        let generator_images = domain.generators().iter().map(|g| images[g.index()]).collect();
        Ok(GroupMap {
            domain,
            codomain,
            kind: MapKind::Section,
            generator_images,
            images,
        })
    }

    pub fn identity(g: Arc<PcPresentation>) -> Self {
        let gens = g.generators();
        GroupMap::from_generator_images(g.clone(), g, MapKind::Embedding, gens)
            .expect("identity is an embedding")
    }

    pub fn domain(&self) -> &Arc<PcPresentation> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<PcPresentation> {
        &self.codomain
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn generator_images(&self) -> &[Element] {
        &self.generator_images
    }

    #[inline]
    pub fn apply(&self, x: Element) -> Element {
        self.images[x.index()]
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn is_homomorphism(&self) -> bool {
        let d = &self.domain;
        let c = &self.codomain;
        d.elements().all(|x| {
            d.elements()
                .all(|y| self.apply(d.mul(x, y)) == c.mul(self.apply(x), self.apply(y)))
        })
    }

    pub fn is_injective(&self) -> bool {
        let set: HashSet<Element> = self.images.iter().copied().collect();
        set.len() == self.images.len()
    }

    pub fn is_surjective(&self) -> bool {
        let set: HashSet<Element> = self.images.iter().copied().collect();
        set.len() == self.codomain.order()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GroupMap) -> Result<GroupMap> {
        if self.codomain.fingerprint() != next.domain.fingerprint() {
            return Err(Error::GroupMismatch(format!(
                "cannot compose {} -> {} with {} -> {}",
                self.domain.name(),
                self.codomain.name(),
                next.domain.name(),
                next.codomain.name()
            )));
        }
        let images: Vec<Element> = self.images.iter().map(|&x| next.apply(x)).collect();
        let kind = match (self.kind, next.kind) {
            (MapKind::Section, _) | (_, MapKind::Section) => MapKind::Section,
            (a, b) if a == b => a,
            _ => MapKind::Section,
        };
        Ok(GroupMap {
            domain: self.domain.clone(),
            codomain: next.codomain.clone(),
            kind,
            generator_images: self.domain.generators().iter().map(|g| images[g.index()]).collect(),
            images,
        })
    }
}

/// Quotient by a central subgroup of order 2 generated by the last pc generator.
pub fn quotient_by_central(
    g: &Arc<PcPresentation>,
    z: Element,
    name: impl Into<String>,
) -> Result<(Arc<PcPresentation>, GroupMap)> {
    let k = g.k();
    if k == 0 || z != g.generator(k - 1) {
        return Err(Error::InvalidArgument(format!(
            "{} is not the last pc generator of {}",
            g.format_element(z),
            g.name()
        )));
    }
    if g.element_order(z) != 2 {
        return Err(Error::InvalidArgument(format!(
            "{} does not have order 2",
            g.format_element(z)
        )));
    }
    if !g.is_central(z) {
        return Err(Error::InvalidArgument(format!(
            "{} is not central in {}",
            g.format_element(z),
            g.name()
        )));
    }
    let power: Vec<Element> = (0..k - 1).map(|i| Element(g.power_relation(i).0 >> 1)).collect();
    let mut conj = Vec::new();
    for j in 0..k - 1 {
        for i in j + 1..k - 1 {
            let img = Element(g.conjugate_relation(j, i).0 >> 1);
            if img.0 != 1 << (k - 2 - i) {
                conj.push(((j, i), img));
            }
        }
    }
    let q = PcPresentation::new(name, k - 1, power, &conj)?
        .with_coordinate_names(&g.coordinate_names()[..k - 1])?;
    let q = Arc::new(q);
    let mut images: Vec<Element> = q.generators();
    images.push(Element::IDENTITY);
    let map = GroupMap::from_generator_images(g.clone(), q.clone(), MapKind::Quotient, images)?;
    Ok((q, map))
}

/// The set-level section of a central quotient map that lifts a normal form by
/// appending exponent 0 for the dropped generator.
pub fn canonical_section(q: &GroupMap) -> Result<GroupMap> {
    let g = q.domain();
    let quot = q.codomain();
    let is_central_quotient = q.kind() == MapKind::Quotient
        && g.k() == quot.k() + 1
        && g.elements().all(|x| q.apply(x).0 == x.0 >> 1);
    if !is_central_quotient {
        return Err(Error::InvalidArgument(format!(
            "{} -> {} is not a central quotient map",
            g.name(),
            quot.name()
        )));
    }
    let images = quot.elements().map(|x| Element(x.0 << 1)).collect();
    GroupMap::section(quot.clone(), g.clone(), images)
}

fn closure(g: &PcPresentation, gens: &[Element]) -> HashSet<Element> {
    let mut seen = HashSet::from([Element::IDENTITY]);
    let mut queue = VecDeque::from([Element::IDENTITY]);
    while let Some(x) = queue.pop_front() {
        for &s in gens {
            let y = g.mul(x, s);
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

fn is_pc_sequence(g: &PcPresentation, seq: &[Element], whole: &HashSet<Element>) -> bool {
    let m = seq.len();
    (0..m).all(|i| {
        let h = closure(g, &seq[i..]);
        h.len() == 1 << (m - i) && (i > 0 || h == *whole)
    })
}

/// Pc sequence of the subgroup, by the rule: take each generator word in turn; if it
/// is new, replace it by the element of least order (then least index) in its coset
/// over what has been generated so far, and append that element's successive squares
/// until one falls back into the previous subgroup. If the result is not a valid pc
/// sequence, fall back to the induced sequence relative to the parent's pc series.
fn subgroup_pc_sequence(g: &PcPresentation, words: &[Element]) -> (Vec<Element>, HashSet<Element>) {
    let whole = closure(g, words);
    let mut seq: Vec<Element> = Vec::new();
    let mut current = closure(g, &[]);
    for &w in words {
        if current.contains(&w) {
            continue;
        }
        let mut coset: Vec<Element> = current.iter().map(|&s| g.mul(w, s)).collect();
        coset.sort_by_key(|&x| (g.element_order(x), x));
        let mut x = coset[0];
        while !current.contains(&x) {
            seq.push(x);
            x = g.mul(x, x);
        }
        current = closure(g, &seq);
    }
    if is_pc_sequence(g, &seq, &whole) {
        return (seq, whole);
    }
    // Induced sequence: one element of each leading depth, smallest index first.
    let mut induced = Vec::new();
    for depth in 0..g.k() {
        let lead = |x: &Element| x.0.leading_zeros() as usize + g.k() == 32 + depth;
        if let Some(x) = whole.iter().filter(|x| lead(x)).min() {
            induced.push(*x);
        }
    }
    (induced, whole)
}

/// Pc presentation of the subgroup generated by `words`, with its embedding.
pub fn subgroup_embedding(
    g: &Arc<PcPresentation>,
    words: &[Element],
    name: impl Into<String>,
) -> Result<(Arc<PcPresentation>, GroupMap)> {
    if words.is_empty() {
        return Err(Error::InvalidArgument("empty generator list".into()));
    }
    if let Some(w) = words.iter().find(|w| !g.contains(**w)) {
        return Err(Error::GroupMismatch(format!(
            "word {} is not an element of {}",
            w.0,
            g.name()
        )));
    }
    let (seq, whole) = subgroup_pc_sequence(g, words);
    let m = seq.len();
    if !is_pc_sequence(g, &seq, &whole) {
        return Err(Error::Internal("no valid pc sequence for subgroup".into()));
    }
    let mut index_of: HashMap<Element, u32> = HashMap::new();
    for e in 0..(1u32 << m) {
        let mut x = Element::IDENTITY;
        for (i, &h) in seq.iter().enumerate() {
            if (e >> (m - 1 - i)) & 1 == 1 {
                x = g.mul(x, h);
            }
        }
        index_of.insert(x, e);
    }
    if index_of.len() != 1 << m {
        return Err(Error::Internal("pc sequence does not give unique normal forms".into()));
    }
    let power: Vec<Element> = seq.iter().map(|&h| Element(index_of[&g.mul(h, h)])).collect();
    let mut conj = Vec::new();
    for j in 0..m {
        for i in j + 1..m {
            let img = Element(index_of[&g.conjugate(seq[i], seq[j])]);
            if img.0 != 1 << (m - 1 - i) {
                conj.push(((j, i), img));
            }
        }
    }
    let h = Arc::new(PcPresentation::new(name, m, power, &conj)?);
    let map = GroupMap::from_generator_images(h.clone(), g.clone(), MapKind::Embedding, seq)?;
    Ok((h, map))
}

/// Canonical ASCII names of the built-in groups.
pub const BUILTIN_NAMES: [&str; 7] = ["32G3f", "16G2c2", "D8", "C2", "C4xC2", "C8xC2", "Phi4"];

fn canonical_name(name: &str) -> Option<String> {
    let n = name.trim();
    let alias = match n {
        "32G3f" | "32Γ3f" | "32Γ₃f" | "32gamma3f" => "32G3f",
        "16G2c2" | "16Γ2c2" | "16Γ₂c₂" | "16gamma2c2" => "16G2c2",
        "D8" | "D₈" => "D8",
        "C2" | "C₂" => "C2",
        "C4xC2" | "C₄×C₂" | "C4×C2" => "C4xC2",
        "C8xC2" | "C₈×C₂" | "C8×C2" => "C8xC2",
        _ => {
            let rest = n.strip_prefix("Phi").or_else(|| n.strip_prefix("Φ"))?;
            let idx: u32 = rest
                .chars()
                .map(|c| match c {
                    '₀'..='₉' => char::from_digit(c as u32 - '₀' as u32, 10).unwrap(),
                    _ => c,
                })
                .collect::<String>()
                .parse()
                .ok()?;
            return (3..=12).contains(&idx).then(|| format!("Phi{idx}"));
        }
    };
    Some(alias.to_string())
}

fn g32_3f() -> PcPresentation {
    let e = |bits: u32| Element(bits);
    // f1^2 = f4, f2^2 = f3, f3^2 = f4^2 = f5; f2^f1 = f2 f3, f3^f1 = f3 f5.
    PcPresentation::new(
        "32G3f",
        5,
        vec![e(0b00010), e(0b00100), e(0b00001), e(0b00001), e(0)],
        &[((0, 1), e(0b01100)), ((0, 2), e(0b00101))],
    )
    .expect("32G3f presentation")
}

/// `<x, y | y^(2^n), x^4 = y^(2^(n-1)), y^x = y^(2^n - 1)>` on the pc sequence
/// `x, y, y^2, x^2, y^4, ..., y^(2^(n-1))`.
///
/// The same groups arise with `y^x = y^(2^(n-1) - 1)`; only the inverting form is built.
pub fn phi(n: u32) -> Result<PcPresentation> {
    if !(3..=12).contains(&n) {
        return Err(Error::InvalidArgument(format!("Phi_n needs 3 <= n <= 12, got {n}")));
    }
    let k = n as usize + 2;
    // generator position of y^(2^m)
    let ypos = |m: usize| if m <= 1 { m + 1 } else { m + 2 };
    let bit = |pos: usize| 1u32 << (k - 1 - pos);
    let y_power = |e: u64| -> Element {
        let e = e % (1u64 << n);
        Element(
            (0..n as usize)
                .filter(|&m| (e >> m) & 1 == 1)
                .fold(0, |acc, m| acc | bit(ypos(m))),
        )
    };
    let mut power = vec![Element::IDENTITY; k];
    power[0] = Element(bit(3));
    power[3] = y_power(1 << (n - 1));
    for m in 0..n as usize {
        power[ypos(m)] = y_power(1 << (m + 1));
    }
    let mut conj = Vec::new();
    for m in 0..n as usize {
        let img = y_power((1u64 << n) - (1u64 << m));
        conj.push(((0, ypos(m)), img));
    }
    conj.retain(|&((_, i), img)| img.0 != bit(i));
    PcPresentation::new(format!("Phi{n}"), k, power, &conj)
}

fn build(name: &str) -> Result<PcPresentation> {
    let e = Element;
    Ok(match name {
        "32G3f" => g32_3f(),
        "16G2c2" => {
            let g = Arc::new(g32_3f());
            let (q, _) = quotient_by_central(&g, g.generator(4), "16G2c2")?;
            (*q).clone()
        }
        "D8" => {
            let g = builtin("16G2c2")?;
            let (q, _) = quotient_by_central(&g, g.generator(3), "D8")?;
            (*q).clone()
        }
        "C2" => PcPresentation::new("C2", 1, vec![e(0)], &[])?.with_coordinate_names(&["t"])?,
        "C4xC2" => PcPresentation::new("C4xC2", 3, vec![e(0b010), e(0), e(0)], &[])?,
        "C8xC2" => PcPresentation::new("C8xC2", 4, vec![e(0b0100), e(0b0010), e(0), e(0)], &[])?
            .with_coordinate_names(&["i", "j", "k", "l"])?,
        other => {
            let n: u32 = other
                .strip_prefix("Phi")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::UnknownGroup(other.to_string()))?;
            phi(n)?
        }
    })
}

/// Built-in groups by name (ASCII aliases `32G3f`, `16G2c2`, `D8`, `C2`, `C4xC2`,
/// `C8xC2`, `Phi4`; `PhiN` for other `N >= 3` is also accepted).
pub fn builtin(name: &str) -> Result<Arc<PcPresentation>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<PcPresentation>>>> = OnceLock::new();
    let canon = canonical_name(name).ok_or_else(|| Error::UnknownGroup(name.to_string()))?;
    let cache = CACHE.get_or_init(Default::default);
    if let Some(g) = cache.lock().expect("builtin cache").get(&canon) {
        return Ok(g.clone());
    }
    let g = Arc::new(build(&canon)?);
    cache
        .lock()
        .expect("builtin cache")
        .insert(canon, g.clone());
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn f(g: &PcPresentation, i: usize) -> Element {
        g.generator(i - 1)
    }

    /// Closed-form law of 32G3f: exponents add, with the deviation terms on c, d, e.
    fn deviation_product(x: [u8; 5], y: [u8; 5]) -> [u8; 5] {
        let [a1, b1, c1, d1, e1] = x;
        let [a2, b2, c2, d2, e2] = y;
        let ct = b1 * a2 + b1 * b2;
        let dt = a1 * a2;
        let et = d1 * d2
            + a1 * a2 * d2
            + a1 * d1 * a2
            + c1 * c2
            + b1 * b2 * c2
            + b1 * c1 * b2
            + b1 * a2 * c2
            + b1 * c1 * a2
            + c1 * a2
            + b1 * a2 * b2;
        [
            (a1 + a2) % 2,
            (b1 + b2) % 2,
            (c1 + c2 + ct) % 2,
            (d1 + d2 + dt) % 2,
            (e1 + e2 + et) % 2,
        ]
    }

    #[test]
    fn g32_matches_deviation_formulas_on_all_pairs() {
        let g = builtin("32G3f").unwrap();
        for x in g.elements() {
            for y in g.elements() {
                let ex: [u8; 5] = g.exponents(x).try_into().unwrap();
                let ey: [u8; 5] = g.exponents(y).try_into().unwrap();
                let expect = g.element(&deviation_product(ex, ey)).unwrap();
                assert_eq!(g.mul(x, y), expect, "{x:?} * {y:?}");
            }
        }
    }

    #[test]
    fn g32_relations() {
        let g = builtin("32G3f").unwrap();
        assert_eq!(g.mul(f(&g, 1), f(&g, 1)), f(&g, 4));
        assert_eq!(g.mul(f(&g, 2), f(&g, 2)), f(&g, 3));
        assert_eq!(g.conjugate(f(&g, 2), f(&g, 1)), g.mul(f(&g, 2), f(&g, 3)));
        assert_eq!(g.mul(Element::IDENTITY, f(&g, 3)), f(&g, 3));
        assert_eq!(g.element_order(f(&g, 2)), 8);
        assert_eq!(g.element_order(f(&g, 1)), 8);
        assert_eq!(g.element_order(Element::IDENTITY), 1);
        // x^4 = y^4 and y^x = y^3 in the two-generator form
        let (x, y) = (f(&g, 1), f(&g, 2));
        assert_eq!(g.pow(x, 4), g.pow(y, 4));
        assert_eq!(g.pow(y, 8), Element::IDENTITY);
        assert_eq!(g.conjugate(y, x), g.pow(y, 3));
    }

    #[test]
    fn multiply_rejects_foreign_elements() {
        let g = builtin("D8").unwrap();
        assert!(matches!(
            g.multiply(Element(8), Element(1)),
            Err(Error::GroupMismatch(_))
        ));
    }

    #[test]
    fn inverses_via_element_order() {
        for name in ["D8", "32G3f", "Phi4", "C8xC2"] {
            let g = builtin(name).unwrap();
            for x in g.elements() {
                let n = g.element_order(x);
                assert_eq!(g.mul(g.pow(x, n - 1), x), Element::IDENTITY);
                assert_eq!(g.inv(x), g.pow(x, n - 1));
            }
        }
    }

    #[test]
    fn associativity_exhaustive_small_and_random_large() {
        for name in ["C2", "C4xC2", "D8", "16G2c2", "C8xC2"] {
            assert_eq!(builtin(name).unwrap().find_nonassociative_triple(), None, "{name}");
        }
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for name in ["32G3f", "Phi4"] {
            let g = builtin(name).unwrap();
            let n = g.order() as u32;
            for _ in 0..1_000_000 {
                let (x, y, z) = (
                    Element(rng.gen_range(0..n)),
                    Element(rng.gen_range(0..n)),
                    Element(rng.gen_range(0..n)),
                );
                assert_eq!(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z)));
            }
        }
    }

    #[test]
    fn collection_without_table_agrees_with_table() {
        let g = builtin("Phi4").unwrap();
        for x in g.elements() {
            for y in g.elements() {
                assert_eq!(Element(g.collect(x.0, y.0)), g.mul(x, y));
            }
        }
        // large enough to skip the table entirely
        let big = phi(9).unwrap();
        assert!(big.table.is_empty());
        let (x, y) = (big.generator(0), big.generator(1));
        assert_eq!(big.pow(y, 512), Element::IDENTITY);
        assert_eq!(big.pow(x, 4), big.pow(y, 256));
        assert_eq!(big.conjugate(y, x), big.pow(y, 511));
    }

    #[test]
    fn quotients_follow_the_extension_chain() {
        let g = builtin("32G3f").unwrap();
        let (q16, map) = quotient_by_central(&g, f(&g, 5), "16G2c2").unwrap();
        assert_eq!(q16.order(), 16);
        assert!(map.is_homomorphism() && map.is_surjective());
        assert_eq!(*q16, *builtin("16G2c2").unwrap());
        // f3^2 = f4^2 = f5 becomes trivial
        assert_eq!(q16.mul(f(&q16, 3), f(&q16, 3)), Element::IDENTITY);
        let (d8, _) = quotient_by_central(&q16, f(&q16, 4), "D8").unwrap();
        assert_eq!(d8.k(), 3);
        assert_eq!(d8.conjugate(f(&d8, 2), f(&d8, 1)), d8.mul(f(&d8, 2), f(&d8, 3)));
        // dihedral: five involutions, two elements of order 4
        let stats = d8.order_statistics();
        assert_eq!(stats.get(&2), Some(&5));
        assert_eq!(stats.get(&4), Some(&2));
        let c2 = builtin("C2").unwrap();
        let (triv, m) = quotient_by_central(&c2, c2.generator(0), "1").unwrap();
        assert_eq!(triv.order(), 1);
        assert!(m.is_surjective());
    }

    #[test]
    fn quotient_preconditions() {
        let g = builtin("32G3f").unwrap();
        assert!(quotient_by_central(&g, f(&g, 4), "x").is_err());
        let d8 = builtin("D8").unwrap();
        // f3 is last and central in D8, so this one is allowed
        assert!(quotient_by_central(&d8, f(&d8, 3), "C2xC2").is_ok());
        // f2 = y is neither last nor central
        let phi4 = builtin("Phi4").unwrap();
        assert!(quotient_by_central(&phi4, phi4.generator(1), "x").is_err());
    }

    #[test]
    fn subgroup_k_is_c8_times_c2_on_f2_and_f3f4() {
        let g = builtin("32G3f").unwrap();
        let (k, emb) = subgroup_embedding(
            &g,
            &[f(&g, 2), f(&g, 3), f(&g, 4), f(&g, 5)],
            "K",
        )
        .unwrap();
        assert_eq!(k.order(), 16);
        assert_eq!(k.abelian_invariants(), Some(vec![8, 2]));
        let f3f4 = g.mul(f(&g, 3), f(&g, 4));
        assert_eq!(
            emb.generator_images(),
            &[f(&g, 2), f(&g, 3), f(&g, 5), f3f4]
        );
        let builtin_k = builtin("C8xC2").unwrap();
        assert_eq!(k.power, builtin_k.power);
        assert_eq!(k.conj, builtin_k.conj);
        let image: HashSet<Element> = emb.images().iter().copied().collect();
        assert_eq!(image.len(), k.order());
    }

    #[test]
    fn c4xc2_subgroups_of_16g2c2() {
        let q = builtin("16G2c2").unwrap();
        let (p1, e1) = subgroup_embedding(&q, &[f(&q, 1), f(&q, 3), f(&q, 4)], "P1").unwrap();
        assert_eq!(p1.abelian_invariants(), Some(vec![4, 2]));
        assert_eq!(e1.generator_images(), &[f(&q, 1), f(&q, 4), f(&q, 3)]);
        let (p2, e2) = subgroup_embedding(&q, &[f(&q, 2), f(&q, 3), f(&q, 4)], "P2").unwrap();
        assert_eq!(p2.abelian_invariants(), Some(vec![4, 2]));
        assert_eq!(e2.generator_images(), &[f(&q, 2), f(&q, 3), f(&q, 4)]);
        let c4c2 = builtin("C4xC2").unwrap();
        assert_eq!(p1.power, c4c2.power);
        assert_eq!(p2.power, c4c2.power);
        let g = builtin("32G3f").unwrap();
        let (z, _) = subgroup_embedding(&g, &[f(&g, 5)], "Z").unwrap();
        assert_eq!(z.describe(), "C2");
        assert!(subgroup_embedding(&g, &[], "E").is_err());
    }

    #[test]
    fn subgroup_embeddings_of_mixed_generators() {
        let g = builtin("32G3f").unwrap();
        for words in [vec![f(&g, 1), f(&g, 2)], vec![g.mul(f(&g, 1), f(&g, 2)), f(&g, 3)]] {
            let (h, emb) = subgroup_embedding(&g, &words, "H").unwrap();
            assert!(emb.is_homomorphism() && emb.is_injective());
            let image: HashSet<Element> = emb.images().iter().copied().collect();
            assert_eq!(image, closure(&g, &words));
            assert_eq!(h.find_nonassociative_triple(), None);
        }
    }

    #[test]
    fn canonical_section_lifts_with_zero_exponent() {
        let q16 = builtin("16G2c2").unwrap();
        let (d8, quot) = quotient_by_central(&q16, f(&q16, 4), "D8").unwrap();
        let sigma = canonical_section(&quot).unwrap();
        let f1f2 = d8.mul(f(&d8, 1), f(&d8, 2));
        assert_eq!(sigma.apply(f1f2), q16.mul(f(&q16, 1), f(&q16, 2)));
        for x in d8.elements() {
            assert_eq!(quot.apply(sigma.apply(x)), x);
        }
        let s1 = sigma.apply(f(&d8, 1));
        assert_ne!(q16.mul(s1, s1), sigma.apply(d8.mul(f(&d8, 1), f(&d8, 1))));
        assert!(canonical_section(&sigma).is_err());
    }

    #[test]
    fn phi4_satisfies_the_defining_relations() {
        let g = builtin("Phi4").unwrap();
        assert_eq!(g.order(), 64);
        let (x, y) = (g.generator(0), g.generator(1));
        assert_eq!(g.pow(y, 16), Element::IDENTITY);
        assert_eq!(g.pow(x, 4), g.pow(y, 8));
        assert_eq!(g.conjugate(y, x), g.pow(y, 15));
        assert_eq!(closure(&g, &[x, y]).len(), 64);
        // Phi3 built the same way is a group of order 32 with y of order 8
        let p3 = phi(3).unwrap();
        assert_eq!(p3.element_order(p3.generator(1)), 8);
    }

    #[test]
    fn json_roundtrip_and_builtin_names() {
        for name in BUILTIN_NAMES {
            let g = builtin(name).unwrap();
            let doc = g.to_json();
            let text = serde_json::to_string(&doc).unwrap();
            let back = PcPresentation::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back, *g);
            assert_eq!(back.coordinate_names(), g.coordinate_names());
        }
        assert_eq!(builtin("32Γ₃f").unwrap().name(), "32G3f");
        assert_eq!(builtin("Φ₄").unwrap().order(), 64);
        assert!(matches!(builtin("Q8"), Err(Error::UnknownGroup(_))));
        let d8 = builtin("D8").unwrap();
        assert_eq!(d8.k(), 3);
        assert_eq!(builtin("C2").unwrap().element_order(Element(1)), 2);
    }

    #[test]
    fn inconsistent_presentation_is_rejected() {
        // g1^2 = g2 with g2^g1 = g2 g3 but g3 central and g2^2 = 1 forces a contradiction:
        // (g1 g1) g1 = g2 g1 = g1 g2 g3, g1 (g1 g1) = g1 g2.
        let r = PcPresentation::new(
            "bad",
            3,
            vec![Element(0b010), Element(0), Element(0)],
            &[((0, 1), Element(0b011))],
        );
        assert!(matches!(r, Err(Error::InvalidPresentation(_))));
        let r = PcPresentation::new("bad", 2, vec![Element(0b10), Element(0)], &[]);
        assert!(r.is_err());
    }
}
