//! Minimal free resolutions of the trivial module over `F2[G]` for a 2-group `G`.
//!
//! `P_n` is free on `b_n` generators `e_s`. A vector in `P_n` is stored over the F2
//! basis `g e_s`, index `s * |G| + g`. A boundary `d(e_s) = Σ_t a_st e_t` is realized
//! as the matrix whose row `(s, g)` is the image of `g e_s`, so `d(x) = x · M`.
//! Modules are left modules and `g` acts on a vector by left translation in each block.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::bar::Cochain;
use crate::error::{Error, Result};
use crate::f2::{check_dense, BitMatrix, BitVec, Echelon, Schedule, Subspace};
use crate::pc::{Element, PcPresentation};

/// Cache file format version; bump when the layout changes.
pub const CACHE_VERSION: u32 = 1;

/// Environment variable overriding the default cache directory.
pub const CACHE_DIR_ENV: &str = "COHO32_CACHE_DIR";

/// An F2-linear combination of group elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAlgebraElement(pub BitVec);

impl GroupAlgebraElement {
    pub fn augmentation(&self) -> bool {
        self.0.count_ones() % 2 == 1
    }

    pub fn support(&self) -> Vec<Element> {
        self.0.iter_ones().map(|i| Element(i as u32)).collect()
    }
}

/// `h · v` for `v` in a free module of the given rank.
fn translate(g: &PcPresentation, h: Element, v: &BitVec, rank: usize) -> BitVec {
    let n = g.order();
    let mut out = BitVec::zeros(n * rank);
    for i in v.iter_ones() {
        let (t, x) = (i / n, i % n);
        out.set(t * n + g.mul(h, Element(x as u32)).index(), true);
    }
    out
}

/// `a · v` for a group algebra element `a`.
fn act(g: &PcPresentation, a: &BitVec, v: &BitVec, rank: usize) -> BitVec {
    let mut out = BitVec::zeros(g.order() * rank);
    for h in a.iter_ones() {
        out.xor_assign(&translate(g, Element(h as u32), v, rank));
    }
    out
}

#[derive(Clone, Debug)]
pub struct FreeModuleMap {
    source_rank: usize,
    target_rank: usize,
    /// `images[s]` is the image of `e_s`.
    images: Vec<BitVec>,
    matrix: BitMatrix,
}

impl FreeModuleMap {
    pub fn from_images(g: &PcPresentation, target_rank: usize, images: Vec<BitVec>) -> Result<Self> {
        let n = g.order();
        for im in &images {
            if im.len() != n * target_rank {
                return Err(Error::LengthMismatch {
                    expected: n * target_rank,
                    got: im.len(),
                });
            }
        }
        let mut matrix = BitMatrix::zeros(n * images.len(), n * target_rank)?;
        for (s, im) in images.iter().enumerate() {
            for h in g.elements() {
                let row = translate(g, h, im, target_rank);
                matrix.row_mut(s * n + h.index()).copy_from_slice(row.words());
            }
        }
        Ok(FreeModuleMap {
            source_rank: images.len(),
            target_rank,
            images,
            matrix,
        })
    }

    pub fn source_rank(&self) -> usize {
        self.source_rank
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn image(&self, s: usize) -> &BitVec {
        &self.images[s]
    }

    pub fn entry(&self, s: usize, t: usize) -> GroupAlgebraElement {
        let n = self.images[s].len() / self.target_rank.max(1);
        GroupAlgebraElement(self.images[s].slice(t * n, n))
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &BitVec) -> Result<BitVec> {
        self.matrix.left_mul(x)
    }
}

/// A cohomology class in the minimal model: coefficients over the generators of `P_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MinClass {
    pub degree: usize,
    pub coeffs: BitVec,
}

impl MinClass {
    pub fn zero(degree: usize, betti: usize) -> Self {
        MinClass {
            degree,
            coeffs: BitVec::zeros(betti),
        }
    }

    pub fn unit(degree: usize, betti: usize, i: usize) -> Self {
        MinClass {
            degree,
            coeffs: BitVec::from_ones(betti, [i]),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_zero()
    }

    pub fn add(&self, other: &MinClass) -> Result<MinClass> {
        if self.degree != other.degree {
            return Err(Error::InvalidArgument(format!(
                "adding classes of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(MinClass {
            degree: self.degree,
            coeffs: self.coeffs.xor(&other.coeffs),
        })
    }
}

pub struct MinimalResolution {
    group: Arc<PcPresentation>,
    betti: Vec<usize>,
    /// `boundaries[n - 1]` is `d_n: P_n -> P_{n-1}`.
    boundaries: Vec<FreeModuleMap>,
    solvers: Vec<OnceLock<Echelon>>,
    transfer: Mutex<Vec<Vec<BitVec>>>,
}

impl std::fmt::Debug for MinimalResolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MinimalResolution")
            .field("group", &self.group.name())
            .field("betti", &self.betti)
            .finish()
    }
}

fn augmentation_matrix(g: &PcPresentation) -> BitMatrix {
    let mut m = BitMatrix::zeros(g.order(), 1).expect("augmentation fits");
    for r in 0..g.order() {
        m.set(r, 0, true);
    }
    m
}

impl MinimalResolution {
    /// Resolution through `P_len`.
    pub fn compute(group: Arc<PcPresentation>, len: usize) -> Result<Self> {
        Self::compute_with_progress(group, len, |_, _| {})
    }

    /// As [`MinimalResolution::compute`], calling `progress(n, b_n)` after each degree.
    pub fn compute_with_progress(
        group: Arc<PcPresentation>,
        len: usize,
        mut progress: impl FnMut(usize, usize),
    ) -> Result<Self> {
        let g = &*group;
        let n = g.order();
        let gens = g.generators();
        let mut betti = vec![1];
        progress(0, 1);
        let mut boundaries: Vec<FreeModuleMap> = Vec::with_capacity(len);
        let mut prev = augmentation_matrix(g);
        for deg in 0..len {
            let rank = betti[deg];
            let kernel = prev.kernel_basis()?;
            let mut jk = Subspace::new(n * rank);
            for k in &kernel {
                for &h in &gens {
                    let v = translate(g, h, k, rank).xor(k);
                    jk.insert(&v);
                }
            }
            let jk_dim = jk.dim();
            let mut new_gens = Vec::new();
            for k in &kernel {
                if jk.insert(k) {
                    new_gens.push(k.clone());
                }
            }
            if new_gens.len() != kernel.len() - jk_dim {
                return Err(Error::Internal(format!(
                    "degree {}: {} generators for a {}-dimensional quotient",
                    deg + 1,
                    new_gens.len(),
                    kernel.len() - jk_dim
                )));
            }
            let d = FreeModuleMap::from_images(g, rank, new_gens)?;
            if d.matrix().rank() != kernel.len() {
                return Err(Error::Internal(format!(
                    "degree {}: image of the new boundary misses part of the kernel",
                    deg + 1
                )));
            }
            betti.push(d.source_rank());
            progress(deg + 1, d.source_rank());
            prev = d.matrix().clone();
            boundaries.push(d);
        }
        let r = MinimalResolution {
            solvers: (0..boundaries.len()).map(|_| OnceLock::new()).collect(),
            transfer: Mutex::new(vec![vec![BitVec::from_bools([true])]]),
            group,
            betti,
            boundaries,
        };
        Ok(r)
    }

    pub fn group(&self) -> &Arc<PcPresentation> {
        &self.group
    }

    /// Highest degree computed.
    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    pub fn betti(&self) -> &[usize] {
        &self.betti
    }

    /// `d_n` for `1 <= n <= len`.
    pub fn boundary(&self, n: usize) -> &FreeModuleMap {
        &self.boundaries[n - 1]
    }

    /// Checks `d∘d = 0`, exactness by dimension count and minimality.
    pub fn validate(&self) -> Result<()> {
        let g = &*self.group;
        let n = g.order();
        let mut prev = augmentation_matrix(g);
        let mut prev_rank = 1;
        for (i, d) in self.boundaries.iter().enumerate() {
            let deg = i + 1;
            if !d.matrix().mul(&prev)?.is_zero() {
                return Err(Error::Internal(format!("d_{deg} composed with d_{i} is nonzero")));
            }
            let rank = d.matrix().rank();
            if rank + prev_rank != n * self.betti[i] {
                return Err(Error::Internal(format!("not exact at P_{i}")));
            }
            for s in 0..d.source_rank() {
                for t in 0..d.target_rank() {
                    if d.entry(s, t).augmentation() {
                        return Err(Error::Internal(format!(
                            "d_{deg} entry ({s}, {t}) has odd augmentation"
                        )));
                    }
                }
            }
            prev = d.matrix().clone();
            prev_rank = rank;
        }
        Ok(())
    }

    fn check_degree(&self, degree: usize) -> Result<()> {
        if degree > self.len() {
            return Err(Error::DegreeOverflow {
                degree,
                length: self.len(),
            });
        }
        Ok(())
    }

    /// Images of the generators of `P_n` under the comparison map into the bar
    /// resolution, as dense vectors over `G^n` (tuple layout of [`crate::bar`]).
    fn comparison(&self, n: usize) -> Result<Vec<BitVec>> {
        let mut cache = self.transfer.lock().expect("transfer cache");
        let g = &*self.group;
        let order = g.order();
        while cache.len() <= n {
            let m = cache.len();
            let block = order.pow(m as u32 - 1);
            check_dense(
                &format!("comparison map in degree {m}"),
                self.betti[m] as u128,
                (block * order) as u128,
            )?;
            let d = self.boundary(m);
            let prevs = &cache[m - 1];
            let mut out = Vec::with_capacity(self.betti[m]);
            for s in 0..self.betti[m] {
                let mut v = BitVec::zeros(block * order);
                for (t, prev) in prevs.iter().enumerate() {
                    for h in d.entry(s, t).0.iter_ones() {
                        // s(h · [τ]) = [h | τ]
                        let start = h * block;
                        for i in prev.iter_ones() {
                            v.flip(start + i);
                        }
                    }
                }
                out.push(v);
            }
            cache.push(out);
        }
        Ok(cache[n].clone())
    }

    /// The class of a bar cocycle.
    pub fn transfer_from_bar(&self, c: &Cochain) -> Result<MinClass> {
        if c.group().fingerprint() != self.group.fingerprint() {
            return Err(Error::GroupMismatch(format!(
                "cochain over {} transferred into a resolution of {}",
                c.group().name(),
                self.group.name()
            )));
        }
        self.check_degree(c.degree())?;
        if !c.is_cocycle()? {
            return Err(Error::NotCocycle("transfer needs a cocycle".into()));
        }
        let phi = self.comparison(c.degree())?;
        let coeffs = BitVec::from_bools(phi.iter().map(|v| v.dot(c.values())));
        Ok(MinClass {
            degree: c.degree(),
            coeffs,
        })
    }

    fn solver(&self, k: usize) -> Result<&Echelon> {
        if let Some(e) = self.solvers[k - 1].get() {
            return Ok(e);
        }
        let e = Echelon::with_transform(self.boundary(k).matrix(), Schedule::Sequential)?;
        Ok(self.solvers[k - 1].get_or_init(|| e))
    }

    /// Chain map `F_j: P_{p+j} -> P_j` lifting `a`, for `j = 0..=k`; entry `j`
    /// lists the images of the generators of `P_{p+j}`.
    pub fn lift_class(&self, a: &MinClass, k: usize) -> Result<Vec<Vec<BitVec>>> {
        let p = a.degree;
        self.check_degree(p + k)?;
        if a.coeffs.len() != self.betti[p] {
            return Err(Error::LengthMismatch {
                expected: self.betti[p],
                got: a.coeffs.len(),
            });
        }
        let g = &*self.group;
        let n = g.order();
        let unit = BitVec::from_ones(n, [0]);
        let f0: Vec<BitVec> = (0..self.betti[p])
            .map(|s| if a.coeffs.get(s) { unit.clone() } else { BitVec::zeros(n) })
            .collect();
        let mut maps = vec![f0];
        for j in 1..=k {
            let d = self.boundary(p + j);
            let prev = &maps[j - 1];
            let solver = self.solver(j)?;
            let mut images = Vec::with_capacity(self.betti[p + j]);
            for s in 0..self.betti[p + j] {
                let mut target = BitVec::zeros(n * self.betti[j - 1]);
                for (t, f) in prev.iter().enumerate() {
                    target.xor_assign(&act(g, &d.entry(s, t).0, f, self.betti[j - 1]));
                }
                let w = solver.solve(&target).ok_or_else(|| {
                    Error::Internal(format!("lift of a degree-{p} class stuck at step {j}"))
                })?;
                images.push(w);
            }
            maps.push(images);
        }
        Ok(maps)
    }

    pub fn product(&self, a: &MinClass, b: &MinClass) -> Result<MinClass> {
        let (p, q) = (a.degree, b.degree);
        self.check_degree(p + q)?;
        let maps = self.lift_class(a, q)?;
        Ok(self.compose(&maps[q], b, p + q))
    }

    fn compose(&self, lift: &[BitVec], b: &MinClass, degree: usize) -> MinClass {
        let n = self.group.order();
        let coeffs = BitVec::from_bools(lift.iter().map(|img| {
            b.coeffs
                .iter_ones()
                .fold(false, |acc, t| acc ^ (img.slice(t * n, n).count_ones() % 2 == 1))
        }));
        MinClass { degree, coeffs }
    }

    /// Products of all pairs of unit classes with total degree at most `maxdeg`.
    pub fn ring_tables(&self, maxdeg: usize) -> Result<RingTables> {
        self.check_degree(maxdeg)?;
        let mut products = vec![];
        for p in 0..=maxdeg {
            let mut by_i = vec![];
            for i in 0..self.betti[p] {
                let a = MinClass::unit(p, self.betti[p], i);
                let maps = self.lift_class(&a, maxdeg - p)?;
                let mut by_q = vec![];
                for q in 0..=maxdeg - p {
                    let row: Vec<BitVec> = (0..self.betti[q])
                        .map(|j| {
                            self.compose(&maps[q], &MinClass::unit(q, self.betti[q], j), p + q)
                                .coeffs
                        })
                        .collect();
                    by_q.push(row);
                }
                by_i.push(by_q);
            }
            products.push(by_i);
        }
        Ok(RingTables {
            betti: self.betti[..=maxdeg].to_vec(),
            maxdeg,
            products,
            basis: Vec::new(),
        })
    }

    fn to_cache(&self) -> CacheFile {
        CacheFile {
            group: self.group.name().to_string(),
            fingerprint: self.group.fingerprint().to_string(),
            n: self.len(),
            betti: self.betti.clone(),
            version: CACHE_VERSION,
            boundaries: self.boundaries.iter().map(|d| d.matrix().to_hex()).collect(),
        }
    }

    fn from_cache(group: Arc<PcPresentation>, doc: &CacheFile) -> Result<Self> {
        let g = &*group;
        let n = g.order();
        if doc.betti.len() != doc.n + 1 || doc.boundaries.len() != doc.n {
            return Err(Error::Parse("cache file has inconsistent lengths".into()));
        }
        let mut boundaries = Vec::with_capacity(doc.n);
        for (i, hex) in doc.boundaries.iter().enumerate() {
            let (src, tgt) = (doc.betti[i + 1], doc.betti[i]);
            let m = BitMatrix::from_hex(n * src, n * tgt, hex)?;
            let images = (0..src).map(|s| m.row_vec(s * n)).collect();
            let d = FreeModuleMap::from_images(g, tgt, images)?;
            if d.matrix() != &m {
                return Err(Error::Parse("cached boundary is not a module map".into()));
            }
            boundaries.push(d);
        }
        let r = MinimalResolution {
            solvers: (0..boundaries.len()).map(|_| OnceLock::new()).collect(),
            transfer: Mutex::new(vec![vec![BitVec::from_bools([true])]]),
            group,
            betti: doc.betti.clone(),
            boundaries,
        };
        r.validate()?;
        Ok(r)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheFile {
    group: String,
    fingerprint: String,
    #[serde(rename = "N")]
    n: usize,
    betti: Vec<usize>,
    version: u32,
    /// `d_1..d_N` as hex-packed matrices, rows `(s, g)` at index `s * |G| + g`.
    boundaries: Vec<String>,
}

/// Default cache directory: the environment override, else a directory under the
/// system temp dir.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("coho32-cache"))
}

fn cache_path(dir: &Path, g: &PcPresentation, len: usize) -> PathBuf {
    dir.join(format!("{}-N{len}-v{CACHE_VERSION}.json", g.name()))
}

/// Loads a cached resolution of exactly this length, or computes and stores it.
/// Unreadable or mismatched cache files are recomputed and overwritten.
pub fn load_or_compute(
    group: Arc<PcPresentation>,
    len: usize,
    cache_dir: Option<&Path>,
    progress: impl FnMut(usize, usize),
) -> Result<MinimalResolution> {
    let Some(dir) = cache_dir else {
        return MinimalResolution::compute_with_progress(group, len, progress);
    };
    let path = cache_path(dir, &group, len);
    if let Ok(text) = fs::read_to_string(&path) {
        match serde_json::from_str::<CacheFile>(&text) {
            Ok(doc)
                if doc.version == CACHE_VERSION
                    && doc.n == len
                    && doc.fingerprint == group.fingerprint() =>
            {
                match MinimalResolution::from_cache(group.clone(), &doc) {
                    Ok(r) => {
                        log::info!("loaded resolution of {} from {}", group.name(), path.display());
                        return Ok(r);
                    }
                    Err(e) => log::warn!("ignoring cache {}: {e}", path.display()),
                }
            }
            _ => log::warn!("ignoring stale cache {}", path.display()),
        }
    }
    let r = MinimalResolution::compute_with_progress(group, len, progress)?;
    fs::create_dir_all(dir)?;
    static WRITES: AtomicUsize = AtomicUsize::new(0);
    let tmp = path.with_extension(format!(
        "{}.{}.tmp",
        std::process::id(),
        WRITES.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, serde_json::to_string(&r.to_cache())?)?;
    fs::rename(&tmp, &path)?;
    Ok(r)
}

/// Full product tables of a resolution through `maxdeg`, in the generator coordinates.
#[derive(Clone, Debug)]
pub struct RingTables {
    pub betti: Vec<usize>,
    pub maxdeg: usize,
    /// `products[p][i][q][j]` is `e_i^{(p)} · e_j^{(q)}`.
    products: Vec<Vec<Vec<Vec<BitVec>>>>,
    /// Chosen basis per degree (see [`RingTables::choose_basis`]).
    pub basis: Vec<Vec<MinClass>>,
}

impl RingTables {
    pub fn multiply(&self, a: &MinClass, b: &MinClass) -> Result<MinClass> {
        let d = a.degree + b.degree;
        if d > self.maxdeg {
            return Err(Error::DegreeOverflow {
                degree: d,
                length: self.maxdeg,
            });
        }
        let mut out = BitVec::zeros(self.betti[d]);
        for i in a.coeffs.iter_ones() {
            for j in b.coeffs.iter_ones() {
                out.xor_assign(&self.products[a.degree][i][b.degree][j]);
            }
        }
        Ok(MinClass {
            degree: d,
            coeffs: out,
        })
    }

    pub fn unit(&self) -> MinClass {
        MinClass::unit(0, 1, 0)
    }

    /// Fixes a basis of each degree: the independent members of `preferred` first (in
    /// order), then unit vectors completing it.
    pub fn choose_basis(&mut self, preferred: &[MinClass]) {
        self.basis = (0..=self.maxdeg)
            .map(|d| {
                let mut span = Subspace::new(self.betti[d]);
                let mut basis = Vec::new();
                let units = (0..self.betti[d]).map(|i| MinClass::unit(d, self.betti[d], i));
                for c in preferred.iter().filter(|c| c.degree == d).cloned().chain(units) {
                    if span.insert(&c.coeffs) {
                        basis.push(c);
                    }
                }
                basis
            })
            .collect();
    }

    /// Span of products `a · b` with `deg a, deg b >= 1` in degree `d`.
    pub fn decomposables(&self, d: usize) -> Subspace {
        let mut span = Subspace::new(self.betti[d]);
        for p in 1..d {
            for i in 0..self.betti[p] {
                for j in 0..self.betti[d - p] {
                    span.insert(&self.products[p][i][d - p][j]);
                }
            }
        }
        span
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bar::{bar_betti, parse_cochain};
    use crate::catalog;
    use crate::pc::builtin;
    use rand::{Rng, SeedableRng};

    #[test]
    fn betti_of_small_groups() {
        let c2 = MinimalResolution::compute(builtin("C2").unwrap(), 6).unwrap();
        assert_eq!(c2.betti(), &[1; 7]);
        let d8 = MinimalResolution::compute(builtin("D8").unwrap(), 6).unwrap();
        assert_eq!(d8.betti(), &[1, 2, 3, 4, 5, 6, 7]);
        d8.validate().unwrap();
        let trivial = Arc::new(PcPresentation::new("1", 0, vec![], &[]).unwrap());
        let t = MinimalResolution::compute(trivial, 3).unwrap();
        assert_eq!(t.betti(), &[1, 0, 0, 0]);
    }

    #[test]
    fn boundaries_are_minimal() {
        let r = MinimalResolution::compute(builtin("16G2c2").unwrap(), 4).unwrap();
        r.validate().unwrap();
        for n in 1..=4 {
            let d = r.boundary(n);
            for s in 0..d.source_rank() {
                for t in 0..d.target_rank() {
                    assert!(!d.entry(s, t).augmentation());
                }
            }
        }
    }

    #[test]
    fn matches_bar_betti_on_d8() {
        let g = builtin("D8").unwrap();
        let r = MinimalResolution::compute(g.clone(), 3).unwrap();
        for n in 0..=2 {
            assert_eq!(r.betti()[n], bar_betti(&g, n).unwrap());
        }
    }

    #[test]
    fn transfer_kills_coboundaries_and_detects_classes() {
        let g = builtin("D8").unwrap();
        let r = MinimalResolution::compute(g.clone(), 4).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for n in 0..3 {
            let len = 1usize << (3 * n);
            let b = Cochain::from_values(
                g.clone(),
                n,
                BitVec::from_bools((0..len).map(|_| rng.gen_bool(0.5))),
            )
            .unwrap();
            assert!(r.transfer_from_bar(&b.coboundary().unwrap()).unwrap().is_zero());
        }
        let u = r.transfer_from_bar(&catalog::entry("D8", "u").unwrap()).unwrap();
        let v = r.transfer_from_bar(&catalog::entry("D8", "v").unwrap()).unwrap();
        assert!(!u.is_zero() && !v.is_zero() && u != v);
        let one = r.transfer_from_bar(&Cochain::constant(g.clone(), true)).unwrap();
        assert_eq!(r.product(&one, &u).unwrap(), u);
        let c4 = parse_cochain(g, 4, "a1a2a3a4").unwrap();
        let r3 = MinimalResolution::compute(builtin("D8").unwrap(), 3).unwrap();
        assert!(matches!(
            r3.transfer_from_bar(&c4),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn products_agree_with_bar_cup_products() {
        let g = builtin("D8").unwrap();
        let r = MinimalResolution::compute(g.clone(), 4).unwrap();
        let names = ["u", "v", "w"];
        let reps: Vec<Cochain> = names.iter().map(|s| catalog::entry("D8", s).unwrap()).collect();
        for a in &reps {
            for b in &reps {
                let ab = a.cup(b).unwrap();
                if ab.degree() > 4 {
                    continue;
                }
                let lhs = r
                    .product(&r.transfer_from_bar(a).unwrap(), &r.transfer_from_bar(b).unwrap())
                    .unwrap();
                assert_eq!(lhs, r.transfer_from_bar(&ab).unwrap());
            }
        }
    }

    #[test]
    fn lift_of_unit_is_identity_and_lifts_are_chain_maps() {
        let g = builtin("C4xC2").unwrap();
        let r = MinimalResolution::compute(g.clone(), 5).unwrap();
        let n = g.order();
        let one = MinClass::unit(0, 1, 0);
        let maps = r.lift_class(&one, 4).unwrap();
        for (j, m) in maps.iter().enumerate() {
            for (s, img) in m.iter().enumerate() {
                assert_eq!(img, &BitVec::from_ones(n * r.betti()[j], [s * n]));
            }
        }
        for i in 0..r.betti()[1] {
            let a = MinClass::unit(1, r.betti()[1], i);
            let f = r.lift_class(&a, 3).unwrap();
            for j in 1..=3 {
                for s in 0..r.betti()[1 + j] {
                    // d_j F_j(e_s) = F_{j-1}(d_{1+j} e_s)
                    let lhs = r.boundary(j).apply(&f[j][s]).unwrap();
                    let mut rhs = BitVec::zeros(n * r.betti()[j - 1]);
                    for t in 0..r.betti()[j] {
                        rhs.xor_assign(&act(&g, &r.boundary(1 + j).entry(s, t).0, &f[j - 1][t], r.betti()[j - 1]));
                    }
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn tables_are_commutative_and_associative() {
        let r = MinimalResolution::compute(builtin("16G2c2").unwrap(), 5).unwrap();
        let t = r.ring_tables(5).unwrap();
        let betti = t.betti.clone();
        let units = |d: usize| -> Vec<MinClass> {
            (0..betti[d]).map(|i| MinClass::unit(d, betti[d], i)).collect()
        };
        for p in 0..=5 {
            for q in 0..=5 - p {
                for a in units(p) {
                    for b in units(q) {
                        assert_eq!(t.multiply(&a, &b).unwrap(), t.multiply(&b, &a).unwrap());
                        for s in 0..=5 - p - q {
                            for c in units(s) {
                                let l = t.multiply(&t.multiply(&a, &b).unwrap(), &c).unwrap();
                                let rr = t.multiply(&a, &t.multiply(&b, &c).unwrap()).unwrap();
                                assert_eq!(l, rr);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = builtin("D8").unwrap();
        let a = load_or_compute(g.clone(), 4, Some(dir.path()), |_, _| {}).unwrap();
        let path = cache_path(dir.path(), &g, 4);
        assert!(path.exists());
        let b = load_or_compute(g.clone(), 4, Some(dir.path()), |_, _| panic!("recomputed")).unwrap();
        assert_eq!(a.betti(), b.betti());
        for n in 1..=4 {
            assert_eq!(a.boundary(n).matrix(), b.boundary(n).matrix());
        }
        // corrupted file is replaced
        fs::write(&path, "{").unwrap();
        let c = load_or_compute(g, 4, Some(dir.path()), |_, _| {}).unwrap();
        assert_eq!(c.betti(), a.betti());
        assert!(serde_json::from_str::<serde_json::Value>(&fs::read_to_string(&path).unwrap()).is_ok());
    }
}
