//! Dense linear algebra over F2 on bit-packed rows.
//!
//! Bit `i` of a [`BitVec`] lives in word `i / 64` at position `i % 64`. Matrices are
//! row-major with every row padded to a whole number of words, so a row is a plain
//! `&[u64]` and row operations are word-wise XORs.
//!
//! Reduction always uses the leftmost-pivot, top-row-first rule. The reduced row
//! echelon form of a matrix is unique, so the parallel schedule (rows updated
//! independently for each pivot) produces bit-identical output to the sequential one.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result, SizingError};

pub const DEFAULT_MEMORY_CAP: u64 = 2 * 1024 * 1024 * 1024;

/// Smallest cap accepted from configuration.
pub const MIN_MEMORY_CAP: u64 = 64 * 1024 * 1024;

static MEMORY_CAP: AtomicU64 = AtomicU64::new(DEFAULT_MEMORY_CAP);

/// Below this many words per sweep the parallel schedule falls back to a plain loop.
const PAR_THRESHOLD_WORDS: usize = 1 << 16;

pub fn memory_cap() -> u64 {
    MEMORY_CAP.load(Ordering::Relaxed)
}

pub fn set_memory_cap(bytes: u64) {
    MEMORY_CAP.store(bytes, Ordering::Relaxed);
}

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Fails fast if a dense `rows x cols` bit matrix would not fit under the cap.
pub fn check_dense(what: &str, rows: u128, cols: u128) -> Result<(), SizingError> {
    let bytes = rows * cols.div_ceil(64) * 8;
    let cap = memory_cap();
    if bytes > cap as u128 {
        return Err(SizingError {
            what: what.to_string(),
            rows,
            cols,
            bytes,
            cap,
        });
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                words[len / 64] |= 1 << (len % 64);
            }
            len += 1;
        }
        BitVec { len, words }
    }

    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    /// Wraps raw words; bits beyond `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVec { len, words };
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "BitVec length mismatch");
        xor_slice(&mut self.words, &other.words);
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len, other.len, "BitVec length mismatch");
        BitVec {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    /// Parity of the bitwise AND, i.e. the F2 dot product.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "BitVec length mismatch");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    /// Copies `len` bits starting at `start` into a new vector.
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(start + len <= self.len);
        if start % 64 == 0 {
            let w0 = start / 64;
            let n = words_for(len);
            return BitVec::from_words(len, self.words[w0..w0 + n].to_vec());
        }
        BitVec::from_ones(len, (0..len).filter(|&i| self.get(start + i)))
    }

    /// Concatenation of several vectors.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitVec>) -> BitVec {
        let mut out = BitVec::zeros(0);
        for p in parts {
            out.extend(p);
        }
        out
    }

    pub fn extend(&mut self, other: &BitVec) {
        if self.len % 64 == 0 {
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
            return;
        }
        let old = self.len;
        self.len += other.len;
        self.words.resize(words_for(self.len), 0);
        for i in other.iter_ones() {
            self.flip(old + i);
        }
    }

    /// Bytes in bit order (byte `j` holds bits `8j..8j+8`, least significant first), hex encoded.
    pub fn to_hex(&self) -> String {
        let nbytes = self.len.div_ceil(8);
        let bytes: Vec<u8> = self
            .words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(nbytes)
            .collect();
        hex::encode(bytes)
    }

    pub fn from_hex(len: usize, s: &str) -> Result<BitVec> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::Parse(format!("bad hex: {e}")))?;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::LengthMismatch {
                expected: len.div_ceil(8),
                got: bytes.len(),
            });
        }
        let mut words = vec![0u64; words_for(len)];
        for (i, b) in bytes.iter().enumerate() {
            words[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        let v = BitVec::from_words(len, words.clone());
        if v.words != words {
            return Err(Error::Parse("hex payload has bits beyond the stated length".into()));
        }
        Ok(v)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[")?;
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        write!(f, "]")
    }
}

#[inline]
fn xor_slice(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

/// Row scheduling used during elimination. Both produce identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_dense("bit matrix", rows as u128, cols as u128)?;
        let stride = words_for(cols);
        Ok(BitMatrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n).expect("identity within cap");
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[BitVec], cols: usize) -> Result<Self> {
        let mut m = BitMatrix::zeros(rows.len(), cols)?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            m.row_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row_vec(&self, i: usize) -> BitVec {
        BitVec::from_words(self.cols, self.row(i).to_vec())
    }

    pub fn to_rows(&self) -> Vec<BitVec> {
        (0..self.rows).map(|i| self.row_vec(i)).collect()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let w = &mut self.data[r * self.stride + c / 64];
        let mask = 1u64 << (c % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r * self.stride + c / 64] ^= 1u64 << (c % 64);
    }

    pub fn transpose(&self) -> Result<BitMatrix> {
        let mut t = BitMatrix::zeros(self.cols, self.rows)?;
        for r in 0..self.rows {
            for (wi, &w) in self.row(r).iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    let c = wi * 64 + w.trailing_zeros() as usize;
                    w &= w - 1;
                    t.set(c, r, true);
                }
            }
        }
        Ok(t)
    }

    /// Row vector times matrix: the XOR of the rows selected by `v`.
    pub fn left_mul(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                got: v.len(),
            });
        }
        let mut out = BitVec::zeros(self.cols);
        for i in v.iter_ones() {
            xor_slice(out.words_mut(), self.row(i));
        }
        Ok(out)
    }

    /// Matrix product `self * other` over F2.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols)?;
        for r in 0..self.rows {
            let v = self.row_vec(r);
            let prod = other.left_mul(&v)?;
            out.row_mut(r).copy_from_slice(prod.words());
        }
        Ok(out)
    }

    /// Stacks `self` over `other`.
    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: other.cols,
            });
        }
        check_dense("stacked matrix", (self.rows + other.rows) as u128, self.cols as u128)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(BitMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Packed row-major hex dump (each row padded to whole bytes).
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            out.push_str(&self.row_vec(r).to_hex());
        }
        out
    }

    pub fn from_hex(rows: usize, cols: usize, s: &str) -> Result<BitMatrix> {
        let per_row = cols.div_ceil(8) * 2;
        if s.len() != rows * per_row {
            return Err(Error::LengthMismatch {
                expected: rows * per_row,
                got: s.len(),
            });
        }
        let mut m = BitMatrix::zeros(rows, cols)?;
        for r in 0..rows {
            let v = BitVec::from_hex(cols, &s[r * per_row..(r + 1) * per_row])?;
            m.row_mut(r).copy_from_slice(v.words());
        }
        Ok(m)
    }

    pub fn rank(&self) -> usize {
        self.rank_with(Schedule::default())
    }

    pub fn rank_with(&self, schedule: Schedule) -> usize {
        let mut m = self.clone();
        eliminate(&mut m, self.cols, false, schedule).len()
    }

    /// Reduced row echelon form of the row space.
    pub fn rref(&self) -> Echelon {
        Echelon::new(self, Schedule::default())
    }

    pub fn rref_with(&self, schedule: Schedule) -> Echelon {
        Echelon::new(self, schedule)
    }

    /// Decides whether `v` lies in the row space; on success returns coefficients `w`
    /// with `w · self = v`.
    pub fn in_span(&self, v: &BitVec) -> Result<(bool, Option<BitVec>)> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        let ech = Echelon::with_transform(self, Schedule::default())?;
        let w = ech.solve(v);
        Ok((w.is_some(), w))
    }

    /// Basis of the left kernel `{x : x · self = 0}`.
    pub fn kernel_basis(&self) -> Result<Vec<BitVec>> {
        Ok(Echelon::with_transform(self, Schedule::default())?.left_kernel().to_vec())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", if self.get(r, c) { '1' } else { '.' })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Gaussian elimination in place. Pivots are searched among the first `pivot_cols`
/// columns only; row operations act on the whole stride (so trailing columns can carry
/// a transform). With `full` set, pivot columns are cleared above the pivot as well,
/// producing reduced row echelon form. Returns the pivot columns; the first
/// `pivots.len()` rows of `m` are then the nonzero echelon rows.
fn eliminate(m: &mut BitMatrix, pivot_cols: usize, full: bool, schedule: Schedule) -> Vec<usize> {
    let stride = m.stride;
    let nrows = m.rows;
    let mut pivots = Vec::new();
    let mut r = 0;
    let mut pivot_row = vec![0u64; stride];
    for col in 0..pivot_cols {
        if r == nrows {
            break;
        }
        let w = col / 64;
        let mask = 1u64 << (col % 64);
        let Some(found) = (r..nrows).find(|&i| m.data[i * stride + w] & mask != 0) else {
            continue;
        };
        if found != r {
            for k in 0..stride {
                m.data.swap(found * stride + k, r * stride + k);
            }
        }
        pivot_row[w..].copy_from_slice(&m.data[r * stride + w..(r + 1) * stride]);
        let tail = &pivot_row[w..];
        let sweep = |row: &mut [u64]| {
            if row[w] & mask != 0 {
                xor_slice(&mut row[w..], tail);
            }
        };
        let (above, rest) = m.data.split_at_mut(r * stride);
        let below = &mut rest[stride..];
        let work = (if full { nrows } else { nrows - r }) * (stride - w);
        if schedule == Schedule::Parallel && work >= PAR_THRESHOLD_WORDS {
            below.par_chunks_mut(stride).for_each(sweep);
            if full {
                above.par_chunks_mut(stride).for_each(sweep);
            }
        } else {
            below.chunks_mut(stride).for_each(sweep);
            if full {
                above.chunks_mut(stride).for_each(sweep);
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

/// Row echelon data for a matrix: the reduced basis of its row space, the pivot
/// columns, and optionally the row operations that produced each basis row.
#[derive(Clone, Debug)]
pub struct Echelon {
    cols: usize,
    source_rows: usize,
    basis: BitMatrix,
    pivots: Vec<usize>,
    /// Row `i` expresses basis row `i` as a combination of the source rows.
    transform: Option<BitMatrix>,
    kernel: Vec<BitVec>,
}

impl Echelon {
    pub fn new(m: &BitMatrix, schedule: Schedule) -> Echelon {
        let mut work = m.clone();
        let pivots = eliminate(&mut work, m.cols, true, schedule);
        work.rows = pivots.len();
        work.data.truncate(pivots.len() * work.stride);
        Echelon {
            cols: m.cols,
            source_rows: m.rows,
            basis: work,
            pivots,
            transform: None,
            kernel: Vec::new(),
        }
    }

    /// Like [`Echelon::new`] but also records the transform, which makes
    /// [`Echelon::solve`] return witnesses and yields the left kernel.
    pub fn with_transform(m: &BitMatrix, schedule: Schedule) -> Result<Echelon> {
        let n = m.rows;
        let mut aug = BitMatrix::zeros(n, m.cols + n)?;
        for r in 0..n {
            for c in m.row_vec(r).iter_ones() {
                aug.set(r, c, true);
            }
            aug.set(r, m.cols + r, true);
        }
        let pivots = eliminate(&mut aug, m.cols, true, schedule);
        let rank = pivots.len();
        let mut basis = BitMatrix::zeros(rank, m.cols)?;
        let mut transform = BitMatrix::zeros(rank, n)?;
        let mut kernel = Vec::with_capacity(n - rank);
        for r in 0..n {
            let full = aug.row_vec(r);
            let left = full.slice(0, m.cols);
            let right = full.slice(m.cols, n);
            if r < rank {
                basis.row_mut(r).copy_from_slice(left.words());
                transform.row_mut(r).copy_from_slice(right.words());
            } else {
                debug_assert!(left.is_zero());
                kernel.push(right);
            }
        }
        Ok(Echelon {
            cols: m.cols,
            source_rows: n,
            basis,
            pivots,
            transform: Some(transform),
            kernel,
        })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis(&self) -> &BitMatrix {
        &self.basis
    }

    /// Left kernel of the source matrix (only populated by [`Echelon::with_transform`]).
    pub fn left_kernel(&self) -> &[BitVec] {
        &self.kernel
    }

    /// Reduces `v` in place against the echelon basis; returns the combination of
    /// basis rows that was subtracted.
    pub fn reduce(&self, v: &mut BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols);
        let mut used = BitVec::zeros(self.rank());
        for (i, &pc) in self.pivots.iter().enumerate() {
            if v.get(pc) {
                xor_slice(v.words_mut(), self.basis.row(i));
                used.flip(i);
            }
        }
        used
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut v = v.clone();
        self.reduce(&mut v);
        v.is_zero()
    }

    /// Coefficients over the source rows reproducing `v`, if `v` is in the row space.
    /// Requires a transform.
    pub fn solve(&self, v: &BitVec) -> Option<BitVec> {
        let t = self
            .transform
            .as_ref()
            .expect("solve needs an echelon built with_transform");
        let mut v = v.clone();
        let used = self.reduce(&mut v);
        if !v.is_zero() {
            return None;
        }
        let mut w = BitVec::zeros(self.source_rows);
        for i in used.iter_ones() {
            xor_slice(w.words_mut(), t.row(i));
        }
        Some(w)
    }
}

/// Incremental echelon basis: vectors are inserted one at a time and kept fully reduced.
#[derive(Clone, Debug)]
pub struct Subspace {
    len: usize,
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn new(len: usize) -> Self {
        Subspace {
            len,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient(&self) -> usize {
        self.len
    }

    pub fn reduce(&self, v: &mut BitVec) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row);
            }
        }
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut v = v.clone();
        self.reduce(&mut v);
        v.is_zero()
    }

    /// Adds `v`; returns false if it was already in the span.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.len);
        let mut v = v.clone();
        self.reduce(&mut v);
        let Some(p) = v.first_one() else {
            return false;
        };
        for row in &mut self.rows {
            if row.get(p) {
                row.xor_assign(&v);
            }
        }
        let pos = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(pos, p);
        self.rows.insert(pos, v);
        true
    }

    pub fn basis(&self) -> &[BitVec] {
        &self.rows
    }
}
