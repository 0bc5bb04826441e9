//! Exact integer linear algebra and finitely generated abelian groups.
//!
//! Every group here is given by a presentation `Z^n / rowspan(R)`. A Smith
//! normal form of the relation matrix is computed once at construction; it
//! provides a canonical coordinate system in which equality, orders and
//! enumeration are straightforward.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Int = BigInt;

/// Converts a slice of machine integers into a group element vector.
pub fn elem(xs: &[i64]) -> Vec<Int> {
    xs.iter().map(|&x| Int::from(x)).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FgabError {
    #[error("operation requires a finite group, found free rank {0}")]
    InfiniteGroup(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix does not define a homomorphism: relation {0} is not carried to a relation")]
    NotAHomomorphism(usize),
    #[error("subgroups live in different ambient groups")]
    AmbientMismatch,
    #[error("denominator is not contained in numerator")]
    NotASubgroup,
    #[error("containment hypothesis violated: W_{a} is not contained in W_{b} W_(2b-a)")]
    HypothesisViolated { a: String, b: String },
}

pub type Result<T> = std::result::Result<T, FgabError>;

fn fmt_vec(v: &[Int]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

// ---------------------------------------------------------------------------
// IntMatrix

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}", fmt_vec(self.row(i)))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Int::one();
        }
        m
    }

    /// Builds a matrix from row vectors. `cols` is needed so that a matrix
    /// with no rows still knows its width.
    pub fn from_rows(cols: usize, rows: &[Vec<Int>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(FgabError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r.iter().cloned());
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        IntMatrix {
            rows,
            cols,
            data: entries.iter().map(|&x| Int::from(x)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Int>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, x: &[Int]) -> Vec<Int> {
        assert_eq!(x.len(), self.rows, "vector length must equal row count");
        let mut out = vec![Int::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let a = self.get(i, j);
                if !a.is_zero() {
                    *o += xi * a;
                }
            }
        }
        out
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &IntMatrix) -> Self {
        assert_eq!(self.cols, other.cols, "vstack width mismatch");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &Int) {
        for c in 0..self.cols {
            let v = self.get(src, c) * k;
            self.data[dst * self.cols + c] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &Int) {
        for r in 0..self.rows {
            let v = self.get(r, src) * k;
            self.data[r * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let v = -self.get(i, c);
            self.set(i, c, v);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for r in 0..self.rows {
            let v = -self.get(r, j);
            self.set(r, j, v);
        }
    }
}

// ---------------------------------------------------------------------------
// Smith normal form

/// `u * a * v == s` with `u`, `v` unimodular and `s` diagonal with
/// `d1 | d2 | ... | dk >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<Int> {
        (0..self.s.rows.min(self.s.cols))
            .map(|i| self.s.get(i, i).clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

struct SmithFull {
    form: SmithForm,
    v_inv: IntMatrix,
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    smith_full(a).form
}

fn smith_full(a: &IntMatrix) -> SmithFull {
    let (r, c) = (a.rows, a.cols);
    let mut s = a.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    let mut v_inv = IntMatrix::identity(c);

    // Column operations are mirrored on v and inversely (as row operations) on v_inv.
    let swap_c = |s: &mut IntMatrix, v: &mut IntMatrix, vi: &mut IntMatrix, i: usize, j: usize| {
        s.swap_cols(i, j);
        v.swap_cols(i, j);
        vi.swap_rows(i, j);
    };
    let add_c = |s: &mut IntMatrix, v: &mut IntMatrix, vi: &mut IntMatrix, dst: usize, src: usize, k: &Int| {
        s.add_col(dst, src, k);
        v.add_col(dst, src, k);
        vi.add_row(src, dst, &-k);
    };
    let swap_r = |s: &mut IntMatrix, u: &mut IntMatrix, i: usize, j: usize| {
        s.swap_rows(i, j);
        u.swap_rows(i, j);
    };
    let add_r = |s: &mut IntMatrix, u: &mut IntMatrix, dst: usize, src: usize, k: &Int| {
        s.add_row(dst, src, k);
        u.add_row(dst, src, k);
    };

    for t in 0..r.min(c) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..r {
            for j in t..c {
                let x = s.get(i, j);
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < s.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        swap_r(&mut s, &mut u, t, pi);
        swap_c(&mut s, &mut v, &mut v_inv, t, pj);

        loop {
            let p = s.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..r {
                if !s.get(i, t).is_zero() {
                    let q = s.get(i, t).div_floor(&p);
                    add_r(&mut s, &mut u, i, t, &-q);
                    if !s.get(i, t).is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..c {
                if !s.get(t, j).is_zero() {
                    let q = s.get(t, j).div_floor(&p);
                    add_c(&mut s, &mut v, &mut v_inv, j, t, &-q);
                    if !s.get(t, j).is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                // a remainder smaller than the pivot appeared in row/column t
                let mut best = (t, t);
                for i in t + 1..r {
                    let x = s.get(i, t);
                    if !x.is_zero() && x.abs() < s.get(best.0, best.1).abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..c {
                    let x = s.get(t, j);
                    if !x.is_zero() && x.abs() < s.get(best.0, best.1).abs() {
                        best = (t, j);
                    }
                }
                swap_r(&mut s, &mut u, t, best.0);
                swap_c(&mut s, &mut v, &mut v_inv, t, best.1);
                continue;
            }
            // divisibility: pull a non-multiple into row t
            let mut bad = None;
            'outer: for i in t + 1..r {
                for j in t + 1..c {
                    if !s.get(i, j).is_multiple_of(&p) {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad {
                Some(i) => add_r(&mut s, &mut u, t, i, &Int::one()),
                None => break,
            }
        }
        if s.get(t, t).is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    // normalize any stray sign (possible only in degenerate shapes)
    for t in 0..r.min(c) {
        if s.get(t, t).is_negative() {
            s.negate_col(t);
            v.negate_col(t);
            v_inv.negate_row(t);
        }
    }
    SmithFull {
        form: SmithForm { u, s, v },
        v_inv,
    }
}

/// Basis of the integer left kernel `{x : x * m = 0}`.
pub fn left_kernel(m: &IntMatrix) -> Vec<Vec<Int>> {
    let snf = smith_normal_form(m);
    let rank = snf.rank();
    (rank..m.rows).map(|i| snf.u.row(i).to_vec()).collect()
}

/// Some integer `y` with `y * m = x`, if one exists.
pub fn solve_left(m: &IntMatrix, x: &[Int]) -> Option<Vec<Int>> {
    assert_eq!(x.len(), m.cols, "right-hand side width mismatch");
    let SmithFull { form, .. } = smith_full(m);
    let w = form.v.left_apply(x);
    let diag = form.diagonal();
    let mut z = vec![Int::zero(); m.rows];
    for (j, wj) in w.iter().enumerate() {
        let d = diag.get(j).cloned().unwrap_or_else(Int::zero);
        if d.is_zero() {
            if !wj.is_zero() {
                return None;
            }
        } else {
            let (q, rem) = wj.div_rem(&d);
            if !rem.is_zero() {
                return None;
            }
            z[j] = q;
        }
    }
    Some(form.u.left_apply(&z))
}

// ---------------------------------------------------------------------------
// FGAbGroup

/// Finitely generated abelian group `Z^n / rowspan(relations)`.
#[derive(Clone)]
pub struct FGAbGroup {
    ngens: usize,
    relations: IntMatrix,
    factors: Vec<Int>,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl fmt::Debug for FGAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FGAbGroup({})", self)
    }
}

/// Renders the invariant factors as `Z/2 + Z/4 + Z`; the trivial group is `1`.
impl fmt::Display for FGAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_invariants(&self.invariant_factors()))
    }
}

pub fn render_invariants(factors: &[Int]) -> String {
    if factors.is_empty() {
        return "1".to_string();
    }
    factors
        .iter()
        .map(|d| if d.is_zero() { "Z".to_string() } else { format!("Z/{d}") })
        .collect::<Vec<_>>()
        .join(" + ")
}

impl PartialEq for FGAbGroup {
    /// Equality of presentations, not isomorphism; see [`FGAbGroup::is_isomorphic`].
    fn eq(&self, other: &Self) -> bool {
        self.ngens == other.ngens && self.relations == other.relations
    }
}

impl Eq for FGAbGroup {}

impl FGAbGroup {
    pub fn new(ngens: usize, relations: IntMatrix) -> Result<Self> {
        if relations.cols != ngens {
            return Err(FgabError::DimensionMismatch {
                expected: ngens,
                found: relations.cols,
            });
        }
        let SmithFull { form, v_inv } = smith_full(&relations);
        let diag = form.diagonal();
        let factors = (0..ngens)
            .map(|i| diag.get(i).cloned().unwrap_or_else(Int::zero))
            .collect();
        Ok(FGAbGroup {
            ngens,
            relations,
            factors,
            v: form.v,
            v_inv,
        })
    }

    pub fn from_relation_rows(ngens: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let rows: Vec<Vec<Int>> = rows.iter().map(|r| elem(r)).collect();
        Self::new(ngens, IntMatrix::from_rows(ngens, &rows)?)
    }

    /// Direct sum of cyclic groups `Z/d` (with `d = 0` meaning `Z`).
    pub fn from_orders(orders: &[i64]) -> Self {
        let n = orders.len();
        let mut rel = IntMatrix::zeros(n, n);
        for (i, &d) in orders.iter().enumerate() {
            rel.set(i, i, Int::from(d));
        }
        Self::new(n, rel).expect("square diagonal relations")
    }

    pub fn cyclic(order: i64) -> Self {
        Self::from_orders(&[order])
    }

    pub fn free(rank: usize) -> Self {
        Self::new(rank, IntMatrix::zeros(0, rank)).expect("empty relations")
    }

    pub fn trivial() -> Self {
        Self::free(0)
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    fn check_len(&self, x: &[Int]) -> Result<()> {
        if x.len() != self.ngens {
            return Err(FgabError::DimensionMismatch {
                expected: self.ngens,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Coordinates in the invariant-factor basis, each reduced into `[0, d)`
    /// (trivial coordinates dropped to zero).
    pub fn canonical(&self, x: &[Int]) -> Vec<Int> {
        let y = self.v.left_apply(x);
        y.into_iter()
            .zip(&self.factors)
            .map(|(yi, d)| {
                if d.is_one() {
                    Int::zero()
                } else if d.is_zero() {
                    yi
                } else {
                    yi.mod_floor(d)
                }
            })
            .collect()
    }

    /// Canonical representative of the class of `x`, in generator coordinates.
    pub fn reduce(&self, x: &[Int]) -> Vec<Int> {
        self.v_inv.left_apply(&self.canonical(x))
    }

    pub fn is_zero(&self, x: &[Int]) -> bool {
        self.canonical(x).iter().all(Zero::is_zero)
    }

    pub fn elem_eq(&self, x: &[Int], y: &[Int]) -> bool {
        let d: Vec<Int> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.is_zero(&d)
    }

    pub fn zero(&self) -> Vec<Int> {
        vec![Int::zero(); self.ngens]
    }

    pub fn add(&self, x: &[Int], y: &[Int]) -> Vec<Int> {
        self.reduce(&x.iter().zip(y).map(|(a, b)| a + b).collect::<Vec<_>>())
    }

    pub fn scale(&self, k: &Int, x: &[Int]) -> Vec<Int> {
        self.reduce(&x.iter().map(|a| a * k).collect::<Vec<_>>())
    }

    pub fn neg(&self, x: &[Int]) -> Vec<Int> {
        self.scale(&Int::from(-1), x)
    }

    /// Generator `i` as an element.
    pub fn generator(&self, i: usize) -> Vec<Int> {
        let mut g = self.zero();
        g[i] = Int::one();
        g
    }

    /// Nontrivial invariant factors: torsion ascending by divisibility, then
    /// `0` once per free rank. Empty for the trivial group.
    pub fn invariant_factors(&self) -> Vec<Int> {
        self.factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    pub fn free_rank(&self) -> usize {
        self.factors.iter().filter(|d| d.is_zero()).count()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank() == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors().is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.invariant_factors().len() <= 1
    }

    pub fn is_isomorphic(&self, other: &FGAbGroup) -> bool {
        self.invariant_factors() == other.invariant_factors()
    }

    pub fn order(&self) -> Result<Int> {
        if !self.is_finite() {
            return Err(FgabError::InfiniteGroup(self.free_rank()));
        }
        Ok(self.factors.iter().fold(Int::one(), |acc, d| acc * d))
    }

    /// Least common multiple of the invariant factors; `0` for an infinite group.
    pub fn exponent(&self) -> Int {
        self.factors.iter().fold(Int::one(), |acc, d| acc.lcm(d))
    }

    /// Order of `x`, with `0` meaning infinite order.
    pub fn element_order(&self, x: &[Int]) -> Int {
        let y = self.canonical(x);
        let mut ord = Int::one();
        for (yi, d) in y.iter().zip(&self.factors) {
            if d.is_one() || yi.is_zero() {
                continue;
            }
            if d.is_zero() {
                return Int::zero();
            }
            ord = ord.lcm(&(d / yi.gcd(d)));
        }
        ord
    }

    /// Every element exactly once, as canonical representatives.
    pub fn enumerate(&self) -> Result<ElementIter<'_>> {
        if !self.is_finite() {
            return Err(FgabError::InfiniteGroup(self.free_rank()));
        }
        let coords: Vec<usize> = (0..self.ngens).filter(|&i| !self.factors[i].is_one()).collect();
        Ok(ElementIter {
            group: self,
            counter: vec![Int::zero(); coords.len()],
            coords,
            done: false,
        })
    }

    pub fn subgroup_generated(&self, elems: &[Vec<Int>]) -> Result<Subgroup> {
        for e in elems {
            self.check_len(e)?;
        }
        Ok(Subgroup::new_unchecked(
            self.clone(),
            elems.iter().map(|e| self.reduce(e)).collect(),
        ))
    }

    pub fn whole(&self) -> Subgroup {
        let gens = (0..self.ngens).map(|i| self.generator(i)).collect();
        Subgroup::new_unchecked(self.clone(), gens)
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup::new_unchecked(self.clone(), Vec::new())
    }

    /// Presentation of `G/H` on the same generators.
    pub fn quotient(&self, h: &Subgroup) -> Result<FGAbGroup> {
        if h.ambient != *self {
            return Err(FgabError::AmbientMismatch);
        }
        let extra = IntMatrix::from_rows(self.ngens, &h.gens)?;
        FGAbGroup::new(self.ngens, self.relations.vstack(&extra))
    }

    pub fn direct_sum(&self, other: &FGAbGroup) -> FGAbGroup {
        let n = self.ngens + other.ngens;
        let mut rows = Vec::new();
        for r in self.relations.row_vecs() {
            let mut row = r;
            row.extend(std::iter::repeat_n(Int::zero(), other.ngens));
            rows.push(row);
        }
        for r in other.relations.row_vecs() {
            let mut row = vec![Int::zero(); self.ngens];
            row.extend(r);
            rows.push(row);
        }
        FGAbGroup::new(n, IntMatrix::from_rows(n, &rows).expect("consistent widths")).expect("valid")
    }
}

pub struct ElementIter<'a> {
    group: &'a FGAbGroup,
    coords: Vec<usize>,
    counter: Vec<Int>,
    done: bool,
}

impl Iterator for ElementIter<'_> {
    type Item = Vec<Int>;

    fn next(&mut self) -> Option<Vec<Int>> {
        if self.done {
            return None;
        }
        let mut y = vec![Int::zero(); self.group.ngens];
        for (k, &i) in self.coords.iter().enumerate() {
            y[i] = self.counter[k].clone();
        }
        let out = self.group.v_inv.left_apply(&y);
        // mixed-radix increment
        let mut k = 0;
        loop {
            if k == self.coords.len() {
                self.done = true;
                break;
            }
            self.counter[k] += 1;
            if self.counter[k] < self.group.factors[self.coords[k]] {
                break;
            }
            self.counter[k] = Int::zero();
            k += 1;
        }
        Some(out)
    }
}

// ---------------------------------------------------------------------------
// Subgroup

/// Subgroup of a finitely generated abelian group, kept as a generator list.
#[derive(Clone)]
pub struct Subgroup {
    ambient: FGAbGroup,
    gens: Vec<Vec<Int>>,
    cosets: OnceLock<FGAbGroup>,
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.gens.iter().map(|g| fmt_vec(g)).collect();
        write!(f, "Subgroup<{}>[{}]", self.ambient, gens.join(", "))
    }
}

impl Subgroup {
    fn new_unchecked(ambient: FGAbGroup, gens: Vec<Vec<Int>>) -> Self {
        // long generator lists are replaced by a Hermite basis of their span plus relations
        let gens = if gens.len() > 2 * ambient.ngens + 2 {
            let mut rows = gens;
            rows.extend(ambient.relations.row_vecs());
            crate::grading::hermite_rows(ambient.ngens, &rows)
                .into_iter()
                .map(|r| ambient.reduce(&r))
                .filter(|r| !ambient.is_zero(r))
                .collect()
        } else {
            gens
        };
        Subgroup {
            ambient,
            gens,
            cosets: OnceLock::new(),
        }
    }

    pub fn ambient(&self) -> &FGAbGroup {
        &self.ambient
    }

    pub fn generators(&self) -> &[Vec<Int>] {
        &self.gens
    }

    /// The quotient `ambient / self`, cached.
    pub fn cosets(&self) -> &FGAbGroup {
        self.cosets
            .get_or_init(|| self.ambient.quotient(self).expect("same ambient"))
    }

    pub fn contains(&self, x: &[Int]) -> bool {
        x.len() == self.ambient.ngens && self.cosets().is_zero(x)
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.ambient == other.ambient && self.gens.iter().all(|g| other.contains(g))
    }

    pub fn same_as(&self, other: &Subgroup) -> bool {
        self.is_subgroup_of(other) && other.is_subgroup_of(self)
    }

    pub fn join(&self, other: &Subgroup) -> Result<Subgroup> {
        if self.ambient != other.ambient {
            return Err(FgabError::AmbientMismatch);
        }
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        Ok(Subgroup::new_unchecked(self.ambient.clone(), gens))
    }

    pub fn join_all<'a, I: IntoIterator<Item = &'a Subgroup>>(ambient: &FGAbGroup, parts: I) -> Result<Subgroup> {
        let mut acc = ambient.trivial_subgroup();
        for p in parts {
            acc = acc.join(p)?;
        }
        Ok(acc)
    }

    /// Coefficients `c` with `sum c_i g_i = x` in the ambient group.
    pub fn solve_membership(&self, x: &[Int]) -> Option<Vec<Int>> {
        if x.len() != self.ambient.ngens {
            return None;
        }
        let t = self.gens.len();
        let m = IntMatrix::from_rows(self.ambient.ngens, &self.gens)
            .expect("generator widths")
            .vstack(&self.ambient.relations);
        solve_left(&m, x).map(|y| y[..t].to_vec())
    }

    /// The subgroup as an abstract group presented on its generators.
    pub fn as_group(&self) -> FGAbGroup {
        let t = self.gens.len();
        let m = IntMatrix::from_rows(self.ambient.ngens, &self.gens)
            .expect("generator widths")
            .vstack(&self.ambient.relations);
        let rels: Vec<Vec<Int>> = left_kernel(&m).into_iter().map(|k| k[..t].to_vec()).collect();
        FGAbGroup::new(t, IntMatrix::from_rows(t, &rels).expect("widths")).expect("valid")
    }

    pub fn order(&self) -> Result<Int> {
        if self.ambient.is_finite() {
            let total = self.ambient.order()?;
            let idx = self.cosets().order()?;
            Ok(total / idx)
        } else {
            self.as_group().order()
        }
    }

    pub fn intersection(&self, other: &Subgroup) -> Result<Subgroup> {
        if self.ambient != other.ambient {
            return Err(FgabError::AmbientMismatch);
        }
        let n = self.ambient.ngens;
        let t = self.gens.len();
        let neg: Vec<Vec<Int>> = other.gens.iter().map(|g| g.iter().map(|x| -x).collect()).collect();
        let m = IntMatrix::from_rows(n, &self.gens)?
            .vstack(&IntMatrix::from_rows(n, &neg)?)
            .vstack(&self.ambient.relations);
        let mut gens = Vec::new();
        for k in left_kernel(&m) {
            let mut x = vec![Int::zero(); n];
            for (c, g) in k[..t].iter().zip(&self.gens) {
                for (xi, gi) in x.iter_mut().zip(g) {
                    *xi += c * gi;
                }
            }
            let x = self.ambient.reduce(&x);
            if !self.ambient.is_zero(&x) {
                gens.push(x);
            }
        }
        Ok(Subgroup::new_unchecked(self.ambient.clone(), gens))
    }

    /// Elements of a finite subgroup, each once.
    pub fn elements(&self) -> Result<Vec<Vec<Int>>> {
        Ok(self.ambient.enumerate()?.filter(|x| self.contains(x)).collect())
    }
}

/// `num / den` for `den <= num <= G`, presented on the generators of `num`.
pub fn subquotient(num: &Subgroup, den: &Subgroup) -> Result<FGAbGroup> {
    if num.ambient != den.ambient {
        return Err(FgabError::AmbientMismatch);
    }
    if !den.is_subgroup_of(num) {
        return Err(FgabError::NotASubgroup);
    }
    let g = &num.ambient;
    let t = num.gens.len();
    let m = IntMatrix::from_rows(g.ngens, &num.gens)?
        .vstack(&g.relations)
        .vstack(&IntMatrix::from_rows(g.ngens, &den.gens)?);
    let rels: Vec<Vec<Int>> = left_kernel(&m).into_iter().map(|k| k[..t].to_vec()).collect();
    FGAbGroup::new(t, IntMatrix::from_rows(t, &rels)?)
}

// ---------------------------------------------------------------------------
// GroupHom

/// Homomorphism given on generators: `x |-> x * matrix`.
#[derive(Clone, Debug)]
pub struct GroupHom {
    source: FGAbGroup,
    target: FGAbGroup,
    matrix: IntMatrix,
}

impl GroupHom {
    pub fn new(source: FGAbGroup, target: FGAbGroup, matrix: IntMatrix) -> Result<Self> {
        if matrix.rows != source.ngens {
            return Err(FgabError::DimensionMismatch {
                expected: source.ngens,
                found: matrix.rows,
            });
        }
        if matrix.cols != target.ngens {
            return Err(FgabError::DimensionMismatch {
                expected: target.ngens,
                found: matrix.cols,
            });
        }
        for i in 0..source.relations.rows {
            if !target.is_zero(&matrix.left_apply(source.relations.row(i))) {
                return Err(FgabError::NotAHomomorphism(i));
            }
        }
        Ok(GroupHom { source, target, matrix })
    }

    pub fn identity(g: &FGAbGroup) -> Self {
        GroupHom {
            source: g.clone(),
            target: g.clone(),
            matrix: IntMatrix::identity(g.ngens),
        }
    }

    pub fn zero(source: &FGAbGroup, target: &FGAbGroup) -> Self {
        GroupHom {
            source: source.clone(),
            target: target.clone(),
            matrix: IntMatrix::zeros(source.ngens, target.ngens),
        }
    }

    /// `x |-> k x` on `g`.
    pub fn scalar(g: &FGAbGroup, k: i64) -> Self {
        let mut m = IntMatrix::zeros(g.ngens, g.ngens);
        for i in 0..g.ngens {
            m.set(i, i, Int::from(k));
        }
        GroupHom {
            source: g.clone(),
            target: g.clone(),
            matrix: m,
        }
    }

    pub fn source(&self) -> &FGAbGroup {
        &self.source
    }

    pub fn target(&self) -> &FGAbGroup {
        &self.target
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &[Int]) -> Vec<Int> {
        self.target.reduce(&self.matrix.left_apply(x))
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GroupHom) -> Result<GroupHom> {
        if self.target != next.source {
            return Err(FgabError::AmbientMismatch);
        }
        Ok(GroupHom {
            source: self.source.clone(),
            target: next.target.clone(),
            matrix: self.matrix.mul(&next.matrix),
        })
    }

    pub fn add(&self, other: &GroupHom) -> Result<GroupHom> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &GroupHom) -> Result<GroupHom> {
        self.combine(other, -1)
    }

    fn combine(&self, other: &GroupHom, sign: i64) -> Result<GroupHom> {
        if self.source != other.source || self.target != other.target {
            return Err(FgabError::AmbientMismatch);
        }
        let mut m = self.matrix.clone();
        let s = Int::from(sign);
        for (a, b) in m.data.iter_mut().zip(&other.matrix.data) {
            *a += b * &s;
        }
        Ok(GroupHom {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: m,
        })
    }

    pub fn scaled(&self, k: i64) -> GroupHom {
        let k = Int::from(k);
        let mut m = self.matrix.clone();
        for a in m.data.iter_mut() {
            *a *= &k;
        }
        GroupHom {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: m,
        }
    }

    /// Same map into `target / h`.
    pub fn modulo(&self, h: &Subgroup) -> Result<GroupHom> {
        let q = self.target.quotient(h)?;
        Ok(GroupHom {
            source: self.source.clone(),
            target: q,
            matrix: self.matrix.clone(),
        })
    }

    /// Same map with source restricted to the presentation of `s` on its generators.
    pub fn restrict(&self, s: &Subgroup) -> Result<GroupHom> {
        if s.ambient != self.source {
            return Err(FgabError::AmbientMismatch);
        }
        let sg = s.as_group();
        let gm = IntMatrix::from_rows(self.source.ngens, &s.gens)?;
        Ok(GroupHom {
            source: sg,
            target: self.target.clone(),
            matrix: gm.mul(&self.matrix),
        })
    }

    pub fn is_zero_map(&self) -> bool {
        (0..self.source.ngens).all(|i| self.target.is_zero(self.matrix.row(i)))
    }

    pub fn equals(&self, other: &GroupHom) -> bool {
        self.sub(other).map(|d| d.is_zero_map()).unwrap_or(false)
    }

    pub fn kernel(&self) -> Subgroup {
        let ns = self.source.ngens;
        let m = self.matrix.vstack(&self.target.relations);
        let gens: Vec<Vec<Int>> = left_kernel(&m)
            .into_iter()
            .map(|k| self.source.reduce(&k[..ns]))
            .filter(|x| !self.source.is_zero(x))
            .collect();
        Subgroup::new_unchecked(self.source.clone(), gens)
    }

    pub fn image(&self) -> Subgroup {
        let gens = (0..self.source.ngens)
            .map(|i| self.target.reduce(self.matrix.row(i)))
            .collect();
        Subgroup::new_unchecked(self.target.clone(), gens)
    }

    pub fn image_of(&self, s: &Subgroup) -> Result<Subgroup> {
        if s.ambient != self.source {
            return Err(FgabError::AmbientMismatch);
        }
        let gens = s.gens.iter().map(|g| self.apply(g)).collect();
        Ok(Subgroup::new_unchecked(self.target.clone(), gens))
    }

    pub fn preimage(&self, h: &Subgroup) -> Result<Subgroup> {
        if h.ambient != self.target {
            return Err(FgabError::AmbientMismatch);
        }
        Ok(self.modulo(h)?.kernel())
    }

    /// Some `x` with `f(x) = y`, if `y` lies in the image.
    pub fn solve(&self, y: &[Int]) -> Option<Vec<Int>> {
        let m = self.matrix.vstack(&self.target.relations);
        solve_left(&m, y).map(|s| self.source.reduce(&s[..self.source.ngens]))
    }
}

/// `W_a` family indexed by canonical representatives of a finite group `A`.
pub type SubgroupFamily<'a> = dyn Fn(&[Int]) -> Subgroup + 'a;

/// Checks `W_a <= W_b W_(2b - a)` for all `a, b` in `A`.
pub fn lembe_check(u: &FGAbGroup, a: &FGAbGroup, w: &SubgroupFamily<'_>) -> Result<()> {
    let elems: Vec<Vec<Int>> = a.enumerate()?.collect();
    let family: Vec<Subgroup> = elems.iter().map(|x| w(x)).collect();
    for (i, x) in elems.iter().enumerate() {
        if family[i].ambient != *u {
            return Err(FgabError::AmbientMismatch);
        }
        for (j, y) in elems.iter().enumerate() {
            let two_b_minus_a: Vec<Int> = y.iter().zip(x).map(|(b, a)| b * 2 - a).collect();
            let c = a.reduce(&two_b_minus_a);
            let k = elems.iter().position(|e| a.elem_eq(e, &c)).expect("enumerated");
            let rhs = family[j].join(&family[k])?;
            if !family[i].is_subgroup_of(&rhs) {
                return Err(FgabError::HypothesisViolated {
                    a: fmt_vec(x),
                    b: fmt_vec(y),
                });
            }
        }
    }
    Ok(())
}

/// Product over `(e_1..e_m) in {0,1}^m` of `W_(e_1 a_1 + ... + e_m a_m)`. Under the
/// hypothesis checked by [`lembe_check`] this equals the product over all of `A`.
pub fn lembe_product(
    u: &FGAbGroup,
    a: &FGAbGroup,
    w: &SubgroupFamily<'_>,
    gens: &[Vec<Int>],
    check: bool,
) -> Result<Subgroup> {
    if check {
        lembe_check(u, a, w)?;
    }
    let m = gens.len();
    if m >= usize::BITS as usize {
        return Err(FgabError::DimensionMismatch {
            expected: usize::BITS as usize - 1,
            found: m,
        });
    }
    let mut acc = u.trivial_subgroup();
    for mask in 0usize..(1usize << m) {
        let mut x = a.zero();
        for (i, g) in gens.iter().enumerate() {
            if mask >> i & 1 == 1 {
                a.check_len(g)?;
                x = x.iter().zip(g).map(|(p, q)| p + q).collect();
            }
        }
        let wx = w(&a.reduce(&x));
        if wx.ambient != *u {
            return Err(FgabError::AmbientMismatch);
        }
        acc = acc.join(&wx)?;
    }
    Ok(acc)
}

/// Product of `W_a` over every element of `A`.
pub fn full_product(u: &FGAbGroup, a: &FGAbGroup, w: &SubgroupFamily<'_>) -> Result<Subgroup> {
    let mut acc = u.trivial_subgroup();
    for x in a.enumerate()? {
        acc = acc.join(&w(&x))?;
    }
    Ok(acc)
}

/// Total order on canonical element vectors, for deterministic sorting.
pub fn cmp_elems(x: &[Int], y: &[Int]) -> Ordering {
    x.cmp(y)
}

pub fn to_i64(x: &Int) -> Option<i64> {
    x.to_i64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, e: &[i64]) -> IntMatrix {
        IntMatrix::from_i64(rows, cols, e)
    }

    fn ints(v: &[i64]) -> Vec<Int> {
        elem(v)
    }

    #[test]
    fn snf_identity() {
        let a = IntMatrix::identity(2);
        let f = smith_normal_form(&a);
        assert_eq!(f.s, a);
        assert_eq!(f.u, a);
        assert_eq!(f.v, a);
    }

    #[test]
    fn snf_two_by_two() {
        // gcd of entries 2, det = -8 -> d1 = 2, d1 d2 = 8
        let a = m(2, 2, &[2, 4, 6, 8]);
        let f = smith_normal_form(&a);
        assert_eq!(f.diagonal(), ints(&[2, 4]));
        assert_eq!(f.u.mul(&a).mul(&f.v), f.s);
        assert_eq!(f.u.det().abs(), Int::one());
        assert_eq!(f.v.det().abs(), Int::one());
    }

    #[test]
    fn snf_zero_and_rectangular() {
        let z = IntMatrix::zeros(2, 3);
        assert_eq!(smith_normal_form(&z).s, z);
        let a = m(2, 3, &[0, 3, 6, 0, 9, 3]);
        let f = smith_normal_form(&a);
        assert_eq!(f.u.mul(&a).mul(&f.v), f.s);
        assert_eq!(f.diagonal(), ints(&[3, 15]));
    }

    #[test]
    fn v_inverse_is_tracked() {
        let a = m(3, 3, &[2, -3, 5, 7, 1, 0, 4, 4, -2]);
        let SmithFull { form, v_inv } = smith_full(&a);
        assert_eq!(form.v.mul(&v_inv), IntMatrix::identity(3));
    }

    #[test]
    fn invariant_factor_examples() {
        assert_eq!(FGAbGroup::cyclic(4).invariant_factors(), ints(&[4]));
        assert_eq!(FGAbGroup::from_orders(&[2, 2]).invariant_factors(), ints(&[2, 2]));
        let g = FGAbGroup::from_relation_rows(2, &[vec![2, 4], vec![6, 8]]).unwrap();
        assert_eq!(g.invariant_factors(), ints(&[2, 4]));
        assert_eq!(FGAbGroup::from_orders(&[0, 2]).invariant_factors(), ints(&[2, 0]));
        assert_eq!(FGAbGroup::trivial().to_string(), "1");
        assert_eq!(FGAbGroup::from_orders(&[4, 2, 0]).to_string(), "Z/2 + Z/4 + Z");
    }

    #[test]
    fn quotient_examples() {
        let z8 = FGAbGroup::cyclic(8);
        let h = z8.subgroup_generated(&[ints(&[2])]).unwrap();
        assert_eq!(z8.quotient(&h).unwrap().invariant_factors(), ints(&[2]));

        let z2 = FGAbGroup::free(2);
        let h = z2.subgroup_generated(&[ints(&[2, 0]), ints(&[0, 3])]).unwrap();
        assert_eq!(z2.quotient(&h).unwrap().invariant_factors(), ints(&[6]));

        let g = FGAbGroup::from_orders(&[4, 6]);
        assert!(g.quotient(&g.whole()).unwrap().is_trivial());
    }

    #[test]
    fn subgroup_examples() {
        let z12 = FGAbGroup::cyclic(12);
        assert_eq!(z12.subgroup_generated(&[]).unwrap().order().unwrap(), Int::one());
        assert_eq!(
            z12.subgroup_generated(&[ints(&[3])]).unwrap().order().unwrap(),
            Int::from(4)
        );
        let g = FGAbGroup::from_orders(&[4, 4]);
        let h = g.subgroup_generated(&[ints(&[1, 1]), ints(&[0, 2])]).unwrap();
        assert_eq!(h.order().unwrap(), Int::from(8));
        assert!(g.subgroup_generated(&[ints(&[1])]).is_err());
    }

    #[test]
    fn hom_examples() {
        let z8 = FGAbGroup::cyclic(8);
        let f = GroupHom::scalar(&z8, 2);
        let k = f.kernel();
        assert!(k.same_as(&z8.subgroup_generated(&[ints(&[4])]).unwrap()));
        assert!(f.image().same_as(&z8.subgroup_generated(&[ints(&[2])]).unwrap()));

        let zero = GroupHom::zero(&z8, &z8);
        assert!(zero.kernel().same_as(&z8.whole()));

        let g = FGAbGroup::from_orders(&[4, 4]);
        let z4 = FGAbGroup::cyclic(4);
        let sum = GroupHom::new(g.clone(), z4.clone(), m(2, 1, &[1, 1])).unwrap();
        let pre = sum.preimage(&z4.subgroup_generated(&[ints(&[2])]).unwrap()).unwrap();
        assert_eq!(pre.order().unwrap(), Int::from(8));
    }

    #[test]
    fn hom_validation_rejects_bad_matrix() {
        let z4 = FGAbGroup::cyclic(4);
        let z3 = FGAbGroup::cyclic(3);
        assert_eq!(
            GroupHom::new(z4, z3, m(1, 1, &[1])).unwrap_err(),
            FgabError::NotAHomomorphism(0)
        );
    }

    #[test]
    fn exponent_and_order() {
        let g = FGAbGroup::from_orders(&[2, 4]);
        assert_eq!(g.exponent(), Int::from(4));
        assert_eq!(g.order().unwrap(), Int::from(8));
        assert_eq!(FGAbGroup::trivial().exponent(), Int::one());
        let inf = FGAbGroup::from_orders(&[0, 2]);
        assert_eq!(inf.order().unwrap_err(), FgabError::InfiniteGroup(1));
        assert!(inf.enumerate().is_err());
        assert_eq!(inf.element_order(&ints(&[1, 0])), Int::zero());
        assert_eq!(inf.element_order(&ints(&[0, 1])), Int::from(2));
    }

    #[test]
    fn enumerate_counts_and_distinct() {
        let g = FGAbGroup::from_relation_rows(3, &[vec![2, 4, 0], vec![6, 8, 0], vec![0, 0, 3]]).unwrap();
        let elems: Vec<_> = g.enumerate().unwrap().collect();
        assert_eq!(Int::from(elems.len()), g.order().unwrap());
        for (i, x) in elems.iter().enumerate() {
            for y in &elems[i + 1..] {
                assert!(!g.elem_eq(x, y));
            }
        }
    }

    #[test]
    fn solve_membership_and_intersection() {
        let g = FGAbGroup::cyclic(12);
        let h = g.subgroup_generated(&[ints(&[8])]).unwrap();
        let c = h.solve_membership(&ints(&[4])).unwrap();
        assert!(g.elem_eq(&g.scale(&c[0], &ints(&[8])), &ints(&[4])));
        assert!(h.solve_membership(&ints(&[2])).is_none());
        let a = g.subgroup_generated(&[ints(&[2])]).unwrap();
        let b = g.subgroup_generated(&[ints(&[3])]).unwrap();
        let i = a.intersection(&b).unwrap();
        assert!(i.same_as(&g.subgroup_generated(&[ints(&[6])]).unwrap()));
    }

    #[test]
    fn subquotient_and_as_group() {
        let g = FGAbGroup::cyclic(16);
        let num = g.subgroup_generated(&[ints(&[2])]).unwrap();
        let den = g.subgroup_generated(&[ints(&[4])]).unwrap();
        assert_eq!(subquotient(&num, &den).unwrap().invariant_factors(), ints(&[2]));
        assert_eq!(num.as_group().invariant_factors(), ints(&[8]));
        assert_eq!(subquotient(&den, &num).unwrap_err(), FgabError::NotASubgroup);
    }

    #[test]
    fn lembe_small_cases() {
        let u = FGAbGroup::from_orders(&[8]);
        let a = FGAbGroup::cyclic(2);
        let w0 = u.subgroup_generated(&[ints(&[4])]).unwrap();
        let w1 = u.subgroup_generated(&[ints(&[2])]).unwrap();
        let fam = |x: &[Int]| if x[0].is_zero() { w0.clone() } else { w1.clone() };
        let p = lembe_product(&u, &a, &fam, &[ints(&[1])], true).unwrap();
        assert!(p.same_as(&w0.join(&w1).unwrap()));

        let same = |_: &[Int]| w1.clone();
        let a4 = FGAbGroup::cyclic(4);
        let p = lembe_product(&u, &a4, &same, &[ints(&[1])], true).unwrap();
        assert!(p.same_as(&w1));
    }

    #[test]
    fn lembe_detects_violation() {
        let u = FGAbGroup::cyclic(8);
        let a = FGAbGroup::cyclic(4);
        let big = u.whole();
        let small = u.trivial_subgroup();
        // W_2 large, everything else trivial: a=2, b=0 gives W_2 <= W_0 W_(-2) = 1.
        let fam = |x: &[Int]| {
            if x[0] == Int::from(2) {
                big.clone()
            } else {
                small.clone()
            }
        };
        assert!(matches!(
            lembe_product(&u, &a, &fam, &[ints(&[1])], true),
            Err(FgabError::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn hom_solve() {
        let z8 = FGAbGroup::cyclic(8);
        let f = GroupHom::scalar(&z8, 3);
        let x = f.solve(&ints(&[1])).unwrap();
        assert!(z8.elem_eq(&f.apply(&x), &ints(&[1])));
        let g = GroupHom::scalar(&z8, 2);
        assert!(g.solve(&ints(&[1])).is_none());
    }
}
