//! Finitely presented abelian groups with exact integer arithmetic.
//!
//! Everything in this module works over `num_bigint::BigInt`, so nothing
//! ever overflows or rounds. The centrepiece is [`smith_normal_form`]: it
//! brings an integer matrix `M` to a diagonal matrix `D = U * M * V` with
//! unimodular `U` and `V` and a divisibility chain `d_1 | d_2 | ...` down
//! the diagonal. On top of it sit
//!
//! * [`IntMatrix`] — a dense row-major matrix of big integers with exact
//!   solvers (determinant, integer linear systems, integer inverse, left
//!   kernel lattice);
//! * [`K0Element`] — a formal integer combination of named generators;
//! * [`FpGroup`] — an abelian group presented by named generators and a
//!   relation lattice, with canonical invariants and an exact membership
//!   test for the relation lattice;
//! * [`GroupHom`] — a homomorphism given by generator images, checked for
//!   well-definedness, with exact injectivity/surjectivity/isomorphism
//!   tests.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Errors arising from group presentations and homomorphisms.
#[derive(Debug, thiserror::Error)]
pub enum AbelianError {
    /// Two objects that must agree in shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A label was used that the group does not know about.
    #[error("unknown generator label `{0}`")]
    UnknownLabel(String),
    /// The same label appears twice in a generator list.
    #[error("duplicate generator label `{0}`")]
    DuplicateLabel(String),
    /// Generator images do not kill a defining relation of the source.
    #[error("map is not well defined: image of relation #{relation} is not in the target relation lattice")]
    NotWellDefined {
        /// Index of the offending relation row in the source presentation.
        relation: usize,
    },
    /// A homomorphism was composed with one whose source does not match.
    #[error("cannot compose: middle groups differ ({0})")]
    CompositionMismatch(String),
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// A dense matrix of arbitrary-precision integers, stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    /// The `rows x cols` zero matrix.
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    /// The `n x n` identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from machine-integer rows.
    ///
    /// Panics if the rows are ragged; this constructor is meant for
    /// literals in code and tests.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|row| row.len() == c),
            "ragged rows in matrix literal"
        );
        let mut m = IntMatrix::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                m[(i, j)] = BigInt::from(*entry);
            }
        }
        m
    }

    /// Builds a matrix entry by entry from a closure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut m = IntMatrix::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// A single row as a slice.
    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// True if every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// The transposed matrix.
    pub fn transpose(&self) -> IntMatrix {
        IntMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Matrix product `self * rhs`.
    ///
    /// Panics on a dimension mismatch; shapes are invariants of the calling
    /// code, not runtime data.
    pub fn matmul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        IntMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = BigInt::zero();
            for k in 0..self.cols {
                acc += &self[(i, k)] * &rhs[(k, j)];
            }
            acc
        })
    }

    /// Stacks `top` on `bottom` (same column count).
    pub fn stack(top: &IntMatrix, bottom: &IntMatrix) -> IntMatrix {
        assert_eq!(top.cols, bottom.cols, "stack: column counts differ");
        let mut m = IntMatrix::zero(top.rows + bottom.rows, top.cols);
        for i in 0..top.rows {
            for j in 0..top.cols {
                m[(i, j)] = top[(i, j)].clone();
            }
        }
        for i in 0..bottom.rows {
            for j in 0..bottom.cols {
                m[(top.rows + i, j)] = bottom[(i, j)].clone();
            }
        }
        m
    }

    /// Determinant by fraction-free (Bareiss) elimination. Exact.
    ///
    /// Panics if the matrix is not square.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign_flip = false;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, p);
                sign_flip = !sign_flip;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = num / &prev; // exact division, Bareiss invariant
                }
                a[(i, k)] = BigInt::zero();
            }
            prev = a[(k, k)].clone();
        }
        let det = a[(n - 1, n - 1)].clone();
        if sign_flip {
            -det
        } else {
            det
        }
    }

    /// One integer solution `x` of `self * x = rhs`, if any exists.
    ///
    /// Uses the Smith normal form, so solvability is decided exactly. When
    /// the kernel is nontrivial an arbitrary solution is returned. Callers
    /// solving many systems against the same matrix should factor once and
    /// use [`SmithDecomposition::solve`].
    pub fn solve(&self, rhs: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(self.rows, rhs.len(), "solve: rhs length mismatch");
        smith_normal_form(self).solve(rhs)
    }

    /// The inverse matrix when `self` is invertible over the integers
    /// (determinant `±1`), `None` otherwise.
    pub fn inverse(&self) -> Option<IntMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let snf = smith_normal_form(self);
        if snf.rank != self.rows || snf.invariant_factors.iter().any(|d| !d.is_one()) {
            return None;
        }
        // U * self * V = I  =>  self^-1 = V * U.
        Some(snf.v.matmul(&snf.u))
    }

    /// A basis of the left kernel lattice `{ x : x * self = 0 }`, one basis
    /// vector per row. The row count is `rows() - rank`.
    pub fn left_kernel(&self) -> IntMatrix {
        let snf = smith_normal_form(self);
        // Rows of U beyond the rank map onto zero rows of D = U*self*V, and
        // V is invertible, so they span the left kernel; unimodularity of U
        // makes them a lattice basis.
        let extra = self.rows - snf.rank;
        IntMatrix::from_fn(extra, self.rows, |i, j| snf.u[(snf.rank + i, j)].clone())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[dst] += k * row[src]`.
    fn add_scaled_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let t = &self[(src, j)] * k;
            self[(dst, j)] += t;
        }
    }

    /// `col[dst] += k * col[src]`.
    fn add_scaled_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let t = &self[(i, src)] * k;
            self[(i, dst)] += t;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -self[(r, j)].clone();
            self[(r, j)] = v;
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Row vector times matrix: `v * m`.
pub fn row_times_matrix(v: &[BigInt], m: &IntMatrix) -> Vec<BigInt> {
    assert_eq!(v.len(), m.rows(), "row_times_matrix: length mismatch");
    (0..m.cols())
        .map(|j| {
            let mut acc = BigInt::zero();
            for (i, vi) in v.iter().enumerate() {
                acc += vi * &m[(i, j)];
            }
            acc
        })
        .collect()
}

/// Matrix times column vector: `m * v`.
pub fn matrix_times_col(m: &IntMatrix, v: &[BigInt]) -> Vec<BigInt> {
    assert_eq!(v.len(), m.cols(), "matrix_times_col: length mismatch");
    (0..m.rows())
        .map(|i| {
            let mut acc = BigInt::zero();
            for (j, vj) in v.iter().enumerate() {
                acc += &m[(i, j)] * vj;
            }
            acc
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Smith normal form
// ---------------------------------------------------------------------------

/// The result of [`smith_normal_form`]: `u * m * v = d` with `u`, `v`
/// unimodular and `d` diagonal, nonnegative, and with each diagonal entry
/// dividing the next.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    /// Left transformation, `rows x rows`, determinant `±1`.
    pub u: IntMatrix,
    /// The diagonal form, same shape as the input.
    pub d: IntMatrix,
    /// Right transformation, `cols x cols`, determinant `±1`.
    pub v: IntMatrix,
    /// Number of nonzero diagonal entries.
    pub rank: usize,
    /// The nonzero diagonal entries `d_1 | d_2 | ...`, all positive.
    pub invariant_factors: Vec<BigInt>,
}

impl SmithDecomposition {
    /// One integer solution `x` of `m * x = rhs` for the matrix `m` this
    /// decomposition was computed from, if any exists.
    ///
    /// Writing `u * m * v = d`, the system becomes `d * y = u * rhs` with
    /// `x = v * y`, which is solved entry by entry on the diagonal.
    pub fn solve(&self, rhs: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(self.u.cols(), rhs.len(), "solve: rhs length mismatch");
        let c = matrix_times_col(&self.u, rhs);
        let mut y = vec![BigInt::zero(); self.v.rows()];
        for (i, ci) in c.iter().enumerate() {
            if i < self.rank {
                let d = &self.d[(i, i)];
                let (q, r) = ci.div_rem(d);
                if !r.is_zero() {
                    return None;
                }
                y[i] = q;
            } else if !ci.is_zero() {
                return None;
            }
        }
        Some(matrix_times_col(&self.v, &y))
    }
}

/// Computes the Smith normal form of `m` together with the unimodular
/// transformations realizing it.
///
/// The algorithm is the classical pivot reduction: pick the remaining entry
/// of least absolute value, clear its row and column by division with
/// remainder (a nonzero remainder becomes the new, strictly smaller pivot),
/// and fold any entry of the remaining block that the pivot fails to divide
/// into the pivot row. Every elementary step is mirrored on `u` or `v`, so
/// `u * m * v = d` holds exactly on return.
pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let rows = m.rows();
    let cols = m.cols();
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    let limit = rows.min(cols);
    let mut t = 0;
    while t < limit {
        // Move the entry of least absolute value in d[t.., t..] to (t, t).
        let Some((pi, pj)) = find_pivot(&d, t) else {
            break; // remaining block is zero
        };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        'reduce: loop {
            // Clear the pivot column. A nonzero remainder is strictly
            // smaller than the pivot; promote it and start over.
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -(&d[(i, t)] / &d[(t, t)]);
                d.add_scaled_row(i, t, &q);
                u.add_scaled_row(i, t, &q);
                if !d[(i, t)].is_zero() {
                    d.swap_rows(i, t);
                    u.swap_rows(i, t);
                    continue 'reduce;
                }
            }
            // Same for the pivot row.
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -(&d[(t, j)] / &d[(t, t)]);
                d.add_scaled_col(j, t, &q);
                v.add_scaled_col(j, t, &q);
                if !d[(t, j)].is_zero() {
                    d.swap_cols(j, t);
                    v.swap_cols(j, t);
                    continue 'reduce;
                }
            }
            // Row and column are clear. Enforce the divisibility chain: the
            // pivot must divide the whole remaining block before we move on.
            for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(&d[(i, j)] % &d[(t, t)]).is_zero() {
                        let one = BigInt::one();
                        d.add_scaled_row(t, i, &one);
                        u.add_scaled_row(t, i, &one);
                        continue 'reduce;
                    }
                }
            }
            break;
        }

        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }

    let rank = t;
    let invariant_factors = (0..rank).map(|i| d[(i, i)].clone()).collect();
    SmithDecomposition {
        u,
        d,
        v,
        rank,
        invariant_factors,
    }
}

/// Position of a nonzero entry of least absolute value in `d[t.., t..]`.
fn find_pivot(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            if d[(i, j)].is_zero() {
                continue;
            }
            match best {
                None => best = Some((i, j)),
                Some((bi, bj)) => {
                    if d[(i, j)].abs() < d[(bi, bj)].abs() {
                        best = Some((i, j));
                    }
                }
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Formal integer combinations of named generators
// ---------------------------------------------------------------------------

/// A formal integer linear combination of named generators, e.g. an element
/// of a Grothendieck group written in a fixed basis of classes.
///
/// Terms with coefficient zero are never stored, so structural equality is
/// mathematical equality. The ordering is lexicographic on the stored terms
/// and exists to allow elements in ordered collections.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default, Debug)]
pub struct K0Element {
    terms: BTreeMap<String, BigInt>,
}

impl K0Element {
    /// The zero element.
    pub fn zero() -> Self {
        K0Element::default()
    }

    /// The generator `label` with coefficient one.
    pub fn generator(label: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(label.to_owned(), BigInt::one());
        K0Element { terms }
    }

    /// Builds an element from (label, coefficient) pairs, summing repeats.
    pub fn from_terms<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, BigInt)>,
        S: Into<String>,
    {
        let mut e = K0Element::zero();
        for (label, coeff) in pairs {
            e.add_term(&label.into(), &coeff);
        }
        e
    }

    /// True when there are no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of `label` (zero when absent).
    pub fn coefficient(&self, label: &str) -> BigInt {
        self.terms.get(label).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Iterates over the nonzero terms in label order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &BigInt)> {
        self.terms.iter().map(|(l, c)| (l.as_str(), c))
    }

    /// Adds `coeff * label` in place.
    pub fn add_term(&mut self, label: &str, coeff: &BigInt) {
        if coeff.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(label.to_owned())
            .or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(label);
        }
    }

    /// The element multiplied by an integer scalar.
    pub fn scaled(&self, k: &BigInt) -> K0Element {
        if k.is_zero() {
            return K0Element::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(l, c)| (l.clone(), c * k))
            .collect();
        K0Element { terms }
    }

    /// Writes the element as a coefficient vector over `labels`.
    ///
    /// Fails if the element mentions a label outside the list.
    pub fn to_vector(&self, labels: &[String]) -> Result<Vec<BigInt>, AbelianError> {
        let mut v = vec![BigInt::zero(); labels.len()];
        let index: BTreeMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        for (label, coeff) in &self.terms {
            match index.get(label.as_str()) {
                Some(&i) => v[i] = coeff.clone(),
                None => return Err(AbelianError::UnknownLabel(label.clone())),
            }
        }
        Ok(v)
    }

    /// Reads a coefficient vector over `labels` back into an element.
    pub fn from_vector(labels: &[String], v: &[BigInt]) -> K0Element {
        assert_eq!(labels.len(), v.len(), "from_vector: length mismatch");
        K0Element::from_terms(
            labels
                .iter()
                .zip(v.iter())
                .map(|(l, c)| (l.clone(), c.clone())),
        )
    }
}

impl Add for &K0Element {
    type Output = K0Element;
    fn add(self, rhs: &K0Element) -> K0Element {
        let mut out = self.clone();
        for (label, coeff) in &rhs.terms {
            out.add_term(label, coeff);
        }
        out
    }
}

impl Sub for &K0Element {
    type Output = K0Element;
    fn sub(self, rhs: &K0Element) -> K0Element {
        let mut out = self.clone();
        for (label, coeff) in &rhs.terms {
            out.add_term(label, &-coeff.clone());
        }
        out
    }
}

impl Neg for &K0Element {
    type Output = K0Element;
    fn neg(self) -> K0Element {
        self.scaled(&BigInt::from(-1))
    }
}

impl fmt::Display for K0Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (pos, (label, coeff)) in self.terms.iter().enumerate() {
            let negative = coeff.is_negative();
            let mag = coeff.abs();
            if pos == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if !mag.is_one() {
                write!(f, "{mag}")?;
            }
            write!(f, "[{label}]")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Finitely presented abelian groups
// ---------------------------------------------------------------------------

/// The isomorphism invariants of a finitely generated abelian group:
/// torsion factors (each dividing the next, all `> 1`) and free rank.
///
/// Two groups are isomorphic exactly when their invariants are equal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupInvariants {
    /// Invariant factors `> 1`, in the divisibility order.
    pub torsion: Vec<BigInt>,
    /// Rank of the free part.
    pub free_rank: usize,
}

impl GroupInvariants {
    /// True for the zero group.
    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }
}

impl fmt::Display for GroupInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut first = true;
        match self.free_rank {
            0 => {}
            1 => {
                write!(f, "Z")?;
                first = false;
            }
            r => {
                write!(f, "Z^{r}")?;
                first = false;
            }
        }
        for d in &self.torsion {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "Z/{d}")?;
            first = false;
        }
        Ok(())
    }
}

/// An abelian group presented by named generators and integer relations.
///
/// The presentation is `Z^labels / rowspan(relations)`. The Smith normal
/// form of the relation matrix is computed once at construction and reused
/// by [`FpGroup::member`] and the invariant accessors.
#[derive(Clone, Debug)]
pub struct FpGroup {
    labels: Vec<String>,
    relations: IntMatrix,
    snf: SmithDecomposition,
    invariants: GroupInvariants,
}

impl PartialEq for FpGroup {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.relations == other.relations
    }
}
impl Eq for FpGroup {}

impl FpGroup {
    /// Presents the group `Z^labels / rowspan(relations)`.
    ///
    /// `relations` must have one column per label; labels must be distinct.
    pub fn new(labels: Vec<String>, relations: IntMatrix) -> Result<Self, AbelianError> {
        let mut seen = BTreeMap::new();
        for label in &labels {
            if seen.insert(label.clone(), ()).is_some() {
                return Err(AbelianError::DuplicateLabel(label.clone()));
            }
        }
        if relations.cols() != labels.len() {
            return Err(AbelianError::DimensionMismatch(format!(
                "{} relation columns for {} generators",
                relations.cols(),
                labels.len()
            )));
        }
        let snf = smith_normal_form(&relations);
        let torsion = snf
            .invariant_factors
            .iter()
            .filter(|d| !d.is_one())
            .cloned()
            .collect::<Vec<_>>();
        let invariants = GroupInvariants {
            torsion,
            free_rank: labels.len() - snf.rank,
        };
        Ok(FpGroup {
            labels,
            relations,
            snf,
            invariants,
        })
    }

    /// Presents a free abelian group on the given labels.
    pub fn free(labels: Vec<String>) -> Result<Self, AbelianError> {
        let n = labels.len();
        FpGroup::new(labels, IntMatrix::zero(0, n))
    }

    /// Presents a group whose relations are given as formal combinations of
    /// the generators.
    pub fn with_relation_elements(
        labels: Vec<String>,
        relations: &[K0Element],
    ) -> Result<Self, AbelianError> {
        let mut m = IntMatrix::zero(relations.len(), labels.len());
        for (i, rel) in relations.iter().enumerate() {
            let v = rel.to_vector(&labels)?;
            for (j, entry) in v.into_iter().enumerate() {
                m[(i, j)] = entry;
            }
        }
        FpGroup::new(labels, m)
    }

    /// The generator labels, in presentation order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The relation matrix (rows are relations).
    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    /// The canonical isomorphism invariants.
    pub fn invariants(&self) -> &GroupInvariants {
        &self.invariants
    }

    /// Invariant factors `> 1` in divisibility order.
    pub fn torsion(&self) -> &[BigInt] {
        &self.invariants.torsion
    }

    /// Rank of the free part.
    pub fn free_rank(&self) -> usize {
        self.invariants.free_rank
    }

    /// True for the zero group.
    pub fn is_trivial(&self) -> bool {
        self.invariants.is_trivial()
    }

    /// True when `self` and `other` are abstractly isomorphic (their
    /// canonical invariants agree).
    pub fn is_isomorphic_to(&self, other: &FpGroup) -> bool {
        self.invariants == other.invariants
    }

    /// Exact membership test for the relation lattice: does `element`,
    /// read as a vector over the generators, lie in the row span of the
    /// relation matrix? Equivalently: is it zero in the group?
    pub fn member(&self, element: &K0Element) -> Result<bool, AbelianError> {
        let v = element.to_vector(&self.labels)?;
        Ok(self.member_vec(&v))
    }

    /// True when two coordinate expressions name the same group element,
    /// i.e. their difference lies in the relation lattice.
    pub fn elements_equal(&self, a: &K0Element, b: &K0Element) -> Result<bool, AbelianError> {
        self.member(&(a - b))
    }

    /// Vector form of [`FpGroup::member`].
    pub fn member_vec(&self, v: &[BigInt]) -> bool {
        assert_eq!(v.len(), self.labels.len(), "member_vec: length mismatch");
        // v in rowspan(R) iff w = v * V lands in rowspan(U R V) = rowspan(D).
        let w = row_times_matrix(v, &self.snf.v);
        for (i, wi) in w.iter().enumerate() {
            if i < self.snf.rank {
                if !(wi % &self.snf.d[(i, i)]).is_zero() {
                    return false;
                }
            } else if !wi.is_zero() {
                return false;
            }
        }
        true
    }

    /// The quotient by additional relations (same generators).
    pub fn quotient(&self, extra: &[K0Element]) -> Result<FpGroup, AbelianError> {
        let mut m = IntMatrix::zero(extra.len(), self.labels.len());
        for (i, rel) in extra.iter().enumerate() {
            let v = rel.to_vector(&self.labels)?;
            for (j, entry) in v.into_iter().enumerate() {
                m[(i, j)] = entry;
            }
        }
        FpGroup::new(
            self.labels.clone(),
            IntMatrix::stack(&self.relations, &m),
        )
    }
}

// ---------------------------------------------------------------------------
// Homomorphisms
// ---------------------------------------------------------------------------

/// A homomorphism of finitely presented abelian groups, stored as the
/// matrix of generator images (row `i` is the image of source generator
/// `i` in target coordinates).
///
/// Construction through [`GroupHom::induced`] verifies well-definedness:
/// every source relation must map into the target's relation lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupHom {
    source: FpGroup,
    target: FpGroup,
    matrix: IntMatrix,
}

impl GroupHom {
    /// Builds the homomorphism sending each source generator to the given
    /// image, after checking that the assignment kills every source
    /// relation in the target.
    pub fn induced(
        source: &FpGroup,
        target: &FpGroup,
        images: &BTreeMap<String, K0Element>,
    ) -> Result<GroupHom, AbelianError> {
        let mut matrix = IntMatrix::zero(source.labels().len(), target.labels().len());
        for (i, label) in source.labels().iter().enumerate() {
            let image = images
                .get(label)
                .ok_or_else(|| AbelianError::UnknownLabel(label.clone()))?;
            let v = image.to_vector(target.labels())?;
            for (j, entry) in v.into_iter().enumerate() {
                matrix[(i, j)] = entry;
            }
        }
        let hom = GroupHom {
            source: source.clone(),
            target: target.clone(),
            matrix,
        };
        for r in 0..source.relations().rows() {
            let image = row_times_matrix(source.relations().row(r), &hom.matrix);
            if !target.member_vec(&image) {
                return Err(AbelianError::NotWellDefined { relation: r });
            }
        }
        Ok(hom)
    }

    /// The identity map of `group`.
    pub fn identity(group: &FpGroup) -> GroupHom {
        GroupHom {
            source: group.clone(),
            target: group.clone(),
            matrix: IntMatrix::identity(group.labels().len()),
        }
    }

    /// Source group.
    pub fn source(&self) -> &FpGroup {
        &self.source
    }

    /// Target group.
    pub fn target(&self) -> &FpGroup {
        &self.target
    }

    /// The matrix of generator images (rows = source generators).
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// Applies the map to an element written over the source generators.
    pub fn apply(&self, element: &K0Element) -> Result<K0Element, AbelianError> {
        let v = element.to_vector(self.source.labels())?;
        let w = row_times_matrix(&v, &self.matrix);
        Ok(K0Element::from_vector(self.target.labels(), &w))
    }

    /// The composite `then ∘ self` (apply `self` first).
    pub fn then(&self, then: &GroupHom) -> Result<GroupHom, AbelianError> {
        if self.target != then.source {
            return Err(AbelianError::CompositionMismatch(
                "target presentation differs from next source".into(),
            ));
        }
        Ok(GroupHom {
            source: self.source.clone(),
            target: then.target.clone(),
            matrix: self.matrix.matmul(&then.matrix),
        })
    }

    /// True when the two maps agree as homomorphisms: same source and
    /// target presentations, and each generator's two images differ by a
    /// target relation. This is weaker than matrix equality, which would
    /// compare coordinate representatives.
    pub fn equal_to(&self, other: &GroupHom) -> bool {
        if self.source != other.source || self.target != other.target {
            return false;
        }
        (0..self.matrix.rows()).all(|r| {
            let diff: Vec<BigInt> = self
                .matrix
                .row(r)
                .iter()
                .zip(other.matrix.row(r))
                .map(|(a, b)| a - b)
                .collect();
            self.target.member_vec(&diff)
        })
    }

    /// True when the map is surjective: the images together with the target
    /// relations must span the full target lattice.
    pub fn is_surjective(&self) -> bool {
        let stacked = IntMatrix::stack(&self.matrix, self.target.relations());
        let snf = smith_normal_form(&stacked);
        snf.rank == self.target.labels().len()
            && snf.invariant_factors.iter().all(One::is_one)
    }

    /// True when the map is injective: whenever `x * M` lies in the target
    /// relation lattice, `x` must lie in the source relation lattice.
    pub fn is_injective(&self) -> bool {
        // Solutions (x, y) of x*M + y*R_t = 0 form the left kernel lattice
        // of the stacked matrix; injectivity says every such x is a source
        // relation.
        let stacked = IntMatrix::stack(&self.matrix, self.target.relations());
        let kernel = stacked.left_kernel();
        let m = self.source.labels().len();
        for r in 0..kernel.rows() {
            let x: Vec<BigInt> = kernel.row(r)[..m].to_vec();
            if !self.source.member_vec(&x) {
                return false;
            }
        }
        true
    }

    /// True when the map is an isomorphism (injective and surjective).
    pub fn is_isomorphism(&self) -> bool {
        self.is_surjective() && self.is_injective()
    }

    /// True when source and target coincide and the map is the identity on
    /// the group (each generator moves by an element of the relation
    /// lattice at most).
    pub fn is_identity(&self) -> bool {
        if self.source != self.target {
            return false;
        }
        let n = self.source.labels().len();
        for i in 0..n {
            let mut diff: Vec<BigInt> = self.matrix.row(i).to_vec();
            diff[i] -= BigInt::one();
            if !self.source.member_vec(&diff) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    // -- independent oracles --------------------------------------------

    /// Determinant by cofactor expansion; independent of Bareiss.
    fn det_cofactor(m: &IntMatrix) -> BigInt {
        let n = m.rows();
        assert_eq!(n, m.cols());
        if n == 0 {
            return BigInt::one();
        }
        if n == 1 {
            return m[(0, 0)].clone();
        }
        let mut acc = BigInt::zero();
        for j in 0..n {
            if m[(0, j)].is_zero() {
                continue;
            }
            let minor = IntMatrix::from_fn(n - 1, n - 1, |r, c| {
                let cc = if c < j { c } else { c + 1 };
                m[(r + 1, cc)].clone()
            });
            let term = &m[(0, j)] * det_cofactor(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    /// gcd of all k x k minors (zero when all vanish).
    fn minor_gcd(m: &IntMatrix, k: usize) -> BigInt {
        use itertools::Itertools;
        let mut g = BigInt::zero();
        for rows in (0..m.rows()).combinations(k) {
            for cols in (0..m.cols()).combinations(k) {
                let sub =
                    IntMatrix::from_fn(k, k, |r, c| m[(rows[r], cols[c])].clone());
                g = g.gcd(&det_cofactor(&sub));
            }
        }
        g
    }

    /// Invariant factors straight from determinantal divisors:
    /// `d_k = gcd(k-minors) / gcd((k-1)-minors)`.
    fn invariant_factors_via_minors(m: &IntMatrix) -> Vec<BigInt> {
        let mut out = Vec::new();
        let mut prev = BigInt::one();
        for k in 1..=m.rows().min(m.cols()) {
            let g = minor_gcd(m, k);
            if g.is_zero() {
                break;
            }
            out.push(&g / &prev);
            prev = g;
        }
        out
    }

    fn assert_snf_postconditions(m: &IntMatrix) {
        let snf = smith_normal_form(m);
        // Reconstruction.
        let prod = snf.u.matmul(m).matmul(&snf.v);
        assert_eq!(prod, snf.d, "u*m*v != d");
        // Diagonal, nonnegative, divisibility chain.
        for i in 0..snf.d.rows() {
            for j in 0..snf.d.cols() {
                if i != j {
                    assert!(snf.d[(i, j)].is_zero(), "off-diagonal entry");
                }
            }
        }
        for (i, f) in snf.invariant_factors.iter().enumerate() {
            assert!(f.is_positive(), "nonpositive invariant factor");
            assert_eq!(*f, snf.d[(i, i)]);
            if i > 0 {
                assert!(
                    (f % &snf.invariant_factors[i - 1]).is_zero(),
                    "divisibility chain broken"
                );
            }
        }
        for i in snf.rank..snf.d.rows().min(snf.d.cols()) {
            assert!(snf.d[(i, i)].is_zero());
        }
        // Unimodular transformations.
        assert!(snf.u.determinant().abs().is_one(), "u not unimodular");
        assert!(snf.v.determinant().abs().is_one(), "v not unimodular");
        // Invariant factors against the determinantal-divisor oracle.
        assert_eq!(
            snf.invariant_factors,
            invariant_factors_via_minors(m),
            "invariant factors disagree with minor-gcd oracle"
        );
    }

    // -- Smith normal form ------------------------------------------------

    #[test]
    fn snf_worked_example() {
        let m = IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.invariant_factors, vec![big(2), big(4)]);
        assert_snf_postconditions(&m);
    }

    #[test]
    fn snf_edge_cases() {
        assert_snf_postconditions(&IntMatrix::zero(3, 2));
        assert_snf_postconditions(&IntMatrix::identity(4));
        assert_snf_postconditions(&IntMatrix::zero(0, 5));
        assert_snf_postconditions(&IntMatrix::zero(5, 0));
        assert_snf_postconditions(&IntMatrix::from_rows(&[vec![6, 10, 15]]));
        assert_snf_postconditions(&IntMatrix::from_rows(&[
            vec![-3, 0, 0],
            vec![0, 5, 0],
            vec![0, 0, -2],
        ]));
    }

    #[test]
    fn snf_known_invariants() {
        // diag(6,10,15) has invariant factors 1, 30, 30... check via oracle
        // rather than guessing: the oracle is part of the postconditions.
        let m = IntMatrix::from_rows(&[vec![6, 0, 0], vec![0, 10, 0], vec![0, 0, 15]]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.invariant_factors, vec![big(1), big(30), big(30)]);
        assert_snf_postconditions(&m);
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let samples = [
            IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]]),
            IntMatrix::from_rows(&[vec![0, 1, 2], vec![3, 0, 4], vec![5, 6, 0]]),
            IntMatrix::from_rows(&[
                vec![1, 2, 3, 4],
                vec![0, -1, 2, 0],
                vec![7, 0, 0, 1],
                vec![2, 2, 2, 2],
            ]),
            IntMatrix::identity(5),
        ];
        for m in &samples {
            assert_eq!(m.determinant(), det_cofactor(m));
        }
    }

    #[test]
    fn solve_and_inverse() {
        let h = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]);
        let inv = h.inverse().expect("unimodular");
        assert_eq!(h.matmul(&inv), IntMatrix::identity(2));
        assert_eq!(inv.matmul(&h), IntMatrix::identity(2));

        // 2x2 non-unimodular but solvable system.
        let m = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        assert!(m.inverse().is_none());
        let x = m.solve(&[big(4), big(-9)]).expect("solvable");
        assert_eq!(matrix_times_col(&m, &x), vec![big(4), big(-9)]);
        assert!(m.solve(&[big(1), big(0)]).is_none(), "2 does not divide 1");
    }

    #[test]
    fn left_kernel_basis() {
        // Rows (1,2,3) and (2,4,6) are dependent: kernel rank 1.
        let m = IntMatrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6]]);
        let k = m.left_kernel();
        assert_eq!(k.rows(), 1);
        let prod = k.matmul(&m);
        assert!(prod.is_zero());
    }

    // -- membership -------------------------------------------------------

    #[test]
    fn member_diagonal_lattice() {
        let g = FpGroup::new(
            labels(&["a", "b"]),
            IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]),
        )
        .unwrap();
        let member = |a: i64, b: i64| {
            g.member_vec(&[big(a), big(b)])
        };
        assert!(member(0, 0));
        assert!(member(2, 0));
        assert!(member(0, 3));
        assert!(member(2, 3));
        assert!(member(4, 9));
        assert!(member(-2, 3));
        assert!(!member(1, 0));
        assert!(!member(0, 1));
        assert!(!member(2, 1));
        assert!(!member(1, 3));
    }

    #[test]
    fn member_skew_lattice() {
        let g = FpGroup::new(
            labels(&["a", "b"]),
            IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]]),
        )
        .unwrap();
        assert!(g.member_vec(&[big(2), big(4)]));
        assert!(g.member_vec(&[big(6), big(8)]));
        assert!(g.member_vec(&[big(8), big(12)]));
        // (2,0) = -2*(2,4) + 1*(6,8).
        assert!(g.member_vec(&[big(2), big(0)]));
        assert!(!g.member_vec(&[big(1), big(2)]));
        assert!(!g.member_vec(&[big(0), big(2)]));
    }

    #[test]
    fn member_rejects_unknown_label() {
        let g = FpGroup::free(labels(&["a"])).unwrap();
        let e = K0Element::generator("zzz");
        assert!(matches!(
            g.member(&e),
            Err(AbelianError::UnknownLabel(l)) if l == "zzz"
        ));
    }

    // -- group invariants ---------------------------------------------------

    #[test]
    fn invariants_of_presentations() {
        let g = FpGroup::new(
            labels(&["a", "b"]),
            IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]]),
        )
        .unwrap();
        assert_eq!(g.torsion(), &[big(2), big(4)]);
        assert_eq!(g.free_rank(), 0);
        assert_eq!(g.invariants().to_string(), "Z/2 + Z/4");

        let free = FpGroup::free(labels(&["x", "y"])).unwrap();
        assert_eq!(free.free_rank(), 2);
        assert!(free.torsion().is_empty());
        assert_eq!(free.invariants().to_string(), "Z^2");

        let mixed = FpGroup::new(
            labels(&["x", "y"]),
            IntMatrix::from_rows(&[vec![2, 0]]),
        )
        .unwrap();
        assert_eq!(mixed.torsion(), &[big(2)]);
        assert_eq!(mixed.free_rank(), 1);
        assert_eq!(mixed.invariants().to_string(), "Z + Z/2");

        let trivial = FpGroup::new(
            labels(&["x"]),
            IntMatrix::from_rows(&[vec![1]]),
        )
        .unwrap();
        assert!(trivial.is_trivial());
        assert_eq!(trivial.invariants().to_string(), "0");
    }

    #[test]
    fn quotient_stacks_relations() {
        let g = FpGroup::free(labels(&["x", "y"])).unwrap();
        let q = g
            .quotient(&[K0Element::from_terms([
                ("x".to_string(), big(2)),
                ("y".to_string(), big(0)),
            ])])
            .unwrap();
        assert_eq!(q.torsion(), &[big(2)]);
        assert_eq!(q.free_rank(), 1);
    }

    // -- homomorphisms ------------------------------------------------------

    fn cyclic(label: &str, order: i64) -> FpGroup {
        FpGroup::new(
            labels(&[label]),
            IntMatrix::from_rows(&[vec![order]]),
        )
        .unwrap()
    }

    #[test]
    fn induced_hom_checks_well_definedness() {
        let z2 = cyclic("a", 2);
        let z4 = cyclic("b", 4);
        // a -> 2b is fine: 2a -> 4b = 0 in Z/4.
        let ok = GroupHom::induced(
            &z2,
            &z4,
            &BTreeMap::from([(
                "a".to_string(),
                K0Element::from_terms([("b".to_string(), big(2))]),
            )]),
        );
        assert!(ok.is_ok());
        // a -> b is not: 2a -> 2b != 0 in Z/4.
        let bad = GroupHom::induced(
            &z2,
            &z4,
            &BTreeMap::from([("b".to_string(), K0Element::generator("b"))]),
        );
        assert!(bad.is_err());
        let bad2 = GroupHom::induced(
            &z2,
            &z4,
            &BTreeMap::from([("a".to_string(), K0Element::generator("b"))]),
        );
        assert!(matches!(
            bad2,
            Err(AbelianError::NotWellDefined { relation: 0 })
        ));
    }

    #[test]
    fn chinese_remainder_isomorphism() {
        let z6 = cyclic("c", 6);
        let z2z3 = FpGroup::new(
            labels(&["a", "b"]),
            IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]),
        )
        .unwrap();
        let fwd = GroupHom::induced(
            &z6,
            &z2z3,
            &BTreeMap::from([(
                "c".to_string(),
                K0Element::from_terms([
                    ("a".to_string(), big(1)),
                    ("b".to_string(), big(1)),
                ]),
            )]),
        )
        .unwrap();
        assert!(fwd.is_isomorphism());

        // Inverse: a -> 3c, b -> 4c; the composite is multiplication by 7,
        // i.e. the identity of Z/6.
        let back = GroupHom::induced(
            &z2z3,
            &z6,
            &BTreeMap::from([
                (
                    "a".to_string(),
                    K0Element::from_terms([("c".to_string(), big(3))]),
                ),
                (
                    "b".to_string(),
                    K0Element::from_terms([("c".to_string(), big(4))]),
                ),
            ]),
        )
        .unwrap();
        assert!(back.is_isomorphism());
        let round = fwd.then(&back).unwrap();
        assert!(round.is_identity());
    }

    #[test]
    fn injective_not_surjective_and_vice_versa() {
        let z = FpGroup::free(labels(&["x"])).unwrap();
        let double = GroupHom::induced(
            &z,
            &z,
            &BTreeMap::from([(
                "x".to_string(),
                K0Element::from_terms([("x".to_string(), big(2))]),
            )]),
        )
        .unwrap();
        assert!(double.is_injective());
        assert!(!double.is_surjective());
        assert!(!double.is_isomorphism());

        let z4 = cyclic("a", 4);
        let z2 = cyclic("b", 2);
        let proj = GroupHom::induced(
            &z4,
            &z2,
            &BTreeMap::from([("a".to_string(), K0Element::generator("b"))]),
        )
        .unwrap();
        assert!(proj.is_surjective());
        assert!(!proj.is_injective());
    }

    #[test]
    fn shear_is_isomorphism() {
        let g = FpGroup::free(labels(&["x", "y"])).unwrap();
        let shear = GroupHom::induced(
            &g,
            &g,
            &BTreeMap::from([
                (
                    "x".to_string(),
                    K0Element::from_terms([
                        ("x".to_string(), big(1)),
                        ("y".to_string(), big(1)),
                    ]),
                ),
                ("y".to_string(), K0Element::generator("y")),
            ]),
        )
        .unwrap();
        assert!(shear.is_isomorphism());

        let stretch = GroupHom::induced(
            &g,
            &g,
            &BTreeMap::from([
                (
                    "x".to_string(),
                    K0Element::from_terms([("x".to_string(), big(2))]),
                ),
                ("y".to_string(), K0Element::generator("y")),
            ]),
        )
        .unwrap();
        assert!(!stretch.is_isomorphism());
    }

    // -- brute-force oracle for finite groups -------------------------------

    /// All elements of a finite group in canonical coordinates, together
    /// with the data needed to map them around: returns (reps, order) where
    /// reps are generator-coordinate vectors, one per group element.
    fn enumerate_finite(g: &FpGroup) -> Option<Vec<Vec<BigInt>>> {
        if g.free_rank() > 0 {
            return None;
        }
        let n = g.labels().len();
        let snf = smith_normal_form(g.relations());
        // Canonical coordinates w = v * V; moduli are the invariant factors
        // (full set, including ones).
        let mut moduli = Vec::new();
        for i in 0..n {
            moduli.push(snf.d[(i, i)].clone());
        }
        let v_inv = snf.v.inverse()?;
        let mut elems = vec![vec![BigInt::zero(); n]];
        for (i, m) in moduli.iter().enumerate() {
            use num_traits::ToPrimitive;
            let mut next = Vec::new();
            let bound = m.to_i64()?;
            for e in &elems {
                for k in 0..bound.max(1) {
                    let mut w = e.clone();
                    w[i] = big(k);
                    next.push(w);
                }
            }
            elems = next;
        }
        // Pull canonical tuples back to generator coordinates.
        Some(
            elems
                .into_iter()
                .map(|w| row_times_matrix(&w, &v_inv))
                .collect(),
        )
    }

    /// Reduce a generator-coordinate vector to a canonical residue tuple.
    fn canonicalize(g: &FpGroup, v: &[BigInt]) -> Vec<BigInt> {
        let snf = smith_normal_form(g.relations());
        let w = row_times_matrix(v, &snf.v);
        w.into_iter()
            .enumerate()
            .map(|(i, wi)| {
                let d = &snf.d[(i, i)];
                if d.is_zero() {
                    wi
                } else {
                    wi.mod_floor(d)
                }
            })
            .collect()
    }

    fn bijective_by_enumeration(hom: &GroupHom) -> bool {
        let src = enumerate_finite(hom.source()).expect("finite source");
        let tgt = enumerate_finite(hom.target()).expect("finite target");
        let mut images = std::collections::BTreeSet::new();
        for rep in &src {
            let img = row_times_matrix(rep, hom.matrix());
            images.insert(canonicalize(hom.target(), &img));
        }
        images.len() == src.len() && images.len() == tgt.len()
    }

    #[test]
    fn iso_test_agrees_with_enumeration_on_finite_groups() {
        let cases: Vec<(FpGroup, FpGroup, BTreeMap<String, K0Element>)> = vec![
            // Z/6 -> Z/2 + Z/3, c -> (1,1): iso.
            (
                cyclic("c", 6),
                FpGroup::new(
                    labels(&["a", "b"]),
                    IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]),
                )
                .unwrap(),
                BTreeMap::from([(
                    "c".to_string(),
                    K0Element::from_terms([
                        ("a".to_string(), big(1)),
                        ("b".to_string(), big(1)),
                    ]),
                )]),
            ),
            // Z/4 -> Z/2 + Z/2, a -> (1,1): not iso (orders differ... both 4,
            // but the map is not injective: 2a -> (2,2) = 0).
            (
                cyclic("a", 4),
                FpGroup::new(
                    labels(&["p", "q"]),
                    IntMatrix::from_rows(&[vec![2, 0], vec![0, 2]]),
                )
                .unwrap(),
                BTreeMap::from([(
                    "a".to_string(),
                    K0Element::from_terms([
                        ("p".to_string(), big(1)),
                        ("q".to_string(), big(1)),
                    ]),
                )]),
            ),
            // Z/8 -> Z/8 by 3: iso (3 is a unit mod 8).
            (
                cyclic("a", 8),
                cyclic("a", 8),
                BTreeMap::from([(
                    "a".to_string(),
                    K0Element::from_terms([("a".to_string(), big(3))]),
                )]),
            ),
            // Z/8 -> Z/8 by 2: not iso.
            (
                cyclic("a", 8),
                cyclic("a", 8),
                BTreeMap::from([(
                    "a".to_string(),
                    K0Element::from_terms([("a".to_string(), big(2))]),
                )]),
            ),
        ];
        for (src, tgt, images) in cases {
            let hom = GroupHom::induced(&src, &tgt, &images).unwrap();
            assert_eq!(
                hom.is_isomorphism(),
                bijective_by_enumeration(&hom),
                "exact iso test disagrees with brute force for {} -> {}",
                src.invariants(),
                tgt.invariants()
            );
        }
    }

    // -- element arithmetic --------------------------------------------------

    #[test]
    fn element_arithmetic_and_display() {
        let a = K0Element::generator("(1,3)");
        let b = K0Element::generator("(1,4)");
        let e = &(&a + &a) - &b;
        assert_eq!(e.coefficient("(1,3)"), big(2));
        assert_eq!(e.coefficient("(1,4)"), big(-1));
        assert_eq!(e.to_string(), "2[(1,3)] - [(1,4)]");
        assert_eq!(K0Element::zero().to_string(), "0");
        let cancel = &a - &a;
        assert!(cancel.is_zero());
        assert_eq!((-&b).to_string(), "-[(1,4)]");
        assert_eq!(e.scaled(&big(0)), K0Element::zero());
    }

    // -- property tests -------------------------------------------------------

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-9i64..=9, r * c).prop_map(move |entries| {
                let mut m = IntMatrix::zero(r, c);
                for (k, e) in entries.into_iter().enumerate() {
                    m[(k / c, k % c)] = BigInt::from(e);
                }
                m
            })
        })
    }

    proptest! {
        #[test]
        fn snf_postconditions_hold(m in small_matrix()) {
            assert_snf_postconditions(&m);
        }

        #[test]
        fn bareiss_det_matches_cofactor(
            entries in proptest::collection::vec(-9i64..=9, 16)
        ) {
            let m = IntMatrix::from_fn(4, 4, |i, j| BigInt::from(entries[4 * i + j]));
            prop_assert_eq!(m.determinant(), det_cofactor(&m));
        }

        #[test]
        fn row_combinations_are_members(
            m in small_matrix(),
            coeffs in proptest::collection::vec(-5i64..=5, 4)
        ) {
            let lab: Vec<String> = (0..m.cols()).map(|i| format!("g{i}")).collect();
            let g = FpGroup::new(lab, m.clone()).unwrap();
            let mut v = vec![BigInt::zero(); m.cols()];
            for (i, c) in coeffs.iter().take(m.rows()).enumerate() {
                for j in 0..m.cols() {
                    v[j] += &m[(i, j)] * BigInt::from(*c);
                }
            }
            prop_assert!(g.member_vec(&v));
        }

        #[test]
        fn kernel_rows_annihilate(m in small_matrix()) {
            let k = m.left_kernel();
            prop_assert!(k.matmul(&m).is_zero());
            let snf = smith_normal_form(&m);
            prop_assert_eq!(k.rows(), m.rows() - snf.rank);
        }

        #[test]
        fn solve_finds_constructed_solutions(
            m in small_matrix(),
            xs in proptest::collection::vec(-5i64..=5, 4)
        ) {
            let x: Vec<BigInt> = xs.iter().take(m.cols()).map(|v| BigInt::from(*v)).collect();
            let b = matrix_times_col(&m, &x);
            let sol = m.solve(&b).expect("constructed system must be solvable");
            prop_assert_eq!(matrix_times_col(&m, &sol), b);
        }
    }
}
