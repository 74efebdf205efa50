//! The polygon arc model of the cluster category of Dynkin type A.
//!
//! A rank-`n` model lives on a convex polygon with `N = n + 3` vertices,
//! labelled `1..=N` clockwise. Indecomposable objects are the diagonals
//! ("arcs") of the polygon. Everything the rest of the crate needs is
//! computed combinatorially and exactly from arcs:
//!
//! * crossing of two arcs (strict cyclic interleaving of endpoints);
//! * the suspension, which rotates an arc one vertex counterclockwise;
//! * hom-spaces, which are zero or one dimensional; a hom is detected by
//!   the *fan window* criterion: `Hom(a, b)` is nonzero exactly when one
//!   endpoint of `b` lies in the closed cyclic window `[u, v-2]` and the
//!   other in `[v, u-2]`, where `a = (u, v)`;
//! * composition: where two hom-spaces are nonzero, the composite is
//!   nonzero exactly when tracking the endpoints of the outer target
//!   through the middle arc's windows lands them back in the two windows
//!   of the source (see [`Polygon::compose_nonzero`]);
//! * exchange triangles of a crossing pair of arcs, with boundary edges
//!   contributing zero;
//! * triangulations (maximal sets of pairwise noncrossing arcs), flips,
//!   string modules over a set of test arcs with their submodule lattices,
//!   and index resolutions with respect to a triangulation.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::abelian::{matrix_times_col, IntMatrix};

/// Errors from polygon combinatorics.
#[derive(Debug, thiserror::Error)]
pub enum ArcError {
    /// A vertex index outside `1..=N`.
    #[error("vertex {0} is out of range 1..={1}")]
    VertexOutOfRange(usize, usize),
    /// The endpoints do not span a diagonal (boundary edge or repeated
    /// vertex).
    #[error("({0},{1}) is not a diagonal of the {2}-gon")]
    NotADiagonal(usize, usize, usize),
    /// A set of arcs that should be a triangulation is not.
    #[error("not a triangulation: {0}")]
    NotATriangulation(String),
    /// An arc that should belong to a triangulation does not.
    #[error("arc {0} is not in the triangulation")]
    ArcNotInTriangulation(String),
    /// Two arcs that should cross do not.
    #[error("arcs {0} and {1} do not cross")]
    NotCrossing(String, String),
    /// An arc string could not be parsed.
    #[error("cannot parse arc from `{0}` (expected \"(i,j)\" or \"i-j\")")]
    ParseArc(String),
    /// A structural invariant of the model failed; indicates a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// A diagonal of the polygon, stored with normalized endpoints
/// `1 <= i < j <= N`.
///
/// Construction goes through [`Polygon::arc`] so the diagonal conditions
/// (`j - i >= 2` and `(i, j) != (1, N)`) are always enforced.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Arc {
    i: usize,
    j: usize,
}

impl Arc {
    /// Smaller endpoint.
    pub fn first(&self) -> usize {
        self.i
    }

    /// Larger endpoint.
    pub fn second(&self) -> usize {
        self.j
    }

    /// The canonical label, e.g. `(1,3)`.
    pub fn label(&self) -> String {
        format!("({},{})", self.i, self.j)
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// A triangle `x -> (sum of middles) -> y -> suspension of x`.
///
/// Boundary edges of the polygon are zero objects and never appear among
/// the middle terms, so `middles` has zero, one, or two arcs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Triangle {
    /// First term.
    pub x: Arc,
    /// Indecomposable summands of the middle term.
    pub middles: Vec<Arc>,
    /// Third term; the connecting map goes `y -> suspension of x`.
    pub y: Arc,
}

impl fmt::Display for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mid = if self.middles.is_empty() {
            "0".to_string()
        } else {
            self.middles
                .iter()
                .map(Arc::label)
                .collect::<Vec<_>>()
                .join(" (+) ")
        };
        write!(f, "{} -> {} -> {}", self.x, mid, self.y)
    }
}

/// The outcome of resolving an object against a triangulation: a triangle
/// `(sum of t0) -> (sum of t1) -> c` with both outer terms in the
/// triangulation. The index of `c` is `[t1] - [t0]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IndexResolution {
    /// Summands of the middle-of-resolution term (multiset).
    pub t1: Vec<Arc>,
    /// Summands of the first term (multiset).
    pub t0: Vec<Arc>,
}

/// A thin module over a set of test arcs: the image of an arc under the
/// hom-functor restricted to the test set.
///
/// `base[k]` carries a one-dimensional value space when `support[k]` is
/// true. `actions` lists pairs `(x, x')` of base positions for which the
/// structure map from the value at `x'` to the value at `x` is nonzero
/// (induced, contravariantly, by the hom from `base[x]` to `base[x']`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModuleRep {
    base: Vec<Arc>,
    support: Vec<bool>,
    actions: Vec<(usize, usize)>,
}

impl ModuleRep {
    /// The test arcs the module is defined over.
    pub fn base(&self) -> &[Arc] {
        &self.base
    }

    /// True where the module has a (one-dimensional) value space.
    pub fn support(&self) -> &[bool] {
        &self.support
    }

    /// Nonzero structure maps as position pairs `(x, x')`, value flowing
    /// from `x'` to `x`.
    pub fn actions(&self) -> &[(usize, usize)] {
        &self.actions
    }

    /// Total dimension.
    pub fn total_dim(&self) -> usize {
        self.support.iter().filter(|s| **s).count()
    }

    /// True when the module is zero.
    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    /// The arcs supporting the top (cokernel of the radical): supported
    /// positions that receive no value from another position.
    pub fn top(&self) -> Vec<Arc> {
        (0..self.base.len())
            .filter(|&k| self.support[k] && !self.actions.iter().any(|&(x, _)| x == k))
            .map(|k| self.base[k])
            .collect()
    }

    /// All submodules, each given by its supporting arc set.
    ///
    /// A subset of the support is a submodule exactly when it is closed
    /// under the structure maps: if the value at `x'` is kept and the map
    /// into `x` is nonzero, `x` must be kept too.
    pub fn submodule_supports(&self) -> Vec<Vec<Arc>> {
        let supported: Vec<usize> = (0..self.base.len()).filter(|&k| self.support[k]).collect();
        let m = supported.len();
        assert!(m < usize::BITS as usize, "support too large to enumerate");
        let mut out = Vec::new();
        for mask in 0..(1usize << m) {
            let keeps =
                |k: usize| -> bool { supported.iter().position(|&p| p == k).is_some_and(|idx| mask >> idx & 1 == 1) };
            let closed = self
                .actions
                .iter()
                .all(|&(x, xp)| !keeps(xp) || keeps(x));
            if closed {
                out.push(
                    supported
                        .iter()
                        .enumerate()
                        .filter(|(idx, _)| mask >> idx & 1 == 1)
                        .map(|(_, &k)| self.base[k])
                        .collect(),
                );
            }
        }
        out
    }
}

/// A convex polygon with `rank + 3` vertices labelled clockwise; the
/// combinatorial model of the rank-`rank` cluster category of type A.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Polygon {
    rank: usize,
}

impl Polygon {
    /// The model of rank `rank` (a polygon with `rank + 3` vertices).
    pub fn new(rank: usize) -> Polygon {
        Polygon { rank }
    }

    /// The rank (number of arcs in any triangulation).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of polygon vertices, `rank + 3`.
    pub fn vertex_count(&self) -> usize {
        self.rank + 3
    }

    /// Normalizes `(a, b)` to an arc, rejecting boundary edges.
    pub fn arc(&self, a: usize, b: usize) -> Result<Arc, ArcError> {
        let n = self.vertex_count();
        for v in [a, b] {
            if v < 1 || v > n {
                return Err(ArcError::VertexOutOfRange(v, n));
            }
        }
        let (i, j) = if a <= b { (a, b) } else { (b, a) };
        if j - i < 2 || (i == 1 && j == n) {
            return Err(ArcError::NotADiagonal(i, j, n));
        }
        Ok(Arc { i, j })
    }

    /// Parses an arc from `(i,j)` or `i-j` syntax.
    pub fn parse_arc(&self, s: &str) -> Result<Arc, ArcError> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(t);
        let parts: Vec<&str> = if inner.contains(',') {
            inner.split(',').collect()
        } else {
            inner.split('-').collect()
        };
        if parts.len() != 2 {
            return Err(ArcError::ParseArc(s.to_string()));
        }
        let a = parts[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| ArcError::ParseArc(s.to_string()))?;
        let b = parts[1]
            .trim()
            .parse::<usize>()
            .map_err(|_| ArcError::ParseArc(s.to_string()))?;
        self.arc(a, b)
    }

    /// All arcs of the polygon in lexicographic order
    /// (`rank * (rank + 3) / 2` of them).
    pub fn arcs(&self) -> Vec<Arc> {
        let n = self.vertex_count();
        let mut out = Vec::new();
        for i in 1..=n {
            for j in i + 2..=n {
                if i == 1 && j == n {
                    continue;
                }
                out.push(Arc { i, j });
            }
        }
        out
    }

    /// Moves vertex `v` one step counterclockwise (`v -> v - 1`, wrapping).
    fn rotate_vertex(&self, v: usize, steps: i64) -> usize {
        let n = self.vertex_count() as i64;
        let zero_based = (v as i64 - 1 - steps).rem_euclid(n);
        (zero_based + 1) as usize
    }

    /// The `power`-th suspension of an arc: both endpoints move `power`
    /// steps counterclockwise (negative powers move clockwise).
    pub fn suspend(&self, a: Arc, power: i64) -> Arc {
        let p = self.rotate_vertex(a.i, power);
        let q = self.rotate_vertex(a.j, power);
        let (i, j) = if p <= q { (p, q) } else { (q, p) };
        // A rotated diagonal is always a diagonal.
        Arc { i, j }
    }

    /// Cyclic distance from `a` forward (clockwise) to `b`.
    fn forward(&self, a: usize, b: usize) -> usize {
        let n = self.vertex_count();
        (b + n - a) % n
    }

    /// True when `x` lies strictly inside the clockwise open interval from
    /// `a` to `b`.
    fn strictly_between(&self, x: usize, a: usize, b: usize) -> bool {
        let d = self.forward(a, x);
        d > 0 && d < self.forward(a, b)
    }

    /// True when the two arcs cross in the interior (a shared endpoint is
    /// not a crossing).
    pub fn cross(&self, a: Arc, b: Arc) -> bool {
        if a.i == b.i || a.i == b.j || a.j == b.i || a.j == b.j {
            return false;
        }
        self.strictly_between(b.i, a.i, a.j) != self.strictly_between(b.j, a.i, a.j)
    }

    /// True when `x` lies in the closed cyclic window `[s, e - 2]` (the fan
    /// window of an arc endpoint `s` belonging to an arc with far endpoint
    /// `e`).
    fn in_window(&self, x: usize, s: usize, e: usize) -> bool {
        let n = self.vertex_count();
        self.forward(s, x) <= (self.forward(s, e) + n - 2) % n
    }

    /// If `Hom(a, b)` is nonzero, returns the endpoints of `b` split by the
    /// windows of `a`: `(endpoint in the window at a.first, endpoint in the
    /// window at a.second)`. Returns `None` when the hom-space is zero.
    pub fn hom_split(&self, a: Arc, b: Arc) -> Option<(usize, usize)> {
        let wu = |x: usize| self.in_window(x, a.i, a.j);
        let wv = |x: usize| self.in_window(x, a.j, a.i);
        if wu(b.i) && wv(b.j) {
            Some((b.i, b.j))
        } else if wu(b.j) && wv(b.i) {
            Some((b.j, b.i))
        } else {
            None
        }
    }

    /// Dimension of `Hom(a, b)`: one when `b` lies in the fan of `a`
    /// (equivalently, when `a` crosses the clockwise rotation of `b`),
    /// zero otherwise.
    pub fn hom_dim(&self, a: Arc, b: Arc) -> usize {
        usize::from(self.hom_split(a, b).is_some())
    }

    /// The hom-dimension matrix `H[r][c] = dim Hom(rows[r], cols[c])`.
    pub fn hom_matrix(&self, rows: &[Arc], cols: &[Arc]) -> IntMatrix {
        IntMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            BigInt::from(self.hom_dim(rows[r], cols[c]))
        })
    }

    /// True when the composite of nonzero maps `a -> b -> c` is nonzero.
    ///
    /// Both hom-spaces are at most one dimensional, so this is a property
    /// of the triple of arcs: track the window split of `c` through `b`;
    /// the composite survives exactly when the endpoint of `c` on the
    /// `b`-window based at the `a.first`-side lands in the `a.first`
    /// window, and the other endpoint in the `a.second` window.
    pub fn compose_nonzero(&self, a: Arc, b: Arc, c: Arc) -> bool {
        let Some((b_at_u, _)) = self.hom_split(a, b) else {
            return false;
        };
        let Some((c_at_bi, c_at_bj)) = self.hom_split(b, c) else {
            return false;
        };
        let (c_to_u, c_to_v) = if b_at_u == b.i {
            (c_at_bi, c_at_bj)
        } else {
            (c_at_bj, c_at_bi)
        };
        self.in_window(c_to_u, a.i, a.j) && self.in_window(c_to_v, a.j, a.i)
    }

    /// The two exchange triangles of a crossing pair, one out of each arc.
    ///
    /// For endpoints `i < j < k < l` (so the arcs are `(i,k)` and `(j,l)`)
    /// the triangles are
    /// `(i,k) -> (i,l) + (j,k) -> (j,l)` and
    /// `(j,l) -> (i,j) + (k,l) -> (i,k)`,
    /// with boundary edges dropped from the middle terms.
    pub fn exchange_triangles(&self, a: Arc, b: Arc) -> Result<(Triangle, Triangle), ArcError> {
        if !self.cross(a, b) {
            return Err(ArcError::NotCrossing(a.label(), b.label()));
        }
        let mut vs = [a.i, a.j, b.i, b.j];
        vs.sort_unstable();
        let [i, j, k, l] = vs;
        // The crossing pairing is always (i,k) with (j,l).
        let ik = Arc { i, j: k };
        let jl = Arc { i: j, j: l };
        let diag = |p: usize, q: usize| self.arc(p, q).ok();
        let first = Triangle {
            x: ik,
            middles: [diag(i, l), diag(j, k)].into_iter().flatten().collect(),
            y: jl,
        };
        let second = Triangle {
            x: jl,
            middles: [diag(i, j), diag(k, l)].into_iter().flatten().collect(),
            y: ik,
        };
        Ok((first, second))
    }

    /// The arcs witnessing that the connecting map of a triangle does not
    /// vanish: test arcs `w` such that the composite
    /// `w -> y -> (suspension of x)` is nonzero.
    ///
    /// For a split triangle (connecting map zero) this is empty; callers
    /// that synthesize split triangles should not use this.
    pub fn delta_witnesses(&self, tri: &Triangle) -> Vec<Arc> {
        let sigma_x = self.suspend(tri.x, 1);
        self.arcs()
            .into_iter()
            .filter(|w| self.compose_nonzero(*w, tri.y, sigma_x))
            .collect()
    }

    /// All triangulations (maximal pairwise-noncrossing arc sets), each
    /// sorted, in lexicographic order.
    pub fn triangulations(&self) -> Vec<Vec<Arc>> {
        let arcs = self.arcs();
        let mut out = Vec::new();
        let mut current: Vec<Arc> = Vec::new();
        self.extend_triangulation(&arcs, 0, &mut current, &mut out);
        out
    }

    fn extend_triangulation(
        &self,
        arcs: &[Arc],
        from: usize,
        current: &mut Vec<Arc>,
        out: &mut Vec<Vec<Arc>>,
    ) {
        if current.len() == self.rank {
            out.push(current.clone());
            return;
        }
        let needed = self.rank - current.len();
        for idx in from..arcs.len() {
            if arcs.len() - idx < needed {
                break;
            }
            let cand = arcs[idx];
            if current.iter().all(|t| !self.cross(*t, cand)) {
                current.push(cand);
                self.extend_triangulation(arcs, idx + 1, current, out);
                current.pop();
            }
        }
    }

    /// Checks that the arcs form a triangulation; returns them sorted.
    pub fn validate_triangulation(&self, arcs: &[Arc]) -> Result<Vec<Arc>, ArcError> {
        let mut sorted = arcs.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != arcs.len() {
            return Err(ArcError::NotATriangulation("repeated arc".into()));
        }
        if sorted.len() != self.rank {
            return Err(ArcError::NotATriangulation(format!(
                "{} arcs given, {} needed",
                sorted.len(),
                self.rank
            )));
        }
        for (p, s) in sorted.iter().enumerate() {
            for t in &sorted[p + 1..] {
                if self.cross(*s, *t) {
                    return Err(ArcError::NotATriangulation(format!(
                        "{} crosses {}",
                        s, t
                    )));
                }
            }
        }
        Ok(sorted)
    }

    /// The unique other arc completing `triangulation - {t}` to a
    /// triangulation (the flip of `t`).
    pub fn flip(&self, triangulation: &[Arc], t: Arc) -> Result<Arc, ArcError> {
        let tri = self.validate_triangulation(triangulation)?;
        if !tri.contains(&t) {
            return Err(ArcError::ArcNotInTriangulation(t.label()));
        }
        let rest: Vec<Arc> = tri.iter().copied().filter(|a| *a != t).collect();
        let mut replacement = None;
        for cand in self.arcs() {
            if cand == t || rest.contains(&cand) {
                continue;
            }
            if rest.iter().all(|a| !self.cross(*a, cand)) {
                if replacement.is_some() {
                    return Err(ArcError::Internal(format!(
                        "flip of {} is not unique",
                        t
                    )));
                }
                replacement = Some(cand);
            }
        }
        replacement.ok_or_else(|| ArcError::Internal(format!("no flip found for {}", t)))
    }

    /// The module obtained by applying the hom-functor of `c` to the test
    /// arcs `base` (restricted hom-functor, contravariant structure maps).
    pub fn module_of(&self, base: &[Arc], c: Arc) -> ModuleRep {
        let support: Vec<bool> = base.iter().map(|t| self.hom_dim(*t, c) == 1).collect();
        let mut actions = Vec::new();
        for (x, tx) in base.iter().enumerate() {
            for (xp, txp) in base.iter().enumerate() {
                if x == xp || !support[x] || !support[xp] {
                    continue;
                }
                if self.hom_dim(*tx, *txp) == 1 && self.compose_nonzero(*tx, *txp, c) {
                    actions.push((x, xp));
                }
            }
        }
        ModuleRep {
            base: base.to_vec(),
            support,
            actions,
        }
    }

    /// Resolves `c` against a triangulation: produces the triangle
    /// `t0 -> t1 -> c` with both outer terms summands of the triangulation.
    ///
    /// `t1` is the top of the restricted hom-module of `c` — the source of
    /// the minimal right approximation out of the triangulation (the empty
    /// sum when the module vanishes). `t0` is then pinned down by the long
    /// exact hom-sequence of the triangle
    /// `(desuspension of c) -> t0 -> t1 -> c`: for every triangulation
    /// arc `t`,
    ///
    /// ```text
    /// dim Hom(t, t0) = dim Hom(t, t1) - dim Hom(t, c)
    ///                + dim Hom(t, c') - rank(Hom(t, t1') -> Hom(t, c'))
    /// ```
    ///
    /// where primes are desuspensions, surjectivity of
    /// `Hom(t, t1) -> Hom(t, c)` comes from the approximation property,
    /// and the rank term is the composite-tracking rank into the (at most
    /// one dimensional) space `Hom(t, c')`. The resulting square system
    /// over the hom-matrix of the triangulation has a unique solution (the
    /// matrix is nonsingular) which must be nonnegative and integral; any
    /// failure signals a bug, not bad input.
    pub fn index_resolution(
        &self,
        triangulation: &[Arc],
        c: Arc,
    ) -> Result<IndexResolution, ArcError> {
        let tri = self.validate_triangulation(triangulation)?;
        if tri.contains(&c) {
            return Ok(IndexResolution {
                t1: vec![c],
                t0: Vec::new(),
            });
        }
        let module = self.module_of(&tri, c);
        let t1 = module.top();
        let c_desusp = self.suspend(c, -1);
        let h = self.hom_matrix(&tri, &tri);
        let m1: Vec<BigInt> = tri
            .iter()
            .map(|t| BigInt::from(t1.iter().filter(|u| *u == t).count()))
            .collect();
        let rhs: Vec<BigInt> = matrix_times_col(&h, &m1)
            .into_iter()
            .zip(tri.iter())
            .map(|(hm1, t)| {
                let f = BigInt::from(self.hom_dim(*t, c));
                let g = BigInt::from(self.hom_dim(*t, c_desusp));
                // Rank of the desuspended approximation map composed with
                // maps from t; the target is at most one dimensional.
                let hit = t1
                    .iter()
                    .any(|u| self.compose_nonzero(*t, self.suspend(*u, -1), c_desusp));
                let r = BigInt::from(u8::from(hit));
                hm1 - f + g - r
            })
            .collect();
        let m0 = h.solve(&rhs).ok_or_else(|| {
            ArcError::Internal(format!("no integral resolution of {} found", c))
        })?;
        if m0.iter().any(Signed::is_negative) {
            return Err(ArcError::Internal(format!(
                "resolution of {} has negative multiplicities",
                c
            )));
        }
        let mut t0 = Vec::new();
        for (t, mult) in tri.iter().zip(&m0) {
            use num_traits::ToPrimitive;
            let count = mult.to_usize().ok_or_else(|| {
                ArcError::Internal(format!("resolution multiplicity overflow at {}", t))
            })?;
            t0.extend(std::iter::repeat(*t).take(count));
        }
        Ok(IndexResolution { t1, t0 })
    }
}
