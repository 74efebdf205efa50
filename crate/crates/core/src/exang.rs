//! Finite presentations of additive categories with distinguished
//! conflations, and their relative Grothendieck groups.
//!
//! A [`Category`] records object labels, hom-space dimensions, an optional
//! suspension, and a list of conflations, each annotated with the objects at
//! which its connecting map remains nonzero after composition. Categories
//! are either generated from the polygon model ([`Category::from_polygon`]),
//! in which case further conflations with decomposable end terms can be
//! synthesized on demand, or loaded from a JSON description
//! ([`Category::from_json`]), in which case the stored conflations are the
//! whole structure.
//!
//! A set `D` of objects cuts out a relative structure: a conflation belongs
//! to it exactly when its connecting map vanishes on every object of `D`.
//! The Grothendieck group of the relative structure is the split group on
//! the objects modulo the Euler classes of the surviving conflations
//! ([`Category::relative_k0`]).

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::abelian::{smith_normal_form, FpGroup, IntMatrix, K0Element, SmithDecomposition};
use crate::arcmodel::{Arc, ArcError, Polygon, Triangle};

/// Largest number of connecting-map components enumerated per end pair
/// during synthesis; beyond this the pattern count is astronomical.
const MAX_PATTERN_SLOTS: usize = 20;

/// Errors from building, loading, or computing with category data.
#[derive(Debug, thiserror::Error)]
pub enum ExangError {
    /// The JSON text could not be parsed into category data.
    #[error("malformed category JSON: {0}")]
    Json(#[from] serde_json::Error),
    /// The data parsed but violates a structural requirement.
    #[error("invalid category data: {0}")]
    Validation(String),
    /// A label does not name an object of the category.
    #[error("unknown object label `{0}`")]
    UnknownObject(String),
    /// The hom matrix is singular, so middle terms are not determined by
    /// hom-space dimensions.
    #[error("hom matrix is singular; middle terms cannot be reconstructed")]
    SingularHom,
    /// A synthesized conflation admits no consistent middle term.
    #[error("no valid middle term for synthesized conflation: {0}")]
    NoMiddleTerm(String),
    /// An error from the exact linear algebra layer.
    #[error(transparent)]
    Abelian(#[from] crate::abelian::AbelianError),
    /// An error from the underlying polygon model.
    #[error(transparent)]
    Arc(#[from] ArcError),
}

/// A conflation presented by its terms and the objects at which its
/// connecting map is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConflationData {
    /// The `d + 2` terms, first to last. Each term lists the labels of its
    /// indecomposable summands with multiplicity; an empty list is the zero
    /// object.
    pub terms: Vec<Vec<String>>,
    /// Labels of the objects `x` such that some composite of a map out of
    /// `x` with the connecting map is nonzero. A conflation lies in the
    /// structure relative to `D` exactly when this list avoids `D`.
    pub delta_nonvanishing: Vec<String>,
}

/// The serializable description of a category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryData {
    /// Conflations have `d + 2` terms; the polygon model has `d = 1`.
    pub d: usize,
    /// Object labels, pairwise distinct and nonempty.
    pub objects: Vec<String>,
    /// Hom-space dimensions as `[source, target, dimension]` triples.
    /// Pairs not listed have dimension zero.
    pub hom: Vec<(String, String, usize)>,
    /// The suspension on objects as `[object, suspended]` pairs, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suspension: Option<Vec<(String, String)>>,
    /// The distinguished conflations.
    pub conflations: Vec<ConflationData>,
}

/// How a [`Category`] was obtained, which determines whether conflations
/// with decomposable end terms can be synthesized.
#[derive(Debug, Clone)]
pub enum CategorySource {
    /// Generated from the polygon model of the given rank.
    Polygon(Polygon),
    /// Loaded from explicit data; the stored conflations are all there is.
    Loaded,
}

/// A validated category presentation, indexed for computation.
#[derive(Debug, Clone)]
pub struct Category {
    data: CategoryData,
    source: CategorySource,
    index: BTreeMap<String, usize>,
    suspension_map: BTreeMap<String, String>,
    hom: IntMatrix,
}

/// A relative Grothendieck group together with the presentation that
/// produced it.
#[derive(Debug, Clone)]
pub struct RelativeK0 {
    /// Free group on the object labels modulo the Euler relations.
    pub group: FpGroup,
    /// The distinct nonzero Euler relations imposed, in first-seen order.
    pub relations: Vec<K0Element>,
    /// How many conflations (stored plus synthesized) lie in the relative
    /// structure, before deduplication of their Euler classes.
    pub conflations_in_structure: usize,
}

impl Category {
    /// Builds the category of the polygon model with `rank` mutable arcs.
    ///
    /// Objects are the arcs; hom dimensions, the suspension, and the
    /// conflations (one pair per crossing of two arcs, plus the split
    /// conflations of two-summand middles) come from the model. All lists
    /// are emitted in arc order, so the output is deterministic.
    pub fn from_polygon(rank: usize) -> Category {
        let polygon = Polygon::new(rank);
        let arcs = polygon.arcs();
        let objects: Vec<String> = arcs.iter().map(Arc::label).collect();

        let mut hom = Vec::new();
        for a in &arcs {
            for b in &arcs {
                let dim = polygon.hom_dim(*a, *b);
                if dim > 0 {
                    hom.push((a.label(), b.label(), dim));
                }
            }
        }

        let suspension = arcs
            .iter()
            .map(|a| (a.label(), polygon.suspend(*a, 1).label()))
            .collect();

        let mut conflations = Vec::new();
        for (i, a) in arcs.iter().enumerate() {
            for b in &arcs[i + 1..] {
                if !polygon.cross(*a, *b) {
                    continue;
                }
                let (first, second) = polygon
                    .exchange_triangles(*a, *b)
                    .expect("crossing arcs admit exchange triangles");
                conflations.push(conflation_of_triangle(&polygon, &first));
                conflations.push(conflation_of_triangle(&polygon, &second));
            }
        }
        for (i, a) in arcs.iter().enumerate() {
            for b in &arcs[i + 1..] {
                conflations.push(ConflationData {
                    terms: vec![
                        vec![a.label()],
                        vec![a.label(), b.label()],
                        vec![b.label()],
                    ],
                    delta_nonvanishing: Vec::new(),
                });
            }
        }

        let data = CategoryData {
            d: 1,
            objects,
            hom,
            suspension: Some(suspension),
            conflations,
        };
        Category::validated(data, CategorySource::Polygon(polygon))
            .expect("generated category data is valid")
    }

    /// Validates explicit category data.
    pub fn from_data(data: CategoryData) -> Result<Category, ExangError> {
        Category::validated(data, CategorySource::Loaded)
    }

    /// Parses and validates a JSON category description. Unknown fields are
    /// rejected.
    pub fn from_json(text: &str) -> Result<Category, ExangError> {
        let data: CategoryData = serde_json::from_str(text)?;
        Category::validated(data, CategorySource::Loaded)
    }

    /// Serializes the category: pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(&self.data).expect("category data serializes");
        text.push('\n');
        text
    }

    fn validated(data: CategoryData, source: CategorySource) -> Result<Category, ExangError> {
        if data.d == 0 {
            return Err(ExangError::Validation(
                "conflation length d must be at least 1".into(),
            ));
        }
        let mut index = BTreeMap::new();
        for (k, label) in data.objects.iter().enumerate() {
            if label.is_empty() {
                return Err(ExangError::Validation("empty object label".into()));
            }
            if index.insert(label.clone(), k).is_some() {
                return Err(ExangError::Validation(format!(
                    "duplicate object label `{label}`"
                )));
            }
        }

        let n = data.objects.len();
        let mut hom = IntMatrix::zero(n, n);
        let mut seen_pairs = BTreeSet::new();
        for (src, tgt, dim) in &data.hom {
            let s = *index
                .get(src)
                .ok_or_else(|| ExangError::UnknownObject(src.clone()))?;
            let t = *index
                .get(tgt)
                .ok_or_else(|| ExangError::UnknownObject(tgt.clone()))?;
            if !seen_pairs.insert((s, t)) {
                return Err(ExangError::Validation(format!(
                    "duplicate hom entry `{src}` -> `{tgt}`"
                )));
            }
            hom[(s, t)] = BigInt::from(*dim);
        }

        let mut suspension_map = BTreeMap::new();
        if let Some(pairs) = &data.suspension {
            for (from, to) in pairs {
                if !index.contains_key(from) {
                    return Err(ExangError::UnknownObject(from.clone()));
                }
                if !index.contains_key(to) {
                    return Err(ExangError::UnknownObject(to.clone()));
                }
                if suspension_map.insert(from.clone(), to.clone()).is_some() {
                    return Err(ExangError::Validation(format!(
                        "suspension defined twice on `{from}`"
                    )));
                }
            }
        }

        for (k, conflation) in data.conflations.iter().enumerate() {
            if conflation.terms.len() != data.d + 2 {
                return Err(ExangError::Validation(format!(
                    "conflation {k} has {} terms, expected {}",
                    conflation.terms.len(),
                    data.d + 2
                )));
            }
            for label in conflation
                .terms
                .iter()
                .flatten()
                .chain(&conflation.delta_nonvanishing)
            {
                if !index.contains_key(label) {
                    return Err(ExangError::UnknownObject(label.clone()));
                }
            }
        }

        Ok(Category {
            data,
            source,
            index,
            suspension_map,
            hom,
        })
    }

    /// Conflation length minus two.
    pub fn d(&self) -> usize {
        self.data.d
    }

    /// The object labels, in presentation order.
    pub fn objects(&self) -> &[String] {
        &self.data.objects
    }

    /// Position of `label` among the objects.
    pub fn object_index(&self, label: &str) -> Result<usize, ExangError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| ExangError::UnknownObject(label.to_owned()))
    }

    /// Dimension of the hom space from `source` to `target`.
    pub fn hom_dim(&self, source: &str, target: &str) -> Result<usize, ExangError> {
        let s = self.object_index(source)?;
        let t = self.object_index(target)?;
        Ok(self.hom[(s, t)].to_usize().expect("hom dims fit usize"))
    }

    /// The suspension of `label`, when the data records one.
    pub fn suspension_of(&self, label: &str) -> Option<&str> {
        self.suspension_map.get(label).map(String::as_str)
    }

    /// The stored conflations.
    pub fn conflations(&self) -> &[ConflationData] {
        &self.data.conflations
    }

    /// The underlying polygon model, for generated categories.
    pub fn polygon(&self) -> Option<&Polygon> {
        match &self.source {
            CategorySource::Polygon(p) => Some(p),
            CategorySource::Loaded => None,
        }
    }

    /// The serializable form of the category.
    pub fn data(&self) -> &CategoryData {
        &self.data
    }

    /// The Euler class of a conflation: the alternating sum of its terms,
    /// first term positive.
    pub fn euler_class(&self, conflation: &ConflationData) -> K0Element {
        let mut total = K0Element::zero();
        let mut sign = BigInt::one();
        for term in &conflation.terms {
            for label in term {
                total.add_term(label, &sign);
            }
            sign = -sign;
        }
        total
    }

    /// Indices into [`Self::conflations`] of the conflations whose
    /// connecting map vanishes on every object of `relative_to`.
    pub fn conflations_relative_to(
        &self,
        relative_to: &[String],
    ) -> Result<Vec<usize>, ExangError> {
        let avoid = self.label_set(relative_to)?;
        Ok(self
            .data
            .conflations
            .iter()
            .enumerate()
            .filter(|(_, c)| conflation_avoids(c, &avoid))
            .map(|(k, _)| k)
            .collect())
    }

    /// The split Grothendieck group: free on the object labels.
    pub fn split_k0(&self) -> FpGroup {
        FpGroup::free(self.data.objects.clone()).expect("object labels are distinct")
    }

    /// The Grothendieck group of the structure relative to `relative_to`.
    ///
    /// The group is the split group modulo the Euler classes of every
    /// conflation in the relative structure. Stored conflations always
    /// contribute; for a polygon-generated category and
    /// `saturation_bound >= 2`, synthesized conflations with end terms of up
    /// to `saturation_bound` summands contribute as well.
    pub fn relative_k0(
        &self,
        relative_to: &[String],
        saturation_bound: usize,
    ) -> Result<RelativeK0, ExangError> {
        let synthesized = self.synthesized_conflations(saturation_bound)?;
        self.relative_k0_with(relative_to, &synthesized)
    }

    /// Like [`Self::relative_k0`], but taking pre-synthesized conflations so
    /// that many relative structures can reuse one synthesis pass.
    pub fn relative_k0_with(
        &self,
        relative_to: &[String],
        synthesized: &[ConflationData],
    ) -> Result<RelativeK0, ExangError> {
        let avoid = self.label_set(relative_to)?;
        let mut seen = BTreeSet::new();
        let mut relations = Vec::new();
        let mut conflations_in_structure = 0usize;
        for conflation in self.data.conflations.iter().chain(synthesized) {
            if !conflation_avoids(conflation, &avoid) {
                continue;
            }
            conflations_in_structure += 1;
            let euler = self.euler_class(conflation);
            if euler.is_zero() {
                continue;
            }
            let vector = euler.to_vector(&self.data.objects)?;
            if seen.insert(vector) {
                relations.push(euler);
            }
        }
        let group = FpGroup::with_relation_elements(self.data.objects.clone(), &relations)?;
        Ok(RelativeK0 {
            group,
            relations,
            conflations_in_structure,
        })
    }

    /// Checks that raising the saturation bound from `low` to `high` does
    /// not enlarge the relation subgroup relative to `relative_to`: every
    /// Euler relation arising at bound `high` must already lie in the
    /// subgroup generated by the relations at bound `low`.
    pub fn saturation_stable(
        &self,
        relative_to: &[String],
        low: usize,
        high: usize,
    ) -> Result<bool, ExangError> {
        let base = self.relative_k0(relative_to, low)?;
        let richer = self.relative_k0(relative_to, high)?;
        for relation in &richer.relations {
            if !base.group.member(relation)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Synthesizes conflations with decomposable end terms for a
    /// polygon-generated category.
    ///
    /// Candidates `A -> B -> C` range over end multisets `A`, `C` of one up
    /// to `bound` arcs and over all supports of a connecting map `C -> ΣA`
    /// that touch every summand of both ends. Component scalars are treated
    /// as generic: the rank of a map induced on hom spaces is the maximum
    /// matching of its support, which determines the middle term `B` through
    /// the long exact sequence, and the connecting map is nonzero at an
    /// object exactly when some component composite is. For a loaded
    /// category, or for `bound < 2`, the result is empty.
    pub fn synthesized_conflations(
        &self,
        bound: usize,
    ) -> Result<Vec<ConflationData>, ExangError> {
        let CategorySource::Polygon(polygon) = &self.source else {
            return Ok(Vec::new());
        };
        if bound < 2 {
            return Ok(Vec::new());
        }
        let polygon = *polygon;
        let arcs = polygon.arcs();
        let snf = smith_normal_form(&self.hom);
        if snf.rank < arcs.len() {
            return Err(ExangError::SingularHom);
        }

        let mut ends: Vec<Vec<Arc>> = Vec::new();
        for size in 1..=bound {
            ends.extend(arcs.iter().copied().combinations_with_replacement(size));
        }

        let mut out = Vec::new();
        for left in &ends {
            for right in &ends {
                self.synthesize_pair(&polygon, &arcs, &snf, left, right, &mut out)?;
            }
        }
        Ok(out)
    }

    fn synthesize_pair(
        &self,
        polygon: &Polygon,
        arcs: &[Arc],
        snf: &SmithDecomposition,
        left: &[Arc],
        right: &[Arc],
        out: &mut Vec<ConflationData>,
    ) -> Result<(), ExangError> {
        let suspended: Vec<Arc> = left.iter().map(|a| polygon.suspend(*a, 1)).collect();
        let desuspended: Vec<Arc> = right.iter().map(|c| polygon.suspend(*c, -1)).collect();

        // Positions where a connecting-map component C_j -> ΣA_i can live.
        let mut slots = Vec::new();
        for (i, s) in suspended.iter().enumerate() {
            for (j, r) in right.iter().enumerate() {
                if polygon.hom_dim(*r, *s) > 0 {
                    slots.push((i, j));
                }
            }
        }
        if slots.len() < left.len().max(right.len()) {
            return Ok(());
        }
        if slots.len() > MAX_PATTERN_SLOTS {
            return Err(ExangError::Validation(format!(
                "{} connecting-map components between {}-summand ends; \
                 lower the saturation bound",
                slots.len(),
                left.len().max(right.len())
            )));
        }

        'patterns: for mask in 1u64..(1u64 << slots.len()) {
            let picked: Vec<(usize, usize)> = slots
                .iter()
                .enumerate()
                .filter(|(s, _)| mask >> *s & 1 == 1)
                .map(|(_, ij)| *ij)
                .collect();
            // A summand of either end missed by every component would split
            // off, contributing nothing new; skip such supports.
            for i in 0..left.len() {
                if !picked.iter().any(|(r, _)| *r == i) {
                    continue 'patterns;
                }
            }
            for j in 0..right.len() {
                if !picked.iter().any(|(_, c)| *c == j) {
                    continue 'patterns;
                }
            }
            out.push(self.middle_term_of_pattern(
                polygon,
                arcs,
                snf,
                left,
                right,
                &suspended,
                &desuspended,
                &picked,
            )?);
        }
        Ok(())
    }

    /// Builds the conflation `A -> B -> C` for one connecting-map support,
    /// reconstructing `B` from hom-space dimensions.
    ///
    /// For each object `z`, the long exact sequence gives
    /// `dim Hom(z, B) = dim Hom(z, A) - rank(u_z) + dim Hom(z, C) - rank(v_z)`
    /// where `v_z` composes with the connecting map and `u_z` with its
    /// desuspension; both ranks are maximum matchings of the nonzero
    /// component composites. The multiset `B` is then the unique solution of
    /// the hom-matrix system.
    #[allow(clippy::too_many_arguments)]
    fn middle_term_of_pattern(
        &self,
        polygon: &Polygon,
        arcs: &[Arc],
        snf: &SmithDecomposition,
        left: &[Arc],
        right: &[Arc],
        suspended: &[Arc],
        desuspended: &[Arc],
        picked: &[(usize, usize)],
    ) -> Result<ConflationData, ExangError> {
        let describe = || {
            format!(
                "{} -> ? -> {} with components {:?}",
                left.iter().map(Arc::label).join(" + "),
                right.iter().map(Arc::label).join(" + "),
                picked
            )
        };

        let mut dims = Vec::with_capacity(arcs.len());
        let mut delta = Vec::new();
        for z in arcs {
            let into_left = left.iter().filter(|a| polygon.hom_dim(*z, **a) > 0).count();
            let into_right = right
                .iter()
                .filter(|c| polygon.hom_dim(*z, **c) > 0)
                .count();
            let forward: Vec<(usize, usize)> = picked
                .iter()
                .copied()
                .filter(|(i, j)| polygon.compose_nonzero(*z, right[*j], suspended[*i]))
                .collect();
            let backward: Vec<(usize, usize)> = picked
                .iter()
                .copied()
                .filter(|(i, j)| polygon.compose_nonzero(*z, desuspended[*j], left[*i]))
                .collect();
            if !forward.is_empty() {
                delta.push(z.label());
            }
            let lost = max_matching(left.len(), right.len(), &forward)
                + max_matching(left.len(), right.len(), &backward);
            let dim = (into_left + into_right)
                .checked_sub(lost)
                .ok_or_else(|| ExangError::NoMiddleTerm(describe()))?;
            dims.push(BigInt::from(dim));
        }

        let middle = snf
            .solve(&dims)
            .ok_or_else(|| ExangError::NoMiddleTerm(describe()))?;
        let mut middle_labels = Vec::new();
        for (k, count) in middle.iter().enumerate() {
            if count.is_negative() {
                return Err(ExangError::NoMiddleTerm(describe()));
            }
            let count = count.to_usize().ok_or_else(|| ExangError::NoMiddleTerm(describe()))?;
            middle_labels.extend(std::iter::repeat(arcs[k].label()).take(count));
        }

        Ok(ConflationData {
            terms: vec![
                left.iter().map(Arc::label).collect(),
                middle_labels,
                right.iter().map(Arc::label).collect(),
            ],
            delta_nonvanishing: delta,
        })
    }

    fn label_set<'a>(&self, labels: &'a [String]) -> Result<BTreeSet<&'a str>, ExangError> {
        let mut set = BTreeSet::new();
        for label in labels {
            if !self.index.contains_key(label) {
                return Err(ExangError::UnknownObject(label.clone()));
            }
            set.insert(label.as_str());
        }
        Ok(set)
    }
}

fn conflation_avoids(conflation: &ConflationData, avoid: &BTreeSet<&str>) -> bool {
    conflation
        .delta_nonvanishing
        .iter()
        .all(|w| !avoid.contains(w.as_str()))
}

fn conflation_of_triangle(polygon: &Polygon, tri: &Triangle) -> ConflationData {
    let mut middles = tri.middles.clone();
    middles.sort();
    ConflationData {
        terms: vec![
            vec![tri.x.label()],
            middles.iter().map(Arc::label).collect(),
            vec![tri.y.label()],
        ],
        delta_nonvanishing: polygon
            .delta_witnesses(tri)
            .iter()
            .map(Arc::label)
            .collect(),
    }
}

/// Maximum bipartite matching size between `rows` left and `cols` right
/// vertices over the given edges, by augmenting paths.
fn max_matching(rows: usize, cols: usize, edges: &[(usize, usize)]) -> usize {
    let mut adjacency = vec![Vec::new(); rows];
    for (i, j) in edges {
        adjacency[*i].push(*j);
    }
    let mut matched_row = vec![usize::MAX; cols];
    let mut size = 0;
    for row in 0..rows {
        let mut visited = vec![false; cols];
        if augment(row, &adjacency, &mut visited, &mut matched_row) {
            size += 1;
        }
    }
    size
}

fn augment(
    row: usize,
    adjacency: &[Vec<usize>],
    visited: &mut [bool],
    matched_row: &mut [usize],
) -> bool {
    for &col in &adjacency[row] {
        if visited[col] {
            continue;
        }
        visited[col] = true;
        if matched_row[col] == usize::MAX
            || augment(matched_row[col], adjacency, visited, matched_row)
        {
            matched_row[col] = row;
            return true;
        }
    }
    false
}
