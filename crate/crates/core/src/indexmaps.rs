//! Indices with respect to a triangulation, mutation data, exchange
//! subgroups, and the lattice of comparison homomorphisms between relative
//! Grothendieck groups.
//!
//! Throughout, `T` is a triangulation of the polygon and `X ⊆ T` a chosen
//! subset of its arcs. The groups in play are:
//!
//! * `K₀^sp(S)` — split group, free on all arcs;
//! * `K₀(S, E_D, s_D)` — the relative group for `D ∈ {∅, T, X}`, presented
//!   by Euler relations (see [`crate::exang`]);
//! * `K₀^sp(T)` — free on the arcs of `T`;
//! * `K₀^sp(T)/N_X` — the quotient by the exchange subgroup;
//! * `K₀(fl T)`, `K₀(fl X)` — free on the simple modules of the
//!   triangulation, labelled `S(i,j)`.
//!
//! [`HomBundle`] assembles every comparison map between these groups and
//! [`HomBundle::face_checks`] verifies each commuting face, each
//! mutual-inverse pair, each surjectivity claim, and the isomorphism claims
//! exactly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::abelian::{AbelianError, FpGroup, GroupHom, K0Element};
use crate::arcmodel::{Arc, ArcError, Polygon, Triangle};
use crate::exang::{Category, ConflationData, ExangError};

/// Errors from index and comparison-map computations.
#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    /// The operation needs the polygon model behind the category.
    #[error("this computation requires a polygon-generated category")]
    NotPolygonal,
    /// `X` must consist of arcs of the triangulation.
    #[error("arc `{0}` is not part of the triangulation")]
    NotInTriangulation(String),
    /// A structural property of the model failed; indicates a bug.
    #[error("model violation: {0}")]
    ModelViolation(String),
    /// Construction of a named comparison map failed its well-definedness
    /// check; quotes the offending map.
    #[error("construction of `{map}` failed: {source}")]
    Construction {
        /// Which comparison map could not be built.
        map: &'static str,
        /// The underlying failure.
        #[source]
        source: AbelianError,
    },
    /// An error from the polygon model.
    #[error(transparent)]
    Arc(#[from] ArcError),
    /// An error from the category layer.
    #[error(transparent)]
    Exang(#[from] ExangError),
    /// An error from the group layer.
    #[error(transparent)]
    Abelian(#[from] AbelianError),
}

/// The label of the simple module sitting at an arc of the triangulation.
pub fn simple_label(arc: Arc) -> String {
    format!("S{}", arc.label())
}

/// The two exchange triangles obtained by mutating a triangulation at one
/// of its arcs.
#[derive(Debug, Clone)]
pub struct MutationData {
    /// The arc removed from the triangulation.
    pub replaced: Arc,
    /// The unique other arc completing the rest to a triangulation.
    pub replacement: Arc,
    /// The triangle `replaced → Y → replacement`, with `Y` inside the
    /// remaining triangulation.
    pub y_triangle: Triangle,
    /// The triangle `replacement → X → replaced`, with `X` inside the
    /// remaining triangulation.
    pub x_triangle: Triangle,
}

/// The index of a single arc: the alternating class `[T₁] − [T₀]` of its
/// resolution by the triangulation, written over the arc labels of `t`.
pub fn index_element(polygon: &Polygon, t: &[Arc], c: Arc) -> Result<K0Element, IndexError> {
    let resolution = polygon.index_resolution(t, c)?;
    let mut e = K0Element::zero();
    let one = BigInt::one();
    for arc in &resolution.t1 {
        e.add_term(&arc.label(), &one);
    }
    for arc in &resolution.t0 {
        e.add_term(&arc.label(), &(-&one));
    }
    Ok(e)
}

/// The index of a direct sum of arcs, additively extended.
pub fn index_of_sum(polygon: &Polygon, t: &[Arc], summands: &[Arc]) -> Result<K0Element, IndexError> {
    let mut total = K0Element::zero();
    for c in summands {
        total = &total + &index_element(polygon, t, *c)?;
    }
    Ok(total)
}

/// Mutates the triangulation `t` at its arc `arc`: flips the arc and
/// returns the two exchange triangles, oriented so that the middle terms
/// lie in the untouched part of the triangulation.
pub fn mutation(polygon: &Polygon, t: &[Arc], arc: Arc) -> Result<MutationData, IndexError> {
    let t = polygon.validate_triangulation(t)?;
    let replacement = polygon.flip(&t, arc)?;
    let (first, second) = polygon.exchange_triangles(arc, replacement)?;
    let (y_triangle, x_triangle) = if first.x == arc {
        (first, second)
    } else {
        (second, first)
    };
    if y_triangle.x != arc || y_triangle.y != replacement {
        return Err(IndexError::ModelViolation(format!(
            "exchange triangle out of {} has unexpected ends",
            arc.label()
        )));
    }
    let rest: Vec<Arc> = t.iter().copied().filter(|u| *u != arc).collect();
    for m in y_triangle.middles.iter().chain(&x_triangle.middles) {
        if !rest.contains(m) {
            return Err(IndexError::ModelViolation(format!(
                "exchange middle {} escapes the triangulation",
                m.label()
            )));
        }
    }
    for tri in [&y_triangle, &x_triangle] {
        if polygon.delta_witnesses(tri).is_empty() {
            return Err(IndexError::ModelViolation(
                "exchange triangle with vanishing connecting map".into(),
            ));
        }
    }
    Ok(MutationData {
        replaced: arc,
        replacement,
        y_triangle,
        x_triangle,
    })
}

/// Generators of the exchange subgroup `N_X ≤ K₀^sp(T)`: one element
/// `[X] − [Y]` per mutable arc `t ∈ T \ X`, where `Y` and `X` are the
/// middle terms of its two exchange triangles.
pub fn n_subgroup_generators(
    polygon: &Polygon,
    t: &[Arc],
    x: &[Arc],
) -> Result<Vec<K0Element>, IndexError> {
    let t = polygon.validate_triangulation(t)?;
    let x = subset_of(&t, x)?;
    let one = BigInt::one();
    let mut generators = Vec::new();
    for arc in t.iter().filter(|a| !x.contains(a)) {
        let m = mutation(polygon, &t, *arc)?;
        let mut g = K0Element::zero();
        for mid in &m.x_triangle.middles {
            g.add_term(&mid.label(), &one);
        }
        for mid in &m.y_triangle.middles {
            g.add_term(&mid.label(), &(-&one));
        }
        generators.push(g);
    }
    Ok(generators)
}

/// The value of θ on the simple at `arc ∈ T`: the class `[Y] − [X]` of the
/// exchange middles, in `K₀^sp(T)`.
pub fn theta_on_simple(polygon: &Polygon, t: &[Arc], arc: Arc) -> Result<K0Element, IndexError> {
    let m = mutation(polygon, t, arc)?;
    let one = BigInt::one();
    let mut e = K0Element::zero();
    for mid in &m.y_triangle.middles {
        e.add_term(&mid.label(), &one);
    }
    for mid in &m.x_triangle.middles {
        e.add_term(&mid.label(), &(-&one));
    }
    Ok(e)
}

/// The class in `K₀(fl T)` of the image of a triangle's connecting map
/// under the hom functor of the triangulation: the sum of the simples at
/// the arcs of `t` where the connecting composite is nonzero.
pub fn connecting_image_class(polygon: &Polygon, t: &[Arc], tri: &Triangle) -> K0Element {
    let witnesses = polygon.delta_witnesses(tri);
    let one = BigInt::one();
    let mut class = K0Element::zero();
    for arc in t {
        if witnesses.contains(arc) {
            class.add_term(&simple_label(*arc), &one);
        }
    }
    class
}

/// Checks that the alternating index sum around a triangle equals θ of the
/// image module of its connecting map:
/// `ind(x) − ind(middles) + ind(y) = Σ θ([S_u])` over the arcs `u` of the
/// triangulation where the connecting composite is nonzero. Both sides live
/// in the free group `K₀^sp(T)`, so equality is literal.
pub fn index_defect_matches_connecting_image(
    polygon: &Polygon,
    t: &[Arc],
    tri: &Triangle,
) -> Result<bool, IndexError> {
    let t = polygon.validate_triangulation(t)?;
    let lhs = {
        let ends = index_of_sum(polygon, &t, &[tri.x, tri.y])?;
        let mid = index_of_sum(polygon, &t, &tri.middles)?;
        &ends - &mid
    };
    let witnesses = polygon.delta_witnesses(tri);
    let mut rhs = K0Element::zero();
    for arc in t.iter().filter(|u| witnesses.contains(u)) {
        rhs = &rhs + &theta_on_simple(polygon, &t, *arc)?;
    }
    Ok(lhs == rhs)
}

/// One commutativity, inverse, surjectivity, or isomorphism claim about the
/// comparison maps, with its outcome.
#[derive(Debug, Clone)]
pub struct FaceCheck {
    /// What was checked, as a stable identifier.
    pub name: &'static str,
    /// Whether the claim holds exactly.
    pub holds: bool,
}

/// Every group and comparison homomorphism attached to a pair `X ⊆ T`, with
/// all well-definedness checks performed at construction.
#[derive(Debug, Clone)]
pub struct HomBundle {
    polygon: Polygon,
    t_arcs: Vec<Arc>,
    x_arcs: Vec<Arc>,
    /// `K₀^sp(S)`: free on all arc labels.
    pub split_all: FpGroup,
    /// `K₀(S, E, s)`: relative group of the full structure (`D = ∅`).
    pub ambient: FpGroup,
    /// `K₀(S, E_T, s_T)`.
    pub relative_t: FpGroup,
    /// `K₀(S, E_X, s_X)`.
    pub relative_x: FpGroup,
    /// `K₀^sp(T)`: free on the arcs of the triangulation.
    pub split_t: FpGroup,
    /// `K₀^sp(T)/N_X`.
    pub split_t_mod_n: FpGroup,
    /// `K₀(fl T)`: free on the simples of the triangulation.
    pub finite_length_t: FpGroup,
    /// `K₀(fl X)`: free on the simples at arcs of `X`.
    pub finite_length_x: FpGroup,
    /// Quotient `K₀^sp(S) → K₀(S, E, s)`.
    pub q_ambient: GroupHom,
    /// Quotient `K₀^sp(S) → K₀(S, E_T, s_T)`.
    pub q_t: GroupHom,
    /// Quotient `K₀^sp(S) → K₀(S, E_X, s_X)`.
    pub q_x: GroupHom,
    /// Quotient `K₀(S, E_T, s_T) → K₀(S, E_X, s_X)` (more relations).
    pub q_tilde: GroupHom,
    /// Quotient `K₀(S, E_X, s_X) → K₀(S, E, s)` (all relations).
    pub to_ambient: GroupHom,
    /// The index `K₀^sp(S) → K₀^sp(T)`, arc by arc.
    pub index_hom: GroupHom,
    /// The index descended to `K₀(S, E_T, s_T) → K₀^sp(T)`; its
    /// well-definedness is the additivity of the index on the relative
    /// structure of the triangulation.
    pub descended_index: GroupHom,
    /// `L: K₀^sp(T) → K₀(S, E_T, s_T)`, `[t] ↦ [t]`; inverse to the
    /// descended index.
    pub l_hom: GroupHom,
    /// Quotient `K₀^sp(T) → K₀^sp(T)/N_X`.
    pub q_n: GroupHom,
    /// `G_X: K₀^sp(T)/N_X → K₀(S, E_X, s_X)`, `[t] ↦ [t]`.
    pub g_iso: GroupHom,
    /// `θ: K₀(fl T) → K₀^sp(T)`, simple at `t` to `[Y] − [X]`.
    pub theta: GroupHom,
    /// `φ̄`: same values as θ; kept as its own arrow of the diagram.
    pub phibar: GroupHom,
    /// `ψ̄ = L ∘ φ̄: K₀(fl T) → K₀(S, E_T, s_T)`.
    pub psibar: GroupHom,
    /// `κ: K₀(fl T) → K₀(fl X)`: keeps simples at arcs of `X`, kills the
    /// rest.
    pub kappa: GroupHom,
    /// `ψ: K₀(fl X) → K₀(S, E_X, s_X)`: the unique factorization of
    /// `Q̃ ∘ ψ̄` through κ.
    pub psi: GroupHom,
}

fn subset_of(t: &[Arc], x: &[Arc]) -> Result<Vec<Arc>, IndexError> {
    let mut out = Vec::new();
    for arc in x {
        if !t.contains(arc) {
            return Err(IndexError::NotInTriangulation(arc.label()));
        }
        if !out.contains(arc) {
            out.push(*arc);
        }
    }
    out.sort();
    Ok(out)
}

fn build_map(
    name: &'static str,
    source: &FpGroup,
    target: &FpGroup,
    images: &BTreeMap<String, K0Element>,
) -> Result<GroupHom, IndexError> {
    GroupHom::induced(source, target, images).map_err(|source| IndexError::Construction {
        map: name,
        source,
    })
}

impl HomBundle {
    /// Builds every group and comparison map for the pair `x ⊆ t` in a
    /// polygon-generated category.
    ///
    /// `synthesized` is a list of extra conflations (from
    /// [`Category::synthesized_conflations`]) to impose alongside the stored
    /// ones in each relative group; pass `&[]` to present the groups by the
    /// stored conflations only.
    ///
    /// Construction already verifies well-definedness of each arrow, which
    /// covers the additivity of the index on the relative structure of `t`
    /// (`descended_index`) and the vanishing of the exchange subgroup in the
    /// relative group of `x` (`g_iso`). The remaining claims are checked by
    /// [`HomBundle::face_checks`].
    pub fn build(
        category: &Category,
        t: &[Arc],
        x: &[Arc],
        synthesized: &[ConflationData],
    ) -> Result<HomBundle, IndexError> {
        let polygon = *category.polygon().ok_or(IndexError::NotPolygonal)?;
        let t_arcs = polygon.validate_triangulation(t)?;
        let x_arcs = subset_of(&t_arcs, x)?;
        let t_labels: Vec<String> = t_arcs.iter().map(Arc::label).collect();
        let x_labels: Vec<String> = x_arcs.iter().map(Arc::label).collect();

        // The groups.
        let split_all = category.split_k0();
        let ambient = category.relative_k0_with(&[], synthesized)?.group;
        let relative_t = category.relative_k0_with(&t_labels, synthesized)?.group;
        let relative_x = category.relative_k0_with(&x_labels, synthesized)?.group;
        let split_t = FpGroup::free(t_labels.clone())?;
        let n_generators = n_subgroup_generators(&polygon, &t_arcs, &x_arcs)?;
        let split_t_mod_n = split_t.quotient(&n_generators)?;
        let finite_length_t =
            FpGroup::free(t_arcs.iter().map(|a| simple_label(*a)).collect())?;
        let finite_length_x =
            FpGroup::free(x_arcs.iter().map(|a| simple_label(*a)).collect())?;

        // Images of the arcs under the index and under the quotients.
        let mut inclusion = BTreeMap::new();
        let mut index_images = BTreeMap::new();
        for label in category.objects() {
            inclusion.insert(label.clone(), K0Element::generator(label));
            let arc = polygon.parse_arc(label)?;
            index_images.insert(label.clone(), index_element(&polygon, &t_arcs, arc)?);
        }
        let mut t_inclusion = BTreeMap::new();
        for label in &t_labels {
            t_inclusion.insert(label.clone(), K0Element::generator(label));
        }

        let q_ambient = build_map("q_ambient", &split_all, &ambient, &inclusion)?;
        let q_t = build_map("q_t", &split_all, &relative_t, &inclusion)?;
        let q_x = build_map("q_x", &split_all, &relative_x, &inclusion)?;
        let q_tilde = build_map("q_tilde", &relative_t, &relative_x, &inclusion)?;
        let to_ambient = build_map("to_ambient", &relative_x, &ambient, &inclusion)?;
        let index_hom = build_map("index_hom", &split_all, &split_t, &index_images)?;
        let descended_index =
            build_map("descended_index", &relative_t, &split_t, &index_images)?;
        let l_hom = build_map("l_hom", &split_t, &relative_t, &t_inclusion)?;
        let q_n = build_map("q_n", &split_t, &split_t_mod_n, &t_inclusion)?;
        let g_iso = build_map("g_iso", &split_t_mod_n, &relative_x, &t_inclusion)?;

        // Maps out of the module-category groups, simple by simple.
        let mut theta_images = BTreeMap::new();
        let mut kappa_images = BTreeMap::new();
        for arc in &t_arcs {
            let label = simple_label(*arc);
            theta_images.insert(label.clone(), theta_on_simple(&polygon, &t_arcs, *arc)?);
            let kappa_image = if x_arcs.contains(arc) {
                K0Element::generator(&label)
            } else {
                K0Element::zero()
            };
            kappa_images.insert(label, kappa_image);
        }
        let theta = build_map("theta", &finite_length_t, &split_t, &theta_images)?;
        let phibar = build_map("phibar", &finite_length_t, &split_t, &theta_images)?;
        let psibar = phibar
            .then(&l_hom)
            .map_err(|source| IndexError::Construction {
                map: "psibar",
                source,
            })?;
        let kappa = build_map("kappa", &finite_length_t, &finite_length_x, &kappa_images)?;

        let mut psi_images = BTreeMap::new();
        for arc in &x_arcs {
            let label = simple_label(*arc);
            let through_t = psibar.apply(&K0Element::generator(&label))?;
            psi_images.insert(label, q_tilde.apply(&through_t)?);
        }
        let psi = build_map("psi", &finite_length_x, &relative_x, &psi_images)?;

        Ok(HomBundle {
            polygon,
            t_arcs,
            x_arcs,
            split_all,
            ambient,
            relative_t,
            relative_x,
            split_t,
            split_t_mod_n,
            finite_length_t,
            finite_length_x,
            q_ambient,
            q_t,
            q_x,
            q_tilde,
            to_ambient,
            index_hom,
            descended_index,
            l_hom,
            q_n,
            g_iso,
            theta,
            phibar,
            psibar,
            kappa,
            psi,
        })
    }

    /// The polygon model behind the bundle.
    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    /// The arcs of the triangulation, sorted.
    pub fn t_arcs(&self) -> &[Arc] {
        &self.t_arcs
    }

    /// The arcs of the chosen subset, sorted.
    pub fn x_arcs(&self) -> &[Arc] {
        &self.x_arcs
    }

    /// Verifies every face of the comparison diagram, the mutual-inverse
    /// pair, the surjectivity claims, and the isomorphism claims. Map
    /// equality is taken in the target group (coordinate representatives
    /// may differ by relations).
    pub fn face_checks(&self) -> Result<Vec<FaceCheck>, IndexError> {
        let mut out = Vec::new();
        let mut push = |name: &'static str, holds: bool| out.push(FaceCheck { name, holds });

        push(
            "relativize-in-stages",
            self.q_t.then(&self.q_tilde)?.equal_to(&self.q_x),
        );
        push(
            "relax-to-ambient",
            self.q_x.then(&self.to_ambient)?.equal_to(&self.q_ambient),
        );
        push(
            "index-descends",
            self.q_t.then(&self.descended_index)?.equal_to(&self.index_hom),
        );
        push(
            "section-then-index-is-identity",
            self.l_hom.then(&self.descended_index)?.is_identity(),
        );
        push(
            "index-then-section-is-identity",
            self.descended_index.then(&self.l_hom)?.is_identity(),
        );
        push(
            "exchange-quotient-compatible",
            self.q_n
                .then(&self.g_iso)?
                .equal_to(&self.l_hom.then(&self.q_tilde)?),
        );
        push(
            "psibar-factors-through-section",
            self.phibar.then(&self.l_hom)?.equal_to(&self.psibar),
        );
        push(
            "psi-factors-through-kappa",
            self.kappa
                .then(&self.psi)?
                .equal_to(&self.psibar.then(&self.q_tilde)?),
        );
        push("descended-index-is-isomorphism", self.descended_index.is_isomorphism());
        push("comparison-is-isomorphism", self.g_iso.is_isomorphism());
        push(
            "quotient-groups-agree",
            self.split_t_mod_n.is_isomorphic_to(&self.relative_x),
        );
        push("q-ambient-surjective", self.q_ambient.is_surjective());
        push("q-t-surjective", self.q_t.is_surjective());
        push("q-x-surjective", self.q_x.is_surjective());
        push("q-tilde-surjective", self.q_tilde.is_surjective());
        push("to-ambient-surjective", self.to_ambient.is_surjective());
        push("index-surjective", self.index_hom.is_surjective());
        push("exchange-quotient-surjective", self.q_n.is_surjective());
        push("kappa-surjective", self.kappa.is_surjective());
        Ok(out)
    }

    /// Checks the projection formula for the object with the given
    /// summands: `ψ([F_X(C)]) = Q_X([C] + [Σ⁻¹C])`, where `F_X(C)` is the
    /// module of maps out of `X` into `C`. Equality is taken in
    /// `K₀(S, E_X, s_X)`.
    pub fn module_class_formula_holds(&self, summands: &[Arc]) -> Result<bool, IndexError> {
        let one = BigInt::one();
        let mut module_class = K0Element::zero();
        for arc in &self.x_arcs {
            for c in summands {
                if self.polygon.hom_dim(*arc, *c) > 0 {
                    module_class.add_term(&simple_label(*arc), &one);
                }
            }
        }
        let lhs = self.psi.apply(&module_class)?;
        let mut split_class = K0Element::zero();
        for c in summands {
            split_class.add_term(&c.label(), &one);
            split_class.add_term(&self.polygon.suspend(*c, -1).label(), &one);
        }
        let rhs = self.q_x.apply(&split_class)?;
        Ok(self.relative_x.elements_equal(&lhs, &rhs)?)
    }
}
