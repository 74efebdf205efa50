//! Exact Laurent-polynomial arithmetic and the cluster character attached
//! to a comparison bundle: validated exponential coefficient maps, the maps
//! α and β, the sum formula ρ, and frieze grids with rule checking.
//!
//! The target ring is integer Laurent polynomials in finitely many named
//! variables; its units are `±` a single monomial. A coefficient map ε̄
//! sends a relative Grothendieck group to that unit group; it is validated
//! at construction so that every presentation relation maps to 1. The
//! cluster character is
//!
//! ```text
//! ρ(C) = α(C) · Σ_S β(dim S)
//! ```
//!
//! with `α = ε̄ ∘ Q_X`, `β = (ε̄ ∘ ψ)⁻¹`, and `S` running over the
//! submodules of the thin module of maps out of `X` into the suspension of
//! `C`. Evaluating ρ over every arc of the polygon fills a frieze grid.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::abelian::{AbelianError, FpGroup, K0Element};
use crate::arcmodel::{Arc, ArcError, Polygon};
use crate::indexmaps::{index_element, simple_label, HomBundle, IndexError};

/// Errors from coefficient-map construction and character evaluation.
#[derive(Debug, thiserror::Error)]
pub enum CcError {
    /// The coefficient map was built for a different group than the one
    /// the bundle carries.
    #[error("the coefficient map is defined on a different group than the bundle's")]
    GroupMismatch,
    /// An image must be a unit of the Laurent ring.
    #[error("image of `{0}` is not a unit (must be plus or minus a single monomial)")]
    NotUnit(String),
    /// Every generator needs exactly one image.
    #[error("no image supplied for generator `{0}`")]
    MissingImage(String),
    /// An image was supplied for a label the group does not have.
    #[error("image supplied for `{0}`, which is not a generator")]
    UnknownGenerator(String),
    /// The images fail to kill a presentation relation.
    #[error("images do not respect the relations: `{relation}` maps to {value}, not 1")]
    RelationNotKilled {
        /// The offending relation, written over the group's generators.
        relation: String,
        /// What the images send it to.
        value: String,
    },
    /// A group coefficient was too large to use as a monomial exponent.
    #[error("exponent overflow while raising a unit to a group coefficient")]
    ExponentOverflow,
    /// An error from the comparison-map layer.
    #[error(transparent)]
    Index(#[from] IndexError),
    /// An error from the group layer.
    #[error(transparent)]
    Abelian(#[from] AbelianError),
    /// An error from the polygon model.
    #[error(transparent)]
    Arc(#[from] ArcError),
}

/// An integer Laurent polynomial in named variables.
///
/// Terms map an exponent assignment (variable label to nonzero integer
/// exponent) to a nonzero coefficient; both normalizations are maintained
/// by every operation, so equality is structural.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default, Debug)]
pub struct LaurentElement {
    terms: BTreeMap<BTreeMap<String, i64>, BigInt>,
}

impl LaurentElement {
    /// The zero polynomial.
    pub fn zero() -> Self {
        LaurentElement::default()
    }

    /// The unit polynomial 1.
    pub fn one() -> Self {
        LaurentElement::constant(BigInt::one())
    }

    /// A constant polynomial.
    pub fn constant(n: BigInt) -> Self {
        let mut e = LaurentElement::zero();
        e.add_term(&BTreeMap::new(), &n);
        e
    }

    /// The polynomial consisting of a single variable.
    pub fn variable(label: &str) -> Self {
        LaurentElement::monomial([(label, 1)], BigInt::one())
    }

    /// A single term with the given exponents and coefficient.
    pub fn monomial<'a>(
        exponents: impl IntoIterator<Item = (&'a str, i64)>,
        coefficient: BigInt,
    ) -> Self {
        let exps: BTreeMap<String, i64> = exponents
            .into_iter()
            .filter(|(_, e)| *e != 0)
            .map(|(l, e)| (l.to_owned(), e))
            .collect();
        let mut e = LaurentElement::zero();
        e.add_term(&exps, &coefficient);
        e
    }

    /// True when there are no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for the unit polynomial 1.
    pub fn is_one(&self) -> bool {
        self == &LaurentElement::one()
    }

    /// The terms, in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&BTreeMap<String, i64>, &BigInt)> {
        self.terms.iter()
    }

    /// The constant this polynomial equals, when it is a constant.
    pub fn constant_value(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => {
                let (exps, coeff) = self.terms.iter().next().unwrap();
                exps.is_empty().then(|| coeff.clone())
            }
            _ => None,
        }
    }

    /// The value after substituting 1 for every variable: the sum of the
    /// coefficients.
    pub fn specialize_ones(&self) -> BigInt {
        self.terms.values().sum()
    }

    fn add_term(&mut self, exponents: &BTreeMap<String, i64>, coefficient: &BigInt) {
        if coefficient.is_zero() {
            return;
        }
        let entry = self.terms.entry(exponents.clone()).or_default();
        *entry += coefficient;
        if entry.is_zero() {
            self.terms.remove(exponents);
        }
    }

    /// The single term as `(exponents, negative?)` when this is a unit —
    /// plus or minus one monomial.
    pub fn as_unit(&self) -> Option<(&BTreeMap<String, i64>, bool)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (exps, coeff) = self.terms.iter().next().unwrap();
        (coeff.magnitude() == BigInt::one().magnitude())
            .then(|| (exps, coeff.is_negative()))
    }

    /// The multiplicative inverse, defined exactly for units.
    pub fn inverse(&self) -> Option<LaurentElement> {
        let (exps, negative) = self.as_unit()?;
        let inv_exps: BTreeMap<String, i64> = exps.iter().map(|(l, e)| (l.clone(), -e)).collect();
        let coeff = if negative { -BigInt::one() } else { BigInt::one() };
        let mut e = LaurentElement::zero();
        e.add_term(&inv_exps, &coeff);
        Some(e)
    }

    /// Exact division: `Some(q)` with `self = q · divisor` when such a
    /// Laurent polynomial exists, `None` otherwise (including division by
    /// zero).
    pub fn divide_exact(&self, divisor: &LaurentElement) -> Option<LaurentElement> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LaurentElement::zero());
        }
        // Work over the union variable set, shifted so all exponents are
        // nonnegative; lexicographic order on the exponent vectors is then
        // a well-order and leading-term cancellation terminates.
        let mut vars: Vec<&String> = Vec::new();
        for exps in self.terms.keys().chain(divisor.terms.keys()) {
            for v in exps.keys() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        }
        vars.sort();
        let to_vec = |exps: &BTreeMap<String, i64>| -> Vec<i64> {
            vars.iter()
                .map(|v| exps.get(*v).copied().unwrap_or(0))
                .collect()
        };
        let min_shift = |terms: &BTreeMap<BTreeMap<String, i64>, BigInt>| -> Vec<i64> {
            let mut shift = vec![i64::MAX; vars.len()];
            for exps in terms.keys() {
                for (k, e) in to_vec(exps).into_iter().enumerate() {
                    shift[k] = shift[k].min(e);
                }
            }
            shift
        };
        let a_shift = min_shift(&self.terms);
        let b_shift = min_shift(&divisor.terms);
        let shifted = |terms: &BTreeMap<BTreeMap<String, i64>, BigInt>,
                       shift: &[i64]|
         -> BTreeMap<Vec<i64>, BigInt> {
            terms
                .iter()
                .map(|(exps, c)| {
                    let v: Vec<i64> = to_vec(exps)
                        .into_iter()
                        .zip(shift)
                        .map(|(e, s)| e - s)
                        .collect();
                    (v, c.clone())
                })
                .collect()
        };
        let mut rem = shifted(&self.terms, &a_shift);
        let div = shifted(&divisor.terms, &b_shift);
        let div_lead = div.keys().next_back().cloned().expect("divisor nonzero");
        let div_lead_coeff = div[&div_lead].clone();
        let mut quotient: BTreeMap<Vec<i64>, BigInt> = BTreeMap::new();
        while !rem.is_empty() {
            let lead = rem.keys().next_back().cloned().unwrap();
            let lead_coeff = rem[&lead].clone();
            let t: Vec<i64> = lead.iter().zip(&div_lead).map(|(a, b)| a - b).collect();
            if t.iter().any(|e| *e < 0) {
                return None;
            }
            let (q, r) = num_integer::Integer::div_rem(&lead_coeff, &div_lead_coeff);
            if !r.is_zero() {
                return None;
            }
            for (exps, c) in &div {
                let target: Vec<i64> = exps.iter().zip(&t).map(|(a, b)| a + b).collect();
                let entry = rem.entry(target.clone()).or_default();
                *entry -= &q * c;
                if entry.is_zero() {
                    rem.remove(&target);
                }
            }
            *quotient.entry(t).or_default() += q;
        }
        // Unshift the quotient back into Laurent exponents.
        let q_shift: Vec<i64> = a_shift.iter().zip(&b_shift).map(|(a, b)| a - b).collect();
        let mut out = LaurentElement::zero();
        for (exps, c) in &quotient {
            let back: BTreeMap<String, i64> = exps
                .iter()
                .zip(&q_shift)
                .enumerate()
                .map(|(k, (e, s))| (vars[k].clone(), e + s))
                .filter(|(_, e)| *e != 0)
                .collect();
            out.add_term(&back, c);
        }
        Some(out)
    }

    /// Raises a unit to a (possibly huge, possibly negative) power.
    fn unit_pow(&self, power: &BigInt) -> Result<LaurentElement, CcError> {
        let (exps, negative) = self
            .as_unit()
            .expect("unit_pow is only called on validated units");
        let k: i64 = i64::try_from(power).map_err(|_| CcError::ExponentOverflow)?;
        let powered: BTreeMap<String, i64> = exps
            .iter()
            .map(|(l, e)| {
                e.checked_mul(k)
                    .map(|p| (l.clone(), p))
                    .ok_or(CcError::ExponentOverflow)
            })
            .filter(|r| !matches!(r, Ok((_, 0))))
            .collect::<Result<_, _>>()?;
        let coeff = if negative && k.rem_euclid(2) == 1 {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        let mut e = LaurentElement::zero();
        e.add_term(&powered, &coeff);
        Ok(e)
    }
}

impl std::ops::Add for &LaurentElement {
    type Output = LaurentElement;
    fn add(self, rhs: &LaurentElement) -> LaurentElement {
        let mut out = self.clone();
        for (exps, c) in &rhs.terms {
            out.add_term(exps, c);
        }
        out
    }
}

impl std::ops::Sub for &LaurentElement {
    type Output = LaurentElement;
    fn sub(self, rhs: &LaurentElement) -> LaurentElement {
        let mut out = self.clone();
        for (exps, c) in &rhs.terms {
            out.add_term(exps, &-c);
        }
        out
    }
}

impl std::ops::Neg for &LaurentElement {
    type Output = LaurentElement;
    fn neg(self) -> LaurentElement {
        &LaurentElement::zero() - self
    }
}

impl std::ops::Mul for &LaurentElement {
    type Output = LaurentElement;
    fn mul(self, rhs: &LaurentElement) -> LaurentElement {
        let mut out = LaurentElement::zero();
        for (le, lc) in &self.terms {
            for (re, rc) in &rhs.terms {
                let mut exps = le.clone();
                for (l, e) in re {
                    let entry = exps.entry(l.clone()).or_insert(0);
                    *entry += e;
                    if *entry == 0 {
                        exps.remove(l);
                    }
                }
                out.add_term(&exps, &(lc * rc));
            }
        }
        out
    }
}

impl fmt::Display for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (exps, coeff)) in self.terms.iter().enumerate() {
            let negative = coeff.is_negative();
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = coeff.magnitude();
            if exps.is_empty() {
                write!(f, "{mag}")?;
            } else {
                let mut lead = true;
                if !mag.is_one() {
                    write!(f, "{mag}")?;
                    lead = false;
                }
                for (label, e) in exps {
                    if !lead {
                        write!(f, " ")?;
                    }
                    lead = false;
                    if *e == 1 {
                        write!(f, "{label}")?;
                    } else {
                        write!(f, "{label}^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// A validated exponential map from a finitely presented group to the unit
/// group of the Laurent ring: every generator goes to `±` a monomial and
/// every presentation relation maps to 1, so the map is well defined on
/// the group, not just on representatives.
#[derive(Debug, Clone)]
pub struct EpsilonMap {
    group: FpGroup,
    images: BTreeMap<String, LaurentElement>,
}

/// Builds a coefficient map after checking the images: one unit per
/// generator, no extras, and every relation row killed exactly.
pub fn make_epsilon(
    group: &FpGroup,
    images: BTreeMap<String, LaurentElement>,
) -> Result<EpsilonMap, CcError> {
    for label in group.labels() {
        let image = images
            .get(label)
            .ok_or_else(|| CcError::MissingImage(label.clone()))?;
        if image.as_unit().is_none() {
            return Err(CcError::NotUnit(label.clone()));
        }
    }
    for label in images.keys() {
        if !group.labels().contains(label) {
            return Err(CcError::UnknownGenerator(label.clone()));
        }
    }
    let eps = EpsilonMap {
        group: group.clone(),
        images,
    };
    for row in 0..group.relations().rows() {
        let relation = K0Element::from_vector(group.labels(), group.relations().row(row));
        let value = eps.apply(&relation)?;
        if !value.is_one() {
            return Err(CcError::RelationNotKilled {
                relation: relation.to_string(),
                value: value.to_string(),
            });
        }
    }
    Ok(eps)
}

impl EpsilonMap {
    /// The trivial coefficient map: every generator to 1. Valid on any
    /// group.
    pub fn trivial_for(group: &FpGroup) -> EpsilonMap {
        let images = group
            .labels()
            .iter()
            .map(|l| (l.clone(), LaurentElement::one()))
            .collect();
        make_epsilon(group, images).expect("the trivial map kills every relation")
    }

    /// The variables coefficient map on the bundle's relative group: each
    /// generator `[a]` goes to the monomial `Π x_t^{±1}` spelled by the
    /// index of `a` with respect to the triangulation, with one variable
    /// `x(i,j)` per arc of the triangulation.
    ///
    /// The relation check makes this exactly as available as it should be:
    /// when the bundle's subset is all of the triangulation the relations
    /// are index-additive and the map validates; for a proper subset the
    /// extra relations are not killed and construction reports the failure.
    pub fn variables_for(bundle: &HomBundle) -> Result<EpsilonMap, CcError> {
        let polygon = bundle.polygon();
        let mut images = BTreeMap::new();
        for label in bundle.relative_x.labels() {
            let arc = polygon.parse_arc(label)?;
            let index = index_element(polygon, bundle.t_arcs(), arc)?;
            let exps: BTreeMap<String, i64> = index
                .iter()
                .map(|(l, c)| {
                    i64::try_from(c)
                        .map(|e| (format!("x{l}"), e))
                        .map_err(|_| CcError::ExponentOverflow)
                })
                .collect::<Result<_, _>>()?;
            let mut image = LaurentElement::zero();
            image.add_term(&exps, &BigInt::one());
            images.insert(label.clone(), image);
        }
        make_epsilon(&bundle.relative_x, images)
    }

    /// The group the map is defined on.
    pub fn group(&self) -> &FpGroup {
        &self.group
    }

    /// The image of a generator.
    pub fn image_of(&self, label: &str) -> Option<&LaurentElement> {
        self.images.get(label)
    }

    /// Evaluates the map on a group element written over the generators:
    /// the product of the generator images raised to the coefficients.
    pub fn apply(&self, element: &K0Element) -> Result<LaurentElement, CcError> {
        let mut out = LaurentElement::one();
        for (label, coeff) in element.iter() {
            let image = self
                .images
                .get(label)
                .ok_or_else(|| CcError::UnknownGenerator(label.to_owned()))?;
            out = &out * &image.unit_pow(coeff)?;
        }
        Ok(out)
    }
}

fn ensure_compatible(eps: &EpsilonMap, bundle: &HomBundle) -> Result<(), CcError> {
    if eps.group() != &bundle.relative_x {
        return Err(CcError::GroupMismatch);
    }
    Ok(())
}

/// The map α: the coefficient map applied to the class of the object in
/// the relative group.
pub fn alpha(
    eps: &EpsilonMap,
    bundle: &HomBundle,
    summands: &[Arc],
) -> Result<LaurentElement, CcError> {
    ensure_compatible(eps, bundle)?;
    let one = BigInt::one();
    let mut class = K0Element::zero();
    for c in summands {
        class.add_term(&c.label(), &one);
    }
    let image = bundle.q_x.apply(&class).map_err(CcError::Abelian)?;
    eps.apply(&image)
}

/// The map β on classes of finite-length modules over the subset: the
/// inverse of the coefficient map applied along ψ. The image of ψ is a
/// unit, so the inverse is exact.
pub fn beta(
    eps: &EpsilonMap,
    bundle: &HomBundle,
    e: &K0Element,
) -> Result<LaurentElement, CcError> {
    ensure_compatible(eps, bundle)?;
    let image = bundle.psi.apply(e).map_err(CcError::Abelian)?;
    let value = eps.apply(&image)?;
    value
        .inverse()
        .ok_or_else(|| CcError::NotUnit(value.to_string()))
}

/// The cluster character of a direct sum of arcs:
/// `ρ(C) = α(C) · Σ_S β(dim S)` over the submodules `S` of the module of
/// maps out of the subset into the suspension of `C`, extended
/// multiplicatively over the summands.
pub fn rho(
    eps: &EpsilonMap,
    bundle: &HomBundle,
    summands: &[Arc],
) -> Result<LaurentElement, CcError> {
    ensure_compatible(eps, bundle)?;
    let mut out = LaurentElement::one();
    for c in summands {
        out = &out * &rho_single(eps, bundle, *c)?;
    }
    Ok(out)
}

fn rho_single(eps: &EpsilonMap, bundle: &HomBundle, c: Arc) -> Result<LaurentElement, CcError> {
    let polygon = bundle.polygon();
    let module = polygon.module_of(bundle.x_arcs(), polygon.suspend(c, 1));
    let one = BigInt::one();
    let mut sum = LaurentElement::zero();
    for support in module.submodule_supports() {
        let mut dim = K0Element::zero();
        for arc in support {
            dim.add_term(&simple_label(arc), &one);
        }
        sum = &sum + &beta(eps, bundle, &dim)?;
    }
    Ok(&alpha(eps, bundle, &[c])? * &sum)
}

/// A frieze grid over the polygon's vertex pairs: sides carry 1, arcs
/// carry their cluster-character values, the diagonal is zero, and lookups
/// are symmetric.
#[derive(Debug, Clone)]
pub struct FriezeGrid {
    vertex_count: usize,
    values: BTreeMap<(usize, usize), LaurentElement>,
}

/// One failed diamond in a frieze check.
#[derive(Debug, Clone)]
pub struct FriezeViolation {
    /// Row vertex of the diamond's top-left entry.
    pub i: usize,
    /// Column vertex of the diamond's top-left entry.
    pub j: usize,
    /// The determinant that broke the rule.
    pub determinant: LaurentElement,
}

/// The outcome of checking a frieze grid against the diamond rule.
#[derive(Debug, Clone)]
pub struct FriezeReport {
    /// Whether every side entry is exactly 1.
    pub sides_one: bool,
    /// Diamonds whose determinant broke the rule.
    pub violations: Vec<FriezeViolation>,
}

impl FriezeReport {
    /// True when the grid passed every part of the check.
    pub fn all_hold(&self) -> bool {
        self.sides_one && self.violations.is_empty()
    }
}

impl FriezeGrid {
    /// Number of polygon vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// The stored entries over canonical pairs `i < j`, sides included.
    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &LaurentElement)> {
        self.values.iter()
    }

    fn reduce(&self, v: usize) -> usize {
        (v - 1) % self.vertex_count + 1
    }

    /// The value at a vertex pair: zero on the diagonal, symmetric, and
    /// cyclic in both coordinates (vertex `N + 1` is vertex 1).
    pub fn value(&self, i: usize, j: usize) -> LaurentElement {
        let (a, b) = (self.reduce(i), self.reduce(j));
        if a == b {
            return LaurentElement::zero();
        }
        let key = (a.min(b), a.max(b));
        self.values[&key].clone()
    }

    /// The near-diagonal row: the value over the two neighbours of each
    /// vertex, in vertex order.
    pub fn quiddity(&self) -> Vec<LaurentElement> {
        (1..=self.vertex_count)
            .map(|v| self.value(v + self.vertex_count - 1, v + 1))
            .collect()
    }

    /// Checks every diamond `m(i,j)·m(i+1,j+1) − m(i,j+1)·m(i+1,j)`:
    /// the determinant must be exactly 1, or exactly 0 or 1 when
    /// `zero_allowed` is set. Also confirms sides are 1.
    pub fn check_diamonds(&self, zero_allowed: bool) -> FriezeReport {
        let n = self.vertex_count;
        let sides_one = (1..=n).all(|i| self.value(i, i + 1).is_one());
        let mut violations = Vec::new();
        for i in 1..=n {
            for j in i + 1..i + n {
                let det = &(&self.value(i, j) * &self.value(i + 1, j + 1))
                    - &(&self.value(i, j + 1) * &self.value(i + 1, j));
                let ok = det.is_one() || (zero_allowed && det.is_zero());
                if !ok {
                    violations.push(FriezeViolation {
                        i,
                        j: self.reduce(j),
                        determinant: det,
                    });
                }
            }
        }
        FriezeReport {
            sides_one,
            violations,
        }
    }
}

/// Evaluates the cluster character over every arc and fills the grid;
/// sides carry 1.
pub fn frieze(eps: &EpsilonMap, bundle: &HomBundle) -> Result<FriezeGrid, CcError> {
    ensure_compatible(eps, bundle)?;
    let polygon = bundle.polygon();
    let n = polygon.vertex_count();
    let mut values = BTreeMap::new();
    for i in 1..=n {
        for j in i + 1..=n {
            let d = j - i;
            let value = if d == 1 || d == n - 1 {
                LaurentElement::one()
            } else {
                rho(eps, bundle, &[polygon.arc(i, j)?])?
            };
            values.insert((i, j), value);
        }
    }
    Ok(FriezeGrid {
        vertex_count: n,
        values,
    })
}

/// The triangles of a triangulation: all vertex triples whose three
/// connecting chords are sides or arcs of the triangulation. The vertices
/// are in convex position, so these triples are exactly the triangular
/// faces the triangulation cuts the polygon into.
pub fn triangulation_triangles(
    polygon: &Polygon,
    t: &[Arc],
) -> Result<Vec<[usize; 3]>, CcError> {
    let t = polygon.validate_triangulation(t)?;
    let n = polygon.vertex_count();
    let joined = |a: usize, b: usize| -> bool {
        let d = b - a;
        d == 1 || d == n - 1 || t.iter().any(|arc| arc.first() == a && arc.second() == b)
    };
    let mut out = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if !joined(a, b) {
                continue;
            }
            for c in b + 1..=n {
                if joined(b, c) && joined(a, c) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exang::Category;
    use proptest::prelude::*;

    fn x(label: &str) -> LaurentElement {
        LaurentElement::variable(label)
    }

    fn pentagon_bundle(x_arcs: &[(usize, usize)]) -> (HomBundle, Polygon) {
        let cat = Category::from_polygon(2);
        let polygon = *cat.polygon().unwrap();
        let t = [polygon.arc(1, 3).unwrap(), polygon.arc(1, 4).unwrap()];
        let x: Vec<Arc> = x_arcs
            .iter()
            .map(|(a, b)| polygon.arc(*a, *b).unwrap())
            .collect();
        (HomBundle::build(&cat, &t, &x, &[]).unwrap(), polygon)
    }

    #[test]
    fn laurent_hand_arithmetic() {
        let p = &x("x") + &LaurentElement::one();
        let q = &LaurentElement::monomial([("x", -1)], 1.into()) + &LaurentElement::one();
        let product = &p * &q;
        let expected = &(&x("x") + &LaurentElement::constant(2.into()))
            + &LaurentElement::monomial([("x", -1)], 1.into());
        assert_eq!(product, expected);
        assert_eq!(&p * &LaurentElement::one(), p);
        assert_eq!(&p * &LaurentElement::zero(), LaurentElement::zero());
        assert_eq!(&p - &p, LaurentElement::zero());
        assert_eq!(product.to_string(), "2 + x + x^-1");
        assert_eq!(product.specialize_ones(), 4.into());
        assert_eq!(LaurentElement::zero().to_string(), "0");
        assert_eq!(
            (&LaurentElement::zero() - &x("x")).to_string(),
            "-x"
        );
    }

    #[test]
    fn laurent_units_and_inverses() {
        let u = LaurentElement::monomial([("a", 2), ("b", -1)], (-1).into());
        assert!(u.as_unit().is_some());
        let inv = u.inverse().unwrap();
        assert!((&u * &inv).is_one());
        assert!((&x("a") + &LaurentElement::one()).inverse().is_none());
        assert!(LaurentElement::constant(2.into()).inverse().is_none());
        assert!(LaurentElement::zero().inverse().is_none());
    }

    #[test]
    fn laurent_exact_division() {
        // (x^2 - 1) / (x - 1) = x + 1.
        let num = &LaurentElement::monomial([("x", 2)], 1.into()) - &LaurentElement::one();
        let den = &x("x") - &LaurentElement::one();
        assert_eq!(
            num.divide_exact(&den).unwrap(),
            &x("x") + &LaurentElement::one()
        );
        // Laurent shift: (1 + x) / x^-1 = x + x^2.
        let den = LaurentElement::monomial([("x", -1)], 1.into());
        let got = (&LaurentElement::one() + &x("x")).divide_exact(&den).unwrap();
        assert_eq!(
            got,
            &x("x") + &LaurentElement::monomial([("x", 2)], 1.into())
        );
        // Not divisible; division by zero.
        let num = &x("x") + &LaurentElement::one();
        assert!(num
            .divide_exact(&(&x("x") + &LaurentElement::constant(2.into())))
            .is_none());
        assert!(num.divide_exact(&LaurentElement::zero()).is_none());
        // Multivariate: (a b + a + b + 1) / (a + 1) = b + 1.
        let num = &(&x("a") + &LaurentElement::one()) * &(&x("b") + &LaurentElement::one());
        let got = num.divide_exact(&(&x("a") + &LaurentElement::one())).unwrap();
        assert_eq!(got, &x("b") + &LaurentElement::one());
    }

    fn arb_laurent() -> impl Strategy<Value = LaurentElement> {
        let term = (
            prop::collection::btree_map(prop_oneof!["a", "b"], -3i64..=3, 0..=2),
            -4i64..=4,
        );
        prop::collection::vec(term, 0..=4).prop_map(|terms| {
            let mut e = LaurentElement::zero();
            for (exps, c) in terms {
                let exps: BTreeMap<String, i64> =
                    exps.into_iter().filter(|(_, v)| *v != 0).collect();
                e.add_term(&exps, &c.into());
            }
            e
        })
    }

    proptest! {
        #[test]
        fn laurent_ring_laws((p, q, r) in (arb_laurent(), arb_laurent(), arb_laurent())) {
            prop_assert_eq!(&p + &q, &q + &p);
            prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
            prop_assert_eq!(&(&p - &q) + &q, p.clone());
        }

        #[test]
        fn laurent_division_roundtrip((p, q) in (arb_laurent(), arb_laurent())) {
            prop_assume!(!q.is_zero());
            let product = &p * &q;
            let back = product.divide_exact(&q);
            prop_assert_eq!(back, Some(p));
        }
    }

    #[test]
    fn epsilon_validation() {
        use crate::abelian::IntMatrix;
        // Trivial map on any group.
        let (bundle, _) = pentagon_bundle(&[(1, 4)]);
        let eps = EpsilonMap::trivial_for(&bundle.relative_x);
        assert!(eps.apply(&K0Element::generator("(2,4)")).unwrap().is_one());

        // Free group: variables accepted.
        let free = FpGroup::free(vec!["a".into(), "b".into()]).unwrap();
        let images = BTreeMap::from([("a".to_string(), x("xa")), ("b".to_string(), x("xb"))]);
        assert!(make_epsilon(&free, images).is_ok());

        // Order-2 generator to a variable: rejected (x^2 is not 1).
        let order2 = FpGroup::new(vec!["a".into()], IntMatrix::from_rows(&[vec![2]])).unwrap();
        let images = BTreeMap::from([("a".to_string(), x("xa"))]);
        assert!(matches!(
            make_epsilon(&order2, images),
            Err(CcError::RelationNotKilled { .. })
        ));

        // Order-2 generator to -1: accepted ((-1)^2 = 1).
        let images = BTreeMap::from([(
            "a".to_string(),
            LaurentElement::constant((-1).into()),
        )]);
        assert!(make_epsilon(&order2, images).is_ok());

        // Order-3 generator to -1: rejected ((-1)^3 = -1).
        let order3 = FpGroup::new(vec!["a".into()], IntMatrix::from_rows(&[vec![3]])).unwrap();
        let images = BTreeMap::from([(
            "a".to_string(),
            LaurentElement::constant((-1).into()),
        )]);
        assert!(matches!(
            make_epsilon(&order3, images),
            Err(CcError::RelationNotKilled { .. })
        ));

        // Non-unit image, missing image, stray image.
        let images = BTreeMap::from([("a".to_string(), &x("xa") + &LaurentElement::one())]);
        assert!(matches!(
            make_epsilon(&order2, images),
            Err(CcError::NotUnit(_))
        ));
        assert!(matches!(
            make_epsilon(&free, BTreeMap::new()),
            Err(CcError::MissingImage(_))
        ));
        let images = BTreeMap::from([
            ("a".to_string(), x("xa")),
            ("b".to_string(), x("xb")),
            ("zz".to_string(), x("xz")),
        ]);
        assert!(matches!(
            make_epsilon(&free, images),
            Err(CcError::UnknownGenerator(_))
        ));
    }

    #[test]
    fn variables_map_requires_the_full_triangulation() {
        let (bundle, _) = pentagon_bundle(&[(1, 3), (1, 4)]);
        let eps = EpsilonMap::variables_for(&bundle).unwrap();
        assert_eq!(
            eps.apply(&K0Element::generator("(2,4)")).unwrap(),
            LaurentElement::monomial([("x(1,3)", -1), ("x(1,4)", 1)], 1.into())
        );

        let (bundle, _) = pentagon_bundle(&[(1, 4)]);
        assert!(matches!(
            EpsilonMap::variables_for(&bundle),
            Err(CcError::RelationNotKilled { .. })
        ));
    }

    #[test]
    fn alpha_values_and_multiplicativity() {
        let (bundle, polygon) = pentagon_bundle(&[(1, 3), (1, 4)]);
        let eps = EpsilonMap::variables_for(&bundle).unwrap();
        assert!(alpha(&eps, &bundle, &[]).unwrap().is_one());
        assert_eq!(
            alpha(&eps, &bundle, &[polygon.arc(1, 3).unwrap()]).unwrap(),
            x("x(1,3)")
        );
        let arcs = polygon.arcs();
        for a in &arcs {
            for b in &arcs {
                let together = alpha(&eps, &bundle, &[*a, *b]).unwrap();
                let apart = &alpha(&eps, &bundle, &[*a]).unwrap()
                    * &alpha(&eps, &bundle, &[*b]).unwrap();
                assert_eq!(together, apart);
            }
        }
    }

    #[test]
    fn beta_values_and_multiplicativity() {
        let (bundle, _) = pentagon_bundle(&[(1, 3), (1, 4)]);
        let eps = EpsilonMap::variables_for(&bundle).unwrap();
        assert!(beta(&eps, &bundle, &K0Element::zero()).unwrap().is_one());
        // The connecting classes of the two exchange триangles give the
        // inverse variables lattice.
        assert_eq!(
            beta(&eps, &bundle, &K0Element::generator("S(1,3)")).unwrap(),
            LaurentElement::monomial([("x(1,4)", -1)], 1.into())
        );
        assert_eq!(
            beta(&eps, &bundle, &K0Element::generator("S(1,4)")).unwrap(),
            x("x(1,3)")
        );
        let e = &K0Element::generator("S(1,3)") + &K0Element::generator("S(1,4)");
        assert_eq!(
            beta(&eps, &bundle, &e).unwrap(),
            &beta(&eps, &bundle, &K0Element::generator("S(1,3)")).unwrap()
                * &beta(&eps, &bundle, &K0Element::generator("S(1,4)")).unwrap()
        );
        // Supported outside the subset's simples: rejected.
        assert!(beta(&eps, &bundle, &K0Element::generator("S(2,4)")).is_err());
    }

    /// Independent recurrence oracle: a_{k+1} = (1 + a_k) / a_{k-1} with
    /// exact Laurent division, five-periodic from the two seeds.
    fn recurrence_values() -> [LaurentElement; 5] {
        let x1 = x("x(1,3)");
        let x2 = x("x(1,4)");
        let mut values = vec![x1, x2];
        for k in 2..5 {
            let next = (&LaurentElement::one() + &values[k - 1])
                .divide_exact(&values[k - 2])
                .expect("the recurrence stays Laurent");
            values.push(next);
        }
        values.try_into().unwrap()
    }

    #[test]
    fn recurrence_oracle_is_five_periodic() {
        let v = recurrence_values();
        let a6 = (&LaurentElement::one() + &v[4])
            .divide_exact(&v[3])
            .unwrap();
        let a7 = (&LaurentElement::one() + &a6).divide_exact(&v[4]).unwrap();
        assert_eq!(a6, v[0]);
        assert_eq!(a7, v[1]);
    }

    #[test]
    fn character_matches_the_recurrence_oracle() {
        let (bundle, polygon) = pentagon_bundle(&[(1, 3), (1, 4)]);
        let eps = EpsilonMap::variables_for(&bundle).unwrap();
        let oracle = recurrence_values();
        let arcs = [(1, 3), (1, 4), (2, 4), (2, 5), (3, 5)];
        for ((a, b), expected) in arcs.into_iter().zip(&oracle) {
            let got = rho(&eps, &bundle, &[polygon.arc(a, b).unwrap()]).unwrap();
            assert_eq!(&got, expected, "arc ({a},{b})");
        }
    }

    #[test]
    fn character_counts_submodules_under_the_trivial_map() {
        let (bundle, polygon) = pentagon_bundle(&[(1, 3), (1, 4)]);
        let trivial = EpsilonMap::trivial_for(&bundle.relative_x);
        let variables = EpsilonMap::variables_for(&bundle).unwrap();
        for c in polygon.arcs() {
            let module = polygon.module_of(bundle.x_arcs(), polygon.suspend(c, 1));
            let count = module.submodule_supports().len();
            let plain = rho(&trivial, &bundle, &[c]).unwrap();
            assert_eq!(plain.constant_value().unwrap(), BigInt::from(count));
            // The all-ones specialization of the full character agrees.
            let rich = rho(&variables, &bundle, &[c]).unwrap();
            assert_eq!(rich.specialize_ones(), BigInt::from(count));
        }
    }

    /// For summands whose modules have disjoint support, the submodules of
    /// the direct sum are exactly the pairs, so the character multiplies.
    /// Checked by brute-force closure enumeration over the merged module.
    #[test]
    fn character_factorizes_over_disjoint_sums() {
        let (bundle, polygon) = pentagon_bundle(&[(1, 3), (1, 4)]);
        let eps = EpsilonMap::variables_for(&bundle).unwrap();
        let arcs = polygon.arcs();
        let mut disjoint_pairs = 0;
        for a in &arcs {
            for b in &arcs {
                let ma = polygon.module_of(bundle.x_arcs(), polygon.suspend(*a, 1));
                let mb = polygon.module_of(bundle.x_arcs(), polygon.suspend(*b, 1));
                let sup_a: Vec<Arc> = ma.top().into_iter().collect();
                let _ = sup_a;
                let overlap = ma
                    .support()
                    .iter()
                    .zip(mb.support())
                    .any(|(x, y)| *x && *y);
                if overlap {
                    continue;
                }
                disjoint_pairs += 1;
                // Merge the two thin modules and enumerate closed subsets
                // of the union directly.
                let base = ma.base();
                let merged_support: Vec<bool> = ma
                    .support()
                    .iter()
                    .zip(mb.support())
                    .map(|(x, y)| *x || *y)
                    .collect();
                let mut merged_actions: Vec<(usize, usize)> = ma.actions().to_vec();
                merged_actions.extend_from_slice(mb.actions());
                let positions: Vec<usize> = (0..base.len())
                    .filter(|k| merged_support[*k])
                    .collect();
                let mut merged_sum = LaurentElement::zero();
                for mask in 0..(1usize << positions.len()) {
                    let keeps = |k: usize| {
                        positions
                            .iter()
                            .position(|p| *p == k)
                            .is_some_and(|idx| mask >> idx & 1 == 1)
                    };
                    if merged_actions.iter().all(|(to, from)| !keeps(*from) || keeps(*to)) {
                        let mut dim = K0Element::zero();
                        for (idx, pos) in positions.iter().enumerate() {
                            if mask >> idx & 1 == 1 {
                                dim.add_term(&simple_label(base[*pos]), &BigInt::one());
                            }
                        }
                        merged_sum = &merged_sum + &beta(&eps, &bundle, &dim).unwrap();
                    }
                }
                let direct = &(&alpha(&eps, &bundle, &[*a, *b]).unwrap()) * &merged_sum;
                let multiplied = &rho(&eps, &bundle, &[*a]).unwrap()
                    * &rho(&eps, &bundle, &[*b]).unwrap();
                assert_eq!(direct, multiplied, "{a} with {b}");
                assert_eq!(
                    rho(&eps, &bundle, &[*a, *b]).unwrap(),
                    multiplied,
                    "{a} with {b}"
                );
            }
        }
        assert!(disjoint_pairs > 0, "the sweep must exercise real pairs");
    }

    #[test]
    fn pentagon_frieze_counts_incident_triangles() {
        let (bundle, polygon) = pentagon_bundle(&[(1, 3), (1, 4)]);
        let trivial = EpsilonMap::trivial_for(&bundle.relative_x);
        let grid = frieze(&trivial, &bundle).unwrap();
        let quiddity: Vec<BigInt> = grid
            .quiddity()
            .into_iter()
            .map(|v| v.constant_value().unwrap())
            .collect();
        let triangles = triangulation_triangles(&polygon, bundle.t_arcs()).unwrap();
        assert_eq!(triangles, vec![[1, 2, 3], [1, 3, 4], [1, 4, 5]]);
        let counts: Vec<BigInt> = (1..=5)
            .map(|v| BigInt::from(triangles.iter().filter(|t| t.contains(&v)).count()))
            .collect();
        assert_eq!(quiddity, counts);
        assert_eq!(
            quiddity,
            [3, 1, 2, 2, 1].map(BigInt::from).to_vec()
        );
        let report = grid.check_diamonds(false);
        assert!(report.all_hold(), "violations: {:?}", report.violations);
    }

    #[test]
    fn square_frieze_by_hand() {
        let cat = Category::from_polygon(1);
        let polygon = *cat.polygon().unwrap();
        let t = [polygon.arc(1, 3).unwrap()];
        let bundle = HomBundle::build(&cat, &t, &t, &[]).unwrap();
        let trivial = EpsilonMap::trivial_for(&bundle.relative_x);
        let grid = frieze(&trivial, &bundle).unwrap();
        assert_eq!(grid.value(1, 3).constant_value().unwrap(), BigInt::one());
        assert_eq!(grid.value(2, 4).constant_value().unwrap(), BigInt::from(2));
        assert_eq!(grid.value(1, 2), LaurentElement::one());
        assert_eq!(grid.value(3, 3), LaurentElement::zero());
        assert_eq!(grid.value(4, 2), grid.value(2, 4));
        assert!(grid.check_diamonds(false).all_hold());
    }

    #[test]
    fn variables_frieze_satisfies_the_diamond_rule_exactly() {
        for rank in 1..=3 {
            let cat = Category::from_polygon(rank);
            let polygon = *cat.polygon().unwrap();
            for t in polygon.triangulations().into_iter().take(4) {
                let bundle = HomBundle::build(&cat, &t, &t, &[]).unwrap();
                let eps = EpsilonMap::variables_for(&bundle).unwrap();
                let grid = frieze(&eps, &bundle).unwrap();
                let report = grid.check_diamonds(false);
                assert!(
                    report.all_hold(),
                    "rank {rank}, T {t:?}: {:?}",
                    report.violations
                );
            }
        }
    }

    #[test]
    fn proper_subsets_give_zero_one_friezes() {
        let (bundle, _) = pentagon_bundle(&[(1, 4)]);
        let trivial = EpsilonMap::trivial_for(&bundle.relative_x);
        let grid = frieze(&trivial, &bundle).unwrap();
        let strict = grid.check_diamonds(false);
        let relaxed = grid.check_diamonds(true);
        assert!(relaxed.all_hold(), "violations: {:?}", relaxed.violations);
        assert!(
            !strict.violations.is_empty(),
            "a proper subset should produce at least one zero diamond"
        );

        // The empty subset sends every arc to 1: all off-diagonal entries
        // are 1, every diamond away from the diagonal vanishes.
        let (bundle, _) = pentagon_bundle(&[]);
        let trivial = EpsilonMap::trivial_for(&bundle.relative_x);
        let grid = frieze(&trivial, &bundle).unwrap();
        assert!(grid.value(1, 3).is_one());
        assert!(grid.check_diamonds(true).all_hold());
        assert!(!grid.check_diamonds(false).all_hold());
    }

    #[test]
    fn rank_zero_frieze_is_all_sides() {
        let cat = Category::from_polygon(0);
        let bundle = HomBundle::build(&cat, &[], &[], &[]).unwrap();
        let trivial = EpsilonMap::trivial_for(&bundle.relative_x);
        let grid = frieze(&trivial, &bundle).unwrap();
        assert_eq!(grid.vertex_count(), 3);
        assert!(grid.check_diamonds(false).all_hold());
        let triangles = triangulation_triangles(bundle.polygon(), &[]).unwrap();
        assert_eq!(triangles, vec![[1, 2, 3]]);
    }

    #[test]
    fn mismatched_map_and_bundle_are_rejected() {
        let (bundle_t, _) = pentagon_bundle(&[(1, 3), (1, 4)]);
        let (bundle_x, polygon) = pentagon_bundle(&[(1, 4)]);
        let eps = EpsilonMap::variables_for(&bundle_t).unwrap();
        let arc = polygon.arc(1, 3).unwrap();
        assert!(matches!(
            rho(&eps, &bundle_x, &[arc]),
            Err(CcError::GroupMismatch)
        ));
    }
}
