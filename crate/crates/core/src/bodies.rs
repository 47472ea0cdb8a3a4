//! Finitely described convex bodies and their support functions.
//!
//! Every body lives in a finite coordinate truncation of the ambient Hilbert
//! space. Coordinates beyond a body's own length are zero, so bodies of
//! different ambient dimensions can be summed and compared directly.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hull::{convex_hull_2d, Point2};

/// Largest vertex count produced when a composite body is expanded.
const MAX_EXPANDED_VERTICES: usize = 1 << 20;

/// A point of the ambient space, zero-padded on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("vector must have at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("vector coordinates must be finite"));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim.max(1)])
    }

    /// The `i`-th standard basis vector (zero-based) of length `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim.max(i + 1)];
        v[i] = 1.0;
        Vector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn padded(&self, dim: usize) -> Vector {
        let mut c = self.0.clone();
        if c.len() < dim {
            c.resize(dim, 0.0);
        }
        Vector(c)
    }

    pub fn scaled(&self, t: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * t).collect())
    }

    /// Coordinate-wise sum, padding the shorter operand with zeros.
    pub fn add(&self, other: &Vector) -> Vector {
        let n = self.len().max(other.len());
        Vector((0..n).map(|i| coord(&self.0, i) + coord(&other.0, i)).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.add(&other.scaled(-1.0))
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

/// Inner product of two coordinate slices with implicit zero padding.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn coord(v: &[f64], i: usize) -> f64 {
    v.get(i).copied().unwrap_or(0.0)
}

/// One summand of a formal Minkowski combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub body: Body,
}

/// A nonempty compact convex set.
///
/// Construct through the checked constructors or JSON; both validate the
/// variant invariants and deduplicate polytope vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "RawBody")]
pub enum Body {
    /// Convex hull of the listed vertices.
    Polytope {
        vertices: Vec<Vector>,
    },
    /// Axis-aligned box centered at the origin with the given side lengths.
    Box {
        lengths: Vec<f64>,
    },
    /// Ball of the given radius in the span of the first `dim` basis
    /// vectors, translated by `center`.
    Ball {
        dim: usize,
        radius: f64,
        center: Vector,
    },
    Segment {
        from: Vector,
        to: Vector,
    },
    /// Formal Minkowski combination `Σ coef·body`.
    Sum {
        terms: Vec<Term>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum RawBody {
    Polytope { vertices: Vec<Vec<f64>> },
    Box { lengths: Vec<f64> },
    Ball { dim: usize, radius: f64, center: Option<Vec<f64>> },
    Segment { from: Vec<f64>, to: Vec<f64> },
    Sum { terms: Vec<RawTerm> },
}

#[derive(Deserialize)]
struct RawTerm {
    coef: f64,
    body: Body,
}

impl TryFrom<RawBody> for Body {
    type Error = Error;

    fn try_from(raw: RawBody) -> Result<Body> {
        match raw {
            RawBody::Polytope { vertices } => Body::polytope(vertices),
            RawBody::Box { lengths } => Body::cuboid(lengths),
            RawBody::Ball { dim, radius, center } => match center {
                Some(c) => Body::ball(dim, radius, c),
                None => Body::ball(dim, radius, vec![0.0; dim.max(1)]),
            },
            RawBody::Segment { from, to } => Body::segment(from, to),
            RawBody::Sum { terms } => minkowski_combine(terms.into_iter().map(|t| (t.coef, t.body)).collect()),
        }
    }
}

/// A point of the body attaining the support value in a sampled direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalPoint {
    pub point: Vector,
    pub value: f64,
}

impl Body {
    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Body> {
        if vertices.is_empty() {
            return Err(invalid("polytope needs at least one vertex"));
        }
        let dim = vertices[0].len();
        let mut out: Vec<Vector> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if v.len() != dim {
                return Err(invalid("polytope vertices must share one length"));
            }
            let v = Vector::new(v)?;
            if !out.contains(&v) {
                out.push(v);
            }
        }
        Ok(Body::Polytope { vertices: out })
    }

    pub fn point(coords: Vec<f64>) -> Result<Body> {
        Body::polytope(vec![coords])
    }

    /// Axis-aligned box `Π [-ℓᵢ/2, ℓᵢ/2]`.
    pub fn cuboid(lengths: Vec<f64>) -> Result<Body> {
        if lengths.is_empty() {
            return Err(invalid("box needs at least one side"));
        }
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(invalid("box side lengths must be positive and finite"));
        }
        Ok(Body::Box { lengths })
    }

    pub fn ball(dim: usize, radius: f64, center: Vec<f64>) -> Result<Body> {
        if dim == 0 {
            return Err(invalid("ball dimension must be at least 1"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("ball radius must be positive and finite"));
        }
        Ok(Body::Ball { dim, radius, center: Vector::new(center)? })
    }

    pub fn unit_ball(dim: usize) -> Result<Body> {
        Body::ball(dim, 1.0, vec![0.0; dim.max(1)])
    }

    pub fn segment(from: Vec<f64>, to: Vec<f64>) -> Result<Body> {
        Ok(Body::Segment { from: Vector::new(from)?, to: Vector::new(to)? })
    }

    /// Regular `n`-gon inscribed in the circle of radius `r` about the
    /// origin, first vertex on the positive first axis.
    pub fn regular_polygon(n: usize, r: f64) -> Result<Body> {
        if n < 3 {
            return Err(invalid("regular polygon needs at least 3 vertices"));
        }
        let step = std::f64::consts::TAU / n as f64;
        Body::polytope(
            (0..n)
                .map(|i| {
                    let a = step * i as f64;
                    vec![r * a.cos(), r * a.sin()]
                })
                .collect(),
        )
    }

    /// Number of coordinates the body occupies.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Body::Polytope { vertices } => vertices[0].len(),
            Body::Box { lengths } => lengths.len(),
            Body::Ball { dim, center, .. } => (*dim).max(center.len()),
            Body::Segment { from, to } => from.len().max(to.len()),
            Body::Sum { terms } => terms.iter().map(|t| t.body.ambient_dim()).max().unwrap_or(1),
        }
    }

    /// Support value with implicit zero padding of either operand.
    pub fn support(&self, x: &[f64]) -> f64 {
        match self {
            Body::Polytope { vertices } => vertices.iter().map(|v| v.dot(x)).fold(f64::NEG_INFINITY, f64::max),
            Body::Box { lengths } => lengths.iter().zip(x).map(|(l, xi)| 0.5 * l * xi.abs()).sum(),
            Body::Ball { dim, radius, center } => {
                let proj: f64 = x.iter().take(*dim).map(|c| c * c).sum();
                center.dot(x) + radius * proj.sqrt()
            }
            Body::Segment { from, to } => from.dot(x).max(to.dot(x)),
            Body::Sum { terms } => terms.iter().map(|t| t.coef * t.body.support(x)).sum(),
        }
    }

    /// A maximizer of `v ↦ (v, x)` over the body, as a vector of length
    /// `ambient_dim()`. Polytope ties go to the lowest vertex index; box
    /// coordinates with `xᵢ = 0` take the upper face.
    pub fn argmax(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim()];
        self.accumulate_argmax(x, 1.0, &mut out);
        out
    }

    fn accumulate_argmax(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        match self {
            Body::Polytope { vertices } => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (i, v) in vertices.iter().enumerate() {
                    let val = v.dot(x);
                    if val > best_val {
                        best = i;
                        best_val = val;
                    }
                }
                axpy(scale, &vertices[best].0, out);
            }
            Body::Box { lengths } => {
                for (i, l) in lengths.iter().enumerate() {
                    let s = if coord(x, i) < 0.0 { -0.5 } else { 0.5 };
                    out[i] += scale * s * l;
                }
            }
            Body::Ball { dim, radius, center } => {
                axpy(scale, &center.0, out);
                let proj: f64 = x.iter().take(*dim).map(|c| c * c).sum::<f64>().sqrt();
                if proj > 0.0 {
                    for (o, xi) in out.iter_mut().zip(x).take(*dim) {
                        *o += scale * radius * xi / proj;
                    }
                }
            }
            Body::Segment { from, to } => {
                let p = if to.dot(x) > from.dot(x) { to } else { from };
                axpy(scale, &p.0, out);
            }
            Body::Sum { terms } => {
                for t in terms {
                    if t.coef > 0.0 {
                        t.body.accumulate_argmax(x, scale * t.coef, out);
                    }
                }
            }
        }
    }

    /// Whether a point belongs to the body, up to `tol`.
    ///
    /// Exact for boxes, balls and segments; polytopes are tested by a
    /// support-function check only in the plane.
    pub fn contains(&self, p: &[f64], tol: f64) -> Option<bool> {
        match self {
            Body::Box { lengths } => {
                if p.len() > lengths.len() && p[lengths.len()..].iter().any(|c| c.abs() > tol) {
                    return Some(false);
                }
                Some(lengths.iter().enumerate().all(|(i, l)| coord(p, i).abs() <= 0.5 * l + tol))
            }
            Body::Ball { dim, radius, center } => {
                let n = p.len().max(center.len()).max(*dim);
                let mut inside = 0.0;
                for i in 0..n {
                    let d = coord(p, i) - coord(&center.0, i);
                    if i < *dim {
                        inside += d * d;
                    } else if d.abs() > tol {
                        return Some(false);
                    }
                }
                Some(inside.sqrt() <= radius + tol)
            }
            Body::Segment { from, to } => {
                let d = to.sub(from);
                let len2 = d.norm_sq();
                let rel = Vector(p.to_vec()).sub(from);
                let t = if len2 > 0.0 { (rel.dot(&d.0) / len2).clamp(0.0, 1.0) } else { 0.0 };
                Some(rel.sub(&d.scaled(t)).norm() <= tol)
            }
            Body::Polytope { vertices } => {
                if self.ambient_dim() <= 2 && p.len() <= 2 {
                    let hull = convex_hull_2d(&planar_points(vertices));
                    let q = [coord(p, 0), coord(p, 1)];
                    return Some(point_in_convex_polygon(&hull, q, tol));
                }
                let n = p.len().max(self.ambient_dim());
                let is_vertex = vertices.iter().any(|v| (0..n).all(|i| (coord(&v.0, i) - coord(p, i)).abs() <= tol));
                if is_vertex {
                    Some(true)
                } else {
                    None
                }
            }
            Body::Sum { .. } => None,
        }
    }

    /// The finite vertex set of a polytopal body, expanded through sums.
    /// Returns `None` for bodies with curved boundary or when the expansion
    /// would exceed the internal size limit. In the plane the set is pruned
    /// to hull vertices after every partial sum.
    pub fn vertex_set(&self) -> Option<Vec<Vector>> {
        match self {
            Body::Polytope { vertices } => Some(vertices.clone()),
            Body::Segment { from, to } => {
                let n = from.len().max(to.len());
                let (a, b) = (from.padded(n), to.padded(n));
                if a == b {
                    Some(vec![a])
                } else {
                    Some(vec![a, b])
                }
            }
            Body::Box { lengths } => {
                let d = lengths.len();
                if d >= 20 {
                    return None;
                }
                Some(
                    (0..1usize << d)
                        .map(|mask| {
                            Vector(
                                lengths
                                    .iter()
                                    .enumerate()
                                    .map(|(i, l)| if mask >> i & 1 == 1 { 0.5 * l } else { -0.5 * l })
                                    .collect(),
                            )
                        })
                        .collect(),
                )
            }
            Body::Ball { .. } => None,
            Body::Sum { terms } => {
                let dim = self.ambient_dim();
                let mut acc: Vec<Vector> = vec![Vector::zeros(dim)];
                for t in terms.iter().filter(|t| t.coef > 0.0) {
                    let vs = t.body.vertex_set()?;
                    if acc.len().saturating_mul(vs.len()) > MAX_EXPANDED_VERTICES {
                        return None;
                    }
                    let mut next = Vec::with_capacity(acc.len() * vs.len());
                    for a in &acc {
                        for v in &vs {
                            next.push(a.add(&v.scaled(t.coef)).padded(dim));
                        }
                    }
                    acc = if dim <= 2 { prune_planar(&next, dim) } else { dedup(next) };
                }
                Some(acc)
            }
        }
    }

    /// Image under `v ↦ t·v`. A zero factor collapses the body to the origin.
    pub fn scaled(&self, t: f64) -> Result<Body> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid("dilation factor must be nonnegative and finite"));
        }
        if t == 0.0 {
            return Body::point(vec![0.0; self.ambient_dim()]);
        }
        Ok(match self {
            Body::Polytope { vertices } => Body::Polytope { vertices: vertices.iter().map(|v| v.scaled(t)).collect() },
            Body::Box { lengths } => Body::Box { lengths: lengths.iter().map(|l| l * t).collect() },
            Body::Ball { dim, radius, center } => {
                Body::Ball { dim: *dim, radius: radius * t, center: center.scaled(t) }
            }
            Body::Segment { from, to } => Body::Segment { from: from.scaled(t), to: to.scaled(t) },
            Body::Sum { terms } => {
                Body::Sum { terms: terms.iter().map(|x| Term { coef: x.coef * t, body: x.body.clone() }).collect() }
            }
        })
    }

    /// Image under `v ↦ v + p`.
    pub fn translated(&self, p: &Vector) -> Result<Body> {
        Ok(match self {
            Body::Polytope { vertices } => {
                let n = self.ambient_dim().max(p.len());
                Body::Polytope { vertices: vertices.iter().map(|v| v.add(p).padded(n)).collect() }
            }
            Body::Ball { dim, radius, center } => Body::Ball { dim: *dim, radius: *radius, center: center.add(p) },
            Body::Segment { from, to } => Body::Segment { from: from.add(p), to: to.add(p) },
            _ => minkowski_combine(vec![(1.0, self.clone()), (1.0, Body::point(p.0.clone())?)])?,
        })
    }
}

fn axpy(a: f64, x: &[f64], out: &mut [f64]) {
    for (o, xi) in out.iter_mut().zip(x) {
        *o += a * xi;
    }
}

fn planar_points(vs: &[Vector]) -> Vec<Point2> {
    vs.iter().map(|v| [coord(&v.0, 0), coord(&v.0, 1)]).collect()
}

fn prune_planar(vs: &[Vector], dim: usize) -> Vec<Vector> {
    convex_hull_2d(&planar_points(vs)).into_iter().map(|p| Vector(p[..dim].to_vec())).collect()
}

fn dedup(vs: Vec<Vector>) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(vs.len());
    for v in vs {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn point_in_convex_polygon(hull: &[Point2], q: Point2, tol: f64) -> bool {
    match hull.len() {
        0 => false,
        1 => (hull[0][0] - q[0]).hypot(hull[0][1] - q[1]) <= tol,
        2 => {
            let seg = Body::Segment { from: Vector(hull[0].to_vec()), to: Vector(hull[1].to_vec()) };
            seg.contains(&q, tol).unwrap_or(false)
        }
        n => (0..n).all(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % n];
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let len = ex.hypot(ey);
            (ex * (q[1] - a[1]) - ey * (q[0] - a[0])) / len >= -tol
        }),
    }
}

fn check_direction(body: &Body, direction: &Vector) -> Result<()> {
    if direction.0.iter().any(|c| !c.is_finite()) {
        return Err(invalid("direction entries must be finite"));
    }
    if direction.len() < body.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "direction has {} coordinates, body needs {}",
            direction.len(),
            body.ambient_dim()
        )));
    }
    Ok(())
}

/// `h_K(x) = sup_{v∈K} (v, x)`.
pub fn support_value(body: &Body, direction: &Vector) -> Result<f64> {
    check_direction(body, direction)?;
    Ok(body.support(&direction.0))
}

/// A point of `body` attaining `support_value(body, direction)`.
pub fn support_argmax(body: &Body, direction: &Vector) -> Result<MaximalPoint> {
    check_direction(body, direction)?;
    let point = Vector(body.argmax(&direction.0)).padded(direction.len());
    let value = body.support(&direction.0);
    Ok(MaximalPoint { point, value })
}

/// Formal Minkowski combination `Σ cᵢ Kᵢ`.
pub fn minkowski_combine(terms: Vec<(f64, Body)>) -> Result<Body> {
    if terms.is_empty() {
        return Err(invalid("Minkowski combination needs at least one term"));
    }
    if terms.iter().any(|(c, _)| !(c.is_finite() && *c >= 0.0)) {
        return Err(invalid("Minkowski coefficients must be nonnegative and finite"));
    }
    if !terms.iter().any(|(c, _)| *c > 0.0) {
        return Err(invalid("Minkowski combination needs a positive coefficient"));
    }
    Ok(Body::Sum { terms: terms.into_iter().map(|(coef, body)| Term { coef, body }).collect() })
}

/// Explicit polytope with the same support function as a polytopal body.
pub fn expand_polytope(body: &Body) -> Result<Body> {
    let vs = body
        .vertex_set()
        .ok_or_else(|| invalid("body has no finite vertex representation (ball term or too many vertices)"))?;
    Ok(Body::Polytope { vertices: vs })
}

pub fn diameter(body: &Body) -> Result<f64> {
    match body {
        Body::Box { lengths } => Ok(lengths.iter().map(|l| l * l).sum::<f64>().sqrt()),
        Body::Ball { radius, .. } => Ok(2.0 * radius),
        Body::Segment { from, to } => Ok(to.sub(from).norm()),
        Body::Polytope { vertices } => Ok(max_pairwise_distance(vertices)),
        Body::Sum { .. } => match body.vertex_set() {
            Some(vs) => Ok(max_pairwise_distance(&vs)),
            None => Err(Error::NotImplemented(
                "diameter of a composite with curved terms; bound it through V1 instead".into(),
            )),
        },
    }
}

fn max_pairwise_distance(vs: &[Vector]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in vs.iter().enumerate() {
        for b in &vs[i + 1..] {
            best = best.max(a.sub(b).norm());
        }
    }
    best
}
