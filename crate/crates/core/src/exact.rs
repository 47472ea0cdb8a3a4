//! Closed-form intrinsic volumes and quadrature for mixed second volumes.
//!
//! The body families here are the ones whose intrinsic volumes are known in
//! closed form: boxes (elementary symmetric polynomials of the side lengths),
//! Euclidean balls, and planar polygons. Mixed `V₂` of arbitrary bodies in
//! dimension 2 or 3 goes through a spherical integral of support functions
//! and their spherical gradients.

use std::f64::consts::{PI, TAU};

use crate::bodies::{Body, Vector};
use crate::error::{invalid, Error, Result};
use crate::hull::{convex_hull_2d, perimeter, shoelace_area, Point2};
use crate::rng::pairwise_sum;

/// Largest `k` accepted by [`kappa`]; beyond it `Γ(k/2+1)` overflows.
pub const KAPPA_MAX: usize = 170;

/// Default node count of the circle rule.
pub const CIRCLE_NODES: usize = 4096;
/// Default polar × azimuthal node counts of the sphere rule.
pub const SPHERE_POLAR_NODES: usize = 256;
pub const SPHERE_AZIMUTH_NODES: usize = 2048;

/// Volume of the unit `k`-ball, `π^{k/2} / Γ(k/2 + 1)`.
pub fn kappa(k: usize) -> Result<f64> {
    if k > KAPPA_MAX {
        return Err(Error::OutOfRange { what: "k", detail: format!("{k} > {KAPPA_MAX}") });
    }
    Ok(kappa_unchecked(k))
}

fn kappa_unchecked(k: usize) -> f64 {
    // κ_k = (2π/k) κ_{k-2}
    let mut pair = [1.0, 2.0];
    for j in 2..=k {
        pair[j % 2] *= TAU / j as f64;
    }
    pair[k % 2]
}

/// `κ_k / κ_{k-1}` for `k ≥ 1`, without forming either factor.
pub fn kappa_step_ratio(k: usize) -> f64 {
    assert!(k >= 1, "kappa_step_ratio needs k >= 1");
    // r_k r_{k-1} = κ_k / κ_{k-2} = 2π/k
    let mut r = 2.0;
    for j in 2..=k {
        r = TAU / (j as f64 * r);
    }
    r
}

/// `κ_a / κ_b` for `a ≥ b`, stable for large indices.
pub fn kappa_ratio(a: usize, b: usize) -> f64 {
    assert!(a >= b);
    if a == b {
        return 1.0;
    }
    let mut r = kappa_step_ratio(b + 1);
    let mut prod = r;
    for j in b + 2..=a {
        r = TAU / (j as f64 * r);
        prod *= r;
    }
    prod
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All elementary symmetric polynomials `e_0..e_d` of the input, built up
/// one prefix at a time.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

fn check_lengths(lengths: &[f64]) -> Result<()> {
    if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(invalid("side lengths must be positive and finite"));
    }
    Ok(())
}

/// `V_k` of the box with the given side lengths: `e_k(ℓ)`.
pub fn box_intrinsic_volume(lengths: &[f64], k: usize) -> Result<f64> {
    check_lengths(lengths)?;
    if k > lengths.len() {
        return Err(Error::OutOfRange { what: "k", detail: format!("{k} exceeds box dimension {}", lengths.len()) });
    }
    Ok(elementary_symmetric(lengths)[k])
}

/// Mixed second volume of two axis-aligned centered boxes,
/// `½[(Σℓ)(Σℓ') − Σ ℓᵢℓ'ᵢ]`. Shorter length lists are zero-padded.
pub fn box_mixed_v2(lengths: &[f64], other: &[f64]) -> f64 {
    let s: f64 = lengths.iter().sum();
    let t: f64 = other.iter().sum();
    let diag: f64 = lengths.iter().zip(other).map(|(a, b)| a * b).sum();
    0.5 * (s * t - diag)
}

/// `V_k(Bⁿ) = C(n,k) κ_n / κ_{n−k}`.
pub fn ball_intrinsic_volume(n: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("ball dimension must be at least 1"));
    }
    if k > n {
        return Err(Error::OutOfRange { what: "k", detail: format!("{k} exceeds ball dimension {n}") });
    }
    Ok(binomial(n, k) * kappa_ratio(n, n - k))
}

/// `(V₁, V₂)` of a planar convex polygon: half perimeter and area of the hull.
pub fn polygon_v1_v2(vertices: &[Point2]) -> Result<(f64, f64)> {
    if vertices.is_empty() {
        return Err(invalid("polygon needs at least one vertex"));
    }
    let hull = convex_hull_2d(vertices);
    Ok((0.5 * perimeter(&hull), shoelace_area(&hull)))
}

/// Coefficient `V_k(A + B) = Σ_{i+j=k} V_i(A) V_j(B)` for bodies in
/// orthogonal subspaces.
pub fn product_volumes(va: &[f64], vb: &[f64], k: usize) -> Result<f64> {
    if va.is_empty() || vb.is_empty() {
        return Err(invalid("intrinsic-volume sequences start at V0"));
    }
    if k > va.len() + vb.len() - 2 {
        return Err(Error::OutOfRange {
            what: "k",
            detail: format!("{k} exceeds combined dimension {}", va.len() + vb.len() - 2),
        });
    }
    Ok((0..=k).filter(|&i| i < va.len() && k - i < vb.len()).map(|i| va[i] * vb[k - i]).sum())
}

/// Mixed volume `V₂(Bⁿ, Bᵐ)` of centered unit balls in nested coordinate
/// subspaces, read off the `r^{m−2}` Steiner coefficient of
/// `vol_m(Bⁿ + (1+r)Bᵐ)`.
pub fn v2_ball_ball(n: usize, m: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::OutOfRange { what: "n", detail: format!("{n} < 2") });
    }
    if n > m {
        return Err(Error::OutOfRange { what: "n", detail: format!("{n} > m = {m}") });
    }
    let v1_n = n as f64 * kappa_step_ratio(n);
    let v2_n = (n - 1) as f64 * PI;
    let v2_m = (m - 1) as f64 * PI;
    // (C(m,2)κ_m + (m−1)κ_{m−1}V₁(Bⁿ) + κ_{m−2}V₂(Bⁿ)) / κ_{m−2}
    let coefficient = binomial(m, 2) * kappa_ratio(m, m - 2) + (m - 1) as f64 * kappa_step_ratio(m - 1) * v1_n + v2_n;
    Ok(0.5 * (coefficient - v2_n - v2_m))
}

/// `V₂(Iₙ, Bⁿ) = 2nπ κ_{n−3}/κ_{n−2}` for the cube `Iₙ = [−1,1]ⁿ`.
pub fn v2_box_ball_cross(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::OutOfRange { what: "n", detail: format!("{n} < 3") });
    }
    Ok(2.0 * n as f64 * PI / kappa_step_ratio(n - 2))
}

/// Steiner point of a planar polygon: vertices weighted by their exterior
/// angles over `2π`.
pub fn polygon_steiner_point(vertices: &[Point2]) -> Result<Point2> {
    let hull = convex_hull_2d(vertices);
    match hull.len() {
        0 => Err(invalid("polygon needs at least one vertex")),
        1 => Ok(hull[0]),
        2 => Ok([0.5 * (hull[0][0] + hull[1][0]), 0.5 * (hull[0][1] + hull[1][1])]),
        n => {
            let mut s = [0.0, 0.0];
            for i in 0..n {
                let prev = hull[(i + n - 1) % n];
                let cur = hull[i];
                let next = hull[(i + 1) % n];
                let a_in = (cur[1] - prev[1]).atan2(cur[0] - prev[0]);
                let a_out = (next[1] - cur[1]).atan2(next[0] - cur[0]);
                let mut turn = a_out - a_in;
                while turn < 0.0 {
                    turn += TAU;
                }
                while turn >= TAU {
                    turn -= TAU;
                }
                s[0] += cur[0] * turn / TAU;
                s[1] += cur[1] * turn / TAU;
            }
            Ok(s)
        }
    }
}

/// Second intrinsic volume in closed form, where one is available: boxes,
/// balls, and everything polytopal in the plane.
pub fn exact_v2(body: &Body) -> Result<f64> {
    match body {
        Body::Box { lengths } => Ok(elementary_symmetric(lengths).get(2).copied().unwrap_or(0.0)),
        Body::Ball { dim, radius, .. } => Ok((*dim as f64 - 1.0) * PI * radius * radius),
        _ if body.ambient_dim() <= 2 => {
            let vs = planar_vertices(body)?;
            Ok(polygon_v1_v2(&vs)?.1)
        }
        _ => Err(Error::NotImplemented("closed-form V2 is available for boxes, balls and planar polytopes".into())),
    }
}

/// `V_k` in closed form: boxes and balls for every `k`, segments, and planar
/// polytopal bodies (where `V₁` is half the perimeter and `V_k = 0` for
/// `k > 2`).
pub fn exact_intrinsic_volume(body: &Body, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    match body {
        Body::Box { lengths } => box_intrinsic_volume(lengths, k),
        Body::Ball { dim, radius, .. } => {
            if k > *dim {
                return Ok(0.0);
            }
            Ok(radius.powi(k as i32) * ball_intrinsic_volume(*dim, k)?)
        }
        Body::Segment { from, to } => Ok(if k == 1 { to.sub(from).norm() } else { 0.0 }),
        _ if body.ambient_dim() <= 2 => {
            let (v1, v2) = polygon_v1_v2(&planar_vertices(body)?)?;
            Ok(match k {
                1 => v1,
                2 => v2,
                _ => 0.0,
            })
        }
        _ => Err(Error::NotImplemented(format!("closed-form V{k} of a polytope in dimension {}", body.ambient_dim()))),
    }
}

/// Mixed second volume in closed form for the families covered by
/// [`exact_v2`] pairs: two boxes, two centered balls, or two planar
/// polytopal bodies (through the polarization of the Minkowski sum).
pub fn exact_v2_mixed(a: &Body, b: &Body) -> Result<f64> {
    match (a, b) {
        (Body::Box { lengths: la }, Body::Box { lengths: lb }) => Ok(box_mixed_v2(la, lb)),
        (Body::Ball { dim: n, radius: r, .. }, Body::Ball { dim: m, radius: s, .. }) => {
            let (lo, hi) = if n <= m { (*n, *m) } else { (*m, *n) };
            if lo < 2 {
                return Err(Error::NotImplemented("mixed V2 with a one-dimensional ball".into()));
            }
            Ok(r * s * v2_ball_ball(lo, hi)?)
        }
        _ if a.ambient_dim() <= 2 && b.ambient_dim() <= 2 => {
            let sum = crate::bodies::minkowski_combine(vec![(1.0, a.clone()), (1.0, b.clone())])?;
            Ok(0.5 * (exact_v2(&sum)? - (exact_v2(a)? + exact_v2(b)?)))
        }
        _ => Err(Error::NotImplemented("closed-form mixed V2 for this pair; use quadrature or Monte Carlo".into())),
    }
}

fn planar_vertices(body: &Body) -> Result<Vec<Point2>> {
    let vs = body.vertex_set().ok_or_else(|| Error::NotImplemented("closed-form V2 of a curved planar body".into()))?;
    Ok(vs.iter().map(|v| [v.coords()[0], v.coords().get(1).copied().unwrap_or(0.0)]).collect())
}

/// A positive-weight rule on the unit circle or the unit sphere.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dimension: usize,
    pub nodes: Vec<Vector>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Uniform rule on S¹ with `n` nodes offset half a step from the axes.
    pub fn circle(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(invalid("circle rule needs at least 4 nodes"));
        }
        let step = TAU / n as f64;
        let nodes = (0..n)
            .map(|i| {
                let a = (i as f64 + 0.5) * step;
                Vector(vec![a.cos(), a.sin()])
            })
            .collect();
        Ok(QuadratureRule { dimension: 2, nodes, weights: vec![step; n] })
    }

    /// Product rule on S²: Gauss–Legendre in the polar cosine, as two equal
    /// panels split at the equator, times a uniform azimuthal rule offset
    /// half a step.
    pub fn sphere(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar < 2 || !n_polar.is_multiple_of(2) {
            return Err(invalid("sphere rule needs an even polar node count"));
        }
        if n_azimuth < 4 {
            return Err(invalid("sphere rule needs at least 4 azimuthal nodes"));
        }
        let (gx, gw) = gauss_legendre(n_polar / 2);
        let mut zs = Vec::with_capacity(n_polar);
        for (x, w) in gx.iter().zip(&gw) {
            zs.push((0.5 * (x - 1.0), 0.5 * w));
            zs.push((0.5 * (x + 1.0), 0.5 * w));
        }
        let step = TAU / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for &(z, wz) in &zs {
            let rho = (1.0 - z * z).sqrt();
            for k in 0..n_azimuth {
                let phi = (k as f64 + 0.5) * step;
                nodes.push(Vector(vec![rho * phi.cos(), rho * phi.sin(), z]));
                weights.push(wz * step);
            }
        }
        Ok(QuadratureRule { dimension: 3, nodes, weights })
    }

    /// Default-resolution rule for S^{dimension−1}.
    pub fn default_for(dimension: usize) -> Result<Self> {
        match dimension {
            2 => Self::circle(CIRCLE_NODES),
            3 => Self::sphere(SPHERE_POLAR_NODES, SPHERE_AZIMUTH_NODES),
            d => Err(Error::NotImplemented(format!("quadrature on S^{} (only S¹ and S²)", d - 1))),
        }
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let vals: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(u, w)| w * f(u.coords())).collect();
        pairwise_sum(&vals)
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// `V₂(K, K')` from
/// `(n−1)/(2κ_{n−2}) [(h_K, h_K')_{L²} − (1/(n−1)) ⟨∇h_K, ∇h_K'⟩_{L²}]`
/// over the rule's sphere, with `∇h` the tangential part of the maximal
/// point.
///
/// On S¹ with two polytopal bodies the maximal points are piecewise
/// constant in the angle; cells between nodes where they change are
/// bisected down to the switching angle and every constant piece is
/// integrated in closed form. All other cases use the node rule as is.
pub fn v2_mixed_quadrature(k: &Body, k2: &Body, rule: &QuadratureRule) -> Result<f64> {
    let n = rule.dimension;
    if k.ambient_dim() > n || k2.ambient_dim() > n {
        return Err(Error::DimensionMismatch(format!(
            "bodies of dimension {} and {} on a rule for S^{}",
            k.ambient_dim(),
            k2.ambient_dim(),
            n - 1
        )));
    }
    let prefactor = (n - 1) as f64 / (2.0 * kappa_unchecked(n - 2));
    let grad_weight = 1.0 / (n - 1) as f64;

    if n == 2 && k.vertex_set().is_some() && k2.vertex_set().is_some() {
        return Ok(prefactor * circle_fan_integral(k, k2, rule.nodes.len()));
    }

    let integral = rule.integrate(|u| {
        let h = k.support(u);
        let h2 = k2.support(u);
        let p = k.argmax(u);
        let q = k2.argmax(u);
        let pu = crate::bodies::dot(&p, u);
        let qu = crate::bodies::dot(&q, u);
        // ⟨p − (p·u)u, q − (q·u)u⟩ = p·q − (p·u)(q·u)
        let grad = crate::bodies::dot(&p, &q) - pu * qu;
        h * h2 - grad_weight * grad
    });
    Ok(prefactor * integral)
}

type ArgPair = (Vec<f64>, Vec<f64>);

fn circle_fan_integral(k: &Body, k2: &Body, cells: usize) -> f64 {
    let step = TAU / cells as f64;
    let eval = |a: f64| -> ArgPair {
        let u = [a.cos(), a.sin()];
        (k.argmax(&u), k2.argmax(&u))
    };
    let angles: Vec<f64> = (0..=cells).map(|i| (i as f64 + 0.5) * step).collect();
    let pairs: Vec<ArgPair> = angles.iter().map(|&a| eval(a)).collect();
    let parts: Vec<f64> =
        (0..cells).map(|i| fan_cell(&eval, angles[i], angles[i + 1], &pairs[i], &pairs[i + 1], 64)).collect();
    pairwise_sum(&parts)
}

fn fan_cell(eval: &impl Fn(f64) -> ArgPair, a: f64, b: f64, pa: &ArgPair, pb: &ArgPair, depth: u32) -> f64 {
    if pa == pb {
        return piece_integral(pa, a, b);
    }
    if depth == 0 || b - a < 1e-15 {
        return 0.5 * (piece_integral(pa, a, b) + piece_integral(pb, a, b));
    }
    let m = 0.5 * (a + b);
    let pm = eval(m);
    fan_cell(eval, a, m, pa, &pm, depth - 1) + fan_cell(eval, m, b, &pm, pb, depth - 1)
}

/// `∫_a^b (p·u)(q·u) − (p·u')(q·u') dθ` for fixed planar `p`, `q`.
fn piece_integral((p, q): &ArgPair, a: f64, b: f64) -> f64 {
    let c = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let cos_coef = c(p, 0) * c(q, 0) - c(p, 1) * c(q, 1);
    let sin_coef = c(p, 0) * c(q, 1) + c(p, 1) * c(q, 0);
    0.5 * cos_coef * ((2.0 * b).sin() - (2.0 * a).sin()) - 0.5 * sin_coef * ((2.0 * b).cos() - (2.0 * a).cos())
}
