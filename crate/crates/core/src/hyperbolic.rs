//! Hyperboloid model and the kernel `β(K, K') = V₂(K, K')/√(V₂(K)V₂(K'))`
//! on homothety classes of convex bodies.
//!
//! Points of the model are `(t, x)` with `t² − ‖x‖² = 1` and `t > 0`; the
//! distance is `arccosh` of the Lorentz product.

use std::io::{Read, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::bodies::{dot, minkowski_combine, Body, Vector};
use crate::error::{invalid, Error, Result};
use crate::estimators::{estimate_v2_malliavin, EstimatorResult, SamplerConfig};
use crate::exact::exact_v2;
use crate::output::format_f64;

/// Lorentz products below `1 − LORENTZ_FLOOR` are rejected.
pub const LORENTZ_FLOOR: f64 = 1e-9;
/// `β` ratios below `1 − RATIO_FLOOR` are rejected as inconsistent.
pub const RATIO_FLOOR: f64 = 1e-6;
/// Kernel entries below `1 − KERNEL_FLOOR` are not of hyperbolic type.
pub const KERNEL_FLOOR: f64 = 1e-10;
/// Relative PSD tolerance of the embedding.
pub const PSD_TOLERANCE: f64 = 1e-8;
/// Ratios within this many ulps above 1 are read as exactly 1.
const SNAP_ULPS: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperboloidPoint {
    pub t: f64,
    pub x: Vector,
}

impl HyperboloidPoint {
    /// Checks the sheet invariant `t² − ‖x‖² = 1` to `1e−10` (relative to
    /// `t²` for far points).
    pub fn new(t: f64, x: Vector) -> Result<Self> {
        let defect = t * t - x.norm_sq() - 1.0;
        if !(t > 0.0) || !t.is_finite() || defect.abs() > 1e-10 * (t * t).max(1.0) {
            return Err(invalid(format!("({t}, ..) is off the upper sheet by {defect:e}")));
        }
        Ok(HyperboloidPoint { t, x })
    }

    /// The point of the upper sheet above the spatial vector `x`.
    pub fn from_spatial(x: Vector) -> Self {
        HyperboloidPoint { t: (1.0 + x.norm_sq()).sqrt(), x }
    }

    pub fn origin() -> Self {
        HyperboloidPoint { t: 1.0, x: Vector(Vec::new()) }
    }

    pub fn sheet_defect(&self) -> f64 {
        self.t * self.t - self.x.norm_sq() - 1.0
    }
}

/// `t_p t_q − (x_p, x_q)`, spatial parts zero-padded.
pub fn lorentz_product(p: &HyperboloidPoint, q: &HyperboloidPoint) -> f64 {
    p.t * q.t - dot(&p.x.0, &q.x.0)
}

/// `arccosh(r)`, with anything below 1 and round-off just above 1 read
/// as 1. Lower bounds are enforced by the callers.
pub fn arccosh_clamped(r: f64) -> f64 {
    if r <= 1.0 + SNAP_ULPS * f64::EPSILON {
        0.0
    } else {
        r.acosh()
    }
}

/// Hyperbolic distance. Evaluated as `2 asinh(√q / 2)` with
/// `q = ‖x_p − x_q‖² − (t_p − t_q)²`, which equals `2(B₀ − 1)` on the sheet
/// and keeps full precision for nearby points.
pub fn hyperbolic_distance(p: &HyperboloidPoint, q: &HyperboloidPoint) -> Result<f64> {
    if !(p.t > 0.0 && q.t > 0.0) {
        return Err(Error::NumericalDegeneracy("point off the upper sheet".into()));
    }
    let b = lorentz_product(p, q);
    if !(b >= 1.0 - LORENTZ_FLOOR) {
        return Err(Error::NumericalDegeneracy(format!("Lorentz product {b} below 1")));
    }
    let n = p.x.len().max(q.x.len());
    let dx: f64 = (0..n)
        .map(|i| {
            let d = p.x.0.get(i).copied().unwrap_or(0.0) - q.x.0.get(i).copied().unwrap_or(0.0);
            d * d
        })
        .sum();
    let dt = p.t - q.t;
    let sq = (dx - dt * dt).max(0.0);
    Ok(2.0 * (0.5 * sq.sqrt()).asinh())
}

/// Where the cached `V₂` of a class came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum V2Source {
    Exact,
    Estimated(EstimatorResult),
}

/// A convex body standing for its homothety class, with its `V₂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodyClass {
    pub body: Body,
    pub v2: f64,
    pub source: V2Source,
}

impl BodyClass {
    pub fn with_v2(body: Body, v2: f64, source: V2Source) -> Result<Self> {
        if body.ambient_dim() < 2 {
            return Err(Error::DegenerateClass(format!(
                "body of ambient dimension {} has no class",
                body.ambient_dim()
            )));
        }
        if !(v2 > 0.0 && v2.is_finite()) {
            return Err(Error::DegenerateClass(format!("V2 = {v2}: points and segments have no class")));
        }
        Ok(BodyClass { body, v2, source })
    }

    /// Class with the closed-form `V₂`.
    pub fn exact(body: Body) -> Result<Self> {
        if body.ambient_dim() < 2 {
            return Self::with_v2(body, 0.0, V2Source::Exact);
        }
        let v2 = exact_v2(&body)?;
        Self::with_v2(body, v2, V2Source::Exact)
    }

    /// Class with a Monte-Carlo `V₂`.
    pub fn estimated(body: Body, config: &SamplerConfig) -> Result<Self> {
        if body.ambient_dim() < 2 {
            return Self::with_v2(body, 0.0, V2Source::Exact);
        }
        let r = estimate_v2_malliavin(&body, config)?;
        Self::with_v2(body, r.estimate, V2Source::Estimated(r))
    }

    /// The representative `K/√V₂(K)`, whose `V₂` is 1.
    pub fn normalized_body(&self) -> Result<Body> {
        self.body.scaled(1.0 / self.v2.sqrt())
    }
}

/// `β = V₂(K, K')/√(V₂(K)V₂(K'))`, the ratio between the mixed volume and
/// its Alexandrov–Fenchel lower bound.
pub fn kernel_value(a: &BodyClass, b: &BodyClass, v2_mixed: f64) -> Result<f64> {
    let r = v2_mixed / (a.v2 * b.v2).sqrt();
    if !(r >= 1.0 - RATIO_FLOOR) || !r.is_finite() {
        return Err(Error::InconsistentInputs(format!(
            "mixed V2 {v2_mixed} gives ratio {r} below the Alexandrov-Fenchel bound"
        )));
    }
    Ok(r.max(1.0))
}

/// `arccosh β(A, B)`.
pub fn class_distance(a: &BodyClass, b: &BodyClass, v2_mixed: f64) -> Result<f64> {
    Ok(arccosh_clamped(kernel_value(a, b, v2_mixed)?))
}

/// `φ(t, a)`, the cosh of the distance bookkeeping along a geodesic with
/// endpoint kernel value `a`.
pub fn phi(t: f64, a: f64) -> f64 {
    let s = t - t * t;
    ((1.0 - s) * a + s * a * a) / (t * t + (1.0 - t) * (1.0 - t) + 2.0 * s * a)
}

/// `cosh d(K₀, K_t)` on the geodesic between two normalized classes with
/// kernel value `a`, where `K_t = (1−t)K₀ + tK₁`.
pub fn geodesic_cosh_from_start(t: f64, a: f64) -> f64 {
    let v2 = (1.0 - t) * (1.0 - t) + t * t + 2.0 * t * (1.0 - t) * a;
    ((1.0 - t) + t * a) / v2.sqrt()
}

fn check_unit(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfRange { what: "t", detail: format!("{t} not in [0, 1]") })
    }
}

/// `(1−t)K₀/√V₂(K₀) + tK₁/√V₂(K₁)`.
pub fn geodesic_combination(k0: &BodyClass, k1: &BodyClass, t: f64) -> Result<Body> {
    check_unit(t)?;
    minkowski_combine(vec![((1.0 - t) / k0.v2.sqrt(), k0.body.clone()), (t / k1.v2.sqrt(), k1.body.clone())])
}

/// Solves `d(K₀, K_t) = s` for `t` by bisection to `1e−10` and returns `t`
/// with the body `K_t`.
pub fn arclength_point(k0: &BodyClass, k1: &BodyClass, v2_mixed: f64, s: f64) -> Result<(f64, Body)> {
    let a = kernel_value(k0, k1, v2_mixed)?;
    let total = arccosh_clamped(a);
    if !(s >= 0.0 && s <= total + 1e-12) {
        return Err(Error::OutOfRange { what: "arclength", detail: format!("{s} not in [0, {total}]") });
    }
    let target = s.cosh();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if geodesic_cosh_from_start(mid, a) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok((t, geodesic_combination(k0, k1, t)?))
}

/// Distance from the base point `(1, 0)` of the ray `K + tP` for a class with
/// `V₂(K) = 1` and `V₂(K, P) = v2_kp`.
pub fn boundary_ray_distance(v2_kp: f64, t: f64) -> Result<f64> {
    if !(v2_kp > 0.0 && v2_kp.is_finite()) {
        return Err(invalid("V2(K, P) must be positive"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("ray parameter must be nonnegative"));
    }
    let u = t * v2_kp;
    Ok(arccosh_clamped((u + 1.0) / (2.0 * u + 1.0).sqrt()))
}

/// Symmetric `β` matrix over labelled classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelMatrix {
    pub labels: Vec<String>,
    pub beta: Vec<Vec<f64>>,
}

impl KernelMatrix {
    pub fn new(labels: Vec<String>, beta: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if beta.len() != n || beta.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("{n} labels for a non-matching matrix")));
        }
        for i in 0..n {
            if beta[i][i] != 1.0 {
                return Err(invalid(format!("diagonal entry {i} is {} instead of 1", beta[i][i])));
            }
            for j in 0..n {
                let v = beta[i][j];
                if !v.is_finite() {
                    return Err(invalid("kernel entries must be finite"));
                }
                if (v - beta[j][i]).abs() > 1e-12 * v.abs().max(1.0) {
                    return Err(invalid(format!("kernel not symmetric at ({i}, {j})")));
                }
                if v < 1.0 - KERNEL_FLOOR {
                    return Err(Error::NotHyperbolicType(format!(
                        "beta[{}][{}] = {v} < 1 violates Alexandrov-Fenchel",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(KernelMatrix { labels, beta })
    }

    /// Kernel of a labelled family; `v2_mixed` supplies each off-diagonal
    /// mixed volume.
    pub fn from_classes<F>(labels: Vec<String>, classes: &[BodyClass], mut v2_mixed: F) -> Result<Self>
    where
        F: FnMut(&BodyClass, &BodyClass) -> Result<f64>,
    {
        let n = classes.len();
        if labels.len() != n {
            return Err(Error::DimensionMismatch("one label per class".into()));
        }
        let mut beta = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let m = v2_mixed(&classes[i], &classes[j])?;
                let b = kernel_value(&classes[i], &classes[j], m)?;
                beta[i][j] = b;
                beta[j][i] = b;
            }
        }
        KernelMatrix::new(labels, beta)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `N[i][j] = β[i][m] β[j][m] − β[i][j]`.
    pub fn deformation(&self, base: usize) -> Vec<Vec<f64>> {
        let b = &self.beta;
        (0..self.len()).map(|i| (0..self.len()).map(|j| b[i][base] * b[j][base] - b[i][j]).collect()).collect()
    }

    /// Header `label,<labels>`, then one row per class.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["label".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.beta) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| format_f64(*v)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if header.is_empty() {
            return Err(Error::Csv("empty header".into()));
        }
        let labels: Vec<String> = header[1..].to_vec();
        let mut beta = Vec::with_capacity(labels.len());
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != labels.len() + 1 {
                return Err(Error::Csv(format!("row {} has {} fields", i + 1, rec.len())));
            }
            if labels.get(i).map(|l| l.as_str()) != Some(rec[0].trim()) {
                return Err(Error::Csv(format!("row {} label does not follow the header order", i + 1)));
            }
            let row: std::result::Result<Vec<f64>, _> = rec.iter().skip(1).map(|s| s.trim().parse::<f64>()).collect();
            beta.push(row.map_err(|e| Error::Csv(format!("row {}: {e}", i + 1)))?);
        }
        KernelMatrix::new(labels, beta)
    }
}

/// Embeds the kernel into the hyperboloid with `base` at the apex
/// `(β[i][base], ·)`. The spatial coordinates come from the eigenvectors of
/// the deformation `N`; eigenvalues in `[−tol, 0)` are dropped with
/// `tol = 1e−8 · max(trace N, 1)` and anything more negative is rejected.
pub fn gns_embed(kernel: &KernelMatrix, base: usize) -> Result<Vec<HyperboloidPoint>> {
    let n = kernel.len();
    if base >= n {
        return Err(Error::OutOfRange { what: "base index", detail: format!("{base} >= {n}") });
    }
    if n == 1 {
        return Ok(vec![HyperboloidPoint::origin()]);
    }
    let nm = kernel.deformation(base);
    // The base row and column of N vanish; dropping them keeps the apex
    // exactly at the origin of the spatial part.
    let others: Vec<usize> = (0..n).filter(|&i| i != base).collect();
    let mat = DMatrix::from_fn(n - 1, n - 1, |i, j| nm[others[i]][others[j]]);
    let trace: f64 = (0..n).map(|i| nm[i][i]).sum();
    let tol = PSD_TOLERANCE * trace.max(1.0);
    let eig = SymmetricEigen::new(mat);

    let mut order: Vec<usize> = (0..n - 1).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut kept = Vec::new();
    for &k in &order {
        let lam = eig.eigenvalues[k];
        if lam < -tol {
            return Err(Error::NotHyperbolicType(format!(
                "deformation at base '{}' has eigenvalue {lam:e}",
                kernel.labels[base]
            )));
        }
        // Positive eigenvalues below the round-off floor carry no geometry.
        if lam > f64::EPSILON * trace.max(1.0) {
            kept.push((lam.sqrt(), k));
        }
    }
    let mut row_of = vec![None; n];
    for (r, &i) in others.iter().enumerate() {
        row_of[i] = Some(r);
    }
    Ok((0..n)
        .map(|i| HyperboloidPoint {
            t: kernel.beta[i][base],
            x: Vector(kept.iter().map(|&(s, k)| row_of[i].map_or(0.0, |r| s * eig.eigenvectors[(r, k)])).collect()),
        })
        .collect())
}

/// Pairwise hyperbolic distances of a point family.
pub fn distance_matrix(points: &[HyperboloidPoint]) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = hyperbolic_distance(&points[i], &points[j])?;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    Ok(d)
}

/// Largest gap between embedded distances and `arccosh β`.
pub fn embedding_roundtrip_error(kernel: &KernelMatrix, points: &[HyperboloidPoint]) -> Result<f64> {
    if points.len() != kernel.len() {
        return Err(Error::DimensionMismatch("one point per kernel label".into()));
    }
    let d = distance_matrix(points)?;
    let mut worst = 0.0f64;
    for i in 0..points.len() {
        for j in 0..points.len() {
            worst = worst.max((d[i][j] - arccosh_clamped(kernel.beta[i][j])).abs());
        }
    }
    Ok(worst)
}

/// `⟨p, q⟩_o = ½(d(p, o) + d(q, o) − d(p, q))`.
pub fn gromov_product(p: &HyperboloidPoint, q: &HyperboloidPoint, base: &HyperboloidPoint) -> Result<f64> {
    let v = 0.5 * (hyperbolic_distance(p, base)? + hyperbolic_distance(q, base)? - hyperbolic_distance(p, q)?);
    Ok(v.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GromovDiagnostic {
    /// Entry `k` is the least Gromov product among the points
    /// `k .. k + window`.
    pub tail_minima: Vec<f64>,
    /// Whether the minima never decrease along the sequence.
    pub increasing: bool,
}

/// Sliding-window minima of pairwise Gromov products; they grow without
/// bound along a Cauchy–Gromov sequence.
pub fn cauchy_gromov_diagnostic(
    points: &[HyperboloidPoint],
    base: &HyperboloidPoint,
    window: usize,
) -> Result<GromovDiagnostic> {
    if window < 2 || points.len() < window {
        return Err(invalid("window must hold at least two points of the sequence"));
    }
    let mut tail_minima = Vec::with_capacity(points.len() - window + 1);
    for k in 0..=points.len() - window {
        let mut m = f64::INFINITY;
        for i in k..k + window {
            for j in i + 1..k + window {
                m = m.min(gromov_product(&points[i], &points[j], base)?);
            }
        }
        tail_minima.push(m);
    }
    let increasing = tail_minima.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    Ok(GromovDiagnostic { tail_minima, increasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{box_mixed_v2, exact_v2_mixed, v2_ball_ball};
    use std::f64::consts::PI;

    fn pt(s: f64) -> HyperboloidPoint {
        HyperboloidPoint::new(s.cosh(), Vector(vec![s.sinh()])).unwrap()
    }

    fn class(b: Body) -> BodyClass {
        BodyClass::exact(b).unwrap()
    }

    #[test]
    fn lorentz_and_distance_examples() {
        let o = pt(0.0);
        assert_eq!(lorentz_product(&o, &o), 1.0);
        assert_eq!(lorentz_product(&o, &pt(1.0)), 1f64.cosh());
        assert_eq!(hyperbolic_distance(&o, &o).unwrap(), 0.0);
        for s in [1e-6, 0.3, 1.0, 5.0] {
            assert!((hyperbolic_distance(&o, &pt(s)).unwrap() - s).abs() < 1e-12 * s.max(1.0));
        }
        let bad = HyperboloidPoint { t: 1.0, x: Vector(vec![1.0]) };
        let far = HyperboloidPoint { t: 1.0, x: Vector(vec![1.0]) };
        assert!(matches!(hyperbolic_distance(&bad, &far), Err(Error::NumericalDegeneracy(_))));
        assert!(HyperboloidPoint::new(2.0, Vector(vec![1.0])).is_err());
    }

    #[test]
    fn disk_against_ball() {
        let disk = class(Body::unit_ball(2).unwrap());
        let ball = class(Body::unit_ball(3).unwrap());
        let m = v2_ball_ball(2, 3).unwrap();
        assert!((m - PI * PI / 2.0).abs() < 1e-12);
        let d = class_distance(&disk, &ball, m).unwrap();
        let expected = (PI / (2.0 * 2f64.sqrt())).acosh();
        assert!((d - expected).abs() < 1e-12);
        assert!((d - 0.466_338_5).abs() < 1e-6);
    }

    #[test]
    fn homothety_invariance() {
        let k = Body::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.1], vec![0.4, 1.3], vec![-0.5, 0.8]]).unwrap();
        let a = class(k.clone());
        for t in [0.5, 2.0, 3.0, 7.0] {
            let kk = k.scaled(t).unwrap().translated(&Vector(vec![1.5, -2.0])).unwrap();
            let b = class(kk.clone());
            let m = exact_v2_mixed(&k, &kk).unwrap();
            assert!(class_distance(&a, &b, m).unwrap() < 1e-10);
            assert_eq!(class_distance(&a, &b, t * a.v2).unwrap(), 0.0);
        }
    }

    #[test]
    fn class_validation() {
        let seg = Body::segment(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert!(matches!(BodyClass::exact(seg), Err(Error::DegenerateClass(_))));
        let line = Body::cuboid(vec![2.0]).unwrap();
        assert!(matches!(BodyClass::exact(line), Err(Error::DegenerateClass(_))));
        let sq = class(Body::cuboid(vec![1.0, 1.0]).unwrap());
        assert!(matches!(class_distance(&sq, &sq, 0.9), Err(Error::InconsistentInputs(_))));
        assert_eq!(class_distance(&sq, &sq, 1.0 - 1e-7).unwrap(), 0.0);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(0.0, 3.0), 3.0);
        assert!((phi(1.0, 3.0) - 3.0).abs() < 1e-15);
        assert!((phi(0.5, 2.0) - 5.0 / 3.0).abs() < 1e-15);
        for t in [0.0, 0.2, 0.5, 0.9] {
            assert!((phi(t, 1.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn geodesic_on_boxes() {
        let k0 = class(Body::cuboid(vec![1.0, 1.0]).unwrap());
        let k1 = class(Body::cuboid(vec![4.0, 0.25]).unwrap());
        let m = box_mixed_v2(&[1.0, 1.0], &[4.0, 0.25]);
        let total = class_distance(&k0, &k1, m).unwrap();
        let kt = geodesic_combination(&k0, &k1, 0.0).unwrap();
        let c = class(kt.clone());
        assert!(class_distance(&k0, &c, exact_v2_mixed(&k0.body, &kt).unwrap()).unwrap() < 1e-10);

        let (t, body) = arclength_point(&k0, &k1, m, 0.4 * total).unwrap();
        assert!(t > 0.0 && t < 1.0);
        let c = class(body.clone());
        let d0 = class_distance(&k0, &c, exact_v2_mixed(&k0.body, &body).unwrap()).unwrap();
        let d1 = class_distance(&c, &k1, exact_v2_mixed(&body, &k1.body).unwrap()).unwrap();
        assert!((d0 - 0.4 * total).abs() < 1e-8);
        assert!((d0 + d1 - total).abs() < 1e-9);
        assert!(arclength_point(&k0, &k1, m, total * 1.01).is_err());
        assert!(geodesic_combination(&k0, &k1, 1.5).is_err());
    }

    #[test]
    fn gns_two_classes() {
        let b = PI / (2.0 * 2f64.sqrt());
        let k = KernelMatrix::new(vec!["disk".into(), "ball".into()], vec![vec![1.0, b], vec![b, 1.0]]).unwrap();
        let pts = gns_embed(&k, 0).unwrap();
        assert_eq!(pts[0].t, 1.0);
        let d = hyperbolic_distance(&pts[0], &pts[1]).unwrap();
        assert!((d - b.acosh()).abs() < 1e-12);
        assert!(embedding_roundtrip_error(&k, &pts).unwrap() < 1e-12);
    }

    #[test]
    fn gns_identical_classes_coincide() {
        let k = KernelMatrix::new((0..4).map(|i| i.to_string()).collect(), vec![vec![1.0; 4]; 4]).unwrap();
        let pts = gns_embed(&k, 2).unwrap();
        let d = distance_matrix(&pts).unwrap();
        assert!(d.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn gns_apex_is_exact() {
        let single = KernelMatrix::new(vec!["a".into()], vec![vec![1.0]]).unwrap();
        assert_eq!(gns_embed(&single, 0).unwrap(), vec![HyperboloidPoint::origin()]);

        let beta = vec![vec![1.0, 1.2, 1.5], vec![1.2, 1.0, 1.1], vec![1.5, 1.1, 1.0]];
        let k = KernelMatrix::new(vec!["a".into(), "b".into(), "c".into()], beta).unwrap();
        for base in 0..3 {
            let apex = &gns_embed(&k, base).unwrap()[base];
            assert_eq!(apex.t, 1.0);
            assert!(apex.x.0.iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn corrupted_kernels_are_rejected() {
        let labels: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let low = vec![vec![1.0, 0.9, 1.2], vec![0.9, 1.0, 1.1], vec![1.2, 1.1, 1.0]];
        assert!(matches!(KernelMatrix::new(labels.clone(), low), Err(Error::NotHyperbolicType(_))));
        // Entries ≥ 1, but the deformation is indefinite: β₁₃ far beyond
        // what the triangle inequality allows.
        let wide = vec![vec![1.0, 1.0, 10.0], vec![1.0, 1.0, 1.0], vec![10.0, 1.0, 1.0]];
        let k = KernelMatrix::new(labels.clone(), wide).unwrap();
        assert!(matches!(gns_embed(&k, 1), Err(Error::NotHyperbolicType(_))));
        let asym = vec![vec![1.0, 1.1, 1.2], vec![1.2, 1.0, 1.1], vec![1.2, 1.1, 1.0]];
        assert!(KernelMatrix::new(labels, asym).is_err());
    }

    #[test]
    fn kernel_csv_round_trip() {
        let k = KernelMatrix::new(
            vec!["sq".into(), "tri".into()],
            vec![vec![1.0, 1.0 + 1.0 / 3.0], vec![1.0 + 1.0 / 3.0, 1.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let back = KernelMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, k);
        assert!(KernelMatrix::read_csv("label,a\nb,1\n".as_bytes()).is_err());
    }

    #[test]
    fn gromov_examples() {
        let o = pt(0.0);
        let p = pt(1.3);
        let q = HyperboloidPoint::from_spatial(Vector(vec![-0.4, 2.0]));
        assert_eq!(gromov_product(&p, &p, &o).unwrap(), hyperbolic_distance(&p, &o).unwrap());
        assert!(gromov_product(&p, &q, &o).unwrap() >= 0.0);

        let ray: Vec<HyperboloidPoint> = (0..12).map(|k| pt(k as f64)).collect();
        let diag = cauchy_gromov_diagnostic(&ray, &o, 3).unwrap();
        assert!(diag.increasing);
        assert!(*diag.tail_minima.last().unwrap() > 8.0);
    }

    #[test]
    fn boundary_ray_examples() {
        assert_eq!(boundary_ray_distance(1.0, 0.0).unwrap(), 0.0);
        assert!(boundary_ray_distance(1.0, 1e6).unwrap() > 6.0);
        let mut prev = 0.0;
        for t in [0.1, 1.0, 10.0, 100.0] {
            let v = boundary_ray_distance(0.7, t).unwrap();
            assert!(v > prev);
            prev = v;
        }
        // Unit square and the unit segment along e₁: V₂(K, P) = ½.
        let sq = class(Body::cuboid(vec![1.0, 1.0]).unwrap());
        for t in [1.0, 2.0, 5.0] {
            let kt = class(Body::cuboid(vec![1.0 + t, 1.0]).unwrap());
            let m = box_mixed_v2(&[1.0, 1.0], &[1.0 + t, 1.0]);
            let direct = class_distance(&sq, &kt, m).unwrap();
            assert!((direct - boundary_ray_distance(0.5, t).unwrap()).abs() < 1e-9);
        }
    }
}
