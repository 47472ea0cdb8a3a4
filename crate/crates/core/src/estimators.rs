//! Monte-Carlo functionals of the isonormal Gaussian process.
//!
//! The process is realised on the first `truncation_dim` coordinates as
//! `X_v = Σ vᵢ Xᵢ` with iid standard normal `Xᵢ`. Sample `i` draws its
//! normals from the counter-based stream `i` of the configured seed, and
//! all reductions run over the per-sample values in index order with a
//! fixed pairwise pattern, so results are bit-identical for every worker
//! count.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use serde::Serialize;

use crate::bodies::{dot, Body, Vector};
use crate::error::{invalid, Error, Result};
use crate::exact::ball_intrinsic_volume;
use crate::hull::hull_area;
use crate::rng::{map_indexed, pairwise_sum, CounterRng, SampleStream};

pub const DEFAULT_SAMPLES: usize = 100_000;

/// Largest total order accepted by [`chaos_coefficient`].
pub const MAX_CHAOS_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub samples: usize,
    /// Number of coordinates on which the process is instantiated. `None`
    /// means the largest ambient dimension among the bodies of the run.
    pub truncation_dim: Option<usize>,
    /// Worker count for the sampling pool; never affects results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl SamplerConfig {
    pub fn new(seed: u64, samples: usize) -> Self {
        SamplerConfig { seed, samples, truncation_dim: None, threads: None }
    }

    pub fn with_truncation_dim(mut self, dim: usize) -> Self {
        self.truncation_dim = Some(dim);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn dim_for(&self, bodies: &[&Body]) -> Result<usize> {
        let needed = bodies.iter().map(|b| b.ambient_dim()).max().unwrap_or(1);
        match self.truncation_dim {
            Some(d) if d < needed => {
                Err(Error::DimensionMismatch(format!("truncation dimension {d} below body dimension {needed}")))
            }
            Some(d) => Ok(d),
            None => Ok(needed),
        }
    }

    fn check_samples(&self) -> Result<()> {
        if self.samples == 0 {
            Err(Error::ZeroSamples)
        } else {
            Ok(())
        }
    }

    /// Runs `f` on the stream of every sample index, in parallel.
    fn run<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut SampleStream) -> T + Sync + Send,
    {
        let rng = CounterRng::new(self.seed);
        map_indexed(self.samples, self.threads, |i| f(&mut rng.stream(i)))
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig::new(0, DEFAULT_SAMPLES)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorResult {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl EstimatorResult {
    /// `scale × mean(values)` with its standard error.
    pub fn from_values(values: &[f64], scale: f64, seed: u64) -> Self {
        let (mean, se) = mean_and_se(values);
        EstimatorResult { estimate: scale * mean, std_error: scale.abs() * se, samples: values.len(), seed }
    }

    /// Signed distance to `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.estimate - target;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }

    pub fn within_sigma(&self, target: f64, k: f64) -> bool {
        self.z_score(target).abs() <= k
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Whether two independent estimates agree within `k` combined standard
/// errors.
pub fn agree_within(a: &EstimatorResult, b: &EstimatorResult, k: f64) -> bool {
    let s = a.std_error.hypot(b.std_error);
    let d = (a.estimate - b.estimate).abs();
    d <= k * s
}

/// `dim` iid standard normal coordinates from `stream`.
pub fn sample_gaussian_direction(dim: usize, stream: &mut SampleStream) -> Vector {
    Vector(stream.gaussian_vector(dim.max(1)))
}

/// `V₁(K) = √(2π) E[sup_{v∈K} X_v]`.
pub fn estimate_v1(body: &Body, config: &SamplerConfig) -> Result<EstimatorResult> {
    config.check_samples()?;
    let dim = config.dim_for(&[body])?;
    let vals = config.run(|s| body.support(&s.gaussian_vector(dim)));
    Ok(EstimatorResult::from_values(&vals, TAU.sqrt(), config.seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinerEstimate {
    pub point: Vector,
    pub std_error: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

/// `Stein(K) = E[h_K(X) X]`, coordinate by coordinate.
pub fn estimate_steiner_point(body: &Body, config: &SamplerConfig) -> Result<SteinerEstimate> {
    config.check_samples()?;
    let dim = config.dim_for(&[body])?;
    let rows = config.run(|s| {
        let x = s.gaussian_vector(dim);
        let h = body.support(&x);
        x.into_iter().map(|xi| h * xi).collect::<Vec<f64>>()
    });
    let mut point = Vec::with_capacity(dim);
    let mut se = Vec::with_capacity(dim);
    for i in 0..dim {
        let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        let (m, e) = mean_and_se(&col);
        point.push(m);
        se.push(e);
    }
    Ok(SteinerEstimate { point: Vector(point), std_error: se, samples: config.samples, seed: config.seed })
}

/// `V₂(K) = π E[h_K(X)² − ‖Dh_K(X)‖²]` with `Dh_K(X)` the maximal point.
pub fn estimate_v2_malliavin(body: &Body, config: &SamplerConfig) -> Result<EstimatorResult> {
    config.check_samples()?;
    let dim = config.dim_for(&[body])?;
    let vals = config.run(|s| {
        let x = s.gaussian_vector(dim);
        let h = body.support(&x);
        let p = body.argmax(&x);
        h * h - dot(&p, &p)
    });
    Ok(EstimatorResult::from_values(&vals, PI, config.seed))
}

/// `V₂(K, K') = π E[h_K h_K' − (Dh_K, Dh_K')]`.
pub fn estimate_v2_mixed_malliavin(body: &Body, other: &Body, config: &SamplerConfig) -> Result<EstimatorResult> {
    config.check_samples()?;
    let dim = config.dim_for(&[body, other])?;
    let vals = config.run(|s| {
        let x = s.gaussian_vector(dim);
        let p = body.argmax(&x);
        let q = other.argmax(&x);
        body.support(&x) * other.support(&x) - dot(&p, &q)
    });
    Ok(EstimatorResult::from_values(&vals, PI, config.seed))
}

/// `V_k(K) = (2π)^{k/2}/(k! κ_k) E[λ_k(shadow)]` for `k ∈ {1, 2}`, the
/// shadow being the image of `K` under `k` independent copies of the process.
pub fn estimate_vk_tsirelson(body: &Body, k: usize, config: &SamplerConfig) -> Result<EstimatorResult> {
    if k != 1 && k != 2 {
        return Err(Error::NotImplemented(format!("shadow estimator for k = {k} (only 1 and 2)")));
    }
    config.check_samples()?;
    let dim = config.dim_for(&[body])?;
    let vertices = body.vertex_set().ok_or_else(|| invalid("shadow estimator needs a polytopal body"))?;
    if k == 1 {
        let vals = config.run(|s| {
            let x = s.gaussian_vector(dim);
            let (lo, hi) = vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let t = v.dot(&x);
                (lo.min(t), hi.max(t))
            });
            hi - lo
        });
        // (2π)^{1/2} / (1! κ₁)
        Ok(EstimatorResult::from_values(&vals, TAU.sqrt() / 2.0, config.seed))
    } else {
        let vals = config.run(|s| {
            let x1 = s.gaussian_vector(dim);
            let x2 = s.gaussian_vector(dim);
            let shadow: Vec<[f64; 2]> = vertices.iter().map(|v| [v.dot(&x1), v.dot(&x2)]).collect();
            hull_area(&shadow)
        });
        // (2π)^1 / (2! κ₂) = 1
        Ok(EstimatorResult::from_values(&vals, 1.0, config.seed))
    }
}

/// Probabilists' Hermite polynomial, `H_{n+1} = x H_n − n H_{n−1}`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosCoefficient {
    /// Coordinate (zero-based) → Hermite order.
    pub multi_index: BTreeMap<usize, usize>,
    pub value: f64,
    pub std_error: f64,
}

/// `E[h_K(X) Π H_{kᵢ}(Xᵢ)] / Π kᵢ!`: the coefficient of `h_K(X)` on the
/// Hermite basis element of the given multi-index.
pub fn chaos_coefficient(
    body: &Body,
    multi_index: &BTreeMap<usize, usize>,
    config: &SamplerConfig,
) -> Result<ChaosCoefficient> {
    let order: usize = multi_index.values().sum();
    if order > MAX_CHAOS_ORDER {
        return Err(Error::OutOfRange { what: "chaos order", detail: format!("{order} > {MAX_CHAOS_ORDER}") });
    }
    config.check_samples()?;
    let mut dim = config.dim_for(&[body])?;
    if let Some((&top, _)) = multi_index.iter().next_back() {
        if config.truncation_dim.is_some() && top >= dim {
            return Err(Error::OutOfRange {
                what: "multi-index coordinate",
                detail: format!("{top} outside truncation dimension {dim}"),
            });
        }
        dim = dim.max(top + 1);
    }
    let norm: f64 = multi_index.values().map(|&k| factorial(k)).product();
    let vals = config.run(|s| {
        let x = s.gaussian_vector(dim);
        let basis: f64 = multi_index.iter().map(|(&i, &k)| hermite(k, x[i])).product();
        body.support(&x) * basis
    });
    let r = EstimatorResult::from_values(&vals, 1.0 / norm, config.seed);
    Ok(ChaosCoefficient { multi_index: multi_index.clone(), value: r.estimate, std_error: r.std_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayleighCheck {
    /// `E‖Dφ‖²`.
    pub lhs: f64,
    /// `2E[φ²] − 2(E[φ])²`.
    pub rhs: f64,
    /// Standard error of `lhs − rhs`.
    pub std_error: f64,
    /// `(lhs − rhs) / std_error`.
    pub margin: f64,
}

/// Both sides of `E‖Dφ‖² ≥ 2E[φ²] − 2(E φ)²` for `φ = h_K(X)`.
/// Meaningful for Steiner-centered bodies, whose support function has no
/// first-chaos component.
pub fn rayleigh_check(body: &Body, config: &SamplerConfig) -> Result<RayleighCheck> {
    config.check_samples()?;
    let dim = config.dim_for(&[body])?;
    let rows = config.run(|s| {
        let x = s.gaussian_vector(dim);
        let h = body.support(&x);
        let p = body.argmax(&x);
        (dot(&p, &p), h * h, h)
    });
    let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let c: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let n = rows.len() as f64;
    let (ma, mb, mc) = (pairwise_sum(&a) / n, pairwise_sum(&b) / n, pairwise_sum(&c) / n);
    let lhs = ma;
    let rhs = 2.0 * mb - 2.0 * mc * mc;
    // Delta method: linearize the difference around the sample means.
    let infl: Vec<f64> = rows.iter().map(|r| r.0 - 2.0 * r.1 + 4.0 * mc * r.2).collect();
    let (_, se) = mean_and_se(&infl);
    let diff = lhs - rhs;
    let margin = if se > 0.0 {
        diff / se
    } else if diff >= -1e-15 {
        0.0
    } else {
        f64::NEG_INFINITY
    };
    Ok(RayleighCheck { lhs, rhs, std_error: se, margin })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuEigenCheck {
    /// `E‖D Hₙ(X_v)‖²` with `D Hₙ(X_v) = n H_{n−1}(X_v) v`.
    pub gradient_energy: EstimatorResult,
    /// `n E[Hₙ(X_v)²]`.
    pub scaled_energy: EstimatorResult,
    /// `n · n!`, the common exact value.
    pub exact: f64,
    /// Difference of the two sides in standard errors of the paired
    /// difference.
    pub margin: f64,
}

/// Statistical check of the eigen-relation of the Ornstein–Uhlenbeck
/// operator on `Hₙ(X_v)` for a unit direction `v`.
pub fn ou_eigen_check(n: usize, direction: &Vector, config: &SamplerConfig) -> Result<OuEigenCheck> {
    if !(1..=6).contains(&n) {
        return Err(Error::OutOfRange { what: "n", detail: format!("{n} not in 1..=6") });
    }
    config.check_samples()?;
    let norm = direction.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(invalid("direction must be a nonzero finite vector"));
    }
    let v = direction.scaled(1.0 / norm);
    let dim = match config.truncation_dim {
        Some(d) if d < v.len() => return Err(Error::DimensionMismatch("direction longer than truncation".into())),
        Some(d) => d,
        None => v.len(),
    };
    let nf = n as f64;
    let rows = config.run(|s| {
        let xv = v.dot(&s.gaussian_vector(dim));
        let d = nf * hermite(n - 1, xv);
        let h = hermite(n, xv);
        (d * d * v.norm_sq(), nf * h * h)
    });
    let lhs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let diff: Vec<f64> = rows.iter().map(|r| r.0 - r.1).collect();
    let (md, sd) = mean_and_se(&diff);
    Ok(OuEigenCheck {
        gradient_energy: EstimatorResult::from_values(&lhs, 1.0, config.seed),
        scaled_energy: EstimatorResult::from_values(&rhs, 1.0, config.seed),
        exact: nf * factorial(n),
        margin: if sd > 0.0 { md / sd } else { 0.0 },
    })
}

/// Families of truncated bodies probed for Gaussian boundedness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GbFamily {
    /// `Π [−ℓᵢ/2, ℓᵢ/2]`: `sup X = Σ (ℓᵢ/2)|Xᵢ|`.
    Rectangle,
    /// `{Σ xᵢ²/bᵢ² ≤ 1}`: `sup X = (Σ bᵢ² Xᵢ²)^{1/2}`.
    Ellipsoid,
    /// `conv{±aᵢ eᵢ}`: `sup X = maxᵢ |aᵢ Xᵢ|`.
    Octahedron,
}

impl FromStr for GbFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangle" => Ok(GbFamily::Rectangle),
            "ellipsoid" => Ok(GbFamily::Ellipsoid),
            "octahedron" => Ok(GbFamily::Octahedron),
            other => Err(invalid(format!("unknown family '{other}'"))),
        }
    }
}

/// `E[sup X]` over the `d`-dimensional truncation of a family, for every
/// `d` in `dims`. All truncations share the same samples, so increments
/// between dimensions are not blurred by independent noise.
pub fn gb_probe(
    family: GbFamily,
    parameters: &[f64],
    dims: &[usize],
    config: &SamplerConfig,
) -> Result<Vec<(usize, EstimatorResult)>> {
    config.check_samples()?;
    let top = dims.iter().copied().max().unwrap_or(0);
    if top == 0 || dims.contains(&0) {
        return Err(invalid("probe dimensions must be positive"));
    }
    if parameters.len() < top {
        return Err(invalid(format!("{} parameters for truncation dimension {top}", parameters.len())));
    }
    if parameters.iter().take(top).any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid("family parameters must be nonnegative and finite"));
    }
    let rows = config.run(|s| {
        let x = s.gaussian_vector(top);
        dims.iter()
            .map(|&d| {
                let terms = parameters.iter().zip(&x).take(d);
                match family {
                    GbFamily::Rectangle => terms.map(|(l, xi)| 0.5 * l * xi.abs()).sum(),
                    GbFamily::Ellipsoid => terms.map(|(b, xi)| (b * xi).powi(2)).sum::<f64>().sqrt(),
                    GbFamily::Octahedron => terms.map(|(a, xi)| (a * xi).abs()).fold(0.0, f64::max),
                }
            })
            .collect::<Vec<f64>>()
    });
    Ok(dims
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            (d, EstimatorResult::from_values(&col, 1.0, config.seed))
        })
        .collect())
}

/// Lower estimate of the Hausdorff distance: the largest support-function
/// gap over `n_directions` uniformly random unit directions.
pub fn estimate_hausdorff(body: &Body, other: &Body, n_directions: usize, config: &SamplerConfig) -> Result<f64> {
    if n_directions == 0 {
        return Err(Error::ZeroSamples);
    }
    let cfg = SamplerConfig { samples: n_directions, ..*config };
    let dim = cfg.dim_for(&[body, other])?;
    let gaps = cfg.run(|s| {
        let x = s.gaussian_vector(dim);
        let r = dot(&x, &x).sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let u: Vec<f64> = x.iter().map(|c| c / r).collect();
        (body.support(&u) - other.support(&u)).abs()
    });
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// `[d_H, V₁(B^d) d_H]`, the interval known to contain the Vitale distance,
/// with `d_H` from [`estimate_hausdorff`] and `d` the common ambient
/// dimension.
pub fn vitale_bounds(body: &Body, other: &Body, n_directions: usize, config: &SamplerConfig) -> Result<(f64, f64)> {
    let dh = estimate_hausdorff(body, other, n_directions, config)?;
    let d = config.dim_for(&[body, other])?;
    Ok((dh, ball_intrinsic_volume(d, 1)? * dh))
}

/// Hit-or-miss volume of a set inside the box `[lower, upper]`.
pub fn hit_or_miss_volume<F>(
    lower: &[f64],
    upper: &[f64],
    contains: F,
    config: &SamplerConfig,
) -> Result<EstimatorResult>
where
    F: Fn(&[f64]) -> bool + Sync + Send,
{
    config.check_samples()?;
    if lower.len() != upper.len() || lower.is_empty() {
        return Err(Error::DimensionMismatch("bounding box corners differ in length".into()));
    }
    if lower.iter().zip(upper).any(|(a, b)| !(b > a)) {
        return Err(invalid("bounding box must have positive extent"));
    }
    let vol: f64 = lower.iter().zip(upper).map(|(a, b)| b - a).product();
    let hits = config.run(|s| {
        let p: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| a + (b - a) * s.next_uniform()).collect();
        if contains(&p) {
            1.0
        } else {
            0.0
        }
    });
    Ok(EstimatorResult::from_values(&hits, vol, config.seed))
}
