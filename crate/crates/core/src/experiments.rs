//! Convergence experiments on sequences of ball, box and rectangle classes.
//!
//! Everything here is closed form: balls through the nested-ball mixed
//! volume, boxes and rectangles through elementary symmetric polynomials.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exact::{ball_intrinsic_volume, box_mixed_v2, elementary_symmetric, v2_ball_ball, v2_box_ball_cross};
use crate::hyperbolic::{arccosh_clamped, boundary_ray_distance};

pub const BALL_SEQUENCE_N_MAX: usize = 200;
pub const BOX_BALL_N_MAX: usize = 60;
pub const RECTANGLE_N_MAX: usize = 50;
pub const O_LIMIT_N_MAX: usize = 10_000;

/// One row of an experiment table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub n: usize,
    pub values: Vec<(String, f64)>,
}

impl ExperimentRecord {
    pub fn new(experiment: &str, n: usize, values: Vec<(&str, f64)>) -> Self {
        ExperimentRecord {
            experiment: experiment.to_string(),
            n,
            values: values.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRun {
    pub experiment: String,
    pub records: Vec<ExperimentRecord>,
    /// Set by experiments that classify the sequence.
    pub cauchy: Option<bool>,
}

impl ExperimentRun {
    pub fn column(&self, name: &str) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.get(name)).collect()
    }

    fn check_finite(self) -> Result<Self> {
        for r in &self.records {
            if let Some((k, v)) = r.values.iter().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NumericalDegeneracy(format!("{} n={}: {k} = {v}", r.experiment, r.n)));
            }
        }
        Ok(self)
    }
}

/// `d([Bⁿ], [Bᵐ])` for `2 ≤ n ≤ m`.
pub fn ball_distance(n: usize, m: usize) -> Result<f64> {
    let mixed = v2_ball_ball(n, m)?;
    Ok(arccosh_clamped(mixed / (PI * (((n - 1) * (m - 1)) as f64).sqrt())))
}

/// Distance between the classes of two axis-aligned boxes; the shorter
/// length list is zero-padded.
pub fn box_distance(a: &[f64], b: &[f64]) -> f64 {
    let v2 = |l: &[f64]| elementary_symmetric(l).get(2).copied().unwrap_or(0.0);
    arccosh_clamped(box_mixed_v2(a, b) / (v2(a) * v2(b)).sqrt())
}

/// `V₁/√(2V₂)`, which tends to 1 along sequences converging to the limit
/// point of shrinking bodies.
fn box_ratio(l: &[f64]) -> f64 {
    let e = elementary_symmetric(l);
    e[1] / (2.0 * e[2]).sqrt()
}

/// For `n = 2..=n_max`: `V₁(Bⁿ)/√(2V₂(Bⁿ))` and `d([Bⁿ], [B²ⁿ])`.
pub fn run_ball_sequence(n_max: usize) -> Result<ExperimentRun> {
    if n_max < 3 {
        return Err(invalid("ball sequence needs n_max >= 3"));
    }
    let mut records = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        let v1 = ball_intrinsic_volume(n, 1)?;
        let v2 = (n - 1) as f64 * PI;
        records.push(ExperimentRecord::new(
            "ball_sequence",
            n,
            vec![("ratio", v1 / (2.0 * v2).sqrt()), ("distance_to_double", ball_distance(n, 2 * n)?)],
        ));
    }
    ExperimentRun { experiment: "ball_sequence".into(), records, cauchy: None }.check_finite()
}

/// Side-length schedules of rectangle sections `R_n = Π_{i≤n} [0, ℓᵢ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthRule {
    Constant,
    /// `ℓᵢ = i^p`.
    Polynomial(f64),
    /// `ℓᵢ = rⁱ`.
    Geometric(f64),
}

impl LengthRule {
    fn log_length(&self, i: usize) -> f64 {
        let i = i as f64;
        match *self {
            LengthRule::Constant => 0.0,
            LengthRule::Polynomial(p) => p * i.ln(),
            LengthRule::Geometric(r) => i * r.ln(),
        }
    }

    /// `ℓᵢ` itself, without normalization.
    pub fn value(&self, i: usize) -> f64 {
        self.log_length(i).exp()
    }

    /// `ℓ₁..ℓ_n` divided by their maximum. Every column of the rectangle
    /// experiment is scale-invariant, and the division keeps fast-growing
    /// rules in range.
    pub fn lengths(&self, n: usize) -> Vec<f64> {
        let logs: Vec<f64> = (1..=n).map(|i| self.log_length(i)).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        logs.iter().map(|l| (l - top).exp()).collect()
    }

    /// Whether `Σ ℓᵢ < ∞`, in which case the sections converge to a bounded
    /// rectangle.
    pub fn is_summable(&self) -> bool {
        match *self {
            LengthRule::Constant => false,
            LengthRule::Polynomial(p) => p < -1.0,
            LengthRule::Geometric(r) => r < 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LengthRule::Geometric(r) if !(r > 0.0 && r.is_finite()) => Err(invalid("geometric ratio must be positive")),
            LengthRule::Polynomial(p) if !p.is_finite() => Err(invalid("polynomial exponent must be finite")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for LengthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthRule::Constant => write!(f, "constant"),
            LengthRule::Polynomial(p) => write!(f, "polynomial({p})"),
            LengthRule::Geometric(r) => write!(f, "geometric({r})"),
        }
    }
}

impl FromStr for LengthRule {
    type Err = Error;

    /// `constant`, `polynomial(p)` or `geometric(r)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "constant" {
            return Ok(LengthRule::Constant);
        }
        let arg = |prefix: &str| -> Option<Result<f64>> {
            let inner = s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            Some(inner.trim().parse::<f64>().map_err(|e| invalid(format!("rule parameter: {e}"))))
        };
        let rule = if let Some(p) = arg("polynomial") {
            LengthRule::Polynomial(p?)
        } else if let Some(r) = arg("geometric") {
            LengthRule::Geometric(r?)
        } else {
            return Err(invalid(format!("unknown length rule '{s}'")));
        };
        rule.validate()?;
        Ok(rule)
    }
}

/// Decay test on the criterion column: the ratio `Σℓᵢ²/(Σℓᵢ)²` must shrink
/// by at least this factor between `n_max/2` and `n_max`.
pub const CRITERION_DECAY: f64 = 0.75;

/// For `n = 2..=n_max`: the criterion `Σℓᵢ²/(Σℓᵢ)²`, `V₁/√(2V₂)` and
/// `d([R_n], [R_{n+1}])`. The run is flagged Cauchy when the criterion
/// decays or the lengths are summable.
pub fn run_rectangle_sections(rule: LengthRule, n_max: usize) -> Result<ExperimentRun> {
    rule.validate()?;
    if n_max < 2 {
        return Err(invalid("rectangle sections need n_max >= 2"));
    }
    let mut records = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        let all = rule.lengths(n + 1);
        let l = &all[..n];
        let s: f64 = l.iter().sum();
        let s2: f64 = l.iter().map(|x| x * x).sum();
        records.push(ExperimentRecord::new(
            "rectangle_sections",
            n,
            vec![
                ("criterion", s2 / (s * s)),
                ("ratio", box_ratio(l)),
                ("consecutive_distance", box_distance(l, &all[..n + 1])),
            ],
        ));
    }
    let crit = |n: usize| records[n - 2].get("criterion").unwrap_or(f64::NAN);
    let half = (n_max / 2).max(2);
    let decays = n_max > half && crit(n_max) < CRITERION_DECAY * crit(half);
    let cauchy = decays || rule.is_summable();
    ExperimentRun { experiment: "rectangle_sections".into(), records, cauchy: Some(cauchy) }.check_finite()
}

/// `d([R_n], [R'_n])` for two length rules, `n = 2..=n_max`.
pub fn run_rectangle_cross(a: LengthRule, b: LengthRule, n_max: usize) -> Result<ExperimentRun> {
    a.validate()?;
    b.validate()?;
    if n_max < 2 {
        return Err(invalid("rectangle sections need n_max >= 2"));
    }
    let (la, lb) = (a.lengths(n_max), b.lengths(n_max));
    let records = (2..=n_max)
        .map(|n| {
            ExperimentRecord::new("rectangle_cross", n, vec![("cross_distance", box_distance(&la[..n], &lb[..n]))])
        })
        .collect();
    ExperimentRun { experiment: "rectangle_cross".into(), records, cauchy: None }.check_finite()
}

/// `d([Iₙ], [Bⁿ])` for the cube `[−1, 1]ⁿ` and the unit ball,
/// `n = 3..=n_max`.
pub fn run_box_ball_comparison(n_max: usize) -> Result<ExperimentRun> {
    if n_max < 3 {
        return Err(invalid("box-ball comparison needs n_max >= 3"));
    }
    let mut records = Vec::with_capacity(n_max - 2);
    for n in 3..=n_max {
        let v2_cube = 2.0 * (n * (n - 1)) as f64;
        let v2_ball = (n - 1) as f64 * PI;
        let cross = v2_box_ball_cross(n)?;
        records.push(ExperimentRecord::new(
            "box_ball",
            n,
            vec![("distance", arccosh_clamped(cross / (v2_cube * v2_ball).sqrt())), ("mixed_v2", cross)],
        ));
    }
    ExperimentRun { experiment: "box_ball".into(), records, cauchy: None }.check_finite()
}

/// Shrinking against growing diameters, `n = 2..=n_max`:
///
/// - `ball_consecutive`: `d([Bⁿ], [Bⁿ⁺¹])`, and `ball_diameter` of
///   `Bⁿ/√V₂(Bⁿ)`;
/// - `box_distance`: `d([box(n, 1)], [unit square])`, and `box_diameter`
///   of the normalized box;
/// - `ray_distance`: distance along the ray `K + nP` with `K` the unit
///   square and `P` a unit edge.
pub fn run_o_limit(n_max: usize) -> Result<ExperimentRun> {
    if n_max < 2 {
        return Err(invalid("O-limit experiment needs n_max >= 2"));
    }
    let mut records = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        let nf = n as f64;
        let v2_ball = (nf - 1.0) * PI;
        records.push(ExperimentRecord::new(
            "o_limit",
            n,
            vec![
                ("ball_consecutive", ball_distance(n, n + 1)?),
                ("ball_diameter", 2.0 / v2_ball.sqrt()),
                ("box_distance", box_distance(&[nf, 1.0], &[1.0, 1.0])),
                ("box_diameter", (nf * nf + 1.0).sqrt() / nf.sqrt()),
                ("ray_distance", boundary_ray_distance(0.5, nf)?),
            ],
        ));
    }
    ExperimentRun { experiment: "o_limit".into(), records, cauchy: None }.check_finite()
}

/// `V₂(I, Bᵐ)` for the unit segment `I` along a coordinate axis.
fn segment_ball_mixed_v2(m: usize) -> Result<f64> {
    Ok(0.5 * ball_intrinsic_volume(m - 1, 1)?)
}

/// `(V₂(Kₙ), V₂(Kₙ, Bⁿ⁺¹))` for `Kₙ = I + c Bⁿ⁺¹`.
fn segment_ball_v2(n: usize, c: f64) -> Result<(f64, f64)> {
    let m = n + 1;
    let s = segment_ball_mixed_v2(m)?;
    let ball = (m - 1) as f64 * PI;
    Ok((2.0 * c * s + c * c * ball, s + c * ball))
}

/// `Kₙ = I + cₙ Bⁿ⁺¹` with `I` the unit segment on the first axis and `cₙ`
/// taken from `rule` without normalization, `n = 1..=n_max`. Columns: `c`,
/// `distance_to_ball` `d([Kₙ], [Bⁿ⁺¹])` and `consecutive_distance`
/// `d([Kₙ], [Kₙ₊₁])`. Mixed volumes follow from bilinearity.
pub fn run_segment_ball(rule: LengthRule, n_max: usize) -> Result<ExperimentRun> {
    rule.validate()?;
    if n_max < 1 {
        return Err(invalid("segment-ball sequence needs n_max >= 1"));
    }
    let mut records = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (c, c1) = (rule.value(n), rule.value(n + 1));
        let (m, m1) = (n + 1, n + 2);
        let (v2, with_ball) = segment_ball_v2(n, c)?;
        let (v2_next, _) = segment_ball_v2(n + 1, c1)?;
        let ball = (m - 1) as f64 * PI;
        let mixed_next =
            c1 * segment_ball_mixed_v2(m1)? + c * segment_ball_mixed_v2(m)? + c * c1 * v2_ball_ball(m, m1)?;
        records.push(ExperimentRecord::new(
            "segment_ball",
            n,
            vec![
                ("c", c),
                ("distance_to_ball", arccosh_clamped(with_ball / (v2 * ball).sqrt())),
                ("consecutive_distance", arccosh_clamped(mixed_next / (v2 * v2_next).sqrt())),
            ],
        ));
    }
    ExperimentRun { experiment: "segment_ball".into(), records, cauchy: None }.check_finite()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_sequence_examples() {
        let run = run_ball_sequence(100).unwrap();
        assert_eq!(run.records.len(), 99);
        let ratio = run.column("ratio");
        assert!((ratio[0] - (PI / 2.0).sqrt()).abs() < 1e-14);
        assert!(ratio.windows(2).all(|w| w[1] < w[0]));
        assert!((ratio.last().unwrap() - 1.0).abs() < 0.01);
        assert!(run_ball_sequence(2).is_err());
    }

    #[test]
    fn ball_distance_at_100() {
        let d = ball_distance(100, 200).unwrap();
        assert!((d - 0.050_387_9).abs() < 1e-6, "{d}");
        let d23 = ball_distance(2, 3).unwrap();
        assert!((d23 - (PI / (2.0 * 2f64.sqrt())).acosh()).abs() < 1e-12);
    }

    #[test]
    fn rectangle_rules() {
        let run = run_rectangle_sections(LengthRule::Constant, 50).unwrap();
        assert_eq!(run.cauchy, Some(true));
        for r in &run.records {
            assert!((r.get("criterion").unwrap() - 1.0 / r.n as f64).abs() < 1e-15);
        }
        let d = run.column("consecutive_distance");
        assert!(*d.last().unwrap() < 0.03);

        let run = run_rectangle_sections(LengthRule::Geometric(2.0), 50).unwrap();
        assert_eq!(run.cauchy, Some(false));
        assert!((run.column("criterion").last().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let floor =
            run.records[8..29].iter().map(|r| r.get("consecutive_distance").unwrap()).fold(f64::INFINITY, f64::min);
        assert!(floor > 0.69, "{floor}");

        assert_eq!(run_rectangle_sections(LengthRule::Polynomial(1.0), 50).unwrap().cauchy, Some(true));
        assert_eq!(run_rectangle_sections(LengthRule::Geometric(0.5), 50).unwrap().cauchy, Some(true));
    }

    #[test]
    fn huge_geometric_rule_stays_finite() {
        let run = run_rectangle_sections(LengthRule::Geometric(10.0), 1000).unwrap();
        assert_eq!(run.cauchy, Some(false));
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("constant".parse::<LengthRule>().unwrap(), LengthRule::Constant);
        assert_eq!("geometric(2)".parse::<LengthRule>().unwrap(), LengthRule::Geometric(2.0));
        assert_eq!("polynomial(1.5)".parse::<LengthRule>().unwrap(), LengthRule::Polynomial(1.5));
        assert!("geometric(-1)".parse::<LengthRule>().is_err());
        assert!("fibonacci".parse::<LengthRule>().is_err());
        let r = LengthRule::Geometric(2.0);
        assert_eq!(r.to_string().parse::<LengthRule>().unwrap(), r);
    }

    #[test]
    fn polynomial_rules_share_a_limit() {
        let run = run_rectangle_cross(LengthRule::Constant, LengthRule::Polynomial(1.0), 400).unwrap();
        let d = run.column("cross_distance");
        assert!(d[100] < d[10]);
        assert!(*d.last().unwrap() < 0.15);
    }

    #[test]
    fn box_ball_examples() {
        let run = run_box_ball_comparison(60).unwrap();
        let d = run.column("distance");
        let n3 = (3.0 * PI / (24.0 * PI).sqrt()).acosh();
        assert!((d[0] - n3).abs() < 1e-14);
        assert!(d.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn o_limit_examples() {
        let run = run_o_limit(10_000).unwrap();
        let last = run.records.last().unwrap();
        assert!(last.get("ball_consecutive").unwrap() < 1e-3);
        assert!(last.get("box_distance").unwrap() > 3.0);
        assert!(last.get("ray_distance").unwrap() > 3.0);
        let b = run.column("box_distance");
        assert!(b.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn segment_ball_matches_quadrature() {
        use crate::bodies::{minkowski_combine, Body};
        use crate::exact::{v2_mixed_quadrature, QuadratureRule};
        let rule: LengthRule = "geometric(0.5)".parse().unwrap();
        let run = run_segment_ball(rule, 2).unwrap();
        for n in 1..=2 {
            let m = n + 1;
            let body = |c: f64| {
                let from = vec![0.0; m];
                let mut to = vec![0.0; m];
                to[0] = 1.0;
                minkowski_combine(vec![(1.0, Body::segment(from, to).unwrap()), (c, Body::unit_ball(m).unwrap())])
                    .unwrap()
            };
            let k = body(rule.value(n));
            let ball = Body::unit_ball(m).unwrap();
            let q = QuadratureRule::default_for(m).unwrap();
            let v2 = v2_mixed_quadrature(&k, &k, &q).unwrap();
            let mixed = v2_mixed_quadrature(&k, &ball, &q).unwrap();
            let expected = arccosh_clamped(mixed / (v2 * (m - 1) as f64 * PI).sqrt());
            let got = run.records[n - 1].get("distance_to_ball").unwrap();
            assert!((got - expected).abs() < 1e-5, "n={n}: {got} vs {expected}");
        }
    }

    #[test]
    fn segment_ball_schedules() {
        let fixed = run_segment_ball(LengthRule::Constant, 200).unwrap();
        let d = fixed.column("distance_to_ball");
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        // A shrinking radius pushes the class towards the segment end of
        // the geodesic.
        let shrinking = run_segment_ball("geometric(0.5)".parse().unwrap(), 40).unwrap();
        let d = shrinking.column("distance_to_ball");
        assert!(d.last().unwrap() > &5.0);
        assert!(run_segment_ball(LengthRule::Constant, 0).is_err());
    }
}
