#![allow(dead_code)]

use hykonv::bodies::{Body, Vector};
use hykonv::exact::exact_v2;
use hykonv::hull::{convex_hull_2d, shoelace_area};
use hykonv::rng::CounterRng;
use proptest::prelude::*;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// A convex polygon with 3 to 9 hull candidates drawn from stream `index`
/// of `seed`, shifted by up to 2 in each coordinate. Retries until the hull
/// has area at least 0.05.
pub fn random_polygon(seed: u64, index: u64) -> Body {
    let rng = CounterRng::new(seed);
    for attempt in 0.. {
        let mut s = rng.stream(index * 1024 + attempt);
        let n = 3 + (s.next_uniform() * 7.0) as usize;
        let shift = [4.0 * s.next_uniform() - 2.0, 4.0 * s.next_uniform() - 2.0];
        let scale = 0.5 + 1.5 * s.next_uniform();
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| {
                [shift[0] + scale * (2.0 * s.next_uniform() - 1.0), shift[1] + scale * (2.0 * s.next_uniform() - 1.0)]
            })
            .collect();
        let hull = convex_hull_2d(&pts);
        if hull.len() >= 3 && shoelace_area(&hull) >= 0.05 {
            return Body::polytope(hull.iter().map(|p| p.to_vec()).collect()).unwrap();
        }
    }
    unreachable!()
}

/// The same polygon scaled to `V₂ = 1`.
pub fn random_normalized_polygon(seed: u64, index: u64) -> Body {
    let k = random_polygon(seed, index);
    let v2 = exact_v2(&k).unwrap();
    k.scaled(1.0 / v2.sqrt()).unwrap()
}

pub fn coord() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

pub fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(coord(), dim)
}

/// Planar point clouds whose hull has positive area.
pub fn polygon_strategy() -> impl Strategy<Value = Body> {
    prop::collection::vec(point(2), 3..10)
        .prop_filter("hull must have area", |pts| {
            let p: Vec<[f64; 2]> = pts.iter().map(|v| [v[0], v[1]]).collect();
            shoelace_area(&convex_hull_2d(&p)) > 0.05
        })
        .prop_map(|pts| Body::polytope(pts).unwrap())
}

/// Bodies of every variant in dimension 3.
pub fn body3_strategy() -> impl Strategy<Value = Body> {
    let leaf = prop_oneof![
        prop::collection::vec(point(3), 1..8).prop_map(|v| Body::polytope(v).unwrap()),
        prop::collection::vec(0.1..3.0f64, 3).prop_map(|l| Body::cuboid(l).unwrap()),
        (1usize..=3, 0.1..2.0f64, point(3)).prop_map(|(d, r, c)| Body::ball(d, r, c).unwrap()),
        (point(3), point(3)).prop_map(|(a, b)| Body::segment(a, b).unwrap()),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop::collection::vec((0.0..2.0f64, inner), 1..3).prop_map(|terms| {
            let mut terms = terms;
            terms[0].0 += 0.1;
            hykonv::bodies::minkowski_combine(terms).unwrap()
        })
    })
}

pub fn direction(dim: usize) -> impl Strategy<Value = Vector> {
    point(dim).prop_map(Vector)
}
