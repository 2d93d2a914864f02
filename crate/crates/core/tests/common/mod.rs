#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use qgs::graph::{ExternalEdge, GraphSpec, InternalEdge, LocalScattering};
use qgs::{CMatrix, C64};
use rand::Rng;

/// Real symmetric orthogonal involution `Q D Qᵀ` with random signs on `D`,
/// keeping at least one of each sign when `n > 1`.
pub fn random_involution<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = a.qr().q();
    let mut signs: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    if n > 1 {
        signs[0] = 1.0;
        signs[1] = -1.0;
    }
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(signs));
    let s = &q * d * q.transpose();
    s.map(|x| C64::new(x, 0.0))
}

/// Connected graph on up to `max_vertices` vertices with random extra edges,
/// loops and double edges, one or more leads and symmetric unitary vertices.
pub fn random_graph<R: Rng>(rng: &mut R, max_vertices: usize) -> GraphSpec {
    let v = rng.gen_range(1..=max_vertices);
    let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut internal = Vec::new();
    let mut add = |a: usize, b: usize, rng: &mut R, internal: &mut Vec<InternalEdge>| {
        let key = (a.min(b), a.max(b));
        let j = pairs.entry(key).or_insert(0);
        *j += 1;
        internal.push(InternalEdge { a, b, j: *j, length: rng.gen_range(0.3..2.5), theta: rng.gen_range(-3.0..3.0) });
    };
    for b in 2..=v {
        let a = rng.gen_range(1..b);
        add(a, b, rng, &mut internal);
    }
    for _ in 0..rng.gen_range(0..=3) {
        let a = rng.gen_range(1..=v);
        let b = if rng.gen_bool(0.3) { a } else { rng.gen_range(1..=v) };
        add(a, b, rng, &mut internal);
    }
    let mut ext_count = vec![0usize; v + 1];
    let mut external = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let a = rng.gen_range(1..=v);
        ext_count[a] += 1;
        external.push(ExternalEdge { a, j: ext_count[a] });
    }
    let mut spec = GraphSpec { vertices: v, internal, external, local: BTreeMap::new() };
    for a in 1..=v {
        let deg = spec.degree(a);
        let local = if deg == 3 && rng.gen_bool(0.3) {
            LocalScattering::ScaleInvariantC { t: rng.gen_range(0.05..0.95) }
        } else if deg == 3 && rng.gen_bool(0.2) {
            LocalScattering::EnergyDependentE { t: rng.gen_range(0.05..0.95), eta: rng.gen_range(-2.0..2.0) }
        } else {
            LocalScattering::Constant(random_involution(rng, deg))
        };
        spec.local.insert(a, local);
    }
    spec
}
