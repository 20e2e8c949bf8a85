#![allow(dead_code)]

use std::collections::BTreeMap;

use energy_space::{GraphFunction, VertexId, WeightedGraph};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn int(n: i64) -> VertexId {
    VertexId::Int(n)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random connected graph on 0..n: a random spanning tree plus extra edges
/// with probability `p`, weights uniform in [0.1, 10].
pub fn random_connected(rng: &mut StdRng, n: usize, p: f64) -> WeightedGraph {
    let mut edges = BTreeMap::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.insert((j, i), rng.random_range(0.1..=10.0));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !edges.contains_key(&(i, j)) && rng.random_bool(p) {
                edges.insert((i, j), rng.random_range(0.1..=10.0));
            }
        }
    }
    WeightedGraph::from_edges(
        edges
            .into_iter()
            .map(|((i, j), w)| (int(i as i64), int(j as i64), w)),
        int(0),
    )
    .expect("connected by construction")
}

pub fn random_graph(rng: &mut StdRng, max_vertices: usize) -> WeightedGraph {
    let n = rng.random_range(2..=max_vertices);
    let p = rng.random_range(0.0..0.3);
    random_connected(rng, n, p)
}

/// Graph Laplacian of a finite graph in label order.
pub fn laplacian(g: &WeightedGraph) -> (Vec<VertexId>, DMatrix<f64>) {
    let vs = g.vertices().expect("finite graph");
    let n = vs.len();
    let mut l = DMatrix::zeros(n, n);
    for (i, x) in vs.iter().enumerate() {
        for (y, w) in g.neighbors(x).unwrap() {
            let j = vs.iter().position(|v| *v == y).unwrap();
            l[(i, j)] -= w;
            l[(i, i)] += w;
        }
    }
    (vs, l)
}

/// Moore–Penrose pseudo-inverse of the Laplacian.
pub fn laplacian_pinv(g: &WeightedGraph) -> (Vec<VertexId>, DMatrix<f64>) {
    let (vs, l) = laplacian(g);
    let pinv = l.pseudo_inverse(1e-10).expect("pseudo-inverse");
    (vs, pinv)
}

/// k(x,y) = (e_x − e_o)ᵀ L⁺ (e_y − e_o).
pub fn pinv_kernel(g: &WeightedGraph, x: &VertexId, y: &VertexId) -> f64 {
    let (vs, p) = laplacian_pinv(g);
    let pos = |v: &VertexId| vs.iter().position(|w| w == v).unwrap();
    let (i, j, o) = (pos(x), pos(y), pos(g.base_point()));
    p[(i, j)] - p[(i, o)] - p[(o, j)] + p[(o, o)]
}

/// Uniform random values on every vertex of a finite graph.
pub fn random_function(rng: &mut StdRng, g: &WeightedGraph) -> GraphFunction {
    GraphFunction::finite(
        g.vertices()
            .unwrap()
            .into_iter()
            .map(|v| (v, rng.random_range(-1.0..1.0)))
            .collect(),
    )
}

/// Edge-sum energy pairing over consecutive integers lo..hi on the unit chain.
pub fn chain_pairing(u: &GraphFunction, v: &GraphFunction, lo: i64, hi: i64) -> f64 {
    (lo..hi)
        .map(|n| {
            let du = u.get(&int(n + 1)).unwrap_or(0.0) - u.get(&int(n)).unwrap_or(0.0);
            let dv = v.get(&int(n + 1)).unwrap_or(0.0) - v.get(&int(n)).unwrap_or(0.0);
            du * dv
        })
        .sum()
}
