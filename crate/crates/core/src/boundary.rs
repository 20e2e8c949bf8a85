//! Filtrations, normal derivatives and boundary functionals.
//!
//! Sign convention: the normal derivative at x ∈ F is
//! Σ_{y∉F} ⟨δ_x, δ_y⟩_E (ψ(x) − ψ(y)) = −Σ_{y∉F, y∼x} c(xy)(ψ(x) − ψ(y)),
//! so summed over F it equals −⟨χ_F, ψ⟩_E. [`boundary_sum_identity`] reports
//! both sides and the gap of that identity.

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::dipole::cube_points;
use crate::error::{Error, Result};
use crate::graph::{GraphFunction, VertexId, WeightedGraph};
use crate::numerics::NeumaierSum;

/// Strictly nested finite vertex sets, each containing the base point.
#[derive(Debug, Clone, Serialize)]
pub struct Filtration {
    levels: Vec<Vec<VertexId>>,
}

impl Filtration {
    pub fn from_levels(g: &WeightedGraph, levels: Vec<Vec<VertexId>>) -> Result<Self> {
        let mut sets: Vec<BTreeSet<VertexId>> = Vec::with_capacity(levels.len());
        for (k, level) in levels.into_iter().enumerate() {
            let set: BTreeSet<VertexId> = level.into_iter().collect();
            if set.is_empty() {
                return Err(Error::InvalidFiltration(format!(
                    "level {} is empty",
                    k + 1
                )));
            }
            if let Some(x) = set.iter().find(|x| !g.contains(x)) {
                return Err(Error::UnknownVertex(x.clone()));
            }
            if !set.contains(g.base_point()) {
                return Err(Error::InvalidFiltration(format!(
                    "level {} does not contain the base point",
                    k + 1
                )));
            }
            if let Some(prev) = sets.last() {
                if !(prev.is_subset(&set) && prev.len() < set.len()) {
                    return Err(Error::InvalidFiltration(format!(
                        "level {} does not strictly contain level {}",
                        k + 1,
                        k
                    )));
                }
            }
            sets.push(set);
        }
        if sets.is_empty() {
            return Err(Error::InvalidFiltration("no levels".into()));
        }
        Ok(Self {
            levels: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    /// Levels k = 1..=kmax: [−k,k] on chains, [−k,k]^d on lattices, graph
    /// balls of radius k around o on finite graphs (stopping once the ball
    /// covers the graph).
    pub fn boxes(g: &WeightedGraph, kmax: usize) -> Result<Self> {
        if kmax == 0 {
            return Err(Error::InvalidFiltration(
                "box filtration needs kmax ≥ 1".into(),
            ));
        }
        let levels: Vec<Vec<VertexId>> = if let Some(dim) = g.lattice_dim() {
            (1..=kmax as i64).map(|k| cube_points(dim, k)).collect()
        } else if g.chain_ratio().is_some() {
            (1..=kmax as i64)
                .map(|k| (-k..=k).map(VertexId::Int).collect())
                .collect()
        } else {
            balls(g, kmax)?
        };
        Self::from_levels(g, levels)
    }

    pub fn levels(&self) -> &[Vec<VertexId>] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

fn balls(g: &WeightedGraph, kmax: usize) -> Result<Vec<Vec<VertexId>>> {
    let o = g.base_point().clone();
    let mut dist: BTreeSet<VertexId> = BTreeSet::from([o.clone()]);
    let mut frontier = VecDeque::from([o]);
    let mut out = Vec::new();
    for _ in 0..kmax {
        let mut next = VecDeque::new();
        while let Some(x) = frontier.pop_front() {
            for (y, _) in g.neighbors(&x)? {
                if dist.insert(y.clone()) {
                    next.push_back(y);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        out.push(dist.iter().cloned().collect());
        frontier = next;
    }
    Ok(out)
}

fn as_set(f: &[VertexId]) -> BTreeSet<&VertexId> {
    f.iter().collect()
}

/// Vertices of F with a neighbour outside F.
pub fn section_boundary(g: &WeightedGraph, f: &[VertexId]) -> Result<Vec<VertexId>> {
    let set = as_set(f);
    let mut out = Vec::new();
    for x in &set {
        if g.neighbors(x)?.iter().any(|(y, _)| !set.contains(y)) {
            out.push((*x).clone());
        }
    }
    Ok(out)
}

fn normal_derivative_in(
    g: &WeightedGraph,
    psi: &GraphFunction,
    set: &BTreeSet<&VertexId>,
    x: &VertexId,
) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    let mut px = None;
    for (y, w) in g.neighbors(x)? {
        if set.contains(&y) {
            continue;
        }
        let a = match px {
            Some(v) => v,
            None => {
                let v = psi
                    .get(x)
                    .ok_or_else(|| Error::FunctionUndefined(x.clone()))?;
                px = Some(v);
                v
            }
        };
        let b = psi
            .get(&y)
            .ok_or_else(|| Error::FunctionUndefined(y.clone()))?;
        acc.add(-w * (a - b));
    }
    Ok(acc.value())
}

/// (∂ψ/∂n)_F(x) = Σ_{y∉F} ⟨δ_x, δ_y⟩_E (ψ(x) − ψ(y)).
pub fn normal_derivative(
    g: &WeightedGraph,
    psi: &GraphFunction,
    f: &[VertexId],
    x: &VertexId,
) -> Result<f64> {
    let set = as_set(f);
    if !set.contains(x) {
        return Err(Error::InvalidArgument(format!("{x} is not in F")));
    }
    normal_derivative_in(g, psi, &set, x)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryIdentity {
    /// Σ_{x∈F} (∂ψ/∂n)_F(x).
    pub sum: f64,
    /// ⟨χ_F, ψ⟩_E.
    pub pairing: f64,
    /// |sum + pairing|.
    pub gap: f64,
}

pub fn boundary_sum_identity(
    g: &WeightedGraph,
    psi: &GraphFunction,
    f: &[VertexId],
) -> Result<BoundaryIdentity> {
    let set = as_set(f);
    let mut sum = NeumaierSum::new();
    for x in &set {
        sum.add(normal_derivative_in(g, psi, &set, x)?);
    }
    let chi = GraphFunction::indicator(f.iter());
    let pairing = g.energy_inner(&chi, psi)?;
    let sum = sum.value();
    Ok(BoundaryIdentity {
        sum,
        pairing,
        gap: (sum + pairing).abs(),
    })
}

/// ‖χ_F‖²_E, the total weight of edges leaving F.
pub fn indicator_energy(g: &WeightedGraph, f: &[VertexId]) -> Result<f64> {
    let set = as_set(f);
    let mut acc = NeumaierSum::new();
    for x in &set {
        for (y, w) in g.neighbors(x)? {
            if !set.contains(&y) {
                acc.add(w);
            }
        }
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakNullScan {
    /// `pairings[k][j]` = ⟨χ_{F_k}, ψ_j⟩_E.
    pub pairings: Vec<Vec<f64>>,
    /// Per test function, max |pairing| over the last quarter of the levels.
    pub tail_max: Vec<f64>,
}

pub fn weak_null_scan(
    g: &WeightedGraph,
    filtration: &Filtration,
    tests: &[GraphFunction],
) -> Result<WeakNullScan> {
    let pairings: Vec<Vec<f64>> = filtration
        .levels()
        .par_iter()
        .map(|level| {
            let chi = GraphFunction::indicator(level.iter());
            tests.iter().map(|psi| g.energy_inner(&chi, psi)).collect()
        })
        .collect::<Result<_>>()?;
    let n = pairings.len();
    let start = n - (n / 4).max(1);
    let tail_max = (0..tests.len())
        .map(|j| {
            pairings[start..]
                .iter()
                .map(|row| row[j].abs())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(WeakNullScan { pairings, tail_max })
}

/// Tail gap above which a boundary limit is reported as not convergent.
pub const BOUNDARY_TAIL_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryLimit {
    /// u(x_n) − u(o).
    pub values: Vec<f64>,
    /// Last value, the limit estimate.
    pub limit: f64,
    /// max over the last quarter (at least two values) of |values[i] − limit|.
    pub tail_gap: f64,
    pub convergent: bool,
}

pub fn boundary_point_limit(
    g: &WeightedGraph,
    sequence: &[VertexId],
    u: &GraphFunction,
) -> Result<BoundaryLimit> {
    if sequence.is_empty() {
        return Err(Error::InvalidArgument("empty vertex sequence".into()));
    }
    let o = g.base_point();
    let uo = u
        .get(o)
        .ok_or_else(|| Error::FunctionUndefined(o.clone()))?;
    let values: Vec<f64> = sequence
        .iter()
        .map(|x| {
            if !g.contains(x) {
                return Err(Error::UnknownVertex(x.clone()));
            }
            u.get(x)
                .map(|v| v - uo)
                .ok_or_else(|| Error::FunctionUndefined(x.clone()))
        })
        .collect::<Result<_>>()?;
    let n = values.len();
    let limit = values[n - 1];
    let start = n - (n / 4).max(2).min(n);
    let tail_gap = values[start..]
        .iter()
        .map(|v| (v - limit).abs())
        .fold(0.0, f64::max);
    Ok(BoundaryLimit {
        values,
        limit,
        tail_gap,
        convergent: tail_gap <= BOUNDARY_TAIL_GAP,
    })
}
