//! Dipoles, bipoles and monopoles on finite sections, the dipole Gram
//! (reproducing kernel) matrix, and identities built on them.
//!
//! A dipole `v_x` solves Δv = δ_x − δ_o with v(o) = 0. On a finite section F
//! two boundary treatments are available:
//!
//! * [`BoundaryMode::Free`] solves on the induced subgraph of F. On a finite
//!   graph with F = G⁰ this is exactly the energy-space dipole, and on the
//!   ℤ-chain it reproduces the one-sided ramp for every section containing
//!   the ramp's support.
//! * [`BoundaryMode::Dirichlet`] grounds o and every vertex outside F (the
//!   function is 0 off F), which is the minimal-energy approximant among
//!   functions vanishing off F.
//!
//! Monopoles solve Δw = δ_x on F with the outside grounded and no base-point
//! constraint; their energies along a filtration decide whether a
//! finite-energy monopole exists.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::Filtration;
use crate::error::{Error, Result};
use crate::graph::{Extension, GraphFunction, Scalar, VertexId, WeightedGraph};
use crate::numerics::{
    conjugate_gradient, DenseMatrix, NeumaierSum, ProfileCholesky, ProfileMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Free,
    Dirichlet,
}

/// Finite vertex set of a graph, containing the base point and inducing a
/// connected subgraph.
#[derive(Debug, Clone)]
pub struct FiniteSection {
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    mode: BoundaryMode,
}

impl FiniteSection {
    pub fn new<I>(g: &WeightedGraph, vertices: I, mode: BoundaryMode) -> Result<Self>
    where
        I: IntoIterator<Item = VertexId>,
    {
        let set: BTreeSet<VertexId> = vertices.into_iter().collect();
        if set.is_empty() {
            return Err(Error::InvalidSection("empty vertex set".into()));
        }
        for x in &set {
            if !g.contains(x) {
                return Err(Error::UnknownVertex(x.clone()));
            }
        }
        if !set.contains(g.base_point()) {
            return Err(Error::InvalidSection(format!(
                "section must contain the base point {}",
                g.base_point()
            )));
        }
        if !induced_connected(g, &set)? {
            return Err(Error::InvalidSection(
                "section does not induce a connected subgraph".into(),
            ));
        }
        let vertices: Vec<VertexId> = set.into_iter().collect();
        let index = vertices
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        Ok(Self {
            vertices,
            index,
            mode,
        })
    }

    /// Integer interval [lo, hi] of a chain.
    pub fn interval(g: &WeightedGraph, lo: i64, hi: i64, mode: BoundaryMode) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidSection(format!("empty interval [{lo},{hi}]")));
        }
        Self::new(g, (lo..=hi).map(VertexId::Int), mode)
    }

    /// Box [−k,k]^d around the origin of a chain or lattice, or the whole
    /// graph when it is finite.
    pub fn cube(g: &WeightedGraph, k: i64, mode: BoundaryMode) -> Result<Self> {
        if let Some(dim) = g.lattice_dim() {
            return Self::new(g, cube_points(dim, k), mode);
        }
        if g.chain_ratio().is_some() {
            return Self::interval(g, -k, k, mode);
        }
        Self::whole(g, mode)
    }

    /// All vertices of a finite graph.
    pub fn whole(g: &WeightedGraph, mode: BoundaryMode) -> Result<Self> {
        let vertices = g.vertices().ok_or_else(|| {
            Error::InvalidSection("graph is infinite; give an explicit section".into())
        })?;
        Self::new(g, vertices, mode)
    }

    pub fn with_mode(mut self, mode: BoundaryMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, x: &VertexId) -> bool {
        self.index.contains_key(x)
    }

    pub fn position(&self, x: &VertexId) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// Vertices of F with a neighbour outside F.
    pub fn boundary(&self, g: &WeightedGraph) -> Result<Vec<VertexId>> {
        let mut out = Vec::new();
        for x in &self.vertices {
            if g.neighbors(x)?.iter().any(|(y, _)| !self.contains(y)) {
                out.push(x.clone());
            }
        }
        Ok(out)
    }

    /// Vertices of F all of whose neighbours lie in F.
    pub fn interior(&self, g: &WeightedGraph) -> Result<Vec<VertexId>> {
        let mut out = Vec::new();
        for x in &self.vertices {
            if g.neighbors(x)?.iter().all(|(y, _)| self.contains(y)) {
                out.push(x.clone());
            }
        }
        Ok(out)
    }

    pub fn is_interior(&self, g: &WeightedGraph, x: &VertexId) -> Result<bool> {
        Ok(self.contains(x) && g.neighbors(x)?.iter().all(|(y, _)| self.contains(y)))
    }

    /// Vertices outside F adjacent to F.
    pub fn outside_ring(&self, g: &WeightedGraph) -> Result<Vec<VertexId>> {
        let mut ring = BTreeSet::new();
        for x in &self.vertices {
            for (y, _) in g.neighbors(x)? {
                if !self.contains(&y) {
                    ring.insert(y);
                }
            }
        }
        Ok(ring.into_iter().collect())
    }
}

/// Lexicographically ordered points of [−k,k]^dim.
pub(crate) fn cube_points(dim: usize, k: i64) -> Vec<VertexId> {
    let side = (2 * k + 1).max(0) as usize;
    let total = side.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut p = vec![0i64; dim];
        for c in (0..dim).rev() {
            p[c] = (idx % side) as i64 - k;
            idx /= side;
        }
        out.push(VertexId::Point(p));
    }
    out
}

pub(crate) fn induced_connected(g: &WeightedGraph, set: &BTreeSet<VertexId>) -> Result<bool> {
    let Some(start) = set.iter().next() else {
        return Ok(true);
    };
    let mut seen: BTreeSet<VertexId> = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(x) = queue.pop_front() {
        for (y, _) in g.neighbors(&x)? {
            if set.contains(&y) && !seen.contains(&y) {
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(seen.len() == set.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum System {
    /// Unknowns F∖{o}; induced Laplacian or Dirichlet matrix per mode.
    Dipole,
    /// Unknowns F; ambient degrees (outside grounded).
    Monopole,
}

/// Factored linear system for repeated dipole or monopole solves on one
/// section.
pub struct SectionSolver<'g> {
    graph: &'g WeightedGraph,
    section: FiniteSection,
    system: System,
    unknowns: Vec<usize>,
    slot: Vec<Option<usize>>,
    matrix: ProfileMatrix,
    factor: ProfileCholesky,
}

impl<'g> SectionSolver<'g> {
    /// Solver for dipoles `v_x`, x ∈ F∖{o}.
    pub fn dipoles(graph: &'g WeightedGraph, section: &FiniteSection) -> Result<Self> {
        Self::build(graph, section, System::Dipole)
    }

    /// Solver for monopoles Δw = δ_x on F with the outside grounded.
    pub fn monopoles(graph: &'g WeightedGraph, section: &FiniteSection) -> Result<Self> {
        Self::build(graph, section, System::Monopole)
    }

    fn build(graph: &'g WeightedGraph, section: &FiniteSection, system: System) -> Result<Self> {
        let o = graph.base_point();
        let n = section.len();
        let mut slot = vec![None; n];
        let mut unknowns = Vec::with_capacity(n);
        for (i, v) in section.vertices.iter().enumerate() {
            if system == System::Monopole || v != o {
                slot[i] = Some(unknowns.len());
                unknowns.push(i);
            }
        }
        if unknowns.is_empty() {
            return Err(Error::SectionTooSmall(
                "section has no free vertices".into(),
            ));
        }
        let free = system == System::Dipole && section.mode == BoundaryMode::Free;
        let mut entries = Vec::new();
        for (r, &i) in unknowns.iter().enumerate() {
            let x = &section.vertices[i];
            let mut diag = NeumaierSum::new();
            for (y, w) in graph.neighbors(x)? {
                match section.position(&y) {
                    Some(j) => {
                        diag.add(w);
                        if let Some(c) = slot[j] {
                            if c < r {
                                entries.push((r, c, -w));
                            }
                        }
                    }
                    None => {
                        if !free {
                            diag.add(w);
                        }
                    }
                }
            }
            entries.push((r, r, diag.value()));
        }
        let matrix = ProfileMatrix::from_entries(unknowns.len(), &entries)?;
        let factor = matrix.cholesky()?;
        Ok(Self {
            graph,
            section: section.clone(),
            system,
            unknowns,
            slot,
            matrix,
            factor,
        })
    }

    pub fn section(&self) -> &FiniteSection {
        &self.section
    }

    pub fn dimension(&self) -> usize {
        self.unknowns.len()
    }

    fn rhs(&self, x: &VertexId) -> Result<Vec<f64>> {
        if self.system == System::Dipole && x == self.graph.base_point() {
            return Err(Error::DipoleAtBase);
        }
        let i = self
            .section
            .position(x)
            .ok_or_else(|| Error::SectionTooSmall(format!("{x} is not in the section")))?;
        let mut b = vec![0.0; self.unknowns.len()];
        b[self.slot[i].expect("non-base vertex has a slot")] = 1.0;
        Ok(b)
    }

    fn assemble(&self, sol: &[f64]) -> GraphFunction {
        let mut values = BTreeMap::new();
        for (i, v) in self.section.vertices.iter().enumerate() {
            let val = match self.slot[i] {
                Some(s) => sol[s],
                None => 0.0,
            };
            values.insert(v.clone(), val);
        }
        let restricted = self.system == System::Dipole && self.section.mode == BoundaryMode::Free;
        if restricted {
            GraphFunction::restricted(values)
        } else {
            GraphFunction::finite(values)
        }
    }

    /// Solution vector on the section in section order (the base point, when
    /// constrained, carries 0).
    pub fn solve_values(&self, x: &VertexId) -> Result<Vec<f64>> {
        let b = self.rhs(x)?;
        let sol = self.factor.solve(&b);
        let mut out = vec![0.0; self.section.len()];
        for (i, s) in self.slot.iter().enumerate() {
            if let Some(s) = s {
                out[i] = sol[*s];
            }
        }
        Ok(out)
    }

    /// Solves with an arbitrary right-hand side given in section order.
    /// Entries at constrained vertices are ignored and returned as 0.
    pub fn solve_rhs(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.section.len() {
            return Err(Error::Dimension(format!(
                "rhs has {} entries for a section of {}",
                b.len(),
                self.section.len()
            )));
        }
        let mut x: Vec<f64> = self.unknowns.iter().map(|&i| b[i]).collect();
        self.factor.solve_in_place(&mut x);
        let mut out = vec![0.0; self.section.len()];
        for (&i, v) in self.unknowns.iter().zip(x) {
            out[i] = v;
        }
        Ok(out)
    }

    /// Direct (skyline Cholesky) solve.
    pub fn solve(&self, x: &VertexId) -> Result<GraphFunction> {
        let b = self.rhs(x)?;
        Ok(self.assemble(&self.factor.solve(&b)))
    }

    /// Conjugate-gradient solve of the same system.
    pub fn solve_iterative(&self, x: &VertexId, rel_tol: f64) -> Result<GraphFunction> {
        let b = self.rhs(x)?;
        let max_iter = 20 * self.unknowns.len() + 100;
        let out = conjugate_gradient(&self.matrix, &b, rel_tol, max_iter)?;
        Ok(self.assemble(&out.solution))
    }
}

/// Dipole v_x on a section.
pub fn dipole(g: &WeightedGraph, x: &VertexId, section: &FiniteSection) -> Result<GraphFunction> {
    if x == g.base_point() {
        return Err(Error::DipoleAtBase);
    }
    SectionSolver::dipoles(g, section)?.solve(x)
}

/// Bipole w_{x,y} = v_x − v_y, with v_o = 0.
pub fn bipole(
    g: &WeightedGraph,
    x: &VertexId,
    y: &VertexId,
    section: &FiniteSection,
) -> Result<GraphFunction> {
    if x == y {
        return Err(Error::DegenerateBipole(x.clone()));
    }
    for v in [x, y] {
        if !section.contains(v) {
            return Err(Error::SectionTooSmall(format!("{v} is not in the section")));
        }
    }
    let solver = SectionSolver::dipoles(g, section)?;
    let o = g.base_point();
    let vx = if x == o { None } else { Some(solver.solve(x)?) };
    let vy = if y == o { None } else { Some(solver.solve(y)?) };
    Ok(match (vx, vy) {
        (Some(a), Some(b)) => GraphFunction::linear_combination(&[(1.0, &a), (-1.0, &b)]),
        (Some(a), None) => a,
        (None, Some(b)) => b.scaled(-1.0),
        (None, None) => unreachable!("x != y"),
    })
}

/// Symmetric PSD matrix of dipole inner products k(x,y) = ⟨v_x, v_y⟩_E.
#[derive(Debug, Clone, Serialize)]
pub struct KernelMatrix {
    pub window: Vec<VertexId>,
    pub entries: DenseMatrix,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.window.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        crate::numerics::min_eigen_spd(&self.entries)
    }
}

fn check_window(g: &WeightedGraph, window: &[VertexId], section: &FiniteSection) -> Result<()> {
    let mut seen = BTreeSet::new();
    for x in window {
        if x == g.base_point() {
            return Err(Error::DipoleAtBase);
        }
        if !section.is_interior(g, x)? {
            return Err(Error::SectionTooSmall(format!(
                "window vertex {x} is not interior to the section"
            )));
        }
        if !seen.insert(x) {
            return Err(Error::InvalidArgument(format!("window lists {x} twice")));
        }
    }
    Ok(())
}

/// Dipoles for every window vertex, solved in parallel and returned in
/// window order.
pub fn dipoles(
    g: &WeightedGraph,
    window: &[VertexId],
    section: &FiniteSection,
) -> Result<Vec<GraphFunction>> {
    let solver = SectionSolver::dipoles(g, section)?;
    window.par_iter().map(|x| solver.solve(x)).collect()
}

/// Kernel matrix over `window` from solved dipoles.
pub fn gram(
    g: &WeightedGraph,
    window: &[VertexId],
    section: &FiniteSection,
) -> Result<KernelMatrix> {
    check_window(g, window, section)?;
    let vs = dipoles(g, window, section)?;
    gram_of(g, window, &vs)
}

pub(crate) fn gram_of(
    g: &WeightedGraph,
    window: &[VertexId],
    vs: &[GraphFunction],
) -> Result<KernelMatrix> {
    let n = vs.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| g.energy_inner(&vs[i], &vs[j]))
        .collect::<Result<_>>()?;
    let mut entries = DenseMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(values) {
        entries.set(i, j, v);
        entries.set(j, i, v);
    }
    Ok(KernelMatrix {
        window: window.to_vec(),
        entries,
    })
}

/// Expansion of a Dirac mass in dipoles.
#[derive(Debug, Clone, Serialize)]
pub struct Reconstruction {
    pub vertex: VertexId,
    /// (y, coefficient of v_y); the v_o term is dropped since v_o = 0.
    pub coefficients: Vec<(VertexId, f64)>,
    /// ‖δ_x − Σ coefficients·v‖_E.
    pub residual: f64,
}

/// δ_x = c(x) v_x − Σ_{y∼x} c(xy) v_y, with its energy-norm residual.
pub fn reconstruct_delta(
    g: &WeightedGraph,
    x: &VertexId,
    section: &FiniteSection,
) -> Result<Reconstruction> {
    if !section.contains(x) {
        return Err(Error::SectionTooSmall(format!("{x} is not in the section")));
    }
    let o = g.base_point();
    let nbrs = g.neighbors(x)?;
    if let Some((y, _)) = nbrs.iter().find(|(y, _)| !section.contains(y)) {
        return Err(Error::SectionTooSmall(format!(
            "neighbour {y} of {x} lies outside the section"
        )));
    }
    let mut coefficients = Vec::new();
    if x != o {
        coefficients.push((x.clone(), g.delta_inner(x, x)?));
    }
    for (y, _) in &nbrs {
        if y != o {
            coefficients.push((y.clone(), g.delta_inner(x, y)?));
        }
    }
    let solver = SectionSolver::dipoles(g, section)?;
    let vs: Vec<GraphFunction> = coefficients
        .par_iter()
        .map(|(y, _)| solver.solve(y))
        .collect::<Result<_>>()?;
    let delta = match section.mode() {
        BoundaryMode::Free => GraphFunction::restricted(
            section
                .vertices()
                .iter()
                .map(|v| (v.clone(), if v == x { 1.0 } else { 0.0 }))
                .collect(),
        ),
        BoundaryMode::Dirichlet => GraphFunction::delta(x.clone()),
    };
    let mut terms: Vec<(f64, &GraphFunction)> = vec![(1.0, &delta)];
    for ((_, c), v) in coefficients.iter().zip(&vs) {
        terms.push((-c, v));
    }
    let r = GraphFunction::linear_combination(&terms);
    let residual = g.energy(&r)?.max(0.0).sqrt();
    Ok(Reconstruction {
        vertex: x.clone(),
        coefficients,
        residual,
    })
}

/// Vertices where Δu can be evaluated from the stored data of `u`.
fn evaluable<T: Scalar>(g: &WeightedGraph, u: &GraphFunction<T>) -> Result<Vec<VertexId>> {
    match u.extension() {
        Extension::Constant(_) => {
            let mut set = BTreeSet::new();
            for x in u.entries().keys() {
                set.insert(x.clone());
                for (y, _) in g.neighbors(x)? {
                    set.insert(y);
                }
            }
            Ok(set.into_iter().collect())
        }
        Extension::Undefined => {
            let mut out = Vec::new();
            for x in u.entries().keys() {
                if g.neighbors(x)?.iter().all(|(y, _)| u.is_defined(y)) {
                    out.push(x.clone());
                }
            }
            Ok(out)
        }
        Extension::Everywhere(_) => Err(Error::InfiniteSupport),
    }
}

/// ξ_x = (Δu)(x) at every vertex x ≠ o where Δu is evaluable.
pub fn coefficient_readout<T: Scalar>(
    g: &WeightedGraph,
    u: &GraphFunction<T>,
) -> Result<BTreeMap<VertexId, T>> {
    let o = g.base_point();
    let mut out = BTreeMap::new();
    for x in evaluable(g, u)? {
        if &x != o {
            out.insert(x.clone(), g.laplacian_apply(u, &x)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Convergent,
    Divergent,
    Undecided,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceLevel {
    pub level: usize,
    pub size: usize,
    pub energy: f64,
}

/// Monopole energies along a filtration.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyTrace {
    pub vertex: VertexId,
    pub levels: Vec<TraceLevel>,
    /// |E_N − E_{N−1}| at the last level.
    pub last_gap: f64,
    /// Least-squares slope of log(E_k − E_{k−1}) against log k over the last
    /// quarter of the levels.
    pub tail_slope: Option<f64>,
    pub verdict: Verdict,
}

/// Gap below which successive monopole energies count as converged.
pub const MONOPOLE_CAUCHY_GAP: f64 = 1e-6;
/// Energy increments decaying no faster than k^(−1.2) are read as a divergent series.
pub const MONOPOLE_DIVERGENT_SLOPE: f64 = -1.2;

/// Solves Δw = δ_x on each filtration level (outside grounded) and records
/// ‖w‖²_E.
pub fn monopole_trace(
    g: &WeightedGraph,
    x: &VertexId,
    filtration: &Filtration,
) -> Result<EnergyTrace> {
    let levels = filtration.levels();
    if levels.len() < 4 {
        return Err(Error::InsufficientDepth {
            needed: 4,
            got: levels.len(),
        });
    }
    let records: Vec<TraceLevel> = levels
        .par_iter()
        .enumerate()
        .map(|(k, level)| {
            if !level.contains(x) {
                return Err(Error::InvalidFiltration(format!(
                    "level {} does not contain {x}",
                    k + 1
                )));
            }
            let section = FiniteSection::new(g, level.iter().cloned(), BoundaryMode::Dirichlet)?;
            let w = SectionSolver::monopoles(g, &section)?.solve(x)?;
            Ok(TraceLevel {
                level: k + 1,
                size: section.len(),
                energy: g.energy(&w)?,
            })
        })
        .collect::<Result<_>>()?;
    let energies: Vec<f64> = records.iter().map(|r| r.energy).collect();
    let (last_gap, tail_slope, verdict) = classify_series(&energies);
    Ok(EnergyTrace {
        vertex: x.clone(),
        levels: records,
        last_gap,
        tail_slope,
        verdict,
    })
}

/// Convergence verdict for a nondecreasing sequence of partial energies.
pub(crate) fn classify_series(energies: &[f64]) -> (f64, Option<f64>, Verdict) {
    let n = energies.len();
    let last_gap = (energies[n - 1] - energies[n - 2]).abs();
    let quarter = (n / 4).max(3).min(n - 1);
    let pts: Vec<(f64, f64)> = ((n - quarter)..n)
        .filter_map(|k| {
            let d = energies[k] - energies[k - 1];
            (d > 0.0).then(|| (((k + 1) as f64).ln(), d.ln()))
        })
        .collect();
    let tail_slope = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    let verdict = if last_gap < MONOPOLE_CAUCHY_GAP {
        Verdict::Convergent
    } else if tail_slope.is_some_and(|s| s >= MONOPOLE_DIVERGENT_SLOPE) {
        Verdict::Divergent
    } else {
        Verdict::Undecided
    };
    (last_gap, tail_slope, verdict)
}

/// Both sides of Σ_x |ξ_x (Δu)(x)| ≤ ‖ξ‖_{ℓ²(c)} ‖u‖_E.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EmbeddingCheck {
    pub lhs: f64,
    /// ‖ξ‖_{ℓ²(c)} · ‖u‖_E.
    pub bound: f64,
    /// √2 · bound, which Cauchy–Schwarz guarantees for every (ξ, u).
    pub provable_bound: f64,
}

impl EmbeddingCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.bound + slack
    }
}

/// ℓ²(c) weight of x: max(‖δ_x‖², Σ_{y≠x} |⟨δ_x, δ_y⟩|).
pub fn l2c_weight(g: &WeightedGraph, x: &VertexId) -> Result<f64> {
    let diag = g.delta_inner(x, x)?;
    let mut off = NeumaierSum::new();
    for (y, _) in g.neighbors(x)? {
        off.add(g.delta_inner(x, &y)?.abs());
    }
    Ok(diag.max(off.value()))
}

pub fn l2c_embedding_check(
    g: &WeightedGraph,
    xi: &BTreeMap<VertexId, f64>,
    u: &GraphFunction,
) -> Result<EmbeddingCheck> {
    let mut lhs = NeumaierSum::new();
    let mut norm2 = NeumaierSum::new();
    for (x, &a) in xi {
        if a == 0.0 {
            continue;
        }
        lhs.add((a * g.laplacian_apply(u, x)?).abs());
        norm2.add(l2c_weight(g, x)? * a * a);
    }
    let energy = g.energy(u)?.max(0.0);
    let bound = norm2.value().sqrt() * energy.sqrt();
    Ok(EmbeddingCheck {
        lhs: lhs.value(),
        bound,
        provable_bound: std::f64::consts::SQRT_2 * bound,
    })
}

/// ⟨u, Δu⟩_E for u = Σ ξ_x v_x, against Σ|ξ_x|² + |Σ ξ_x|².
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadraticCheck {
    pub lhs: f64,
    /// Imaginary part of ⟨u, Δu⟩_E (zero for a hermitian Δ).
    pub lhs_imag: f64,
    pub rhs: f64,
}

impl QuadraticCheck {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs().max(self.lhs_imag.abs())
    }
}

pub fn quadratic_identity_check(
    g: &WeightedGraph,
    xi: &BTreeMap<VertexId, Complex64>,
    section: &FiniteSection,
) -> Result<QuadraticCheck> {
    let o = g.base_point();
    let mut sq = NeumaierSum::new();
    let mut total = Complex64::new(0.0, 0.0);
    for (x, a) in xi {
        if x == o {
            return Err(Error::DipoleAtBase);
        }
        sq.add(a.norm_sqr());
        total += a;
    }
    let rhs = sq.value() + total.norm_sqr();
    let active: Vec<(&VertexId, Complex64)> = xi
        .iter()
        .filter(|(_, a)| a.norm() != 0.0)
        .map(|(x, a)| (x, *a))
        .collect();
    if active.is_empty() {
        return Ok(QuadraticCheck {
            lhs: 0.0,
            lhs_imag: 0.0,
            rhs,
        });
    }
    let solver = SectionSolver::dipoles(g, section)?;
    let vs: Vec<GraphFunction<Complex64>> = active
        .par_iter()
        .map(|(x, _)| solver.solve(x).map(|v| v.to_complex()))
        .collect::<Result<_>>()?;
    let terms: Vec<(Complex64, &GraphFunction<Complex64>)> =
        active.iter().zip(&vs).map(|((_, a), v)| (*a, v)).collect();
    let u = GraphFunction::linear_combination(&terms);
    let lap = GraphFunction::finite(coefficient_readout_all(g, &u)?);
    let lhs = g.energy_inner(&u, &lap)?;
    Ok(QuadraticCheck {
        lhs: lhs.re,
        lhs_imag: lhs.im,
        rhs,
    })
}

/// Δu at every evaluable vertex, the base point included.
fn coefficient_readout_all<T: Scalar>(
    g: &WeightedGraph,
    u: &GraphFunction<T>,
) -> Result<BTreeMap<VertexId, T>> {
    let mut out = BTreeMap::new();
    for x in evaluable(g, u)? {
        out.insert(x.clone(), g.laplacian_apply(u, &x)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> VertexId {
        VertexId::Int(n)
    }

    fn chain_section(k: i64) -> (WeightedGraph, FiniteSection) {
        let g = WeightedGraph::zchain();
        let s = FiniteSection::interval(&g, -k, k, BoundaryMode::Free).unwrap();
        (g, s)
    }

    #[test]
    fn chain_dipole_is_one_sided_ramp() {
        let (g, s) = chain_section(50);
        for x in [3i64, -4] {
            let v = dipole(&g, &int(x), &s).unwrap();
            for n in -50..=50 {
                let expected = if x > 0 {
                    n.clamp(0, x) as f64
                } else {
                    (-n).clamp(0, -x) as f64
                };
                assert!((v.get(&int(n)).unwrap() - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dipole_at_base_is_rejected() {
        let (g, s) = chain_section(5);
        assert!(matches!(dipole(&g, &int(0), &s), Err(Error::DipoleAtBase)));
    }

    #[test]
    fn k3_dipole_and_resistance() {
        let g = WeightedGraph::complete(3).unwrap();
        let s = FiniteSection::whole(&g, BoundaryMode::Free).unwrap();
        let v = dipole(&g, &int(1), &s).unwrap();
        let third = 1.0 / 3.0;
        let expected = [(0, 0.0), (1, 2.0 * third), (2, third)];
        for (n, val) in expected {
            assert!((v.get(&int(n)).unwrap() - val).abs() < 1e-14);
        }
        let k = gram(&g, &[int(1), int(2)], &s).unwrap();
        assert!((k.get(0, 0) - 2.0 / 3.0).abs() < 1e-14);
        assert!((k.get(0, 1) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn bipole_steps() {
        let (g, s) = chain_section(20);
        let w = bipole(&g, &int(5), &int(2), &s).unwrap();
        for n in -20..20 {
            let step = w.get(&int(n + 1)).unwrap() - w.get(&int(n)).unwrap();
            let expected = if (2..5).contains(&n) { 1.0 } else { 0.0 };
            assert!((step - expected).abs() < 1e-12, "step at {n}");
        }
        assert!((g.energy(&w).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(
            bipole(&g, &int(2), &int(2), &s),
            Err(Error::DegenerateBipole(_))
        ));
    }

    #[test]
    fn gram_min_formula_and_opposite_signs() {
        let (g, s) = chain_section(30);
        let k = gram(&g, &[int(2), int(5), int(-3), int(4)], &s).unwrap();
        assert!((k.get(0, 1) - 2.0).abs() < 1e-12);
        assert!(k.get(2, 3).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_on_chain_and_k3() {
        let (g, s) = chain_section(10);
        let r = reconstruct_delta(&g, &int(2), &s).unwrap();
        assert_eq!(
            r.coefficients,
            vec![(int(2), 2.0), (int(1), -1.0), (int(3), -1.0)]
        );
        assert!(r.residual < 1e-10);
        let k3 = WeightedGraph::complete(3).unwrap();
        let s3 = FiniteSection::whole(&k3, BoundaryMode::Free).unwrap();
        let r = reconstruct_delta(&k3, &int(1), &s3).unwrap();
        assert_eq!(r.coefficients, vec![(int(1), 2.0), (int(2), -1.0)]);
        assert!(r.residual < 1e-10);
        assert!(matches!(
            reconstruct_delta(&g, &int(10), &s),
            Err(Error::SectionTooSmall(_))
        ));
    }

    #[test]
    fn star_centre_reconstruction_uses_spokes_only() {
        let g = WeightedGraph::star(5).unwrap();
        let s = FiniteSection::whole(&g, BoundaryMode::Free).unwrap();
        let r = reconstruct_delta(&g, &int(0), &s).unwrap();
        let expected: Vec<(VertexId, f64)> = (1..=5).map(|i| (int(i), -(i as f64))).collect();
        assert_eq!(r.coefficients, expected);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn readout_recovers_coefficients() {
        let (g, s) = chain_section(20);
        let solver = SectionSolver::dipoles(&g, &s).unwrap();
        let v1 = solver.solve(&int(1)).unwrap();
        let v4 = solver.solve(&int(4)).unwrap();
        let u = GraphFunction::linear_combination(&[(2.0, &v1), (-1.0, &v4)]);
        let xi = coefficient_readout(&g, &u).unwrap();
        for (x, val) in xi {
            let expected = match x.as_int().unwrap() {
                1 => 2.0,
                4 => -1.0,
                _ => 0.0,
            };
            assert!((val - expected).abs() < 1e-10, "{x}");
        }
        let zero = coefficient_readout(&g, &GraphFunction::<f64>::zero()).unwrap();
        assert!(zero.values().all(|v| *v == 0.0));
    }

    #[test]
    fn dirichlet_mode_grounds_outside() {
        let (g, s) = chain_section(10);
        let s = s.with_mode(BoundaryMode::Dirichlet);
        let v = dipole(&g, &int(3), &s).unwrap();
        assert_eq!(v.get(&int(11)), Some(0.0));
        assert_eq!(v.get(&int(0)), Some(0.0));
        // tent: rises on [0,3], falls linearly to 0 at 11
        let peak = v.get(&int(3)).unwrap();
        assert!((peak - 3.0 * 8.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn iterative_path_agrees() {
        let g = WeightedGraph::lattice(2).unwrap();
        let s = FiniteSection::cube(&g, 6, BoundaryMode::Free).unwrap();
        let solver = SectionSolver::dipoles(&g, &s).unwrap();
        let x = VertexId::point(&[2, -3]);
        let a = solver.solve(&x).unwrap();
        let b = solver.solve_iterative(&x, 1e-13).unwrap();
        for v in s.vertices() {
            assert!((a.get(v).unwrap() - b.get(v).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn quadratic_identity_small_cases() {
        let (g, s) = chain_section(20);
        let one = Complex64::new(1.0, 0.0);
        let q = quadratic_identity_check(&g, &BTreeMap::from([(int(1), one)]), &s).unwrap();
        assert!((q.lhs - 2.0).abs() < 1e-10 && q.rhs == 2.0);
        let q = quadratic_identity_check(&g, &BTreeMap::from([(int(1), one), (int(2), -one)]), &s)
            .unwrap();
        assert!((q.lhs - 2.0).abs() < 1e-10 && q.rhs == 2.0);
        let q = quadratic_identity_check(&g, &BTreeMap::new(), &s).unwrap();
        assert_eq!((q.lhs, q.rhs), (0.0, 0.0));
    }

    #[test]
    fn embedding_single_coefficient() {
        let (g, s) = chain_section(20);
        for x in 1..=5 {
            let v = dipole(&g, &int(x), &s).unwrap();
            let c = l2c_embedding_check(&g, &BTreeMap::from([(int(x), 1.0)]), &v).unwrap();
            assert!((c.lhs - 1.0).abs() < 1e-10);
            assert!((c.bound - (2.0 * x as f64).sqrt()).abs() < 1e-9);
            assert!(c.holds(1e-12));
        }
    }

    #[test]
    fn embedding_bound_can_fail_by_sqrt2() {
        // alternating u on a long segment with ξ = Δu / c nearly saturates √2
        let g = WeightedGraph::zchain();
        let k = 400;
        let u = GraphFunction::finite(
            (-k..=k)
                .map(|n| (int(n), if n % 2 == 0 { 1.0 } else { -1.0 }))
                .collect(),
        );
        let xi: BTreeMap<VertexId, f64> = (-k - 1..=k + 1)
            .map(|n| (int(n), g.laplacian_apply(&u, &int(n)).unwrap() / 2.0))
            .collect();
        let c = l2c_embedding_check(&g, &xi, &u).unwrap();
        assert!(c.lhs > c.bound);
        assert!(c.lhs <= c.provable_bound);
        assert!(c.lhs / c.bound > 1.4);
    }

    #[test]
    fn series_classification() {
        let linear: Vec<f64> = (1..=20).map(|k| (k + 1) as f64 / 2.0).collect();
        assert_eq!(classify_series(&linear).2, Verdict::Divergent);
        let logs: Vec<f64> = (1..=25).map(|k| (k as f64).ln()).collect();
        assert_eq!(classify_series(&logs).2, Verdict::Divergent);
        let geo: Vec<f64> = (1..=40).map(|k| 1.0 - 0.5f64.powi(k)).collect();
        assert_eq!(classify_series(&geo).2, Verdict::Convergent);
        let square: Vec<f64> = (1..=12).map(|k| 1.0 - 1.0 / (k * k) as f64).collect();
        assert_eq!(classify_series(&square).2, Verdict::Undecided);
    }
}
