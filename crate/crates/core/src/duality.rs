//! Graph ↔ kernel duality and the harmonic defect.
//!
//! A weighted graph determines the Dirac Gram matrix Gδ(x,y) = ⟨δ_x, δ_y⟩_E,
//! whose rows have finitely many nonzero entries, nonpositive off-diagonal
//! entries and zero row sums. Conversely any such matrix is the Dirac Gram
//! matrix of the graph with c(xy) = −Gδ(x,y). On a finite section the dipole
//! kernel K and Gδ are inverse to each other once the base-point row is
//! dropped, which is how [`roundtrip_check`] closes the loop.
//!
//! Harmonic functions of finite energy span the part of the energy space
//! orthogonal to every Dirac mass. [`harmonic_defect`] looks for them along a
//! filtration and [`duality_pair_check`] certifies orthogonality to Dirac
//! masses on a section.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::Filtration;
use crate::dipole::{gram, gram_of, BoundaryMode, FiniteSection, KernelMatrix, SectionSolver};
use crate::error::{Error, Result};
use crate::graph::{GraphFunction, VertexId, WeightedGraph};
use crate::numerics::{inverse_spd, symmetric_eigen, Cholesky, DenseMatrix, NeumaierSum};

/// Tolerance for the zero-row-sum certification of a Dirac Gram matrix.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Matrix of ⟨δ_x, δ_y⟩_E over a window of vertices. Serialized as
/// `{"window": [labels], "entries": [[row], ...]}`; a flat row-major
/// `entries` array is accepted on input.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "DiracGramFile", try_from = "DiracGramFile")]
pub struct DiracGram {
    pub window: Vec<VertexId>,
    pub entries: DenseMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entries {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
struct DiracGramFile {
    window: Vec<VertexId>,
    entries: Entries,
}

impl From<DiracGram> for DiracGramFile {
    fn from(g: DiracGram) -> Self {
        Self {
            window: g.window,
            entries: Entries::Rows(g.entries.to_rows()),
        }
    }
}

impl TryFrom<DiracGramFile> for DiracGram {
    type Error = Error;

    fn try_from(f: DiracGramFile) -> Result<Self> {
        let n = f.window.len();
        let entries = match f.entries {
            Entries::Rows(rows) => DenseMatrix::from_rows(&rows)?,
            Entries::Flat(data) => {
                DenseMatrix::from_row_major(n, data.len().checked_div(n).unwrap_or(0), data)?
            }
        };
        DiracGram::new(f.window, entries)
    }
}

impl DiracGram {
    pub fn new(window: Vec<VertexId>, entries: DenseMatrix) -> Result<Self> {
        if !entries.is_square() || entries.rows() != window.len() {
            return Err(Error::Dimension(format!(
                "{} window labels for a {}x{} matrix",
                window.len(),
                entries.rows(),
                entries.cols()
            )));
        }
        let distinct: BTreeSet<&VertexId> = window.iter().collect();
        if distinct.len() != window.len() {
            return Err(Error::InvalidArgument(
                "window labels must be distinct".into(),
            ));
        }
        Ok(Self { window, entries })
    }

    pub fn dim(&self) -> usize {
        self.window.len()
    }

    /// Largest |Σ_y Gδ(x,y)| over the rows.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let mut s = NeumaierSum::new();
                s.extend(self.entries.row(i).iter().copied());
                s.value().abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Recovers the weighted graph whose Dirac Gram matrix is `gd`. The base
/// point is the first window label.
pub fn kernel_to_graph(gd: &DiracGram) -> Result<WeightedGraph> {
    let n = gd.dim();
    if n < 2 {
        return Err(Error::InvalidGraph("need at least two vertices".into()));
    }
    let a = &gd.entries;
    let scale = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
    a.check_symmetric(1e-12)?;
    let zero_tol = 1e-9 * scale.max(f64::MIN_POSITIVE);
    let mut edges = Vec::new();
    for i in 0..n {
        let d = a.get(i, i);
        if !(d > 0.0) {
            return Err(Error::InvalidGraph(format!(
                "diagonal entry at {} is {d}; must be positive",
                gd.window[i]
            )));
        }
        let mut row = NeumaierSum::new();
        row.add(d);
        for j in 0..n {
            if j == i {
                continue;
            }
            let v = a.get(i, j);
            row.add(v);
            if v.abs() <= zero_tol {
                continue;
            }
            if v > 0.0 {
                return Err(Error::PositiveCrossTerm(
                    gd.window[i].clone(),
                    gd.window[j].clone(),
                ));
            }
            if j > i {
                edges.push((gd.window[i].clone(), gd.window[j].clone(), -v));
            }
        }
        let residual = row.value();
        if residual.abs() > ROW_SUM_TOL * d.max(1.0) {
            return Err(Error::RowSumViolation {
                vertex: gd.window[i].clone(),
                residual,
            });
        }
    }
    let g = WeightedGraph::from_edges(edges, gd.window[0].clone())?;
    for (i, x) in gd.window.iter().enumerate() {
        let deg = g.degree(x)?;
        let d = a.get(i, i);
        if (deg - d).abs() > ROW_SUM_TOL * d.max(1.0) {
            return Err(Error::RowSumViolation {
                vertex: x.clone(),
                residual: d - deg,
            });
        }
    }
    Ok(g)
}

/// Dirac Gram matrix of `g` over `window`, read off the graph.
pub fn dirac_gram(g: &WeightedGraph, window: &[VertexId]) -> Result<DiracGram> {
    let n = window.len();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = g.delta_inner(&window[i], &window[j])?;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    DiracGram::new(window.to_vec(), m)
}

/// Dipole kernel over `window` and Dirac Gram matrix over o ∪ `window`.
pub fn graph_to_kernel(
    g: &WeightedGraph,
    window: &[VertexId],
    section: &FiniteSection,
) -> Result<(KernelMatrix, DiracGram)> {
    let k = gram(g, window, section)?;
    let mut full = vec![g.base_point().clone()];
    full.extend(window.iter().cloned());
    Ok((k, dirac_gram(g, &full)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundTrip {
    /// Largest relative error over edges of the section (an edge present on
    /// only one side counts as error 1).
    pub max_relative_error: f64,
    pub edges_checked: usize,
    /// Largest |row sum| of the recovered Dirac Gram matrix.
    pub max_row_sum: f64,
    /// Largest |row sum| of the graph's own Dirac Gram rows at interior vertices.
    pub graph_row_sum: f64,
}

/// graph → dipole kernel K over F∖{o} → Gδ = K⁻¹ completed on the base row by
/// zero row sums → graph, compared edge by edge with the induced subgraph of F.
pub fn roundtrip_check(g: &WeightedGraph, section: &FiniteSection) -> Result<RoundTrip> {
    let free = section.clone().with_mode(BoundaryMode::Free);
    let o = g.base_point();
    let window: Vec<VertexId> = free
        .vertices()
        .iter()
        .filter(|v| *v != o)
        .cloned()
        .collect();
    if window.is_empty() {
        return Err(Error::SectionTooSmall(
            "section has no vertex besides the base point".into(),
        ));
    }
    let solver = SectionSolver::dipoles(g, &free)?;
    let vs: Vec<GraphFunction> = window
        .par_iter()
        .map(|x| solver.solve(x))
        .collect::<Result<_>>()?;
    let k = gram_of(g, &window, &vs)?;
    let inv = inverse_spd(&k.entries)?;
    let n = window.len();
    let mut full = DenseMatrix::zeros(n + 1, n + 1);
    let mut corner = NeumaierSum::new();
    for j in 0..n {
        let mut col = NeumaierSum::new();
        for i in 0..n {
            full.set(i + 1, j + 1, inv.get(i, j));
            col.add(inv.get(i, j));
        }
        let v = -col.value();
        full.set(0, j + 1, v);
        full.set(j + 1, 0, v);
        corner.add(-v);
    }
    full.set(0, 0, corner.value());
    let mut labels = vec![o.clone()];
    labels.extend(window.iter().cloned());
    let gd = DiracGram::new(labels, full)?;
    let recovered = kernel_to_graph(&gd)?;

    let mut edges: BTreeMap<(VertexId, VertexId), (f64, f64)> = BTreeMap::new();
    for x in free.vertices() {
        for (y, w) in g.neighbors(x)? {
            if free.contains(&y) && *x < y {
                edges.insert((x.clone(), y), (w, 0.0));
            }
        }
        for (y, w) in recovered.neighbors(x)? {
            if *x < y {
                edges.entry((x.clone(), y)).or_insert((0.0, 0.0)).1 = w;
            }
        }
    }
    let max_relative_error = edges
        .values()
        .map(|&(a, b)| {
            if a == 0.0 || b == 0.0 {
                1.0
            } else {
                (a - b).abs() / a
            }
        })
        .fold(0.0, f64::max);
    let interior = free.interior(g)?;
    let mut graph_row_sum: f64 = 0.0;
    for x in &interior {
        let mut s = NeumaierSum::new();
        s.add(g.delta_inner(x, x)?);
        for (y, _) in g.neighbors(x)? {
            s.add(g.delta_inner(x, &y)?);
        }
        graph_row_sum = graph_row_sum.max(s.value().abs());
    }
    Ok(RoundTrip {
        max_relative_error,
        edges_checked: edges.len(),
        max_row_sum: gd.max_row_sum(),
        graph_row_sum,
    })
}

/// Finite-energy harmonic function found along a filtration.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicCandidate {
    /// Values on the last filtration level, 0 at the base point.
    #[serde(skip)]
    pub function: GraphFunction,
    /// max |Δh(x)| over interior vertices of the last level.
    pub max_laplacian: f64,
    /// Energy on the last level.
    pub energy: f64,
    /// Energy on each level (from the second level on for the generic search).
    pub level_energies: Vec<f64>,
}

/// Cauchy gap for accepting a candidate's level energies.
pub const HARMONIC_CAUCHY_GAP: f64 = 1e-6;
/// Minimum fraction of a candidate's energy carried by the first level.
pub const HARMONIC_MIN_SHARE: f64 = 1e-3;

/// Searches for nonconstant harmonic functions of finite energy.
///
/// On chains the harmonic functions are affine in cumulative resistance, so
/// the unit-flux potential is built exactly and kept when its level energies
/// converge. Elsewhere, per level k, the quotient
/// E_{F₁}(h) / E_{F_k}(h) is maximized over functions harmonic inside F_k;
/// candidates are the eigen-directions whose first-level-normalized energies
/// 1/μ_k converge along the filtration. A finite graph whose last level is
/// the whole graph has no boundary data and yields no candidates.
pub fn harmonic_defect(
    g: &WeightedGraph,
    filtration: &Filtration,
) -> Result<Vec<HarmonicCandidate>> {
    let levels = filtration.levels();
    if let Some(all) = g.vertices() {
        if levels.last().map(|l| l.len()) == Some(all.len()) {
            return Ok(Vec::new());
        }
    }
    if levels.len() < 4 {
        return Err(Error::InsufficientDepth {
            needed: 4,
            got: levels.len(),
        });
    }
    if g.chain_ratio().is_some() {
        return chain_harmonic(g, levels);
    }
    generic_harmonic(g, levels)
}

fn chain_harmonic(g: &WeightedGraph, levels: &[Vec<VertexId>]) -> Result<Vec<HarmonicCandidate>> {
    let o = g.base_point().as_int().expect("chain labels are integers");
    let last = levels.last().expect("nonempty");
    let lo = last
        .iter()
        .filter_map(|v| v.as_int())
        .min()
        .expect("nonempty");
    let hi = last
        .iter()
        .filter_map(|v| v.as_int())
        .max()
        .expect("nonempty");
    // unit-flux potential: h(n+1) − h(n) = 1/c(n,n+1), h(o) = 0
    let resistance = |n: i64| -> Result<f64> {
        let w = g
            .weight(&VertexId::Int(n), &VertexId::Int(n + 1))?
            .expect("chain neighbours");
        Ok(1.0 / w)
    };
    let mut values = BTreeMap::from([(VertexId::Int(o), 0.0)]);
    let mut acc = NeumaierSum::new();
    for n in o..hi {
        acc.add(resistance(n)?);
        values.insert(VertexId::Int(n + 1), acc.value());
    }
    let mut acc = NeumaierSum::new();
    for n in (lo..o).rev() {
        acc.add(-resistance(n)?);
        values.insert(VertexId::Int(n), acc.value());
    }
    let h = GraphFunction::restricted(values);
    let level_energies: Vec<f64> = levels
        .iter()
        .map(|level| {
            let part = GraphFunction::restricted(
                level
                    .iter()
                    .map(|v| (v.clone(), h.get(v).expect("within hull")))
                    .collect(),
            );
            g.energy(&part)
        })
        .collect::<Result<_>>()?;
    let n = level_energies.len();
    if (level_energies[n - 1] - level_energies[n - 2]).abs() > HARMONIC_CAUCHY_GAP {
        return Ok(Vec::new());
    }
    let function = GraphFunction::restricted(
        last.iter()
            .map(|v| (v.clone(), h.get(v).expect("within hull")))
            .collect(),
    );
    let section = FiniteSection::new(g, last.iter().cloned(), BoundaryMode::Free)?;
    let max_laplacian = max_interior_laplacian(g, &function, &section)?;
    Ok(vec![HarmonicCandidate {
        function,
        max_laplacian,
        energy: level_energies[n - 1],
        level_energies,
    }])
}

fn max_interior_laplacian(
    g: &WeightedGraph,
    h: &GraphFunction,
    section: &FiniteSection,
) -> Result<f64> {
    let mut m: f64 = 0.0;
    for x in section.interior(g)? {
        m = m.max(g.laplacian_apply(h, &x)?.abs());
    }
    Ok(m)
}

struct LevelSpectrum {
    mu: Vec<f64>,
    functions: Vec<GraphFunction>,
}

fn generic_harmonic(g: &WeightedGraph, levels: &[Vec<VertexId>]) -> Result<Vec<HarmonicCandidate>> {
    let o = g.base_point();
    let first: Vec<VertexId> = levels[0].clone();
    let inner: Vec<VertexId> = first.iter().filter(|v| *v != o).cloned().collect();
    if inner.is_empty() {
        return Err(Error::InvalidFiltration(
            "first level must contain more than the base point".into(),
        ));
    }
    // grounded Laplacian of the first level (induced), and its Cholesky root
    let m = inner.len();
    let first_set: BTreeSet<&VertexId> = first.iter().collect();
    let pos: BTreeMap<&VertexId, usize> = inner.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut l1 = DenseMatrix::zeros(m, m);
    for (i, x) in inner.iter().enumerate() {
        let mut d = 0.0;
        for (y, w) in g.neighbors(x)? {
            if first_set.contains(&y) {
                d += w;
                if let Some(&j) = pos.get(&y) {
                    l1.set(i, j, -w);
                }
            }
        }
        l1.set(i, i, d);
    }
    let root = Cholesky::factor(&l1)?.lower();

    let spectra: Vec<LevelSpectrum> = levels[1..]
        .par_iter()
        .map(|level| level_spectrum(g, level, &first, &inner, &root))
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    for idx in 0..m {
        let energies: Vec<f64> = spectra.iter().map(|s| 1.0 / s.mu[idx]).collect();
        let n = energies.len();
        let share = spectra[n - 1].mu[idx];
        let cauchy = (energies[n - 1] - energies[n - 2]).abs() <= HARMONIC_CAUCHY_GAP;
        if !(share >= HARMONIC_MIN_SHARE && cauchy && share.is_finite()) {
            continue;
        }
        let function = spectra[n - 1].functions[idx].clone();
        let section = FiniteSection::new(
            g,
            levels.last().expect("nonempty").iter().cloned(),
            BoundaryMode::Free,
        )?;
        let max_laplacian = max_interior_laplacian(g, &function, &section)?;
        out.push(HarmonicCandidate {
            energy: g.energy(&function)?,
            function,
            max_laplacian,
            level_energies: energies,
        });
    }
    Ok(out)
}

/// Eigenvalues μ (descending) of the first-level energy share over functions
/// harmonic inside `level`, with the maximizing functions normalized to unit
/// first-level energy.
fn level_spectrum(
    g: &WeightedGraph,
    level: &[VertexId],
    first: &[VertexId],
    inner: &[VertexId],
    root: &DenseMatrix,
) -> Result<LevelSpectrum> {
    let o = g.base_point();
    let section = FiniteSection::new(g, level.iter().cloned(), BoundaryMode::Free)?;
    let boundary: Vec<VertexId> = section.boundary(g)?;
    let bset: BTreeSet<&VertexId> = boundary.iter().collect();
    let interior: Vec<VertexId> = section
        .vertices()
        .iter()
        .filter(|v| !bset.contains(v))
        .cloned()
        .collect();
    if first.iter().any(|v| bset.contains(v)) {
        return Err(Error::InvalidFiltration(
            "first level must lie inside every later level's interior".into(),
        ));
    }
    // harmonic measure rows: M(v,b) = Σ_{i∈I, i∼b} g_v(i) c(ib), with g_v the
    // Green function of the interior grounded on the boundary
    let interior_section =
        FiniteSection::new(g, interior.iter().cloned(), BoundaryMode::Dirichlet)?;
    let green = SectionSolver::monopoles(g, &interior_section)?;
    let neumann = SectionSolver::dipoles(g, &section)?;
    let harmonic_measure = |v: &VertexId| -> Result<Vec<f64>> {
        let gv = green.solve_values(v)?;
        let mut row = vec![0.0; boundary.len()];
        for (k, b) in boundary.iter().enumerate() {
            let mut s = NeumaierSum::new();
            for (i, w) in g.neighbors(b)? {
                if let Some(p) = interior_section.position(&i) {
                    s.add(gv[p] * w);
                }
            }
            row[k] = s.value();
        }
        Ok(row)
    };
    let m_o = harmonic_measure(o)?;
    // Neumann responses to boundary currents J_u = Mᵀ(e_u − e_o)
    let responses: Vec<Vec<f64>> = inner
        .iter()
        .map(|u| {
            let m_u = harmonic_measure(u)?;
            let mut rhs = vec![0.0; section.len()];
            for (k, b) in boundary.iter().enumerate() {
                rhs[section.position(b).expect("boundary in section")] = m_u[k] - m_o[k];
            }
            neumann.solve_rhs(&rhs)
        })
        .collect::<Result<_>>()?;
    let m = inner.len();
    let mut nhat = DenseMatrix::zeros(m, m);
    for (j, h) in responses.iter().enumerate() {
        for (i, v) in inner.iter().enumerate() {
            nhat.set(
                i,
                j,
                h[section.position(v).expect("first level in section")],
            );
        }
    }
    for i in 0..m {
        for j in 0..i {
            let a = 0.5 * (nhat.get(i, j) + nhat.get(j, i));
            nhat.set(i, j, a);
            nhat.set(j, i, a);
        }
    }
    // symmetric form Rᵀ N̂ R
    let mut s = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = NeumaierSum::new();
            for a in 0..m {
                for b in 0..m {
                    acc.add(root.get(a, i) * nhat.get(a, b) * root.get(b, j));
                }
            }
            s.set(i, j, acc.value());
        }
    }
    for i in 0..m {
        for j in 0..i {
            let a = 0.5 * (s.get(i, j) + s.get(j, i));
            s.set(i, j, a);
            s.set(j, i, a);
        }
    }
    let (vals, vecs) = symmetric_eigen(&s)?;
    let mut mu = Vec::with_capacity(m);
    let mut functions = Vec::with_capacity(m);
    for k in (0..m).rev() {
        let lambda = vals[k];
        mu.push(lambda);
        // coefficients R y, scaled by 1/μ for unit first-level energy
        let y: Vec<f64> = (0..m).map(|i| vecs.get(i, k)).collect();
        let coef: Vec<f64> = (0..m)
            .map(|a| (0..m).map(|i| root.get(a, i) * y[i]).sum::<f64>() / lambda)
            .collect();
        let values = section
            .vertices()
            .iter()
            .enumerate()
            .map(|(p, v)| {
                let mut acc = NeumaierSum::new();
                for (c, h) in coef.iter().zip(&responses) {
                    acc.add(c * h[p]);
                }
                (v.clone(), acc.value())
            })
            .collect();
        functions.push(GraphFunction::restricted(values));
    }
    Ok(LevelSpectrum { mu, functions })
}

/// max |⟨δ_x, h⟩_E| over interior vertices x of the section.
pub fn duality_pair_check(
    g: &WeightedGraph,
    h: &GraphFunction,
    section: &FiniteSection,
) -> Result<f64> {
    let mut m: f64 = 0.0;
    for x in section.interior(g)? {
        let d = GraphFunction::delta(x.clone());
        m = m.max(g.energy_inner(&d, h)?.abs());
    }
    Ok(m)
}
