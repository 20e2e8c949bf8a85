//! Weighted graphs, functions on their vertices, and the energy form.
//!
//! A [`WeightedGraph`] is either an explicit finite edge list or one of the
//! generator-backed infinite families (the ℤ-chain, ℤ^d, geometric chains).
//! Infinite graphs never materialize their vertex set; every operation asks
//! only for neighbourhoods of explicitly named vertices.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::NeumaierSum;

/// Vertex label. Integers label chain vertices, integer tuples label lattice
/// points, and names label vertices of user-supplied graphs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexId {
    Int(i64),
    Point(Vec<i64>),
    Name(String),
}

impl VertexId {
    pub fn point(coords: &[i64]) -> Self {
        VertexId::Point(coords.to_vec())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            VertexId::Int(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Int(n) => write!(f, "{n}"),
            VertexId::Point(p) => {
                write!(f, "(")?;
                for (i, c) in p.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            VertexId::Name(s) => write!(f, "{s}"),
        }
    }
}

impl From<i64> for VertexId {
    fn from(n: i64) -> Self {
        VertexId::Int(n)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId::Name(s.to_string())
    }
}

#[derive(Debug, Clone)]
enum Topology {
    /// Finite graph; neighbour lists sorted by label.
    Explicit(BTreeMap<VertexId, Vec<(VertexId, f64)>>),
    /// Two-sided chain on ℤ with c(n, n+1) = ratio^|n|.
    Chain { ratio: f64 },
    /// ℤ^dim with unit weights.
    Lattice { dim: usize },
}

/// Connected weighted graph with finite degrees and a base point `o`.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    topology: Topology,
    base: VertexId,
}

impl WeightedGraph {
    /// Builds a finite graph from an edge list. Rejects self-loops, weights
    /// that are not finite and positive, conflicting duplicate edges, and
    /// disconnected inputs.
    pub fn from_edges<I>(edges: I, base: VertexId) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut adj: BTreeMap<VertexId, BTreeMap<VertexId, f64>> = BTreeMap::new();
        for (x, y, w) in edges {
            if x == y {
                return Err(Error::InvalidGraph(format!("self-loop at {x}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({x},{y}) has weight {w}; weights must be finite and positive"
                )));
            }
            for (a, b) in [(&x, &y), (&y, &x)] {
                let row = adj.entry(a.clone()).or_default();
                if let Some(old) = row.insert(b.clone(), w) {
                    if old != w {
                        return Err(Error::InvalidGraph(format!(
                            "edge ({x},{y}) listed with weights {old} and {w}"
                        )));
                    }
                }
            }
        }
        if adj.is_empty() {
            return Err(Error::InvalidGraph("graph has no edges".into()));
        }
        if !adj.contains_key(&base) {
            return Err(Error::UnknownVertex(base));
        }
        let adj: BTreeMap<VertexId, Vec<(VertexId, f64)>> = adj
            .into_iter()
            .map(|(k, row)| (k, row.into_iter().collect()))
            .collect();
        let g = Self {
            topology: Topology::Explicit(adj),
            base,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// The ℤ-chain with unit weights, based at 0.
    pub fn zchain() -> Self {
        Self {
            topology: Topology::Chain { ratio: 1.0 },
            base: VertexId::Int(0),
        }
    }

    /// Chain with c(n, n+1) = ratio^|n|, based at 0.
    pub fn geometric_chain(ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidGraph(format!(
                "chain ratio {ratio} must be positive"
            )));
        }
        Ok(Self {
            topology: Topology::Chain { ratio },
            base: VertexId::Int(0),
        })
    }

    /// ℤ^dim with unit weights, based at the origin.
    pub fn lattice(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGraph(
                "lattice dimension must be at least 1".into(),
            ));
        }
        Ok(Self {
            topology: Topology::Lattice { dim },
            base: VertexId::Point(vec![0; dim]),
        })
    }

    /// Star with centre 0 and spokes 1..=k, spoke i carrying weight i.
    pub fn star(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidGraph("star needs at least one spoke".into()));
        }
        Self::from_edges(
            (1..=k as i64).map(|i| (VertexId::Int(0), VertexId::Int(i), i as f64)),
            VertexId::Int(0),
        )
    }

    /// Complete graph on 0..k with unit weights, based at 0.
    pub fn complete(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidGraph(
                "complete graph needs at least two vertices".into(),
            ));
        }
        let k = k as i64;
        let edges = (0..k)
            .flat_map(|i| ((i + 1)..k).map(move |j| (VertexId::Int(i), VertexId::Int(j), 1.0)));
        Self::from_edges(edges, VertexId::Int(0))
    }

    /// Same graph with a different base point.
    pub fn with_base(mut self, base: VertexId) -> Result<Self> {
        if !self.contains(&base) {
            return Err(Error::UnknownVertex(base));
        }
        self.base = base;
        Ok(self)
    }

    pub fn base_point(&self) -> &VertexId {
        &self.base
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.topology, Topology::Explicit(_))
    }

    /// Weight ratio when the graph is a generator-backed chain.
    pub fn chain_ratio(&self) -> Option<f64> {
        match self.topology {
            Topology::Chain { ratio } => Some(ratio),
            _ => None,
        }
    }

    pub fn lattice_dim(&self) -> Option<usize> {
        match self.topology {
            Topology::Lattice { dim } => Some(dim),
            _ => None,
        }
    }

    /// All vertices of a finite graph, in label order.
    pub fn vertices(&self) -> Option<Vec<VertexId>> {
        match &self.topology {
            Topology::Explicit(adj) => Some(adj.keys().cloned().collect()),
            _ => None,
        }
    }

    pub fn contains(&self, x: &VertexId) -> bool {
        match (&self.topology, x) {
            (Topology::Explicit(adj), _) => adj.contains_key(x),
            (Topology::Chain { .. }, VertexId::Int(_)) => true,
            (Topology::Lattice { dim }, VertexId::Point(p)) => p.len() == *dim,
            _ => false,
        }
    }

    fn chain_weight(ratio: f64, n: i64) -> f64 {
        // weight of the edge (n, n+1)
        if ratio == 1.0 {
            1.0
        } else {
            ratio.powi(n.unsigned_abs() as i32)
        }
    }

    /// Neighbours of `x` with edge weights, sorted by label.
    pub fn neighbors(&self, x: &VertexId) -> Result<Vec<(VertexId, f64)>> {
        if !self.contains(x) {
            return Err(Error::UnknownVertex(x.clone()));
        }
        Ok(match (&self.topology, x) {
            (Topology::Explicit(adj), _) => adj[x].clone(),
            (Topology::Chain { ratio }, VertexId::Int(n)) => vec![
                (VertexId::Int(n - 1), Self::chain_weight(*ratio, n - 1)),
                (VertexId::Int(n + 1), Self::chain_weight(*ratio, *n)),
            ],
            (Topology::Lattice { dim }, VertexId::Point(p)) => {
                let mut out = Vec::with_capacity(2 * dim);
                for i in 0..*dim {
                    for step in [-1, 1] {
                        let mut q = p.clone();
                        q[i] += step;
                        out.push((VertexId::Point(q), 1.0));
                    }
                }
                out.sort_by(|a, b| a.0.cmp(&b.0));
                out
            }
            _ => unreachable!("contains() checked the label shape"),
        })
    }

    /// c(xy), or `None` when x and y are not adjacent.
    pub fn weight(&self, x: &VertexId, y: &VertexId) -> Result<Option<f64>> {
        if !self.contains(y) {
            return Err(Error::UnknownVertex(y.clone()));
        }
        Ok(self
            .neighbors(x)?
            .into_iter()
            .find(|(z, _)| z == y)
            .map(|(_, w)| w))
    }

    /// c(x) = Σ_{y∼x} c(xy).
    pub fn degree(&self, x: &VertexId) -> Result<f64> {
        let mut s = NeumaierSum::new();
        for (_, w) in self.neighbors(x)? {
            s.add(w);
        }
        Ok(s.value())
    }

    /// ⟨δ_x, δ_y⟩_E: c(x) on the diagonal, −c(xy) for neighbours, 0 otherwise.
    pub fn delta_inner(&self, x: &VertexId, y: &VertexId) -> Result<f64> {
        if x == y {
            return self.degree(x);
        }
        Ok(match self.weight(x, y)? {
            Some(w) => -w,
            None => 0.0,
        })
    }

    /// (Δu)(x) = Σ_{y∼x} c(xy)(u(x) − u(y)).
    pub fn laplacian_apply<T: Scalar>(&self, u: &GraphFunction<T>, x: &VertexId) -> Result<T> {
        let ux = u
            .get(x)
            .ok_or_else(|| Error::FunctionUndefined(x.clone()))?;
        let mut acc = ScalarSum::<T>::default();
        for (y, w) in self.neighbors(x)? {
            let uy = u
                .get(&y)
                .ok_or_else(|| Error::FunctionUndefined(x.clone()))?;
            acc.add((ux - uy).scale(w));
        }
        Ok(acc.value())
    }

    /// ⟨u, v⟩_E = ½ Σ_x Σ_{y∼x} c(xy) conj(u(x) − u(y)) (v(x) − v(y)),
    /// evaluated as a sum over unordered edges.
    ///
    /// Only edges that can carry a nonzero term are visited: those touching
    /// the explicit entries of a function with a constant fill, or else those
    /// touching the domain of a section-restricted function. An edge on which
    /// one function is undefined contributes nothing when the other one is
    /// constant across it, and is an error otherwise.
    pub fn energy_inner<T: Scalar>(&self, u: &GraphFunction<T>, v: &GraphFunction<T>) -> Result<T> {
        let anchor = match (&u.extension, &v.extension) {
            (Extension::Constant(_), Extension::Constant(_)) => {
                if u.values.len() <= v.values.len() {
                    u
                } else {
                    v
                }
            }
            (Extension::Constant(_), _) => u,
            (_, Extension::Constant(_)) => v,
            (Extension::Undefined, _) => u,
            (_, Extension::Undefined) => v,
            _ => return Err(Error::InfiniteSupport),
        };
        let mut acc = ScalarSum::<T>::default();
        for x in anchor.values.keys() {
            for (y, w) in self.neighbors(x)? {
                // edges between two anchor entries are visited from the smaller end
                if y < *x && anchor.values.contains_key(&y) {
                    continue;
                }
                let du = u.diff(x, &y);
                let dv = v.diff(x, &y);
                match (du, dv) {
                    (Some(a), Some(b)) => acc.add((a.conj() * b).scale(w)),
                    (None, None) => {}
                    (None, Some(d)) | (Some(d), None) => {
                        if d != T::zero() {
                            let missing = if u.get(x).is_none() || v.get(x).is_none() {
                                x.clone()
                            } else {
                                y.clone()
                            };
                            return Err(Error::FunctionUndefined(missing));
                        }
                    }
                }
            }
        }
        Ok(acc.value())
    }

    /// ‖u‖²_E.
    pub fn energy<T: Scalar>(&self, u: &GraphFunction<T>) -> Result<f64> {
        Ok(self.energy_inner(u, u)?.re())
    }

    fn is_connected(&self) -> bool {
        let Topology::Explicit(adj) = &self.topology else {
            return true;
        };
        let start = adj.keys().next().expect("nonempty");
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for (y, _) in &adj[x] {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.len() == adj.len()
    }

    /// Parses a vertex label in the graph's own label space: integers for
    /// chains, `(a,b,...)` tuples for lattices (a bare `0` is the origin),
    /// and integers or possibly quoted names for explicit graphs.
    pub fn parse_vertex(&self, s: &str) -> Result<VertexId> {
        let s = s.trim();
        let id = match &self.topology {
            Topology::Chain { .. } => VertexId::Int(
                s.parse()
                    .map_err(|_| Error::Parse(format!("chain vertex must be an integer: {s:?}")))?,
            ),
            Topology::Lattice { dim } => {
                if s == "0" || s == "o" {
                    VertexId::Point(vec![0; *dim])
                } else {
                    let inner = s
                        .strip_prefix('(')
                        .and_then(|t| t.strip_suffix(')'))
                        .unwrap_or(s);
                    let coords = inner
                        .split(',')
                        .map(|c| c.trim().parse::<i64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| Error::Parse(format!("bad lattice point {s:?}")))?;
                    VertexId::Point(coords)
                }
            }
            Topology::Explicit(_) => parse_label(s)?,
        };
        if !self.contains(&id) {
            return Err(Error::UnknownVertex(id));
        }
        Ok(id)
    }
}

/// Label token from a graph file: integer, or a name (quotes stripped).
pub fn parse_label(s: &str) -> Result<VertexId> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty vertex label".into()));
    }
    if let Some(inner) = s.strip_prefix('"').and_then(|t| t.strip_suffix('"')) {
        return Ok(VertexId::Name(inner.to_string()));
    }
    Ok(match s.parse::<i64>() {
        Ok(n) => VertexId::Int(n),
        Err(_) => VertexId::Name(s.to_string()),
    })
}

/// Field of function values: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + PartialEq
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self {
        Self::default()
    }
    fn from_real(x: f64) -> Self;
    fn from_parts(re: f64, im: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs(self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// Compensated sum of scalars (real and imaginary parts separately).
#[derive(Debug, Default, Clone)]
pub(crate) struct ScalarSum<T> {
    re: NeumaierSum,
    im: NeumaierSum,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Scalar> ScalarSum<T> {
    pub(crate) fn add(&mut self, v: T) {
        self.re.add(v.re());
        self.im.add(v.im());
    }

    pub(crate) fn value(&self) -> T {
        T::from_parts(self.re.value(), self.im.value())
    }
}

type Evaluator<T> = Arc<dyn Fn(&VertexId) -> T + Send + Sync>;

/// How a function behaves away from its explicitly stored values.
#[derive(Clone)]
pub enum Extension<T> {
    /// Equal to a constant off the stored entries (finite support modulo constants).
    Constant(T),
    /// Not defined off the stored entries (a section-restricted function).
    Undefined,
    /// Defined everywhere by a closure; the stored entries take precedence.
    Everywhere(Evaluator<T>),
}

impl<T: fmt::Debug> fmt::Debug for Extension<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extension::Constant(c) => write!(f, "Constant({c:?})"),
            Extension::Undefined => write!(f, "Undefined"),
            Extension::Everywhere(_) => write!(f, "Everywhere(<fn>)"),
        }
    }
}

/// Real or complex function on the vertices of a graph.
#[derive(Clone, Debug)]
pub struct GraphFunction<T: Scalar = f64> {
    values: BTreeMap<VertexId, T>,
    extension: Extension<T>,
}

impl<T: Scalar> GraphFunction<T> {
    /// The zero function.
    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn constant(c: T) -> Self {
        Self {
            values: BTreeMap::new(),
            extension: Extension::Constant(c),
        }
    }

    /// Finitely supported function, zero elsewhere.
    pub fn finite(values: BTreeMap<VertexId, T>) -> Self {
        Self {
            values,
            extension: Extension::Constant(T::zero()),
        }
    }

    /// Function known only on the given vertices.
    pub fn restricted(values: BTreeMap<VertexId, T>) -> Self {
        Self {
            values,
            extension: Extension::Undefined,
        }
    }

    /// Function given by a rule at every vertex.
    pub fn everywhere<F>(f: F) -> Self
    where
        F: Fn(&VertexId) -> T + Send + Sync + 'static,
    {
        Self {
            values: BTreeMap::new(),
            extension: Extension::Everywhere(Arc::new(f)),
        }
    }

    /// Dirac mass δ_x.
    pub fn delta(x: VertexId) -> Self {
        Self::finite(BTreeMap::from([(x, T::from_real(1.0))]))
    }

    /// Indicator χ_F.
    pub fn indicator<'a, I: IntoIterator<Item = &'a VertexId>>(set: I) -> Self {
        Self::finite(
            set.into_iter()
                .map(|x| (x.clone(), T::from_real(1.0)))
                .collect(),
        )
    }

    pub fn extension(&self) -> &Extension<T> {
        &self.extension
    }

    /// Explicitly stored entries.
    pub fn entries(&self) -> &BTreeMap<VertexId, T> {
        &self.values
    }

    pub fn get(&self, x: &VertexId) -> Option<T> {
        if let Some(v) = self.values.get(x) {
            return Some(*v);
        }
        match &self.extension {
            Extension::Constant(c) => Some(*c),
            Extension::Undefined => None,
            Extension::Everywhere(f) => Some(f(x)),
        }
    }

    pub fn is_defined(&self, x: &VertexId) -> bool {
        self.values.contains_key(x) || !matches!(self.extension, Extension::Undefined)
    }

    fn diff(&self, x: &VertexId, y: &VertexId) -> Option<T> {
        Some(self.get(x)? - self.get(y)?)
    }

    /// Overwrites (or adds) a single entry.
    pub fn set(&mut self, x: VertexId, value: T) {
        self.values.insert(x, value);
    }

    /// Representative with value 0 at `o`.
    pub fn normalized(&self, o: &VertexId) -> Result<Self> {
        let shift = self
            .get(o)
            .ok_or_else(|| Error::FunctionUndefined(o.clone()))?;
        Ok(self.map_values(move |v| v - shift))
    }

    /// Applies `f` to every value, including the extension.
    pub fn map_values<F>(&self, f: F) -> Self
    where
        F: Fn(T) -> T + Send + Sync + Clone + 'static,
    {
        let values = self
            .values
            .iter()
            .map(|(k, v)| (k.clone(), f(*v)))
            .collect();
        let extension = match &self.extension {
            Extension::Constant(c) => Extension::Constant(f(*c)),
            Extension::Undefined => Extension::Undefined,
            Extension::Everywhere(g) => {
                let g = g.clone();
                Extension::Everywhere(Arc::new(move |x| f(g(x))))
            }
        };
        Self { values, extension }
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map_values(move |v| s * v)
    }

    /// Σ a_i f_i. Section-restricted terms restrict the result to the
    /// intersection of their domains.
    pub fn linear_combination(terms: &[(T, &GraphFunction<T>)]) -> Self {
        let restricted: Vec<&GraphFunction<T>> = terms
            .iter()
            .map(|(_, f)| *f)
            .filter(|f| matches!(f.extension, Extension::Undefined))
            .collect();
        let eval = |x: &VertexId| -> Option<T> {
            let mut s = ScalarSum::<T>::default();
            for (a, f) in terms {
                s.add(*a * f.get(x)?);
            }
            Some(s.value())
        };
        if let Some(first) = restricted.first() {
            let values = first
                .values
                .keys()
                .filter(|x| restricted.iter().all(|f| f.values.contains_key(*x)))
                .filter_map(|x| eval(x).map(|v| (x.clone(), v)))
                .collect();
            return Self::restricted(values);
        }
        let keys: BTreeSet<&VertexId> = terms.iter().flat_map(|(_, f)| f.values.keys()).collect();
        let values: BTreeMap<VertexId, T> = keys
            .into_iter()
            .map(|x| (x.clone(), eval(x).expect("defined everywhere")))
            .collect();
        let all_constant = terms
            .iter()
            .all(|(_, f)| matches!(f.extension, Extension::Constant(_)));
        if all_constant {
            let mut fill = ScalarSum::<T>::default();
            for (a, f) in terms {
                if let Extension::Constant(c) = f.extension {
                    fill.add(*a * c);
                }
            }
            Self {
                values,
                extension: Extension::Constant(fill.value()),
            }
        } else {
            let owned: Vec<(T, GraphFunction<T>)> =
                terms.iter().map(|(a, f)| (*a, (*f).clone())).collect();
            Self {
                values,
                extension: Extension::Everywhere(Arc::new(move |x| {
                    let mut s = ScalarSum::<T>::default();
                    for (a, f) in &owned {
                        s.add(*a * f.get(x).expect("defined everywhere"));
                    }
                    s.value()
                })),
            }
        }
    }

    /// Whether `self − other` is constant on the vertices where both are
    /// explicitly stored (and on the fills, if both have constant fills).
    pub fn eq_mod_constants(&self, other: &Self, tol: f64) -> bool {
        let keys: BTreeSet<&VertexId> = self.values.keys().chain(other.values.keys()).collect();
        let mut shift: Option<T> = None;
        let mut check = |a: T, b: T| -> bool {
            let d = a - b;
            match shift {
                None => {
                    shift = Some(d);
                    true
                }
                Some(s) => (d - s).abs() <= tol,
            }
        };
        for x in keys {
            if let (Some(a), Some(b)) = (self.get(x), other.get(x)) {
                if !check(a, b) {
                    return false;
                }
            }
        }
        if let (Extension::Constant(a), Extension::Constant(b)) =
            (&self.extension, &other.extension)
        {
            return check(*a, *b);
        }
        true
    }
}

impl GraphFunction<f64> {
    /// Complex-valued copy.
    pub fn to_complex(&self) -> GraphFunction<Complex64> {
        let values = self
            .values
            .iter()
            .map(|(k, v)| (k.clone(), Complex64::new(*v, 0.0)))
            .collect();
        let extension = match &self.extension {
            Extension::Constant(c) => Extension::Constant(Complex64::new(*c, 0.0)),
            Extension::Undefined => Extension::Undefined,
            Extension::Everywhere(g) => {
                let g = g.clone();
                Extension::Everywhere(Arc::new(move |x| Complex64::new(g(x), 0.0)))
            }
        };
        GraphFunction { values, extension }
    }
}
