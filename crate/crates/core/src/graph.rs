//! Metric graphs with magnetic line integrals and per-vertex scattering data.
//!
//! Vertices are numbered `1..=vertices`. An internal edge joining `a` and `b`
//! is stored once, together with the line integral of the vector potential
//! along the stored orientation `a → b`; walking the edge backwards picks up
//! the opposite phase. Parallel edges between the same pair of vertices are
//! told apart by a 1-based multiplicity index `j`, and `a == b` is a loop.
//!
//! [`ModeOrdering`] fixes where every mode lives in the vectors and matrices
//! built by [`crate::smatrix`]: vertex-major, then externals before
//! internals, then neighbour-ascending, then `j`-ascending.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct InternalEdge {
    pub a: usize,
    pub b: usize,
    pub j: usize,
    pub length: f64,
    /// Line integral along the stored orientation `a → b`.
    pub theta: f64,
}

impl InternalEdge {
    pub fn is_loop(&self) -> bool {
        self.a == self.b
    }

    fn pair(&self) -> (usize, usize) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

/// Half-line attached to vertex `a`, oriented from the vertex to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExternalEdge {
    pub a: usize,
    pub j: usize,
}

/// Scattering data attached to one vertex.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalScattering {
    /// Momentum-independent matrix, in the vertex's canonical channel order.
    Constant(CMatrix),
    /// The scale-invariant three-channel family `S^C(t)`.
    ScaleInvariantC { t: f64 },
    /// Energy-dependent deformation of `S^C(t)`; reduces to it at `eta = 0`.
    EnergyDependentE { t: f64, eta: f64 },
    /// `U = S^C(t)` for `k > 0` and `U^{-1}` for `k < 0` (massless Dirac junction).
    DiracStep { t: f64 },
}

impl LocalScattering {
    /// Channel count the family is defined for, if fixed.
    pub fn fixed_dimension(&self) -> Option<usize> {
        match self {
            LocalScattering::Constant(m) => Some(m.nrows()),
            _ => Some(3),
        }
    }

    /// `t` for the three-channel families.
    pub fn transmission_parameter(&self) -> Option<f64> {
        match *self {
            LocalScattering::Constant(_) => None,
            LocalScattering::ScaleInvariantC { t }
            | LocalScattering::EnergyDependentE { t, .. }
            | LocalScattering::DiracStep { t } => Some(t),
        }
    }

    /// True when the matrix does not depend on `k` (for `k > 0` in the step case).
    pub fn is_scale_invariant(&self) -> bool {
        match self {
            LocalScattering::EnergyDependentE { eta, .. } => *eta == 0.0,
            _ => true,
        }
    }
}

/// Directed internal half-edge `(vertex, neighbor, j)`.
///
/// A loop owns two half-edges at its vertex; `end` tells them apart. `end == 0`
/// is the end the stored parametrisation leaves from and carries `+theta`.
/// For ordinary edges `end` is always 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfEdge {
    pub vertex: usize,
    pub neighbor: usize,
    pub j: usize,
    pub end: u8,
}

impl HalfEdge {
    pub fn new(vertex: usize, neighbor: usize, j: usize) -> Self {
        HalfEdge { vertex, neighbor, j, end: 0 }
    }

    /// The same edge seen from the other end.
    pub fn reversed(&self) -> HalfEdge {
        if self.vertex == self.neighbor {
            HalfEdge { end: 1 - self.end, ..*self }
        } else {
            HalfEdge { vertex: self.neighbor, neighbor: self.vertex, j: self.j, end: 0 }
        }
    }
}

impl fmt::Display for HalfEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vertex == self.neighbor {
            write!(f, "({},{},{})#{}", self.vertex, self.neighbor, self.j, self.end)
        } else {
            write!(f, "({},{},{})", self.vertex, self.neighbor, self.j)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    pub vertices: usize,
    pub internal: Vec<InternalEdge>,
    pub external: Vec<ExternalEdge>,
    pub local: BTreeMap<usize, LocalScattering>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NoVertices,
    VertexOutOfRange,
    BadLength,
    BadTheta,
    DuplicateEdge,
    MultiplicityGap,
    NoExternalEdge,
    NotConnected,
    MissingLocal,
    UnknownLocalVertex,
    DimensionMismatch,
    BadParameter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl Violation {
    fn new(kind: ViolationKind, message: impl Into<String>) -> Self {
        Violation { kind, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl GraphSpec {
    /// Number of channels meeting at `vertex`. A loop counts twice.
    pub fn degree(&self, vertex: usize) -> usize {
        let ext = self.external.iter().filter(|e| e.a == vertex).count();
        let int: usize = self
            .internal
            .iter()
            .map(|e| {
                if e.is_loop() {
                    if e.a == vertex {
                        2
                    } else {
                        0
                    }
                } else {
                    usize::from(e.a == vertex) + usize::from(e.b == vertex)
                }
            })
            .sum();
        ext + int
    }

    fn find_edge(&self, h: &HalfEdge) -> Option<&InternalEdge> {
        let pair = (h.vertex.min(h.neighbor), h.vertex.max(h.neighbor));
        self.internal.iter().find(|e| e.pair() == pair && e.j == h.j)
    }

    /// Edge length and orientation-signed line integral of a half-edge.
    pub fn half_edge_data(&self, h: &HalfEdge) -> Option<(f64, f64)> {
        let e = self.find_edge(h)?;
        let theta = if e.is_loop() {
            if h.end == 0 {
                e.theta
            } else {
                -e.theta
            }
        } else if (h.vertex, h.neighbor) == (e.a, e.b) {
            e.theta
        } else {
            -e.theta
        };
        Some((e.length, theta))
    }

    /// The graph with every line integral negated.
    pub fn with_negated_flux(&self) -> GraphSpec {
        let mut g = self.clone();
        for e in &mut g.internal {
            e.theta = -e.theta;
        }
        g
    }

    /// All line integrals, in storage order.
    pub fn thetas(&self) -> Vec<f64> {
        self.internal.iter().map(|e| e.theta).collect()
    }

    pub fn from_json_str(s: &str) -> Result<GraphSpec> {
        let file: GraphFile = serde_json::from_str(s)?;
        file.into_spec()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<GraphSpec> {
        let text = std::fs::read_to_string(path)?;
        GraphSpec::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from_spec(self)).expect("graph spec serializes")
    }
}

/// Checks every structural invariant and reports each violation found.
pub fn validate_graph(spec: &GraphSpec) -> ValidationReport {
    use ViolationKind::*;
    let mut out = Vec::new();
    let nv = spec.vertices;
    if nv == 0 {
        out.push(Violation::new(NoVertices, "graph has no vertices"));
    }
    let in_range = |v: usize| v >= 1 && v <= nv;

    let mut seen: BTreeSet<((usize, usize), usize)> = BTreeSet::new();
    let mut multiplicities: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for (i, e) in spec.internal.iter().enumerate() {
        if !in_range(e.a) || !in_range(e.b) {
            out.push(Violation::new(
                VertexOutOfRange,
                format!("internal edge #{i} ({},{},{}) references a missing vertex", e.a, e.b, e.j),
            ));
            continue;
        }
        if !(e.length.is_finite() && e.length > 0.0) {
            out.push(Violation::new(
                BadLength,
                format!("internal edge ({},{},{}) has non-positive length {}", e.a, e.b, e.j, e.length),
            ));
        }
        if !e.theta.is_finite() {
            out.push(Violation::new(BadTheta, format!("internal edge ({},{},{}) has non-finite theta", e.a, e.b, e.j)));
        }
        if !seen.insert((e.pair(), e.j)) {
            out.push(Violation::new(DuplicateEdge, format!("internal edge ({},{},{}) is listed twice", e.a, e.b, e.j)));
        }
        multiplicities.entry(e.pair()).or_default().insert(e.j);
    }
    for (pair, js) in &multiplicities {
        if js.iter().copied().ne(1..=js.len()) {
            out.push(Violation::new(
                MultiplicityGap,
                format!("edges between {} and {} are not numbered 1..{}", pair.0, pair.1, js.len()),
            ));
        }
    }

    let mut ext_seen: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for e in &spec.external {
        if !in_range(e.a) {
            out.push(Violation::new(
                VertexOutOfRange,
                format!("external edge ({},0,{}) references a missing vertex", e.a, e.j),
            ));
            continue;
        }
        if !ext_seen.entry(e.a).or_default().insert(e.j) {
            out.push(Violation::new(DuplicateEdge, format!("external edge ({},0,{}) is listed twice", e.a, e.j)));
        }
    }
    for (a, js) in &ext_seen {
        if js.iter().copied().ne(1..=js.len()) {
            out.push(Violation::new(
                MultiplicityGap,
                format!("external edges at vertex {a} are not numbered 1..{}", js.len()),
            ));
        }
    }
    if spec.external.is_empty() {
        out.push(Violation::new(NoExternalEdge, "graph has no external edge (compact)"));
    }

    if nv > 0 && !is_connected(spec) {
        out.push(Violation::new(NotConnected, "graph not connected"));
    }

    for v in 1..=nv {
        let deg = spec.degree(v);
        match spec.local.get(&v) {
            None => out.push(Violation::new(MissingLocal, format!("vertex {v} has no local scattering data"))),
            Some(local) => {
                if let Some(dim) = local.fixed_dimension() {
                    if dim != deg {
                        out.push(Violation::new(
                            DimensionMismatch,
                            format!("local matrix dimension mismatch at vertex {v}: {dim}x{dim} for degree {deg}"),
                        ));
                    }
                }
                if let LocalScattering::Constant(m) = local {
                    if m.nrows() != m.ncols() {
                        out.push(Violation::new(
                            DimensionMismatch,
                            format!("local matrix dimension mismatch at vertex {v}: matrix is not square"),
                        ));
                    }
                    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                        out.push(Violation::new(
                            BadParameter,
                            format!("vertex {v}: local matrix has non-finite entries"),
                        ));
                    }
                }
                if let Some(t) = local.transmission_parameter() {
                    if !(t > 0.0 && t < 1.0) {
                        out.push(Violation::new(BadParameter, format!("vertex {v}: t={t} outside (0,1)")));
                    }
                }
                if let LocalScattering::EnergyDependentE { eta, .. } = local {
                    if !eta.is_finite() {
                        out.push(Violation::new(BadParameter, format!("vertex {v}: eta is not finite")));
                    }
                }
            }
        }
    }
    for v in spec.local.keys() {
        if !in_range(*v) {
            out.push(Violation::new(UnknownLocalVertex, format!("local scattering data given for missing vertex {v}")));
        }
    }
    ValidationReport { violations: out }
}

fn is_connected(spec: &GraphSpec) -> bool {
    let nv = spec.vertices;
    let mut adj = vec![Vec::new(); nv + 1];
    for e in &spec.internal {
        if e.a >= 1 && e.a <= nv && e.b >= 1 && e.b <= nv {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
    }
    let mut seen = vec![false; nv + 1];
    let mut stack = vec![1];
    seen[1] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen[1..].iter().all(|&s| s)
}

/// Position of a channel among the graph's external or internal modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    External(usize),
    Internal(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InternalSlot {
    pub half: HalfEdge,
    pub length: f64,
    pub theta: f64,
    /// Index of the reversed half-edge.
    pub reverse: usize,
}

/// Layout of the external mode vector and the internal mode vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOrdering {
    pub external: Vec<ExternalEdge>,
    pub internal: Vec<InternalSlot>,
    /// Local channels of each vertex (index `vertex - 1`) in canonical order.
    pub vertex_channels: Vec<Vec<Channel>>,
    ext_lookup: HashMap<ExternalEdge, usize>,
    int_lookup: HashMap<HalfEdge, usize>,
}

impl ModeOrdering {
    pub fn d_ext(&self) -> usize {
        self.external.len()
    }

    pub fn d_int(&self) -> usize {
        self.internal.len()
    }

    pub fn ext_index(&self, e: &ExternalEdge) -> Option<usize> {
        self.ext_lookup.get(e).copied()
    }

    pub fn int_index(&self, h: &HalfEdge) -> Option<usize> {
        self.int_lookup.get(h).copied()
    }
}

/// Builds the canonical mode layout of a valid graph.
pub fn canonical_ordering(spec: &GraphSpec) -> Result<ModeOrdering> {
    let report = validate_graph(spec);
    if !report.is_valid() {
        return Err(Error::InvalidGraph(report.violations));
    }
    let mut external = spec.external.clone();
    external.sort();

    let mut halves: Vec<HalfEdge> = Vec::new();
    for e in &spec.internal {
        if e.is_loop() {
            halves.push(HalfEdge { vertex: e.a, neighbor: e.a, j: e.j, end: 0 });
            halves.push(HalfEdge { vertex: e.a, neighbor: e.a, j: e.j, end: 1 });
        } else {
            halves.push(HalfEdge::new(e.a, e.b, e.j));
            halves.push(HalfEdge::new(e.b, e.a, e.j));
        }
    }
    halves.sort();

    let int_lookup: HashMap<HalfEdge, usize> = halves.iter().enumerate().map(|(i, h)| (*h, i)).collect();
    let ext_lookup: HashMap<ExternalEdge, usize> = external.iter().enumerate().map(|(i, e)| (*e, i)).collect();

    let internal = halves
        .iter()
        .map(|h| {
            let (length, theta) = spec.half_edge_data(h).expect("half-edge built from the edge list");
            InternalSlot { half: *h, length, theta, reverse: int_lookup[&h.reversed()] }
        })
        .collect();

    let mut vertex_channels = vec![Vec::new(); spec.vertices];
    for (i, e) in external.iter().enumerate() {
        vertex_channels[e.a - 1].push(Channel::External(i));
    }
    for (i, h) in halves.iter().enumerate() {
        vertex_channels[h.vertex - 1].push(Channel::Internal(i));
    }

    Ok(ModeOrdering { external, internal, vertex_channels, ext_lookup, int_lookup })
}

/// Sum of orientation-signed line integrals along a closed path.
pub fn cycle_flux(spec: &GraphSpec, cycle: &[HalfEdge]) -> Result<f64> {
    if cycle.is_empty() {
        return Err(Error::InvalidArgument("empty cycle".into()));
    }
    let mut total = 0.0;
    for (i, h) in cycle.iter().enumerate() {
        let (_, theta) =
            spec.half_edge_data(h).ok_or_else(|| Error::InvalidArgument(format!("edge {h} not in graph")))?;
        let next = &cycle[(i + 1) % cycle.len()];
        if h.neighbor != next.vertex {
            return Err(Error::InvalidArgument(format!(
                "path not closed: {h} is not followed by an edge leaving vertex {}",
                h.neighbor
            )));
        }
        total += theta;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// JSON file format

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: usize,
    #[serde(default)]
    internal_edges: Vec<InternalEdgeFile>,
    external_edges: Vec<ExternalEdgeFile>,
    local: BTreeMap<usize, LocalFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InternalEdgeFile {
    a: usize,
    b: usize,
    j: usize,
    length: f64,
    theta: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExternalEdgeFile {
    a: usize,
    j: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum LocalFile {
    Constant { matrix: Vec<Vec<[f64; 2]>> },
    ScaleInvariantC { t: f64 },
    EnergyDependentE { t: f64, eta: f64 },
    DiracStep { t: f64 },
}

impl GraphFile {
    fn into_spec(self) -> Result<GraphSpec> {
        let mut local = BTreeMap::new();
        for (v, l) in self.local {
            let l = match l {
                LocalFile::Constant { matrix } => {
                    let n = matrix.len();
                    if matrix.iter().any(|row| row.len() != n) {
                        return Err(Error::InvalidArgument(format!("local matrix at vertex {v} is not square")));
                    }
                    LocalScattering::Constant(CMatrix::from_fn(n, n, |r, c| {
                        let [re, im] = matrix[r][c];
                        C64::new(re, im)
                    }))
                }
                LocalFile::ScaleInvariantC { t } => LocalScattering::ScaleInvariantC { t },
                LocalFile::EnergyDependentE { t, eta } => LocalScattering::EnergyDependentE { t, eta },
                LocalFile::DiracStep { t } => LocalScattering::DiracStep { t },
            };
            local.insert(v, l);
        }
        Ok(GraphSpec {
            vertices: self.vertices,
            internal: self
                .internal_edges
                .into_iter()
                .map(|e| InternalEdge { a: e.a, b: e.b, j: e.j, length: e.length, theta: e.theta })
                .collect(),
            external: self.external_edges.into_iter().map(|e| ExternalEdge { a: e.a, j: e.j }).collect(),
            local,
        })
    }

    fn from_spec(spec: &GraphSpec) -> GraphFile {
        GraphFile {
            vertices: spec.vertices,
            internal_edges: spec
                .internal
                .iter()
                .map(|e| InternalEdgeFile { a: e.a, b: e.b, j: e.j, length: e.length, theta: e.theta })
                .collect(),
            external_edges: spec.external.iter().map(|e| ExternalEdgeFile { a: e.a, j: e.j }).collect(),
            local: spec
                .local
                .iter()
                .map(|(v, l)| {
                    let f = match l {
                        LocalScattering::Constant(m) => LocalFile::Constant {
                            matrix: (0..m.nrows())
                                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                                .collect(),
                        },
                        LocalScattering::ScaleInvariantC { t } => LocalFile::ScaleInvariantC { t: *t },
                        LocalScattering::EnergyDependentE { t, eta } => {
                            LocalFile::EnergyDependentE { t: *t, eta: *eta }
                        }
                        LocalScattering::DiracStep { t } => LocalFile::DiracStep { t: *t },
                    };
                    (*v, f)
                })
                .collect(),
        }
    }
}
