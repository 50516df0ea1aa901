//! Mixed-state quantum circuits.
//!
//! A circuit is a connected DAG whose vertices are inputs (initialized with
//! a basis index or left open), gates (completely positive trace
//! non-increasing maps given by Kraus matrices) and outputs (one-qudit
//! measurement elements). Edges carry distinct positive integer labels that
//! double as tensor indices. Acceptance probability is the trace of the
//! final state against the tensor product of the output measurements.

mod format;
mod generate;
mod tensorize;

pub use format::{parse_circuit, print_circuit};
pub use generate::{
    gen_3sat_verifier, gen_random_circuit, random_3cnf, CnfFormula, Structure,
};
pub use tensorize::{
    density_tensor, gate_tensor, measurement_tensor, to_feasibility_network, to_tensor_network,
    FeasibilityNet,
};

use std::collections::{BTreeMap, BinaryHeap};

use crate::cmatrix::CMatrix;
use crate::error::{Error, Result};

/// Trace-condition and PSD tolerance used by validation.
pub const VALIDATION_TOL: f64 = 1e-9;

/// A quantum gate: a completely positive map given as Kraus matrices of
/// shape d^outputs x d^inputs, with sum K'K bounded by the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
    pub kraus: Vec<CMatrix>,
}

impl Gate {
    /// Kraus map effect sum K'K.
    pub fn effect(&self) -> CMatrix {
        let dim = self.kraus[0].cols;
        let mut e = CMatrix::zeros(dim, dim);
        for k in &self.kraus {
            e.add_assign(&k.adjoint().mul(k));
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VertexKind {
    /// `init: None` marks an uninitialized input (the `*` marker).
    Input { init: Option<usize> },
    Gate { gate: String },
    Output { measurement: CMatrix },
}

/// Edge from an output port of one vertex to an input port of another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CEdge {
    pub label: u32,
    pub from: (usize, usize),
    pub to: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCircuit {
    pub d: usize,
    pub gates: Vec<Gate>,
    pub vertices: Vec<VertexKind>,
    pub edges: Vec<CEdge>,
}

impl QuantumCircuit {
    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    /// In-edges of a vertex ordered by port.
    pub fn in_edges(&self, v: usize) -> Vec<&CEdge> {
        let mut es: Vec<&CEdge> = self.edges.iter().filter(|e| e.to.0 == v).collect();
        es.sort_by_key(|e| e.to.1);
        es
    }

    /// Out-edges of a vertex ordered by port.
    pub fn out_edges(&self, v: usize) -> Vec<&CEdge> {
        let mut es: Vec<&CEdge> = self.edges.iter().filter(|e| e.from.0 == v).collect();
        es.sort_by_key(|e| e.from.1);
        es
    }

    /// Uninitialized input vertices in ascending id order; this is the
    /// digit order of assignment strings.
    pub fn open_inputs(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .enumerate()
            .filter_map(|(v, k)| match k {
                VertexKind::Input { init: None } => Some(v),
                _ => None,
            })
            .collect()
    }

    /// Copy of the circuit with its open inputs initialized by `digits`,
    /// one value per open input in ascending vertex order.
    pub fn initialized_with(&self, digits: &[usize]) -> Result<QuantumCircuit> {
        let open = self.open_inputs();
        if digits.len() != open.len() {
            return Err(Error::validation(format!(
                "assignment has {} digits but the circuit has {} open inputs",
                digits.len(),
                open.len()
            )));
        }
        let mut c = self.clone();
        for (&v, &y) in open.iter().zip(digits) {
            if y >= self.d {
                return Err(Error::validation(format!(
                    "assignment digit {y} out of range for d = {}",
                    self.d
                )));
            }
            c.vertices[v] = VertexKind::Input { init: Some(y) };
        }
        Ok(c)
    }

    /// Deterministic topological order: Kahn's algorithm preferring the
    /// smallest available vertex id.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.vertices.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            indeg[e.to.0] += 1;
            out[e.from.0].push(e.to.0);
        }
        let mut heap: BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
            .filter(|&v| indeg[v] == 0)
            .map(std::cmp::Reverse)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(v)) = heap.pop() {
            order.push(v);
            for &w in &out[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    heap.push(std::cmp::Reverse(w));
                }
            }
        }
        if order.len() != n {
            return Err(Error::validation("circuit graph has a directed cycle"));
        }
        Ok(order)
    }
}

/// Structural and semantic validation; collects every violation.
pub fn validate_circuit(c: &QuantumCircuit) -> Result<()> {
    let mut problems = Vec::new();
    if c.d < 2 {
        problems.push(format!("qudit dimension {} is below 2", c.d));
    }
    // Gate library.
    let mut names = BTreeMap::new();
    for (gi, g) in c.gates.iter().enumerate() {
        if names.insert(g.name.clone(), gi).is_some() {
            problems.push(format!("gate name {:?} defined twice", g.name));
        }
        if g.inputs == 0 || g.outputs == 0 {
            problems.push(format!("gate {:?}: arity must be positive", g.name));
            continue;
        }
        if g.kraus.is_empty() {
            problems.push(format!("gate {:?}: no Kraus matrices", g.name));
            continue;
        }
        let dq = c.d.pow(g.inputs as u32);
        let dr = c.d.pow(g.outputs as u32);
        if g.kraus.iter().any(|k| k.rows != dr || k.cols != dq) {
            problems.push(format!(
                "gate {:?}: Kraus matrices must be {dr} x {dq}",
                g.name
            ));
            continue;
        }
        // Trace non-increasing: sum K'K bounded by the identity.
        if !g.effect().bounded_by(1.0, VALIDATION_TOL) {
            problems.push(format!(
                "gate {:?}: trace condition violated (largest eigenvalue of sum K'K exceeds 1)",
                g.name
            ));
        }
    }
    // Edges.
    let mut labels = BTreeMap::new();
    for (ei, e) in c.edges.iter().enumerate() {
        if e.label == 0 {
            problems.push(format!("edge {ei}: labels must be positive"));
        }
        if let Some(prev) = labels.insert(e.label, ei) {
            problems.push(format!(
                "edge label {} used by edges {prev} and {ei}",
                e.label
            ));
        }
        for &(v, _) in [&e.from, &e.to] {
            if v >= c.vertices.len() {
                problems.push(format!("edge {}: vertex {v} out of range", e.label));
            }
        }
        if e.from.0 == e.to.0 {
            problems.push(format!("edge {}: self-loop at vertex {}", e.label, e.from.0));
        }
    }
    if !problems.is_empty() {
        return Err(Error::validation(problems.join("; ")));
    }
    // Per-vertex degree and port checks.
    for (v, kind) in c.vertices.iter().enumerate() {
        let ins = c.in_edges(v);
        let outs = c.out_edges(v);
        let in_ports: Vec<usize> = ins.iter().map(|e| e.to.1).collect();
        let out_ports: Vec<usize> = outs.iter().map(|e| e.from.1).collect();
        match kind {
            VertexKind::Input { init } => {
                if !ins.is_empty() {
                    problems.push(format!("vertex {v}: input with incoming edges"));
                }
                if out_ports != [0] {
                    problems.push(format!("vertex {v}: input must have exactly out-port 0"));
                }
                if let Some(i) = init {
                    if *i >= c.d {
                        problems.push(format!("vertex {v}: initialization {i} out of range"));
                    }
                }
            }
            VertexKind::Gate { gate } => match c.gate(gate) {
                None => problems.push(format!("vertex {v}: unknown gate {gate:?}")),
                Some(g) => {
                    if in_ports != (0..g.inputs).collect::<Vec<_>>() {
                        problems.push(format!(
                            "vertex {v}: gate {gate:?} needs in-ports 0..{}, got {in_ports:?}",
                            g.inputs
                        ));
                    }
                    if out_ports != (0..g.outputs).collect::<Vec<_>>() {
                        problems.push(format!(
                            "vertex {v}: gate {gate:?} needs out-ports 0..{}, got {out_ports:?}",
                            g.outputs
                        ));
                    }
                }
            },
            VertexKind::Output { measurement } => {
                if in_ports != [0] {
                    problems.push(format!("vertex {v}: output must have exactly in-port 0"));
                }
                if !outs.is_empty() {
                    problems.push(format!("vertex {v}: output with outgoing edges"));
                }
                if measurement.rows != c.d || measurement.cols != c.d {
                    problems.push(format!("vertex {v}: measurement must be {0} x {0}", c.d));
                } else {
                    if !measurement.is_psd(VALIDATION_TOL) {
                        problems.push(format!(
                            "vertex {v}: measurement element is not positive semidefinite"
                        ));
                    }
                    if !measurement.bounded_by(1.0, VALIDATION_TOL) {
                        problems.push(format!(
                            "vertex {v}: measurement element exceeds the identity"
                        ));
                    }
                }
            }
        }
    }
    if !problems.is_empty() {
        return Err(Error::validation(problems.join("; ")));
    }
    // Global structure: acyclic and connected.
    if let Err(e) = c.topological_order() {
        problems.push(e.to_string());
    }
    if !c.vertices.is_empty() {
        let n = c.vertices.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &c.edges {
            adj[e.from.0].push(e.to.0);
            adj[e.to.0].push(e.from.0);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count != n {
            problems.push("underlying undirected graph is disconnected".to_string());
        }
    } else {
        problems.push("circuit has no vertices".to_string());
    }
    if !problems.is_empty() {
        return Err(Error::validation(problems.join("; ")));
    }
    Ok(())
}

/// Cut width of one vertex ordering plus whether it is topological.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutwidthReport {
    pub cutwidth: usize,
    pub topological: bool,
}

/// Maximum prefix cut of the given ordering. The online-width semantics
/// require topological orderings; the report says whether this one is.
pub fn cutwidth_of_ordering(c: &QuantumCircuit, ordering: &[usize]) -> Result<CutwidthReport> {
    let n = c.vertices.len();
    if ordering.len() != n {
        return Err(Error::validation(format!(
            "ordering has {} entries for {n} vertices",
            ordering.len()
        )));
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in ordering.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(Error::validation(
                "ordering is not a permutation of the vertices",
            ));
        }
        pos[v] = i;
    }
    let topological = c.edges.iter().all(|e| pos[e.from.0] < pos[e.to.0]);
    let mut cutwidth = 0usize;
    for i in 0..n.saturating_sub(1) {
        let cut = c
            .edges
            .iter()
            .filter(|e| (pos[e.from.0] <= i) != (pos[e.to.0] <= i))
            .count();
        cutwidth = cutwidth.max(cut);
    }
    Ok(CutwidthReport {
        cutwidth,
        topological,
    })
}

/// Standard gate constructors shared by the generators and tests.
pub mod gatelib {
    use super::{CMatrix, Gate};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Unitary gate from a single d^w x d^w matrix.
    pub fn unitary(name: &str, wires: usize, m: CMatrix) -> Gate {
        Gate {
            name: name.to_string(),
            inputs: wires,
            outputs: wires,
            kraus: vec![m],
        }
    }

    /// Permutation gate on `wires` qudits: basis state z maps to perm[z].
    pub fn permutation(name: &str, d: usize, wires: usize, perm: &[usize]) -> Gate {
        let dim = d.pow(wires as u32);
        assert_eq!(perm.len(), dim);
        let mut m = CMatrix::zeros(dim, dim);
        for (z, &pz) in perm.iter().enumerate() {
            m.set(pz, z, c(1.0, 0.0));
        }
        unitary(name, wires, m)
    }

    pub fn identity_gate(d: usize) -> Gate {
        unitary("id", 1, CMatrix::identity(d))
    }

    /// Cyclic shift: |j> -> |j+1 mod d> (the X gate for d = 2).
    pub fn shift_gate(d: usize) -> Gate {
        let perm: Vec<usize> = (0..d).map(|j| (j + 1) % d).collect();
        permutation("X", d, 1, &perm)
    }

    /// Clock gate: |j> -> w^j |j>.
    pub fn clock_gate(d: usize) -> Gate {
        let mut m = CMatrix::zeros(d, d);
        for j in 0..d {
            let a = std::f64::consts::TAU * j as f64 / d as f64;
            m.set(j, j, Complex64::from_polar(1.0, a));
        }
        unitary("Z", 1, m)
    }

    /// Discrete Fourier transform (the Hadamard for d = 2).
    pub fn fourier_gate(d: usize) -> Gate {
        let s = 1.0 / (d as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                let a = std::f64::consts::TAU * (j * k) as f64 / d as f64;
                m.set(j, k, Complex64::from_polar(s, a));
            }
        }
        unitary("H", 1, m)
    }

    /// Controlled shift: |a, b> -> |a, b+a mod d> (CNOT for d = 2).
    pub fn cshift_gate(d: usize) -> Gate {
        let perm: Vec<usize> = (0..d * d)
            .map(|z| {
                let (a, b) = (z / d, z % d);
                a * d + (b + a) % d
            })
            .collect();
        permutation("CX", d, 2, &perm)
    }

    /// Controlled phase: |a, b> -> w^(ab) |a, b>.
    pub fn cz_gate(d: usize) -> Gate {
        let dim = d * d;
        let mut m = CMatrix::zeros(dim, dim);
        for z in 0..dim {
            let (a, b) = (z / d, z % d);
            let ang = std::f64::consts::TAU * (a * b) as f64 / d as f64;
            m.set(z, z, Complex64::from_polar(1.0, ang));
        }
        unitary("CZ", 2, m)
    }

    pub fn swap_gate(d: usize) -> Gate {
        let perm: Vec<usize> = (0..d * d).map(|z| (z % d) * d + z / d).collect();
        permutation("SWAP", d, 2, &perm)
    }

    /// Fully depolarizing channel: rho -> tr(rho) I/d. Doubles as the coin
    /// preparation gate.
    pub fn coin_gate(d: usize) -> Gate {
        let s = 1.0 / (d as f64).sqrt();
        let mut kraus = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = CMatrix::zeros(d, d);
                k.set(i, j, c(s, 0.0));
                kraus.push(k);
            }
        }
        Gate {
            name: "coin".to_string(),
            inputs: 1,
            outputs: 1,
            kraus,
        }
    }

    /// Amplitude damping with decay probability gamma (d = 2 only).
    pub fn amplitude_damp_gate(gamma: f64) -> Gate {
        let k0 = CMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)],
        ])
        .unwrap();
        let k1 = CMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(gamma.sqrt(), 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        Gate {
            name: "damp".to_string(),
            inputs: 1,
            outputs: 1,
            kraus: vec![k0, k1],
        }
    }

    /// Trace-decreasing filter onto |0><0|.
    pub fn filter_gate(d: usize) -> Gate {
        let mut k = CMatrix::zeros(d, d);
        k.set(0, 0, c(1.0, 0.0));
        Gate {
            name: "filter".to_string(),
            inputs: 1,
            outputs: 1,
            kraus: vec![k],
        }
    }

    /// Basis projector |b><b| as a measurement element.
    pub fn basis_projector(d: usize, b: usize) -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        m.set(b, b, c(1.0, 0.0));
        m
    }
}
