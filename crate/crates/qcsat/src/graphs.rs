//! Undirected multigraphs, tree decompositions and carving decompositions.
//!
//! A rooted carving decomposition is a rooted binary tree whose leaves are
//! in bijection with the graph vertices; its width is the largest edge cut
//! induced by a subtree. The decomposition is *contractive* when the two
//! child vertex sets of every internal node are joined by at least one edge.
//! [`contractify`] turns any carving into a contractive one while keeping
//! the width and multiplying the height by at most the width.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Undirected multigraph with dense vertex ids `0..n` and distinctly
/// labeled edges. Parallel edges are allowed, self-loops are not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    edges: Vec<EdgeRec>,
    adj: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRec {
    pub u: usize,
    pub v: usize,
    pub label: u32,
}

impl Multigraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, u32)>) -> Result<Self> {
        let mut seen = BTreeMap::new();
        let mut recs = Vec::with_capacity(edges.len());
        let mut adj = vec![Vec::new(); n];
        for (i, &(u, v, label)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::validation(format!(
                    "edge {label}: endpoint out of range (n = {n})"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("edge {label}: self-loop at {u}")));
            }
            if label == 0 {
                return Err(Error::validation("edge labels must be positive"));
            }
            if let Some(prev) = seen.insert(label, i) {
                return Err(Error::validation(format!(
                    "duplicate edge label {label} (edges {prev} and {i})"
                )));
            }
            adj[u].push((v, i));
            adj[v].push((u, i));
            recs.push(EdgeRec { u, v, label });
        }
        Ok(Multigraph { n, edges: recs, adj })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeRec] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(w, _)| w)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Connected components as sorted vertex lists, ordered by smallest
    /// contained vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![start];
            let mut verts = Vec::new();
            comp[start] = id;
            while let Some(v) = stack.pop() {
                verts.push(v);
                for w in self.neighbors(v) {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            verts.sort_unstable();
            out.push(verts);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::validation("graph has no vertices"));
        }
        let comps = self.components();
        if comps.len() > 1 {
            let desc: Vec<String> = comps.iter().map(|c| format!("{c:?}")).collect();
            return Err(Error::validation(format!(
                "graph is disconnected; components: {}",
                desc.join(" ")
            )));
        }
        Ok(())
    }

    /// Induced subgraph with dense local ids. Returns the subgraph and the
    /// local-to-global vertex map. `verts` must be sorted and distinct.
    pub fn induced_subgraph(&self, verts: &[usize]) -> Result<(Multigraph, Vec<usize>)> {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in verts.iter().enumerate() {
            if v >= self.n {
                return Err(Error::validation(format!("vertex {v} out of range")));
            }
            if local[v] != usize::MAX {
                return Err(Error::validation(format!("vertex {v} listed twice")));
            }
            local[v] = i;
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            if local[e.u] != usize::MAX && local[e.v] != usize::MAX {
                edges.push((local[e.u], local[e.v], e.label));
            }
        }
        Ok((Multigraph::new(verts.len(), edges)?, verts.to_vec()))
    }
}

/// Versioned edge-list text format: header `d-graph v1 n m`, then one
/// `u v label` triple per line.
pub fn print_graph(g: &Multigraph) -> String {
    let mut out = format!("d-graph v1 {} {}\n", g.n, g.edges.len());
    for e in &g.edges {
        out.push_str(&format!("{} {} {}\n", e.u, e.v, e.label));
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Multigraph> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::validation("empty graph file"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "d-graph" || parts[1] != "v1" {
        return Err(Error::validation(format!("bad graph header: {header:?}")));
    }
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::validation("bad vertex count"))?;
    let m: usize = parts[3]
        .parse()
        .map_err(|_| Error::validation("bad edge count"))?;
    let mut edges = Vec::with_capacity(m);
    for line in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::validation(format!("bad edge line: {line:?}")));
        }
        let u = f[0].parse().map_err(|_| Error::validation("bad endpoint"))?;
        let v = f[1].parse().map_err(|_| Error::validation("bad endpoint"))?;
        let label = f[2].parse().map_err(|_| Error::validation("bad label"))?;
        edges.push((u, v, label));
    }
    if edges.len() != m {
        return Err(Error::validation(format!(
            "header says {m} edges, found {}",
            edges.len()
        )));
    }
    Multigraph::new(n, edges)
}

/// Tree decomposition: a tree of bags covering vertices and edges, with the
/// per-vertex bags inducing connected subtrees.
#[derive(Debug, Clone)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<usize>>,
    pub arcs: Vec<(usize, usize)>,
    pub root: usize,
    pub width: usize,
}

impl TreeDecomposition {
    fn node_adj(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.arcs {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Checks the three defining conditions plus the stored width.
    pub fn validate(&self, g: &Multigraph) -> Result<()> {
        let n = g.vertex_count();
        if self.bags.is_empty() {
            return Err(Error::validation("tree decomposition has no bags"));
        }
        // The bag graph must be a tree.
        if self.arcs.len() + 1 != self.bags.len() {
            return Err(Error::validation(
                "decomposition graph is not a tree (wrong arc count)",
            ));
        }
        let adj = self.node_adj();
        let mut seen = vec![false; self.bags.len()];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::validation("decomposition graph is not connected"));
        }
        // Bullet 1: bags cover all vertices.
        let mut covered = vec![false; n];
        for bag in &self.bags {
            for &v in bag {
                if v >= n {
                    return Err(Error::validation(format!("bag vertex {v} out of range")));
                }
                covered[v] = true;
            }
        }
        if let Some(v) = covered.iter().position(|&c| !c) {
            return Err(Error::validation(format!(
                "vertex-cover condition violated: vertex {v} is in no bag"
            )));
        }
        // Bullet 2: every edge inside some bag.
        for e in g.edges() {
            let ok = self
                .bags
                .iter()
                .any(|bag| bag.contains(&e.u) && bag.contains(&e.v));
            if !ok {
                return Err(Error::validation(format!(
                    "edge-cover condition violated: edge {{{}, {}}} (label {}) is in no bag",
                    e.u, e.v, e.label
                )));
            }
        }
        // Bullet 3: per-vertex bag sets induce connected subtrees.
        for v in 0..n {
            let holds: Vec<usize> = (0..self.bags.len())
                .filter(|&b| self.bags[b].contains(&v))
                .collect();
            let mut seen: Vec<bool> = vec![false; self.bags.len()];
            let mut stack = vec![holds[0]];
            seen[holds[0]] = true;
            let mut count = 1;
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if !seen[w] && self.bags[w].contains(&v) {
                        seen[w] = true;
                        count += 1;
                        stack.push(w);
                    }
                }
            }
            if count != holds.len() {
                return Err(Error::validation(format!(
                    "connected-subtree condition violated for vertex {v}"
                )));
            }
        }
        let width = self.bags.iter().map(|b| b.len()).max().unwrap_or(1) - 1;
        if width != self.width {
            return Err(Error::validation(format!(
                "stored width {} does not match measured width {width}",
                self.width
            )));
        }
        Ok(())
    }
}

/// Min-fill elimination-order heuristic. Deterministic: ties among
/// minimum-fill vertices break toward the lowest vertex id, so the `seed`
/// does not influence the result; it is part of the signature so callers can
/// thread one RNG seed through the whole pipeline.
pub fn min_fill_tree_decomposition(g: &Multigraph, _seed: u64) -> Result<TreeDecomposition> {
    g.require_connected()?;
    let n = g.vertex_count();
    // Simple adjacency (parallel edges collapse for decomposition purposes).
    let mut adj: Vec<Vec<bool>> = vec![vec![false; n]; n];
    for e in g.edges() {
        adj[e.u][e.v] = true;
        adj[e.v][e.u] = true;
    }
    let mut alive: Vec<bool> = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut bags: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut elim_pos = vec![usize::MAX; n];
    for step in 0..n {
        // Pick the alive vertex with the fewest missing edges among its
        // alive neighbors.
        let mut best: Option<(usize, usize)> = None;
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            let nbrs: Vec<usize> = (0..n).filter(|&w| alive[w] && adj[v][w]).collect();
            let mut fill = 0;
            for i in 0..nbrs.len() {
                for j in i + 1..nbrs.len() {
                    if !adj[nbrs[i]][nbrs[j]] {
                        fill += 1;
                    }
                }
            }
            if best.is_none_or(|(_, bf)| fill < bf) {
                best = Some((v, fill));
            }
        }
        let (v, _) = best.expect("at least one alive vertex");
        let nbrs: Vec<usize> = (0..n).filter(|&w| alive[w] && adj[v][w]).collect();
        for i in 0..nbrs.len() {
            for j in i + 1..nbrs.len() {
                adj[nbrs[i]][nbrs[j]] = true;
                adj[nbrs[j]][nbrs[i]] = true;
            }
        }
        let mut bag = nbrs;
        bag.push(v);
        bag.sort_unstable();
        bags.push(bag);
        elim_pos[v] = step;
        alive[v] = false;
        order.push(v);
    }
    // Bag of vertex eliminated at `step` attaches to the bag of its
    // earliest-eliminated later neighbor.
    let mut arcs = Vec::new();
    for step in 0..n {
        let v = order[step];
        let parent_vertex = bags[step]
            .iter()
            .copied()
            .filter(|&w| w != v)
            .min_by_key(|&w| elim_pos[w]);
        if let Some(w) = parent_vertex {
            arcs.push((step, elim_pos[w]));
        }
    }
    let width = bags.iter().map(|b| b.len()).max().unwrap_or(1) - 1;
    let td = TreeDecomposition {
        bags,
        arcs,
        root: n - 1,
        width,
    };
    debug_assert!(td.validate(g).is_ok());
    Ok(td)
}

/// Binary tree under construction; frozen into a [`RootedCarving`] arena.
#[derive(Debug, Clone)]
enum Bt {
    Leaf(usize),
    Node(Box<Bt>, Box<Bt>),
}

impl Bt {
    fn comb(items: Vec<Bt>) -> Bt {
        let mut it = items.into_iter();
        let first = it.next().expect("comb of at least one item");
        it.fold(first, |acc, x| Bt::Node(Box::new(acc), Box::new(x)))
    }
}

/// Rooted carving decomposition with cached per-node cut sizes.
#[derive(Debug, Clone)]
pub struct RootedCarving {
    children: Vec<Option<(usize, usize)>>,
    vertex: Vec<Option<usize>>,
    root: usize,
    cut_sizes: Vec<usize>,
    width: usize,
    height: usize,
    contractive: bool,
}

impl RootedCarving {
    fn from_bt(bt: &Bt, g: &Multigraph) -> Result<Self> {
        let mut children = Vec::new();
        let mut vertex = Vec::new();
        fn freeze(
            bt: &Bt,
            children: &mut Vec<Option<(usize, usize)>>,
            vertex: &mut Vec<Option<usize>>,
        ) -> usize {
            match bt {
                Bt::Leaf(v) => {
                    children.push(None);
                    vertex.push(Some(*v));
                    children.len() - 1
                }
                Bt::Node(l, r) => {
                    let li = freeze(l, children, vertex);
                    let ri = freeze(r, children, vertex);
                    children.push(Some((li, ri)));
                    vertex.push(None);
                    children.len() - 1
                }
            }
        }
        let root = freeze(bt, &mut children, &mut vertex);
        let mut carving = RootedCarving {
            children,
            vertex,
            root,
            cut_sizes: Vec::new(),
            width: 0,
            height: 0,
            contractive: false,
        };
        let stats = compute_stats(g, &carving)?;
        carving.cut_sizes = stats.cut_sizes;
        carving.width = stats.width;
        carving.height = stats.height;
        carving.contractive = stats.contractive;
        Ok(carving)
    }

    /// Builds a carving from raw arena parts (children and leaf labels in
    /// post-order with the root last), validating against `g`.
    pub fn from_parts(
        g: &Multigraph,
        children: Vec<Option<(usize, usize)>>,
        vertex: Vec<Option<usize>>,
    ) -> Result<Self> {
        if children.is_empty() || children.len() != vertex.len() {
            return Err(Error::validation("malformed carving arena"));
        }
        let root = children.len() - 1;
        let mut carving = RootedCarving {
            children,
            vertex,
            root,
            cut_sizes: Vec::new(),
            width: 0,
            height: 0,
            contractive: false,
        };
        let stats = compute_stats(g, &carving)?;
        carving.cut_sizes = stats.cut_sizes;
        carving.width = stats.width;
        carving.height = stats.height;
        carving.contractive = stats.contractive;
        Ok(carving)
    }

    pub fn node_count(&self) -> usize {
        self.children.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_children(&self, id: usize) -> Option<(usize, usize)> {
        self.children[id]
    }

    pub fn leaf_vertex(&self, id: usize) -> Option<usize> {
        self.vertex[id]
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_contractive(&self) -> bool {
        self.contractive
    }

    pub fn cut_sizes(&self) -> &[usize] {
        &self.cut_sizes
    }

    fn to_bt(&self, id: usize) -> Bt {
        match self.children[id] {
            None => Bt::Leaf(self.vertex[id].expect("leaf carries a vertex")),
            Some((l, r)) => Bt::Node(Box::new(self.to_bt(l)), Box::new(self.to_bt(r))),
        }
    }
}

struct CarvingStats {
    cut_sizes: Vec<usize>,
    width: usize,
    height: usize,
    contractive: bool,
}

fn compute_stats(g: &Multigraph, carving: &RootedCarving) -> Result<CarvingStats> {
    let n = g.vertex_count();
    let node_count = carving.children.len();
    // Leaf vertices must biject onto 0..n.
    let mut hits = vec![0usize; n];
    for id in 0..node_count {
        if let Some(v) = carving.vertex[id] {
            if v >= n {
                return Err(Error::validation(format!("leaf vertex {v} out of range")));
            }
            hits[v] += 1;
        }
    }
    if hits.iter().any(|&h| h != 1) {
        return Err(Error::validation(
            "leaf labeling is not a bijection onto the vertex set",
        ));
    }
    // Subtree vertex sets as bitsets, bottom-up (children precede parents in
    // the freeze order; recompute order generically by repeated passes is
    // wasteful, so do an explicit post-order walk).
    let blocks = n.div_ceil(64);
    let mut sets = vec![vec![0u64; blocks]; node_count];
    let mut depth = vec![0usize; node_count];
    let mut post = Vec::with_capacity(node_count);
    let mut stack = vec![(carving.root, false)];
    while let Some((id, expanded)) = stack.pop() {
        if expanded {
            post.push(id);
            continue;
        }
        stack.push((id, true));
        if let Some((l, r)) = carving.children[id] {
            depth[l] = depth[id] + 1;
            depth[r] = depth[id] + 1;
            stack.push((r, false));
            stack.push((l, false));
        }
    }
    for &id in &post {
        match carving.children[id] {
            None => {
                let v = carving.vertex[id].unwrap();
                sets[id][v / 64] |= 1 << (v % 64);
            }
            Some((l, r)) => {
                let (left, rest) = sets.split_at_mut(id.max(l) + 1);
                let _ = (left, rest);
                let lset = sets[l].clone();
                let rset = sets[r].clone();
                for b in 0..blocks {
                    sets[id][b] = lset[b] | rset[b];
                }
            }
        }
    }
    let inside = |set: &[u64], v: usize| set[v / 64] >> (v % 64) & 1 == 1;
    let mut cut_sizes = vec![0usize; node_count];
    for id in 0..node_count {
        cut_sizes[id] = g
            .edges()
            .iter()
            .filter(|e| inside(&sets[id], e.u) != inside(&sets[id], e.v))
            .count();
    }
    let width = cut_sizes.iter().copied().max().unwrap_or(0);
    let height = depth.iter().copied().max().unwrap_or(0);
    let mut contractive = true;
    for id in 0..node_count {
        if let Some((l, r)) = carving.children[id] {
            let joined = g
                .edges()
                .iter()
                .any(|e| {
                    (inside(&sets[l], e.u) && inside(&sets[r], e.v))
                        || (inside(&sets[l], e.v) && inside(&sets[r], e.u))
                });
            if !joined {
                contractive = false;
            }
        }
    }
    Ok(CarvingStats {
        cut_sizes,
        width,
        height,
        contractive,
    })
}

/// Measured width, height and contractivity of a carving over `g`,
/// recomputed from scratch.
pub fn carving_stats(g: &Multigraph, carving: &RootedCarving) -> Result<(usize, usize, bool)> {
    let stats = compute_stats(g, carving)?;
    Ok((stats.width, stats.height, stats.contractive))
}

/// Converts a tree decomposition into a rooted (not necessarily contractive)
/// carving decomposition: each vertex hangs as a leaf under its shallowest
/// bag (ties toward the lower bag id) and the bag tree is binarized.
pub fn tree_decomposition_to_carving(
    g: &Multigraph,
    td: &TreeDecomposition,
) -> Result<RootedCarving> {
    td.validate(g)?;
    let n = g.vertex_count();
    let adj = {
        let mut adj = vec![Vec::new(); td.bags.len()];
        for &(a, b) in &td.arcs {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    };
    // Depths and children via BFS from the root.
    let mut depth = vec![usize::MAX; td.bags.len()];
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); td.bags.len()];
    let mut queue = std::collections::VecDeque::from([td.root]);
    depth[td.root] = 0;
    while let Some(u) = queue.pop_front() {
        let mut next: Vec<usize> = adj[u]
            .iter()
            .copied()
            .filter(|&w| depth[w] == usize::MAX)
            .collect();
        next.sort_unstable();
        for w in next {
            depth[w] = depth[u] + 1;
            kids[u].push(w);
            queue.push_back(w);
        }
    }
    // Assign each vertex to its shallowest bag, ties by bag id.
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); td.bags.len()];
    for v in 0..n {
        let best = (0..td.bags.len())
            .filter(|&b| td.bags[b].contains(&v))
            .min_by_key(|&b| (depth[b], b))
            .expect("validated decomposition covers every vertex");
        assigned[best].push(v);
    }
    fn build(u: usize, assigned: &[Vec<usize>], kids: &[Vec<usize>]) -> Option<Bt> {
        let mut items: Vec<Bt> = assigned[u].iter().map(|&v| Bt::Leaf(v)).collect();
        for &c in &kids[u] {
            if let Some(sub) = build(c, assigned, kids) {
                items.push(sub);
            }
        }
        if items.is_empty() {
            None
        } else {
            Some(Bt::comb(items))
        }
    }
    let bt = build(td.root, &assigned, &kids).expect("decomposition covers at least one vertex");
    RootedCarving::from_bt(&bt, g)
}

/// The unique caterpillar carving over a breadth-first traversal: height
/// `n - 1`, the two deepest leaves carry the first two traversal vertices.
/// BFS starts at the lowest vertex id and explores neighbors in ascending
/// order, so the output is deterministic.
pub fn bfs_caterpillar_carving(g: &Multigraph) -> Result<RootedCarving> {
    g.require_connected()?;
    let order = bfs_order(g, 0);
    let bt = Bt::comb(order.into_iter().map(Bt::Leaf).collect());
    RootedCarving::from_bt(&bt, g)
}

fn bfs_order(g: &Multigraph, start: usize) -> Vec<usize> {
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = std::collections::VecDeque::from([start]);
    let mut order = Vec::with_capacity(g.vertex_count());
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        let mut next: Vec<usize> = g.neighbors(v).filter(|&w| !seen[w]).collect();
        next.sort_unstable();
        next.dedup();
        for w in next {
            seen[w] = true;
            queue.push_back(w);
        }
    }
    order
}

/// Quotient multigraph over a partition of the vertices: one vertex per
/// part, one edge (with its original label) per crossing edge of `g`.
pub fn quotient_graph(g: &Multigraph, parts: &[Vec<usize>]) -> Result<Multigraph> {
    let n = g.vertex_count();
    let mut owner = vec![usize::MAX; n];
    for (p, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::validation(format!("part {p} is empty")));
        }
        for &v in part {
            if v >= n {
                return Err(Error::validation(format!("part {p}: vertex {v} out of range")));
            }
            if owner[v] != usize::MAX {
                return Err(Error::validation(format!(
                    "vertex {v} appears in parts {} and {p}",
                    owner[v]
                )));
            }
            owner[v] = p;
        }
    }
    if let Some(v) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::validation(format!(
            "parts do not cover the vertex set (vertex {v} missing)"
        )));
    }
    let mut edges = Vec::new();
    for e in g.edges() {
        let (pu, pv) = (owner[e.u], owner[e.v]);
        if pu != pv {
            edges.push((pu, pv, e.label));
        }
    }
    Multigraph::new(parts.len(), edges)
}

/// A carving decomposition of one induced subgraph, together with the
/// local-to-global vertex map of that subgraph.
#[derive(Debug, Clone)]
pub struct CarvedPart {
    pub carving: RootedCarving,
    /// `vertices[local] = global` for the induced subgraph the carving is over.
    pub vertices: Vec<usize>,
}

/// Composes a carving of the quotient graph with carvings of the parts by
/// substituting each quotient leaf (labeled with a part index) with the
/// root of that part's carving. `g` is the union graph the result lives on;
/// leaf labels of the parts are translated from local to global ids.
pub fn compose_carvings(
    g: &Multigraph,
    quotient_carving: &RootedCarving,
    parts: &[CarvedPart],
) -> Result<RootedCarving> {
    let leaf_count = (0..quotient_carving.node_count())
        .filter(|&id| quotient_carving.leaf_vertex(id).is_some())
        .count();
    if leaf_count != parts.len() {
        return Err(Error::validation(format!(
            "quotient carving has {leaf_count} leaves but {} parts were given",
            parts.len()
        )));
    }
    fn relabel(bt: &Bt, map: &[usize]) -> Result<Bt> {
        match bt {
            Bt::Leaf(local) => map
                .get(*local)
                .map(|&g| Bt::Leaf(g))
                .ok_or_else(|| {
                    Error::validation(format!("part leaf {local} outside its vertex map"))
                }),
            Bt::Node(l, r) => Ok(Bt::Node(
                Box::new(relabel(l, map)?),
                Box::new(relabel(r, map)?),
            )),
        }
    }
    fn substitute(carving: &RootedCarving, id: usize, parts: &[CarvedPart]) -> Result<Bt> {
        match carving.node_children(id) {
            None => {
                let p = carving.leaf_vertex(id).unwrap();
                if p >= parts.len() {
                    return Err(Error::validation(format!(
                        "quotient leaf labeled {p} has no matching part"
                    )));
                }
                let bt = parts[p].carving.to_bt(parts[p].carving.root());
                relabel(&bt, &parts[p].vertices)
            }
            Some((l, r)) => Ok(Bt::Node(
                Box::new(substitute(carving, l, parts)?),
                Box::new(substitute(carving, r, parts)?),
            )),
        }
    }
    let bt = substitute(quotient_carving, quotient_carving.root(), parts)?;
    RootedCarving::from_bt(&bt, g)
}

/// Connected-prefix ordering of parts minimizing the maximum prefix cut.
///
/// `between[i][j]` counts edges between parts i and j; `external[i]` counts
/// edges from part i to vertices outside all parts. Every prefix of the
/// returned order is connected under `between`, so the caterpillar built
/// from it is contractive. Exact subset DP up to 20 parts, greedy beyond.
#[allow(clippy::needless_range_loop)]
fn best_connected_order(external: &[usize], between: &[Vec<usize>]) -> Vec<usize> {
    let p = external.len();
    if p == 1 {
        return vec![0];
    }
    let single_cut =
        |i: usize| external[i] + (0..p).map(|j| between[i][j]).sum::<usize>();
    if p <= 20 {
        let full = 1usize << p;
        // cut[s]: edges leaving the union of the parts in s.
        let mut cut = vec![0usize; full];
        for s in 1..full {
            let l = s.trailing_zeros() as usize;
            let rest = s & !(1 << l);
            let mut c = cut[rest] + external[l];
            for j in 0..p {
                if j == l {
                    continue;
                }
                if rest >> j & 1 == 1 {
                    c -= between[l][j];
                } else {
                    c += between[l][j];
                }
            }
            cut[s] = c;
        }
        let mut best = vec![usize::MAX; full];
        let mut last = vec![usize::MAX; full];
        for i in 0..p {
            best[1 << i] = single_cut(i);
            last[1 << i] = i;
        }
        for s in 1..full {
            if s.count_ones() < 2 {
                continue;
            }
            for l in 0..p {
                if s >> l & 1 == 0 {
                    continue;
                }
                let rest = s & !(1 << l);
                if best[rest] == usize::MAX {
                    continue;
                }
                let adjacent = (0..p).any(|j| rest >> j & 1 == 1 && between[l][j] > 0);
                if !adjacent {
                    continue;
                }
                let value = best[rest].max(cut[s]);
                if value < best[s] {
                    best[s] = value;
                    last[s] = l;
                }
            }
        }
        let mut s = full - 1;
        debug_assert!(best[s] != usize::MAX, "quotient graph must be connected");
        let mut order_rev = Vec::with_capacity(p);
        while s != 0 {
            let l = last[s];
            order_rev.push(l);
            s &= !(1 << l);
        }
        order_rev.reverse();
        return order_rev;
    }
    // Greedy fallback: try each start, extend by the adjacent part with the
    // smallest resulting prefix cut.
    let mut best_order: Option<(usize, Vec<usize>)> = None;
    for start in 0..p {
        let mut in_prefix = vec![false; p];
        in_prefix[start] = true;
        let mut order = vec![start];
        let mut cut = single_cut(start);
        let mut worst = cut;
        for _ in 1..p {
            let mut pick: Option<(usize, usize)> = None;
            for cand in 0..p {
                if in_prefix[cand] {
                    continue;
                }
                let adjacent = (0..p).any(|j| in_prefix[j] && between[cand][j] > 0);
                if !adjacent {
                    continue;
                }
                let mut next = cut + external[cand];
                for j in 0..p {
                    if j == cand {
                        continue;
                    }
                    if in_prefix[j] {
                        next -= between[cand][j];
                    } else {
                        next += between[cand][j];
                    }
                }
                if pick.is_none_or(|(_, c)| next < c) {
                    pick = Some((cand, next));
                }
            }
            let (cand, next) = pick.expect("quotient graph must be connected");
            in_prefix[cand] = true;
            order.push(cand);
            cut = next;
            worst = worst.max(cut);
        }
        if best_order.as_ref().is_none_or(|&(w, _)| worst < w) {
            best_order = Some((worst, order));
        }
    }
    best_order.unwrap().1
}

/// Turns a carving decomposition into a contractive one of width at most
/// the input width and height at most width times the input height.
///
/// Walks the input tree bottom-up keeping, per node, one carving for each
/// connected component of the induced subgraph. At an internal node the
/// child components that merge are arranged along a caterpillar over the
/// component quotient graph; the ordering is chosen to minimize the largest
/// prefix cut measured in `g`.
pub fn contractify(g: &Multigraph, carving: &RootedCarving) -> Result<RootedCarving> {
    g.require_connected()?;
    // Validates the leaf bijection as a side effect.
    compute_stats(g, carving)?;
    struct Comp {
        verts: Vec<usize>,
        tree: Bt,
    }
    let n = g.vertex_count();
    let mut post = Vec::new();
    let mut stack = vec![(carving.root(), false)];
    while let Some((id, expanded)) = stack.pop() {
        if expanded {
            post.push(id);
            continue;
        }
        stack.push((id, true));
        if let Some((l, r)) = carving.node_children(id) {
            stack.push((r, false));
            stack.push((l, false));
        }
    }
    let mut comps: Vec<Vec<Comp>> = (0..carving.node_count()).map(|_| Vec::new()).collect();
    for &id in &post {
        match carving.node_children(id) {
            None => {
                let v = carving.leaf_vertex(id).unwrap();
                comps[id].push(Comp {
                    verts: vec![v],
                    tree: Bt::Leaf(v),
                });
            }
            Some((l, r)) => {
                let mut items: Vec<Comp> = Vec::new();
                items.append(&mut comps[l]);
                items.append(&mut comps[r]);
                // Union-find over items joined by an edge of g.
                let mut item_of = vec![usize::MAX; n];
                for (i, item) in items.iter().enumerate() {
                    for &v in &item.verts {
                        item_of[v] = i;
                    }
                }
                let mut parent: Vec<usize> = (0..items.len()).collect();
                fn find(parent: &mut [usize], mut x: usize) -> usize {
                    while parent[x] != x {
                        parent[x] = parent[parent[x]];
                        x = parent[x];
                    }
                    x
                }
                for e in g.edges() {
                    let (iu, iv) = (item_of[e.u], item_of[e.v]);
                    if iu != usize::MAX && iv != usize::MAX && iu != iv {
                        let (ru, rv) = (find(&mut parent, iu), find(&mut parent, iv));
                        if ru != rv {
                            parent[ru.max(rv)] = ru.min(rv);
                        }
                    }
                }
                let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for i in 0..items.len() {
                    let r = find(&mut parent, i);
                    groups.entry(r).or_default().push(i);
                }
                // Order groups (and items inside a group) by their smallest
                // contained vertex.
                let mut ordered_groups: Vec<Vec<usize>> = groups.into_values().collect();
                for group in &mut ordered_groups {
                    group.sort_by_key(|&i| items[i].verts[0]);
                }
                ordered_groups.sort_by_key(|group| items[group[0]].verts[0]);
                let mut taken: Vec<Option<Comp>> = items.into_iter().map(Some).collect();
                for group in ordered_groups {
                    if group.len() == 1 {
                        comps[id].push(taken[group[0]].take().unwrap());
                        continue;
                    }
                    let members: Vec<Comp> =
                        group.iter().map(|&i| taken[i].take().unwrap()).collect();
                    let p = members.len();
                    let mut local = vec![usize::MAX; n];
                    for (i, m) in members.iter().enumerate() {
                        for &v in &m.verts {
                            local[v] = i;
                        }
                    }
                    let mut between = vec![vec![0usize; p]; p];
                    let mut external = vec![0usize; p];
                    for e in g.edges() {
                        match (local[e.u], local[e.v]) {
                            (usize::MAX, usize::MAX) => {}
                            (i, usize::MAX) => external[i] += 1,
                            (usize::MAX, j) => external[j] += 1,
                            (i, j) if i != j => {
                                between[i][j] += 1;
                                between[j][i] += 1;
                            }
                            _ => {}
                        }
                    }
                    let order = best_connected_order(&external, &between);
                    let mut verts = Vec::new();
                    for m in &members {
                        verts.extend_from_slice(&m.verts);
                    }
                    verts.sort_unstable();
                    let mut trees: Vec<Option<Bt>> =
                        members.into_iter().map(|m| Some(m.tree)).collect();
                    let tree =
                        Bt::comb(order.iter().map(|&i| trees[i].take().unwrap()).collect());
                    comps[id].push(Comp { verts, tree });
                }
            }
        }
    }
    let root_comps = &mut comps[carving.root()];
    debug_assert_eq!(root_comps.len(), 1, "connected graph yields one component");
    let bt = std::mem::replace(&mut root_comps[0].tree, Bt::Leaf(0));
    let out = RootedCarving::from_bt(&bt, g)?;
    if !out.is_contractive() {
        return Err(Error::invariant(
            "contractify produced a non-contractive carving",
        ));
    }
    Ok(out)
}
