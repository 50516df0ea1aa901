//! Abstract networks and contraction trees.
//!
//! An abstract network is a list of index sets in which every index occurs
//! in exactly two member sets. Contracting two sets replaces them by their
//! symmetric difference; a contraction tree records a full contraction
//! schedule as a binary tree whose leaves are the network members and whose
//! internal labels are symmetric differences of the children. The rank of
//! the tree (largest label) governs the tensor sizes met along the way, its
//! height governs the error growth of the set-valued DP.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graphs::{
    carving_stats, contractify, min_fill_tree_decomposition, tree_decomposition_to_carving,
    Multigraph, RootedCarving,
};

/// Sorted set of positive integer indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(Vec<u32>);

impl IndexSet {
    pub fn new(mut indices: Vec<u32>) -> Result<Self> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::validation(format!("duplicate index {}", w[0])));
            }
        }
        if indices.first() == Some(&0) {
            return Err(Error::validation("indices must be positive"));
        }
        Ok(IndexSet(indices))
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Symmetric difference, the label of a contraction.
    pub fn sym_diff(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            match (self.0.get(i), other.0.get(j)) {
                (Some(&a), Some(&b)) if a == b => {
                    i += 1;
                    j += 1;
                }
                (Some(&a), Some(&b)) if a < b => {
                    out.push(a);
                    i += 1;
                }
                (Some(_), Some(&b)) => {
                    out.push(b);
                    j += 1;
                }
                (Some(&a), None) => {
                    out.push(a);
                    i += 1;
                }
                (None, Some(&b)) => {
                    out.push(b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        IndexSet(out)
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] == other.0[j] {
                out.push(self.0[i]);
                i += 1;
                j += 1;
            } else if self.0[i] < other.0[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        IndexSet(out)
    }
}

impl FromIterator<u32> for IndexSet {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        IndexSet::new(iter.into_iter().collect()).expect("valid index set")
    }
}

/// Ordered list of index sets; members are identified by position since the
/// same set may legally occur twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractNetwork {
    sets: Vec<IndexSet>,
}

impl AbstractNetwork {
    /// Builds and fully validates the network (index counts and
    /// connectivity).
    pub fn new(sets: Vec<IndexSet>) -> Result<Self> {
        let n = AbstractNetwork { sets };
        n.validate()?;
        Ok(n)
    }

    pub fn size(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[IndexSet] {
        &self.sets
    }

    pub fn set(&self, position: usize) -> &IndexSet {
        &self.sets[position]
    }

    pub fn rank(&self) -> usize {
        self.sets.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    /// Checks that every index occurs in exactly two member sets and that
    /// the associated graph is connected.
    pub fn validate(&self) -> Result<()> {
        if self.sets.is_empty() {
            return Err(Error::validation(
                "empty network; the terminal object is the single empty index set",
            ));
        }
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for set in &self.sets {
            for i in set.iter() {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        let bad: Vec<String> = counts
            .iter()
            .filter(|&(_, &c)| c != 2)
            .map(|(i, c)| format!("index {i} occurs in {c} sets (expected 2)"))
            .collect();
        if !bad.is_empty() {
            return Err(Error::validation(bad.join("; ")));
        }
        let g = self.graph_unchecked();
        if !g.is_connected() {
            return Err(Error::validation("network graph is disconnected"));
        }
        Ok(())
    }

    fn graph_unchecked(&self) -> Multigraph {
        let mut holders: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (pos, set) in self.sets.iter().enumerate() {
            for i in set.iter() {
                holders.entry(i).or_default().push(pos);
            }
        }
        let mut edges = Vec::new();
        for (i, pos) in holders {
            if pos.len() == 2 {
                edges.push((pos[0], pos[1], i));
            }
        }
        Multigraph::new(self.sets.len(), edges).expect("validated network maps to a multigraph")
    }
}

/// `validate_network` as a named operation; see [`AbstractNetwork::validate`].
pub fn validate_network(n: &AbstractNetwork) -> Result<()> {
    n.validate()
}

/// The multigraph of a network: one vertex per member set, one edge labeled
/// `i` per shared index `i`.
pub fn graph_of_network(n: &AbstractNetwork) -> Result<Multigraph> {
    n.validate()?;
    Ok(n.graph_unchecked())
}

/// Inverse direction: the network whose graph is `g`, with one member set
/// per vertex holding the incident edge labels.
pub fn network_of_graph(g: &Multigraph) -> Result<AbstractNetwork> {
    let sets: Result<Vec<IndexSet>> = (0..g.vertex_count())
        .map(|v| {
            IndexSet::new(
                g.edges()
                    .iter()
                    .filter(|e| e.u == v || e.v == v)
                    .map(|e| e.label)
                    .collect(),
            )
        })
        .collect();
    AbstractNetwork::new(sets?)
}

/// Binary contraction tree: leaves biject onto network positions, internal
/// labels are symmetric differences, siblings always share an index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionTree {
    children: Vec<Option<(usize, usize)>>,
    labels: Vec<IndexSet>,
    /// For leaves, the network position; `usize::MAX` on internal nodes.
    positions: Vec<usize>,
    root: usize,
    rank: usize,
    height: usize,
}

impl ContractionTree {
    pub fn node_count(&self) -> usize {
        self.children.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_children(&self, id: usize) -> Option<(usize, usize)> {
        self.children[id]
    }

    pub fn label(&self, id: usize) -> &IndexSet {
        &self.labels[id]
    }

    pub fn leaf_position(&self, id: usize) -> Option<usize> {
        if self.children[id].is_none() {
            Some(self.positions[id])
        } else {
            None
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0usize; self.children.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if let Some((l, r)) = self.children[id] {
                depth[l] = depth[id] + 1;
                depth[r] = depth[id] + 1;
                stack.push(l);
                stack.push(r);
            }
        }
        depth
    }
}

/// Reads a contraction tree off a contractive carving of the network graph:
/// leaves take their member's index set, every internal node the symmetric
/// difference of its children. Fails on the first internal node whose
/// children share no index.
pub fn contraction_tree_from_carving(
    n: &AbstractNetwork,
    carving: &RootedCarving,
) -> Result<ContractionTree> {
    n.validate()?;
    let node_count = carving.node_count();
    let mut children = vec![None; node_count];
    let mut labels = vec![IndexSet::empty(); node_count];
    let mut positions = vec![usize::MAX; node_count];
    // Post-order so children are labeled before parents.
    let mut post = Vec::with_capacity(node_count);
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
    for &id in &post {
        match carving.node_children(id) {
            None => {
                let pos = carving
                    .leaf_vertex(id)
                    .ok_or_else(|| Error::validation("carving leaf without a vertex label"))?;
                if pos >= n.size() {
                    return Err(Error::validation(format!(
                        "carving leaf {pos} outside the network"
                    )));
                }
                labels[id] = n.set(pos).clone();
                positions[id] = pos;
            }
            Some((l, r)) => {
                if labels[l].intersection(&labels[r]).is_empty() && n.size() > 1 {
                    return Err(Error::validation(format!(
                        "carving is not contractive: node {id} joins children with disjoint index sets"
                    )));
                }
                children[id] = Some((l, r));
                labels[id] = labels[l].sym_diff(&labels[r]);
            }
        }
    }
    let rank = labels.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut tree = ContractionTree {
        children,
        labels,
        positions,
        root: carving.root(),
        rank,
        height: 0,
    };
    tree.height = tree.depths().into_iter().max().unwrap_or(0);
    Ok(tree)
}

/// Checks the definition: leaves biject onto positions with matching sets,
/// siblings intersect, internal labels are symmetric differences, root is
/// empty. Returns measured (rank, height).
pub fn validate_contraction_tree(
    n: &AbstractNetwork,
    tree: &ContractionTree,
) -> Result<(usize, usize)> {
    let mut violations = Vec::new();
    let mut seen = vec![false; n.size()];
    for id in 0..tree.node_count() {
        match tree.node_children(id) {
            None => {
                let pos = tree.positions[id];
                if pos >= n.size() {
                    violations.push(format!("condition (i): leaf {id} maps outside the network"));
                    continue;
                }
                if seen[pos] {
                    violations.push(format!(
                        "condition (i): network position {pos} covered by two leaves"
                    ));
                }
                seen[pos] = true;
                if tree.label(id) != n.set(pos) {
                    violations.push(format!(
                        "condition (i): leaf {id} labeled {:?} but position {pos} holds {:?}",
                        tree.label(id).as_slice(),
                        n.set(pos).as_slice()
                    ));
                }
            }
            Some((l, r)) => {
                if tree.label(l).intersection(tree.label(r)).is_empty() {
                    violations.push(format!(
                        "condition (ii): children of node {id} share no index"
                    ));
                }
                let expect = tree.label(l).sym_diff(tree.label(r));
                if *tree.label(id) != expect {
                    violations.push(format!(
                        "condition (ii): node {id} labeled {:?}, expected symmetric difference {:?}",
                        tree.label(id).as_slice(),
                        expect.as_slice()
                    ));
                }
            }
        }
    }
    if let Some(pos) = seen.iter().position(|&s| !s) {
        violations.push(format!("condition (i): network position {pos} has no leaf"));
    }
    if !tree.label(tree.root()).is_empty() {
        violations.push("root label is not the empty index set".to_string());
    }
    if !violations.is_empty() {
        return Err(Error::validation(violations.join("; ")));
    }
    let rank = (0..tree.node_count())
        .map(|id| tree.label(id).len())
        .max()
        .unwrap_or(0);
    Ok((rank, tree.depths().into_iter().max().unwrap_or(0)))
}

/// A contraction tree together with the decomposition statistics gathered
/// while building it.
#[derive(Debug, Clone)]
pub struct GoodTree {
    pub tree: ContractionTree,
    pub rank: usize,
    pub height: usize,
    pub carving_width: usize,
    pub td_width: usize,
}

/// Full pipeline: network graph, min-fill tree decomposition, carving,
/// contractification, contraction tree. Rank equals the measured width of
/// the contractive carving.
pub fn build_good_contraction_tree(n: &AbstractNetwork, seed: u64) -> Result<GoodTree> {
    let g = graph_of_network(n)?;
    let td = min_fill_tree_decomposition(&g, seed)?;
    let carving = tree_decomposition_to_carving(&g, &td)?;
    let contractive = contractify(&g, &carving)?;
    let (width, _, is_contractive) = carving_stats(&g, &contractive)?;
    if !is_contractive && n.size() > 1 {
        return Err(Error::invariant("pipeline produced a non-contractive carving"));
    }
    let tree = contraction_tree_from_carving(n, &contractive)?;
    Ok(GoodTree {
        rank: tree.rank(),
        height: tree.height(),
        carving_width: width,
        td_width: td.width,
        tree,
    })
}

/// Versioned structured-text dump. One line per node:
/// `node <id> leaf <position> : i1 i2 ...` or
/// `node <id> internal <left> <right> : i1 i2 ...`.
pub fn print_contraction_tree(tree: &ContractionTree) -> String {
    let mut out = format!("d-ctree v1 {} {}\n", tree.node_count(), tree.root());
    for id in 0..tree.node_count() {
        let indices: Vec<String> = tree.label(id).iter().map(|i| i.to_string()).collect();
        match tree.node_children(id) {
            None => out.push_str(&format!(
                "node {id} leaf {} : {}\n",
                tree.positions[id],
                indices.join(" ")
            )),
            Some((l, r)) => out.push_str(&format!(
                "node {id} internal {l} {r} : {}\n",
                indices.join(" ")
            )),
        }
    }
    out
}

pub fn parse_contraction_tree(text: &str) -> Result<ContractionTree> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::validation("empty contraction tree file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "d-ctree" || h[1] != "v1" {
        return Err(Error::validation(format!("bad tree header: {header:?}")));
    }
    let count: usize = h[2]
        .parse()
        .map_err(|_| Error::validation("bad node count"))?;
    let root: usize = h[3].parse().map_err(|_| Error::validation("bad root id"))?;
    if root >= count {
        return Err(Error::validation("root id out of range"));
    }
    let mut children = vec![None; count];
    let mut labels = vec![IndexSet::empty(); count];
    let mut positions = vec![usize::MAX; count];
    for line in lines {
        let (head, indices) = line
            .split_once(':')
            .ok_or_else(|| Error::validation(format!("bad node line: {line:?}")))?;
        let f: Vec<&str> = head.split_whitespace().collect();
        if f.len() < 3 || f[0] != "node" {
            return Err(Error::validation(format!("bad node line: {line:?}")));
        }
        let id: usize = f[1].parse().map_err(|_| Error::validation("bad node id"))?;
        if id >= count {
            return Err(Error::validation(format!("node id {id} out of range")));
        }
        let mut idx = Vec::new();
        for tok in indices.split_whitespace() {
            idx.push(tok.parse().map_err(|_| Error::validation("bad index"))?);
        }
        labels[id] = IndexSet::new(idx)?;
        match f[2] {
            "leaf" if f.len() == 4 => {
                positions[id] = f[3]
                    .parse()
                    .map_err(|_| Error::validation("bad position"))?;
            }
            "internal" if f.len() == 5 => {
                let l = f[3].parse().map_err(|_| Error::validation("bad child id"))?;
                let r = f[4].parse().map_err(|_| Error::validation("bad child id"))?;
                if l >= count || r >= count {
                    return Err(Error::validation("child id out of range"));
                }
                children[id] = Some((l, r));
            }
            _ => return Err(Error::validation(format!("bad node line: {line:?}"))),
        }
    }
    let rank = labels.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut tree = ContractionTree {
        children,
        labels,
        positions,
        root,
        rank,
        height: 0,
    };
    tree.height = tree.depths().into_iter().max().unwrap_or(0);
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iset(v: &[u32]) -> IndexSet {
        IndexSet::new(v.to_vec()).unwrap()
    }

    /// Three-set network shaped like the smallest interesting example: its
    /// contraction tree below has rank 3.
    fn triangle_network() -> AbstractNetwork {
        AbstractNetwork::new(vec![iset(&[1, 2, 3]), iset(&[1, 4]), iset(&[2, 3, 4])]).unwrap()
    }

    #[test]
    fn validate_accepts_two_singleton_sets() {
        assert!(AbstractNetwork::new(vec![iset(&[1]), iset(&[1])]).is_ok());
    }

    #[test]
    fn validate_accepts_triangle() {
        assert!(AbstractNetwork::new(vec![iset(&[1, 2]), iset(&[2, 3]), iset(&[1, 3])]).is_ok());
    }

    #[test]
    fn validate_reports_count_violation() {
        let err = AbstractNetwork::new(vec![iset(&[1]), iset(&[1]), iset(&[1])]).unwrap_err();
        assert!(err.to_string().contains("index 1 occurs in 3 sets"));
    }

    #[test]
    fn validate_accepts_terminal_and_rejects_empty() {
        assert!(AbstractNetwork::new(vec![IndexSet::empty()]).is_ok());
        assert!(AbstractNetwork::new(vec![]).is_err());
    }

    #[test]
    fn graph_of_triangle_network() {
        let n = triangle_network();
        let g = graph_of_network(&n).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 4);
        // Degree at a position equals the size of its index set.
        for (pos, set) in n.sets().iter().enumerate() {
            assert_eq!(g.degree(pos), set.len());
        }
    }

    #[test]
    fn graph_of_two_set_networks() {
        let n = AbstractNetwork::new(vec![iset(&[1]), iset(&[1])]).unwrap();
        let g = graph_of_network(&n).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));

        let n = AbstractNetwork::new(vec![iset(&[1, 2]), iset(&[1, 2])]).unwrap();
        let g = graph_of_network(&n).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 2));
    }

    #[test]
    fn tree_from_carving_rank_equals_width() {
        let n = triangle_network();
        let g = graph_of_network(&n).unwrap();
        let td = min_fill_tree_decomposition(&g, 0).unwrap();
        let carving = tree_decomposition_to_carving(&g, &td).unwrap();
        let contractive = contractify(&g, &carving).unwrap();
        let tree = contraction_tree_from_carving(&n, &contractive).unwrap();
        validate_contraction_tree(&n, &tree).unwrap();
        assert!(tree.label(tree.root()).is_empty());
        let (w, _, _) = carving_stats(&g, &contractive).unwrap();
        assert_eq!(tree.rank(), w);
    }

    #[test]
    fn tree_from_two_set_network() {
        let n = AbstractNetwork::new(vec![iset(&[1]), iset(&[1])]).unwrap();
        let good = build_good_contraction_tree(&n, 0).unwrap();
        assert_eq!(good.tree.node_count(), 3);
        assert_eq!(good.rank, 1);
        assert!(good.tree.label(good.tree.root()).is_empty());
    }

    #[test]
    fn pipeline_on_terminal_network() {
        let n = AbstractNetwork::new(vec![IndexSet::empty()]).unwrap();
        let good = build_good_contraction_tree(&n, 0).unwrap();
        assert_eq!(good.tree.node_count(), 1);
        assert_eq!(good.rank, 0);
    }

    #[test]
    fn pipeline_on_triangle_network() {
        let n = triangle_network();
        let good = build_good_contraction_tree(&n, 0).unwrap();
        validate_contraction_tree(&n, &good.tree).unwrap();
        assert!(good.rank <= 4, "all index sets have <= 4 elements");
    }

    #[test]
    fn pipeline_on_cycle_network() {
        // Eight sets {i, i+1 mod 8}, indices shifted to be positive.
        let sets: Vec<IndexSet> = (0..8u32).map(|i| iset(&[i + 1, (i + 1) % 8 + 1])).collect();
        let n = AbstractNetwork::new(sets).unwrap();
        let good = build_good_contraction_tree(&n, 0).unwrap();
        validate_contraction_tree(&n, &good.tree).unwrap();
        assert!(good.rank <= 4, "measured rank {} exceeds 4", good.rank);
    }

    #[test]
    fn stats_of_hand_built_tree() {
        // Leaves I1, I2, internal node I1 (+) I2, root empty; rank 3.
        let n = triangle_network();
        let labels = vec![
            n.set(0).clone(),
            n.set(1).clone(),
            n.set(0).sym_diff(n.set(1)),
            n.set(2).clone(),
            IndexSet::empty(),
        ];
        let tree = ContractionTree {
            children: vec![None, None, Some((0, 1)), None, Some((2, 3))],
            labels,
            positions: vec![0, 1, usize::MAX, 2, usize::MAX],
            root: 4,
            rank: 3,
            height: 2,
        };
        let (rank, height) = validate_contraction_tree(&n, &tree).unwrap();
        assert_eq!((rank, height), (3, 2));
    }

    #[test]
    fn validation_rejects_disjoint_siblings() {
        let n = AbstractNetwork::new(vec![iset(&[1]), iset(&[1, 2]), iset(&[2])]).unwrap();
        // Pair positions 0 and 2 (disjoint) first.
        let labels = vec![
            iset(&[1]),
            iset(&[2]),
            iset(&[1, 2]),
            iset(&[1, 2]),
            IndexSet::empty(),
        ];
        let tree = ContractionTree {
            children: vec![None, None, Some((0, 1)), None, Some((2, 3))],
            labels,
            positions: vec![0, 2, usize::MAX, 1, usize::MAX],
            root: 4,
            rank: 2,
            height: 2,
        };
        let err = validate_contraction_tree(&n, &tree).unwrap_err();
        assert!(err.to_string().contains("condition (ii)"), "{err}");
    }

    #[test]
    fn validation_rejects_relabeled_leaf() {
        let n = AbstractNetwork::new(vec![iset(&[1]), iset(&[1])]).unwrap();
        let tree = ContractionTree {
            children: vec![None, None, Some((0, 1))],
            labels: vec![iset(&[1]), iset(&[1, 2]), iset(&[2])],
            positions: vec![0, 1, usize::MAX],
            root: 2,
            rank: 2,
            height: 1,
        };
        let err = validate_contraction_tree(&n, &tree).unwrap_err();
        assert!(err.to_string().contains("condition (i)"), "{err}");
    }

    #[test]
    fn dump_round_trips() {
        let n = triangle_network();
        let good = build_good_contraction_tree(&n, 0).unwrap();
        let text = print_contraction_tree(&good.tree);
        let back = parse_contraction_tree(&text).unwrap();
        assert_eq!(good.tree, back);
    }

    #[test]
    fn label_is_xor_of_leaf_labels_below() {
        let n = triangle_network();
        let good = build_good_contraction_tree(&n, 0).unwrap();
        let tree = &good.tree;
        for id in 0..tree.node_count() {
            let mut acc = IndexSet::empty();
            let mut stack = vec![id];
            while let Some(u) = stack.pop() {
                match tree.node_children(u) {
                    None => acc = acc.sym_diff(tree.label(u)),
                    Some((l, r)) => {
                        stack.push(l);
                        stack.push(r);
                    }
                }
            }
            assert_eq!(&acc, tree.label(id));
        }
    }
}
