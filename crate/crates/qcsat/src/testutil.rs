//! Brute-force oracles and random instance generators for tests and the
//! acceptance suite. Everything here is deliberately naive and independent
//! of the production code paths it checks.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::graphs::Multigraph;
use crate::network::{AbstractNetwork, IndexSet};
use crate::tensor::Tensor;

/// Exact treewidth by elimination-order DP over vertex subsets (n <= 16).
pub fn brute_treewidth(g: &Multigraph) -> usize {
    let n = g.vertex_count();
    assert!(n <= 16, "subset DP is limited to 16 vertices");
    let mut adj = vec![0usize; n];
    for e in g.edges() {
        adj[e.u] |= 1 << e.v;
        adj[e.v] |= 1 << e.u;
    }
    // Degree of v after eliminating the set s: neighbors reachable through s.
    let q = |s: usize, v: usize| -> usize {
        let mut reach = 1usize << v;
        let mut frontier = 1usize << v;
        while frontier != 0 {
            let mut next = 0usize;
            let mut f = frontier;
            while f != 0 {
                let w = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= adj[w] & s & !reach;
            }
            reach |= next;
            frontier = next;
        }
        let mut boundary = 0usize;
        let mut r = reach;
        while r != 0 {
            let w = r.trailing_zeros() as usize;
            r &= r - 1;
            boundary |= adj[w] & !s & !(1 << v);
        }
        boundary.count_ones() as usize
    };
    let full = 1usize << n;
    let mut f = vec![usize::MAX; full];
    f[0] = 0;
    for s in 1..full {
        let mut best = usize::MAX;
        let mut m = s;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let rest = s & !(1 << v);
            if f[rest] == usize::MAX {
                continue;
            }
            best = best.min(f[rest].max(q(rest, v)));
        }
        f[s] = best;
    }
    f[full - 1]
}

/// Random connected multigraph: a random spanning tree plus extra edges,
/// occasionally parallel.
pub fn random_connected_graph(n: usize, extra_edges: usize, rng: &mut ChaCha8Rng) -> Multigraph {
    let mut edges: Vec<(usize, usize, u32)> = Vec::new();
    let mut label = 1u32;
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, label));
        label += 1;
    }
    for _ in 0..extra_edges {
        if n < 2 {
            break;
        }
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n);
        while v == u {
            v = rng.gen_range(0..n);
        }
        edges.push((u, v, label));
        label += 1;
    }
    Multigraph::new(n, edges).unwrap()
}

/// Uniformly random leaf-labeled binary tree shape over `n` leaves,
/// read back as a carving of `g`.
pub fn random_carving(
    g: &Multigraph,
    rng: &mut ChaCha8Rng,
) -> crate::graphs::RootedCarving {
    // Repeatedly join two random forest roots.
    #[derive(Clone)]
    enum T {
        Leaf(usize),
        Node(Box<T>, Box<T>),
    }
    let n = g.vertex_count();
    let mut forest: Vec<T> = (0..n).map(T::Leaf).collect();
    while forest.len() > 1 {
        let i = rng.gen_range(0..forest.len());
        let a = forest.swap_remove(i);
        let j = rng.gen_range(0..forest.len());
        let b = forest.swap_remove(j);
        forest.push(T::Node(Box::new(a), Box::new(b)));
    }
    // Serialize through the carving text-free constructor: rebuild via
    // tree-decomposition-free path by emitting a nested structure.
    fn build(
        t: &T,
        children: &mut Vec<Option<(usize, usize)>>,
        vertex: &mut Vec<Option<usize>>,
    ) -> usize {
        match t {
            T::Leaf(v) => {
                children.push(None);
                vertex.push(Some(*v));
                children.len() - 1
            }
            T::Node(a, b) => {
                let l = build(a, children, vertex);
                let r = build(b, children, vertex);
                children.push(Some((l, r)));
                vertex.push(None);
                children.len() - 1
            }
        }
    }
    let mut children = Vec::new();
    let mut vertex = Vec::new();
    build(&forest[0], &mut children, &mut vertex);
    crate::graphs::RootedCarving::from_parts(g, children, vertex).unwrap()
}

/// Random valid abstract network: incidence structure of a random
/// connected multigraph.
pub fn random_network(n: usize, extra_edges: usize, rng: &mut ChaCha8Rng) -> AbstractNetwork {
    let g = random_connected_graph(n, extra_edges, rng);
    network_of_graph(&g)
}

/// See [`crate::network::network_of_graph`]; panics on invalid input.
pub fn network_of_graph(g: &Multigraph) -> AbstractNetwork {
    crate::network::network_of_graph(g).unwrap()
}

/// Contracts a whole tensor network by direct summation over every index
/// assignment. Exponential in the index count; oracle use only.
pub fn brute_network_value(network: &AbstractNetwork, tensors: &[Tensor]) -> Complex64 {
    let d = tensors.first().map_or(2, |t| t.d());
    let dd = d * d;
    let mut all_indices: Vec<u32> = Vec::new();
    for set in network.sets() {
        for i in set.iter() {
            if !all_indices.contains(&i) {
                all_indices.push(i);
            }
        }
    }
    all_indices.sort_unstable();
    let total: usize = dd.pow(all_indices.len() as u32);
    let mut acc = Complex64::default();
    for mut assignment in 0..total {
        let mut codes = std::collections::BTreeMap::new();
        for &i in all_indices.iter().rev() {
            codes.insert(i, assignment % dd);
            assignment /= dd;
        }
        let mut term = Complex64::new(1.0, 0.0);
        for (pos, set) in network.sets().iter().enumerate() {
            let local: Vec<usize> = set.iter().map(|i| codes[&i]).collect();
            term *= tensors[pos].entry(&local);
        }
        acc += term;
    }
    acc
}

/// Random tensor with entry moduli at most `bound`.
pub fn random_bounded_tensor(
    d: usize,
    indices: IndexSet,
    bound: f64,
    rng: &mut ChaCha8Rng,
) -> Tensor {
    let len = (d * d).pow(indices.len() as u32);
    let entries = (0..len)
        .map(|_| {
            let r = bound * rng.gen::<f64>().sqrt();
            let a = rng.gen::<f64>() * std::f64::consts::TAU;
            Complex64::from_polar(r, a)
        })
        .collect();
    Tensor::new(d, indices, entries).unwrap()
}
