//! Undirected simple graphs over 1-based qubit indices.
//!
//! Besides the container itself this module carries the structural helpers the
//! embedding pipeline needs: complements, connected components, the
//! lexicographic pair index used by the distance heads, exact clique search and
//! the two necessary-condition screens for planar registers.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest complete graph that fits a 2D register with the default limits.
pub const MAX_CLIQUE_2D: usize = 7;
/// Largest vertex degree that fits a 2D register with the default limits.
pub const MAX_DEGREE_2D: usize = 18;
/// Size cap for [`max_clique_exact`]; candidate sets are `u128` bitsets.
pub const CLIQUE_SEARCH_CAP: usize = 128;

/// Simple undirected graph with vertices `1..=n`.
///
/// Edges are stored once as `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        Graph::from_edges(file.n, file.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> Self {
        GraphFile {
            n: g.n,
            edges: g.edges.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

impl Graph {
    /// Builds a normalized graph, sorting each pair and dropping duplicates.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for index in [a, b] {
                if index == 0 || index > n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self::from_normalized(n, set))
    }

    fn from_normalized(n: usize, edges: BTreeSet<(usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i - 1].push(j);
            neighbors[j - 1].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Graph { n, edges, neighbors }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_normalized(n, BTreeSet::new())
    }

    pub fn complete(n: usize) -> Self {
        let edges = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
        Self::from_normalized(n, edges)
    }

    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|i| (i, i + 1)).collect();
        Self::from_normalized(n, edges)
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: BTreeSet<_> = (1..n).map(|i| (i, i + 1)).collect();
        if n >= 3 {
            edges.insert((1, n));
        }
        Self::from_normalized(n, edges)
    }

    /// Star with vertex 1 at the center.
    pub fn star(leaves: usize) -> Self {
        let edges = (2..=leaves + 1).map(|j| (1, j)).collect();
        Self::from_normalized(leaves + 1, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v - 1]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v - 1].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        i != j && self.neighbors[i - 1].binary_search(&j).is_ok()
    }

    /// 0/1 adjacency flags in pair-index order (entry `k - 1` for pair index `k`).
    pub fn adjacency_by_pair(&self) -> Vec<bool> {
        let mut flags = Vec::with_capacity(pair_count(self.n));
        for i in 1..=self.n {
            for j in i + 1..=self.n {
                flags.push(self.is_adjacent(i, j));
            }
        }
        flags
    }
}

/// Graph with edge `(i, j)` present iff it is absent in `g`.
pub fn complement(g: &Graph) -> Graph {
    let edges = (1..=g.n)
        .flat_map(|i| (i + 1..=g.n).map(move |j| (i, j)))
        .filter(|&(i, j)| !g.is_adjacent(i, j))
        .collect();
    Graph::from_normalized(g.n, edges)
}

/// A connected component with its local-to-original vertex map.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub graph: Graph,
    /// `vertices[local - 1]` is the original id of local vertex `local`.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComponentDecomposition {
    pub components: Vec<Component>,
    pub isolated: Vec<usize>,
}

/// Splits `g` into connected components with at least one edge; degree-0
/// vertices are reported separately. Components are ordered by their smallest
/// original vertex.
pub fn connected_components(g: &Graph) -> ComponentDecomposition {
    let mut seen = vec![false; g.n];
    let mut out = ComponentDecomposition::default();
    for start in 1..=g.n {
        if seen[start - 1] {
            continue;
        }
        seen[start - 1] = true;
        if g.degree(start) == 0 {
            out.isolated.push(start);
            continue;
        }
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if !seen[w - 1] {
                    seen[w - 1] = true;
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        let mut local = vec![0usize; g.n + 1];
        for (k, &v) in members.iter().enumerate() {
            local[v] = k + 1;
        }
        let edges = g
            .edges()
            .filter(|&(i, _)| local[i] != 0)
            .map(|(i, j)| (local[i], local[j]))
            .collect();
        out.components.push(Component {
            graph: Graph::from_normalized(members.len(), edges),
            vertices: members,
        });
    }
    out
}

/// `C(n, 2)`.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// 1-based rank of `(i, j)` among all pairs `i < j` of `1..=n` in lexicographic
/// order: `(i-1)(n-1) - C(i-1, 2) + j - i`.
pub fn pair_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if i == 0 || i >= j || j > n {
        return Err(Error::InvalidPair { i, j, n });
    }
    Ok(pair_index_unchecked(i, j, n))
}

#[inline]
pub(crate) fn pair_index_unchecked(i: usize, j: usize, n: usize) -> usize {
    (i - 1) * (n - 1) - pair_count(i - 1) + j - i
}

/// Clique number by branch and bound with greedy-coloring bounds.
///
/// Vertices are relabelled in reverse degeneracy order so that the coloring
/// bound is tight early in the search.
pub fn max_clique_exact(g: &Graph) -> Result<usize> {
    if g.n > CLIQUE_SEARCH_CAP {
        return Err(Error::TooLarge {
            n: g.n,
            cap: CLIQUE_SEARCH_CAP,
        });
    }
    if g.n == 0 {
        return Ok(0);
    }
    let order = degeneracy_order(g);
    // position of each original vertex in the search order
    let mut rank = vec![0usize; g.n + 1];
    for (pos, &v) in order.iter().enumerate() {
        rank[v] = pos;
    }
    let mut adj = vec![0u128; g.n];
    for (i, j) in g.edges() {
        adj[rank[i]] |= 1 << rank[j];
        adj[rank[j]] |= 1 << rank[i];
    }
    let all = if g.n == 128 { u128::MAX } else { (1u128 << g.n) - 1 };
    let mut search = CliqueSearch {
        adj,
        best: greedy_clique(g).len(),
    };
    search.expand(all, 0);
    Ok(search.best)
}

struct CliqueSearch {
    adj: Vec<u128>,
    best: usize,
}

impl CliqueSearch {
    fn expand(&mut self, mut candidates: u128, size: usize) {
        let (verts, bounds) = self.color_sort(candidates);
        for k in (0..verts.len()).rev() {
            if size + bounds[k] <= self.best {
                return;
            }
            let v = verts[k];
            let next = candidates & self.adj[v];
            if next == 0 {
                self.best = self.best.max(size + 1);
            } else {
                self.expand(next, size + 1);
            }
            candidates &= !(1u128 << v);
        }
    }

    /// Greedy sequential coloring; returns vertices sorted by color together
    /// with the color number, which bounds the clique size among the prefix.
    fn color_sort(&self, candidates: u128) -> (Vec<usize>, Vec<usize>) {
        let mut verts = Vec::with_capacity(candidates.count_ones() as usize);
        let mut bounds = Vec::with_capacity(verts.capacity());
        let mut uncolored = candidates;
        let mut color = 0;
        while uncolored != 0 {
            color += 1;
            let mut available = uncolored;
            while available != 0 {
                let v = available.trailing_zeros() as usize;
                available &= !(1u128 << v);
                available &= !self.adj[v];
                uncolored &= !(1u128 << v);
                verts.push(v);
                bounds.push(color);
            }
        }
        (verts, bounds)
    }
}

/// Vertices ordered so that high-core vertices come first.
fn degeneracy_order(g: &Graph) -> Vec<usize> {
    let mut degree: Vec<usize> = (1..=g.n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; g.n];
    let mut elimination = Vec::with_capacity(g.n);
    for _ in 0..g.n {
        let v = (0..g.n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("vertices remain");
        removed[v] = true;
        elimination.push(v + 1);
        for &w in g.neighbors(v + 1) {
            if !removed[w - 1] {
                degree[w - 1] -= 1;
            }
        }
    }
    elimination.reverse();
    elimination
}

/// A maximal clique grown greedily from each vertex; the largest one found.
pub fn greedy_clique(g: &Graph) -> Vec<usize> {
    let mut best = Vec::new();
    for start in 1..=g.n {
        let mut clique = vec![start];
        let mut candidates: Vec<usize> = g.neighbors(start).to_vec();
        while !candidates.is_empty() {
            let pick = *candidates
                .iter()
                .max_by_key(|&&c| {
                    let links = candidates.iter().filter(|&&o| g.is_adjacent(c, o)).count();
                    (links, std::cmp::Reverse(c))
                })
                .expect("non-empty");
            clique.push(pick);
            candidates.retain(|&c| c != pick && g.is_adjacent(c, pick));
        }
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best.sort_unstable();
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScreeningWarning {
    MaxCliqueExceeded,
    MaxDegreeExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub max_degree: usize,
    pub clique_number: usize,
    pub violations: Vec<ScreeningWarning>,
}

impl ScreeningReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Necessary conditions for a planar embedding. Passing does not imply that a
/// feasible embedding exists.
pub fn screen_embeddability_2d(g: &Graph) -> Result<ScreeningReport> {
    let clique_number = max_clique_exact(g)?;
    let max_degree = g.max_degree();
    let mut violations = Vec::new();
    if clique_number > MAX_CLIQUE_2D {
        violations.push(ScreeningWarning::MaxCliqueExceeded);
    }
    if max_degree > MAX_DEGREE_2D {
        violations.push(ScreeningWarning::MaxDegreeExceeded);
    }
    Ok(ScreeningReport {
        max_degree,
        clique_number,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                if rng.gen_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    fn brute_force_clique(g: &Graph) -> usize {
        let n = g.n();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            let is_clique = members
                .iter()
                .enumerate()
                .all(|(a, &u)| members[a + 1..].iter().all(|&v| g.is_adjacent(u, v)));
            if is_clique {
                best = best.max(members.len());
            }
        }
        best
    }

    #[test]
    fn normalizes_edges() {
        let g = Graph::from_edges(3, [(1, 2), (3, 2), (2, 1)]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 2), (2, 3)]);
        assert_eq!(Graph::from_edges(2, [(1, 1)]), Err(Error::SelfLoop(1)));
        assert_eq!(
            Graph::from_edges(2, [(1, 3)]),
            Err(Error::IndexOutOfRange { index: 3, n: 2 })
        );
        let e = Graph::from_edges(4, []).unwrap();
        assert_eq!((e.n(), e.edge_count()), (4, 0));
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement(&Graph::complete(3)), Graph::empty(3));
        assert_eq!(complement(&Graph::empty(3)), Graph::complete(3));
        assert_eq!(complement(&Graph::path(3)).edges().collect::<Vec<_>>(), vec![(1, 3)]);
    }

    #[test]
    fn component_examples() {
        let g = Graph::from_edges(5, [(1, 2), (3, 4)]).unwrap();
        let d = connected_components(&g);
        assert_eq!(d.components.len(), 2);
        assert_eq!(d.components[0].vertices, vec![1, 2]);
        assert_eq!(d.components[1].vertices, vec![3, 4]);
        assert!(d.components.iter().all(|c| c.graph == Graph::complete(2)));
        assert_eq!(d.isolated, vec![5]);

        let d = connected_components(&Graph::path(4));
        assert_eq!(d.components.len(), 1);
        assert!(d.isolated.is_empty());

        let d = connected_components(&Graph::empty(3));
        assert!(d.components.is_empty());
        assert_eq!(d.isolated, vec![1, 2, 3]);
    }

    #[test]
    fn pair_index_examples() {
        assert_eq!(pair_index(1, 2, 5), Ok(1));
        assert_eq!(pair_index(4, 5, 5), Ok(10));
        assert_eq!(pair_index(2, 4, 5), Ok(6));
        assert!(pair_index(3, 3, 5).is_err());
        assert!(pair_index(4, 2, 5).is_err());
        assert!(pair_index(0, 2, 5).is_err());
        assert!(pair_index(2, 6, 5).is_err());
    }

    #[test]
    fn pair_index_is_lexicographic_rank() {
        for n in 2..=50 {
            let mut rank = 0;
            for i in 1..=n {
                for j in i + 1..=n {
                    rank += 1;
                    assert_eq!(pair_index(i, j, n).unwrap(), rank);
                }
            }
            assert_eq!(rank, pair_count(n));
        }
    }

    #[test]
    fn clique_examples() {
        assert_eq!(max_clique_exact(&Graph::complete(7)), Ok(7));
        assert_eq!(max_clique_exact(&Graph::path(4)), Ok(2));
        assert_eq!(max_clique_exact(&Graph::empty(3)), Ok(1));
        assert_eq!(max_clique_exact(&Graph::empty(0)), Ok(0));
        assert_eq!(max_clique_exact(&Graph::complete(128)), Ok(128));
        assert!(matches!(
            max_clique_exact(&Graph::empty(129)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn clique_matches_brute_force_on_small_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(1..=8);
            let p = rng.gen_range(0.1..0.9);
            let g = random_graph(n, p, &mut rng);
            let exact = max_clique_exact(&g).unwrap();
            assert_eq!(exact, brute_force_clique(&g), "{g:?}");
            assert!(exact >= greedy_clique(&g).len());
        }
    }

    #[test]
    fn clique_on_denser_random_graphs_dominates_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = random_graph(60, 0.5, &mut rng);
            let exact = max_clique_exact(&g).unwrap();
            let greedy = greedy_clique(&g);
            assert!(exact >= greedy.len());
            for (a, &u) in greedy.iter().enumerate() {
                for &v in &greedy[a + 1..] {
                    assert!(g.is_adjacent(u, v));
                }
            }
        }
    }

    #[test]
    fn screening_examples() {
        let r = screen_embeddability_2d(&Graph::complete(8)).unwrap();
        assert_eq!(r.violations, vec![ScreeningWarning::MaxCliqueExceeded]);
        let r = screen_embeddability_2d(&Graph::star(19)).unwrap();
        assert_eq!(r.violations, vec![ScreeningWarning::MaxDegreeExceeded]);
        assert_eq!(r.max_degree, 19);
        let r = screen_embeddability_2d(&Graph::complete(7)).unwrap();
        assert!(r.passes());
        assert_eq!(r.clique_number, 7);
        assert!(screen_embeddability_2d(&Graph::star(18)).unwrap().passes());
    }

    #[test]
    fn graph_json_uses_one_based_pairs() {
        let g: Graph = serde_json::from_str(r#"{"n": 3, "edges": [[3, 1], [1, 2]]}"#).unwrap();
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"n":3,"edges":[[1,2],[1,3]]}"#);
        assert!(serde_json::from_str::<Graph>(r#"{"n": 2, "edges": [[0, 1]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn complement_is_involutive(n in 0usize..12, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(n, 0.4, &mut rng);
            prop_assert_eq!(complement(&complement(&g)), g);
        }

        #[test]
        fn components_partition_vertices(n in 0usize..20, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_graph(n, 0.15, &mut rng);
            let d = connected_components(&g);
            let mut all: Vec<usize> = d.isolated.clone();
            let mut edges = 0;
            for c in &d.components {
                all.extend(&c.vertices);
                edges += c.graph.edge_count();
                for (i, j) in c.graph.edges() {
                    prop_assert!(g.is_adjacent(c.vertices[i - 1], c.vertices[j - 1]));
                }
            }
            all.sort_unstable();
            prop_assert_eq!(all, (1..=n).collect::<Vec<_>>());
            prop_assert_eq!(edges, g.edge_count());
        }
    }
}
