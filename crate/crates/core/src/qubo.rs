//! QUBO instances for the supported problem families and their adjacency patterns.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_PENALTY: f64 = 2.0;

/// Symmetric QUBO matrix stored as a diagonal plus the upper triangle.
///
/// Off-diagonal keys are 1-based `(i, j)` with `i < j`; zero entries are never
/// stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuboFile", into = "QuboFile")]
pub struct QuboInstance {
    n: usize,
    diag: Vec<f64>,
    offdiag: BTreeMap<(usize, usize), f64>,
    labels: Vec<String>,
    /// Constant dropped from the expansion; it does not affect the adjacency.
    constant: f64,
    /// Native 2D coordinates (meters) for instances built from point sets.
    points: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct QuboFile {
    n: usize,
    diag: Vec<f64>,
    offdiag: Vec<(usize, usize, f64)>,
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "is_zero")]
    constant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[f64; 2]>>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl TryFrom<QuboFile> for QuboInstance {
    type Error = Error;

    fn try_from(file: QuboFile) -> Result<Self> {
        if file.diag.len() != file.n {
            return Err(Error::Parse(format!(
                "diag has {} entries, expected {}",
                file.diag.len(),
                file.n
            )));
        }
        let labels = if file.labels.is_empty() {
            (1..=file.n).map(|i| format!("x_{i}")).collect()
        } else {
            file.labels
        };
        let mut q = QuboInstance::new(file.diag, labels)?;
        for (i, j, value) in file.offdiag {
            q.add_coupling(i, j, value)?;
        }
        q.constant = file.constant;
        if let Some(points) = file.points {
            if points.len() != q.n {
                return Err(Error::Parse("points length differs from n".into()));
            }
            q.points = Some(points);
        }
        Ok(q)
    }
}

impl From<QuboInstance> for QuboFile {
    fn from(q: QuboInstance) -> Self {
        QuboFile {
            n: q.n,
            diag: q.diag,
            offdiag: q.offdiag.into_iter().map(|((i, j), v)| (i, j, v)).collect(),
            labels: q.labels,
            constant: q.constant,
            points: q.points,
        }
    }
}

impl QuboInstance {
    pub fn new(diag: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} variables",
                labels.len(),
                diag.len()
            )));
        }
        Ok(QuboInstance {
            n: diag.len(),
            diag,
            offdiag: BTreeMap::new(),
            labels,
            constant: 0.0,
            points: None,
        })
    }

    /// Adds `value` to the coupling of the unordered pair `{i, j}`.
    pub fn add_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        for index in [i, j] {
            if index == 0 || index > self.n {
                return Err(Error::IndexOutOfRange { index, n: self.n });
            }
        }
        let key = (i.min(j), i.max(j));
        let entry = self.offdiag.entry(key).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            self.offdiag.remove(&key);
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.offdiag
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn points(&self) -> Option<&[[f64; 2]]> {
        self.points.as_deref()
    }

    /// `xᵀQx + constant` for a 0/1 assignment.
    pub fn energy(&self, x: &[bool]) -> f64 {
        let mut e = self.constant;
        for (k, &d) in self.diag.iter().enumerate() {
            if x[k] {
                e += d;
            }
        }
        for (&(i, j), &v) in &self.offdiag {
            if x[i - 1] && x[j - 1] {
                e += v;
            }
        }
        e
    }
}

/// Maximum independent set over a point set: points closer than
/// `conflict_distance` are in conflict.
pub fn mis_qubo_from_points(points: &[[f64; 2]], conflict_distance: f64, penalty: f64) -> Result<QuboInstance> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if !(penalty > 1.0) {
        return Err(Error::InvalidParameter(format!("penalty must exceed 1, got {penalty}")));
    }
    if !(conflict_distance >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "conflict distance must be non-negative, got {conflict_distance}"
        )));
    }
    let n = points.len();
    let labels = (1..=n).map(|i| format!("point_{i}")).collect();
    let mut q = QuboInstance::new(vec![-1.0; n], labels)?;
    for a in 0..n {
        for b in a + 1..n {
            let d = (points[a][0] - points[b][0]).hypot(points[a][1] - points[b][1]);
            if d < conflict_distance {
                q.add_coupling(a + 1, b + 1, penalty)?;
            }
        }
    }
    q.points = Some(points.to_vec());
    Ok(q)
}

/// Seeded stand-in for a set of radio sites: `n` points spread uniformly over
/// discs of radius `spread` around `clusters` centers drawn in an
/// `extent × extent` square. Point `k` belongs to cluster `k % clusters`.
pub fn clustered_sites(n: usize, clusters: usize, extent: f64, spread: f64, seed: u64) -> Result<Vec<[f64; 2]>> {
    if n == 0 || clusters == 0 {
        return Err(Error::EmptyPointSet);
    }
    if !(extent > 0.0 && extent.is_finite()) || !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "extent must be positive and spread non-negative, got {extent} and {spread}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<[f64; 2]> = (0..clusters)
        .map(|_| [rng.gen_range(0.0..extent), rng.gen_range(0.0..extent)])
        .collect();
    Ok((0..n)
        .map(|k| {
            let c = centers[k % clusters];
            let r = spread * rng.gen::<f64>().sqrt();
            let t = rng.gen_range(0.0..TAU);
            [c[0] + r * t.cos(), c[1] + r * t.sin()]
        })
        .collect())
}

/// Smallest conflict distance whose conflict graph reaches maximum degree
/// `target`, placed halfway to the next larger pair distance. `None` when even
/// the complete conflict graph stays below `target`.
pub fn conflict_distance_for_degree(points: &[[f64; 2]], target: usize) -> Option<f64> {
    let n = points.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push(((points[a][0] - points[b][0]).hypot(points[a][1] - points[b][1]), a, b));
        }
    }
    if target == 0 {
        return Some(0.0);
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut degree = vec![0usize; n];
    let mut k = 0;
    while k < pairs.len() {
        let d = pairs[k].0;
        let mut reached = false;
        // pairs at the same distance enter together
        while k < pairs.len() && pairs[k].0 == d {
            let (_, a, b) = pairs[k];
            degree[a] += 1;
            degree[b] += 1;
            reached |= degree[a] >= target || degree[b] >= target;
            k += 1;
        }
        if reached {
            return Some(match pairs.get(k) {
                Some(&(next, _, _)) => (d + next) / 2.0,
                None => d + 1.0,
            });
        }
    }
    None
}

/// Matching variables `δ_ij` of a lattice protein folding model.
///
/// A variable exists for hydrophobic `i < j` with `i + j` odd and `j - i ≥ 3`,
/// i.e. residues that can face each other across the fold at
/// `f = (i + j - 1) / 2`. Matching `ij` conflicts with `kh` when `ij` straddles
/// the fold of `kh` at a different fold position.
pub fn protein_folding_qubo(chain_length: usize, hydrophobic: &[usize], penalty: f64) -> Result<QuboInstance> {
    if !(penalty > 1.0) {
        return Err(Error::InvalidParameter(format!("penalty must exceed 1, got {penalty}")));
    }
    let mut positions = hydrophobic.to_vec();
    positions.sort_unstable();
    positions.dedup();
    if let Some(&bad) = positions.iter().find(|&&p| p == 0 || p > chain_length) {
        return Err(Error::BadPositions(format!(
            "position {bad} outside 1..={chain_length}"
        )));
    }
    let mut vars = Vec::new();
    for (a, &i) in positions.iter().enumerate() {
        for &j in &positions[a + 1..] {
            if (i + j) % 2 == 1 && j - i >= 3 {
                vars.push((i, j));
            }
        }
    }
    let labels = vars.iter().map(|(i, j)| format!("δ_{{{i},{j}}}")).collect();
    let mut q = QuboInstance::new(vec![-1.0; vars.len()], labels)?;
    for (a, &(i, j)) in vars.iter().enumerate() {
        // twice the fold position of ij, to stay in integers
        let own_fold2 = i + j - 1;
        for (b, &(k, h)) in vars.iter().enumerate() {
            if a == b {
                continue;
            }
            let fold2 = k + h - 1;
            let f = fold2 / 2;
            if i <= f && f < j && fold2 != own_fold2 {
                q.add_coupling(a + 1, b + 1, penalty)?;
            }
        }
    }
    Ok(q)
}

/// Variable index of `x_{v,color}` (both 1-based) in a coloring instance.
pub fn coloring_variable(v: usize, color: usize, colors: usize) -> usize {
    (v - 1) * colors + color
}

/// One-hot graph coloring: `A·Σ_v (1 − Σ_c x_vc)² + B·Σ_{uv∈E} Σ_c x_uc·x_vc`.
pub fn graph_coloring_qubo(g: &Graph, colors: usize, onehot_weight: f64, edge_weight: f64) -> Result<QuboInstance> {
    if colors == 0 {
        return Err(Error::BadColors);
    }
    if !(onehot_weight > 0.0 && edge_weight > 0.0) {
        return Err(Error::InvalidParameter("coloring weights must be positive".into()));
    }
    let n = g.n() * colors;
    let labels = (1..=g.n())
        .flat_map(|v| (1..=colors).map(move |c| format!("x_{{{v},{c}}}")))
        .collect();
    let mut q = QuboInstance::new(vec![-onehot_weight; n], labels)?;
    for v in 1..=g.n() {
        for c1 in 1..=colors {
            for c2 in c1 + 1..=colors {
                q.add_coupling(
                    coloring_variable(v, c1, colors),
                    coloring_variable(v, c2, colors),
                    2.0 * onehot_weight,
                )?;
            }
        }
    }
    for (u, v) in g.edges() {
        for c in 1..=colors {
            q.add_coupling(
                coloring_variable(u, c, colors),
                coloring_variable(v, c, colors),
                edge_weight,
            )?;
        }
    }
    q.constant = onehot_weight * g.n() as f64;
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub diagonal_constant: bool,
    pub offdiagonal_sign_constant: bool,
    pub compatible: bool,
}

/// Checks that the global drive can realize the diagonal (one shared value)
/// and that all couplings share a sign, as distance-based interactions do.
pub fn validate_hamiltonian_compatibility(q: &QuboInstance) -> CompatibilityReport {
    let diagonal_constant = match q.diag.first() {
        None => true,
        Some(&first) => q
            .diag
            .iter()
            .all(|&d| (d - first).abs() <= 1e-9 * d.abs().max(first.abs())),
    };
    let offdiagonal_sign_constant = q.offdiag.values().all(|&v| v > 0.0) || q.offdiag.values().all(|&v| v < 0.0);
    CompatibilityReport {
        diagonal_constant,
        offdiagonal_sign_constant,
        compatible: diagonal_constant && offdiagonal_sign_constant,
    }
}

/// Edge `(i, j)` iff the coupling between `i` and `j` is nonzero.
pub fn adjacency_of(q: &QuboInstance) -> Graph {
    Graph::from_edges(q.n, q.offdiag.keys().copied()).expect("stored couplings are normalized and in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::max_clique_exact;
    use proptest::prelude::*;

    fn qubo(diag: Vec<f64>, couplings: &[(usize, usize, f64)]) -> QuboInstance {
        let labels = (1..=diag.len()).map(|i| i.to_string()).collect();
        let mut q = QuboInstance::new(diag, labels).unwrap();
        for &(i, j, v) in couplings {
            q.add_coupling(i, j, v).unwrap();
        }
        q
    }

    #[test]
    fn mis_examples() {
        let pts = [[0.0, 0.0], [100.0, 0.0], [200.0, 0.0]];
        let q = mis_qubo_from_points(&pts, 130.0, 2.0).unwrap();
        assert_eq!(q.diag(), &[-1.0, -1.0, -1.0]);
        assert_eq!(q.offdiag().keys().copied().collect::<Vec<_>>(), vec![(1, 2), (2, 3)]);
        assert_eq!(adjacency_of(&q), Graph::path(3));

        let q = mis_qubo_from_points(&[[0.0, 0.0], [500.0, 0.0]], 130.0, 2.0).unwrap();
        assert!(q.offdiag().is_empty());
        let q = mis_qubo_from_points(&[[0.0, 0.0], [0.0, 0.0]], 0.0, 2.0).unwrap();
        assert!(q.offdiag().is_empty());
        // strictly nearer than the conflict distance
        let q = mis_qubo_from_points(&[[0.0, 0.0], [130.0, 0.0]], 130.0, 2.0).unwrap();
        assert!(q.offdiag().is_empty());

        assert_eq!(mis_qubo_from_points(&[], 130.0, 2.0), Err(Error::EmptyPointSet));
        assert!(mis_qubo_from_points(&pts, 130.0, 1.0).is_err());
    }

    #[test]
    fn protein_variables_for_12_6() {
        let q = protein_folding_qubo(12, &[1, 2, 3, 5, 11, 12], 2.0).unwrap();
        assert_eq!(q.labels(), &["δ_{1,12}", "δ_{2,5}", "δ_{2,11}", "δ_{3,12}", "δ_{5,12}"]);
        let g = adjacency_of(&q);
        assert_eq!(g.max_degree(), 4);
        assert_eq!(max_clique_exact(&g), Ok(3));
    }

    #[test]
    fn protein_variable_counts() {
        let cases: [(usize, &[usize], usize); 3] = [
            (12, &[1, 2, 3, 5, 11, 12], 5),
            (17, &[1, 2, 5, 6, 10, 12, 17], 10),
            (22, &[1, 3, 5, 6, 9, 10, 11, 17], 9),
        ];
        for (len, h, count) in cases {
            assert_eq!(protein_folding_qubo(len, h, 2.0).unwrap().n(), count);
        }
        assert!(matches!(
            protein_folding_qubo(10, &[1, 11], 2.0),
            Err(Error::BadPositions(_))
        ));
        assert!(protein_folding_qubo(10, &[0, 3], 2.0).is_err());
    }

    #[test]
    fn protein_17_7_adjacency() {
        let g = adjacency_of(&protein_folding_qubo(17, &[1, 2, 5, 6, 10, 12, 17], 2.0).unwrap());
        assert_eq!(g.max_degree(), 9);
    }

    #[test]
    fn protein_conflict_by_hand() {
        // δ_{1,12} folds at 6; δ_{2,5} folds at 3 and 1 ≤ 3 < 12, 3 ≠ 6
        let q = protein_folding_qubo(12, &[1, 2, 3, 5, 11, 12], 2.0).unwrap();
        assert!(q.offdiag().contains_key(&(1, 2)));
        // δ_{1,12} and δ_{2,11} share the fold at 6: compatible
        assert!(!q.offdiag().contains_key(&(1, 3)));
    }

    #[test]
    fn coloring_examples() {
        let q = graph_coloring_qubo(&Graph::complete(3), 3, 1.0, 1.0).unwrap();
        assert_eq!(q.n(), 9);
        let g = adjacency_of(&q);
        for v in 1..=3 {
            for c1 in 1..=3 {
                for c2 in c1 + 1..=3 {
                    assert!(g.is_adjacent(coloring_variable(v, c1, 3), coloring_variable(v, c2, 3)));
                }
            }
        }
        assert_eq!(q.constant(), 3.0);
        assert_eq!(graph_coloring_qubo(&Graph::path(2), 0, 1.0, 1.0), Err(Error::BadColors));
    }

    #[test]
    fn coloring_energy_counts_violations() {
        let g = Graph::path(3);
        let q = graph_coloring_qubo(&g, 2, 1.0, 1.0).unwrap();
        let mut x = vec![false; 6];
        // proper coloring 1,2,1
        for (v, c) in [(1, 1), (2, 2), (3, 1)] {
            x[coloring_variable(v, c, 2) - 1] = true;
        }
        assert_eq!(q.energy(&x), 0.0);
        // 1,1,1 violates two edges
        let mut y = vec![false; 6];
        for v in 1..=3 {
            y[coloring_variable(v, 1, 2) - 1] = true;
        }
        assert_eq!(q.energy(&y), 2.0);
    }

    #[test]
    fn compatibility_examples() {
        let r = validate_hamiltonian_compatibility(&qubo(vec![-1.0, -1.0], &[(1, 2, 2.0)]));
        assert!(r.compatible);
        let r = validate_hamiltonian_compatibility(&qubo(vec![-1.0, -2.0], &[]));
        assert!(!r.diagonal_constant && !r.compatible);
        let r = validate_hamiltonian_compatibility(&qubo(vec![-1.0; 3], &[(1, 2, 1.0), (2, 3, -1.0)]));
        assert!(!r.offdiagonal_sign_constant && !r.compatible);
    }

    #[test]
    fn couplings_accumulate_and_vanish() {
        let q = qubo(vec![0.0; 3], &[(1, 2, 1.0), (2, 1, 1.0), (2, 3, 1.0), (3, 2, -1.0)]);
        assert_eq!(q.offdiag().get(&(1, 2)), Some(&2.0));
        assert!(!q.offdiag().contains_key(&(2, 3)));
        assert!(adjacency_of(&qubo(vec![-1.0; 4], &[])).edge_count() == 0);
    }

    #[test]
    fn qubo_json_round_trip() {
        let q = protein_folding_qubo(12, &[1, 2, 3, 5, 11, 12], 2.0).unwrap();
        let text = serde_json::to_string(&q).unwrap();
        assert!(text.starts_with(r#"{"n":5,"diag":[-1.0,-1.0,-1.0,-1.0,-1.0],"offdiag":[[1,2,"#));
        let back: QuboInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);
    }

    proptest! {
        #[test]
        fn generators_are_compatible(
            pts in prop::collection::vec((0.0f64..1000.0, 0.0f64..1000.0), 1..30),
            dc in 0.0f64..400.0,
            len in 4usize..25,
            mask in any::<u32>(),
            colors in 1usize..4,
        ) {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            prop_assert!(validate_hamiltonian_compatibility(&mis_qubo_from_points(&pts, dc, 2.0).unwrap()).compatible);
            let h: Vec<usize> = (1..=len).filter(|p| mask >> (p - 1) & 1 == 1).collect();
            prop_assert!(validate_hamiltonian_compatibility(&protein_folding_qubo(len, &h, 3.0).unwrap()).compatible);
            let g = adjacency_of(&mis_qubo_from_points(&pts, dc, 2.0).unwrap());
            let c = graph_coloring_qubo(&g, colors, 1.5, 2.5).unwrap();
            prop_assert!(validate_hamiltonian_compatibility(&c).compatible);
            let cg = adjacency_of(&c);
            for v in 1..=g.n() {
                for col in 1..=colors {
                    prop_assert_eq!(cg.degree(coloring_variable(v, col, colors)), colors - 1 + g.degree(v));
                }
            }
            if colors >= 2 {
                prop_assert!(max_clique_exact(&cg).unwrap() >= colors);
            }
        }

        #[test]
        fn mis_adjacency_is_rigid_invariant(
            pts in prop::collection::vec((0.0f64..1000.0, 0.0f64..1000.0), 1..25),
            angle in 0.0f64..std::f64::consts::TAU,
            shift in (-1e3f64..1e3, -1e3f64..1e3),
        ) {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            let (s, c) = angle.sin_cos();
            let moved: Vec<[f64; 2]> = pts.iter()
                .map(|p| [c * p[0] - s * p[1] + shift.0, s * p[0] + c * p[1] + shift.1])
                .collect();
            // stay away from the threshold where rounding could flip a pair
            let dc = 137.3;
            let near_threshold = pts.iter().enumerate().any(|(a, p)| pts[a + 1..].iter()
                .any(|q| ((p[0] - q[0]).hypot(p[1] - q[1]) - dc).abs() < 1e-6));
            prop_assume!(!near_threshold);
            let g1 = adjacency_of(&mis_qubo_from_points(&pts, dc, 2.0).unwrap());
            let g2 = adjacency_of(&mis_qubo_from_points(&moved, dc, 2.0).unwrap());
            prop_assert_eq!(g1, g2);
        }
    }

    #[test]
    fn clustered_sites_are_seeded_and_stay_near_their_centers() {
        let a = clustered_sites(30, 4, 1000.0, 50.0, 9).unwrap();
        assert_eq!(a, clustered_sites(30, 4, 1000.0, 50.0, 9).unwrap());
        assert_ne!(a, clustered_sites(30, 4, 1000.0, 50.0, 10).unwrap());
        // members of one cluster are within a disc diameter of each other
        for k in 0..30 {
            for m in (k % 4..30).step_by(4) {
                let d = (a[k][0] - a[m][0]).hypot(a[k][1] - a[m][1]);
                assert!(d <= 100.0 + 1e-9);
            }
        }
        assert!(clustered_sites(0, 4, 1000.0, 50.0, 9).is_err());
        assert!(clustered_sites(5, 4, 0.0, 50.0, 9).is_err());
    }

    #[test]
    fn conflict_distance_is_the_smallest_reaching_the_degree() {
        let pts = clustered_sites(25, 3, 500.0, 80.0, 3).unwrap();
        let max_deg = |dc: f64| adjacency_of(&mis_qubo_from_points(&pts, dc, 2.0).unwrap()).max_degree();
        let mut dists: Vec<f64> = Vec::new();
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                dists.push((pts[a][0] - pts[b][0]).hypot(pts[a][1] - pts[b][1]));
            }
        }
        dists.sort_by(f64::total_cmp);
        for target in [1, 4, 7, 12] {
            let dc = conflict_distance_for_degree(&pts, target).unwrap();
            assert!(max_deg(dc) >= target);
            // no pair distance strictly below the cutoff gives enough degree
            // when used as a (strict) cutoff just above it
            let smaller = dists.iter().rfind(|&&d| d < dc).copied().unwrap_or(0.0);
            assert!(max_deg(smaller) < target, "target {target}");
        }
        assert_eq!(conflict_distance_for_degree(&pts, 25), None);
        assert_eq!(conflict_distance_for_degree(&pts, 24).map(max_deg), Some(24));
    }
}
