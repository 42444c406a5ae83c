//! Undirected simple graphs with the adjacency, degree, Laplacian and
//! oriented incidence views used by the decentralized scheme.
//!
//! Edges are stored as `(u, v)` with `u < v`, sorted lexicographically. The
//! canonical orientation runs from the lower to the higher endpoint.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Normalizes each edge to `u < v` and sorts. Self-loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Construction(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Construction(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::Construction(format!("duplicate edge {e:?}")));
            }
        }
        Ok(Self::from_sorted(n, set.into_iter().collect()))
    }

    fn from_sorted(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &edges {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        Self {
            n,
            edges,
            neighbors,
        }
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::from_sorted(n, edges)
    }

    /// Cycle `C_n`, `n >= 3`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Construction(format!(
                "cycle needs at least 3 vertices, got {n}"
            )));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Path `P_n`.
    pub fn path(n: usize) -> Self {
        Self::from_sorted(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    /// Petersen graph: outer 5-cycle 0..5, inner pentagram 5..10, spokes.
    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        Self::new(10, outer.chain(inner).chain(spokes)).expect("Petersen graph is simple")
    }

    /// Hypercube `Q_k` on `2^k` vertices.
    pub fn hypercube(k: u32) -> Self {
        let n = 1usize << k;
        let edges = (0..n)
            .flat_map(|u| (0..k).map(move |b| (u, u ^ (1 << b))))
            .filter(|&(u, v)| u < v);
        Self::new(n, edges).expect("hypercube is simple")
    }

    /// Disjoint union of `self` and `other`, relabelling `other` after `self`.
    pub fn disjoint_union(&self, other: &Graph) -> Self {
        let shift = self.n;
        Self::new(
            self.n + other.n,
            self.edges
                .iter()
                .copied()
                .chain(other.edges.iter().map(|&(u, v)| (u + shift, v + shift))),
        )
        .expect("union of simple graphs is simple")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order, each with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbours of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.neighbors[u].binary_search(&v).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn adjacency<T: Scalar>(&self) -> DenseMatrix<T> {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a.set(u, v, T::one());
            a.set(v, u, T::one());
        }
        a
    }

    pub fn degree_matrix<T: Scalar>(&self) -> DenseMatrix<T> {
        let d: Vec<T> = self.degrees().into_iter().map(T::from_count).collect();
        DenseMatrix::diagonal(&d)
    }

    /// `L = D - A`.
    pub fn laplacian<T: Scalar>(&self) -> DenseMatrix<T> {
        self.degree_matrix()
            .sub(&self.adjacency())
            .expect("same shape")
    }

    /// Vertex-by-edge incidence matrix of the canonical orientation: edge
    /// `(u, v)` leaves `u` (entry −1) and enters `v` (entry +1).
    pub fn oriented_incidence<T: Scalar>(&self) -> DenseMatrix<T> {
        self.oriented_incidence_with(&vec![false; self.edges.len()])
            .expect("length matches")
    }

    /// Incidence matrix where edge `j` is reversed when `flip[j]` is set.
    pub fn oriented_incidence_with<T: Scalar>(&self, flip: &[bool]) -> Result<DenseMatrix<T>> {
        if flip.len() != self.edges.len() {
            return Err(Error::Shape(format!(
                "{} orientation flags for {} edges",
                flip.len(),
                self.edges.len()
            )));
        }
        let mut b = DenseMatrix::zeros(self.n, self.edges.len());
        for (j, (&(u, v), &f)) in self.edges.iter().zip(flip).enumerate() {
            let (tail, head) = if f { (v, u) } else { (u, v) };
            b.set(tail, j, -T::one());
            b.set(head, j, T::one());
        }
        Ok(b)
    }

    /// Common degree when every vertex has the same degree.
    pub fn is_regular(&self) -> Option<usize> {
        let d = self.neighbors.first()?.len();
        self.neighbors.iter().all(|nb| nb.len() == d).then_some(d)
    }

    /// Two vertices with differing degrees, when the graph is not regular.
    pub fn irregular_witness(&self) -> Option<(usize, usize)> {
        let d0 = self.neighbors.first()?.len();
        (1..self.n).find(|&v| self.degree(v) != d0).map(|v| (0, v))
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.neighbors[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.component_count() == 1
    }

    /// Text form accepted by [`load_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }
}

/// Parses an edge list: one `u v` pair per line, `#` comments, blank lines,
/// and an optional `n <count>` header fixing the vertex count.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let loc = || format!("line {lineno}");
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::parse(
                loc(),
                format!("expected two fields, got {:?}", content),
            ));
        }
        if tokens[0] == "n" {
            if header.is_some() {
                return Err(Error::parse(loc(), "repeated vertex-count header"));
            }
            let count = tokens[1]
                .parse::<usize>()
                .map_err(|e| Error::parse(loc(), format!("bad vertex count: {e}")))?;
            header = Some((count, lineno));
            continue;
        }
        let parse = |t: &str| {
            t.parse::<usize>()
                .map_err(|e| Error::parse(loc(), format!("bad vertex index {t:?}: {e}")))
        };
        let (u, v) = (parse(tokens[0])?, parse(tokens[1])?);
        if u == v {
            return Err(Error::parse(loc(), format!("self-loop at vertex {u}")));
        }
        raw.push((u.min(v), u.max(v), lineno));
    }
    let max_index = raw.iter().map(|&(_, v, _)| v + 1).max().unwrap_or(0);
    let n = match header {
        Some((count, lineno)) if count < max_index => {
            return Err(Error::parse(
                format!("line {lineno}"),
                format!("vertex count {count} is smaller than the largest index + 1 = {max_index}"),
            ))
        }
        Some((count, _)) => count,
        None => max_index,
    };
    let mut seen = BTreeSet::new();
    for &(u, v, lineno) in &raw {
        if !seen.insert((u, v)) {
            return Err(Error::parse(
                format!("line {lineno}"),
                format!("duplicate edge ({u}, {v})"),
            ));
        }
    }
    Ok(Graph::from_sorted(n, seen.into_iter().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{numerical_rank, DEFAULT_RANK_TOL};
    use proptest::prelude::*;

    fn dm(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(
            Graph::complete(3).laplacian::<f64>(),
            dm(&[&[2.0, -1.0, -1.0], &[-1.0, 2.0, -1.0], &[-1.0, -1.0, 2.0]])
        );
        assert_eq!(
            Graph::complete(2).laplacian::<f64>(),
            dm(&[&[1.0, -1.0], &[-1.0, 1.0]])
        );
        let c4 = Graph::cycle(4).unwrap();
        assert!(c4.laplacian::<f64>().row_sums().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn incidence_sign_convention() {
        let g = Graph::complete(2);
        assert_eq!(g.oriented_incidence::<f64>(), dm(&[&[-1.0], &[1.0]]));
        let p = Graph::petersen();
        let b = p.oriented_incidence::<i64>();
        for j in 0..b.cols() {
            assert_eq!((0..b.rows()).map(|i| b.get(i, j)).sum::<i64>(), 0);
        }
        assert_eq!(b.matmul(&b.transpose()).unwrap(), p.laplacian::<i64>());
    }

    #[test]
    fn regularity_and_connectivity() {
        let p = Graph::petersen();
        assert_eq!(p.vertex_count(), 10);
        assert_eq!(p.edge_count(), 15);
        assert_eq!(p.is_regular(), Some(3));
        assert!(p.is_connected());

        let p3 = Graph::path(3);
        assert_eq!(p3.is_regular(), None);
        assert_eq!(p3.irregular_witness(), Some((0, 1)));

        let two = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(two.is_regular(), Some(1));
        assert!(!two.is_connected());
        assert_eq!(two.component_count(), 2);

        assert_eq!(Graph::hypercube(3).is_regular(), Some(3));
        assert_eq!(Graph::hypercube(3).edge_count(), 12);
        assert_eq!(Graph::cycle(6).unwrap().is_regular(), Some(2));
    }

    #[test]
    fn edge_list_examples() {
        let k3 = load_edge_list("0 1\n1 2\n0 2").unwrap();
        assert_eq!(k3, Graph::complete(3));

        let crlf = load_edge_list("# triangle\r\n0 1\r\n\r\n2 1 # reversed\r\n0 2\r\n").unwrap();
        assert_eq!(crlf, Graph::complete(3));

        match load_edge_list("0 0") {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 1"),
            other => panic!("unexpected {other:?}"),
        }

        let g = load_edge_list("n 4\n0 1").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (4, 1));

        match load_edge_list("0 1\n1 2\n1 0\n") {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 3"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(load_edge_list("0 1\n1 x\n").is_err());
        assert!(load_edge_list("0 1 2\n").is_err());
        assert!(load_edge_list("n 2\n0 5\n").is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let p = Graph::petersen();
        assert_eq!(load_edge_list(&p.to_edge_list()).unwrap(), p);
    }

    fn random_graph() -> impl Strategy<Value = Graph> {
        (2usize..12).prop_flat_map(|n| {
            prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |mask| {
                let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
                Graph::new(n, pairs.zip(mask).filter(|(_, k)| *k).map(|(e, _)| e)).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn laplacian_identities(g in random_graph(), flips in prop::collection::vec(any::<bool>(), 66)) {
            let l = g.laplacian::<i64>();
            let b = g.oriented_incidence::<i64>();
            prop_assert_eq!(&b.matmul(&b.transpose()).unwrap(), &l);
            let bf = g.oriented_incidence_with::<i64>(&flips[..g.edge_count()]).unwrap();
            prop_assert_eq!(&bf.matmul(&bf.transpose()).unwrap(), &l);
            prop_assert!(l.row_sums().iter().all(|&s| s == 0));
            prop_assert!(l.is_symmetric_exact());
            let rank = numerical_rank(&g.laplacian::<f64>(), DEFAULT_RANK_TOL).unwrap();
            prop_assert_eq!(rank, g.vertex_count() - g.component_count());
        }
    }
}
