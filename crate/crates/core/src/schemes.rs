//! Builders for the standard splitting schemes.
//!
//! All builders are generic over [`Scalar`]; over an exact rational type the
//! resulting Gram and defect matrices are exact.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numerics::DenseMatrix;
use crate::scalar::{Real, Scalar};
use crate::scheme::{load_scheme, SplittingScheme};

fn small<T: Scalar>(x: i32) -> T {
    T::from_i32(x).expect("small integer")
}

/// Douglas–Rachford: `M = [-1 1]`, `N = [[0 0], [2 0]]`.
pub fn douglas_rachford<T: Scalar>(gamma: T) -> Result<SplittingScheme<T>> {
    let m = DenseMatrix::from_rows(&[vec![-T::one(), T::one()]])?;
    let n = DenseMatrix::from_rows(&[vec![T::zero(), T::zero()], vec![small(2), T::zero()]])?;
    SplittingScheme::new(m, n, gamma)
}

/// Ryu's three-operator splitting.
pub fn ryu3<T: Scalar>(gamma: T) -> Result<SplittingScheme<T>> {
    let (o, z) = (T::one(), T::zero());
    let m = DenseMatrix::from_rows(&[vec![-o, z, o], vec![z, -o, o]])?;
    let n = DenseMatrix::from_rows(&[vec![z, z, z], vec![o, z, z], vec![o, o, z]])?;
    SplittingScheme::new(m, n, gamma)
}

fn require_operators(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::Construction(format!(
            "{what} needs at least {min} operators, got {n}"
        )));
    }
    Ok(())
}

/// Resolvent splitting with minimal lifting `m = n - 1`: bidiagonal `M`
/// with rows `(-1, 1)`, subdiagonal `N` whose last row couples `x_1` and
/// `x_{n-1}`.
pub fn minimal_lifting<T: Scalar>(n: usize, gamma: T) -> Result<SplittingScheme<T>> {
    require_operators(n, 2, "minimal lifting")?;
    let m = DenseMatrix::from_fn(n - 1, n, |i, j| {
        if j == i {
            -T::one()
        } else if j == i + 1 {
            T::one()
        } else {
            T::zero()
        }
    });
    let mut nm = DenseMatrix::zeros(n, n);
    for i in 1..n - 1 {
        nm.set(i, i - 1, T::one());
    }
    // for n = 2 both entries of the last row land on column 0
    nm.set(n - 1, 0, nm.get(n - 1, 0) + T::one());
    nm.set(n - 1, n - 2, nm.get(n - 1, n - 2) + T::one());
    SplittingScheme::new(m, nm, gamma)
}

/// Extension of Ryu splitting to `n >= 2` operators:
/// `M = sqrt(2/(n-1)) [-I | e]`, `N = 2/(n-1)` times the strictly lower
/// all-ones matrix. Coincides with [`ryu3`] for `n = 3`.
pub fn extended_ryu<T: Scalar>(n: usize, gamma: T) -> Result<SplittingScheme<T>> {
    require_operators(n, 2, "extended Ryu splitting")?;
    let c = small::<T>(2) / T::from_count(n - 1);
    let base = DenseMatrix::from_fn(n - 1, n, |i, j| {
        if j == i {
            -T::one()
        } else if j == n - 1 {
            T::one()
        } else {
            T::zero()
        }
    });
    let nm = DenseMatrix::from_fn(n, n, |i, j| if j < i { c } else { T::zero() });
    SplittingScheme::with_scaled_m(c, base, nm, gamma)
}

/// Common degree of a connected regular graph, or the reason it has none.
pub fn check_regular_connected(graph: &Graph) -> Result<usize> {
    if let Some((u, v)) = graph.irregular_witness() {
        return Err(Error::Regularity {
            u,
            du: graph.degree(u),
            v,
            dv: graph.degree(v),
        });
    }
    if !graph.is_connected() {
        return Err(Error::Connectivity {
            components: graph.component_count(),
        });
    }
    let d = graph.is_regular().unwrap_or(0);
    if d == 0 {
        return Err(Error::Construction(
            "a decentralized scheme needs at least one edge".into(),
        ));
    }
    Ok(d)
}

/// Scheme of a connected `d`-regular graph: `M = sqrt(2/d) B^T` for the
/// canonical orientation and `N = (2/d)` times the strict lower triangle of
/// the adjacency matrix, so the defect vanishes identically.
pub fn regular_graph_scheme<T: Scalar>(graph: &Graph, gamma: T) -> Result<SplittingScheme<T>> {
    regular_graph_scheme_oriented(graph, &vec![false; graph.edge_count()], gamma)
}

/// As [`regular_graph_scheme`] with edge `j` reversed where `flip[j]` is set.
pub fn regular_graph_scheme_oriented<T: Scalar>(
    graph: &Graph,
    flip: &[bool],
    gamma: T,
) -> Result<SplittingScheme<T>> {
    let d = check_regular_connected(graph)?;
    let c = small::<T>(2) / T::from_count(d);
    let base = graph.oriented_incidence_with::<T>(flip)?.transpose();
    let a = graph.adjacency::<T>();
    let n = graph.vertex_count();
    let nm = DenseMatrix::from_fn(n, n, |i, j| if j < i { c * a.get(i, j) } else { T::zero() });
    SplittingScheme::with_scaled_m(c, base, nm, gamma)
}

/// `τ = n / |E|`, which equals `2/d` on a `d`-regular graph.
pub fn tau<T: Scalar>(graph: &Graph) -> T {
    T::from_count(graph.vertex_count()) / T::from_count(graph.edge_count().max(1))
}

/// Named graph or edge-list file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphSpec {
    Complete(usize),
    Cycle(usize),
    Path(usize),
    Petersen,
    Hypercube(u32),
    File(PathBuf),
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Complete(n) => Ok(Graph::complete(*n)),
            GraphSpec::Cycle(n) => Graph::cycle(*n),
            GraphSpec::Path(n) => Ok(Graph::path(*n)),
            GraphSpec::Petersen => Ok(Graph::petersen()),
            GraphSpec::Hypercube(k) => Ok(Graph::hypercube(*k)),
            GraphSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::parse(path.display().to_string(), format!("cannot read: {e}"))
                })?;
                crate::graph::load_edge_list(&text)
            }
        }
    }
}

fn parse_count<N: FromStr>(s: &str, what: &str) -> Result<N> {
    s.parse()
        .map_err(|_| Error::parse(what.to_string(), format!("expected a count, got {s:?}")))
}

impl FromStr for GraphSpec {
    type Err = Error;

    /// `petersen`, `complete:<n>`/`k<n>`, `cycle:<n>`/`c<n>`, `path:<n>`/`p<n>`,
    /// `hypercube:<k>`/`q<k>`, otherwise a file path.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "petersen" {
            return Ok(GraphSpec::Petersen);
        }
        if let Some((kind, arg)) = lower.split_once(':') {
            match kind {
                "complete" => return Ok(GraphSpec::Complete(parse_count(arg, s)?)),
                "cycle" => return Ok(GraphSpec::Cycle(parse_count(arg, s)?)),
                "path" => return Ok(GraphSpec::Path(parse_count(arg, s)?)),
                "hypercube" => return Ok(GraphSpec::Hypercube(parse_count(arg, s)?)),
                _ => {}
            }
        }
        let short = |prefix: char| -> Option<&str> {
            let rest = lower.strip_prefix(prefix)?;
            (!rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit())).then_some(rest)
        };
        if let Some(n) = short('k') {
            return Ok(GraphSpec::Complete(parse_count(n, s)?));
        }
        if let Some(n) = short('c') {
            return Ok(GraphSpec::Cycle(parse_count(n, s)?));
        }
        if let Some(n) = short('p') {
            return Ok(GraphSpec::Path(parse_count(n, s)?));
        }
        if let Some(k) = short('q') {
            return Ok(GraphSpec::Hypercube(parse_count(k, s)?));
        }
        Ok(GraphSpec::File(PathBuf::from(s)))
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Complete(n) => write!(f, "complete:{n}"),
            GraphSpec::Cycle(n) => write!(f, "cycle:{n}"),
            GraphSpec::Path(n) => write!(f, "path:{n}"),
            GraphSpec::Petersen => write!(f, "petersen"),
            GraphSpec::Hypercube(k) => write!(f, "hypercube:{k}"),
            GraphSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Scheme identifier: `dr | ryu3 | minimal:<n> | ryu:<n> | graph:<graph> | file:<path>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeSpec {
    DouglasRachford,
    Ryu3,
    MinimalLifting(usize),
    ExtendedRyu(usize),
    Graph(GraphSpec),
    File(PathBuf),
}

impl SchemeSpec {
    /// Builds the scheme. For `file:` schemes the document's own `gamma`
    /// is kept unless `gamma` is given.
    pub fn build<T: Real>(&self, gamma: Option<T>) -> Result<SplittingScheme<T>> {
        let g = gamma.unwrap_or_else(|| T::from_f64_lossy(crate::scheme::DEFAULT_GAMMA));
        match self {
            SchemeSpec::DouglasRachford => douglas_rachford(g),
            SchemeSpec::Ryu3 => ryu3(g),
            SchemeSpec::MinimalLifting(n) => minimal_lifting(*n, g),
            SchemeSpec::ExtendedRyu(n) => extended_ryu(*n, g),
            SchemeSpec::Graph(spec) => regular_graph_scheme(&spec.build()?, g),
            SchemeSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::parse(path.display().to_string(), format!("cannot read: {e}"))
                })?;
                let scheme = load_scheme::<T>(&text)?;
                match gamma {
                    Some(g) => scheme.with_gamma(g),
                    None => Ok(scheme),
                }
            }
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dr" => return Ok(SchemeSpec::DouglasRachford),
            "ryu3" => return Ok(SchemeSpec::Ryu3),
            _ => {}
        }
        let Some((kind, arg)) = s.split_once(':') else {
            return Err(Error::parse("scheme", format!("unknown scheme {s:?}")));
        };
        match kind {
            "minimal" => Ok(SchemeSpec::MinimalLifting(parse_count(arg, s)?)),
            "ryu" => Ok(SchemeSpec::ExtendedRyu(parse_count(arg, s)?)),
            "graph" => Ok(SchemeSpec::Graph(arg.parse()?)),
            "file" => Ok(SchemeSpec::File(PathBuf::from(arg))),
            _ => Err(Error::parse("scheme", format!("unknown scheme {s:?}"))),
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSpec::DouglasRachford => write!(f, "dr"),
            SchemeSpec::Ryu3 => write!(f, "ryu3"),
            SchemeSpec::MinimalLifting(n) => write!(f, "minimal:{n}"),
            SchemeSpec::ExtendedRyu(n) => write!(f, "ryu:{n}"),
            SchemeSpec::Graph(g) => write!(f, "graph:{g}"),
            SchemeSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn dm(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn douglas_rachford_matrices() {
        let s = douglas_rachford(0.5).unwrap();
        assert_eq!(s.defect(), dm(&[&[-1.0, 1.0], &[1.0, -1.0]]));
        assert_eq!(s.n_sum(), 2.0);
        assert!(s.validate().is_valid());
    }

    #[test]
    fn ryu3_matrices() {
        let s = ryu3(0.5).unwrap();
        assert_eq!(
            s.defect(),
            dm(&[&[-1.0, 1.0, 0.0], &[1.0, -1.0, 0.0], &[0.0, 0.0, 0.0]])
        );
        assert_eq!(s.m_matrix().row_sums(), vec![0.0, 0.0]);
        let r = s.validate();
        assert!(r.is_valid());
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn minimal_lifting_reduces_to_dr() {
        let a = minimal_lifting(2, 0.5).unwrap();
        let b = douglas_rachford(0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn minimal_lifting_defect_pattern() {
        for n in 3..=8 {
            let d = minimal_lifting(n, 0.5f64).unwrap().defect();
            for i in 0..n {
                for j in 0..n {
                    let expected = match (i, j) {
                        (0, 0) => -1.0,
                        (a, b) if a == n - 1 && b == n - 1 => -1.0,
                        (0, b) if b == n - 1 => 1.0,
                        (a, 0) if a == n - 1 => 1.0,
                        _ => 0.0,
                    };
                    assert_eq!(d.get(i, j), expected, "n = {n}, ({i}, {j})");
                }
            }
        }
        for n in 2..=10 {
            assert_eq!(minimal_lifting(n, 0.5f64).unwrap().n_sum(), n as f64);
        }
    }

    #[test]
    fn extended_ryu_matches_ryu3() {
        let a = extended_ryu(3, 0.5f64).unwrap();
        let b = ryu3(0.5f64).unwrap();
        assert!(a.m_matrix().max_abs_diff(&b.m_matrix()).unwrap() <= 1e-15);
        assert!(a.n_matrix().max_abs_diff(b.n_matrix()).unwrap() <= 1e-15);
    }

    #[test]
    fn extended_ryu_defect_closed_form_exact() {
        for n in 2..=12usize {
            let s = extended_ryu(n, Rational64::new(1, 2)).unwrap();
            let c = Rational64::new(2, n as i64 - 1);
            let d = s.defect();
            for i in 0..n {
                for j in 0..n {
                    let expected = if i == n - 1 || j == n - 1 {
                        Rational64::from_integer(0)
                    } else if i == j {
                        c * Rational64::from_integer(2 - n as i64)
                    } else {
                        c
                    };
                    assert_eq!(d.get(i, j), expected, "n = {n}, ({i}, {j})");
                }
            }
        }
        assert!(extended_ryu(2, Rational64::new(1, 2))
            .unwrap()
            .defect()
            .is_zero());
    }

    #[test]
    fn graph_scheme_k3() {
        let s = regular_graph_scheme(&Graph::complete(3), 0.5f64).unwrap();
        assert_eq!(
            *s.n_matrix(),
            dm(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0]])
        );
        assert_eq!(tau::<f64>(&Graph::complete(3)), 1.0);
        assert!(s.defect().is_zero());
        assert!(s.validate().is_valid());
        // same N as ryu3, different M
        let r = ryu3(0.5).unwrap();
        assert_eq!(s.n_matrix(), r.n_matrix());
        assert_ne!(s.m(), r.m());
    }

    #[test]
    fn graph_scheme_c4() {
        let g = Graph::cycle(4).unwrap();
        let s = regular_graph_scheme(&g, 0.5f64).unwrap();
        assert_eq!(s.m(), 4);
        assert_eq!(s.n_sum(), 4.0);
        assert!(s.validate().is_valid());
    }

    #[test]
    fn graph_scheme_errors() {
        match regular_graph_scheme(&Graph::path(3), 0.5f64) {
            Err(Error::Regularity { du, dv, .. }) => assert_ne!(du, dv),
            other => panic!("unexpected {other:?}"),
        }
        let two = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            regular_graph_scheme(&two, 0.5f64),
            Err(Error::Connectivity { components: 2 })
        ));
    }

    #[test]
    fn graph_defect_zero_exactly_in_floats_and_rationals() {
        for g in [
            Graph::complete(3),
            Graph::cycle(4).unwrap(),
            Graph::cycle(6).unwrap(),
            Graph::petersen(),
            Graph::hypercube(3),
            Graph::complete(7),
        ] {
            assert!(regular_graph_scheme(&g, 0.5f64).unwrap().defect().is_zero());
            assert!(regular_graph_scheme(&g, Rational64::new(1, 2))
                .unwrap()
                .defect()
                .is_zero());
        }
    }

    #[test]
    fn builders_reject_too_few_operators() {
        assert!(minimal_lifting(1, 0.5f64).is_err());
        assert!(extended_ryu(1, 0.5f64).is_err());
    }

    #[test]
    fn scheme_ids_parse() {
        assert_eq!(
            "dr".parse::<SchemeSpec>().unwrap(),
            SchemeSpec::DouglasRachford
        );
        assert_eq!("ryu3".parse::<SchemeSpec>().unwrap(), SchemeSpec::Ryu3);
        assert_eq!(
            "minimal:5".parse::<SchemeSpec>().unwrap(),
            SchemeSpec::MinimalLifting(5)
        );
        assert_eq!(
            "ryu:6".parse::<SchemeSpec>().unwrap(),
            SchemeSpec::ExtendedRyu(6)
        );
        assert_eq!(
            "graph:petersen".parse::<SchemeSpec>().unwrap(),
            SchemeSpec::Graph(GraphSpec::Petersen)
        );
        assert_eq!(
            "graph:k3.edges".parse::<SchemeSpec>().unwrap(),
            SchemeSpec::Graph(GraphSpec::File("k3.edges".into()))
        );
        assert_eq!("k3".parse::<GraphSpec>().unwrap(), GraphSpec::Complete(3));
        assert_eq!("c6".parse::<GraphSpec>().unwrap(), GraphSpec::Cycle(6));
        assert_eq!("q3".parse::<GraphSpec>().unwrap(), GraphSpec::Hypercube(3));
        assert!("minimal:x".parse::<SchemeSpec>().is_err());
        assert!("bogus".parse::<SchemeSpec>().is_err());
        for s in [
            "dr",
            "ryu3",
            "minimal:4",
            "ryu:7",
            "graph:petersen",
            "file:a.json",
        ] {
            assert_eq!(s.parse::<SchemeSpec>().unwrap().to_string(), s);
        }
    }
}
