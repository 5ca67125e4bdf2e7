//! Graphs and graph shift operators.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Edge weighting used by the k-NN builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum WeightScheme {
    Binary,
    /// `exp(-d^2 / theta^2)`; `theta = None` uses the mean pairwise distance.
    Gaussian { theta: Option<f64> },
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme::Gaussian { theta: None }
    }
}

/// Weighted graph on `n` nodes backed by a dense adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    weights: DMatrix<f64>,
    coords: Option<Vec<Vec<f64>>>,
    symmetric: bool,
}

impl Graph {
    /// Wraps an adjacency matrix after checking it is square, finite and
    /// has a zero diagonal.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 || weights.ncols() != n {
            return Err(invalid("adjacency must be a non-empty square matrix"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("adjacency has non-finite weights"));
        }
        if (0..n).any(|i| weights[(i, i)] != 0.0) {
            return Err(invalid("adjacency diagonal must be zero"));
        }
        let symmetric = weights == weights.transpose();
        Ok(Graph { weights, coords: None, symmetric })
    }

    pub fn with_coords(mut self, coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.len() != self.n() {
            return Err(invalid("coordinate count does not match node count"));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Row sums of `W`.
    pub fn degrees(&self) -> Vec<f64> {
        self.weights.row_iter().map(|r| r.sum()).collect()
    }

    /// Weak connectivity by breadth-first search over nonzero weights.
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !seen[v] && (self.weights[(u, v)] != 0.0 || self.weights[(v, u)] != 0.0) {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn mean_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += dist(&points[i], &points[j]);
        }
    }
    total / (n * (n - 1) / 2) as f64
}

/// Indices of the `k` nearest neighbors of `i`, ties toward lower index.
pub fn nearest_neighbors(points: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut cand: Vec<(f64, usize)> = (0..points.len())
        .filter(|&j| j != i)
        .map(|j| (dist(&points[i], &points[j]), j))
        .collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    cand.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Connects every point to its `k` nearest Euclidean neighbors.
pub fn build_knn_graph(
    points: &[Vec<f64>],
    k: usize,
    symmetrize: bool,
    scheme: WeightScheme,
) -> Result<Graph> {
    let n = points.len();
    if n == 0 {
        return Err(invalid("point set is empty"));
    }
    if k == 0 || k >= n {
        return Err(invalid(format!("k = {k} must satisfy 0 < k < n = {n}")));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(invalid("points must share a dimension and be finite"));
    }
    let theta = match scheme {
        WeightScheme::Binary => None,
        WeightScheme::Gaussian { theta: Some(t) } if t > 0.0 => Some(t),
        WeightScheme::Gaussian { theta: Some(t) } => {
            return Err(invalid(format!("gaussian theta must be positive, got {t}")))
        }
        WeightScheme::Gaussian { theta: None } => Some(mean_pairwise_distance(points)),
    };
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in nearest_neighbors(points, i, k) {
            w[(i, j)] = match theta {
                None => 1.0,
                Some(t) if t == 0.0 => 1.0,
                Some(t) => {
                    let d = dist(&points[i], &points[j]);
                    (-(d * d) / (t * t)).exp()
                }
            };
        }
    }
    if symmetrize {
        w = w.zip_map(&w.transpose(), f64::max);
    }
    Graph::from_weights(w)?.with_coords(points.to_vec())
}

/// Unweighted ring on `n >= 3` nodes.
pub fn build_cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(invalid(format!("cycle graph needs n >= 3, got {n}")));
    }
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        w[(i, j)] = 1.0;
        w[(j, i)] = 1.0;
    }
    Graph::from_weights(w)
}

/// Uniform points in the unit square joined by a symmetrized gaussian 4-NN
/// graph. Disconnected draws are retried with `seed + 1`, `seed + 2`, ...
pub fn build_random_sensor_graph(n: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(invalid(format!("sensor graph needs n >= 2, got {n}")));
    }
    let k = 4.min(n - 1);
    for attempt in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let g = build_knn_graph(&points, k, true, WeightScheme::default())?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ConstructionFailed(format!(
        "no connected sensor graph with n = {n} after 100 seeds starting at {seed}"
    )))
}

/// Symmetric graph with each edge present with probability `density` and
/// uniform weights in (0, 1]. A ring is added so the graph is connected.
pub fn build_random_weighted_graph(n: usize, density: f64, seed: u64) -> Result<Graph> {
    if n < 3 {
        return Err(invalid(format!("random graph needs n >= 3, got {n}")));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(invalid("density must be in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) || rng.random::<f64>() < density {
                let v = 1.0 - rng.random::<f64>();
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    Graph::from_weights(w)
}

/// Row-major `(x, y) = (col, row)` coordinates of an `h x w` pixel grid.
pub fn pixel_coords(h: usize, w: usize) -> Vec<Vec<f64>> {
    (0..h)
        .flat_map(|r| (0..w).map(move |c| vec![c as f64, r as f64]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftKind {
    /// `W` as stored.
    Adjacency,
    /// Alias of `Adjacency`, kept so descriptors can say which was meant.
    WeightedAdjacency,
    /// `D - W`.
    Laplacian,
    /// `I - D^{-1/2} W D^{-1/2}`; isolated nodes keep a 1 on the diagonal.
    NormalizedLaplacian,
}

impl std::str::FromStr for ShiftKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjacency" => Ok(ShiftKind::Adjacency),
            "weighted-adjacency" => Ok(ShiftKind::WeightedAdjacency),
            "laplacian" => Ok(ShiftKind::Laplacian),
            "normalized-laplacian" => Ok(ShiftKind::NormalizedLaplacian),
            other => Err(invalid(format!("unknown shift kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOperator {
    pub matrix: DMatrix<f64>,
    pub kind: ShiftKind,
}

impl ShiftOperator {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix == self.matrix.transpose()
    }
}

pub fn shift_operator(g: &Graph, kind: ShiftKind) -> ShiftOperator {
    let w = g.weights();
    let n = g.n();
    let matrix = match kind {
        ShiftKind::Adjacency | ShiftKind::WeightedAdjacency => w.clone(),
        ShiftKind::Laplacian => {
            let mut l = -w.clone();
            for (i, d) in g.degrees().into_iter().enumerate() {
                l[(i, i)] = d;
            }
            l
        }
        ShiftKind::NormalizedLaplacian => {
            let inv_sqrt: Vec<f64> = g
                .degrees()
                .into_iter()
                .map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
                .collect();
            DMatrix::from_fn(n, n, |i, j| {
                let off = -w[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
                if i == j {
                    1.0 + off
                } else {
                    off
                }
            })
        }
    };
    ShiftOperator { matrix, kind }
}

/// JSON descriptor for generated graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDescriptor {
    pub n: usize,
    pub kind: String,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub weight_scheme: Option<WeightScheme>,
}

impl GraphDescriptor {
    /// Builds the described graph. Kinds: `cycle`, `sensor` (random points,
    /// gaussian 4-NN), `random` (ring plus random edges of density 0.2) and
    /// `grid` (k-NN on a square pixel grid, `n` a perfect square).
    pub fn build(&self) -> Result<Graph> {
        let seed = self.seed.unwrap_or(0);
        match self.kind.as_str() {
            "cycle" => build_cycle_graph(self.n),
            "sensor" => build_random_sensor_graph(self.n, seed),
            "random" => build_random_weighted_graph(self.n, 0.2, seed),
            "grid" => {
                let side = (self.n as f64).sqrt().round() as usize;
                if side * side != self.n {
                    return Err(invalid(format!("grid graph needs a square node count, got {}", self.n)));
                }
                build_knn_graph(
                    &pixel_coords(side, side),
                    self.k.unwrap_or(4),
                    true,
                    self.weight_scheme.unwrap_or_default(),
                )
            }
            other => Err(invalid(format!("unknown graph kind '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors_build() {
        let d: GraphDescriptor =
            serde_json::from_str(r#"{"n": 16, "kind": "grid", "seed": null, "k": 4, "weight_scheme": {"type": "binary"}}"#).unwrap();
        let g = d.build().unwrap();
        assert_eq!(g.n(), 16);
        assert!(g.weights().iter().all(|&w| w == 0.0 || w == 1.0));
        let c = GraphDescriptor { n: 6, kind: "cycle".into(), seed: None, k: None, weight_scheme: None };
        assert_eq!(c.build().unwrap(), build_cycle_graph(6).unwrap());
        assert!(GraphDescriptor { n: 15, kind: "grid".into(), ..c.clone() }.build().is_err());
        assert!(GraphDescriptor { kind: "torus".into(), ..c }.build().is_err());
    }

    #[test]
    fn collinear_knn_is_path() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        let g = build_knn_graph(&pts, 1, true, WeightScheme::Binary).unwrap();
        let w = g.weights();
        assert_eq!(w[(0, 1)], 1.0);
        assert_eq!(w[(1, 2)], 1.0);
        assert_eq!(w[(0, 2)], 0.0);
        assert!(g.is_symmetric());
    }

    #[test]
    fn knn_rejects_large_k() {
        let pts = pixel_coords(2, 2);
        let err = build_knn_graph(&pts, 4, true, WeightScheme::Binary).unwrap_err();
        assert_eq!(err.kind(), "invalid-parameter");
    }

    #[test]
    fn grid_knn_interior_degree() {
        let pts = pixel_coords(8, 8);
        let g = build_knn_graph(&pts, 4, true, WeightScheme::Binary).unwrap();
        for r in 1..7 {
            for c in 1..7 {
                let i = r * 8 + c;
                let deg = g.weights().row(i).iter().filter(|&&v| v != 0.0).count();
                assert!(deg >= 4);
            }
        }
    }

    #[test]
    fn cycle_patterns() {
        let g = build_cycle_graph(4).unwrap();
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[0., 1., 0., 1., 1., 0., 1., 0., 0., 1., 0., 1., 1., 0., 1., 0.],
        );
        assert_eq!(g.weights(), &expect);
        let k3 = build_cycle_graph(3).unwrap();
        assert_eq!(k3.weights(), &(DMatrix::from_element(3, 3, 1.0) - DMatrix::identity(3, 3)));
        assert!(build_cycle_graph(2).is_err());
    }

    #[test]
    fn sensor_graph_small_and_deterministic() {
        let g = build_random_sensor_graph(2, 11).unwrap();
        let w = g.weights()[(0, 1)];
        assert!(w > 0.0 && w <= 1.0);
        let a = build_random_sensor_graph(20, 7).unwrap();
        let b = build_random_sensor_graph(20, 7).unwrap();
        assert_eq!(a.weights(), b.weights());
        assert!(a.is_connected());
        assert!(a.is_symmetric());
    }

    #[test]
    fn laplacian_of_path() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        let g = build_knn_graph(&pts, 1, true, WeightScheme::Binary).unwrap();
        let l = shift_operator(&g, ShiftKind::Laplacian).matrix;
        let expect =
            DMatrix::from_row_slice(3, 3, &[1., -1., 0., -1., 2., -1., 0., -1., 1.]);
        assert_eq!(l, expect);
        assert_eq!(shift_operator(&g, ShiftKind::Adjacency).matrix, *g.weights());
    }

    #[test]
    fn normalized_laplacian_cycle4_spectrum() {
        let g = build_cycle_graph(4).unwrap();
        let z = shift_operator(&g, ShiftKind::NormalizedLaplacian).matrix;
        let mut ev: Vec<f64> = z.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([0.0, 1.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn from_weights_rejects_diagonal() {
        let mut w = DMatrix::zeros(2, 2);
        w[(0, 0)] = 1.0;
        assert!(Graph::from_weights(w).is_err());
    }
}
