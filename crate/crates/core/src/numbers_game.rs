//! Mozes' numbers game on simply-laced graphs, and its realisation on the
//! lattice where each node carries the image of a simple root.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{intersect, reflect, simple_roots, HClass, D9_MULTIPLICITIES};

/// Null vector of the affine E8 diagram, indexed by `r0, ..., r8`.
pub const E8_AFFINE_WEIGHTS: [i64; 9] = D9_MULTIPLICITIES;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds an undirected graph; rejects self-loops, out-of-range
    /// endpoints and disconnected inputs. Duplicate edges are merged.
    pub fn new(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let v = labels.len();
        if v == 0 {
            return Err(Error::InvalidGraph("no nodes".into()));
        }
        let mut neighbors = vec![Vec::new(); v];
        for &(a, b) in edges {
            if a >= v || b >= v {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            if !neighbors[a].contains(&b) {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        let mut seen = vec![false; v];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &neighbors[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(Graph { labels, neighbors })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    /// True when `2 w_j = sum of w over the neighbours of j` at every node.
    pub fn is_null_vector(&self, weights: &[i64]) -> bool {
        weights.len() == self.len()
            && (0..self.len()).all(|j| 2 * weights[j] == self.neighbors[j].iter().map(|&k| weights[k]).sum::<i64>())
    }
}

/// The affine E8 diagram: the chain `r1 - ... - r8` plus the edge `r0 - r3`.
pub fn e8_affine_graph() -> Graph {
    let labels = (0..9).map(|i| format!("r{i}")).collect();
    let mut edges: Vec<(usize, usize)> = (1..8).map(|i| (i, i + 1)).collect();
    edges.push((0, 3));
    Graph::new(labels, &edges).expect("affine E8 is connected")
}

/// Node values plus the sequence of fired nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    graph: Arc<Graph>,
    values: Vec<i64>,
    fired: Vec<usize>,
}

impl GameState {
    pub fn new(graph: Arc<Graph>, values: Vec<i64>) -> Result<Self> {
        if values.len() != graph.len() {
            return Err(Error::LengthMismatch { expected: graph.len(), got: values.len() });
        }
        Ok(GameState { graph, values, fired: Vec::new() })
    }

    /// Value 1 at `r0`, zero elsewhere.
    pub fn e8_initial() -> Self {
        let mut values = vec![0; 9];
        values[0] = 1;
        GameState { graph: Arc::new(e8_affine_graph()), values, fired: Vec::new() }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn history(&self) -> &[usize] {
        &self.fired
    }

    /// Negates the value at `node` and adds the old value to each neighbour.
    pub fn fire(&self, node: usize) -> Result<GameState> {
        if node >= self.values.len() {
            return Err(Error::LengthMismatch { expected: self.values.len(), got: node });
        }
        let x = self.values[node];
        if x <= 0 {
            return Err(Error::IllegalFire { node, value: x });
        }
        let mut values = self.values.clone();
        values[node] = -x;
        for &nb in self.graph.neighbors(node) {
            values[nb] += x;
        }
        let mut fired = self.fired.clone();
        fired.push(node);
        Ok(GameState { graph: self.graph.clone(), values, fired })
    }

    /// `sum w_i x_i`.
    pub fn invariant(&self, weights: &[i64]) -> Result<i64> {
        if weights.len() != self.values.len() {
            return Err(Error::LengthMismatch { expected: self.values.len(), got: weights.len() });
        }
        Ok(self.values.iter().zip(weights).map(|(x, w)| x * w).sum())
    }
}

/// How the next node to fire is picked among the positive ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Lowest-index positive node.
    FirstPositive,
    /// Uniform among positive nodes, driven by a seeded ChaCha8 stream.
    RandomPositive { seed: u64 },
}

impl Strategy {
    pub fn chooser(&self) -> NodeChooser {
        match *self {
            Strategy::FirstPositive => NodeChooser { rng: None },
            Strategy::RandomPositive { seed } => NodeChooser { rng: Some(ChaCha8Rng::seed_from_u64(seed)) },
        }
    }
}

pub struct NodeChooser {
    rng: Option<ChaCha8Rng>,
}

impl NodeChooser {
    pub fn choose(&mut self, values: &[i64]) -> Option<usize> {
        let positive: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 0).collect();
        match &mut self.rng {
            _ if positive.is_empty() => None,
            None => Some(positive[0]),
            Some(rng) => Some(positive[rng.gen_range(0..positive.len())]),
        }
    }
}

/// Images of the nine simple roots under the reflections performed so far,
/// and the list of crossed classes.
///
/// `r0` is the only simple root with a non-zero `L` coefficient (equal to
/// 1), so the `r0`-coefficient of a node class in the simple-root basis is
/// its `L` coefficient. That coefficient is the node's game value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeGameState {
    node_classes: Vec<HClass>,
    crossed: Vec<HClass>,
}

pub fn lattice_init() -> LatticeGameState {
    let (roots, _) = simple_roots();
    LatticeGameState { node_classes: roots.to_vec(), crossed: Vec::new() }
}

impl LatticeGameState {
    pub fn node_classes(&self) -> &[HClass] {
        &self.node_classes
    }

    pub fn crossed(&self) -> &[HClass] {
        &self.crossed
    }

    pub fn values(&self) -> Vec<i64> {
        self.node_classes.iter().map(HClass::a0).collect()
    }

    /// Reflects every node class in the class at `node`.
    pub fn fire(&self, node: usize) -> Result<(LatticeGameState, HClass)> {
        let wall = self
            .node_classes
            .get(node)
            .ok_or(Error::LengthMismatch { expected: self.node_classes.len(), got: node })?
            .clone();
        if wall.a0() <= 0 {
            return Err(Error::IllegalFire { node, value: wall.a0() });
        }
        let node_classes = self.node_classes.iter().map(|b| reflect(&wall, b)).collect::<Result<Vec<_>>>()?;
        let mut crossed = self.crossed.clone();
        crossed.push(wall.clone());
        Ok((LatticeGameState { node_classes, crossed }, wall))
    }

    /// Gram matrix of the node classes.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        self.node_classes.iter().map(|a| self.node_classes.iter().map(|b| intersect(a, b).unwrap()).collect()).collect()
    }
}

pub fn lattice_fire(state: &LatticeGameState, node: usize) -> Result<(LatticeGameState, HClass)> {
    state.fire(node)
}

/// One row of a played game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameStep {
    pub step: usize,
    pub fired_node: usize,
    pub values: Vec<i64>,
    pub invariant: i64,
    pub crossed_class: HClass,
}

/// Plays `moves` moves on affine E8 from the standard start, evolving the
/// plain game and the lattice game side by side.
pub fn play(moves: usize, strategy: Strategy) -> Result<Vec<GameStep>> {
    let mut chooser = strategy.chooser();
    let mut game = GameState::e8_initial();
    let mut lattice = lattice_init();
    let mut rows = Vec::with_capacity(moves);
    for step in 1..=moves {
        let node = chooser.choose(game.values()).ok_or(Error::GameStuck)?;
        game = game.fire(node)?;
        let (next, crossed) = lattice.fire(node)?;
        lattice = next;
        debug_assert_eq!(lattice.values(), game.values());
        rows.push(GameStep {
            step,
            fired_node: node,
            values: game.values().to_vec(),
            invariant: game.invariant(&E8_AFFINE_WEIGHTS)?,
            crossed_class: crossed,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::negative_classes::is_positive_root;

    #[test]
    fn e8_graph_shape() {
        let g = e8_affine_graph();
        let degrees: Vec<usize> = (0..9).map(|i| g.degree(i)).collect();
        assert_eq!(degrees, vec![1, 1, 2, 3, 2, 2, 2, 2, 1]);
        assert!(g.is_null_vector(&E8_AFFINE_WEIGHTS));
        let (roots, _) = simple_roots();
        for i in 0..9 {
            for j in 0..9 {
                if i != j {
                    let x = intersect(&roots[i], &roots[j]).unwrap();
                    assert_eq!(g.is_adjacent(i, j), x == 1, "r{i} r{j}");
                    assert!(x == 0 || x == 1);
                }
            }
        }
    }

    #[test]
    fn graph_validation() {
        let l = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        assert!(Graph::new(l(3), &[(0, 1)]).is_err());
        assert!(Graph::new(l(2), &[(0, 0), (0, 1)]).is_err());
        assert!(Graph::new(l(2), &[(0, 2)]).is_err());
        assert!(Graph::new(l(3), &[(0, 1), (1, 2), (2, 1)]).is_ok());
    }

    #[test]
    fn fire_examples() {
        let s = GameState::e8_initial();
        assert_eq!(s.invariant(&E8_AFFINE_WEIGHTS).unwrap(), 3);
        let t = s.fire(0).unwrap();
        assert_eq!(t.values(), &[-1, 0, 0, 1, 0, 0, 0, 0, 0]);
        assert_eq!(t.invariant(&E8_AFFINE_WEIGHTS).unwrap(), 3);
        assert_eq!(t.history(), &[0]);
        assert_eq!(s.fire(1), Err(Error::IllegalFire { node: 1, value: 0 }));
        assert_eq!(t.fire(0), Err(Error::IllegalFire { node: 0, value: -1 }));
        assert!(s.invariant(&[1, 2]).is_err());
    }

    #[test]
    fn invariant_is_linear() {
        let g = Arc::new(e8_affine_graph());
        let x = GameState::new(g.clone(), vec![1, -2, 3, 0, 5, 1, 1, -1, 2]).unwrap();
        let y = GameState::new(g.clone(), vec![0, 4, -1, 2, 2, 0, 3, 1, -5]).unwrap();
        let sum: Vec<i64> = x.values().iter().zip(y.values()).map(|(a, b)| a + b).collect();
        let z = GameState::new(g, sum).unwrap();
        let w = &E8_AFFINE_WEIGHTS;
        assert_eq!(z.invariant(w).unwrap(), x.invariant(w).unwrap() + y.invariant(w).unwrap());
    }

    #[test]
    fn lattice_first_fire() {
        let s = lattice_init();
        let (t, crossed) = lattice_fire(&s, 0).unwrap();
        assert_eq!(crossed, "(1;1,1,1,0,0,0,0,0,0)".parse().unwrap());
        let (roots, _) = simple_roots();
        assert_eq!(t.node_classes()[3], &roots[0] + &roots[3]);
        assert_eq!(t.node_classes()[3].a0(), 1);
        assert_eq!(t.node_classes()[0], -&roots[0]);
        assert_eq!(t.values(), vec![-1, 0, 0, 1, 0, 0, 0, 0, 0]);
        assert!(lattice_fire(&t, 0).is_err());
    }

    #[test]
    fn lattice_tracks_game() {
        for strategy in [Strategy::FirstPositive, Strategy::RandomPositive { seed: 7 }] {
            let mut chooser = strategy.chooser();
            let mut game = GameState::e8_initial();
            let mut lattice = lattice_init();
            let gram0 = lattice.gram();
            for _ in 0..120 {
                let node = chooser.choose(game.values()).unwrap();
                game = game.fire(node).unwrap();
                let (next, crossed) = lattice.fire(node).unwrap();
                lattice = next;
                assert!(is_positive_root(&crossed));
                assert_eq!(lattice.values(), game.values());
                assert_eq!(lattice.gram(), gram0);
            }
            assert_eq!(lattice.crossed().len(), 120);
        }
    }

    #[test]
    fn random_strategy_is_reproducible() {
        let a = play(60, Strategy::RandomPositive { seed: 11 }).unwrap();
        let b = play(60, Strategy::RandomPositive { seed: 11 }).unwrap();
        assert_eq!(a, b);
        let c = play(60, Strategy::RandomPositive { seed: 12 }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn play_first_row() {
        let rows = play(1, Strategy::FirstPositive).unwrap();
        assert_eq!(rows[0].fired_node, 0);
        assert_eq!(rows[0].values, vec![-1, 0, 0, 1, 0, 0, 0, 0, 0]);
        assert_eq!(rows[0].invariant, 3);
    }
}
