//! Dense Edmonds-Karp max-flow, sized for the handful of nodes in one
//! expansion move.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Residual capacities at or below this are treated as saturated.
const SATURATED: f64 = 1e-12;

pub(crate) struct FlowGraph {
    n: usize,
    capacity: Vec<f64>,
}

impl FlowGraph {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            capacity: vec![0.0; n * n],
        }
    }

    pub(crate) fn add_edge(&mut self, from: usize, to: usize, capacity: f64) {
        debug_assert!(capacity >= 0.0);
        self.capacity[from * self.n + to] += capacity;
    }

    /// Saturates a maximum flow and returns, for every node, whether it
    /// lies on the source side of the resulting minimum cut.
    pub(crate) fn min_cut(mut self, source: usize, sink: usize) -> Vec<bool> {
        let n = self.n;
        loop {
            let parent = self.augmenting_path(source, sink);
            if parent[sink] == usize::MAX {
                break;
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = sink;
            while v != source {
                let u = parent[v];
                bottleneck = bottleneck.min(self.capacity[u * n + v]);
                v = u;
            }
            let mut v = sink;
            while v != source {
                let u = parent[v];
                self.capacity[u * n + v] -= bottleneck;
                self.capacity[v * n + u] += bottleneck;
                v = u;
            }
        }
        let parent = self.augmenting_path(source, sink);
        (0..n).map(|v| v == source || parent[v] != usize::MAX).collect()
    }

    /// BFS tree over residual edges; unreached nodes keep `usize::MAX`.
    fn augmenting_path(&self, source: usize, sink: usize) -> Vec<usize> {
        let n = self.n;
        let mut parent = vec![usize::MAX; n];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && self.capacity[u * n + v] > SATURATED {
                    parent[v] = u;
                    if v == sink {
                        return parent;
                    }
                    queue.push_back(v);
                }
            }
        }
        parent
    }
}
