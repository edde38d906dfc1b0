//! Maximum flow on the class graph of a coprimality problem.
//!
//! Vertices sharing the same set of relevant primes are interchangeable, so a
//! side collapses to one node per prime mask with capacity equal to the class
//! size. Left class `l` and right class `r` are adjacent iff their masks are
//! disjoint. Dinic phases run over this graph with adjacency tested on the fly.

use std::collections::HashMap;

pub(crate) struct ClassGraph {
    pub left_masks: Vec<u128>,
    pub left_cap: Vec<u64>,
    pub right_masks: Vec<u128>,
    pub right_cap: Vec<u64>,
}

pub(crate) struct FlowOutcome {
    pub value: u64,
    /// Positive class-to-class flows.
    pub flows: Vec<(usize, usize, u64)>,
    /// Classes reachable from the source in the final residual graph.
    pub reach_left: Vec<bool>,
    pub reach_right: Vec<bool>,
}

const UNSET: u32 = u32::MAX;

struct Dinic<'a> {
    g: &'a ClassGraph,
    flow_s: Vec<u64>,
    flow_t: Vec<u64>,
    out: Vec<HashMap<u32, u64>>,
    back: Vec<Vec<u32>>,
    level_l: Vec<u32>,
    level_r: Vec<u32>,
    sink_level: u32,
    ptr_l: Vec<usize>,
    ptr_r: Vec<usize>,
}

impl<'a> Dinic<'a> {
    fn new(g: &'a ClassGraph) -> Self {
        let (nl, nr) = (g.left_masks.len(), g.right_masks.len());
        Dinic {
            g,
            flow_s: vec![0; nl],
            flow_t: vec![0; nr],
            out: vec![HashMap::new(); nl],
            back: vec![Vec::new(); nr],
            level_l: vec![UNSET; nl],
            level_r: vec![UNSET; nr],
            sink_level: UNSET,
            ptr_l: vec![0; nl],
            ptr_r: vec![0; nr],
        }
    }

    fn adj(&self, l: usize, r: usize) -> bool {
        self.g.left_masks[l] & self.g.right_masks[r] == 0
    }

    fn flow(&self, l: usize, r: usize) -> u64 {
        self.out[l].get(&(r as u32)).copied().unwrap_or(0)
    }

    fn add(&mut self, l: usize, r: usize, f: u64) {
        let e = self.out[l].entry(r as u32).or_insert(0);
        if *e == 0 {
            self.back[r].push(l as u32);
        }
        *e += f;
    }

    fn sub(&mut self, l: usize, r: usize, f: u64) {
        let e = self.out[l].get_mut(&(r as u32)).expect("flow edge exists");
        *e -= f;
        if *e == 0 {
            self.out[l].remove(&(r as u32));
        }
    }

    /// Layers the residual graph; with `cutoff` false this is plain reachability.
    fn bfs(&mut self, cutoff: bool) -> bool {
        let (nl, nr) = (self.level_l.len(), self.level_r.len());
        self.level_l.iter_mut().for_each(|x| *x = UNSET);
        self.level_r.iter_mut().for_each(|x| *x = UNSET);
        self.sink_level = UNSET;
        let mut queue: Vec<(bool, usize)> = Vec::new();
        for l in 0..nl {
            if self.flow_s[l] < self.g.left_cap[l] {
                self.level_l[l] = 0;
                queue.push((true, l));
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let (is_left, v) = queue[head];
            head += 1;
            if is_left {
                let d = self.level_l[v];
                if cutoff && d + 1 >= self.sink_level {
                    continue;
                }
                for r in 0..nr {
                    if self.level_r[r] == UNSET && self.adj(v, r) {
                        self.level_r[r] = d + 1;
                        queue.push((false, r));
                    }
                }
            } else {
                let d = self.level_r[v];
                if self.flow_t[v] < self.g.right_cap[v] {
                    self.sink_level = self.sink_level.min(d + 1);
                }
                if cutoff && d + 1 >= self.sink_level {
                    continue;
                }
                let out = &self.out;
                self.back[v].retain(|&l| out[l as usize].contains_key(&(v as u32)));
                for i in 0..self.back[v].len() {
                    let l = self.back[v][i] as usize;
                    if self.level_l[l] == UNSET {
                        self.level_l[l] = d + 1;
                        queue.push((true, l));
                    }
                }
            }
        }
        self.sink_level != UNSET
    }

    fn push_left(&mut self, l: usize, limit: u64) -> u64 {
        let nr = self.level_r.len();
        let mut sent = 0;
        while self.ptr_l[l] < nr {
            let r = self.ptr_l[l];
            if self.level_r[r] == self.level_l[l] + 1 && self.adj(l, r) {
                let want = limit - sent;
                let f = self.push_right(r, want);
                if f > 0 {
                    self.add(l, r, f);
                    sent += f;
                }
                if sent == limit {
                    return sent;
                }
            }
            self.ptr_l[l] += 1;
        }
        sent
    }

    fn push_right(&mut self, r: usize, limit: u64) -> u64 {
        let mut sent = 0;
        if self.level_r[r] + 1 == self.sink_level {
            let f = limit.min(self.g.right_cap[r] - self.flow_t[r]);
            self.flow_t[r] += f;
            return f;
        }
        while self.ptr_r[r] < self.back[r].len() {
            let l = self.back[r][self.ptr_r[r]] as usize;
            let fl = self.flow(l, r);
            if fl > 0 && self.level_l[l] == self.level_r[r] + 1 {
                let want = (limit - sent).min(fl);
                let f = self.push_left(l, want);
                if f > 0 {
                    self.sub(l, r, f);
                    sent += f;
                }
                if sent == limit {
                    return sent;
                }
            }
            self.ptr_r[r] += 1;
        }
        sent
    }

    fn run(mut self) -> FlowOutcome {
        let mut value = 0;
        while self.bfs(true) {
            self.ptr_l.iter_mut().for_each(|x| *x = 0);
            self.ptr_r.iter_mut().for_each(|x| *x = 0);
            for l in 0..self.level_l.len() {
                if self.level_l[l] == 0 {
                    let f = self.push_left(l, self.g.left_cap[l] - self.flow_s[l]);
                    self.flow_s[l] += f;
                    value += f;
                }
            }
        }
        self.bfs(false);
        let mut flows = Vec::new();
        for (l, m) in self.out.iter().enumerate() {
            for (&r, &f) in m {
                flows.push((l, r as usize, f));
            }
        }
        flows.sort_unstable();
        FlowOutcome {
            value,
            flows,
            reach_left: self.level_l.iter().map(|&x| x != UNSET).collect(),
            reach_right: self.level_r.iter().map(|&x| x != UNSET).collect(),
        }
    }
}

/// Maximum flow from the left classes to the right classes.
///
/// Search depth grows with the number of classes, so large graphs run on a
/// thread with a generous stack.
pub(crate) fn max_flow(g: &ClassGraph) -> FlowOutcome {
    let classes = g.left_masks.len() + g.right_masks.len();
    if classes <= 4096 {
        return Dinic::new(g).run();
    }
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(s, || Dinic::new(g).run())
            .expect("spawn flow worker")
            .join()
            .expect("flow worker panicked")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_classes() {
        // D(8) against [1, 4]: one odd divisor, three even; two odd targets.
        let g = ClassGraph {
            left_masks: vec![0, 1],
            left_cap: vec![1, 3],
            right_masks: vec![0, 1],
            right_cap: vec![2, 2],
        };
        let out = max_flow(&g);
        assert_eq!(out.value, 3);
        assert_eq!(out.reach_left, vec![false, true]);
        assert_eq!(out.reach_right, vec![true, false]);
    }

    #[test]
    fn saturating_flow() {
        let g = ClassGraph {
            left_masks: vec![0, 1, 2, 3],
            left_cap: vec![1, 1, 1, 1],
            right_masks: vec![0, 1, 2, 0],
            right_cap: vec![1, 1, 1, 1],
        };
        let out = max_flow(&g);
        assert_eq!(out.value, 4);
        assert!(out.reach_left.iter().all(|&x| !x));
    }
}
