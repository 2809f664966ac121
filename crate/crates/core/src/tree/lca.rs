/// Binary-lifting ancestor table plus Euler intervals for O(1) subtree tests.
#[derive(Clone, Debug)]
pub(crate) struct AncestorIndex {
    up: Vec<Vec<u32>>,
    level: Vec<u32>,
    tin: Vec<u32>,
    tout: Vec<u32>,
}

impl AncestorIndex {
    /// `children[v]` must describe a rooted tree at `root` covering every vertex.
    pub(crate) fn new(root: usize, parent: &[Option<usize>], children: &[Vec<usize>]) -> Self {
        let n = parent.len();
        let mut level = vec![0u32; n];
        let mut tin = vec![0u32; n];
        let mut tout = vec![0u32; n];
        let mut clock = 0u32;
        // iterative DFS: (vertex, next child index)
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        tin[root] = clock;
        clock += 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < children[v].len() {
                let c = children[v][*next];
                *next += 1;
                level[c] = level[v] + 1;
                tin[c] = clock;
                clock += 1;
                stack.push((c, 0));
            } else {
                tout[v] = clock;
                stack.pop();
            }
        }

        let max_level = level.iter().copied().max().unwrap_or(0);
        let mut log = 1;
        while (1u32 << log) <= max_level {
            log += 1;
        }
        let mut up = Vec::with_capacity(log);
        up.push(
            (0..n)
                .map(|v| parent[v].unwrap_or(root) as u32)
                .collect::<Vec<_>>(),
        );
        for j in 1..log {
            let prev = &up[j - 1];
            let row = (0..n).map(|v| prev[prev[v] as usize]).collect();
            up.push(row);
        }
        AncestorIndex { up, level, tin, tout }
    }

    pub(crate) fn level(&self, v: usize) -> u32 {
        self.level[v]
    }

    /// True when `v` lies in the subtree rooted at `u` (inclusive).
    pub(crate) fn in_subtree(&self, u: usize, v: usize) -> bool {
        self.tin[u] <= self.tin[v] && self.tin[v] < self.tout[u]
    }

    pub(crate) fn ancestor_at_level(&self, mut v: usize, target: u32) -> usize {
        let mut diff = self.level[v] - target;
        let mut j = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                v = self.up[j][v] as usize;
            }
            diff >>= 1;
            j += 1;
        }
        v
    }

    pub(crate) fn lca(&self, a: usize, b: usize) -> usize {
        if self.in_subtree(a, b) {
            return a;
        }
        if self.in_subtree(b, a) {
            return b;
        }
        let mut a = a;
        for j in (0..self.up.len()).rev() {
            let cand = self.up[j][a] as usize;
            if !self.in_subtree(cand, b) {
                a = cand;
            }
        }
        self.up[0][a] as usize
    }
}
