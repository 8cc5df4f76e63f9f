/// Merge-find over point indices with per-component diameter and member
/// lists, undone in LIFO order on backtrack.
///
/// No path compression, so every change is a constant-size record.
#[derive(Debug, Clone)]
pub(super) struct RollbackComponents {
    parent: Vec<usize>,
    size: Vec<usize>,
    diam: Vec<u64>,
    /// Circular successor lists; splicing two cycles is a swap of successors.
    next: Vec<usize>,
    history: Vec<Undo>,
}

#[derive(Debug, Clone, Copy)]
enum Undo {
    Union { child: usize, root: usize },
    Diameter { root: usize, old: u64 },
}

impl RollbackComponents {
    pub(super) fn new(n: usize) -> Self {
        RollbackComponents {
            parent: (0..n).collect(),
            size: vec![1; n],
            diam: vec![0; n],
            next: (0..n).collect(),
            history: Vec::new(),
        }
    }

    pub(super) fn find(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    pub(super) fn diameter(&self, root: usize) -> u64 {
        self.diam[root]
    }

    pub(super) fn members(&self, root: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size[root]);
        let mut v = root;
        loop {
            out.push(v);
            v = self.next[v];
            if v == root {
                break;
            }
        }
        out
    }

    pub(super) fn mark(&self) -> usize {
        self.history.len()
    }

    pub(super) fn union(&mut self, a: usize, b: usize) {
        let (mut x, mut y) = (self.find(a), self.find(b));
        if x == y {
            return;
        }
        if self.size[x] < self.size[y] {
            std::mem::swap(&mut x, &mut y);
        }
        self.parent[y] = x;
        self.size[x] += self.size[y];
        self.next.swap(x, y);
        self.history.push(Undo::Union { child: y, root: x });
    }

    pub(super) fn set_diameter(&mut self, v: usize, d: u64) {
        let root = self.find(v);
        self.history.push(Undo::Diameter {
            root,
            old: self.diam[root],
        });
        self.diam[root] = d;
    }

    pub(super) fn rollback(&mut self, mark: usize) {
        while self.history.len() > mark {
            match self.history.pop().expect("len > mark") {
                Undo::Union { child, root } => {
                    self.next.swap(root, child);
                    self.size[root] -= self.size[child];
                    self.parent[child] = child;
                }
                Undo::Diameter { root, old } => self.diam[root] = old,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<usize>) -> Vec<usize> {
        v.sort_unstable();
        v
    }

    #[test]
    fn union_and_rollback() {
        let mut c = RollbackComponents::new(6);
        let m0 = c.mark();
        c.union(0, 1);
        c.union(2, 3);
        c.set_diameter(0, 4);
        let m1 = c.mark();
        c.union(1, 3);
        c.set_diameter(3, 9);
        let root = c.find(0);
        assert_eq!(sorted(c.members(root)), vec![0, 1, 2, 3]);
        assert_eq!(c.diameter(root), 9);

        c.rollback(m1);
        assert_ne!(c.find(0), c.find(2));
        assert_eq!(sorted(c.members(c.find(0))), vec![0, 1]);
        assert_eq!(sorted(c.members(c.find(3))), vec![2, 3]);
        assert_eq!(c.diameter(c.find(1)), 4);

        c.rollback(m0);
        for v in 0..6 {
            assert_eq!(c.find(v), v);
            assert_eq!(c.members(v), vec![v]);
            assert_eq!(c.diameter(v), 0);
        }
    }
}
