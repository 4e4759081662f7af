//! Link-cut forest with path minimum and maximum.
//!
//! Edges are modelled as their own nodes so that edge weights sit on nodes.
//! Vertex nodes carry neutral values and never win a path query.

const NIL: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Agg {
    min: (f64, usize),
    max: (f64, usize),
}

impl Agg {
    const NEUTRAL: Agg = Agg { min: (f64::INFINITY, NIL), max: (f64::NEG_INFINITY, NIL) };

    fn leaf(val: Option<f64>, id: usize) -> Agg {
        match val {
            Some(v) => Agg { min: (v, id), max: (v, id) },
            None => Agg::NEUTRAL,
        }
    }

    fn merge(a: Agg, b: Agg) -> Agg {
        // ties go to the smaller node id
        let min = if b.min.0 < a.min.0 || (b.min.0 == a.min.0 && b.min.1 < a.min.1) { b.min } else { a.min };
        let max = if b.max.0 > a.max.0 || (b.max.0 == a.max.0 && b.max.1 < a.max.1) { b.max } else { a.max };
        Agg { min, max }
    }
}

#[derive(Debug, Clone)]
pub struct LinkCutForest {
    ch: Vec<[usize; 2]>,
    par: Vec<usize>,
    rev: Vec<bool>,
    val: Vec<Option<f64>>,
    agg: Vec<Agg>,
}

impl LinkCutForest {
    /// `n` isolated nodes, all without value.
    pub fn new(n: usize) -> Self {
        LinkCutForest {
            ch: vec![[NIL, NIL]; n],
            par: vec![NIL; n],
            rev: vec![false; n],
            val: vec![None; n],
            agg: vec![Agg::NEUTRAL; n],
        }
    }

    pub fn len(&self) -> usize {
        self.par.len()
    }

    pub fn is_empty(&self) -> bool {
        self.par.is_empty()
    }

    fn is_root(&self, x: usize) -> bool {
        let p = self.par[x];
        p == NIL || (self.ch[p][0] != x && self.ch[p][1] != x)
    }

    fn pull(&mut self, x: usize) {
        let mut a = Agg::leaf(self.val[x], x);
        for c in self.ch[x] {
            if c != NIL {
                a = Agg::merge(a, self.agg[c]);
            }
        }
        self.agg[x] = a;
    }

    fn push(&mut self, x: usize) {
        if self.rev[x] {
            self.rev[x] = false;
            self.ch[x].swap(0, 1);
            for c in self.ch[x] {
                if c != NIL {
                    self.rev[c] ^= true;
                }
            }
        }
    }

    fn rotate(&mut self, x: usize) {
        let p = self.par[x];
        let g = self.par[p];
        let dir = usize::from(self.ch[p][1] == x);
        if !self.is_root(p) {
            let pd = usize::from(self.ch[g][1] == p);
            self.ch[g][pd] = x;
        }
        self.par[x] = g;
        let b = self.ch[x][dir ^ 1];
        self.ch[p][dir] = b;
        if b != NIL {
            self.par[b] = p;
        }
        self.ch[x][dir ^ 1] = p;
        self.par[p] = x;
        self.pull(p);
        self.pull(x);
    }

    fn splay(&mut self, x: usize) {
        let mut stack = vec![x];
        let mut y = x;
        while !self.is_root(y) {
            y = self.par[y];
            stack.push(y);
        }
        while let Some(z) = stack.pop() {
            self.push(z);
        }
        while !self.is_root(x) {
            let p = self.par[x];
            if !self.is_root(p) {
                let g = self.par[p];
                let zigzig = (self.ch[g][0] == p) == (self.ch[p][0] == x);
                self.rotate(if zigzig { p } else { x });
            }
            self.rotate(x);
        }
    }

    fn access(&mut self, x: usize) {
        let mut last = NIL;
        let mut y = x;
        while y != NIL {
            self.splay(y);
            self.ch[y][1] = last;
            self.pull(y);
            last = y;
            y = self.par[y];
        }
        self.splay(x);
    }

    pub fn make_root(&mut self, x: usize) {
        self.access(x);
        self.rev[x] ^= true;
        self.push(x);
    }

    pub fn find_root(&mut self, x: usize) -> usize {
        self.access(x);
        let mut y = x;
        loop {
            self.push(y);
            if self.ch[y][0] == NIL {
                break;
            }
            y = self.ch[y][0];
        }
        self.splay(y);
        y
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        a == b || self.find_root(a) == self.find_root(b)
    }

    /// Makes `child` (a tree root after rerooting) a child of `parent`.
    /// Returns false if they are already connected.
    pub fn link(&mut self, child: usize, parent: usize) -> bool {
        if self.connected(child, parent) {
            return false;
        }
        self.make_root(child);
        self.par[child] = parent;
        true
    }

    /// Removes the tree edge between adjacent nodes `a` and `b`.
    pub fn cut(&mut self, a: usize, b: usize) -> bool {
        self.make_root(a);
        self.access(b);
        // after access(b) with root a, a is b's left child iff they are adjacent
        if self.ch[b][0] == a {
            self.push(a);
        }
        if self.ch[b][0] != a || self.ch[a][1] != NIL {
            return false;
        }
        self.ch[b][0] = NIL;
        self.par[a] = NIL;
        self.pull(b);
        true
    }

    pub fn set_value(&mut self, x: usize, v: Option<f64>) {
        self.access(x);
        self.val[x] = v;
        self.pull(x);
    }

    pub fn value(&self, x: usize) -> Option<f64> {
        self.val[x]
    }

    fn path_agg(&mut self, a: usize, b: usize) -> Option<Agg> {
        if !self.connected(a, b) {
            return None;
        }
        let root = self.find_root(a);
        self.make_root(a);
        self.access(b);
        let agg = self.agg[b];
        self.make_root(root);
        Some(agg)
    }

    /// Node of minimum value on the a-b path, ignoring valueless nodes.
    pub fn path_min(&mut self, a: usize, b: usize) -> Option<(usize, f64)> {
        self.path_agg(a, b).and_then(|g| (g.min.1 != NIL).then_some((g.min.1, g.min.0)))
    }

    pub fn path_max(&mut self, a: usize, b: usize) -> Option<(usize, f64)> {
        self.path_agg(a, b).and_then(|g| (g.max.1 != NIL).then_some((g.max.1, g.max.0)))
    }
}
