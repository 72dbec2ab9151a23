//! Ultrametric coalescent trees, Newick text and plot segments.
//!
//! Leaves are numbered `1..=n` in CPP order. `heights[i - 1]` is the depth of
//! the node joining leaf `i` and leaf `i + 1`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalescentTree {
    #[serde(with = "crate::analytics::maybe_infinite")]
    stem_age: f64,
    n: usize,
    heights: Vec<f64>,
    times: Vec<f64>,
}

// larger height first; among equal heights the smaller leaf index is deeper
fn deeper(heights: &[f64], a: usize, b: usize) -> Ordering {
    heights[a].total_cmp(&heights[b]).then(b.cmp(&a))
}

impl CoalescentTree {
    /// Tree with the given stem age and CPP node heights.
    pub fn from_heights(stem_age: f64, heights: Vec<f64>) -> Result<Self> {
        if !(stem_age > 0.0) {
            return Err(domain(format!("stem age must be > 0, got {stem_age}")));
        }
        if let Some(h) = heights.iter().find(|&&h| !(h > 0.0 && h < stem_age)) {
            return Err(domain(format!("node height {h} outside (0, {stem_age})")));
        }
        let mut times = heights.clone();
        times.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            stem_age,
            n: heights.len() + 1,
            heights,
            times,
        })
    }

    /// Tree whose coalescent times are `times` in any order, with leaves
    /// placed so that the CPP heights are the times in the order given.
    pub fn from_times(stem_age: f64, times: Vec<f64>) -> Result<Self> {
        Self::from_heights(stem_age, times)
    }

    pub fn bare_stem(stem_age: f64) -> Result<Self> {
        Self::from_heights(stem_age, Vec::new())
    }

    pub fn stem_age(&self) -> f64 {
        self.stem_age
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// `T_2 >= ... >= T_n`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `T_k`; `T_1` is the stem age and `T_{n+1} = 0`.
    pub fn time(&self, k: usize) -> f64 {
        match k {
            0 => panic!("coalescent times are indexed from 1"),
            1 => self.stem_age,
            _ if k > self.n => 0.0,
            _ => self.times[k - 2],
        }
    }

    /// `W_k = T_k - T_{k+1}`.
    pub fn waiting_time(&self, k: usize) -> f64 {
        self.time(k) - self.time(k + 1)
    }

    /// Checks the structural invariants; trees built through the constructors always pass.
    pub fn validate(&self) -> Result<()> {
        if self.n != self.heights.len() + 1 || self.times.len() != self.heights.len() {
            return Err(domain("leaf count does not match node count"));
        }
        if !(self.stem_age > 0.0)
            || self
                .heights
                .iter()
                .any(|&h| !(h > 0.0 && h < self.stem_age))
        {
            return Err(domain(
                "node heights must lie strictly inside (0, stem age)",
            ));
        }
        let mut sorted = self.heights.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if sorted != self.times {
            return Err(domain(
                "times are not the descending order statistics of the heights",
            ));
        }
        Ok(())
    }

    // index in heights of the deepest node over leaves lo..=hi (0-based, lo < hi)
    fn split(&self, lo: usize, hi: usize) -> usize {
        (lo..hi)
            .max_by(|&a, &b| deeper(&self.heights, a, b))
            .expect("non-empty range")
    }

    /// Newick text with `precision` decimals. Node heights are rounded first
    /// and branch lengths taken as differences of rounded heights, so the
    /// output is exactly ultrametric. An infinite stem emits the subtree
    /// rooted at `T_2` with no root branch.
    pub fn to_newick(&self, precision: usize) -> String {
        let scale = 10f64.powi(precision as i32);
        let r = |x: f64| (x * scale).round() / scale;
        let mut out = String::new();
        if self.stem_age.is_infinite() {
            if self.n == 1 {
                out.push_str("L1");
            } else {
                let m = self.split(0, self.n - 1);
                self.write_node(&mut out, 0, self.n - 1, r(self.heights[m]), precision, &r);
                // write_node appends ":0" for the root branch
                out.truncate(out.rfind(':').expect("root branch"));
            }
            out.push(';');
            return out;
        }
        let top = r(self.stem_age);
        if self.n == 1 {
            let _ = write!(out, "L1:{top:.precision$};");
            return out;
        }
        out.push('(');
        self.write_node(&mut out, 0, self.n - 1, top, precision, &r);
        out.push_str(");");
        out
    }

    fn write_node(
        &self,
        out: &mut String,
        lo: usize,
        hi: usize,
        parent: f64,
        p: usize,
        r: &dyn Fn(f64) -> f64,
    ) {
        if lo == hi {
            let _ = write!(out, "L{}:{parent:.p$}", lo + 1);
            return;
        }
        let m = self.split(lo, hi);
        let h = r(self.heights[m]);
        out.push('(');
        self.write_node(out, lo, m, h, p, r);
        out.push(',');
        self.write_node(out, m + 1, hi, h, p, r);
        let _ = write!(out, "):{:.p$}", parent - h);
    }

    /// Segments `[x1, y1, x2, y2]` drawing the tree with leaves at `x = 1..=n`
    /// and internal nodes midway between their children. `top` sets the
    /// display height of an infinite stem and is ignored otherwise.
    pub fn plot_coordinates(&self, top: Option<f64>) -> Result<PlotData> {
        let stem_top = if self.stem_age.is_finite() {
            self.stem_age
        } else {
            match top {
                Some(v) if v > self.time(2) => v,
                _ => return Err(domain("an infinite stem needs a display top above T_2")),
            }
        };
        let mut segments = Vec::with_capacity(3 * self.n);
        self.plot_node(0, self.n - 1, stem_top, &mut segments);
        Ok(PlotData {
            segments,
            n: self.n,
            stem_age: self.stem_age,
        })
    }

    // returns the x coordinate of the node
    fn plot_node(&self, lo: usize, hi: usize, parent: f64, segs: &mut Vec<[f64; 4]>) -> f64 {
        if lo == hi {
            let x = (lo + 1) as f64;
            segs.push([x, 0.0, x, parent]);
            return x;
        }
        let m = self.split(lo, hi);
        let h = self.heights[m];
        let xl = self.plot_node(lo, m, h, segs);
        let xr = self.plot_node(m + 1, hi, h, segs);
        segs.push([xl, h, xr, h]);
        let x = 0.5 * (xl + xr);
        segs.push([x, h, x, parent]);
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub segments: Vec<[f64; 4]>,
    pub n: usize,
    #[serde(with = "crate::analytics::maybe_infinite")]
    pub stem_age: f64,
}

#[derive(Debug)]
struct PNode {
    children: Vec<PNode>,
    length: Option<f64>,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn node(&mut self) -> Result<PNode> {
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                children.push(self.node()?);
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected ',' or ')'")),
                }
            }
        }
        // optional label
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && !b"(),:;".contains(&self.s[self.pos])
            && !self.s[self.pos].is_ascii_whitespace()
        {
            self.pos += 1;
        }
        if children.is_empty() && self.pos == start {
            return Err(self.err("expected a leaf label"));
        }
        let mut length = None;
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len()
                && (self.s[self.pos].is_ascii_digit() || b"+-.eE".contains(&self.s[self.pos]))
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("bad branch length '{text}'"),
            })?;
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("branch length must be finite and >= 0, got {v}"),
                });
            }
            length = Some(v);
        }
        Ok(PNode { children, length })
    }
}

// fills heights between adjacent leaves; returns the node's height
fn flatten(node: &PNode, heights: &mut Vec<f64>, leaf_depth: &mut Vec<f64>, depth: f64) -> f64 {
    if node.children.is_empty() {
        leaf_depth.push(depth);
        return 0.0;
    }
    let mut h_max: f64 = 0.0;
    let mut slots = Vec::new();
    for (c, child) in node.children.iter().enumerate() {
        if c > 0 {
            slots.push(heights.len());
            heights.push(f64::NAN);
        }
        let len = child.length.unwrap_or(0.0);
        let h = flatten(child, heights, leaf_depth, depth + len);
        h_max = h_max.max(h + len);
    }
    for s in slots {
        heights[s] = h_max;
    }
    h_max
}

/// Parses Newick text as written by [`CoalescentTree::to_newick`]. Leaves are
/// taken in text order; labels are not interpreted. A root without a branch
/// length above a multifurcating node denotes an infinite stem.
pub fn parse_newick(text: &str) -> Result<CoalescentTree> {
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
    };
    let root = p.node()?;
    if p.peek() != Some(b';') {
        return Err(p.err("expected ';'"));
    }
    p.pos += 1;
    if p.peek().is_some() {
        return Err(p.err("trailing input after ';'"));
    }
    let mut heights = Vec::new();
    let mut leaf_depth = Vec::new();
    let h_root = flatten(&root, &mut heights, &mut leaf_depth, 0.0);
    let infinite = root.length.is_none() && root.children.len() != 1;
    let stem = if infinite {
        f64::INFINITY
    } else {
        h_root + root.length.unwrap_or(0.0)
    };
    // leaf_depth is measured from the root node; ultrametric means all equal
    let scale = if infinite {
        h_root.max(f64::MIN_POSITIVE)
    } else {
        stem
    };
    let lo = leaf_depth.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = leaf_depth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > 1e-9 * scale {
        return Err(Error::Parse {
            pos: text.len(),
            msg: format!("tree is not ultrametric: leaf depths span [{lo}, {hi}]"),
        });
    }
    if heights.is_empty() && infinite {
        return CoalescentTree::bare_stem(f64::INFINITY);
    }
    CoalescentTree::from_heights(stem, heights).map_err(|e| Error::Parse {
        pos: text.len(),
        msg: e.to_string(),
    })
}
