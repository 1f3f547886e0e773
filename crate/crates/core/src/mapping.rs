//! Mappings of `[n]` into itself viewed as functional graphs.
//!
//! Vertices are `0..n` internally. The text format (and only the text
//! format) is 1-based: `"2 3 1"` is the 3-cycle `1 -> 2 -> 3 -> 1`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// A function `f: [n] -> [n]`, stored as the image of every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mapping {
    image: Vec<u32>,
}

impl Mapping {
    /// Builds a mapping from 0-based images.
    pub fn from_zero_based(image: Vec<u32>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::InvalidSize("a mapping needs at least one vertex".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidSize(format!("n = {n} does not fit the vertex type")));
        }
        if let Some((v, &w)) = image.iter().enumerate().find(|(_, &w)| w as usize >= n) {
            return Err(Error::InvalidMapping(format!("vertex {} maps to {} outside [1..{n}]", v + 1, w as u64 + 1)));
        }
        Ok(Mapping { image })
    }

    /// Builds a mapping from 1-based images, the convention of the text format.
    pub fn from_one_based(image: &[usize]) -> Result<Self> {
        let n = image.len();
        let mut zero = Vec::with_capacity(n);
        for (v, &w) in image.iter().enumerate() {
            if w == 0 || w > n {
                return Err(Error::InvalidMapping(format!("vertex {} maps to {w} outside [1..{n}]", v + 1)));
            }
            zero.push((w - 1) as u32);
        }
        Mapping::from_zero_based(zero)
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    /// 0-based images.
    pub fn image(&self) -> &[u32] {
        &self.image
    }

    #[inline]
    pub fn apply(&self, v: usize) -> usize {
        self.image[v] as usize
    }

    pub fn into_image(self) -> Vec<u32> {
        self.image
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &w) in self.image.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", w as u64 + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Mapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let image = s
            .split_whitespace()
            .map(|tok| tok.parse::<usize>().map_err(|e| Error::InvalidMapping(format!("bad image {tok:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Mapping::from_one_based(&image)
    }
}

/// Draws a uniform mapping of `[n]`: every image independent and uniform.
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Mapping> {
    let mut image = Vec::new();
    sample_into(n, rng, &mut image)?;
    Ok(Mapping { image })
}

/// Same draw as [`sample_uniform`], reusing `buf`.
pub fn sample_into<R: Rng + ?Sized>(n: usize, rng: &mut R, buf: &mut Vec<u32>) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSize("n must be positive".into()));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidSize(format!("n = {n} does not fit the vertex type")));
    }
    let n = n as u32;
    buf.clear();
    buf.extend((0..n).map(|_| rng.random_range(0..n)));
    Ok(())
}

/// Cycle/tree structure of a functional graph.
///
/// Heights are edge distances to the first cyclic vertex on the forward
/// orbit; cyclic vertices sit at height 0 and root their own tree.
#[derive(Debug, Clone, Default)]
pub struct Decomposition {
    succ: Vec<u32>,
    cyclic: Vec<bool>,
    height: Vec<u32>,
    tree_root: Vec<u32>,
    /// Tree height, meaningful at cyclic vertices only.
    tree_height: Vec<u32>,
    /// Cyclic vertices first, then every other vertex after its successor.
    order: Vec<u32>,
    lambda: usize,
    indeg: Vec<u32>,
    peel: Vec<u32>,
}

impl Decomposition {
    /// Recomputes the decomposition for `image` in place, reusing buffers.
    ///
    /// Linear time: in-degree peeling strips the tree vertices leaf-first,
    /// what survives is cyclic, and the reversed peel order visits every
    /// vertex after its successor.
    pub fn rebuild(&mut self, image: &[u32]) {
        const PEELED: u32 = u32::MAX;
        let n = image.len();
        self.succ.clear();
        self.succ.extend_from_slice(image);

        self.indeg.clear();
        self.indeg.resize(n, 0);
        for &w in image {
            self.indeg[w as usize] += 1;
        }

        // Follow each chain of vertices whose in-degree drops to zero
        // instead of queueing them; a vertex is still peeled only after
        // all of its preimages.
        let peel = &mut self.peel;
        let indeg = &mut self.indeg;
        peel.clear();
        for s in 0..n as u32 {
            if indeg[s as usize] != 0 {
                continue;
            }
            let mut v = s;
            loop {
                peel.push(v);
                indeg[v as usize] = PEELED;
                let w = image[v as usize] as usize;
                indeg[w] -= 1;
                if indeg[w] != 0 {
                    break;
                }
                v = w as u32;
            }
        }

        self.cyclic.clear();
        self.cyclic.extend(indeg.iter().map(|&d| d != PEELED));
        self.lambda = n - peel.len();

        let cyclic = &self.cyclic;
        self.order.clear();
        self.order.extend((0..n as u32).filter(|&v| cyclic[v as usize]));
        self.order.extend(peel.iter().rev());

        self.height.clear();
        self.height.resize(n, 0);
        self.tree_root.clear();
        self.tree_root.extend(0..n as u32);
        self.tree_height.clear();
        self.tree_height.resize(n, 0);
        for &v in &self.order[self.lambda..] {
            let v = v as usize;
            let w = image[v] as usize;
            let h = self.height[w] + 1;
            let root = self.tree_root[w];
            self.height[v] = h;
            self.tree_root[v] = root;
            let th = &mut self.tree_height[root as usize];
            if h > *th {
                *th = h;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.succ.len()
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn succ(&self) -> &[u32] {
        &self.succ
    }

    pub fn is_cyclic(&self, v: usize) -> bool {
        self.cyclic[v]
    }

    pub fn cyclic(&self) -> &[bool] {
        &self.cyclic
    }

    pub fn height(&self, v: usize) -> u32 {
        self.height[v]
    }

    pub fn heights(&self) -> &[u32] {
        &self.height
    }

    pub fn tree_root(&self, v: usize) -> usize {
        self.tree_root[v] as usize
    }

    /// Height of the tree rooted at `root`, `None` if `root` is not cyclic.
    pub fn tree_height(&self, root: usize) -> Option<u32> {
        self.cyclic[root].then(|| self.tree_height[root])
    }

    /// `(root, height)` for every tree, roots ascending.
    pub fn tree_heights(&self) -> Vec<(usize, u32)> {
        (0..self.n()).filter(|&v| self.cyclic[v]).map(|v| (v, self.tree_height[v])).collect()
    }

    /// Largest vertex height, i.e. the height of the mapping.
    pub fn max_height(&self) -> u32 {
        self.height.iter().copied().max().unwrap_or(0)
    }

    /// Vertices ordered so that every non-cyclic vertex follows its successor.
    pub fn topological_order(&self) -> &[u32] {
        &self.order
    }
}

/// Decomposes `m` into cycles and trees.
pub fn decompose(m: &Mapping) -> Decomposition {
    let mut d = Decomposition::default();
    d.rebuild(m.image());
    d
}

/// Highest-branch profile at one level `c` (`c = 0` analyses the trees).
#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize)]
pub struct CrownReport {
    pub level_c: u32,
    /// Number of level-`c` branches (vertices of height exactly `c`).
    pub branch_count: usize,
    /// Root of the unique highest branch, if there is one.
    pub top_root: Option<usize>,
    pub top_height: u32,
    pub second_height: u32,
    pub tie_count: usize,
    /// Crown vertices (0-based, ascending). Empty unless the top is unique.
    pub crown_vertices: Vec<usize>,
    pub crown_size: usize,
    pub crown_roots: usize,
    pub margin: u32,
}

impl CrownReport {
    pub fn has_branches(&self) -> bool {
        self.branch_count > 0
    }
}

/// Scratch buffers for repeated crown reports on same-size graphs.
#[derive(Debug, Default)]
pub struct CrownAnalyzer {
    anchor: Vec<u32>,
    branch_height: Vec<u32>,
}

impl CrownAnalyzer {
    pub fn report(&mut self, d: &Decomposition, c: u32) -> CrownReport {
        let n = d.n();
        let mut report = CrownReport { level_c: c, ..CrownReport::default() };

        let height = d.heights();
        // Level 0: the branches are the trees, already measured by the decomposition.
        if c == 0 {
            report.branch_count = d.lambda();
            return rank_branches(report, height, &d.tree_root, &d.tree_height);
        }

        // Only vertices at height >= c belong to a level-c branch.
        const NONE: u32 = u32::MAX;
        self.anchor.clear();
        self.anchor.resize(n, NONE);
        self.branch_height.clear();
        self.branch_height.resize(n, 0);
        let succ = d.succ();

        for &v in d.topological_order() {
            let v = v as usize;
            let h = height[v];
            if h < c {
                continue;
            }
            let a = if h == c {
                report.branch_count += 1;
                v as u32
            } else {
                self.anchor[succ[v] as usize]
            };
            self.anchor[v] = a;
            let rel = h - c;
            let bh = &mut self.branch_height[a as usize];
            if rel > *bh {
                *bh = rel;
            }
        }
        rank_branches(report, height, &self.anchor, &self.branch_height)
    }
}

/// Ranks the level-`c` branches given each vertex's branch root (`anchor`)
/// and each root's relative branch height, then extracts the crown.
fn rank_branches(mut report: CrownReport, height: &[u32], anchor: &[u32], branch_height: &[u32]) -> CrownReport {
    let c = report.level_c;
    let n = height.len();
    if report.branch_count == 0 {
        return report;
    }

    let mut top = 0u32;
    let mut tie = 0usize;
    let mut top_root = 0usize;
    let mut second = 0u32;
    for v in 0..n {
        if height[v] != c {
            continue;
        }
        let bh = branch_height[v];
        if tie == 0 || bh > top {
            if tie > 0 {
                second = top;
            }
            top = bh;
            tie = 1;
            top_root = v;
        } else if bh == top {
            tie += 1;
        } else if bh > second {
            second = bh;
        }
    }
    if tie > 1 {
        second = top;
    }
    report.top_height = top;
    report.second_height = second;
    report.tie_count = tie;
    report.margin = top - second;

    if tie == 1 {
        report.top_root = Some(top_root);
        let threshold = c + second + 1;
        for v in 0..n {
            if height[v] >= threshold && anchor[v] == top_root as u32 {
                report.crown_vertices.push(v);
                if height[v] == threshold {
                    report.crown_roots += 1;
                }
            }
        }
        report.crown_size = report.crown_vertices.len();
    }
    report
}

/// Crown report at level `c` for a decomposed mapping.
pub fn crown_report(d: &Decomposition, c: u32) -> CrownReport {
    CrownAnalyzer::default().report(d, c)
}

/// Event flags derived from a [`CrownReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ClassificationFlags {
    pub tie_count: usize,
    pub unique_highest: bool,
    pub margin_ge_2: bool,
    /// `|H| > 2r > 0`.
    pub crown_ok: bool,
}

impl ClassificationFlags {
    /// Exactly `k` branches share the maximal height.
    pub fn exactly_k_highest(&self, k: usize) -> bool {
        k > 0 && self.tie_count == k
    }
}

pub fn classify(cr: &CrownReport) -> ClassificationFlags {
    let unique_highest = cr.branch_count > 0 && cr.tie_count == 1;
    ClassificationFlags {
        tie_count: cr.tie_count,
        unique_highest,
        margin_ge_2: unique_highest && cr.margin >= 2,
        crown_ok: cr.crown_roots > 0 && cr.crown_size > 2 * cr.crown_roots,
    }
}
