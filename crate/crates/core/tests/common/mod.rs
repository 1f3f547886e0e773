//! Independent reference implementations shared by the integration tests.
//! Everything here is deliberately naive: iterate `f` instead of peeling.

#![allow(dead_code)]

use highest_trees::branching::GwTrace;

/// `v` is cyclic iff `f^k(v) = v` for some `1 <= k <= n`; its height is the
/// least `k` with `f^k(v)` cyclic.
pub struct NaiveStructure {
    pub cyclic: Vec<bool>,
    pub height: Vec<u32>,
}

pub fn naive_structure(f: &[u32]) -> NaiveStructure {
    let n = f.len();
    let cyclic: Vec<bool> = (0..n)
        .map(|v| {
            let mut x = f[v] as usize;
            for _ in 0..n {
                if x == v {
                    return true;
                }
                x = f[x] as usize;
            }
            false
        })
        .collect();
    let height = (0..n)
        .map(|v| {
            let mut x = v;
            let mut k = 0;
            while !cyclic[x] {
                x = f[x] as usize;
                k += 1;
            }
            k
        })
        .collect();
    NaiveStructure { cyclic, height }
}

/// The naive verdict for one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveCrown {
    pub branches: usize,
    pub top: u32,
    pub second: u32,
    pub ties: usize,
    pub crown: Vec<usize>,
    pub roots: usize,
}

impl NaiveCrown {
    pub fn unique(&self) -> bool {
        self.branches > 0 && self.ties == 1
    }

    pub fn crown_ok(&self) -> bool {
        self.roots > 0 && self.crown.len() > 2 * self.roots
    }

    pub fn margin_ge_2(&self) -> bool {
        self.unique() && self.top - self.second >= 2
    }
}

/// Branch of `v` at level `c`: walk `height(v) - c` steps forward.
pub fn naive_crown(f: &[u32], c: u32) -> NaiveCrown {
    let s = naive_structure(f);
    let n = f.len();
    let root_of = |v: usize| {
        let mut x = v;
        for _ in 0..s.height[v] - c {
            x = f[x] as usize;
        }
        x
    };
    let roots: Vec<usize> = (0..n).filter(|&v| s.height[v] == c).collect();
    let mut heights: Vec<(usize, u32)> = roots
        .iter()
        .map(|&r| {
            let h = (0..n).filter(|&v| s.height[v] >= c && root_of(v) == r).map(|v| s.height[v] - c).max().unwrap();
            (r, h)
        })
        .collect();
    if heights.is_empty() {
        return NaiveCrown { branches: 0, top: 0, second: 0, ties: 0, crown: vec![], roots: 0 };
    }
    heights.sort_by_key(|x| std::cmp::Reverse(x.1));
    let top = heights[0].1;
    let ties = heights.iter().filter(|x| x.1 == top).count();
    let second = heights.get(1).map_or(0, |x| x.1);
    let mut crown = vec![];
    let mut crown_roots = 0;
    if ties == 1 {
        let r = heights[0].0;
        for v in 0..n {
            if s.height[v] > c + second && root_of(v) == r {
                crown.push(v);
                crown_roots += (s.height[v] == c + second + 1) as usize;
            }
        }
    }
    NaiveCrown { branches: roots.len(), top, second, ties, crown, roots: crown_roots }
}

/// The founder-ordering event written straight from its definition:
/// rank founders by `(τ desc, index asc)`, then test each clause on the
/// raw generation lists.
pub fn naive_event(tr: &GwTrace, t: usize, d: usize, r: usize) -> Option<bool> {
    if tr.truncated {
        return None;
    }
    let gens = &tr.generations;
    let mut taus = Vec::new();
    for g in gens {
        if *g.last()? != 0 {
            return None;
        }
        taus.push(g.len() - 1);
    }
    let at = |i: usize, s: usize| gens[i].get(s).copied().unwrap_or(0);
    let mut rank: Vec<usize> = (0..gens.len()).collect();
    for i in 0..rank.len() {
        for j in 0..rank.len() - 1 - i {
            let (a, b) = (rank[j], rank[j + 1]);
            if taus[b] > taus[a] || (taus[b] == taus[a] && b < a) {
                rank.swap(j, j + 1);
            }
        }
    }
    let top = rank[0];
    if at(top, t) == 0 {
        return Some(false);
    }
    if d == 0 {
        if rank.len() < 2 {
            return Some(false);
        }
        let after_t: u64 = gens[top].iter().skip(t).sum();
        let mut ok = after_t <= at(top, t) && taus[rank[1]] == t + 1;
        for &j in &rank[2..] {
            ok &= at(j, t + 1) == 0;
        }
        return Some(ok);
    }
    if rank.len() < d + 1 {
        return Some(false);
    }
    let mut ok = at(top, t + r) == 0;
    for (pos, &j) in rank.iter().enumerate().skip(1) {
        if pos <= d {
            ok &= taus[j] == t + 1;
        } else {
            ok &= taus[j] <= t;
        }
    }
    Some(ok)
}

/// Class counts over every mapping of `[n]`, computed with the naive
/// routines above. Levels are `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTally {
    pub total: u64,
    /// Each per-level field is indexed by level.
    pub unique: Vec<u64>,
    pub ties: Vec<Vec<u64>>,
    pub crown_ok: Vec<u64>,
    pub margin_ge_2: Vec<u64>,
    pub no_branch: Vec<u64>,
    pub lambda_hist: Vec<u64>,
    /// Index: height of the mapping.
    pub height_hist: Vec<u64>,
}

pub fn oracle_tally(n: usize, levels: u32) -> OracleTally {
    let l = levels as usize;
    let mut t = OracleTally {
        total: 0,
        unique: vec![0; l],
        ties: vec![vec![0; n + 1]; l],
        crown_ok: vec![0; l],
        margin_ge_2: vec![0; l],
        no_branch: vec![0; l],
        lambda_hist: vec![0; n + 1],
        height_hist: vec![0; n],
    };
    let mut image = vec![0u32; n];
    for mut x in 0..(n as u64).pow(n as u32) {
        for slot in image.iter_mut() {
            *slot = (x % n as u64) as u32;
            x /= n as u64;
        }
        t.total += 1;
        let s = naive_structure(&image);
        t.lambda_hist[s.cyclic.iter().filter(|&&c| c).count()] += 1;
        t.height_hist[*s.height.iter().max().unwrap() as usize] += 1;
        for c in 0..l {
            let nc = naive_crown(&image, c as u32);
            if nc.branches == 0 {
                t.no_branch[c] += 1;
                continue;
            }
            t.ties[c][nc.ties] += 1;
            t.unique[c] += nc.unique() as u64;
            t.crown_ok[c] += nc.crown_ok() as u64;
            t.margin_ge_2[c] += nc.margin_ge_2() as u64;
        }
    }
    t
}
