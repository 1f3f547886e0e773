//! Exhaustive enumeration of all `n^n` mappings for small `n`.

use std::ops::Range;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::mapping::{classify, CrownAnalyzer, Decomposition};

/// Largest `n` enumerated without an explicit override.
pub const ENUMERATION_GUARD: usize = 8;

/// Branch levels tallied by [`enumerate_all`].
pub const DEFAULT_LEVELS: [u32; 3] = [0, 1, 2];

/// Exact class counts at one branch level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelCounts {
    pub c: u32,
    pub unique_highest: u64,
    /// Index `k` counts mappings with exactly `k` highest branches.
    pub exactly_k_highest: Vec<u64>,
    pub crown_ok: u64,
    pub margin_ge_2: u64,
    /// Mappings without any vertex at height `c`.
    pub no_branch: u64,
}

impl LevelCounts {
    fn new(c: u32, n: usize) -> Self {
        LevelCounts {
            c,
            unique_highest: 0,
            exactly_k_highest: vec![0; n + 1],
            crown_ok: 0,
            margin_ge_2: 0,
            no_branch: 0,
        }
    }

    fn merge(&mut self, o: &LevelCounts) {
        self.unique_highest += o.unique_highest;
        for (a, b) in self.exactly_k_highest.iter_mut().zip(&o.exactly_k_highest) {
            *a += b;
        }
        self.crown_ok += o.crown_ok;
        self.margin_ge_2 += o.margin_ge_2;
        self.no_branch += o.no_branch;
    }

    pub fn exactly_k(&self, k: usize) -> u64 {
        self.exactly_k_highest.get(k).copied().unwrap_or(0)
    }
}

/// Exact tallies over a set of mappings of `[n]` (all of them, after a full run).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCount {
    pub n: usize,
    pub total: u64,
    pub levels: Vec<LevelCounts>,
    /// Index `λ`.
    pub lambda_hist: Vec<u64>,
    /// `[λ][max height]`.
    pub lambda_height: Vec<Vec<u64>>,
}

impl ExactCount {
    pub fn empty(n: usize, levels: &[u32]) -> Self {
        ExactCount {
            n,
            total: 0,
            levels: levels.iter().map(|&c| LevelCounts::new(c, n)).collect(),
            lambda_hist: vec![0; n + 1],
            lambda_height: vec![vec![0; n.max(1)]; n + 1],
        }
    }

    pub fn level(&self, c: u32) -> Option<&LevelCounts> {
        self.levels.iter().find(|l| l.c == c)
    }

    /// Tree-level counts.
    pub fn trees(&self) -> &LevelCounts {
        self.level(0).expect("level 0 is always tallied")
    }

    /// Number of mappings whose height is at most `h`.
    pub fn height_at_most(&self, h: usize) -> u64 {
        self.lambda_height.iter().map(|row| row.iter().take(h + 1).sum::<u64>()).sum()
    }

    /// Associative merge of partial counts for the same `n` and levels.
    pub fn merge(mut self, o: &ExactCount) -> ExactCount {
        assert_eq!(self.n, o.n);
        self.total += o.total;
        for (a, b) in self.levels.iter_mut().zip(&o.levels) {
            assert_eq!(a.c, b.c);
            a.merge(b);
        }
        for (a, b) in self.lambda_hist.iter_mut().zip(&o.lambda_hist) {
            *a += b;
        }
        for (ra, rb) in self.lambda_height.iter_mut().zip(&o.lambda_height) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += b;
            }
        }
        self
    }

    /// JSON with every exact integer written as a decimal string.
    pub fn to_json(&self) -> Value {
        fn s(v: u64) -> Value {
            Value::String(v.to_string())
        }
        let levels: Vec<Value> = self
            .levels
            .iter()
            .map(|l| {
                json!({
                    "c": l.c,
                    "unique_highest": s(l.unique_highest),
                    "exactly_k_highest": l.exactly_k_highest.iter()
                        .enumerate()
                        .filter(|&(k, _)| k >= 1)
                        .map(|(k, &v)| (k.to_string(), s(v)))
                        .collect::<serde_json::Map<_, _>>(),
                    "crown_ok": s(l.crown_ok),
                    "margin_ge_2": s(l.margin_ge_2),
                    "no_branch": s(l.no_branch),
                })
            })
            .collect();
        json!({
            "n": self.n,
            "total": s(self.total),
            "levels": levels,
            "lambda_hist": self.lambda_hist.iter()
                .enumerate()
                .skip(1)
                .map(|(k, &v)| (k.to_string(), s(v)))
                .collect::<serde_json::Map<_, _>>(),
            "lambda_height": self.lambda_height.iter()
                .map(|row| row.iter().map(|&v| s(v)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

/// Writes the base-`n` digits of `index` (least significant first) into `image`.
fn decode(index: u64, n: usize, image: &mut [u32]) {
    let mut x = index;
    for slot in image.iter_mut() {
        *slot = (x % n as u64) as u32;
        x /= n as u64;
    }
}

/// Advances `image` to the next mapping in odometer order.
fn advance(image: &mut [u32], n: u32) {
    for slot in image.iter_mut() {
        *slot += 1;
        if *slot < n {
            return;
        }
        *slot = 0;
    }
}

fn total_mappings(n: usize) -> u64 {
    (n as u64).pow(n as u32)
}

/// Tallies the mappings with odometer indices in `range`.
pub fn enumerate_range(n: usize, levels: &[u32], range: Range<u64>) -> ExactCount {
    let mut acc = ExactCount::empty(n, levels);
    if range.is_empty() {
        return acc;
    }
    let mut image = vec![0u32; n];
    decode(range.start, n, &mut image);
    let mut d = Decomposition::default();
    let mut analyzer = CrownAnalyzer::default();
    for _ in range {
        d.rebuild(&image);
        acc.total += 1;
        let lambda = d.lambda();
        acc.lambda_hist[lambda] += 1;
        acc.lambda_height[lambda][d.max_height() as usize] += 1;
        for lv in acc.levels.iter_mut() {
            let cr = analyzer.report(&d, lv.c);
            if !cr.has_branches() {
                lv.no_branch += 1;
                continue;
            }
            let flags = classify(&cr);
            lv.exactly_k_highest[flags.tie_count] += 1;
            lv.unique_highest += flags.unique_highest as u64;
            lv.crown_ok += flags.crown_ok as u64;
            lv.margin_ge_2 += flags.margin_ge_2 as u64;
        }
        advance(&mut image, n as u32);
    }
    acc
}

/// Enumerates every mapping of `[n]` and tallies the default levels.
///
/// `n` above [`ENUMERATION_GUARD`] needs `force`.
pub fn enumerate_all(n: usize, force: bool) -> Result<ExactCount> {
    enumerate_levels(n, &DEFAULT_LEVELS, force)
}

pub fn enumerate_levels(n: usize, levels: &[u32], force: bool) -> Result<ExactCount> {
    if n == 0 {
        return Err(Error::InvalidSize("n must be positive".into()));
    }
    if n > ENUMERATION_GUARD && !force {
        return Err(Error::Budget(format!("enumerating {n}^{n} mappings exceeds the n <= {ENUMERATION_GUARD} guard")));
    }
    let total = total_mappings(n);
    let chunk = 1u64 << 16;
    let chunks = total.div_ceil(chunk);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|i| enumerate_range(n, levels, i * chunk..((i + 1) * chunk).min(total)))
        .reduce(|| ExactCount::empty(n, levels), |a, b| a.merge(&b));
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex() {
        let c = enumerate_all(1, false).unwrap();
        assert_eq!(c.total, 1);
        assert_eq!(c.trees().unique_highest, 1);
    }

    #[test]
    fn two_vertices_by_hand() {
        // [1,1] and [2,2] are constant maps (one tree of height 1);
        // [1,2] and [2,1] are permutations (two trees of height 0).
        let c = enumerate_all(2, false).unwrap();
        assert_eq!(c.total, 4);
        assert_eq!(c.trees().unique_highest, 2);
        assert_eq!(c.trees().exactly_k(2), 2);
        assert_eq!(c.lambda_hist, vec![0, 2, 2]);
        // level 1 exists only for the constant maps
        let l1 = c.level(1).unwrap();
        assert_eq!(l1.no_branch, 2);
        assert_eq!(l1.unique_highest, 2);
    }

    #[test]
    fn guard_rejects_large_n() {
        assert!(matches!(enumerate_all(9, false), Err(Error::Budget(_))));
        assert!(matches!(enumerate_all(0, false), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn ranges_merge_to_the_whole() {
        let n = 5;
        let whole = enumerate_range(n, &DEFAULT_LEVELS, 0..3125);
        let parts = [0..1000, 1000..1001, 1001..3125]
            .into_iter()
            .map(|r| enumerate_range(n, &DEFAULT_LEVELS, r))
            .fold(ExactCount::empty(n, &DEFAULT_LEVELS), |a, b| a.merge(&b));
        assert_eq!(whole, parts);
        assert_eq!(whole, enumerate_all(n, false).unwrap());
    }

    #[test]
    fn class_counts_partition_total() {
        for n in 1..=6 {
            let c = enumerate_all(n, false).unwrap();
            assert_eq!(c.lambda_hist.iter().sum::<u64>(), c.total);
            for lv in &c.levels {
                let ties: u64 = lv.exactly_k_highest.iter().sum();
                assert_eq!(ties + lv.no_branch, c.total, "n={n} c={}", lv.c);
                assert_eq!(lv.exactly_k(1), lv.unique_highest);
                assert!(lv.crown_ok <= lv.margin_ge_2);
            }
            assert_eq!(c.height_at_most(n - 1), c.total);
        }
    }

    #[test]
    fn json_uses_decimal_strings() {
        let v = enumerate_all(3, false).unwrap().to_json();
        assert_eq!(v["total"], "27");
        assert_eq!(v["lambda_hist"]["3"], "6");
    }
}
