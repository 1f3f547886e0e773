mod common;

use common::{naive_crown, naive_structure};
use highest_trees::experiments::{count_events, Event};
use highest_trees::mapping::sample_into;
use highest_trees::stats::chi_square;
use highest_trees::stream::substream;
use highest_trees::{classify, crown_report, decompose, sample_uniform, Decomposition, Mapping};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn mapping_strategy(max_n: usize) -> impl Strategy<Value = Vec<u32>> {
    (1..=max_n).prop_flat_map(|n| proptest::collection::vec(0..n as u32, n))
}

fn check_against_oracle(image: &[u32]) {
    let m = Mapping::from_zero_based(image.to_vec()).unwrap();
    let d = decompose(&m);
    let naive = naive_structure(image);
    assert_eq!(d.cyclic(), &naive.cyclic[..]);
    assert_eq!(d.heights(), &naive.height[..]);
    assert_eq!(d.lambda(), naive.cyclic.iter().filter(|&&c| c).count());
    for c in 0..=3 {
        let cr = crown_report(&d, c);
        let nc = naive_crown(image, c);
        assert_eq!(cr.branch_count, nc.branches, "c={c} {image:?}");
        if nc.branches == 0 {
            continue;
        }
        assert_eq!(cr.top_height, nc.top);
        assert_eq!(cr.tie_count, nc.ties);
        assert_eq!(cr.crown_vertices, nc.crown);
        assert_eq!(cr.crown_roots, nc.roots);
        if nc.ties == 1 {
            assert_eq!(cr.second_height, nc.second);
        }
        let fl = classify(&cr);
        assert_eq!(fl.unique_highest, nc.unique());
        assert_eq!(fl.crown_ok, nc.crown_ok());
        assert_eq!(fl.margin_ge_2, nc.margin_ge_2());
    }
}

proptest! {
    #[test]
    fn decomposition_matches_oracle(image in mapping_strategy(40)) {
        check_against_oracle(&image);
    }

    #[test]
    fn invariants_hold(image in mapping_strategy(200)) {
        let m = Mapping::from_zero_based(image.clone()).unwrap();
        let d = decompose(&m);
        for (v, &fv) in image.iter().enumerate() {
            let fv = fv as usize;
            if d.is_cyclic(v) {
                prop_assert_eq!(d.height(v), 0);
                prop_assert_eq!(d.tree_root(v), v);
                prop_assert!(d.is_cyclic(fv));
            } else {
                prop_assert_eq!(d.height(v), d.height(fv) + 1);
                prop_assert_eq!(d.tree_root(v), d.tree_root(fv));
            }
        }
        let trees = d.tree_heights();
        prop_assert_eq!(trees.len(), d.lambda());
        prop_assert_eq!(trees.iter().map(|t| t.1).max(), Some(d.max_height()));
    }

    #[test]
    fn text_format_round_trips(image in mapping_strategy(60)) {
        let m = Mapping::from_zero_based(image).unwrap();
        let back: Mapping = m.to_string().parse().unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn relabeling_preserves_classification(image in mapping_strategy(30), seed in any::<u64>()) {
        // conjugating by a permutation relabels vertices and nothing else
        let n = image.len();
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(&mut substream(seed, 0));
        let mut conj = vec![0u32; n];
        for v in 0..n {
            conj[perm[v] as usize] = perm[image[v] as usize];
        }
        let a = decompose(&Mapping::from_zero_based(image).unwrap());
        let b = decompose(&Mapping::from_zero_based(conj).unwrap());
        prop_assert_eq!(a.lambda(), b.lambda());
        for c in 0..3 {
            let (ra, rb) = (crown_report(&a, c), crown_report(&b, c));
            prop_assert_eq!(classify(&ra), classify(&rb));
            let mapped: Vec<usize> = {
                let mut v: Vec<usize> = ra.crown_vertices.iter().map(|&x| perm[x] as usize).collect();
                v.sort_unstable();
                v
            };
            prop_assert_eq!(mapped, rb.crown_vertices);
        }
    }
}

#[test]
fn exhaustive_small_sizes_match_oracle() {
    for n in 1..=5u32 {
        let total = n.pow(n);
        let mut image = vec![0u32; n as usize];
        for mut x in 0..total {
            for slot in image.iter_mut() {
                *slot = x % n;
                x /= n;
            }
            check_against_oracle(&image);
        }
    }
}

#[test]
fn million_vertex_mapping_decomposes() {
    let m = sample_uniform(1_000_000, &mut substream(77, 0)).unwrap();
    let d = decompose(&m);
    // expected number of cyclic vertices is about sqrt(pi n / 2) = 1253
    assert!(d.lambda() > 100 && d.lambda() < 10_000, "lambda = {}", d.lambda());
    assert!(d.max_height() < 20_000);
}

#[test]
fn sampler_is_uniform_on_two_points() {
    let mut counts = [0u64; 4];
    let mut buf = Vec::new();
    for i in 0..200_000 {
        sample_into(2, &mut substream(5, i), &mut buf).unwrap();
        counts[(buf[0] * 2 + buf[1]) as usize] += 1;
    }
    let (_, _, p) = chi_square(&counts, &[0.25; 4], 5.0);
    assert!(p > 1e-3, "{counts:?} p = {p}");
}

#[test]
fn sampler_marginals_are_uniform() {
    let n = 7;
    let mut counts = vec![0u64; n];
    let mut buf = Vec::new();
    for i in 0..50_000 {
        sample_into(n, &mut substream(6, i), &mut buf).unwrap();
        for &v in &buf {
            counts[v as usize] += 1;
        }
    }
    let (_, _, p) = chi_square(&counts, &vec![1.0 / n as f64; n], 5.0);
    assert!(p > 1e-3, "{counts:?} p = {p}");
}

#[test]
fn aggregation_ignores_sample_order() {
    let (n, samples, seed) = (60, 3000u64, 12);
    let events = [Event::UniqueHighest, Event::TwoHighest, Event::BranchCrownOk(1)];
    let mut order: Vec<u64> = (0..samples).collect();
    order.shuffle(&mut substream(99, 0));
    let mut hits = [0u64; 3];
    let mut buf = Vec::new();
    let mut d = Decomposition::default();
    for i in order {
        sample_into(n, &mut substream(seed, i), &mut buf).unwrap();
        d.rebuild(&buf);
        for (h, ev) in hits.iter_mut().zip(&events) {
            *h += ev.holds(&classify(&crown_report(&d, ev.level()))) as u64;
        }
    }
    assert_eq!(count_events(n, samples, seed, &events).unwrap(), hits.to_vec());
}
