use std::collections::BTreeMap;

use proptest::prelude::*;

use ranklabel::diversity::UNKNOWN_CATEGORY;
use ranklabel::insight::{ingredients, recipe, spearman, stability_slope};
use ranklabel::scoring::rank;
use ranklabel::{diversity_report, Column, Dataset, Normalization, Ranking, ScoringSpec};

// Integer-valued numeric columns keep every weighted sum exact, so order
// comparisons are not at the mercy of rounding.
fn int_table(cols: usize) -> impl Strategy<Value = Vec<Vec<i32>>> {
    (2usize..40).prop_flat_map(move |n| prop::collection::vec(prop::collection::vec(-50i32..50, n), cols))
}

fn dataset(cols: &[Vec<i32>], groups: Option<&[Option<String>]>) -> Dataset {
    let mut columns: Vec<Column> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| Column::numeric(format!("a{i}"), c.iter().map(|&v| Some(v as f64)).collect()))
        .collect();
    if let Some(g) = groups {
        columns.push(Column::categorical("g", g.to_vec()));
    }
    Dataset::from_columns(columns).unwrap()
}

fn weights() -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(-4i32..=4, 3).prop_filter("some nonzero", |w| w.iter().any(|&x| x != 0))
}

fn spec(w: &[i32], scale: f64, mode: Normalization) -> ScoringSpec {
    ScoringSpec::new(
        w.iter().enumerate().map(|(i, &x)| (format!("a{i}"), x as f64 * scale)),
        mode,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn positive_weight_scaling_keeps_order(cols in int_table(3), w in weights(), e in -6i32..6, k in 1usize..50) {
        let ds = dataset(&cols, None);
        let base = Ranking::build(&ds, &spec(&w, 1.0, Normalization::None), k).unwrap();
        let scaled = Ranking::build(&ds, &spec(&w, 2f64.powi(e), Normalization::None), k).unwrap();
        prop_assert_eq!(base.order, scaled.order);
    }

    #[test]
    fn increasing_affine_scores_keep_order(scores in prop::collection::vec(-1000i32..1000, 1..80), a in 1i32..20, b in -100i32..100) {
        let raw: Vec<(usize, f64)> = scores.iter().enumerate().map(|(i, &s)| (i, s as f64)).collect();
        let mapped: Vec<(usize, f64)> = raw.iter().map(|&(i, s)| (i, a as f64 * s + b as f64)).collect();
        prop_assert_eq!(rank(&raw, 10).unwrap().order, rank(&mapped, 10).unwrap().order);
    }

    #[test]
    fn build_is_deterministic(cols in int_table(3), w in weights(), mode in prop_oneof![Just(Normalization::None), Just(Normalization::Minmax), Just(Normalization::Zscore)]) {
        let ds = dataset(&cols, None);
        let s = spec(&w, 1.0, mode);
        prop_assert_eq!(Ranking::build(&ds, &s, 5).unwrap(), Ranking::build(&ds, &s, 5).unwrap());
    }

    #[test]
    fn single_attribute_orders_descending(values in prop::collection::hash_set(-10_000i32..10_000, 2..60), w in 1i32..5) {
        let values: Vec<i32> = values.into_iter().collect();
        let ds = dataset(std::slice::from_ref(&values), None);
        let r = Ranking::build(&ds, &spec(&[w], 1.0, Normalization::None), 3).unwrap();
        let mut expected: Vec<usize> = (0..values.len()).collect();
        expected.sort_by_key(|&i| std::cmp::Reverse(values[i]));
        prop_assert_eq!(r.order, expected);
    }

    #[test]
    fn score_column_is_its_own_best_ingredient(cols in int_table(2)) {
        // rank by a0 alone; a0's importance must be exactly 1 unless constant
        let ds = dataset(&cols, None);
        prop_assume!(cols[0].iter().any(|&v| v != cols[0][0]));
        let r = Ranking::build(&ds, &spec(&[1], 1.0, Normalization::None), 3).unwrap();
        let rep = ingredients(&ds, &r, 0.5).unwrap();
        let a0 = rep.entries.iter().find(|e| e.attribute == "a0").unwrap();
        prop_assert_eq!(a0.importance, 1.0);
    }

    #[test]
    fn spearman_increasing_transform(x in prop::collection::vec(-100i32..100, 3..60), y in prop::collection::vec(-100i32..100, 3..60)) {
        let n = x.len().min(y.len());
        let x: Vec<f64> = x[..n].iter().map(|&v| v as f64).collect();
        let y: Vec<f64> = y[..n].iter().map(|&v| v as f64).collect();
        if let Ok(r) = spearman(&x, &y) {
            let tx: Vec<f64> = x.iter().map(|v| (v / 10.0).exp()).collect();
            let ty: Vec<f64> = y.iter().map(|v| v * v * v).collect();
            prop_assert!((spearman(&tx, &ty).unwrap() - r).abs() <= 1e-12);
        }
    }

    #[test]
    fn slope_ignores_positive_affine_maps(scores in prop::collection::vec(-1.0e3..1.0e3f64, 2..100), a in 0.01..100.0f64, b in -1.0e3..1.0e3f64) {
        let mut scores = scores;
        scores.sort_by(|x, y| y.total_cmp(x));
        let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(hi - lo > 1e-6);
        let base = stability_slope(&scores, lo, hi).unwrap();
        let mapped: Vec<f64> = scores.iter().map(|s| a * s + b).collect();
        let moved = stability_slope(&mapped, a * lo + b, a * hi + b).unwrap();
        prop_assert!((base - moved).abs() <= 1e-9, "{} vs {}", base, moved);
    }

    #[test]
    fn recipe_ignores_attribute_order(cols in int_table(3), w in weights(), perm in Just([2usize, 0, 1])) {
        // same weights declared through a different column layout
        let ds = dataset(&cols, None);
        let permuted: Vec<Vec<i32>> = perm.iter().map(|&i| cols[i].clone()).collect();
        let ds2 = dataset(&permuted, None);
        let w2: Vec<i32> = perm.iter().map(|&i| w[i]).collect();
        let r1 = recipe(&ds, &Ranking::build(&ds, &spec(&w, 1.0, Normalization::Minmax), 4).unwrap()).unwrap();
        let r2 = recipe(&ds2, &Ranking::build(&ds2, &spec(&w2, 1.0, Normalization::Minmax), 4).unwrap()).unwrap();
        let shares = |r: &ranklabel::RecipeReport, names: &dyn Fn(&str) -> String| -> BTreeMap<String, f64> {
            r.entries.iter().map(|e| (names(&e.attribute), e.share)).collect()
        };
        let ident = |s: &str| s.to_string();
        let back = |s: &str| format!("a{}", perm[s[1..].parse::<usize>().unwrap()]);
        prop_assert_eq!(shares(&r1, &ident), shares(&r2, &back));
        let total: f64 = r1.entries.iter().map(|e| e.share).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn diversity_proportions(cols in int_table(1), cats in prop::collection::vec(prop_oneof![Just(None), Just(Some("x")), Just(Some("y")), Just(Some("z"))], 40), k in 1usize..50) {
        let n = cols[0].len();
        let groups: Vec<Option<String>> = cats[..n].iter().map(|c| c.map(String::from)).collect();
        let ds = dataset(&cols, Some(&groups));
        let r = Ranking::build(&ds, &spec(&[1], 1.0, Normalization::None), k).unwrap();
        let d = diversity_report(&r, &ds, "g").unwrap();
        for map in [&d.topk, &d.overall] {
            prop_assert!((map.values().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(map.values().all(|&v| v > 0.0));
        }
        let unknown = groups.iter().filter(|g| g.is_none()).count();
        prop_assert_eq!(d.overall.get(UNKNOWN_CATEGORY).copied().unwrap_or(0.0), unknown as f64 / n as f64);
        if r.k == n {
            prop_assert_eq!(&d.topk, &d.overall);
        }
    }

    #[test]
    fn diversity_ignores_row_order(cols in int_table(1), cats in prop::collection::vec(prop_oneof![Just(None), Just(Some("x")), Just(Some("y"))], 40), k in 1usize..50, seed in any::<u64>()) {
        let n = cols[0].len();
        let groups: Vec<Option<String>> = cats[..n].iter().map(|c| c.map(String::from)).collect();
        // distinct scores so the permuted dataset ranks the same items
        let values: Vec<i32> = (0..n as i32).map(|i| cols[0][i as usize] * 1000 + i).collect();
        let ds = dataset(std::slice::from_ref(&values), Some(&groups));

        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let pv: Vec<i32> = perm.iter().map(|&i| values[i]).collect();
        let pg: Vec<Option<String>> = perm.iter().map(|&i| groups[i].clone()).collect();
        let ds2 = dataset(&[pv], Some(&pg));

        let s = spec(&[1], 1.0, Normalization::None);
        let d1 = diversity_report(&Ranking::build(&ds, &s, k).unwrap(), &ds, "g").unwrap();
        let d2 = diversity_report(&Ranking::build(&ds2, &s, k).unwrap(), &ds2, "g").unwrap();
        prop_assert_eq!(d1, d2);
    }
}

#[test]
fn flipping_weight_signs_reverses_order() {
    let ds = dataset(&[vec![5, 1, 9, 3, 7]], None);
    let up = Ranking::build(&ds, &spec(&[1], 1.0, Normalization::None), 5).unwrap();
    let down = Ranking::build(&ds, &spec(&[-1], 1.0, Normalization::None), 5).unwrap();
    let mut rev = down.order.clone();
    rev.reverse();
    assert_eq!(up.order, rev);
}
