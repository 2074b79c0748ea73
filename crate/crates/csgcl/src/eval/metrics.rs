//! Classification, clustering, and ranking metrics.

use std::collections::BTreeMap;

/// Fraction of positions where the two label vectors agree.
pub fn accuracy(truth: &[usize], predicted: &[usize]) -> f64 {
    assert_eq!(truth.len(), predicted.len());
    assert!(!truth.is_empty());
    let hits = truth
        .iter()
        .zip(predicted)
        .filter(|(a, b)| a == b)
        .count();
    hits as f64 / truth.len() as f64
}

/// Micro- and macro-averaged F1.
///
/// Micro aggregates true/false positives over all classes (for single-label
/// data this equals accuracy). Macro averages per-class F1 over the classes
/// occurring in either vector, scoring 0 for a class never predicted
/// correctly.
pub fn f1_scores(truth: &[usize], predicted: &[usize]) -> (f64, f64) {
    assert_eq!(truth.len(), predicted.len());
    assert!(!truth.is_empty());
    let num_classes = truth
        .iter()
        .chain(predicted)
        .copied()
        .max()
        .expect("non-empty")
        + 1;
    let mut tp = vec![0usize; num_classes];
    let mut fp = vec![0usize; num_classes];
    let mut fn_ = vec![0usize; num_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t == p {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let tp_sum: usize = tp.iter().sum();
    let fp_sum: usize = fp.iter().sum();
    let fn_sum: usize = fn_.iter().sum();
    let micro = f1(tp_sum as f64, fp_sum as f64, fn_sum as f64);

    let mut macro_sum = 0.0;
    let mut present = 0usize;
    for c in 0..num_classes {
        if tp[c] + fp[c] + fn_[c] == 0 {
            continue; // class absent from both vectors
        }
        macro_sum += f1(tp[c] as f64, fp[c] as f64, fn_[c] as f64);
        present += 1;
    }
    (micro, macro_sum / present as f64)
}

fn f1(tp: f64, fp: f64, fn_: f64) -> f64 {
    if tp == 0.0 {
        return 0.0;
    }
    2.0 * tp / (2.0 * tp + fp + fn_)
}

/// Normalized mutual information between two labelings, normalized by the
/// arithmetic mean of the entropies. Two trivial (zero-entropy) labelings
/// score 1.
pub fn normalized_mutual_information(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(!a.is_empty());
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut count_a: BTreeMap<usize, usize> = BTreeMap::new();
    let mut count_b: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *count_a.entry(x).or_default() += 1;
        *count_b.entry(y).or_default() += 1;
    }
    let entropy = |counts: &BTreeMap<usize, usize>| -> f64 {
        counts
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let h_a = entropy(&count_a);
    let h_b = entropy(&count_b);
    let normalizer = 0.5 * (h_a + h_b);
    if normalizer == 0.0 {
        return 1.0; // both labelings trivial, hence identical partitions
    }
    let mut mi = 0.0;
    for (&(x, y), &c) in &joint {
        let p_xy = c as f64 / n;
        let p_x = count_a[&x] as f64 / n;
        let p_y = count_b[&y] as f64 / n;
        mi += p_xy * (p_xy / (p_x * p_y)).ln();
    }
    (mi / normalizer).clamp(0.0, 1.0)
}

/// Rank-based AUC over all positive-negative score pairs, ties counted
/// half. Exact, no curve interpolation.
pub fn roc_auc(positive: &[f64], negative: &[f64]) -> f64 {
    assert!(!positive.is_empty() && !negative.is_empty());
    let mut all: Vec<(f64, bool)> = positive
        .iter()
        .map(|&s| (s, true))
        .chain(negative.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Midranks over tied scores, 1-based.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0; // mean of ranks i+1..=j
        rank_sum_pos += all[i..j].iter().filter(|(_, pos)| *pos).count() as f64 * midrank;
        i = j;
    }
    let p = positive.len() as f64;
    let n = negative.len() as f64;
    (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n)
}

/// Average precision over the list ranked by descending score; ties break
/// deterministically by original position (positives listed first).
pub fn average_precision(positive: &[f64], negative: &[f64]) -> f64 {
    assert!(!positive.is_empty() && !negative.is_empty());
    let mut all: Vec<(f64, bool)> = positive
        .iter()
        .map(|&s| (s, true))
        .chain(negative.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut hits = 0usize;
    let mut sum_precision = 0.0;
    for (k, (_, pos)) in all.iter().enumerate() {
        if *pos {
            hits += 1;
            sum_precision += hits as f64 / (k + 1) as f64;
        }
    }
    sum_precision / positive.len() as f64
}
