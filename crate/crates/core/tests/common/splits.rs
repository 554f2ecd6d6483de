//! Brute-force enumerations of every splitter.

use cgantune::resampling::{Fold, SplitPlan};

pub struct Params {
    pub h: usize,
    pub window: usize,
    pub stride: usize,
    pub k: usize,
    pub block: usize,
    pub gap: usize,
}

pub fn params_for(len: usize) -> Params {
    if len < 100 {
        Params {
            h: 3,
            window: 4,
            stride: 2,
            k: 3,
            block: 3,
            gap: 1,
        }
    } else {
        Params {
            h: 252,
            window: 252,
            stride: 252,
            k: 10,
            block: 252,
            gap: 10,
        }
    }
}

pub fn collect(len: usize, pred: impl Fn(usize) -> bool) -> Vec<usize> {
    (0..len).filter(|&j| pred(j)).collect()
}

pub fn oracle_one_split(len: usize, h: usize) -> Vec<Fold> {
    vec![Fold {
        train: collect(len, |j| j + h < len),
        val: collect(len, |j| j + h >= len),
    }]
}

pub fn oracle_sliding(len: usize, window: usize, stride: usize) -> Vec<Fold> {
    let mut folds = Vec::new();
    let mut start = 0;
    while start + window + stride <= len {
        folds.push(Fold {
            train: collect(len, |j| j >= start && j < start + window),
            val: collect(len, |j| j >= start + window && j < start + window + stride),
        });
        start += stride;
    }
    folds
}

pub fn oracle_kfold(len: usize, k: usize) -> Vec<Fold> {
    // deal positions one at a time into fold sizes, round robin
    let mut sizes = vec![0; k];
    for j in 0..len {
        sizes[j % k] += 1;
    }
    let mut owner = Vec::with_capacity(len);
    for (f, &s) in sizes.iter().enumerate() {
        owner.extend(std::iter::repeat_n(f, s));
    }
    (0..k)
        .map(|f| Fold {
            train: collect(len, |j| owner[j] != f),
            val: collect(len, |j| owner[j] == f),
        })
        .collect()
}

pub fn block_owner(len: usize, block: usize) -> Vec<usize> {
    let count = len / block;
    (0..len).map(|j| (j / block).min(count - 1)).collect()
}

pub fn oracle_block(len: usize, block: usize) -> Vec<Fold> {
    let owner = block_owner(len, block);
    (0..len / block)
        .map(|f| Fold {
            train: collect(len, |j| owner[j] != f),
            val: collect(len, |j| owner[j] == f),
        })
        .collect()
}

pub fn oracle_hv_block(len: usize, block: usize, gap: usize) -> Vec<Fold> {
    let owner = block_owner(len, block);
    (0..len / block)
        .map(|f| {
            let val = collect(len, |j| owner[j] == f);
            let (lo, hi) = (val[0], *val.last().unwrap());
            Fold {
                train: collect(len, |j| j + gap < lo || j > hi + gap),
                val,
            }
        })
        .collect()
}

pub fn assert_disjoint(plan: &SplitPlan) {
    for f in &plan.folds {
        assert!(!f.val.is_empty());
        let mut seen = vec![false; plan.len];
        for &i in &f.train {
            assert!(i < plan.len);
            seen[i] = true;
        }
        for &i in &f.val {
            assert!(i < plan.len);
            assert!(!seen[i], "{}: position {i} in train and val", plan.scheme);
        }
    }
}

pub fn assert_val_covers_once(plan: &SplitPlan) {
    let mut count = vec![0; plan.len];
    for f in &plan.folds {
        for &i in &f.val {
            count[i] += 1;
        }
    }
    assert!(count.iter().all(|&c| c == 1), "{}", plan.scheme);
}
