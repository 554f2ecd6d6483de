use super::{stationary_bootstrap, Fold, SplitPlan};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

fn range(a: usize, b: usize) -> Vec<usize> {
    (a..b).collect()
}

/// Validation equals training: the whole range, once.
pub fn split_naive(len: usize) -> Result<SplitPlan> {
    if len == 0 {
        return Err(Error::param("empty series"));
    }
    let all = range(0, len);
    Ok(SplitPlan::new(
        "naive",
        &[],
        len,
        vec![Fold {
            train: all.clone(),
            val: all,
        }],
    ))
}

/// Train on `[0, T-h)`, validate on the final `h` positions.
pub fn split_one_split(len: usize, h: usize) -> Result<SplitPlan> {
    if h == 0 || h >= len {
        return Err(Error::param(format!("holdout {h} must lie in [1, {len})")));
    }
    Ok(SplitPlan::new(
        "one_split",
        &[("h", h as f64)],
        len,
        vec![Fold {
            train: range(0, len - h),
            val: range(len - h, len),
        }],
    ))
}

/// Fold `i` trains on `[i*stride, i*stride + window)` and validates on the
/// next `stride` positions. `floor((T - window) / stride)` folds; any tail
/// left over is unused.
pub fn split_sliding(len: usize, window: usize, stride: usize) -> Result<SplitPlan> {
    if window == 0 || stride == 0 || window >= len {
        return Err(Error::param(format!(
            "sliding window {window} / stride {stride} on {len} points"
        )));
    }
    let count = (len - window) / stride;
    if count == 0 {
        return Err(Error::param(format!(
            "sliding window {window} + stride {stride} exceeds {len} points"
        )));
    }
    let folds = (0..count)
        .map(|i| {
            let start = i * stride;
            Fold {
                train: range(start, start + window),
                val: range(start + window, start + window + stride),
            }
        })
        .collect();
    Ok(SplitPlan::new(
        "sliding",
        &[("window", window as f64), ("stride", stride as f64)],
        len,
        folds,
    ))
}

/// `k` contiguous folds; the first `T mod k` are one position longer.
pub fn split_kfold(len: usize, k: usize) -> Result<SplitPlan> {
    if k < 2 || k > len {
        return Err(Error::param(format!("k = {k} folds on {len} points")));
    }
    let (base, extra) = (len / k, len % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let end = start + base + usize::from(i < extra);
        folds.push(Fold {
            train: (0..start).chain(end..len).collect(),
            val: range(start, end),
        });
        start = end;
    }
    Ok(SplitPlan::new("kfold", &[("k", k as f64)], len, folds))
}

/// `(start, end)` of each contiguous block; the last block absorbs the
/// remainder.
fn blocks(len: usize, block: usize) -> Result<Vec<(usize, usize)>> {
    if block == 0 || block > len {
        return Err(Error::param(format!("block {block} on {len} points")));
    }
    let count = len / block;
    if count < 2 {
        return Err(Error::param(format!(
            "block {block} leaves no training data on {len} points"
        )));
    }
    Ok((0..count)
        .map(|i| (i * block, if i + 1 == count { len } else { (i + 1) * block }))
        .collect())
}

/// Each contiguous block validates once; the rest trains.
pub fn split_block(len: usize, block: usize) -> Result<SplitPlan> {
    let folds = blocks(len, block)?
        .into_iter()
        .map(|(a, b)| Fold {
            train: (0..a).chain(b..len).collect(),
            val: range(a, b),
        })
        .collect();
    Ok(SplitPlan::new("block", &[("block", block as f64)], len, folds))
}

/// Block cross-validation with `gap` positions dropped from training on
/// each side of the validation block.
pub fn split_hv_block(len: usize, block: usize, gap: usize) -> Result<SplitPlan> {
    let mut folds = Vec::new();
    for (a, b) in blocks(len, block)? {
        let train: Vec<usize> = (0..a.saturating_sub(gap)).chain((b + gap).min(len)..len).collect();
        if train.is_empty() {
            return Err(Error::param(format!("gap {gap} leaves no training data")));
        }
        folds.push(Fold {
            train,
            val: range(a, b),
        });
    }
    Ok(SplitPlan::new(
        "hv_block",
        &[("block", block as f64), ("gap", gap as f64)],
        len,
        folds,
    ))
}

/// `b` stationary-bootstrap folds: training positions are the resampled
/// indices (with repeats), validation the positions never drawn.
pub fn split_stationary_bootstrap(len: usize, b: usize, expected_block: f64, seed: u64) -> Result<SplitPlan> {
    if b == 0 {
        return Err(Error::param("at least one bootstrap fold"));
    }
    let mut folds = Vec::with_capacity(b);
    let mut draw = 0u64;
    while folds.len() < b {
        let sample = stationary_bootstrap(len, expected_block, derive_seed(seed, "stat-boot", draw))?;
        draw += 1;
        let mut seen = vec![false; len];
        for &i in &sample.indices {
            seen[i] = true;
        }
        let val: Vec<usize> = (0..len).filter(|&i| !seen[i]).collect();
        if val.is_empty() {
            if draw > 1000 * b as u64 {
                return Err(Error::param("bootstrap never leaves positions out of bag"));
            }
            continue;
        }
        folds.push(Fold {
            train: sample.indices,
            val,
        });
    }
    Ok(SplitPlan::new(
        "stat_boot",
        &[("b", b as f64), ("block", expected_block)],
        len,
        folds,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_split_arithmetic() {
        let plan = split_one_split(10, 4).unwrap();
        assert_eq!(plan.folds[0].train, (0..6).collect::<Vec<_>>());
        assert_eq!(plan.folds[0].val, (6..10).collect::<Vec<_>>());
        assert!(split_one_split(10, 10).is_err());
        assert!(split_one_split(10, 0).is_err());
    }

    #[test]
    fn block_folds_of_252() {
        let plan = split_block(1008, 252).unwrap();
        assert_eq!(plan.fold_count(), 4);
        for f in &plan.folds {
            assert_eq!(f.val.len(), 252);
            assert_eq!(f.train.len(), 756);
        }
        assert!(split_block(100, 101).is_err());
    }

    #[test]
    fn hv_block_gaps() {
        let plan = split_hv_block(1008, 252, 10).unwrap();
        let lens: Vec<usize> = plan.folds.iter().map(|f| f.train.len()).collect();
        assert_eq!(lens, vec![746, 736, 736, 746]);
    }

    #[test]
    fn sliding_drops_tail() {
        let plan = split_sliding(1000, 252, 252).unwrap();
        assert_eq!(plan.fold_count(), 2);
        assert_eq!(plan.folds[1].train, (252..504).collect::<Vec<_>>());
        assert_eq!(plan.folds[1].val, (504..756).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_rejects_too_many_folds() {
        assert!(split_kfold(5, 6).is_err());
        let plan = split_kfold(11, 3).unwrap();
        let sizes: Vec<usize> = plan.folds.iter().map(|f| f.val.len()).collect();
        assert_eq!(sizes, vec![4, 4, 3]);
    }

    #[test]
    fn bootstrap_folds_are_out_of_bag() {
        let plan = split_stationary_bootstrap(300, 4, 20.0, 9).unwrap();
        assert_eq!(plan.fold_count(), 4);
        for f in &plan.folds {
            assert_eq!(f.train.len(), 300);
            assert!(!f.val.is_empty());
            assert!(f.val.iter().all(|v| !f.train.contains(v)));
        }
    }

    #[test]
    fn plan_serialises() {
        let json = split_hv_block(40, 10, 2).unwrap().to_json().unwrap();
        let back: SplitPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, split_hv_block(40, 10, 2).unwrap());
    }
}
