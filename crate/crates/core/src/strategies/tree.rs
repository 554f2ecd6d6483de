use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART regression tree with squared-error splits. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    width: usize,
    nodes: Vec<Node>,
}

/// Feature columns stored contiguously plus, per feature, the row indices
/// sorted by that feature. Built once and reused across boosting rounds.
pub(crate) struct Presorted {
    columns: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub(crate) fn new(x: ArrayView2<f64>) -> Self {
        let columns: Vec<Vec<f64>> = x.columns().into_iter().map(|c| c.to_vec()).collect();
        let order = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Self { columns, order }
    }

    fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

struct BestSplit {
    score: f64,
    feature: usize,
    threshold: f64,
    /// Rows going left.
    n_left: usize,
}

impl RegressionTree {
    pub fn fit(x: ArrayView2<f64>, y: &[f64], min_samples_split: usize, max_depth: Option<usize>) -> Self {
        Self::fit_presorted(&Presorted::new(x), y, min_samples_split, max_depth)
    }

    pub(crate) fn fit_presorted(
        pre: &Presorted,
        y: &[f64],
        min_samples_split: usize,
        max_depth: Option<usize>,
    ) -> Self {
        let n = pre.rows();
        let width = pre.columns.len();
        let mut order = pre.order.clone();
        let mut scratch = vec![0u32; n];
        let mut goes_left = vec![false; n];
        let mut nodes = vec![Node::Leaf { value: 0.0 }];
        // (node id, start, end, depth)
        let mut stack = vec![(0usize, 0usize, n, 0usize)];
        while let Some((id, start, end, depth)) = stack.pop() {
            let rows = &order[0][start..end];
            let first = y[rows[0] as usize];
            let pure = rows.iter().all(|&r| y[r as usize] == first);
            let value = if pure {
                first
            } else {
                rows.iter().map(|&r| y[r as usize]).sum::<f64>() / rows.len() as f64
            };
            let can_split = !pure && end - start >= min_samples_split && max_depth.is_none_or(|d| depth < d);
            let best = if can_split {
                best_split(pre, &order, y, start, end)
            } else {
                None
            };
            let Some(best) = best else {
                nodes[id] = Node::Leaf { value };
                continue;
            };

            for &r in &order[best.feature][start..end] {
                goes_left[r as usize] = pre.columns[best.feature][r as usize] <= best.threshold;
            }
            for sorted in order.iter_mut() {
                stable_partition(&mut sorted[start..end], &goes_left, &mut scratch);
            }
            let mid = start + best.n_left;
            let left = nodes.len();
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[id] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right: left + 1,
            };
            stack.push((left + 1, mid, end, depth + 1));
            stack.push((left, start, mid, depth + 1));
        }
        Self { width, nodes }
    }

    pub fn input_dim(&self) -> usize {
        self.width
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict_row(&self, x: ArrayView1<f64>) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// Maximises `S_l^2/n_l + S_r^2/n_r`, which is equivalent to minimising the
/// children's summed squared error. Scans features in index order and
/// thresholds in increasing order, keeping the first strict maximum.
fn best_split(pre: &Presorted, order: &[Vec<u32>], y: &[f64], start: usize, end: usize) -> Option<BestSplit> {
    let n = end - start;
    let total: f64 = order[0][start..end].iter().map(|&r| y[r as usize]).sum();
    let mut best: Option<BestSplit> = None;
    for (f, sorted) in order.iter().enumerate() {
        let col = &pre.columns[f];
        let rows = &sorted[start..end];
        let mut left_sum = 0.0;
        for i in 0..n - 1 {
            let r = rows[i] as usize;
            left_sum += y[r];
            let (a, b) = (col[r], col[rows[i + 1] as usize]);
            if !(a < b) {
                continue;
            }
            let n_left = i + 1;
            let right_sum = total - left_sum;
            let score = left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64;
            if best.as_ref().is_none_or(|bs| score > bs.score) {
                let mut threshold = 0.5 * (a + b);
                if !(threshold < b) {
                    threshold = a;
                }
                best = Some(BestSplit {
                    score,
                    feature: f,
                    threshold,
                    n_left,
                });
            }
        }
    }
    best
}

fn stable_partition(slice: &mut [u32], goes_left: &[bool], scratch: &mut [u32]) {
    let mut l = 0;
    let mut r = 0;
    let scratch = &mut scratch[..slice.len()];
    for i in 0..slice.len() {
        let v = slice[i];
        if goes_left[v as usize] {
            slice[l] = v;
            l += 1;
        } else {
            scratch[r] = v;
            r += 1;
        }
    }
    slice[l..].copy_from_slice(&scratch[..r]);
}
