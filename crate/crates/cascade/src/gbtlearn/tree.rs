//! Feature binning and single-tree growth for the boosted ensemble.

use rayon::prelude::*;

use super::TreeNode;

/// Exact split search (one bin per distinct value) below this many rows;
/// quantile histograms above.
pub(crate) const EXACT_ROW_LIMIT: usize = 1024;
pub(crate) const MAX_BINS: usize = 256;

/// Column-binned feature matrix. `bins[f * n + i]` is the bin of row `i` on
/// feature `f`; candidate threshold `cuts[f][b]` separates bins `<= b` from
/// bins `> b` and corresponds to the predicate `value < cuts[f][b]`.
pub(crate) struct BinnedMatrix {
    pub n: usize,
    pub d: usize,
    pub bins: Vec<u16>,
    pub cuts: Vec<Vec<f32>>,
}

pub(crate) fn bin_matrix(features: &[f32], n: usize, d: usize) -> BinnedMatrix {
    let mut bins = vec![0u16; n * d];
    let mut cuts: Vec<Vec<f32>> = vec![Vec::new(); d];

    let columns: Vec<(usize, Vec<f32>, Vec<u16>)> = (0..d)
        .into_par_iter()
        .map(|f| {
            let mut values: Vec<f32> = (0..n).map(|i| features[i * d + f]).collect();
            let mut sorted = values.clone();
            sorted.sort_by(f32::total_cmp);
            sorted.dedup();

            // Candidate thresholds are actual feature values; a cut at value v
            // sends rows with x < v left. The smallest value can never be a
            // useful threshold.
            let col_cuts: Vec<f32> = if n < EXACT_ROW_LIMIT || sorted.len() <= MAX_BINS {
                sorted[1..].to_vec()
            } else {
                let mut qs = Vec::with_capacity(MAX_BINS - 1);
                for b in 1..MAX_BINS {
                    let rank = b * (sorted.len() - 1) / (MAX_BINS - 1);
                    qs.push(sorted[rank]);
                }
                qs.dedup();
                qs.retain(|&c| c > sorted[0]);
                qs
            };

            let col_bins: Vec<u16> = values
                .drain(..)
                .map(|x| col_cuts.partition_point(|&c| c <= x) as u16)
                .collect();
            (f, col_cuts, col_bins)
        })
        .collect();

    for (f, col_cuts, col_bins) in columns {
        bins[f * n..(f + 1) * n].copy_from_slice(&col_bins);
        cuts[f] = col_cuts;
    }
    BinnedMatrix { n, d, bins, cuts }
}

pub(crate) struct GrowParams {
    pub max_depth: u32,
    pub min_child_weight: f64,
    pub lambda: f64,
}

#[derive(Clone, Copy)]
struct SplitCandidate {
    gain: f64,
    feature: usize,
    bin: u16,
    cut: f32,
    left_g: f64,
    left_h: f64,
}

fn leaf_value(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

fn split_score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Grow one regression tree on the rows in `index` using second-order
/// statistics. Returns the node list; `nodes[0]` is the root.
pub(crate) fn grow_tree(
    binned: &BinnedMatrix,
    grad: &[f64],
    hess: &[f64],
    index: &mut Vec<u32>,
    params: &GrowParams,
) -> Vec<TreeNode> {
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut scratch = vec![0u32; index.len()];

    struct Work {
        node: usize,
        start: usize,
        end: usize,
        depth: u32,
        g: f64,
        h: f64,
    }

    let (g0, h0) = {
        let mut g = 0.0;
        let mut h = 0.0;
        for &i in index.iter() {
            g += grad[i as usize];
            h += hess[i as usize];
        }
        (g, h)
    };
    nodes.push(TreeNode::leaf(leaf_value(g0, h0, params.lambda)));
    let mut stack = vec![Work {
        node: 0,
        start: 0,
        end: index.len(),
        depth: 0,
        g: g0,
        h: h0,
    }];

    while let Some(w) = stack.pop() {
        let rows = &index[w.start..w.end];
        if w.depth >= params.max_depth
            || rows.len() < 2
            || w.h < 2.0 * params.min_child_weight
        {
            continue; // stays a leaf
        }

        let best = (0..binned.d)
            .into_par_iter()
            .filter_map(|f| {
                let cuts = &binned.cuts[f];
                if cuts.is_empty() {
                    return None;
                }
                let n_bins = cuts.len() + 1;
                let mut hist = vec![(0.0f64, 0.0f64); n_bins];
                let col = &binned.bins[f * binned.n..(f + 1) * binned.n];
                for &i in rows {
                    let b = col[i as usize] as usize;
                    let slot = &mut hist[b];
                    slot.0 += grad[i as usize];
                    slot.1 += hess[i as usize];
                }
                let parent = split_score(w.g, w.h, params.lambda);
                let mut gl = 0.0;
                let mut hl = 0.0;
                let mut best: Option<SplitCandidate> = None;
                for b in 0..n_bins - 1 {
                    gl += hist[b].0;
                    hl += hist[b].1;
                    let gr = w.g - gl;
                    let hr = w.h - hl;
                    if hl < params.min_child_weight || hr < params.min_child_weight {
                        continue;
                    }
                    let gain = 0.5
                        * (split_score(gl, hl, params.lambda)
                            + split_score(gr, hr, params.lambda)
                            - parent);
                    if gain > best.map_or(1e-12, |c| c.gain) {
                        best = Some(SplitCandidate {
                            gain,
                            feature: f,
                            bin: b as u16,
                            cut: cuts[b],
                            left_g: gl,
                            left_h: hl,
                        });
                    }
                }
                best
            })
            // Deterministic reduction: highest gain wins, ties to the lowest
            // feature index then lowest cut.
            .min_by(|a, b| {
                b.gain
                    .partial_cmp(&a.gain)
                    .unwrap()
                    .then(a.feature.cmp(&b.feature))
                    .then(a.cut.total_cmp(&b.cut))
            });

        let Some(split) = best else { continue };

        // stable partition by bin <= split.bin
        let col = &binned.bins[split.feature * binned.n..(split.feature + 1) * binned.n];
        let slice = &index[w.start..w.end];
        let mut left_n = 0;
        for &i in slice {
            if col[i as usize] <= split.bin {
                scratch[left_n] = i;
                left_n += 1;
            }
        }
        let mut right_n = left_n;
        for &i in slice {
            if col[i as usize] > split.bin {
                scratch[right_n] = i;
                right_n += 1;
            }
        }
        index[w.start..w.end].copy_from_slice(&scratch[..right_n]);

        let left_id = nodes.len();
        let right_id = nodes.len() + 1;
        nodes.push(TreeNode::leaf(leaf_value(
            split.left_g,
            split.left_h,
            params.lambda,
        )));
        nodes.push(TreeNode::leaf(leaf_value(
            w.g - split.left_g,
            w.h - split.left_h,
            params.lambda,
        )));
        nodes[w.node] = TreeNode {
            feature: split.feature as u32,
            cut: split.cut,
            left: left_id as i32,
            right: right_id as i32,
            value: 0.0,
        };
        stack.push(Work {
            node: left_id,
            start: w.start,
            end: w.start + left_n,
            depth: w.depth + 1,
            g: split.left_g,
            h: split.left_h,
        });
        stack.push(Work {
            node: right_id,
            start: w.start + left_n,
            end: w.end,
            depth: w.depth + 1,
            g: w.g - split.left_g,
            h: w.h - split.left_h,
        });
    }
    nodes
}
