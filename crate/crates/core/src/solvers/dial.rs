use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::bellman::SspModel;
use crate::model::{Control, Diagnostics, Method, NodeId, ValueSolution};
use crate::simplex_opt::MinimizeOptions;
use crate::solvers::ModeIndex;
use crate::Real;

const MAX_BUCKET: f64 = 4_294_967_296.0;

/// Buckets of width `δ` keyed by `⌊value/δ⌋`, with a cursor that never moves
/// backwards. Only non-empty buckets are stored.
#[derive(Debug, Clone)]
pub struct BucketQueue<T> {
    width: T,
    buckets: BTreeMap<u64, Vec<NodeId>>,
    cursor: u64,
}

impl<T: Real> BucketQueue<T> {
    pub fn new(width: T) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(Error::InvalidBucketWidth(width.to_f64_lossy()));
        }
        Ok(BucketQueue {
            width,
            buckets: BTreeMap::new(),
            cursor: 0,
        })
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// `⌊value/δ⌋`, failing beyond 2³².
    pub fn index_of(&self, value: T) -> Result<u64> {
        let k = (value / self.width).floor().to_f64_lossy();
        if !(k <= MAX_BUCKET) {
            return Err(Error::BucketOverflow {
                value: value.to_f64_lossy(),
                width: self.width.to_f64_lossy(),
            });
        }
        Ok(k.max(0.0) as u64)
    }

    /// Queues `node`; a value below the cursor lands in the cursor bucket.
    /// Returns the bucket used and whether it had to be clamped.
    pub fn push(&mut self, node: NodeId, value: T) -> Result<(u64, bool)> {
        let k = self.index_of(value)?;
        let (k, clamped) = if k < self.cursor {
            (self.cursor, true)
        } else {
            (k, false)
        };
        self.buckets.entry(k).or_default().push(node);
        Ok((k, clamped))
    }

    /// Removes the lowest non-empty bucket and moves the cursor onto it.
    pub fn pop_bucket(&mut self) -> Option<(u64, Vec<NodeId>)> {
        let (k, nodes) = self.buckets.pop_first()?;
        debug_assert!(k >= self.cursor);
        self.cursor = k;
        Some((k, nodes))
    }
}

/// Dial-like label setting: every node of the lowest bucket is accepted at
/// once.
///
/// Labels that fall into the bucket being accepted are counted in
/// `reupdates_after_acceptance` and the bucket is scanned again; the count is
/// zero whenever the problem is δ-causal for this width. Labels set directly
/// from the target are not counted.
pub fn dial_solve<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    delta: T,
) -> Result<ValueSolution<T>> {
    dial_solve_with(model, delta, &MinimizeOptions::default())
}

pub fn dial_solve_with<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    delta: T,
    opts: &MinimizeOptions<T>,
) -> Result<ValueSolution<T>> {
    let mut queue = BucketQueue::new(delta)?;
    let n = model.state_count();
    let t = model.target();
    let index = ModeIndex::new(model);
    let mut values = vec![T::infinity(); n];
    let mut policy: Vec<Option<Control<T>>> = vec![None; n];
    let mut permanent = vec![false; n];
    let mut bucket_of: Vec<Option<u64>> = vec![None; n];
    let mut diag = Diagnostics::new(Method::Dial);
    diag.bucket_width = Some(delta);
    values[t] = T::zero();
    bucket_of[t] = Some(queue.push(t, T::zero())?.0);
    let mut w = Vec::new();
    while let Some((k, nodes)) = queue.pop_bucket() {
        let mut accepted: Vec<NodeId> = nodes
            .into_iter()
            .filter(|&x| !permanent[x] && bucket_of[x] == Some(k))
            .collect();
        accepted.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        accepted.dedup();
        for &x in &accepted {
            permanent[x] = true;
            diag.accept_order.push(x);
        }
        let mut touched: Vec<(NodeId, usize)> = accepted
            .iter()
            .flat_map(|&x| index.reverse[x].iter().copied())
            .filter(|&(i, _)| !permanent[i])
            .collect();
        touched.sort_unstable();
        touched.dedup();
        // exit modes may land in the target's own bucket
        let target_round = accepted == [t];
        for (i, a) in touched {
            w.clear();
            w.extend(index.successors[i][a].iter().map(|&j| {
                if permanent[j] {
                    values[j]
                } else {
                    T::infinity()
                }
            }));
            let (cand, xi) = model.action_value(i, a, &w, opts)?;
            diag.iterations += 1;
            if cand < values[i] {
                values[i] = cand;
                policy[i] = Some(Control { mode_index: a, xi });
                let (b, clamped) = queue.push(i, cand)?;
                if (clamped || b == k) && !target_round {
                    diag.reupdates_after_acceptance += 1;
                }
                bucket_of[i] = Some(b);
            }
        }
    }
    Ok(ValueSolution {
        values,
        policy,
        diagnostics: diag,
    })
}
