//! Sorting by merging singletons into one path.

use crate::forest::{ForestError, MergeableForest, Operation, Result};

/// Sorts `values` ascending with inserts, merges and parent queries.
///
/// Each value becomes a singleton merged with the bottom of the path built so
/// far, so the tree stays a path. Walking parents up from the bottom reads
/// the values in descending order.
pub fn sort_via_merge<F: MergeableForest + ?Sized>(values: &[f64], f: &mut F) -> Result<Vec<f64>> {
    if !f.capability().supports_parent {
        return Err(ForestError::Unsupported {
            backend: f.name(),
            op: Operation::Parent,
        });
    }
    let Some((&first, rest)) = values.split_first() else {
        return Ok(Vec::new());
    };
    let mut bottom = f.insert(first);
    for &x in rest {
        let v = f.insert(x);
        f.merge(v, bottom)?;
        if f.key(v)? > f.key(bottom)? {
            bottom = v;
        }
    }
    let mut out = Vec::with_capacity(values.len());
    let mut cur = Some(bottom);
    while let Some(v) = cur {
        out.push(f.key(v)?.label);
        cur = f.parent(v)?;
    }
    out.reverse();
    Ok(out)
}
