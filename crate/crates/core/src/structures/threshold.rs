use serde::Serialize;

/// Quantifier-free type of a tuple in a pure linear order, with distances
/// capped at `2^rank`.
///
/// `order[i]` is the index of coordinate `i` among the distinct values of the
/// tuple. `gaps` are the differences between consecutive distinct values,
/// with virtual endpoints `0` and `n + 1` added, each capped at `2^rank`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ThresholdSignature {
    pub order: Vec<usize>,
    pub gaps: Vec<usize>,
}

pub fn threshold_signature(n: usize, tuple: &[usize], rank: usize) -> ThresholdSignature {
    assert!(tuple.iter().all(|&x| (1..=n).contains(&x)), "tuple outside 1..={n}");
    let cap = 1usize.checked_shl(rank as u32).unwrap_or(usize::MAX);
    let mut values: Vec<usize> = tuple.to_vec();
    values.sort_unstable();
    values.dedup();
    let order = tuple.iter().map(|x| values.binary_search(x).unwrap()).collect();
    let mut points = Vec::with_capacity(values.len() + 2);
    points.push(0);
    points.extend(&values);
    points.push(n + 1);
    let gaps = points.windows(2).map(|w| (w[1] - w[0]).min(cap)).collect();
    ThresholdSignature { order, gaps }
}
