//! Level/index bookkeeping for hierarchical sparse grids: the index set
//! I_l = { i odd, 1 <= i <= 2^l - 1 }, its enumeration under the level-sum
//! constraint |l|_1 <= n + d - 1, and hierarchical ancestor chains.

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Per-direction level cap; dyadic coordinates stay exact well below this.
pub const MAX_LEVEL: u32 = 30;

/// A vector of non-negative integers used for levels, indices and degrees.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |.|_1, the entry sum.
    pub fn norm1(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    /// |.|_inf, the max entry.
    pub fn norm_inf(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// One sparse-grid point: levels l (entries >= 1), odd indices i in I_l,
/// dyadic coordinates x_j = i_j * 2^-l_j and mesh widths h_j = 2^-l_j.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HierNode {
    pub level: MultiIndex,
    pub index: MultiIndex,
}

impl HierNode {
    pub fn new(level: Vec<u32>, index: Vec<u32>) -> Result<Self> {
        if level.len() != index.len() {
            return Err(Error::DimensionMismatch {
                expected: level.len(),
                got: index.len(),
                context: "HierNode level/index",
            });
        }
        for (&l, &i) in level.iter().zip(&index) {
            if l < 1 || l > MAX_LEVEL {
                return Err(Error::InvalidArgument(format!("level {l} out of [1, {MAX_LEVEL}]")));
            }
            if i % 2 == 0 || i < 1 || i > (1u32 << l) - 1 {
                return Err(Error::InvalidArgument(format!(
                    "index {i} not odd in [1, 2^{l} - 1]"
                )));
            }
        }
        Ok(HierNode {
            level: level.into(),
            index: index.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.level.dim()
    }

    pub fn coordinate<R: Real>(&self, j: usize) -> R {
        dyadic::<R>(self.level.0[j], self.index.0[j])
    }

    pub fn coordinates<R: Real>(&self) -> Vec<R> {
        (0..self.dim()).map(|j| self.coordinate(j)).collect()
    }

    pub fn mesh<R: Real>(&self, j: usize) -> R {
        R::from_f64(0.5).powi(self.level.0[j] as i32)
    }
}

/// x = i * 2^-l, exact in binary floating point for l <= 50.
pub fn dyadic<R: Real>(l: u32, i: u32) -> R {
    R::from_f64(i as f64 * (0.5f64).powi(l as i32))
}

/// Parent of a 1-D node: (l-1, (i +- 1)/2 picking the odd result).
/// None at level 1.
pub fn parent_1d(l: u32, i: u32) -> Option<(u32, u32)> {
    if l <= 1 {
        return None;
    }
    let up = (i + 1) / 2;
    let dn = (i - 1) / 2;
    let pi = if up % 2 == 1 { up } else { dn };
    debug_assert!(pi % 2 == 1);
    Some((l - 1, pi))
}

/// Hierarchical ancestors of the 1-D node (l, i): first the two neighbors
/// x +- h (which are themselves coarser grid points or boundary points), then
/// the coarsening chain nearest-in-level first, skipping values already
/// listed, then the boundary points 1.0 and 0.0. At level l there are exactly
/// l + 1 of them; `count` beyond that is rejected.
pub fn ancestors<R: Real>(l: u32, i: u32, count: usize) -> Result<Vec<R>> {
    if count > l as usize + 1 {
        return Err(Error::InvalidArgument(format!(
            "requested {count} ancestors of a level-{l} node; only {} exist",
            l + 1
        )));
    }
    let h = R::from_f64(0.5).powi(l as i32);
    let x = dyadic::<R>(l, i);
    let mut out: Vec<R> = vec![x + h, x - h];
    let mut cur = (l, i);
    while let Some((pl, pi)) = parent_1d(cur.0, cur.1) {
        let p = dyadic::<R>(pl, pi);
        if !out.iter().any(|&q| q == p) {
            out.push(p);
        }
        cur = (pl, pi);
    }
    for b in [R::one(), R::zero()] {
        if !out.iter().any(|&q| q == b) {
            out.push(b);
        }
    }
    debug_assert_eq!(out.len(), l as usize + 1);
    out.truncate(count);
    Ok(out)
}

/// All (l, i) with l in N_+^d, |l|_1 <= n + d - 1, i in I_l, in graded
/// lexicographic order (deterministic for serialization and lane packing).
pub fn enumerate_levels(n: u32, d: usize) -> Vec<HierNode> {
    assert!(n >= 1 && d >= 1);
    let cap = n as u64 + d as u64 - 1;

    fn level_rec(cur: &mut Vec<u32>, d: usize, cap: u64, out: &mut Vec<Vec<u32>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        let used: u64 = cur.iter().map(|&x| x as u64).sum();
        let rest = (d - cur.len() - 1) as u64; // remaining directions need >= 1 each
        let mut l = 1u64;
        while used + l + rest <= cap {
            cur.push(l as u32);
            level_rec(cur, d, cap, out);
            cur.pop();
            l += 1;
        }
    }

    let mut levels: Vec<Vec<u32>> = Vec::new();
    level_rec(&mut Vec::with_capacity(d), d, cap, &mut levels);
    levels.sort_by_key(|l| (l.iter().map(|&x| x as u64).sum::<u64>(), l.clone()));

    let mut nodes = Vec::new();
    for lv in &levels {
        let mut idx = vec![1u32; d];
        'emit: loop {
            nodes.push(HierNode {
                level: lv.clone().into(),
                index: idx.clone().into(),
            });
            let mut k = d;
            loop {
                if k == 0 {
                    break 'emit;
                }
                k -= 1;
                idx[k] += 2;
                if idx[k] <= (1u32 << lv[k]) - 1 {
                    break;
                }
                idx[k] = 1;
            }
        }
    }
    nodes
}

/// N = |Sigma_n| without enumerating indices: sum over admissible levels of
/// prod_j 2^(l_j - 1).
pub fn count_nodes(n: u32, d: usize) -> u64 {
    let cap = n as u64 + d as u64 - 1;
    fn rec(d: usize, rem: u64) -> u64 {
        if d == 0 {
            return 1;
        }
        let mut tot = 0u64;
        let mut l = 1u64;
        while l + (d as u64 - 1) <= rem {
            tot += (1u64 << (l - 1)) * rec(d - 1, rem - l);
            l += 1;
        }
        tot
    }
    rec(d, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_n1_d2_single_node() {
        let nodes = enumerate_levels(1, 2);
        assert_eq!(nodes.len(), 1);
        assert_eq!(nodes[0].level.0, vec![1, 1]);
        assert_eq!(nodes[0].index.0, vec![1, 1]);
    }

    #[test]
    fn enumerate_n2_d1() {
        let nodes = enumerate_levels(2, 1);
        let pairs: Vec<(u32, u32)> = nodes.iter().map(|n| (n.level.0[0], n.index.0[0])).collect();
        assert_eq!(pairs, vec![(1, 1), (2, 1), (2, 3)]);
    }

    #[test]
    fn index_set_level2_is_odd_below_4() {
        let nodes = enumerate_levels(2, 1);
        let lvl2: Vec<u32> = nodes
            .iter()
            .filter(|n| n.level.0[0] == 2)
            .map(|n| n.index.0[0])
            .collect();
        assert_eq!(lvl2, vec![1, 3]);
    }

    #[test]
    fn count_matches_enumeration() {
        for d in 1..=3usize {
            for n in 1..=5u32 {
                assert_eq!(
                    count_nodes(n, d),
                    enumerate_levels(n, d).len() as u64,
                    "n={n} d={d}"
                );
            }
        }
    }

    #[test]
    fn ancestors_level4_node3() {
        // two neighbors 0.25, 0.125, then 0.5, then the boundary 1.0
        let a: Vec<f64> = ancestors(4, 3, 4).unwrap();
        assert_eq!(a, vec![0.25, 0.125, 0.5, 1.0]);
    }

    #[test]
    fn ancestors_level1_are_boundary() {
        let a: Vec<f64> = ancestors(1, 1, 2).unwrap();
        assert_eq!(a, vec![1.0, 0.0]);
    }

    #[test]
    fn ancestors_level3_node5() {
        let a: Vec<f64> = ancestors(3, 5, 3).unwrap();
        assert_eq!(a, vec![0.75, 0.5, 1.0]);
    }

    #[test]
    fn ancestors_rejects_overlong_request() {
        assert!(ancestors::<f64>(2, 1, 4).is_err());
    }

    #[test]
    fn coordinates_are_exact_dyadics() {
        let node = HierNode::new(vec![4, 2], vec![3, 1]).unwrap();
        assert_eq!(node.coordinate::<f64>(0), 0.1875);
        assert_eq!(node.coordinate::<f64>(1), 0.25);
        assert_eq!(node.mesh::<f64>(0), 0.0625);
    }

    #[test]
    fn node_validation() {
        assert!(HierNode::new(vec![2], vec![2]).is_err()); // even index
        assert!(HierNode::new(vec![2], vec![5]).is_err()); // out of range
        assert!(HierNode::new(vec![0], vec![1]).is_err()); // level 0
    }
}
