//! Zero elimination: [y_1; 0_{k l (n-1)}; y_2; ...; y_n] with non-negative
//! blocks contracts to [y_1; ...; y_n] in l stages, each moving y_1 forward
//! by (n-1)k entries with the two-tap filter [1; 0_{(n-1)k-1}; 1].

use super::builder::{GadgetAssembler, Keep};
use super::{depth, GadgetNet};
use crate::error::Result;
use crate::interval::Interval;

/// Append l elimination stages; `z1_off` is the entry offset of y_1 and the
/// trailing group y_2..y_n starts `l*(n-1)*k + k` entries later. Returns the
/// entry offset of the contracted payload [y_1; ...; y_n].
pub fn append_elimzeros(
    asm: &mut GadgetAssembler,
    z1_off: usize,
    l: usize,
    k: usize,
    n: usize,
) -> Result<usize> {
    if n <= 1 || l == 0 {
        return Ok(z1_off);
    }
    let step = (n - 1) * k;
    let group = z1_off + l * step + k; // entry offset of y_2, fixed across stages
    let mut z1 = z1_off;
    for _ in 0..l {
        asm.apply_wide(
            &[(0, 1.0), (step, 1.0)],
            &[Keep::pass(z1 + step, k), Keep::pass(group, (n - 1) * k)],
        )?;
        z1 += step;
    }
    debug_assert_eq!(z1 + k, group);
    Ok(z1)
}

/// Standalone elimination network for blocks bounded by `value_bound`.
pub fn build_elimzeros(
    l: usize,
    k: usize,
    n: usize,
    s: usize,
    value_bound: f64,
) -> Result<GadgetNet> {
    let input_dim = n * k + l * (n - 1) * k;
    let mut iv = vec![Interval::zero(); input_dim];
    for e in 0..k {
        iv[e] = Interval::new(0.0, value_bound);
    }
    let group = l * (n - 1) * k + k;
    for e in group..input_dim {
        iv[e] = Interval::new(0.0, value_bound);
    }
    let mut asm = GadgetAssembler::new(iv, s);
    let off = append_elimzeros(&mut asm, 0, l, k, n)?;
    let bound = depth::elim(l, k, n, s);
    debug_assert!((asm.depth() as f64) <= bound || n <= 1);
    Ok(GadgetNet {
        net: asm.net,
        payload_offset: off,
        payload_len: n * k,
        depth_bound: bound,
        builder: "elimzeros",
    })
}
