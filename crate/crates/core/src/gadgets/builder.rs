//! Assembly of gadget networks from wide stages. Each stage is one wide
//! convolution layer described by sparse taps and a keep-map; every output
//! entry not kept is killed with a power-of-two bias sized from sound
//! interval bounds, and the stage is then compiled into depth
//! ceil(len/(s-1)) by the shallow compiler.

use crate::cnn::ConvNet;
use crate::error::Result;
use crate::interval::{conv_intervals, Interval};
use crate::shallow::compile_shallow_boxed;

/// Kept output ranges: entries [start, start+len) survive with `bias`
/// (0 for pass-through, negative for genuine ReLU thresholds).
#[derive(Debug, Clone)]
pub struct Keep {
    pub start: usize,
    pub len: usize,
    pub bias: f64,
}

impl Keep {
    pub fn pass(start: usize, len: usize) -> Self {
        Keep {
            start,
            len,
            bias: 0.0,
        }
    }

    pub fn thresh(start: usize, len: usize, bias: f64) -> Self {
        Keep { start, len, bias }
    }
}

fn pow2_above(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    assert!(x.is_finite());
    let mut p = 1.0f64;
    while p < x {
        p *= 2.0;
    }
    while p * 0.5 >= x {
        p *= 0.5;
    }
    p
}

#[derive(Debug, Clone)]
pub struct GadgetAssembler {
    pub net: ConvNet<f64>,
    /// sound enclosure of the current hidden state
    pub intervals: Vec<Interval>,
    pub s: usize,
    /// sum of ceil(len_t/(s-1)) over applied stages (depth bookkeeping)
    pub wide_stage_lens: Vec<usize>,
}

impl GadgetAssembler {
    pub fn new(input_intervals: Vec<Interval>, s: usize) -> Self {
        GadgetAssembler {
            net: ConvNet::identity(input_intervals.len()),
            intervals: input_intervals,
            s,
            wide_stage_lens: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.intervals.len()
    }

    /// Apply one wide stage: `taps` as (entry lag, weight), keeps as ranges.
    pub fn apply_wide(&mut self, taps: &[(usize, f64)], keeps: &[Keep]) -> Result<()> {
        let max_lag = taps.iter().map(|&(l, _)| l).max().expect("taps");
        let mut big = vec![0.0f64; max_lag + 1];
        for &(lag, w) in taps {
            big[lag] += w;
        }
        let filter = crate::cnn::Filter::new(if big.len() < 2 {
            let mut b = big.clone();
            b.push(0.0);
            b
        } else {
            big.clone()
        })?;
        let z = conv_intervals(&filter, &self.intervals);
        let out_wide = z.len();
        let mut bias = vec![f64::NAN; out_wide];
        for k in keeps {
            for e in k.start..k.start + k.len {
                bias[e] = k.bias;
            }
        }
        for e in 0..out_wide {
            if bias[e].is_nan() {
                bias[e] = -pow2_above(z[e].hi);
            }
        }
        // post-stage enclosure
        let mut post: Vec<Interval> = z
            .iter()
            .zip(&bias)
            .map(|(iv, b)| Interval::new(iv.lo + b, iv.hi + b).relu())
            .collect();
        // entries killed by construction are exact zeros
        for e in 0..out_wide {
            if z[e].hi + bias[e] <= 0.0 {
                post[e] = Interval::zero();
            }
        }

        let compiled = compile_shallow_boxed(&big, &bias, &self.intervals, self.s)?;
        post.resize(compiled.net.output_width(), Interval::zero());
        let stage_net = compiled.net;
        let whole = std::mem::replace(&mut self.net, ConvNet::identity(0));
        self.net = whole.compose(stage_net)?;
        self.intervals = post;
        self.wide_stage_lens.push(max_lag);
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.net.depth()
    }
}
