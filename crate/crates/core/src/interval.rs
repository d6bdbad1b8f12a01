//! Sound per-entry interval propagation through convolution layers; used by
//! the shallow compiler to pick ReLU-transparency bias shifts and by gadget
//! builders to size kill biases.

use crate::cnn::{ConvNet, Filter};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn zero() -> Self {
        Interval::point(0.0)
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.lo - slack && v <= self.hi + slack
    }

    pub fn relu(self) -> Self {
        Interval::new(self.lo.max(0.0), self.hi.max(0.0))
    }
}

/// Interval image of a Toeplitz convolution.
pub fn conv_intervals(w: &Filter<f64>, x: &[Interval]) -> Vec<Interval> {
    let n = x.len();
    let s = w.len();
    let mut out = vec![Interval::zero(); n + s];
    for (k, xi) in x.iter().enumerate() {
        for (t, &wt) in w.taps.iter().enumerate() {
            if wt == 0.0 {
                continue;
            }
            let (a, b) = if wt >= 0.0 {
                (wt * xi.lo, wt * xi.hi)
            } else {
                (wt * xi.hi, wt * xi.lo)
            };
            out[k + t].lo += a;
            out[k + t].hi += b;
        }
    }
    out
}

/// Per-entry enclosure of the final hidden state over an input box.
pub fn interval_bounds(net: &ConvNet<f64>, domain: &[Interval]) -> Vec<Interval> {
    assert_eq!(domain.len(), net.input_dim);
    let mut iv = domain.to_vec();
    for layer in &net.layers {
        let mut z = conv_intervals(&layer.filter, &iv);
        for (zi, bi) in z.iter_mut().zip(&layer.bias) {
            zi.lo += bi;
            zi.hi += bi;
            *zi = zi.relu();
        }
        iv = z;
    }
    iv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::ConvLayer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_zero_bounds() {
        let net = ConvNet {
            input_dim: 2,
            layers: vec![ConvLayer {
                filter: Filter::new(vec![0.0, 0.0]).unwrap(),
                bias: vec![0.0; 3],
            }],
        };
        let iv = interval_bounds(&net, &[Interval::new(0.0, 1.0); 2]);
        assert!(iv.iter().all(|i| i.lo == 0.0 && i.hi == 0.0));
    }

    #[test]
    fn single_tap_passthrough() {
        let net = ConvNet {
            input_dim: 1,
            layers: vec![ConvLayer {
                filter: Filter::new(vec![1.0, 0.0]).unwrap(),
                bias: vec![0.0; 2],
            }],
        };
        let iv = interval_bounds(&net, &[Interval::new(0.0, 1.0)]);
        assert_eq!(iv[0], Interval::new(0.0, 1.0));
        assert_eq!(iv[1], Interval::zero());
    }

    #[test]
    fn sampling_never_exits_enclosure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = ConvNet {
            input_dim: 2,
            layers: vec![
                ConvLayer {
                    filter: Filter::new(vec![1.0, -1.0]).unwrap(),
                    bias: vec![0.3, -0.1, 0.2],
                },
                ConvLayer {
                    filter: Filter::new(vec![-0.5, 2.0]).unwrap(),
                    bias: vec![0.0, 0.1, -0.3, 0.4],
                },
            ],
        };
        let domain = [Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)];
        let iv = interval_bounds(&net, &domain);
        for _ in 0..10_000 {
            let x = [rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)];
            let h = net.eval_hidden(&x).unwrap();
            for (v, b) in h.iter().zip(&iv) {
                assert!(b.contains(*v, 1e-12), "{v} outside [{}, {}]", b.lo, b.hi);
            }
        }
    }
}
