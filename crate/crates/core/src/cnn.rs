//! Exact evaluation and bookkeeping of deep ReLU CNNs with Toeplitz
//! convolutions: (w * y)_i = sum_k w_{i-k} y_k prolongs an n-vector to
//! n + s entries, each layer applies sigma(w * x + b), and the network output
//! is the inner product of the final hidden state with the output weights.
//! Everything is generic over the scalar ring so small gadget networks can be
//! checked in exact rational arithmetic.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Filter taps w_0..w_s; filter length s >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter<S: Scalar> {
    pub taps: Vec<S>,
}

impl<S: Scalar> Filter<S> {
    pub fn new(taps: Vec<S>) -> Result<Self> {
        if taps.len() < 2 {
            return Err(Error::InvalidArgument(
                "filter needs at least 2 taps (length s >= 1)".into(),
            ));
        }
        Ok(Filter { taps })
    }

    /// Filter length s = number of taps minus one.
    pub fn len(&self) -> usize {
        self.taps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Toeplitz convolution: output length n + s, entry i = sum_k w_{i-k} y_k
/// with out-of-range taps zero. Identical to multiplying by the banded
/// Toeplitz matrix T_w.
pub fn toeplitz_conv<S: Scalar>(w: &Filter<S>, y: &[S]) -> Vec<S> {
    let n = y.len();
    let s = w.len();
    let mut out = vec![S::zero(); n + s];
    for (k, yk) in y.iter().enumerate() {
        if yk.is_zero() {
            continue;
        }
        for (t, wt) in w.taps.iter().enumerate() {
            if !wt.is_zero() {
                out[k + t] = out[k + t].clone() + wt.clone() * yk.clone();
            }
        }
    }
    out
}

/// Dense Toeplitz matrix-vector oracle for conformance tests.
pub fn toeplitz_matvec<S: Scalar>(w: &Filter<S>, y: &[S]) -> Vec<S> {
    let n = y.len();
    let s = w.len();
    let mut out = vec![S::zero(); n + s];
    for i in 0..n + s {
        for k in 0..n {
            // matrix entry T[i][k] = w_{i-k}
            if i >= k && i - k <= s {
                out[i] = out[i].clone() + w.taps[i - k].clone() * y[k].clone();
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ConvLayer<S: Scalar> {
    pub filter: Filter<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> ConvLayer<S> {
    pub fn input_width(&self) -> usize {
        self.bias.len() - self.filter.len()
    }

    pub fn output_width(&self) -> usize {
        self.bias.len()
    }

    /// sigma(w * x + b)
    pub fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.input_width() {
            return Err(Error::DimensionMismatch {
                expected: self.input_width(),
                got: x.len(),
                context: "layer input",
            });
        }
        let mut z = toeplitz_conv(&self.filter, x);
        for (zi, bi) in z.iter_mut().zip(&self.bias) {
            *zi = (zi.clone() + bi.clone()).relu();
        }
        Ok(z)
    }
}

/// A stack of convolution layers without output weights; all layers share
/// the filter length s, so width after layer t is input_dim + t*s.
#[derive(Debug, Clone)]
pub struct ConvNet<S: Scalar> {
    pub input_dim: usize,
    pub layers: Vec<ConvLayer<S>>,
}

impl<S: Scalar> ConvNet<S> {
    pub fn identity(input_dim: usize) -> Self {
        ConvNet {
            input_dim,
            layers: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn filter_len(&self) -> Option<usize> {
        self.layers.first().map(|l| l.filter.len())
    }

    pub fn output_width(&self) -> usize {
        self.layers
            .last()
            .map(|l| l.output_width())
            .unwrap_or(self.input_dim)
    }

    pub fn validate(&self) -> Result<()> {
        let mut w = self.input_dim;
        let s = self.filter_len().unwrap_or(0);
        for (t, layer) in self.layers.iter().enumerate() {
            if layer.filter.len() != s {
                return Err(Error::MalformedNetwork(format!(
                    "layer {t} filter length {} != {s}",
                    layer.filter.len()
                )));
            }
            if layer.input_width() != w {
                return Err(Error::MalformedNetwork(format!(
                    "layer {t} expects width {}, previous produces {w}",
                    layer.input_width()
                )));
            }
            w = layer.output_width();
        }
        Ok(())
    }

    /// Final hidden state h_L(x).
    pub fn eval_hidden(&self, x: &[S]) -> Result<Vec<S>> {
        self.eval_hidden_upto(self.layers.len(), x)
    }

    /// Hidden state after the first `depth` layers (stage inspection).
    pub fn eval_hidden_upto(&self, depth: usize, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
                context: "network input",
            });
        }
        let mut v = x.to_vec();
        for layer in &self.layers[..depth] {
            v = layer.apply(&v)?;
        }
        Ok(v)
    }

    /// Functional composition: `self` first, then `second`.
    pub fn compose(mut self, second: ConvNet<S>) -> Result<ConvNet<S>> {
        if second.input_dim != self.output_width() {
            return Err(Error::DimensionMismatch {
                expected: self.output_width(),
                got: second.input_dim,
                context: "compose",
            });
        }
        if let (Some(a), Some(b)) = (self.filter_len(), second.filter_len()) {
            if a != b {
                return Err(Error::MalformedNetwork(format!(
                    "compose: filter lengths differ ({a} vs {b})"
                )));
            }
        }
        self.layers.extend(second.layers);
        Ok(self)
    }

    /// The same network acting on inputs embedded as [0_lead; x; 0_trail]:
    /// filters are translation invariant, biases are re-padded with zeros.
    pub fn widened(&self, lead: usize, trail: usize) -> ConvNet<S> {
        ConvNet {
            input_dim: self.input_dim + lead + trail,
            layers: self
                .layers
                .iter()
                .map(|l| {
                    let mut bias = vec![S::zero(); lead];
                    bias.extend(l.bias.iter().cloned());
                    bias.extend(std::iter::repeat(S::zero()).take(trail));
                    ConvLayer {
                        filter: l.filter.clone(),
                        bias,
                    }
                })
                .collect(),
        }
    }

    /// Convert parameters exactly into another scalar ring.
    pub fn convert<T: Scalar>(&self, conv: impl Fn(&S) -> T + Copy) -> ConvNet<T> {
        ConvNet {
            input_dim: self.input_dim,
            layers: self
                .layers
                .iter()
                .map(|l| ConvLayer {
                    filter: Filter {
                        taps: l.filter.taps.iter().map(conv).collect(),
                    },
                    bias: l.bias.iter().map(conv).collect(),
                })
                .collect(),
        }
    }
}

impl ConvNet<f64> {
    pub fn to_rational(&self) -> ConvNet<crate::scalar::Rational> {
        self.convert(|&x| crate::scalar::Rational::from_f64(x))
    }
}

/// Maximal leading/trailing runs of (near-)zero entries split off a hidden
/// state; the threshold used for the split is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedVector<S: Scalar> {
    pub lead_zeros: usize,
    pub payload: Vec<S>,
    pub trail_zeros: usize,
}

impl<S: Scalar> AlignedVector<S> {
    pub fn split(v: &[S]) -> Self {
        let lead = v.iter().take_while(|x| x.negligible()).count();
        if lead == v.len() {
            return AlignedVector {
                lead_zeros: v.len(),
                payload: Vec::new(),
                trail_zeros: 0,
            };
        }
        let trail = v.iter().rev().take_while(|x| x.negligible()).count();
        AlignedVector {
            lead_zeros: lead,
            payload: v[lead..v.len() - trail].to_vec(),
            trail_zeros: trail,
        }
    }

    pub fn total_len(&self) -> usize {
        self.lead_zeros + self.payload.len() + self.trail_zeros
    }
}

/// Full network f_L = c . h_L.
#[derive(Debug, Clone)]
pub struct DeepCnn<S: Scalar> {
    pub net: ConvNet<S>,
    pub output_weights: Vec<S>,
    pub meta: NetMeta,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NetMeta {
    pub builder: String,
    pub depth_bound_claimed: f64,
}

impl<S: Scalar> DeepCnn<S> {
    pub fn new(net: ConvNet<S>, output_weights: Vec<S>, meta: NetMeta) -> Result<Self> {
        if output_weights.len() != net.output_width() {
            return Err(Error::DimensionMismatch {
                expected: net.output_width(),
                got: output_weights.len(),
                context: "output weights",
            });
        }
        Ok(DeepCnn {
            net,
            output_weights,
            meta,
        })
    }

    pub fn depth(&self) -> usize {
        self.net.depth()
    }

    pub fn eval(&self, x: &[S]) -> Result<S> {
        let h = self.net.eval_hidden(x)?;
        Ok(h.iter()
            .zip(&self.output_weights)
            .fold(S::zero(), |acc, (hi, ci)| acc + hi.clone() * ci.clone()))
    }

    pub fn hidden_aligned(&self, x: &[S]) -> Result<AlignedVector<S>> {
        Ok(AlignedVector::split(&self.net.eval_hidden(x)?))
    }
}

// ---- serialization ----
// {s, input_dim, layers: [{w, b}], c, meta: {builder, depth_bound_claimed}}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    w: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    s: usize,
    input_dim: usize,
    layers: Vec<LayerJson>,
    c: Vec<f64>,
    meta: NetMeta,
}

impl DeepCnn<f64> {
    pub fn to_json(&self) -> Result<String> {
        let doc = NetworkJson {
            s: self.net.filter_len().unwrap_or(0),
            input_dim: self.net.input_dim,
            layers: self
                .net
                .layers
                .iter()
                .map(|l| LayerJson {
                    w: l.filter.taps.clone(),
                    b: l.bias.clone(),
                })
                .collect(),
            c: self.output_weights.clone(),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkJson = serde_json::from_str(text)?;
        let mut width = doc.input_dim;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (t, l) in doc.layers.into_iter().enumerate() {
            if l.w.len() != doc.s + 1 {
                return Err(Error::MalformedNetwork(format!(
                    "layer {t}: {} taps, expected s+1 = {}",
                    l.w.len(),
                    doc.s + 1
                )));
            }
            if l.b.len() != width + doc.s {
                return Err(Error::MalformedNetwork(format!(
                    "layer {t}: bias length {} != input {width} + s {}",
                    l.b.len(),
                    doc.s
                )));
            }
            width += doc.s;
            layers.push(ConvLayer {
                filter: Filter { taps: l.w },
                bias: l.b,
            });
        }
        if doc.c.len() != width {
            return Err(Error::MalformedNetwork(format!(
                "output weights length {} != final width {width}",
                doc.c.len()
            )));
        }
        let net = ConvNet {
            input_dim: doc.input_dim,
            layers,
        };
        net.validate()?;
        DeepCnn::new(net, doc.c, doc.meta)
    }
}
