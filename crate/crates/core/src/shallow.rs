//! Shallow-to-deep compilation: one wide convolution-plus-ReLU layer
//! sigma(w * x + b) with a length-n filter becomes a chain of at most
//! ceil(n/(s-1)) layers with filters of length s. The filter's symbol
//! polynomial is factored into real factors of degree <= s (companion-matrix
//! roots, conjugate pairs grouped, Newton polished); intermediate ReLUs are
//! made transparent by interval-derived bias shifts that the last layer
//! undoes.

use crate::cnn::{ConvLayer, ConvNet, Filter};
use crate::error::{Error, Result};
use crate::interval::{conv_intervals, Interval};
use nalgebra::DMatrix;


pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Degrees beyond this are out of conformance scope (root conditioning).
pub const MAX_FACTOR_DEGREE: usize = 64;

/// One wide layer over a known input box.
#[derive(Debug, Clone)]
pub struct WideLayerSpec {
    /// taps w_0..w_n
    pub big_filter: Vec<f64>,
    /// length input_dim + n
    pub bias: Vec<f64>,
    pub input_dim: usize,
    /// inputs confined to [0, M]^input_dim
    pub input_bound: f64,
}

impl WideLayerSpec {
    pub fn new(big_filter: Vec<f64>, bias: Vec<f64>, input_dim: usize, input_bound: f64) -> Result<Self> {
        let n = big_filter.len() - 1;
        if bias.len() != input_dim + n {
            return Err(Error::DimensionMismatch {
                expected: input_dim + n,
                got: bias.len(),
                context: "wide layer bias",
            });
        }
        Ok(WideLayerSpec {
            big_filter,
            bias,
            input_dim,
            input_bound,
        })
    }

    /// Direct oracle sigma(T_w x + b).
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let w = Filter::new(self.big_filter.clone()).expect("filter");
        let mut z = crate::cnn::toeplitz_conv(&w, x);
        for (zi, bi) in z.iter_mut().zip(&self.bias) {
            *zi = (*zi + bi).max(0.0);
        }
        z
    }
}

fn poly_eval(c: &[f64], z: (f64, f64)) -> (f64, f64) {
    // Horner over complex z
    let mut re = 0.0;
    let mut im = 0.0;
    for &ck in c.iter().rev() {
        let nre = re * z.0 - im * z.1 + ck;
        let nim = re * z.1 + im * z.0;
        re = nre;
        im = nim;
    }
    (re, im)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

/// Durand-Kerner sweep, the fallback when the QR iteration on the companion
/// matrix stalls (it cycles on orthogonal companion matrices like the one of
/// z^n + 1).
fn durand_kerner(c: &[f64]) -> Vec<(f64, f64)> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<f64> = c.iter().map(|&x| x / lead).collect();
    let radius = 1.0
        + monic[..n]
            .iter()
            .map(|x| x.abs())
            .fold(0.0f64, f64::max);
    let mut z: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.7;
            (radius * ang.cos(), radius * ang.sin())
        })
        .collect();
    for _ in 0..600 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let p = poly_eval(&monic, z[i]);
            let mut den = (1.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = (z[i].0 - z[j].0, z[i].1 - z[j].1);
                    den = (den.0 * d.0 - den.1 * d.1, den.0 * d.1 + den.1 * d.0);
                }
            }
            let m2 = den.0 * den.0 + den.1 * den.1;
            if m2 < 1e-300 {
                continue;
            }
            let step = ((p.0 * den.0 + p.1 * den.1) / m2, (p.1 * den.0 - p.0 * den.1) / m2);
            z[i] = (z[i].0 - step.0, z[i].1 - step.1);
            moved = moved.max(step.0.hypot(step.1));
        }
        if moved < 1e-14 {
            break;
        }
    }
    z
}

/// Roots of sum c_k z^k (c.last() != 0) via companion-matrix eigenvalues
/// (iteration-capped), then Newton-polished while the residual improves.
fn poly_roots(c: &[f64]) -> Vec<(f64, f64)> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        comp[(k, n - 1)] = -c[k] / lead;
        if k + 1 < n {
            comp[(k + 1, k)] = 1.0;
        }
    }
    let eig: Vec<(f64, f64)> =
        match nalgebra::linalg::Schur::try_new(comp, 1e-14, 2000) {
            Some(schur) => schur.complex_eigenvalues().iter().map(|e| (e.re, e.im)).collect(),
            None => durand_kerner(c),
        };
    let dc = poly_deriv(c);
    let mut roots: Vec<(f64, f64)> = Vec::with_capacity(n);
    for &e in eig.iter() {
        let mut z = e;
        let mut best = z;
        let mut best_res = {
            let (pr, pi) = poly_eval(c, z);
            pr.hypot(pi)
        };
        for _ in 0..12 {
            let (pr, pi) = poly_eval(c, z);
            let (dr, di) = poly_eval(&dc, z);
            let denom = dr * dr + di * di;
            if denom < 1e-300 {
                break;
            }
            let step = ((pr * dr + pi * di) / denom, (pi * dr - pr * di) / denom);
            z = (z.0 - step.0, z.1 - step.1);
            let (qr, qi) = poly_eval(c, z);
            let res = qr.hypot(qi);
            if res < best_res {
                best_res = res;
                best = z;
            } else {
                break;
            }
        }
        roots.push(best);
    }
    roots
}

/// Multiply two polynomials in tap form.
pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Factor the symbol polynomial of `big_filter` into real factors of degree
/// <= s. Returns tap vectors whose convolution reproduces the input to
/// relative max-norm `RECONSTRUCTION_TOL`; the factor count never exceeds
/// ceil(n/(s-1)).
pub fn factor_filter(big_filter: &[f64], s: usize) -> Result<Vec<Vec<f64>>> {
    if s < 2 {
        return Err(Error::InvalidArgument("filter length s must be >= 2".into()));
    }
    let norm = big_filter.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if norm == 0.0 {
        return Err(Error::InvalidArgument("cannot factor the zero filter".into()));
    }
    let n_total = big_filter.len() - 1;
    if n_total > MAX_FACTOR_DEGREE {
        return Err(Error::BudgetExceeded {
            what: "filter degree",
            value: n_total,
            limit: MAX_FACTOR_DEGREE,
        });
    }
    if n_total <= s {
        // already short enough; keep the taps verbatim (exact)
        return Ok(vec![big_filter.to_vec()]);
    }
    // leading zero taps are roots at z = 0; trailing zeros only lower the degree
    let lead_zeros = big_filter.iter().take_while(|&&x| x == 0.0).count();
    let trail_zeros = big_filter.iter().rev().take_while(|&&x| x == 0.0).count();
    let core = &big_filter[lead_zeros..big_filter.len() - trail_zeros];
    let deg = core.len() - 1;
    let gain = core[deg];

    // atoms are monic real factors of degree 1 or 2 (zero roots, real roots,
    // conjugate pairs); greedy packing into degree-<=s bins closes a bin only
    // when the next atom does not fit, so every closed bin has degree >= s-1
    // and the factor count stays within ceil(n/(s-1)).
    let mut atoms: Vec<Vec<f64>> = Vec::new();
    for _ in 0..lead_zeros {
        atoms.push(vec![0.0, 1.0]);
    }
    if deg > 0 {
        let roots = poly_roots(core);
        let mut used = vec![false; roots.len()];
        let imag_tol = 1e-7 * (1.0 + roots.iter().map(|r| r.0.hypot(r.1)).fold(0.0, f64::max));
        for i in 0..roots.len() {
            if used[i] {
                continue;
            }
            let (re, im) = roots[i];
            if im.abs() <= imag_tol {
                used[i] = true;
                atoms.push(vec![-re, 1.0]);
            } else {
                // closest conjugate partner
                let mut best: Option<(usize, f64)> = None;
                for (j, r) in roots.iter().enumerate() {
                    if j == i || used[j] || r.1.abs() <= imag_tol {
                        continue;
                    }
                    let dist = (r.0 - re).hypot(r.1 + im);
                    if best.map(|(_, d)| dist < d).unwrap_or(true) {
                        best = Some((j, dist));
                    }
                }
                let (j, _) = best.ok_or(Error::IllConditionedFactorization {
                    err: f64::INFINITY,
                    tol: RECONSTRUCTION_TOL,
                })?;
                used[i] = true;
                used[j] = true;
                let (re2, im2) = roots[j];
                atoms.push(vec![re.hypot(im) * re2.hypot(im2), -(re + re2), 1.0]);
            }
        }
    }
    // deterministic order: root magnitude, then degree, then coefficients
    atoms.sort_by(|a, b| {
        let ka = a[0].abs().powf(1.0 / (a.len() as f64 - 1.0));
        let kb = b[0].abs().powf(1.0 / (b.len() as f64 - 1.0));
        ka.partial_cmp(&kb)
            .unwrap()
            .then(a.len().cmp(&b.len()))
            .then(a[0].partial_cmp(&b[0]).unwrap())
    });

    let mut factors: Vec<Vec<f64>> = Vec::new();
    let mut bin: Vec<f64> = vec![1.0];
    for atom in atoms {
        if bin.len() - 1 + atom.len() - 1 <= s {
            bin = poly_mul(&bin, &atom);
        } else {
            factors.push(bin);
            bin = atom;
        }
    }
    for t in bin.iter_mut() {
        *t *= gain;
    }
    factors.push(bin);
    refine_factorization(big_filter, &mut factors);
    // identity pad layers so the compiled width n0 + depth*s covers the wide
    // output n0 + n when the filter has trailing zero taps
    while factors.len() * s < n_total {
        factors.insert(0, vec![1.0]);
    }

    // reconstruction check
    let mut recon = vec![1.0];
    for f in &factors {
        recon = poly_mul(&recon, f);
    }
    recon.resize(big_filter.len(), 0.0);
    let err = recon
        .iter()
        .zip(big_filter)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
        / norm;
    if err > RECONSTRUCTION_TOL {
        return Err(Error::IllConditionedFactorization {
            err,
            tol: RECONSTRUCTION_TOL,
        });
    }
    let bound = if n_total == 0 { 1 } else { (n_total + s - 2) / (s - 1) };
    debug_assert!(factors.len() <= bound.max(1), "{} factors > {}", factors.len(), bound);
    Ok(factors)
}

/// Joint Gauss-Newton polish of all factor coefficients against the target
/// taps. Root-space polishing stalls at multiple roots; the coefficient-space
/// residual stays well conditioned there, so a few least-squares steps take a
/// 1e-9 companion-matrix reconstruction down to machine precision.
fn refine_factorization(target: &[f64], factors: &mut [Vec<f64>]) {
    let m = target.len();
    let unknowns: usize = factors.iter().map(|f| f.len()).sum();
    let norm = target.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    for _ in 0..10 {
        let mut recon = vec![1.0];
        for f in factors.iter() {
            recon = poly_mul(&recon, f);
        }
        recon.resize(m, 0.0);
        let res: Vec<f64> = target.iter().zip(&recon).map(|(a, b)| a - b).collect();
        let err = res.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if err <= 1e-14 * norm {
            break;
        }
        // column (t, j): conv of all factors but t, shifted by j
        let mut jac = DMatrix::<f64>::zeros(m, unknowns);
        let mut col = 0usize;
        for t in 0..factors.len() {
            let mut others = vec![1.0];
            for (u, f) in factors.iter().enumerate() {
                if u != t {
                    others = poly_mul(&others, f);
                }
            }
            for j in 0..factors[t].len() {
                for (k, &ov) in others.iter().enumerate() {
                    if k + j < m {
                        jac[(k + j, col)] = ov;
                    }
                }
                col += 1;
            }
        }
        let rhs = nalgebra::DVector::from_column_slice(&res);
        let svd = jac.svd(true, true);
        let delta = match svd.solve(&rhs, 1e-12) {
            Ok(d) => d,
            Err(_) => break,
        };
        let mut col = 0usize;
        for f in factors.iter_mut() {
            for c in f.iter_mut() {
                *c += delta[col];
                col += 1;
            }
        }
    }
}

/// Result of compiling a wide layer.
#[derive(Debug, Clone)]
pub struct CompiledWide {
    pub net: ConvNet<f64>,
    /// the first `payload_len` entries of the hidden state equal the wide
    /// layer's output; the rest are exact zeros
    pub payload_len: usize,
    pub depth_bound: usize,
}

/// Compile against a scalar box [0, M]^input_dim.
pub fn compile_shallow(spec: &WideLayerSpec, s: usize) -> Result<CompiledWide> {
    let domain = vec![Interval::new(0.0, spec.input_bound); spec.input_dim];
    compile_shallow_boxed(&spec.big_filter, &spec.bias, &domain, s)
}

/// Round a positive magnitude up to the next power of two (exact float).
fn pow2_above(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut p = 1.0f64;
    while p < x {
        p *= 2.0;
    }
    while p * 0.5 >= x {
        p *= 0.5;
    }
    p
}

/// Compile one wide layer over a per-entry input box. Intermediate layers
/// carry bias shifts (power-of-two magnitudes from the interval lower bound)
/// so every intermediate pre-activation is non-negative; the last layer
/// removes the accumulated shift and applies the true bias.
pub fn compile_shallow_boxed(
    big_filter: &[f64],
    bias: &[f64],
    domain: &[Interval],
    s: usize,
) -> Result<CompiledWide> {
    let n = big_filter.len() - 1;
    let n0 = domain.len();
    if bias.len() != n0 + n {
        return Err(Error::DimensionMismatch {
            expected: n0 + n,
            got: bias.len(),
            context: "wide layer bias",
        });
    }
    let factors = factor_filter(big_filter, s)?;
    let depth = factors.len();
    let mut net = ConvNet::identity(n0);

    // true partial-conv intervals, and the shift carried on the live prefix
    let mut true_iv: Vec<Interval> = domain.to_vec();
    let mut shift: Vec<f64> = vec![0.0; n0];

    for (t, factor) in factors.iter().enumerate() {
        let last = t + 1 == depth;
        let mut taps = factor.clone();
        taps.resize(s + 1, 0.0);
        let filter = Filter::new(taps)?;

        let conv_true = conv_intervals(&filter, &true_iv);
        // conv of the carried shift vector
        let shift_conv = {
            let w = &filter;
            let mut out = vec![0.0; shift.len() + s];
            for (k, &sv) in shift.iter().enumerate() {
                if sv != 0.0 {
                    for (j, &wj) in w.taps.iter().enumerate() {
                        out[k + j] += wj * sv;
                    }
                }
            }
            out
        };

        let out_w = true_iv.len() + s;
        let mut layer_bias = vec![0.0; out_w];
        let mut new_shift = vec![0.0; out_w];
        if last {
            let mut padded_bias = bias.to_vec();
            padded_bias.resize(out_w, 0.0);
            for e in 0..out_w {
                layer_bias[e] = padded_bias[e] - shift_conv[e];
            }
        } else {
            for e in 0..out_w {
                let need = (-conv_true[e].lo).max(0.0);
                let sft = pow2_above(need);
                new_shift[e] = sft;
                layer_bias[e] = sft - shift_conv[e];
            }
        }
        net.layers.push(ConvLayer {
            filter,
            bias: layer_bias,
        });
        true_iv = conv_true;
        if last {
            for (iv, b) in true_iv.iter_mut().zip(bias) {
                iv.lo += b;
                iv.hi += b;
                *iv = iv.relu();
            }
        }
        shift = new_shift;
    }

    let bound = if n == 0 { 1 } else { (n + s - 2) / (s - 1) };
    debug_assert!(depth <= bound.max(1));
    Ok(CompiledWide {
        net,
        payload_len: n0 + n,
        depth_bound: bound.max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn already_short_filter_single_factor() {
        let f = factor_filter(&[1.0, 2.0, 1.0], 2).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f[0][0] - 1.0).abs() < 1e-12 && (f[0][1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_roots_of_unity() {
        // taps (1, 0, 0, -1): 1 - z^3 = (1 - z)(1 + z + z^2)
        let f = factor_filter(&[1.0, 0.0, 0.0, -1.0], 2).unwrap();
        let mut recon = vec![1.0];
        for fac in &f {
            recon = poly_mul(&recon, fac);
        }
        recon.resize(4, 0.0);
        for (a, b) in recon.iter().zip(&[1.0, 0.0, 0.0, -1.0]) {
            assert!((a - b).abs() < 1e-10, "{recon:?}");
        }
    }

    #[test]
    fn random_degree16_filters_factor_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let taps: Vec<f64> = (0..17).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = factor_filter(&taps, 3).unwrap();
            assert!(f.len() <= 8, "{} factors", f.len());
        }
    }

    #[test]
    fn sparse_gadget_style_filters() {
        // the shapes the gadget builders emit
        for (mut taps, s) in [
            (vec![0.0; 22], 2usize), // z^3 + z^7 pattern at L=3 built below
            (vec![1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 1.0], 2),
            (vec![1.0, 0.0, -1.0, 0.0, 1.0], 3),
        ] {
            if taps.iter().all(|&x| x == 0.0) {
                taps[9] = 1.0;
                taps[21] = 1.0;
            }
            let f = factor_filter(&taps, s).unwrap();
            let mut recon = vec![1.0];
            for fac in &f {
                recon = poly_mul(&recon, fac);
            }
            recon.resize(taps.len(), 0.0);
            let err: f64 = recon
                .iter()
                .zip(&taps)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-9, "reconstruction {err} for {taps:?}");
        }
    }

    #[test]
    fn identity_spec_compiles_to_passthrough() {
        // w = e_0, b = 0: payload = x for x >= 0
        let spec = WideLayerSpec::new(vec![1.0, 0.0], vec![0.0; 4], 3, 1.0).unwrap();
        let c = compile_shallow(&spec, 2).unwrap();
        let x = [0.25, 0.75, 0.5];
        let h = c.net.eval_hidden(&x).unwrap();
        let oracle = spec.eval(&x);
        for (a, b) in h[..c.payload_len].iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        for v in &h[c.payload_len..] {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn random_wide_layers_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..10 {
            let n = rng.gen_range(2..=8usize);
            let s = if trial % 2 == 0 { 2 } else { 3 };
            let n0 = rng.gen_range(1..=4usize);
            let taps: Vec<f64> = (0..n + 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let bias: Vec<f64> = (0..n0 + n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let spec = WideLayerSpec::new(taps, bias, n0, 1.0).unwrap();
            let compiled = compile_shallow(&spec, s).unwrap();
            assert!(compiled.net.depth() <= compiled.depth_bound);
            for _ in 0..200 {
                let x: Vec<f64> = (0..n0).map(|_| rng.gen_range(0.0..1.0)).collect();
                let oracle = spec.eval(&x);
                let h = compiled.net.eval_hidden(&x).unwrap();
                let scale = oracle.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
                for (a, b) in h[..compiled.payload_len].iter().zip(&oracle) {
                    assert!(
                        (a - b).abs() <= 1e-8 * scale,
                        "payload mismatch: {a} vs {b} (n={n} s={s})"
                    );
                }
            }
        }
    }

    #[test]
    fn depth_bound_formula() {
        // n = 5, s = 3 -> depth <= 3
        let taps: Vec<f64> = vec![0.3, -1.2, 0.8, 0.1, -0.4, 0.9];
        let spec = WideLayerSpec::new(taps, vec![0.1; 7], 2, 1.0).unwrap();
        let c = compile_shallow(&spec, 3).unwrap();
        assert!(c.net.depth() <= 3);
    }

    #[test]
    fn degree_cap_enforced() {
        let taps = vec![1.0; 70];
        assert!(matches!(
            factor_filter(&taps, 2),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
