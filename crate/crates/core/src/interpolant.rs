//! The sparse-grid interpolant I_n f = sum over |l|_1 <= n+d-1 of
//! hierarchical terms v_{l,i} phi^alpha_{l,i}. Surpluses are computed by
//! interpolatory hierarchization, level-sum ascending: each surplus is the
//! interpolation defect of all strictly coarser included terms at the node.

use crate::basis::{basis_degree, Basis1D};
use crate::error::Result;
use crate::index::{enumerate_levels, HierNode, MultiIndex};
use crate::scalar::Real;
use crate::testfn::KorobovTestFn;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct Term<R: Real> {
    pub node: HierNode,
    pub degrees: MultiIndex,
    pub surplus: R,
}

#[derive(Debug, Clone)]
pub struct SparseGridInterpolant<R: Real> {
    pub d: usize,
    pub m: u32,
    pub n: u32,
    pub terms: Vec<Term<R>>,
    /// level vector -> (bases per direction, index-vector -> term position)
    by_level: HashMap<Vec<u32>, LevelGroup<R>>,
}

#[derive(Debug, Clone)]
struct LevelGroup<R: Real> {
    degrees: Vec<u32>,
    /// per direction: basis for every odd index at this level, keyed by (i-1)/2
    bases: Vec<Vec<Basis1D<R>>>,
    terms: HashMap<Vec<u32>, usize>,
}

impl<R: Real> SparseGridInterpolant<R> {
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Evaluate at a point: per admissible level vector there is at most one
    /// basis whose support contains x in each direction, located directly.
    pub fn eval(&self, x: &[R]) -> R {
        debug_assert_eq!(x.len(), self.d);
        let mut acc = R::zero();
        for group in self.by_level.values() {
            acc = acc + group.eval(x, &self.terms);
        }
        acc
    }

    pub fn eval_many(&self, xs: &[Vec<R>]) -> Vec<R>
    where
        R: Send + Sync,
    {
        use rayon::prelude::*;
        xs.par_iter().map(|x| self.eval(x)).collect()
    }
}

impl<R: Real> LevelGroup<R> {
    fn eval(&self, x: &[R], terms: &[Term<R>]) -> R {
        let d = x.len();
        let mut idx = vec![0u32; d];
        let mut w = R::one();
        for j in 0..d {
            let l = self.bases[j][0].level;
            // locate the odd index whose support (i-1)/2^l .. (i+1)/2^l holds x
            let h2 = R::from_f64((0.5f64).powi(l as i32 - 1)); // 2h
            let cell = (x[j] / h2).floor().to_f64().unwrap_or(0.0) as i64;
            let cell = cell.clamp(0, (1i64 << (l - 1)) - 1) as u32;
            let i = 2 * cell + 1;
            idx[j] = i;
            w = w * self.bases[j][cell as usize].eval(x[j]);
            if w == R::zero() {
                return R::zero();
            }
        }
        match self.terms.get(&idx) {
            Some(&pos) => w * terms[pos].surplus,
            None => R::zero(),
        }
    }
}

/// Interpolatory hierarchization of f on the sparse grid (n, m, d).
pub fn hierarchize<R: Real>(
    f: &KorobovTestFn<R>,
    n: u32,
    m: u32,
    d: usize,
) -> Result<SparseGridInterpolant<R>> {
    let nodes = enumerate_levels(n, d);
    let mut interp = SparseGridInterpolant {
        d,
        m,
        n,
        terms: Vec::with_capacity(nodes.len()),
        by_level: HashMap::new(),
    };
    // nodes arrive level-sum ascending, which is the data dependency order
    for node in nodes {
        let degrees = basis_degree(m, &node.level)?;
        let x = node.coordinates::<R>();
        let partial = interp.eval(&x);
        let surplus = f.eval(&x) - partial;
        push_term(&mut interp, node, degrees, surplus)?;
    }
    Ok(interp)
}

fn push_term<R: Real>(
    interp: &mut SparseGridInterpolant<R>,
    node: HierNode,
    degrees: MultiIndex,
    surplus: R,
) -> Result<()> {
    let pos = interp.terms.len();
    let lv = node.level.0.clone();
    if !interp.by_level.contains_key(&lv) {
        let mut bases = Vec::with_capacity(interp.d);
        for j in 0..interp.d {
            let l = lv[j];
            let mut per_dir = Vec::with_capacity(1usize << (l - 1));
            for i in (1..(1u32 << l)).step_by(2) {
                per_dir.push(Basis1D::<R>::new(l, i, degrees.0[j])?);
            }
            bases.push(per_dir);
        }
        interp.by_level.insert(
            lv.clone(),
            LevelGroup {
                degrees: degrees.0.clone(),
                bases,
                terms: HashMap::new(),
            },
        );
    }
    let group = interp.by_level.get_mut(&lv).unwrap();
    debug_assert_eq!(group.degrees, degrees.0);
    group.terms.insert(node.index.0.clone(), pos);
    interp.terms.push(Term {
        node,
        degrees,
        surplus,
    });
    Ok(())
}

/// Deterministic sample sets for error measurement.
#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    /// points_per_axis^d tensor grid including the boundary
    TensorGrid { points_per_axis: usize },
    /// Halton sequence, `count` points
    Halton { count: usize },
}

impl Sampler {
    pub fn points<R: Real>(&self, d: usize) -> Vec<Vec<R>> {
        match *self {
            Sampler::TensorGrid { points_per_axis } => {
                let mut pts = Vec::new();
                let mut idx = vec![0usize; d];
                'outer: loop {
                    pts.push(
                        idx.iter()
                            .map(|&i| R::from_f64(i as f64 / (points_per_axis - 1) as f64))
                            .collect(),
                    );
                    let mut j = d;
                    loop {
                        if j == 0 {
                            break 'outer;
                        }
                        j -= 1;
                        idx[j] += 1;
                        if idx[j] < points_per_axis {
                            break;
                        }
                        idx[j] = 0;
                    }
                }
                pts
            }
            Sampler::Halton { count } => {
                const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
                (0..count)
                    .map(|k| {
                        (0..d)
                            .map(|j| {
                                let b = PRIMES[j % PRIMES.len()];
                                let mut f = 1.0f64;
                                let mut r = 0.0f64;
                                let mut i = (k + 1) as u64;
                                while i > 0 {
                                    f /= b as f64;
                                    r += f * (i % b) as f64;
                                    i /= b;
                                }
                                R::from_f64(r)
                            })
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

/// Estimated ||f - I_n f||_p over the sampler's point set; p = None is the
/// sup norm (a lower estimate by sampling), finite p averages |.|^p.
pub fn interp_error<R: Real + Send + Sync>(
    f: &KorobovTestFn<R>,
    interp: &SparseGridInterpolant<R>,
    p: Option<f64>,
    sampler: Sampler,
) -> R {
    use rayon::prelude::*;
    let pts = sampler.points::<R>(interp.d);
    match p {
        None => pts
            .par_iter()
            .map(|x| (f.eval(x) - interp.eval(x)).abs())
            .reduce(R::zero, |a, b| if a > b { a } else { b }),
        Some(p) => {
            let sum: f64 = pts
                .par_iter()
                .map(|x| {
                    (f.eval(x) - interp.eval(x))
                        .abs()
                        .powf(R::from_f64(p))
                        .to_f64()
                        .unwrap()
                })
                .sum();
            R::from_f64((sum / pts.len() as f64).powf(1.0 / p))
        }
    }
}

// ---- JSON export: {d, m, n, terms: [{l, i, alpha, v}]} ----

#[derive(Serialize, Deserialize)]
struct TermJson {
    l: Vec<u32>,
    i: Vec<u32>,
    alpha: Vec<u32>,
    v: f64,
}

#[derive(Serialize, Deserialize)]
struct InterpolantJson {
    d: usize,
    m: u32,
    n: u32,
    terms: Vec<TermJson>,
}

impl SparseGridInterpolant<f64> {
    pub fn to_json(&self) -> Result<String> {
        let doc = InterpolantJson {
            d: self.d,
            m: self.m,
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    l: t.node.level.0.clone(),
                    i: t.node.index.0.clone(),
                    alpha: t.degrees.0.clone(),
                    v: t.surplus,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: InterpolantJson = serde_json::from_str(s)?;
        let mut interp = SparseGridInterpolant {
            d: doc.d,
            m: doc.m,
            n: doc.n,
            terms: Vec::new(),
            by_level: HashMap::new(),
        };
        for t in doc.terms {
            let node = HierNode::new(t.l, t.i)?;
            push_term(&mut interp, node, t.alpha.into(), t.v)?;
        }
        Ok(interp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::{polyprod, sinprod, zero_fn};
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_term_reproduces_parabola() {
        let f = polyprod::<f64>(1);
        let interp = hierarchize(&f, 1, 2, 1).unwrap();
        assert_eq!(interp.term_count(), 1);
        assert_abs_diff_eq!(interp.terms[0].surplus, 0.25, epsilon = 1e-15);
        for t in 0..=64 {
            let x = t as f64 / 64.0;
            assert_abs_diff_eq!(interp.eval(&[x]), f.eval(&[x]), epsilon = 1e-15);
        }
    }

    #[test]
    fn tensor_parabola_2d() {
        let f = polyprod::<f64>(2);
        let interp = hierarchize(&f, 1, 2, 2).unwrap();
        assert_eq!(interp.term_count(), 1);
        assert_abs_diff_eq!(interp.terms[0].surplus, 1.0 / 16.0, epsilon = 1e-15);
        let err = interp_error(
            &f,
            &interp,
            None,
            Sampler::TensorGrid { points_per_axis: 33 },
        );
        assert!(err <= 1e-12, "exactness case failed: {err}");
    }

    #[test]
    fn zero_function_all_zero_surpluses() {
        let interp = hierarchize(&zero_fn::<f64>(2), 3, 2, 2).unwrap();
        assert!(interp.terms.iter().all(|t| t.surplus == 0.0));
        assert_eq!(
            interp_error(
                &zero_fn::<f64>(2),
                &interp,
                None,
                Sampler::TensorGrid { points_per_axis: 9 }
            ),
            0.0
        );
    }

    #[test]
    fn interpolation_property_at_grid_points() {
        for (d, m, n) in [(1usize, 2u32, 4u32), (2, 2, 3), (1, 3, 4), (2, 3, 3)] {
            let f = sinprod::<f64>(d);
            let interp = hierarchize(&f, n, m, d).unwrap();
            for t in &interp.terms {
                let x = t.node.coordinates::<f64>();
                assert!(
                    (interp.eval(&x) - f.eval(&x)).abs() <= 1e-10,
                    "defect at {:?} (d={d} m={m} n={n})",
                    t.node
                );
            }
        }
    }

    #[test]
    fn sup_error_decays_for_sinprod() {
        let f = sinprod::<f64>(2);
        let mut prev = f64::INFINITY;
        for n in 2..=6 {
            let interp = hierarchize(&f, n, 2, 2).unwrap();
            let err = interp_error(
                &f,
                &interp,
                None,
                Sampler::TensorGrid { points_per_axis: 65 },
            );
            assert!(err < prev, "no decay at n={n}: {err} vs {prev}");
            prev = err;
        }
    }

    #[test]
    fn json_round_trip() {
        let f = sinprod::<f64>(2);
        let interp = hierarchize(&f, 3, 2, 2).unwrap();
        let s = interp.to_json().unwrap();
        let back = SparseGridInterpolant::from_json(&s).unwrap();
        assert_eq!(back.term_count(), interp.term_count());
        for t in 0..10 {
            let x = vec![t as f64 / 10.0, 1.0 - t as f64 / 10.0];
            assert_abs_diff_eq!(back.eval(&x), interp.eval(&x), epsilon = 1e-15);
        }
    }

    #[test]
    fn l2_error_below_sup_error() {
        let f = sinprod::<f64>(1);
        let interp = hierarchize(&f, 4, 2, 1).unwrap();
        let sup = interp_error(&f, &interp, None, Sampler::TensorGrid { points_per_axis: 257 });
        let l2 = interp_error(&f, &interp, Some(2.0), Sampler::TensorGrid { points_per_axis: 257 });
        assert!(l2 <= sup + 1e-15);
    }
}
