//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector integrands.

use std::collections::BinaryHeap;

use crate::{Error, Result};

const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes XK[1], XK[3], XK[5], XK[7].
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-14, rel_tol: 1e-10, max_subdivisions: 2000 }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Vec<f64>,
    /// Largest component error estimate.
    pub error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    key: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.key.total_cmp(&o.key)
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64, dim: usize) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut add = |x: f64, wk: f64, wg: f64| -> Result<()> {
        let v = f(x)?;
        if v.len() != dim {
            return Err(Error::Quadrature { a, b, reason: "integrand dimension changed".into() });
        }
        for i in 0..dim {
            if !v[i].is_finite() {
                return Err(Error::Quadrature { a, b, reason: format!("non-finite integrand at {x}") });
            }
            k[i] += wk * v[i];
            g[i] += wg * v[i];
        }
        Ok(())
    };
    add(c, WK[7], WG[3])?;
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        add(c - h * XK[j], WK[j], wg)?;
        add(c + h * XK[j], WK[j], wg)?;
    }
    let value: Vec<f64> = k.iter().map(|v| v * h).collect();
    let error = k.iter().zip(&g).map(|(kv, gv)| ((kv - gv) * h).abs()).collect();
    Ok((value, error))
}

/// Integrates a vector-valued `f` over `[points[0], points[last]]`, with the
/// intermediate points used as initial breakpoints. Stops when the summed
/// error estimate of every component is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_vec<F>(mut f: F, points: &[f64], dim: usize, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] > w[0])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Quadrature {
            a: points.first().copied().unwrap_or(f64::NAN),
            b: points.last().copied().unwrap_or(f64::NAN),
            reason: "breakpoints must be finite and strictly increasing".into(),
        });
    }
    let (lo, hi) = (points[0], points[points.len() - 1]);
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let push = |heap: &mut BinaryHeap<Segment>, a, b, (value, error): (Vec<f64>, Vec<f64>)| {
        let key = error.iter().cloned().fold(0.0, f64::max);
        heap.push(Segment { a, b, value, error, key });
    };
    for w in points.windows(2) {
        let r = kronrod(&mut f, w[0], w[1], dim)?;
        evaluations += 15;
        push(&mut heap, w[0], w[1], r);
    }
    let mut subdivisions = 0;
    loop {
        let mut total = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        for s in heap.iter() {
            for i in 0..dim {
                total[i] += s.value[i];
                err[i] += s.error[i];
            }
        }
        let converged = (0..dim).all(|i| err[i] <= opts.abs_tol.max(opts.rel_tol * total[i].abs()));
        if converged {
            return Ok(QuadResult {
                value: total,
                error: err.iter().cloned().fold(0.0, f64::max),
                subdivisions,
                evaluations,
            });
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::Quadrature {
                a: lo,
                b: hi,
                reason: format!(
                    "no convergence after {subdivisions} subdivisions (error {:.3e})",
                    err.iter().cloned().fold(0.0, f64::max)
                ),
            });
        }
        let worst = heap.pop().expect("segments present");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Quadrature { a: worst.a, b: worst.b, reason: "interval too small to bisect".into() });
        }
        let left = kronrod(&mut f, worst.a, mid, dim)?;
        let right = kronrod(&mut f, mid, worst.b, dim)?;
        evaluations += 30;
        push(&mut heap, worst.a, mid, left);
        push(&mut heap, mid, worst.b, right);
        subdivisions += 1;
    }
}

/// Scalar convenience wrapper; returns `(value, error)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x| Ok(vec![f(x)]), &[a, b], 1, opts)?;
    Ok((r.value[0], r.error))
}
