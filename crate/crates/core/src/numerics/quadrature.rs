//! Adaptive Gauss–Kronrod quadrature.

use crate::error::{Error, Result};

// 7-point Gauss / 15-point Kronrod nodes on [-1, 1] (non-negative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 20_000;

/// One G7/K15 panel: returns (kronrod estimate, |kronrod - gauss|).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol` by global
/// bisection of the worst panel.
pub fn integrate<F>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&mut f, lo, hi);
    let mut panels = vec![(lo, hi, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol {
        if !total.is_finite() {
            return Err(Error::Quadrature {
                a,
                b,
                reason: "integrand is not finite".into(),
            });
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                a,
                b,
                reason: format!("error estimate {err:e} above {abs_tol:e} after {MAX_INTERVALS} panels"),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (pa, pb, pv, pe) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return Err(Error::Quadrature {
                a,
                b,
                reason: format!("panel [{pa:e}, {pb:e}] cannot be split further"),
            });
        }
        let (v1, e1) = gk15(&mut f, pa, mid);
        let (v2, e2) = gk15(&mut f, mid, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
        // re-sum occasionally to avoid drift in the running totals
        if panels.len() % 64 == 0 {
            total = panels.iter().map(|p| p.2).sum();
            err = panels.iter().map(|p| p.3).sum();
        }
    }
    if !total.is_finite() {
        return Err(Error::Quadrature {
            a,
            b,
            reason: "integrand is not finite".into(),
        });
    }
    Ok(sign * total)
}
