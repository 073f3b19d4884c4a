//! Test-only oracles: adaptive quadrature, exact ball masses and summary
//! statistics.
#![allow(dead_code)]

use std::f64::consts::PI;

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    // several starting panels so narrow peaks are not missed
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_rec(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// Iterated adaptive Simpson over `[a, b] × [c, d]`.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
    tol: f64,
) -> f64 {
    integrate(|x| integrate(|y| f(x, y), c, d, tol), a, b, tol)
}

/// Half-width beyond which the radial profile `g` stays below `1e-14·g(0)`.
pub fn truncation(g: impl Fn(f64) -> f64) -> f64 {
    let peak = g(0.0);
    let mut r = 1.0;
    while g(r) > 1e-14 * peak {
        r *= 1.25;
    }
    r
}

const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Standard normal probability of `[a, b]`, composite 8-point Gauss–Legendre.
pub fn normal_mass(a: f64, b: f64) -> f64 {
    let pieces = 4;
    let h = (b - a) / pieces as f64;
    let r = h / 2.0;
    let mut s = 0.0;
    for p in 0..pieces {
        let c = a + h * (p as f64 + 0.5);
        for j in 0..4 {
            for sgn in [-1.0, 1.0] {
                let x = c + sgn * r * GL_X[j];
                s += GL_W[j] * r * (-0.5 * x * x).exp();
            }
        }
    }
    s / (2.0 * PI).sqrt()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Variance with divisor `n`.
pub fn pop_var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

/// Standard deviation with divisor `n − 1`.
pub fn sd(v: &[f64]) -> f64 {
    (pop_var(v) * v.len() as f64 / (v.len() - 1) as f64).sqrt()
}

pub fn std_err(v: &[f64]) -> f64 {
    sd(v) / (v.len() as f64).sqrt()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
