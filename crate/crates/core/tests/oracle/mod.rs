//! Reference implementations used only by tests. Nothing here calls into the
//! library under test or into statrs.

#![allow(dead_code)]

use std::f64::consts::PI;

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)`, Lanczos approximation with g = 7.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + 7.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub fn t_density(x: f64, df: f64) -> f64 {
    let c = (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0)).exp() / (df * PI).sqrt();
    c * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `∫_a^b f` by adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Upper tail `P(T > t)` of Student's t with `df` degrees of freedom.
pub fn t_upper_tail(t: f64, df: f64) -> f64 {
    let f = |x: f64| t_density(x, df);
    if t >= 0.0 {
        0.5 - integrate(&f, 0.0, t, 1e-13)
    } else {
        0.5 + integrate(&f, t, 0.0, 1e-13)
    }
}

/// One-tailed Welch p-value for `mean(a) − mean(b) > d`, from two-pass
/// moments and the integrated t density.
pub fn welch_p(a: &[f64], b: &[f64], d: f64) -> f64 {
    let moments = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (na, ma, va) = moments(a);
    let (nb, mb, vb) = moments(b);
    let se2 = va / na + vb / nb;
    let t = (ma - mb - d) / se2.sqrt();
    let df = se2.powi(2) / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    t_upper_tail(t, df)
}

/// Midrank of every entry: number of smaller values plus half the ties.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|w| *w < v).count() as f64;
            let equal = x.iter().filter(|w| *w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Exact `P(W ≥ W_obs)` for the rank sum of `a` in `a ∪ (b + d)`, by listing
/// every subset of the pooled positions with `|a|` members.
pub fn rank_sum_p_brute(a: &[f64], b: &[f64], d: f64) -> f64 {
    let pooled: Vec<f64> = a.iter().copied().chain(b.iter().map(|x| x + d)).collect();
    let ranks = midranks(&pooled);
    let n = pooled.len();
    let observed: f64 = ranks[..a.len()].iter().sum();
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        total += 1;
        let w: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        if w >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

/// Small deterministic generator for fixtures.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Roughly normal via the sum of twelve uniforms.
    pub fn next_gauss(&mut self) -> f64 {
        (0..12).map(|_| self.next_f64()).sum::<f64>() - 6.0
    }

    pub fn sample(&mut self, n: usize, mean: f64, sd: f64) -> Vec<f64> {
        (0..n).map(|_| mean + sd * self.next_gauss()).collect()
    }
}

/// Twenty `(a, b, d)` fixtures covering small and large df, both tails and
/// unequal variances.
pub fn welch_fixtures() -> Vec<(Vec<f64>, Vec<f64>, f64)> {
    let shapes: [(usize, usize, f64, f64, f64, f64, f64); 20] = [
        (2, 2, 10.0, 1.0, 9.0, 1.0, 0.0),
        (2, 3, 5.0, 2.0, 4.0, 0.5, 0.1),
        (3, 3, 0.0, 1.0, 0.0, 1.0, 0.0),
        (3, 8, 1.0, 0.3, 0.0, 2.0, 0.5),
        (4, 4, 100.0, 5.0, 95.0, 5.0, 0.95),
        (5, 20, 88.0, 3.0, 87.0, 6.0, 0.88),
        (6, 6, -3.0, 1.0, -2.0, 1.0, 0.0),
        (8, 5, 50.0, 10.0, 40.0, 1.0, 0.4),
        (10, 10, 1.0, 1.0, 1.0, 1.0, 0.0),
        (10, 30, 2.0, 0.1, 1.5, 0.4, 0.015),
        (12, 12, 137.0, 9.0, 128.0, 11.0, 1.28),
        (15, 9, 0.0, 4.0, 3.0, 1.0, -1.0),
        (20, 20, 93.5, 5.0, 93.5, 5.0, 0.935),
        (25, 40, 10.0, 2.0, 9.0, 3.0, 0.5),
        (30, 30, 0.0, 1.0, -0.5, 1.0, 0.0),
        (40, 15, 5.0, 0.5, 4.9, 2.5, 0.0),
        (50, 50, 136.9, 8.0, 135.0, 8.0, 1.35),
        (60, 70, 0.0, 1.0, 0.0, 3.0, 0.2),
        (100, 100, 20.0, 2.0, 19.0, 2.0, 0.2),
        (200, 150, 87.9, 4.0, 87.0, 4.0, 0.87),
    ];
    let mut rng = Lcg(20_240_601);
    shapes
        .iter()
        .map(|&(na, nb, ma, sa, mb, sb, d)| (rng.sample(na, ma, sa), rng.sample(nb, mb, sb), d))
        .collect()
}
