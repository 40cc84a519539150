//! Independent reference computations. Nothing here calls the crate's
//! solvers; only parameter structs and right-hand sides are shared.

#![allow(dead_code)]

use grn_core::hopf::HopfCoefficients;
use grn_core::{CoreParams, LogisticModelParams, Model, State, WeightedModelParams};
use num_complex::Complex64;

pub fn lin() -> LogisticModelParams {
    LogisticModelParams::from_core(CoreParams::reference())
}

pub fn wl() -> WeightedModelParams {
    WeightedModelParams::from_core(CoreParams::reference()).unwrap()
}

/// Plain bisection on a sign change.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn dec(x: f64, theta: f64, lambda: f64) -> f64 {
    1.0 / (1.0 + (lambda * (x - theta)).exp())
}

fn inc(x: f64, theta: f64, lambda: f64) -> f64 {
    1.0 / (1.0 + (-lambda * (x - theta)).exp())
}

/// Delay-free production minus decay, written out from scratch.
pub fn field(model: &Model, s: State) -> (f64, f64) {
    match model {
        Model::LinearAdditive(p) => {
            let c = &p.core;
            (
                (c.g_a + c.g_ab * s.b) * dec(s.a, c.a0, p.lambda_a) - c.gamma_a * s.a,
                (c.g_b + c.g_ba * s.a) * dec(s.b, c.b0, p.lambda_b) - c.gamma_b * s.b,
            )
        }
        Model::Weighted(p) => {
            let c = &p.core;
            (
                p.kappa_1 * inc(c.g_ab * s.b, p.theta_b, p.lambda_1) * dec(s.a, c.a0, p.lambda_3)
                    - c.gamma_a * s.a,
                p.kappa_2 * inc(c.g_ba * s.a, p.theta_a, p.lambda_2) * dec(s.b, c.b0, p.lambda_4)
                    - c.gamma_b * s.b,
            )
        }
        Model::Hill(_) => unimplemented!("oracle covers the logistic forms"),
    }
}

/// Positive equilibrium by nested bisection: the B equation is decreasing in
/// B for fixed A >= 0, so B(A) is unique; then bisect the A equation along
/// that curve.
pub fn equilibrium_by_bisection(model: &Model) -> State {
    let b_of = |a: f64| {
        let g = |b: f64| field(model, State::new(a, b)).1;
        let mut hi = 1.0;
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        bisect(g, 0.0, hi)
    };
    let r = |a: f64| field(model, State::new(a, b_of(a))).0;
    let mut hi = 1.0;
    while r(hi) > 0.0 {
        hi *= 2.0;
    }
    let a = bisect(r, 0.0, hi);
    State::new(a, b_of(a))
}

/// Characteristic function of the linearised delayed system.
pub fn char_fn(c: &HopfCoefficients, mu: Complex64, tau: f64) -> Complex64 {
    let e = (-mu * tau).exp();
    (mu + c.gamma_a + c.alpha_a * e) * (mu + c.gamma_b + c.alpha_b * e) - c.beta
}

/// Complex Newton with a central-difference derivative in μ.
pub fn root_near(c: &HopfCoefficients, mut mu: Complex64, tau: f64) -> Complex64 {
    let h = 1e-7;
    for _ in 0..100 {
        let f = char_fn(c, mu, tau);
        let d = (char_fn(c, mu + h, tau) - char_fn(c, mu - h, tau)) / (2.0 * h);
        let step = f / d;
        mu -= step;
        if step.norm() < 1e-14 {
            break;
        }
    }
    mu
}

/// `d Re μ / dτ` by tracking the crossing root at `τ ± δ`.
pub fn perturbed_root_transversality(c: &HopfCoefficients, omega: f64, tau: f64) -> f64 {
    let delta = 1e-4;
    let start = Complex64::new(0.0, omega);
    let up = root_near(c, start, tau + delta);
    let down = root_near(c, start, tau - delta);
    (up.re - down.re) / (2.0 * delta)
}

/// Golden-section maximisation on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Central-difference Jacobian of [`field`].
pub fn fd_jacobian(model: &Model, s: State) -> [[f64; 2]; 2] {
    let h = 1e-4;
    let col = |ds: State| {
        let p = field(model, s + ds);
        let m = field(model, s - ds);
        ((p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h))
    };
    let (a0, b0) = col(State::new(h, 0.0));
    let (a1, b1) = col(State::new(0.0, h));
    [[a0, a1], [b0, b1]]
}

/// All second partials of both components by central differences,
/// `[d2/dA2, d2/dAdB, d2/dB2]` per component.
pub fn fd_hessians(model: &Model, s: State) -> [[f64; 3]; 2] {
    let h = 1e-2;
    let f = |da: f64, db: f64| field(model, State::new(s.a + da, s.b + db));
    let c = f(0.0, 0.0);
    let (pa, ma, pb, mb) = (f(h, 0.0), f(-h, 0.0), f(0.0, h), f(0.0, -h));
    let (pp, pm, mp, mm) = (f(h, h), f(h, -h), f(-h, h), f(-h, -h));
    let comp = |sel: fn((f64, f64)) -> f64| {
        [
            (sel(pa) - 2.0 * sel(c) + sel(ma)) / (h * h),
            (sel(pp) - sel(pm) - sel(mp) + sel(mm)) / (4.0 * h * h),
            (sel(pb) - 2.0 * sel(c) + sel(mb)) / (h * h),
        ]
    };
    [comp(|v| v.0), comp(|v| v.1)]
}
