//! Brute-force reference integrals for unit tests. Composite Simpson on fixed
//! panels after a variable change; shares no code with `numerics`.

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `K1(x) = int_0^inf exp(-x cosh t) cosh t dt`.
pub fn bessel_k1(x: f64) -> f64 {
    let upper = (760.0 / x).max(2.0).acosh() + 1.0;
    simpson(|t| (-x * t.cosh()).exp() * t.cosh(), 0.0, upper, 400_000)
}

/// `E1(x) = int_1^inf exp(-x t) / t dt`, with `t = e^v`.
pub fn exp_integral_e1(x: f64) -> f64 {
    let upper = (760.0 / x).ln().max(1.0) + 1.0;
    simpson(|v| (-x * v.exp()).exp(), 0.0, upper, 400_000)
}

/// `Psi(n, n; z) = int_0^inf exp(-z t) t^(n-1) / (1 + t) dt / (n-1)!`, with `t = e^v`.
pub fn tricomi_psi(n: u32, z: f64) -> f64 {
    let nf = n as f64;
    let lo = -45.0 / nf;
    let hi = (800.0 * (1.0 + nf) / z).ln() + 1.0;
    let fact: f64 = (1..n).map(|k| k as f64).product();
    simpson(
        |v| (-z * v.exp() + nf * v).exp() / (1.0 + v.exp()),
        lo,
        hi,
        400_000,
    ) / fact
}

/// `int_0^inf f(z) dz` for a decaying integrand, with `z = e^v`.
pub fn semi_infinite<F: Fn(f64) -> f64>(f: F, v_lo: f64, v_hi: f64) -> f64 {
    simpson(|v| f(v.exp()) * v.exp(), v_lo, v_hi, 400_000)
}

/// `int_a^b f`.
pub fn finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    simpson(f, a, b, 400_000)
}

/// `int_0^inf int_0^inf f(x, y) dx dy` with `x = e^u`, `y = e^v`, on a
/// `panels x panels` grid.
pub fn semi_infinite_2d<F: Fn(f64, f64) -> f64>(f: F, lo: [f64; 2], hi: [f64; 2], panels: usize) -> f64 {
    simpson(
        |u| {
            let x = u.exp();
            x * simpson(|v| f(x, v.exp()) * v.exp(), lo[1], hi[1], panels)
        },
        lo[0],
        hi[0],
        panels,
    )
}
