//! Adaptive Gauss–Kronrod quadrature and the exterior kernel integral
//! `T(x) = ∫_{ℝⁿ∖Q} |x − y|^{−(n+sp)} dy` for a centered cube `Q = [-M, M]ⁿ`.

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
    0.209_482_141_084_728,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel; returns the Kronrod estimate and the
/// Kronrod–Gauss difference.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth - 1) + adapt(f, mid, b, 0.5 * tol, depth - 1)
}

/// Integrates `f` over `[a, b]` to roughly `rel_tol` relative accuracy.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (rough, _) = gk15(&f, a, b);
    let tol = (rel_tol * rough.abs()).max(f64::MIN_POSITIVE);
    adapt(&f, a, b, tol, 40)
}

/// `∫_{ℝⁿ∖[-M,M]ⁿ} |x − y|^{−(n+sp)} dy` for `x` strictly inside the cube.
///
/// In one dimension this is closed form. In two dimensions, polar coordinates
/// around `x` reduce it to `(1/sp) ∮ ρ(θ)^{−sp} dθ`, with `ρ(θ)` the distance to
/// the cube boundary along direction `θ`; each side contributes
/// `d^{−sp}/sp · ∫ cos^{sp}θ dθ` over the angles hitting it.
pub fn exterior_kernel_integral(x: [f64; 2], n: usize, half_width: f64, sp: f64) -> f64 {
    let m = half_width;
    match n {
        1 => ((m + x[0]).powf(-sp) + (m - x[0]).powf(-sp)) / sp,
        _ => {
            let side = |d: f64, along: f64| {
                let lo = ((-m - along) / d).atan();
                let hi = ((m - along) / d).atan();
                d.powf(-sp) / sp * integrate(|t: f64| t.cos().powf(sp), lo, hi, 1e-12)
            };
            side(m - x[0], x[1]) + side(m + x[0], x[1]) + side(m - x[1], x[0]) + side(m + x[1], x[0])
        }
    }
}
