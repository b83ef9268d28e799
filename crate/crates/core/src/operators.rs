//! The singular-integral family: the depth-h transform `T_h` (multiplier
//! `-i coth(h xi)`), the Hilbert transform, the smoothing difference
//! `G_h = (H - T_h) d_x`, the bounded part `K_h`, the antiderivative part
//! `J_h`, the projector `Pi_{+,h} = (1 + i T_h)/2`, and the cubic-term
//! operator `Q_h`.
//!
//! Zero-mode ledger: `T_h`, `H` and `K_h` annihilate constants (odd
//! principal-value kernels), while the composites `T_h d_x` and `G_h` carry
//! the finite limits `1/h` and `-1/h` at `xi = 0`, matching the line
//! operators (`J_h d_x = (1/h) Id` on decaying functions). `J_h` itself is
//! realized in physical space so that mean-carrying inputs produce the same
//! non-decaying output the line operator does.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::fft;
use crate::spectral::field::ComplexField;
use crate::spectral::grid::Grid;
use crate::spectral::norms::mass;

/// Depth parameter `h` of the two-layer model, with infinite depth encoded
/// explicitly (`T_inf = H`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Depth {
    Finite(f64),
    Infinite,
}

impl Depth {
    pub fn new(h: f64) -> Result<Depth> {
        if h.is_infinite() && h > 0.0 {
            Ok(Depth::Infinite)
        } else if h.is_finite() && h > 0.0 {
            Ok(Depth::Finite(h))
        } else {
            Err(Error::Config(format!("depth must be positive, got {h}")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Depth::Infinite)
    }

    /// `1/h`, zero at infinite depth.
    pub fn inverse(&self) -> f64 {
        match self {
            Depth::Finite(h) => 1.0 / h,
            Depth::Infinite => 0.0,
        }
    }

    /// Depth rescaled by `lambda` (used by the scaling symmetry).
    pub fn scaled(&self, lambda: f64) -> Depth {
        match self {
            Depth::Finite(h) => Depth::Finite(h * lambda),
            Depth::Infinite => Depth::Infinite,
        }
    }
}

impl std::fmt::Display for Depth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Depth::Finite(h) => write!(f, "{h}"),
            Depth::Infinite => write!(f, "inf"),
        }
    }
}

/// `coth(x)` via `1 + 2/expm1(2x)`, which stays accurate for tiny and huge
/// arguments alike.
pub fn coth(x: f64) -> f64 {
    if x > 0.0 {
        1.0 + 2.0 / (2.0 * x).exp_m1()
    } else {
        -coth(-x)
    }
}

/// `x coth(x)`, continuously extended by 1 at the origin; series below
/// 1e-4 to dodge the 0/0 cancellation.
fn x_coth_x(x: f64) -> f64 {
    let a = x.abs();
    if a < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x * coth(x)
    }
}

/// `coth(x) - 1/x` (the bounded, odd part of coth); series below 1e-4.
fn coth_minus_inv(x: f64) -> f64 {
    let a = x.abs();
    if a < 1e-4 {
        x / 3.0 - x * x * x / 45.0
    } else {
        coth(x) - 1.0 / x
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Symbol of `T_h d_x`: `xi coth(h xi)` with value `1/h` at the origin;
/// `|xi|` (value 0) at infinite depth.
pub fn tilbert_dx_symbol(depth: Depth, xi: f64) -> f64 {
    match depth {
        Depth::Infinite => xi.abs(),
        Depth::Finite(h) => {
            // xi coth(h xi) = (h xi) coth(h xi) / h
            if xi == 0.0 {
                1.0 / h
            } else {
                x_coth_x(h * xi) / h
            }
        }
    }
}

/// Symbol of `G_h = (H - T_h) d_x`: `xi (sgn xi - coth(h xi))`, value `-1/h`
/// at the origin, identically zero at infinite depth.
pub fn g_h_symbol(depth: Depth, xi: f64) -> f64 {
    match depth {
        Depth::Infinite => 0.0,
        Depth::Finite(h) => {
            if xi == 0.0 {
                -1.0 / h
            } else {
                // |xi| - xi coth(h xi) = -2 |xi| exp(-2h|xi|) / (1 - exp(-2h|xi|))
                -xi.abs() * 2.0 / (2.0 * h * xi.abs()).exp_m1()
            }
        }
    }
}

/// Depth transform `T_h`: multiplier `-i coth(h xi)` for `xi != 0`, zero on
/// the zero mode (the odd principal-value kernel annihilates constants);
/// `-i sgn(xi)` at infinite depth. Odd symbol, so the Nyquist mode is zeroed.
pub fn tilbert(u: &ComplexField, depth: Depth) -> ComplexField {
    let nyq = -u.grid().max_freq();
    match depth {
        Depth::Infinite => fft::apply_multiplier(u, move |xi| {
            if xi == nyq {
                Complex64::ZERO
            } else {
                Complex64::new(0.0, -sgn(xi))
            }
        }),
        Depth::Finite(h) => fft::apply_multiplier(u, move |xi| {
            if xi == 0.0 || xi == nyq {
                Complex64::ZERO
            } else {
                Complex64::new(0.0, -coth(h * xi))
            }
        }),
    }
}

/// Hilbert transform, the infinite-depth limit of [`tilbert`].
pub fn hilbert(u: &ComplexField) -> ComplexField {
    tilbert(u, Depth::Infinite)
}

/// The composite `T_h d_x` as a single multiplier (see
/// [`tilbert_dx_symbol`]); its `xi = 0` value `1/h` is what makes the two
/// nonlinearity forms of the evolution equation agree exactly.
pub fn tilbert_dx(u: &ComplexField, depth: Depth) -> ComplexField {
    match depth {
        Depth::Infinite => fft::apply_multiplier(u, |xi| Complex64::new(xi.abs(), 0.0)),
        Depth::Finite(h) => fft::apply_multiplier(u, move |xi| {
            if xi == 0.0 {
                Complex64::new(1.0 / h, 0.0)
            } else {
                Complex64::new(x_coth_x(h * xi) / h, 0.0)
            }
        }),
    }
}

/// Smoothing difference `G_h = (H - T_h) d_x` (see [`g_h_symbol`]).
pub fn g_h(u: &ComplexField, depth: Depth) -> ComplexField {
    match depth {
        Depth::Infinite => ComplexField::zeros(u.grid()),
        Depth::Finite(_) => {
            fft::apply_multiplier(u, move |xi| Complex64::new(g_h_symbol(depth, xi), 0.0))
        }
    }
}

/// Bounded part of the depth transform: multiplier
/// `-i (coth(h xi) - 1/(h xi))`, zero at the origin, `|m| <= 1` everywhere.
pub fn k_h(u: &ComplexField, h: f64) -> ComplexField {
    assert!(h.is_finite() && h > 0.0, "k_h needs a finite positive depth");
    let nyq = -u.grid().max_freq();
    fft::apply_multiplier(u, move |xi| {
        if xi == 0.0 || xi == nyq {
            Complex64::ZERO
        } else {
            Complex64::new(0.0, -coth_minus_inv(h * xi))
        }
    })
}

thread_local! {
    static RAMP_CACHE: RefCell<HashMap<(usize, u64), Arc<Vec<Complex64>>>> =
        RefCell::new(HashMap::new());
}

/// Band-limited representative of the coordinate function `x` on the grid:
/// the trigonometric polynomial with the continuum sawtooth coefficients
/// `c_k = i (-1)^k / xi_k`. Using the exact coefficients (rather than the
/// transform of the sampled ramp) keeps every operator built from it exactly
/// anti-self-adjoint on the band-limited space, which the Lax machinery
/// depends on.
fn band_limited_ramp(grid: &Grid) -> Arc<Vec<Complex64>> {
    let key = (grid.n(), grid.half_width().to_bits());
    RAMP_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry(key)
            .or_insert_with(|| {
                let n = grid.n();
                let mut c = vec![Complex64::ZERO; n];
                for j in 1..n {
                    if j == grid.nyquist_index() {
                        continue;
                    }
                    let k = grid.mode(j);
                    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    c[j] = Complex64::new(0.0, sign / grid.freqs()[j]);
                }
                Arc::new(fft::inverse(grid, &c).into_values())
            })
            .clone()
    })
}

/// `J_h g(x) = (1/2h) (integral_{-L}^{x} g - integral_{x}^{L} g)`, the exact
/// sgn-kernel on the truncated domain, realized spectrally (exact for
/// band-limited inputs). Inputs should decay near the boundary; mean-carrying
/// inputs produce the line operator's non-decaying output.
pub fn j_h(u: &ComplexField, h: f64) -> ComplexField {
    assert!(h.is_finite() && h > 0.0, "j_h needs a finite positive depth");
    let grid = u.grid();
    if crate::spectral::norms::boundary_mass_fraction(u) > 1e-10 {
        log::warn!("j_h input carries more than 1e-10 relative boundary mass");
    }
    let ramp = band_limited_ramp(grid);
    let c = fft::forward(u);
    let mean = c[0];
    let mut p = vec![Complex64::ZERO; grid.n()];
    for j in 1..grid.n() {
        if j == grid.nyquist_index() {
            continue;
        }
        p[j] = c[j] / Complex64::new(0.0, grid.freqs()[j]);
    }
    let pvals = fft::inverse(grid, &p).into_values();
    let p_left = pvals[0];
    let values = pvals
        .iter()
        .zip(ramp.iter())
        .map(|(pv, r)| (pv - p_left + mean * r) / h)
        .collect();
    ComplexField::from_values(grid, values).expect("length preserved")
}

/// Szego-type projector `Pi_{+,h} = (1 + i T_h)/2`. For finite depth the
/// symbol diverges at the origin, so the operator is realized through the
/// split `Pi_{+,h} = (i/2) J_h + (1 + i K_h)/2`; at infinite depth it is the
/// multiplier `(1 + sgn xi)/2` with weight 1/2 on the zero mode (the limit
/// of the split).
pub fn pi_plus(u: &ComplexField, depth: Depth) -> ComplexField {
    match depth {
        Depth::Infinite => fft::apply_multiplier(u, |xi| {
            Complex64::new(0.5 * (1.0 + sgn(xi)), 0.0)
        }),
        Depth::Finite(h) => {
            let mut out = j_h(u, h).scaled(Complex64::new(0.0, 0.5));
            out.axpy(Complex64::new(0.5, 0.0), u);
            out.axpy(Complex64::new(0.0, 0.5), &k_h(u, h));
            out
        }
    }
}

/// Symbol of the composite `d_x Pi_{+,h}` used by the Peter operator:
/// `(i/2)(xi + xi coth(h xi))` with value `i/(2h)` at the origin; at
/// infinite depth `i xi 1_{xi > 0}` with value 0.
pub fn dx_pi_plus_symbol(depth: Depth, xi: f64) -> Complex64 {
    match depth {
        Depth::Infinite => {
            if xi > 0.0 {
                Complex64::new(0.0, xi)
            } else {
                Complex64::ZERO
            }
        }
        Depth::Finite(_) => Complex64::new(0.0, 0.5 * (xi + tilbert_dx_symbol(depth, xi))),
    }
}

/// Cubic-term operator `Q_h = -i beta G_h + i gamma Id`.
pub fn q_h(u: &ComplexField, depth: Depth, beta: f64, gamma: f64) -> ComplexField {
    let mut out = u.scaled(Complex64::new(0.0, gamma));
    if !depth.is_infinite() && beta != 0.0 {
        out.axpy(Complex64::new(0.0, -beta), &g_h(u, depth));
    }
    out
}

/// Supremum of `|g_h symbol|` over the lattice plus a dense logarithmic
/// sweep of `(0, xi_max]`; the supremum is the `xi -> 0` limit `1/h`.
pub fn g_h_symbol_sup(h: f64, xi_max: f64, samples: usize) -> f64 {
    let depth = Depth::Finite(h);
    let mut sup: f64 = g_h_symbol(depth, 0.0).abs();
    let lo: f64 = 1e-12;
    let ratio = (xi_max / lo).ln() / (samples as f64 - 1.0);
    for i in 0..samples {
        let xi = lo * (ratio * i as f64).exp();
        sup = sup.max(g_h_symbol(depth, xi).abs());
    }
    sup
}

/// Line-faithful depth transform used only by the Cotlar diagnostic: the
/// `K_h` multiplier plus the sgn-kernel `J_h` with the *sampled* coordinate
/// ramp, so outputs match the line operator pointwise at the samples
/// (including the non-decaying tails of mean-carrying inputs).
fn tilbert_line(u: &ComplexField, h: f64) -> ComplexField {
    let grid = u.grid();
    let c = fft::forward(u);
    let mean = c[0];
    let mut p = vec![Complex64::ZERO; grid.n()];
    for j in 1..grid.n() {
        if j == grid.nyquist_index() {
            continue;
        }
        p[j] = c[j] / Complex64::new(0.0, grid.freqs()[j]);
    }
    let pvals = fft::inverse(grid, &p).into_values();
    let p_left = pvals[0];
    let kpart = k_h(u, h);
    let values = kpart
        .values()
        .iter()
        .zip(pvals.iter())
        .zip(grid.xs())
        .map(|((k, pv), &x)| k + (pv - p_left + mean * x) / h)
        .collect();
    ComplexField::from_values(grid, values).expect("length preserved")
}

/// Residual of the Cotlar-type identity
/// `T_h[f T_h g + g T_h f] = T_h f T_h g - f g - M_f M_g`,
/// `M_f = (1/2h) integral f`, in `L^2` normalized by `||f|| ||g||`.
///
/// Products are plain pointwise products and `T_h` is the line-faithful
/// realization: the identity balances the zero mode through the
/// non-decaying part of `T_h` on mean-carrying inputs, which a periodic
/// multiplier cannot represent.
pub fn cotlar_residual(f: &ComplexField, g: &ComplexField, h: f64) -> f64 {
    cotlar_residual_impl(f, g, h, false)
}

/// Residual under the display's literal second term (`g T_h g` in place of
/// `g T_h f`). Kept as a diagnostic: it is order one on generic inputs,
/// confirming the symmetric reading.
pub fn cotlar_residual_literal(f: &ComplexField, g: &ComplexField, h: f64) -> f64 {
    cotlar_residual_impl(f, g, h, true)
}

fn cotlar_residual_impl(f: &ComplexField, g: &ComplexField, h: f64, literal: bool) -> f64 {
    assert!(h.is_finite() && h > 0.0, "the Cotlar identity needs finite depth");
    assert_eq!(f.grid(), g.grid());
    let dx = f.grid().dx();
    let tf = tilbert_line(f, h);
    let tg = tilbert_line(g, h);
    let m_f: Complex64 = f.values().iter().sum::<Complex64>() * dx / (2.0 * h);
    let m_g: Complex64 = g.values().iter().sum::<Complex64>() * dx / (2.0 * h);

    let second = if literal { &tg } else { &tf };
    let inner = f
        .pointwise_mul(&tg)
        .values()
        .iter()
        .zip(g.pointwise_mul(second).values())
        .map(|(a, b)| a + b)
        .collect::<Vec<_>>();
    let inner = ComplexField::from_values(f.grid(), inner).expect("length preserved");
    let lhs = tilbert_line(&inner, h);

    let mut rhs = tf.pointwise_mul(&tg);
    rhs.axpy(-Complex64::ONE, &f.pointwise_mul(g));
    let shift = m_f * m_g;
    for z in rhs.values_mut() {
        *z -= shift;
    }

    let num = mass(&(&lhs - &rhs)).sqrt();
    let den = mass(f).sqrt() * mass(g).sqrt();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// One row of the operator invariant battery; see [`operator_check`].
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// The operator invariant suite over the shipped smooth decaying corpus.
pub fn operator_check(grid: &Grid) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let mut push = |name: String, value: f64, threshold: f64| {
        rows.push(CheckRow { name, value, threshold, pass: value <= threshold });
    };

    for &h in &[1.0, 2.0, 10.0] {
        let sup = g_h_symbol_sup(h, grid.max_freq(), 200_000);
        push(format!("g_h_norm_h{h}"), (sup - 1.0 / h).abs(), 1e-6);
    }

    let corpus = crate::corpus::smooth_decaying_corpus(grid, 7);
    for (i, f) in corpus.iter().enumerate() {
        for (j, g) in corpus.iter().enumerate().skip(i) {
            push(format!("cotlar_{i}_{j}_h1"), cotlar_residual(f, g, 1.0), 1e-8);
        }
    }
    push(
        "cotlar_literal_reading".into(),
        // recorded, not gated: the display's literal second factor is not
        // an identity for f != g
        cotlar_residual_literal(&corpus[0], &corpus[1], 1.0).min(1e9),
        f64::INFINITY,
    );

    // real fields stay real under the odd-kernel operators
    let realf = crate::corpus::real_bump(grid);
    for (name, out) in [
        ("tilbert", tilbert(&realf, Depth::Finite(1.5))),
        ("hilbert", hilbert(&realf)),
        ("k_h", k_h(&realf, 1.5)),
        ("j_h", j_h(&realf, 1.5)),
    ] {
        let imag = out.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        push(format!("real_to_real_{name}"), imag, 1e-12);
    }

    // k_h symbol stays within the unit ball, g_h within 1/h, on the lattice
    for &h in &[1.0, 3.0] {
        let mut sup_k: f64 = 0.0;
        let mut sup_g: f64 = 0.0;
        for &xi in grid.freqs() {
            if xi != 0.0 {
                sup_k = sup_k.max(coth_minus_inv(h * xi).abs());
            }
            sup_g = sup_g.max(g_h_symbol(Depth::Finite(h), xi).abs());
        }
        push(format!("k_h_symbol_bound_h{h}"), (sup_k - 1.0).max(0.0), 0.0);
        push(format!("g_h_symbol_bound_h{h}"), (sup_g - 1.0 / h).max(0.0), 1e-12);
    }

    // T_h d_x -> |xi| on a fixed band at rate 1/h
    for &h in &[8.0, 16.0] {
        let mut sup = 0.0_f64;
        for &xi in grid.freqs() {
            if xi.abs() >= 1.0 {
                sup = sup.max((tilbert_dx_symbol(Depth::Finite(h), xi) - xi.abs()).abs());
            }
        }
        push(format!("tilbert_dx_limit_h{h}"), sup, 2.0 / h);
    }

    rows
}
