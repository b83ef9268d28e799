//! Right-hand side of the evolution equation
//! `d_t u = -i d_x^2 u + beta u (1 + i T_h) d_x(|u|^2) + i gamma |u|^2 u`,
//! in two provably equivalent forms, plus the residual and Hardy-leak
//! diagnostics. Depth `h = inf` with `gamma = 0` is the continuum
//! Calogero-Moser equation `d_t u = -i d_x^2 u + 2 beta u P_+ d_x(|u|^2)`.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{g_h_symbol, tilbert_dx_symbol, Depth};
use crate::spectral::fft;
use crate::spectral::field::ComplexField;
use crate::spectral::norms::mass;
use crate::spectral::projectors::{project_sign, Sign};

/// Amplitude beyond which a state is declared blown up.
pub const BLOWUP_AMPLITUDE: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub depth: Depth,
    pub beta: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(depth: Depth, beta: f64, gamma: f64) -> Result<Self> {
        if !beta.is_finite() || !gamma.is_finite() {
            return Err(Error::Config(format!(
                "model coefficients must be finite, got beta={beta}, gamma={gamma}"
            )));
        }
        Ok(ModelParams { depth, beta, gamma })
    }

    /// Infinite depth with `gamma = 0` selects the Calogero-Moser limit.
    pub fn is_ccm(&self) -> bool {
        self.depth.is_infinite() && self.gamma == 0.0
    }

    pub fn focusing_ccm() -> Self {
        ModelParams { depth: Depth::Infinite, beta: -1.0, gamma: 0.0 }
    }
}

fn check_state(u: &ComplexField) -> Result<()> {
    for z in u.values() {
        if !z.re.is_finite() || !z.im.is_finite() || z.norm_sqr() > BLOWUP_AMPLITUDE * BLOWUP_AMPLITUDE {
            return Err(Error::State("blow-up detected: non-finite or oversized sample".into()));
        }
    }
    Ok(())
}

enum NonlinearForm {
    /// `beta u (d_x + i T_h d_x)(|u|^2)`: the composite realized as the
    /// single multiplier `beta (i xi + i xi coth(h xi))` with the declared
    /// `1/h` value at the origin.
    Direct,
    /// `2 beta u P_+ d_x(|u|^2) + u Q_h(|u|^2)`: projector plus smoothing
    /// correction. Equal to `Direct` at every lattice point by the symbol
    /// identity `2 i xi 1_{xi>0} - i xi (sgn xi - coth(h xi)) = i xi (1 + coth(h xi))`.
    Split,
}

/// Nonlinear part of the right-hand side (everything except `-i d_x^2 u`).
/// All pointwise products are dealiased by zero padding to `2n` (cubic-safe);
/// the zero mode of `|u|^2` is retained, the Nyquist mode is zeroed.
fn rhs_nonlinear(u: &ComplexField, params: &ModelParams, form: NonlinearForm) -> Result<ComplexField> {
    check_state(u)?;
    let grid = u.grid();
    let c_u = fft::forward(u);
    let u_fine = fft::fine_samples(&c_u);

    // |u|^2 on the fine grid, then its coarse-lattice coefficients
    let rho_fine: Vec<Complex64> =
        u_fine.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect();
    let c_rho = fft::project_fine(&mut rho_fine.clone());

    // multiplier chain on rho
    let beta = params.beta;
    let depth = params.depth;
    let multiplier = |xi: f64| -> Complex64 {
        match form {
            NonlinearForm::Direct => Complex64::new(0.0, beta * (xi + tilbert_dx_symbol(depth, xi))),
            NonlinearForm::Split => {
                let plus = if xi > 0.0 { 2.0 * xi } else { 0.0 };
                Complex64::new(0.0, beta * plus - beta * g_h_symbol(depth, xi))
            }
        }
    };
    let mut c_d: Vec<Complex64> = c_rho
        .iter()
        .zip(grid.freqs())
        .map(|(z, &xi)| z * multiplier(xi))
        .collect();
    // gamma |u|^2 u rides along in the same product pass
    let d_fine = fft::fine_samples(&c_d);
    let ig = Complex64::new(0.0, params.gamma);
    let mut term_fine: Vec<Complex64> = u_fine
        .iter()
        .zip(d_fine.iter())
        .zip(rho_fine.iter())
        .map(|((uz, dz), rz)| uz * (dz + ig * rz))
        .collect();
    c_d = fft::project_fine(&mut term_fine);
    for z in &mut c_d {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::State("blow-up detected in nonlinear product".into()));
        }
    }
    Ok(fft::inverse(grid, &c_d))
}

fn rhs_with(u: &ComplexField, params: &ModelParams, form: NonlinearForm) -> Result<ComplexField> {
    let mut out = rhs_nonlinear(u, params, form)?;
    let linear = fft::apply_multiplier(u, |xi| Complex64::new(0.0, xi * xi));
    out.axpy(Complex64::ONE, &linear);
    Ok(out)
}

/// `d_t u` from the defining form of the equation.
pub fn rhs_direct(u: &ComplexField, params: &ModelParams) -> Result<ComplexField> {
    rhs_with(u, params, NonlinearForm::Direct)
}

/// `d_t u` from the projector form of the equation.
pub fn rhs_split(u: &ComplexField, params: &ModelParams) -> Result<ComplexField> {
    rhs_with(u, params, NonlinearForm::Split)
}

/// Nonlinear part only (the integrating-factor integrator handles the linear
/// flow exactly and needs just this).
pub fn rhs_nonlinear_direct(u: &ComplexField, params: &ModelParams) -> Result<ComplexField> {
    rhs_nonlinear(u, params, NonlinearForm::Direct)
}

/// Central-difference residual of the equation on three snapshots spaced
/// `dt` apart: `|| (u_next - u_prev)/(2 dt) - rhs(u_mid) ||_{L^2}`.
pub fn pde_residual(
    u_prev: &ComplexField,
    u_mid: &ComplexField,
    u_next: &ComplexField,
    dt: f64,
    params: &ModelParams,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("snapshot spacing must be positive, got {dt}")));
    }
    let mut diff = u_next.clone();
    diff.axpy(-Complex64::ONE, u_prev);
    let inv = Complex64::new(1.0 / (2.0 * dt), 0.0);
    let mut lhs = diff.scaled(inv);
    let rhs = rhs_direct(u_mid, params)?;
    lhs.axpy(-Complex64::ONE, &rhs);
    Ok(mass(&lhs).sqrt())
}

/// Share of the `L^2` mass on strictly negative frequencies; zero field maps
/// to zero.
pub fn hardy_leak(u: &ComplexField) -> f64 {
    let total = mass(u);
    if total == 0.0 {
        return 0.0;
    }
    mass(&project_sign(u, Sign::Minus)) / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::static_soliton;
    use crate::spectral::grid::Grid;
    use crate::spectral::propagator::free_evolve;

    fn rel(a: &ComplexField, b: &ComplexField) -> f64 {
        mass(&(a - b)).sqrt() / mass(a).sqrt().max(1e-300)
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let grid = Grid::new(64, 5.0).unwrap();
        let params = ModelParams::new(Depth::Finite(1.0), 1.0, 0.5).unwrap();
        let z = ComplexField::zeros(&grid);
        assert!(rhs_direct(&z, &params).unwrap().max_abs() == 0.0);
        assert!(rhs_split(&z, &params).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn linear_part_on_wave() {
        let grid = Grid::new(128, 8.0).unwrap();
        let params = ModelParams::new(Depth::Finite(1.0), 0.0, 0.0).unwrap();
        let xi0 = 6.0 * grid.fundamental();
        let u = ComplexField::from_fn(&grid, |x| Complex64::new(0.0, xi0 * x).exp());
        let r = rhs_direct(&u, &params).unwrap();
        let expect = u.scaled(Complex64::new(0.0, xi0 * xi0));
        assert!(rel(&expect, &r) < 1e-12);
    }

    #[test]
    fn forms_agree_on_random_states() {
        let grid = Grid::new(512, 20.0).unwrap();
        for (i, depth) in [Depth::Finite(1.0), Depth::Finite(5.0), Depth::Infinite]
            .into_iter()
            .enumerate()
        {
            let params = ModelParams::new(depth, -1.3, 0.8).unwrap();
            let u = crate::corpus::random_band_limited(&grid, 100, 40 + i as u64);
            let a = rhs_direct(&u, &params).unwrap();
            let b = rhs_split(&u, &params).unwrap();
            let scale = mass(&a).sqrt().max(1.0);
            assert!(mass(&(&a - &b)).sqrt() <= 1e-12 * scale);
        }
    }

    #[test]
    fn gamma_only_case_is_cubic() {
        let grid = Grid::new(256, 10.0).unwrap();
        let params = ModelParams::new(Depth::Finite(2.0), 0.0, 1.3).unwrap();
        let u = crate::corpus::random_decaying(&grid, 50, 3);
        let r = rhs_nonlinear_direct(&u, &params).unwrap();
        let expected = fft::dealiased_product(
            &u,
            &ComplexField::from_values(
                u.grid(),
                u.values().iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect(),
            )
            .unwrap(),
        )
        .scaled(Complex64::new(0.0, 1.3));
        // same up to the dealiasing route of |u|^2 itself
        assert!(rel(&expected, &r) < 1e-10);
    }

    #[test]
    fn static_soliton_is_a_fixed_point_of_focusing_ccm() {
        let grid = Grid::new(4096, 40.0).unwrap();
        let r = static_soliton(&grid);
        let params = ModelParams::focusing_ccm();
        let rhs = rhs_direct(&r, &params).unwrap();
        let resid = mass(&rhs).sqrt() / mass(&r).sqrt();
        assert!(resid <= 1e-4, "static residual {resid}");
    }

    #[test]
    fn pde_residual_on_free_flow_is_second_order() {
        let grid = Grid::new(256, 12.0).unwrap();
        let params = ModelParams::new(Depth::Finite(1.0), 0.0, 0.0).unwrap();
        let u = crate::corpus::random_decaying(&grid, 40, 11);
        let mut last = f64::INFINITY;
        for &dt in &[2e-2, 1e-2, 5e-3] {
            let um = free_evolve(&u, dt);
            let up = free_evolve(&u, 2.0 * dt);
            let r = pde_residual(&u, &um, &up, dt, &params).unwrap();
            assert!(r < 0.3 * last, "dt={dt}: residual {r} not dropping fast enough");
            last = r;
        }
    }

    #[test]
    fn blow_up_detector_trips() {
        let grid = Grid::new(64, 5.0).unwrap();
        let params = ModelParams::focusing_ccm();
        let huge = ComplexField::from_fn(&grid, |_| Complex64::new(2e6, 0.0));
        assert!(matches!(rhs_direct(&huge, &params), Err(Error::State(_))));
        let mut bad = ComplexField::zeros(&grid);
        bad.values_mut()[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(rhs_direct(&bad, &params), Err(Error::State(_))));
    }

    #[test]
    fn hardy_leak_cases() {
        let grid = Grid::new(128, 10.0).unwrap();
        let plus = ComplexField::from_fn(&grid, |x| {
            Complex64::new(0.0, 3.0 * grid.fundamental() * x).exp()
        });
        assert!(hardy_leak(&plus) < 1e-14);
        let minus = ComplexField::from_fn(&grid, |x| {
            Complex64::new(0.0, -3.0 * grid.fundamental() * x).exp()
        });
        assert!((hardy_leak(&minus) - 1.0).abs() < 1e-12);
        assert_eq!(hardy_leak(&ComplexField::zeros(&grid)), 0.0);
    }

    #[test]
    fn constant_phase_covariance_when_beta_is_zero() {
        let grid = Grid::new(256, 10.0).unwrap();
        let params = ModelParams::new(Depth::Finite(1.0), 0.0, 0.9).unwrap();
        let u = crate::corpus::random_decaying(&grid, 40, 5);
        let phase = Complex64::new(0.0, 0.77).exp();
        let a = rhs_direct(&u.scaled(phase), &params).unwrap();
        let b = rhs_direct(&u, &params).unwrap().scaled(phase);
        assert!(rel(&a, &b) < 1e-12);
    }
}
