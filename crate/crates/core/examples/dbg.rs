use inls_lab::*;
use inls_lab::spectral::{fft, field::ComplexField, grid::Grid, norms::mass, projectors::*};
use inls_lab::operators::*;
use rustfft::num_complex::Complex64;

fn rel(a: &ComplexField, b: &ComplexField) -> f64 {
    mass(&(a - b)).sqrt() / mass(a).sqrt().max(1e-300)
}

fn main() {
    // tilbert_dx consistency
    let grid = Grid::new(512, 12.0).unwrap();
    let h = 2.0;
    let g = ComplexField::from_fn(&grid, |x| {
        Complex64::new((-x * x / 5.0).exp(), (1.3 * x).sin() * (-x * x / 6.0).exp())
    });
    let lhs = tilbert_dx(&g, Depth::Finite(h));
    let dg = fft::apply_multiplier(&g, |xi| Complex64::new(0.0, xi));
    let mut rhs = tilbert(&dg, Depth::Finite(h));
    let mean = fft::forward(&g)[0];
    for z in rhs.values_mut() { *z += mean / h; }
    println!("tilbert_dx consistency rel: {:.3e}", rel(&lhs, &rhs));
    // per-mode diff
    let ca = fft::forward(&lhs); let cb = fft::forward(&rhs);
    let mut worst = (0usize, 0.0f64);
    for j in 0..grid.n() {
        let d = (ca[j]-cb[j]).norm();
        if d > worst.1 { worst = (j, d); }
    }
    println!("worst mode idx {} (xi={:.3}) diff {:.3e}", worst.0, grid.freqs()[worst.0], worst.1);

    // one_plus_ih
    let grid = Grid::new(256, 10.0).unwrap();
    let mut u = ComplexField::from_fn(&grid, |x| {
        Complex64::new((-x * x / 3.0).exp() * (2.0 * x).cos(), (-x * x / 4.0).exp() * x)
    });
    let c = fft::forward(&u);
    let mean = c[0];
    for z in u.values_mut() { *z -= mean; }
    let mut lhs = u.clone();
    lhs.axpy(Complex64::new(0.0, 1.0), &hilbert(&u));
    let rhs = project_sign(&u, Sign::Plus).scaled(Complex64::new(2.0, 0.0));
    println!("one_plus_ih rel: {:.3e}", rel(&lhs, &rhs));
    let ca = fft::forward(&lhs); let cb = fft::forward(&rhs);
    let mut worst = (0usize, 0.0f64);
    for j in 0..grid.n() {
        let d = (ca[j]-cb[j]).norm();
        if d > worst.1 { worst = (j, d); }
    }
    println!("worst mode idx {} (xi={:.3}) diff {:.3e}, |c| there {:.3e}", worst.0, grid.freqs()[worst.0], worst.1, ca[worst.0].norm());

    // hilbert poisson
    let grid = Grid::new(4096, 40.0).unwrap();
    let u = ComplexField::from_fn(&grid, |x| Complex64::new(1.0 / (1.0 + x * x), 0.0));
    let hu = hilbert(&u);
    let expect = ComplexField::from_fn(&grid, |x| Complex64::new(x / (1.0 + x * x), 0.0));
    let err = hu.values().iter().zip(expect.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("hilbert poisson pointwise err: {:.3e}", err);
    // at larger box
    let grid2 = Grid::new(32768, 320.0).unwrap();
    let u2 = ComplexField::from_fn(&grid2, |x| Complex64::new(1.0 / (1.0 + x * x), 0.0));
    let hu2 = hilbert(&u2);
    let expect2 = ComplexField::from_fn(&grid2, |x| Complex64::new(x / (1.0 + x * x), 0.0));
    let err2 = hu2.values().iter().zip(expect2.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("hilbert poisson pointwise err (L=320): {:.3e}", err2);
}
