//! The fixed smooth plateau bump behind every Littlewood-Paley projector and
//! time cutoff in this crate: `eta = 1` on `[-1, 1]`, `0` outside `(-2, 2)`,
//! and `exp(1 - 1/(1 - (|t| - 1)^2))` in between. One fixed formula keeps
//! every projector-dependent diagnostic reproducible.

/// Plateau bump supported on `[-2, 2]`, identically one on `[-1, 1]`.
pub fn eta(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let s = a - 1.0;
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Dyadic annulus profile `psi_N(xi) = eta(xi/N) - eta(2 xi/N)`, supported on
/// `N/2 <= |xi| <= 2N`.
pub fn psi(xi: f64, n_dyadic: f64) -> f64 {
    eta(xi / n_dyadic) - eta(2.0 * xi / n_dyadic)
}

/// Monotone ramp from 0 at `t <= 0` to 1 at `t >= 1`, built from the same
/// plateau profile.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        1.0 - eta(1.0 + t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(eta(0.0), 1.0);
        assert_eq!(eta(0.999), 1.0);
        assert_eq!(eta(-1.0), 1.0);
        assert_eq!(eta(2.0), 0.0);
        assert_eq!(eta(-3.5), 0.0);
        assert!(eta(1.5) > 0.0 && eta(1.5) < 1.0);
        // continuity at the joints
        assert!((eta(1.0 + 1e-9) - 1.0).abs() < 1e-6);
        assert!(eta(2.0 - 1e-6) < 1e-6);
    }

    #[test]
    fn partition_telescopes() {
        // sum over dyadic N >= 2 of psi_N equals 1 - eta pointwise once the
        // largest N clears the argument
        for &xi in &[0.7, 1.3, 2.9, 17.0, 250.0] {
            let mut sum = 0.0;
            let mut n = 2.0;
            while n <= 4096.0 {
                sum += psi(xi, n);
                n *= 2.0;
            }
            assert!((sum - (1.0 - eta(xi))).abs() < 1e-14, "xi={xi}");
        }
    }

    #[test]
    fn smoothstep_monotone() {
        let mut prev = -1e-9;
        for i in 0..=100 {
            let v = smoothstep(i as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
    }
}
