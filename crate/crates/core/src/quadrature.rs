//! Gauss–Hermite quadrature for `∫ e^{−u²} f(u) du`.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Hermite rule, nodes descending.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature needs at least one node");
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z: f64 = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // orthonormal Hermite recurrence
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 32] {
            let (x, w) = gauss_hermite(n);
            let sum: f64 = w.iter().sum();
            assert!((sum - PI.sqrt()).abs() < 1e-13, "n={n}");
            // ∫ u² e^{−u²} = √π/2, ∫ u⁴ e^{−u²} = 3√π/4
            if n >= 3 {
                let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
                let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
                assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
                assert!((m4 - 0.75 * PI.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_characteristic_function() {
        // ∫ e^{−u²} cos(a u) du = √π e^{−a²/4}
        let (x, w) = gauss_hermite(16);
        let a = 1.7;
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * (a * x).cos()).sum();
        assert!((q - PI.sqrt() * (-a * a / 4.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn known_two_point_rule() {
        let (x, w) = gauss_hermite(2);
        assert!((x[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - PI.sqrt() / 2.0).abs() < 1e-15);
    }
}
