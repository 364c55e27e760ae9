use crate::error::{Error, Result};
use crate::modcont::Modulus;
use crate::spectral::GridField;

/// `|f|^p μ(|f|)` pointwise; with `clamp`, `μ` is frozen at `μ(s_max)` beyond its domain.
pub fn nonlinearity(f: &GridField, p: f64, mu: &Modulus, clamp: bool) -> Result<GridField> {
    f.check_finite()?;
    let mut out = vec![0.0; f.values.len()];
    power_modulus(&f.values, p, mu, clamp, &mut out)?;
    Ok(GridField {
        grid: f.grid,
        values: out,
    })
}

/// Kernel of [`nonlinearity`] on raw slices; non-finite inputs yield non-finite outputs.
pub fn power_modulus(vals: &[f64], p: f64, mu: &Modulus, clamp: bool, out: &mut [f64]) -> Result<()> {
    let s_max = mu.s_max();
    let ln_mu_cap = mu.eval_clamped(s_max).ln();
    for (o, &v) in out.iter_mut().zip(vals) {
        let a = v.abs();
        *o = if a == 0.0 {
            0.0
        } else if a >= s_max {
            if !clamp && a > s_max {
                return Err(Error::Domain(format!("|value| = {a} exceeds s_max = {s_max}")));
            }
            (p * a.ln() + ln_mu_cap).exp()
        } else {
            let ln_a = a.ln();
            (p * ln_a + mu.eval_clamped(a).ln()).exp()
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use approx::assert_relative_eq;

    #[test]
    fn examples() {
        let g = Grid::new(1, 1.0, 16).unwrap();
        let z = nonlinearity(&GridField::zeros(g), 2.0, &Modulus::power(1.0).unwrap(), true).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        let c = GridField::constant(g, 0.1);
        let r = nonlinearity(&c, 2.0, &Modulus::power(1.0).unwrap(), true).unwrap();
        assert_relative_eq!(r.values[0], 0.001, max_relative = 1e-14);
        let r = nonlinearity(&c, 2.0, &Modulus::log_pow(1.0).unwrap(), true).unwrap();
        assert_relative_eq!(r.values[0], 0.01 / 10f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(r.values[0], 0.00434294, epsilon = 1e-8);
    }

    #[test]
    fn clamp_and_sign() {
        let g = Grid::new(1, 1.0, 16).unwrap();
        let lp = Modulus::log_pow(1.0).unwrap();
        let big = GridField::constant(g, -2.0);
        let r = nonlinearity(&big, 3.0, &lp, true).unwrap();
        assert_relative_eq!(r.values[0], 8.0 / 10f64.ln(), max_relative = 1e-14);
        assert!(matches!(nonlinearity(&big, 3.0, &lp, false), Err(Error::Domain(_))));
    }
}
