use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Momentum profile of the incident particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelShape {
    /// `μ(p) = (βp/m) e^{−βp²/2m}`, the thermal effusion density.
    Effusion,
    /// `μ(p) = 1/p_max` on `[0, p_max]`. Not thermal; used as a negative control.
    Flat,
}

impl KernelShape {
    pub fn name(self) -> &'static str {
        match self {
            KernelShape::Effusion => "effusion",
            KernelShape::Flat => "flat",
        }
    }
}

/// Momentum-space density matrix `ρ_U(p, p')` of one incident particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitKernel<T> {
    pub beta: T,
    pub mass: T,
    pub sigma_p: T,
    pub shape: KernelShape,
    /// Cutoff in units of `1/β`: `p_max = sqrt(2 m W / β)`.
    pub cutoff_w: T,
}

impl<T: Real> UnitKernel<T> {
    pub fn new(beta: T, mass: T, sigma_p: T) -> Result<Self> {
        let kernel =
            Self { beta, mass, sigma_p, shape: KernelShape::Effusion, cutoff_w: T::lit(40.0) };
        kernel.validate()?;
        Ok(kernel)
    }

    pub fn from_spec(spec: &ChainSpec<T>) -> Result<Self> {
        Self::new(spec.beta, spec.mass, spec.sigma_p)
    }

    pub fn with_shape(self, shape: KernelShape) -> Self {
        Self { shape, ..self }
    }

    pub fn with_cutoff(self, cutoff_w: T) -> Self {
        Self { cutoff_w, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta", self.beta),
            ("mass", self.mass),
            ("sigma_p", self.sigma_p),
            ("W", self.cutoff_w),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "kernel parameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn p_max(&self) -> T {
        (T::lit(2.0) * self.mass * self.cutoff_w / self.beta).sqrt()
    }

    /// Diagonal `ρ_U(p, p)`.
    pub fn density(&self, p: T) -> T {
        if p < T::zero() {
            return T::zero();
        }
        match self.shape {
            KernelShape::Effusion => effusion_density(p, self.beta, self.mass),
            KernelShape::Flat => {
                if p <= self.p_max() {
                    T::one() / self.p_max()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// `exp(−(p − p')²/2σ_p²)`.
    pub fn coherence_factor(&self, p: T, p_prime: T) -> T {
        let diff = p - p_prime;
        (-diff * diff / (T::lit(2.0) * self.sigma_p * self.sigma_p)).exp()
    }
}

fn effusion_density<T: Real>(p: T, beta: T, mass: T) -> T {
    beta * p / mass * (-beta * p * p / (T::lit(2.0) * mass)).exp()
}

/// Effusion momentum density `(βp/m) e^{−βp²/2m}`, zero for negative `p`.
pub fn effusion_pdf<T: Real>(p: T, kernel: &UnitKernel<T>) -> T {
    if p < T::zero() {
        T::zero()
    } else {
        effusion_density(p, kernel.beta, kernel.mass)
    }
}

/// `ρ_U(p, p') = μ((p+p')/2) exp(−(p−p')²/2σ_p²)`.
pub fn unit_kernel<T: Real>(p: T, p_prime: T, kernel: &UnitKernel<T>) -> T {
    kernel.density((p + p_prime) / T::lit(2.0)) * kernel.coherence_factor(p, p_prime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{composite_unit_rule, cosine_mapped};

    fn kernel() -> UnitKernel<f64> {
        UnitKernel::new(0.1, 0.1, 0.5).unwrap()
    }

    #[test]
    fn reference_values() {
        let k = kernel();
        assert!((effusion_pdf(1.0, &k) - (-0.5f64).exp()).abs() < 1e-15);
        let want = (-0.5f64).exp() * (-0.32f64).exp();
        assert!((unit_kernel(1.2, 0.8, &k) - want).abs() < 1e-15);
        assert!((want - 0.44046).abs() < 5e-5);
        assert_eq!(unit_kernel(0.7, 0.7, &k), effusion_pdf(0.7, &k));
        let shifted =
            unit_kernel(1.0 + 0.5 * 0.5f64 * 2f64.sqrt(), 1.0 - 0.5 * 0.5 * 2f64.sqrt(), &k);
        assert!((shifted - effusion_pdf(1.0, &k) * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn mode_and_normalization() {
        let k = kernel();
        let mode = (k.mass / k.beta).sqrt();
        assert!(effusion_pdf(mode, &k) > effusion_pdf(mode * 1.01, &k));
        assert!(effusion_pdf(mode, &k) > effusion_pdf(mode * 0.99, &k));
        let nodes = cosine_mapped(0.0, k.p_max(), true, &composite_unit_rule(8, 32));
        let total = nodes.integrate(|p| effusion_pdf(p, &k));
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(UnitKernel::new(0.0, 0.1, 0.5).is_err());
        assert!(UnitKernel::new(0.1, 0.1, -0.5).is_err());
    }
}
