//! Elastic and slip coefficients, constant or varying element by element.

use crate::error::{Error, Result};
use crate::geometry::{Element, Region, StructuredMesh};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients<T> {
    /// Shear modulus.
    pub mu: T,
    /// Bulk (Lamé) modulus.
    pub lambda: T,
    pub rho: T,
    /// Slip mobility.
    pub beta: T,
    /// Slip stiffness.
    pub eta_hat: T,
    /// Slip gradient coefficient.
    pub nu: T,
}

impl<T: Real> Coefficients<T> {
    /// `mu = 1, lambda = 2, eta_hat = 2, nu = 0`, with unit density and mobility.
    pub fn reference() -> Self {
        Self { mu: T::one(), lambda: T::two(), rho: T::one(), beta: T::one(), eta_hat: T::two(), nu: T::zero() }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.lambda, self.rho, self.beta, self.eta_hat, self.nu];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite material coefficient".into()));
        }
        let z = T::zero();
        if !(self.mu > z && self.mu + self.lambda > z && self.rho > z && self.beta > z) {
            return Err(Error::InvalidConfig("require mu > 0, mu + lambda > 0, rho > 0, beta > 0".into()));
        }
        if self.eta_hat < z || self.nu < z {
            return Err(Error::InvalidConfig("require eta_hat >= 0 and nu >= 0".into()));
        }
        Ok(())
    }

    /// `kappa = lambda / (2 mu + lambda)`.
    pub fn kappa(&self) -> T {
        self.lambda / (T::two() * self.mu + self.lambda)
    }

    /// Plane-strain Poisson ratio `lambda / (2 (mu + lambda))`.
    pub fn poisson_ratio(&self) -> T {
        self.lambda / (T::two() * (self.mu + self.lambda))
    }

    /// Coercivity floor `min(mu, mu + lambda)`.
    pub fn c0(&self) -> T {
        self.mu.min(self.mu + self.lambda)
    }
}

/// Coefficients per element of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField<T> {
    cells: Vec<Coefficients<T>>,
}

impl<T: Real> MaterialField<T> {
    pub fn uniform(coeffs: Coefficients<T>, mesh: &StructuredMesh<T>) -> Result<Self> {
        coeffs.validate()?;
        Ok(Self { cells: vec![coeffs; mesh.elements().len()] })
    }

    pub fn from_fn(mesh: &StructuredMesh<T>, f: impl Fn(&Element<T>) -> Coefficients<T>) -> Result<Self> {
        let cells: Vec<_> = mesh.elements().iter().map(f).collect();
        for c in &cells {
            c.validate()?;
        }
        // mu may vary in x but not in y across the fault strip
        let ncols = mesh.columns();
        for (k, el) in mesh.elements().iter().enumerate() {
            if el.region == Region::Fault && k >= ncols && mesh.elements()[k - ncols].region == Region::Fault && cells[k].mu != cells[k - ncols].mu {
                return Err(Error::InvalidConfig("shear modulus must not vary in y inside the fault".into()));
            }
        }
        Ok(Self { cells })
    }

    pub fn cell(&self, e: usize) -> &Coefficients<T> {
        &self.cells[e]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}
