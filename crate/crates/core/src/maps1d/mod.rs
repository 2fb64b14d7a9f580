//! One-dimensional dynamics: the N-map, the cubic family and periodic orbits.

mod affine;
mod cubic;
mod periodic;

pub use affine::{nmap_eval, AffinePiece, BranchDomain, NMap, PiecewiseAffineMap};
pub use cubic::{
    conjugacy_defect, conjugacy_h, conjugacy_h_derivative, critical_points, cubic_eval,
    schwarzian, schwarzian_closed_form, CubicMap1D,
};
pub use periodic::{
    affine_fixed_point, find_periodic, find_periodic_with_density, PeriodicOrbit1D, PeriodicSearch,
    UnresolvedBracket,
};

use crate::Interval;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("point {x} outside the map domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },
    #[error("mu_bar = {mu_bar} <= 0: the cubic has no real critical pair")]
    NoRealCriticalPoints { mu_bar: f64 },
    #[error("Schwarzian undefined at critical point y = {y}")]
    SingularSchwarzian { y: f64 },
    #[error("invalid branch layout: {0}")]
    InvalidBranches(String),
    #[error("invalid search request: {0}")]
    InvalidSearch(String),
}

/// A one-dimensional map the periodic-orbit machinery can work with.
#[derive(Debug, Clone)]
pub enum MapFamily1D {
    PiecewiseAffine(PiecewiseAffineMap),
    Cubic(CubicMap1D<f64>),
}

impl MapFamily1D {
    pub fn nmap() -> Self {
        MapFamily1D::PiecewiseAffine(NMap::new().into_piecewise())
    }

    pub fn cubic(mu_bar: f64, nu_bar: f64) -> Self {
        MapFamily1D::Cubic(CubicMap1D { mu_bar, nu_bar })
    }

    pub fn eval(&self, x: f64) -> Result<f64, MapError> {
        match self {
            MapFamily1D::PiecewiseAffine(m) => m.eval(x),
            MapFamily1D::Cubic(m) => Ok(m.eval(&x)),
        }
    }

    pub fn derivative(&self, x: f64) -> Result<f64, MapError> {
        match self {
            MapFamily1D::PiecewiseAffine(m) => m.derivative(x),
            MapFamily1D::Cubic(m) => Ok(m.derivative(&x, 1)),
        }
    }

    /// Natural domain, when the map has one.
    pub fn domain(&self) -> Option<Interval<f64>> {
        match self {
            MapFamily1D::PiecewiseAffine(m) => Some(m.domain_f64()),
            MapFamily1D::Cubic(_) => None,
        }
    }

    pub fn iterate(&self, x: f64, times: usize) -> Result<f64, MapError> {
        let mut y = x;
        for _ in 0..times {
            y = self.eval(y)?;
        }
        Ok(y)
    }
}
