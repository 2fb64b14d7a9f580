use nalgebra::Matrix2;
use twofloat::TwoFloat;

use super::{theta_n, ModelParams, Perturbation, RenormError};
use crate::planar::{PlanarMap, Point};
use crate::Rect;

type Dd = TwoFloat;

fn dd(x: f64) -> Dd {
    Dd::from(x)
}

/// `psi(x, y) = (y, -y^3 + mu_bar y + nu_bar)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEndomorphism {
    pub mu_bar: f64,
    pub nu_bar: f64,
}

impl LimitEndomorphism {
    pub fn new(mu_bar: f64, nu_bar: f64) -> Self {
        LimitEndomorphism { mu_bar, nu_bar }
    }

    pub fn cubic(&self, y: f64) -> f64 {
        -y * y * y + self.mu_bar * y + self.nu_bar
    }
}

impl PlanarMap for LimitEndomorphism {
    fn name(&self) -> String {
        "limit endomorphism".into()
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("mu_bar".into(), self.mu_bar), ("nu_bar".into(), self.nu_bar)]
    }
    fn forward(&self, p: Point) -> Point {
        Point::new(p.y, self.cubic(p.y))
    }
    fn jacobian(&self, p: Point) -> Matrix2<f64> {
        Matrix2::new(0.0, 1.0, 0.0, self.mu_bar - 3.0 * p.y * p.y)
    }
}

/// Scales shared by the forward and inverse compositions, in double-double.
#[derive(Debug, Clone, Copy)]
struct Scales {
    g: Dd,
    /// `sigma^{n/2}`
    sh: Dd,
    /// `sigma^n`
    sn: Dd,
    /// `lambda^n`
    ln: Dd,
    mu: Dd,
    nu: Dd,
}

/// `Phi_n^-1 o N o L^n o Phi_n` at parameters `Theta_n(mu_bar, nu_bar)`,
/// evaluated in double-double arithmetic: the composition subtracts
/// quantities of size `sigma^-n` and rescales by `sigma^{3n/2}`, which
/// leaves too few correct bits in binary64 for residuals near `(lambda sigma)^n`.
#[derive(Debug, Clone)]
pub struct RenormalizedMap {
    pub params: ModelParams,
    pub n: u32,
    pub mu_bar: f64,
    pub nu_bar: f64,
    /// Linearization box in original coordinates; `None` disables the check.
    pub linearization_box: Option<Rect>,
    scales: Scales,
}

impl RenormalizedMap {
    pub fn new(params: ModelParams, n: u32, mu_bar: f64, nu_bar: f64) -> Result<Self, RenormError> {
        params.validate()?;
        if n < 1 {
            return Err(RenormError::InvalidN { n, min: 1 });
        }
        let sigma = dd(params.sigma);
        let sh = sigma.sqrt().powi(n as i32);
        let sn = sigma.powi(n as i32);
        let ln = dd(params.lambda).powi(n as i32);
        let g = dd(params.b).sqrt();
        let mu = dd(mu_bar) / sn;
        let nu = dd(nu_bar) / (g * sn * sh) - dd(params.c) * ln + Dd::from(1.0) / sn;
        let scales = Scales { g, sh, sn, ln, mu, nu };
        Ok(RenormalizedMap { params, n, mu_bar, nu_bar, linearization_box: None, scales })
    }

    pub fn with_box(mut self, bx: Rect) -> Self {
        self.linearization_box = Some(bx);
        self
    }

    /// `(mu, nu) = Theta_n(mu_bar, nu_bar)`.
    pub fn original_params(&self) -> (f64, f64) {
        theta_n(&self.params, self.n, self.mu_bar, self.nu_bar)
    }

    pub fn coupling(&self) -> f64 {
        self.params.coupling(self.n)
    }

    fn h2(&self, t: Dd) -> Dd {
        match self.params.perturbation {
            Perturbation::None => dd(0.0),
            Perturbation::Quartic { epsilon } => dd(epsilon) * t * t * t * t,
        }
    }

    fn check_box(&self, x: Dd, y: Dd) -> Result<(), RenormError> {
        let Some(bx) = self.linearization_box else { return Ok(()) };
        let (lam, sig) = (self.params.lambda, self.params.sigma);
        let (mut xs, mut ys) = (f64::from(x), f64::from(y));
        for step in 0..=self.n {
            if !bx.contains(xs, ys) {
                return Err(RenormError::EscapedBox { step, x: xs, y: ys });
            }
            xs *= lam;
            ys *= sig;
        }
        Ok(())
    }

    fn eval_dd(&self, pt: Point) -> Result<(Dd, Dd), RenormError> {
        let s = &self.scales;
        let p = &self.params;
        let (a, b, c) = (dd(p.a), dd(p.b), dd(p.c));
        let one = dd(1.0);
        // Phi_n
        let x = one + a * dd(pt.x) / (s.g * s.sh);
        let y = one / s.sn + dd(pt.y) / (s.g * s.sn * s.sh);
        self.check_box(x, y)?;
        // n linear steps
        let (x, y) = (s.ln * x, s.sn * y);
        // transition step
        let t = y - one;
        let x1 = one + a * t;
        let y1 = -b * t * t * t + s.mu * t + s.nu + c * x + self.h2(t);
        // Phi_n^-1
        let xb = (x1 - one) * s.g * s.sh / a;
        let yb = (y1 - one / s.sn) * s.g * s.sn * s.sh;
        Ok((xb, yb))
    }

    /// Forward map, reporting an escape from the linearization box.
    pub fn try_forward(&self, pt: Point) -> Result<Point, RenormError> {
        let (x, y) = self.eval_dd(pt)?;
        Ok(Point::new(x.into(), y.into()))
    }

    /// `(H1_bar, H2_bar)`: the deviation from the limit endomorphism.
    pub fn residual(&self, pt: Point) -> Result<(f64, f64), RenormError> {
        let (x, y) = self.eval_dd(pt)?;
        let yb = dd(pt.y);
        let limit_y = -yb * yb * yb + dd(self.mu_bar) * yb + dd(self.nu_bar);
        Ok(((x - yb).into(), (y - limit_y).into()))
    }

    pub fn try_inverse(&self, pt: Point) -> Result<Point, RenormError> {
        let s = &self.scales;
        let p = &self.params;
        if p.c == 0.0 {
            return Err(RenormError::NotInvertible);
        }
        let (a, b, c) = (dd(p.a), dd(p.b), dd(p.c));
        let one = dd(1.0);
        let x1 = one + a * dd(pt.x) / (s.g * s.sh);
        let y1 = one / s.sn + dd(pt.y) / (s.g * s.sn * s.sh);
        let t = (x1 - one) / a;
        let x = (y1 + b * t * t * t - s.mu * t - s.nu - self.h2(t)) / c;
        let y = one + t;
        let (x, y) = (x / s.ln, y / s.sn);
        let xb = (x - one) * s.g * s.sh / a;
        let yb = (y - one / s.sn) * s.g * s.sn * s.sh;
        Ok(Point::new(xb.into(), yb.into()))
    }

    /// `epsilon g^-3 sigma^{-n/2}`, the coefficient of `y_bar^4` in the
    /// residual of the quartic perturbation.
    pub fn quartic_residual_coefficient(&self) -> f64 {
        match self.params.perturbation {
            Perturbation::None => 0.0,
            Perturbation::Quartic { epsilon } => {
                epsilon * self.params.b.powf(-1.5) * self.params.sigma.powf(-(self.n as f64) / 2.0)
            }
        }
    }
}

impl PlanarMap for RenormalizedMap {
    fn name(&self) -> String {
        format!("renormalized model (n = {})", self.n)
    }
    fn params(&self) -> Vec<(String, f64)> {
        let p = &self.params;
        let mut v = vec![
            ("n".into(), self.n as f64),
            ("mu_bar".into(), self.mu_bar),
            ("nu_bar".into(), self.nu_bar),
            ("lambda".into(), p.lambda),
            ("sigma".into(), p.sigma),
            ("a".into(), p.a),
            ("b".into(), p.b),
            ("c".into(), p.c),
        ];
        if let Perturbation::Quartic { epsilon } = p.perturbation {
            v.push(("epsilon".into(), epsilon));
        }
        v
    }
    fn forward(&self, p: Point) -> Point {
        self.try_forward(p).unwrap_or_else(|_| Point::new(f64::NAN, f64::NAN))
    }
    fn inverse(&self, p: Point) -> Option<Point> {
        self.try_inverse(p).ok()
    }
    fn has_inverse(&self) -> bool {
        self.params.c != 0.0
    }
    /// `[[0, 1], [kappa, mu_bar - 3y^2 + 4 q y^3]]` with `kappa` the coupling
    /// and `q` the quartic residual coefficient.
    fn jacobian(&self, p: Point) -> Matrix2<f64> {
        let q = self.quartic_residual_coefficient();
        Matrix2::new(0.0, 1.0, self.coupling(), self.mu_bar - 3.0 * p.y * p.y + 4.0 * q * p.y.powi(3))
    }
}

/// `f(x, y) = (x^3 - mu_bar x - nu_bar + y, x)`.
pub fn standard_form(mu_bar: f64, nu_bar: f64, p: Point) -> Point {
    Point::new(p.x * p.x * p.x - mu_bar * p.x - nu_bar + p.y, p.x)
}

/// `f^-1(x, y) = (y, x - y^3 + mu_bar y + nu_bar)`.
pub fn standard_form_inverse(mu_bar: f64, nu_bar: f64, p: Point) -> Point {
    Point::new(p.y, p.x - p.y * p.y * p.y + mu_bar * p.y + nu_bar)
}

/// `f o M o f^-1`: for maps near the limit endomorphism this is the
/// Hénon-like form `(small, -y^3 + mu_bar y + nu_bar + x + small)`.
#[derive(Debug, Clone)]
pub struct ConjugatedMap<M> {
    pub inner: M,
    pub mu_bar: f64,
    pub nu_bar: f64,
}

pub fn conjugate_to_standard<M: PlanarMap>(inner: M, mu_bar: f64, nu_bar: f64) -> ConjugatedMap<M> {
    ConjugatedMap { inner, mu_bar, nu_bar }
}

impl<M: PlanarMap> ConjugatedMap<M> {
    /// Deviation from `(0, -y^3 + mu_bar y + nu_bar + x)`.
    pub fn deviation_from_normal_form(&self, p: Point) -> Point {
        let img = self.forward(p);
        img - Point::new(0.0, -p.y.powi(3) + self.mu_bar * p.y + self.nu_bar + p.x)
    }
}

impl<M: PlanarMap> PlanarMap for ConjugatedMap<M> {
    fn name(&self) -> String {
        format!("conjugated {}", self.inner.name())
    }
    fn params(&self) -> Vec<(String, f64)> {
        self.inner.params()
    }
    fn forward(&self, p: Point) -> Point {
        let q = standard_form_inverse(self.mu_bar, self.nu_bar, p);
        standard_form(self.mu_bar, self.nu_bar, self.inner.forward(q))
    }
    fn inverse(&self, p: Point) -> Option<Point> {
        let q = standard_form_inverse(self.mu_bar, self.nu_bar, p);
        Some(standard_form(self.mu_bar, self.nu_bar, self.inner.inverse(q)?))
    }
    fn has_inverse(&self) -> bool {
        self.inner.has_inverse()
    }
}
