//! Position-space Laguerre functions, Landau projection kernels and
//! Gauss-Legendre quadrature over squares and disks.
//!
//! Two orientations are available. `Ladder` is the one generated by the
//! ladder operators of [`crate::fock`] and is the default everywhere; the
//! `Printed` orientation is its complex conjugate, in which the kernel phase is
//! exp(-i x^y / 2 l^2). They are related by psi^L_n = (-i)^n1 conj(psi^P_n).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exec;
use crate::fock::{FockIndex, OperatorMatrix};
use crate::params::ModelParams;
use crate::specfun::{laguerre, sqrt_factorial_ratio};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    pub fn norm2(&self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    /// x ^ y = x1 y2 - x2 y1.
    pub fn wedge(&self, y: &Point2) -> f64 {
        self.x1 * y.x2 - self.x2 * y.x1
    }

    pub fn sub(&self, y: &Point2) -> Point2 {
        Point2::new(self.x1 - y.x1, self.x2 - y.x2)
    }

    pub fn add(&self, y: &Point2) -> Point2 {
        Point2::new(self.x1 + y.x1, self.x2 + y.x2)
    }

    pub fn coord(&self, i: usize) -> f64 {
        match i {
            1 => self.x1,
            2 => self.x2,
            _ => panic!("coordinate index {i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// Axis-aligned square of the given side, centered at the origin.
    Square { side: f64 },
    Disk { radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub shape: Shape,
}

impl Region {
    pub fn square_centered(side: f64) -> Self {
        Region {
            shape: Shape::Square { side },
        }
    }

    pub fn disk_centered(radius: f64) -> Self {
        Region {
            shape: Shape::Disk { radius },
        }
    }

    pub fn measure(&self) -> f64 {
        match self.shape {
            Shape::Square { side } => side * side,
            Shape::Disk { radius } => PI * radius * radius,
        }
    }

    /// Largest distance from the origin to a point of the region.
    pub fn extent(&self) -> f64 {
        match self.shape {
            Shape::Square { side } => side * std::f64::consts::FRAC_1_SQRT_2,
            Shape::Disk { radius } => radius,
        }
    }

    /// Linear scale (half-width or radius).
    pub fn scale(&self) -> f64 {
        match self.shape {
            Shape::Square { side } => side / 2.0,
            Shape::Disk { radius } => radius,
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal pieces.
pub fn gauss_legendre_interval(a: f64, b: f64, order: usize, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<(Point2, f64)>,
    pub order: usize,
}

impl QuadratureRule {
    /// Tensor rule over the region; disks use Gauss-Legendre in r and the
    /// trapezoid rule in the angle.
    pub fn for_region(region: &Region, order: usize) -> Self {
        let panels = panels_for(region.scale());
        match region.shape {
            Shape::Square { side } => {
                Self::square_at(Point2::ORIGIN, side / 2.0, order, panels)
            }
            Shape::Disk { radius } => {
                let radial = gauss_legendre_interval(0.0, radius, order, panels);
                let na = 2 * order * panels;
                let mut nodes = Vec::with_capacity(radial.len() * na);
                for &(r, wr) in &radial {
                    for k in 0..na {
                        let phi = 2.0 * PI * k as f64 / na as f64;
                        let w = wr * r * 2.0 * PI / na as f64;
                        nodes.push((Point2::new(r * phi.cos(), r * phi.sin()), w));
                    }
                }
                QuadratureRule { nodes, order }
            }
        }
    }

    /// Tensor rule on the square of half-width `h` around `center`.
    pub fn square_at(center: Point2, h: f64, order: usize, panels: usize) -> Self {
        let g1 = gauss_legendre_interval(center.x1 - h, center.x1 + h, order, panels);
        let g2 = gauss_legendre_interval(center.x2 - h, center.x2 + h, order, panels);
        let mut nodes = Vec::with_capacity(g1.len() * g2.len());
        for &(a, wa) in &g1 {
            for &(b, wb) in &g2 {
                nodes.push((Point2::new(a, b), wa * wb));
            }
        }
        QuadratureRule { nodes, order }
    }

    pub fn integrate<F>(&self, f: F) -> C64
    where
        F: Fn(Point2) -> C64 + Sync + Send,
    {
        exec::sum_indexed(self.nodes.len(), |k| {
            let (p, w) = self.nodes[k];
            f(p) * w
        })
    }
}

/// One panel per 4 length units keeps each panel well resolved by the base order.
fn panels_for(scale: f64) -> usize {
    ((scale / 4.0).ceil() as usize).max(1)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    Ladder,
    Printed,
}

/// psi_0(x) = exp(-|x|^2 / 4 l^2) / (l sqrt(2 pi)).
pub fn psi0(x: Point2, params: &ModelParams) -> f64 {
    let l = params.ell_b;
    (-x.norm2() / (4.0 * l * l)).exp() / (l * (2.0 * PI).sqrt())
}

/// Laguerre function psi_n in the ladder orientation.
pub fn psi_eval(n: FockIndex, x: Point2, params: &ModelParams) -> C64 {
    psi_eval_oriented(n, x, params, Orientation::Ladder)
}

pub fn psi_eval_oriented(n: FockIndex, x: Point2, params: &ModelParams, orient: Orientation) -> C64 {
    let printed = psi_printed(n, x, params);
    match orient {
        Orientation::Printed => printed,
        Orientation::Ladder => C64::new(0.0, -1.0).powu(n.n1 as u32) * printed.conj(),
    }
}

/// psi_0 sqrt(n1!/n2!) z^(n2-n1) L_n1^(n2-n1)(|z|^2), z = (x1 + i x2)/(l sqrt2).
///
/// For n2 < n1 the equivalent form (-1)^(n1-n2) sqrt(n2!/n1!) conj(z)^(n1-n2)
/// L_n2^(n1-n2)(|z|^2) is used, which avoids 0 * inf at the origin.
fn psi_printed(n: FockIndex, x: Point2, params: &ModelParams) -> C64 {
    let l = params.ell_b;
    let s = 1.0 / (l * std::f64::consts::SQRT_2);
    let z = C64::new(x.x1 * s, x.x2 * s);
    let t = z.norm_sqr();
    let base = psi0(x, params);
    if n.n2 >= n.n1 {
        let k = (n.n2 - n.n1) as u32;
        z.powu(k) * (base * sqrt_factorial_ratio(n.n1, n.n2) * laguerre(n.n1, k as f64, t))
    } else {
        let k = n.n1 - n.n2;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        z.conj().powu(k as u32) * (sign * base * sqrt_factorial_ratio(n.n2, n.n1) * laguerre(n.n2, k as f64, t))
    }
}

/// Closed-form kernel of Pi_j in the ladder orientation.
pub fn landau_kernel(j: usize, x: Point2, y: Point2, params: &ModelParams) -> C64 {
    landau_kernel_oriented(j, x, y, params, Orientation::Ladder)
}

pub fn landau_kernel_oriented(j: usize, x: Point2, y: Point2, params: &ModelParams, orient: Orientation) -> C64 {
    let l2 = params.ell_b * params.ell_b;
    let d2 = x.sub(&y).norm2();
    let amp = (-d2 / (4.0 * l2)).exp() * laguerre(j, 0.0, d2 / (2.0 * l2)) / (2.0 * PI * l2);
    let sign = match orient {
        Orientation::Ladder => 1.0,
        Orientation::Printed => -1.0,
    };
    C64::from_polar(amp, sign * x.wedge(&y) / (2.0 * l2))
}

/// Kernel of d_i(Pi_j) = -i [X_i, Pi_j]: -i (x_i - y_i) Pi_j(x, y).
pub fn deriv_kernel(i: usize, j: usize, x: Point2, y: Point2, params: &ModelParams) -> Result<C64> {
    if i != 1 && i != 2 {
        return domain(format!("derivative direction must be 1 or 2, got {i}"));
    }
    Ok(C64::new(0.0, -(x.coord(i) - y.coord(i))) * landau_kernel(j, x, y, params))
}

/// Values psi_n(x) for every basis state of the operator's basis (spin-free).
pub fn basis_values(t: &OperatorMatrix, x: Point2, params: &ModelParams) -> Vec<C64> {
    t.basis().iter().map(|n| psi_eval(n, x, params)).collect()
}

/// Default quadrature order per panel.
pub const DEFAULT_ORDER: usize = 64;

/// integral over the region of T(x, x) = sum_nm T_nm psi_n(x) conj psi_m(x),
/// spin-traced. Fails when doubling the order changes the value by more than `tol`.
pub fn integrate_kernel_diagonal(t: &OperatorMatrix, region: &Region, params: &ModelParams, tol: f64) -> Result<C64> {
    let t = t.spin_trace()?;
    let eval = |order: usize| {
        let rule = QuadratureRule::for_region(region, order);
        rule.integrate(|x| kernel_diagonal(&t, x, params))
    };
    let base = eval(DEFAULT_ORDER / 2);
    let fine = eval(DEFAULT_ORDER);
    if (fine - base).norm() > tol {
        return Err(Error::NotConverged(format!(
            "kernel-diagonal quadrature moved by {:.3e} on order doubling",
            (fine - base).norm()
        )));
    }
    Ok(fine)
}

/// T(x, x) for a spin-free operator over the Laguerre basis.
pub fn kernel_diagonal(t: &OperatorMatrix, x: Point2, params: &ModelParams) -> C64 {
    let psi = basis_values(t, x, params);
    let conj: Vec<C64> = psi.iter().map(|v| v.conj()).collect();
    let tv = t.apply(&conj);
    psi.iter().zip(&tv).map(|(a, b)| a * b).sum()
}

/// Which form of the integral identity to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdentityVariant {
    /// exp(+i f) and Psi_j(x) = exp(-|x|^2/2) L_j(|x|), exactly as stated.
    Literal,
    /// exp(-i f) and Psi_j(x) = exp(-|x|^2/2) L_j(|x|^2), the form that follows
    /// from the ladder-oriented kernel rescaled by sqrt 2.
    Consistent,
}

pub fn identity_profile(j: usize, x: Point2, variant: IdentityVariant) -> f64 {
    let r2 = x.norm2();
    let arg = match variant {
        IdentityVariant::Literal => r2.sqrt(),
        IdentityVariant::Consistent => r2,
    };
    (-0.5 * r2).exp() * laguerre(j, 0.0, arg)
}

/// The four-fold integral over y, z in squares of half-width `cutoff` around x
/// of f e^{+-i f} Psi_j(x-y) Psi_j(y-z) Psi_j(z-x), f = x^z + z^y + y^x,
/// with `order` Gauss-Legendre points per panel and axis.
pub fn integral_identity(j: usize, x: Point2, cutoff: f64, order: usize, variant: IdentityVariant) -> C64 {
    let panels = panels_for(cutoff);
    let rule = QuadratureRule::square_at(x, cutoff, order, panels);
    let sign = match variant {
        IdentityVariant::Literal => 1.0,
        IdentityVariant::Consistent => -1.0,
    };
    let nodes = &rule.nodes;
    let prof: Vec<f64> = nodes
        .iter()
        .map(|(p, _)| identity_profile(j, x.sub(p), variant))
        .collect();
    exec::sum_indexed(nodes.len(), |a| {
        let (y, wy) = nodes[a];
        let py = prof[a];
        let xy = y.wedge(&x);
        let mut acc = C64::new(0.0, 0.0);
        for (b, &(z, wz)) in nodes.iter().enumerate() {
            let f = x.wedge(&z) + z.wedge(&y) + xy;
            let amp = f * py * identity_profile(j, y.sub(&z), variant) * prof[b] * wz;
            acc += C64::from_polar(amp, sign * f);
        }
        acc * wy
    })
}

/// The value pi^2 / (2 i) expected for the consistent form.
pub fn integral_identity_target() -> C64 {
    C64::new(0.0, -PI * PI / 2.0)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub variant: IdentityVariant,
    pub value: C64,
    pub refined: C64,
    pub refinement_change: f64,
}

/// Evaluates the integral identity at x = 0 and again with cutoff and order
/// enlarged by 25%; fails when the two differ by more than `tol`.
pub fn verify_integral_identity(j: usize, cutoff: f64, tol: f64, variant: IdentityVariant) -> Result<IdentityCheck> {
    if j > 4 {
        return domain(format!("integral identity limited to j <= 4, got {j}"));
    }
    let order = identity_order(j, cutoff);
    let value = integral_identity(j, Point2::ORIGIN, cutoff, order, variant);
    let refined = integral_identity(j, Point2::ORIGIN, 1.25 * cutoff, (order * 5).div_ceil(4), variant);
    let change = (refined - value).norm();
    if change > tol {
        return Err(Error::NotConverged(format!(
            "integral identity moved by {change:.3e} under refinement"
        )));
    }
    Ok(IdentityCheck {
        variant,
        value,
        refined,
        refinement_change: change,
    })
}

/// Points per panel (panels are at most 4 units wide) for the identity.
pub fn identity_order(j: usize, _cutoff: f64) -> usize {
    24 + 4 * j
}
