//! Analytic barrier surfaces and the ambient fields attached to them:
//! normals, shape operators, extensions, the signed distance, the cutoff
//! function, the perturbation 3-tensor and its calibration constant.
//!
//! Barriers are rotationally symmetric about the z-axis, so every field can
//! be evaluated in the profile plane; the evaluators below work on ambient
//! 3-vectors and the geometry layer embeds profile points as (u, 0, v).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Vec2, Vec3};

/// Tolerance for "point lies on the barrier".
pub const ON_SURFACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BarrierKind {
    /// Plane z = offset (normal axis is the symmetry axis).
    Plane { offset: f64 },
    /// Sphere centered on the symmetry axis.
    Sphere { center_z: f64, radius: f64 },
}

/// Fixed constraint hypersurface S with a chosen unit normal.
///
/// `orientation = +1` picks +e_z for planes and the outward radial normal
/// for spheres; `-1` flips it.  The free-boundary condition requires the
/// outer conormal of the evolving surface to coincide with nu_S, which
/// fixes the sign per scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub kind: BarrierKind,
    pub orientation: f64,
}

impl Barrier {
    pub fn plane(offset: f64, orientation: f64) -> Result<Self> {
        Self::new(BarrierKind::Plane { offset }, orientation)
    }

    pub fn sphere(center_z: f64, radius: f64, orientation: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::Config(format!(
                "sphere barrier radius must be positive, got {radius}"
            )));
        }
        Self::new(BarrierKind::Sphere { center_z, radius }, orientation)
    }

    fn new(kind: BarrierKind, orientation: f64) -> Result<Self> {
        if orientation != 1.0 && orientation != -1.0 {
            return Err(Error::Config(format!(
                "barrier orientation must be +1 or -1, got {orientation}"
            )));
        }
        Ok(Self { kind, orientation })
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.kind, BarrierKind::Sphere { .. })
    }

    fn center(&self) -> Vec3 {
        match self.kind {
            BarrierKind::Plane { .. } => Vec3::zeros(),
            BarrierKind::Sphere { center_z, .. } => Vec3::new(0.0, 0.0, center_z),
        }
    }

    /// Nearest point on S.
    pub fn project(&self, x: &Vec3) -> Vec3 {
        match self.kind {
            BarrierKind::Plane { offset } => Vec3::new(x.x, x.y, offset),
            BarrierKind::Sphere { center_z, radius } => {
                let c = Vec3::new(0.0, 0.0, center_z);
                let d = x - c;
                let norm = d.norm();
                if norm < 1e-14 {
                    // center is equidistant from everything; pick a fixed direction
                    c + Vec3::new(radius, 0.0, 0.0)
                } else {
                    c + d * (radius / norm)
                }
            }
        }
    }

    /// Unit normal of S at (the projection of) x, with the chosen sign.
    pub fn nu_s(&self, x: &Vec3) -> Vec3 {
        match self.kind {
            BarrierKind::Plane { .. } => Vec3::new(0.0, 0.0, self.orientation),
            BarrierKind::Sphere { center_z, .. } => {
                let d = x - Vec3::new(0.0, 0.0, center_z);
                let norm = d.norm();
                if norm < 1e-14 {
                    Vec3::new(self.orientation, 0.0, 0.0)
                } else {
                    d * (self.orientation / norm)
                }
            }
        }
    }

    /// Principal curvature of S with respect to nu_S (spheres are umbilic,
    /// planes flat, so a scalar describes the whole shape operator).
    pub fn kappa(&self) -> f64 {
        match self.kind {
            BarrierKind::Plane { .. } => 0.0,
            BarrierKind::Sphere { radius, .. } => self.orientation / radius,
        }
    }

    /// Unclamped signed distance, increasing along nu_S.
    pub fn signed_distance_raw(&self, x: &Vec3) -> f64 {
        match self.kind {
            BarrierKind::Plane { offset } => self.orientation * (x.z - offset),
            BarrierKind::Sphere { center_z, radius } => {
                let d = (x - Vec3::new(0.0, 0.0, center_z)).norm();
                self.orientation * (d - radius)
            }
        }
    }

    pub fn on_surface(&self, x: &Vec3, tol: f64) -> bool {
        self.signed_distance_raw(x).abs() <= tol
    }

    /// Normal, shape operator (as its umbilic scalar) and mean curvature of
    /// the barrier at a point on S.  `n` is the dimension of the evolving
    /// surface, so K = trace(k) over the n barrier directions seen by it.
    pub fn normal_and_shape(&self, x: &Vec3, n: usize) -> Result<(Vec3, f64, f64)> {
        if !self.on_surface(x, 1e-7) {
            return Err(Error::Geometry(format!(
                "point {:?} off the barrier by {:.3e}",
                x,
                self.signed_distance_raw(x)
            )));
        }
        let kappa = self.kappa();
        Ok((self.nu_s(x), kappa, kappa * n as f64))
    }

    /// Profile-plane helpers (profile point (u, v) embeds as (u, 0, v)).
    pub fn project2(&self, p: &Vec2) -> Vec2 {
        let q = self.project(&embed(p));
        Vec2::new(q.x, q.z)
    }

    pub fn nu_s2(&self, p: &Vec2) -> Vec2 {
        let n = self.nu_s(&embed(p));
        Vec2::new(n.x, n.z)
    }

    pub fn signed_distance_raw2(&self, p: &Vec2) -> f64 {
        self.signed_distance_raw(&embed(p))
    }

    /// Ghost image of a profile point for the orthogonality stencil:
    /// mirror reflection for planes, circle inversion for spheres (both fix
    /// S and exchange its sides, and a curve crossing S is orthogonal to it
    /// exactly when locally invariant under this map).
    pub fn reflect2(&self, p: &Vec2) -> Vec2 {
        match self.kind {
            BarrierKind::Plane { offset } => Vec2::new(p.x, 2.0 * offset - p.y),
            BarrierKind::Sphere { center_z, radius } => {
                let c = Vec2::new(0.0, center_z);
                let d = p - c;
                let n2 = d.norm_squared().max(1e-300);
                c + d * (radius * radius / n2)
            }
        }
    }
}

pub fn embed(p: &Vec2) -> Vec3 {
    Vec3::new(p.x, 0.0, p.y)
}

/// Auxiliary ambient data fixed once per barrier: tubular radius of the
/// extension, the calibration constant D0 with T(X, X, nu) + D0 >= 1, the
/// cutoff rate alpha and the boundary-derivative constant b >= 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AmbientFields {
    pub tubular_radius: f64,
    pub d0: f64,
    pub alpha: f64,
    pub b_const: f64,
}

/// Barrier plus its ambient fields; the unit most of the code passes around.
#[derive(Debug, Clone, Copy)]
pub struct BarrierCtx {
    pub barrier: Barrier,
    pub fields: AmbientFields,
}

impl BarrierCtx {
    /// Build with calibrated D0 and default alpha/b (alpha is refitted by
    /// the diagnostics layer; see `diag`).
    pub fn new(barrier: Barrier) -> Self {
        let tubular_radius = match barrier.kind {
            BarrierKind::Plane { .. } => 1.0,
            // half the inscribed radius
            BarrierKind::Sphere { radius, .. } => 0.5 * radius,
        };
        let d0 = calibrate_d0_with_tube(&barrier, tubular_radius);
        let b_const = 1.0f64.max(barrier.kappa().abs());
        BarrierCtx {
            barrier,
            fields: AmbientFields {
                tubular_radius,
                d0,
                alpha: 0.0,
                b_const,
            },
        }
    }

    /// Smooth signed distance d: ambient -> [-1, 1], zero on S, derivative
    /// along nu_S equal to 1 near S, smoothly saturating at the tubular
    /// radius.
    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        soft_clamp(
            self.barrier.signed_distance_raw(x),
            (0.5 * self.fields.tubular_radius).min(0.5),
        )
    }

    pub fn signed_distance2(&self, p: &Vec2) -> f64 {
        self.signed_distance(&embed(p))
    }

    /// Bump factor of the extensions at x (1 on S, 0 outside the tube).
    pub fn bump(&self, x: &Vec3) -> f64 {
        bump(self.barrier.signed_distance_raw(x) / self.fields.tubular_radius)
    }

    /// Extension of nu_S: nearest-point projection times a bump supported
    /// in the tubular neighborhood.  Equals nu_S on S, |X| <= 1 everywhere,
    /// zero outside the tube.  This is also the vector field X used by the
    /// trace inequality.
    pub fn extension_field_x(&self, x: &Vec3) -> Vec3 {
        let b = self.bump(x);
        if b == 0.0 {
            return Vec3::zeros();
        }
        self.barrier.nu_s(x) * b
    }

    /// Extended shape operator of S applied to ambient vectors u, v: the
    /// projected bilinear form kappa <pi u, pi v> times the bump, where pi
    /// projects out nu_S at the nearest point.
    pub fn k_hat(&self, x: &Vec3, u: &Vec3, v: &Vec3) -> f64 {
        let b = self.bump(x);
        if b == 0.0 {
            return 0.0;
        }
        let n = self.barrier.nu_s(x);
        let pu = u - n * u.dot(&n);
        let pv = v - n * v.dot(&n);
        self.barrier.kappa() * b * pu.dot(&pv)
    }

    /// Perturbation 3-tensor entry
    /// T(u, v, nu) = k(u, nu) <v, nu_S> + k(v, nu) <u, nu_S>
    /// with k and nu_S replaced by their extensions.
    pub fn perturbation_t(&self, x: &Vec3, u: &Vec3, v: &Vec3, nu: &Vec3) -> f64 {
        let xs = self.extension_field_x(x);
        self.k_hat(x, u, nu) * v.dot(&xs) + self.k_hat(x, v, nu) * u.dot(&xs)
    }

    /// Matrix T_ij = T(e_i, e_j, nu) in a given orthonormal tangent frame.
    pub fn perturbation_tensor(
        &self,
        x: &Vec3,
        nu: &Vec3,
        frame: &[Vec3],
    ) -> Result<crate::SymMatrix> {
        if (nu.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition("nu must be a unit vector".into()));
        }
        for (i, e) in frame.iter().enumerate() {
            if (e.norm() - 1.0).abs() > 1e-8 || e.dot(nu).abs() > 1e-8 {
                return Err(Error::Precondition(format!(
                    "frame vector {i} not unit or not orthogonal to nu"
                )));
            }
            for f in frame.iter().skip(i + 1) {
                if e.dot(f).abs() > 1e-8 {
                    return Err(Error::Precondition("frame not orthonormal".into()));
                }
            }
        }
        crate::SymMatrix::from_fn(frame.len(), |i, j| {
            self.perturbation_t(x, &frame[i], &frame[j], nu)
        })
    }

    /// Diagonal entries (T_11, T_22) of the perturbation tensor in the
    /// axisymmetric frame {profile tangent, angular direction} at a profile
    /// point with surface normal nu (both in the profile plane).  The
    /// angular entry vanishes structurally for axisymmetric barriers.
    pub fn perturbation_axisym(&self, p: &Vec2, tangent: &Vec2, nu: &Vec2) -> (f64, f64) {
        let x = embed(p);
        let t11 = self.perturbation_t(&x, &embed(tangent), &embed(tangent), &embed(nu));
        (t11, 0.0)
    }

    /// Radial extension of nu_S for sphere barriers; constant along rays so
    /// its derivative along nu_S vanishes on S.  Cut off near the center
    /// and in the far field.
    pub fn extension_field_v(&self, x: &Vec3) -> Result<Vec3> {
        let BarrierKind::Sphere { center_z, radius } = self.barrier.kind else {
            return Err(Error::UnsupportedBarrier(
                "the radial field V is defined only for sphere barriers".into(),
            ));
        };
        let c = Vec3::new(0.0, 0.0, center_z);
        let d = x - c;
        let rho = d.norm();
        if rho < 1e-14 {
            return Ok(Vec3::zeros());
        }
        let cut = plateau(rho, 0.25 * radius, 0.5 * radius, 2.0 * radius, 3.0 * radius);
        Ok(d * (self.barrier.orientation * cut / rho))
    }

    pub fn extension_field_v2(&self, p: &Vec2) -> Result<Vec2> {
        let v = self.extension_field_v(&embed(p))?;
        Ok(Vec2::new(v.x, v.z))
    }

    /// Cutoff function phi(x, t) = exp(-alpha t - 2 b d(x)); strictly
    /// positive, with nu_S(phi) <= -2 b phi on S.
    pub fn cutoff_phi(&self, x: &Vec3, t: f64, alpha: f64, b: f64) -> Result<f64> {
        if alpha < 0.0 || b < 0.0 {
            return Err(Error::Precondition(format!(
                "cutoff exponents must be nonnegative, got alpha={alpha}, b={b}"
            )));
        }
        Ok((-alpha * t - 2.0 * b * self.signed_distance(x)).exp())
    }

    pub fn cutoff_phi2(&self, p: &Vec2, t: f64) -> f64 {
        let d = self.signed_distance2(p);
        (-self.fields.alpha * t - 2.0 * self.fields.b_const * d).exp()
    }
}

/// Smooth odd clamp to (-1, 1): identity on |u| <= u0, then
/// u0 + (1 - u0) tanh((|u| - u0)/(1 - u0)).  C^2 at the joint.
fn soft_clamp(u: f64, u0: f64) -> f64 {
    let a = u.abs();
    if a <= u0 {
        u
    } else {
        let tail = 1.0 - u0;
        u.signum() * (u0 + tail * ((a - u0) / tail).tanh())
    }
}

/// Classic smooth bump: exp(1 - 1/(1 - y^2)) for |y| < 1, else 0.
/// Equals 1 at y = 0 and vanishes with all derivatives at |y| = 1.
fn bump(y: f64) -> f64 {
    let y2 = y * y;
    if y2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - y2)).exp()
    }
}

/// Smoothstep that is 0 below a, 1 on [b, c], 0 above d.
fn plateau(x: f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
    let rise = |s: f64| {
        let t = s.clamp(0.0, 1.0);
        t * t * (3.0 - 2.0 * t)
    };
    if x < b {
        rise((x - a) / (b - a))
    } else if x <= c {
        1.0
    } else {
        1.0 - rise((x - c) / (d - c))
    }
}

/// Smallest grid-searched D0 (rounded up to the next 0.1) such that
/// T(X, X, nu) + D0 >= 1 over sampled ambient points and unit directions.
pub fn calibrate_d0(barrier: &Barrier) -> f64 {
    let tube = match barrier.kind {
        BarrierKind::Plane { .. } => 1.0,
        BarrierKind::Sphere { radius, .. } => 0.5 * radius,
    };
    calibrate_d0_with_tube(barrier, tube)
}

fn calibrate_d0_with_tube(barrier: &Barrier, tubular_radius: f64) -> f64 {
    let ctx = BarrierCtx {
        barrier: *barrier,
        fields: AmbientFields {
            tubular_radius,
            d0: 0.0,
            alpha: 0.0,
            b_const: 1.0,
        },
    };
    let dirs = fibonacci_sphere(96);
    let mut min_t = f64::INFINITY;
    for point in sample_points(barrier, tubular_radius) {
        for u in &dirs {
            for v in &dirs {
                let t = ctx.perturbation_t(&point, u, u, v);
                if t < min_t {
                    min_t = t;
                }
            }
        }
    }
    // rounded up to the 0.1 grid; the rounding supplies the margin
    let needed = 1.0 - min_t;
    (needed * 10.0).ceil() / 10.0
}

fn sample_points(barrier: &Barrier, tubular_radius: f64) -> Vec<Vec3> {
    let offsets = [-0.9, -0.5, 0.0, 0.5, 0.9];
    let mut pts = Vec::new();
    match barrier.kind {
        BarrierKind::Plane { offset } => {
            for &dz in &offsets {
                pts.push(Vec3::new(0.0, 0.0, offset + dz * tubular_radius));
            }
        }
        BarrierKind::Sphere { center_z, radius } => {
            for i in 0..8 {
                let theta = std::f64::consts::PI * (i as f64 + 0.5) / 8.0;
                let dir = Vec3::new(theta.sin(), 0.0, theta.cos());
                for &dr in &offsets {
                    pts.push(Vec3::new(0.0, 0.0, center_z) + dir * (radius + dr * tubular_radius));
                }
            }
        }
    }
    pts
}

fn fibonacci_sphere(count: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..count)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - y * y).sqrt();
            let th = golden * i as f64;
            Vec3::new(r * th.cos(), y, r * th.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn unit_sphere() -> Barrier {
        Barrier::sphere(0.0, 1.0, 1.0).unwrap()
    }

    fn plane_z0() -> Barrier {
        Barrier::plane(0.0, 1.0).unwrap()
    }

    #[test]
    fn plane_shape_is_flat() {
        let b = plane_z0();
        let (nu, kappa, mean) = b.normal_and_shape(&Vec3::new(3.0, -1.0, 0.0), 2).unwrap();
        assert_eq!(nu, Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(kappa, 0.0);
        assert_eq!(mean, 0.0);
    }

    #[test]
    fn unit_sphere_shape() {
        // outward normal makes nu_S an eigen-direction with k = +1 so that
        // the spherical boundary identity N(H) = H holds
        let b = unit_sphere();
        let x = Vec3::new(0.0, 0.0, 1.0);
        let (nu, kappa, mean) = b.normal_and_shape(&x, 2).unwrap();
        assert_relative_eq!(nu.z, 1.0);
        assert_relative_eq!(kappa, 1.0);
        assert_relative_eq!(mean, 2.0);
    }

    #[test]
    fn sphere_radius_two_scaling() {
        let b = Barrier::sphere(0.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(b.kappa(), 0.5);
    }

    #[test]
    fn off_surface_rejected() {
        let b = unit_sphere();
        assert!(b.normal_and_shape(&Vec3::new(0.0, 0.0, 1.5), 2).is_err());
    }

    #[test]
    fn signed_distance_examples() {
        let ctx = BarrierCtx::new(plane_z0());
        // on S
        assert_eq!(ctx.signed_distance(&Vec3::new(1.0, 2.0, 0.0)), 0.0);
        // exact below the clamp threshold
        assert_eq!(ctx.signed_distance(&Vec3::new(0.0, 0.0, 0.3)), 0.3);
        // clamped far away
        let far = ctx.signed_distance(&Vec3::new(0.0, 0.0, 100.0));
        assert!(far > 0.95 && far <= 1.0);
        let far_neg = ctx.signed_distance(&Vec3::new(0.0, 0.0, -100.0));
        assert!(far_neg < -0.95 && far_neg >= -1.0);
    }

    #[test]
    fn distance_derivative_along_normal_is_one_near_s() {
        let ctx = BarrierCtx::new(unit_sphere());
        let h = 1e-6;
        for i in 0..12 {
            let th = std::f64::consts::PI * (i as f64 + 0.5) / 12.0;
            let x = Vec3::new(th.sin(), 0.0, th.cos());
            let nu = ctx.barrier.nu_s(&x);
            let d = (ctx.signed_distance(&(x + nu * h)) - ctx.signed_distance(&(x - nu * h)))
                / (2.0 * h);
            assert!(d >= 1.0 - 1e-6, "nu_S(d) = {d} at sample {i}");
        }
    }

    #[test]
    fn extension_x_examples() {
        let ctx = BarrierCtx::new(plane_z0());
        // equals nu_S on S
        let on = ctx.extension_field_x(&Vec3::new(1.0, 2.0, 0.0));
        assert_relative_eq!(on.z, 1.0, epsilon = 1e-12);
        // zero outside the tubular neighborhood
        let out = ctx.extension_field_x(&Vec3::new(0.0, 0.0, 5.0));
        assert_eq!(out, Vec3::zeros());
        // |X| <= 1 in between
        for i in 0..20 {
            let z = -1.5 + 0.15 * i as f64;
            assert!(ctx.extension_field_x(&Vec3::new(0.0, 0.0, z)).norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn extension_v_examples() {
        let ctx = BarrierCtx::new(unit_sphere());
        let on = ctx.extension_field_v(&Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(on.z, 1.0, epsilon = 1e-12);
        // radial extension below S
        let inner = ctx.extension_field_v(&Vec3::new(0.0, 0.0, 0.5)).unwrap();
        assert_relative_eq!(inner.z, 1.0, epsilon = 1e-12);
        // plane barrier unsupported
        let pctx = BarrierCtx::new(plane_z0());
        assert!(matches!(
            pctx.extension_field_v(&Vec3::new(0.0, 0.0, 0.0)),
            Err(Error::UnsupportedBarrier(_))
        ));
    }

    #[test]
    fn v_field_radially_constant_on_sphere() {
        let ctx = BarrierCtx::new(unit_sphere());
        let h = 1e-6;
        for i in 0..10 {
            let th = std::f64::consts::PI * (i as f64 + 0.5) / 10.0;
            let x = Vec3::new(th.sin(), 0.0, th.cos());
            let nu = ctx.barrier.nu_s(&x);
            let vp = ctx.extension_field_v(&(x + nu * h)).unwrap();
            let vm = ctx.extension_field_v(&(x - nu * h)).unwrap();
            assert!((vp - vm).norm() / (2.0 * h) < 1e-6);
        }
    }

    #[test]
    fn perturbation_tensor_zero_for_plane() {
        let ctx = BarrierCtx::new(plane_z0());
        let nu = Vec3::new(1.0, 0.0, 0.0);
        let frame = [Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        let t = ctx
            .perturbation_tensor(&Vec3::new(0.3, -0.2, 0.1), &nu, &frame)
            .unwrap();
        assert_eq!(t.frobenius_norm(), 0.0);
    }

    #[test]
    fn perturbation_tensor_outside_tube_is_zero() {
        let ctx = BarrierCtx::new(unit_sphere());
        let nu = Vec3::new(1.0, 0.0, 0.0);
        let frame = [Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        let t = ctx
            .perturbation_tensor(&Vec3::new(0.0, 0.0, 3.0), &nu, &frame)
            .unwrap();
        assert_eq!(t.frobenius_norm(), 0.0);
    }

    #[test]
    fn perturbation_tensor_on_sphere_golden() {
        // x at the north pole, nu tangent to S, frame = {e_y, nu_S}:
        // T_22 = 2 k(nu_S, nu) <e_... with the projected extension,
        // k_hat(nu_S, .) = 0 and k_hat(e_y, nu) = <e_y, nu> = 0, so the
        // only potentially nonzero entries involve mixed terms; direct
        // evaluation gives T_11 = 0, T_12 = 0, T_22 = 0 at this exact
        // configuration.  Golden values recorded from first evaluation.
        let ctx = BarrierCtx::new(unit_sphere());
        let x = Vec3::new(0.0, 0.0, 1.0);
        let nu = Vec3::new(1.0, 0.0, 0.0);
        let frame = [Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        let t = ctx.perturbation_tensor(&x, &nu, &frame).unwrap();
        assert_relative_eq!(t.get(0, 0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(t.get(1, 1), 0.0, epsilon = 1e-14);
        assert_relative_eq!(t.get(0, 1), 0.0, epsilon = 1e-14);
        // a genuinely tilted direction: X at 45 degrees between nu_S and a
        // tangent, nu = -e_x, gives T(X, X, nu) = 2 (-1/sqrt2)(1/sqrt2) = -1,
        // the worst corner the D0 calibration has to cover
        let diag = (Vec3::new(1.0, 0.0, 0.0) + Vec3::new(0.0, 0.0, 1.0)).normalize();
        let tv = ctx.perturbation_t(&x, &diag, &diag, &Vec3::new(-1.0, 0.0, 0.0));
        assert_relative_eq!(tv, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn non_orthonormal_frame_rejected() {
        let ctx = BarrierCtx::new(unit_sphere());
        let nu = Vec3::new(1.0, 0.0, 0.0);
        let frame = [Vec3::new(0.5, 0.5, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        assert!(matches!(
            ctx.perturbation_tensor(&Vec3::new(0.0, 0.0, 1.0), &nu, &frame),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn d0_plane_is_one() {
        assert_eq!(calibrate_d0(&plane_z0()), 1.0);
    }

    #[test]
    fn d0_unit_sphere_in_range() {
        let d0 = calibrate_d0(&unit_sphere());
        // worst case is T = -2 max|k| cos sin = -1, so D0 near 2
        assert!((1.0..=2.1).contains(&d0), "D0 = {d0}");
        assert!(d0 >= 1.9, "grid search should find the -1 corner, got {d0}");
    }

    #[test]
    fn d0_decreasing_in_radius() {
        let d1 = calibrate_d0(&unit_sphere());
        let d2 = calibrate_d0(&Barrier::sphere(0.0, 2.0, 1.0).unwrap());
        let d4 = calibrate_d0(&Barrier::sphere(0.0, 4.0, 1.0).unwrap());
        assert!(d2 <= d1 && d4 <= d2, "D0 sequence {d1}, {d2}, {d4}");
    }

    #[test]
    fn d0_condition_holds_on_random_samples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for barrier in [plane_z0(), unit_sphere()] {
            let ctx = BarrierCtx::new(barrier);
            let d0 = ctx.fields.d0;
            for _ in 0..10_000 {
                let x = Vec3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                );
                let u = random_unit(&mut rng);
                let v = random_unit(&mut rng);
                let t = ctx.perturbation_t(&x, &u, &u, &v);
                assert!(
                    t + d0 >= 1.0 - 1e-9,
                    "T + D0 = {} at {:?}",
                    t + d0,
                    x
                );
            }
        }
    }

    fn random_unit(rng: &mut impl Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-3 {
                return v / n;
            }
        }
    }

    #[test]
    fn cutoff_phi_examples() {
        let ctx = BarrierCtx::new(plane_z0());
        // t = 0 on S
        assert_eq!(
            ctx.cutoff_phi(&Vec3::new(1.0, 0.0, 0.0), 0.0, 1.0, 1.0).unwrap(),
            1.0
        );
        // alpha = 0, b = 1, d = 0.5 -> e^{-1}
        let v = ctx
            .cutoff_phi(&Vec3::new(0.0, 0.0, 0.5), 0.0, 0.0, 1.0)
            .unwrap();
        assert_relative_eq!(v, (-1.0f64).exp(), epsilon = 1e-12);
        // decays in t
        let late = ctx
            .cutoff_phi(&Vec3::new(0.0, 0.0, 0.0), 50.0, 1.0, 1.0)
            .unwrap();
        assert!(late < 1e-20 && late > 0.0);
        assert!(ctx.cutoff_phi(&Vec3::zeros(), 0.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn cutoff_decreases_along_normal() {
        // nu_S(phi) <= -2 b phi on S
        let ctx = BarrierCtx::new(unit_sphere());
        let h = 1e-6;
        let b = 1.3;
        for i in 0..10 {
            let th = std::f64::consts::PI * (i as f64 + 0.5) / 10.0;
            let x = Vec3::new(th.sin(), 0.0, th.cos());
            let nu = ctx.barrier.nu_s(&x);
            let pp = ctx.cutoff_phi(&(x + nu * h), 0.0, 0.0, b).unwrap();
            let pm = ctx.cutoff_phi(&(x - nu * h), 0.0, 0.0, b).unwrap();
            let deriv = (pp - pm) / (2.0 * h);
            let phi = ctx.cutoff_phi(&x, 0.0, 0.0, b).unwrap();
            assert!(deriv <= -2.0 * b * phi + 1e-6, "nu_S(phi) = {deriv}");
        }
    }

    #[test]
    fn fields_have_bounded_second_differences() {
        // smoothness across the tube: no clamp kinks at sampled resolution
        for barrier in [plane_z0(), unit_sphere()] {
            let ctx = BarrierCtx::new(barrier);
            let h = 1e-4;
            let dir = Vec3::new(0.6, 0.0, 0.8);
            let probe = |x: &Vec3| {
                ctx.signed_distance(x)
                    + ctx.extension_field_x(x).norm_squared()
                    + ctx.k_hat(x, &Vec3::new(1.0, 0.0, 0.0), &Vec3::new(0.0, 0.0, 1.0))
            };
            // stay clear of the sphere center, where the raw distance has
            // its unavoidable cone point (far outside the tube)
            let (base, lo) = match barrier.kind {
                BarrierKind::Plane { .. } => (Vec3::new(0.0, 0.0, 0.0), -30),
                BarrierKind::Sphere { .. } => (Vec3::new(0.6, 0.0, 0.8), -9),
            };
            for i in lo..30 {
                let x = base + dir * (i as f64 * 0.05);
                let second =
                    (probe(&(x + dir * h)) - 2.0 * probe(&x) + probe(&(x - dir * h))) / (h * h);
                assert!(
                    second.abs() < 200.0,
                    "second difference {second:.3e} at offset {i}"
                );
            }
        }
    }

    #[test]
    fn reflection_fixes_orthogonal_curves() {
        // circle inversion maps a radial segment to itself
        let b = unit_sphere();
        let p = Vec2::new(0.8, 0.0);
        let ghost = b.reflect2(&p);
        assert_relative_eq!(ghost.x, 1.0 / 0.8, epsilon = 1e-12);
        // plane reflection mirrors across z = 0
        let pl = plane_z0();
        assert_eq!(pl.reflect2(&Vec2::new(0.5, 0.3)), Vec2::new(0.5, -0.3));
    }
}
