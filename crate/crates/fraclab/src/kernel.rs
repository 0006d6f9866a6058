//! Kernel stencils, FFT convolution, and analytic tail quadratures.
//!
//! Two kernels appear throughout: the flat singular kernel `|x-y|^{-n-2s}`
//! of the nonlocal operator/energies, and the half-space Poisson kernel.
//! The flat kernel is discretized as a translation-invariant point-value
//! stencil with the diagonal dropped; the Poisson kernel is integrated
//! exactly over source cells so that sharp (piecewise constant) traces are
//! extended without quadrature artifacts at small heights.
//!
//! Integrals over the exterior of the truncation box are evaluated
//! analytically: closed-form antiderivatives in 1D, one-dimensional angular
//! quadrature of closed-form radial masses in 2D.

use crate::grid::{FarField, GridSpec, TailSet};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, OnceLock};

// ---------------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------------

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Newton iteration on Legendre polynomial roots.
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(32))
}

fn gl64() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(64))
}

/// Integrates f over [a, b] with a fixed 32-point rule.
pub fn gl_integrate(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = gl32();
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(ws) {
        acc += w * f(c + r * x);
    }
    acc * r
}

fn gl_integrate_64(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = gl64();
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(ws) {
        acc += w * f(c + r * x);
    }
    acc * r
}

// ---------------------------------------------------------------------------
// FFT convolution on the lattice
// ---------------------------------------------------------------------------

/// Smallest integer >= n with prime factors in {2, 3, 5}.
pub fn next_nice(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2usize, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// Circular convolution sized to realize the linear convolution of a lattice
/// field with a translation-invariant kernel of offsets up to the lattice
/// width. Results match direct summation to roundoff.
pub struct Conv {
    dim: usize,
    n_side: usize,
    m: usize,
    kernel_hat: Vec<Complex<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Conv {
    /// `kernel(dx, dy)` gives the weight at signed offset (dx, dy); dy is 0 in 1D.
    pub fn new(dim: usize, n_side: usize, kernel: &dyn Fn(i64, i64) -> f64) -> Conv {
        let d = n_side as i64 - 1;
        let m = next_nice(2 * n_side);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let total = if dim == 1 { m } else { m * m };
        let mut karr = vec![Complex::new(0.0, 0.0); total];
        let wrap = |k: i64| -> usize { k.rem_euclid(m as i64) as usize };
        if dim == 1 {
            for dx in -d..=d {
                karr[wrap(dx)].re = kernel(dx, 0);
            }
        } else {
            for dy in -d..=d {
                let row = wrap(dy) * m;
                for dx in -d..=d {
                    karr[row + wrap(dx)].re = kernel(dx, dy);
                }
            }
        }
        let mut conv = Conv {
            dim,
            n_side,
            m,
            kernel_hat: Vec::new(),
            fwd,
            inv,
        };
        conv.fft_nd(&mut karr, true);
        conv.kernel_hat = karr;
        conv
    }

    fn fft_rows(&self, data: &mut [Complex<f64>], forward: bool) {
        let plan = if forward { &self.fwd } else { &self.inv };
        data.par_chunks_mut(self.m).for_each(|row| {
            plan.process(row);
        });
    }

    fn fft_nd(&self, data: &mut Vec<Complex<f64>>, forward: bool) {
        if self.dim == 1 {
            let plan = if forward { &self.fwd } else { &self.inv };
            plan.process(data);
        } else {
            self.fft_rows(data, forward);
            transpose_square(data, self.m);
            self.fft_rows(data, forward);
            transpose_square(data, self.m);
        }
    }

    /// Returns `out[i] = sum_j kernel[i-j] * field[j]` over lattice indices.
    pub fn convolve(&self, field: &[f64]) -> Vec<f64> {
        let n = self.n_side;
        let total = if self.dim == 1 { self.m } else { self.m * self.m };
        let mut buf = vec![Complex::new(0.0, 0.0); total];
        if self.dim == 1 {
            for (i, &v) in field.iter().enumerate() {
                buf[i].re = v;
            }
        } else {
            for iy in 0..n {
                for ix in 0..n {
                    buf[iy * self.m + ix].re = field[iy * n + ix];
                }
            }
        }
        self.fft_nd(&mut buf, true);
        let scale = 1.0 / total as f64;
        buf.par_iter_mut()
            .zip(self.kernel_hat.par_iter())
            .for_each(|(b, k)| {
                *b = *b * *k * scale;
            });
        self.fft_nd(&mut buf, false);
        if self.dim == 1 {
            (0..n).map(|i| buf[i].re).collect()
        } else {
            let mut out = vec![0.0; n * n];
            for iy in 0..n {
                for ix in 0..n {
                    out[iy * n + ix] = buf[iy * self.m + ix].re;
                }
            }
            out
        }
    }
}

fn transpose_square(data: &mut [Complex<f64>], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

// ---------------------------------------------------------------------------
// Flat kernel stencil
// ---------------------------------------------------------------------------

/// Point-value stencil for |x-y|^{-n-2s} times the cell measure h^n, with a
/// zero diagonal (principal-value surrogate).
pub struct FlatKernel {
    pub grid: Arc<GridSpec>,
    pub two_s: f64,
    /// 1D: weight at |offset| d, index d in 0..=2*k_max.
    w1: Vec<f64>,
    conv: OnceLock<Conv>,
}

impl FlatKernel {
    pub fn new(grid: &Arc<GridSpec>, two_s: f64) -> FlatKernel {
        let h = grid.h();
        let mut w1 = Vec::new();
        if grid.dim() == 1 {
            let d_max = 2 * grid.k_max() as usize;
            w1 = (0..=d_max)
                .map(|d| {
                    if d == 0 {
                        0.0
                    } else {
                        (d as f64 * h).powf(-1.0 - two_s) * h
                    }
                })
                .collect();
        }
        FlatKernel {
            grid: grid.clone(),
            two_s,
            w1,
            conv: OnceLock::new(),
        }
    }

    /// Weight of the signed lattice offset; zero at the origin.
    #[inline]
    pub fn weight(&self, dx: i64, dy: i64) -> f64 {
        if self.grid.dim() == 1 {
            self.w1[dx.unsigned_abs() as usize]
        } else {
            if dx == 0 && dy == 0 {
                return 0.0;
            }
            let h = self.grid.h();
            let r2 = ((dx * dx + dy * dy) as f64) * h * h;
            r2.powf(-(2.0 + self.two_s) / 2.0) * h * h
        }
    }

    pub fn conv(&self) -> &Conv {
        self.conv.get_or_init(|| {
            let dim = self.grid.dim();
            Conv::new(dim, self.grid.side(), &|dx, dy| self.weight(dx, dy))
        })
    }

    /// One-sided 1D exterior mass at distance `d`: integral of t^{-1-2s}
    /// over (d, infinity).
    pub fn halfline_mass(&self, d: f64) -> f64 {
        d.powf(-self.two_s) / self.two_s
    }

    /// Exterior masses split by far-field value regions at node position `x`.
    pub fn far_masses(&self, x: [f64; 2], far: &FarField) -> Vec<(f64, f64)> {
        let rb = self.grid.box_radius();
        if self.grid.dim() == 1 {
            match far {
                FarField::Sides { left, right } => vec![
                    (*left, self.halfline_mass(x[0] + rb)),
                    (*right, self.halfline_mass(rb - x[0])),
                ],
                _ => unreachable!("1D grid with 2D far field"),
            }
        } else {
            let two_s = self.two_s;
            angular_far_masses(far, x, rb, &|t: f64| t.powf(-two_s) / two_s)
        }
    }
}

// ---------------------------------------------------------------------------
// Angular tail quadrature (2D)
// ---------------------------------------------------------------------------

/// Distance from `x` (inside the box) to the box boundary along direction `e`.
fn ray_box_exit(x: [f64; 2], e: [f64; 2], rb: f64) -> f64 {
    let mut t = f64::MAX;
    for i in 0..2 {
        if e[i].abs() > 1e-300 {
            let edge = if e[i] > 0.0 { rb } else { -rb };
            let ti = (edge - x[i]) / e[i];
            if ti > 0.0 {
                t = t.min(ti);
            }
        }
    }
    t
}

/// Piecewise-constant values of `far` along the ray x + t e for t >= t0:
/// returns (t_start, value) with segments ending at the next start.
fn ray_segments(far: &FarField, x: [f64; 2], e: [f64; 2], t0: f64) -> Vec<(f64, f64)> {
    let mut cross: Vec<f64> = Vec::new();
    match far {
        FarField::Uniform(_) => {}
        FarField::HalfPlane { normal, .. } => {
            let den = normal[0] * e[0] + normal[1] * e[1];
            if den.abs() > 1e-14 {
                let t = -(normal[0] * x[0] + normal[1] * x[1]) / den;
                if t > t0 {
                    cross.push(t);
                }
            }
        }
        FarField::Quadrants { .. } => {
            for i in 0..2 {
                if e[i].abs() > 1e-14 {
                    let t = -x[i] / e[i];
                    if t > t0 {
                        cross.push(t);
                    }
                }
            }
            cross.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        FarField::Sides { .. } => unreachable!("1D far field on a 2D ray"),
    }
    let mut segs = Vec::with_capacity(cross.len() + 1);
    let mut starts = vec![t0];
    starts.extend(cross);
    for (i, &a) in starts.iter().enumerate() {
        let rep = if i + 1 < starts.len() {
            0.5 * (a + starts[i + 1])
        } else {
            a * 1.5 + 1.0
        };
        segs.push((a, far.value_at([x[0] + rep * e[0], x[1] + rep * e[1]])));
    }
    segs
}

/// Angles (from `x`) at which the integrand may lose smoothness: box corners,
/// far-field line directions, and line/box intersection points.
fn tail_breakpoints(far: &FarField, x: [f64; 2], rb: f64) -> Vec<f64> {
    let mut angles = Vec::new();
    for &cx in &[-rb, rb] {
        for &cy in &[-rb, rb] {
            angles.push((cy - x[1]).atan2(cx - x[0]));
        }
    }
    let mut push_line = |d: [f64; 2]| {
        let a = d[1].atan2(d[0]);
        angles.push(a);
        angles.push(a + std::f64::consts::PI);
        // Endpoints of the line segment inside the box.
        let mut t_end = f64::MAX;
        for i in 0..2 {
            if d[i].abs() > 1e-14 {
                t_end = t_end.min(rb / d[i].abs());
            }
        }
        if t_end < f64::MAX {
            for sgn in [-1.0, 1.0] {
                let p = [sgn * t_end * d[0], sgn * t_end * d[1]];
                angles.push((p[1] - x[1]).atan2(p[0] - x[0]));
            }
        }
    };
    match far {
        FarField::HalfPlane { normal, .. } => push_line([-normal[1], normal[0]]),
        FarField::Quadrants { .. } => {
            push_line([1.0, 0.0]);
            push_line([0.0, 1.0]);
            angles.push((-x[1]).atan2(-x[0]));
        }
        _ => {}
    }
    let tau = 2.0 * std::f64::consts::PI;
    let mut a: Vec<f64> = angles.into_iter().map(|v| v.rem_euclid(tau)).collect();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    a.dedup_by(|p, q| (*p - *q).abs() < 1e-12);
    a
}

/// Integral over the exterior of the box of `far(y) * k(|x-y|)` where the
/// radial mass `m(t) = int_t^inf k(r) r dr` is supplied in closed form.
pub fn angular_tail_integral(
    far: &FarField,
    x: [f64; 2],
    rb: f64,
    radial_mass: &dyn Fn(f64) -> f64,
) -> f64 {
    let breaks = tail_breakpoints(far, x, rb);
    let tau = 2.0 * std::f64::consts::PI;
    let max_panel = tau / 64.0;
    let integrand = |theta: f64| -> f64 {
        let e = [theta.cos(), theta.sin()];
        let t0 = ray_box_exit(x, e, rb);
        let segs = ray_segments(far, x, e, t0);
        let mut acc = 0.0;
        for (i, &(a, val)) in segs.iter().enumerate() {
            let hi = if i + 1 < segs.len() {
                radial_mass(segs[i + 1].0)
            } else {
                0.0
            };
            acc += val * (radial_mass(a) - hi);
        }
        acc
    };
    let mut total = 0.0;
    let nb = breaks.len().max(1);
    for i in 0..nb {
        let a = if breaks.is_empty() { 0.0 } else { breaks[i] };
        let b = if breaks.is_empty() {
            tau
        } else if i + 1 < nb {
            breaks[i + 1]
        } else {
            breaks[0] + tau
        };
        if b - a < 1e-13 {
            continue;
        }
        let panels = ((b - a) / max_panel).ceil() as usize;
        for p in 0..panels.max(1) {
            let pa = a + (b - a) * p as f64 / panels as f64;
            let pb = a + (b - a) * (p + 1) as f64 / panels as f64;
            total += gl_integrate(pa, pb, integrand);
        }
    }
    total
}

/// Exterior masses grouped by far-field value (2D).
fn angular_far_masses(
    far: &FarField,
    x: [f64; 2],
    rb: f64,
    radial_mass: &dyn Fn(f64) -> f64,
) -> Vec<(f64, f64)> {
    match far {
        FarField::Uniform(c) => {
            let m = angular_tail_integral(&FarField::Uniform(1.0), x, rb, radial_mass);
            vec![(*c, m)]
        }
        FarField::HalfPlane { normal, plus, minus } => {
            let ind = FarField::HalfPlane {
                normal: *normal,
                plus: 1.0,
                minus: 0.0,
            };
            let m_plus = angular_tail_integral(&ind, x, rb, radial_mass);
            let m_tot = angular_tail_integral(&FarField::Uniform(1.0), x, rb, radial_mass);
            vec![(*plus, m_plus), (*minus, m_tot - m_plus)]
        }
        FarField::Quadrants { plus, minus } => {
            let ind = FarField::Quadrants {
                plus: 1.0,
                minus: 0.0,
            };
            let m_plus = angular_tail_integral(&ind, x, rb, radial_mass);
            let m_tot = angular_tail_integral(&FarField::Uniform(1.0), x, rb, radial_mass);
            vec![(*plus, m_plus), (*minus, m_tot - m_plus)]
        }
        FarField::Sides { .. } => unreachable!(),
    }
}

/// Exterior membership masses of a set tail at `x`: (inside-mass, outside-mass).
pub fn tail_membership_masses(
    tail: &TailSet,
    x: [f64; 2],
    grid: &GridSpec,
    radial_mass_1d_or_2d: &dyn Fn(f64) -> f64,
) -> (f64, f64) {
    let rb = grid.box_radius();
    if grid.dim() == 1 {
        let (l, r) = match tail {
            TailSet::Sides { left, right } => (*left, *right),
            _ => unreachable!(),
        };
        let ml = radial_mass_1d_or_2d(x[0] + rb);
        let mr = radial_mass_1d_or_2d(rb - x[0]);
        let mut inside = 0.0;
        let mut outside = 0.0;
        if l {
            inside += ml;
        } else {
            outside += ml;
        }
        if r {
            inside += mr;
        } else {
            outside += mr;
        }
        (inside, outside)
    } else {
        let far = tail.to_far_field(); // +1 inside, -1 outside
        let masses = angular_far_masses(&far, x, rb, radial_mass_1d_or_2d);
        let mut inside = 0.0;
        let mut outside = 0.0;
        for (val, m) in masses {
            if val > 0.0 {
                inside += m;
            } else {
                outside += m;
            }
        }
        (inside, outside)
    }
}

// ---------------------------------------------------------------------------
// Poisson kernel quadratures
// ---------------------------------------------------------------------------

/// `m(v0) = int_{v0}^inf (1+v^2)^{-(1+2s)/2} dv` for v0 >= 0.
///
/// For v0 >= 1 the substitution w = (1/v)^{2s} removes the slow tail; for
/// v0 < 1 the remaining piece is smooth and integrated directly.
pub fn poisson_profile_mass(v0: f64, s: f64) -> f64 {
    let total = poisson_profile_total(s);
    if v0 < 0.0 {
        return total - poisson_profile_mass(-v0, s);
    }
    let expo = -(1.0 + 2.0 * s) / 2.0;
    if v0 >= 1.0 {
        let w0 = v0.powf(-2.0 * s);
        gl_integrate_64(0.0, w0, |w| {
            (1.0 + w.powf(1.0 / s)).powf(expo) / (2.0 * s)
        })
    } else {
        let half = 0.5 * total;
        half - gl_integrate_64(0.0, v0, |v| (1.0 + v * v).powf(expo))
    }
}

/// Total mass `int_R (1+v^2)^{-(1+2s)/2} dv = 1 / sigma_{1,s}`.
pub fn poisson_profile_total(s: f64) -> f64 {
    1.0 / crate::params::sigma_ns(1, s)
}

/// 1D Poisson kernel mass over the half-line (t0, inf) at height z, with the
/// unit-mass normalization included.
pub fn poisson_halfline_mass_1d(t0: f64, z: f64, s: f64) -> f64 {
    crate::params::sigma_ns(1, s) * poisson_profile_mass(t0 / z, s)
}

/// Exact cell-integrated 1D Poisson weights at height z for signed offsets
/// -d_max..=d_max (returned with index d + d_max).
pub fn poisson_cell_weights_1d(h: f64, z: f64, s: f64, d_max: usize) -> Vec<f64> {
    let sigma = crate::params::sigma_ns(1, s);
    // Cumulative masses at cell edges (k - 1/2) h, k = -d_max..=d_max+1.
    let edges: Vec<f64> = (0..=(2 * d_max + 1))
        .map(|i| {
            let k = i as i64 - d_max as i64;
            let t = (k as f64 - 0.5) * h;
            sigma * poisson_profile_mass(t / z, s)
        })
        .collect();
    (0..=(2 * d_max)).map(|i| edges[i] - edges[i + 1]).collect()
}

/// 2D Poisson radial mass `int_t^inf K r dr = sigma z^{2s} (t^2+z^2)^{-s} / (2s)`.
pub fn poisson_radial_mass_2d(t: f64, z: f64, s: f64, sigma: f64) -> f64 {
    sigma * z.powf(2.0 * s) * (t * t + z * z).powf(-s) / (2.0 * s)
}

/// Exact integral of the 2D Poisson kernel over the rectangle
/// [0,X] x [0,Y] (X, Y >= 0) at height z, by angular quadrature of the
/// closed-form radial primitive.
fn poisson_corner_integral_2d(xx: f64, yy: f64, z: f64, s: f64, sigma: f64) -> f64 {
    if xx <= 0.0 || yy <= 0.0 {
        return 0.0;
    }
    let phi_c = yy.atan2(xx);
    let pref = sigma * z.powf(2.0 * s) / (2.0 * s);
    let z2 = z * z;
    let piece = |a: f64, b: f64, r_of_theta: &dyn Fn(f64) -> f64| -> f64 {
        gl_integrate(a, b, |th| {
            let r = r_of_theta(th);
            z2.powf(-s) - (r * r + z2).powf(-s)
        })
    };
    let i1 = piece(0.0, phi_c, &|th: f64| xx / th.cos());
    let i2 = piece(phi_c, std::f64::consts::FRAC_PI_2, &|th: f64| yy / th.sin());
    pref * (i1 + i2)
}

/// Cell-integrated 2D Poisson weight at signed offset (dx, dy) cells, height z.
/// Exact (angular quadrature) near the evaluation point, midpoint far away.
pub fn poisson_cell_weight_2d(
    dx: i64,
    dy: i64,
    h: f64,
    z: f64,
    s: f64,
    sigma: f64,
    exact_radius: i64,
) -> f64 {
    if dx.abs().max(dy.abs()) <= exact_radius {
        let corner = |xx: f64, yy: f64| -> f64 {
            let sgn = xx.signum() * yy.signum();
            sgn * poisson_corner_integral_2d(xx.abs(), yy.abs(), z, s, sigma)
        };
        let (a1, b1) = (dx as f64 * h - 0.5 * h, dx as f64 * h + 0.5 * h);
        let (a2, b2) = (dy as f64 * h - 0.5 * h, dy as f64 * h + 0.5 * h);
        corner(b1, b2) - corner(a1, b2) - corner(b1, a2) + corner(a1, a2)
    } else {
        // Midpoint with the analytic Laplacian correction: for the radial
        // profile g(q) = (q + z^2)^{-1-s}, q = |t|^2, the cell integral is
        // h^2 [K + h^2/24 (4 g' + 4 q g'') sigma z^{2s}] + O(h^6).
        let q = ((dx * dx + dy * dy) as f64) * h * h;
        let z2 = z * z;
        let base = (q + z2).powf(-(1.0 + s));
        let gp = -(1.0 + s) * (q + z2).powf(-(2.0 + s));
        let gpp = (1.0 + s) * (2.0 + s) * (q + z2).powf(-(3.0 + s));
        let lap = 4.0 * gp + 4.0 * q * gpp;
        sigma * z.powf(2.0 * s) * (base + h * h / 24.0 * lap) * h * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, OmegaShape};

    #[test]
    fn gl_rule_exactness() {
        // 32-point GL is exact for polynomials up to degree 63.
        let v = gl_integrate(0.0, 1.0, |x| x.powi(7));
        assert!((v - 0.125).abs() < 1e-14);
        let v = gl_integrate(-1.0, 2.0, |x| 3.0 * x * x);
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn conv_matches_direct_1d() {
        let n = 41;
        let kern = |dx: i64, _| {
            if dx == 0 {
                0.0
            } else {
                1.0 / (dx * dx) as f64
            }
        };
        let conv = Conv::new(1, n, &kern);
        let field: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let fast = conv.convolve(&field);
        for i in 0..n {
            let mut direct = 0.0;
            for j in 0..n {
                direct += kern(i as i64 - j as i64, 0) * field[j];
            }
            assert!((fast[i] - direct).abs() < 1e-10, "at {i}: {} vs {direct}", fast[i]);
        }
    }

    #[test]
    fn conv_matches_direct_2d() {
        let n = 17;
        let kern = |dx: i64, dy: i64| {
            if dx == 0 && dy == 0 {
                0.0
            } else {
                1.0 / ((dx * dx + dy * dy) as f64)
            }
        };
        let conv = Conv::new(2, n, &kern);
        let field: Vec<f64> = (0..n * n).map(|i| ((i * 104729) % 17) as f64 - 8.0).collect();
        let fast = conv.convolve(&field);
        for iy in 0..n {
            for ix in 0..n {
                let mut direct = 0.0;
                for jy in 0..n {
                    for jx in 0..n {
                        direct += kern(ix as i64 - jx as i64, iy as i64 - jy as i64)
                            * field[jy * n + jx];
                    }
                }
                let got = fast[iy * n + ix];
                assert!((got - direct).abs() < 1e-9, "at ({ix},{iy}): {got} vs {direct}");
            }
        }
    }

    #[test]
    fn poisson_profile_total_matches_direct() {
        for &s in &[0.1, 0.25, 0.4] {
            // Direct wide quadrature as an independent check of the closed form.
            let expo = -(1.0 + 2.0 * s) / 2.0;
            let mut direct = gl_integrate_64(0.0, 50.0, |v| (1.0 + v * v).powf(expo)) * 2.0;
            // Tail beyond 50: integrand ~ v^{-1-2s}.
            direct += 2.0 * 50f64.powf(-2.0 * s) / (2.0 * s) * (1.0 + 1e-3);
            let total = poisson_profile_total(s);
            assert!(
                (direct - total).abs() / total < 2e-3,
                "s={s}: {direct} vs {total}"
            );
            // Branch consistency: the w-substitution value at v0 = 1 plus the
            // direct piece over [0, 1] must reproduce half the total mass.
            let m1 = poisson_profile_mass(1.0, s);
            let piece = gl_integrate_64(0.0, 1.0, |v| (1.0 + v * v).powf(expo));
            assert!((m1 + piece - 0.5 * total).abs() < 1e-12);
            // Symmetry.
            let m = poisson_profile_mass(-2.0, s) + poisson_profile_mass(2.0, s);
            assert!((m - total).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_cell_weights_1d_unit_mass() {
        let s = 0.25;
        let h = 1.0 / 256.0;
        let d_max = 4096;
        for &z in &[1e-3, 0.05, 0.7] {
            let w = poisson_cell_weights_1d(h, z, s, d_max);
            let lattice: f64 = w.iter().sum();
            let edge = (d_max as f64 + 0.5) * h;
            let tails = 2.0 * poisson_halfline_mass_1d(edge, z, s);
            assert!(
                (lattice + tails - 1.0).abs() < 1e-10,
                "z={z}: {}",
                lattice + tails
            );
            assert!(w.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn poisson_cell_weights_2d_unit_mass() {
        let s = 0.3;
        let sigma = crate::params::sigma_ns(2, s);
        let h = 1.0 / 16.0;
        let k: i64 = 48; // box radius 3
        for &z in &[0.01, 0.2] {
            let mut lattice = 0.0;
            for dy in -2 * k..=2 * k {
                for dx in -2 * k..=2 * k {
                    lattice += poisson_cell_weight_2d(dx, dy, h, z, s, sigma, 8);
                }
            }
            // The cells cover the box of radius (2k + 1/2) h.
            let rb = (2 * k) as f64 * h + 0.5 * h;
            let tail = angular_tail_integral(&FarField::Uniform(1.0), [0.0, 0.0], rb, &|t| {
                poisson_radial_mass_2d(t, z, s, sigma)
            });
            let total = lattice + tail;
            assert!((total - 1.0).abs() < 2e-4, "z={z}: total {total}");
        }
    }

    #[test]
    fn flat_tail_2d_against_brute_force() {
        let g = build_grid(
            2,
            0.25,
            OmegaShape::Disc {
                center: [0.0, 0.0],
                radius: 0.5,
            },
            4.0,
            crate::grid::FarField::Uniform(1.0),
        )
        .unwrap();
        let two_s = 0.5;
        let k = FlatKernel::new(&g, two_s);
        let x = [0.3, -0.45];
        let far = FarField::HalfPlane {
            normal: [1.0, 0.5],
            plus: 1.0,
            minus: 0.0,
        };
        let masses = k.far_masses(x, &far);
        let engine: f64 = masses.iter().map(|(v, m)| v * m).sum();

        // Brute force in polar coordinates around x.
        let rb = g.box_radius();
        let n_th = 4000;
        let mut brute = 0.0;
        for it in 0..n_th {
            let th = 2.0 * std::f64::consts::PI * (it as f64 + 0.5) / n_th as f64;
            let e = [th.cos(), th.sin()];
            let t0 = ray_box_exit(x, e, rb);
            let n_r = 3000;
            let t_far = 200.0;
            let mut radial = 0.0;
            // log-spaced radial sampling plus analytic remainder
            for ir in 0..n_r {
                let a = t0 * (t_far / t0).powf(ir as f64 / n_r as f64);
                let b = t0 * (t_far / t0).powf((ir + 1) as f64 / n_r as f64);
                let tm = 0.5 * (a + b);
                let y = [x[0] + tm * e[0], x[1] + tm * e[1]];
                radial += far.value_at(y) * tm.powf(-2.0 - two_s) * tm * (b - a);
            }
            let y_far = [x[0] + 2.0 * t_far * e[0], x[1] + 2.0 * t_far * e[1]];
            radial += far.value_at(y_far) * t_far.powf(-two_s) / two_s;
            brute += radial * 2.0 * std::f64::consts::PI / n_th as f64;
        }
        assert!(
            (engine - brute).abs() / brute.abs() < 1e-3,
            "engine {engine} vs brute {brute}"
        );
        // Total mass = sum of region masses equals the uniform tail integral.
        let tot: f64 = masses.iter().map(|(_, m)| m).sum();
        let uni = angular_tail_integral(&FarField::Uniform(1.0), x, rb, &|t| {
            t.powf(-two_s) / two_s
        });
        assert!((tot - uni).abs() / uni < 1e-10);
    }

    #[test]
    fn next_nice_values() {
        assert_eq!(next_nice(1), 1);
        assert_eq!(next_nice(7), 8);
        assert_eq!(next_nice(1025), 1080);
    }
}
