//! Trajectories of `E x' = A x`: factorial series from chain generators,
//! polynomial solutions from singular polynomials, mild-solution and
//! power-balance residuals, a reference integrator and uniqueness
//! demonstrations for dH sections.

use std::f64::consts::E as EULER;
use std::sync::Arc;

use faer::c64;
use serde::Serialize;

use crate::dhcheck::dh_common_kernel;
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::opmodel::{DhAction, PencilAction};
use crate::report::{csv_line, fmt_num};
use crate::sections::SectionedPencil;
use crate::singpoly::{certifying_probes, verify_singular_polynomial, Side, VectorPolynomial};
use crate::vector::SparseVec;

fn one() -> c64 {
    c64::new(1.0, 0.0)
}

pub type TermRule = Arc<dyn Fn(usize) -> SparseVec + Send + Sync>;

/// `k -> a_k` (k >= 1) with a declared growth certificate
/// `||a_k||, ||A a_k||, ||E a_k|| <= (k/c)^k` for `k >= n0`.
#[derive(Clone)]
pub struct ChainGenerator {
    pub name: String,
    pub c: f64,
    pub n0: usize,
    rule: TermRule,
}

impl std::fmt::Debug for ChainGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainGenerator")
            .field("name", &self.name)
            .field("c", &self.c)
            .field("n0", &self.n0)
            .finish()
    }
}

impl ChainGenerator {
    pub fn new(
        name: impl Into<String>,
        c: f64,
        n0: usize,
        rule: impl Fn(usize) -> SparseVec + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("growth constant c must be positive"));
        }
        Ok(Self {
            name: name.into(),
            c,
            n0: n0.max(1),
            rule: Arc::new(rule),
        })
    }

    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            c: 1.0,
            n0: 1,
            rule: Arc::new(|_| SparseVec::new()),
        }
    }

    pub fn term(&self, k: usize) -> SparseVec {
        (self.rule)(k)
    }

    /// `1 / (c e)`.
    pub fn radius(&self) -> f64 {
        1.0 / (self.c * EULER)
    }

    /// Checks `E a_1 = 0`, `E a_{k+1} = A a_k` for `k < m` (relative
    /// `link_tol`) and the growth bound for `n0 <= k <= m`.
    pub fn validate<P: PencilAction + ?Sized>(&self, p: &P, m: usize, link_tol: f64) -> Result<()> {
        let a1 = self.term(1);
        let ea1 = p.apply_e(&a1)?.norm();
        if ea1 > link_tol * a1.norm().max(1.0) {
            return Err(Error::GrowthCertificate {
                k: 1,
                detail: format!("||E a_1|| = {ea1:e}"),
            });
        }
        for k in 1..m {
            let ak = self.term(k);
            let aak = p.apply_a(&ak)?;
            let eak1 = p.apply_e(&self.term(k + 1))?;
            let d = eak1.sub(&aak).norm();
            if d > link_tol * aak.norm().max(1.0) {
                return Err(Error::GrowthCertificate {
                    k,
                    detail: format!("||E a_(k+1) - A a_k|| = {d:e}"),
                });
            }
        }
        for k in self.n0..=m {
            let ak = self.term(k);
            let bound = k as f64 * (k as f64 / self.c).ln();
            for (what, v) in [
                ("a_k", ak.norm()),
                ("A a_k", p.apply_a(&ak)?.norm()),
                ("E a_k", p.apply_e(&ak)?.norm()),
            ] {
                if v > 0.0 && v.ln() > bound + 1e-12 {
                    return Err(Error::GrowthCertificate {
                        k,
                        detail: format!("||{what}|| = {v:e} exceeds (k/c)^k"),
                    });
                }
            }
        }
        Ok(())
    }
}

pub type VectorFn = Arc<dyn Fn(f64) -> SparseVec + Send + Sync>;

/// Time dependence of a trajectory.
#[derive(Clone)]
pub enum Curve {
    /// `sum_p c_p t^p`.
    Polynomial(Vec<SparseVec>),
    /// Closed form or dense output with exact derivative; quadrature
    /// respects the breakpoints.
    Smooth {
        value: VectorFn,
        derivative: VectorFn,
        breakpoints: Vec<f64>,
    },
}

impl std::fmt::Debug for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Curve::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Curve::Smooth { breakpoints, .. } => f
                .debug_struct("Smooth")
                .field("breakpoints", &breakpoints.len())
                .finish(),
        }
    }
}

fn poly_eval(c: &[SparseVec], t: f64) -> SparseVec {
    let mut acc = SparseVec::new();
    for a in c.iter().rev() {
        acc = acc.scaled(c64::new(t, 0.0));
        acc.axpy(one(), a);
    }
    acc
}

impl Curve {
    pub fn value(&self, t: f64) -> SparseVec {
        match self {
            Curve::Polynomial(c) => poly_eval(c, t),
            Curve::Smooth { value, .. } => value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> SparseVec {
        match self {
            Curve::Polynomial(c) => {
                let d: Vec<SparseVec> = c
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(p, a)| a.scaled(c64::new(p as f64, 0.0)))
                    .collect();
                poly_eval(&d, t)
            }
            Curve::Smooth { derivative, .. } => derivative(t),
        }
    }

    /// Exact `int_0^t`, available for polynomial curves.
    pub fn exact_integral(&self, t: f64) -> Option<SparseVec> {
        match self {
            Curve::Polynomial(c) => {
                let mut out = SparseVec::new();
                for (p, a) in c.iter().enumerate() {
                    out.axpy(c64::new(t.powi(p as i32 + 1) / (p + 1) as f64, 0.0), a);
                }
                Some(out)
            }
            Curve::Smooth { .. } => None,
        }
    }

    fn breakpoints(&self) -> &[f64] {
        match self {
            Curve::Polynomial(_) => &[],
            Curve::Smooth { breakpoints, .. } => breakpoints,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SparseVec>,
    /// `||E x'(t) - A x(t)||`.
    pub residual_classical: Vec<f64>,
    /// Filled by [`mild_residual`]; NaN until then.
    pub residual_mild: Vec<f64>,
    /// Filled by [`power_balance_residual`]; NaN until then.
    pub residual_pbe: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    pub truncation_order: usize,
    pub curve: Curve,
}

impl Trajectory {
    pub fn from_curve<P: PencilAction + ?Sized>(
        p: &P,
        curve: Curve,
        times: &[f64],
        order: usize,
    ) -> Result<Self> {
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("time grid must be strictly increasing"));
        }
        let mut states = Vec::with_capacity(times.len());
        let mut res = Vec::with_capacity(times.len());
        for &t in times {
            let x = curve.value(t);
            let mut r = p.apply_e(&curve.derivative(t))?;
            r.axpy(c64::new(-1.0, 0.0), &p.apply_a(&x)?);
            res.push(r.norm());
            states.push(x);
        }
        let nan = vec![f64::NAN; times.len()];
        Ok(Self {
            times: times.to_vec(),
            states,
            residual_classical: res,
            residual_mild: nan.clone(),
            residual_pbe: nan.clone(),
            hamiltonian: nan,
            truncation_order: order,
            curve,
        })
    }

    /// Union of the state supports, ascending.
    pub fn window(&self) -> Vec<i64> {
        let mut w: Vec<i64> = self.states.iter().flat_map(|s| s.support()).collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    pub fn max_distance(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.sub(b).norm())
            .fold(0.0, f64::max)
    }

    /// `t, x{j}_re, x{j}_im..., residual_classical, residual_mild,
    /// residual_pbe, hamiltonian`.
    pub fn to_csv(&self) -> String {
        let w = self.window();
        let mut header = vec!["t".to_string()];
        for j in &w {
            header.push(format!("x{j}_re"));
            header.push(format!("x{j}_im"));
        }
        for h in [
            "residual_classical",
            "residual_mild",
            "residual_pbe",
            "hamiltonian",
        ] {
            header.push(h.into());
        }
        let mut out = csv_line(&header);
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![fmt_num(*t)];
            for j in &w {
                let z = self.states[i].get(*j);
                row.push(fmt_num(z.re));
                row.push(fmt_num(z.im));
            }
            row.push(fmt_num(self.residual_classical[i]));
            row.push(fmt_num(self.residual_mild[i]));
            row.push(fmt_num(self.residual_pbe[i]));
            row.push(fmt_num(self.hamiltonian[i]));
            out.push_str(&csv_line(&row));
        }
        out
    }
}

/// `f_M(t) = sum_{j=1}^M a_j t^j / j!` on a time grid inside 90% of the
/// certified radius `1/(ce)`.
pub fn series_solution<P: PencilAction + ?Sized>(
    p: &P,
    gen: &ChainGenerator,
    times: &[f64],
    order: usize,
) -> Result<Trajectory> {
    if order < 2 {
        return Err(invalid("series order must be >= 2"));
    }
    let radius = gen.radius();
    if let Some(t) = times.iter().find(|t| t.abs() >= 0.9 * radius) {
        return Err(Error::OutsideRadius { t: *t, radius });
    }
    gen.validate(p, order, 1e-12)?;
    let mut coeffs = vec![SparseVec::new()];
    let mut inv_fact = 1.0;
    for j in 1..=order {
        inv_fact /= j as f64;
        coeffs.push(gen.term(j).scaled(c64::new(inv_fact, 0.0)));
    }
    Trajectory::from_curve(p, Curve::Polynomial(coeffs), times, order)
}

/// `f(t) = sum_{j=1}^{k+1} x_{k+1-j} t^j / j!` for a right singular
/// polynomial `sum_i lambda^i x_i` of degree `k`; the chain relations make
/// the factorial series terminate.
pub fn polynomial_solution<P: PencilAction + ?Sized>(
    p: &P,
    sp: &VectorPolynomial,
    times: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    let k = sp
        .degree()
        .ok_or_else(|| invalid("zero polynomial has no associated solution"))?;
    let r = verify_singular_polynomial(p, sp, Side::Right, &certifying_probes(k))?;
    if r > tol {
        return Err(Error::VerificationFailed(format!(
            "candidate is not a right singular polynomial (residual {r:e} > {tol:e})"
        )));
    }
    let mut coeffs = vec![SparseVec::new()];
    let mut inv_fact = 1.0;
    for j in 1..=k + 1 {
        inv_fact /= j as f64;
        coeffs.push(sp.coeffs[k + 1 - j].scaled(c64::new(inv_fact, 0.0)));
    }
    Trajectory::from_curve(p, Curve::Polynomial(coeffs), times, k + 1)
}

fn simpson(f: &dyn Fn(f64) -> SparseVec, a: f64, b: f64, panels: usize) -> SparseVec {
    let h = (b - a) / panels as f64;
    let mut acc = f(a);
    acc.axpy(one(), &f(b));
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc.axpy(c64::new(w, 0.0), &f(a + h * i as f64));
    }
    acc.scaled(c64::new(h / 3.0, 0.0))
}

const MAX_REFINEMENTS: usize = 16;

/// Composite Simpson on each piece between breakpoints, refined
/// dyadically until the Richardson estimate `|S_2m - S_m| / 15` falls below
/// `0.1 * tol`.
pub fn integrate(
    f: &dyn Fn(f64) -> SparseVec,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<SparseVec> {
    if b <= a {
        return Ok(SparseVec::new());
    }
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|t| *t > a && *t < b));
    cuts.push(b);
    let mut panels = 2;
    let whole = |m: usize| {
        let mut s = SparseVec::new();
        for w in cuts.windows(2) {
            s.axpy(one(), &simpson(f, w[0], w[1], m));
        }
        s
    };
    let mut prev = whole(panels);
    for _ in 0..MAX_REFINEMENTS {
        panels *= 2;
        let next = whole(panels);
        let estimate = next.sub(&prev).norm() / 15.0;
        if estimate < 0.1 * tol {
            return Ok(next);
        }
        prev = next;
    }
    let estimate = whole(panels * 2).sub(&prev).norm() / 15.0;
    Err(Error::Quadrature { tol, estimate })
}

fn scalar(z: f64) -> SparseVec {
    let mut v = SparseVec::new();
    v.add_at(0, c64::new(z, 0.0));
    v
}

/// `||E x(t) - A int_0^t x - E x(0)||` per sample. Polynomial curves use the
/// exact integral, cross-checked against quadrature.
pub fn mild_residual<P: PencilAction + ?Sized>(
    p: &P,
    traj: &Trajectory,
    tol: f64,
) -> Result<Vec<f64>> {
    let curve = &traj.curve;
    let f = |t: f64| curve.value(t);
    let ex0 = p.apply_e(&curve.value(0.0))?;
    let mut acc = SparseVec::new();
    let mut last = 0.0;
    let segment_tol = tol / traj.times.len().max(1) as f64;
    let mut out = Vec::with_capacity(traj.times.len());
    for (i, &t) in traj.times.iter().enumerate() {
        if t < 0.0 {
            return Err(invalid("mild residuals need nonnegative times"));
        }
        acc.axpy(
            one(),
            &integrate(&f, last, t, curve.breakpoints(), segment_tol)?,
        );
        last = t;
        let integral = match curve.exact_integral(t) {
            Some(exact) => {
                let gap = exact.sub(&acc).norm();
                if gap > 10.0 * tol * exact.norm().max(1.0) {
                    return Err(Error::VerificationFailed(format!(
                        "quadrature and exact integral differ by {gap:e} at t = {t}"
                    )));
                }
                exact
            }
            None => acc.clone(),
        };
        let mut r = p.apply_e(&traj.states[i])?;
        r.axpy(c64::new(-1.0, 0.0), &p.apply_a(&integral)?);
        r.axpy(c64::new(-1.0, 0.0), &ex0);
        out.push(r.norm());
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerBalance {
    /// `|<Ef, Qf>(t) - <Ef, Qf>(0) - 2 Re int_0^t <BQf, Qf>|`.
    pub residuals: Vec<f64>,
    /// `H(f(t)) = <Ef(t), Qf(t)> / 2`.
    pub hamiltonian: Vec<f64>,
}

pub fn power_balance_residual<P: DhAction + ?Sized>(
    p: &P,
    traj: &Trajectory,
    tol: f64,
) -> Result<PowerBalance> {
    let curve = &traj.curve;
    let energy = |x: &SparseVec| -> Result<f64> { Ok(p.apply_e(x)?.inner(&p.apply_q(x)?).re) };
    let power = |x: &SparseVec| -> Result<f64> {
        let qx = p.apply_q(x)?;
        Ok(p.apply_b(&qx)?.inner(&qx).re)
    };
    let e0 = energy(&curve.value(0.0))?;
    let mut residuals = Vec::with_capacity(traj.times.len());
    let mut hamiltonian = Vec::with_capacity(traj.times.len());

    let exact_power: Option<Box<dyn Fn(f64) -> f64>> = match curve {
        Curve::Polynomial(c) => {
            let g: Vec<SparseVec> = c
                .iter()
                .map(|a| p.apply_q(a).and_then(|q| p.apply_b(&q)))
                .collect::<Result<_>>()?;
            let h: Vec<SparseVec> = c.iter().map(|a| p.apply_q(a)).collect::<Result<_>>()?;
            let mut terms = Vec::new();
            for (i, gi) in g.iter().enumerate() {
                for (j, hj) in h.iter().enumerate() {
                    let w = gi.inner(hj).re;
                    if w != 0.0 {
                        terms.push((i + j + 1, w));
                    }
                }
            }
            Some(Box::new(move |t: f64| {
                terms
                    .iter()
                    .map(|(d, w)| w * t.powi(*d as i32) / *d as f64)
                    .sum()
            }))
        }
        Curve::Smooth { .. } => None,
    };

    let mut acc = 0.0;
    let mut last = 0.0;
    let segment_tol = tol / traj.times.len().max(1) as f64;
    let integrand = |t: f64| scalar(power(&curve.value(t)).unwrap_or(f64::NAN));
    for (i, &t) in traj.times.iter().enumerate() {
        let x = &traj.states[i];
        let e = energy(x)?;
        hamiltonian.push(0.5 * e);
        let integral = match &exact_power {
            Some(f) => f(t),
            None => {
                acc += integrate(&integrand, last, t, curve.breakpoints(), segment_tol)?
                    .get(0)
                    .re;
                last = t;
                acc
            }
        };
        residuals.push((e - e0 - 2.0 * integral).abs());
    }
    Ok(PowerBalance {
        residuals,
        hamiltonian,
    })
}

/// Classical RK4 for `x' = E^{-1} A x` on a square section with invertible
/// `E`, with cubic Hermite dense output between steps.
pub fn reference_trajectory(
    s: &SectionedPencil,
    x0: &SparseVec,
    t_end: f64,
    steps: usize,
    times: &[f64],
) -> Result<Trajectory> {
    if !s.is_square() {
        return Err(invalid("reference integration needs a square section"));
    }
    if steps == 0 || t_end.is_nan() || t_end <= 0.0 {
        return Err(invalid("need steps >= 1 and t_end > 0"));
    }
    let sig = linalg::sigma_min(s.e.as_ref())?;
    if sig <= 1e-12 * linalg::spectral_norm(s.e.as_ref())?.max(1.0) {
        return Err(Error::NotInvertible {
            at: "E".into(),
            sigma_min: sig,
        });
    }
    let m = linalg::solve(s.e.as_ref(), s.a.as_ref());
    let rhs = |x: &[c64]| linalg::mat_vec(m.as_ref(), x);
    let h = t_end / steps as f64;
    let mut xs = vec![s.window_in.to_dense(x0)?];
    let mut ds = vec![rhs(&xs[0])];
    for i in 0..steps {
        let x = &xs[i];
        let axpy = |y: &[c64], k: &[c64], c: f64| -> Vec<c64> {
            y.iter().zip(k).map(|(a, b)| a + b * c).collect()
        };
        let k1 = ds[i].clone();
        let k2 = rhs(&axpy(x, &k1, h / 2.0));
        let k3 = rhs(&axpy(x, &k2, h / 2.0));
        let k4 = rhs(&axpy(x, &k3, h));
        let next: Vec<c64> = (0..x.len())
            .map(|j| x[j] + (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0))
            .collect();
        ds.push(rhs(&next));
        xs.push(next);
    }
    let xs = Arc::new(xs);
    let ds = Arc::new(ds);
    let win = s.window_in;
    let locate = move |t: f64| -> (usize, f64) {
        let i = ((t / h).floor().max(0.0) as usize).min(steps - 1);
        (i, (t - i as f64 * h) / h)
    };
    let (xv, dv) = (xs.clone(), ds.clone());
    let value: VectorFn = Arc::new(move |t| {
        let (i, u) = locate(t);
        let (h00, h10, h01, h11) = (
            2.0 * u.powi(3) - 3.0 * u * u + 1.0,
            u.powi(3) - 2.0 * u * u + u,
            -2.0 * u.powi(3) + 3.0 * u * u,
            u.powi(3) - u * u,
        );
        let v: Vec<c64> = (0..xv[i].len())
            .map(|j| {
                xv[i][j] * h00
                    + dv[i][j] * (h10 * h)
                    + xv[i + 1][j] * h01
                    + dv[i + 1][j] * (h11 * h)
            })
            .collect();
        win.to_sparse(&v)
    });
    let derivative: VectorFn = Arc::new(move |t| {
        let (i, u) = locate(t);
        let (d00, d10, d01, d11) = (
            (6.0 * u * u - 6.0 * u) / h,
            3.0 * u * u - 4.0 * u + 1.0,
            (-6.0 * u * u + 6.0 * u) / h,
            3.0 * u * u - 2.0 * u,
        );
        let v: Vec<c64> = (0..xs[i].len())
            .map(|j| xs[i][j] * d00 + ds[i][j] * d10 + xs[i + 1][j] * d01 + ds[i + 1][j] * d11)
            .collect();
        win.to_sparse(&v)
    });
    if let Some(t) = times
        .iter()
        .find(|t| **t < 0.0 || **t > t_end * (1.0 + 1e-12))
    {
        return Err(invalid(format!("sample time {t} outside [0, {t_end}]")));
    }
    let breakpoints = (1..steps).map(|i| i as f64 * h).collect();
    Trajectory::from_curve(
        s,
        Curve::Smooth {
            value,
            derivative,
            breakpoints,
        },
        times,
        4,
    )
}

#[derive(Clone, Debug)]
pub enum UniquenessReport {
    /// Distinct mild solutions from the same initial value.
    NonUnique {
        kernel_dim: usize,
        kernel_vector: SparseVec,
        base: Box<Trajectory>,
        drifted: Box<Trajectory>,
        max_distance: f64,
    },
    /// Trivial common kernel, with the smallest stacked singular value of
    /// `[E; BQ]` as margin.
    Unique { kernel_dim: usize, margin: f64 },
}

/// With a nontrivial `ker E ∩ ker(BQ)` the stationary solution `x0`
/// (which requires `A x0 = 0`) and `x0 + t v` are both mild solutions.
pub fn uniqueness_demo(
    s: &SectionedPencil,
    x0: &SparseVec,
    times: &[f64],
    tol: f64,
) -> Result<UniquenessReport> {
    if s.dh.is_none() {
        return Err(Error::MissingDh);
    }
    let kernel = dh_common_kernel(s, None)?;
    if kernel.dim == 0 {
        return Ok(UniquenessReport::Unique {
            kernel_dim: 0,
            margin: kernel.margin,
        });
    }
    let ax0 = s.apply_a(x0)?.norm();
    if ax0 > tol * x0.norm().max(1.0) {
        return Err(invalid(
            "with a nontrivial common kernel only stationary initial values (A x0 = 0) are supported",
        ));
    }
    let v = s
        .window_in
        .to_sparse(&linalg::column(kernel.basis.as_ref(), 0));
    let mut base = Trajectory::from_curve(s, Curve::Polynomial(vec![x0.clone()]), times, 0)?;
    let mut drifted =
        Trajectory::from_curve(s, Curve::Polynomial(vec![x0.clone(), v.clone()]), times, 1)?;
    base.residual_mild = mild_residual(s, &base, tol)?;
    drifted.residual_mild = mild_residual(s, &drifted, tol)?;
    let worst = base
        .residual_mild
        .iter()
        .chain(&drifted.residual_mild)
        .copied()
        .fold(0.0, f64::max);
    if worst > tol {
        return Err(Error::VerificationFailed(format!(
            "kernel drift is not a mild solution (residual {worst:e})"
        )));
    }
    let max_distance = base.max_distance(&drifted);
    Ok(UniquenessReport::NonUnique {
        kernel_dim: kernel.dim,
        kernel_vector: v,
        base: Box::new(base),
        drifted: Box::new(drifted),
        max_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opmodel::{Pencil, SpaceDescriptor, StructuredOperator, WeightRule};
    use crate::sections::SectionedDh;

    fn c(x: f64) -> c64 {
        c64::new(x, 0.0)
    }

    fn shift_identity() -> Pencil {
        Pencil::new(
            StructuredOperator::shift(SpaceDescriptor::L2N, -1, WeightRule::one()),
            StructuredOperator::identity(SpaceDescriptor::L2N),
        )
        .unwrap()
    }

    #[test]
    fn telescoping_series_residual() {
        let p = shift_identity();
        let gen = ChainGenerator::new("e_k", 0.1, 1, |k| SparseVec::basis(k as i64)).unwrap();
        let tr = series_solution(&p, &gen, &[0.0, 0.5, 1.0], 10).unwrap();
        let expected = 1.0 / 3628800.0;
        assert!((tr.residual_classical[2] - expected).abs() <= 1e-15 * expected.max(1.0));
        assert!(tr.states[0].is_zero());
        assert_eq!(tr.residual_classical[0], 0.0);
    }

    #[test]
    fn zero_generator_gives_zero_trajectory() {
        let p = shift_identity();
        let tr = series_solution(&p, &ChainGenerator::zero(), &[0.0, 0.1], 4).unwrap();
        assert!(tr.states.iter().all(|s| s.is_zero()));
        assert!(tr.residual_classical.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn outside_radius_rejected() {
        let p = shift_identity();
        let gen = ChainGenerator::new("e_k", 1.0, 1, |k| SparseVec::basis(k as i64)).unwrap();
        let r = series_solution(&p, &gen, &[0.0, 0.35], 5);
        assert!(matches!(r, Err(Error::OutsideRadius { .. })));
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let f = |t: f64| scalar(t * t * t - 2.0 * t);
        let v = integrate(&f, 0.0, 2.0, &[], 1e-12).unwrap().get(0).re;
        assert!((v - 0.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_exponential_power_balance() {
        let i = linalg::identity(2);
        let b = Mat::from_fn(2, 2, |r, col| if r == col { c(-1.0) } else { c(0.0) });
        let s = SectionedPencil::from_matrices(i.clone(), b.clone())
            .unwrap()
            .with_dh(SectionedDh {
                b,
                q: i,
                j: None,
                r: None,
                q_is_identity: true,
            })
            .unwrap();
        let x0 = SparseVec::from_pairs([(1, c(0.6)), (2, c(0.8))]);
        let v = x0.clone();
        let d = x0.clone();
        let curve = Curve::Smooth {
            value: Arc::new(move |t| v.scaled(c((-t).exp()))),
            derivative: Arc::new(move |t| d.scaled(c(-(-t).exp()))),
            breakpoints: vec![],
        };
        let tr = Trajectory::from_curve(&s, curve, &[0.0, 0.5, 1.0, 2.0], 0).unwrap();
        let pb = power_balance_residual(&s, &tr, 1e-13).unwrap();
        assert!(
            pb.residuals.iter().all(|r| *r <= 1e-12),
            "{:?}",
            pb.residuals
        );
        assert!(tr.residual_classical.iter().all(|r| *r <= 1e-15));
    }

    use faer::Mat;
}
