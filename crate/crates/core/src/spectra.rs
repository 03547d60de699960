//! Pointwise classification of sectioned pencils and pseudospectral grids.

use faer::c64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::sections::SectionedPencil;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lambda {
    Finite { re: f64, im: f64 },
    Infinity,
}

impl Lambda {
    pub fn finite(z: c64) -> Self {
        Self::Finite { re: z.re, im: z.im }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PointSingular,
    ApproxSingularOnly,
    SingularOnly,
    Regular,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::PointSingular => "point_singular",
            Self::ApproxSingularOnly => "approx_singular_only",
            Self::SingularOnly => "singular_only",
            Self::Regular => "regular",
        }
    }

    pub fn is_regular(&self) -> bool {
        *self == Self::Regular
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PointClassification {
    pub lambda: Lambda,
    pub sigma_min: f64,
    pub sigma_min_adjoint: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub tol_point: f64,
    pub tol_ap: f64,
}

impl Tolerances {
    /// `1e-10 * sigma_max` and `1e-6 * sigma_max` of `[A; E]`.
    pub fn defaults(s: &SectionedPencil) -> Result<Self> {
        let scale = s.scale()?;
        Ok(Self {
            tol_point: 1e-10 * scale,
            tol_ap: 1e-6 * scale,
        })
    }
}

fn verdict(sigma: f64, sigma_adj: f64, tols: Tolerances) -> Verdict {
    if sigma <= tols.tol_point {
        Verdict::PointSingular
    } else if sigma <= tols.tol_ap {
        Verdict::ApproxSingularOnly
    } else if sigma_adj <= tols.tol_ap {
        Verdict::SingularOnly
    } else {
        Verdict::Regular
    }
}

/// `sigma_min(lambda E - A)` and of its conjugate transpose. At infinity
/// the reversal `lambda A - E` is evaluated at 0.
pub fn classify_point(
    s: &SectionedPencil,
    lambda: Lambda,
    tols: Tolerances,
) -> Result<PointClassification> {
    let m = match lambda {
        Lambda::Finite { re, im } => s.at(c64::new(re, im)),
        Lambda::Infinity => s.at_infinity(),
    };
    let sigma_min = linalg::sigma_min(m.as_ref())?;
    let sigma_min_adjoint = if m.nrows() == m.ncols() {
        sigma_min
    } else {
        linalg::sigma_min(linalg::adjoint(m.as_ref()).as_ref())?
    };
    Ok(PointClassification {
        lambda,
        sigma_min,
        sigma_min_adjoint,
        verdict: verdict(sigma_min, sigma_min_adjoint, tols),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl std::str::FromStr for Rect {
    type Err = Error;

    /// `re_min,re_max,im_min,im_max`.
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| invalid(format!("rectangle `{s}`: {e}")))?;
        if v.len() != 4 || v.iter().any(|x| !x.is_finite()) {
            return Err(invalid(format!(
                "rectangle `{s}` needs four finite numbers"
            )));
        }
        if v[0] > v[1] || v[2] > v[3] {
            return Err(invalid(format!("rectangle `{s}` is empty")));
        }
        Ok(Rect {
            re_min: v[0],
            re_max: v[1],
            im_min: v[2],
            im_max: v[3],
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectraGrid {
    pub rect: Rect,
    pub steps: (usize, usize),
    /// Row-major: the real part is the outer index.
    pub values: Vec<PointClassification>,
}

impl SpectraGrid {
    pub fn at(&self, i_re: usize, i_im: usize) -> &PointClassification {
        &self.values[i_re * self.steps.1 + i_im]
    }
}

fn node(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

pub fn spectra_grid(
    s: &SectionedPencil,
    rect: Rect,
    steps: (usize, usize),
    tols: Tolerances,
) -> Result<SpectraGrid> {
    if steps.0 < 2 || steps.1 < 2 {
        return Err(invalid("grid needs at least 2 steps per axis"));
    }
    let nodes: Vec<c64> = (0..steps.0)
        .flat_map(|i| {
            (0..steps.1).map(move |j| {
                c64::new(
                    node(rect.re_min, rect.re_max, i, steps.0),
                    node(rect.im_min, rect.im_max, j, steps.1),
                )
            })
        })
        .collect();
    let values = nodes
        .par_iter()
        .map(|z| classify_point(s, Lambda::finite(*z), tols))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectraGrid {
        rect,
        steps,
        values,
    })
}

/// Radius `sigma_min(lambda0 E - A) / ||E||_2` of a disc of regular points
/// around an invertible point of the section.
pub fn regularity_disc(s: &SectionedPencil, lambda0: c64, tol: f64) -> Result<f64> {
    let sigma = linalg::sigma_min(s.at(lambda0).as_ref())?;
    if sigma <= tol {
        return Err(Error::NotInvertible {
            at: lambda0.to_string(),
            sigma_min: sigma,
        });
    }
    let ne = linalg::spectral_norm(s.e.as_ref())?;
    Ok(if ne == 0.0 { f64::INFINITY } else { sigma / ne })
}
