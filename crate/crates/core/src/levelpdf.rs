//! Conversion of integer replication levels into discrete probability
//! vectors over the level grid.
//!
//! A level `s` in `0..=N` is normalized to `p = s/N` and expanded into a
//! vector `g` over the grid points `x_i = i/N` such that `g` sums to one,
//! is nonnegative, and attains its maximum at `p`. Three families are
//! supported, each with a free amplitude `A` and one shape parameter that
//! is solved from the sum constraint:
//!
//! - gaussian: `g(x) = A * exp(-(x-p)^2 / (2 sigma^2))`, solving `sigma`
//! - linear: `g(x) = A - beta * |x-p|`, solving `beta` in closed form
//! - exponential: `g(x) = A * lambda * exp(-lambda * |x-p|)`, solving `lambda`
//!
//! The gaussian and exponential parameters have no closed form on the
//! discrete grid and are found by bisection on the sum-minus-one residual.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute residual tolerance for the bisection solvers.
const SOLVE_TOL: f64 = 1e-10;
/// Iteration cap for bisection.
const MAX_BISECT_ITERS: usize = 200;
/// Fixed search bracket for the exponential spread parameter.
const EXP_BRACKET: (f64, f64) = (1e-6, 1e3);

#[derive(Debug, Error)]
pub enum PdfError {
    #[error("level {level} out of range 0..={max}")]
    LevelOutOfRange { level: i64, max: usize },
    #[error("normalized level {value} is not a grid point for N={n}")]
    NotAGridPoint { value: f64, n: usize },
    #[error("max level must be >= 1, got {0}")]
    InvalidGrid(usize),
    #[error("amplitude {amplitude} is not solvable for {family} (valid: {valid}): {reason}")]
    Unsolvable {
        family: FamilyKind,
        amplitude: f64,
        valid: String,
        reason: String,
    },
    #[error("value at index {index} is negative ({value:.6e}); amplitude too large for this level")]
    NonnegativityViolated { index: usize, value: f64 },
    #[error("sum of |x_i - mu| is zero; slope is undetermined")]
    DegenerateSlope,
    #[error("shape violation at index {index}: second difference {value:.6e} breaks the {family} rule")]
    ShapeViolation {
        index: usize,
        value: f64,
        family: FamilyKind,
    },
}

/// The discrete support: `N+1` equally spaced points `i/N` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGrid {
    n: usize,
    points: Vec<f64>,
}

impl LevelGrid {
    pub fn new(n: usize) -> Result<Self, PdfError> {
        if n == 0 {
            return Err(PdfError::InvalidGrid(n));
        }
        let points = (0..=n).map(|i| i as f64 / n as f64).collect();
        Ok(Self { n, points })
    }

    /// Highest level `N`.
    pub fn max_level(&self) -> usize {
        self.n
    }

    /// Number of grid points, `N+1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Index of the grid point equal to `p`, if any.
    pub fn index_of(&self, p: f64) -> Option<usize> {
        self.points.iter().position(|&x| (x - p).abs() < 1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Gaussian,
    Linear,
    Exponential,
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyKind::Gaussian => write!(f, "gaussian"),
            FamilyKind::Linear => write!(f, "linear"),
            FamilyKind::Exponential => write!(f, "exponential"),
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(FamilyKind::Gaussian),
            "linear" => Ok(FamilyKind::Linear),
            "exponential" | "exp" => Ok(FamilyKind::Exponential),
            other => Err(format!(
                "unknown family '{other}' (expected gaussian | linear | exp)"
            )),
        }
    }
}

/// A PDF family together with its amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdfFamily {
    pub kind: FamilyKind,
    pub amplitude: f64,
}

impl PdfFamily {
    pub fn new(kind: FamilyKind, amplitude: f64) -> Self {
        Self { kind, amplitude }
    }

    /// Amplitude that keeps every family well inside its solvable range for
    /// any level on a grid with `N >= 2`.
    pub fn default_amplitude(kind: FamilyKind) -> f64 {
        match kind {
            FamilyKind::Gaussian => 0.5,
            FamilyKind::Linear => 0.3,
            FamilyKind::Exponential => 1.0,
        }
    }
}

/// A solved supervision vector: nonnegative, sums to one, peaked at
/// `mu_index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisionPdf {
    pub values: Vec<f64>,
    pub mu_index: usize,
    /// The solved shape parameter: sigma, beta, or lambda.
    pub solved_param: f64,
}

impl SupervisionPdf {
    pub fn peak(&self) -> f64 {
        self.values[self.mu_index]
    }
}

/// Normalize an integer level to `s/N`, which coincides with a grid point.
pub fn normalize_level(level: i64, grid: &LevelGrid) -> Result<f64, PdfError> {
    if level < 0 || level as usize > grid.max_level() {
        return Err(PdfError::LevelOutOfRange {
            level,
            max: grid.max_level(),
        });
    }
    Ok(grid.points()[level as usize])
}

fn mu_index_for(p_l: f64, grid: &LevelGrid) -> Result<usize, PdfError> {
    grid.index_of(p_l).ok_or(PdfError::NotAGridPoint {
        value: p_l,
        n: grid.max_level(),
    })
}

/// Solve the linear family in closed form.
///
/// The sum constraint gives `beta = ((N+1) A - 1) / sum_i |x_i - mu|`.
/// Requires `A >= 1/(N+1)` (otherwise the slope is negative and the peak
/// moves away from `mu`) and small enough that no value goes negative.
pub fn solve_linear(p_l: f64, amplitude: f64, grid: &LevelGrid) -> Result<SupervisionPdf, PdfError> {
    let mu_index = mu_index_for(p_l, grid)?;
    let mu = grid.points()[mu_index];
    let k = grid.len() as f64;

    let a_min = 1.0 / k;
    if amplitude < a_min - 1e-12 {
        return Err(PdfError::Unsolvable {
            family: FamilyKind::Linear,
            amplitude,
            valid: format!("[{a_min:.6}, A_max(mu)]"),
            reason: "slope would be negative, moving the peak off mu".into(),
        });
    }

    let abs_sum: f64 = grid.points().iter().map(|&x| (x - mu).abs()).sum();
    if abs_sum == 0.0 {
        return Err(PdfError::DegenerateSlope);
    }
    let beta = (k * amplitude - 1.0) / abs_sum;

    let values: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| amplitude - beta * (x - mu).abs())
        .collect();
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, &v)| v < 0.0)
        .map(|(i, v)| (i, v))
    {
        return Err(PdfError::NonnegativityViolated { index, value });
    }

    Ok(SupervisionPdf {
        values,
        mu_index,
        solved_param: beta,
    })
}

/// Solve the gaussian family by bisection on sigma.
///
/// The discrete sum sweeps `(A, (N+1) A)` as sigma goes from 0 to infinity,
/// so a solution exists exactly when `1/(N+1) < A < 1`.
pub fn solve_gaussian(
    p_l: f64,
    amplitude: f64,
    grid: &LevelGrid,
) -> Result<SupervisionPdf, PdfError> {
    let mu_index = mu_index_for(p_l, grid)?;
    let mu = grid.points()[mu_index];
    let k = grid.len() as f64;

    if amplitude <= 1.0 / k || amplitude >= 1.0 {
        return Err(PdfError::Unsolvable {
            family: FamilyKind::Gaussian,
            amplitude,
            valid: format!("({:.6}, 1)", 1.0 / k),
            reason: "the discrete sum ranges over (A, (N+1)A) as sigma sweeps (0, inf)".into(),
        });
    }

    let residual = |sigma: f64| -> f64 {
        grid.points()
            .iter()
            .map(|&x| {
                let d = x - mu;
                amplitude * (-d * d / (2.0 * sigma * sigma)).exp()
            })
            .sum::<f64>()
            - 1.0
    };

    // Residual is monotone increasing in sigma: negative near zero
    // (sum -> A), positive for sigma large enough (sum -> (N+1)A).
    let lo = 1e-9;
    let mut hi = 1.0;
    let mut expansions = 0;
    while residual(hi) <= 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(PdfError::Unsolvable {
                family: FamilyKind::Gaussian,
                amplitude,
                valid: format!("({:.6}, 1)", 1.0 / k),
                reason: "no upper bracket for sigma".into(),
            });
        }
    }
    let sigma = bisect(lo, hi, residual, FamilyKind::Gaussian, amplitude)?;

    let values: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| {
            let d = x - mu;
            amplitude * (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();

    Ok(SupervisionPdf {
        values,
        mu_index,
        solved_param: sigma,
    })
}

/// Solve the exponential family by bisection on lambda over a fixed bracket.
pub fn solve_exponential(
    p_l: f64,
    amplitude: f64,
    grid: &LevelGrid,
) -> Result<SupervisionPdf, PdfError> {
    let mu_index = mu_index_for(p_l, grid)?;
    let mu = grid.points()[mu_index];

    let residual = |lambda: f64| -> f64 {
        grid.points()
            .iter()
            .map(|&x| amplitude * lambda * (-lambda * (x - mu).abs()).exp())
            .sum::<f64>()
            - 1.0
    };

    let (lo, hi) = EXP_BRACKET;
    let (flo, fhi) = (residual(lo), residual(hi));
    if flo.signum() == fhi.signum() {
        return Err(PdfError::Unsolvable {
            family: FamilyKind::Exponential,
            amplitude,
            valid: format!("bracket [{lo:e}, {hi:e}]"),
            reason: format!("no sign change on the search bracket (f(lo)={flo:.3e}, f(hi)={fhi:.3e})"),
        });
    }
    let lambda = bisect(lo, hi, residual, FamilyKind::Exponential, amplitude)?;

    let values: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| amplitude * lambda * (-lambda * (x - mu).abs()).exp())
        .collect();

    Ok(SupervisionPdf {
        values,
        mu_index,
        solved_param: lambda,
    })
}

/// Solve whichever family `family` names.
pub fn solve(family: &PdfFamily, p_l: f64, grid: &LevelGrid) -> Result<SupervisionPdf, PdfError> {
    match family.kind {
        FamilyKind::Gaussian => solve_gaussian(p_l, family.amplitude, grid),
        FamilyKind::Linear => solve_linear(p_l, family.amplitude, grid),
        FamilyKind::Exponential => solve_exponential(p_l, family.amplitude, grid),
    }
}

/// Convenience: solve directly from an integer level.
pub fn solve_level(
    family: &PdfFamily,
    level: i64,
    grid: &LevelGrid,
) -> Result<SupervisionPdf, PdfError> {
    let p_l = normalize_level(level, grid)?;
    solve(family, p_l, grid)
}

fn bisect<F: Fn(f64) -> f64>(
    mut lo: f64,
    mut hi: f64,
    f: F,
    family: FamilyKind,
    amplitude: f64,
) -> Result<f64, PdfError> {
    let mut flo = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    if f(hi) == 0.0 {
        return Ok(hi);
    }
    for _ in 0..MAX_BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid.abs() < SOLVE_TOL {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Err(PdfError::Unsolvable {
        family,
        amplitude,
        valid: String::new(),
        reason: format!("bisection did not reach |residual| < {SOLVE_TOL:e} in {MAX_BISECT_ITERS} iterations"),
    })
}

/// One checked stencil of the shape report.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeEntry {
    /// Center index of the three-point stencil.
    pub index: usize,
    /// Second difference `v[i+1] - 2 v[i] + v[i-1]`.
    pub second_difference: f64,
}

/// Numerical curvature report mirroring the per-family analytic shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub family: FamilyKind,
    pub entries: Vec<ShapeEntry>,
}

/// Check the discrete curvature of a solved PDF against its family.
///
/// - gaussian: second differences are nonpositive wherever the whole
///   stencil lies inside `[mu - sigma, mu + sigma]` (the concave band)
/// - linear: second differences vanish for stencils that do not straddle
///   the kink at `mu`
/// - exponential: second differences are nonnegative away from `mu`
///
/// Tolerance is 1e-12 on each checked second difference.
pub fn validate_shape(
    pdf: &SupervisionPdf,
    family: &PdfFamily,
    grid: &LevelGrid,
) -> Result<ShapeReport, PdfError> {
    const TOL: f64 = 1e-12;
    let v = &pdf.values;
    let x = grid.points();
    let mu = x[pdf.mu_index];
    let mut entries = Vec::new();

    for i in 1..grid.len() - 1 {
        let d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
        let checked = match family.kind {
            FamilyKind::Gaussian => {
                let sigma = pdf.solved_param;
                x[i - 1] >= mu - sigma - 1e-15 && x[i + 1] <= mu + sigma + 1e-15
            }
            FamilyKind::Linear | FamilyKind::Exponential => i != pdf.mu_index,
        };
        if !checked {
            continue;
        }
        let ok = match family.kind {
            FamilyKind::Gaussian => d2 <= TOL,
            FamilyKind::Linear => d2.abs() <= TOL,
            FamilyKind::Exponential => d2 >= -TOL,
        };
        if !ok {
            return Err(PdfError::ShapeViolation {
                index: i,
                value: d2,
                family: family.kind,
            });
        }
        entries.push(ShapeEntry {
            index: i,
            second_difference: d2,
        });
    }

    Ok(ShapeReport {
        family: family.kind,
        entries,
    })
}
