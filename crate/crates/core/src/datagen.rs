//! Random problem-instance generation.
//!
//! An instance of `∇·(a∇p) = f`, `p|∂Ω = g` is built from three smooth
//! random fields: coefficient `a` and right-hand side `f` live on the unit
//! square, boundary data `g` on its perimeter. Each field interpolates
//! quasi-random knot values with a squared-exponential kernel, so values
//! stay near the requested range and every field is C^∞ — the PDE residual
//! needs two derivatives of `a` and the kernel expansion supplies them
//! analytically.

use crate::jet::Jet2;
use crate::linalg::solve_spd;
use crate::math;
use crate::rng;
use crate::{invalid, Result};
use alloc::format;
use alloc::vec::Vec;

/// Perimeter length of the unit square.
pub const PERIMETER: f64 = 4.0;

/// Default number of knots per side for 2-D fields.
pub const DEFAULT_KNOTS_PER_SIDE: usize = 4;

/// Default number of knots along the perimeter for boundary data.
pub const DEFAULT_PERIMETER_KNOTS: usize = 8;

/// Default grid resolution (nodes per side, boundary included).
pub const DEFAULT_GRID_RESOLUTION: usize = 128;

/// Ratio of kernel lengthscale to knot spacing.
const LENGTHSCALE_FACTOR: f64 = 1.5;

/// One-dimensional quasi-random stream over `[lo, hi]`.
///
/// Values follow the base-2 radical-inverse (van der Corput) sequence,
/// optionally digit-XOR-scrambled: a nonzero `seed` is expanded by
/// SplitMix64 into a 64-bit mask applied to the fraction bits, while
/// `seed = 0` leaves the sequence unscrambled. The value at a given index
/// is a pure function of `(seed, index)`.
#[derive(Clone, Debug)]
pub struct SobolStream {
    lo: f64,
    hi: f64,
    mask: u64,
    index: u64,
}

impl SobolStream {
    pub fn new(lo: f64, hi: f64, seed: u64) -> Self {
        let mask = if seed == 0 {
            0
        } else {
            rng::SplitMix64::new(seed).next_u64()
        };
        Self {
            lo,
            hi,
            mask,
            index: 1,
        }
    }

    /// Current 1-based index (the next value emitted uses it).
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Emits the next value and advances the stream.
    pub fn next_value(&mut self) -> f64 {
        let bits = self.index.reverse_bits() ^ self.mask;
        self.index += 1;
        let r = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        self.lo + (self.hi - self.lo) * r
    }

    pub fn take(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.next_value()).collect()
    }
}

/// Uniform 2-D knot lattice with one value per knot.
#[derive(Clone, Debug)]
pub struct KnotSet2D {
    /// Knots per side.
    pub n: usize,
    /// Lattice coordinates, x varying fastest.
    pub coords: Vec<[f64; 2]>,
    /// One value per knot, same order as `coords`.
    pub values: Vec<f64>,
}

/// Places an `n × n` lattice over `[0,1]²` with corners included.
///
/// Values are initialized to zero; fill them before fitting.
pub fn place_knots(n: usize) -> Result<KnotSet2D> {
    if n < 2 {
        return Err(invalid(format!("need at least 2 knots per side, got {n}")));
    }
    let step = 1.0 / (n - 1) as f64;
    let mut coords = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            coords.push([i as f64 * step, j as f64 * step]);
        }
    }
    Ok(KnotSet2D {
        n,
        coords,
        values: alloc::vec![0.0; n * n],
    })
}

/// Smooth scalar field over the plane built from kernel interpolation of
/// knot values.
///
/// The field is `mean + Σᵢ wᵢ·k(‖x − cᵢ‖)` with a squared-exponential
/// kernel; subtracting the knot mean before fitting makes constant data
/// reproduce exactly.
#[derive(Clone, Debug)]
pub struct FieldInterpolant {
    pub centers: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub mean: f64,
    pub lengthscale: f64,
    /// Diagonal jitter the fit needed; `0.0` in the usual case.
    pub jitter: f64,
}

/// Fits a noise-free kernel interpolant through the knot values.
pub fn fit_field(knots: &KnotSet2D, lengthscale: f64) -> Result<FieldInterpolant> {
    if lengthscale <= 0.0 || !lengthscale.is_finite() {
        return Err(invalid("lengthscale must be positive"));
    }
    let m = knots.coords.len();
    if knots.values.len() != m {
        return Err(invalid("one value per knot required"));
    }
    check_distinct(&knots.coords)?;
    let l2 = lengthscale * lengthscale;
    let mut k = alloc::vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let du = knots.coords[i][0] - knots.coords[j][0];
            let dv = knots.coords[i][1] - knots.coords[j][1];
            k[i * m + j] = math::exp(-(du * du + dv * dv) / (2.0 * l2));
        }
    }
    let mean = knots.values.iter().sum::<f64>() / m as f64;
    let b: Vec<f64> = knots.values.iter().map(|v| v - mean).collect();
    let sol = solve_spd(&k, m, &b)?;
    Ok(FieldInterpolant {
        centers: knots.coords.clone(),
        weights: sol.x,
        mean,
        lengthscale,
        jitter: sol.jitter,
    })
}

fn check_distinct(coords: &[[f64; 2]]) -> Result<()> {
    let mut sorted: Vec<&[f64; 2]> = coords.iter().collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(invalid("duplicate knot coordinates"));
        }
    }
    Ok(())
}

impl FieldInterpolant {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let l2 = self.lengthscale * self.lengthscale;
        let mut acc = self.mean;
        for (c, w) in self.centers.iter().zip(&self.weights) {
            let u = x - c[0];
            let v = y - c[1];
            acc += w * math::exp(-(u * u + v * v) / (2.0 * l2));
        }
        acc
    }

    /// Value, gradient, and Hessian of the field at `(x, y)`.
    ///
    /// Derivatives are the analytic derivatives of the kernel expansion.
    pub fn jet(&self, x: f64, y: f64) -> Jet2 {
        let l2 = self.lengthscale * self.lengthscale;
        let l4 = l2 * l2;
        let mut out = Jet2::constant(self.mean);
        for (c, w) in self.centers.iter().zip(&self.weights) {
            let u = x - c[0];
            let v = y - c[1];
            let k = w * math::exp(-(u * u + v * v) / (2.0 * l2));
            out.v += k;
            out.gx += k * (-u / l2);
            out.gy += k * (-v / l2);
            out.hxx += k * (u * u / l4 - 1.0 / l2);
            out.hyy += k * (v * v / l4 - 1.0 / l2);
            out.hxy += k * (u * v / l4);
        }
        out
    }
}

/// Periodic scalar function of boundary arc length (period [`PERIMETER`]).
///
/// The kernel acts on the chordal distance of the perimeter circle, so the
/// interpolant and all its derivatives wrap seamlessly at arc 0.
#[derive(Clone, Debug)]
pub struct BoundaryInterpolant {
    pub arcs: Vec<f64>,
    pub weights: Vec<f64>,
    pub mean: f64,
    pub lengthscale: f64,
    pub jitter: f64,
}

/// Fits the periodic boundary interpolant through `(arc, value)` pairs.
pub fn fit_boundary(arcs: &[f64], values: &[f64], lengthscale: f64) -> Result<BoundaryInterpolant> {
    if lengthscale <= 0.0 || !lengthscale.is_finite() {
        return Err(invalid("lengthscale must be positive"));
    }
    let m = arcs.len();
    if m < 2 {
        return Err(invalid("need at least 2 boundary knots"));
    }
    if values.len() != m {
        return Err(invalid("one value per arc position required"));
    }
    for &s in arcs {
        if !(0.0..PERIMETER).contains(&s) {
            return Err(invalid(
                format!("arc position {s} outside [0, {PERIMETER})"),
            ));
        }
    }
    let mut sorted = arcs.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("duplicate arc positions"));
    }

    let mut k = alloc::vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            k[i * m + j] = chordal_kernel(arcs[i] - arcs[j], lengthscale);
        }
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let b: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let sol = solve_spd(&k, m, &b)?;
    Ok(BoundaryInterpolant {
        arcs: arcs.to_vec(),
        weights: sol.x,
        mean,
        lengthscale,
        jitter: sol.jitter,
    })
}

/// Squared-exponential kernel of the chordal distance between two arc
/// positions on the perimeter circle of radius `PERIMETER/2π`.
fn chordal_kernel(darc: f64, lengthscale: f64) -> f64 {
    let radius = PERIMETER / (2.0 * core::f64::consts::PI);
    let dtheta = darc * (2.0 * core::f64::consts::PI / PERIMETER);
    let chord2 = 2.0 * radius * radius * (1.0 - math::cos(dtheta));
    math::exp(-chord2 / (2.0 * lengthscale * lengthscale))
}

impl BoundaryInterpolant {
    pub fn value(&self, arc: f64) -> f64 {
        let mut acc = self.mean;
        for (&s, w) in self.arcs.iter().zip(&self.weights) {
            acc += w * chordal_kernel(arc - s, self.lengthscale);
        }
        acc
    }

    /// Derivative with respect to arc length.
    pub fn deriv(&self, arc: f64) -> f64 {
        let radius = PERIMETER / (2.0 * core::f64::consts::PI);
        let rate = 2.0 * core::f64::consts::PI / PERIMETER;
        let l2 = self.lengthscale * self.lengthscale;
        let mut acc = 0.0;
        for (&s, w) in self.arcs.iter().zip(&self.weights) {
            let dtheta = (arc - s) * rate;
            let k = chordal_kernel(arc - s, self.lengthscale);
            acc += w * k * (-(radius * radius) / l2 * math::sin(dtheta) * rate);
        }
        acc
    }

    /// Boundary value at a point `(x, y)` on `∂Ω`.
    pub fn value_at_xy(&self, x: f64, y: f64) -> f64 {
        self.value(xy_to_arc(x, y))
    }
}

/// Maps perimeter arc length to boundary coordinates, counterclockwise
/// from `(0, 0)`: bottom, right, top, left.
///
/// Out-of-range arcs wrap modulo the perimeter.
pub fn boundary_to_xy(arc: f64) -> (f64, f64) {
    let s = math::rem_euclid(arc, PERIMETER);
    if s < 1.0 {
        (s, 0.0)
    } else if s < 2.0 {
        (1.0, s - 1.0)
    } else if s < 3.0 {
        (3.0 - s, 1.0)
    } else {
        (0.0, 4.0 - s)
    }
}

/// Inverse of [`boundary_to_xy`] for points on `∂Ω`.
///
/// Corners are mapped consistently with the counterclockwise convention.
/// Points off the boundary are projected by whichever edge test matches
/// first; callers are expected to pass boundary points.
pub fn xy_to_arc(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        x
    } else if x == 1.0 {
        1.0 + y
    } else if y == 1.0 {
        3.0 - x
    } else {
        math::rem_euclid(4.0 - y, PERIMETER)
    }
}

/// Knot value ranges for the three generated fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueRanges {
    /// Coefficient `a` knot range.
    pub coeff: (f64, f64),
    /// Right-hand side `f` knot range.
    pub rhs: (f64, f64),
    /// Boundary data `g` knot range.
    pub bc: (f64, f64),
}

impl ValueRanges {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("a", self.coeff), ("f", self.rhs), ("g", self.bc)] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(invalid(
                    format!("range for {name} must satisfy min < max, got [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }
}

/// A complete random problem instance.
#[derive(Clone, Debug)]
pub struct DatasetInstance {
    pub id: u32,
    pub seed: u64,
    pub n_knots: usize,
    pub grid_resolution: usize,
    pub ranges: ValueRanges,
    /// Variable coefficient `a`.
    pub coeff: FieldInterpolant,
    /// Right-hand side `f`.
    pub rhs: FieldInterpolant,
    /// Dirichlet boundary data `g`.
    pub bc: BoundaryInterpolant,
}

// Stream tags for the per-variable quasi-random substreams.
const STREAM_COEFF: u64 = 1;
const STREAM_RHS: u64 = 2;
const STREAM_BC: u64 = 3;

/// Generates a deterministic instance from `(id, ranges, n_knots, seed)`.
///
/// `a` and `f` come from independent 2-D knot sets, `g` from a 1-D
/// perimeter knot set ([`DEFAULT_PERIMETER_KNOTS`] knots); each variable
/// draws from its own scrambled substream. The grid resolution defaults to
/// [`DEFAULT_GRID_RESOLUTION`]; see [`DatasetInstance::with_grid_resolution`].
pub fn generate_instance(
    id: u32,
    ranges: ValueRanges,
    n_knots: usize,
    seed: u64,
) -> Result<DatasetInstance> {
    ranges.validate()?;
    let lengthscale = LENGTHSCALE_FACTOR / (n_knots.max(2) - 1) as f64;

    let mut knots_a = place_knots(n_knots)?;
    let mut stream = SobolStream::new(ranges.coeff.0, ranges.coeff.1, rng::derive(seed, STREAM_COEFF));
    knots_a.values = stream.take(n_knots * n_knots);
    let coeff = fit_field(&knots_a, lengthscale)?;

    let mut knots_f = place_knots(n_knots)?;
    let mut stream = SobolStream::new(ranges.rhs.0, ranges.rhs.1, rng::derive(seed, STREAM_RHS));
    knots_f.values = stream.take(n_knots * n_knots);
    let rhs = fit_field(&knots_f, lengthscale)?;

    let m = DEFAULT_PERIMETER_KNOTS;
    let arc_step = PERIMETER / m as f64;
    let arcs: Vec<f64> = (0..m).map(|j| j as f64 * arc_step).collect();
    let mut stream = SobolStream::new(ranges.bc.0, ranges.bc.1, rng::derive(seed, STREAM_BC));
    let g_values = stream.take(m);
    let bc = fit_boundary(&arcs, &g_values, LENGTHSCALE_FACTOR * arc_step)?;

    Ok(DatasetInstance {
        id,
        seed,
        n_knots,
        grid_resolution: DEFAULT_GRID_RESOLUTION,
        ranges,
        coeff,
        rhs,
        bc,
    })
}

impl DatasetInstance {
    pub fn with_grid_resolution(mut self, resolution: usize) -> Self {
        self.grid_resolution = resolution;
        self
    }
}

/// Which special case of the equation is being solved.
///
/// The full problem keeps both `f` and `g`; the Laplace variant forces
/// `f ≡ 0` and the zero-boundary variant forces `g ≡ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EquationVariant {
    PoissonNonzeroBc,
    Laplace,
    PoissonZeroBc,
}

impl EquationVariant {
    pub const ALL: [EquationVariant; 3] = [
        EquationVariant::PoissonNonzeroBc,
        EquationVariant::Laplace,
        EquationVariant::PoissonZeroBc,
    ];

    pub fn rhs_is_zero(self) -> bool {
        matches!(self, EquationVariant::Laplace)
    }

    pub fn bc_is_zero(self) -> bool {
        matches!(self, EquationVariant::PoissonZeroBc)
    }

    /// Effective right-hand side under this variant.
    pub fn rhs_value(self, instance: &DatasetInstance, x: f64, y: f64) -> f64 {
        if self.rhs_is_zero() {
            0.0
        } else {
            instance.rhs.value(x, y)
        }
    }

    /// Effective boundary value at arc position `s` under this variant.
    pub fn bc_value(self, instance: &DatasetInstance, arc: f64) -> f64 {
        if self.bc_is_zero() {
            0.0
        } else {
            instance.bc.value(arc)
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EquationVariant::PoissonNonzeroBc => "poisson",
            EquationVariant::Laplace => "laplace",
            EquationVariant::PoissonZeroBc => "poisson0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "poisson" => Some(EquationVariant::PoissonNonzeroBc),
            "laplace" => Some(EquationVariant::Laplace),
            "poisson0" => Some(EquationVariant::PoissonZeroBc),
            _ => None,
        }
    }
}
