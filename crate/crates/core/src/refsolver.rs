//! Finite-difference ground truth for `∇·(a∇p) = f`, `p|∂Ω = g`.
//!
//! Flux-form 5-point discretization on a uniform node grid over `[0,1]²`
//! with face coefficients taken as arithmetic means of adjacent node values
//! of `a`. The arithmetic mean keeps assembly total when `a` changes sign
//! (a harmonic mean would divide by zero). Systems are solved by BiCGSTAB
//! with a banded direct fallback: the operator is not positive definite for
//! sign-changing `a`, so the Krylov iteration is allowed to fail over to LU.

use crate::datagen::{xy_to_arc, DatasetInstance, EquationVariant};
use crate::linalg::{bicgstab, norm2, spmv, BandedLu};
use crate::{invalid, Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Largest grid (nodes per side) for which the direct fallback is attempted.
pub const DIRECT_FALLBACK_MAX_N: usize = 192;

/// Default relative residual tolerance for [`solve`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default iteration cap for [`solve`].
pub const DEFAULT_MAX_ITER: usize = 20_000;

/// Node-sampled scalar field on the square grid, row-major with x varying
/// fastest; node `(i, j)` sits at `(i·h, j·h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl GridField {
    /// Square zero field with `n` nodes per side.
    pub fn zeros(n: usize) -> Self {
        Self {
            nx: n,
            ny: n,
            values: vec![0.0; n * n],
        }
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(invalid(format!(
                "grid of {n}x{n} nodes needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(Self {
            nx: n,
            ny: n,
            values,
        })
    }

    /// Node spacing.
    pub fn h(&self) -> f64 {
        1.0 / (self.nx - 1) as f64
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.nx + i] = v;
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.h()
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    /// Fills every node by evaluating `f(x, y)`.
    pub fn sample(n: usize, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut g = Self::zeros(n);
        let h = g.h();
        for j in 0..n {
            for i in 0..n {
                g.values[j * n + i] = f(i as f64 * h, j as f64 * h);
            }
        }
        g
    }
}

/// Assembled linear system over the interior nodes.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    /// Number of interior unknowns.
    pub dim: usize,
    /// `(row, col, coeff)` triples, at most 5 per row.
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
    /// Grid nodes per side the system was assembled for.
    pub n: usize,
    /// Dirichlet values on the full boundary ring, stored so solutions can
    /// be re-assembled into a full grid.
    pub boundary: GridField,
}

impl SparseSystem {
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        spmv(self.dim, &self.entries, x, out);
    }

    /// Residual 2-norm `‖rhs − A x‖₂`.
    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.dim];
        self.matvec(x, &mut ax);
        let r: Vec<f64> = self
            .rhs
            .iter()
            .zip(&ax)
            .map(|(b, a)| b - a)
            .collect();
        norm2(&r)
    }
}

/// Assembles the flux-form 5-point system at resolution `n` (nodes per
/// side) from pointwise evaluators for `a`, `f`, and boundary data `g`.
///
/// For interior node `(i, j)` the row encodes
/// `[a_{i+½,j}(p_E − p_C) − a_{i−½,j}(p_C − p_W) + a_{i,j+½}(p_N − p_C)
///   − a_{i,j−½}(p_C − p_S)] / h² = f_{i,j}`
/// with face coefficients `a_{i±½,j}` the arithmetic mean of the two
/// adjacent node values. Dirichlet values are folded into the right-hand
/// side.
pub fn assemble(
    coeff_at: impl Fn(f64, f64) -> f64,
    rhs_at: impl Fn(f64, f64) -> f64,
    bc_at: impl Fn(f64, f64) -> f64,
    n: usize,
) -> Result<SparseSystem> {
    if n < 3 {
        return Err(invalid(format!("grid needs at least 3 nodes per side, got {n}")));
    }
    let h = 1.0 / (n - 1) as f64;
    let h2 = h * h;
    let a = GridField::sample(n, &coeff_at);
    let mut boundary = GridField::zeros(n);
    for j in 0..n {
        for i in 0..n {
            if boundary.is_boundary(i, j) {
                let v = bc_at(i as f64 * h, j as f64 * h);
                boundary.set(i, j, v);
            }
        }
    }

    let m = n - 2;
    let dim = m * m;
    let idx = |i: usize, j: usize| (j - 1) * m + (i - 1);
    let mut entries = Vec::with_capacity(5 * dim);
    let mut rhs = vec![0.0; dim];
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let ac = a.get(i, j);
            let a_e = 0.5 * (ac + a.get(i + 1, j));
            let a_w = 0.5 * (ac + a.get(i - 1, j));
            let a_n = 0.5 * (ac + a.get(i, j + 1));
            let a_s = 0.5 * (ac + a.get(i, j - 1));
            let row = idx(i, j);
            entries.push((row, row, -(a_e + a_w + a_n + a_s) / h2));
            let mut b = rhs_at(i as f64 * h, j as f64 * h);
            for (ii, jj, af) in [
                (i + 1, j, a_e),
                (i - 1, j, a_w),
                (i, j + 1, a_n),
                (i, j - 1, a_s),
            ] {
                if ii >= 1 && ii <= n - 2 && jj >= 1 && jj <= n - 2 {
                    entries.push((row, idx(ii, jj), af / h2));
                } else {
                    b -= af / h2 * boundary.get(ii, jj);
                }
            }
            rhs[row] = b;
        }
    }
    Ok(SparseSystem {
        dim,
        entries,
        rhs,
        n,
        boundary,
    })
}

/// How a solve reached its answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Krylov,
    Direct,
}

impl SolveMethod {
    pub fn label(self) -> &'static str {
        match self {
            SolveMethod::Krylov => "bicgstab",
            SolveMethod::Direct => "banded-lu",
        }
    }
}

/// Interior solution plus convergence diagnostics.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub values: Vec<f64>,
    /// Achieved residual 2-norm.
    pub residual: f64,
    /// Krylov iterations spent (0 when the direct path answered).
    pub iterations: usize,
    pub method: SolveMethod,
}

/// Solves the assembled system to `‖rhs − A x‖₂ ≤ tol·max(1, ‖rhs‖₂)`.
///
/// BiCGSTAB runs first; if it fails to converge (common when `a` changes
/// sign and the operator is indefinite) and the grid is small enough, a
/// banded LU factorization takes over. A failure carries the best iterate
/// and its residual.
pub fn solve(system: &SparseSystem, tol: f64, max_iter: usize) -> Result<SolveOutcome> {
    if tol <= 0.0 {
        return Err(invalid("solver tolerance must be positive"));
    }
    let tol_abs = tol * norm2(&system.rhs).max(1.0);
    let krylov = bicgstab(system.dim, &system.entries, &system.rhs, tol_abs, max_iter);
    if krylov.converged {
        return Ok(SolveOutcome {
            values: krylov.x,
            residual: krylov.residual,
            iterations: krylov.iterations,
            method: SolveMethod::Krylov,
        });
    }
    if system.n <= DIRECT_FALLBACK_MAX_N {
        if let Ok(lu) = BandedLu::factor(system.dim, system.n - 2, &system.entries) {
            let x = lu.solve(&system.rhs);
            let residual = system.residual_norm(&x);
            if residual <= tol_abs && residual.is_finite() {
                return Ok(SolveOutcome {
                    values: x,
                    residual,
                    iterations: krylov.iterations,
                    method: SolveMethod::Direct,
                });
            }
            // direct solve beat the Krylov iterate but missed the target
            if residual < krylov.residual {
                return Err(Error::SolverFailure {
                    residual,
                    iterations: krylov.iterations,
                    best: x,
                });
            }
        }
    }
    Err(Error::SolverFailure {
        residual: krylov.residual,
        iterations: krylov.iterations,
        best: krylov.x,
    })
}

/// Embeds interior values into the full grid with its boundary ring.
pub fn full_grid(system: &SparseSystem, interior: &[f64]) -> GridField {
    let n = system.n;
    let mut grid = system.boundary.clone();
    let m = n - 2;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            grid.set(i, j, interior[(j - 1) * m + (i - 1)]);
        }
    }
    grid
}

/// Convergence diagnostics attached to a reference solution.
#[derive(Clone, Copy, Debug)]
pub struct SolveDiagnostics {
    pub residual: f64,
    pub iterations: usize,
    pub method: SolveMethod,
    pub tol: f64,
}

/// Computes the reference solution of an instance under a variant at the
/// instance's grid resolution with default tolerances.
pub fn reference_solution(
    instance: &DatasetInstance,
    variant: EquationVariant,
) -> Result<(GridField, SolveDiagnostics)> {
    reference_solution_with(
        instance,
        variant,
        instance.grid_resolution,
        DEFAULT_TOL,
        DEFAULT_MAX_ITER,
    )
}

/// [`reference_solution`] with explicit resolution and solver settings.
pub fn reference_solution_with(
    instance: &DatasetInstance,
    variant: EquationVariant,
    resolution: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(GridField, SolveDiagnostics)> {
    let system = assemble(
        |x, y| instance.coeff.value(x, y),
        |x, y| variant.rhs_value(instance, x, y),
        |x, y| variant.bc_value(instance, xy_to_arc(x, y)),
        resolution,
    )?;
    let outcome = solve(&system, tol, max_iter)?;
    let grid = full_grid(&system, &outcome.values);
    Ok((
        grid,
        SolveDiagnostics {
            residual: outcome.residual,
            iterations: outcome.iterations,
            method: outcome.method,
            tol,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;

    #[test]
    fn constant_coefficient_reduces_to_laplacian() {
        let n = 5;
        let sys = assemble(|_, _| 1.0, |_, _| 0.0, |_, _| 0.0, n).unwrap();
        let h2 = (1.0 / (n - 1) as f64).powi(2);
        // check the row of an interior node with interior neighbors only
        let m = n - 2;
        let center = (1) * m + (1); // node (2,2)
        let row: Vec<_> = sys.entries.iter().filter(|e| e.0 == center).collect();
        assert_eq!(row.len(), 5);
        for &&(_, col, v) in &row {
            if col == center {
                assert!((v + 4.0 / h2).abs() < 1e-9);
            } else {
                assert!((v - 1.0 / h2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn n3_single_unknown_row() {
        // one interior node at (0.5, 0.5); a ≡ 2, f ≡ 1, g ≡ 0:
        // row is -8a/h² = -64, so p = -1/64
        let sys = assemble(|_, _| 2.0, |_, _| 1.0, |_, _| 0.0, 3).unwrap();
        assert_eq!(sys.dim, 1);
        let out = solve(&sys, 1e-12, 100).unwrap();
        assert!((out.values[0] - (-1.0 / 64.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_data_zero_solution() {
        let sys = assemble(|_, _| 1.0, |_, _| 0.0, |_, _| 0.0, 17).unwrap();
        let out = solve(&sys, 1e-12, 10_000).unwrap();
        for v in &out.values {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_boundary_reproduced_exactly() {
        // g = xy is harmonic and bilinear: the 5-point stencil is exact
        let n = 17;
        let sys = assemble(|_, _| 1.0, |_, _| 0.0, |x, y| x * y, n).unwrap();
        let out = solve(&sys, 1e-13, 20_000).unwrap();
        let grid = full_grid(&sys, &out.values);
        for j in 0..n {
            for i in 0..n {
                let exact = grid.x(i) * grid.y(j);
                assert!(
                    (grid.get(i, j) - exact).abs() < 1e-10,
                    "node ({i},{j}): {} vs {exact}",
                    grid.get(i, j)
                );
            }
        }
    }

    #[test]
    fn manufactured_solution_second_order() {
        let pi = core::f64::consts::PI;
        let err_at = |n: usize| {
            let sys = assemble(
                |_, _| 1.0,
                |x, y| -2.0 * pi * pi * math::sin(pi * x) * math::sin(pi * y),
                |_, _| 0.0,
                n,
            )
            .unwrap();
            let out = solve(&sys, 1e-12, 40_000).unwrap();
            let grid = full_grid(&sys, &out.values);
            let mut emax = 0.0f64;
            for j in 0..n {
                for i in 0..n {
                    let exact = math::sin(pi * grid.x(i)) * math::sin(pi * grid.y(j));
                    emax = emax.max((grid.get(i, j) - exact).abs());
                }
            }
            emax
        };
        let e1 = err_at(17);
        let e2 = err_at(33);
        let ratio = e1 / e2;
        assert!(
            (3.4..=4.6).contains(&ratio),
            "convergence ratio {ratio} (errors {e1:.3e}, {e2:.3e})"
        );
    }

    #[test]
    fn symmetric_inputs_give_symmetric_solution() {
        // a, f, g all symmetric under x ↔ 1−x
        let n = 33;
        let sys = assemble(
            |x, y| 1.0 + (x - 0.5) * (x - 0.5) + 0.3 * y,
            |x, _| math::cos(2.0 * core::f64::consts::PI * (x - 0.5)),
            |x, y| (x - 0.5) * (x - 0.5) + y,
            n,
        )
        .unwrap();
        let out = solve(&sys, 1e-12, 40_000).unwrap();
        let grid = full_grid(&sys, &out.values);
        for j in 0..n {
            for i in 0..n {
                let mirrored = grid.get(n - 1 - i, j);
                assert!(
                    (grid.get(i, j) - mirrored).abs() < 1e-8,
                    "asymmetry at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn direct_fallback_on_indefinite_system() {
        // a crosses zero: BiCGSTAB may stall, banded LU must still answer
        let n = 33;
        let sys = assemble(
            |x, _| x - 0.41,
            |x, y| x + y,
            |_, _| 0.0,
            n,
        )
        .unwrap();
        let out = solve(&sys, 1e-10, 200).unwrap();
        let tol_abs = 1e-10 * norm2(&sys.rhs).max(1.0);
        assert!(out.residual <= tol_abs);
    }

    #[test]
    fn rejects_tiny_grid() {
        assert!(assemble(|_, _| 1.0, |_, _| 0.0, |_, _| 0.0, 2).is_err());
    }

    #[test]
    fn variant_selection_in_reference_solution() {
        use crate::datagen::{generate_instance, ValueRanges};
        let inst = generate_instance(
            0,
            ValueRanges {
                coeff: (0.5, 2.0),
                rhs: (-2.0, 2.0),
                bc: (-1.0, 1.0),
            },
            3,
            11,
        )
        .unwrap()
        .with_grid_resolution(17);

        let (zero_bc, _) =
            reference_solution(&inst, EquationVariant::PoissonZeroBc).unwrap();
        for i in 0..17 {
            assert_eq!(zero_bc.get(i, 0), 0.0);
            assert_eq!(zero_bc.get(i, 16), 0.0);
            assert_eq!(zero_bc.get(0, i), 0.0);
            assert_eq!(zero_bc.get(16, i), 0.0);
        }

        let (full, _) = reference_solution(&inst, EquationVariant::PoissonNonzeroBc).unwrap();
        // boundary node matches g
        let arc = crate::datagen::xy_to_arc(full.x(5), 0.0);
        assert!((full.get(5, 0) - inst.bc.value(arc)).abs() < 1e-8);
    }

    #[test]
    fn superposition_of_variants() {
        use crate::datagen::{generate_instance, ValueRanges};
        let inst = generate_instance(
            0,
            ValueRanges {
                coeff: (-1.0, 1.0),
                rhs: (-10.0, 10.0),
                bc: (-1.0, 1.0),
            },
            4,
            5,
        )
        .unwrap()
        .with_grid_resolution(33);
        let tol = 1e-12;
        let (laplace, _) =
            reference_solution_with(&inst, EquationVariant::Laplace, 33, tol, 20_000).unwrap();
        let (zero_bc, _) =
            reference_solution_with(&inst, EquationVariant::PoissonZeroBc, 33, tol, 20_000)
                .unwrap();
        let (full, _) =
            reference_solution_with(&inst, EquationVariant::PoissonNonzeroBc, 33, tol, 20_000)
                .unwrap();
        for k in 0..full.values.len() {
            let sum = laplace.values[k] + zero_bc.values[k];
            assert!(
                (sum - full.values[k]).abs() < 1e-8,
                "superposition defect {} at node {k}",
                (sum - full.values[k]).abs()
            );
        }
    }

    #[test]
    fn linearity_in_rhs() {
        let n = 17;
        let sys1 = assemble(|x, y| 1.0 + x + y, |x, y| x - y, |_, _| 0.0, n).unwrap();
        let sys2 = assemble(|x, y| 1.0 + x + y, |x, y| 2.0 * (x - y), |_, _| 0.0, n).unwrap();
        let tol = 1e-12;
        let s1 = solve(&sys1, tol, 20_000).unwrap();
        let s2 = solve(&sys2, tol, 20_000).unwrap();
        for (v1, v2) in s1.values.iter().zip(&s2.values) {
            assert!((2.0 * v1 - v2).abs() < 1e-9);
        }
    }

    #[test]
    fn discrete_maximum_principle_for_positive_coefficient() {
        let n = 25;
        let sys = assemble(
            |x, y| 0.5 + x * y, // strictly positive
            |_, _| 0.0,
            |x, y| x - y,
            n,
        )
        .unwrap();
        let out = solve(&sys, 1e-12, 20_000).unwrap();
        let grid = full_grid(&sys, &out.values);
        let mut bmin = f64::INFINITY;
        let mut bmax = f64::NEG_INFINITY;
        let mut imin = f64::INFINITY;
        let mut imax = f64::NEG_INFINITY;
        for j in 0..n {
            for i in 0..n {
                let v = grid.get(i, j);
                if grid.is_boundary(i, j) {
                    bmin = bmin.min(v);
                    bmax = bmax.max(v);
                } else {
                    imin = imin.min(v);
                    imax = imax.max(v);
                }
            }
        }
        assert!(imax <= bmax + 1e-10, "interior max {imax} > boundary max {bmax}");
        assert!(imin >= bmin - 1e-10, "interior min {imin} < boundary min {bmin}");
    }
}
