//! Diagonal-norm summation-by-parts first-derivative operators.
//!
//! An operator is the pair `(P, Q)` with `P` diagonal positive definite and
//! `Q + Qᵀ = B = diag(-1, 0, …, 0, 1)`, giving the derivative `D = P⁻¹Q`.
//! Interior rows carry the central stencil of order 2, 4 or 6; the boundary
//! closures are the classical minimal-width ones (accuracy `order / 2`).
//!
//! `Q` and `D` are stored densely; application skips the known zero band.

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Boundary of a one-dimensional grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Node 0.
    First,
    /// Node `n - 1`.
    Last,
}

impl Side {
    #[inline]
    pub fn index(self, n: usize) -> usize {
        match self {
            Side::First => 0,
            Side::Last => n - 1,
        }
    }
}

type Frac = (i64, i64);

/// Coefficient tables for one interior order, in units of `h = 1`.
struct Closure {
    /// Boundary norm weights `P_0 .. P_{r-1}`.
    norm: &'static [Frac],
    /// Rows `0 .. r-1` of `Q`, including the coupling into interior columns.
    rows: &'static [&'static [Frac]],
    /// Central stencil weights `c_1 .. c_m` (`Q[i][i±k] = ±c_k`).
    stencil: &'static [Frac],
}

const SECOND: Closure = Closure {
    norm: &[(1, 2)],
    rows: &[&[(-1, 2), (1, 2)]],
    stencil: &[(1, 2)],
};

#[rustfmt::skip]
const FOURTH: Closure = Closure {
    norm: &[(17, 48), (59, 48), (43, 48), (49, 48)],
    rows: &[
        &[(-1, 2), (59, 96), (-1, 12), (-1, 32), (0, 1), (0, 1)],
        &[(-59, 96), (0, 1), (59, 96), (0, 1), (0, 1), (0, 1)],
        &[(1, 12), (-59, 96), (0, 1), (59, 96), (-1, 12), (0, 1)],
        &[(1, 32), (0, 1), (-59, 96), (0, 1), (2, 3), (-1, 12)],
    ],
    stencil: &[(2, 3), (-1, 12)],
};

// Upper triangle of the skew 6x6 block, free parameter q45 = 342523/518400.
const Q6_01: Frac = (104009, 172800);
const Q6_02: Frac = (30443, 259200);
const Q6_03: Frac = (-33311, 86400);
const Q6_04: Frac = (5621, 28800);
const Q6_05: Frac = (-601, 20736);
const Q6_12: Frac = (-311, 51840);
const Q6_13: Frac = (6743, 5760);
const Q6_14: Frac = (-24337, 34560);
const Q6_15: Frac = (36661, 259200);
const Q6_23: Frac = (-2231, 5184);
const Q6_24: Frac = (41287, 51840);
const Q6_25: Frac = (-7333, 28800);
const Q6_34: Frac = (4147, 17280);
const Q6_35: Frac = (25427, 259200);
const Q6_45: Frac = (342523, 518400);

const fn neg(f: Frac) -> Frac {
    (-f.0, f.1)
}

const Z: Frac = (0, 1);

#[rustfmt::skip]
const SIXTH: Closure = Closure {
    norm: &[(13649, 43200), (12013, 8640), (2711, 4320), (5359, 4320), (7877, 8640), (43801, 43200)],
    rows: &[
        &[(-1, 2), Q6_01, Q6_02, Q6_03, Q6_04, Q6_05, Z, Z, Z],
        &[neg(Q6_01), Z, Q6_12, Q6_13, Q6_14, Q6_15, Z, Z, Z],
        &[neg(Q6_02), neg(Q6_12), Z, Q6_23, Q6_24, Q6_25, Z, Z, Z],
        &[neg(Q6_03), neg(Q6_13), neg(Q6_23), Z, Q6_34, Q6_35, (1, 60), Z, Z],
        &[neg(Q6_04), neg(Q6_14), neg(Q6_24), neg(Q6_34), Z, Q6_45, (-3, 20), (1, 60), Z],
        &[neg(Q6_05), neg(Q6_15), neg(Q6_25), neg(Q6_35), neg(Q6_45), Z, (3, 4), (-3, 20), (1, 60)],
    ],
    stencil: &[(3, 4), (-3, 20), (1, 60)],
};

fn closure(order: usize) -> Result<&'static Closure> {
    match order {
        2 => Ok(&SECOND),
        4 => Ok(&FOURTH),
        6 => Ok(&SIXTH),
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// Smallest admissible grid for an interior order (two closure blocks).
pub fn min_points(order: usize) -> Result<usize> {
    let c = closure(order)?;
    Ok((2 * c.rows.len()).max(4))
}

/// A diagonal-norm SBP first-derivative operator on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SbpOperator<T> {
    order: usize,
    n: usize,
    spacing: T,
    p: Vec<T>,
    q: Vec<T>,
    d: Vec<T>,
    /// Half-open column range holding the nonzeros of each row.
    bands: Vec<(usize, usize)>,
}

impl<T: Scalar> SbpOperator<T> {
    /// Builds the operator of the given interior order on `n_points` nodes
    /// spaced `spacing` apart.
    pub fn build(interior_order: usize, n_points: usize, spacing: T) -> Result<Self> {
        let c = closure(interior_order)?;
        let min = min_points(interior_order)?;
        if n_points < min {
            return Err(Error::TooFewPoints {
                order: interior_order,
                min,
                got: n_points,
            });
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::invalid("spacing", "must be positive and finite"));
        }

        let n = n_points;
        let r = c.rows.len();
        let frac = |f: Frac| T::ratio(f.0, f.1);

        let mut p = vec![spacing; n];
        for (i, &w) in c.norm.iter().enumerate() {
            p[i] = frac(w) * spacing;
            p[n - 1 - i] = frac(w) * spacing;
        }

        let mut q = vec![T::zero(); n * n];
        for i in r..n - r {
            for (k, &w) in c.stencil.iter().enumerate() {
                let off = k + 1;
                q[i * n + i + off] = frac(w);
                q[i * n + i - off] = -frac(w);
            }
        }
        for (i, row) in c.rows.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                let v = frac(w);
                q[i * n + j] = v;
                q[(n - 1 - i) * n + (n - 1 - j)] = -v;
            }
        }

        let mut op = SbpOperator {
            order: interior_order,
            n,
            spacing,
            p,
            q,
            d: vec![T::zero(); n * n],
            bands: vec![(0, 0); n],
        };
        op.refresh_derivative();
        Ok(op)
    }

    /// Operator on the reference interval `[0, 1]` (`spacing = 1/(n-1)`).
    pub fn unit_interval(interior_order: usize, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::TooFewPoints {
                order: interior_order,
                min: min_points(interior_order)?,
                got: n_points,
            });
        }
        Self::build(
            interior_order,
            n_points,
            T::one() / T::from_usize_lossy(n_points - 1),
        )
    }

    fn refresh_derivative(&mut self) {
        let n = self.n;
        for i in 0..n {
            let mut lo = n;
            let mut hi = 0;
            for j in 0..n {
                let v = self.q[i * n + j];
                self.d[i * n + j] = v / self.p[i];
                if v != T::zero() {
                    lo = lo.min(j);
                    hi = hi.max(j + 1);
                }
            }
            self.bands[i] = if lo < hi { (lo, hi) } else { (0, 0) };
        }
    }

    pub fn interior_order(&self) -> usize {
        self.order
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Diagonal of the norm matrix `P` (quadrature weights).
    pub fn norm(&self) -> &[T] {
        &self.p
    }

    pub fn q(&self, i: usize, j: usize) -> T {
        self.q[i * self.n + j]
    }

    pub fn d(&self, i: usize, j: usize) -> T {
        self.d[i * self.n + j]
    }

    /// Row `i` of `D`.
    pub fn d_row(&self, i: usize) -> &[T] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    /// Number of boundary rows that use closure coefficients.
    pub fn closure_rows(&self) -> usize {
        closure(self.order).map(|c| c.rows.len()).unwrap_or(0)
    }

    /// Node coordinates `i * spacing`.
    pub fn grid(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| T::from_usize_lossy(i) * self.spacing)
            .collect()
    }

    /// `D · field`.
    pub fn apply_derivative(&self, field: &[T]) -> Result<Vec<T>> {
        check_len("apply_derivative", self.n, field.len())?;
        let mut out = vec![T::zero(); self.n];
        self.derivative_into(field, &mut out);
        Ok(out)
    }

    /// `D · field` written into `out`; lengths must already match.
    pub(crate) fn derivative_into(&self, field: &[T], out: &mut [T]) {
        debug_assert_eq!(field.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            let (lo, hi) = self.bands[i];
            let row = &self.d[i * self.n + lo..i * self.n + hi];
            *o = row
                .iter()
                .zip(&field[lo..hi])
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        }
    }

    /// `(D · field)` at a single node.
    pub fn derivative_at(&self, field: &[T], node: usize) -> Result<T> {
        check_len("derivative_at", self.n, field.len())?;
        let (lo, hi) = self.bands[node];
        Ok(self.d_row(node)[lo..hi]
            .iter()
            .zip(&field[lo..hi])
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b))
    }

    /// `Dᵀ e_side`, i.e. the boundary row of `D` laid out as a column.
    pub fn transpose_boundary_column(&self, side: Side) -> Vec<T> {
        self.d_row(side.index(self.n)).to_vec()
    }

    /// Weighted discrete inner product `Σ u_i P_i w_i v_i`.
    pub fn quadrature(&self, u: &[T], v: &[T], weight: &[T]) -> Result<T> {
        check_len("quadrature (u)", self.n, u.len())?;
        check_len("quadrature (v)", self.n, v.len())?;
        check_len("quadrature (weight)", self.n, weight.len())?;
        if let Some(i) = weight.iter().position(|w| !(*w > T::zero())) {
            return Err(Error::invalid(
                format!("weight[{i}]"),
                "quadrature weights (Jacobians) must be positive",
            ));
        }
        Ok(u.iter()
            .zip(v)
            .zip(weight)
            .zip(&self.p)
            .map(|(((&a, &b), &w), &p)| a * p * w * b)
            .sum())
    }

    /// `uᵀ P v` with unit weight.
    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        debug_assert_eq!(u.len(), self.n);
        u.iter()
            .zip(v)
            .zip(&self.p)
            .map(|((&a, &b), &p)| a * p * b)
            .sum()
    }

    /// `max |Q + Qᵀ − B|`.
    pub fn sbp_property_residual(&self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut b = T::zero();
                if i == j && i == 0 {
                    b = -T::one();
                } else if i == j && i == n - 1 {
                    b = T::one();
                }
                let r = (self.q(i, j) + self.q(j, i) - b).abs();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Infinity norm `max_i Σ_j |D_ij|`, used for explicit step-size bounds.
    pub fn derivative_inf_norm(&self) -> T {
        (0..self.n)
            .map(|i| self.d_row(i).iter().fold(T::zero(), |s, v| s + v.abs()))
            .fold(T::zero(), T::max)
    }

    /// Copy with `Q[i][j]` shifted by `delta` (and `D` row `i` rebuilt).
    /// Used by mutation checks of the verification suite.
    pub fn perturbed(&self, i: usize, j: usize, delta: T) -> Self {
        let mut out = self.clone();
        out.q[i * self.n + j] += delta;
        out.refresh_derivative();
        out
    }
}
