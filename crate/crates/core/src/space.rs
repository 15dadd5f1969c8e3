//! Finite-dimensional ℓ_q primal / ℓ_r dual norm pairs.
//!
//! Iterates live in the primal space `(ℝⁿ, ‖·‖_q)` with `q ∈ (1, 2]`; gradients,
//! momentum and clipped samples live in its dual `(ℝⁿ, ‖·‖_r)` with
//! `1/q + 1/r = 1`, so `r ∈ [2, ∞)`. The dual norm satisfies the smoothness
//! inequality
//!
//! ```text
//! ‖x + y‖_r² ≤ ‖x‖_r² + ⟨∇‖x‖_r², y⟩ + C‖y‖_r²,   C = r − 1 = 1/(q − 1)
//! ```
//!
//! which is what the concentration and descent arguments rely on. The
//! Euclidean case is `q = r = 2`, `C = 1`.

use crate::error::{invalid, Error, Result};

/// `(Σ|x_i|^p)^{1/p}` evaluated with max-factoring so heavy-tailed entries do
/// not overflow the intermediate powers.
pub fn lp_norm(xs: &[f64], p: f64) -> f64 {
    let max = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 || !max.is_finite() {
        return max;
    }
    if p == 2.0 {
        let sum: f64 = xs.iter().map(|x| (x / max) * (x / max)).sum();
        max * sum.sqrt()
    } else {
        let sum: f64 = xs.iter().map(|x| (x.abs() / max).powf(p)).sum();
        max * sum.powf(1.0 / p)
    }
}

/// A primal/dual ℓ_q/ℓ_r pair on `ℝ^dim` together with its smooth-norm
/// constants `(p, C) = (2, r − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormedSpace {
    dim: usize,
    primal_exponent: f64,
    dual_exponent: f64,
    smooth_c: f64,
}

impl NormedSpace {
    /// Exponent `p` of the smoothness inequality; fixed at 2 for every
    /// supported space.
    pub const SMOOTH_P: f64 = 2.0;

    /// Builds the space with primal norm ‖·‖_q, `q ∈ (1, 2]`.
    pub fn new(dim: usize, primal_exponent: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        let q = primal_exponent;
        if !(q.is_finite() && q > 1.0 && q <= 2.0) {
            return Err(invalid(
                "q",
                format!("primal exponent must lie in (1, 2], got {q}"),
            ));
        }
        let (dual_exponent, smooth_c) = if q == 2.0 {
            (2.0, 1.0)
        } else {
            (q / (q - 1.0), 1.0 / (q - 1.0))
        };
        Ok(Self {
            dim,
            primal_exponent: q,
            dual_exponent,
            smooth_c,
        })
    }

    /// Builds the space from the dual exponent `r ∈ [2, ∞)`.
    pub fn from_dual_exponent(dim: usize, dual_exponent: f64) -> Result<Self> {
        let r = dual_exponent;
        if !(r.is_finite() && r >= 2.0) {
            return Err(invalid(
                "r",
                format!("dual exponent must lie in [2, ∞), got {r}"),
            ));
        }
        let q = if r == 2.0 { 2.0 } else { r / (r - 1.0) };
        let mut space = Self::new(dim, q)?;
        // keep r exactly as given; q was derived from it
        space.dual_exponent = r;
        space.smooth_c = if r == 2.0 { 1.0 } else { r - 1.0 };
        Ok(space)
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(dim, 2.0).expect("dim must be positive")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn primal_exponent(&self) -> f64 {
        self.primal_exponent
    }

    pub fn dual_exponent(&self) -> f64 {
        self.dual_exponent
    }

    pub fn smooth_p(&self) -> f64 {
        Self::SMOOTH_P
    }

    pub fn smooth_c(&self) -> f64 {
        self.smooth_c
    }

    pub fn is_euclidean(&self) -> bool {
        self.dual_exponent == 2.0
    }

    pub fn primal(&self, components: Vec<f64>) -> Result<PrimalVector> {
        check_components(self.dim, &components)?;
        Ok(PrimalVector {
            space: *self,
            data: components,
        })
    }

    pub fn dual(&self, components: Vec<f64>) -> Result<DualVector> {
        check_components(self.dim, &components)?;
        Ok(DualVector {
            space: *self,
            data: components,
        })
    }

    pub fn zero_primal(&self) -> PrimalVector {
        PrimalVector {
            space: *self,
            data: vec![0.0; self.dim],
        }
    }

    pub fn zero_dual(&self) -> DualVector {
        DualVector {
            space: *self,
            data: vec![0.0; self.dim],
        }
    }

    /// Residual `RHS − LHS` of the dual smoothness inequality at `(x, y)`.
    /// Non-negative (up to rounding) for every supported space.
    pub fn verify_smooth_norm(&self, x: &DualVector, y: &DualVector) -> Result<f64> {
        self.owns_dual(x)?;
        self.owns_dual(y)?;
        let sum = x.add(y)?;
        let lhs = sq(sum.norm());
        let rhs = sq(x.norm()) + x.norm_sq_gradient().pair_with(y)? + self.smooth_c * sq(y.norm());
        Ok(rhs - lhs)
    }

    fn owns_dual(&self, v: &DualVector) -> Result<()> {
        if v.space != *self {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

fn check_components(dim: usize, components: &[f64]) -> Result<()> {
    if components.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: components.len(),
        });
    }
    check_finite(components)
}

fn check_finite(components: &[f64]) -> Result<()> {
    match components.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

macro_rules! vector_common {
    ($ty:ident) => {
        impl $ty {
            pub fn space(&self) -> &NormedSpace {
                &self.space
            }

            pub fn dim(&self) -> usize {
                self.data.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.data
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.data
            }

            pub fn is_zero(&self) -> bool {
                self.data.iter().all(|&x| x == 0.0)
            }

            fn same_space(&self, other: &$ty) -> Result<()> {
                if self.space != other.space {
                    return Err(Error::SpaceMismatch);
                }
                Ok(())
            }

            /// `a·self + b·other`, rejecting non-finite results.
            pub fn lincomb(&self, a: f64, b: f64, other: &$ty) -> Result<$ty> {
                self.same_space(other)?;
                let data: Vec<f64> = self
                    .data
                    .iter()
                    .zip(&other.data)
                    .map(|(x, y)| a * x + b * y)
                    .collect();
                check_finite(&data)?;
                Ok($ty {
                    space: self.space,
                    data,
                })
            }

            pub fn add(&self, other: &$ty) -> Result<$ty> {
                self.lincomb(1.0, 1.0, other)
            }

            pub fn sub(&self, other: &$ty) -> Result<$ty> {
                self.lincomb(1.0, -1.0, other)
            }

            pub fn scaled(&self, factor: f64) -> Result<$ty> {
                let data: Vec<f64> = self.data.iter().map(|x| factor * x).collect();
                check_finite(&data)?;
                Ok($ty {
                    space: self.space,
                    data,
                })
            }
        }
    };
}

/// An element `w` of the primal space.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalVector {
    space: NormedSpace,
    data: Vec<f64>,
}

/// An element of the dual space: a gradient, momentum or noise vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    space: NormedSpace,
    data: Vec<f64>,
}

vector_common!(PrimalVector);
vector_common!(DualVector);

impl PrimalVector {
    /// ‖w‖_q.
    pub fn norm(&self) -> f64 {
        lp_norm(&self.data, self.space.primal_exponent)
    }

    /// `⟨v, self⟩`, the application of a dual vector to this vector.
    pub fn pair_with(&self, v: &DualVector) -> Result<f64> {
        v.pair(self)
    }
}

impl DualVector {
    /// ‖v‖_⋆ = ‖v‖_r.
    pub fn norm(&self) -> f64 {
        lp_norm(&self.data, self.space.dual_exponent)
    }

    /// `⟨self, w⟩`.
    pub fn pair(&self, w: &PrimalVector) -> Result<f64> {
        if self.space != w.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.data.iter().zip(&w.data).map(|(v, x)| v * x).sum())
    }

    /// Unit primal vector `d(v)` with `⟨v, d(v)⟩ = ‖v‖_⋆`:
    /// `d(v)_i = sign(v_i)|v_i|^{r−1} / ‖v‖_r^{r−1}`. Maps `0` to `0`.
    pub fn duality_map(&self) -> PrimalVector {
        let r = self.space.dual_exponent;
        let max = self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if max == 0.0 {
            return self.space.zero_primal();
        }
        let scaled: Vec<f64> = self.data.iter().map(|x| x / max).collect();
        let norm = lp_norm(&scaled, r);
        let data = if r == 2.0 {
            scaled.iter().map(|u| u / norm).collect()
        } else {
            let denom = norm.powf(r - 1.0);
            scaled
                .iter()
                .map(|u| u.signum() * u.abs().powf(r - 1.0) / denom)
                .collect()
        };
        PrimalVector {
            space: self.space,
            data,
        }
    }

    /// Gradient of `x ↦ ‖x‖_r²`, namely `2‖x‖_r^{2−r} sign(x_i)|x_i|^{r−1}`,
    /// computed as `2‖x‖·d(x)`. Zero at the origin.
    pub fn norm_sq_gradient(&self) -> PrimalVector {
        let norm = self.norm();
        let mut d = self.duality_map();
        for x in &mut d.data {
            *x *= 2.0 * norm;
        }
        d
    }

    /// Rescales to dual norm `min(τ, ‖v‖_⋆)` keeping the direction.
    pub fn clip(&self, tau: f64) -> Result<DualVector> {
        self.clip_with_flag(tau).map(|(v, _)| v)
    }

    /// Like [`DualVector::clip`], also reporting whether rescaling happened.
    pub fn clip_with_flag(&self, tau: f64) -> Result<(DualVector, bool)> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid("tau", format!("clip threshold must be positive, got {tau}")));
        }
        let norm = self.norm();
        // a vector already clipped to τ may measure τ(1 + few ulp); leave it alone
        if norm <= tau * (1.0 + 8.0 * f64::EPSILON) {
            return Ok((self.clone(), false));
        }
        let factor = tau / norm;
        let data = self.data.iter().map(|x| x * factor).collect();
        Ok((
            DualVector {
                space: self.space,
                data,
            },
            true,
        ))
    }
}

/// Clips `v` to dual-norm ball of radius `tau`.
pub fn clip_dual(v: &DualVector, tau: f64) -> Result<DualVector> {
    v.clip(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn norms_small_cases() {
        let e = NormedSpace::euclidean(2);
        assert_eq!(e.primal(vec![3.0, 4.0]).unwrap().norm(), 5.0);
        assert_eq!(e.dual(vec![3.0, 4.0]).unwrap().norm(), 5.0);
        assert_eq!(e.zero_dual().norm(), 0.0);
        let s = NormedSpace::new(3, 1.5).unwrap();
        assert_eq!(s.zero_primal().norm(), 0.0);
        assert_relative_eq!(lp_norm(&[1.0, 1.0], 4.0), 2f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(lp_norm(&[1.0, 1.0], 4.0), 1.189207115002721, max_relative = 1e-12);
    }

    #[test]
    fn lp_norm_fractional_exponent() {
        // (1 + 8^{1.5})^{2/3}
        let expected = (1.0 + 8f64.powf(1.5)).powf(2.0 / 3.0);
        assert_relative_eq!(lp_norm(&[1.0, 8.0], 1.5), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 8.23400, max_relative = 1e-5);
    }

    #[test]
    fn lp_norm_survives_huge_entries() {
        let n = lp_norm(&[1e300, 1e300], 3.0);
        assert!(n.is_finite());
        assert_relative_eq!(n, 1e300 * 2f64.powf(1.0 / 3.0), max_relative = 1e-14);
    }

    #[test]
    fn space_constants() {
        let e = NormedSpace::euclidean(4);
        assert_eq!((e.dual_exponent(), e.smooth_c(), e.smooth_p()), (2.0, 1.0, 2.0));
        let s = NormedSpace::new(4, 1.5).unwrap();
        assert_eq!(s.dual_exponent(), 3.0);
        assert_eq!(s.smooth_c(), 2.0);
        let t = NormedSpace::from_dual_exponent(4, 3.0).unwrap();
        assert_eq!(t, s);
        for q in [1.1, 1.2, 1.5, 1.9, 2.0] {
            let s = NormedSpace::new(2, q).unwrap();
            assert_relative_eq!(1.0 / s.primal_exponent() + 1.0 / s.dual_exponent(), 1.0, max_relative = 1e-15);
            assert!(s.smooth_c() >= 1.0);
        }
    }

    #[test]
    fn rejects_bad_spaces() {
        assert!(NormedSpace::new(0, 2.0).is_err());
        assert!(NormedSpace::new(2, 1.0).is_err());
        assert!(NormedSpace::new(2, 2.5).is_err());
        assert!(NormedSpace::new(2, f64::NAN).is_err());
        assert!(NormedSpace::from_dual_exponent(2, f64::INFINITY).is_err());
        assert!(NormedSpace::from_dual_exponent(2, 1.5).is_err());
    }

    #[test]
    fn rejects_bad_components() {
        let e = NormedSpace::euclidean(2);
        assert_eq!(
            e.dual(vec![1.0]).unwrap_err(),
            Error::DimensionMismatch { expected: 2, actual: 1 }
        );
        assert_eq!(e.primal(vec![1.0, f64::NAN]).unwrap_err(), Error::NonFinite { index: 1 });
    }

    #[test]
    fn mismatched_spaces_cannot_pair() {
        let a = NormedSpace::euclidean(2);
        let b = NormedSpace::new(2, 1.5).unwrap();
        let v = a.dual(vec![1.0, 2.0]).unwrap();
        let w = b.primal(vec![1.0, 2.0]).unwrap();
        assert_eq!(v.pair(&w).unwrap_err(), Error::SpaceMismatch);
        let u = b.dual(vec![1.0, 2.0]).unwrap();
        assert_eq!(v.add(&u).unwrap_err(), Error::SpaceMismatch);
        assert_eq!(a.verify_smooth_norm(&v, &u).unwrap_err(), Error::SpaceMismatch);
    }

    #[test]
    fn duality_map_euclidean_and_zero() {
        let e = NormedSpace::euclidean(2);
        let d = e.dual(vec![0.0, 5.0]).unwrap().duality_map();
        assert_eq!(d.as_slice(), &[0.0, 1.0]);
        assert!(e.zero_dual().duality_map().is_zero());
    }

    #[test]
    fn duality_map_identities_r3() {
        let s = NormedSpace::new(2, 1.5).unwrap();
        let v = s.dual(vec![1.0, 8.0]).unwrap();
        let d = v.duality_map();
        // independent evaluation of both contract identities
        let r = 3.0;
        let vnorm = (1.0f64 + 8f64.powf(r)).powf(1.0 / r);
        let expected: Vec<f64> = [1.0f64, 8.0].iter().map(|x| x.powf(r - 1.0) / vnorm.powf(r - 1.0)).collect();
        for (a, b) in d.as_slice().iter().zip(&expected) {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
        let dq = (d.as_slice()[0].abs().powf(1.5) + d.as_slice()[1].abs().powf(1.5)).powf(1.0 / 1.5);
        assert_relative_eq!(dq, 1.0, max_relative = 1e-12);
        let pairing = d.as_slice()[0] * 1.0 + d.as_slice()[1] * 8.0;
        assert_relative_eq!(pairing, vnorm, max_relative = 1e-12);
    }

    #[test]
    fn norm_sq_gradient_matches_closed_form() {
        let s = NormedSpace::new(3, 1.5).unwrap();
        let x = s.dual(vec![0.3, -1.2, 2.0]).unwrap();
        let r = s.dual_exponent();
        let n = x.norm();
        let g = x.norm_sq_gradient();
        for (gi, xi) in g.as_slice().iter().zip(x.as_slice()) {
            let closed = 2.0 * n.powf(2.0 - r) * xi.signum() * xi.abs().powf(r - 1.0);
            assert_relative_eq!(*gi, closed, max_relative = 1e-13);
        }
        assert!(s.zero_dual().norm_sq_gradient().is_zero());
    }

    #[test]
    fn clip_cases() {
        let e = NormedSpace::euclidean(2);
        let v = e.dual(vec![3.0, 4.0]).unwrap();
        let c = clip_dual(&v, 2.0).unwrap();
        assert_relative_eq!(c.as_slice()[0], 1.2, max_relative = 1e-15);
        assert_relative_eq!(c.as_slice()[1], 1.6, max_relative = 1e-15);
        assert_eq!(clip_dual(&v, 5.0).unwrap(), v);
        assert_eq!(clip_dual(&v, 10.0).unwrap(), v);
        assert!(clip_dual(&e.zero_dual(), 1.0).unwrap().is_zero());
        assert!(clip_dual(&v, 0.0).is_err());
        assert!(clip_dual(&v, -1.0).is_err());

        let s = NormedSpace::new(2, 1.5).unwrap();
        let v = s.dual(vec![1.0, 8.0]).unwrap();
        let n = lp_norm(&[1.0, 8.0], 3.0);
        let c = clip_dual(&v, 4.0).unwrap();
        assert_relative_eq!(c.as_slice()[1], 8.0 * 4.0 / n, max_relative = 1e-15);
        assert_relative_eq!(c.norm(), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn smooth_norm_residual_cases() {
        let e = NormedSpace::euclidean(3);
        let x = e.dual(vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(e.verify_smooth_norm(&x, &e.zero_dual()).unwrap(), 0.0);
        let y = e.dual(vec![0.7, 0.1, -3.0]).unwrap();
        assert!(e.verify_smooth_norm(&x, &y).unwrap().abs() < 1e-12);
    }
}
