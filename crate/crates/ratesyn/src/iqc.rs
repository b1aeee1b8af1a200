//! Integral quadratic constraint (IQC) factorizations for the normalized
//! gradient nonlinearity, given as a stable filter `Psi` plus a constant
//! quadratic form `M`.
//!
//! The filter maps the pair (y, u) of plant output and nonlinearity
//! output to a two-dimensional signal z,
//!
//! ```text
//! zeta+ = A_psi zeta + B_psi1 y + B_psi2 u
//! z     = C_psi zeta + D_psi1 y + D_psi2 u
//! ```
//!
//! and the constraint states that the exponentially discounted sum of
//! `z^T M z` along any trajectory of the nonlinearity is nonnegative.
//! Three factorizations are provided: the static sector form, the
//! one-tap slope form, and its multi-tap FIR generalization.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg::{RectMatrix, SymMatrix};

#[derive(Debug, Error)]
pub enum IqcError {
    #[error("h1 = {h1} outside [0, rho^2] = [0, {max}]")]
    InvalidH1 { h1: f64, max: f64 },
    #[error("FIR coefficient normalization sum {sum} exceeds 1")]
    NormalizationViolated { sum: f64 },
}

/// State-space factorization of an IQC: filter matrices plus the
/// quadratic form `m` applied to the filter output. The filter has
/// `n_psi` states, scalar inputs y and u, and a two-dimensional output.
#[derive(Debug, Clone)]
pub struct IqcFactorization {
    pub a_psi: RectMatrix,
    pub b_psi1: RectMatrix,
    pub b_psi2: RectMatrix,
    pub c_psi: RectMatrix,
    pub d_psi1: RectMatrix,
    pub d_psi2: RectMatrix,
    pub m: SymMatrix,
}

impl IqcFactorization {
    pub fn n_psi(&self) -> usize {
        self.a_psi.nrows()
    }
}

/// FIR coefficients for the multi-tap factorization, tap `h[j-1]`
/// applying at delay `j`, together with the rate the discounted
/// normalization is taken at.
#[derive(Debug, Clone)]
pub struct ZamesFalbCoeffs {
    pub h: Vec<f64>,
    pub rho: f64,
}

/// Static sector factorization: no filter state, z = (y, u),
/// `M = diag(1, -1)`. Valid for any nonlinearity in the normalized
/// sector.
pub fn sector_iqc() -> IqcFactorization {
    IqcFactorization {
        a_psi: DMatrix::zeros(0, 0),
        b_psi1: DMatrix::zeros(0, 1),
        b_psi2: DMatrix::zeros(0, 1),
        c_psi: DMatrix::zeros(2, 0),
        d_psi1: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
        d_psi2: DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
        m: SymMatrix::from_fn(2, |i, j| {
            if i != j {
                0.0
            } else if i == 0 {
                1.0
            } else {
                -1.0
            }
        }),
    }
}

/// One-tap slope factorization: a single filter state holding the
/// previous value of (y - u)/2, weighted by `h1`. `h1` must lie in
/// `[0, rho^2]`; synthesis uses the extreme point `h1 = rho^2`.
pub fn off_by_one_iqc(rho: f64, h1: f64) -> Result<IqcFactorization, IqcError> {
    assert!(rho > 0.0 && rho <= 1.0, "rate must lie in (0, 1]");
    let max = rho * rho;
    if !(0.0..=max).contains(&h1) {
        return Err(IqcError::InvalidH1 { h1, max });
    }
    Ok(IqcFactorization {
        a_psi: DMatrix::zeros(1, 1),
        b_psi1: DMatrix::from_element(1, 1, 0.5),
        b_psi2: DMatrix::from_element(1, 1, -0.5),
        c_psi: DMatrix::from_column_slice(2, 1, &[-h1, h1]),
        d_psi1: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
        d_psi2: DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
        m: sector_iqc().m,
    })
}

/// Multi-tap FIR factorization. The filter is a shift register over
/// past values of (y - u)/2; tap `h[j-1]` weights the sample delayed by
/// `j` steps. Coefficients must satisfy the discounted normalization
/// `sum_j rho^{-2j} |h_j| <= 1`. One tap with `h = [h1]` reproduces
/// [`off_by_one_iqc`] exactly; zero taps reproduce [`sector_iqc`].
pub fn zames_falb_fir_iqc(coeffs: &ZamesFalbCoeffs) -> Result<IqcFactorization, IqcError> {
    let rho = coeffs.rho;
    assert!(rho > 0.0 && rho <= 1.0, "rate must lie in (0, 1]");
    let k = coeffs.h.len();
    let sum: f64 = coeffs
        .h
        .iter()
        .enumerate()
        .map(|(idx, &hj)| rho.powi(-2 * (idx as i32 + 1)) * hj.abs())
        .sum();
    if sum > 1.0 + 1e-12 {
        return Err(IqcError::NormalizationViolated { sum });
    }
    // state i (0-based) holds the sample at delay k - i, so the newest
    // sample enters at the last state and shifts toward index 0
    let mut a_psi = DMatrix::zeros(k, k);
    for i in 0..k.saturating_sub(1) {
        a_psi[(i, i + 1)] = 1.0;
    }
    let mut b_psi1 = DMatrix::zeros(k, 1);
    let mut b_psi2 = DMatrix::zeros(k, 1);
    if k > 0 {
        b_psi1[(k - 1, 0)] = 0.5;
        b_psi2[(k - 1, 0)] = -0.5;
    }
    let mut c_psi = DMatrix::zeros(2, k);
    for i in 0..k {
        let hj = coeffs.h[k - 1 - i];
        c_psi[(0, i)] = -hj;
        c_psi[(1, i)] = hj;
    }
    Ok(IqcFactorization {
        a_psi,
        b_psi1,
        b_psi2,
        c_psi,
        d_psi1: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
        d_psi2: DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
        m: sector_iqc().m,
    })
}

/// Runs the filter from zero initial state along a recorded (y, u)
/// trajectory and checks that every discounted partial sum of
/// `z^T M z` is nonnegative up to a relative tolerance. The recursion
/// `s_T = rho^2 s_{T-1} + z_T^T M z_T` keeps the discounting
/// overflow-free; the tolerance is taken relative to the same recursion
/// over absolute values.
pub fn check_iqc_on_trajectory(iqc: &IqcFactorization, ys: &[f64], us: &[f64], rho: f64) -> bool {
    assert_eq!(ys.len(), us.len(), "trajectories must have equal length");
    assert!(rho > 0.0 && rho <= 1.0, "rate must lie in (0, 1]");
    let n = iqc.n_psi();
    let mut zeta = nalgebra::DVector::<f64>::zeros(n);
    let mut s = 0.0f64;
    let mut magnitude = 0.0f64;
    for (&y, &u) in ys.iter().zip(us.iter()) {
        let z = &iqc.c_psi * &zeta + &iqc.d_psi1 * y + &iqc.d_psi2 * u;
        let quad = (z.transpose() * iqc.m.as_matrix() * &z)[(0, 0)];
        s = rho * rho * s + quad;
        magnitude = rho * rho * magnitude + quad.abs();
        if s < -1e-9 * magnitude.max(1e-300) {
            return false;
        }
        zeta = &iqc.a_psi * zeta + &iqc.b_psi1 * y + &iqc.b_psi2 * u;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_factorization_is_static() {
        let iqc = sector_iqc();
        assert_eq!(iqc.n_psi(), 0);
        assert_eq!(iqc.m[(0, 0)], 1.0);
        assert_eq!(iqc.m[(1, 1)], -1.0);
        assert_eq!(iqc.m[(0, 1)], 0.0);
        assert_eq!(iqc.d_psi1[(0, 0)], 1.0);
        assert_eq!(iqc.d_psi2[(1, 0)], 1.0);
    }

    #[test]
    fn off_by_one_rejects_out_of_range_weight() {
        assert!(matches!(
            off_by_one_iqc(0.9, -0.1),
            Err(IqcError::InvalidH1 { .. })
        ));
        assert!(matches!(
            off_by_one_iqc(0.9, 0.82),
            Err(IqcError::InvalidH1 { .. })
        ));
        assert!(off_by_one_iqc(0.9, 0.81).is_ok());
    }

    #[test]
    fn one_tap_fir_matches_off_by_one() {
        let rho = 0.8;
        let h1 = 0.5;
        let fir = zames_falb_fir_iqc(&ZamesFalbCoeffs { h: vec![h1], rho }).unwrap();
        let obo = off_by_one_iqc(rho, h1).unwrap();
        assert_eq!(fir.a_psi, obo.a_psi);
        assert_eq!(fir.b_psi1, obo.b_psi1);
        assert_eq!(fir.b_psi2, obo.b_psi2);
        assert_eq!(fir.c_psi, obo.c_psi);
        assert_eq!(fir.d_psi1, obo.d_psi1);
        assert_eq!(fir.d_psi2, obo.d_psi2);
    }

    #[test]
    fn zero_tap_fir_matches_sector() {
        let fir = zames_falb_fir_iqc(&ZamesFalbCoeffs {
            h: vec![],
            rho: 0.7,
        })
        .unwrap();
        let sec = sector_iqc();
        assert_eq!(fir.n_psi(), 0);
        assert_eq!(fir.c_psi, sec.c_psi);
        assert_eq!(fir.d_psi1, sec.d_psi1);
        assert_eq!(fir.d_psi2, sec.d_psi2);
    }

    #[test]
    fn fir_normalization_is_enforced() {
        // rho = 1: plain absolute sum must not exceed 1
        assert!(matches!(
            zames_falb_fir_iqc(&ZamesFalbCoeffs {
                h: vec![0.6, 0.5],
                rho: 1.0
            }),
            Err(IqcError::NormalizationViolated { .. })
        ));
        // discounting inflates the weight of later taps
        assert!(zames_falb_fir_iqc(&ZamesFalbCoeffs {
            h: vec![0.5],
            rho: 1.0
        })
        .is_ok());
        assert!(matches!(
            zames_falb_fir_iqc(&ZamesFalbCoeffs {
                h: vec![0.5],
                rho: 0.5
            }),
            Err(IqcError::NormalizationViolated { .. })
        ));
    }

    #[test]
    fn extreme_weight_sits_on_normalization_boundary() {
        let rho = 0.73;
        let iqc = zames_falb_fir_iqc(&ZamesFalbCoeffs {
            h: vec![rho * rho],
            rho,
        });
        assert!(iqc.is_ok());
    }

    #[test]
    fn shift_register_structure() {
        let fir = zames_falb_fir_iqc(&ZamesFalbCoeffs {
            h: vec![0.3, 0.1, 0.05],
            rho: 0.9,
        })
        .unwrap();
        assert_eq!(fir.n_psi(), 3);
        assert_eq!(fir.a_psi[(0, 1)], 1.0);
        assert_eq!(fir.a_psi[(1, 2)], 1.0);
        assert_eq!(fir.a_psi[(2, 2)], 0.0);
        assert_eq!(fir.b_psi1[(2, 0)], 0.5);
        assert_eq!(fir.b_psi2[(2, 0)], -0.5);
        // newest sample (delay 1) weighted by h[0] in the last column
        assert_eq!(fir.c_psi[(0, 2)], -0.3);
        assert_eq!(fir.c_psi[(1, 0)], 0.05);
    }

    #[test]
    fn sector_trajectory_check_accepts_contractive_gain() {
        let ys: Vec<f64> = (0..50).map(|t| (t as f64 * 0.3).sin()).collect();
        let us: Vec<f64> = ys.iter().map(|&y| 0.5 * y).collect();
        assert!(check_iqc_on_trajectory(&sector_iqc(), &ys, &us, 0.9));
    }

    #[test]
    fn sector_trajectory_check_rejects_expansive_gain() {
        let ys: Vec<f64> = (0..50).map(|t| (t as f64 * 0.3).sin()).collect();
        let us: Vec<f64> = ys.iter().map(|&y| 2.0 * y).collect();
        assert!(!check_iqc_on_trajectory(&sector_iqc(), &ys, &us, 0.9));
    }

    #[test]
    fn off_by_one_trajectory_check_accepts_unit_slope_boundary() {
        let rho = 0.8;
        let iqc = off_by_one_iqc(rho, rho * rho).unwrap();
        let ys: Vec<f64> = (0..60).map(|t| (t as f64 * 0.2).cos()).collect();
        let us = ys.clone();
        assert!(check_iqc_on_trajectory(&iqc, &ys, &us, rho));
    }

    #[test]
    fn empty_trajectory_is_trivially_accepted() {
        assert!(check_iqc_on_trajectory(&sector_iqc(), &[], &[], 0.9));
    }
}
