//! Worst-case rate certification for a fixed algorithm: the dissipation
//! LMI over the combined plant/filter realization, and a bisection that
//! finds the smallest certifiable contraction factor.
//!
//! With `x = (plant state, filter state)` the combined system driven by
//! the nonlinearity output u is
//!
//! ```text
//! A = [ A_G        0    ]   B = [ B_G              ]
//!     [ B_psi1 C_G A_psi]       [ B_psi2 + B_psi1 D_G ]
//! C = [ D_psi1 C_G  C_psi ]  D = D_psi2 + D_psi1 D_G
//! ```
//!
//! and a rate `rho` is certified by any `P > 0` with
//! `[A B]^T P [A B] - rho^2 [I 0]^T P [I 0] + [C D]^T M [C D] <= 0`.

use thiserror::Error;

use crate::algo::{build_plant, AlgorithmSS, PlantSS};
use crate::iqc::{off_by_one_iqc, sector_iqc, IqcFactorization};
use crate::linalg::{SymMatrix, Tolerances};
use crate::lmi::{self, sym_basis, sym_labels, unpack_sym, AffineLmi, LmiError, LmiSystem, Sense};

#[derive(Debug, Error)]
pub enum AnalysisError {
    /// The LMI is infeasible even at rho = 1: the algorithm is not
    /// certifiably convergent against this class.
    #[error("no certificate exists at any rate up to 1")]
    NoCertificate,
    #[error(transparent)]
    Lmi(#[from] LmiError),
}

/// Which IQC the gradient class is described by. The one-tap slope form
/// couples its weight to the rate (`h1 = rho^2`), so the factorization
/// is rebuilt at every bisection point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IqcFamily {
    Sector,
    OffByOne,
}

impl IqcFamily {
    pub fn build(&self, rho: f64) -> IqcFactorization {
        match self {
            IqcFamily::Sector => sector_iqc(),
            IqcFamily::OffByOne => {
                off_by_one_iqc(rho, rho * rho).expect("h1 = rho^2 is always admissible")
            }
        }
    }
}

/// A certified worst-case rate: `rho` together with the Lyapunov
/// witness `p`, the IQC it was certified against, the algorithm, and
/// the margin the feasibility solver achieved.
#[derive(Debug, Clone)]
pub struct RateCertificate {
    pub rho: f64,
    pub p: SymMatrix,
    pub iqc: IqcFactorization,
    pub algorithm: AlgorithmSS,
    pub lmi_margin: f64,
}

/// Builds the dissipation LMI in the entries of `P` (lower triangle,
/// row-major): the rate constraint negated to PSD sense, plus `P` PD.
pub fn assemble_analysis_lmi(
    plant: &PlantSS,
    iqc: &IqcFactorization,
    rho: f64,
) -> Result<LmiSystem, AnalysisError> {
    let n_g = plant.a_g.nrows();
    let n_psi = iqc.n_psi();
    if plant.c_g.nrows() != 1 || plant.c_g.ncols() != n_g {
        return Err(AnalysisError::Lmi(LmiError::DimensionMismatch {
            expected: n_g,
            got: plant.c_g.ncols(),
        }));
    }
    if iqc.c_psi.nrows() != 2 || iqc.c_psi.ncols() != n_psi {
        return Err(AnalysisError::Lmi(LmiError::DimensionMismatch {
            expected: n_psi,
            got: iqc.c_psi.ncols(),
        }));
    }
    if iqc.b_psi1.nrows() != n_psi || iqc.b_psi2.nrows() != n_psi {
        return Err(AnalysisError::Lmi(LmiError::DimensionMismatch {
            expected: n_psi,
            got: iqc.b_psi1.nrows(),
        }));
    }
    let n = n_g + n_psi;

    let mut a = nalgebra::DMatrix::zeros(n, n);
    a.view_mut((0, 0), (n_g, n_g)).copy_from(&plant.a_g);
    a.view_mut((n_g, 0), (n_psi, n_g))
        .copy_from(&(&iqc.b_psi1 * &plant.c_g));
    a.view_mut((n_g, n_g), (n_psi, n_psi)).copy_from(&iqc.a_psi);
    let mut b = nalgebra::DMatrix::zeros(n, 1);
    b.view_mut((0, 0), (n_g, 1)).copy_from(&plant.b_g);
    b.view_mut((n_g, 0), (n_psi, 1))
        .copy_from(&(&iqc.b_psi2 + &iqc.b_psi1 * plant.d_g));
    let mut c = nalgebra::DMatrix::zeros(2, n);
    c.view_mut((0, 0), (2, n_g))
        .copy_from(&(&iqc.d_psi1 * &plant.c_g));
    c.view_mut((0, n_g), (2, n_psi)).copy_from(&iqc.c_psi);
    let d = &iqc.d_psi2 + &iqc.d_psi1 * plant.d_g;

    let mut ab = nalgebra::DMatrix::zeros(n, n + 1);
    ab.view_mut((0, 0), (n, n)).copy_from(&a);
    ab.view_mut((0, n), (n, 1)).copy_from(&b);
    let mut i0 = nalgebra::DMatrix::zeros(n, n + 1);
    i0.view_mut((0, 0), (n, n))
        .copy_from(&nalgebra::DMatrix::identity(n, n));
    let mut cd = nalgebra::DMatrix::zeros(2, n + 1);
    cd.view_mut((0, 0), (2, n)).copy_from(&c);
    cd.view_mut((0, n), (2, 1)).copy_from(&d);

    let basis = sym_basis(n);
    let f0_rate = SymMatrix::from_lower(-(cd.transpose() * iqc.m.as_matrix() * &cd));
    let coeffs_rate = basis
        .iter()
        .map(|e| {
            let quad = ab.transpose() * e.as_matrix() * &ab
                - rho * rho * (i0.transpose() * e.as_matrix() * &i0);
            SymMatrix::from_lower(-quad)
        })
        .collect();
    let rate = AffineLmi::new(f0_rate, coeffs_rate, Sense::Psd);
    let positivity = AffineLmi::new(SymMatrix::zeros(n), basis, Sense::Pd);
    Ok(LmiSystem::new(vec![rate, positivity], sym_labels("p", n)))
}

fn feasibility_at(
    plant: &PlantSS,
    family: IqcFamily,
    rho: f64,
    tol: &Tolerances,
) -> Result<Option<(nalgebra::DVector<f64>, f64)>, AnalysisError> {
    let iqc = family.build(rho);
    let sys = assemble_analysis_lmi(plant, &iqc, rho)?;
    match lmi::solve_feasibility(&sys, tol) {
        Ok(result) if result.feasible => {
            let witness = result.witness.expect("feasible result carries a witness");
            Ok(Some((witness, result.achieved_margin)))
        }
        Ok(_) => Ok(None),
        // a stalled solve is treated as infeasible: conservative, keeps
        // every returned certificate sound
        Err(LmiError::SolverStall { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Bisects the rate over (0, 1], rebuilding the IQC at each point, and
/// returns a re-verified certificate at the smallest feasible rate
/// within `tol.bisection_tol`.
pub fn certify_rate(
    algo: &AlgorithmSS,
    family: IqcFamily,
    m: f64,
    l: f64,
    tol: &Tolerances,
) -> Result<RateCertificate, AnalysisError> {
    assert!(0.0 < m && m < l, "class bounds must satisfy 0 < m < l");
    let plant = build_plant(algo, m, l);
    let mut best = match feasibility_at(&plant, family, 1.0, tol)? {
        Some(found) => found,
        None => return Err(AnalysisError::NoCertificate),
    };
    let (mut lo, mut hi) = (1e-6, 1.0);
    for _ in 0..60 {
        if hi - lo <= tol.bisection_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match feasibility_at(&plant, family, mid, tol)? {
            Some(found) => {
                hi = mid;
                best = found;
            }
            None => lo = mid,
        }
    }
    let (witness, lmi_margin) = best;
    let iqc = family.build(hi);
    let sys = assemble_analysis_lmi(&plant, &iqc, hi)?;
    // independent re-verification of the stored witness
    let margins = lmi::witness_margins(&sys, witness.as_slice())
        .expect("witness length matches the system it solved");
    for (constraint, margin) in sys.constraints.iter().zip(margins.iter()) {
        let thr = tol.psd_threshold(margin.balanced_scale);
        let ok = match constraint.sense {
            Sense::Psd => margin.balanced >= -thr,
            Sense::Pd => margin.balanced > thr,
        };
        assert!(ok, "certificate witness failed re-verification");
    }
    let n = plant.a_g.nrows() + iqc.n_psi();
    Ok(RateCertificate {
        rho: hi,
        p: unpack_sym(witness.as_slice(), n),
        iqc,
        algorithm: algo.clone(),
        lmi_margin,
    })
}
