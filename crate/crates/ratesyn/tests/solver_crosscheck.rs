//! Cross-checks of the interior-point feasibility solver against an
//! independent oracle from a different algorithm family: an ellipsoid
//! search driven by eigenvector cuts. The two routes share only the LMI
//! data structures, so agreement on instances pinned a macroscopic
//! distance (0.01 in rate) from the feasibility boundary guards against
//! a systematic defect in either solver. A structural consistency check
//! then ties the analysis witness to the eliminated synthesis
//! constraints without going through any solver at all.

use nalgebra::{DMatrix, DVector};

use ratesyn::{
    assemble_analysis_lmi, assemble_final_lmis, build_plant, certify_rate, gradient_descent,
    off_by_one_iqc, sector_iqc, solve_feasibility, triple_momentum, witness_margins, IqcFamily,
    LmiSystem, Sense, Tolerances,
};

/// Radius of the ball the ellipsoid search starts from. Witness entries
/// on the pinned instances stay below 1e4, so this is generous.
const START_RADIUS: f64 = 1e6;

/// Smallest feasible ball the search is required to resolve before
/// giving up. The pinned instances keep their strictly feasible sets
/// far wider than this, so exhausting the budget certifies
/// infeasibility for them.
const RESOLVE_RADIUS: f64 = 1e-6;

/// One constraint with its data scaled to unit magnitude so eigenvalue
/// floors mean the same thing across blocks.
struct Block {
    f0: DMatrix<f64>,
    coeffs: Vec<DMatrix<f64>>,
    floor: f64,
}

fn normalized_blocks(sys: &LmiSystem) -> Vec<Block> {
    sys.constraints
        .iter()
        .map(|constraint| {
            let mut scale = constraint.constant.scale();
            for c in &constraint.coeffs {
                scale = scale.max(c.scale());
            }
            let scale = scale.max(1e-30);
            Block {
                f0: constraint.constant.as_matrix() / scale,
                coeffs: constraint
                    .coeffs
                    .iter()
                    .map(|c| c.as_matrix() / scale)
                    .collect(),
                floor: match constraint.sense {
                    Sense::Psd => 0.0,
                    Sense::Pd => 1e-9,
                },
            }
        })
        .collect()
}

/// Most violated block at `x`: its eigenvalue deficit below the floor
/// and the offending unit eigenvector, or `None` when every block
/// clears its floor.
fn worst_violation(blocks: &[Block], x: &DVector<f64>) -> Option<(f64, DVector<f64>, usize)> {
    let mut worst: Option<(f64, DVector<f64>, usize)> = None;
    for (idx, block) in blocks.iter().enumerate() {
        let mut value = block.f0.clone();
        for (k, c) in block.coeffs.iter().enumerate() {
            value += c * x[k];
        }
        let eig = ((&value + value.transpose()) * 0.5).symmetric_eigen();
        let (which, lambda) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite eigenvalue"))
            .map(|(i, &v)| (i, v))
            .expect("nonempty spectrum");
        let deficit = lambda - block.floor;
        if deficit < 0.0 && worst.as_ref().is_none_or(|w| deficit < w.0) {
            worst = Some((deficit, eig.eigenvectors.column(which).into_owned(), idx));
        }
    }
    worst
}

/// Feasibility verdict by the ellipsoid method.
///
/// The search maintains an ellipsoid guaranteed to contain every
/// feasible point of the starting ball that has not been cut away. When
/// the centre violates some block, the most negative eigenvector `v`
/// gives the valid linear inequality `v^T F(y) v >= floor`, a cut
/// through the centre; the minimum-volume ellipsoid around the
/// surviving half is a rank-one update. Volume shrinks by a fixed
/// factor per cut, so if no feasible centre appears within the budget,
/// no feasible ball of radius `RESOLVE_RADIUS` fits inside the starting
/// ball and the instance is declared infeasible.
///
/// The shape matrix `B = L L^T` is propagated through its factor `L`:
/// updating `B` directly loses positive definiteness to rounding once
/// the ellipsoid elongates, while the factored form cannot. If the
/// ellipsoid flattens to zero extent along a cut normal, nothing is
/// left to search and the instance is declared infeasible as well.
fn ellipsoid_feasible(sys: &LmiSystem) -> bool {
    let blocks = normalized_blocks(sys);
    // the rank-one update degenerates in one dimension; pad with an
    // unconstrained dummy variable so the formulas always apply
    let nv = sys.num_vars().max(2);
    let n = nv as f64;
    let budget =
        (2.0 * (n + 1.0) * (n + 1.0) * (START_RADIUS / RESOLVE_RADIUS).ln()).ceil() as usize;
    let c1 = n / (n * n - 1.0).sqrt();
    let c2 = 1.0 - ((n - 1.0) / (n + 1.0)).sqrt();
    let mut x = DVector::zeros(nv);
    let mut l_fac = DMatrix::identity(nv, nv) * START_RADIUS;
    for _ in 0..budget {
        let Some((_, v, idx)) = worst_violation(&blocks, &x) else {
            return true;
        };
        // valid for feasible y: sum_k y_k v^T F_k v >= floor - v^T F_0 v,
        // violated at the centre, so g = -(v^T F_k v)_k cuts through it
        let mut g = DVector::zeros(nv);
        for (k, c) in blocks[idx].coeffs.iter().enumerate() {
            g[k] = -(v.transpose() * c * &v)[(0, 0)];
        }
        if g.norm() < 1e-14 {
            // the violated direction is constant in the variables, so no
            // point in the ball can repair it
            return false;
        }
        let gt = l_fac.transpose() * &g;
        let tau = gt.norm();
        if tau.is_nan() || tau <= 0.0 {
            return false;
        }
        let p = &gt / tau;
        let step = &l_fac * &p;
        x -= &step / (n + 1.0);
        l_fac = (&l_fac - &step * (c2 * p.transpose())) * c1;
    }
    false
}

fn barrier_feasible(sys: &LmiSystem, tol: &Tolerances) -> bool {
    solve_feasibility(sys, tol)
        .map(|r| r.feasible)
        .unwrap_or(false)
}

#[test]
fn sector_analysis_verdicts_agree_near_the_boundary() {
    let (m, l) = (1.0, 10.0);
    let plant = build_plant(&gradient_descent(2.0 / (l + m)), m, l);
    let boundary = (l - m) / (l + m);
    let tol = Tolerances::default();
    for (rho, expected) in [(boundary + 0.01, true), (boundary - 0.01, false)] {
        let sys = assemble_analysis_lmi(&plant, &sector_iqc(), rho).unwrap();
        assert_eq!(
            barrier_feasible(&sys, &tol),
            expected,
            "interior-point verdict wrong at rho = {rho}"
        );
        assert_eq!(
            ellipsoid_feasible(&sys),
            expected,
            "ellipsoid oracle disagrees at rho = {rho}"
        );
    }
}

#[test]
fn slope_analysis_verdicts_agree_near_the_boundary() {
    let (m, l) = (1.0, 10.0);
    let plant = build_plant(&triple_momentum(m, l), m, l);
    let boundary = 1.0 - (m / l).sqrt();
    let tol = Tolerances::default();
    for (rho, expected) in [(boundary + 0.01, true), (boundary - 0.01, false)] {
        let iqc = off_by_one_iqc(rho, rho * rho).unwrap();
        let sys = assemble_analysis_lmi(&plant, &iqc, rho).unwrap();
        assert_eq!(
            barrier_feasible(&sys, &tol),
            expected,
            "interior-point verdict wrong at rho = {rho}"
        );
        assert_eq!(
            ellipsoid_feasible(&sys),
            expected,
            "ellipsoid oracle disagrees at rho = {rho}"
        );
    }
}

#[test]
fn eliminated_synthesis_verdicts_agree_near_the_boundary() {
    let (m, l) = (1.0f64, 10.0f64);
    let boundary = 1.0 - (m / l).sqrt();
    let tol = Tolerances::default();
    for (rho, expected) in [(boundary + 0.01, true), (boundary - 0.01, false)] {
        let iqc = off_by_one_iqc(rho, rho * rho).unwrap();
        let sys = assemble_final_lmis(m, l, &iqc, rho).unwrap();
        assert_eq!(
            barrier_feasible(&sys, &tol),
            expected,
            "interior-point verdict wrong at rho = {rho}"
        );
        assert_eq!(
            ellipsoid_feasible(&sys),
            expected,
            "ellipsoid oracle disagrees at rho = {rho}"
        );
    }
}

/// The eliminated synthesis constraints are projections of the analysis
/// constraints: the trailing blocks of any analysis Lyapunov witness
/// (and of its inverse) must satisfy them at the certified rate. The
/// analysis path knows nothing about the eliminated system, so this is
/// a structural consistency check between the two pipelines.
///
/// The witness satisfies its own LMIs only up to the solver's dead
/// band, and mapping it here conjugates through `P` and its inverse, so
/// that slack is amplified by roughly the condition number of `P`. The
/// acceptance band accounts for this; a structural defect in either
/// assembly would overshoot it by many orders of magnitude.
#[test]
fn analysis_witness_blocks_satisfy_the_eliminated_constraints() {
    let (m, l) = (1.0, 10.0);
    let tol = Tolerances::default();
    let cert = certify_rate(&triple_momentum(m, l), IqcFamily::OffByOne, m, l, &tol)
        .expect("triple momentum certifies");
    let p = cert.p.as_matrix();
    let n = p.nrows();
    let d = 2; // integrator plus one filter state
    let p_inv = p.clone().lu().try_inverse().expect("witness is PD");
    let kappa = p.norm() * p_inv.norm();
    let mut packed = Vec::with_capacity(d * (d + 1));
    for mat in [p, &p_inv] {
        let block = mat.view((n - d, n - d), (d, d));
        for i in 0..d {
            for j in 0..=i {
                packed.push(block[(i, j)]);
            }
        }
    }
    let iqc = off_by_one_iqc(cert.rho, cert.rho * cert.rho).unwrap();
    let sys = assemble_final_lmis(m, l, &iqc, cert.rho).unwrap();
    assert_eq!(sys.num_vars(), packed.len());
    let margins = witness_margins(&sys, &packed).unwrap();
    for (constraint, margin) in sys.constraints.iter().zip(margins.iter()) {
        let band = tol.psd_threshold(margin.balanced_scale) * kappa;
        let ok = match constraint.sense {
            Sense::Psd => margin.balanced >= -band,
            Sense::Pd => margin.balanced > -band,
        };
        assert!(
            ok,
            "eliminated constraint violated by the mapped analysis witness: \
             balanced margin {:.3e} (band {band:.3e}, kappa {kappa:.3e})",
            margin.balanced
        );
    }
}
