//! First-order optimization algorithms as SISO linear controllers in
//! feedback with the gradient, the loop transformation that normalizes
//! the gradient's sector to (-1, 1), and a simulator measuring empirical
//! convergence rates on scalar test functions.
//!
//! An algorithm is the controller `K(z)` in series with the integrator
//! `1/(z - 1)`:
//!
//! ```text
//! w+    = w + e            (integrator)
//! zeta+ = A_K zeta + B_K w
//! y     = C_K zeta + D_K w (iterate)
//! e     = grad f(y)        (feedback)
//! ```
//!
//! The iterate sequence read off at `y` reproduces the familiar update
//! rules: `K(z) = -alpha` is gradient descent, `K(z) = -alpha z/(z - beta)`
//! is the heavy-ball method.

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

use crate::linalg::RectMatrix;

#[derive(Debug, Error)]
pub enum AlgoError {
    #[error("iterates diverged at step {step}: distance {distance:.3e} exceeds 1e12 x initial")]
    Diverged { step: usize, distance: f64 },
}

/// SISO state-space controller `K(z)`; `n_K = 0` means the static gain
/// `K(z) = D_K`.
#[derive(Debug, Clone)]
pub struct AlgorithmSS {
    pub a_k: RectMatrix,
    pub b_k: RectMatrix,
    pub c_k: RectMatrix,
    pub d_k: f64,
}

impl AlgorithmSS {
    pub fn n_k(&self) -> usize {
        self.a_k.nrows()
    }
}

/// Loop-transformed plant seen by the normalized sector nonlinearity.
/// The last state is the integrator `w`; `d_g` is always zero.
#[derive(Debug, Clone)]
pub struct PlantSS {
    pub a_g: RectMatrix,
    pub b_g: RectMatrix,
    pub c_g: RectMatrix,
    pub d_g: f64,
    pub m: f64,
    pub l: f64,
}

/// Scalar test function with continuous piecewise-linear gradient whose
/// slope stays within the class bounds `[m, l]`. The gradient vanishes
/// exactly at the minimizer.
#[derive(Debug, Clone)]
pub struct TestFunction {
    /// strictly increasing breakpoints of the gradient's slope
    knots: Vec<f64>,
    /// slope of the gradient on each cell; `curvatures[i]` applies
    /// between `knots[i-1]` and `knots[i]` (unbounded at the ends)
    curvatures: Vec<f64>,
    x_star: f64,
    pub m: f64,
    pub l: f64,
}

impl TestFunction {
    /// The quadratic `(c/2)(x - x_star)^2` viewed as a member of the
    /// `[m, l]` class.
    pub fn scalar_quadratic(curvature: f64, x_star: f64, m: f64, l: f64) -> Self {
        assert!(0.0 < m && m <= l, "class bounds must satisfy 0 < m <= l");
        assert!(
            (m..=l).contains(&curvature),
            "curvature must lie within [m, l]"
        );
        TestFunction {
            knots: Vec::new(),
            curvatures: vec![curvature],
            x_star,
            m,
            l,
        }
    }

    /// Piecewise quadratic with the given gradient breakpoints and one
    /// curvature per cell (`curvatures.len() == breakpoints.len() + 1`).
    pub fn piecewise_quadratic_spline(
        breakpoints: Vec<f64>,
        curvatures: Vec<f64>,
        x_star: f64,
        m: f64,
        l: f64,
    ) -> Self {
        assert!(0.0 < m && m <= l, "class bounds must satisfy 0 < m <= l");
        assert_eq!(
            curvatures.len(),
            breakpoints.len() + 1,
            "need one curvature per cell"
        );
        assert!(
            breakpoints.windows(2).all(|w| w[0] < w[1]),
            "breakpoints must be strictly increasing"
        );
        assert!(
            curvatures.iter().all(|c| (m..=l).contains(c)),
            "all curvatures must lie within [m, l]"
        );
        TestFunction {
            knots: breakpoints,
            curvatures,
            x_star,
            m,
            l,
        }
    }

    /// Seeded random spline: minimizer in [-1, 1], three to seven
    /// breakpoints, curvatures uniform in [m, l].
    pub fn random_spline<R: Rng + ?Sized>(rng: &mut R, m: f64, l: f64) -> Self {
        let x_star = rng.random_range(-1.0..1.0);
        let n_breaks = rng.random_range(3..=7usize);
        let mut knots = Vec::with_capacity(n_breaks);
        let mut pos = rng.random_range(-3.0..-2.0);
        for _ in 0..n_breaks {
            knots.push(pos);
            pos += rng.random_range(0.2..1.5);
        }
        let curvatures = (0..n_breaks + 1).map(|_| rng.random_range(m..=l)).collect();
        TestFunction {
            knots,
            curvatures,
            x_star,
            m,
            l,
        }
    }

    pub fn x_star(&self) -> f64 {
        self.x_star
    }

    /// Integral of the piecewise-constant curvature over `[a, b]`, `a <= b`.
    fn integrate_curvature(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        let mut lo = a;
        for (i, &k) in self.knots.iter().enumerate() {
            if k <= lo {
                continue;
            }
            if k >= b {
                break;
            }
            total += self.curvatures[i] * (k - lo);
            lo = k;
        }
        let last_cell = self
            .knots
            .iter()
            .position(|&k| k > lo)
            .unwrap_or(self.knots.len());
        total + self.curvatures[last_cell] * (b - lo)
    }

    pub fn gradient(&self, x: f64) -> f64 {
        if x >= self.x_star {
            self.integrate_curvature(self.x_star, x)
        } else {
            -self.integrate_curvature(x, self.x_star)
        }
    }

    /// Function value relative to the minimum (`value(x_star) = 0`),
    /// obtained by integrating the gradient cell by cell.
    pub fn value(&self, x: f64) -> f64 {
        let (a, b) = if x >= self.x_star {
            (self.x_star, x)
        } else {
            (x, self.x_star)
        };
        let mut total = 0.0;
        let mut lo = a;
        let mut g = self.gradient(a);
        for (i, &k) in self.knots.iter().enumerate() {
            if k <= lo {
                continue;
            }
            if k >= b {
                break;
            }
            let len = k - lo;
            total += g * len + 0.5 * self.curvatures[i] * len * len;
            g += self.curvatures[i] * len;
            lo = k;
        }
        let last_cell = self
            .knots
            .iter()
            .position(|&k| k > lo)
            .unwrap_or(self.knots.len());
        let len = b - lo;
        total += g * len + 0.5 * self.curvatures[last_cell] * len * len;
        if x >= self.x_star {
            total
        } else {
            -total
        }
    }
}

/// Gradient descent with stepsize `alpha`: the static gain `K(z) = -alpha`.
pub fn gradient_descent(alpha: f64) -> AlgorithmSS {
    assert!(alpha > 0.0, "stepsize must be positive");
    AlgorithmSS {
        a_k: DMatrix::zeros(0, 0),
        b_k: DMatrix::zeros(0, 1),
        c_k: DMatrix::zeros(1, 0),
        d_k: -alpha,
    }
}

/// Heavy-ball method: `K(z) = -alpha z / (z - beta)`.
pub fn heavy_ball(alpha: f64, beta: f64) -> AlgorithmSS {
    assert!(alpha > 0.0, "stepsize must be positive");
    assert!(beta.abs() < 1.0, "momentum must satisfy |beta| < 1");
    AlgorithmSS {
        a_k: DMatrix::from_element(1, 1, beta),
        b_k: DMatrix::from_element(1, 1, -alpha),
        c_k: DMatrix::from_element(1, 1, beta),
        d_k: -alpha,
    }
}

/// Triple momentum method tuned for the class `[m, l]`, achieving the
/// rate `1 - sqrt(m/l)`. Returned as the minimal one-state controller
/// realizing `K(z) = -alpha ((1 + gamma) z - gamma) / (z - beta)`.
/// The constructor self-checks the realization by closing the loop on
/// the two extreme quadratics and asserting the spectral radius equals
/// the designed rate; the tuning places a closed-loop pole exactly at
/// the rate on both, so any parameter slip shows up as an eigenvalue
/// excursion. (An empirical-rate check would carry an estimator bias
/// from the sub-dominant mode that depends on the condition ratio.)
pub fn triple_momentum(m: f64, l: f64) -> AlgorithmSS {
    assert!(0.0 < m && m < l, "class bounds must satisfy 0 < m < l");
    let rho = 1.0 - (m / l).sqrt();
    let alpha = (1.0 + rho) / l;
    let beta = rho * rho / (2.0 - rho);
    let gamma = rho * rho / ((1.0 + rho) * (2.0 - rho));
    let algo = AlgorithmSS {
        a_k: DMatrix::from_element(1, 1, beta),
        b_k: DMatrix::from_element(1, 1, -alpha),
        c_k: DMatrix::from_element(1, 1, (1.0 + gamma) * beta - gamma),
        d_k: -alpha * (1.0 + gamma),
    };
    for curvature in [m, l] {
        let radius = closed_loop_spectral_radius(&algo, curvature);
        assert!(
            radius <= rho + 1e-9 * rho.max(1.0),
            "self-check failed: spectral radius {radius} on curvature {curvature} exceeds {rho}"
        );
    }
    algo
}

/// Spectral radius of the loop (controller, integrator, gradient of a
/// curvature-`c` quadratic centered at zero): the one-step map of the
/// state (zeta, w) is [[A_K, B_K], [c C_K, 1 + c D_K]].
fn closed_loop_spectral_radius(k: &AlgorithmSS, c: f64) -> f64 {
    let n_k = k.n_k();
    let mut closed = DMatrix::zeros(n_k + 1, n_k + 1);
    closed.view_mut((0, 0), (n_k, n_k)).copy_from(&k.a_k);
    closed.view_mut((0, n_k), (n_k, 1)).copy_from(&k.b_k);
    closed.view_mut((n_k, 0), (1, n_k)).copy_from(&(c * &k.c_k));
    closed[(n_k, n_k)] = 1.0 + c * k.d_k;
    closed
        .complex_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, ev| acc.max(ev.norm()))
}

/// Assembles the loop-transformed plant whose feedback nonlinearity
/// lives in the normalized sector (-1, 1):
///
/// ```text
/// A_G = [ A_K              B_K              ]   B_G = [ 0         ]
///       [ (l+m)/2 C_K      1 + (l+m)/2 D_K  ]         [ (l-m)/2   ]
/// C_G = [ C_K  D_K ]                             D_G = 0
/// ```
pub fn build_plant(k: &AlgorithmSS, m: f64, l: f64) -> PlantSS {
    assert!(0.0 < m && m <= l, "class bounds must satisfy 0 < m <= l");
    let n_k = k.n_k();
    let mid = (l + m) / 2.0;
    let mut a_g = DMatrix::zeros(n_k + 1, n_k + 1);
    a_g.view_mut((0, 0), (n_k, n_k)).copy_from(&k.a_k);
    a_g.view_mut((0, n_k), (n_k, 1)).copy_from(&k.b_k);
    a_g.view_mut((n_k, 0), (1, n_k)).copy_from(&(mid * &k.c_k));
    a_g[(n_k, n_k)] = 1.0 + mid * k.d_k;
    let mut b_g = DMatrix::zeros(n_k + 1, 1);
    b_g[(n_k, 0)] = (l - m) / 2.0;
    let mut c_g = DMatrix::zeros(1, n_k + 1);
    c_g.view_mut((0, 0), (1, n_k)).copy_from(&k.c_k);
    c_g[(0, n_k)] = k.d_k;
    PlantSS {
        a_g,
        b_g,
        c_g,
        d_g: 0.0,
        m,
        l,
    }
}

/// Iterate trajectory plus the measured per-step contraction factor.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub trajectory: Vec<f64>,
    pub empirical_rate: f64,
}

/// Runs the untransformed loop (controller, integrator, gradient
/// feedback) for `steps` updates from `x0`. Controller states start at
/// zero and the integrator is set so the first iterate equals `x0`.
///
/// The empirical rate is the geometric mean of consecutive distance
/// ratios over the last half of the trajectory, truncated at the first
/// step where the distance to the minimizer drops below 1e-13 (beyond
/// that, ratios measure rounding noise, not contraction). Starting
/// exactly at the minimizer reports a constant trajectory with rate 0.
pub fn simulate(
    k: &AlgorithmSS,
    f: &TestFunction,
    x0: f64,
    steps: usize,
) -> Result<SimulationResult, AlgoError> {
    assert!(steps >= 2, "need at least two steps to measure a rate");
    assert!(
        k.d_k != 0.0,
        "controller direct term must be nonzero to seed the initial iterate"
    );
    let x_star = f.x_star();
    let initial = (x0 - x_star).abs();
    if initial == 0.0 {
        return Ok(SimulationResult {
            trajectory: vec![x0; steps + 1],
            empirical_rate: 0.0,
        });
    }
    let n_k = k.n_k();
    let mut zeta = nalgebra::DVector::<f64>::zeros(n_k);
    let mut w = x0 / k.d_k;
    let mut trajectory = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let y = (&k.c_k * &zeta)[(0, 0)] + k.d_k * w;
        let distance = (y - x_star).abs();
        if distance > 1e12 * initial {
            return Err(AlgoError::Diverged { step, distance });
        }
        trajectory.push(y);
        let e = f.gradient(y);
        zeta = &k.a_k * zeta + &k.b_k * w;
        w += e;
    }
    let mut distances = Vec::with_capacity(trajectory.len());
    for &x in &trajectory {
        let d = (x - x_star).abs();
        if d < 1e-13 {
            break;
        }
        distances.push(d);
    }
    let n_ratios = distances.len().saturating_sub(1);
    let start = n_ratios / 2;
    let empirical_rate = if n_ratios == 0 {
        0.0
    } else {
        let log_sum: f64 = (start..n_ratios)
            .map(|i| (distances[i + 1] / distances[i]).ln())
            .sum();
        (log_sum / (n_ratios - start) as f64).exp()
    };
    Ok(SimulationResult {
        trajectory,
        empirical_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradient_descent_is_a_static_gain() {
        let gd = gradient_descent(1.0);
        assert_eq!(gd.n_k(), 0);
        assert_eq!(gd.d_k, -1.0);
        let gd = gradient_descent(2.0 / 11.0);
        assert_relative_eq!(gd.d_k, -2.0 / 11.0);
    }

    #[test]
    fn heavy_ball_realization_matches_transfer_function() {
        let hb = heavy_ball(0.1, 0.5);
        assert_eq!(hb.a_k[(0, 0)], 0.5);
        assert_eq!(hb.b_k[(0, 0)], -0.1);
        assert_eq!(hb.c_k[(0, 0)], 0.5);
        assert_eq!(hb.d_k, -0.1);
    }

    #[test]
    fn heavy_ball_with_zero_momentum_equals_gradient_descent() {
        let alpha = 0.37;
        let hb = heavy_ball(alpha, 0.0);
        let gd = gradient_descent(alpha);
        // impulse response of K(z) over 20 steps
        let impulse = |k: &AlgorithmSS| -> Vec<f64> {
            let mut zeta = nalgebra::DVector::<f64>::zeros(k.n_k());
            let mut out = Vec::new();
            for t in 0..20 {
                let w = if t == 0 { 1.0 } else { 0.0 };
                out.push((&k.c_k * &zeta)[(0, 0)] + k.d_k * w);
                zeta = &k.a_k * zeta + &k.b_k * w;
            }
            out
        };
        for (a, b) in impulse(&hb).iter().zip(impulse(&gd).iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn heavy_ball_iterates_satisfy_the_momentum_recursion() {
        let (alpha, beta) = (0.1, 0.5);
        let hb = heavy_ball(alpha, beta);
        let f = TestFunction::scalar_quadratic(3.0, 1.0, 1.0, 10.0);
        let sim = simulate(&hb, &f, 4.0, 30).unwrap();
        let x = &sim.trajectory;
        for k in 1..x.len() - 1 {
            let predicted = x[k] - alpha * f.gradient(x[k]) + beta * (x[k] - x[k - 1]);
            assert_relative_eq!(x[k + 1], predicted, epsilon = 1e-12);
        }
    }

    #[test]
    fn triple_momentum_frozen_parameters() {
        let tmm = triple_momentum(1.0, 10.0);
        assert_relative_eq!(tmm.a_k[(0, 0)], 0.35521547260866926, epsilon = 1e-12);
        assert_relative_eq!(tmm.b_k[(0, 0)], -0.1683772233983162, epsilon = 1e-12);
        assert_relative_eq!(tmm.c_k[(0, 0)], 0.21918909326503686, epsilon = 1e-12);
        assert_relative_eq!(tmm.d_k, -0.20389877065918313, epsilon = 1e-12);

        let tmm = triple_momentum(1.0, 100.0);
        assert_relative_eq!(tmm.a_k[(0, 0)], 0.7363636363636363, epsilon = 1e-12);
        assert_relative_eq!(tmm.b_k[(0, 0)], -0.019, epsilon = 1e-12);
        assert_relative_eq!(tmm.c_k[(0, 0)], 0.6341887777294475, epsilon = 1e-12);
        assert_relative_eq!(tmm.d_k, -0.026363636363636367, epsilon = 1e-12);
    }

    #[test]
    fn triple_momentum_near_equal_bounds_converges_immediately() {
        // rate limit 1 - sqrt(m/l) -> 0; the constructor's self-check
        // must accept the nearly one-step convergence
        let tmm = triple_momentum(1.0, 1.0 + 1e-9);
        let f = TestFunction::scalar_quadratic(1.0, 0.0, 1.0, 1.0 + 1e-9);
        let sim = simulate(&tmm, &f, 1.0, 10).unwrap();
        assert!(sim.empirical_rate < 1e-6);
    }

    #[test]
    fn plant_assembly_for_optimal_gradient_descent() {
        let (m, l) = (1.0, 10.0);
        let gd = gradient_descent(2.0 / (l + m));
        let plant = build_plant(&gd, m, l);
        assert_eq!(plant.a_g.nrows(), 1);
        assert_relative_eq!(plant.a_g[(0, 0)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(plant.b_g[(0, 0)], 4.5);
        assert_relative_eq!(plant.c_g[(0, 0)], -2.0 / 11.0);
        assert_eq!(plant.d_g, 0.0);
    }

    #[test]
    fn plant_assembly_for_heavy_ball_matches_hand_blocks() {
        let (m, l) = (1.0, 10.0);
        let hb = heavy_ball(0.1, 0.5);
        let plant = build_plant(&hb, m, l);
        let mid = 5.5;
        assert_relative_eq!(plant.a_g[(0, 0)], 0.5);
        assert_relative_eq!(plant.a_g[(0, 1)], -0.1);
        assert_relative_eq!(plant.a_g[(1, 0)], mid * 0.5);
        assert_relative_eq!(plant.a_g[(1, 1)], 1.0 + mid * -0.1);
        assert_relative_eq!(plant.b_g[(0, 0)], 0.0);
        assert_relative_eq!(plant.b_g[(1, 0)], 4.5);
        assert_relative_eq!(plant.c_g[(0, 0)], 0.5);
        assert_relative_eq!(plant.c_g[(0, 1)], -0.1);
    }

    #[test]
    fn plant_with_equal_bounds_decouples_from_the_nonlinearity() {
        let plant = build_plant(&gradient_descent(0.2), 3.0, 3.0);
        assert_eq!(plant.b_g[(0, 0)], 0.0);
    }

    #[test]
    fn optimal_gradient_descent_attains_the_sector_rate_exactly() {
        let (m, l) = (1.0, 10.0);
        let gd = gradient_descent(2.0 / (l + m));
        let f = TestFunction::scalar_quadratic(m, 3.0, m, l);
        // keep distances well above the measurement floor: with a
        // nonzero minimizer, |x - x*| loses ~|x*| * eps to cancellation,
        // so late-trajectory samples near the floor would pollute the
        // telescoped geometric mean
        let sim = simulate(&gd, &f, 5.0, 60).unwrap();
        assert_relative_eq!(sim.empirical_rate, 9.0 / 11.0, epsilon = 1e-9);
    }

    #[test]
    fn gradient_descent_rate_on_quadratic_is_one_minus_alpha_c() {
        for (alpha, c) in [(0.05, 4.0), (0.12, 7.5), (0.19, 2.0)] {
            let gd = gradient_descent(alpha);
            let f = TestFunction::scalar_quadratic(c, 0.0, 1.0, 10.0);
            let sim = simulate(&gd, &f, 1.0, 150).unwrap();
            assert_relative_eq!(sim.empirical_rate, (1.0 - alpha * c).abs(), epsilon = 1e-9);
        }
    }

    #[test]
    fn unstable_stepsize_reports_divergence() {
        let gd = gradient_descent(1.0);
        let f = TestFunction::scalar_quadratic(10.0, 0.0, 1.0, 10.0);
        assert!(matches!(
            simulate(&gd, &f, 1.0, 50),
            Err(AlgoError::Diverged { .. })
        ));
    }

    #[test]
    fn starting_at_the_minimizer_is_a_fixed_point() {
        let hb = heavy_ball(0.1, 0.5);
        let f = TestFunction::scalar_quadratic(2.0, 1.5, 1.0, 10.0);
        let sim = simulate(&hb, &f, 1.5, 20).unwrap();
        assert_eq!(sim.empirical_rate, 0.0);
        assert!(sim.trajectory.iter().all(|&x| x == 1.5));
    }

    #[test]
    fn transformed_and_original_loops_produce_identical_outputs() {
        // with f = (c/2) x^2 the normalized nonlinearity is the linear
        // gain (2c - l - m)/(l - m) in [-1, 1]; both loops share the
        // state coordinates (zeta, w) so initial states can be matched
        let (m, l, c) = (1.0, 10.0, 3.7);
        let hb = heavy_ball(0.1, 0.5);
        let f = TestFunction::scalar_quadratic(c, 0.0, m, l);
        let x0 = 2.0;
        let sim = simulate(&hb, &f, x0, 40).unwrap();

        let plant = build_plant(&hb, m, l);
        let gain = (2.0 * c - l - m) / (l - m);
        let n = plant.a_g.nrows();
        let mut state = nalgebra::DVector::<f64>::zeros(n);
        state[n - 1] = x0 / hb.d_k;
        for &expected in sim.trajectory.iter().take(40) {
            let y = (&plant.c_g * &state)[(0, 0)];
            assert_relative_eq!(y, expected, epsilon = 1e-10);
            let u = gain * y;
            state = &plant.a_g * state + &plant.b_g * u;
        }
    }

    #[test]
    fn spline_gradient_is_continuous_and_vanishes_at_the_minimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = TestFunction::random_spline(&mut rng, 1.0, 10.0);
            assert_eq!(f.gradient(f.x_star()), 0.0);
            for &k in &f.knots {
                let below = f.gradient(k - 1e-9);
                let above = f.gradient(k + 1e-9);
                assert!((below - above).abs() < 1e-7);
            }
            // monotone gradient: slope within [m, l] between probes
            let mut prev = f.gradient(-4.0);
            let mut x = -4.0;
            while x < 4.0 {
                x += 0.05;
                let g = f.gradient(x);
                let slope = (g - prev) / 0.05;
                assert!((1.0 - 1e-6..=10.0 + 1e-6).contains(&slope));
                prev = g;
            }
        }
    }

    #[test]
    fn spline_value_integrates_the_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = TestFunction::random_spline(&mut rng, 1.0, 10.0);
        assert_eq!(f.value(f.x_star()), 0.0);
        let h = 1e-6;
        for x in [-2.3, -0.4, 0.9, 2.7] {
            let numeric = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
            assert_relative_eq!(numeric, f.gradient(x), epsilon = 1e-5, max_relative = 1e-5);
        }
        // value is nonnegative everywhere (x_star is the minimum)
        for x in [-3.5, -1.0, 0.1, 1.4, 3.9] {
            assert!(f.value(x) >= 0.0);
        }
    }

    #[test]
    fn quadratic_gradient_and_value_are_exact() {
        let f = TestFunction::scalar_quadratic(4.0, 2.0, 1.0, 10.0);
        assert_relative_eq!(f.gradient(5.0), 12.0);
        assert_relative_eq!(f.gradient(-1.0), -12.0);
        assert_relative_eq!(f.value(5.0), 18.0);
        assert_relative_eq!(f.value(-1.0), 18.0);
    }
}
