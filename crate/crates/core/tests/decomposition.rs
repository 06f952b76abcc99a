//! Exact properties of the `E`-decomposition over rational `(beta, z)`.

use lacewalk::critical::{decompose, lambda_mu, TwoPointOptions, TwoPointSolver, bootstrap_b};
use lacewalk::green::GreenEvaluator;
use lacewalk::lace::{kernel_from_g, PiSeries};
use lacewalk::lattice::{rational, rational_from_int, representatives_in_box, representatives_in_l1_ball};
use lacewalk::walks::{enumerate_g, EnumerationOptions, WalkWeightParams};
use lacewalk::{Error, LatticePoint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn kernel(dim: usize, beta: BigRational, order: usize) -> PiSeries {
    let g = enumerate_g(&WalkWeightParams::new(dim, beta, order).unwrap(), &EnumerationOptions::default()).unwrap();
    kernel_from_g(&g.series).unwrap()
}

/// `Pi_z(x)` summed by hand from the coefficients.
fn pi_at(pi: &PiSeries, z: &BigRational, x: &LatticePoint) -> BigRational {
    (0..=pi.pi.order()).map(|n| pi.pi.coefficient(n, x) * num_traits::pow(z.clone(), n)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn moments_vanish_and_e_matches_its_definition(
        dim in 1usize..=4, order in 2usize..=5, p in 0i64..=5, k in 1i64..=9,
    ) {
        let pi = kernel(dim, rational(p, 6), order);
        let omega = 2 * dim as i64;
        // z below 1/Omega
        let z = rational(k, 10 * omega);
        let dec = match decompose(&pi, &z) {
            Ok(d) => d,
            Err(Error::Precondition(_)) | Err(Error::Degenerate(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };

        // lambda and mu from the raw sums
        let radius = order as u32;
        let pts = representatives_in_l1_ball(dim, radius);
        let pihat: BigRational = pts.iter().map(|x| pi_at(&pi, &z, x) * rational_from_int(x.orbit_size() as i64)).sum();
        let m2: BigRational = pts.iter().map(|x| pi_at(&pi, &z, x) * rational_from_int(x.orbit_size() as i64 * x.norm_sq())).sum();
        let lambda = BigRational::one() / (BigRational::one() - &pihat + &m2);
        let fhat0 = BigRational::one() - &z * rational_from_int(omega) - &pihat;
        let mu = (BigRational::one() - &lambda * &fhat0) / rational_from_int(omega);
        prop_assert_eq!(&dec.lambda, &lambda);
        prop_assert_eq!(&dec.mu, &mu);
        prop_assert_eq!(lambda_mu(&pi, &z).unwrap(), (lambda.clone(), mu.clone()));

        // E = delta - mu Omega D - lambda F with F = delta - z Omega D - Pi
        let mut sum = BigRational::zero();
        let mut second = BigRational::zero();
        for x in &pts {
            let delta = if x.is_origin() { BigRational::one() } else { BigRational::zero() };
            let step = if x.l1_norm() == 1 { BigRational::one() } else { BigRational::zero() };
            let f = &delta - &z * &step - pi_at(&pi, &z, x);
            let want = &delta - &mu * &step - &lambda * f;
            prop_assert_eq!(dec.e.get(x), want.clone(), "E at {:?}", x);
            let size = rational_from_int(x.orbit_size() as i64);
            sum += &want * &size;
            second += want * size * rational_from_int(x.norm_sq());
        }
        prop_assert!(sum.is_zero());
        prop_assert!(second.is_zero());
        prop_assert!(dec.e.sum().is_zero());
        prop_assert!(dec.e.moment(2).unwrap().is_zero());
    }
}

#[test]
fn free_model_is_a_single_resolvent() {
    for dim in [3usize, 5] {
        let pi = kernel(dim, BigRational::zero(), 6);
        let omega = 2 * dim as i64;
        for z in [rational(1, 2 * omega), rational(1, omega)] {
            let dec = decompose(&pi, &z).unwrap();
            assert_eq!(dec.lambda, BigRational::one());
            assert_eq!(dec.mu, z);
            assert!(dec.e.is_zero());
            let solver = TwoPointSolver::new(&dec, &TwoPointOptions::default()).unwrap();
            let t = solver.table(&representatives_in_box(dim, 4)).unwrap();
            assert_eq!(t.max_abs_f(), 0.0);
            for row in &t.rows {
                assert_eq!(row.g, row.c_mu);
            }
        }
    }
}

fn b_at(pi: &PiSeries, z: &BigRational, radius: u32) -> f64 {
    let dec = decompose(pi, z).unwrap();
    let solver = TwoPointSolver::new(&dec, &TwoPointOptions::default()).unwrap();
    let t = solver.table(&representatives_in_box(dec.dim, radius)).unwrap();
    bootstrap_b(z, &t, &GreenEvaluator::critical(dec.dim).unwrap(), radius).unwrap().b
}

#[test]
fn bootstrap_ratio_grows_with_z_and_box() {
    let pi = kernel(5, rational(1, 10), 6);
    let zs = [rational(3, 100), rational(5, 100), rational(7, 100), rational(9, 100)];
    let bs: Vec<f64> = zs.iter().map(|z| b_at(&pi, z, 4)).collect();
    assert!(bs.windows(2).all(|w| w[0] <= w[1]), "{bs:?}");
    let by_radius: Vec<f64> = [2, 3, 4, 6].map(|r| b_at(&pi, &zs[3], r)).to_vec();
    assert!(by_radius.windows(2).all(|w| w[0] <= w[1]), "{by_radius:?}");
}

#[test]
fn free_bootstrap_ratio_is_at_most_one() {
    let pi = kernel(3, BigRational::zero(), 4);
    for k in [1i64, 3, 6] {
        let b = b_at(&pi, &rational(k, 36), 4);
        assert!(b <= 1.0 + 1e-9, "b = {b}");
    }
}
