mod common;

use common::{gaussian_matrix, principal_angles_oracle, random_orthogonal, random_subspace, rng};
use mgm_core::grassmann::{distance, geodesic_interpolate, principal_angles, DEFAULT_RANK_TOL};
use mgm_core::{GrassmannMetric, Matrix, Subspace};
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

fn dims() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..9).prop_flat_map(|n| (Just(n), 1..n, any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_choice_does_not_matter((n, r, seed) in dims()) {
        let mut g = rng(seed);
        let x = random_subspace(&mut g, n, r);
        let y = random_subspace(&mut g, n, r);
        let rot = random_orthogonal(&mut g, r);
        let x_rot = Subspace::from_orthonormal(x.basis() * rot).unwrap();
        for m in GrassmannMetric::ALL {
            let (Ok(a), Ok(b)) = (distance(&x, &y, m), distance(&x_rot, &y, m)) else { continue };
            prop_assert!((a - b).abs() <= 1e-9, "{m}: {a} vs {b}");
        }
    }

    #[test]
    fn orthogonal_maps_preserve_distances((n, r, seed) in dims()) {
        let mut g = rng(seed);
        let x = random_subspace(&mut g, n, r);
        let y = random_subspace(&mut g, n, r);
        let q = random_orthogonal(&mut g, n);
        let (qx, qy) = (x.transformed(&q).unwrap(), y.transformed(&q).unwrap());
        for m in GrassmannMetric::ALL {
            let (Ok(a), Ok(b)) = (distance(&x, &y, m), distance(&qx, &qy, m)) else { continue };
            prop_assert!((a - b).abs() <= 1e-9, "{m}: {a} vs {b}");
        }
    }

    #[test]
    fn symmetric_with_zero_self_distance((n, r, seed) in dims()) {
        let mut g = rng(seed);
        let x = random_subspace(&mut g, n, r);
        let y = random_subspace(&mut g, n, r);
        for m in GrassmannMetric::ALL {
            prop_assert!(distance(&x, &x, m).unwrap().abs() <= 1e-9);
            if let Ok(a) = distance(&x, &y, m) {
                prop_assert_eq!(a, distance(&y, &x, m).unwrap());
            }
        }
    }

    #[test]
    fn triangle_inequality_for_true_metrics((n, r, seed) in dims()) {
        let mut g = rng(seed);
        let x = random_subspace(&mut g, n, r);
        let y = random_subspace(&mut g, n, r);
        let z = random_subspace(&mut g, n, r);
        for m in [GrassmannMetric::Geodesic, GrassmannMetric::Chordal, GrassmannMetric::Procrustes] {
            let xy = distance(&x, &y, m).unwrap();
            let yz = distance(&y, &z, m).unwrap();
            let xz = distance(&x, &z, m).unwrap();
            prop_assert!(xz <= xy + yz + 1e-9, "{m}: {xz} > {xy} + {yz}");
        }
    }

    #[test]
    fn ordering_and_bounds((n, r, seed) in dims()) {
        let mut g = rng(seed);
        let x = random_subspace(&mut g, n, r);
        let y = random_subspace(&mut g, n, r);
        let chordal = distance(&x, &y, GrassmannMetric::Chordal).unwrap();
        let geodesic = distance(&x, &y, GrassmannMetric::Geodesic).unwrap();
        let m = r as f64;
        prop_assert!(chordal <= geodesic + 1e-12);
        prop_assert!(chordal <= m.sqrt() + 1e-12);
        prop_assert!(geodesic <= FRAC_PI_2 * m.sqrt() + 1e-12);
    }

    #[test]
    fn unequal_ranks_use_the_smaller_one((n, seed) in (3usize..9, any::<u64>())) {
        let mut g = rng(seed);
        let x = random_subspace(&mut g, n, 1);
        let y = random_subspace(&mut g, n, n - 1);
        let angles = principal_angles(&x, &y).unwrap();
        prop_assert_eq!(angles.len(), 1);
        let chordal = distance(&x, &y, GrassmannMetric::Chordal).unwrap();
        prop_assert!(chordal <= 1.0 + 1e-12);
    }

    #[test]
    fn projector_round_trip((n, r, seed) in dims()) {
        let mut g = rng(seed);
        let s = random_subspace(&mut g, n, r);
        let p = s.to_projector();
        prop_assert_eq!(p.rank(), r);
        let back = p.column_space(DEFAULT_RANK_TOL).unwrap();
        prop_assert_eq!(back.rank(), r);
        prop_assert!(back.to_projector().frobenius_distance(&p) <= 1e-10);
        let chordal = distance(&s, &back, GrassmannMetric::Chordal).unwrap();
        prop_assert!(chordal <= 1e-7);
    }

    #[test]
    fn angles_match_deflation_oracle((n, seed) in (2usize..7, any::<u64>()), r in 1usize..4) {
        let r = r.min(n);
        let mut g = rng(seed);
        let x = random_subspace(&mut g, n, r);
        let y = random_subspace(&mut g, n, r);
        let ours = principal_angles(&x, &y).unwrap();
        let oracle = principal_angles_oracle(x.basis(), y.basis());
        prop_assert_eq!(ours.len(), oracle.len());
        for (a, b) in ours.as_slice().iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn geodesic_splits_distance_proportionally((n, r, seed) in dims(), t in 0.0f64..=1.0) {
        let mut g = rng(seed);
        let x = random_subspace(&mut g, n, r);
        let y = random_subspace(&mut g, n, r);
        let Ok(mid) = geodesic_interpolate(&x, &y, t) else { return Ok(()) };
        let total = distance(&x, &y, GrassmannMetric::Geodesic).unwrap();
        let head = distance(&x, &mid, GrassmannMetric::Geodesic).unwrap();
        let tail = distance(&mid, &y, GrassmannMetric::Geodesic).unwrap();
        prop_assert!((head - t * total).abs() <= 1e-7, "{head} vs {}", t * total);
        prop_assert!((tail - (1.0 - t) * total).abs() <= 1e-7);
    }
}

#[test]
fn geodesic_endpoints_are_the_inputs() {
    let mut g = rng(11);
    let x = random_subspace(&mut g, 6, 2);
    let y = random_subspace(&mut g, 6, 2);
    let at0 = geodesic_interpolate(&x, &y, 0.0).unwrap();
    let at1 = geodesic_interpolate(&x, &y, 1.0).unwrap();
    assert!(at0.to_projector().frobenius_distance(&x.to_projector()) < 1e-10);
    assert!(at1.to_projector().frobenius_distance(&y.to_projector()) < 1e-10);
}

#[test]
fn planar_rotation_midpoint() {
    let x = Subspace::span_of(&Matrix::from_row_slice(2, 1, &[1.0, 0.0])).unwrap();
    let y = Subspace::span_of(&Matrix::from_row_slice(2, 1, &[0.6f64.cos(), 0.6f64.sin()])).unwrap();
    let mid = geodesic_interpolate(&x, &y, 0.5).unwrap();
    let expected = Subspace::span_of(&Matrix::from_row_slice(2, 1, &[0.3f64.cos(), 0.3f64.sin()])).unwrap();
    assert!(mid.to_projector().frobenius_distance(&expected.to_projector()) < 1e-12);
}

#[test]
fn span_ignores_column_scaling_and_mixing() {
    let mut g = rng(5);
    let z = gaussian_matrix(&mut g, 7, 3);
    let mix = Matrix::from_row_slice(3, 3, &[2.0, 0.1, 0.0, 0.0, 0.05, 0.4, 0.0, 0.0, 30.0]);
    let a = Subspace::span_of(&z).unwrap();
    let b = Subspace::span_of(&(&z * mix)).unwrap();
    assert!(a.to_projector().frobenius_distance(&b.to_projector()) < 1e-9);
}

#[test]
fn martin_rejects_orthogonal_directions() {
    let x = Subspace::span_of(&Matrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
    let y = Subspace::span_of(&Matrix::from_row_slice(3, 1, &[0.0, 1.0, 0.0])).unwrap();
    assert!(distance(&x, &y, GrassmannMetric::Martin).is_err());
    let fs = distance(&x, &y, GrassmannMetric::FubiniStudy).unwrap();
    assert!((fs - FRAC_PI_2).abs() < 1e-12);
}
