use hfce::channel::{far_steering, los_gain, near_steering, CMatrix};
use hfce::config::{AbsorptionTable, SystemConfig};
use hfce::omp::{omp_sensing, OmpOptions};
use hfce::tensor_io::ComplexTensor;
use num_complex::{Complex32, Complex64};
use proptest::prelude::*;

fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
        .prop_map(move |v| CMatrix::from_iterator(rows, cols, v.into_iter().map(|(re, im)| Complex64::new(re, im))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn far_steering_has_unit_norm(theta in 1e-3f64..(std::f64::consts::PI - 1e-3), n in 1usize..300, s in 0.05f64..2.0) {
        let a = far_steering(theta, n, s).unwrap();
        prop_assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn near_steering_has_unit_norm(
        theta in 1e-3f64..(std::f64::consts::PI - 1e-3),
        n in 1usize..300,
        r in 0.5f64..1e4,
    ) {
        let cfg = SystemConfig { n_antennas: n, ..SystemConfig::desk() };
        let b = near_steering(theta, r, n, cfg.spacing_m(), cfg.wavelength_m()).unwrap();
        prop_assert!((b.norm() - 1.0).abs() < 1e-12);
        prop_assert!((b[0] - Complex64::from(1.0 / (n as f64).sqrt())).norm() < 1e-12);
    }

    #[test]
    fn los_gain_decreases_with_range(r in 1.0f64..500.0, extra in 0.01f64..100.0, k in 0.0f64..0.05) {
        let table = AbsorptionTable::constant(k);
        let near = los_gain(100e9, r, &table, 0.0).unwrap().norm();
        let far = los_gain(100e9, r + extra, &table, 0.0).unwrap().norm();
        prop_assert!(far < near);
    }

    #[test]
    fn omp_residuals_monotone_and_support_grows(
        a in complex_matrix(12, 24),
        y in complex_matrix(12, 3),
        t in 1usize..=12,
    ) {
        let est = omp_sensing(&y, &a, OmpOptions::new(t)).unwrap();
        prop_assert_eq!(est.support.len(), t);
        prop_assert_eq!(est.residual_norms.len(), t);
        let mut seen = std::collections::HashSet::new();
        for k in &est.support {
            prop_assert!(seen.insert(*k), "index {} selected twice", k);
        }
        let mut prev = y.norm();
        for &r in &est.residual_norms {
            prop_assert!(r <= prev * (1.0 + 1e-10) + 1e-12, "{} > {}", r, prev);
            prev = r;
        }
        for row in 0..est.coeffs_polar.nrows() {
            if !est.support.contains(&row) {
                prop_assert!(est.coeffs_polar.row(row).iter().all(|c| *c == Complex64::from(0.0)));
            }
        }
    }

    #[test]
    fn hfct_round_trip_is_bit_exact(
        dims in prop::collection::vec(1usize..5, 1..4),
        seed in any::<u64>(),
    ) {
        let count: usize = dims.iter().product();
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 32) as u32
        };
        let data: Vec<Complex32> = (0..count)
            .map(|_| Complex32::new(f32::from_bits(next()), f32::from_bits(next())))
            .collect();
        let t = ComplexTensor::new(dims, data).unwrap();
        let back = ComplexTensor::decode(&t.encode()).unwrap();
        prop_assert_eq!(back.dims(), t.dims());
        for (a, b) in back.data().iter().zip(t.data()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn hfct_decoder_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let _ = ComplexTensor::decode(&bytes);
    }
}
