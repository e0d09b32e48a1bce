use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use pao_core::estimator::{init, step, Mode, SystemModel};
use pao_core::imaging::{
    apply_speckle, convolve, directional_smooth, salt_pepper, sobel, ImageBuffer, Kernel, SpeckleParams,
};
use pao_core::interfaces::{c2q, equalize, q2c, round_levels, ControlLoopConfig, Equalizer, InterfaceConfig, OseConfig};
use pao_core::measurement::{
    density_matrix, measure_with_noise, outcome_probability, post_measurement_state, MeasurementOperator, NoiseSpec,
};
use pao_core::metrics::{mad, msd, MetricReport, Pcqr};
use pao_core::pao::{pao_and, pao_not, pao_or, q_sub, Domain, PaoKey};
use pao_core::qstate::{
    classical_convert, decode_gray, encode_gray, unitary_from_hamiltonian, Hamiltonian, QuditVector, QubitState,
};
use pao_core::rng::{stream, Purpose};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qubit() -> impl Strategy<Value = QubitState> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU)
        .prop_map(|(theta, phi)| QubitState::from_bloch_angles(theta, phi).unwrap())
}

fn gray_image(max_side: usize) -> impl Strategy<Value = ImageBuffer> {
    (1..=max_side, 1..=max_side, prop_oneof![Just(1usize), Just(3usize)]).prop_flat_map(|(r, c, ch)| {
        prop::collection::vec(0u16..=255, r * c * ch).prop_map(move |d| ImageBuffer::new(r, c, ch, 8, d).unwrap())
    })
}

fn image_pair(max_side: usize) -> impl Strategy<Value = (ImageBuffer, ImageBuffer)> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(r, c)| {
        let plane = move || prop::collection::vec(0u16..=255, r * c).prop_map(move |d| ImageBuffer::new(r, c, 1, 8, d).unwrap());
        (plane(), plane())
    })
}

fn complex_vec(n: usize) -> impl Strategy<Value = DVector<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| {
            let d = DVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| c(a, b)));
            let n = d.norm();
            d / c(n, 0.0)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bloch_states_are_normalized(s in qubit()) {
        prop_assert!((s.alpha().norm_sqr() + s.beta().norm_sqr() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn classical_converter_is_an_involution(bits in 1u32..=8, x in 0u32..256) {
        let x = f64::from(x % (1 << bits));
        let once = classical_convert(x, bits).unwrap();
        prop_assert_eq!(classical_convert(once, bits).unwrap(), x);
    }

    #[test]
    fn gray_encoding_round_trips(bits in 1u32..=8, g in 0u32..256) {
        let g = g % (1 << bits);
        prop_assert_eq!(decode_gray(&encode_gray(g, bits).unwrap(), bits).unwrap(), g);
    }

    #[test]
    fn hamiltonian_evolution_keeps_norm(
        diag in prop::collection::vec(-3.0..3.0f64, 2),
        off in (-2.0..2.0f64, -2.0..2.0f64),
        t in -5.0..5.0f64,
        psi in complex_vec(2),
    ) {
        let h = DMatrix::from_row_slice(2, 2, &[c(diag[0], 0.0), c(off.0, off.1), c(off.0, -off.1), c(diag[1], 0.0)]);
        let u = unitary_from_hamiltonian(&Hamiltonian::natural(h).unwrap(), t);
        let state = QuditVector::new(1, psi).unwrap();
        prop_assert!((state.evolve(&u).unwrap().norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn logic_keys_form_a_lattice(a in qubit(), b in qubit()) {
        let mu = |s: &QubitState| PaoKey::of(s).mu();
        prop_assert_eq!(mu(&pao_and(&a, &b)), mu(&a).min(mu(&b)));
        prop_assert_eq!(mu(&pao_or(&a, &b)), mu(&a).max(mu(&b)));
        prop_assert_eq!(mu(&pao_and(&a, &b)), mu(&pao_and(&b, &a)));
        prop_assert_eq!(mu(&pao_or(&a, &b)), mu(&pao_or(&b, &a)));
        prop_assert_eq!(pao_and(&a, &a), a);
        prop_assert_eq!(pao_or(&a, &a), a);
        prop_assert_eq!(pao_not(&pao_not(&a)), a);
    }

    #[test]
    fn subtraction_domains_are_negatives(a in qubit(), b in qubit()) {
        let psi = q_sub(&a, &b, Domain::Psi);
        let mu = q_sub(&a, &b, Domain::Mu);
        // exact on dyadic inputs; lifting through 1 - x costs a rounding step otherwise
        for (p, m) in psi.components().iter().zip(mu.components()) {
            prop_assert!((*p + *m).norm() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn probabilities_of_complete_sets_sum_to_one(psi in complex_vec(4), k in 0usize..4) {
        let ops: Vec<_> = (0..4).map(|i| MeasurementOperator::basis_projector(4, i, format!("e{i}"))).collect();
        let total: f64 = ops.iter().map(|op| outcome_probability(&psi, op).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
        if outcome_probability(&psi, &ops[k]).unwrap() > 1e-12 {
            let post = post_measurement_state(&psi, &ops[k]).unwrap();
            prop_assert!((post.norm() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn density_matrices_have_unit_trace(
        states in prop::collection::vec(complex_vec(2), 1..5),
        weights in prop::collection::vec(0.01..1.0f64, 5),
    ) {
        let total: f64 = weights[..states.len()].iter().sum();
        let ensemble: Vec<_> = states.iter().zip(&weights).map(|(s, w)| (w / total, s.clone())).collect();
        let rho = density_matrix(&ensemble).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() <= 1e-10);
        prop_assert!(rho.eigenvalues().iter().all(|&e| e >= -1e-10));
    }

    #[test]
    fn noiseless_measurement_is_linear_map(x in prop::collection::vec(-10.0..10.0f64, 3), m in prop::collection::vec(-2.0..2.0f64, 6)) {
        let x = DVector::from_vec(x);
        let m = DMatrix::from_row_slice(2, 3, &m);
        let y = measure_with_noise(&x, &m, &NoiseSpec::zero(3, 2), &mut stream(0, Purpose::MeasurementNoise, 0, 0)).unwrap();
        prop_assert_eq!(y, &m * &x);
    }

    #[test]
    fn covariance_stays_symmetric(
        a in prop::collection::vec(-1.0..1.0f64, 9),
        ys in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 3), 1..20),
        noisy in any::<bool>(),
    ) {
        let a = DMatrix::from_row_slice(3, 3, &a) * 0.5 + DMatrix::identity(3, 3);
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.0, 1.0, 0.3, 0.1, 0.0, 1.0]);
        let mut model = SystemModel::new(a, m, 0.98, 50.0).unwrap();
        if noisy {
            model = model.with_noise(NoiseSpec::new(DMatrix::identity(3, 3) * 1e-3, DMatrix::identity(3, 3) * 1e-2, 0).unwrap()).unwrap();
        }
        let mut est = init(&model, DVector::zeros(3)).unwrap();
        for y in ys {
            est = step(&est, &model, &DVector::from_vec(y)).unwrap().0;
            prop_assert!((&est.p - est.p.transpose()).norm() <= 1e-8);
        }
    }

    #[test]
    fn equalize_is_monotone_and_in_range(values in prop::collection::vec(-500.0..800.0f64, 1..64), bits in 1u32..=8) {
        for eq in [Equalizer::AffineMinMax, Equalizer::IdentityClamp] {
            let out = equalize(&values, bits, eq).unwrap();
            let unit = f64::from((1u32 << bits) - 1);
            prop_assert!(out.iter().all(|&v| (0.0..=unit).contains(&v)));
            let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(out.iter().copied()).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            prop_assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
        }
    }

    #[test]
    fn round_levels_is_idempotent(levels in prop::collection::vec(0u16..=255, 1..64)) {
        let as_f64: Vec<f64> = levels.iter().map(|&v| f64::from(v)).collect();
        prop_assert_eq!(round_levels(&as_f64, 8).unwrap(), levels);
    }

    #[test]
    fn convolution_is_linear((a, b) in image_pair(10), s in -3.0..3.0f64, t in -3.0..3.0f64, w in prop::collection::vec(-2.0..2.0f64, 9)) {
        let k = Kernel::new(3, w).unwrap();
        let ca = convolve(&a, &k).unwrap();
        let cb = convolve(&b, &k).unwrap();
        let mixed = a.to_raster().with_data(
            a.data().iter().zip(b.data()).map(|(&x, &y)| s * f64::from(x) + t * f64::from(y)).collect(),
        ).unwrap();
        let cm = pao_core::imaging::convolve_raster(&mixed, &k).unwrap();
        for ((m, x), y) in cm.data().iter().zip(ca.data()).zip(cb.data()) {
            prop_assert!((m - (s * x + t * y)).abs() <= 1e-9);
        }
    }

    #[test]
    fn sobel_is_non_negative(img in gray_image(12).prop_filter("gray", |i| i.channels() == 1)) {
        prop_assert!(sobel(&img).unwrap().magnitude.data().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn smoothing_fixes_flat_images(img in gray_image(12), window in prop_oneof![Just(3usize), Just(5), Just(7)]) {
        let out = directional_smooth(&img, window).unwrap();
        prop_assert_eq!(out.data().len(), img.data().len());
        let flat = ImageBuffer::filled(img.rows(), img.cols(), img.channels(), 8, img.data()[0]).unwrap();
        prop_assert_eq!(directional_smooth(&flat, window).unwrap(), flat);
    }

    #[test]
    fn noise_identities(img in gray_image(10), seed in any::<u64>()) {
        prop_assert_eq!(&apply_speckle(&img, &SpeckleParams::from_variance(0.0).unwrap(), seed).unwrap(), &img);
        prop_assert_eq!(&salt_pepper(&img, 0.0, seed).unwrap(), &img);
    }

    #[test]
    fn metric_identities((a, b) in image_pair(12)) {
        prop_assert_eq!(mad(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(msd(&a, &a).unwrap(), 0.0);
        let (m, s) = (mad(&a, &b).unwrap(), msd(&a, &b).unwrap());
        prop_assert_eq!(m, mad(&b, &a).unwrap());
        prop_assert_eq!(s, msd(&b, &a).unwrap());
        prop_assert!(m * m <= s * (1.0 + 1e-12));
        let r = MetricReport::compute(&a, &b, None).unwrap();
        if let Pcqr::Finite(db) = r.pcqr {
            let back = r.max_ref * r.max_ref / 10f64.powf(db / 10.0);
            prop_assert!((back - r.msd).abs() <= 1e-9 * r.msd);
        } else {
            prop_assert_eq!(r.msd, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_noise_round_trip(img in gray_image(8), mode in prop_oneof![Just(Mode::I), Just(Mode::II)]) {
        let iface = InterfaceConfig::new(8, mode).unwrap();
        let ose = OseConfig::noiseless();
        let (q, _) = c2q(&img, &ControlLoopConfig::default(), &iface, &ose).unwrap();
        prop_assert_eq!(q2c(&q, &ose, &iface).unwrap(), img);
    }
}
