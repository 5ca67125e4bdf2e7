use std::sync::Arc;

use mpgfrft::compression::{compress_adapted, retained_count, truncate_top};
use mpgfrft::crypto::chaos::{invert_permutation, is_permutation};
use mpgfrft::crypto::{chaotic_permutation, dna_decode, dna_encode, dna_xor, ChaosKey};
use mpgfrft::graph::{build_random_sensor_graph, shift_operator, ShiftKind};
use mpgfrft::linalg::{max_abs_diff, random_signal, CMat, CVec};
use mpgfrft::spectral::{
    gft_basis, multipliers, FractionalOperator, OrderVector, SpectralBasis, TransformKind, DISTINCTNESS_TOL,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn basis(n: usize, seed: u64, shift: ShiftKind) -> Option<Arc<SpectralBasis>> {
    let g = build_random_sensor_graph(n, seed).ok()?;
    gft_basis(&shift_operator(&g, shift), DISTINCTNESS_TOL).ok().map(Arc::new)
}

fn vec_diff(a: &CVec, b: &CVec) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn shifts() -> impl Strategy<Value = ShiftKind> {
    prop_oneof![Just(ShiftKind::Laplacian), Just(ShiftKind::NormalizedLaplacian), Just(ShiftKind::Adjacency)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn type_i_is_unitary_and_additive(
        n in 3usize..16,
        seed in any::<u64>(),
        shift in shifts(),
        a in prop::collection::vec(-2.0f64..2.0, 16),
        b in prop::collection::vec(-2.0f64..2.0, 16),
    ) {
        let Some(basis) = basis(n, seed, shift) else { return Ok(()) };
        let a = OrderVector::new(a[..n].to_vec()).unwrap();
        let b = OrderVector::new(b[..n].to_vec()).unwrap();
        let fa = FractionalOperator::new(&basis, TransformKind::MpgfrftI, &a).unwrap();
        let fb = FractionalOperator::new(&basis, TransformKind::MpgfrftI, &b).unwrap();
        let fab = FractionalOperator::new(&basis, TransformKind::MpgfrftI, &a.add(&b).unwrap()).unwrap();
        let id = CMat::identity(n, n);
        prop_assert!(max_abs_diff(&(fa.matrix() * fa.matrix().adjoint()), &id) < 1e-8);
        prop_assert!(max_abs_diff(&(fa.matrix() * fb.matrix()), fab.matrix()) < 1e-8);
    }

    #[test]
    fn inverse_undoes_apply(
        n in 3usize..14,
        seed in any::<u64>(),
        a in prop::collection::vec(0.05f64..1.0, 14),
        kind in prop_oneof![Just(TransformKind::Gfrft), Just(TransformKind::MpgfrftI), Just(TransformKind::MpgfrftII)],
    ) {
        let Some(basis) = basis(n, seed, ShiftKind::Laplacian) else { return Ok(()) };
        let a = if kind == TransformKind::Gfrft { OrderVector::constant(n, a[0]) } else { OrderVector::new(a[..n].to_vec()).unwrap() };
        let Ok(op) = FractionalOperator::new(&basis, kind, &a) else { return Ok(()) };
        if op.conditioning_warning().is_some() {
            return Ok(());
        }
        let x = random_signal(n, seed ^ 1);
        let Ok(back) = op.inverse_apply(&op.apply(&x).unwrap()) else { return Ok(()) };
        prop_assert!(vec_diff(&back, &x) < 1e-6, "error {}", vec_diff(&back, &x));
    }

    #[test]
    fn integer_orders_are_powers_of_the_gft(n in 3usize..12, seed in any::<u64>(), k in 0u32..3) {
        let Some(basis) = basis(n, seed, ShiftKind::Laplacian) else { return Ok(()) };
        let mut pow = CMat::identity(n, n);
        for _ in 0..k {
            pow = basis.gft() * pow;
        }
        for kind in [TransformKind::MpgfrftI, TransformKind::MpgfrftII] {
            let op = FractionalOperator::new(&basis, kind, &OrderVector::constant(n, k as f64)).unwrap();
            prop_assert!(max_abs_diff(op.matrix(), &pow) < 1e-8);
        }
    }

    #[test]
    fn type_i_multipliers_stay_on_the_unit_circle(
        n in 3usize..16,
        seed in any::<u64>(),
        a in prop::collection::vec(-3.0f64..3.0, 16),
    ) {
        let Some(basis) = basis(n, seed, ShiftKind::NormalizedLaplacian) else { return Ok(()) };
        let m = multipliers(&basis, TransformKind::MpgfrftI, &OrderVector::new(a[..n].to_vec()).unwrap()).unwrap();
        for c in m.iter() {
            prop_assert!((c.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn adapted_compression_keeps_the_signal(
        re in prop::collection::vec(-5.0f64..5.0, 2..96),
        seed in any::<u64>(),
    ) {
        let x = CVec::from_iterator(re.len(), re.iter().map(|&v| Complex64::new(v, 0.5 * v.sin())));
        prop_assume!(re.iter().any(|&v| (v - re[0]).abs() > 1e-6));
        let (rec, rep) = compress_adapted(&x, 1.0 / x.len() as f64, seed).unwrap();
        prop_assert_eq!(rep.retained, 1);
        prop_assert!(vec_diff(&rec, &x) < 1e-9 * (1.0 + x.camax()));
    }

    #[test]
    fn constant_signals_are_rejected(v in -5.0f64..5.0, n in 1usize..20) {
        let x = CVec::from_element(n, Complex64::new(v, 0.0));
        prop_assert!(compress_adapted(&x, 0.5, 0).is_err());
    }

    #[test]
    fn truncation_keeps_the_largest(
        v in prop::collection::vec(-10.0f64..10.0, 1..64),
        r in 0.001f64..1.0,
    ) {
        let x = CVec::from_iterator(v.len(), v.iter().map(|&t| Complex64::new(t, 0.0)));
        let (kept, idx) = truncate_top(&x, r);
        prop_assert_eq!(idx.len(), retained_count(x.len(), r));
        let smallest_kept = idx.iter().map(|&i| x[i].norm()).fold(f64::INFINITY, f64::min);
        for i in 0..x.len() {
            if idx.contains(&i) {
                prop_assert_eq!(kept[i], x[i]);
            } else {
                prop_assert_eq!(kept[i], Complex64::new(0.0, 0.0));
                prop_assert!(x[i].norm() <= smallest_kept);
            }
        }
    }

    #[test]
    fn dna_coding_round_trips(bytes in prop::collection::vec(any::<u8>(), 0..64), mask in any::<u8>(), rule in 1u8..=8) {
        let enc = dna_encode(&bytes, rule).unwrap();
        prop_assert_eq!(enc.len(), 4 * bytes.len());
        prop_assert_eq!(dna_decode(&enc, rule).unwrap(), bytes.clone());
        let m = dna_encode(&vec![mask; bytes.len()], rule).unwrap();
        let xored = dna_xor(&enc, &m, rule).unwrap();
        let expect: Vec<u8> = bytes.iter().map(|b| b ^ mask).collect();
        prop_assert_eq!(dna_decode(&xored, rule).unwrap(), expect);
        prop_assert_eq!(dna_xor(&xored, &m, rule).unwrap(), enc);
    }

    #[test]
    fn chaotic_permutations_are_permutations(x0 in 0.01f64..0.49, eta in 3.58f64..4.0, n in 0usize..500) {
        let p = chaotic_permutation(&ChaosKey::new(x0, eta).unwrap(), n).unwrap();
        prop_assert!(is_permutation(&p));
        let inv = invert_permutation(&p);
        for (i, &j) in p.iter().enumerate() {
            prop_assert_eq!(inv[j], i);
        }
    }
}
