use std::sync::Arc;

use proptest::prelude::*;

use lifted_tfhe::bootstrap::{pattern_indicator, RotationMode};
use lifted_tfhe::analysis::{pipeline_makespan, PipelineModel};
use lifted_tfhe::codec;
use lifted_tfhe::keys::SecretKeys;
use lifted_tfhe::lattice::{gadget_decompose, lwe_encrypt_torus, lwe_phase, LweCiphertext};
use lifted_tfhe::netlist::{format_bits, parse_bits, Netlist};
use lifted_tfhe::rng::DetRng;
use lifted_tfhe::torus::{round_to_2n, schoolbook_negacyclic_mul};
use lifted_tfhe::transform::{build_twiddle_table, Backend, DyadicTwiddleTable, IntegerTransform, LiftKernel, TransformCounters};
use lifted_tfhe::{IntPolynomial, ParameterSet, Torus, TorusPolynomial};

fn torus() -> impl Strategy<Value = Torus> {
    any::<u32>().prop_map(Torus)
}

fn ring_degree() -> impl Strategy<Value = usize> {
    (3u32..=8).prop_map(|l| 1usize << l)
}

fn int_poly(n: usize, bound: i32) -> impl Strategy<Value = IntPolynomial> {
    prop::collection::vec(-bound..=bound, n).prop_map(|coeffs| IntPolynomial { coeffs })
}

fn torus_poly(n: usize) -> impl Strategy<Value = TorusPolynomial> {
    prop::collection::vec(any::<u32>(), n).prop_map(|raw| TorusPolynomial::from_raw(&raw))
}

/// `X · a` by shifting with the negacyclic sign fold.
fn times_x(a: &IntPolynomial) -> IntPolynomial {
    let n = a.coeffs.len();
    let mut out = IntPolynomial::zero(n);
    out.coeffs[0] = -a.coeffs[n - 1];
    out.coeffs[1..].copy_from_slice(&a.coeffs[..n - 1]);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn torus_ring_identities(a in torus(), b in torus(), c in torus(), k in any::<i32>()) {
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!(a + b, b + a);
        prop_assert_eq!(a - b + b, a);
        prop_assert_eq!(a + (-a), Torus(0));
        prop_assert_eq!((a + b) * k, a * k + b * k);
    }

    #[test]
    fn round_to_2n_is_monotone(n in ring_degree(), x in any::<u32>(), y in any::<u32>()) {
        let shift = 32 - (2 * n).trailing_zeros();
        let top = u32::MAX - (1 << (shift - 1));
        let (lo, hi) = (x.min(y).min(top), x.max(y).min(top));
        prop_assert!(round_to_2n(Torus(lo), n) <= round_to_2n(Torus(hi), n));
        prop_assert!(round_to_2n(Torus(x), n) < 2 * n);
    }

    #[test]
    fn schoolbook_commutes_with_x(a in int_poly(64, 512), b in torus_poly(64)) {
        let left = schoolbook_negacyclic_mul(&times_x(&a), &b).unwrap();
        let right = schoolbook_negacyclic_mul(&a, &b).unwrap().mul_monomial(1);
        prop_assert_eq!(left, right);
    }

    #[test]
    fn gadget_recomposition_bound(x in torus(), bg in 1u32..=16, l in 1usize..=8) {
        prop_assume!(bg as usize * l <= 32);
        let p = TorusPolynomial { coeffs: vec![x] };
        let digits = gadget_decompose(&p, bg, l);
        let mut back = Torus(0);
        for (j, d) in digits.iter().enumerate() {
            let v = d.coeffs[0];
            prop_assert!(v > -(1 << (bg - 1)) && v <= 1 << (bg - 1), "digit {} out of range", v);
            back += Torus(1u32.wrapping_shl(32 - bg * (j as u32 + 1))) * v;
        }
        let err = (x - back).signed() as i64;
        let total = bg as usize * l;
        let bound = if total >= 32 { 0 } else { 1i64 << (31 - total) };
        prop_assert!(err.abs() <= bound, "error {} over bound {}", err, bound);
    }

    #[test]
    fn pattern_indicators_are_exclusive(m in 1usize..=5, raw in any::<u8>()) {
        let bits: Vec<u8> = (0..m).map(|j| raw >> j & 1).collect();
        let ones: usize = (1..1usize << m).map(|p| pattern_indicator(p, &bits) as usize).sum();
        let all_zero = bits.iter().all(|&b| b == 0);
        prop_assert_eq!(ones, if all_zero { 0 } else { 1 });
    }

    #[test]
    fn makespan_pipelined_never_slower(g in 1usize..5000, tb in 1e-3f64..1e6, te in 1e-3f64..1e6) {
        let p = pipeline_makespan(&PipelineModel::new(g, tb, te, RotationMode::Pipelined).unwrap());
        let s = pipeline_makespan(&PipelineModel::new(g, tb, te, RotationMode::Sequential).unwrap());
        prop_assert!(p <= s * (1.0 + 1e-12));
        if g == 1 {
            prop_assert!((p - s).abs() <= 1e-9 * s);
        } else {
            prop_assert!(p < s);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifting_round_trip_is_exact(n in ring_degree(), beta in 4u32..=64, seed in any::<u64>(), scale in 0u32..=20) {
        let t = IntegerTransform::new(Arc::new(build_twiddle_table(n, beta).unwrap()), LiftKernel::ShiftAdd);
        let mut rng = DetRng::new(seed);
        let bound_log = 60 - n.trailing_zeros() - scale - 1;
        let coeffs: Vec<i64> = (0..n).map(|_| (rng.next_u64() >> (64 - bound_log)) as i64 - (1i64 << (bound_log - 1))).collect();
        let mut c = TransformCounters::default();
        let back = t.inverse_coeffs(&t.forward_coeffs(&coeffs, scale, &mut c), &mut c);
        prop_assert_eq!(back, coeffs.iter().map(|v| v << scale).collect::<Vec<_>>());
    }

    #[test]
    fn lifting_kernels_are_equivalent(n in ring_degree(), beta in 4u32..=64, seed in any::<u64>()) {
        let table = Arc::new(build_twiddle_table(n, beta).unwrap());
        let a = IntegerTransform::new(table.clone(), LiftKernel::ShiftAdd);
        let b = IntegerTransform::new(table, LiftKernel::WideMul);
        let mut rng = DetRng::new(seed);
        let coeffs: Vec<i64> = (0..n).map(|_| rng.range_i32(-(1 << 20), 1 << 20) as i64).collect();
        let mut c = TransformCounters::default();
        let (fa, fb) = (a.forward_coeffs(&coeffs, 8, &mut c), b.forward_coeffs(&coeffs, 8, &mut c));
        prop_assert_eq!(&fa, &fb);
        prop_assert_eq!(a.inverse_coeffs(&fa, &mut c), b.inverse_coeffs(&fb, &mut c));
    }

    #[test]
    fn reference_product_matches_schoolbook(a in int_poly(64, 512), b in torus_poly(64)) {
        let backend = Backend::reference(64);
        let got = backend.multiply(&a, 9, &b, &mut TransformCounters::default()).unwrap();
        prop_assert_eq!(got, schoolbook_negacyclic_mul(&a, &b).unwrap());
    }

    #[test]
    fn lwe_phase_is_additive(seed in any::<u64>(), n in 1usize..64, mu1 in torus(), mu2 in torus()) {
        let mut rng = DetRng::new(seed);
        let key: Vec<u8> = (0..n).map(|_| rng.bit()).collect();
        let c1 = lwe_encrypt_torus(mu1, &key, 2f64.powi(-15), &mut rng);
        let c2 = lwe_encrypt_torus(mu2, &key, 2f64.powi(-15), &mut rng);
        let mut sum = c1.clone();
        sum.add_assign(&c2).unwrap();
        prop_assert_eq!(lwe_phase(&sum, &key).unwrap(), lwe_phase(&c1, &key).unwrap() + lwe_phase(&c2, &key).unwrap());
    }

    #[test]
    fn twiddle_table_encoding_round_trips(n in ring_degree(), beta in 4u32..=64) {
        let t = build_twiddle_table(n, beta).unwrap();
        prop_assert_eq!(DyadicTwiddleTable::decode(&t.encode()).unwrap(), t);
    }

    #[test]
    fn params_text_round_trips(m in 1usize..=3, beta in prop::sample::select(vec![24u32, 32, 38, 64]), noise_log in 2i32..=30) {
        let mut p = ParameterSet::default().with_unroll(m).unwrap().with_beta(beta).unwrap();
        p.lwe_noise_stddev = 2f64.powi(-noise_log);
        prop_assert_eq!(ParameterSet::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn lwe_list_codec_round_trips(seed in any::<u64>(), n in 1usize..40, count in 0usize..6) {
        let p = ParameterSet::toy(n, 16);
        let mut rng = DetRng::new(seed);
        let cts: Vec<LweCiphertext> = (0..count)
            .map(|_| {
                let mut c = LweCiphertext::zero(n);
                rng.fill_uniform(&mut c.mask);
                c.body = rng.uniform_torus();
                c
            })
            .collect();
        let bytes = codec::encode_lwe_list(&p, &cts).unwrap();
        prop_assert_eq!(codec::decode_lwe_list(&bytes).unwrap(), (p.clone(), cts));
        for cut in [0, 3, bytes.len() / 2, bytes.len().saturating_sub(1)] {
            prop_assert!(codec::decode_lwe_list(&bytes[..cut]).is_err());
        }
    }

    #[test]
    fn secret_key_codec_round_trips(seed in any::<u64>(), n in 1usize..40) {
        let p = ParameterSet::toy(n, 16);
        let mut rng = DetRng::new(seed);
        let lwe = (0..n).map(|_| rng.bit()).collect();
        let trlwe = vec![(0..16).map(|_| rng.bit()).collect()];
        let sk = SecretKeys::from_bits(lwe, trlwe);
        prop_assert_eq!(codec::decode_secret_keys(&codec::encode_secret_keys(&p, &sk)).unwrap(), (p, sk));
    }

    #[test]
    fn decoders_reject_garbage_without_panicking(bytes in prop::collection::vec(any::<u8>(), 0..256), tglw in any::<bool>()) {
        let mut bytes = bytes;
        if tglw && bytes.len() >= 4 {
            bytes[..4].copy_from_slice(codec::MAGIC);
        }
        let _ = codec::peek_header(&bytes);
        let _ = codec::decode_secret_keys(&bytes);
        let _ = codec::decode_cloud_keys(&bytes);
        let _ = codec::decode_lwe_list(&bytes);
        let _ = DyadicTwiddleTable::decode(&bytes);
    }

    #[test]
    fn netlist_text_round_trips(seed in any::<u64>(), inputs in 1usize..6, gates in 0usize..=16) {
        let mut rng = DetRng::new(seed);
        let n = Netlist::random(&mut rng, inputs, gates);
        let back = Netlist::parse(&n.to_text()).unwrap();
        prop_assert_eq!(&back, &n);
        let bits: Vec<u8> = (0..inputs).map(|_| rng.bit()).collect();
        prop_assert_eq!(back.eval_plain(&bits).unwrap(), n.eval_plain(&bits).unwrap());
        for level in n.levels().windows(2) {
            prop_assert!(!level[0].is_empty() && !level[1].is_empty());
        }
    }

    #[test]
    fn text_parsers_never_panic(text in "[A-Za-z0-9=(),# \n\t-]{0,200}") {
        let _ = Netlist::parse(&text);
        let _ = parse_bits(&text);
        let _ = ParameterSet::parse(&text);
    }

    #[test]
    fn bits_file_round_trips(rows in prop::collection::vec(prop::collection::vec(0u8..=1, 1..12), 0..8)) {
        prop_assert_eq!(parse_bits(&format_bits(&rows)).unwrap(), rows);
    }
}
