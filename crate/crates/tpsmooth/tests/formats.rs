//! Round trips and malformed-input behaviour of the binary readers.

use proptest::prelude::*;
use tpsmooth::io::{flo, pgm, tpsm, FormatError};
use tpsmooth_core::{FlowField, GrayFrame, Mask, ScalarField};

fn sample_tpsm() -> Vec<u8> {
    let a = ScalarField::from_fn(3, 2, |x, y| (x + 3 * y) as f64 / 6.0).unwrap();
    let b = ScalarField::filled(3, 2, 0.125).unwrap();
    tpsm::encode(&[a, b])
}

fn sample_flo() -> Vec<u8> {
    flo::encode(&FlowField::from_fn(3, 2, |x, y| (x as f64 - 1.5, y as f64 * 0.25)).unwrap())
}

fn sample_pgm() -> Vec<u8> {
    pgm::encode_frame(&GrayFrame::from_fn(4, 3, |x, y| (x * 40 + y * 7) as f64).unwrap())
}

#[test]
fn truncation_at_every_offset_is_an_error() {
    for (name, bytes) in [("tpsm", sample_tpsm()), ("flo", sample_flo()), ("pgm", sample_pgm())] {
        for cut in 0..bytes.len() {
            let prefix = &bytes[..cut];
            let result = match name {
                "tpsm" => tpsm::decode(prefix).map(|_| ()),
                "flo" => flo::decode(prefix).map(|_| ()),
                _ => pgm::decode(prefix).map(|_| ()),
            };
            assert!(result.is_err(), "{name} accepted a {cut}-byte prefix");
        }
    }
}

#[test]
fn truncated_payload_reports_offset() {
    let bytes = sample_tpsm();
    assert_eq!(tpsm::decode(&bytes[..30]), Err(FormatError::Truncated { offset: 30, needed: 38 }));
    let bytes = sample_flo();
    assert!(matches!(flo::decode(&bytes[..5]), Err(FormatError::Truncated { offset: 5, .. })));
}

#[test]
fn sizes_follow_the_header() {
    assert_eq!(sample_tpsm().len(), tpsm::file_len(3, 2, 2));
    assert_eq!(sample_flo().len(), flo::file_len(3, 2));
    assert_eq!(tpsm::encode(&[ScalarField::filled(1, 1, 0.5).unwrap()]).len(), 24);
    assert_eq!(flo::encode(&FlowField::zeros(1, 1).unwrap()).len(), 20);
}

#[test]
fn magic_errors() {
    let mut bytes = sample_tpsm();
    bytes[..4].copy_from_slice(b"XPSM");
    assert_eq!(tpsm::decode(&bytes), Err(FormatError::BadMagic { offset: 0, expected: "TPSM" }));
}

fn unit_f32() -> impl Strategy<Value = f64> {
    (0u32..=1 << 24).prop_map(|k| (k as f32 / (1u32 << 24) as f32) as f64)
}

proptest! {
    #[test]
    fn tpsm_round_trip_is_bit_exact(w in 1usize..6, h in 1usize..6, k in 1usize..4, seed in proptest::collection::vec(unit_f32(), 108)) {
        let planes: Vec<ScalarField> = (0..k)
            .map(|o| ScalarField::probability(w, h, (0..w * h).map(|i| seed[(o * 36 + i) % seed.len()]).collect()).unwrap())
            .collect();
        let bytes = tpsm::encode(&planes);
        let back = tpsm::decode(&bytes).unwrap();
        prop_assert_eq!(&back, &planes);
        prop_assert_eq!(tpsm::encode(&back), bytes);
    }

    #[test]
    fn flo_round_trip_is_bit_exact(w in 1usize..6, h in 1usize..6, vals in proptest::collection::vec(-1e4f32..1e4, 72)) {
        let u: Vec<f64> = (0..w * h).map(|i| vals[i] as f64).collect();
        let v: Vec<f64> = (0..w * h).map(|i| vals[36 + i] as f64).collect();
        let f = FlowField::new(w, h, u, v).unwrap();
        let bytes = flo::encode(&f);
        prop_assert_eq!(flo::decode(&bytes).unwrap(), f);
    }

    #[test]
    fn pgm_round_trips(w in 1usize..8, h in 1usize..8, px in proptest::collection::vec(any::<u8>(), 64), bits in proptest::collection::vec(any::<bool>(), 64)) {
        let img = pgm::Gray8 { width: w, height: h, pixels: px[..w * h].to_vec() };
        prop_assert_eq!(pgm::decode(&pgm::encode(&img)).unwrap(), img);
        let mask = Mask::new(w, h, bits[..w * h].to_vec()).unwrap();
        prop_assert_eq!(pgm::decode_mask(&pgm::encode_mask(&mask)).unwrap(), mask);
    }

    #[test]
    fn corrupted_bytes_never_panic(pos in 0usize..64, byte in any::<u8>(), which in 0usize..3) {
        let mut bytes = [sample_tpsm(), sample_flo(), sample_pgm()][which].clone();
        let i = pos % bytes.len();
        bytes[i] = byte;
        let _ = tpsm::decode(&bytes);
        let _ = flo::decode(&bytes);
        let _ = pgm::decode(&bytes);
        let _ = pgm::decode_mask(&bytes);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        let _ = tpsm::decode(&bytes);
        let _ = flo::decode(&bytes);
        let _ = pgm::decode(&bytes);
    }
}
