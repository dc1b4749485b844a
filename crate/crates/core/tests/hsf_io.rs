use proptest::prelude::*;
use tipcast_core::hsf::{parse_hsf, read_hsf, write_hsf};
use tipcast_core::{Group, Label, LabeledStateSet};

fn label_strategy() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::A), Just(Label::B), Just(Label::D), Just(Label::C)]
}

prop_compose! {
    fn state_set()(dim in 1usize..5, layers in 1usize..4, n_groups in 0usize..4)
        (groups in proptest::collection::vec(
            (label_strategy(), "[a-z ]{0,12}", 1usize..4, proptest::collection::vec(-1e6f32..1e6f32, 48)),
            n_groups),
         dim in Just(dim), layers in Just(layers))
        -> LabeledStateSet
    {
        let groups = groups
            .into_iter()
            .map(|(label, phrase, tokens, pool)| {
                let n = layers * tokens * dim;
                let data = pool.iter().cycle().take(n).copied().collect();
                Group::new(label, phrase, layers, tokens, dim, data).unwrap()
            })
            .collect();
        LabeledStateSet::with_groups(dim, layers, groups).unwrap()
    }
}

proptest! {
    #[test]
    fn round_trip_is_exact(set in state_set()) {
        let mut bytes = Vec::new();
        let written = write_hsf(&set, &mut bytes).unwrap();
        prop_assert_eq!(written as usize, bytes.len());
        let back = parse_hsf(&bytes).unwrap();
        prop_assert_eq!(&back, &set);
        for (a, b) in back.groups().iter().zip(set.groups()) {
            let bits_a: Vec<u32> = a.data().iter().map(|v| v.to_bits()).collect();
            let bits_b: Vec<u32> = b.data().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(bits_a, bits_b);
        }
        let mut again = Vec::new();
        write_hsf(&back, &mut again).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn truncation_is_always_an_error(set in state_set(), cut in 1usize..64) {
        let mut bytes = Vec::new();
        write_hsf(&set, &mut bytes).unwrap();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(parse_hsf(&bytes[..keep]).is_err());
    }
}

#[test]
fn reader_accepts_streams() {
    let g = Group::new(Label::B, "x", 1, 1, 2, vec![1.0, 2.0]).unwrap();
    let set = LabeledStateSet::with_groups(2, 1, vec![g]).unwrap();
    let mut bytes = Vec::new();
    let n = write_hsf(&set, &mut bytes).unwrap();
    let header_len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as u64;
    assert_eq!(n, 4 + 4 + header_len + 8);
    assert_eq!(read_hsf(std::io::Cursor::new(bytes)).unwrap(), set);
}

#[test]
fn large_fixture_data_size() {
    // 65 tokens over 37 residual entries at width 5120.
    let (layers, dim) = (37, 5120);
    let groups = [(Label::C, 5), (Label::B, 31), (Label::D, 29)]
        .into_iter()
        .map(|(label, tokens)| Group::new(label, "", layers, tokens, dim, vec![0.5; layers * tokens * dim]).unwrap())
        .collect();
    let set = LabeledStateSet::with_groups(dim, layers, groups).unwrap();
    assert_eq!(set.data_bytes(), 49_254_400);
    let mut header_probe = Vec::new();
    let total = write_hsf(&set, &mut header_probe).unwrap();
    let header_len = u32::from_le_bytes(header_probe[4..8].try_into().unwrap()) as u64;
    assert_eq!(total - 8 - header_len, 49_254_400);
}
