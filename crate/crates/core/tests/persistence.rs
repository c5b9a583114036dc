use proptest::prelude::*;
use std::path::{Path, PathBuf};
use trashwatch::data::{decode_ppm, encode_ppm, parse_annotation, serialize_annotation, Image};
use trashwatch::detector::{BBox, Detection};
use trashwatch::netcore::checkpoint::{decode_checkpoint, encode_checkpoint};
use trashwatch::netcore::{load_checkpoint, save_checkpoint, ArchSpec, ModelKind, Network, NetError};
use trashwatch::pipeline::{DetectionRecord, EventRecord, EventState};

fn bits(net: &Network<f32>) -> Vec<u32> {
    net.convs()
        .flat_map(|c| {
            [&c.weight.value, &c.bias.value, &c.weight.momentum, &c.bias.momentum]
                .into_iter()
                .flat_map(|t| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>())
        })
        .collect()
}

#[test]
fn checkpoint_round_trip_is_bitwise() {
    for kind in [ModelKind::Default, ModelKind::Improved] {
        let spec = ArchSpec::scaled(kind, 64, 8, 8, 5);
        let mut net = Network::<f32>::new(&spec, 21).unwrap();
        // Non-trivial momentum and a few special values.
        for (i, conv) in net.convs_mut().enumerate() {
            for (j, m) in conv.weight.momentum.data_mut().iter_mut().enumerate() {
                *m = (i * 31 + j) as f32 * 1e-7;
            }
            conv.bias.value.data_mut()[0] = -0.0;
        }
        net.convs_mut().next().unwrap().weight.value.data_mut()[1] = f32::MIN_POSITIVE / 4.0;
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("model.ckpt");
        save_checkpoint(&net, 1234, &path).unwrap();
        let (back, it) = load_checkpoint(&path, &spec).unwrap();
        assert_eq!(it, 1234);
        assert_eq!(bits(&back), bits(&net));
        assert_eq!(encode_checkpoint(&back, it), std::fs::read(&path).unwrap());
    }
}

#[test]
fn checkpoint_rejects_other_architecture_and_damage() {
    let small = ArchSpec::scaled(ModelKind::Default, 64, 8, 8, 5);
    let other = ArchSpec::scaled(ModelKind::Improved, 64, 8, 8, 5);
    let net = Network::<f32>::new(&small, 1).unwrap();
    let bytes = encode_checkpoint(&net, 7);
    let p = Path::new("x.ckpt");
    assert!(matches!(decode_checkpoint(&bytes, &other, p), Err(NetError::CheckpointLayerCount { .. })));
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(decode_checkpoint(&extra, &small, p), Err(NetError::TrailingBytes { extra: 1, .. })));
    assert!(decode_checkpoint(&bytes[..bytes.len() - 3], &small, p).is_err());
    assert!(matches!(decode_checkpoint(b"nope", &small, p), Err(NetError::BadMagic { .. })));
}

fn arb_box() -> impl Strategy<Value = BBox> {
    (0.0..=1.0f64, 0.0..=1.0f64, 1e-6..=1.0f64, 1e-6..=1.0f64, 0..8usize)
        .prop_map(|(cx, cy, w, h, c)| BBox::new(cx, cy, w, h, c))
}

proptest! {
    #[test]
    fn ppm_round_trip(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
        let pixels: Vec<u8> = (0..w * h * 3).map(|i| (seed.wrapping_mul(i as u64 + 1) >> 13) as u8).collect();
        let img = Image::new(w, h, pixels).unwrap();
        let bytes = encode_ppm(&img);
        let back = decode_ppm(&bytes).unwrap();
        prop_assert_eq!(&back, &img);
        prop_assert_eq!(encode_ppm(&back), bytes);
    }

    #[test]
    fn annotation_round_trip(boxes in proptest::collection::vec(arb_box(), 0..12)) {
        let text = serialize_annotation(&boxes);
        let back = parse_annotation(&text, &PathBuf::from("a.txt"), 8).unwrap();
        prop_assert_eq!(&back, &boxes);
        prop_assert_eq!(serialize_annotation(&back), text);
    }

    #[test]
    fn event_line_round_trip(
        boxes in proptest::collection::vec(arb_box(), 0..5),
        scores in proptest::collection::vec(0.0..=1.0f64, 5),
        id in 1u64..1000,
        frame in 0u64..100_000,
        state in prop_oneof![
            Just(EventState::Recording),
            Just(EventState::Complete),
            Just(EventState::Partial),
            Just(EventState::Failed),
        ],
    ) {
        let names: Vec<String> = (0..8).map(|c| format!("c{c}")).collect();
        let rec = EventRecord {
            event_id: id,
            trigger_frame: frame,
            time: frame as f64,
            detections: boxes
                .iter()
                .zip(&scores)
                .map(|(b, &score)| DetectionRecord::new(&Detection { bbox: *b, score }, &names))
                .collect(),
            clip_dir: PathBuf::from(format!("clips/event-{id}")),
            state,
        };
        let line = rec.to_line();
        prop_assert!(!line.contains('\n'));
        let back = EventRecord::parse_line(&line, 8).unwrap();
        prop_assert_eq!(&back, &rec);
        prop_assert_eq!(back.to_line(), line);
    }
}
