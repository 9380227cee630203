use bgcn::data::{
    checkpoint_size, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint,
    Checkpoint,
};
use bgcn::data::{split, synth_generate, SplitSpec, SynthSpec};
use bgcn::eval::Scorer;
use bgcn::model::{BgcnParams, MfParams, Parameters, TrainedModel};
use bgcn::train::{freeze, train_graph, TrainConfig};

#[test]
fn youshu_sized_checkpoint_has_exact_size() {
    let params = BgcnParams::init(8039, 4771, 32770, 64, 2, 0);
    let model = TrainedModel::Bgcn(params);
    // 12 header + tensor records (names, shapes, f32 data) + empty config record.
    assert_eq!(checkpoint_size(&model, ""), 11_735_309);
    let bytes = encode_checkpoint(&Checkpoint {
        model,
        config_echo: String::new(),
    });
    assert_eq!(bytes.len(), 11_735_309);
}

#[test]
fn roundtrip_preserves_scores() {
    let ds = synth_generate(&SynthSpec {
        users: 40,
        bundles: 30,
        items: 90,
        ..Default::default()
    })
    .unwrap()
    .dataset;
    let sp = split(&ds, &SplitSpec::default()).unwrap();
    let graph = train_graph(&ds, &sp.train).unwrap();
    for model_kind in ["bgcn", "mf"] {
        let mut cfg = TrainConfig {
            dim: 16,
            ..Default::default()
        };
        cfg.set("model", model_kind).unwrap();
        let model = match model_kind {
            "bgcn" => TrainedModel::Bgcn(BgcnParams::init(40, 30, 90, 16, 2, 3)),
            _ => TrainedModel::Mf(MfParams::init(40, 30, 16, 3)),
        };
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("c.ckpt");
        save_checkpoint(
            &Checkpoint {
                model: model.clone(),
                config_echo: cfg.to_kv_text(),
            },
            &path,
        )
        .unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(TrainConfig::from_kv_text(&back.config_echo).unwrap(), cfg);
        let a = freeze(&model, &graph, &cfg).unwrap();
        let b = freeze(&back.model, &graph, &cfg).unwrap();
        let (mut sa, mut sb) = (vec![0.0; 30], vec![0.0; 30]);
        for u in 0..40 {
            a.score_user(u, &mut sa);
            b.score_user(u, &mut sb);
            for (x, y) in sa.iter().zip(&sb) {
                assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{x} vs {y}");
            }
        }
        assert_eq!(encode_checkpoint(&back), std::fs::read(&path).unwrap());
    }
}

#[test]
fn every_truncation_is_rejected() {
    let model = TrainedModel::Bgcn(BgcnParams::init(3, 2, 4, 2, 1, 0));
    let bytes = encode_checkpoint(&Checkpoint {
        model,
        config_echo: "dim=2\n".into(),
    });
    for cut in 0..bytes.len() {
        assert!(
            decode_checkpoint(&bytes[..cut]).is_err(),
            "prefix {cut} accepted"
        );
    }
    assert!(decode_checkpoint(&bytes).is_ok());
}

#[test]
fn params_survive_f32_storage() {
    let p = BgcnParams::init(5, 4, 6, 3, 2, 11);
    let bytes = encode_checkpoint(&Checkpoint {
        model: TrainedModel::Bgcn(p.clone()),
        config_echo: String::new(),
    });
    let TrainedModel::Bgcn(q) = decode_checkpoint(&bytes).unwrap().model else {
        panic!("wrong kind")
    };
    for (a, b) in p.tensors().iter().zip(q.tensors()) {
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_eq!(*x as f32, *y as f32);
        }
    }
}
