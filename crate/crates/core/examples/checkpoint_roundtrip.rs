//! Saves a trained model, reloads it and confirms the scores survive.

use bgcn::data::{
    checkpoint_size, load_checkpoint, save_checkpoint, split, synth_generate, Checkpoint,
    SplitSpec, SynthSpec,
};
use bgcn::eval::Scorer;
use bgcn::train::{freeze, train, train_graph, TrainConfig};

fn main() -> bgcn::Result<()> {
    let ds = synth_generate(&SynthSpec {
        users: 80,
        bundles: 40,
        items: 200,
        ..Default::default()
    })?
    .dataset;
    let sp = split(&ds, &SplitSpec::default())?;
    let cfg = TrainConfig {
        dim: 16,
        max_epochs: 5,
        ..Default::default()
    };
    let out = train(&cfg, &ds, &sp)?;

    let path = std::env::temp_dir().join("bgcn-example.ckpt");
    let ckpt = Checkpoint {
        model: out.model,
        config_echo: cfg.to_kv_text(),
    };
    save_checkpoint(&ckpt, &path)?;
    let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!(
        "wrote {} ({size} bytes, expected {})",
        path.display(),
        checkpoint_size(&ckpt.model, &ckpt.config_echo)
    );

    let back = load_checkpoint(&path)?;
    let cfg_back = TrainConfig::from_kv_text(&back.config_echo)?;
    let graph = train_graph(&ds, &sp.train)?;
    let a = freeze(&ckpt.model, &graph, &cfg)?;
    let b = freeze(&back.model, &graph, &cfg_back)?;
    let mut worst: f64 = 0.0;
    let (mut sa, mut sb) = (vec![0.0; ds.num_bundles], vec![0.0; ds.num_bundles]);
    for u in 0..ds.num_users {
        a.score_user(u, &mut sa);
        b.score_user(u, &mut sb);
        worst = sa
            .iter()
            .zip(&sb)
            .fold(worst, |w, (x, y)| w.max((x - y).abs()));
    }
    println!("tensors {:?}", back.model.tensor_names());
    println!("max score difference after reload {worst:.2e}");
    Ok(())
}
