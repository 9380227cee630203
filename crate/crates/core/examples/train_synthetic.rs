//! Trains BGCN on a synthetic dataset and reports test metrics alongside
//! the planted-affinity oracle.

use bgcn::data::{split, synth_generate, SplitSpec, SynthSpec};
use bgcn::eval::{evaluate, EvalOptions};
use bgcn::train::{freeze, train, train_graph, LogRecord, TrainConfig};

fn main() -> bgcn::Result<()> {
    let synth = synth_generate(&SynthSpec::default())?;
    let ds = &synth.dataset;
    let sp = split(ds, &SplitSpec::default())?;
    let cfg = TrainConfig {
        dim: 32,
        lr: 5e-3,
        lambda: 1e-4,
        batch_size: 256,
        patience: 10,
        max_epochs: 200,
        eval_ks: vec![5, 20],
        ..Default::default()
    };
    let out = train(&cfg, ds, &sp)?;
    for rec in &out.log.records {
        match rec {
            LogRecord::PhaseSwitch { epoch } => {
                println!("switched to hard negatives after epoch {epoch}")
            }
            LogRecord::Stop {
                epoch,
                reason,
                best_epoch,
            } => println!("stopped at epoch {epoch} ({reason}), best epoch {best_epoch:?}"),
            _ => {}
        }
    }
    println!(
        "status {:?}, best validation Recall@20 {:.4}",
        out.status,
        out.best_val_recall.unwrap_or(0.0)
    );

    let graph = train_graph(ds, &sp.train)?;
    let model = freeze(&out.model, &graph, &cfg)?;
    let exclude = sp.train.union(&sp.val);
    let opts = EvalOptions {
        ks: &[5, 20],
        ..Default::default()
    };
    println!(
        "BGCN\n{}",
        evaluate(&model, &sp.test, &exclude, opts)?.to_table()
    );
    println!(
        "oracle\n{}",
        evaluate(&synth.affinity, &sp.test, &exclude, opts)?.to_table()
    );
    Ok(())
}
