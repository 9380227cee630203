//! Generates a planted synthetic dataset, writes it to a temp directory
//! and reloads it.

use bgcn::data::{load_dataset, save_dataset, synth_generate, write_affinity, SynthSpec};

fn main() -> bgcn::Result<()> {
    let spec = SynthSpec::from_kv_text("users=100\nbundles=50\nitems=250\nnoise=0.05\nseed=3\n")?;
    let synth = synth_generate(&spec)?;
    println!("{}", synth.dataset.stats());

    let dir = std::env::temp_dir().join("bgcn-synth-example");
    save_dataset(&synth.dataset, &dir)?;
    write_affinity(&synth, &dir.join("affinity.txt"))?;
    let back = load_dataset(&dir)?;
    println!("reloaded from {}: {}", dir.display(), back.stats());
    for (file, sum) in &back
        .provenance
        .as_ref()
        .expect("loaded from disk")
        .checksums
    {
        println!("  {file} sha256 {sum}");
    }
    Ok(())
}
