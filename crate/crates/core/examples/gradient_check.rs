//! Compares the analytic gradient with central differences for every
//! ablation combination on the toy instance.

use bgcn::gradcheck::{gradcheck_suite, GRADCHECK_TOLERANCE};
use bgcn::model::AblationSwitches;

fn main() -> bgcn::Result<()> {
    let report = gradcheck_suite(0, &AblationSwitches::all(), false)?;
    print!("{}", report.to_table());
    println!(
        "max relative error {:.3e}, tolerance {GRADCHECK_TOLERANCE:e}, passed: {}",
        report.max_error(),
        report.passed()
    );

    // A deliberately broken gradient is caught.
    let broken = gradcheck_suite(0, &[AblationSwitches::default()], true)?;
    println!(
        "corrupted gradient max relative error {:.3e}, passed: {}",
        broken.max_error(),
        broken.passed()
    );
    Ok(())
}
