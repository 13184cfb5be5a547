//! Tabulates modulation coefficients and the resulting gradient scales as
//! the variance ratio moves away from the dependency ratio.

use arl::arl::{modulate_gradient, modulation_coefficients};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Modality 0 carries twice the true-class probability of modality 1.
    let d = [0.6, 0.3];
    println!("d ratio = {:.2}", d[0] / d[1]);
    println!("{:>8} {:>4} {:>8} {:>8} {:>10} {:>10}", "q ratio", "T", "a0", "a1", "scale0 GR", "scale0");
    for t in [1.0, 4.0, 8.0] {
        for q_ratio in [0.5, 1.0, 2.0, 4.0, 16.0] {
            let a = modulation_coefficients(&[q_ratio, 1.0], &d, t)?;
            println!(
                "{q_ratio:>8.2} {t:>4} {:>8.4} {:>8.4} {:>10.4} {:>10.4}",
                a[0],
                a[1],
                modulate_gradient(a[0], true)?,
                modulate_gradient(a[0], false)?
            );
        }
    }
    Ok(())
}
