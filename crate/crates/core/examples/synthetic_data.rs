//! Generates the imbalanced two-modality dataset, prints its shape, and
//! round-trips it through the CSV format.

use arl::data::{generate_synthetic, load_csv, write_csv, CsvSchema, SynthSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SynthSpec {
        num_classes: 4,
        samples_per_class: 200,
        feature_dims: vec![16, 16],
        noise: vec![0.3, 2.0],
        separation: 1.0,
        seed: 0,
    };
    let (train, test) = generate_synthetic(&spec)?;
    println!("train {} rows, test {} rows, dims {:?}", train.len(), test.len(), train.dims());
    println!("class counts: train {:?} test {:?}", train.class_counts(), test.class_counts());
    for k in 0..train.num_modalities() {
        let m = train.modality(k);
        let rms = (m.as_slice().iter().map(|v| v * v).sum::<f64>() / m.len() as f64).sqrt();
        println!("modality {k}: noise {} rms {rms:.3}", spec.noise[k]);
    }

    let dir = std::env::temp_dir().join("arl-synthetic-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("train.csv");
    write_csv(&path, &train)?;
    let back = load_csv(&path, &CsvSchema::for_dataset(&train))?;
    println!("csv round trip exact: {} ({})", back == train, path.display());
    Ok(())
}
