//! Saving and reloading configurations, model files and study files.

use spacing_lab::experiments::{load_configuration, save_configuration, StudyConfig};
use spacing_lab::sampling::sample_gue;
use spacing_lab::spacing::IntervalSpec;
use spacing_lab::Model;

fn main() -> spacing_lab::Result<()> {
    let dir = std::env::temp_dir().join("spacing-lab-persistence");
    std::fs::create_dir_all(&dir)?;

    let x = sample_gue(8, 42);
    let path = dir.join("gue.csv");
    save_configuration(&x, &path)?;
    assert_eq!(load_configuration(&path)?, x);
    println!("{}", std::fs::read_to_string(&path)?);

    let model = Model::parse("tag = repulsive\nQ.coeffs = 0,0,1\nh.gamma = -0.1\nh.width = 1\n")?;
    let model_path = dir.join("repulsive.model");
    std::fs::write(&model_path, model.to_file_string())?;
    assert_eq!(Model::load(&model_path)?, model);

    let mut study = StudyConfig::gue(vec![100, 200], vec![IntervalSpec::central_half(), IntervalSpec::Full], 50, 3);
    study.model = model;
    study.model_path = Some("repulsive.model".into());
    let study_path = dir.join("study.cfg");
    study.save(&study_path)?;
    assert_eq!(StudyConfig::load(&study_path)?, study);
    print!("{}", study.to_file_string());

    match load_configuration(dir.join("study.cfg")) {
        Err(e) => println!("loading a study file as a configuration fails: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
