//! Writes scattering features to an on-disk store and reads back a
//! row/column slice.

use dtscatter::data::{synthetic_textures, FeatureStoreReader, Split};
use dtscatter::dtcwt::load_default_filters;
use dtscatter::pipeline::extract_to_store;
use dtscatter::scatter::{Extractor, Resolution, ScatterConfig};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.sctr");
    let config = ScatterConfig {
        resolutions: vec![Resolution::new(32, 3)],
        ..Default::default()
    };
    let extractor = Extractor::new(config, load_default_filters()).unwrap();
    let set = synthetic_textures(4, 5, 0.5, 0, Split::Train);
    let report = extract_to_store(&extractor, &set, None, &path).unwrap();
    println!("{} rows x {} dims, {:.2} ms per image", report.rows, report.dims, report.mean_image_seconds * 1e3);

    let mut reader = FeatureStoreReader::open(&path).unwrap();
    let h = reader.header().clone();
    println!("config hash {:016x}, log {}", h.config_hash, h.log_enabled());
    println!("labels {:?}", reader.labels().unwrap());
    let block = reader.read(Some(&[0, 7, 19]), Some(&[0, 1, 2, 3])).unwrap();
    println!("{block:.4}");
    println!("column 3 is {:?}", reader.layout()[3]);
}
