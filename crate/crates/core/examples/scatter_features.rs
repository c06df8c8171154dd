//! Scattering features of one colour image under the default configuration,
//! broken down by resolution and layer.

use dtscatter::data::{synthetic_textures, Split};
use dtscatter::dtcwt::load_default_filters;
use dtscatter::scatter::{Extractor, ScatterConfig};
use std::collections::BTreeMap;
use std::time::Instant;

fn main() {
    let config = ScatterConfig::default();
    println!("{}", config.to_toml());
    let extractor = Extractor::new(config, load_default_filters()).expect("valid config");
    let image = synthetic_textures(1, 1, 0.5, 0, Split::Train).image(0);

    let t = Instant::now();
    let features = extractor.extract(&image).expect("extraction");
    println!("{} features in {:.1} ms", features.values.len(), t.elapsed().as_secs_f64() * 1e3);

    let mut counts: BTreeMap<(u8, u8), usize> = BTreeMap::new();
    for d in features.index_map.iter() {
        *counts.entry((d.resolution, d.layer)).or_default() += 1;
    }
    for ((res, layer), n) in counts {
        println!("resolution {res} layer {layer}: {n}");
    }
    let logged = features.index_map.iter().filter(|d| d.log_applied).count();
    println!("features on a logged path: {logged}");
}
