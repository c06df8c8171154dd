//! Per-stage cost of one scattering pass, the spatial first layer against a
//! per-band FFT filter bank, and per-resolution extraction time.

use dtscatter::dtcwt::load_default_filters;
use dtscatter::pipeline::bench::{
    bench_resolutions, bench_stages, compare_first_layer, resolutions_markdown, stages_markdown,
};
use dtscatter::scatter::{Resolution, ScatterConfig};

fn main() {
    let filters = load_default_filters();
    let config = ScatterConfig::default();
    let stages = bench_stages(&config, Resolution::new(64, 5), &filters, 20, 0).unwrap();
    print!("{}", stages_markdown("64x64, 5 levels", &stages));

    let (spatial, fft) = compare_first_layer(64, 5, &filters, 20, 0).unwrap();
    println!(
        "\nfirst layer: dtcwt {:.3} ms, fft per band {:.3} ms",
        spatial.mean_seconds * 1e3,
        fft.mean_seconds * 1e3
    );

    let timings = bench_resolutions(&config, &filters, 5, 3, 0).unwrap();
    print!("\n{}", resolutions_markdown(&timings));
}
