//! Greedy orthogonal least squares on a matrix where a few columns carry the
//! class signal and the rest are noise.

use dtscatter::featsel::{ols_select, select_all_classes, IndicatorTarget};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (rows, dims, classes) = (300, 40, 3u16);
    let labels: Vec<u16> = (0..rows).map(|i| (i % classes as usize) as u16).collect();
    let mut x = Array2::from_shape_fn((rows, dims), |_| StandardNormal.sample(&mut rng));
    // columns 5, 17 and 29 each light up for one class
    for (i, &y) in labels.iter().enumerate() {
        x[[i, 5 + 12 * y as usize]] += 2.0;
    }

    let target = IndicatorTarget::new(&labels, 1).unwrap();
    let one = ols_select(x.view(), &target, 4).unwrap();
    println!("class 1 picks {:?}", one.indices);
    let rss: Vec<String> = one.residuals.iter().map(|r| format!("{r:.1}")).collect();
    println!("residuals {}", rss.join(" -> "));

    let all = select_all_classes(x.view(), &labels, 3).unwrap();
    println!("union {:?}", all.union);
    println!("feature richness {:.3}", all.feature_richness());
    print!("{}", all.to_text());
}
