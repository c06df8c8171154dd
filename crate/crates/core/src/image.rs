use crate::dtcwt::Plane;

/// Multi-channel raster stored as one [`Plane`] per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    channels: Vec<Plane>,
}

impl ColorImage {
    /// Panics if the planes differ in shape or the list is empty.
    pub fn new(channels: Vec<Plane>) -> Self {
        assert!(!channels.is_empty(), "image needs at least one channel");
        let (h, w) = (channels[0].height(), channels[0].width());
        assert!(
            channels.iter().all(|p| p.height() == h && p.width() == w),
            "channel shapes differ"
        );
        ColorImage { channels }
    }

    /// Builds a `channels`-plane image from planar bytes scaled by 1/255.
    pub fn from_planar_bytes(height: usize, width: usize, channels: usize, bytes: &[u8]) -> Self {
        assert_eq!(bytes.len(), height * width * channels);
        let planes = bytes
            .chunks_exact(height * width)
            .map(|c| Plane::from_vec(height, width, c.iter().map(|&b| b as f64 / 255.0).collect()))
            .collect();
        ColorImage { channels: planes }
    }

    /// Grayscale plane replicated into `n` channels.
    pub fn replicate(plane: Plane, n: usize) -> Self {
        ColorImage {
            channels: vec![plane; n],
        }
    }

    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, c: usize) -> &Plane {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Plane] {
        &self.channels
    }
}
