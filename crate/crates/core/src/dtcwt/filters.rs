//! Embedded filter tables for the dual-tree transform.
//!
//! Level 1 uses the near-symmetric 13/19-tap biorthogonal pair; levels 2 and
//! above use the 14-tap quarter-shift pair. Tree-b Q-shift filters are the
//! time reverses of the tree-a filters, which gives the half-sample delay
//! between the trees.
//!
//! The Q-shift table is the published 14-tap `qshift_b` lowpass projected
//! onto the nearest filter that is exactly orthonormal under even shifts
//! and has an exact zero at Nyquist (largest tap change 1.3e-7). The
//! published values leave a DC leak of about 9e-7 in the highpass.

/// Real analysis and synthesis filters for both trees.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSet {
    /// Level-1 analysis lowpass (shared by both trees, 13 taps).
    pub level1_lowpass: Vec<f64>,
    /// Level-1 analysis highpass (19 taps).
    pub level1_highpass: Vec<f64>,
    /// Level-1 synthesis lowpass (19 taps).
    pub level1_synth_lowpass: Vec<f64>,
    /// Level-1 synthesis highpass (13 taps).
    pub level1_synth_highpass: Vec<f64>,
    pub qshift_lowpass_a: Vec<f64>,
    pub qshift_lowpass_b: Vec<f64>,
    pub qshift_highpass_a: Vec<f64>,
    pub qshift_highpass_b: Vec<f64>,
    pub qshift_synth_lowpass_a: Vec<f64>,
    pub qshift_synth_lowpass_b: Vec<f64>,
    pub qshift_synth_highpass_a: Vec<f64>,
    pub qshift_synth_highpass_b: Vec<f64>,
}

impl FilterSet {
    /// Tree-a level-1 lowpass. At level 1 the trees share filters and differ
    /// only by the odd/even sample split.
    pub fn level1_lowpass_a(&self) -> &[f64] {
        &self.level1_lowpass
    }

    pub fn level1_lowpass_b(&self) -> &[f64] {
        &self.level1_lowpass
    }

    pub fn level1_highpass_a(&self) -> &[f64] {
        &self.level1_highpass
    }

    pub fn level1_highpass_b(&self) -> &[f64] {
        &self.level1_highpass
    }
}

impl Default for FilterSet {
    fn default() -> Self {
        load_default_filters()
    }
}

const NEAR_SYM_B_H0: [f64; 13] = [
    -0.0017578125,
    0.0,
    0.022265625,
    -0.046875,
    -0.0482421875,
    0.296875,
    0.55546875,
    0.296875,
    -0.0482421875,
    -0.046875,
    0.022265625,
    0.0,
    -0.0017578125,
];

const NEAR_SYM_B_G0: [f64; 19] = [
    7.062639508928571e-05,
    0.0,
    -0.0013419015066964285,
    -0.0018833705357142855,
    0.007156808035714285,
    0.023856026785714284,
    -0.05564313616071428,
    -0.05168805803571428,
    0.29975760323660716,
    0.5594308035714286,
    0.29975760323660716,
    -0.05168805803571428,
    -0.05564313616071428,
    0.023856026785714284,
    0.007156808035714285,
    -0.0018833705357142855,
    -0.0013419015066964285,
    0.0,
    7.062639508928571e-05,
];

const QSHIFT_B_H0A: [f64; 14] = [
    0.0032531314539378485,
    -0.0038832003841907654,
    0.03466023000825229,
    -0.03887268833066862,
    -0.11720401465701727,
    0.27529548310269075,
    0.7561455337234387,
    0.568810532359082,
    0.01186597400431464,
    -0.10671169218758102,
    0.023825382688208774,
    0.017025223370035186,
    -0.0054394560345875365,
    -0.004556876742820043,
];

/// Alternating-sign modulation `(-1)^n h[n]`.
fn modulate(h: &[f64]) -> Vec<f64> {
    h.iter()
        .enumerate()
        .map(|(n, &v)| if n % 2 == 0 { v } else { -v })
        .collect()
}

fn reversed(h: &[f64]) -> Vec<f64> {
    h.iter().rev().copied().collect()
}

/// Returns the near_sym_b / qshift_b filter set.
pub fn load_default_filters() -> FilterSet {
    let h0o = NEAR_SYM_B_H0.to_vec();
    let g0o = NEAR_SYM_B_G0.to_vec();
    // h1o and g1o are the quadrature mirrors of the opposite lowpass.
    let h1o: Vec<f64> = NEAR_SYM_B_G0
        .iter()
        .enumerate()
        .map(|(n, &v)| if (n + 1) % 2 == 0 { v } else { -v })
        .collect();
    let g1o: Vec<f64> = NEAR_SYM_B_H0
        .iter()
        .enumerate()
        .map(|(n, &v)| if n % 2 == 0 { v } else { -v })
        .collect();

    let h0a = QSHIFT_B_H0A.to_vec();
    let h0b = reversed(&h0a);
    let h1a = modulate(&h0b);
    let h1b = reversed(&h1a);

    FilterSet {
        level1_lowpass: h0o,
        level1_highpass: h1o,
        level1_synth_lowpass: g0o,
        level1_synth_highpass: g1o,
        qshift_synth_lowpass_a: h0b.clone(),
        qshift_synth_lowpass_b: h0a.clone(),
        qshift_synth_highpass_a: h1b.clone(),
        qshift_synth_highpass_b: h1a.clone(),
        qshift_lowpass_a: h0a,
        qshift_lowpass_b: h0b,
        qshift_highpass_a: h1a,
        qshift_highpass_b: h1b,
    }
}
