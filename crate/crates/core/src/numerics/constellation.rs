use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square M-QAM with unit average energy and per-axis Gray labels.
///
/// Symbol index `k` encodes the pair of PAM level indices as
/// `k = re_index · √M + im_index`; both level lists are sorted ascending.
/// The label of a symbol is the Gray code of the real-axis index followed by
/// the Gray code of the imaginary-axis index.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    side: usize,
    bits_per_axis: u32,
    pam_levels: Vec<f64>,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn qam(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64 | 256) {
            return Err(Error::Config(format!("unsupported QAM order {order}; expected 4, 16, 64 or 256")));
        }
        let side = (order as f64).sqrt().round() as usize;
        // Odd-integer grid scaled so that mean |point|² = 2·mean(level²) = 1.
        let norm = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let pam_levels: Vec<f64> = (0..side)
            .map(|i| (2.0 * i as f64 - (side as f64 - 1.0)) / norm)
            .collect();
        let points = (0..order)
            .map(|k| Complex64::new(pam_levels[k / side], pam_levels[k % side]))
            .collect();
        Ok(Self {
            order,
            side,
            bits_per_axis: side.trailing_zeros(),
            pam_levels,
            points,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// √M, the number of PAM levels per axis.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn bits_per_symbol(&self) -> u32 {
        2 * self.bits_per_axis
    }

    pub fn pam_levels(&self) -> &[f64] {
        &self.pam_levels
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Symbol index from per-axis level indices.
    pub fn index_of(&self, re_index: usize, im_index: usize) -> usize {
        re_index * self.side + im_index
    }

    /// `(re_index, im_index)` of a symbol.
    pub fn axis_indices(&self, index: usize) -> (usize, usize) {
        (index / self.side, index % self.side)
    }

    /// Gray label of a symbol, real-axis bits in the high half.
    pub fn label(&self, index: usize) -> u32 {
        let (re, im) = self.axis_indices(index);
        (gray(re as u32) << self.bits_per_axis) | gray(im as u32)
    }

    /// Inverse of [`label`](Self::label).
    pub fn index_from_label(&self, label: u32) -> usize {
        let mask = (1u32 << self.bits_per_axis) - 1;
        let re = gray_inverse(label >> self.bits_per_axis);
        let im = gray_inverse(label & mask);
        self.index_of(re as usize, im as usize)
    }

    /// Number of label bits that differ between two symbols.
    pub fn bit_errors(&self, sent: usize, decided: usize) -> u32 {
        (self.label(sent) ^ self.label(decided)).count_ones()
    }
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: u32) -> u32 {
    let mut i = g;
    while g > 1 {
        g >>= 1;
        i ^= g;
    }
    i
}
