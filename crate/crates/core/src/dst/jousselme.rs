use std::sync::OnceLock;

use super::boe::BodyOfEvidence;
use super::frame::FrameOfDiscernment;
use super::DstError;

/// Frames up to this size get a dense cached matrix (4^M entries);
/// larger frames evaluate entries on demand.
const DENSE_LIMIT: usize = 8;

/// Jaccard similarity `|A∩B| / |A∪B|` between all pairs of subsets, with
/// the `∅/∅` entry set to 0.
#[derive(Debug)]
pub struct JaccardMatrix {
    size: usize,
    dense: Option<Vec<f64>>,
}

fn jaccard(a: usize, b: usize) -> f64 {
    let union = (a | b).count_ones();
    if union == 0 {
        0.0
    } else {
        (a & b).count_ones() as f64 / union as f64
    }
}

impl JaccardMatrix {
    /// Shared matrix for the frame, built once per frame size.
    pub fn for_frame(frame: &FrameOfDiscernment) -> &'static JaccardMatrix {
        static CACHE: [OnceLock<JaccardMatrix>; super::MAX_FRAME_SIZE + 1] =
            [const { OnceLock::new() }; super::MAX_FRAME_SIZE + 1];
        let size = frame.size();
        CACHE[size].get_or_init(|| JaccardMatrix::build(size))
    }

    fn build(size: usize) -> Self {
        let dense = (size <= DENSE_LIMIT).then(|| {
            let n = 1usize << size;
            let mut d = vec![0.0; n * n];
            for a in 0..n {
                for b in 0..n {
                    d[a * n + b] = jaccard(a, b);
                }
            }
            d
        });
        Self { size, dense }
    }

    pub fn dim(&self) -> usize {
        1 << self.size
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        match &self.dense {
            Some(d) => d[a * self.dim() + b],
            None => jaccard(a, b),
        }
    }

    /// `xᵀ D x`, skipping zero coordinates of `x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let support: Vec<(usize, f64)> = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        self.sparse_form(&support)
    }

    fn sparse_form(&self, support: &[(usize, f64)]) -> f64 {
        let mut total = 0.0;
        for &(a, xa) in support {
            let mut row = 0.0;
            for &(b, xb) in support {
                row += self.get(a, b) * xb;
            }
            total += xa * row;
        }
        total
    }
}

/// Frames up to `Θ = {θ1..θ4}` take a fixed-size dense path.
const SMALL_DIM: usize = 16;

/// Stack buffer size for the nonzero coordinates of a mass difference.
const STACK_SUPPORT: usize = 64;

/// `sqrt(0.5 (m1 − m2)ᵀ D (m1 − m2))`.
pub fn jousselme_distance(e1: &BodyOfEvidence, e2: &BodyOfEvidence) -> Result<f64, DstError> {
    if !e1.frame().same_as(e2.frame()) {
        return Err(DstError::FrameMismatch);
    }
    let d = JaccardMatrix::for_frame(e1.frame());
    if let Some(dense) = d.dense.as_deref().filter(|_| d.dim() <= SMALL_DIM) {
        let dim = d.dim();
        let mut support = [(0usize, 0.0f64); SMALL_DIM];
        let mut len = 0;
        for (k, (a, b)) in e1.masses().iter().zip(e2.masses()).enumerate() {
            if a != b {
                support[len] = (k, a - b);
                len += 1;
            }
        }
        let support = &support[..len];
        let mut total = 0.0;
        for &(a, xa) in support {
            let row = &dense[a * dim..(a + 1) * dim];
            total += xa * support.iter().map(|&(b, xb)| row[b] * xb).sum::<f64>();
        }
        return Ok((0.5 * total).max(0.0).sqrt());
    }
    let diffs = e1
        .masses()
        .iter()
        .zip(e2.masses())
        .enumerate()
        .map(|(i, (a, b))| (i, a - b))
        .filter(|(_, v)| *v != 0.0);
    // Opinions usually have few focal elements; avoid allocating for them.
    let mut buf = [(0usize, 0.0f64); STACK_SUPPORT];
    let mut len = 0;
    let mut spill = Vec::new();
    for entry in diffs {
        if len < STACK_SUPPORT {
            buf[len] = entry;
            len += 1;
        } else {
            if spill.is_empty() {
                spill.extend_from_slice(&buf);
            }
            spill.push(entry);
        }
    }
    let support = if spill.is_empty() {
        &buf[..len]
    } else {
        &spill[..]
    };
    Ok((0.5 * d.sparse_form(support)).max(0.0).sqrt())
}
