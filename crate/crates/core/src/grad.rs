//! Gradient bookkeeping shared by the filtration families and the losses.
//!
//! A [`GradTape`] records, for each output coordinate of a forward pass (one
//! per cell, or one per vertex for weight functions), the sparse list of
//! parameter derivatives at the current point. Max-type constructions record
//! exactly one generating argmax, so a tape entry is a handful of pairs.

/// Sparse per-output parameter derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GradTape {
    entries: Vec<Vec<(usize, f64)>>,
    n_params: usize,
}

impl GradTape {
    pub fn new(n_outputs: usize, n_params: usize) -> Self {
        GradTape {
            entries: vec![Vec::new(); n_outputs],
            n_params,
        }
    }

    pub fn set(&mut self, output: usize, entry: Vec<(usize, f64)>) {
        debug_assert!(entry.iter().all(|&(p, _)| p < self.n_params));
        self.entries[output] = entry;
    }

    pub fn entry(&self, output: usize) -> &[(usize, f64)] {
        &self.entries[output]
    }

    /// Number of outputs this tape covers.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Add `scale` times output `output`'s derivative into `out`.
    pub fn accumulate(&self, output: usize, scale: f64, out: &mut [f64]) {
        for &(p, c) in &self.entries[output] {
            out[p] += scale * c;
        }
    }

    /// Chain this tape through `inner`: every parameter index of `self` is an
    /// output index of `inner`, and the result maps straight to `inner`'s
    /// parameters.
    pub fn compose(&self, inner: &GradTape) -> GradTape {
        assert_eq!(
            self.n_params,
            inner.len(),
            "outer tape parameters must match inner tape outputs"
        );
        let mut out = GradTape::new(self.len(), inner.n_params());
        for (i, entry) in self.entries.iter().enumerate() {
            let mut chained: Vec<(usize, f64)> = Vec::new();
            for &(mid, c) in entry {
                for &(p, ci) in inner.entry(mid) {
                    merge_term(&mut chained, p, c * ci);
                }
            }
            out.entries[i] = chained;
        }
        out
    }

    /// Chain only the parameter indices at or above `split` through `inner`;
    /// indices below `split` pass through unchanged. Used when a family's
    /// parameter vector is a direct concatenation and the tail block is itself
    /// a differentiable function of the head block.
    pub fn compose_suffix(&self, split: usize, inner: &GradTape) -> GradTape {
        assert_eq!(self.n_params, split + inner.len());
        assert_eq!(inner.n_params(), split);
        let mut out = GradTape::new(self.len(), split);
        for (i, entry) in self.entries.iter().enumerate() {
            let mut chained: Vec<(usize, f64)> = Vec::new();
            for &(p, c) in entry {
                if p < split {
                    merge_term(&mut chained, p, c);
                } else {
                    for &(q, ci) in inner.entry(p - split) {
                        merge_term(&mut chained, q, c * ci);
                    }
                }
            }
            out.entries[i] = chained;
        }
        out
    }
}

fn merge_term(entry: &mut Vec<(usize, f64)>, p: usize, c: f64) {
    match entry.iter_mut().find(|(q, _)| *q == p) {
        Some((_, acc)) => *acc += c,
        None => entry.push((p, c)),
    }
}

/// Per-point gradients with respect to diagram coordinates, shaped like the
/// diagram they were computed from: one (d/d birth, d/d death) pair per
/// regular point and one d/d birth per essential point, per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramGrad {
    pub regular: Vec<Vec<(f64, f64)>>,
    pub essential: Vec<Vec<f64>>,
}

impl DiagramGrad {
    pub fn empty() -> Self {
        DiagramGrad {
            regular: Vec::new(),
            essential: Vec::new(),
        }
    }

    pub fn zeros(regular_counts: &[usize], essential_counts: &[usize]) -> Self {
        DiagramGrad {
            regular: regular_counts.iter().map(|&n| vec![(0.0, 0.0); n]).collect(),
            essential: essential_counts.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for dim in &mut self.regular {
            for (b, d) in dim.iter_mut() {
                *b *= s;
                *d *= s;
            }
        }
        for dim in &mut self.essential {
            for b in dim.iter_mut() {
                *b *= s;
            }
        }
    }

    pub fn add_scaled(&mut self, other: &DiagramGrad, s: f64) {
        assert_eq!(self.regular.len(), other.regular.len());
        assert_eq!(self.essential.len(), other.essential.len());
        for (mine, theirs) in self.regular.iter_mut().zip(&other.regular) {
            assert_eq!(mine.len(), theirs.len());
            for ((b, d), (ob, od)) in mine.iter_mut().zip(theirs) {
                *b += s * ob;
                *d += s * od;
            }
        }
        for (mine, theirs) in self.essential.iter_mut().zip(&other.essential) {
            assert_eq!(mine.len(), theirs.len());
            for (b, ob) in mine.iter_mut().zip(theirs) {
                *b += s * ob;
            }
        }
    }
}
