use crate::ModelConfig;

/// Offsets of one block's tensors in the flat parameter vector. Matrices are
/// row-major `in x out`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerOffsets {
    pub ln1_g: usize,
    pub ln1_b: usize,
    pub wq: usize,
    pub wk: usize,
    pub wv: usize,
    pub wo: usize,
    pub ln2_g: usize,
    pub ln2_b: usize,
    pub w1: usize,
    pub b1: usize,
    pub w2: usize,
    pub b2: usize,
}

/// Tensor offsets in declaration order: token embedding, positional
/// embedding, blocks, final norm, decode matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub wte: usize,
    pub wpe: usize,
    pub layers: Vec<LayerOffsets>,
    pub lnf_g: usize,
    pub lnf_b: usize,
    pub wdec: usize,
    pub total: usize,
}

impl Layout {
    pub fn new(c: &ModelConfig) -> Self {
        let d = c.dim;
        let mut at = 0;
        let mut take = |n: usize| {
            let o = at;
            at += n;
            o
        };
        let wte = take(c.vocab_size * d);
        let wpe = take(c.max_len * d);
        let layers = (0..c.n_layers)
            .map(|_| LayerOffsets {
                ln1_g: take(d),
                ln1_b: take(d),
                wq: take(d * d),
                wk: take(d * d),
                wv: take(d * d),
                wo: take(d * d),
                ln2_g: take(d),
                ln2_b: take(d),
                w1: take(d * 4 * d),
                b1: take(4 * d),
                w2: take(4 * d * d),
                b2: take(d),
            })
            .collect();
        let lnf_g = take(d);
        let lnf_b = take(d);
        let wdec = take(d * c.vocab_size);
        Self {
            wte,
            wpe,
            layers,
            lnf_g,
            lnf_b,
            wdec,
            total: at,
        }
    }

    /// `(offset, len)` of every normalization gain, which starts at one.
    pub fn gains(&self, d: usize) -> Vec<(usize, usize)> {
        let mut g: Vec<(usize, usize)> = self.layers.iter().flat_map(|l| [(l.ln1_g, d), (l.ln2_g, d)]).collect();
        g.push((self.lnf_g, d));
        g
    }

    /// `(offset, len)` of every bias and normalization shift, which start at zero.
    pub fn shifts(&self, d: usize) -> Vec<(usize, usize)> {
        let mut s: Vec<(usize, usize)> = self
            .layers
            .iter()
            .flat_map(|l| [(l.ln1_b, d), (l.ln2_b, d), (l.b1, 4 * d), (l.b2, d)])
            .collect();
        s.push((self.lnf_b, d));
        s
    }
}
