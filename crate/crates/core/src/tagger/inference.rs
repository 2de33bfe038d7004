//! Exact linear-chain inference over a potential table.
//!
//! All recursions run in log space. The forward and backward passes factor
//! `exp(transition)` out of the inner sum so that each step costs `L`
//! exponentials instead of `L^2`; a cell whose scaled sum underflows is
//! recomputed with a plain log-sum-exp.

/// Log-space scores for one sentence: `unary[i * labels + l]` and
/// `transition[prev * labels + cur]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potentials {
    len: usize,
    labels: usize,
    unary: Vec<f64>,
    transition: Vec<f64>,
}

impl Potentials {
    pub fn new(len: usize, labels: usize, unary: Vec<f64>, transition: Vec<f64>) -> Self {
        assert!(labels > 0, "at least one label");
        assert_eq!(unary.len(), len * labels, "unary table is len x labels");
        assert_eq!(transition.len(), labels * labels, "transition table is labels x labels");
        Potentials {
            len,
            labels,
            unary,
            transition,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_labels(&self) -> usize {
        self.labels
    }

    #[inline]
    pub fn unary(&self, i: usize, label: usize) -> f64 {
        self.unary[i * self.labels + label]
    }

    #[inline]
    pub fn transition(&self, prev: usize, cur: usize) -> f64 {
        self.transition[prev * self.labels + cur]
    }

    pub fn unary_table(&self) -> &[f64] {
        &self.unary
    }

    pub fn transition_table(&self) -> &[f64] {
        &self.transition
    }

    /// Unnormalized log score of a complete label path.
    pub fn path_score(&self, path: &[usize]) -> f64 {
        assert_eq!(path.len(), self.len);
        let mut score = 0.0;
        for (i, &l) in path.iter().enumerate() {
            score += self.unary(i, l);
            if i > 0 {
                score += self.transition(path[i - 1], l);
            }
        }
        score
    }
}

pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Column-shifted `exp(transition)`: `exp(T[p][c] - shift[c])`.
fn scaled_transitions(p: &Potentials) -> (Vec<f64>, Vec<f64>) {
    let l = p.labels;
    let shift: Vec<f64> = (0..l)
        .map(|c| (0..l).map(|q| p.transition(q, c)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut scaled = vec![0.0; l * l];
    for q in 0..l {
        for c in 0..l {
            scaled[q * l + c] = (p.transition(q, c) - shift[c]).exp();
        }
    }
    (scaled, shift)
}

/// Forward table `alpha[i * L + l]`: log-sum of all prefixes ending in `l`.
pub fn forward(p: &Potentials) -> Vec<f64> {
    let (n, l) = (p.len, p.labels);
    let mut alpha = vec![0.0; n * l];
    if n == 0 {
        return alpha;
    }
    alpha[..l].copy_from_slice(&p.unary[..l]);
    let (exp_t, shift) = scaled_transitions(p);
    let mut scaled_prev = vec![0.0; l];
    for i in 1..n {
        let (done, rest) = alpha.split_at_mut(i * l);
        let prev = &done[(i - 1) * l..];
        let max = prev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (s, &a) in scaled_prev.iter_mut().zip(prev) {
            *s = (a - max).exp();
        }
        for c in 0..l {
            let mut acc = 0.0;
            for q in 0..l {
                acc += scaled_prev[q] * exp_t[q * l + c];
            }
            let value = if acc > 0.0 && acc.is_finite() {
                max + shift[c] + acc.ln()
            } else {
                log_sum_exp((0..l).map(|q| prev[q] + p.transition(q, c)))
            };
            rest[c] = value + p.unary(i, c);
        }
    }
    alpha
}

/// Backward table `beta[i * L + l]`: log-sum of all suffixes after `l` at `i`.
pub fn backward(p: &Potentials) -> Vec<f64> {
    let (n, l) = (p.len, p.labels);
    let mut beta = vec![0.0; n * l];
    if n == 0 {
        return beta;
    }
    // row shift for the transposed direction
    let shift: Vec<f64> = (0..l)
        .map(|q| (0..l).map(|c| p.transition(q, c)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let exp_t: Vec<f64> = (0..l * l)
        .map(|k| (p.transition[k] - shift[k / l]).exp())
        .collect();
    let mut next_scaled = vec![0.0; l];
    let mut next_raw = vec![0.0; l];
    for i in (0..n - 1).rev() {
        for c in 0..l {
            next_raw[c] = p.unary(i + 1, c) + beta[(i + 1) * l + c];
        }
        let max = next_raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (s, &v) in next_scaled.iter_mut().zip(&next_raw) {
            *s = (v - max).exp();
        }
        for q in 0..l {
            let mut acc = 0.0;
            for c in 0..l {
                acc += exp_t[q * l + c] * next_scaled[c];
            }
            beta[i * l + q] = if acc > 0.0 && acc.is_finite() {
                max + shift[q] + acc.ln()
            } else {
                log_sum_exp((0..l).map(|c| p.transition(q, c) + next_raw[c]))
            };
        }
    }
    beta
}

/// `log Z`: log of the summed exponentiated scores of every label path.
pub fn forward_log_partition(p: &Potentials) -> f64 {
    if p.len == 0 {
        return 0.0;
    }
    let alpha = forward(p);
    let l = p.labels;
    log_sum_exp(alpha[(p.len - 1) * l..].iter().copied())
}

/// Posterior marginals from forward-backward.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub len: usize,
    pub labels: usize,
    pub log_z: f64,
    /// `node[i * L + l] = P(y_i = l)`
    pub node: Vec<f64>,
    /// `edge[(i * L + prev) * L + cur] = P(y_i = prev, y_{i+1} = cur)`
    pub edge: Vec<f64>,
}

impl Marginals {
    #[inline]
    pub fn node(&self, i: usize, label: usize) -> f64 {
        self.node[i * self.labels + label]
    }

    #[inline]
    pub fn edge(&self, i: usize, prev: usize, cur: usize) -> f64 {
        self.edge[(i * self.labels + prev) * self.labels + cur]
    }
}

pub fn marginals(p: &Potentials) -> Marginals {
    let (n, l) = (p.len, p.labels);
    let alpha = forward(p);
    let beta = backward(p);
    let log_z = if n == 0 {
        0.0
    } else {
        log_sum_exp(alpha[(n - 1) * l..].iter().copied())
    };
    let node = alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| (a + b - log_z).exp())
        .collect();
    let mut edge = vec![0.0; n.saturating_sub(1) * l * l];
    for i in 0..n.saturating_sub(1) {
        for q in 0..l {
            let a = alpha[i * l + q] - log_z;
            for c in 0..l {
                let right = p.unary(i + 1, c) + beta[(i + 1) * l + c];
                edge[(i * l + q) * l + c] = (a + p.transition(q, c) + right).exp();
            }
        }
    }
    Marginals {
        len: n,
        labels: l,
        log_z,
        node,
        edge,
    }
}

/// Highest-scoring label path and its score. Ties go to the lower label
/// index, both for the final label and at every backtrack step.
pub fn viterbi(p: &Potentials) -> (Vec<usize>, f64) {
    let (n, l) = (p.len, p.labels);
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut delta = p.unary[..l].to_vec();
    let mut back = vec![0usize; n * l];
    let mut next = vec![0.0; l];
    for i in 1..n {
        for c in 0..l {
            let mut best = 0;
            let mut best_score = delta[0] + p.transition(0, c);
            for (q, &d) in delta.iter().enumerate().skip(1) {
                let s = d + p.transition(q, c);
                if s > best_score {
                    best = q;
                    best_score = s;
                }
            }
            back[i * l + c] = best;
            next[c] = best_score + p.unary(i, c);
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut last = 0;
    for c in 1..l {
        if delta[c] > delta[last] {
            last = c;
        }
    }
    let score = delta[last];
    let mut path = vec![0; n];
    path[n - 1] = last;
    for i in (1..n).rev() {
        path[i - 1] = back[i * l + path[i]];
    }
    (path, score)
}
