//! Symmetric positive definite systems with a narrow band.

#[derive(Debug, Clone, PartialEq)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    /// Row `i` holds columns `i - bw ..= i`; entry `(i, j)` sits at
    /// `i * (bw + 1) + (j + bw - i)`.
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("matrix is not positive definite (pivot {pivot} at row {row})")]
pub struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let bw = bw.min(n.saturating_sub(1));
        BandedSpd { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    fn at(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Adds `v` to entry `(i, j)` of the lower triangle (`j <= i`, `i - j <= bw`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside the band");
        let k = self.at(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.at(i, j)]
        }
    }

    /// In-place Cholesky factorization `A = L L^T`.
    pub fn factor(mut self) -> Result<BandedCholesky, NotPositiveDefinite> {
        let bw = self.bw;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = self.data[self.at(i, j)];
                for k in lo.max(j.saturating_sub(bw))..j {
                    s -= self.data[self.at(i, k)] * self.data[self.at(j, k)];
                }
                if j == i {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(NotPositiveDefinite { row: i, pivot: s });
                    }
                    let k = self.at(i, i);
                    self.data[k] = s.sqrt();
                } else {
                    let k = self.at(i, j);
                    self.data[k] = s / self.data[self.at(j, j)];
                }
            }
        }
        Ok(BandedCholesky { m: self })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandedCholesky {
    m: BandedSpd,
}

impl BandedCholesky {
    pub fn solve(&self, rhs: &mut [f64]) {
        let m = &self.m;
        let n = m.n;
        for i in 0..n {
            let mut s = rhs[i];
            for k in i.saturating_sub(m.bw)..i {
                s -= m.data[m.at(i, k)] * rhs[k];
            }
            rhs[i] = s / m.data[m.at(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for k in i + 1..n.min(i + m.bw + 1) {
                s -= m.data[m.at(k, i)] * rhs[k];
            }
            rhs[i] = s / m.data[m.at(i, i)];
        }
    }
}
