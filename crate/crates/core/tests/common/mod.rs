//! Independent reference implementations and fixtures shared by the
//! integration tests. Nothing here calls into the crate's numerics: the
//! oracles work on plain `Vec<f64>` with textbook algorithms.
#![allow(dead_code)]

use exll::{FeatureVector, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Mat = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter().map(|a| a / n).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn mat_vec(m: &Mat, v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn identity(d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Gauss-Jordan elimination with partial pivoting.
pub fn invert(m: &Mat) -> Mat {
    let n = m.len();
    let mut a: Mat = m.iter().zip(identity(n)).map(|(r, e)| r.iter().copied().chain(e).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-300, "singular matrix");
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Streaming covariance defined by its recurrence, written out element by element.
pub struct RefGlobal {
    pub n: f64,
    pub mean: Vec<f64>,
    pub cov: Mat,
    pub seed_outer: bool,
}

impl RefGlobal {
    pub fn new(d: usize, seed_outer: bool) -> Self {
        Self { n: 0.0, mean: vec![0.0; d], cov: vec![vec![0.0; d]; d], seed_outer }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.n += 1.0;
        let n = self.n;
        if n == 1.0 {
            self.mean = x.to_vec();
            for i in 0..x.len() {
                for j in 0..x.len() {
                    self.cov[i][j] = if self.seed_outer { x[i] * x[j] } else { 0.0 };
                }
            }
            return;
        }
        for (m, v) in self.mean.iter_mut().zip(x) {
            *m = (n - 1.0) / n * *m + v / n;
        }
        let c = sub(x, &self.mean);
        for i in 0..x.len() {
            for j in 0..x.len() {
                self.cov[i][j] = (n - 1.0) / n * self.cov[i][j] + c[i] * c[j] / n;
            }
        }
    }

    pub fn precision(&self, eps: f64) -> Mat {
        let d = self.mean.len();
        let reg: Mat = (0..d)
            .map(|i| (0..d).map(|j| (1.0 - eps) * self.cov[i][j] + if i == j { eps } else { 0.0 }).collect())
            .collect();
        invert(&reg)
    }
}

pub struct RefClass {
    pub n: f64,
    pub mean: Vec<f64>,
    pub sp: f64,
    /// (centroid, support)
    pub protos: Vec<(Vec<f64>, u64)>,
}

impl RefClass {
    fn density(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + sq_dist(x, &self.mean) + self.sp - dot(&self.mean, &self.mean))
    }
}

/// One decision of the reference stream: `(first, second, novel)`; the
/// first sample of a class has no winners.
pub type Decision = (Option<usize>, Option<usize>, bool);

/// Exhaustive-scan oracle for winner selection and the novelty test,
/// replaying the precision refresh schedule (warmup 2, refresh every `f`).
pub struct RefStream {
    pub global: RefGlobal,
    pub classes: std::collections::BTreeMap<Label, RefClass>,
    pub precision: Option<(Mat, u64)>,
    pub refresh: u64,
    pub eps: f64,
    pub tol: f64,
}

impl RefStream {
    pub fn new(d: usize, refresh: u64) -> Self {
        Self {
            global: RefGlobal::new(d, true),
            classes: Default::default(),
            precision: None,
            refresh,
            eps: 1e-4,
            tol: 1e-12,
        }
    }

    pub fn push(&mut self, label: Label, x: &[f64]) -> Decision {
        let count = self.global.n as u64;
        let due = count >= 2 && self.precision.as_ref().is_none_or(|(_, at)| count - at >= self.refresh);
        if due {
            self.precision = Some((self.global.precision(self.eps), count));
        }
        self.global.push(x);
        let d = x.len();
        let Some(c) = self.classes.get_mut(&label) else {
            self.classes.insert(label, RefClass { n: 1.0, mean: x.to_vec(), sp: dot(x, x), protos: vec![(x.to_vec(), 1)] });
            return (None, None, true);
        };
        c.n += 1.0;
        let n = c.n;
        for (m, v) in c.mean.iter_mut().zip(x) {
            *m = (n - 1.0) / n * *m + v / n;
        }
        c.sp = (n - 1.0) / n * c.sp + dot(x, x) / n;

        let lambda = self.precision.as_ref().map(|(m, _)| m.clone()).unwrap_or_else(|| identity(d));
        let dist: Vec<f64> = c
            .protos
            .iter()
            .map(|(p, _)| {
                let diff = sub(x, p);
                dot(&diff, &mat_vec(&lambda, &diff))
            })
            .collect();
        // Exhaustive scan: sort all prototypes by (distance, index).
        let mut order: Vec<usize> = (0..dist.len()).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        let (first, second) = (order[0], order.get(1).copied());

        let dens: Vec<f64> = c.protos.iter().map(|(p, _)| c.density(p)).collect();
        let dx = c.density(x);
        let hi = dens.iter().copied().fold(f64::MIN, f64::max);
        let lo = dens.iter().copied().fold(f64::MAX, f64::min);
        let novel = dx > hi + self.tol || dx < lo - self.tol;
        if novel {
            c.protos.push((x.to_vec(), 1));
        } else {
            let (p, s) = &mut c.protos[first];
            *s += 1;
            let s = *s as f64;
            for (a, v) in p.iter_mut().zip(x) {
                *a = (s - 1.0) / s * *a + v / s;
            }
        }
        (Some(first), second, novel)
    }
}

/// Labeled unit vectors drawn around `clusters` random centres per class.
pub fn clustered_stream(seed: u64, d: usize, classes: u32, clusters: usize, n: usize, noise: f64) -> Vec<(Label, Vec<f64>)> {
    let mut r = rng(seed);
    let centres: Vec<Vec<Vec<f64>>> = (0..classes)
        .map(|_| (0..clusters).map(|_| unit(&(0..d).map(|_| gauss(&mut r)).collect::<Vec<_>>())).collect())
        .collect();
    (0..n)
        .map(|_| {
            let k = r.random_range(0..classes);
            let c = &centres[k as usize][r.random_range(0..clusters)];
            let v: Vec<f64> = c.iter().map(|a| a + noise * gauss(&mut r)).collect();
            (k, unit(&v))
        })
        .collect()
}

pub fn to_features(stream: &[(Label, Vec<f64>)]) -> Vec<FeatureVector> {
    stream.iter().enumerate().map(|(i, (k, v))| FeatureVector::labeled(format!("s{i}"), *k, v.clone())).collect()
}

/// Two overlapping classes separated along one axis: class means carry the
/// signal, individual prototypes are noisy.
pub fn noisy_pair(seed: u64, d: usize, n: usize, std: f64) -> Vec<(Label, Vec<f64>)> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let k = (i % 2) as Label;
            let mut v: Vec<f64> = (0..d).map(|_| std * gauss(&mut r)).collect();
            v[0] += 1.0;
            v[1] += if k == 0 { 0.3 } else { -0.3 };
            (k, v)
        })
        .collect()
}

/// XOR layout: each class is two clusters placed so that both class means
/// coincide; only prototypes can tell the classes apart.
pub fn xor_pair(seed: u64, d: usize, n: usize, std: f64) -> Vec<(Label, Vec<f64>)> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let k = (i % 2) as Label;
            let s = if r.random::<bool>() { 1.0 } else { -1.0 };
            let mut v: Vec<f64> = (0..d).map(|_| std * gauss(&mut r)).collect();
            v[0] += 1.0;
            v[1] += 0.5 * s;
            v[2] += if k == 0 { 0.5 * s } else { -0.5 * s };
            (k, v)
        })
        .collect()
}
