//! Prototype layer: winner selection, the density condition that opens new
//! data clouds, prototype creation/update and within-class edge bookkeeping.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::stats::{ClassState, Label, UnitVector};

/// Default radius of influence of a fresh prototype, `sqrt(2 - 2 cos 30deg)`.
pub fn default_radius() -> f64 {
    (2.0 - 2.0 * 30f64.to_radians().cos()).sqrt()
}

/// Centroid of one data cloud.
///
/// `members` is the record of sample identifiers assigned to this cloud; the
/// samples themselves are never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    pub(crate) centroid: DVector<f64>,
    pub(crate) support: u64,
    pub(crate) radius: f64,
    pub(crate) members: Vec<String>,
    /// Density of the centroid at the last novelty check. Diagnostics only.
    pub(crate) density_cache: f64,
}

impl Prototype {
    pub(crate) fn new(centroid: DVector<f64>, sample_id: String) -> Self {
        Self {
            centroid,
            support: 1,
            radius: default_radius(),
            members: vec![sample_id],
            density_cache: 1.0,
        }
    }

    pub fn centroid(&self) -> &DVector<f64> {
        &self.centroid
    }

    pub fn support(&self) -> u64 {
        self.support
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn density_cache(&self) -> f64 {
        self.density_cache
    }
}

/// Symmetric, zero-diagonal co-activation counts between prototypes of one class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMatrix {
    side: usize,
    counts: Vec<u64>,
}

impl EdgeMatrix {
    pub fn new(side: usize) -> Self {
        Self { side, counts: vec![0; side * side] }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.side + b]
    }

    /// Adds one row and one column of zeros.
    pub fn grow(&mut self) {
        let side = self.side + 1;
        let mut counts = vec![0; side * side];
        for a in 0..self.side {
            counts[a * side..a * side + self.side]
                .copy_from_slice(&self.counts[a * self.side..(a + 1) * self.side]);
        }
        self.side = side;
        self.counts = counts;
    }

    pub fn set_pair(&mut self, a: usize, b: usize, value: u64) {
        debug_assert_ne!(a, b);
        self.counts[a * self.side + b] = value;
        self.counts[b * self.side + a] = value;
    }

    pub fn increment_pair(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b);
        self.counts[a * self.side + b] += 1;
        self.counts[b * self.side + a] += 1;
    }

    pub fn is_symmetric_zero_diagonal(&self) -> bool {
        (0..self.side).all(|a| {
            self.get(a, a) == 0 && (0..a).all(|b| self.get(a, b) == self.get(b, a))
        })
    }

    /// Strictly positive entries of the upper triangle as `(a, b, count)`.
    pub fn upper_edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (0..self.side).flat_map(move |a| {
            (a + 1..self.side).filter_map(move |b| {
                let c = self.get(a, b);
                (c > 0).then_some((a, b, c))
            })
        })
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.side.max(1)).take(self.side).map(<[u64]>::to_vec).collect()
    }
}

/// Class-level grouping of all prototypes of one class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MegaCloud {
    pub class_id: Label,
    pub prototype_indices: Vec<usize>,
}

impl ClassState {
    pub fn megacloud(&self) -> MegaCloud {
        MegaCloud { class_id: self.class_id, prototype_indices: (0..self.prototypes.len()).collect() }
    }
}

/// Nearest and second-nearest prototype of a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Winners {
    pub first: usize,
    pub second: Option<usize>,
}

/// `(x - p)^T precision (x - p)`.
pub fn mahalanobis_sq(precision: &DMatrix<f64>, x: &DVector<f64>, p: &DVector<f64>) -> f64 {
    let d = x - p;
    (precision * &d).dot(&d)
}

/// Nearest and runner-up prototypes under the quadratic form of `precision`.
/// Ties go to the lower index.
pub fn find_winners(state: &ClassState, precision: &DMatrix<f64>, x: &UnitVector) -> Winners {
    let x = x.as_vector();
    let mut best: Option<(usize, f64)> = None;
    let mut second: Option<(usize, f64)> = None;
    for (j, p) in state.prototypes.iter().enumerate() {
        let d = mahalanobis_sq(precision, x, &p.centroid);
        match best {
            Some((_, bd)) if d >= bd => {
                if second.is_none_or(|(_, sd)| d < sd) {
                    second = Some((j, d));
                }
            }
            _ => {
                second = best;
                best = Some((j, d));
            }
        }
    }
    let (first, _) = best.expect("class always owns at least one prototype");
    Winners { first, second: second.map(|(j, _)| j) }
}

/// Densities of every prototype centroid under the current class statistics.
pub fn prototype_densities(state: &ClassState) -> Vec<f64> {
    state.prototypes.iter().map(|p| state.density(&p.centroid)).collect()
}

/// True when `query_density` lies strictly outside `[min, max]` of the
/// prototype densities, by more than `tolerance`.
pub fn is_novel(query_density: f64, prototype_densities: &[f64], tolerance: f64) -> bool {
    let max = prototype_densities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = prototype_densities.iter().copied().fold(f64::INFINITY, f64::min);
    query_density > max + tolerance || query_density < min - tolerance
}

/// Density condition for opening a new data cloud in `state` for `x`.
pub fn novelty_test(state: &ClassState, x: &UnitVector, tolerance: f64) -> bool {
    is_novel(state.density(x.as_vector()), &prototype_densities(state), tolerance)
}

/// Opens a new prototype at `x`, linked to the current winner `b1`.
pub fn add_prototype(state: &mut ClassState, x: &UnitVector, sample_id: impl Into<String>, b1: usize) {
    state.prototypes.push(Prototype::new(x.as_vector().clone(), sample_id.into()));
    state.edges.grow();
    let new = state.prototypes.len() - 1;
    state.edges.set_pair(new, b1, 1);
}

/// Assigns `x` to prototype `b1`, moving its centroid and shrinking its radius.
pub fn update_prototype(
    state: &mut ClassState,
    x: &UnitVector,
    sample_id: impl Into<String>,
    b1: usize,
    b2: Option<usize>,
) {
    let p = &mut state.prototypes[b1];
    p.support += 1;
    crate::stats::running_mean_update(&mut p.centroid, x.as_vector(), p.support);
    p.radius = ((p.radius * p.radius + (1.0 - p.centroid.norm_squared())) / 2.0).sqrt();
    p.members.push(sample_id.into());
    if let Some(b2) = b2 {
        state.edges.increment_pair(b1, b2);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::normalize;
    use approx::assert_abs_diff_eq;

    fn unit(v: &[f64]) -> UnitVector {
        normalize(v).unwrap()
    }

    #[test]
    fn fresh_radius() {
        assert_abs_diff_eq!(default_radius(), 0.51764, epsilon = 1e-5);
    }

    #[test]
    fn single_prototype_has_no_runner_up() {
        let class = ClassState::new(0, &unit(&[1.0, 0.0]), "a");
        let w = find_winners(&class, &DMatrix::identity(2, 2), &unit(&[0.0, 1.0]));
        assert_eq!(w, Winners { first: 0, second: None });
    }

    #[test]
    fn euclidean_winners() {
        let e1 = unit(&[1.0, 0.0, 0.0]);
        let e2 = unit(&[0.0, 1.0, 0.0]);
        let mut class = ClassState::new(0, &e1, "a");
        add_prototype(&mut class, &e2, "b", 0);
        let w = find_winners(&class, &DMatrix::identity(3, 3), &e1);
        assert_eq!(w, Winners { first: 0, second: Some(1) });
        let w = find_winners(&class, &DMatrix::identity(3, 3), &e2);
        assert_eq!(w, Winners { first: 1, second: Some(0) });
    }

    #[test]
    fn winner_ties_go_to_lowest_index() {
        let e1 = unit(&[1.0, 0.0]);
        let e2 = unit(&[0.0, 1.0]);
        let mut class = ClassState::new(0, &e1, "a");
        add_prototype(&mut class, &e2, "b", 0);
        add_prototype(&mut class, &e1, "c", 0);
        let w = find_winners(&class, &DMatrix::identity(2, 2), &unit(&[1.0, 1.0]));
        assert_eq!(w, Winners { first: 0, second: Some(1) });
        let w = find_winners(&class, &DMatrix::identity(2, 2), &e1);
        assert_eq!(w, Winners { first: 0, second: Some(2) });
    }

    #[test]
    fn query_at_sole_prototype_is_not_novel() {
        let x = unit(&[0.2, 0.9, -0.1]);
        let class = ClassState::new(0, &x, "a");
        assert!(!novelty_test(&class, &x, 0.0));
    }

    #[test]
    fn far_query_is_novel() {
        // Class built from e1 (twice) and e2: mu = (2e1 + e2)/3, sigma = 1.
        let e1 = unit(&[1.0, 0.0, 0.0]);
        let e2 = unit(&[0.0, 1.0, 0.0]);
        let e3 = unit(&[0.0, 0.0, 1.0]);
        let mut class = ClassState::new(0, &e1, "a");
        class.update(&e1).unwrap();
        update_prototype(&mut class, &e1, "b", 0, None);
        class.update(&e2).unwrap();
        add_prototype(&mut class, &e2, "c", 0);
        // |e1 - mu|^2 = 2/9, |e2 - mu|^2 = 8/9, |e3 - mu|^2 = 14/9, 1 - |mu|^2 = 4/9.
        let dens = prototype_densities(&class);
        assert_abs_diff_eq!(dens[0], 1.0 / (1.0 + 2.0 / 9.0 + 4.0 / 9.0), epsilon = 1e-12);
        assert_abs_diff_eq!(dens[1], 1.0 / (1.0 + 8.0 / 9.0 + 4.0 / 9.0), epsilon = 1e-12);
        assert_abs_diff_eq!(class.density(e3.as_vector()), 1.0 / (1.0 + 14.0 / 9.0 + 4.0 / 9.0), epsilon = 1e-12);
        assert!(novelty_test(&class, &e3, 1e-12));
    }

    #[test]
    fn query_at_class_mean_is_novel() {
        let e1 = unit(&[1.0, 0.0]);
        let e2 = unit(&[0.0, 1.0]);
        let mut class = ClassState::new(0, &e1, "a");
        class.update(&e2).unwrap();
        add_prototype(&mut class, &e2, "b", 0);
        // Density at mu is 1/(1 + 0.5); both prototypes sit at 1/(1 + 0.5 + 0.5).
        let mu = unit(class.mean().as_slice());
        let at_mu = class.density(class.mean());
        assert_abs_diff_eq!(at_mu, 1.0 / 1.5, epsilon = 1e-15);
        assert!(is_novel(at_mu, &prototype_densities(&class), 1e-12));
        // normalized mean is farther out but still denser than both prototypes
        assert!(novelty_test(&class, &mu, 1e-12));
    }

    #[test]
    fn add_prototype_links_to_winner() {
        let mut class = ClassState::new(0, &unit(&[1.0, 0.0]), "a");
        add_prototype(&mut class, &unit(&[0.0, 1.0]), "b", 0);
        assert_eq!(class.prototype_count(), 2);
        assert_eq!(class.edges().rows(), vec![vec![0, 1], vec![1, 0]]);
        let fresh = &class.prototypes()[1];
        assert_eq!(fresh.support(), 1);
        assert_eq!(fresh.members(), ["b".to_string()]);
        assert_abs_diff_eq!(fresh.radius(), default_radius(), epsilon = 0.0);

        add_prototype(&mut class, &unit(&[1.0, 1.0]), "c", 1);
        add_prototype(&mut class, &unit(&[1.0, -1.0]), "d", 2);
        let e = class.edges();
        assert_eq!(e.get(3, 2), 1);
        assert_eq!(e.get(2, 3), 1);
        assert_eq!(e.get(3, 0), 0);
        assert_eq!(e.get(3, 1), 0);
        assert!(e.is_symmetric_zero_diagonal());
    }

    #[test]
    fn repeated_assignment_shrinks_radius() {
        let x = unit(&[0.6, 0.8]);
        let mut class = ClassState::new(0, &x, "a");
        update_prototype(&mut class, &x, "b", 0, None);
        let p = &class.prototypes()[0];
        assert_eq!(p.support(), 2);
        assert_abs_diff_eq!(p.centroid(), x.as_vector(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.radius(), default_radius() / 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(p.members(), ["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn centroid_tracks_batch_mean_and_edges_count() {
        let xs: Vec<UnitVector> = (0..20)
            .map(|i| unit(&[1.0, (i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]))
            .collect();
        let mut class = ClassState::new(0, &xs[0], "s0");
        add_prototype(&mut class, &unit(&[-1.0, 0.0, 0.0]), "far", 0);
        for (i, x) in xs.iter().enumerate().skip(1) {
            update_prototype(&mut class, x, format!("s{i}"), 0, Some(1));
        }
        let batch = xs.iter().fold(DVector::zeros(3), |acc, x| acc + x.as_vector()) / 20.0;
        let p = &class.prototypes()[0];
        assert_eq!(p.support(), 20);
        assert_abs_diff_eq!(p.centroid(), &batch, epsilon = 1e-9);
        assert_eq!(class.edges().get(0, 1), 19 + 1);
    }
}
