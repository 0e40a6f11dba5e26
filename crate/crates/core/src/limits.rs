//! The analytic side of the limit laws.
//!
//! For every statistic class there is a constant `xi` such that the point
//! process of per-component counts, rescaled by `q(n) xi`, converges to a
//! Poisson process on `(0, inf]` with intensity `nu_beta((a,b]) = a^{-beta}
//! - b^{-beta}`; the rescaled maximum converges to a Fréchet(`beta`) random
//! variable. This module evaluates the constants, the intensity, the
//! Fréchet law, and builds the empirical point processes.

use std::io::{self, Write};

use thiserror::Error;

use crate::components::ComponentView;
use crate::graphgen::MultiGraph;
use crate::statistics::{
    automorphism_count, count_statistic_capped, StatisticSpec, StatisticsError,
};
use crate::weights::{WeightError, WeightModel, WeightVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitsError {
    #[error("model is not subcritical: E[W^2] = {second} >= E[W] = {first}")]
    NotSubcritical { first: f64, second: f64 },
    #[error("interval must satisfy 0 < a < b, got a = {a}, b = {b}")]
    BadInterval { a: f64, b: f64 },
    #[error("class parameter m must be >= 1 for {spec}")]
    BadClassParameter { spec: String },
    #[error("scaling factors must be positive: q(n) = {qn}, xi = {xi}")]
    BadScaling { qn: f64, xi: f64 },
    #[error("weight vector has {weights} entries but the graph has {graph} vertices")]
    LengthMismatch { graph: usize, weights: usize },
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Statistics(#[from] StatisticsError),
}

/// The limit constant for one statistic class under one weight model.
#[derive(Debug, Clone, PartialEq)]
pub struct XiConstant {
    pub value: f64,
    pub spec: StatisticSpec,
    pub model: WeightModel,
}

/// Evaluates the limit constant `xi` for the given class:
///
/// * all vertices: `E[W] / (E[W] - E[W^2])`;
/// * distance `m`: `(E[W^2]/E[W])^{m-1}`;
/// * degree `m`: `E[W^m e^{-W}] / ((m-1)! (E[W] - E[W^2]))`;
/// * terminal tree `T` on `m` vertices:
///   `E[W^{deg_T(1)+1} e^{-W}] / (c(T) (E[W] - E[W^2]))`
///   times the product over the non-root vertices of
///   `E[W^{deg_T(i)} e^{-W}] / E[W]`.
pub fn xi(model: &WeightModel, spec: &StatisticSpec) -> Result<XiConstant, LimitsError> {
    let first = model.moment(1)?;
    let second = model.moment(2)?;
    if second >= first {
        return Err(LimitsError::NotSubcritical { first, second });
    }
    let margin = first - second;
    let value = match spec {
        StatisticSpec::AllVertices => first / margin,
        StatisticSpec::DistanceM(m) => {
            if *m == 0 {
                return Err(LimitsError::BadClassParameter { spec: spec.to_string() });
            }
            (second / first).powi(*m as i32 - 1)
        }
        StatisticSpec::DegreeM(m) => {
            if *m == 0 {
                return Err(LimitsError::BadClassParameter { spec: spec.to_string() });
            }
            let damped = model.exp_moment(*m as u32)?;
            damped / (factorial(*m - 1) * margin)
        }
        StatisticSpec::TerminalTree(tree) => {
            let c = automorphism_count(tree) as f64;
            let root_term = model.exp_moment(tree.tree_degree(0) as u32 + 1)? / margin;
            let mut product = 1.0;
            for i in 1..tree.vertex_count() {
                product *= model.exp_moment(tree.tree_degree(i) as u32)? / first;
            }
            root_term * product / c
        }
    };
    Ok(XiConstant { value, spec: spec.clone(), model: *model })
}

/// Intensity of the limiting Poisson process on the interval `(a, b]`:
/// `a^{-beta} - b^{-beta}` (the second term vanishes for `b = inf`).
pub fn nu_beta(a: f64, b: f64, beta: f64) -> Result<f64, LimitsError> {
    if !(a > 0.0 && a < b) {
        return Err(LimitsError::BadInterval { a, b });
    }
    let upper = if b.is_infinite() { 0.0 } else { b.powf(-beta) };
    Ok(a.powf(-beta) - upper)
}

/// Fréchet distribution function `exp(-x^{-beta})` for `x > 0`, else 0.
pub fn frechet_cdf(x: f64, beta: f64) -> f64 {
    debug_assert!(beta > 0.0, "Fréchet parameter must be positive");
    if x <= 0.0 {
        0.0
    } else {
        (-x.powf(-beta)).exp()
    }
}

/// A finite multiset of points on `(0, inf]`; points at zero (or below) are
/// dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<f64>,
}

impl PointSet {
    pub fn from_points<I: IntoIterator<Item = f64>>(points: I) -> Self {
        Self { points: points.into_iter().filter(|&p| p > 0.0).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of points in the half-open interval `(a, b]`.
    pub fn interval_count(&self, a: f64, b: f64) -> Result<u64, LimitsError> {
        if !(a > 0.0 && a < b) {
            return Err(LimitsError::BadInterval { a, b });
        }
        Ok(self.points.iter().filter(|&&p| p > a && p <= b).count() as u64)
    }

    /// Largest point, or `None` for the empty set.
    pub fn max_point(&self) -> Option<f64> {
        self.points
            .iter()
            .copied()
            .fold(None, |acc, p| Some(acc.map_or(p, |a: f64| a.max(p))))
    }

    /// CSV serialization: a single `point` column, sorted descending.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let mut sorted = self.points.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).expect("points are finite"));
        writeln!(out, "point")?;
        for p in sorted {
            writeln!(out, "{p}")?;
        }
        Ok(())
    }
}

/// The empirical point process of rescaled per-component counts: one point
/// `S_n(v) / (q(n) xi)` for every component representative `v`. Zero counts
/// contribute no point.
pub fn build_xi_n(
    graph: &MultiGraph,
    weights: &WeightVector,
    view: &ComponentView,
    spec: &StatisticSpec,
    xi_value: f64,
    qn: f64,
    path_cap: usize,
) -> Result<PointSet, LimitsError> {
    if weights.len() != graph.n() {
        return Err(LimitsError::LengthMismatch { graph: graph.n(), weights: weights.len() });
    }
    if !(qn > 0.0 && xi_value > 0.0) {
        return Err(LimitsError::BadScaling { qn, xi: xi_value });
    }
    let scale = 1.0 / (qn * xi_value);
    let mut points = Vec::with_capacity(view.count());
    for &v in view.representatives() {
        let count = count_statistic_capped(graph, view, v, spec, path_cap)?;
        points.push(count as f64 * scale);
    }
    Ok(PointSet::from_points(points))
}

/// The point process of rescaled weights: one point `W_v / q(n)` per vertex.
pub fn build_theta_n(weights: &WeightVector, qn: f64) -> Result<PointSet, LimitsError> {
    if !(qn > 0.0) {
        return Err(LimitsError::BadScaling { qn, xi: 1.0 });
    }
    Ok(PointSet::from_points(weights.iter().map(|w| w / qn)))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::components;
    use crate::graphgen::MultiGraph;
    use crate::statistics::{RootedTree, DEFAULT_PATH_CAP};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model() -> WeightModel {
        WeightModel::new(3.0, 0.25).unwrap()
    }

    #[test]
    fn xi_all_vertices_closed_form() {
        let c = xi(&model(), &StatisticSpec::AllVertices).unwrap();
        assert_relative_eq!(c.value, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn xi_distance_one_is_unity() {
        let c = xi(&model(), &StatisticSpec::DistanceM(1)).unwrap();
        assert_eq!(c.value, 1.0);
        let c2 = xi(&model(), &StatisticSpec::DistanceM(2)).unwrap();
        assert_relative_eq!(c2.value, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn xi_terminal_single_vertex_equals_degree_one() {
        for (beta, t_min) in [(3.0, 0.25), (2.5, 0.2), (4.0, 0.5)] {
            let m = WeightModel::new(beta, t_min).unwrap();
            let single = StatisticSpec::TerminalTree(RootedTree::single());
            let a = xi(&m, &single).unwrap().value;
            let b = xi(&m, &StatisticSpec::DegreeM(1)).unwrap().value;
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn xi_rejects_non_subcritical_and_bad_parameters() {
        let bad = WeightModel::new_unchecked(3.0, 0.5).unwrap();
        assert!(matches!(
            xi(&bad, &StatisticSpec::AllVertices),
            Err(LimitsError::NotSubcritical { .. })
        ));
        assert!(matches!(
            xi(&model(), &StatisticSpec::DistanceM(0)),
            Err(LimitsError::BadClassParameter { .. })
        ));
        assert!(matches!(
            xi(&model(), &StatisticSpec::DegreeM(0)),
            Err(LimitsError::BadClassParameter { .. })
        ));
    }

    #[test]
    fn nu_beta_examples() {
        assert_relative_eq!(nu_beta(1.0, f64::INFINITY, 3.0).unwrap(), 1.0);
        assert_relative_eq!(nu_beta(1.0, 2.0, 3.0).unwrap(), 0.875);
        assert!(nu_beta(2.0, 1.0, 3.0).is_err());
        assert!(nu_beta(0.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn nu_beta_first_order_expansion() {
        // nu((a, a+eps]) = beta a^{-beta-1} eps + O(eps^2), checked against a
        // finite difference.
        let (a, beta) = (1.7, 3.0);
        for &eps in &[1e-4, 1e-5] {
            let exact = nu_beta(a, a + eps, beta).unwrap();
            let linear = beta * a.powf(-beta - 1.0) * eps;
            assert!((exact - linear).abs() <= 10.0 * eps * eps);
        }
    }

    #[test]
    fn frechet_cdf_examples() {
        assert_relative_eq!(frechet_cdf(1.0, 3.0), (-1.0f64).exp());
        assert_relative_eq!(frechet_cdf(2.0, 3.0), (-0.125f64).exp());
        assert_eq!(frechet_cdf(0.0, 3.0), 0.0);
        assert_eq!(frechet_cdf(-1.0, 3.0), 0.0);
        assert!(frechet_cdf(1e12, 3.0) > 1.0 - 1e-9);
        assert!(frechet_cdf(1e-9, 3.0) < 1e-12);
    }

    #[test]
    fn point_set_drops_zeros_and_counts_half_open() {
        let ps = PointSet::from_points([0.5, 1.5, 2.0, 0.0]);
        assert_eq!(ps.len(), 3);
        assert_eq!(ps.interval_count(1.0, f64::INFINITY).unwrap(), 2);
        // 2.0 is excluded from (2, inf].
        assert_eq!(ps.interval_count(2.0, f64::INFINITY).unwrap(), 0);
        assert_eq!(ps.interval_count(0.4, 0.5).unwrap(), 1);
        assert!(ps.interval_count(2.0, 2.0).is_err());
        assert_eq!(ps.max_point(), Some(2.0));
        let empty = PointSet::from_points([]);
        assert_eq!(empty.interval_count(1.0, 2.0).unwrap(), 0);
        assert_eq!(empty.max_point(), None);
    }

    #[test]
    fn point_set_csv_is_sorted_descending() {
        let ps = PointSet::from_points([0.5, 2.0, 1.5]);
        let mut buf = Vec::new();
        ps.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "point\n2\n1.5\n0.5\n");
    }

    #[test]
    fn xi_n_on_empty_graph_gives_unit_counts() {
        let g = MultiGraph::empty(5);
        let w = WeightVector::new(vec![1.0; 5]).unwrap();
        let view = components(&g, &w).unwrap();
        let ps = build_xi_n(
            &g,
            &w,
            &view,
            &StatisticSpec::AllVertices,
            2.0,
            4.0,
            DEFAULT_PATH_CAP,
        )
        .unwrap();
        assert_eq!(ps.len(), 5);
        for &p in ps.points() {
            assert_relative_eq!(p, 1.0 / 8.0);
        }
    }

    #[test]
    fn xi_n_single_component() {
        let g = MultiGraph::from_edges(4, (0..3).map(|i| (i, i + 1, 1))).unwrap();
        let w = WeightVector::new(vec![1.0; 4]).unwrap();
        let view = components(&g, &w).unwrap();
        let ps = build_xi_n(
            &g,
            &w,
            &view,
            &StatisticSpec::AllVertices,
            1.0,
            2.0,
            DEFAULT_PATH_CAP,
        )
        .unwrap();
        assert_eq!(ps.points(), &[2.0]);
    }

    #[test]
    fn xi_n_counts_terminal_wedges_on_the_figure_component() {
        let g = MultiGraph::from_edges(
            12,
            [
                (0, 1, 1),
                (0, 2, 1),
                (0, 3, 1),
                (0, 4, 1),
                (2, 5, 1),
                (3, 6, 1),
                (3, 7, 1),
                (4, 8, 1),
                (4, 9, 1),
                (9, 10, 1),
                (9, 11, 1),
            ],
        )
        .unwrap();
        // Vertex 0 is the max-weight vertex, hence the representative.
        let mut ws = vec![1.0; 12];
        ws[0] = 5.0;
        let w = WeightVector::new(ws).unwrap();
        let view = components(&g, &w).unwrap();
        let wedge = StatisticSpec::TerminalTree(RootedTree::parse("0 1 1").unwrap());
        // q(n) * xi = 1 leaves the raw count.
        let ps = build_xi_n(&g, &w, &view, &wedge, 1.0, 1.0, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(ps.points(), &[2.0]);
    }

    #[test]
    fn theta_n_examples() {
        let w = WeightVector::new(vec![2.5, 0.25]).unwrap();
        let ps = build_theta_n(&w, 2.5).unwrap();
        assert_eq!(ps.points(), &[1.0, 0.1]);
        assert_relative_eq!(ps.max_point().unwrap(), 1.0);

        let empty = WeightVector::new(vec![]).unwrap();
        assert!(build_theta_n(&empty, 2.5).unwrap().is_empty());
        assert!(build_theta_n(&w, 0.0).is_err());
    }

    #[test]
    fn doubling_qn_halves_every_point() {
        let w = WeightVector::new(vec![0.7, 1.3, 2.9]).unwrap();
        let a = build_theta_n(&w, 1.5).unwrap();
        let b = build_theta_n(&w, 3.0).unwrap();
        for (&pa, &pb) in a.points().iter().zip(b.points()) {
            assert_relative_eq!(pa, 2.0 * pb, max_relative = 1e-15);
        }
    }

    proptest! {
        #[test]
        fn nu_beta_additivity(a in 0.1f64..5.0, d1 in 0.1f64..3.0, d2 in 0.1f64..3.0) {
            let (b, c, beta) = (a + d1, a + d1 + d2, 3.0);
            let lhs = nu_beta(a, b, beta).unwrap() + nu_beta(b, c, beta).unwrap();
            let rhs = nu_beta(a, c, beta).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn frechet_is_the_void_probability(t in 0.05f64..20.0, beta in 2.1f64..5.0) {
            let void = (-nu_beta(t, f64::INFINITY, beta).unwrap()).exp();
            prop_assert!((frechet_cdf(t, beta) - void).abs() <= 1e-12);
        }

        #[test]
        fn interval_counts_are_additive(points in prop::collection::vec(0.0f64..4.0, 0..40)) {
            let ps = PointSet::from_points(points);
            let (a, b, c) = (0.5, 1.5, 3.5);
            let lhs = ps.interval_count(a, b).unwrap() + ps.interval_count(b, c).unwrap();
            prop_assert_eq!(lhs, ps.interval_count(a, c).unwrap());
        }
    }
}
