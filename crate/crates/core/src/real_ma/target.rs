use super::cell::Label;
use super::{Domain, RealMaError};

/// Prescribed Monge–Ampère masses at the nodes (zero on the boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMeasure {
    pub masses: Vec<f64>,
    /// Constant background density the masses discretize, if any.
    pub density: Option<f64>,
}

impl TargetMeasure {
    pub fn from_masses(masses: Vec<f64>) -> Self {
        TargetMeasure { masses, density: None }
    }

    /// `density` times the area of each interior node's Voronoi cell clipped
    /// to the domain.
    pub fn from_density(domain: &Domain<f64>, nodes: &[Vec<f64>], density: f64) -> Result<Self, RealMaError> {
        check_nodes(domain, nodes)?;
        let base = domain.polytope();
        let masses = nodes
            .iter()
            .enumerate()
            .map(|(k, x)| {
                if domain.on_boundary(x) {
                    return 0.0;
                }
                let mut cell = base.clone();
                let xk2: f64 = x.iter().map(|v| v * v).sum();
                for (j, y) in nodes.iter().enumerate() {
                    if j == k {
                        continue;
                    }
                    // |p - x|^2 <= |p - y|^2  <=>  2 (y - x) . p <= |y|^2 - |x|^2
                    let a: Vec<f64> = y.iter().zip(x).map(|(u, v)| 2.0 * (u - v)).collect();
                    let b = y.iter().map(|v| v * v).sum::<f64>() - xk2;
                    cell.clip(&a, &b, Label::Node(j));
                }
                density * cell.volume()
            })
            .collect();
        Ok(TargetMeasure { masses, density: Some(density) })
    }

    /// `density * vol(domain)` split equally among the interior nodes.
    pub fn uniform(domain: &Domain<f64>, nodes: &[Vec<f64>], density: f64) -> Result<Self, RealMaError> {
        check_nodes(domain, nodes)?;
        let interior = nodes.iter().filter(|x| !domain.on_boundary(x)).count();
        if interior == 0 {
            return Err(RealMaError::NoInteriorNodes);
        }
        let share = density * domain.volume() / interior as f64;
        let masses = nodes.iter().map(|x| if domain.on_boundary(x) { 0.0 } else { share }).collect();
        Ok(TargetMeasure { masses, density: Some(density) })
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `|total - density * vol(domain)|`, when a density is recorded.
    pub fn total_defect(&self, domain: &Domain<f64>) -> Option<f64> {
        self.density.map(|d| (self.total() - d * domain.volume()).abs())
    }
}

fn check_nodes(domain: &Domain<f64>, nodes: &[Vec<f64>]) -> Result<(), RealMaError> {
    for (k, x) in nodes.iter().enumerate() {
        if x.len() != domain.dimension() {
            return Err(RealMaError::DimensionMismatch);
        }
        if !domain.contains(x) || x.iter().any(|v| !v.is_finite()) {
            return Err(RealMaError::NodeOutsideDomain(k));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<Vec<f64>> {
        let h = 1.0 / (n - 1) as f64;
        (0..n).flat_map(|i| (0..n).map(move |j| vec![i as f64 * h, j as f64 * h])).collect()
    }

    #[test]
    fn voronoi_masses_on_a_grid() {
        let d = Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let nodes = grid(5);
        let t = TargetMeasure::from_density(&d, &nodes, 3.0).unwrap();
        for (x, m) in nodes.iter().zip(&t.masses) {
            if d.on_boundary(x) {
                assert_eq!(*m, 0.0);
            } else {
                assert!((m - 3.0 / 16.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn uniform_split_conserves_total() {
        let d = Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let t = TargetMeasure::uniform(&d, &grid(9), 1.0).unwrap();
        assert!(t.total_defect(&d).unwrap() < 1e-14);
        assert!((t.masses[10] - 1.0 / 49.0).abs() < 1e-15);
    }

    #[test]
    fn interval_voronoi() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let nodes: Vec<Vec<f64>> = (0..=10).map(|i| vec![i as f64 / 10.0]).collect();
        let t = TargetMeasure::from_density(&d, &nodes, 2.0).unwrap();
        assert!((t.masses[5] - 0.2).abs() < 1e-15);
        assert!((t.total() - 1.8).abs() < 1e-14);
    }
}
