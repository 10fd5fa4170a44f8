//! Measure-valued initial data: densities, weighted Dirac combs, and
//! indicator-scaled data.

use std::sync::Arc;

#[derive(Clone)]
pub enum DatumKind {
    /// A nonnegative density function of the space variable.
    Density(Arc<dyn Fn(&[f64]) -> f64 + Sync + Send>),
    /// Weighted Dirac masses: (location, weight >= 0).
    Diracs(Vec<(Vec<f64>, f64)>),
    /// level * indicator of the ball B_radius(center).
    Indicator { center: Vec<f64>, radius: f64, level: f64 },
}

#[derive(Clone)]
pub struct InitialDatum {
    pub kind: DatumKind,
    pub description: String,
}

impl InitialDatum {
    pub fn density(label: &str, f: impl Fn(&[f64]) -> f64 + Sync + Send + 'static) -> Self {
        Self { kind: DatumKind::Density(Arc::new(f)), description: label.to_string() }
    }

    pub fn dirac(weight: f64) -> Self {
        Self::diracs(vec![(vec![0.0], weight)])
    }

    pub fn diracs(list: Vec<(Vec<f64>, f64)>) -> Self {
        assert!(list.iter().all(|(_, w)| *w >= 0.0), "Dirac weights must be nonnegative");
        let label = format!("{} dirac(s)", list.len());
        Self { kind: DatumKind::Diracs(list), description: label }
    }

    pub fn indicator(center: Vec<f64>, radius: f64, level: f64) -> Self {
        assert!(radius > 0.0 && level >= 0.0);
        Self {
            kind: DatumKind::Indicator { center, radius, level },
            description: format!("{level} * indicator(B_{radius})"),
        }
    }

    pub fn constant(level: f64) -> Self {
        Self::density(&format!("constant {level}"), move |_| level)
    }
}

impl std::fmt::Debug for InitialDatum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "InitialDatum({})", self.description)
    }
}
