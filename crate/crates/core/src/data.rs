//! Samples, datasets and factorial layouts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One group of observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidData("sample is empty".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value {} at position {}",
                values[k], k
            )));
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Factor labelling of the groups. Two-way cells are stored row-major:
/// group `i * b + j` is level `i` of the first factor and level `j` of the
/// second.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Layout {
    OneWay {
        factor: String,
        levels: Vec<String>,
    },
    TwoWay {
        factors: [String; 2],
        levels_a: Vec<String>,
        levels_b: Vec<String>,
    },
}

impl Layout {
    pub fn cells(&self) -> usize {
        match self {
            Layout::OneWay { levels, .. } => levels.len(),
            Layout::TwoWay {
                levels_a, levels_b, ..
            } => levels_a.len() * levels_b.len(),
        }
    }

    /// `(a, b)` for a two-way layout.
    pub fn dims(&self) -> Option<(usize, usize)> {
        match self {
            Layout::TwoWay {
                levels_a, levels_b, ..
            } => Some((levels_a.len(), levels_b.len())),
            Layout::OneWay { .. } => None,
        }
    }

    pub fn group_label(&self, i: usize) -> String {
        match self {
            Layout::OneWay { levels, .. } => levels[i].clone(),
            Layout::TwoWay {
                levels_a, levels_b, ..
            } => {
                let b = levels_b.len();
                format!("{}/{}", levels_a[i / b], levels_b[i % b])
            }
        }
    }
}

/// Independent groups of observations with an optional factorial layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    groups: Vec<Sample>,
    layout: Option<Layout>,
}

impl Dataset {
    pub fn new(groups: Vec<Sample>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::InvalidData(format!(
                "at least 2 groups are required, got {}",
                groups.len()
            )));
        }
        Ok(Dataset {
            groups,
            layout: None,
        })
    }

    /// Builds a dataset from raw value vectors, validating each group.
    pub fn from_values(groups: Vec<Vec<f64>>) -> Result<Self> {
        let samples = groups
            .into_iter()
            .enumerate()
            .map(|(i, g)| Sample::new(g).map_err(|e| e.context(format!("group {}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(samples)
    }

    pub fn with_layout(mut self, layout: Layout) -> Result<Self> {
        if layout.cells() != self.d() {
            return Err(Error::Layout(format!(
                "layout has {} cells but the dataset has {} groups",
                layout.cells(),
                self.d()
            )));
        }
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn layout(&self) -> Option<&Layout> {
        self.layout.as_ref()
    }

    pub fn d(&self) -> usize {
        self.groups.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Sample::len).collect()
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(Sample::len).sum()
    }

    pub fn groups(&self) -> &[Sample] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &[f64] {
        self.groups[i].values()
    }

    pub fn group_label(&self, i: usize) -> String {
        match &self.layout {
            Some(l) => l.group_label(i),
            None => format!("group{}", i + 1),
        }
    }

    /// Errors unless every group has at least two observations.
    pub fn require_replication(&self) -> Result<()> {
        let small: Vec<usize> = self
            .groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.len() < 2)
            .map(|(i, _)| i + 1)
            .collect();
        if small.is_empty() {
            Ok(())
        } else {
            Err(Error::InsufficientReplication { groups: small })
        }
    }

    /// Applies `f` to every observation.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Dataset> {
        let groups = self
            .groups
            .iter()
            .map(|g| Sample::new(g.values.iter().map(|&x| f(x)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            groups,
            layout: self.layout.clone(),
        })
    }
}

pub mod datasets {
    //! Bundled example data.

    use std::collections::BTreeMap;

    use super::Dataset;
    use crate::io;

    const LEUCOCYTE_CSV: &str = include_str!("../data/leucocyte.csv");

    /// Leucocyte counts in a 2×2 design: food (normal, reduced) × treatment
    /// (placebo, drug), ten animals per cell. Cell order is normal/placebo,
    /// normal/drug, reduced/placebo, reduced/drug.
    pub fn leucocyte() -> Dataset {
        io::read_csv(
            LEUCOCYTE_CSV.as_bytes(),
            "leucocytes",
            &["food", "treatment"],
            &leucocyte_levels(),
        )
        .expect("bundled leucocyte data is valid")
    }

    pub fn leucocyte_csv() -> &'static str {
        LEUCOCYTE_CSV
    }

    pub fn leucocyte_levels() -> BTreeMap<String, Vec<String>> {
        let mut m = BTreeMap::new();
        m.insert("food".into(), vec!["normal".into(), "reduced".into()]);
        m.insert("treatment".into(), vec!["placebo".into(), "drug".into()]);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert!(Sample::new(vec![]).is_err());
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        assert!(Dataset::from_values(vec![vec![1.0]]).is_err());
        let e = Dataset::from_values(vec![vec![1.0], vec![f64::INFINITY]]).unwrap_err();
        assert_eq!(e.kind(), "invalid-data");
    }

    #[test]
    fn replication_check_lists_groups() {
        let d = Dataset::from_values(vec![vec![1.0], vec![1.0, 2.0], vec![3.0]]).unwrap();
        match d.require_replication() {
            Err(Error::InsufficientReplication { groups }) => assert_eq!(groups, vec![1, 3]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn layout_must_match() {
        let d = Dataset::from_values(vec![vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let l = Layout::TwoWay {
            factors: ["a".into(), "b".into()],
            levels_a: vec!["1".into(), "2".into()],
            levels_b: vec!["x".into(), "y".into()],
        };
        assert_eq!(d.with_layout(l).unwrap_err().kind(), "layout");
    }

    #[test]
    fn leucocyte_cells() {
        let d = datasets::leucocyte();
        assert_eq!(d.sizes(), vec![10; 4]);
        assert_eq!(&d.group(0)[..3], &[7.5, 8.1, 5.4]);
        assert!(d.group(1).contains(&44.4));
        assert_eq!(d.group_label(0), "normal/placebo");
        assert_eq!(d.group_label(3), "reduced/drug");
    }
}
