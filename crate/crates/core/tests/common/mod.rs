#![allow(dead_code)]

use std::collections::HashMap;
use std::path::Path;

/// Numeric CSV as named columns.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Table {
        let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let mut lines = text.lines();
        let header = lines.next().expect("header").split(',').map(String::from).collect();
        let rows = lines
            .map(|l| l.split(',').map(|v| v.parse().unwrap_or_else(|_| panic!("bad cell {v}"))).collect())
            .collect();
        Table { header, rows }
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let idx: HashMap<&str, usize> = self.header.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
        let i = *idx.get(name).unwrap_or_else(|| panic!("no column {name} in {:?}", self.header));
        self.rows.iter().map(|r| r[i]).collect()
    }
}

/// Interior local maxima and minima of a sampled curve; endpoints count as
/// minima/maxima when they beat their only neighbour.
pub fn extrema(v: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let (mut max, mut min) = (vec![], vec![]);
    for i in 0..v.len() {
        let left = if i > 0 { Some(v[i - 1]) } else { None };
        let right = v.get(i + 1).copied();
        let above = left.is_none_or(|l| v[i] > l) && right.is_none_or(|r| v[i] > r);
        let below = left.is_none_or(|l| v[i] < l) && right.is_none_or(|r| v[i] < r);
        if above {
            max.push(i);
        }
        if below {
            min.push(i);
        }
    }
    (max, min)
}
