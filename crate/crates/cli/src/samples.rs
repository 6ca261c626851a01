//! Sampled fields from CSV.
//!
//! The header is `x_1,...,x_D,phi` and the rows cover a tensor grid, one
//! row per node, in any order. Lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt;

use conformable::frac::SampledField;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleError {
    /// 1-based line of the offending record, 0 when the problem is global.
    pub line: u64,
    pub message: String,
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for SampleError {}

fn fail<T>(line: u64, message: impl Into<String>) -> Result<T, SampleError> {
    Err(SampleError {
        line,
        message: message.into(),
    })
}

pub fn parse_samples(text: &str, dim: usize) -> Result<SampledField, SampleError> {
    if dim == 0 {
        return fail(0, "dimension must be at least 1");
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let expected: Vec<String> = (1..=dim)
        .map(|i| format!("x_{i}"))
        .chain(std::iter::once("phi".to_string()))
        .collect();
    let header = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return fail(1, format!("unreadable header: {e}")),
    };
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return fail(
            header.position().map_or(1, |p| p.line()),
            format!("header must be `{}`", expected.join(",")),
        );
    }

    let mut points: Vec<(u64, Vec<f64>, f64)> = Vec::new();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return fail(line, format!("unreadable record: {e}"));
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != dim + 1 {
            return fail(line, format!("expected {} fields, found {}", dim + 1, record.len()));
        }
        let mut values = Vec::with_capacity(dim + 1);
        for (k, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                // adding 0.0 folds -0.0 into 0.0
                Ok(v) if v.is_finite() => values.push(v + 0.0),
                _ => return fail(line, format!("`{field}` in column {} is not a finite number", k + 1)),
            }
        }
        let phi = values.pop().expect("dim + 1 values");
        points.push((line, values, phi));
    }
    if points.is_empty() {
        return fail(0, "no samples");
    }

    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); dim];
    for (axis, nodes) in axes.iter_mut().enumerate() {
        nodes.extend(points.iter().map(|p| p.1[axis]));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
    }
    let total = axes.iter().try_fold(1usize, |n, a| n.checked_mul(a.len()));
    if total != Some(points.len()) {
        return fail(
            0,
            format!(
                "{} samples do not form a tensor grid ({} nodes per axis)",
                points.len(),
                axes.iter().map(|a| a.len().to_string()).collect::<Vec<_>>().join("x")
            ),
        );
    }

    let index: Vec<HashMap<u64, usize>> = axes
        .iter()
        .map(|nodes| nodes.iter().enumerate().map(|(k, v)| (v.to_bits(), k)).collect())
        .collect();
    let mut values = vec![None; points.len()];
    for (line, x, phi) in &points {
        let mut flat = 0;
        for axis in 0..dim {
            let k = index[axis][&x[axis].to_bits()];
            flat = flat * axes[axis].len() + k;
        }
        if values[flat].replace(*phi).is_some() {
            return fail(*line, "duplicate grid node");
        }
    }
    let values = values.into_iter().map(|v| v.expect("all nodes filled")).collect();
    SampledField::new(axes, values).map_err(|e| SampleError {
        line: 0,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_a_2d_grid_in_any_order() {
        let mut text = String::from("x_1,x_2,phi\n");
        let mut rows = Vec::new();
        for x in [1.0, 2.0, 3.0, 4.0] {
            for y in [0.5, 1.5, 2.5, 3.5] {
                rows.push(format!("{x},{y},{}\n", x * 10.0 + y));
            }
        }
        rows.reverse();
        text.extend(rows);
        let f = parse_samples(&text, 2).unwrap();
        assert_eq!(f.axes()[0], vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.values()[1], 11.5);
        assert_eq!(f.values()[4], 20.5);
    }

    #[test]
    fn diagnostics_name_the_line() {
        let e = parse_samples("x_1,phi\n1,2\n2,oops\n", 1).unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_samples("x,phi\n1,2\n", 1).unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_samples("x_1,phi\n1,2\n1,3\n", 1).unwrap_err();
        assert!(e.message.contains("tensor grid") || e.message.contains("duplicate"));
        let e = parse_samples("x_1,x_2,phi\n1,1,0\n1,2,0\n2,1,0\n", 2).unwrap_err();
        assert!(e.message.contains("tensor grid"));
    }
}
