//! CSV tables with shortest round-trip float formatting and LF line endings.

/// Shortest decimal string that parses back to `v` exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Table {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flushing to memory")).expect("fields are UTF-8")
    }
}

/// Header names `x_1..x_D`.
pub fn coordinate_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x_{i}")).collect()
}

pub fn point_fields(x: &[f64]) -> Vec<String> {
    x.iter().map(|&v| fmt_f64(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -2.5e-17, 1e300, 123456.789, 1.0 / 3.0, 0.0, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(1.0), "1.0");
    }

    #[test]
    fn renders_with_lf() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1.0".into(), "2.0".into()]);
        assert_eq!(t.render(), "a,b\n1.0,2.0\n");
    }
}
