use super::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    /// `x_i`, zero-based axis index.
    Coordinate(usize),
    /// The scalar field `phi`.
    Field,
    /// `g_i`, the α-derivative of the field along axis `i`, treated as an
    /// independent argument of the Lagrangian density.
    AlphaDerivative(usize),
}

/// An ordered set of named variables with roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSpace {
    vars: Vec<(String, VarRole)>,
}

pub const FIELD: &str = "phi";

pub fn coordinate_name(axis: usize) -> String {
    format!("x_{}", axis + 1)
}

pub fn alpha_derivative_name(axis: usize) -> String {
    format!("g_{}", axis + 1)
}

impl VarSpace {
    pub fn new(vars: Vec<(String, VarRole)>) -> Result<VarSpace, ExprError> {
        for (i, (name, _)) in vars.iter().enumerate() {
            if vars[..i].iter().any(|(n, _)| n == name) {
                return Err(ExprError::DuplicateVariable(name.clone()));
            }
        }
        Ok(VarSpace { vars })
    }

    /// `x_1..x_D`.
    pub fn coordinates(dim: usize) -> VarSpace {
        VarSpace {
            vars: (0..dim)
                .map(|i| (coordinate_name(i), VarRole::Coordinate(i)))
                .collect(),
        }
    }

    /// `phi, g_1..g_D`: the arguments of a Lagrangian density.
    pub fn lagrangian(dim: usize) -> VarSpace {
        let mut vars = vec![(FIELD.to_string(), VarRole::Field)];
        vars.extend((0..dim).map(|i| (alpha_derivative_name(i), VarRole::AlphaDerivative(i))));
        VarSpace { vars }
    }

    /// `x_1..x_D, phi`: the arguments of a field transformation `C`.
    pub fn generator(dim: usize) -> VarSpace {
        let mut space = VarSpace::coordinates(dim);
        space.vars.push((FIELD.to_string(), VarRole::Field));
        space
    }

    /// `x_1..x_D, phi, g_1..g_D`.
    pub fn full(dim: usize) -> VarSpace {
        let mut space = VarSpace::generator(dim);
        space
            .vars
            .extend((0..dim).map(|i| (alpha_derivative_name(i), VarRole::AlphaDerivative(i))));
        space
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|(n, _)| n == name)
    }

    pub fn role_of(&self, name: &str) -> Option<VarRole> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, r)| *r)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|(n, _)| n.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, VarRole)> {
        self.vars.iter().map(|(n, r)| (n.as_str(), *r))
    }

    pub fn name(&self, index: usize) -> &str {
        &self.vars[index].0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        let vars = vec![
            ("x_1".to_string(), VarRole::Coordinate(0)),
            ("x_1".to_string(), VarRole::Coordinate(1)),
        ];
        assert_eq!(
            VarSpace::new(vars),
            Err(ExprError::DuplicateVariable("x_1".into()))
        );
    }

    #[test]
    fn standard_spaces() {
        let s = VarSpace::full(2);
        let names: Vec<_> = s.names().collect();
        assert_eq!(names, ["x_1", "x_2", "phi", "g_1", "g_2"]);
        assert_eq!(s.role_of("g_2"), Some(VarRole::AlphaDerivative(1)));
        assert_eq!(VarSpace::lagrangian(1).index_of("g_1"), Some(1));
    }
}
