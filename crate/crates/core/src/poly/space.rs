use std::fmt;
use std::sync::Arc;

pub type DimId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DimKind {
    Parameter,
    Variable,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dim {
    pub name: String,
    pub kind: DimKind,
}

/// Ordered dimension registry shared by every polyhedron built over it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Space {
    dims: Vec<Dim>,
}

impl Space {
    pub fn new() -> Self {
        Space { dims: Vec::new() }
    }

    pub fn from_dims(dims: Vec<Dim>) -> Self {
        Space { dims }
    }

    /// Appends a dimension and returns its id. Names are not required to be
    /// unique here; callers that look dims up by name should keep them so.
    pub fn push(&mut self, name: impl Into<String>, kind: DimKind) -> DimId {
        self.dims.push(Dim {
            name: name.into(),
            kind,
        });
        self.dims.len() - 1
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, id: DimId) -> &Dim {
        &self.dims[id]
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn name(&self, id: DimId) -> &str {
        &self.dims[id].name
    }

    pub fn of_kind(&self, kind: DimKind) -> impl Iterator<Item = DimId> + '_ {
        self.dims
            .iter()
            .enumerate()
            .filter(move |(_, d)| d.kind == kind)
            .map(|(i, _)| i)
    }

    pub fn params(&self) -> impl Iterator<Item = DimId> + '_ {
        self.of_kind(DimKind::Parameter)
    }

    pub fn vars(&self) -> impl Iterator<Item = DimId> + '_ {
        self.of_kind(DimKind::Variable)
    }

    pub fn lookup(&self, name: &str) -> Option<DimId> {
        self.dims.iter().position(|d| d.name == name)
    }

    pub fn into_arc(self) -> Arc<Space> {
        Arc::new(self)
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.dims.iter().map(|d| d.name.as_str()).collect();
        write!(f, "[{}]", names.join(", "))
    }
}
