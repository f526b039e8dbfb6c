use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{CellAddress, ModelError};

/// Case-insensitive lookup key. Display names keep their original case.
pub(crate) fn fold(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Declarative member entry, as written in a model file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    /// Display hint for clients (e.g. "percent"). The engine ignores it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

impl MemberDef {
    pub fn new(name: impl Into<String>) -> Self {
        MemberDef { name: name.into(), aliases: Vec::new(), parent: None, format: None }
    }

    pub fn alias(mut self, alias: impl Into<String>) -> Self {
        self.aliases.push(alias.into());
        self
    }

    pub fn parent(mut self, parent: impl Into<String>) -> Self {
        self.parent = Some(parent.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionDef {
    pub name: String,
    pub members: Vec<MemberDef>,
}

impl DimensionDef {
    pub fn new(name: impl Into<String>, members: Vec<MemberDef>) -> Self {
        DimensionDef { name: name.into(), members }
    }

    /// A flat dimension from plain member names.
    pub fn flat<S: AsRef<str>>(name: impl Into<String>, members: &[S]) -> Self {
        DimensionDef {
            name: name.into(),
            members: members.iter().map(|m| MemberDef::new(m.as_ref())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub name: String,
    pub aliases: Vec<String>,
    pub parent: Option<usize>,
    pub format: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Dimension {
    name: String,
    members: Vec<Member>,
    lookup: HashMap<String, usize>,
    children: Vec<Vec<usize>>,
}

impl Dimension {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, ordinal: usize) -> &Member {
        &self.members[ordinal]
    }

    pub fn member_name(&self, ordinal: usize) -> &str {
        &self.members[ordinal].name
    }

    /// Resolves a canonical name or alias, ignoring case.
    pub fn find(&self, name: &str) -> Option<usize> {
        self.lookup.get(&fold(name)).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<usize, ModelError> {
        self.find(name).ok_or_else(|| ModelError::UnknownMember {
            dimension: self.name.clone(),
            member: name.to_string(),
        })
    }

    /// Direct children in member order.
    pub fn children(&self, ordinal: usize) -> &[usize] {
        &self.children[ordinal]
    }

    /// Every member below `ordinal` in the hierarchy, in member order.
    pub fn descendants(&self, ordinal: usize) -> Vec<usize> {
        let mut below = vec![false; self.members.len()];
        let mut stack = self.children[ordinal].clone();
        while let Some(m) = stack.pop() {
            if !below[m] {
                below[m] = true;
                stack.extend_from_slice(&self.children[m]);
            }
        }
        (0..self.members.len()).filter(|&m| below[m]).collect()
    }

    pub fn is_leaf_in_hierarchy(&self, ordinal: usize) -> bool {
        self.children[ordinal].is_empty()
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.members.len()).filter(|&m| self.members[m].parent.is_none())
    }

    /// Distance to the hierarchy root (roots have depth 0).
    pub fn depth(&self, ordinal: usize) -> usize {
        let mut depth = 0;
        let mut cur = ordinal;
        while let Some(p) = self.members[cur].parent {
            depth += 1;
            cur = p;
        }
        depth
    }

    pub fn has_hierarchy(&self) -> bool {
        self.members.iter().any(|m| m.parent.is_some())
    }

    fn build(def: &DimensionDef) -> Result<Dimension, ModelError> {
        let dim_name = def.name.trim().to_string();
        if dim_name.is_empty() {
            return Err(ModelError::EmptyName { dimension: def.name.clone() });
        }
        if def.members.is_empty() {
            return Err(ModelError::EmptyDimension { dimension: dim_name });
        }
        let mut lookup = HashMap::new();
        for (ordinal, m) in def.members.iter().enumerate() {
            if m.name.trim().is_empty() {
                return Err(ModelError::EmptyName { dimension: dim_name });
            }
            for label in std::iter::once(&m.name).chain(&m.aliases) {
                if label.trim().is_empty() {
                    return Err(ModelError::EmptyName { dimension: dim_name });
                }
                if lookup.insert(fold(label), ordinal).is_some() {
                    return Err(ModelError::DuplicateMember {
                        dimension: dim_name,
                        member: label.trim().to_string(),
                    });
                }
            }
        }

        let mut members = Vec::with_capacity(def.members.len());
        for m in &def.members {
            let parent = match &m.parent {
                None => None,
                Some(p) => Some(*lookup.get(&fold(p)).ok_or_else(|| ModelError::UnknownParent {
                    dimension: dim_name.clone(),
                    member: m.name.clone(),
                    parent: p.clone(),
                })?),
            };
            members.push(Member {
                name: m.name.trim().to_string(),
                aliases: m.aliases.iter().map(|a| a.trim().to_string()).collect(),
                parent,
                format: m.format.clone(),
            });
        }

        // A forest has every member reach a root within `len` steps.
        for start in 0..members.len() {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = members[cur].parent {
                cur = p;
                steps += 1;
                if steps > members.len() {
                    return Err(ModelError::ParentCycle {
                        dimension: dim_name,
                        member: members[start].name.clone(),
                    });
                }
            }
        }

        let mut children = vec![Vec::new(); members.len()];
        for (ordinal, m) in members.iter().enumerate() {
            if let Some(p) = m.parent {
                children[p].push(ordinal);
            }
        }

        Ok(Dimension { name: dim_name, members, lookup, children })
    }

    pub fn to_def(&self) -> DimensionDef {
        DimensionDef {
            name: self.name.clone(),
            members: self
                .members
                .iter()
                .map(|m| MemberDef {
                    name: m.name.clone(),
                    aliases: m.aliases.clone(),
                    parent: m.parent.map(|p| self.members[p].name.clone()),
                    format: m.format.clone(),
                })
                .collect(),
        }
    }
}

/// The dimensional layout of a model: ordered dimensions, their members and
/// hierarchies, and the mixed-radix strides that address the dense cube.
///
/// Addresses are row-major: the first dimension varies slowest, so linear
/// order is lexicographic order over dimension ordinals.
#[derive(Debug, Clone)]
pub struct ModelStructure {
    name: String,
    dimensions: Vec<Dimension>,
    lookup: HashMap<String, usize>,
    strides: Vec<usize>,
    total: usize,
}

impl ModelStructure {
    pub fn build(name: impl Into<String>, defs: &[DimensionDef]) -> Result<ModelStructure, ModelError> {
        if defs.len() < 2 {
            return Err(ModelError::TooFewDimensions(defs.len()));
        }
        let mut dimensions = Vec::with_capacity(defs.len());
        let mut lookup = HashMap::new();
        for (i, def) in defs.iter().enumerate() {
            let dim = Dimension::build(def)?;
            if lookup.insert(fold(&dim.name), i).is_some() {
                return Err(ModelError::DuplicateDimension(dim.name));
            }
            dimensions.push(dim);
        }

        let mut strides = vec![0; dimensions.len()];
        let mut total: usize = 1;
        for (i, dim) in dimensions.iter().enumerate().rev() {
            strides[i] = total;
            total = total.checked_mul(dim.len()).ok_or(ModelError::TooLarge)?;
        }

        Ok(ModelStructure { name: name.into(), dimensions, lookup, strides, total })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    pub fn dimension(&self, index: usize) -> &Dimension {
        &self.dimensions[index]
    }

    pub fn dimension_count(&self) -> usize {
        self.dimensions.len()
    }

    pub fn find_dimension(&self, name: &str) -> Option<usize> {
        self.lookup.get(&fold(name)).copied()
    }

    pub fn resolve_dimension(&self, name: &str) -> Result<usize, ModelError> {
        self.find_dimension(name).ok_or_else(|| ModelError::UnknownDimension(name.to_string()))
    }

    pub fn total_cells(&self) -> usize {
        self.total
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn shape(&self) -> Vec<usize> {
        self.dimensions.iter().map(Dimension::len).collect()
    }

    pub fn linear_index(&self, address: &CellAddress) -> Result<usize, ModelError> {
        let ordinals = address.ordinals();
        if ordinals.len() != self.dimensions.len() {
            return Err(ModelError::AddressArity { expected: self.dimensions.len(), got: ordinals.len() });
        }
        let mut linear = 0;
        for (i, (&ordinal, dim)) in ordinals.iter().zip(&self.dimensions).enumerate() {
            if ordinal >= dim.len() {
                return Err(ModelError::OrdinalOutOfRange {
                    dimension: dim.name.clone(),
                    ordinal,
                    count: dim.len(),
                });
            }
            linear += ordinal * self.strides[i];
        }
        Ok(linear)
    }

    pub fn address_of(&self, linear: usize) -> Result<CellAddress, ModelError> {
        if linear >= self.total {
            return Err(ModelError::IndexOutOfRange { index: linear, total: self.total });
        }
        Ok(CellAddress::new(
            (0..self.dimensions.len()).map(|i| self.coordinate(linear, i)).collect(),
        ))
    }

    /// Ordinal of `dimension` within the cell at `linear`. No bounds check.
    #[inline]
    pub fn coordinate(&self, linear: usize, dimension: usize) -> usize {
        (linear / self.strides[dimension]) % self.dimensions[dimension].len()
    }

    /// Builds an address from `(dimension, member)` name pairs covering every
    /// dimension exactly once, in any order.
    pub fn address_from_names<D: AsRef<str>, M: AsRef<str>>(
        &self,
        pairs: &[(D, M)],
    ) -> Result<CellAddress, ModelError> {
        let mut ordinals = vec![None; self.dimensions.len()];
        for (dim_name, member) in pairs {
            let d = self.resolve_dimension(dim_name.as_ref())?;
            if ordinals[d].is_some() {
                return Err(ModelError::RepeatedDimension(self.dimensions[d].name.clone()));
            }
            ordinals[d] = Some(self.dimensions[d].resolve(member.as_ref())?);
        }
        let ordinals = ordinals
            .into_iter()
            .enumerate()
            .map(|(d, o)| o.ok_or_else(|| ModelError::MissingDimension(self.dimensions[d].name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CellAddress::new(ordinals))
    }

    /// Parses `DIM=Member,DIM=Member,...`. Members containing commas are
    /// double-quoted, CSV style: `ORG=North,"PRODUCT=A, B"`.
    pub fn parse_address(&self, text: &str) -> Result<CellAddress, ModelError> {
        let malformed = || ModelError::MalformedAddress(text.to_string());
        let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
        let record = reader.records().next().ok_or_else(malformed)?.map_err(|_| malformed())?;
        let pairs = record
            .iter()
            .map(|field| field.split_once('=').map(|(d, m)| (d.trim(), m.trim())).ok_or_else(malformed))
            .collect::<Result<Vec<_>, _>>()?;
        self.address_from_names(&pairs)
    }

    /// Canonical member names for an address, in dimension order.
    pub fn member_names(&self, address: &CellAddress) -> Vec<&str> {
        address
            .ordinals()
            .iter()
            .zip(&self.dimensions)
            .map(|(&o, d)| d.member_name(o))
            .collect()
    }

    /// `DIM=Member` pairs joined by commas; the form the CLI accepts.
    pub fn describe(&self, address: &CellAddress) -> String {
        self.dimensions
            .iter()
            .zip(address.ordinals())
            .map(|(d, &o)| format!("{}={}", d.name, d.member_name(o)))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn to_defs(&self) -> Vec<DimensionDef> {
        self.dimensions.iter().map(Dimension::to_def).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ModelStructure {
        ModelStructure::build(
            "toy",
            &[
                DimensionDef::new(
                    "TIME",
                    vec![
                        MemberDef::new("Qtr1").parent("Year"),
                        MemberDef::new("Qtr2").parent("Year"),
                        MemberDef::new("Year"),
                    ],
                ),
                DimensionDef::flat("SCENARIO", &["Actuals", "Budget"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn parse_address_text() {
        let s = ModelStructure::build(
            "t",
            &[DimensionDef::flat("A", &["x", "y, z"]), DimensionDef::flat("B", &["Net sales"])],
        )
        .unwrap();
        let a = s.parse_address("B=Net sales,\"A=y, z\"").unwrap();
        assert_eq!(a.ordinals(), &[1, 0]);
        assert!(matches!(s.parse_address("A=x"), Err(ModelError::MissingDimension(_))));
        assert!(matches!(s.parse_address("A=x,B"), Err(ModelError::MalformedAddress(_))));
    }

    #[test]
    fn two_by_one_strides_follow_declared_order() {
        // Enumerate by hand: {A,B} x {X} is [A,X]=0, [B,X]=1.
        let s = ModelStructure::build(
            "t",
            &[DimensionDef::flat("D1", &["A", "B"]), DimensionDef::flat("D2", &["X"])],
        )
        .unwrap();
        assert_eq!(s.total_cells(), 2);
        assert_eq!(s.strides(), &[1, 1]);
        assert_eq!(s.linear_index(&CellAddress::new(vec![1, 0])).unwrap(), 1);

        // Reversed declaration: {X} x {A,B}.
        let s = ModelStructure::build(
            "t",
            &[DimensionDef::flat("D2", &["X"]), DimensionDef::flat("D1", &["A", "B"])],
        )
        .unwrap();
        assert_eq!(s.strides(), &[2, 1]);
        let mut seen = [false; 2];
        for b in 0..2 {
            let i = s.linear_index(&CellAddress::new(vec![0, b])).unwrap();
            assert!(!seen[i]);
            seen[i] = true;
        }
    }

    #[test]
    fn single_dimension_is_rejected() {
        let err = ModelStructure::build("t", &[DimensionDef::flat("D", &["A"])]).unwrap_err();
        assert!(matches!(err, ModelError::TooFewDimensions(1)));
    }

    #[test]
    fn duplicate_alias_is_rejected_case_insensitively() {
        let err = ModelStructure::build(
            "t",
            &[
                DimensionDef::new("D", vec![MemberDef::new("Sales"), MemberDef::new("Total").alias("SALES")]),
                DimensionDef::flat("E", &["X"]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::DuplicateMember { .. }), "{err}");
    }

    #[test]
    fn unknown_parent_and_cycles() {
        let err = ModelStructure::build(
            "t",
            &[
                DimensionDef::new("D", vec![MemberDef::new("A").parent("Nope")]),
                DimensionDef::flat("E", &["X"]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::UnknownParent { .. }));

        let err = ModelStructure::build(
            "t",
            &[
                DimensionDef::new("D", vec![MemberDef::new("A").parent("B"), MemberDef::new("B").parent("A")]),
                DimensionDef::flat("E", &["X"]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::ParentCycle { .. }));

        let err = ModelStructure::build(
            "t",
            &[DimensionDef::new("D", vec![MemberDef::new("A").parent("A")]), DimensionDef::flat("E", &["X"])],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::ParentCycle { .. }));
    }

    #[test]
    fn empty_dimension_and_duplicate_dimension() {
        let err = ModelStructure::build("t", &[DimensionDef::new("D", vec![]), DimensionDef::flat("E", &["X"])])
            .unwrap_err();
        assert!(matches!(err, ModelError::EmptyDimension { .. }));
        let err = ModelStructure::build("t", &[DimensionDef::flat("D", &["A"]), DimensionDef::flat("d", &["X"])])
            .unwrap_err();
        assert!(matches!(err, ModelError::DuplicateDimension(_)));
    }

    #[test]
    fn hierarchy_queries() {
        let s = toy();
        let time = s.dimension(0);
        assert_eq!(time.children(2), &[0, 1]);
        assert!(time.is_leaf_in_hierarchy(0));
        assert_eq!(time.descendants(2), vec![0, 1]);
        assert_eq!(time.depth(0), 1);
        assert_eq!(time.roots().collect::<Vec<_>>(), vec![2]);
        assert_eq!(time.find("qtr1"), Some(0));
    }

    #[test]
    fn address_from_names_any_order() {
        let s = toy();
        let a = s.address_from_names(&[("scenario", "Budget"), ("TIME", "Year")]).unwrap();
        assert_eq!(a.ordinals(), &[2, 1]);
        assert_eq!(s.describe(&a), "TIME=Year,SCENARIO=Budget");
        assert!(matches!(
            s.address_from_names(&[("TIME", "Year")]),
            Err(ModelError::MissingDimension(_))
        ));
        assert!(matches!(
            s.address_from_names(&[("TIME", "Year"), ("SCENARIO", "Fcst")]),
            Err(ModelError::UnknownMember { .. })
        ));
    }

    #[test]
    fn out_of_range_ordinal() {
        let s = toy();
        assert!(matches!(
            s.linear_index(&CellAddress::new(vec![3, 0])),
            Err(ModelError::OrdinalOutOfRange { .. })
        ));
        assert!(matches!(s.linear_index(&CellAddress::new(vec![0])), Err(ModelError::AddressArity { .. })));
        assert!(s.address_of(s.total_cells()).is_err());
    }
}
