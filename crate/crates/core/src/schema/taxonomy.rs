//! The embedded feature taxonomy.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::FeatureGroup;

const EMBEDDED: &str = include_str!("taxonomy.txt");

/// One node of the taxonomy tree. The root has an empty path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyNode {
    pub path: String,
    pub label: String,
    /// False when no dataset adapter produces features under this node.
    pub adapter: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TaxonomyNode>,
}

impl TaxonomyNode {
    pub fn slug(&self) -> &str {
        self.path.rsplit('/').next().unwrap_or("")
    }

    pub fn depth(&self) -> usize {
        if self.path.is_empty() {
            0
        } else {
            self.path.split('/').count()
        }
    }

    /// Top-level group this node sits under; `None` for the root.
    pub fn group(&self) -> Option<FeatureGroup> {
        group_of_path(&self.path)
    }

    pub fn child(&self, slug: &str) -> Option<&TaxonomyNode> {
        self.children.iter().find(|c| c.slug() == slug)
    }

    /// Depth-first, pre-order walk over this node and its descendants.
    pub fn walk(&self) -> Vec<&TaxonomyNode> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(node.children.iter().rev());
        }
        out
    }
}

/// Group implied by the first segment of a taxonomy path.
pub fn group_of_path(path: &str) -> Option<FeatureGroup> {
    match path.split('/').next()? {
        "domain" => Some(FeatureGroup::Domain),
        "contextual" => Some(FeatureGroup::Contextual),
        "behavioral" => Some(FeatureGroup::Behavioral),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    root: TaxonomyNode,
}

impl Taxonomy {
    /// The taxonomy shipped with the crate.
    pub fn embedded() -> Self {
        Self::parse(EMBEDDED).expect("embedded taxonomy is well formed")
    }

    pub fn root(&self) -> &TaxonomyNode {
        &self.root
    }

    /// Resolve a slash-delimited lowercase path; `""` is the root.
    pub fn lookup(&self, path: &str) -> Option<&TaxonomyNode> {
        if path.is_empty() {
            return Some(&self.root);
        }
        let mut node = &self.root;
        for slug in path.split('/') {
            node = node.child(slug)?;
        }
        Some(node)
    }

    /// Parse the indented outline format used by the embedded data file.
    pub fn parse(text: &str) -> crate::Result<Self> {
        let mut root = TaxonomyNode {
            path: String::new(),
            label: "Applicable Features".to_string(),
            adapter: true,
            children: Vec::new(),
        };
        // Stack of child-index chains from the root to the last inserted node.
        let mut chain: Vec<usize> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let trimmed = raw.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let indent = raw.len() - trimmed.len();
            if indent % 2 != 0 {
                return Err(parse_err(lineno, "odd indentation"));
            }
            let level = indent / 2;
            if level > chain.len() {
                return Err(parse_err(lineno, "indentation skips a level"));
            }
            let mut fields = trimmed.split('|').map(str::trim);
            let slug = fields.next().unwrap_or("");
            let label = fields
                .next()
                .ok_or_else(|| parse_err(lineno, "missing label"))?;
            let adapter = match fields.next() {
                None => true,
                Some("no-adapter") => false,
                Some(other) => return Err(parse_err(lineno, other)),
            };
            if slug.is_empty()
                || !slug
                    .bytes()
                    .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
            {
                return Err(parse_err(lineno, "slug must be lowercase snake case"));
            }
            chain.truncate(level);
            let parent = descend_mut(&mut root, &chain);
            let path = if parent.path.is_empty() {
                slug.to_string()
            } else {
                alloc::format!("{}/{}", parent.path, slug)
            };
            if parent.child(slug).is_some() {
                return Err(parse_err(lineno, "duplicate path"));
            }
            parent.children.push(TaxonomyNode {
                path,
                label: label.to_string(),
                adapter,
                children: Vec::new(),
            });
            chain.push(parent.children.len() - 1);
        }
        Ok(Self { root })
    }
}

fn descend_mut<'a>(root: &'a mut TaxonomyNode, chain: &[usize]) -> &'a mut TaxonomyNode {
    let mut node = root;
    for &i in chain {
        node = &mut node.children[i];
    }
    node
}

fn parse_err(lineno: usize, msg: &str) -> crate::Error {
    crate::Error::Parse(alloc::format!("taxonomy line {}: {}", lineno + 1, msg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_has_one_child_per_group() {
        let tax = Taxonomy::embedded();
        let root = tax.lookup("").unwrap();
        assert_eq!(root.children.len(), 3);
        let groups: Vec<_> = root.children.iter().filter_map(|c| c.group()).collect();
        assert_eq!(
            groups,
            [
                FeatureGroup::Domain,
                FeatureGroup::Contextual,
                FeatureGroup::Behavioral
            ]
        );
    }

    #[test]
    fn cooking_subtree() {
        let tax = Taxonomy::embedded();
        let cooking = tax.lookup("behavioral/cooking").unwrap();
        let labels: Vec<_> = cooking.children.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(
            labels,
            ["number of inhabitants", "gender", "geolocation", "culture"]
        );
    }

    #[test]
    fn unknown_path_is_not_found() {
        let tax = Taxonomy::embedded();
        assert!(tax.lookup("domain/teleportation").is_none());
        assert!(tax.lookup("Domain").is_none());
    }

    #[test]
    fn paths_are_unique() {
        let tax = Taxonomy::embedded();
        let mut paths: Vec<_> = tax.root().walk().iter().map(|n| n.path.clone()).collect();
        let n = paths.len();
        paths.sort();
        paths.dedup();
        assert_eq!(paths.len(), n);
    }

    #[test]
    fn rejects_malformed_outline() {
        assert!(Taxonomy::parse("a | A\n   b | B\n").is_err());
        assert!(Taxonomy::parse("a | A\n    b | B\n").is_err());
        assert!(Taxonomy::parse("Bad | X\n").is_err());
        assert!(Taxonomy::parse("a | A\na | A\n").is_err());
    }
}
