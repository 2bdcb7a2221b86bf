//! Minimal XML document model with a deterministic serializer.
//!
//! Rendered documents are attribute-only trees; parsing goes through
//! roxmltree and re-serialization fixes indentation (2 spaces), line
//! endings (LF) and attribute order (as stored), so rendering the same
//! scenario twice yields byte-identical output.

use crate::error::ExportError;

#[derive(Debug, Clone, PartialEq)]
pub struct XmlElement {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<XmlElement>,
}

impl XmlElement {
    pub fn new(name: impl Into<String>) -> Self {
        XmlElement {
            name: name.into(),
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn with_attr(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.push((name.into(), value.into()));
        self
    }

    pub fn with_child(mut self, child: XmlElement) -> Self {
        self.children.push(child);
        self
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    /// Replaces an existing attribute or appends a new one.
    pub fn set_attr(&mut self, name: &str, value: impl Into<String>) {
        let value = value.into();
        match self.attrs.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v = value,
            None => self.attrs.push((name.to_string(), value)),
        }
    }

    pub fn child(&self, name: &str) -> Option<&XmlElement> {
        self.children.iter().find(|c| c.name == name)
    }

    pub fn child_mut(&mut self, name: &str) -> Option<&mut XmlElement> {
        self.children.iter_mut().find(|c| c.name == name)
    }

    /// First descendant (depth-first) with the given name.
    pub fn descendant(&self, name: &str) -> Option<&XmlElement> {
        if self.name == name {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.descendant(name))
    }

    /// Applies `f` to every element (including self), depth-first.
    pub fn visit_mut(&mut self, f: &mut impl FnMut(&mut XmlElement)) {
        f(self);
        for child in &mut self.children {
            child.visit_mut(f);
        }
    }

    pub fn visit(&self, f: &mut impl FnMut(&XmlElement)) {
        f(self);
        for child in &self.children {
            child.visit(f);
        }
    }
}

/// Parses an XML document into the element model. Text content and
/// comments are ignored; the generated documents carry data in attributes
/// only.
pub fn parse(text: &str) -> Result<XmlElement, ExportError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| ExportError::Xml {
        detail: e.to_string(),
    })?;
    Ok(convert(doc.root_element()))
}

fn convert(node: roxmltree::Node<'_, '_>) -> XmlElement {
    let mut element = XmlElement::new(node.tag_name().name());
    for attr in node.attributes() {
        element
            .attrs
            .push((attr.name().to_string(), attr.value().to_string()));
    }
    for child in node.children().filter(|c| c.is_element()) {
        element.children.push(convert(child));
    }
    element
}

fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Serializes with an XML declaration, UTF-8, LF line endings and 2-space
/// indentation.
pub fn serialize(root: &XmlElement) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    write_element(root, 0, &mut out);
    out
}

fn write_element(element: &XmlElement, depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push('<');
    out.push_str(&element.name);
    for (name, value) in &element.attrs {
        out.push(' ');
        out.push_str(name);
        out.push_str("=\"");
        out.push_str(&escape(value));
        out.push('"');
    }
    if element.children.is_empty() {
        out.push_str("/>\n");
        return;
    }
    out.push_str(">\n");
    for child in &element.children {
        write_element(child, depth + 1, out);
    }
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str("</");
    out.push_str(&element.name);
    out.push_str(">\n");
}

/// One structural difference between two documents.
#[derive(Debug, Clone, PartialEq)]
pub enum DocDiff {
    AttributeChanged {
        path: String,
        attribute: String,
        left: String,
        right: String,
    },
    AttributeAdded {
        path: String,
        attribute: String,
    },
    AttributeRemoved {
        path: String,
        attribute: String,
    },
    /// Element present only in the right document.
    ChildAdded {
        path: String,
        name: String,
    },
    /// Element present only in the left document.
    ChildRemoved {
        path: String,
        name: String,
    },
}

impl DocDiff {
    /// Location of the difference, for whitelist matching.
    pub fn location(&self) -> String {
        match self {
            DocDiff::AttributeChanged {
                path, attribute, ..
            }
            | DocDiff::AttributeAdded { path, attribute }
            | DocDiff::AttributeRemoved { path, attribute } => format!("{path}@{attribute}"),
            DocDiff::ChildAdded { path, name } | DocDiff::ChildRemoved { path, name } => {
                format!("{path}/{name}")
            }
        }
    }
}

/// Structural diff of two documents. Children are matched by element name
/// and occurrence order; attribute and subtree differences are reported
/// with their element paths.
pub fn diff_documents(left: &XmlElement, right: &XmlElement) -> Vec<DocDiff> {
    let mut diffs = Vec::new();
    diff_elements(left, right, &format!("/{}", left.name), &mut diffs);
    diffs
}

fn diff_elements(left: &XmlElement, right: &XmlElement, path: &str, diffs: &mut Vec<DocDiff>) {
    for (name, value) in &left.attrs {
        match right.attr(name) {
            Some(other) if other == value => {}
            Some(other) => diffs.push(DocDiff::AttributeChanged {
                path: path.to_string(),
                attribute: name.clone(),
                left: value.clone(),
                right: other.to_string(),
            }),
            None => diffs.push(DocDiff::AttributeRemoved {
                path: path.to_string(),
                attribute: name.clone(),
            }),
        }
    }
    for (name, _) in &right.attrs {
        if left.attr(name).is_none() {
            diffs.push(DocDiff::AttributeAdded {
                path: path.to_string(),
                attribute: name.clone(),
            });
        }
    }

    // Pair children of the same name by occurrence index.
    let names: Vec<&str> = {
        let mut seen = Vec::new();
        for c in left.children.iter().chain(&right.children) {
            if !seen.contains(&c.name.as_str()) {
                seen.push(&c.name);
            }
        }
        seen
    };
    for name in names {
        let lefts: Vec<&XmlElement> = left.children.iter().filter(|c| c.name == name).collect();
        let rights: Vec<&XmlElement> = right.children.iter().filter(|c| c.name == name).collect();
        for i in 0..lefts.len().max(rights.len()) {
            let child_path = if lefts.len().max(rights.len()) > 1 {
                format!("{path}/{name}[{i}]")
            } else {
                format!("{path}/{name}")
            };
            match (lefts.get(i), rights.get(i)) {
                (Some(l), Some(r)) => diff_elements(l, r, &child_path, diffs),
                (Some(_), None) => diffs.push(DocDiff::ChildRemoved {
                    path: path.to_string(),
                    name: name.to_string(),
                }),
                (None, Some(_)) => diffs.push(DocDiff::ChildAdded {
                    path: path.to_string(),
                    name: name.to_string(),
                }),
                (None, None) => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_stable() {
        let doc = XmlElement::new("Root")
            .with_attr("a", "1")
            .with_child(XmlElement::new("Leaf").with_attr("x", "a<b"))
            .with_child(XmlElement::new("Empty"));
        let text = serialize(&doc);
        let reparsed = parse(&text).unwrap();
        assert_eq!(doc, reparsed);
        assert_eq!(text, serialize(&reparsed));
        assert!(text.contains("x=\"a&lt;b\""));
    }

    #[test]
    fn diff_reports_attr_and_children() {
        let a = XmlElement::new("R")
            .with_attr("k", "1")
            .with_child(XmlElement::new("C"));
        let mut b = a.clone();
        b.set_attr("k", "2");
        b.children.push(XmlElement::new("D"));
        let diffs = diff_documents(&a, &b);
        assert_eq!(diffs.len(), 2);
        assert!(diffs.iter().any(|d| d.location() == "/R@k"));
        assert!(diffs.iter().any(|d| d.location() == "/R/D"));
    }
}
