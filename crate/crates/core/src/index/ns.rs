//! Namespaces and well-known IRIs used by the index.

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const IDE: &str = "urn:flexitex:ide#";
pub const OO: &str = "urn:flexitex:oo#";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";

/// Prefixes understood by the query parser.
pub const PREFIXES: &[(&str, &str)] = &[("rdf", RDF), ("IDE", IDE), ("oo", OO)];

pub fn rdf(name: &str) -> String {
    format!("{RDF}{name}")
}

pub fn ide(name: &str) -> String {
    format!("{IDE}{name}")
}

pub fn oo(name: &str) -> String {
    format!("{OO}{name}")
}

/// `rdf:_1`, `rdf:_2`, …: the n-th member of a sequence node.
pub fn rdf_member(n: u64) -> String {
    format!("{RDF}_{n}")
}

pub fn rdf_type() -> String {
    rdf("type")
}

pub fn rdf_seq() -> String {
    rdf("Seq")
}

/// IRI of the syntax node starting at `start` in a document whose content
/// hash prefix is `hash16`.
pub fn node_iri(hash16: &str, start: usize) -> String {
    format!("urn:flexitex:node:{hash16}:{start}")
}

/// IRI of a document's root node.
pub fn root_iri(hash16: &str) -> String {
    format!("urn:flexitex:node:{hash16}:root")
}
