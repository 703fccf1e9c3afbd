//! KB profiles (DBpedia, Wikidata) and the namespace prefix table.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::ConfigError;
use crate::kb::term::Iri;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    Dbpedia,
    Wikidata,
}

impl FromStr for ProfileKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dbpedia" => Ok(ProfileKind::Dbpedia),
            "wikidata" => Ok(ProfileKind::Wikidata),
            other => Err(ConfigError::UnknownProfile(other.to_string())),
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Dbpedia => "dbpedia",
            ProfileKind::Wikidata => "wikidata",
        })
    }
}

/// Namespaces that hold relations, by role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationNamespace {
    /// `dbo:`
    Ontology,
    /// `dbp:`
    Property,
    /// `wdt:`
    Direct,
    /// `p:` (entity to statement node)
    Claim,
    /// `ps:` (statement node to value)
    StatementValue,
    /// `pq:` (statement node to qualifier value)
    Qualifier,
}

impl RelationNamespace {
    pub fn prefix(self) -> &'static str {
        match self {
            RelationNamespace::Ontology => "dbo",
            RelationNamespace::Property => "dbp",
            RelationNamespace::Direct => "wdt",
            RelationNamespace::Claim => "p",
            RelationNamespace::StatementValue => "ps",
            RelationNamespace::Qualifier => "pq",
        }
    }
}

/// Ordered prefix-name to base-IRI table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixTable {
    entries: Vec<(String, String)>,
}

impl PrefixTable {
    pub fn insert(&mut self, name: impl Into<String>, base: impl Into<String>) {
        let name = name.into();
        let base = base.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(entry) => entry.1 = base,
            None => self.entries.push((name, base)),
        }
    }

    pub fn base(&self, name: &str) -> Option<&str> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(n, b)| (n.as_str(), b.as_str()))
    }

    /// Expands `name:local` when `name` is a known prefix; returns the input
    /// unchanged otherwise.
    pub fn expand(&self, text: &str) -> String {
        if let Some((name, rest)) = text.split_once(':') {
            if !rest.starts_with("//") {
                if let Some(base) = self.base(name) {
                    return format!("{base}{rest}");
                }
            }
        }
        text.to_string()
    }

    pub fn expand_iri(&self, text: &str) -> Result<Iri, crate::error::TermError> {
        Iri::new(self.expand(text))
    }

    /// Longest-base compaction, e.g. `http://dbpedia.org/ontology/state` to
    /// `dbo:state`.
    pub fn compact(&self, iri: &Iri) -> String {
        self.entries
            .iter()
            .filter(|(_, base)| iri.as_str().starts_with(base.as_str()))
            .max_by_key(|(_, base)| base.len())
            .map(|(name, base)| format!("{name}:{}", &iri.as_str()[base.len()..]))
            .unwrap_or_else(|| iri.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub kind: ProfileKind,
    pub prefixes: PrefixTable,
    pub type_predicate: Iri,
    pub subclass_predicate: Iri,
    /// Property local names only ever attached to entities directly
    /// (Wikidata P31, P279).
    pub direct_only: BTreeSet<String>,
}

impl Profile {
    pub fn new(kind: ProfileKind) -> Self {
        match kind {
            ProfileKind::Dbpedia => Self::dbpedia(),
            ProfileKind::Wikidata => Self::wikidata(),
        }
    }

    pub fn dbpedia() -> Self {
        let mut prefixes = common_prefixes();
        prefixes.insert("dbo", "http://dbpedia.org/ontology/");
        prefixes.insert("dbp", "http://dbpedia.org/property/");
        prefixes.insert("dbr", "http://dbpedia.org/resource/");
        Self {
            kind: ProfileKind::Dbpedia,
            prefixes,
            type_predicate: Iri::new(RDF_TYPE).unwrap(),
            subclass_predicate: Iri::new(RDFS_SUBCLASS_OF).unwrap(),
            direct_only: BTreeSet::new(),
        }
    }

    pub fn wikidata() -> Self {
        let mut prefixes = common_prefixes();
        prefixes.insert("wd", "http://www.wikidata.org/entity/");
        prefixes.insert("wds", "http://www.wikidata.org/entity/statement/");
        prefixes.insert("wdt", "http://www.wikidata.org/prop/direct/");
        prefixes.insert("p", "http://www.wikidata.org/prop/");
        prefixes.insert("ps", "http://www.wikidata.org/prop/statement/");
        prefixes.insert("pq", "http://www.wikidata.org/prop/qualifier/");
        Self {
            kind: ProfileKind::Wikidata,
            prefixes,
            type_predicate: Iri::new("http://www.wikidata.org/prop/direct/P31").unwrap(),
            subclass_predicate: Iri::new("http://www.wikidata.org/prop/direct/P279").unwrap(),
            direct_only: ["P31", "P279"].into_iter().map(String::from).collect(),
        }
    }

    /// Relation namespaces in preference order for best-effort mapping.
    pub fn relation_namespaces(&self) -> &'static [RelationNamespace] {
        match self.kind {
            ProfileKind::Dbpedia => &[RelationNamespace::Ontology, RelationNamespace::Property],
            ProfileKind::Wikidata => &[
                RelationNamespace::Direct,
                RelationNamespace::Claim,
                RelationNamespace::StatementValue,
                RelationNamespace::Qualifier,
            ],
        }
    }

    pub fn namespace_base(&self, ns: RelationNamespace) -> Option<&str> {
        self.prefixes.base(ns.prefix())
    }

    /// The IRI of relation `local` in namespace `ns`.
    pub fn variant(&self, ns: RelationNamespace, local: &str) -> Option<Iri> {
        let base = self.namespace_base(ns)?;
        Iri::new(format!("{base}{local}")).ok()
    }

    /// Splits a predicate into its relation namespace and local name, using
    /// the longest matching base (`p:` is a prefix of `ps:`).
    pub fn classify<'a>(&self, iri: &'a Iri) -> Option<(RelationNamespace, &'a str)> {
        self.relation_namespaces()
            .iter()
            .filter_map(|&ns| {
                let base = self.namespace_base(ns)?;
                let local = iri.as_str().strip_prefix(base)?;
                (!local.is_empty() && !local.contains(['/', '#'])).then_some((ns, base.len(), local))
            })
            .max_by_key(|&(_, len, _)| len)
            .map(|(ns, _, local)| (ns, local))
    }

    /// Namespaces whose variants of the same relation are interchangeable
    /// for relaxed evaluation.
    pub fn equivalent_namespaces(&self) -> &'static [RelationNamespace] {
        match self.kind {
            ProfileKind::Dbpedia => &[RelationNamespace::Ontology, RelationNamespace::Property],
            ProfileKind::Wikidata => &[],
        }
    }

    pub fn is_direct_only(&self, local: &str) -> bool {
        self.direct_only.contains(local)
    }

    /// Applies a parsed configuration file on top of the built-in defaults.
    pub fn from_config(config: &ProfileConfig) -> Result<Self, ConfigError> {
        let kind: ProfileKind = config.profile.as_deref().unwrap_or("dbpedia").parse()?;
        let mut profile = Self::new(kind);
        for (name, base) in &config.prefixes {
            profile.prefixes.insert(name.clone(), base.clone());
        }
        let iri = |text: &str| {
            profile
                .prefixes
                .expand_iri(text)
                .map_err(|e| ConfigError::Invalid(e.to_string()))
        };
        if let Some(t) = &config.type_predicate {
            let t = iri(t)?;
            profile.type_predicate = t;
        }
        if let Some(s) = &config.subclass_predicate {
            let s = iri(s)?;
            profile.subclass_predicate = s;
        }
        if let Some(direct_only) = &config.direct_only {
            profile.direct_only = direct_only.iter().cloned().collect();
        }
        Ok(profile)
    }
}

fn common_prefixes() -> PrefixTable {
    let mut table = PrefixTable::default();
    table.insert("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#");
    table.insert("rdfs", "http://www.w3.org/2000/01/rdf-schema#");
    table.insert("owl", "http://www.w3.org/2002/07/owl#");
    table.insert("xsd", "http://www.w3.org/2001/XMLSchema#");
    table
}

/// The key-value configuration file (TOML syntax).
///
/// ```toml
/// profile = "wikidata"
/// direct_only = ["P31", "P279"]
///
/// [prefixes]
/// ex = "http://example.org/"
///
/// [generator]
/// endpoint = "http://localhost:8000"
/// timeout_secs = 30
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub profile: Option<String>,
    #[serde(default)]
    pub prefixes: std::collections::BTreeMap<String, String>,
    pub type_predicate: Option<String>,
    pub subclass_predicate: Option<String>,
    pub direct_only: Option<Vec<String>>,
    #[serde(default)]
    pub generator: GeneratorSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub endpoint: Option<String>,
    pub timeout_secs: Option<u64>,
}

impl ProfileConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }
}
