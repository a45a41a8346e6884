use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entity categories across the three corpus families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    Chemical,
    Disease,
    #[serde(rename = "Gene/Protein")]
    GeneProtein,
    Type,
    Site,
    Size,
    Subtype,
    Grade,
    #[serde(rename = "TNM")]
    Tnm,
    Metas,
}

/// The seven pathology report variables, in report-schema order.
pub const PATHOLOGY_KINDS: [EntityKind; 7] = [
    EntityKind::Type,
    EntityKind::Site,
    EntityKind::Size,
    EntityKind::Subtype,
    EntityKind::Grade,
    EntityKind::Tnm,
    EntityKind::Metas,
];

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Chemical => "Chemical",
            EntityKind::Disease => "Disease",
            EntityKind::GeneProtein => "Gene/Protein",
            EntityKind::Type => "Type",
            EntityKind::Site => "Site",
            EntityKind::Size => "Size",
            EntityKind::Subtype => "Subtype",
            EntityKind::Grade => "Grade",
            EntityKind::Tnm => "TNM",
            EntityKind::Metas => "Metas",
        }
    }

    pub fn is_pathology(self) -> bool {
        PATHOLOGY_KINDS.contains(&self)
    }

    pub fn parse_pathology(s: &str) -> Result<Self> {
        PATHOLOGY_KINDS
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind {
                kind: s.to_string(),
                expected: PATHOLOGY_KINDS.map(EntityKind::as_str).join(", "),
            })
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const ALL: [EntityKind; 10] = [
            EntityKind::Chemical,
            EntityKind::Disease,
            EntityKind::GeneProtein,
            EntityKind::Type,
            EntityKind::Site,
            EntityKind::Size,
            EntityKind::Subtype,
            EntityKind::Grade,
            EntityKind::Tnm,
            EntityKind::Metas,
        ];
        ALL.iter()
            .copied()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownKind {
                kind: s.to_string(),
                expected: ALL.map(EntityKind::as_str).join(", "),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "CDR")]
    Cdr,
    ChemProt,
    #[serde(rename = "TCGA")]
    Tcga,
    #[serde(rename = "TFAH")]
    Tfah,
    #[serde(rename = "synthetic")]
    Synthetic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Character (not byte) offsets into the raw text.
    pub char_start: usize,
    pub char_end: usize,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntityMention {
    pub id: String,
    pub kind: EntityKind,
    /// Inclusive token range.
    pub token_span: (usize, usize),
    pub char_start: usize,
    pub char_end: usize,
    pub normalized_id: Option<String>,
}

impl EntityMention {
    pub fn start(&self) -> usize {
        self.token_span.0
    }

    /// Ontology identifiers; composite annotations carry several joined by `|`.
    pub fn normalized_ids(&self) -> impl Iterator<Item = &str> {
        self.normalized_id
            .as_deref()
            .into_iter()
            .flat_map(|s| s.split('|'))
            .filter(|s| !s.is_empty() && *s != "-1")
    }
}

/// Undirected dependency edge stored as (child, head).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepEdge {
    pub child: usize,
    pub head: usize,
    pub label: String,
}

/// A gold relation between two entity references. For CDR the references
/// are normalized concept ids; otherwise they are mention ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldRelation {
    pub head: String,
    pub tail: String,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub id: String,
    pub source: Source,
    pub text: String,
    pub tokens: Vec<Token>,
    /// Half-open token ranges of sentences.
    pub sentences: Vec<(usize, usize)>,
    pub mentions: Vec<EntityMention>,
    pub relations: Vec<GoldRelation>,
    pub dep_edges: Vec<DepEdge>,
    /// Trailing PAD positions added by length normalization.
    pub padding: usize,
    /// Token count before length normalization.
    pub original_len: usize,
}

impl Document {
    /// Tokenizes `text` and records sentence boundaries.
    pub fn from_text(id: impl Into<String>, source: Source, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = super::tokenize::tokenize(&text);
        let sentences = super::tokenize::sentence_spans(&tokens);
        let n = tokens.len();
        Document {
            id: id.into(),
            source,
            text,
            tokens,
            sentences,
            mentions: Vec::new(),
            relations: Vec::new(),
            dep_edges: Vec::new(),
            padding: 0,
            original_len: n,
        }
    }

    /// Sequence length including PAD positions.
    pub fn len(&self) -> usize {
        self.tokens.len() + self.padding
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn real_len(&self) -> usize {
        self.tokens.len()
    }

    /// Surface at position `i`, with [`super::PAD`] for padded positions.
    pub fn surface(&self, i: usize) -> &str {
        self.tokens.get(i).map_or(super::PAD, |t| t.surface.as_str())
    }

    pub fn sentence_of(&self, token: usize) -> Option<usize> {
        self.sentences.iter().position(|&(s, e)| s <= token && token < e)
    }

    /// Maps a character range onto the covering inclusive token span.
    pub fn char_range_to_tokens(&self, start: usize, end: usize) -> Option<(usize, usize)> {
        let mut hit = self
            .tokens
            .iter()
            .filter(|t| t.char_start < end && t.char_end > start)
            .map(|t| t.index);
        let first = hit.next()?;
        let last = hit.next_back().unwrap_or(first);
        Some((first, last))
    }

    /// Adds a mention from character offsets, resolving its token span.
    pub fn add_mention(
        &mut self,
        id: impl Into<String>,
        kind: EntityKind,
        char_start: usize,
        char_end: usize,
        normalized_id: Option<String>,
    ) -> Result<()> {
        let id = id.into();
        let n_chars = self.text.chars().count();
        if char_start >= char_end || char_end > n_chars {
            return Err(Error::invalid(format!(
                "mention {id} offsets {char_start}..{char_end} outside text of {n_chars} characters"
            )));
        }
        let span = self.char_range_to_tokens(char_start, char_end).ok_or_else(|| {
            Error::invalid(format!("mention {id} offsets {char_start}..{char_end} cover no token"))
        })?;
        self.mentions.push(EntityMention {
            id,
            kind,
            token_span: span,
            char_start,
            char_end,
            normalized_id,
        });
        Ok(())
    }

    pub fn mention_index(&self, id: &str) -> Option<usize> {
        self.mentions.iter().position(|m| m.id == id)
    }

    /// Linear-chain edges `(i, i+1)`, used when no parse is available.
    pub fn linear_chain(&mut self) {
        self.dep_edges = (1..self.tokens.len())
            .map(|i| DepEdge {
                child: i - 1,
                head: i,
                label: "next".into(),
            })
            .collect();
    }
}

/// Class vocabulary of one task. `negative` marks the null class that is
/// excluded from macro averaging.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet {
    pub name: String,
    pub labels: Vec<String>,
    pub negative: Option<usize>,
}

impl LabelSet {
    pub fn new(name: impl Into<String>, labels: &[&str], negative: Option<usize>) -> Arc<Self> {
        Arc::new(LabelSet {
            name: name.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            negative,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn cdr() -> Arc<Self> {
        LabelSet::new("CDR", &["null", "CID"], Some(0))
    }

    pub fn chemprot() -> Arc<Self> {
        LabelSet::new("ChemProt", &["negative", "CPR:3", "CPR:4", "CPR:5", "CPR:6", "CPR:9"], Some(0))
    }

    pub fn pathology(kind: EntityKind) -> Arc<Self> {
        LabelSet::new(kind.as_str(), &["null", kind.as_str()], Some(0))
    }
}

/// A labeled candidate pair; `head` and `tail` index into the document's mentions.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationInstance {
    pub doc_id: String,
    pub head: usize,
    pub tail: usize,
    pub label: usize,
    pub label_set: Arc<LabelSet>,
}

#[derive(Clone, Debug, Default)]
pub struct ParsedCorpus {
    pub documents: Vec<Document>,
    pub instances: Vec<RelationInstance>,
    /// Gold relations that produced no instance (e.g. cross-sentence ChemProt pairs).
    pub skipped_relations: usize,
}
