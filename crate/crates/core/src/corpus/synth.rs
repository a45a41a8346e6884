//! Template generator for pathology-style reports with planted mentions and
//! relations. Every report carries one cancer Type mention as its anchor;
//! each variable is planted either in its related phrasing (a positive
//! relation) or in a distractor phrasing (a mention without a relation).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::document::{Document, EntityKind, GoldRelation, ParsedCorpus, Source, PATHOLOGY_KINDS};
use super::pathology::subtask_instances;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    /// Report count; `0` means "as many as the largest per-kind demand".
    pub reports: usize,
    /// Reports carrying a related (positive) mention of each kind.
    pub positives: BTreeMap<EntityKind, usize>,
    /// Reports carrying an unrelated distractor mention of each kind.
    pub negatives: BTreeMap<EntityKind, usize>,
    /// Writing style; also recorded as the document source.
    pub style: Source,
    /// Neutral filler sentences per report.
    pub filler: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            reports: 0,
            positives: BTreeMap::new(),
            negatives: BTreeMap::new(),
            style: Source::Synthetic,
            filler: 2,
        }
    }
}

impl SynthSpec {
    pub fn with_positives(counts: &[(EntityKind, usize)]) -> Self {
        SynthSpec {
            positives: counts.iter().copied().collect(),
            ..Default::default()
        }
    }

    /// Per-variable totals of the hospital (TFAH) column of the report
    /// statistics: 1404 reports, no TNM annotations.
    pub fn tfah() -> Self {
        use EntityKind::*;
        SynthSpec {
            reports: 1404,
            positives: [(Type, 1398), (Site, 1108), (Subtype, 784), (Grade, 885), (Size, 1120), (Metas, 676)]
                .into_iter()
                .collect(),
            style: Source::Tfah,
            ..Default::default()
        }
    }

    /// Per-variable totals of the TCGA column: 4616 reports.
    pub fn tcga() -> Self {
        use EntityKind::*;
        SynthSpec {
            reports: 4616,
            positives: [
                (Type, 4438),
                (Site, 3864),
                (Subtype, 4574),
                (Grade, 4276),
                (Size, 3880),
                (Tnm, 4227),
                (Metas, 2946),
            ]
            .into_iter()
            .collect(),
            style: Source::Tcga,
            ..Default::default()
        }
    }

    /// Balanced single-variable corpus whose label is decided by a lexical cue:
    /// related Size mentions always read "maximum diameter of the neoplasm".
    pub fn separable(reports: usize, style: Source) -> Self {
        let pos = reports / 2;
        SynthSpec {
            reports,
            positives: [(EntityKind::Size, pos)].into_iter().collect(),
            negatives: [(EntityKind::Size, reports - pos)].into_iter().collect(),
            style,
            filler: 1,
        }
    }
}

/// Gold counts the generator planted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynthReport {
    pub documents: usize,
    pub positives: BTreeMap<EntityKind, usize>,
    pub negatives: BTreeMap<EntityKind, usize>,
}

const ORGANS: [(&str, &str); 6] = [
    ("breast", "invasive ductal carcinoma"),
    ("lung", "squamous cell carcinoma"),
    ("kidney and adrenal gland", "clear cell renal cell carcinoma"),
    ("colon", "mucinous adenocarcinoma"),
    ("prostate", "acinar adenocarcinoma"),
    ("stomach", "signet ring cell carcinoma"),
];

const PROCEDURES: [&str; 4] = ["radical nephrectomy", "lobectomy", "partial resection", "mastectomy"];
const GRADES: [&str; 4] = ["grade II", "grade III", "grade II to grade IV", "G2"];
const TNM: [&str; 4] = ["pT3b NX MX", "pT2 N0 M0", "pT1a N1 MX", "pT4 N2 M1"];

fn fillers(style: Source) -> &'static [&'static str] {
    match style {
        Source::Tfah => &[
            "Specimen fixed in formalin and submitted in toto .",
            "Gross examination performed by the attending pathologist .",
            "Immunohistochemistry results are reported separately .",
        ],
        _ => &[
            "The specimen is received fresh and labeled with the patient name .",
            "Sections are submitted in cassettes A1 through A6 .",
            "Margins are inked prior to sectioning .",
        ],
    }
}

struct Builder {
    text: String,
    chars: usize,
    mentions: Vec<(EntityKind, usize, usize)>,
}

impl Builder {
    fn push(&mut self, s: &str) {
        if !self.text.is_empty() {
            self.text.push(' ');
            self.chars += 1;
        }
        self.text.push_str(s);
        self.chars += s.chars().count();
    }

    /// Appends `before`, a mention `value` of `kind`, then `after`; returns its index.
    fn sentence(&mut self, before: &str, kind: EntityKind, value: &str, after: &str) -> usize {
        if !before.is_empty() {
            self.push(before);
        }
        self.push(value);
        let end = self.chars;
        let start = end - value.chars().count();
        if !after.is_empty() {
            self.push(after);
        }
        self.mentions.push((kind, start, end));
        self.mentions.len() - 1
    }
}

/// Generates the corpus; deterministic in (`spec`, `seed`).
pub fn synth_corpus(spec: &SynthSpec, seed: u64) -> Result<(ParsedCorpus, SynthReport)> {
    let demand = |k: &EntityKind| spec.positives.get(k).copied().unwrap_or(0) + spec.negatives.get(k).copied().unwrap_or(0);
    let max_demand = PATHOLOGY_KINDS.iter().map(demand).max().unwrap_or(0);
    let reports = if spec.reports == 0 { max_demand } else { spec.reports };
    if max_demand > reports {
        return Err(Error::invalid(format!(
            "{max_demand} planted mentions of one kind do not fit in {reports} reports"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // plan[doc][kind] = Some(true) related, Some(false) distractor.
    let mut plan: Vec<BTreeMap<EntityKind, bool>> = vec![BTreeMap::new(); reports];
    for kind in PATHOLOGY_KINDS {
        let pos = spec.positives.get(&kind).copied().unwrap_or(0);
        let neg = spec.negatives.get(&kind).copied().unwrap_or(0);
        let mut docs: Vec<usize> = (0..reports).collect();
        docs.shuffle(&mut rng);
        for (i, &d) in docs.iter().take(pos + neg).enumerate() {
            plan[d].insert(kind, i < pos);
        }
    }

    let mut corpus = ParsedCorpus::default();
    for (i, kinds) in plan.into_iter().enumerate() {
        corpus.documents.push(render(i, kinds, spec, &mut rng)?);
    }
    let mut report = SynthReport {
        documents: corpus.documents.len(),
        ..Default::default()
    };
    for kind in PATHOLOGY_KINDS {
        let inst = subtask_instances(&corpus.documents, kind);
        let pos = inst.iter().filter(|i| i.label == 1).count();
        if pos > 0 {
            report.positives.insert(kind, pos);
        }
        let neg = spec.negatives.get(&kind).copied().unwrap_or(0);
        if neg > 0 {
            report.negatives.insert(kind, neg);
        }
        corpus.instances.extend(inst);
    }
    Ok((corpus, report))
}

fn render(i: usize, kinds: BTreeMap<EntityKind, bool>, spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<Document> {
    let (organ, subtype) = *ORGANS.choose(rng).expect("non-empty");
    let mut b = Builder {
        text: String::new(),
        chars: 0,
        mentions: Vec::new(),
    };
    let anchor_intro = match spec.style {
        Source::Tfah => "Primary site :",
        _ => "Specimen :",
    };
    let anchor = b.sentence(anchor_intro, EntityKind::Type, organ, ".");
    let mut relations = Vec::new();

    let mut sections: Vec<(EntityKind, bool)> = kinds.into_iter().collect();
    let filler_pool = fillers(spec.style);
    let mut order: Vec<Option<(EntityKind, bool)>> = sections.drain(..).map(Some).collect();
    order.extend((0..spec.filler).map(|_| None));
    order.shuffle(rng);

    for section in order {
        let Some((kind, related)) = section else {
            b.push(filler_pool.choose(rng).expect("non-empty"));
            continue;
        };
        let n_cm = rng.gen_range(1..=12);
        let (a, total) = {
            let t = rng.gen_range(2..=15);
            (rng.gen_range(0..=t), t)
        };
        let side = if rng.gen_bool(0.5) { "left" } else { "right" };
        let proc_ = *PROCEDURES.choose(rng).expect("non-empty");
        let grade = *GRADES.choose(rng).expect("non-empty");
        let tnm = *TNM.choose(rng).expect("non-empty");
        let idx = match (kind, related) {
            (EntityKind::Type, true) => b.sentence("Diagnosis :", EntityKind::Subtype, subtype, "of the primary organ ."),
            (EntityKind::Type, false) => b.sentence("No residual", EntityKind::Subtype, subtype, "is seen in the prior specimen ."),
            (EntityKind::Site, true) => b.sentence("Procedure :", kind, &format!("{side} , {proc_}"), "."),
            (EntityKind::Site, false) => b.sentence("A remote operation on the", kind, side, "side is noted ."),
            (EntityKind::Size, true) => b.sentence("The", kind, &format!("maximum diameter of the neoplasm is {n_cm} cm"), "."),
            (EntityKind::Size, false) => b.sentence("A satellite nodule measures", kind, &format!("{n_cm} cm"), "."),
            (EntityKind::Subtype, true) => b.sentence("Histologic type :", kind, subtype, "."),
            (EntityKind::Subtype, false) => b.sentence("Differential once included", kind, subtype, "."),
            (EntityKind::Grade, true) => b.sentence("Nuclear grade varies from", kind, grade, "."),
            (EntityKind::Grade, false) => b.sentence("The referring biopsy suggested", kind, grade, "."),
            (EntityKind::Tnm, true) => b.sentence("TNM Stage :", kind, tnm, "."),
            (EntityKind::Tnm, false) => b.sentence("Outside clinical staging listed", kind, tnm, "."),
            (EntityKind::Metas, true) => b.sentence("Regional Lymph Nodes :", kind, &format!("Negative {a}/{total}"), "."),
            (EntityKind::Metas, false) => b.sentence("Nodes from an unrelated prior case were", kind, &format!("{a}/{total}"), "."),
            (k, _) => return Err(Error::invalid(format!("{k} is not a pathology variable"))),
        };
        if related {
            let (head, tail) = if kind == EntityKind::Type { (idx, anchor) } else { (anchor, idx) };
            relations.push(GoldRelation {
                head: format!("M{head}"),
                tail: format!("M{tail}"),
                kind: kind.as_str().to_string(),
            });
        }
    }

    let mut doc = Document::from_text(format!("synth-{i:05}"), spec.style, b.text);
    for (m, (kind, s, e)) in b.mentions.into_iter().enumerate() {
        doc.add_mention(format!("M{m}"), kind, s, e, None)?;
    }
    doc.relations = relations;
    doc.linear_chain();
    Ok(doc)
}
