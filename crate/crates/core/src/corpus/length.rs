use std::collections::HashSet;

use super::document::Document;

/// Report length bounds in tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LengthLimits {
    pub min: usize,
    pub max: usize,
}

impl Default for LengthLimits {
    fn default() -> Self {
        LengthLimits { min: 50, max: 150 }
    }
}

/// Truncates to `limits.max` tokens and pads with PAD up to `limits.min`.
///
/// Mentions starting beyond the cut are dropped together with their gold
/// relations; a mention straddling the cut is clipped to the last kept token.
pub fn normalize_length(mut doc: Document, limits: LengthLimits) -> Document {
    let n = doc.real_len();
    if n > limits.max {
        let cut = limits.max;
        doc.tokens.truncate(cut);
        let last_char_end = doc.tokens[cut - 1].char_end;
        let mut dropped = Vec::new();
        doc.mentions.retain_mut(|m| {
            if m.token_span.0 >= cut {
                dropped.push(m.id.clone());
                return false;
            }
            if m.token_span.1 >= cut {
                m.token_span.1 = cut - 1;
                m.char_end = m.char_end.min(last_char_end);
            }
            true
        });
        // CDR relations reference concept ids: drop them only when no mention carries the id.
        let alive: HashSet<String> = doc
            .mentions
            .iter()
            .flat_map(|m| std::iter::once(m.id.clone()).chain(m.normalized_ids().map(str::to_string)))
            .collect();
        let relations = std::mem::take(&mut doc.relations);
        doc.relations = relations
            .into_iter()
            .filter(|r| {
                !dropped.contains(&r.head) && !dropped.contains(&r.tail) && alive.contains(&r.head) && alive.contains(&r.tail)
            })
            .collect();
        doc.dep_edges.retain(|e| e.child < cut && e.head < cut);
        doc.sentences = doc
            .sentences
            .iter()
            .filter(|&&(s, _)| s < cut)
            .map(|&(s, e)| (s, e.min(cut)))
            .collect();
    }
    doc.padding = limits.min.saturating_sub(doc.real_len());
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::document::{EntityKind, GoldRelation, Source};

    fn doc_of(n: usize) -> Document {
        let text = (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        Document::from_text("d", Source::Synthetic, text)
    }

    #[test]
    fn long_short_and_interior_lengths() {
        let long = normalize_length(doc_of(200), LengthLimits::default());
        assert_eq!((long.len(), long.padding, long.original_len), (150, 0, 200));
        let short = normalize_length(doc_of(10), LengthLimits::default());
        assert_eq!((short.len(), short.padding, short.real_len()), (50, 40, 10));
        let mid = normalize_length(doc_of(100), LengthLimits::default());
        assert_eq!(mid, doc_of(100));
    }

    #[test]
    fn mentions_past_the_cut_are_dropped_with_relations() {
        let mut d = doc_of(200);
        let tok = d.tokens.clone();
        d.add_mention("A", EntityKind::Type, tok[3].char_start, tok[3].char_end, None).unwrap();
        d.add_mention("B", EntityKind::Size, tok[160].char_start, tok[161].char_end, None).unwrap();
        d.add_mention("C", EntityKind::Site, tok[149].char_start, tok[151].char_end, None).unwrap();
        d.relations.push(GoldRelation {
            head: "A".into(),
            tail: "B".into(),
            kind: "Size".into(),
        });
        d.relations.push(GoldRelation {
            head: "A".into(),
            tail: "C".into(),
            kind: "Site".into(),
        });
        let n = normalize_length(d, LengthLimits::default());
        assert_eq!(n.mentions.len(), 2);
        assert_eq!(n.mentions[1].token_span, (149, 149));
        assert_eq!(n.relations.len(), 1);
        assert_eq!(n.relations[0].tail, "C");
    }
}
