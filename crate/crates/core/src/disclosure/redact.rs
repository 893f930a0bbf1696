use super::DisclosureError;
use crate::sensitivity::{CharOffsets, EntitySpan};

pub fn placeholder_for(template: &str, entity_type: &str) -> String {
    template.replace("{TYPE}", entity_type)
}

/// Replaces every span with the placeholder template, right to left.
///
/// Spans must be within the text and pairwise non-overlapping; merge them first.
pub fn redact(text: &str, spans: &[EntitySpan], template: &str) -> Result<String, DisclosureError> {
    let offsets = CharOffsets::new(text);
    let mut sorted: Vec<&EntitySpan> = spans.iter().collect();
    sorted.sort_by_key(|s| (s.start, s.end));
    for s in &sorted {
        if s.start >= s.end || s.end > offsets.char_len() {
            return Err(DisclosureError::SpanOutOfBounds {
                start: s.start,
                end: s.end,
            });
        }
    }
    for pair in sorted.windows(2) {
        if pair[0].overlaps(pair[1]) {
            return Err(DisclosureError::OverlappingSpans {
                first: (pair[0].start, pair[0].end),
                second: (pair[1].start, pair[1].end),
            });
        }
    }
    let mut out = text.to_string();
    for s in sorted.iter().rev() {
        out.replace_range(
            offsets.byte(s.start)..offsets.byte(s.end),
            &placeholder_for(template, &s.entity_type),
        );
    }
    Ok(out)
}
