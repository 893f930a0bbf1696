use super::EntitySpan;

/// Raises a span's confidence by `boost` (capped at 1.0) when any context word
/// appears, case-insensitively, within `window` characters before it.
pub fn context_adjust(
    mut span: EntitySpan,
    text: &str,
    context_words: &[String],
    window: usize,
    boost: f64,
) -> EntitySpan {
    if context_words.is_empty() {
        return span;
    }
    let from = span.start.saturating_sub(window);
    let preceding: String = text
        .chars()
        .skip(from)
        .take(span.start - from)
        .collect::<String>()
        .to_lowercase();
    let hit = context_words
        .iter()
        .filter(|w| !w.is_empty())
        .any(|w| preceding.contains(&w.to_lowercase()));
    if hit {
        span.confidence = (span.confidence + boost).min(1.0);
    }
    span
}

/// Merges overlapping or touching spans of the same entity type.
///
/// Spans of different types are kept even when they overlap. The output is
/// sorted by `(start, end, entity_type)`.
pub fn merge_spans(mut spans: Vec<EntitySpan>) -> Vec<EntitySpan> {
    spans.sort_by(|a, b| {
        a.entity_type
            .cmp(&b.entity_type)
            .then(a.start.cmp(&b.start))
            .then(a.end.cmp(&b.end))
    });
    let mut merged: Vec<EntitySpan> = Vec::with_capacity(spans.len());
    for span in spans {
        match merged.last_mut() {
            Some(prev) if prev.entity_type == span.entity_type && span.start <= prev.end => {
                prev.end = prev.end.max(span.end);
                if span.confidence > prev.confidence {
                    prev.confidence = span.confidence;
                    prev.recognizer_id = span.recognizer_id;
                }
            }
            _ => merged.push(span),
        }
    }
    sort_spans(&mut merged);
    merged
}

pub(crate) fn sort_spans(spans: &mut [EntitySpan]) {
    spans.sort_by(|a, b| {
        a.start
            .cmp(&b.start)
            .then(a.end.cmp(&b.end))
            .then_with(|| a.entity_type.cmp(&b.entity_type))
    });
}
