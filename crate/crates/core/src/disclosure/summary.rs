use crate::sensitivity::EntitySpan;

/// Sentence boundaries as `[start, end)` char ranges, trailing whitespace excluded.
pub(crate) fn sentences(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let terminal = matches!(chars[i], '.' | '!' | '?');
        let at_break = chars.get(i + 1).is_none_or(|c| c.is_whitespace());
        if terminal && at_break {
            out.push((start, i + 1));
            i += 1;
            while i < chars.len() && chars[i].is_whitespace() {
                i += 1;
            }
            start = i;
        } else {
            i += 1;
        }
    }
    let mut end = chars.len();
    while end > start && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    if end > start {
        out.push((start, end));
    }
    // Leading whitespace before the first sentence.
    out.iter_mut().for_each(|(s, e)| {
        while *s < *e && chars[*s].is_whitespace() {
            *s += 1;
        }
    });
    out.retain(|(s, e)| s < e);
    out
}

pub fn withheld_notice(span_count: usize) -> String {
    format!("[content withheld: {span_count} sensitive passages]")
}

/// Keeps, in order, up to `max_sentences` sentences that contain no span.
///
/// Kept sentences are joined with a single space. When every sentence
/// contains a span the result is a fixed withheld notice.
pub fn extractive_filter_summary(text: &str, spans: &[EntitySpan], max_sentences: usize) -> String {
    let chars: Vec<char> = text.chars().collect();
    let all = sentences(text);
    let clean: Vec<&(usize, usize)> = all
        .iter()
        .filter(|(s, e)| !spans.iter().any(|sp| sp.start < *e && *s < sp.end))
        .collect();
    if clean.is_empty() && !all.is_empty() {
        return withheld_notice(spans.len());
    }
    clean
        .into_iter()
        .take(max_sentences)
        .map(|(s, e)| chars[*s..*e].iter().collect::<String>())
        .collect::<Vec<_>>()
        .join(" ")
}
