use super::document::Token;

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Whitespace and punctuation tokenizer. Runs of alphanumerics form one
/// token; every other non-space character is a token of its own, except
/// that `.` or `,` between two digits stays inside the number.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if is_word_char(c) {
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let numeric_sep = (d == '.' || d == ',')
                    && chars[i - 1].is_ascii_digit()
                    && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
                if is_word_char(d) || numeric_sep {
                    i += 1;
                } else {
                    break;
                }
            }
        } else {
            i += 1;
        }
        tokens.push(Token {
            surface: chars[start..i].iter().collect(),
            char_start: start,
            char_end: i,
            index: tokens.len(),
        });
    }
    tokens
}

/// Sentence boundaries: a sentence ends after a `.`, `?` or `!` token.
pub fn sentence_spans(tokens: &[Token]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    for t in tokens {
        if matches!(t.surface.as_str(), "." | "?" | "!") {
            spans.push((start, t.index + 1));
            start = t.index + 1;
        }
    }
    if start < tokens.len() {
        spans.push((start, tokens.len()));
    }
    spans
}
