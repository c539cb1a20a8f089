/// Levenshtein ratio on a 0-100 scale, where substitutions cost two
/// (insert plus delete): `100 * (|a| + |b| - d) / (|a| + |b|)`.
///
/// This is the ratio FuzzyWuzzy reports when backed by python-Levenshtein.
/// Two empty strings are identical (100).
pub fn levenshtein_ratio(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 100.0;
    }
    // Indel distance is |a| + |b| - 2 * LCS.
    let lcs = lcs_len(&a, &b);
    100.0 * (2 * lcs) as f64 / total as f64
}

fn lcs_len(a: &[char], b: &[char]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &ca in a {
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = if ca == cb {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Lowercases and collapses whitespace.
pub fn normalize_text(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Best ratio between `value` and any window of `tokens` whose length is
/// within one word of `value`'s word count.
pub fn best_window_ratio(value: &str, tokens: &[String]) -> f64 {
    let value = normalize_text(value);
    if value.is_empty() || tokens.is_empty() {
        return 0.0;
    }
    let words = value.split(' ').count();
    let mut best: f64 = 0.0;
    for width in words.saturating_sub(1).max(1)..=words + 1 {
        if width > tokens.len() {
            break;
        }
        for window in tokens.windows(width) {
            let ratio = levenshtein_ratio(&value, &normalize_text(&window.join(" ")));
            best = best.max(ratio);
            if best >= 100.0 {
                return best;
            }
        }
    }
    best
}
