use std::sync::LazyLock;

use regex::Regex;

static FENCED_CODE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?s)```.*?(?:```|\z)|~~~.*?(?:~~~|\z)").unwrap());
static INLINE_CODE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"`[^`]*`").unwrap());
static MARKDOWN_LINK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"!?\[[^\]]*\]\([^)]*\)").unwrap());
static BARE_LINK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)<?\b(?:https?://|ftp://|www\.)[^\s>]+>?").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@_?\*\*[^*\n]+\*\*").unwrap());
static STRONG_STAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\*\*(.+?)\*\*").unwrap());
static STRONG_UNDERSCORE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"__(.+?)__").unwrap());
static STRIKE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"~~(.+?)~~").unwrap());
static EM_STAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\*([^*\s](?:[^*]*[^*\s])?)\*").unwrap());
static EM_UNDERSCORE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(^|[^\p{L}\p{N}_])_([^_\s](?:[^_]*[^_\s])?)_($|[^\p{L}\p{N}_])").unwrap());
static STRAY_DOUBLE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\*\*|__").unwrap());
static WHITESPACE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+").unwrap());

const SLOT_OPEN: char = '\u{E000}';
const SLOT_CLOSE: char = '\u{E001}';

/// Strips chat markup: code, links and emphasis markers go, mentions
/// (`@**Name**`) survive for the anonymizer. Total and idempotent.
pub fn clean(content: &str) -> String {
    let mut text: String = content.chars().filter(|&c| c != SLOT_OPEN && c != SLOT_CLOSE).collect();
    // Rules are re-applied until nothing changes; every rule only deletes
    // characters or normalizes whitespace, so this terminates.
    for _ in 0..16 {
        let next = clean_pass(&text);
        if next == text {
            break;
        }
        text = next;
    }
    text
}

fn clean_pass(input: &str) -> String {
    let text = FENCED_CODE.replace_all(input, " ");
    let text = INLINE_CODE.replace_all(&text, " ");
    let text = MARKDOWN_LINK.replace_all(&text, " ");
    let text = BARE_LINK.replace_all(&text, " ");

    let mut mentions = Vec::new();
    let text = MENTION.replace_all(&text, |caps: &regex::Captures| {
        mentions.push(caps[0].to_string());
        format!("{SLOT_OPEN}{}{SLOT_CLOSE}", mentions.len() - 1)
    });

    let text = STRONG_STAR.replace_all(&text, "$1");
    let text = STRONG_UNDERSCORE.replace_all(&text, "$1");
    let text = STRIKE.replace_all(&text, "$1");
    let text = EM_STAR.replace_all(&text, "$1");
    let text = EM_UNDERSCORE.replace_all(&text, "$1$2$3");
    let text = STRAY_DOUBLE.replace_all(&text, "");
    let text = WHITESPACE.replace_all(&text, " ");
    let mut out = text.trim().to_string();

    for (i, m) in mentions.iter().enumerate() {
        out = out.replace(&format!("{SLOT_OPEN}{i}{SLOT_CLOSE}"), m);
    }
    out
}
