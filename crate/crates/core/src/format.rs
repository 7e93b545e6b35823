//! Shared conventions for the line-oriented files the toolkit reads and writes.
//!
//! Every emitted file starts with a `# playsleuth-format <kind> v<N>` line.
//! Readers skip blank lines and lines starting with `#`, so headers and
//! comments never reach the record parsers.

/// Current version stamped into every emitted file.
pub const FORMAT_VERSION: u32 = 1;

pub fn header_line(kind: &str) -> String {
    format!("# playsleuth-format {kind} v{FORMAT_VERSION}")
}

/// Non-empty, non-comment lines with their 1-based line numbers.
pub fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parse the `kind` and version out of a header line, if it is one.
pub fn parse_header(line: &str) -> Option<(&str, u32)> {
    let rest = line.strip_prefix("# playsleuth-format ")?;
    let (kind, version) = rest.rsplit_once(' ')?;
    let version = version.strip_prefix('v')?.parse().ok()?;
    Some((kind, version))
}

/// Strip leading `#` lines from a document so the remaining body can be fed
/// to a structured parser.
pub fn strip_header(text: &str) -> &str {
    let mut rest = text;
    while rest.starts_with('#') {
        match rest.find('\n') {
            Some(i) => rest = &rest[i + 1..],
            None => return "",
        }
    }
    rest
}

/// Body of a document after checking that its header, when present, names
/// `kind` at a supported version.
pub fn document_body<'a>(text: &'a str, kind: &str) -> crate::Result<&'a str> {
    if let Some(first) = text.lines().next() {
        if let Some((found, version)) = parse_header(first.trim()) {
            if found != kind || version > FORMAT_VERSION {
                return Err(crate::Error::SchemaMismatch {
                    expected: format!("{kind} v{FORMAT_VERSION}"),
                    found: format!("{found} v{version}"),
                });
            }
        }
    }
    Ok(strip_header(text))
}
