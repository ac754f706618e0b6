//! USPTO grant ingestion: split weekly bulk files into single-grant XML
//! chunks, parse grants, and pull out the paragraphs under the tagged
//! headings.
//!
//! Weekly full-text releases are concatenations of standalone XML documents
//! (optionally inside a zip with a single `.xml` entry). Splitting is a byte
//! scan for XML declarations; each chunk is then parsed on its own with a
//! streaming reader, so the bulk file is never held as one DOM.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{Cursor, Read};
use std::path::{Path, PathBuf};

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{source_name}: zip expected but unreadable: {reason}")]
    NotAnArchive { source_name: String, reason: String },
    #[error("{source_name}: no XML declaration found where a grant concatenation was expected")]
    MalformedConcatenation { source_name: String },
    #[error("malformed XML near byte {offset}: {reason}")]
    MalformedXml { offset: u64, reason: String },
    #[error("grant document carries no publication document number")]
    MissingDocNumber,
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One raw weekly bulk file, possibly zip-compressed.
#[derive(Debug, Clone)]
pub struct RawBulkFile {
    pub source_name: String,
    pub content: Vec<u8>,
}

impl RawBulkFile {
    pub fn new(source_name: impl Into<String>, content: Vec<u8>) -> Self {
        RawBulkFile {
            source_name: source_name.into(),
            content,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, IngestError> {
        let content = fs::read(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let source_name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(RawBulkFile {
            source_name,
            content,
        })
    }
}

/// The three tagged sections mined from grant descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TagClass {
    #[serde(rename = "AEI")]
    Aei,
    #[serde(rename = "TP")]
    Tp,
    #[serde(rename = "SP")]
    Sp,
}

impl TagClass {
    pub const ALL: [TagClass; 3] = [TagClass::Aei, TagClass::Tp, TagClass::Sp];
}

impl fmt::Display for TagClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TagClass::Aei => "AEI",
            TagClass::Tp => "TP",
            TagClass::Sp => "SP",
        };
        f.write_str(s)
    }
}

/// An element of a grant description, in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyElement {
    Heading(String),
    Paragraph { id: String, num: u32, text: String },
}

/// One parsed patent grant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrantDocument {
    /// Publication identifier, e.g. `US10842211B2`.
    pub doc_number: String,
    pub title: String,
    /// Headings and numbered paragraphs of the description, in order.
    pub body: Vec<BodyElement>,
    /// Grant year from the publication date; 0 when the document carries no
    /// date (callers may substitute the year encoded in the bulk file name).
    pub year: i32,
}

/// Paragraphs collected under one matched heading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSegment {
    pub tag: TagClass,
    pub paragraphs: Vec<String>,
    pub source_doc: String,
}

impl TaggedSegment {
    pub fn paragraph_count(&self) -> usize {
        self.paragraphs.len()
    }
}

/// A tagged segment joined with its document metadata; the unit handed to
/// the corpus builder and written by the segment dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub doc_number: String,
    pub title: String,
    pub tag: TagClass,
    pub paragraphs: Vec<String>,
    pub year: i32,
}

/// Normalized heading patterns mapped to tag classes.
///
/// Matching is exact on [`normalize`]d text, so case, punctuation and runs
/// of whitespace are irrelevant. Drafting practice varies, which is why the
/// set is configuration rather than code.
#[derive(Debug, Clone)]
pub struct HeadingMatcher {
    patterns: Vec<(String, TagClass)>,
}

impl Default for HeadingMatcher {
    fn default() -> Self {
        HeadingMatcher::from_patterns([
            ("advantageous effects of invention", TagClass::Aei),
            ("advantageous effects", TagClass::Aei),
            ("technical problem", TagClass::Tp),
            ("technical problems", TagClass::Tp),
            ("solution to problem", TagClass::Sp),
            ("solutions to problem", TagClass::Sp),
            ("solution to the problem", TagClass::Sp),
        ])
    }
}

impl HeadingMatcher {
    pub fn from_patterns<I, S>(patterns: I) -> Self
    where
        I: IntoIterator<Item = (S, TagClass)>,
        S: AsRef<str>,
    {
        let patterns = patterns
            .into_iter()
            .map(|(p, t)| (normalize(p.as_ref()), t))
            .filter(|(p, _)| !p.is_empty())
            .collect();
        HeadingMatcher { patterns }
    }

    /// The normalized patterns and their classes, in match priority order.
    pub fn patterns(&self) -> &[(String, TagClass)] {
        &self.patterns
    }

    /// Total function: unmatched headings yield `None`.
    pub fn match_heading(&self, heading_text: &str) -> Option<TagClass> {
        self.match_heading_detailed(heading_text).map(|(t, _)| t)
    }

    /// Like [`Self::match_heading`] but also names the pattern that fired,
    /// for per-pattern drift reporting.
    pub fn match_heading_detailed(&self, heading_text: &str) -> Option<(TagClass, &str)> {
        let norm = normalize(heading_text);
        self.patterns
            .iter()
            .find(|(p, _)| *p == norm)
            .map(|(p, t)| (*t, p.as_str()))
    }
}

/// Match against the default pattern set.
pub fn match_heading(heading_text: &str) -> Option<TagClass> {
    HeadingMatcher::default().match_heading(heading_text)
}

/// Split a bulk file into single-document XML texts, in file order.
///
/// Concatenating the returned chunks reproduces the (decompressed) input
/// exactly. An empty file yields an empty sequence.
pub fn split_bulk_file(file: &RawBulkFile) -> Result<Vec<String>, IngestError> {
    let text = decode_content(file)?;
    split_concatenated_xml(&text, &file.source_name)
}

fn decode_content(file: &RawBulkFile) -> Result<String, IngestError> {
    if file.content.starts_with(b"PK") {
        let cursor = Cursor::new(&file.content);
        let mut archive =
            zip::ZipArchive::new(cursor).map_err(|e| IngestError::NotAnArchive {
                source_name: file.source_name.clone(),
                reason: e.to_string(),
            })?;
        let xml_index = (0..archive.len())
            .find(|&i| {
                archive
                    .name_for_index(i)
                    .map(|n| n.to_ascii_lowercase().ends_with(".xml"))
                    .unwrap_or(false)
            })
            .or(if archive.is_empty() { None } else { Some(0) })
            .ok_or_else(|| IngestError::NotAnArchive {
                source_name: file.source_name.clone(),
                reason: "archive contains no entries".into(),
            })?;
        let mut entry = archive
            .by_index(xml_index)
            .map_err(|e| IngestError::NotAnArchive {
                source_name: file.source_name.clone(),
                reason: e.to_string(),
            })?;
        let mut buf = Vec::new();
        entry
            .read_to_end(&mut buf)
            .map_err(|e| IngestError::NotAnArchive {
                source_name: file.source_name.clone(),
                reason: e.to_string(),
            })?;
        Ok(String::from_utf8_lossy(&buf).into_owned())
    } else {
        Ok(String::from_utf8_lossy(&file.content).into_owned())
    }
}

fn split_concatenated_xml(text: &str, source_name: &str) -> Result<Vec<String>, IngestError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let body = text.strip_prefix('\u{feff}').unwrap_or(text);
    if !body.starts_with("<?xml") {
        return Err(IngestError::MalformedConcatenation {
            source_name: source_name.to_string(),
        });
    }
    let mut starts = vec![0usize];
    let mut pos = 0usize;
    while let Some(found) = text[pos..].find("\n<?xml") {
        let at = pos + found + 1;
        starts.push(at);
        pos = at;
    }
    let mut chunks = Vec::with_capacity(starts.len());
    for (i, &s) in starts.iter().enumerate() {
        let end = starts.get(i + 1).copied().unwrap_or(text.len());
        chunks.push(text[s..end].to_string());
    }
    Ok(chunks)
}

/// Grant year implied by the USPTO naming convention `ipgYYMMDD`.
pub fn year_from_source_name(source_name: &str) -> Option<i32> {
    let idx = source_name.find("ipg")?;
    let digits = source_name.get(idx + 3..idx + 5)?;
    let yy: i32 = digits.parse().ok()?;
    Some(2000 + yy)
}

// Subtrees inside <p> whose text is markup payload, not prose.
const SKIPPED_SUBTREES: [&str; 3] = ["maths", "tables", "chemistry"];

/// Parse one grant document.
///
/// `doc_number` is the concatenated country, document number and kind code
/// from the publication reference. The body preserves document order over
/// headings and `<p>` paragraphs of the description.
pub fn parse_grant(xml_text: &str) -> Result<GrantDocument, IngestError> {
    let mut reader = Reader::from_str(xml_text);
    reader.config_mut().trim_text(true);

    let mut path: Vec<String> = Vec::new();
    let mut doc_country = String::new();
    let mut doc_num = String::new();
    let mut doc_kind = String::new();
    let mut year = 0i32;
    let mut title = String::new();
    let mut body: Vec<BodyElement> = Vec::new();

    let mut in_publication_ref = false;
    let mut in_description = false;
    let mut in_title = false;
    let mut current_heading: Option<String> = None;
    let mut current_para: Option<(String, u32, String)> = None;
    let mut skip_depth = 0usize;

    loop {
        let position = reader.buffer_position();
        match reader.read_event() {
            Err(e) => {
                return Err(IngestError::MalformedXml {
                    offset: position,
                    reason: e.to_string(),
                })
            }
            Ok(Event::Eof) => break,
            Ok(Event::Start(e)) => {
                let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
                if skip_depth > 0 {
                    skip_depth += 1;
                    path.push(name);
                    continue;
                }
                match name.as_str() {
                    "publication-reference" => in_publication_ref = true,
                    "description" => in_description = true,
                    "invention-title" => in_title = true,
                    "heading" if in_description && current_para.is_none() => {
                        current_heading = Some(String::new());
                    }
                    "p" if in_description && current_heading.is_none() => {
                        let (id, num) = paragraph_attrs(&e, position)?;
                        current_para = Some((id, num, String::new()));
                    }
                    _ if in_description && SKIPPED_SUBTREES.contains(&name.as_str()) => {
                        skip_depth = 1;
                    }
                    _ => {}
                }
                path.push(name);
            }
            Ok(Event::Empty(e)) => {
                if skip_depth > 0 {
                    continue;
                }
                let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
                match name.as_str() {
                    "heading" if in_description && current_para.is_none() => {
                        body.push(BodyElement::Heading(String::new()));
                    }
                    "p" if in_description && current_heading.is_none() => {
                        let (id, num) = paragraph_attrs(&e, position)?;
                        body.push(BodyElement::Paragraph {
                            id,
                            num,
                            text: String::new(),
                        });
                    }
                    _ => {}
                }
            }
            Ok(Event::End(e)) => {
                let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
                path.pop();
                if skip_depth > 0 {
                    skip_depth -= 1;
                    continue;
                }
                match name.as_str() {
                    "publication-reference" => in_publication_ref = false,
                    "description" => in_description = false,
                    "invention-title" => in_title = false,
                    "heading" => {
                        if let Some(text) = current_heading.take() {
                            body.push(BodyElement::Heading(text.trim().to_string()));
                        }
                    }
                    "p" => {
                        if let Some((id, num, text)) = current_para.take() {
                            body.push(BodyElement::Paragraph {
                                id,
                                num,
                                text: text.trim().to_string(),
                            });
                        }
                    }
                    _ => {}
                }
            }
            Ok(Event::Text(t)) => {
                if skip_depth > 0 {
                    continue;
                }
                let text = t
                    .unescape_with(resolve_entity)
                    .map_err(|err| IngestError::MalformedXml {
                        offset: position,
                        reason: err.to_string(),
                    })?
                    .into_owned();
                sink_text(
                    &text,
                    &path,
                    in_publication_ref,
                    in_title,
                    &mut doc_country,
                    &mut doc_num,
                    &mut doc_kind,
                    &mut year,
                    &mut title,
                    &mut current_heading,
                    &mut current_para,
                );
            }
            Ok(Event::CData(c)) => {
                if skip_depth > 0 {
                    continue;
                }
                let text = String::from_utf8_lossy(c.as_ref()).into_owned();
                sink_text(
                    &text,
                    &path,
                    in_publication_ref,
                    in_title,
                    &mut doc_country,
                    &mut doc_num,
                    &mut doc_kind,
                    &mut year,
                    &mut title,
                    &mut current_heading,
                    &mut current_para,
                );
            }
            Ok(_) => {}
        }
    }

    if doc_num.is_empty() {
        return Err(IngestError::MissingDocNumber);
    }
    let doc_number = format!("{doc_country}{doc_num}{doc_kind}");
    Ok(GrantDocument {
        doc_number,
        title,
        body,
        year,
    })
}

fn paragraph_attrs(
    e: &quick_xml::events::BytesStart<'_>,
    position: u64,
) -> Result<(String, u32), IngestError> {
    let mut id = String::new();
    let mut num = 0u32;
    for attr in e.attributes() {
        let attr = attr.map_err(|err| IngestError::MalformedXml {
            offset: position,
            reason: err.to_string(),
        })?;
        let value = attr
            .unescape_value()
            .map_err(|err| IngestError::MalformedXml {
                offset: position,
                reason: err.to_string(),
            })?;
        match attr.key.local_name().as_ref() {
            b"id" => id = value.into_owned(),
            b"num" => {
                let trimmed = value.trim();
                if !trimmed.is_empty() {
                    num = trimmed.parse().map_err(|_| IngestError::MalformedXml {
                        offset: position,
                        reason: format!(
                            "paragraph num attribute {trimmed:?} is not a non-negative integer"
                        ),
                    })?;
                }
            }
            _ => {}
        }
    }
    Ok((id, num))
}

fn resolve_entity(entity: &str) -> Option<&'static str> {
    // Standard entities resolve normally; DTD-defined ones (frequent in
    // grant text) degrade to a space rather than failing the parse.
    match entity {
        "lt" => Some("<"),
        "gt" => Some(">"),
        "amp" => Some("&"),
        "apos" => Some("'"),
        "quot" => Some("\""),
        _ => Some(" "),
    }
}

#[allow(clippy::too_many_arguments)]
fn sink_text(
    text: &str,
    path: &[String],
    in_publication_ref: bool,
    in_title: bool,
    doc_country: &mut String,
    doc_num: &mut String,
    doc_kind: &mut String,
    year: &mut i32,
    title: &mut String,
    current_heading: &mut Option<String>,
    current_para: &mut Option<(String, u32, String)>,
) {
    if let Some(h) = current_heading.as_mut() {
        push_joined(h, text);
        return;
    }
    if let Some((_, _, p)) = current_para.as_mut() {
        push_joined(p, text);
        return;
    }
    if in_title {
        push_joined(title, text);
        return;
    }
    if in_publication_ref {
        match path.last().map(|s| s.as_str()) {
            Some("country") if doc_country.is_empty() => doc_country.push_str(text.trim()),
            Some("doc-number") if doc_num.is_empty() => doc_num.push_str(text.trim()),
            Some("kind") if doc_kind.is_empty() => doc_kind.push_str(text.trim()),
            Some("date") if *year == 0 => {
                if let Some(y) = text.trim().get(0..4).and_then(|s| s.parse::<i32>().ok()) {
                    *year = y;
                }
            }
            _ => {}
        }
    }
}

fn push_joined(buf: &mut String, text: &str) {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return;
    }
    if !buf.is_empty() {
        buf.push(' ');
    }
    buf.push_str(trimmed);
}

/// Collect the paragraphs under each matched heading, stopping at the next
/// heading of any kind. Empty segments are kept here and filtered by the
/// corpus builder.
pub fn extract_tagged_segments(doc: &GrantDocument, matcher: &HeadingMatcher) -> Vec<TaggedSegment> {
    let mut segments = Vec::new();
    let mut open: Option<TaggedSegment> = None;
    for element in &doc.body {
        match element {
            BodyElement::Heading(text) => {
                if let Some(seg) = open.take() {
                    segments.push(seg);
                }
                if let Some(tag) = matcher.match_heading(text) {
                    open = Some(TaggedSegment {
                        tag,
                        paragraphs: Vec::new(),
                        source_doc: doc.doc_number.clone(),
                    });
                }
            }
            BodyElement::Paragraph { text, .. } => {
                if let Some(seg) = open.as_mut() {
                    seg.paragraphs.push(text.clone());
                }
            }
        }
    }
    if let Some(seg) = open.take() {
        segments.push(seg);
    }
    segments
}

/// Count of heading-pattern hits, keyed by normalized pattern.
pub type PatternHits = BTreeMap<String, usize>;

/// Everything mined from one bulk file.
#[derive(Debug, Default)]
pub struct IngestOutcome {
    pub records: Vec<SegmentRecord>,
    pub grants_seen: usize,
    pub pattern_hits: PatternHits,
    pub warnings: Vec<String>,
}

/// Split, parse and extract one bulk file end to end.
///
/// Chunks that fail to parse are reported as warnings and skipped; a bulk
/// release routinely contains a handful of exotic documents and one of them
/// should not abort a corpus build.
pub fn ingest_bulk_file(file: &RawBulkFile, matcher: &HeadingMatcher) -> Result<IngestOutcome, IngestError> {
    let chunks = split_bulk_file(file)?;
    let fallback_year = year_from_source_name(&file.source_name).unwrap_or(0);
    let mut outcome = IngestOutcome::default();
    for (index, chunk) in chunks.iter().enumerate() {
        let mut doc = match parse_grant(chunk) {
            Ok(doc) => doc,
            Err(err) => {
                outcome
                    .warnings
                    .push(format!("{} chunk {}: {}", file.source_name, index, err));
                continue;
            }
        };
        if doc.year == 0 {
            doc.year = fallback_year;
        }
        outcome.grants_seen += 1;
        for element in &doc.body {
            if let BodyElement::Heading(text) = element {
                if let Some((_, pattern)) = matcher.match_heading_detailed(text) {
                    *outcome.pattern_hits.entry(pattern.to_string()).or_insert(0) += 1;
                }
            }
        }
        for segment in extract_tagged_segments(&doc, matcher) {
            outcome.records.push(SegmentRecord {
                doc_number: doc.doc_number.clone(),
                title: doc.title.clone(),
                tag: segment.tag,
                paragraphs: segment.paragraphs,
                year: doc.year,
            });
        }
    }
    Ok(outcome)
}

/// Bulk files under a directory, by the `ipg*` naming convention, sorted.
pub fn find_bulk_files(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let entries = fs::read_dir(dir).map_err(|source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| IngestError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        let lower = name.to_ascii_lowercase();
        if lower.starts_with("ipg") && (lower.ends_with(".xml") || lower.ends_with(".zip")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}
