//! Main-text extraction from HTML or plain-text payloads.

use ego_tree::NodeRef;
use scraper::{Html, Node, Selector};

use super::IngestError;
use crate::text::collapse_whitespace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extracted {
    pub title: String,
    /// Paragraphs separated by `\n`, whitespace inside each collapsed to single spaces.
    pub body: String,
}

const DROPPED: &[&str] = &[
    "script", "style", "noscript", "template", "nav", "header", "footer", "aside", "form", "iframe",
    "svg", "button", "select", "head", "menu",
];

const BLOCKS: &[&str] = &[
    "p", "div", "section", "article", "main", "h1", "h2", "h3", "h4", "h5", "h6", "li", "ul", "ol",
    "blockquote", "pre", "table", "tr", "br", "hr", "figure", "figcaption", "dd", "dt", "dl",
    "address", "body",
];

const BOILERPLATE_MARKERS: &[&str] = &[
    "nav", "navbar", "navigation", "menu", "breadcrumb", "breadcrumbs", "footer", "sidebar",
    "share", "social", "cookie", "cookies", "advert", "ads", "related", "subscribe", "newsletter",
];

const BOILERPLATE_ROLES: &[&str] = &["navigation", "banner", "contentinfo", "complementary"];

/// Extracts a title and the main body text from a fetched payload.
///
/// HTML is detected from the content type (or a leading `<` when the type is
/// empty). Anything else is treated as plain text, for which extraction only
/// normalizes whitespace, so running it on its own output is a no-op.
pub fn extract_text(raw_payload: &[u8], content_type: &str) -> Result<Extracted, IngestError> {
    let text = decode(raw_payload, content_type)?;
    let ct = content_type.to_ascii_lowercase();
    let is_html = ct.contains("html")
        || (ct.trim().is_empty() && text.trim_start().starts_with('<'));
    let extracted = if is_html {
        extract_html(&text)
    } else {
        Extracted {
            title: String::new(),
            body: normalize_paragraphs(&text),
        }
    };
    if extracted.body.is_empty() {
        return Err(IngestError::EmptyAfterExtraction);
    }
    Ok(extracted)
}

fn decode(raw: &[u8], content_type: &str) -> Result<String, IngestError> {
    let raw = raw.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(raw);
    if let Ok(s) = std::str::from_utf8(raw) {
        return Ok(s.to_owned());
    }
    let label = content_type
        .split(';')
        .filter_map(|p| p.trim().strip_prefix("charset="))
        .next()
        .map(|c| c.trim_matches('"'))
        .ok_or_else(|| IngestError::UndecodablePayload("not UTF-8 and no charset declared".into()))?;
    let encoding = encoding_rs::Encoding::for_label(label.as_bytes())
        .ok_or_else(|| IngestError::UndecodablePayload(format!("unknown charset `{label}`")))?;
    encoding
        .decode_without_bom_handling_and_without_replacement(raw)
        .map(|s| s.into_owned())
        .ok_or_else(|| IngestError::UndecodablePayload(format!("invalid {label} byte sequence")))
}

fn normalize_paragraphs(text: &str) -> String {
    text.lines()
        .map(collapse_whitespace)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

fn extract_html(html: &str) -> Extracted {
    let doc = Html::parse_document(html);
    let title = Selector::parse("title")
        .ok()
        .and_then(|sel| doc.select(&sel).next())
        .map(|t| collapse_whitespace(&t.text().collect::<String>()))
        .unwrap_or_default();

    // Prefer the article/main container when one exists.
    let root = ["article", "main", "body"]
        .iter()
        .filter_map(|name| Selector::parse(name).ok())
        .find_map(|sel| doc.select(&sel).next().map(|e| *e))
        .unwrap_or_else(|| doc.tree.root());

    let mut walker = Walker::default();
    walker.visit(root);
    walker.flush();
    let title = if title.is_empty() {
        Selector::parse("h1")
            .ok()
            .and_then(|sel| doc.select(&sel).next())
            .map(|h| collapse_whitespace(&h.text().collect::<String>()))
            .unwrap_or_default()
    } else {
        title
    };
    Extracted {
        title,
        body: walker.paragraphs.join("\n"),
    }
}

#[derive(Default)]
struct Walker {
    current: String,
    paragraphs: Vec<String>,
}

impl Walker {
    fn visit(&mut self, node: NodeRef<Node>) {
        match node.value() {
            Node::Text(t) => self.current.push_str(t),
            Node::Element(el) => {
                let name = el.name();
                if DROPPED.contains(&name) || is_boilerplate(el) {
                    return;
                }
                let block = BLOCKS.contains(&name);
                if block {
                    self.flush();
                }
                for child in node.children() {
                    self.visit(child);
                }
                if block {
                    self.flush();
                }
            }
            Node::Document | Node::Fragment => {
                for child in node.children() {
                    self.visit(child);
                }
            }
            _ => {}
        }
    }

    fn flush(&mut self) {
        let para = collapse_whitespace(&self.current);
        if !para.is_empty() {
            self.paragraphs.push(para);
        }
        self.current.clear();
    }
}

fn is_boilerplate(el: &scraper::node::Element) -> bool {
    if el.attr("role").is_some_and(|r| BOILERPLATE_ROLES.contains(&r)) {
        return true;
    }
    let marked = |value: &str| {
        value
            .split(|c: char| c.is_whitespace() || c == '-' || c == '_')
            .any(|tok| BOILERPLATE_MARKERS.contains(&tok.to_ascii_lowercase().as_str()))
    };
    el.attr("class").is_some_and(marked) || el.attr("id").is_some_and(marked)
}
