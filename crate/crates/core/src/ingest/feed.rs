//! RSS 2.0 and Atom 1.0 parsing into [`ArticleStub`]s.

use std::collections::HashSet;

use chrono::{DateTime, Utc};
use roxmltree::{Document, Node, ParsingOptions};
use url::Url;

use super::{ArticleStub, Fetcher, IngestError, Source};
use crate::text::collapse_whitespace;

/// A feed entry that was skipped, with the byte offset of its element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedIssue {
    pub offset: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedFeed {
    pub stubs: Vec<ArticleStub>,
    pub issues: Vec<FeedIssue>,
}

/// Fetches and parses a source's feed. Entries are returned in feed order.
pub fn fetch_feed(source: &Source, fetcher: &Fetcher) -> Result<ParsedFeed, IngestError> {
    let doc = fetcher
        .fetch(&source.feed_url)
        .map_err(|reason| IngestError::UnreachableSource {
            source_id: source.id.clone(),
            reason,
        })?;
    parse_feed(&source.id, &source.homepage_url, &doc.bytes)
}

pub fn parse_feed(source_id: &str, base_url: &str, bytes: &[u8]) -> Result<ParsedFeed, IngestError> {
    let malformed = |offset: usize, reason: String| IngestError::MalformedFeed {
        source_id: source_id.to_owned(),
        offset,
        reason,
    };
    let input = std::str::from_utf8(bytes).map_err(|e| malformed(e.valid_up_to(), "feed is not UTF-8".into()))?;
    let opts = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    let doc = Document::parse_with_options(input, opts).map_err(|e| {
        let pos = e.pos();
        malformed(byte_offset(input, pos.row, pos.col), e.to_string())
    })?;
    let base = Url::parse(base_url).ok();
    let root = doc.root_element();
    let ctx = EntryContext {
        source_id,
        base: base.as_ref(),
        input,
    };

    let mut parsed = ParsedFeed::default();
    let entries: Vec<Node> = match root.tag_name().name() {
        "rss" => root
            .children()
            .filter(|n| n.has_tag_name("channel"))
            .flat_map(|c| c.children().filter(|n| n.has_tag_name("item")))
            .collect(),
        "feed" => root.children().filter(|n| n.has_tag_name("entry")).collect(),
        other => return Err(malformed(root.range().start, format!("unsupported root element <{other}>"))),
    };
    let atom = root.tag_name().name() == "feed";
    let mut seen_urls = HashSet::new();
    for entry in entries {
        let result = if atom { ctx.atom_entry(entry) } else { ctx.rss_item(entry) };
        match result {
            Ok(stub) => {
                if seen_urls.insert(stub.url.clone()) {
                    parsed.stubs.push(stub);
                } else {
                    parsed.issues.push(FeedIssue {
                        offset: entry.range().start,
                        reason: format!("duplicate url {}", stub.url),
                    });
                }
            }
            Err(reason) => parsed.issues.push(FeedIssue {
                offset: entry.range().start,
                reason,
            }),
        }
    }
    Ok(parsed)
}

struct EntryContext<'a> {
    source_id: &'a str,
    base: Option<&'a Url>,
    input: &'a str,
}

impl EntryContext<'_> {
    fn rss_item(&self, item: Node) -> Result<ArticleStub, String> {
        let link = child(item, "link").map(text_of).filter(|l| !l.trim().is_empty());
        let link = link.ok_or_else(|| "item has no <link>".to_owned())?;
        let url = self.resolve(&link)?;
        let published_at = child(item, "pubDate").and_then(|n| {
            DateTime::parse_from_rfc2822(text_of(n).trim())
                .ok()
                .map(|d| d.with_timezone(&Utc))
        });
        // content:encoded wins over description
        let payload = child(item, "encoded")
            .or_else(|| child(item, "description"))
            .map(text_of)
            .unwrap_or_default();
        Ok(self.stub(url, child(item, "title").map(text_of), published_at, payload))
    }

    fn atom_entry(&self, entry: Node) -> Result<ArticleStub, String> {
        let link = entry
            .children()
            .filter(|n| n.has_tag_name("link"))
            .find(|n| matches!(n.attribute("rel"), None | Some("alternate")))
            .and_then(|n| n.attribute("href"))
            .ok_or_else(|| "entry has no alternate <link href>".to_owned())?;
        let url = self.resolve(link)?;
        let published_at = child(entry, "published")
            .or_else(|| child(entry, "updated"))
            .and_then(|n| DateTime::parse_from_rfc3339(text_of(n).trim()).ok())
            .map(|d| d.with_timezone(&Utc));
        let payload = child(entry, "content")
            .or_else(|| child(entry, "summary"))
            .map(|n| match n.attribute("type") {
                Some("xhtml") => n
                    .children()
                    .find(|c| c.is_element())
                    .map(|c| self.input[c.range()].to_owned())
                    .unwrap_or_default(),
                _ => text_of(n),
            })
            .unwrap_or_default();
        Ok(self.stub(url, child(entry, "title").map(text_of), published_at, payload))
    }

    fn resolve(&self, link: &str) -> Result<String, String> {
        let link = link.trim();
        match Url::parse(link) {
            Ok(u) => Ok(u.to_string()),
            Err(url::ParseError::RelativeUrlWithoutBase) => self
                .base
                .and_then(|b| b.join(link).ok())
                .map(|u| u.to_string())
                .ok_or_else(|| format!("relative link `{link}` with no usable base")),
            Err(e) => Err(format!("bad link `{link}`: {e}")),
        }
    }

    fn stub(
        &self,
        url: String,
        title: Option<String>,
        published_at: Option<DateTime<Utc>>,
        payload: String,
    ) -> ArticleStub {
        ArticleStub {
            source_id: self.source_id.to_owned(),
            url,
            title: title.map(|t| collapse_whitespace(&t)).unwrap_or_default(),
            published_at,
            raw_payload: payload.into_bytes(),
            content_type: "text/html".to_owned(),
        }
    }
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|n| n.tag_name().name() == name)
}

fn text_of(node: Node) -> String {
    node.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()).collect()
}

/// Converts a 1-based (row, column-in-chars) position into a byte offset.
fn byte_offset(input: &str, row: u32, col: u32) -> usize {
    let mut offset = 0;
    for (i, line) in input.split_inclusive('\n').enumerate() {
        if i + 1 == row as usize {
            let within: usize = line.chars().take(col.saturating_sub(1) as usize).map(char::len_utf8).sum();
            return offset + within;
        }
        offset += line.len();
    }
    input.len()
}
